use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nestmc::error::{Error, Result};
use nestmc::estimators::{BudgetPolicy, EstimatorVariant};
use nestmc::harness::{
    build_measure, density_compare, poker_grid, run_sweep, summarize, write_manifest, write_records, EstimatorId,
    InnerRule, Manifest, ModelId, ModelParams, PokerGrid, SweepConfig,
};
use nestmc::models::{bed_estimate, bed_mi_analytic};
use nestmc::schedules::{cost_ratio_c, g_factor, nmc_mse_bound, onmc_mse_bound, RateConstants, Schedule};
use nestmc::RngStream;

#[derive(Parser)]
#[command(name = "nestmc", version, about = "Nested Monte Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replicates over a budget ladder and write one CSV row per run.
    Sweep(SweepArgs),
    /// Compare output densities of nested inference estimators on the beta-gamma model.
    Density(DensityArgs),
    /// Expected poker payoffs over a hand x bet grid.
    PokerGrid(PokerArgs),
    /// Estimate the expected information gain of a Gaussian experiment.
    Bed(BedArgs),
    /// Print cost ratios, bias factors and error bounds.
    Constants(ConstantsArgs),
}

#[derive(Args)]
struct Common {
    /// Root seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; a `.manifest` file is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    model: String,
    #[arg(long)]
    estimator: String,
    /// const:N | sqrt-floor:F | sqrt-cap:C | poly:A,alpha[,floor]
    #[arg(long)]
    schedule: Option<String>,
    /// Comma-separated total budgets, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    budgets: Vec<u64>,
    #[arg(long, default_value_t = 10)]
    replicates: u64,
    /// Observation of the beta-gamma and conjugate models.
    #[arg(long = "data-D", default_value_t = 2.0)]
    data_d: f64,
    /// Smallest budget an online run may be stopped at (sets the default schedule floor).
    #[arg(long)]
    tmin: Option<u64>,
    #[arg(long, default_value_t = 0.1)]
    hand: f64,
    #[arg(long, default_value_t = 6.0)]
    bet: f64,
    #[arg(long, default_value_t = 1.0)]
    design: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long = "data-D", default_value_t = 2.0)]
    data_d: f64,
    /// Outer samples of the compared estimators.
    #[arg(long, default_value_t = 100_000)]
    n0: u64,
    /// Schedule of the single-sample estimator.
    #[arg(long, default_value = "sqrt-floor:100")]
    schedule: String,
    #[arg(long, default_value_t = 100_000)]
    reference_n0: u64,
    #[arg(long, default_value_t = 1000)]
    reference_n1: u64,
    #[arg(long, default_value_t = 60)]
    bins: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PokerArgs {
    /// Outer samples per cell.
    #[arg(long, default_value_t = 10_000)]
    n0: u64,
    /// naive | broken | nested-is-single | nested-is-rb
    #[arg(long, default_value = "nested-is-single")]
    estimator: String,
    #[arg(long, default_value = "const:100")]
    schedule: String,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct BedArgs {
    #[arg(long, default_value_t = 1.0)]
    design: f64,
    #[arg(long, default_value_t = 10_000)]
    n: u64,
    #[arg(long, default_value_t = 10_000)]
    m: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long, default_value_t = 5)]
    max_depth: u32,
    #[arg(long, default_value_t = 1000)]
    n0: u64,
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn save_manifest(path: &Option<PathBuf>, manifest: &Manifest) -> Result<()> {
    if let Some(p) = path {
        let mut name = p.as_os_str().to_owned();
        name.push(".manifest");
        write_manifest(manifest, File::create(Path::new(&name))?)?;
    }
    Ok(())
}

fn command_line() -> String {
    std::env::args().collect::<Vec<_>>().join(" ")
}

fn sweep(a: SweepArgs) -> Result<()> {
    let mut cfg = SweepConfig::new(a.model.parse()?, a.estimator.parse()?, a.budgets, a.replicates, a.common.seed);
    cfg.inner = a.schedule.as_deref().map(str::parse::<Schedule>).transpose()?.map(InnerRule::Schedule);
    cfg.params = ModelParams { data: a.data_d, poker_hand: a.hand, poker_bet: a.bet, bed_design: a.design };
    cfg.t_min = a.tmin;
    let records = run_sweep(&cfg)?;
    write_records(&records, open_out(&a.common.out)?)?;
    for s in summarize(&records) {
        eprintln!("T={:<10} mse={:.4e} ± {:.1e}  median={:.4e}", s.t, s.mean_sq_error, s.se_sq_error, s.median_sq_error);
    }
    let mut m = Manifest::new();
    m.set("command", command_line())
        .set("model", cfg.model)
        .set("estimator", cfg.estimator)
        .set("inner", cfg.inner_rule())
        .set("budgets", cfg.ladder.iter().map(u64::to_string).collect::<Vec<_>>().join(","))
        .set("replicates", cfg.replicates)
        .set("seed", cfg.seed)
        .set("data_D", cfg.params.data)
        .set("truth", records.first().and_then(|r| r.truth).map_or("none".into(), |t| t.to_string()))
        .set("records", records.len());
    save_manifest(&a.common.out, &m)
}

fn density(a: DensityArgs) -> Result<()> {
    let schedule: Schedule = a.schedule.parse()?;
    let params = ModelParams { data: a.data_d, ..ModelParams::default() };
    let cfg = |estimator, inner| SweepConfig {
        inner: Some(inner),
        params,
        ..SweepConfig::new(ModelId::BetaGamma, estimator, vec![1], 2, a.common.seed)
    };
    let root = RngStream::new(a.common.seed);
    let reference = cfg(EstimatorId::NestedIsRb, InnerRule::Schedule(Schedule::Constant(a.reference_n1)));
    let onmc = cfg(EstimatorId::NestedIsSingle, InnerRule::Schedule(schedule));
    let fixed = InnerRule::Schedule(Schedule::Constant(1));
    let measures = vec![
        ("reference".to_string(), build_measure(&reference, a.reference_n0 * a.reference_n1, root.substream(0))?),
        ("onmc-single".to_string(), build_measure(&onmc, budget_for(&onmc, a.n0), root.substream(1))?),
        ("broken".to_string(), build_measure(&cfg(EstimatorId::Broken, fixed), 2 * a.n0, root.substream(2))?),
        ("naive".to_string(), build_measure(&cfg(EstimatorId::Naive, fixed), a.n0, root.substream(3))?),
    ];
    let report = density_compare(measures, a.bins, None)?;
    report.write_csv(open_out(&a.common.out)?)?;
    for k in &report.ks {
        let verdict = if k.rejects() { "differ" } else { "consistent" };
        eprintln!("KS({}, {}) = {:.5}  critical(1%) = {:.5}  {verdict}", k.a, k.b, k.statistic, k.critical);
    }
    let mut m = Manifest::new();
    m.set("command", command_line()).set("data_D", a.data_d).set("schedule", schedule).set("n0", a.n0);
    for k in &report.ks {
        m.set(&format!("ks.{}.{}", k.a, k.b), k.statistic).set(&format!("critical.{}.{}", k.a, k.b), k.critical);
    }
    save_manifest(&a.common.out, &m)
}

/// Total inner budget that gives the online single-sample estimator `n0` outer samples.
fn budget_for(cfg: &SweepConfig, n0: u64) -> u64 {
    match cfg.inner_rule() {
        InnerRule::Schedule(s) => (1..=n0).map(|n| s.tau(n)).sum(),
        InnerRule::SqrtSplit => n0,
    }
}

fn poker(a: PokerArgs) -> Result<()> {
    let variant = match a.estimator.as_str() {
        "naive" => EstimatorVariant::NaiveN1Equals1,
        "broken" => EstimatorVariant::BrokenConditionalN1Equals2,
        "nested-is-single" => EstimatorVariant::SingleSample,
        "nested-is-rb" => EstimatorVariant::RaoBlackwellized,
        other => return Err(Error::Config(format!("poker-grid does not support estimator `{other}`"))),
    };
    let schedule: Schedule = a.schedule.parse()?;
    let (hands, bets) = PokerGrid::default_axes();
    let grid = poker_grid(&hands, &bets, a.n0, variant, &BudgetPolicy::schedule_single(schedule), a.common.seed)?;
    grid.write_csv(open_out(&a.common.out)?)?;
    let mut m = Manifest::new();
    m.set("command", command_line())
        .set("estimator", &a.estimator)
        .set("schedule", schedule)
        .set("n0", a.n0)
        .set("seed", a.common.seed)
        .set("cells", grid.cells.len());
    save_manifest(&a.common.out, &m)
}

fn bed(a: BedArgs) -> Result<()> {
    let truth = bed_mi_analytic(a.design)?;
    let est = bed_estimate(a.design, a.n, a.m, RngStream::new(a.common.seed))?;
    let mut out = open_out(&a.common.out)?;
    writeln!(out, "design,N,M,seed,estimate,std_error,truth")?;
    writeln!(out, "{},{},{},{},{},{},{}", a.design, a.n, a.m, a.common.seed, est.estimate, est.std_error, truth)?;
    out.flush()?;
    eprintln!("estimate {:.6} ± {:.6}, analytic {:.6}", est.estimate, est.std_error, truth);
    Ok(())
}

fn constants(a: ConstantsArgs) -> Result<()> {
    let mut out = io::stdout().lock();
    writeln!(out, "alpha={}", a.alpha)?;
    for d in 1..=a.max_depth {
        writeln!(out, "c(depth={d})={:.6}", cost_ratio_c(a.alpha, d)?)?;
    }
    writeln!(out, "g(N0={})={:.6}", a.n0, g_factor(a.alpha, a.n0)?)?;
    let unit = RateConstants { varsigma: vec![1.0, 1.0], second_deriv: vec![1.0], first_deriv: vec![1.0] };
    let n1 = (a.n0 as f64).powf(a.alpha).ceil() as u64;
    writeln!(out, "nmc_bound(unit constants, N0={}, N1={n1})={:.6e}", a.n0, nmc_mse_bound(&unit, &[a.n0, n1])?)?;
    writeln!(out, "onmc_bound(unit constants, tau=N0^alpha, N0={})={:.6e}", a.n0, onmc_mse_bound(&unit, 1.0, a.alpha, a.n0)?)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Density(a) => density(a),
        Command::PokerGrid(a) => poker(a),
        Command::Bed(a) => bed(a),
        Command::Constants(a) => constants(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
