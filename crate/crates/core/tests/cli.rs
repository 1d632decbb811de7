use std::path::Path;
use std::process::{Command, Output};

use nestmc::harness::{read_records, Manifest, CSV_HEADER};

fn nestmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nestmc")).args(args).output().expect("binary runs")
}

fn sweep_to(path: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["sweep", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    nestmc(&args)
}

const ANALYTIC: [&str; 10] =
    ["--model", "analytic", "--estimator", "nmc", "--budgets", "100,1000", "--replicates", "3", "--seed", "7"];

#[test]
fn sweep_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let res = sweep_to(&out, &ANALYTIC);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));

    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let records = read_records(text.as_bytes()).unwrap();
    assert_eq!(records.len(), 6);
    for r in &records {
        assert_eq!((r.model.as_str(), r.estimator.as_str()), ("analytic", "nmc"));
        let truth = r.truth.unwrap();
        assert!((truth + 1.16384).abs() < 1e-5);
        assert!((r.sq_error.unwrap() - (r.estimate - truth).powi(2)).abs() < 1e-12);
        assert!(r.n0 * r.inner_budget.trim_start_matches("N1=").parse::<u64>().unwrap() <= r.t);
    }

    let manifest = Manifest::parse(&std::fs::read_to_string(dir.path().join("run.csv.manifest")).unwrap());
    assert_eq!(manifest.get("model"), Some("analytic"));
    assert_eq!(manifest.get("estimator"), Some("nmc"));
    assert_eq!(manifest.get("seed"), Some("7"));
    assert_eq!(manifest.get("records"), Some("6"));
    assert!(manifest.get("command").is_some());
}

#[test]
fn same_seed_same_estimates() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let mut args = ANALYTIC.to_vec();
        args[9] = seed;
        assert!(sweep_to(&out, &args).status.success());
        read_records(std::fs::File::open(out).unwrap()).unwrap().into_iter().map(|r| r.estimate.to_bits()).collect::<Vec<_>>()
    };
    let a = run("a.csv", "7");
    assert_eq!(a, run("b.csv", "7"));
    assert_ne!(a, run("c.csv", "8"));
}

#[test]
fn config_errors_exit_2() {
    let bad: [&[&str]; 6] = [
        &["sweep", "--model", "analytic", "--estimator", "bogus", "--budgets", "100"],
        &["sweep", "--model", "nope", "--estimator", "nmc", "--budgets", "100"],
        &["sweep", "--model", "analytic", "--estimator", "onmc", "--schedule", "const:0", "--budgets", "100"],
        &["sweep", "--model", "analytic", "--estimator", "onmc", "--schedule", "cubic:3", "--budgets", "100"],
        &["sweep", "--model", "analytic", "--estimator", "nmc", "--budgets", "1000,100"],
        &["sweep", "--model", "analytic", "--estimator", "finite-support", "--budgets", "100"],
    ];
    for args in bad {
        let res = nestmc(args);
        assert_eq!(res.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&res.stderr));
    }
}

#[test]
fn degenerate_estimate_exits_3() {
    // Every inner weight underflows, so no outer sample survives.
    let res = nestmc(&[
        "sweep", "--model", "beta-gamma", "--estimator", "nested-is-rb", "--budgets", "400", "--replicates", "2",
        "--data-D", "1e300",
    ]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn every_estimator_runs_on_a_supported_model() {
    let cases = [
        ("analytic-exact", "mc", None),
        ("analytic", "onmc", Some("sqrt-floor:5")),
        ("analytic", "onmc", Some("poly:2,0.5")),
        ("beta-gamma", "nested-is-single", Some("sqrt-cap:50")),
        ("beta-gamma", "naive", None),
        ("beta-gamma", "broken", None),
        ("conjugate", "nested-cond", None),
        ("beta-gamma-discrete", "finite-support", None),
        ("poker", "nested-is-rb", None),
        ("bed", "nmc", None),
    ];
    for (model, estimator, schedule) in cases {
        let mut args = vec!["sweep", "--model", model, "--estimator", estimator, "--budgets", "300,900", "--replicates", "2"];
        if let Some(s) = schedule {
            args.extend(["--schedule", s]);
        }
        let res = nestmc(&args);
        assert!(res.status.success(), "{model}/{estimator}: {}", String::from_utf8_lossy(&res.stderr));
        let records = read_records(res.stdout.as_slice()).unwrap();
        assert_eq!(records.len(), 4);
        assert!(records.iter().all(|r| r.estimate.is_finite()));
    }
}

#[test]
fn other_subcommands() {
    let dir = tempfile::tempdir().unwrap();

    let c = nestmc(&["constants"]);
    assert!(c.status.success());
    assert!(String::from_utf8_lossy(&c.stdout).contains("c(depth=1)=0.763"));

    let bed = dir.path().join("bed.csv");
    let res = nestmc(&["bed", "--n", "2000", "--m", "200", "--out", bed.to_str().unwrap()]);
    assert!(res.status.success());
    let text = std::fs::read_to_string(&bed).unwrap();
    assert!(text.starts_with("design,N,M,seed,estimate,std_error,truth\n"));
    assert_eq!(text.lines().count(), 2);

    let poker = dir.path().join("poker.csv");
    let res = nestmc(&["poker-grid", "--n0", "200", "--schedule", "const:5", "--out", poker.to_str().unwrap()]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(dir.path().join("poker.csv.manifest").exists());
    assert!(std::fs::read_to_string(&poker).unwrap().lines().count() > 17);

    let dens = dir.path().join("density.csv");
    let res = nestmc(&[
        "density", "--n0", "2000", "--reference-n0", "2000", "--reference-n1", "50", "--schedule", "sqrt-floor:5",
        "--bins", "20", "--out", dens.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let m = Manifest::parse(&std::fs::read_to_string(dir.path().join("density.csv.manifest")).unwrap());
    assert!(m.get("ks.reference.naive").is_some());

    let res = nestmc(&["poker-grid", "--estimator", "onmc"]);
    assert_eq!(res.status.code(), Some(2));
}
