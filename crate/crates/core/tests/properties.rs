use proptest::prelude::*;

use nestmc::estimators::{
    expected_single_measure, finite_support_estimate, nmc_estimate, onmc_estimate, onmc_outer_for_budget, rb_measure,
    OuterSample,
};
use nestmc::harness::{fit_loglog_slope, outer_for_sqrt_split, weighted_ks, RunRecord};
use nestmc::models::{calc_payoff, AnalyticModel, BgInner, DISCRETE_SUPPORT};
use nestmc::ppl::WeightedSample;
use nestmc::schedules::Schedule;
use nestmc::{LogWeight, RngStream};

fn log_weight() -> impl Strategy<Value = LogWeight> {
    prop_oneof![1 => Just(LogWeight::ZERO), 6 => (-30.0..30.0f64).prop_map(|v| LogWeight::new(v).unwrap())]
}

fn outer_sample() -> impl Strategy<Value = OuterSample<f64>> {
    (log_weight(), prop::collection::vec((log_weight(), log_weight(), -5.0..5.0f64), 1..6)).prop_map(|(prefix, inner)| {
        OuterSample {
            prefix_logw: prefix,
            inner_logw: inner.iter().map(|x| x.0).collect(),
            completions: inner.iter().map(|x| WeightedSample { value: x.2, logw: x.1 }).collect(),
        }
    })
}

fn schedule() -> impl Strategy<Value = Schedule> {
    prop_oneof![
        (1..50u64).prop_map(Schedule::Constant),
        (1..50u64).prop_map(Schedule::SqrtFloor),
        (1..50u64).prop_map(Schedule::SqrtCap),
    ]
}

fn sorted_atoms() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-3.0..3.0f64, 0.01..1.0f64), 1..30).prop_map(|mut a| {
        a.sort_by(|x, y| x.0.total_cmp(&y.0));
        let total: f64 = a.iter().map(|x| x.1).sum();
        a.iter().map(|&(v, w)| (v, w / total)).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rao_blackwell_identity(mut samples in prop::collection::vec(outer_sample(), 1..6)) {
        samples[0].prefix_logw = LogWeight::ONE;
        samples[0].inner_logw[0] = LogWeight::ONE;
        samples[0].completions[0].logw = LogWeight::ONE;
        let rb = rb_measure(&samples).unwrap();
        let ex = expected_single_measure(&samples).unwrap();
        prop_assert_eq!(rb.len(), ex.len());
        for ((v1, w1), (v2, w2)) in rb.atoms().iter().zip(ex.atoms()) {
            prop_assert_eq!(v1, v2);
            prop_assert!((w1 - w2).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_schedule_is_fixed_budget(n0 in 1..200u64, k in 1..20u64, seed in any::<u64>()) {
        let rng = RngStream::new(seed);
        let a = nmc_estimate(&AnalyticModel, n0, &[k], rng).unwrap();
        let b = onmc_estimate(&AnalyticModel, n0, &[Schedule::Constant(k)], rng).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn schedules_are_monotone_and_floored(s in schedule(), n in 1..100_000u64) {
        prop_assert!(s.tau(n) >= 1);
        prop_assert!(s.tau(n + 1) >= s.tau(n));
    }

    #[test]
    fn online_allocation_respects_budget(s in schedule(), total in 1..20_000u64) {
        let (n0, cost) = onmc_outer_for_budget(&[s], total);
        let exact: u64 = (1..=n0).map(|n| s.tau(n)).sum();
        prop_assert_eq!(cost, exact);
        prop_assert!(n0 == 1 || cost <= total);
        prop_assert!(cost + s.tau(n0 + 1) > total);
    }

    #[test]
    fn sqrt_split_is_largest_affordable(t in 1..10_000_000u64) {
        let cost = |n: u64| n * (n as f64).sqrt().ceil() as u64;
        let n0 = outer_for_sqrt_split(t);
        prop_assert!(n0 == 1 || cost(n0) <= t);
        prop_assert!(cost(n0 + 1) > t);
    }

    #[test]
    fn ks_is_a_symmetric_distance(a in sorted_atoms(), b in sorted_atoms()) {
        let d = weighted_ks(&a, &b);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - weighted_ks(&b, &a)).abs() < 1e-12);
        prop_assert!(weighted_ks(&a, &a) < 1e-12);
    }

    #[test]
    fn slope_fit_recovers_power_laws(slope in -2.0..-0.1f64, scale in 1e-6..1e2f64) {
        let records: Vec<RunRecord> = [1e3, 1e4, 1e5, 1e6]
            .iter()
            .flat_map(|&t: &f64| {
                let err = (scale * t.powf(slope)).sqrt();
                (0..2).map(move |s| RunRecord {
                    model: "m".into(),
                    estimator: "e".into(),
                    t: t as u64,
                    n0: 1,
                    inner_budget: String::new(),
                    seed: s,
                    estimate: err,
                    truth: None,
                    abs_error: None,
                    sq_error: None,
                    wall_time_s: 0.0,
                }.with_truth(Some(0.0)))
            })
            .collect();
        let fit = fit_loglog_slope(&records, 1.0).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-6);
    }

    #[test]
    fn folding_always_loses_the_small_blind(h1 in 0.0..1.0f64, h2 in 0.0..1.0f64, call in any::<bool>()) {
        prop_assert_eq!(calc_payoff(h1, 0.0, h2, call), -1.0);
    }

    #[test]
    fn finite_support_is_deterministic_and_bounded(total in 3..600u64, seed in any::<u64>()) {
        let run = || finite_support_estimate(
            &DISCRETE_SUPPORT,
            &BgInner { data: 2.0 },
            |y: &f64, z: &f64| y * z,
            |_, i| i,
            total,
            RngStream::new(seed),
        );
        let a = run().unwrap();
        prop_assert_eq!(a.to_bits(), run().unwrap().to_bits());
        prop_assert!(a.is_finite() && a >= 0.0);
    }
}
