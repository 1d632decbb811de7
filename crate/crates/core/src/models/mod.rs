//! Benchmark models with closed-form or quadrature ground truths.

pub mod analytic;
pub mod bed;
pub mod beta_gamma;
pub mod conjugate;
pub mod poker;

pub use analytic::{gamma0, gamma1, AnalyticExact, AnalyticModel};
pub use bed::{bed_estimate, bed_mi_analytic, BedEstimate, BedLikelihood};
pub use beta_gamma::{bg_discrete_truth, bg_inner_logweight, bg_truth, BgDiscreteOuter, BgInner, BgOuter, DISCRETE_SUPPORT};
pub use conjugate::{conjugate_evidence, conjugate_posterior_mean, conjugate_posterior_var, ConjugateEvidence, ConjugateOuter};
pub use poker::{calc_payoff, call_payoff, p1_bet_logpdf, P2Sim, PokerPayoff};
