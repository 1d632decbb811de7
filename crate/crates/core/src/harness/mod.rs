//! Experiment orchestration: budget sweeps, error summaries, slope fits,
//! density comparison, poker payoff grids and run manifests.

mod density;
mod manifest;
mod poker;
mod record;
mod stats;
mod sweep;

pub use density::{density_compare, ks_critical_value, weighted_ks, DensityReport, KsComparison};
pub use manifest::{write_manifest, Manifest};
pub use poker::{call_crossover, poker_grid, write_poker_csv, PokerCell, PokerGrid};
pub use record::{read_records, write_records, RunRecord, CSV_HEADER};
pub use stats::{fit_loglog_slope, mean_and_se, summarize, LadderSummary, SlopeFit};
pub use sweep::{
    allocate, build_measure, outer_for_sqrt_split, run_sweep, truth_for, Allocation, EstimatorId, InnerRule, ModelId,
    ModelParams, SweepConfig,
};
