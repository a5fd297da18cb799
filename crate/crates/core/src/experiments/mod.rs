//! Monte Carlo harness and the comparison experiments.

pub mod arith;
pub mod battery;
pub mod limits;
pub mod mc;
pub mod paths;
pub mod report;

pub use mc::{default_workers, mc_collect, mc_estimate, par_count, par_map, with_workers, McReport, Params, WORKERS_ENV};
pub use report::{canonical_batch, Cell, ComparisonReport, CsvTable, Verdict};
