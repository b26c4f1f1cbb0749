//! Flocking simulator for swarms of wind-driven sailing robots.
//!
//! The crate is organised bottom-up:
//!
//! * [`wind`]: seeded base-plus-gust wind fields.
//! * [`vessel`]: polar speed, no-go projection, tacking and yaw authority.
//! * [`flocking`]: zonal Couzin baseline, speed-weighted variant, luffing and safety filter.
//! * [`metrics`]: polarization, toroidal convex-hull area, unsafe proximity counts.
//! * [`stats`]: Wilcoxon signed-rank, Holm, Cohen's d_z.
//! * [`harness`]: runs, steady-state summaries, γ sweeps and paired comparisons.
//! * [`config`]: the JSON run configuration.

pub mod config;
pub mod flocking;
pub mod geom;
pub mod harness;
pub mod metrics;
pub mod stats;
pub mod vessel;
pub mod wind;

pub use config::{ConfigError, SimConfig, SweepPlan, WindSettings};
pub use flocking::{Controller, FlockParams, LuffParams, NeighborView, SafetyParams, SpeedWeightParams, ZoneRadii};
pub use geom::Vec2;
pub use harness::{
    compare, compare_all, compare_env, gamma_grid, initialize_swarm, run_sim, run_sim_recording, run_sweep,
    steady_summary, ComparisonRow, HarnessError, Metric, MetricComparison, RunKey, SeedSummary, SummaryRow,
    TimeSeries,
};
pub use metrics::MetricsSample;
pub use stats::{PairedSample, TestResult};
pub use vessel::{HelmCommand, SailingLimits, Tack, VesselState};
pub use wind::{EnvKind, GustParams, WindField, WindVector};
