//! Shared fixtures for the criterion benchmarks.

use sailswarm::{EnvKind, SimConfig};

/// Default experiment config, shortened to `horizon` seconds.
pub fn bench_config(env: EnvKind, horizon: f64) -> SimConfig {
    SimConfig {
        environment: env,
        horizon,
        window: (0.0, horizon),
        ..SimConfig::default()
    }
}
