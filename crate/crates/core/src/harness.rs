//! Seeded runs, steady-state summaries, γ sweeps and paired comparisons.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, SimConfig};
use crate::flocking::{controller_tick, Controller, NeighborView};
use crate::geom::{min_image_offset, wrap_point, Vec2};
use crate::metrics::{sample_metrics, MetricsSample};
use crate::stats::{apply_holm, is_significant_improvement, paired_test, Improvement, PairedSample, TestResult};
use crate::vessel::{project_no_go, step_vessel, DriftInput, Tack, VesselError, VesselState};
use crate::wind::{upwind_direction, EnvKind, WindField};

const ENV_STREAM: u64 = 1;
const SWARM_STREAM: u64 = 2;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("vessel update failed: {0}")]
    Vessel(#[from] VesselError),
    #[error("run {key} failed: {source}")]
    Run {
        key: RunKey,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("window [{0}, {1}] contains no samples")]
    EmptyWindow(f64, f64),
    #[error("unpaired seeds for env {env}, gamma {gamma}: {detail}")]
    UnpairedSeeds { env: EnvKind, gamma: f64, detail: String },
    #[error("no baseline rows for env {0}")]
    MissingBaseline(EnvKind),
    #[error("no rows for env {env}, gamma {gamma}")]
    MissingTreatment { env: EnvKind, gamma: f64 },
    #[error("duplicate summary row {0}")]
    Duplicate(RunKey),
}

/// Per-tick log of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub samples: Vec<MetricsSample>,
    /// Vessel states at every logged tick, when requested.
    pub trajectory: Option<Vec<Vec<VesselState>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub median_polarization: f64,
    pub median_hull_area: f64,
    pub cumulative_unsafe: u64,
}

/// The swept values of γ: dense near the sign change, sparse in the tails.
pub fn gamma_grid() -> Vec<f64> {
    vec![
        -2.0, -1.5, -1.0, -0.75, -0.5, -0.3, -0.2, -0.1, -0.05, -0.01, 0.0, 0.01, 0.05, 0.1, 0.2,
        0.3, 0.5, 0.75, 1.0, 2.0, 3.0, 4.0, 5.0, 7.5, 10.0,
    ]
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Seed of the wind realisation for run seed `seed`; shared by every
/// controller so paired runs see the same gusts.
pub fn environment_seed(seed: u64) -> u64 {
    stream_rng(seed, ENV_STREAM).next_u64()
}

pub fn wind_field(config: &SimConfig, seed: u64) -> WindField {
    WindField::for_environment(
        config.environment,
        environment_seed(seed),
        config.wind.base_direction,
        config.wind.gust,
        config.arena_half,
    )
}

/// Robots at rest, area-uniform over the start disk, headings uniform on [−π, π).
pub fn initialize_swarm(config: &SimConfig, seed: u64) -> Vec<VesselState> {
    let mut rng = stream_rng(seed, SWARM_STREAM);
    (0..config.n_robots)
        .map(|_| {
            let r = config.init_radius * rng.random::<f64>().sqrt();
            let theta = rng.random_range(-PI..PI);
            let heading = rng.random_range(-PI..PI);
            VesselState::at_rest(Vec2::from_angle(theta) * r, heading)
        })
        .collect()
}

/// Points any boat that starts inside the no-go cone at the nearest
/// close-hauled heading; a boat at rest cannot turn out of irons by itself.
fn launch(states: &mut [VesselState], field: &WindField, config: &SimConfig) {
    for s in states.iter_mut() {
        if let Ok(up) = upwind_direction(field.sample(s.pos, 0.0)) {
            let p = project_no_go(
                s.heading,
                up,
                config.sailing.no_go_half_angle,
                Tack::Starboard,
                config.sailing.tack_hysteresis,
            );
            s.heading = p.heading;
            s.tack = p.tack;
        }
    }
}

/// Neighbours of boat `i` within the attraction radius, by minimum image.
pub fn neighbor_views(states: &[VesselState], i: usize, range: f64, half: f64) -> Vec<NeighborView> {
    let me = states[i].pos;
    states
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .filter_map(|(_, other)| {
            let offset = min_image_offset(me, other.pos, half);
            (offset.norm() < range).then_some(NeighborView {
                offset,
                heading: other.heading,
                speed: other.speed,
            })
        })
        .collect()
}

fn log_sample(t: f64, states: &[VesselState], config: &SimConfig) -> MetricsSample {
    let positions: Vec<Vec2> = states.iter().map(|s| s.pos).collect();
    let headings: Vec<f64> = states.iter().map(|s| s.heading).collect();
    sample_metrics(t, &positions, &headings, config.flock.safety.d_near, config.arena_half)
}

pub fn tick_count(config: &SimConfig) -> usize {
    (config.horizon / config.dt + 1e-9).floor() as usize
}

/// One full run. Every tick samples the wind at each boat, computes all helm
/// commands from the same snapshot, then advances and wraps every boat.
pub fn run_sim_recording(config: &SimConfig, seed: u64, record: bool) -> Result<TimeSeries, HarnessError> {
    config.validate()?;
    let field = wind_field(config, seed);
    let mut states = initialize_swarm(config, seed);
    launch(&mut states, &field, config);

    let ticks = tick_count(config);
    let mut samples = Vec::with_capacity(ticks + 1);
    let mut trajectory = record.then(|| Vec::with_capacity(ticks + 1));
    samples.push(log_sample(0.0, &states, config));
    if let Some(tr) = trajectory.as_mut() {
        tr.push(states.clone());
    }

    let range = config.flock.zones.r_att;
    for k in 1..=ticks {
        let t_prev = (k - 1) as f64 * config.dt;
        let mut next = Vec::with_capacity(states.len());
        for i in 0..states.len() {
            let w = field.sample(states[i].pos, t_prev);
            let neighbors = neighbor_views(&states, i, range, config.arena_half);
            let cmd = controller_tick(&states[i], &neighbors, &config.flock);
            let mut s = step_vessel(&states[i], w, cmd, DriftInput::CALM, &config.sailing, config.dt)?;
            s.pos = wrap_point(s.pos, config.arena_half);
            next.push(s);
        }
        states = next;
        samples.push(log_sample(k as f64 * config.dt, &states, config));
        if let Some(tr) = trajectory.as_mut() {
            tr.push(states.clone());
        }
    }
    Ok(TimeSeries { samples, trajectory })
}

pub fn run_sim(config: &SimConfig, seed: u64) -> Result<TimeSeries, HarnessError> {
    run_sim_recording(config, seed, false)
}

/// Medians of polarization and hull area, and the summed unsafe pairs, over
/// ticks with `start <= t <= end`.
pub fn steady_summary(series: &TimeSeries, window: (f64, f64), seed: u64) -> Result<SeedSummary, HarnessError> {
    let (start, end) = window;
    let tol = 1e-9;
    let inside: Vec<&MetricsSample> = series
        .samples
        .iter()
        .filter(|s| s.t >= start - tol && s.t <= end + tol)
        .collect();
    if inside.is_empty() {
        return Err(HarnessError::EmptyWindow(start, end));
    }
    let pol: Vec<f64> = inside.iter().map(|s| s.polarization).collect();
    let area: Vec<f64> = inside.iter().map(|s| s.hull_area).collect();
    Ok(SeedSummary {
        seed,
        median_polarization: crate::stats::median(&pol).expect("non-empty"),
        median_hull_area: crate::stats::median(&area).expect("non-empty"),
        cumulative_unsafe: inside.iter().map(|s| u64::from(s.unsafe_pairs)).sum(),
    })
}

/// Identifies one run of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunKey {
    pub env: EnvKind,
    /// `None` for the baseline controller.
    pub gamma: Option<f64>,
    pub seed: u64,
}

impl fmt::Display for RunKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gamma {
            Some(g) => write!(f, "(env={}, controller=speed_weighted, gamma={}, seed={})", self.env, g, self.seed),
            None => write!(f, "(env={}, controller=baseline, seed={})", self.env, self.seed),
        }
    }
}

/// One row of a sweep's results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryRow {
    pub key: RunKey,
    pub summary: SeedSummary,
}

/// Every (environment, controller, seed) of a plan, in output order:
/// environments as listed, baseline before the γ values, seeds ascending.
pub fn sweep_keys(config: &SimConfig) -> Vec<RunKey> {
    let plan = &config.sweep;
    let seeds = plan.seed_list();
    let mut keys = Vec::new();
    for &env in &plan.environments {
        for gamma in std::iter::once(None).chain(plan.gammas.iter().copied().map(Some)) {
            for &seed in &seeds {
                keys.push(RunKey { env, gamma, seed });
            }
        }
    }
    keys
}

/// The run configuration for one sweep cell.
pub fn config_for(base: &SimConfig, key: &RunKey) -> SimConfig {
    let mut cfg = base.clone();
    cfg.environment = key.env;
    cfg.flock.controller = match key.gamma {
        None => Controller::Baseline,
        Some(gamma) => Controller::SpeedWeighted {
            gamma,
            epsilon: base.sweep.epsilon,
        },
    };
    cfg
}

pub fn run_key(base: &SimConfig, key: &RunKey) -> Result<SummaryRow, HarnessError> {
    let cfg = config_for(base, key);
    let wrap = |e: HarnessError| HarnessError::Run {
        key: *key,
        source: Box::new(e),
    };
    let series = run_sim(&cfg, key.seed).map_err(wrap)?;
    let summary = steady_summary(&series, cfg.window, key.seed).map_err(wrap)?;
    Ok(SummaryRow { key: *key, summary })
}

/// Runs the whole plan on `jobs` worker threads. Output order is the key
/// order of [`sweep_keys`] regardless of `jobs`.
pub fn run_sweep(config: &SimConfig, jobs: usize) -> Result<Vec<SummaryRow>, HarnessError> {
    config.validate()?;
    let keys = sweep_keys(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| keys.par_iter().map(|k| run_key(config, k)).collect())
}

/// A compared metric and the sign that counts as better.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    HullArea,
    Polarization,
    CumulativeUnsafe,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::HullArea, Metric::Polarization, Metric::CumulativeUnsafe];

    pub fn name(self) -> &'static str {
        match self {
            Metric::HullArea => "hull_area",
            Metric::Polarization => "polarization",
            Metric::CumulativeUnsafe => "cumulative_unsafe",
        }
    }

    pub fn improvement(self) -> Improvement {
        match self {
            Metric::Polarization => Improvement::Higher,
            Metric::HullArea | Metric::CumulativeUnsafe => Improvement::Lower,
        }
    }

    pub fn value(self, s: &SeedSummary) -> f64 {
        match self {
            Metric::HullArea => s.median_hull_area,
            Metric::Polarization => s.median_polarization,
            Metric::CumulativeUnsafe => s.cumulative_unsafe as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricComparison {
    pub metric: Metric,
    pub test: TestResult,
    pub significant: bool,
}

/// One (environment, γ) cell compared against the baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub env: EnvKind,
    pub gamma: f64,
    pub metrics: Vec<MetricComparison>,
}

impl ComparisonRow {
    pub fn metric(&self, m: Metric) -> &MetricComparison {
        self.metrics.iter().find(|c| c.metric == m).expect("all metrics present")
    }
}

fn gamma_key(g: f64) -> u64 {
    // normalise -0.0 so it pairs with 0.0
    (g + 0.0).to_bits()
}

/// Compares every γ of `env` against the baseline, Holm-correcting each
/// metric across all γ values of the environment. Rows come out in
/// ascending γ.
pub fn compare_env(rows: &[SummaryRow], env: EnvKind) -> Result<Vec<ComparisonRow>, HarnessError> {
    let mut baseline: BTreeMap<u64, SeedSummary> = BTreeMap::new();
    let mut treated: BTreeMap<u64, (f64, BTreeMap<u64, SeedSummary>)> = BTreeMap::new();
    for row in rows.iter().filter(|r| r.key.env == env) {
        let slot = match row.key.gamma {
            None => &mut baseline,
            Some(g) => &mut treated.entry(gamma_key(g)).or_insert_with(|| (g + 0.0, BTreeMap::new())).1,
        };
        if slot.insert(row.key.seed, row.summary).is_some() {
            return Err(HarnessError::Duplicate(row.key));
        }
    }
    if baseline.is_empty() {
        return Err(HarnessError::MissingBaseline(env));
    }

    let mut cells: Vec<(f64, BTreeMap<u64, SeedSummary>)> = treated.into_values().collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut per_metric: Vec<Vec<TestResult>> = Vec::new();
    for metric in Metric::ALL {
        let mut family = Vec::with_capacity(cells.len());
        for (gamma, by_seed) in &cells {
            check_paired(env, *gamma, &baseline, by_seed)?;
            let t: Vec<f64> = by_seed.values().map(|s| metric.value(s)).collect();
            let b: Vec<f64> = baseline.values().map(|s| metric.value(s)).collect();
            let sample = PairedSample::from_pairs(&t, &b).map_err(|e| HarnessError::UnpairedSeeds {
                env,
                gamma: *gamma,
                detail: e.to_string(),
            })?;
            family.push(paired_test(&sample));
        }
        apply_holm(&mut family);
        per_metric.push(family);
    }

    Ok(cells
        .iter()
        .enumerate()
        .map(|(i, (gamma, _))| ComparisonRow {
            env,
            gamma: *gamma,
            metrics: Metric::ALL
                .iter()
                .zip(&per_metric)
                .map(|(&metric, family)| {
                    let test = family[i];
                    MetricComparison {
                        metric,
                        test,
                        significant: is_significant_improvement(test.p_holm, test.median_delta, metric.improvement()),
                    }
                })
                .collect(),
        })
        .collect())
}

fn check_paired(
    env: EnvKind,
    gamma: f64,
    baseline: &BTreeMap<u64, SeedSummary>,
    treated: &BTreeMap<u64, SeedSummary>,
) -> Result<(), HarnessError> {
    if baseline.keys().eq(treated.keys()) {
        return Ok(());
    }
    let missing: Vec<u64> = baseline.keys().filter(|s| !treated.contains_key(s)).copied().collect();
    let extra: Vec<u64> = treated.keys().filter(|s| !baseline.contains_key(s)).copied().collect();
    Err(HarnessError::UnpairedSeeds {
        env,
        gamma,
        detail: format!("seeds only in baseline {missing:?}, only in treated {extra:?}"),
    })
}

/// Comparison for a single (environment, γ) cell; Holm's family is still all γ of `env`.
pub fn compare(rows: &[SummaryRow], env: EnvKind, gamma: f64) -> Result<ComparisonRow, HarnessError> {
    compare_env(rows, env)?
        .into_iter()
        .find(|r| gamma_key(r.gamma) == gamma_key(gamma))
        .ok_or(HarnessError::MissingTreatment { env, gamma })
}

/// Comparisons for every environment present, in the order environments first appear.
pub fn compare_all(rows: &[SummaryRow]) -> Result<Vec<ComparisonRow>, HarnessError> {
    let mut envs: Vec<EnvKind> = Vec::new();
    for r in rows {
        if !envs.contains(&r.key.env) {
            envs.push(r.key.env);
        }
    }
    let mut out = Vec::new();
    for env in envs {
        out.extend(compare_env(rows, env)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig {
            horizon: 30.0,
            window: (10.0, 30.0),
            ..SimConfig::default()
        }
    }

    #[test]
    fn grid_shape() {
        let g = gamma_grid();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], -2.0);
        assert_eq!(g[24], 10.0);
        for v in [0.01, 1.0, 10.0] {
            assert!(g.contains(&v));
        }
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn swarm_in_disk_and_repeatable() {
        let cfg = SimConfig::default();
        let a = initialize_swarm(&cfg, 5);
        assert_eq!(a.len(), 10);
        assert!(a.iter().all(|s| s.pos.norm() <= cfg.init_radius));
        assert!(a.iter().all(|s| s.speed == 0.0 && s.trim == 1.0 && s.tack == Tack::Starboard));
        assert_eq!(a, initialize_swarm(&cfg, 5));
        assert_ne!(a, initialize_swarm(&cfg, 6));
    }

    #[test]
    fn run_length_and_determinism() {
        let cfg = small();
        let a = run_sim(&cfg, 3).unwrap();
        assert_eq!(a.samples.len(), 31);
        assert_eq!(a.samples[30].t, 30.0);
        assert_eq!(a, run_sim(&cfg, 3).unwrap());
    }

    #[test]
    fn invalid_config_fails_before_running() {
        let cfg = SimConfig { n_robots: 1, ..small() };
        assert!(matches!(run_sim(&cfg, 1), Err(HarnessError::Config(_))));
    }

    #[test]
    fn calm_keeps_flock_frozen() {
        let cfg = SimConfig { environment: EnvKind::Calm, ..small() };
        let s = run_sim(&cfg, 9).unwrap();
        let a0 = s.samples[0].hull_area;
        assert!(s.samples.iter().all(|m| m.hull_area == a0));
    }

    #[test]
    fn summary_window() {
        let samples = (0..=300)
            .map(|t| MetricsSample {
                t: t as f64,
                polarization: 0.5,
                hull_area: 12.0,
                unsafe_pairs: 1,
            })
            .collect();
        let series = TimeSeries { samples, trajectory: None };
        let s = steady_summary(&series, (100.0, 300.0), 4).unwrap();
        assert_eq!(s.median_polarization, 0.5);
        assert_eq!(s.median_hull_area, 12.0);
        assert_eq!(s.cumulative_unsafe, 201);
        assert!(matches!(steady_summary(&series, (400.0, 500.0), 4), Err(HarnessError::EmptyWindow(..))));
    }

    #[test]
    fn tiny_plan_has_two_rows() {
        let mut cfg = small();
        cfg.sweep.environments = vec![EnvKind::Steady5];
        cfg.sweep.gammas = vec![0.01];
        cfg.sweep.seeds = 1;
        let rows = run_sweep(&cfg, 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].key.gamma, None);
        assert_eq!(rows[1].key.gamma, Some(0.01));
    }

    #[test]
    fn default_plan_size() {
        assert_eq!(sweep_keys(&SimConfig::default()).len(), 5200);
    }

    fn row(env: EnvKind, gamma: Option<f64>, seed: u64, area: f64) -> SummaryRow {
        SummaryRow {
            key: RunKey { env, gamma, seed },
            summary: SeedSummary {
                seed,
                median_polarization: 0.5 + seed as f64 * 0.01,
                median_hull_area: area,
                cumulative_unsafe: seed,
            },
        }
    }

    #[test]
    fn identity_comparison() {
        let mut rows = Vec::new();
        for seed in 1..=8 {
            rows.push(row(EnvKind::Steady5, None, seed, 100.0 + seed as f64));
            rows.push(row(EnvKind::Steady5, Some(0.5), seed, 100.0 + seed as f64));
        }
        let c = compare(&rows, EnvKind::Steady5, 0.5).unwrap();
        for m in &c.metrics {
            assert_eq!(m.test.median_delta, 0.0);
            assert!(!m.significant);
        }
    }

    #[test]
    fn constructed_area_improvement() {
        let mut rows = Vec::new();
        for seed in 1..=12 {
            let a = 200.0 + (seed * seed) as f64;
            rows.push(row(EnvKind::Gusty10, None, seed, a));
            rows.push(row(EnvKind::Gusty10, Some(1.0), seed, a - 10.0));
        }
        let c = compare(&rows, EnvKind::Gusty10, 1.0).unwrap();
        let area = c.metric(Metric::HullArea);
        assert_eq!(area.test.median_delta, -10.0);
        assert!(area.significant);
    }

    #[test]
    fn unpaired_is_an_error() {
        let rows = vec![
            row(EnvKind::Steady5, None, 1, 1.0),
            row(EnvKind::Steady5, None, 2, 1.0),
            row(EnvKind::Steady5, Some(1.0), 1, 1.0),
            row(EnvKind::Steady5, Some(1.0), 3, 1.0),
        ];
        assert!(matches!(compare_env(&rows, EnvKind::Steady5), Err(HarnessError::UnpairedSeeds { .. })));
    }

    #[test]
    fn holm_family_spans_gammas() {
        let mut rows = Vec::new();
        let grid = gamma_grid();
        for seed in 1..=10 {
            rows.push(row(EnvKind::Steady10, None, seed, 100.0 + seed as f64));
            for (i, &g) in grid.iter().enumerate() {
                rows.push(row(EnvKind::Steady10, Some(g), seed, 100.0 + seed as f64 - (i as f64 + seed as f64 * 0.1)));
            }
        }
        let cmp = compare_env(&rows, EnvKind::Steady10).unwrap();
        assert_eq!(cmp.len(), 25);
        let raw: Vec<f64> = cmp.iter().map(|r| r.metric(Metric::HullArea).test.p_raw).collect();
        let adj = crate::stats::holm_adjust(&raw);
        for (r, a) in cmp.iter().zip(adj) {
            assert_eq!(r.metric(Metric::HullArea).test.p_holm, a);
        }
    }
}
