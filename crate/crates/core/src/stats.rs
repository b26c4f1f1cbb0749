//! Paired nonparametric statistics for seed-matched comparisons.
//!
//! Wilcoxon signed-rank with exact null distribution for small samples and a
//! tie- and continuity-corrected normal approximation above
//! [`EXACT_MAX_N`]; Holm step-down adjustment; Cohen's d_z; median and IQR.

use statrs::function::erf::erfc;
use thiserror::Error;

/// Largest sample (after dropping zeros) that gets an exact p-value.
pub const EXACT_MAX_N: usize = 20;

/// Significance level for the improvement flag.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("degenerate sample: every difference is zero")]
    Degenerate,
    #[error("empty sample")]
    Empty,
    #[error("undefined effect size: differences have zero variance")]
    ZeroVariance,
    #[error("effect size needs at least two differences")]
    TooFew,
    #[error("non-finite difference in sample")]
    NonFinite,
}

/// Per-seed differences `treated − baseline`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    pub diffs: Vec<f64>,
}

impl PairedSample {
    pub fn new(diffs: Vec<f64>) -> Result<Self, StatsError> {
        if diffs.is_empty() {
            return Err(StatsError::Empty);
        }
        if diffs.iter().any(|d| !d.is_finite()) {
            return Err(StatsError::NonFinite);
        }
        Ok(Self { diffs })
    }

    /// Pairs `treated[i] − baseline[i]`.
    pub fn from_pairs(treated: &[f64], baseline: &[f64]) -> Result<Self, StatsError> {
        Self::new(treated.iter().zip(baseline).map(|(t, b)| t - b).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wilcoxon {
    /// Sum of ranks of the positive differences.
    pub statistic: f64,
    pub p_value: f64,
    /// Differences used after dropping zeros.
    pub n: usize,
    pub zeros_dropped: usize,
    pub exact: bool,
}

/// Average ranks (1-based) of `values`, ties sharing the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of tie groups among `values`.
fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        sizes.push(j - i);
        i = j;
    }
    sizes
}

/// Two-sided Wilcoxon signed-rank test of `H0: median difference = 0`.
pub fn wilcoxon_signed_rank(sample: &PairedSample) -> Result<Wilcoxon, StatsError> {
    let nonzero: Vec<f64> = sample.diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let zeros_dropped = sample.diffs.len() - nonzero.len();
    if nonzero.is_empty() {
        return Err(StatsError::Degenerate);
    }
    let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let statistic: f64 = nonzero
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let n = nonzero.len();

    let (p_value, exact) = if n <= EXACT_MAX_N {
        (exact_p(&ranks, statistic), true)
    } else {
        (normal_p(n, &abs, statistic), false)
    };
    Ok(Wilcoxon {
        statistic,
        p_value,
        n,
        zeros_dropped,
        exact,
    })
}

/// Exact two-sided p from the sign-flip null distribution. Average ranks are
/// half-integers, so doubled ranks make the distribution integer-indexed.
fn exact_p(ranks: &[f64], statistic: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let total: usize = doubled.iter().sum();
    let mut counts = vec![0.0f64; total + 1];
    counts[0] = 1.0;
    let mut reach = 0;
    for &r in &doubled {
        for s in (0..=reach).rev() {
            let c = counts[s];
            if c != 0.0 {
                counts[s + r] += c;
            }
        }
        reach += r;
    }
    let observed = (2.0 * statistic).round() as usize;
    let all = 2f64.powi(ranks.len() as i32);
    let lower: f64 = counts[..=observed].iter().sum::<f64>() / all;
    let upper: f64 = counts[observed..].iter().sum::<f64>() / all;
    (2.0 * lower.min(upper)).min(1.0)
}

fn normal_p(n: usize, abs: &[f64], statistic: f64) -> f64 {
    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let tie_term: f64 = tie_sizes(abs)
        .into_iter()
        .map(|t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return 1.0;
    }
    let z = ((statistic - mean).abs() - 0.5).max(0.0) / var.sqrt();
    erfc(z / std::f64::consts::SQRT_2).min(1.0)
}

/// Holm step-down adjustment; output is in input order.
pub fn holm_adjust(p_values: &[f64]) -> Vec<f64> {
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (i, &idx) in order.iter().enumerate() {
        let scaled = ((m - i) as f64 * p_values[idx]).min(1.0);
        running = running.max(scaled);
        adjusted[idx] = running;
    }
    adjusted
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Paired effect size: mean over sample standard deviation.
pub fn cohens_dz(sample: &PairedSample) -> Result<f64, StatsError> {
    let d = &sample.diffs;
    if d.len() < 2 {
        return Err(StatsError::TooFew);
    }
    let m = mean(d);
    let var = d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (d.len() - 1) as f64;
    if var <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(m / var.sqrt())
}

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(quantile_sorted(&v, 0.5))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub iqr: (f64, f64),
}

pub fn summarize(sample: &PairedSample) -> Summary {
    let mut v = sample.diffs.clone();
    v.sort_by(f64::total_cmp);
    Summary {
        median: quantile_sorted(&v, 0.5),
        iqr: (quantile_sorted(&v, 0.25), quantile_sorted(&v, 0.75)),
    }
}

/// Which sign of a paired difference counts as an improvement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Improvement {
    Lower,
    Higher,
}

impl Improvement {
    pub fn improves(self, delta: f64) -> bool {
        match self {
            Improvement::Lower => delta < 0.0,
            Improvement::Higher => delta > 0.0,
        }
    }
}

pub fn is_significant_improvement(p_holm: f64, median_delta: f64, direction: Improvement) -> bool {
    p_holm < ALPHA && direction.improves(median_delta)
}

/// Full paired comparison before multiplicity correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    /// Signed-rank statistic; NaN when every difference is zero.
    pub statistic: f64,
    pub p_raw: f64,
    pub p_holm: f64,
    /// NaN when undefined.
    pub d_z: f64,
    pub median_delta: f64,
    pub iqr: (f64, f64),
}

/// Runs the per-sample parts of a comparison; `p_holm` is set to `p_raw`
/// until [`apply_holm`] is called across the family.
pub fn paired_test(sample: &PairedSample) -> TestResult {
    let summary = summarize(sample);
    let (statistic, p_raw) = match wilcoxon_signed_rank(sample) {
        Ok(w) => (w.statistic, w.p_value),
        Err(_) => (f64::NAN, 1.0),
    };
    TestResult {
        statistic,
        p_raw,
        p_holm: p_raw,
        d_z: cohens_dz(sample).unwrap_or(f64::NAN),
        median_delta: summary.median,
        iqr: summary.iqr,
    }
}

pub fn apply_holm(results: &mut [TestResult]) {
    let raw: Vec<f64> = results.iter().map(|r| r.p_raw).collect();
    for (r, p) in results.iter_mut().zip(holm_adjust(&raw)) {
        r.p_holm = p;
    }
}

/// Significance stars: `*` p<0.05, `**` p<1e-3, `***` p<1e-5.
pub fn stars(p: f64) -> &'static str {
    if p < 1e-5 {
        "***"
    } else if p < 1e-3 {
        "**"
    } else if p < ALPHA {
        "*"
    } else {
        ""
    }
}
