//! CSV schemas read and written by the commands.

use std::path::Path;

use sailswarm::harness::Metric;
use sailswarm::{ComparisonRow, EnvKind, MetricsSample, RunKey, SeedSummary, SummaryRow, VesselState};
use sailswarm::vessel::Tack;

use crate::error::CliError;
use crate::output::{csv_bytes, num};

pub const METRICS_HEADER: [&str; 4] = ["t", "polarization", "hull_area", "unsafe_pairs"];
pub const SUMMARIES_HEADER: [&str; 7] = [
    "env",
    "controller",
    "gamma",
    "seed",
    "median_polarization",
    "median_hull_area",
    "cumulative_unsafe",
];
pub const COMPARISON_HEADER: [&str; 10] = [
    "env",
    "gamma",
    "metric",
    "median_delta",
    "iqr_lo",
    "iqr_hi",
    "p_raw",
    "p_holm",
    "d_z",
    "significant",
];
pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "robot", "x", "y", "heading", "speed", "trim", "tack"];

pub fn metrics_csv(samples: &[MetricsSample]) -> Vec<u8> {
    csv_bytes(
        &METRICS_HEADER,
        samples
            .iter()
            .map(|s| vec![num(s.t), num(s.polarization), num(s.hull_area), s.unsafe_pairs.to_string()]),
    )
}

pub fn trajectory_csv(times: &[f64], states: &[Vec<VesselState>]) -> Vec<u8> {
    let rows = times.iter().zip(states).flat_map(|(&t, tick)| {
        tick.iter().enumerate().map(move |(i, s)| {
            let tack = match s.tack {
                Tack::Port => "port",
                Tack::Starboard => "starboard",
            };
            vec![
                num(t),
                i.to_string(),
                num(s.pos.x),
                num(s.pos.y),
                num(s.heading),
                num(s.speed),
                num(s.trim),
                tack.to_string(),
            ]
        })
    });
    csv_bytes(&TRAJECTORY_HEADER, rows)
}

/// Baseline rows leave `gamma` empty.
pub fn summaries_csv(rows: &[SummaryRow]) -> Vec<u8> {
    csv_bytes(
        &SUMMARIES_HEADER,
        rows.iter().map(|r| {
            let (controller, gamma) = match r.key.gamma {
                None => ("baseline", String::new()),
                Some(g) => ("speed_weighted", num(g)),
            };
            vec![
                r.key.env.name().to_string(),
                controller.to_string(),
                gamma,
                r.key.seed.to_string(),
                num(r.summary.median_polarization),
                num(r.summary.median_hull_area),
                r.summary.cumulative_unsafe.to_string(),
            ]
        }),
    )
}

pub fn read_summaries(path: &Path) -> Result<Vec<SummaryRow>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_summaries(&text).map_err(|message| CliError::data(path, message))
}

pub fn parse_summaries(text: &str) -> Result<Vec<SummaryRow>, String> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(SUMMARIES_HEADER) {
        return Err(format!("unexpected header {:?}, expected {}", header.iter().collect::<Vec<_>>(), SUMMARIES_HEADER.join(",")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| e.to_string())?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |what: &str, value: &str| format!("line {line}: bad {what} {value:?}");
        let field = |i: usize| record.get(i).unwrap_or("");
        let env: EnvKind = field(0).parse().map_err(|_| bad("env", field(0)))?;
        let gamma = match field(1) {
            "baseline" => None,
            "speed_weighted" => Some(field(2).parse::<f64>().map_err(|_| bad("gamma", field(2)))?),
            other => return Err(bad("controller", other)),
        };
        let seed: u64 = field(3).parse().map_err(|_| bad("seed", field(3)))?;
        let float = |i: usize, name: &str| field(i).parse::<f64>().map_err(|_| bad(name, field(i)));
        let summary = SeedSummary {
            seed,
            median_polarization: float(4, "median_polarization")?,
            median_hull_area: float(5, "median_hull_area")?,
            cumulative_unsafe: field(6).parse().map_err(|_| bad("cumulative_unsafe", field(6)))?,
        };
        rows.push(SummaryRow {
            key: RunKey { env, gamma, seed },
            summary,
        });
    }
    if rows.is_empty() {
        return Err("no summary rows".into());
    }
    Ok(rows)
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> Vec<u8> {
    let records = rows.iter().flat_map(|row| {
        Metric::ALL.iter().map(move |&m| {
            let c = row.metric(m);
            vec![
                row.env.name().to_string(),
                num(row.gamma),
                m.name().to_string(),
                num(c.test.median_delta),
                num(c.test.iqr.0),
                num(c.test.iqr.1),
                num(c.test.p_raw),
                num(c.test.p_holm),
                num(c.test.d_z),
                c.significant.to_string(),
            ]
        })
    });
    csv_bytes(&COMPARISON_HEADER, records)
}
