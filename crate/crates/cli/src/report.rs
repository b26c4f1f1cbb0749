//! Human-facing renderings of a comparison: the γ = 0.01 style table and an
//! SVG of median deltas against γ.

use std::fmt::Write as _;

use sailswarm::harness::Metric;
use sailswarm::stats::stars;
use sailswarm::ComparisonRow;

const COLUMNS: [(Metric, &str); 3] = [
    (Metric::HullArea, "dA_hull [m^2]"),
    (Metric::Polarization, "dPhi"),
    (Metric::CumulativeUnsafe, "dC [events]"),
];

fn cell(row: &ComparisonRow, m: Metric) -> String {
    let c = row.metric(m);
    let value = match m {
        Metric::Polarization => format!("{:+.3}", c.test.median_delta),
        _ => format!("{:+.1}", c.test.median_delta),
    };
    format!("{value}{} [{:.2}]", stars(c.test.p_holm), c.test.d_z)
}

/// Rows of `comparison` whose γ equals `gamma`, one line per environment,
/// each cell `median delta` + significance stars + `[d_z]`.
pub fn table3(comparison: &[ComparisonRow], gamma: f64) -> Option<String> {
    let rows: Vec<&ComparisonRow> = comparison.iter().filter(|r| r.gamma == gamma).collect();
    if rows.is_empty() {
        return None;
    }
    let mut out = String::new();
    let _ = writeln!(out, "{:<10} {:>6}  {:>22}  {:>22}  {:>22}", "env", "gamma", COLUMNS[0].1, COLUMNS[1].1, COLUMNS[2].1);
    for r in rows {
        let _ = writeln!(
            out,
            "{:<10} {:>6}  {:>22}  {:>22}  {:>22}",
            r.env.name(),
            r.gamma,
            cell(r, COLUMNS[0].0),
            cell(r, COLUMNS[1].0),
            cell(r, COLUMNS[2].0)
        );
    }
    out.push_str("* p<0.05  ** p<1e-3  *** p<1e-5 (Holm-adjusted); brackets: Cohen's d_z\n");
    Some(out)
}

const PALETTE: [&str; 5] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"];
const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 50.0;

/// Three panels (area, polarization, unsafe events) of median paired delta
/// against γ with IQR bars, one series per environment. γ is placed on an
/// ordinal axis since the grid is dense near zero.
pub fn svg(comparison: &[ComparisonRow]) -> String {
    let mut gammas: Vec<f64> = comparison.iter().map(|r| r.gamma).collect();
    gammas.sort_by(f64::total_cmp);
    gammas.dedup();
    let mut envs = Vec::new();
    for r in comparison {
        if !envs.contains(&r.env) {
            envs.push(r.env);
        }
    }
    let width = 3.0 * (PANEL_W + MARGIN) + MARGIN;
    let height = PANEL_H + 2.5 * MARGIN + 20.0 * envs.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);

    let x_of = |g: f64| {
        let i = gammas.iter().position(|&v| v == g).unwrap_or(0) as f64;
        let n = (gammas.len().max(2) - 1) as f64;
        12.0 + i / n * (PANEL_W - 24.0)
    };

    for (p, (metric, label)) in COLUMNS.iter().enumerate() {
        let ox = MARGIN + p as f64 * (PANEL_W + MARGIN);
        let oy = MARGIN;
        let points: Vec<&ComparisonRow> = comparison.iter().collect();
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        for r in &points {
            let t = &r.metric(*metric).test;
            for v in [t.iqr.0, t.iqr.1, t.median_delta] {
                if v.is_finite() {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
        if hi - lo < 1e-12 {
            hi += 1.0;
            lo -= 1.0;
        }
        let pad = 0.05 * (hi - lo);
        let (lo, hi) = (lo - pad, hi + pad);
        let y_of = |v: f64| oy + (hi - v) / (hi - lo) * PANEL_H;

        let _ = writeln!(s, r#"<g>"#);
        let _ = writeln!(
            s,
            r##"<rect x="{ox}" y="{oy}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#444"/>"##
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{label}</text>"#, ox + PANEL_W / 2.0, oy - 10.0);
        let zy = y_of(0.0);
        let _ = writeln!(
            s,
            r##"<line x1="{ox}" y1="{zy:.2}" x2="{}" y2="{zy:.2}" stroke="#999" stroke-dasharray="4 3"/>"##,
            ox + PANEL_W
        );
        for v in [lo + pad, 0.5 * (lo + hi), hi - pad] {
            let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, ox - 4.0, y_of(v) + 4.0, tick(v));
        }
        for (i, &g) in gammas.iter().enumerate() {
            if i % 3 == 0 || i + 1 == gammas.len() {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{}" text-anchor="middle">{g}</text>"#,
                    ox + x_of(g),
                    oy + PANEL_H + 14.0
                );
            }
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">gamma</text>"#, ox + PANEL_W / 2.0, oy + PANEL_H + 30.0);

        for (e, env) in envs.iter().enumerate() {
            let color = PALETTE[e % PALETTE.len()];
            let series: Vec<&&ComparisonRow> = points.iter().filter(|r| r.env == *env).collect();
            let mut path = String::new();
            for r in &series {
                let t = &r.metric(*metric).test;
                let x = ox + x_of(r.gamma) + (e as f64 - 1.5) * 2.0;
                if t.iqr.0.is_finite() && t.iqr.1.is_finite() {
                    let _ = writeln!(
                        s,
                        r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-opacity="0.6"/>"#,
                        y_of(t.iqr.0),
                        y_of(t.iqr.1)
                    );
                }
                if t.median_delta.is_finite() {
                    let y = y_of(t.median_delta);
                    let _ = write!(path, "{}{x:.2},{y:.2} ", if path.is_empty() { "M" } else { "L" });
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
                }
            }
            if !path.is_empty() {
                let _ = writeln!(s, r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.2"/>"#, path.trim_end());
            }
        }
        let _ = writeln!(s, "</g>");
    }
    for (e, env) in envs.iter().enumerate() {
        let y = MARGIN + PANEL_H + 50.0 + 18.0 * e as f64;
        let color = PALETTE[e % PALETTE.len()];
        let _ = writeln!(s, r#"<rect x="{MARGIN}" y="{}" width="12" height="4" fill="{color}"/>"#, y - 4.0);
        let _ = writeln!(s, r#"<text x="{}" y="{y}">{}</text>"#, MARGIN + 18.0, env.name());
    }
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    }
}
