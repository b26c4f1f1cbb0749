//! Flock metrics on the toroidal arena.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{min_image_component, min_image_offset, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("polarization of an empty heading set is undefined")]
    NoHeadings,
}

/// Metrics logged at one tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsSample {
    pub t: f64,
    pub polarization: f64,
    pub hull_area: f64,
    pub unsafe_pairs: u32,
}

/// Norm of the mean heading unit vector.
pub fn polarization(headings: &[f64]) -> Result<f64, MetricsError> {
    if headings.is_empty() {
        return Err(MetricsError::NoHeadings);
    }
    let (s, c) = headings
        .iter()
        .fold((0.0, 0.0), |(s, c), h| (s + h.sin(), c + h.cos()));
    let n = headings.len() as f64;
    Ok((s / n).hypot(c / n).min(1.0))
}

pub fn min_image_distance(p: Vec2, q: Vec2, half_size: f64) -> f64 {
    min_image_offset(p, q, half_size).norm()
}

fn circular_center(coords: impl Iterator<Item = f64> + Clone, half: f64) -> f64 {
    let scale = std::f64::consts::PI / half;
    let (s, c) = coords.fold((0.0, 0.0), |(s, c), x| {
        let a = x * scale;
        (s + a.sin(), c + a.cos())
    });
    s.atan2(c) / scale
}

/// Moves every point by whole periods so the set sits in one image around
/// the per-axis circular mean.
pub fn torus_unwrap(points: &[Vec2], half_size: f64) -> Vec<Vec2> {
    if points.len() < 2 {
        return points.to_vec();
    }
    let cx = circular_center(points.iter().map(|p| p.x), half_size);
    let cy = circular_center(points.iter().map(|p| p.y), half_size);
    points
        .iter()
        .map(|p| {
            Vec2::new(
                cx + min_image_component(p.x - cx, half_size),
                cy + min_image_component(p.y - cy, half_size),
            )
        })
        .collect()
}

/// Convex hull vertices in counter-clockwise order (Andrew's monotone chain).
/// Collinear points on the boundary are dropped.
pub fn convex_hull(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let turn = |o: Vec2, a: Vec2, b: Vec2| (a - o).cross(b - o);

    let mut hull: Vec<Vec2> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    hull
}

/// Area of the planar convex hull; zero for degenerate sets.
pub fn hull_area(points: &[Vec2]) -> f64 {
    let hull = convex_hull(points);
    if hull.len() < 3 {
        return 0.0;
    }
    let twice: f64 = hull
        .iter()
        .zip(hull.iter().cycle().skip(1))
        .map(|(a, b)| a.cross(*b))
        .sum();
    0.5 * twice.abs()
}

/// Hull area of a point set on the torus, measured in the image centred on
/// the set's circular mean.
pub fn torus_hull_area(points: &[Vec2], half_size: f64) -> f64 {
    hull_area(&torus_unwrap(points, half_size))
}

/// Unordered pairs closer than `d_near` on the torus.
pub fn count_unsafe_pairs(positions: &[Vec2], d_near: f64, half_size: f64) -> u32 {
    let mut count = 0;
    for (i, p) in positions.iter().enumerate() {
        for q in &positions[i + 1..] {
            if min_image_distance(*p, *q, half_size) < d_near {
                count += 1;
            }
        }
    }
    count
}

/// All three metrics for one snapshot.
pub fn sample_metrics(t: f64, positions: &[Vec2], headings: &[f64], d_near: f64, half_size: f64) -> MetricsSample {
    MetricsSample {
        t,
        polarization: polarization(headings).unwrap_or(0.0),
        hull_area: torus_hull_area(positions, half_size),
        unsafe_pairs: count_unsafe_pairs(positions, d_near, half_size),
    }
}
