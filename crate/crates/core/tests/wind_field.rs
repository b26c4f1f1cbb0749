use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sailswarm::wind::{make_environment, sample_wind, upwind_direction};
use sailswarm::{EnvKind, Vec2, WindField};

/// Second, straightforward evaluation of the gust superposition: redraws
/// every patch from its own keyed stream and sums the Gaussians over all
/// nine torus images.
fn reference_sample(field: &WindField, pos: Vec2, t: f64) -> (f64, f64) {
    let g = &field.gust;
    let mut u = field.base_speed * field.base_direction.cos();
    let mut v = field.base_speed * field.base_direction.sin();
    for k in 0..g.patch_count {
        let start = g.lifetime * k as f64 / g.patch_count as f64;
        let s = t + start;
        let epoch = (s / g.lifetime).floor();
        let phase = s / g.lifetime - epoch;
        let mut rng = ChaCha8Rng::seed_from_u64(field.seed);
        rng.set_stream(k as u64);
        rng.set_word_pos(16 * epoch as u128);
        let h = field.arena_half;
        let cx: f64 = rng.random_range(-h..h);
        let cy: f64 = rng.random_range(-h..h);
        let turn: f64 = rng.random_range(-g.direction_jitter..=g.direction_jitter);
        let amp = g.amplitude_fraction * field.base_speed * (PI * phase).sin().powi(2);
        let mut nearest = f64::INFINITY;
        for ix in -1..=1 {
            for iy in -1..=1 {
                let dx = pos.x - (cx + 2.0 * h * ix as f64);
                let dy = pos.y - (cy + 2.0 * h * iy as f64);
                nearest = nearest.min(dx * dx + dy * dy);
            }
        }
        if nearest.sqrt() > 4.0 * g.patch_radius {
            continue;
        }
        let w = amp * (-nearest / (2.0 * g.patch_radius * g.patch_radius)).exp();
        let dir = field.base_direction + turn;
        u += w * dir.cos();
        v += w * dir.sin();
    }
    (u, v)
}

#[test]
fn gusty_sample_matches_reference_superposition() {
    let field = make_environment(EnvKind::Gusty10, 7);
    let w = sample_wind(&field, Vec2::new(0.0, 0.0), 50.0);
    let (u, v) = reference_sample(&field, Vec2::new(0.0, 0.0), 50.0);
    assert!((w.u - u).abs() < 1e-12 && (w.v - v).abs() < 1e-12, "{w:?} vs ({u}, {v})");

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let seed = rng.random_range(0..1000);
        let env = if rng.random_bool(0.5) { EnvKind::Gusty5 } else { EnvKind::Gusty10 };
        let field = make_environment(env, seed);
        let pos = Vec2::new(rng.random_range(-35.0..35.0), rng.random_range(-35.0..35.0));
        let t = rng.random_range(0.0..300.0);
        let w = sample_wind(&field, pos, t);
        let (u, v) = reference_sample(&field, pos, t);
        assert!((w.u - u).abs() < 1e-9 && (w.v - v).abs() < 1e-9, "{env} seed {seed} {pos:?} t {t}");
    }
}

#[test]
fn steady_fields_ignore_seed_position_and_time() {
    for env in [EnvKind::Steady5, EnvKind::Steady10] {
        let a = make_environment(env, 1);
        let b = make_environment(env, 99);
        for (x, y, t) in [(0.0, 0.0, 0.0), (-30.0, 12.0, 150.0), (34.9, -34.9, 299.0)] {
            let p = Vec2::new(x, y);
            assert_eq!(sample_wind(&a, p, t), sample_wind(&b, p, t));
            assert_eq!(sample_wind(&a, p, t).u, env.base_speed());
            assert_eq!(sample_wind(&a, p, t).v, 0.0);
        }
    }
}

#[test]
fn gusts_are_bounded_and_leave_the_base_far_away() {
    let field = make_environment(EnvKind::Gusty10, 3);
    let bound = field.gust.patch_count as f64 * field.gust.amplitude_fraction * field.base_speed;
    let base = field.base_vector();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut saw_gust = false;
    let mut saw_base = false;
    for _ in 0..20_000 {
        let pos = Vec2::new(rng.random_range(-35.0..35.0), rng.random_range(-35.0..35.0));
        let t = rng.random_range(0.0..300.0);
        let w = sample_wind(&field, pos, t);
        let dev = ((w.u - base.u).powi(2) + (w.v - base.v).powi(2)).sqrt();
        assert!(dev <= bound + 1e-12);
        saw_gust |= dev > 1.0;
        saw_base |= dev == 0.0;
    }
    assert!(saw_gust && saw_base);
}

#[test]
fn gusty_field_is_order_independent() {
    let field = make_environment(EnvKind::Gusty5, 42);
    let points: Vec<(Vec2, f64)> = (0..50).map(|i| (Vec2::new(i as f64 - 25.0, 3.0), i as f64 * 6.0)).collect();
    let forward: Vec<_> = points.iter().map(|(p, t)| sample_wind(&field, *p, *t)).collect();
    let backward: Vec<_> = points.iter().rev().map(|(p, t)| sample_wind(&field, *p, *t)).collect();
    assert!(forward.iter().eq(backward.iter().rev()));
}

#[test]
fn upwind_points_into_the_wind() {
    let field = make_environment(EnvKind::Steady5, 0);
    let up = upwind_direction(field.base_vector()).unwrap();
    assert!((up.abs() - PI).abs() < 1e-12);
}
