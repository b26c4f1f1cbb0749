//! Seeded planar wind: a uniform base flow plus drifting Gaussian gust patches.
//!
//! A [`WindVector`] is the air velocity, i.e. it points the way the air
//! moves. Headings into the wind are obtained with [`upwind_direction`].
//!
//! Gust patches are evaluated from counter-based random streams keyed by
//! `(seed, patch, epoch)`, so a sample depends only on the query point and
//! time, never on query order.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{min_image_offset, wrap_angle, Vec2};

/// Default arena half-size used when a field is built without a run config.
pub const DEFAULT_ARENA_HALF: f64 = 35.0;

/// Gaussian patches are truncated beyond this many radii.
const PATCH_CUTOFF_RADII: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WindError {
    #[error("no defined upwind direction for a zero wind vector")]
    NoUpwind,
    #[error("invalid gust parameters: {0}")]
    InvalidGust(&'static str),
    #[error("unknown environment {0:?} (expected steady5, steady10, gusty5, gusty10 or calm)")]
    UnknownEnvironment(String),
}

/// Air velocity in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WindVector {
    pub u: f64,
    pub v: f64,
}

impl WindVector {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn speed(self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn as_vec(self) -> Vec2 {
        Vec2::new(self.u, self.v)
    }

    pub fn from_vec(v: Vec2) -> Self {
        Self { u: v.x, v: v.y }
    }
}

/// Heading pointing straight into the wind, in (−π, π].
pub fn upwind_direction(w: WindVector) -> Result<f64, WindError> {
    if w.u == 0.0 && w.v == 0.0 {
        return Err(WindError::NoUpwind);
    }
    Ok(wrap_angle((-w.v).atan2(-w.u)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GustParams {
    pub patch_count: u32,
    /// Gaussian standard deviation of one patch, m.
    pub patch_radius: f64,
    /// Peak patch speed as a fraction of the base speed.
    pub amplitude_fraction: f64,
    /// Half-width of the uniform rotation applied to each patch's flow, rad.
    #[serde(with = "crate::config::degrees")]
    pub direction_jitter: f64,
    /// Seconds between re-seeding of a patch's centre.
    pub lifetime: f64,
}

impl Default for GustParams {
    fn default() -> Self {
        Self {
            patch_count: 6,
            patch_radius: 8.0,
            amplitude_fraction: 0.5,
            direction_jitter: 20f64.to_radians(),
            lifetime: 20.0,
        }
    }
}

impl GustParams {
    pub fn validate(&self) -> Result<(), WindError> {
        if self.patch_count == 0 {
            return Err(WindError::InvalidGust("patch_count must be positive"));
        }
        if !(self.patch_radius > 0.0) {
            return Err(WindError::InvalidGust("patch_radius must be positive"));
        }
        if !(self.amplitude_fraction > 0.0 && self.amplitude_fraction <= 1.0) {
            return Err(WindError::InvalidGust("amplitude_fraction must be in (0, 1]"));
        }
        if !(self.direction_jitter > 0.0) {
            return Err(WindError::InvalidGust("direction_jitter must be positive"));
        }
        if !(self.lifetime > 0.0) {
            return Err(WindError::InvalidGust("lifetime must be positive"));
        }
        Ok(())
    }
}

/// The experiment wind conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Steady5,
    Steady10,
    Gusty5,
    Gusty10,
    /// No wind at all; used for sanity runs.
    Calm,
}

impl EnvKind {
    /// The four sweep environments, in reporting order.
    pub const SWEEP: [EnvKind; 4] = [
        EnvKind::Steady5,
        EnvKind::Steady10,
        EnvKind::Gusty5,
        EnvKind::Gusty10,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Steady5 => "steady5",
            EnvKind::Steady10 => "steady10",
            EnvKind::Gusty5 => "gusty5",
            EnvKind::Gusty10 => "gusty10",
            EnvKind::Calm => "calm",
        }
    }

    pub fn base_speed(self) -> f64 {
        match self {
            EnvKind::Steady5 | EnvKind::Gusty5 => 5.0,
            EnvKind::Steady10 | EnvKind::Gusty10 => 10.0,
            EnvKind::Calm => 0.0,
        }
    }

    pub fn gusty(self) -> bool {
        matches!(self, EnvKind::Gusty5 | EnvKind::Gusty10)
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = WindError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "steady5" => Ok(EnvKind::Steady5),
            "steady10" => Ok(EnvKind::Steady10),
            "gusty5" => Ok(EnvKind::Gusty5),
            "gusty10" => Ok(EnvKind::Gusty10),
            "calm" => Ok(EnvKind::Calm),
            other => Err(WindError::UnknownEnvironment(other.to_string())),
        }
    }
}

/// One gust patch during one of its lifetimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GustPatch {
    pub center: Vec2,
    /// Direction the patch air moves toward, rad.
    pub direction: f64,
    /// Peak speed at the centre for this instant (envelope applied), m/s.
    pub strength: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindField {
    pub base_speed: f64,
    /// Direction the base air moves toward, in (−π, π].
    pub base_direction: f64,
    pub gusts_enabled: bool,
    pub gust: GustParams,
    pub seed: u64,
    /// Half-size of the square the patch centres are drawn from.
    pub arena_half: f64,
}

impl WindField {
    pub fn steady(base_speed: f64, base_direction: f64) -> Self {
        Self {
            base_speed,
            base_direction: wrap_angle(base_direction),
            gusts_enabled: false,
            gust: GustParams::default(),
            seed: 0,
            arena_half: DEFAULT_ARENA_HALF,
        }
    }

    /// Builds the field for an environment with explicit gust and geometry settings.
    pub fn for_environment(
        kind: EnvKind,
        seed: u64,
        base_direction: f64,
        gust: GustParams,
        arena_half: f64,
    ) -> Self {
        Self {
            base_speed: kind.base_speed(),
            base_direction: wrap_angle(base_direction),
            gusts_enabled: kind.gusty(),
            gust,
            seed,
            arena_half,
        }
    }

    pub fn base_vector(&self) -> WindVector {
        WindVector::from_vec(Vec2::from_angle(self.base_direction) * self.base_speed)
    }

    /// Patch `index` as it stands at time `t`; `None` outside any lifetime or
    /// when gusts are off.
    pub fn patch_at(&self, index: u32, t: f64) -> Option<GustPatch> {
        if !self.gusts_enabled || index >= self.gust.patch_count || self.base_speed == 0.0 {
            return None;
        }
        let life = self.gust.lifetime;
        let offset = life * f64::from(index) / f64::from(self.gust.patch_count);
        let shifted = t.max(0.0) + offset;
        let epoch = (shifted / life).floor();
        let phase = (shifted - epoch * life) / life;
        let envelope = (PI * phase).sin().powi(2);

        let mut rng = patch_rng(self.seed, index, epoch as u64);
        let half = self.arena_half;
        let cx = rng.random_range(-half..half);
        let cy = rng.random_range(-half..half);
        let jitter = self.gust.direction_jitter;
        let turn = rng.random_range(-jitter..=jitter);

        Some(GustPatch {
            center: Vec2::new(cx, cy),
            direction: wrap_angle(self.base_direction + turn),
            strength: self.gust.amplitude_fraction * self.base_speed * envelope,
            radius: self.gust.patch_radius,
        })
    }

    /// Local air velocity at `pos` and time `t`.
    pub fn sample(&self, pos: Vec2, t: f64) -> WindVector {
        let mut w = self.base_vector().as_vec();
        if self.gusts_enabled {
            for k in 0..self.gust.patch_count {
                if let Some(patch) = self.patch_at(k, t) {
                    w += patch_contribution(&patch, pos, self.arena_half);
                }
            }
        }
        WindVector::from_vec(w)
    }
}

fn patch_contribution(patch: &GustPatch, pos: Vec2, arena_half: f64) -> Vec2 {
    let d = min_image_offset(patch.center, pos, arena_half);
    let r = patch.radius;
    if d.norm() > PATCH_CUTOFF_RADII * r {
        return Vec2::ZERO;
    }
    let falloff = (-d.norm_sq() / (2.0 * r * r)).exp();
    Vec2::from_angle(patch.direction) * (patch.strength * falloff)
}

/// Independent stream per (seed, patch, epoch); ChaCha's stream and word
/// counters make this a pure function of the key.
fn patch_rng(seed: u64, patch: u32, epoch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(patch));
    // 16 words per epoch
    rng.set_word_pos(u128::from(epoch) * 16);
    rng
}

/// Experiment environment with the default gust model and arena.
pub fn make_environment(kind: EnvKind, seed: u64) -> WindField {
    WindField::for_environment(kind, seed, 0.0, GustParams::default(), DEFAULT_ARENA_HALF)
}

pub fn sample_wind(field: &WindField, pos: Vec2, t: f64) -> WindVector {
    field.sample(pos, t)
}
