//! Reduced-order sailing kinematics.
//!
//! A boat moves along its heading at a wind-dependent speed, cannot point
//! inside the no-go cone around head-to-wind, and turns at a rate limited by
//! its speed through the water.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{wrap_angle, Vec2};
use crate::wind::{upwind_direction, WindVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VesselError {
    #[error("becalmed: apparent wind is zero")]
    Becalmed,
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("invalid sailing limits: {0}")]
    InvalidLimits(&'static str),
}

/// Which side the wind comes over; starboard tack points to the left of
/// head-to-wind (counter-clockwise), port tack to the right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tack {
    Port,
    Starboard,
}

impl Tack {
    pub fn sign(self) -> f64 {
        match self {
            Tack::Port => -1.0,
            Tack::Starboard => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tack::Port => "port",
            Tack::Starboard => "starboard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VesselState {
    pub pos: Vec2,
    /// Heading in (−π, π].
    pub heading: f64,
    /// Forward speed, m/s.
    pub speed: f64,
    /// Sail trim, 1 fully powered, 0 fully eased.
    pub trim: f64,
    pub tack: Tack,
}

impl VesselState {
    pub fn at_rest(pos: Vec2, heading: f64) -> Self {
        Self {
            pos,
            heading: wrap_angle(heading),
            speed: 0.0,
            trim: 1.0,
            tack: Tack::Starboard,
        }
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::from_angle(self.heading) * self.speed
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HelmCommand {
    pub desired_heading: f64,
    pub trim_command: f64,
}

impl HelmCommand {
    pub fn new(desired_heading: f64, trim_command: f64) -> Self {
        Self {
            desired_heading: wrap_angle(desired_heading),
            trim_command: trim_command.clamp(0.0, 1.0),
        }
    }
}

/// Surface drift added to the boat's own motion, m/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriftInput {
    pub drift: Vec2,
}

impl DriftInput {
    pub const CALM: DriftInput = DriftInput { drift: Vec2::ZERO };
}

/// Speed polar: fraction of the true wind speed reached at each
/// apparent-wind angle, linearly interpolated between anchors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polar {
    /// `(apparent-wind angle in degrees, speed fraction)`, angles strictly increasing from 0 to 180.
    pub anchors: Vec<(f64, f64)>,
}

impl Default for Polar {
    fn default() -> Self {
        Self {
            anchors: vec![
                (0.0, 0.35),
                (45.0, 0.50),
                (90.0, 0.55),
                (135.0, 0.35),
                (150.0, 0.0),
                (180.0, 0.0),
            ],
        }
    }
}

impl Polar {
    pub fn validate(&self) -> Result<(), VesselError> {
        let a = &self.anchors;
        if a.len() < 2 {
            return Err(VesselError::InvalidLimits("polar needs at least two anchors"));
        }
        if a[0].0 != 0.0 || a[a.len() - 1].0 != 180.0 {
            return Err(VesselError::InvalidLimits("polar must span 0..180 degrees"));
        }
        if a.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(VesselError::InvalidLimits("polar angles must increase"));
        }
        if a.iter().any(|&(_, f)| !(f >= 0.0 && f.is_finite())) {
            return Err(VesselError::InvalidLimits("polar fractions must be finite and non-negative"));
        }
        Ok(())
    }

    /// Speed fraction at apparent-wind angle `beta` (radians, clamped to [0, π]).
    pub fn fraction(&self, beta: f64) -> f64 {
        let deg = beta.clamp(0.0, PI).to_degrees();
        let a = &self.anchors;
        for w in a.windows(2) {
            let (b0, f0) = w[0];
            let (b1, f1) = w[1];
            if deg <= b1 {
                let s = ((deg - b0) / (b1 - b0)).clamp(0.0, 1.0);
                return f0 + s * (f1 - f0);
            }
        }
        a[a.len() - 1].1
    }

    pub fn speed(&self, wind_speed: f64, beta: f64) -> f64 {
        wind_speed.max(0.0) * self.fraction(beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SailingLimits {
    #[serde(rename = "no_go_half_angle_deg", with = "crate::config::degrees")]
    pub no_go_half_angle: f64,
    /// Proportional heading gain, 1/s.
    pub yaw_gain: f64,
    /// Yaw-rate ceiling at or above `yaw_ref_speed`, rad/s.
    pub max_yaw_rate: f64,
    pub yaw_ref_speed: f64,
    /// First-order speed lag, s.
    pub speed_time_const: f64,
    #[serde(rename = "tack_hysteresis_deg", with = "crate::config::degrees")]
    pub tack_hysteresis: f64,
    pub polar: Polar,
}

impl Default for SailingLimits {
    fn default() -> Self {
        Self {
            no_go_half_angle: 45f64.to_radians(),
            yaw_gain: 1.0,
            max_yaw_rate: 0.5,
            yaw_ref_speed: 1.0,
            speed_time_const: 3.0,
            tack_hysteresis: 10f64.to_radians(),
            polar: Polar::default(),
        }
    }
}

impl SailingLimits {
    pub fn validate(&self) -> Result<(), VesselError> {
        if !(self.no_go_half_angle > 0.0 && self.no_go_half_angle < PI / 2.0) {
            return Err(VesselError::InvalidLimits("no_go_half_angle must be in (0, 90) degrees"));
        }
        let positive = [
            self.yaw_gain,
            self.max_yaw_rate,
            self.yaw_ref_speed,
            self.speed_time_const,
            self.tack_hysteresis,
        ];
        if positive.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(VesselError::InvalidLimits("gains, rates and time constants must be positive"));
        }
        self.polar.validate()
    }

    /// Yaw-rate ceiling at forward speed `speed`.
    pub fn yaw_ceiling(&self, speed: f64) -> f64 {
        self.max_yaw_rate * (speed.max(0.0) / self.yaw_ref_speed).min(1.0)
    }
}

/// Apparent-wind angle in [0, π]: 0 running dead downwind, π head-to-wind.
pub fn apparent_wind_angle(state: &VesselState, w: WindVector) -> Result<f64, VesselError> {
    let apparent = w.as_vec() - state.velocity();
    if apparent.x == 0.0 && apparent.y == 0.0 {
        return Err(VesselError::Becalmed);
    }
    Ok(wrap_angle(state.heading - apparent.y.atan2(apparent.x)).abs())
}

/// Target speed from the default polar.
pub fn polar_speed(wind_speed: f64, beta: f64) -> f64 {
    Polar::default().speed(wind_speed, beta)
}

/// Luffing: scales `target` by `1 − (β/π)²·(1 − trim)`.
pub fn apply_depower(target: f64, beta: f64, trim: f64) -> f64 {
    let ratio = beta / PI;
    target * (1.0 - ratio * ratio * (1.0 - trim.clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoGoProjection {
    pub heading: f64,
    pub tack: Tack,
    pub projected: bool,
}

// slack at the cone edge absorbs rounding in the wrap
const BOUNDARY_SLACK: f64 = 1e-12;

/// Maps a desired heading onto the feasible set outside the no-go cone.
///
/// Inside the cone the heading snaps to the close-hauled edge on the side of
/// the desired heading; dead upwind falls back to the current tack. The tack
/// state only switches once the desired heading is more than `hysteresis`
/// past head-to-wind on the other side.
pub fn project_no_go(
    desired: f64,
    upwind: f64,
    half_angle: f64,
    current_tack: Tack,
    hysteresis: f64,
) -> NoGoProjection {
    let delta = wrap_angle(desired - upwind);
    let tack = if delta > hysteresis {
        Tack::Starboard
    } else if delta < -hysteresis {
        Tack::Port
    } else {
        current_tack
    };
    if delta.abs() >= half_angle - BOUNDARY_SLACK {
        NoGoProjection {
            heading: wrap_angle(desired),
            tack,
            projected: false,
        }
    } else {
        let side = if delta == 0.0 { current_tack.sign() } else { delta.signum() };
        NoGoProjection {
            heading: wrap_angle(upwind + side * half_angle),
            tack,
            projected: true,
        }
    }
}

/// Heading error toward `target`, taking the long way round whenever the
/// short arc would sweep through head-to-wind.
pub fn routed_heading_error(heading: f64, target: f64, upwind: Option<f64>) -> f64 {
    let err = wrap_angle(target - heading);
    let Some(upwind) = upwind else {
        return err;
    };
    let to_upwind = wrap_angle(upwind - heading);
    let crosses = err != 0.0
        && to_upwind != 0.0
        && to_upwind.signum() == err.signum()
        && to_upwind.abs() < err.abs();
    if crosses {
        err - TAU * err.signum()
    } else {
        err
    }
}

fn clamp_yaw(error: f64, speed: f64, limits: &SailingLimits) -> f64 {
    let ceiling = limits.yaw_ceiling(speed);
    (limits.yaw_gain * error).clamp(-ceiling, ceiling)
}

/// Commanded yaw rate toward `feasible_heading` along the shorter arc.
pub fn yaw_rate(state: &VesselState, feasible_heading: f64, limits: &SailingLimits) -> f64 {
    clamp_yaw(wrap_angle(feasible_heading - state.heading), state.speed, limits)
}

/// Target speed for the current point of sail and trim; zero when becalmed.
pub fn target_speed(state: &VesselState, w: WindVector, trim: f64, limits: &SailingLimits) -> f64 {
    match apparent_wind_angle(state, w) {
        Ok(beta) => apply_depower(limits.polar.speed(w.speed(), beta), beta, trim),
        Err(_) => 0.0,
    }
}

/// Advances one boat by `dt`.
///
/// The desired heading is projected out of the no-go cone, the turn is routed
/// around head-to-wind, and position moves with the speed and heading held at
/// the start of the step. Speed relaxes toward the depowered polar target with
/// an exact first-order lag. The returned position is not wrapped.
pub fn step_vessel(
    state: &VesselState,
    w: WindVector,
    cmd: HelmCommand,
    drift: DriftInput,
    limits: &SailingLimits,
    dt: f64,
) -> Result<VesselState, VesselError> {
    if !(dt > 0.0) {
        return Err(VesselError::NonPositiveStep(dt));
    }
    let upwind = upwind_direction(w).ok();
    let (feasible, tack) = match upwind {
        Some(up) => {
            let p = project_no_go(
                cmd.desired_heading,
                up,
                limits.no_go_half_angle,
                state.tack,
                limits.tack_hysteresis,
            );
            (p.heading, p.tack)
        }
        None => (cmd.desired_heading, state.tack),
    };
    let error = routed_heading_error(state.heading, feasible, upwind);
    let omega = clamp_yaw(error, state.speed, limits);

    let trim = cmd.trim_command.clamp(0.0, 1.0);
    let target = target_speed(state, w, trim, limits);
    let decay = (-dt / limits.speed_time_const).exp();
    let speed = (target + (state.speed - target) * decay).max(0.0);

    let pos = state.pos + (Vec2::from_angle(state.heading) * state.speed + drift.drift) * dt;

    Ok(VesselState {
        pos,
        heading: wrap_angle(state.heading + dt * omega),
        speed,
        trim,
        tack,
    })
}
