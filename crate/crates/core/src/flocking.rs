//! Zonal flocking controllers.
//!
//! The baseline is a direction-only Couzin controller: repulsion has priority,
//! otherwise orientation and attraction are summed. The speed-weighted variant
//! scales each orientation/attraction summand by `1/(v_j + ε)^γ` and adds a
//! luffing layer that eases the sail of boats faster than their neighbours.
//! Both pass their heading through a one-step safety filter.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{wrap_angle, Vec2};
use crate::vessel::{HelmCommand, VesselState};

/// Resultants shorter than this are treated as "no preference".
pub const HOLD_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlockError {
    #[error("zone radii must satisfy 0 < r_rep < r_ori < r_att")]
    BadRadii,
    #[error("speed-weight epsilon must be positive")]
    BadEpsilon,
    #[error("luffing parameters invalid: {0}")]
    BadLuff(&'static str),
    #[error("safety parameters invalid: {0}")]
    BadSafety(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZoneRadii {
    pub r_rep: f64,
    pub r_ori: f64,
    pub r_att: f64,
}

impl Default for ZoneRadii {
    fn default() -> Self {
        Self {
            r_rep: 4.0,
            r_ori: 10.0,
            r_att: 18.0,
        }
    }
}

impl ZoneRadii {
    pub fn validate(&self) -> Result<(), FlockError> {
        if 0.0 < self.r_rep && self.r_rep < self.r_ori && self.r_ori < self.r_att {
            Ok(())
        } else {
            Err(FlockError::BadRadii)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedWeightParams {
    pub gamma: f64,
    pub epsilon: f64,
}

impl SpeedWeightParams {
    pub fn new(gamma: f64, epsilon: f64) -> Self {
        Self { gamma, epsilon }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LuffParams {
    pub k_p: f64,
    /// Lower bound on the neighbourhood speed used as the relative-error denominator, m/s.
    pub speed_floor: f64,
}

impl Default for LuffParams {
    fn default() -> Self {
        Self {
            k_p: 0.4,
            speed_floor: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafetyParams {
    /// Minimum predicted separation the filter enforces, m.
    pub d_safe: f64,
    /// Separation below which a pair is logged as unsafe, m.
    pub d_near: f64,
    /// Prediction horizon, s.
    pub lookahead: f64,
    #[serde(rename = "heading_grid_deg", with = "crate::config::degrees")]
    pub heading_grid: f64,
}

impl Default for SafetyParams {
    fn default() -> Self {
        Self {
            d_safe: 1.5,
            d_near: 1.0,
            lookahead: 2.0,
            heading_grid: 10f64.to_radians(),
        }
    }
}

impl SafetyParams {
    pub fn validate(&self) -> Result<(), FlockError> {
        if !(self.d_near > 0.0 && self.d_near <= self.d_safe) {
            return Err(FlockError::BadSafety("need 0 < d_near <= d_safe"));
        }
        if !(self.lookahead > 0.0) {
            return Err(FlockError::BadSafety("lookahead must be positive"));
        }
        if !(self.heading_grid > 0.0 && self.heading_grid <= std::f64::consts::PI) {
            return Err(FlockError::BadSafety("heading grid must be in (0, 180] degrees"));
        }
        Ok(())
    }
}

/// Social rule used to pick the desired direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Controller {
    Baseline,
    SpeedWeighted { gamma: f64, epsilon: f64 },
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Baseline => "baseline",
            Controller::SpeedWeighted { .. } => "speed_weighted",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            Controller::Baseline => None,
            Controller::SpeedWeighted { gamma, .. } => Some(*gamma),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlockParams {
    pub zones: ZoneRadii,
    pub controller: Controller,
    pub luff: LuffParams,
    /// Luffing for speed-weighted controllers; the baseline never luffs.
    pub luffing: bool,
    pub safety: SafetyParams,
    pub safety_filter: bool,
}

impl Default for FlockParams {
    fn default() -> Self {
        Self {
            zones: ZoneRadii::default(),
            controller: Controller::Baseline,
            luff: LuffParams::default(),
            luffing: true,
            safety: SafetyParams::default(),
            safety_filter: true,
        }
    }
}

impl FlockParams {
    pub fn validate(&self) -> Result<(), FlockError> {
        self.zones.validate()?;
        if let Controller::SpeedWeighted { gamma, epsilon } = self.controller {
            if !(epsilon > 0.0) {
                return Err(FlockError::BadEpsilon);
            }
            if !gamma.is_finite() {
                return Err(FlockError::BadEpsilon);
            }
        }
        if !(self.luff.k_p >= 0.0) {
            return Err(FlockError::BadLuff("k_p must be non-negative"));
        }
        if !(self.luff.speed_floor > 0.0) {
            return Err(FlockError::BadLuff("speed_floor must be positive"));
        }
        self.safety.validate()
    }
}

/// What one boat sees of a neighbour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborView {
    /// Minimum-image displacement from the observer to the neighbour.
    pub offset: Vec2,
    pub heading: f64,
    pub speed: f64,
}

impl NeighborView {
    pub fn distance(&self) -> f64 {
        self.offset.norm()
    }

    /// Unit vector toward the neighbour; zero for a coincident neighbour.
    pub fn bearing(&self) -> Vec2 {
        let d = self.distance();
        if d > 0.0 {
            self.offset * (1.0 / d)
        } else {
            Vec2::ZERO
        }
    }

    pub fn heading_vec(&self) -> Vec2 {
        Vec2::from_angle(self.heading)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Zones {
    pub repulsion: Vec<NeighborView>,
    pub orientation: Vec<NeighborView>,
    pub attraction: Vec<NeighborView>,
}

impl Zones {
    pub fn len(&self) -> usize {
        self.repulsion.len() + self.orientation.len() + self.attraction.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all(&self) -> impl Iterator<Item = &NeighborView> {
        self.repulsion
            .iter()
            .chain(&self.orientation)
            .chain(&self.attraction)
    }
}

/// Result of a social rule: a unit direction, or keep the current heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SocialDirection {
    Toward(Vec2),
    Hold,
}

impl SocialDirection {
    fn from_resultant(v: Vec2) -> Self {
        let n = v.norm();
        if n < HOLD_THRESHOLD {
            SocialDirection::Hold
        } else {
            SocialDirection::Toward(v * (1.0 / n))
        }
    }

    pub fn heading_or(self, current: f64) -> f64 {
        match self {
            SocialDirection::Toward(v) => v.angle(),
            SocialDirection::Hold => current,
        }
    }
}

/// Partitions neighbours into `[0, r_rep)`, `[r_rep, r_ori)` and `[r_ori, r_att)`.
pub fn neighbor_zones(neighbors: &[NeighborView], radii: &ZoneRadii) -> Zones {
    let mut zones = Zones::default();
    for n in neighbors {
        let d = n.distance();
        if d < radii.r_rep {
            zones.repulsion.push(*n);
        } else if d < radii.r_ori {
            zones.orientation.push(*n);
        } else if d < radii.r_att {
            zones.attraction.push(*n);
        }
    }
    zones
}

fn repulsion_direction(zones: &Zones) -> SocialDirection {
    let mut sum = Vec2::ZERO;
    for n in &zones.repulsion {
        sum += -n.bearing();
    }
    SocialDirection::from_resultant(sum)
}

pub fn couzin_direction(zones: &Zones) -> SocialDirection {
    if !zones.repulsion.is_empty() {
        return repulsion_direction(zones);
    }
    let mut sum = Vec2::ZERO;
    for n in &zones.orientation {
        sum += n.heading_vec();
    }
    for n in &zones.attraction {
        sum += n.bearing();
    }
    SocialDirection::from_resultant(sum)
}

/// `1/(v + ε)^γ`.
pub fn speed_weight(v: f64, params: &SpeedWeightParams) -> f64 {
    if params.gamma == 0.0 {
        return 1.0;
    }
    (v.max(0.0) + params.epsilon).powf(-params.gamma)
}

/// Couzin rule with speed-weighted orientation and attraction; repulsion is unweighted.
pub fn weighted_direction(zones: &Zones, params: &SpeedWeightParams) -> SocialDirection {
    if !zones.repulsion.is_empty() {
        return repulsion_direction(zones);
    }
    let mut sum = Vec2::ZERO;
    for n in &zones.orientation {
        sum += n.heading_vec() * speed_weight(n.speed, params);
    }
    for n in &zones.attraction {
        sum += n.bearing() * speed_weight(n.speed, params);
    }
    SocialDirection::from_resultant(sum)
}

/// Sail trim that eases a boat sailing faster than its neighbours' mean.
pub fn luff_command(self_speed: f64, neighbor_speeds: &[f64], params: &LuffParams) -> f64 {
    if neighbor_speeds.is_empty() {
        return 1.0;
    }
    let mean = neighbor_speeds.iter().sum::<f64>() / neighbor_speeds.len() as f64;
    let excess = (self_speed - mean).max(0.0);
    (1.0 - params.k_p * excess / mean.max(params.speed_floor)).clamp(0.0, 1.0)
}

/// Candidate headings ordered by angular distance from `candidate`;
/// `+k` steps precede `−k` steps.
pub fn candidate_headings(candidate: f64, grid: f64) -> Vec<f64> {
    let count = ((std::f64::consts::TAU / grid).round() as usize).max(1);
    (0..count)
        .map(|i| {
            let k = if i == 0 {
                0.0
            } else if i % 2 == 1 {
                ((i + 1) / 2) as f64
            } else {
                -((i / 2) as f64)
            };
            wrap_angle(candidate + k * grid)
        })
        .collect()
}

/// Smallest separation to any neighbour after `lookahead` seconds if the
/// boat turned to `heading` now and everyone kept their velocity.
pub fn predicted_min_distance(
    heading: f64,
    own_speed: f64,
    neighbors: &[NeighborView],
    lookahead: f64,
) -> f64 {
    let own = Vec2::from_angle(heading) * (own_speed * lookahead);
    neighbors
        .iter()
        .map(|n| (n.offset + n.heading_vec() * (n.speed * lookahead) - own).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Keeps `candidate` unless it closes on a neighbour inside `d_safe`; then
/// takes the nearest grid heading that does not, or the safest one if none does.
pub fn safety_filter(
    candidate: f64,
    own: &VesselState,
    neighbors: &[NeighborView],
    params: &SafetyParams,
) -> f64 {
    let candidate = wrap_angle(candidate);
    if neighbors.is_empty() {
        return candidate;
    }
    let mut best = candidate;
    let mut best_dist = f64::NEG_INFINITY;
    for h in candidate_headings(candidate, params.heading_grid) {
        let d = predicted_min_distance(h, own.speed, neighbors, params.lookahead);
        if d >= params.d_safe {
            return h;
        }
        if d > best_dist {
            best = h;
            best_dist = d;
        }
    }
    best
}

/// One boat's helm command from a snapshot of its neighbourhood.
pub fn controller_tick(own: &VesselState, neighbors: &[NeighborView], params: &FlockParams) -> HelmCommand {
    let zones = neighbor_zones(neighbors, &params.zones);
    let social = match params.controller {
        Controller::Baseline => couzin_direction(&zones),
        Controller::SpeedWeighted { gamma, epsilon } => {
            weighted_direction(&zones, &SpeedWeightParams::new(gamma, epsilon))
        }
    };
    let mut heading = social.heading_or(own.heading);
    if params.safety_filter {
        heading = safety_filter(heading, own, neighbors, &params.safety);
    }
    let trim = match params.controller {
        Controller::SpeedWeighted { .. } if params.luffing => {
            let speeds: Vec<f64> = zones.all().map(|n| n.speed).collect();
            luff_command(own.speed, &speeds, &params.luff)
        }
        _ => 1.0,
    };
    HelmCommand::new(heading, trim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn nb(x: f64, y: f64, heading: f64, speed: f64) -> NeighborView {
        NeighborView {
            offset: Vec2::new(x, y),
            heading,
            speed,
        }
    }

    #[test]
    fn zone_examples() {
        let r = ZoneRadii::default();
        let z = neighbor_zones(&[nb(3.0, 0.0, 0.0, 1.0)], &r);
        assert_eq!(z.repulsion.len(), 1);
        let z = neighbor_zones(&[nb(10.0, 0.0, 0.0, 1.0)], &r);
        assert_eq!(z.attraction.len(), 1);
        let z = neighbor_zones(&[nb(0.0, 4.0, 0.0, 1.0)], &r);
        assert_eq!(z.orientation.len(), 1);
        let z = neighbor_zones(&[nb(20.0, 0.0, 0.0, 1.0)], &r);
        assert!(z.is_empty());
        let z = neighbor_zones(&[nb(18.0, 0.0, 0.0, 1.0)], &r);
        assert!(z.is_empty());
    }

    #[test]
    fn couzin_examples() {
        let r = ZoneRadii::default();
        let z = neighbor_zones(&[nb(2.0, 0.0, 0.0, 1.0)], &r);
        assert_eq!(couzin_direction(&z), SocialDirection::Toward(Vec2::new(-1.0, 0.0)));
        let z = neighbor_zones(&[nb(6.0, 0.0, FRAC_PI_2, 1.0)], &r);
        match couzin_direction(&z) {
            SocialDirection::Toward(v) => {
                assert_abs_diff_eq!(v.x, 0.0, epsilon = 1e-15);
                assert_abs_diff_eq!(v.y, 1.0, epsilon = 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let z = neighbor_zones(&[nb(15.0, 0.0, PI, 1.0)], &r);
        assert_eq!(couzin_direction(&z), SocialDirection::Toward(Vec2::new(1.0, 0.0)));
        assert_eq!(couzin_direction(&Zones::default()), SocialDirection::Hold);
    }

    #[test]
    fn opposed_neighbours_hold() {
        let r = ZoneRadii::default();
        let z = neighbor_zones(&[nb(2.0, 0.0, 0.0, 1.0), nb(-2.0, 0.0, 0.0, 1.0)], &r);
        assert_eq!(couzin_direction(&z), SocialDirection::Hold);
        assert_eq!(couzin_direction(&z).heading_or(0.7), 0.7);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(speed_weight(3.7, &SpeedWeightParams::new(0.0, 0.1)), 1.0);
        assert_abs_diff_eq!(speed_weight(0.9, &SpeedWeightParams::new(1.0, 0.1)), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(speed_weight(0.0, &SpeedWeightParams::new(2.0, 0.1)), 100.0, epsilon = 1e-9);
    }

    #[test]
    fn weighted_orientation_favours_slow_boat() {
        let r = ZoneRadii::default();
        // γ = 1, ε = 0.1: speed 0.9 -> weight 1, speed 2.9 -> weight 1/3
        let p = SpeedWeightParams::new(1.0, 0.1);
        let z = neighbor_zones(&[nb(6.0, 0.0, FRAC_PI_2, 0.9), nb(0.0, 6.0, -FRAC_PI_2, 2.9)], &r);
        match weighted_direction(&z, &p) {
            SocialDirection::Toward(v) => assert_abs_diff_eq!(v.angle(), FRAC_PI_2, epsilon = 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn repulsion_ignores_speeds() {
        let r = ZoneRadii::default();
        let set = [nb(1.0, 1.0, 0.0, 0.1), nb(7.0, 0.0, 1.0, 5.0)];
        let z = neighbor_zones(&set, &r);
        let p = SpeedWeightParams::new(5.0, 0.1);
        assert_eq!(weighted_direction(&z, &p), couzin_direction(&z));
    }

    #[test]
    fn luff_examples() {
        let p = LuffParams::default();
        assert_eq!(luff_command(1.0, &[1.0, 2.0], &p), 1.0);
        assert_abs_diff_eq!(luff_command(2.0, &[1.0, 1.0], &p), 0.6, epsilon = 1e-12);
        assert_eq!(luff_command(5.0, &[], &p), 1.0);
        assert_eq!(luff_command(100.0, &[0.0], &p), 0.0);
    }

    #[test]
    fn candidate_grid_order() {
        let c = candidate_headings(0.0, 10f64.to_radians());
        assert_eq!(c.len(), 36);
        assert_eq!(c[0], 0.0);
        assert_abs_diff_eq!(c[1], 10f64.to_radians(), epsilon = 1e-12);
        assert_abs_diff_eq!(c[2], -10f64.to_radians(), epsilon = 1e-12);
        assert_abs_diff_eq!(c[35].abs(), PI, epsilon = 1e-12);
    }

    #[test]
    fn safety_passes_when_clear() {
        let own = VesselState { speed: 2.0, ..VesselState::at_rest(Vec2::ZERO, 0.0) };
        let p = SafetyParams::default();
        let far = [nb(30.0, 0.0, PI, 3.0)];
        assert_eq!(safety_filter(0.3, &own, &far, &p), 0.3);
        assert_eq!(safety_filter(0.3, &own, &[], &p), 0.3);
    }

    #[test]
    fn safety_deflects_from_blocker() {
        let own = VesselState { speed: 2.0, ..VesselState::at_rest(Vec2::ZERO, 0.0) };
        let p = SafetyParams::default();
        // stationary boat dead ahead where we would be in 2 s
        let blocker = [nb(4.0, 0.0, 0.0, 0.0)];
        let h = safety_filter(0.0, &own, &blocker, &p);
        assert_ne!(h, 0.0);
        assert!(predicted_min_distance(h, 2.0, &blocker, p.lookahead) >= p.d_safe);
    }

    #[test]
    fn safety_falls_back_to_argmax() {
        let own = VesselState { speed: 0.2, ..VesselState::at_rest(Vec2::ZERO, 0.0) };
        let p = SafetyParams::default();
        let overlapping = [nb(0.1, 0.0, 0.0, 0.0)];
        let h = safety_filter(0.0, &own, &overlapping, &p);
        let best = candidate_headings(0.0, p.heading_grid)
            .into_iter()
            .map(|c| predicted_min_distance(c, 0.2, &overlapping, p.lookahead))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(best < p.d_safe);
        assert_eq!(predicted_min_distance(h, 0.2, &overlapping, p.lookahead), best);
        assert_abs_diff_eq!(h.abs(), PI, epsilon = 1e-12);
    }

    #[test]
    fn baseline_never_luffs() {
        let own = VesselState { speed: 5.0, ..VesselState::at_rest(Vec2::ZERO, 0.0) };
        let params = FlockParams::default();
        let cmd = controller_tick(&own, &[nb(6.0, 0.0, 0.0, 0.5)], &params);
        assert_eq!(cmd.trim_command, 1.0);
    }

    #[test]
    fn weighted_gamma_zero_matches_baseline_heading() {
        let own = VesselState { speed: 3.0, ..VesselState::at_rest(Vec2::ZERO, 0.4) };
        let nbs = [nb(6.0, 1.0, 0.3, 0.5), nb(-12.0, 3.0, 2.0, 4.0)];
        let base = controller_tick(&own, &nbs, &FlockParams::default());
        let weighted = controller_tick(
            &own,
            &nbs,
            &FlockParams {
                controller: Controller::SpeedWeighted { gamma: 0.0, epsilon: 0.1 },
                ..FlockParams::default()
            },
        );
        assert_eq!(base.desired_heading, weighted.desired_heading);
        assert!(weighted.trim_command < 1.0);
    }

    #[test]
    fn hold_keeps_heading() {
        let own = VesselState::at_rest(Vec2::ZERO, 1.2);
        let cmd = controller_tick(&own, &[], &FlockParams::default());
        assert_eq!(cmd.desired_heading, 1.2);
    }

    #[test]
    fn validation() {
        assert!(FlockParams::default().validate().is_ok());
        let bad = FlockParams {
            zones: ZoneRadii { r_rep: 5.0, r_ori: 4.0, r_att: 18.0 },
            ..FlockParams::default()
        };
        assert_eq!(bad.validate(), Err(FlockError::BadRadii));
        let bad = FlockParams {
            controller: Controller::SpeedWeighted { gamma: 1.0, epsilon: 0.0 },
            ..FlockParams::default()
        };
        assert_eq!(bad.validate(), Err(FlockError::BadEpsilon));
    }
}
