//! Fleet and target geometry, travel delays and coverage checks.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{DeployError, Result};

/// Relative factor of the geometric tolerance, scaled by `max(beta, 1)`.
pub const GEOM_REL_TOL: f64 = 1e-9;

/// Relative factor of the seam tolerance used inside the solvers.
pub const SEAM_REL_TOL: f64 = 1e-12;

/// Relative slack under which a slightly negative radicand counts as zero.
const RADICAND_REL_TOL: f64 = 1e-12;

/// Distance model used to turn a displacement into a travel time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    /// `|dx| + |dz| + h`, a weighted Manhattan distance.
    Manhattan,
}

/// One aerial agent. Distances are in km, speeds in km/h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uav {
    pub id: usize,
    /// Initial abscissa.
    pub x: f64,
    /// Initial lateral offset from the target axis.
    #[serde(default)]
    pub z: f64,
    /// Coverage radius on the ground.
    pub r: f64,
    /// Operating altitude.
    pub h: f64,
    /// Flying speed.
    pub v: f64,
    /// Transmit power (W) when the radius was derived from a link budget.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
}

impl Uav {
    pub fn new(id: usize, x: f64, r: f64, h: f64, v: f64) -> Self {
        Uav {
            id,
            x,
            z: 0.0,
            r,
            h,
            v,
            power: None,
        }
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.z = z;
        self
    }

    /// Speed ratio that turns a distance into hours.
    #[inline]
    pub fn hours(&self, distance: f64) -> f64 {
        distance / self.v
    }
}

/// Per-agent link budget: transmit power plus the shared channel constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    /// Transmit power (W).
    pub power: f64,
    /// Channel power gain at the reference distance.
    pub xi: f64,
    /// Noise power (W).
    pub sigma2: f64,
    /// SNR threshold, linear scale.
    pub gamma_th: f64,
}

impl RadioParams {
    /// `P·ξ / (γ_th·σ²)`: the squared slant range at which the SNR hits the threshold.
    pub fn link_budget(&self) -> f64 {
        self.power * self.xi / (self.gamma_th * self.sigma2)
    }
}

/// Channel constants shared by the whole fleet. The threshold is kept in dB so
/// that files round-trip exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioLink {
    pub xi: f64,
    pub sigma2: f64,
    pub gamma_th_db: f64,
}

impl RadioLink {
    pub fn gamma_th_linear(&self) -> f64 {
        db_to_linear(self.gamma_th_db)
    }

    pub fn with_power(&self, power: f64) -> RadioParams {
        RadioParams {
            power,
            xi: self.xi,
            sigma2: self.sigma2,
            gamma_th: self.gamma_th_linear(),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Coverage radius at which the received SNR equals the threshold.
pub fn radius_from_snr(radio: &RadioParams, h: f64) -> Result<f64> {
    if !(radio.power > 0.0 && radio.xi > 0.0 && radio.sigma2 > 0.0 && radio.gamma_th > 0.0) {
        return Err(DeployError::Domain(
            "radio parameters must be strictly positive".into(),
        ));
    }
    let radicand = radio.link_budget() - h * h;
    if !(radicand > 0.0) {
        return Err(DeployError::Domain(format!(
            "altitude {h} km exceeds the link budget (slant range {:.6} km)",
            radio.link_budget().sqrt()
        )));
    }
    Ok(radicand.sqrt())
}

/// Half-length of the footprint along the target axis for a strip of width `d`.
pub fn footprint_halfwidth(uav: &Uav, d: f64) -> Result<f64> {
    let half = d / 2.0;
    if uav.r < half {
        return Err(DeployError::Domain(format!(
            "radius {} is smaller than half the target width {}",
            uav.r, half
        )));
    }
    if d == 0.0 {
        return Ok(uav.r);
    }
    Ok((uav.r * uav.r - half * half).sqrt())
}

/// Travel time to hover above abscissa `y`. With `planar` the initial lateral
/// offset `z` is flown back to the axis as well.
pub fn travel_time(uav: &Uav, y: f64, metric: Metric, planar: bool) -> f64 {
    let dz = if planar { uav.z } else { 0.0 };
    displacement_time(uav, y - uav.x, dz, metric)
}

/// Travel time to hover above the ground point `(y, zp)`.
pub fn travel_time_to(uav: &Uav, y: f64, zp: f64, metric: Metric) -> f64 {
    displacement_time(uav, y - uav.x, zp - uav.z, metric)
}

fn displacement_time(uav: &Uav, dx: f64, dz: f64, metric: Metric) -> f64 {
    let dist = match metric {
        Metric::Euclidean => (dx * dx + dz * dz + uav.h * uav.h).sqrt(),
        Metric::Manhattan => dx.abs() + dz.abs() + uav.h,
    };
    uav.hours(dist)
}

/// Largest displacement along one free axis that fits in `budget` hours once
/// the altitude and a fixed orthogonal `offset` are paid for. `None` when the
/// agent cannot even reach its altitude.
pub fn horizontal_reach(metric: Metric, uav: &Uav, budget: f64, offset: f64) -> Option<f64> {
    if !(budget >= 0.0) {
        return None;
    }
    let total = uav.v * budget;
    match metric {
        Metric::Euclidean => {
            let radicand = total * total - uav.h * uav.h - offset * offset;
            if radicand >= 0.0 {
                Some(radicand.sqrt())
            } else if radicand >= -RADICAND_REL_TOL * total * total {
                Some(0.0)
            } else {
                None
            }
        }
        Metric::Manhattan => {
            let rest = total - uav.h - offset.abs();
            if rest >= 0.0 {
                Some(rest)
            } else if rest >= -RADICAND_REL_TOL * total {
                Some(0.0)
            } else {
                None
            }
        }
    }
}

/// Shape of the target area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// Thin strip `[0, β]` of width `d` on the axis; footprints are chords.
    #[default]
    Strip,
    /// Rectangle `[0, β] × [0, d]` tiled by square cells; footprints are the
    /// squares inscribed in each disk.
    Grid,
}

/// Target geometry plus the fleet, ordered by initial abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    beta: f64,
    d: f64,
    target: Target,
    metric: Metric,
    radio: Option<RadioLink>,
    uavs: Vec<Uav>,
    halfwidths: Vec<f64>,
}

impl Instance {
    /// Validates the fleet and sorts it by `(x, footprint, id)`. Validation
    /// paths refer to the input order.
    ///
    /// Agents sharing an abscissa may be ordered either way without breaking
    /// order preservation. Left of the target's midpoint the narrow footprint
    /// goes first, right of it the wide one, so that the wider agent of a tie
    /// is the one that can travel further into the target.
    pub fn new(beta: f64, d: f64, uavs: Vec<Uav>, metric: Metric) -> Result<Self> {
        Self::with_target(beta, d, uavs, metric, Target::Strip)
    }

    /// A rectangular target for the planar solvers. Strip-only checks (radius
    /// against the width, total footprint length) do not apply.
    pub fn grid(beta: f64, d: f64, uavs: Vec<Uav>, metric: Metric) -> Result<Self> {
        Self::with_target(beta, d, uavs, metric, Target::Grid)
    }

    pub fn with_target(beta: f64, d: f64, uavs: Vec<Uav>, metric: Metric, target: Target) -> Result<Self> {
        let mut inst = Self::unsorted(beta, d, uavs, metric, target)?;
        let mut order: Vec<usize> = (0..inst.uavs.len()).collect();
        let mid = 0.5 * beta;
        order.sort_by(|&a, &b| {
            let (ua, ub) = (&inst.uavs[a], &inst.uavs[b]);
            let by_width = inst.halfwidths[a].total_cmp(&inst.halfwidths[b]);
            ua.x.total_cmp(&ub.x)
                .then(if ua.x > mid { by_width.reverse() } else { by_width })
                .then(ua.id.cmp(&ub.id))
        });
        inst.apply_order(&order);
        Ok(inst)
    }

    fn unsorted(beta: f64, d: f64, uavs: Vec<Uav>, metric: Metric, target: Target) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(DeployError::invalid("beta", "must be finite and positive"));
        }
        if !(d.is_finite() && d >= 0.0) {
            return Err(DeployError::invalid("d", "must be finite and non-negative"));
        }
        if target == Target::Grid && d == 0.0 {
            return Err(DeployError::invalid("d", "a grid target needs a positive width"));
        }
        if uavs.is_empty() {
            return Err(DeployError::invalid("uavs", "fleet is empty"));
        }
        let mut seen = HashSet::new();
        let mut halfwidths = Vec::with_capacity(uavs.len());
        for (k, u) in uavs.iter().enumerate() {
            let at = |field: &str| format!("uavs[{k}].{field}");
            if !seen.insert(u.id) {
                return Err(DeployError::invalid(at("id"), format!("duplicate id {}", u.id)));
            }
            if !u.x.is_finite() {
                return Err(DeployError::invalid(at("x"), "must be finite"));
            }
            if !u.z.is_finite() {
                return Err(DeployError::invalid(at("z"), "must be finite"));
            }
            if !(u.v.is_finite() && u.v > 0.0) {
                return Err(DeployError::invalid(at("v"), "speed must be positive"));
            }
            if !(u.h.is_finite() && u.h >= 0.0) {
                return Err(DeployError::invalid(at("h"), "altitude must be non-negative"));
            }
            if !(u.r.is_finite() && u.r > 0.0) {
                return Err(DeployError::invalid(at("r"), "radius must be positive"));
            }
            if target == Target::Grid {
                halfwidths.push(u.r / std::f64::consts::SQRT_2);
                continue;
            }
            if u.r < d / 2.0 {
                return Err(DeployError::invalid(
                    at("r"),
                    format!("radius {} is below half the target width {}", u.r, d / 2.0),
                ));
            }
            halfwidths.push(footprint_halfwidth(u, d).expect("checked above"));
        }
        let span: f64 = 2.0 * halfwidths.iter().sum::<f64>();
        if target == Target::Strip && span < beta - GEOM_REL_TOL * beta.max(1.0) {
            return Err(DeployError::invalid(
                "uavs",
                format!("total footprint length {span} cannot cover beta = {beta}"),
            ));
        }
        Ok(Instance {
            beta,
            d,
            target,
            metric,
            radio: None,
            uavs,
            halfwidths,
        })
    }

    fn apply_order(&mut self, order: &[usize]) {
        self.uavs = order.iter().map(|&k| self.uavs[k]).collect();
        self.halfwidths = order.iter().map(|&k| self.halfwidths[k]).collect();
    }

    pub fn with_radio(mut self, radio: RadioLink) -> Self {
        self.radio = Some(radio);
        self
    }

    /// The same instance with the fleet in the given sequence. Order-constrained
    /// solvers treat the sequence as the left-to-right order to preserve.
    pub fn reordered(&self, order: &[usize]) -> Instance {
        assert_eq!(order.len(), self.uavs.len(), "order must be a permutation");
        let mut inst = self.clone();
        inst.apply_order(order);
        inst
    }

    /// Mirror image about `beta / 2`; used to reduce right-hand origins to left-hand ones.
    pub fn mirrored(&self) -> Instance {
        let mut inst = self.clone();
        for u in &mut inst.uavs {
            u.x = self.beta - u.x;
        }
        inst.uavs.reverse();
        inst.halfwidths.reverse();
        inst
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn target(&self) -> Target {
        self.target
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn radio(&self) -> Option<&RadioLink> {
        self.radio.as_ref()
    }

    pub fn uavs(&self) -> &[Uav] {
        &self.uavs
    }

    pub fn len(&self) -> usize {
        self.uavs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uavs.is_empty()
    }

    /// Footprint half-length of the agent at fleet position `k` along the axis.
    #[inline]
    pub fn halfwidth(&self, k: usize) -> f64 {
        self.halfwidths[k]
    }

    /// Geometric tolerance for seams and point containment.
    #[inline]
    pub fn eps(&self) -> f64 {
        GEOM_REL_TOL * self.beta.max(1.0)
    }

    /// Tolerance the solvers use when a frontier meets a reach limit. Much
    /// tighter than [`Instance::eps`] so that solver slack never shows up in
    /// objective comparisons.
    #[inline]
    pub fn seam_tol(&self) -> f64 {
        SEAM_REL_TOL * self.beta.max(1.0)
    }

    /// Travel time of the agent at fleet position `k` to abscissa `y`.
    #[inline]
    pub fn delay(&self, k: usize, y: f64) -> f64 {
        travel_time(&self.uavs[k], y, self.metric, true)
    }

    /// Horizontal reach of the agent at fleet position `k` within `budget` hours.
    #[inline]
    pub fn reach(&self, k: usize, budget: f64) -> Option<f64> {
        let u = &self.uavs[k];
        horizontal_reach(self.metric, u, budget, u.z)
    }

    pub fn position_of(&self, id: usize) -> Option<usize> {
        self.uavs.iter().position(|u| u.id == id)
    }

    /// Whether every agent starts at the same point (within tolerance).
    pub fn shared_origin(&self) -> Option<f64> {
        let x0 = self.uavs[0].x;
        let eps = self.eps();
        self.uavs
            .iter()
            .all(|u| (u.x - x0).abs() <= eps)
            .then_some(x0)
    }
}

/// Final position of one dispatched agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub id: usize,
    pub y: f64,
    #[serde(default, rename = "z", skip_serializing_if = "Option::is_none")]
    pub zp: Option<f64>,
}

/// A deployment: dispatched agents with their delays. Agents that are not
/// listed stay grounded at their origin with zero delay.
#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub placements: Vec<Placement>,
    pub per_delay: BTreeMap<usize, f64>,
    pub max_delay: f64,
    pub total_delay: f64,
}

impl Deployment {
    /// Builds a deployment from `(fleet position, y)` pairs.
    pub fn from_positions(instance: &Instance, positions: &[(usize, f64)]) -> Self {
        let placements = positions
            .iter()
            .map(|&(k, y)| Placement {
                id: instance.uavs()[k].id,
                y,
                zp: None,
            })
            .collect();
        let delays = positions.iter().map(|&(k, y)| instance.delay(k, y));
        Self::assemble(placements, delays)
    }

    /// Builds a deployment from `(fleet position, y, z')` triples.
    pub fn from_planar_positions(instance: &Instance, positions: &[(usize, f64, f64)]) -> Self {
        let placements = positions
            .iter()
            .map(|&(k, y, zp)| Placement {
                id: instance.uavs()[k].id,
                y,
                zp: Some(zp),
            })
            .collect();
        let delays = positions
            .iter()
            .map(|&(k, y, zp)| travel_time_to(&instance.uavs()[k], y, zp, instance.metric()));
        Self::assemble(placements, delays)
    }

    fn assemble(placements: Vec<Placement>, delays: impl Iterator<Item = f64>) -> Self {
        let per_delay: BTreeMap<usize, f64> =
            placements.iter().map(|p| p.id).zip(delays).collect();
        let max_delay = per_delay.values().copied().fold(0.0, f64::max);
        let total_delay = per_delay.values().sum();
        Deployment {
            placements,
            per_delay,
            max_delay,
            total_delay,
        }
    }

    pub fn used(&self) -> BTreeSet<usize> {
        self.placements.iter().map(|p| p.id).collect()
    }

    /// Recomputes every delay from the geometry. Returns the first id whose
    /// declared delay is off by more than `rel_tol`.
    pub fn delay_mismatch(&self, instance: &Instance, rel_tol: f64) -> Option<(usize, f64, f64)> {
        for p in &self.placements {
            let Some(k) = instance.position_of(p.id) else {
                return Some((p.id, f64::NAN, f64::NAN));
            };
            let u = &instance.uavs()[k];
            let expected = match p.zp {
                Some(zp) => travel_time_to(u, p.y, zp, instance.metric()),
                None => instance.delay(k, p.y),
            };
            let declared = self.per_delay.get(&p.id).copied().unwrap_or(f64::NAN);
            if !close(declared, expected, rel_tol) {
                return Some((p.id, declared, expected));
            }
        }
        let used = self.used();
        self.per_delay
            .iter()
            .find(|(id, &t)| !used.contains(id) && t != 0.0)
            .map(|(&id, &t)| (id, t, 0.0))
    }
}

fn close(a: f64, b: f64, rel_tol: f64) -> bool {
    (a - b).abs() <= rel_tol * a.abs().max(b.abs()) + f64::MIN_POSITIVE
}

/// First uncovered stretch of `[0, beta]`, or `None` when the footprints of
/// the placed agents cover the whole interval.
pub fn coverage_gap(instance: &Instance, deployment: &Deployment) -> Option<(f64, f64)> {
    let mut spans: Vec<(f64, f64)> = deployment
        .placements
        .iter()
        .filter_map(|p| {
            let k = instance.position_of(p.id)?;
            let w = instance.halfwidth(k);
            Some((p.y - w, p.y + w))
        })
        .collect();
    uncovered(&mut spans, 0.0, instance.beta(), instance.eps())
}

/// Sweeps sorted spans for the first gap inside `[lo, hi]`.
pub(crate) fn uncovered(spans: &mut [(f64, f64)], lo: f64, hi: f64, eps: f64) -> Option<(f64, f64)> {
    spans.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach = lo;
    for &(left, right) in spans.iter() {
        if reach >= hi - eps {
            return None;
        }
        if left > reach + eps {
            return Some((reach, left.min(hi)));
        }
        reach = reach.max(right);
    }
    (reach < hi - eps).then_some((reach, hi))
}

/// Whether the deployment covers `[0, beta]` up to the geometric tolerance.
pub fn verify_coverage(instance: &Instance, deployment: &Deployment) -> bool {
    coverage_gap(instance, deployment).is_none()
}

/// Search bounds shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    /// Smallest single-agent delay: no deployment finishes sooner.
    pub t_l: f64,
    /// Time for the slowest agent to reach the far end of the target.
    pub t_u: f64,
    /// Sum of every agent's far-end delay; bounds any total delay.
    pub gamma_u: f64,
    /// `h_max / h_min`.
    pub kappa: f64,
    /// `v_max / v_min`.
    pub tau: f64,
}

pub fn bounds(instance: &Instance) -> BoundReport {
    let beta = instance.beta();
    let mut t_l = f64::INFINITY;
    let mut t_u: f64 = 0.0;
    let mut gamma_u = 0.0;
    for (k, u) in instance.uavs().iter().enumerate() {
        t_l = t_l.min(instance.delay(k, u.x));
        let far = instance.delay(k, beta).max(instance.delay(k, 0.0));
        t_u = t_u.max(far);
        gamma_u += far;
    }
    let ratio = |f: fn(&Uav) -> f64| {
        let (lo, hi) = instance
            .uavs()
            .iter()
            .map(f)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), a| (lo.min(a), hi.max(a)));
        if hi == lo {
            1.0
        } else if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    };
    BoundReport {
        t_l,
        t_u,
        gamma_u,
        kappa: ratio(|u| u.h),
        tau: ratio(|u| u.v),
    }
}
