//! Min-max deployment: exact common-origin solver, order-preserving
//! feasibility sweep and the grid-bisection approximation scheme.

use serde::Serialize;

use crate::error::{DeployError, Result};
use crate::model::{bounds, Deployment, Instance};

/// Agent count above which an interior shared origin is rejected.
pub const MAX_INTERIOR_ORIGIN_FLEET: usize = 12;

/// Substitute lower bound factor applied when every agent may start at zero altitude.
pub const DEGENERATE_LOWER_FACTOR: f64 = 1e-6;

/// What an agent can reach within a deadline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reach {
    /// The deadline is shorter than the climb to operating altitude.
    Grounded,
    /// Leftmost and rightmost ground points the footprint can cover.
    Window { a: f64, b: f64 },
}

/// One agent dispatched by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slot {
    /// Position in the swept sequence's fleet.
    pub index: usize,
    pub id: usize,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityOutcome {
    pub deadline: f64,
    pub feasible: bool,
    /// Right end of the longest covered prefix `[0, covered]`.
    pub covered: f64,
    /// Dispatched agents, left to right. Only meaningful when feasible.
    pub placements: Vec<Slot>,
    /// Per-agent reach, indexed like the swept sequence.
    pub reach: Vec<Reach>,
}

impl FeasibilityOutcome {
    pub fn deployment(&self, instance: &Instance) -> Deployment {
        let pos: Vec<(usize, f64)> = self.placements.iter().map(|s| (s.index, s.y)).collect();
        Deployment::from_positions(instance, &pos)
    }
}

/// Agent description for the generic sweep: the covering axis is abstract so
/// the same code serves the line and the columns of the planar grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Mover {
    pub index: usize,
    pub center: f64,
    pub half: f64,
    pub reach: Option<f64>,
}

/// Frontier after `mover` extends a covered prefix ending at `frontier`, with
/// the centre it takes. `None` when it cannot touch the frontier or would not
/// push it forward.
#[inline]
pub(crate) fn extend(frontier: f64, mover: &Mover, tol: f64) -> Option<(f64, f64)> {
    let s = mover.reach?;
    let lo = mover.center - s;
    let hi = mover.center + s;
    if frontier + mover.half < lo - tol {
        return None;
    }
    let y = (frontier + mover.half).min(hi).max(lo);
    let next = y + mover.half;
    (next > frontier).then_some((next, y))
}

/// Left-to-right greedy cover of `[lo, hi]`: each mover that touches the
/// frontier is pushed as far right as its reach allows; earlier movers centred
/// to its right are retracted (their footprints are nested in the new one).
pub(crate) fn sweep_cover(
    movers: impl IntoIterator<Item = Mover>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> (f64, Vec<(usize, f64)>) {
    let mut frontier = lo;
    let mut stack: Vec<(usize, f64)> = Vec::new();
    for m in movers {
        if frontier >= hi - tol {
            break;
        }
        let Some((next, y)) = extend(frontier, &m, tol) else {
            continue;
        };
        while stack.last().is_some_and(|&(_, prev)| prev > y) {
            stack.pop();
        }
        stack.push((m.index, y));
        frontier = next;
    }
    (frontier, stack)
}

fn movers<'a>(
    instance: &'a Instance,
    order: &'a [usize],
    deadline: f64,
) -> impl Iterator<Item = Mover> + 'a {
    order.iter().map(move |&k| Mover {
        index: k,
        center: instance.uavs()[k].x,
        half: instance.halfwidth(k),
        reach: instance.reach(k, deadline),
    })
}

/// Order-preserving feasibility of a deadline, sweeping the fleet in its
/// stored order. A negative or NaN deadline grounds every agent.
pub fn check_feasibility(instance: &Instance, deadline: f64) -> FeasibilityOutcome {
    let order: Vec<usize> = (0..instance.len()).collect();
    check_feasibility_in_order(instance, &order, deadline)
}

/// As [`check_feasibility`] but sweeping the agents in `order` (fleet positions).
pub fn check_feasibility_in_order(
    instance: &Instance,
    order: &[usize],
    deadline: f64,
) -> FeasibilityOutcome {
    let tol = instance.seam_tol();
    let (covered, stack) = sweep_cover(movers(instance, order, deadline), 0.0, instance.beta(), tol);
    let feasible = covered >= instance.beta() - tol;
    let reach = order
        .iter()
        .map(|&k| match instance.reach(k, deadline) {
            None => Reach::Grounded,
            Some(s) => {
                let (x, w) = (instance.uavs()[k].x, instance.halfwidth(k));
                Reach::Window {
                    a: x - w - s,
                    b: x + w + s,
                }
            }
        })
        .collect();
    let placements = stack
        .into_iter()
        .map(|(k, y)| Slot {
            index: k,
            id: instance.uavs()[k].id,
            y,
        })
        .collect();
    FeasibilityOutcome {
        deadline,
        feasible,
        covered,
        placements,
        reach,
    }
}

/// Longest prefix covered by the sweep in `order`, without building an outcome.
pub(crate) fn prefix_in_order(instance: &Instance, order: &[usize], deadline: f64) -> f64 {
    let tol = instance.seam_tol();
    let mut frontier = 0.0;
    for m in movers(instance, order, deadline) {
        if frontier >= instance.beta() - tol {
            break;
        }
        if let Some((next, _)) = extend(frontier, &m, tol) {
            frontier = next;
        }
    }
    frontier
}

/// Longest prefix coverable within `deadline` when agents may be reordered
/// freely, with an order attaining it. Subset dynamic programme: the best
/// frontier of a set is reached by appending some member last.
pub fn best_prefix_any_order(instance: &Instance, deadline: f64) -> (f64, Vec<usize>) {
    let n = instance.len();
    assert!(n < 26, "subset search is limited to small fleets");
    let tol = instance.seam_tol();
    let ms: Vec<Mover> = movers(instance, &(0..n).collect::<Vec<_>>(), deadline).collect();
    let full = 1usize << n;
    let mut best = vec![0.0f64; full];
    let mut last = vec![usize::MAX; full];
    for set in 1..full {
        let mut top = f64::NEG_INFINITY;
        let mut arg = usize::MAX;
        for (k, m) in ms.iter().enumerate() {
            if set & (1 << k) == 0 {
                continue;
            }
            let base = best[set ^ (1 << k)];
            let f = extend(base, m, tol).map_or(base, |(next, _)| next);
            if f > top {
                top = f;
                arg = k;
            }
        }
        best[set] = top;
        last[set] = arg;
    }
    let mut order = Vec::with_capacity(n);
    let mut set = full - 1;
    while set != 0 {
        let k = last[set];
        order.push(k);
        set ^= 1 << k;
    }
    order.reverse();
    (best[full - 1], order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinMaxMethod {
    CommonOriginExact,
    Fptas,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxSolution {
    pub deployment: Deployment,
    /// Largest delay of the returned deployment.
    pub objective: f64,
    /// Grid deadline certified feasible (bisection methods only).
    pub deadline: Option<f64>,
    pub grid_unit: Option<f64>,
    pub grid_index: Option<u64>,
    /// Feasibility probes spent.
    pub probes: usize,
    pub method: MinMaxMethod,
    pub epsilon: Option<f64>,
}

impl MinMaxSolution {
    fn exact(deployment: Deployment, probes: usize) -> Self {
        MinMaxSolution {
            objective: deployment.max_delay,
            deployment,
            deadline: None,
            grid_unit: None,
            grid_index: None,
            probes,
            method: MinMaxMethod::CommonOriginExact,
            epsilon: None,
        }
    }
}

/// Smallest feasible grid index in `0..=kmax`, given a monotone predicate that
/// holds at `kmax`. Returns the index and the number of probes.
pub(crate) fn grid_bisect(kmax: u64, mut feasible: impl FnMut(u64) -> bool) -> (u64, usize) {
    if feasible(0) {
        return (0, 1);
    }
    let mut probes = 1;
    let (mut lo, mut hi) = (0u64, kmax);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        probes += 1;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (hi, probes)
}

/// Grid unit and top index for a relative error `epsilon` between the bounds.
pub(crate) fn grid(t_l: f64, t_u: f64, epsilon: f64) -> Result<(f64, u64)> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(DeployError::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(t_u.is_finite() && t_u > 0.0) {
        return Err(DeployError::DegenerateBound(format!("upper bound {t_u}")));
    }
    let lower = t_l.max(epsilon * t_u * DEGENERATE_LOWER_FACTOR);
    let unit = epsilon * lower;
    let kmax = (t_u / unit).ceil();
    if kmax > (1u64 << 62) as f64 {
        return Err(DeployError::DegenerateBound(format!(
            "grid of {kmax} steps is too fine"
        )));
    }
    Ok((unit, kmax as u64))
}

/// `(1 + ε)`-approximation of the order-preserving min-max problem: bisection
/// over the deadline grid `k·ε·T_l` with the feasibility sweep as oracle.
/// When `T_l` vanishes (zero altitudes) the unit falls back to `ε²·T_u·1e-6`.
pub fn fptas_minmax(instance: &Instance, epsilon: f64) -> Result<MinMaxSolution> {
    let b = bounds(instance);
    let (unit, kmax) = grid(b.t_l, b.t_u, epsilon)?;
    let top = check_feasibility(instance, kmax as f64 * unit);
    if !top.feasible {
        return Err(DeployError::Infeasible(format!(
            "no order-preserving cover within the upper bound {:.6} h (covered {:.6} of {})",
            b.t_u,
            top.covered,
            instance.beta()
        )));
    }
    let (k, probes) = grid_bisect(kmax, |k| check_feasibility(instance, k as f64 * unit).feasible);
    let deadline = k as f64 * unit;
    let deployment = check_feasibility(instance, deadline).deployment(instance);
    Ok(MinMaxSolution {
        objective: deployment.max_delay,
        deployment,
        deadline: Some(deadline),
        grid_unit: Some(unit),
        grid_index: Some(k),
        probes: probes + 2,
        method: MinMaxMethod::Fptas,
        epsilon: Some(epsilon),
    })
}

/// Exact min-max deployment when every agent starts from the same abscissa.
///
/// Outside the target the far end is covered first by the agent that reaches
/// it soonest, repeatedly. An origin strictly inside the target is solved by
/// bisection over the free-order subset search, for at most
/// [`MAX_INTERIOR_ORIGIN_FLEET`] agents.
pub fn solve_common_origin_minmax(instance: &Instance) -> Result<MinMaxSolution> {
    let Some(x0) = instance.shared_origin() else {
        return Err(DeployError::Precondition(
            "agents do not share an initial abscissa".into(),
        ));
    };
    let tol = instance.seam_tol();
    if x0 <= tol {
        let pos = far_end_greedy(instance)?;
        return Ok(MinMaxSolution::exact(Deployment::from_positions(instance, &pos), 0));
    }
    if x0 >= instance.beta() - tol {
        let mirror = instance.mirrored();
        let n = instance.len();
        let pos: Vec<(usize, f64)> = far_end_greedy(&mirror)?
            .into_iter()
            .map(|(k, y)| (n - 1 - k, instance.beta() - y))
            .collect();
        return Ok(MinMaxSolution::exact(Deployment::from_positions(instance, &pos), 0));
    }
    if instance.len() > MAX_INTERIOR_ORIGIN_FLEET {
        return Err(DeployError::Unsupported(format!(
            "shared origin {x0} inside the target needs at most {MAX_INTERIOR_ORIGIN_FLEET} agents, got {}",
            instance.len()
        )));
    }
    let (deployment, probes) = bisect_any_order(instance, 1e-13)?;
    Ok(MinMaxSolution::exact(deployment, probes))
}

/// Far-end greedy for an origin at or left of 0. Returns `(fleet position, y)`.
fn far_end_greedy(instance: &Instance) -> Result<Vec<(usize, f64)>> {
    let tol = instance.seam_tol();
    let n = instance.len();
    let mut used = vec![false; n];
    let mut frontier = instance.beta();
    let mut pos = Vec::new();
    while frontier > tol {
        let target = |k: usize| (frontier - instance.halfwidth(k)).max(instance.uavs()[k].x);
        let pick = (0..n)
            .filter(|&k| !used[k])
            .map(|k| (k, instance.delay(k, target(k))))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let Some((k, _)) = pick else {
            return Err(DeployError::Infeasible(format!(
                "fleet exhausted with [0, {frontier}] uncovered"
            )));
        };
        let y = target(k);
        used[k] = true;
        pos.push((k, y));
        frontier = y - instance.halfwidth(k);
    }
    Ok(pos)
}

/// Bisection on the deadline against the free-order subset search, to relative
/// precision `rel`. Returns the deployment at the final feasible deadline.
pub(crate) fn bisect_any_order(instance: &Instance, rel: f64) -> Result<(Deployment, usize)> {
    let b = bounds(instance);
    let tol = instance.seam_tol();
    let ok = |t: f64| best_prefix_any_order(instance, t).0 >= instance.beta() - tol;
    let mut hi = b.t_u * (1.0 + 1e-9);
    if !ok(hi) {
        return Err(DeployError::Infeasible("no cover within the upper bound".into()));
    }
    let mut lo = 0.0;
    let mut probes = 1;
    if ok(lo) {
        hi = 0.0;
    }
    while hi - lo > rel * hi {
        let mid = 0.5 * (lo + hi);
        probes += 1;
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (_, order) = best_prefix_any_order(instance, hi);
    let out = check_feasibility_in_order(instance, &order, hi);
    debug_assert!(out.feasible);
    Ok((out.deployment(instance), probes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{verify_coverage, Metric, Uav};

    fn inst(beta: f64, uavs: Vec<Uav>) -> Instance {
        Instance::new(beta, 0.0, uavs, Metric::Euclidean).unwrap()
    }

    #[test]
    fn common_origin_two_speeds() {
        let i = inst(4.0, vec![Uav::new(0, 0.0, 1.0, 0.0, 1.0), Uav::new(1, 0.0, 1.0, 0.0, 3.0)]);
        let s = solve_common_origin_minmax(&i).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        let y: Vec<(usize, f64)> = s.deployment.placements.iter().map(|p| (p.id, p.y)).collect();
        assert_eq!(y, vec![(1, 3.0), (0, 1.0)]);
        assert!(verify_coverage(&i, &s.deployment));
    }

    #[test]
    fn common_origin_single_agent() {
        let i = inst(2.0, vec![Uav::new(0, 0.0, 1.0, 0.0, 1.0)]);
        let s = solve_common_origin_minmax(&i).unwrap();
        assert_eq!(s.objective, 1.0);
        assert_eq!(s.deployment.placements[0].y, 1.0);
    }

    #[test]
    fn common_origin_altitude_mix_prefers_single_wide_agent() {
        // The zero-altitude agent alone spans the target from y = 2.
        let i = inst(4.0, vec![Uav::new(0, 0.0, 2.0, 3.0, 1.0), Uav::new(1, 0.0, 2.0, 0.0, 1.0)]);
        let s = solve_common_origin_minmax(&i).unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
        assert_eq!(s.deployment.placements.len(), 1);
        assert_eq!(s.deployment.placements[0].id, 1);
    }

    #[test]
    fn common_origin_mirrored_and_interior() {
        let right = inst(4.0, vec![Uav::new(0, 4.0, 1.0, 0.0, 1.0), Uav::new(1, 4.0, 1.0, 0.0, 3.0)]);
        let s = solve_common_origin_minmax(&right).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!(verify_coverage(&right, &s.deployment));

        let mid = inst(4.0, vec![Uav::new(0, 2.0, 1.0, 0.0, 1.0), Uav::new(1, 2.0, 1.0, 0.0, 1.0)]);
        let s = solve_common_origin_minmax(&mid).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
        assert!(verify_coverage(&mid, &s.deployment));
    }

    #[test]
    fn common_origin_rejects_spread_fleet() {
        let i = inst(4.0, vec![Uav::new(0, 0.0, 1.0, 0.0, 1.0), Uav::new(1, 1.0, 1.0, 0.0, 3.0)]);
        assert!(matches!(solve_common_origin_minmax(&i), Err(DeployError::Precondition(_))));
    }

    #[test]
    fn feasibility_examples() {
        let centred = inst(2.0, vec![Uav::new(0, 1.0, 1.0, 0.0, 1.0)]);
        let out = check_feasibility(&centred, 1.0);
        assert!(out.feasible);
        assert_eq!(out.placements[0].y, 1.0);

        let high = inst(2.0, vec![Uav::new(0, 1.0, 1.0, 5.0, 1.0)]);
        let out = check_feasibility(&high, 1.0);
        assert!(!out.feasible);
        assert_eq!(out.reach, vec![Reach::Grounded]);

        let pair = inst(4.0, vec![Uav::new(0, 0.0, 1.0, 0.0, 1.0), Uav::new(1, 1.0, 1.0, 0.0, 1.0)]);
        let out = check_feasibility(&pair, 2.0);
        assert!(out.feasible);
        let y: Vec<f64> = out.placements.iter().map(|s| s.y).collect();
        assert_eq!(y, vec![1.0, 3.0]);
        assert!(!check_feasibility(&pair, 2.0 - 1e-9).feasible);
    }

    #[test]
    fn retraction_drops_nested_footprint() {
        // The slow wide agent lands left of the first one and swallows it.
        let i = inst(
            3.2,
            vec![Uav::new(0, 0.0, 0.5, 0.0, 1.0), Uav::new(1, 0.1, 3.0, 0.0, 0.1)],
        );
        let out = check_feasibility(&i, 2.0);
        assert!(out.feasible);
        assert_eq!(out.placements.len(), 1);
        assert_eq!(out.placements[0].id, 1);
        assert!(verify_coverage(&i, &out.deployment(&i)));
    }

    #[test]
    fn fptas_single_agent_climb() {
        let i = inst(2.0, vec![Uav::new(0, 1.0, 1.0, 3.0, 1.0)]);
        for eps in [0.5, 0.1, 1e-3] {
            let s = fptas_minmax(&i, eps).unwrap();
            let t = s.deadline.unwrap();
            assert!((3.0..=3.0 * (1.0 + eps)).contains(&t));
            assert!((s.objective - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fptas_pair_and_sandwich() {
        let i = inst(4.0, vec![Uav::new(0, 0.0, 1.0, 0.0, 1.0), Uav::new(1, 1.0, 1.0, 0.0, 1.0)]);
        let s = fptas_minmax(&i, 1e-4).unwrap();
        let t = s.deadline.unwrap();
        assert!(t >= 2.0 * (1.0 - 1e-9) && t <= 2.0 * (1.0 + 1e-4), "{t}");
        let unit = s.grid_unit.unwrap();
        assert!(!check_feasibility(&i, t - unit).feasible);
        assert!(verify_coverage(&i, &s.deployment));
    }

    #[test]
    fn fptas_rejects_bad_epsilon() {
        let i = inst(2.0, vec![Uav::new(0, 1.0, 1.0, 3.0, 1.0)]);
        assert!(matches!(fptas_minmax(&i, 0.0), Err(DeployError::InvalidArgument(_))));
        assert!(matches!(fptas_minmax(&i, f64::NAN), Err(DeployError::InvalidArgument(_))));
    }

    #[test]
    fn free_order_beats_fixed_order() {
        // Stored order forces the slow agent to the left end.
        let i = inst(
            4.0,
            vec![Uav::new(0, 3.0, 1.0, 0.0, 0.1), Uav::new(1, 3.5, 1.0, 0.0, 10.0)],
        );
        assert!(!check_feasibility(&i, 1.0).feasible);
        let (covered, order) = best_prefix_any_order(&i, 1.0);
        assert!(covered >= 4.0 - 1e-12);
        assert!(check_feasibility_in_order(&i, &order, 1.0).feasible);
    }

    #[test]
    fn grid_bisect_finds_threshold() {
        for threshold in [0u64, 1, 7, 99, 100] {
            let (k, _) = grid_bisect(100, |k| k >= threshold);
            assert_eq!(k, threshold);
        }
    }
}
