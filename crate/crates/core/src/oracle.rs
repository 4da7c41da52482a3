//! Exhaustive reference solvers for small fleets. They trade speed for
//! independence from the production solvers' shortcuts.

use itertools::Itertools;

use crate::error::{DeployError, Result};
use crate::minmax::{best_prefix_any_order, check_feasibility_in_order, prefix_in_order};
use crate::minsum::dp_minsum_with_steps;
use crate::model::{bounds, horizontal_reach, Deployment, Instance, Metric};
use crate::planar::{min_radius, planar_upper_bound, GridPlan};

/// Relative precision of every oracle bisection.
pub const ORACLE_REL_PRECISION: f64 = 1e-12;

/// Largest fleet the subset searches accept.
pub const MAX_SUBSET_FLEET: usize = 20;

fn too_large(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(DeployError::TooLarge { n, max });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMinMax {
    pub objective: f64,
    /// Bisection deadline the deployment was built at.
    pub deadline: f64,
    pub order: Vec<usize>,
    pub deployment: Deployment,
}

/// Exact min-max optimum over every final left-to-right order: each
/// permutation is bisected to `ORACLE_REL_PRECISION`, and permutations that
/// cannot beat the incumbent are discarded with a single probe.
pub fn brute_force_minmax(instance: &Instance, max_n: usize) -> Result<OracleMinMax> {
    let n = instance.len();
    too_large(n, max_n)?;
    let goal = instance.beta() - instance.seam_tol();
    let mut best = bounds(instance).t_u * (1.0 + 1e-9);
    let mut best_order: Option<Vec<usize>> = None;
    for perm in (0..n).permutations(n) {
        let ok = |t: f64| prefix_in_order(instance, &perm, t) >= goal;
        let probe = if best_order.is_some() {
            best * (1.0 - 1e-10)
        } else {
            best
        };
        if !ok(probe) {
            continue;
        }
        let (mut lo, mut hi) = (0.0, probe);
        if ok(0.0) {
            hi = 0.0;
        }
        while hi - lo > ORACLE_REL_PRECISION * hi {
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        best = hi;
        best_order = Some(perm);
    }
    let Some(order) = best_order else {
        return Err(DeployError::Infeasible("no order covers the target".into()));
    };
    let deployment = check_feasibility_in_order(instance, &order, best).deployment(instance);
    Ok(OracleMinMax {
        objective: deployment.max_delay,
        deadline: best,
        order,
        deployment,
    })
}

/// Whether some final order covers the target within `deadline`.
pub fn feasible_any_order(instance: &Instance, deadline: f64) -> Result<bool> {
    too_large(instance.len(), MAX_SUBSET_FLEET)?;
    Ok(best_prefix_any_order(instance, deadline).0 >= instance.beta() - instance.seam_tol())
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMinSum {
    pub objective: f64,
    /// `n·δ` at the finest grid used: the continuous optimum lies within
    /// `[objective - slack, objective]`.
    pub slack: f64,
    /// Whether the last doubling moved the objective by less than `1e-6` relative.
    pub converged: bool,
    pub order: Vec<usize>,
    pub deployment: Deployment,
}

/// Min-sum over every order, refining the DP grid of each permutation from
/// 32 steps, doubled `refine_levels` times.
pub fn brute_force_minsum(instance: &Instance, max_n: usize, refine_levels: usize) -> Result<OracleMinSum> {
    let n = instance.len();
    too_large(n, max_n)?;
    let mut best: Option<OracleMinSum> = None;
    for perm in (0..n).permutations(n) {
        let inst = instance.reordered(&perm);
        let mut steps = 32;
        let mut sol = dp_minsum_with_steps(&inst, steps)?;
        // Coarse grids can plateau, so every level is run.
        let mut converged = false;
        for _ in 0..refine_levels {
            steps *= 2;
            let finer = dp_minsum_with_steps(&inst, steps)?;
            let moved = (finer.objective - sol.objective).abs();
            converged = moved <= 1e-6 * finer.objective.max(1e-9);
            sol = finer;
        }
        if best.as_ref().is_none_or(|b| sol.objective < b.objective) {
            let slack = n as f64 * sol.grid_unit.unwrap_or(0.0);
            // Rebuild on the original fleet so ids and positions line up.
            let pos: Vec<(usize, f64)> = sol
                .deployment
                .placements
                .iter()
                .map(|p| (instance.position_of(p.id).expect("same fleet"), p.y))
                .collect();
            let deployment = Deployment::from_positions(instance, &pos);
            best = Some(OracleMinSum {
                objective: deployment.total_delay,
                slack,
                converged,
                order: perm,
                deployment,
            });
        }
    }
    best.ok_or_else(|| DeployError::Infeasible("empty fleet".into()))
}

/// Optimal total delay when the fleet tiles the target exactly
/// (`2·Σw = β`): every agent is used and its position is fixed by the set of
/// agents left of it, so a subset programme over orders is exact.
pub fn tight_tiling_minsum(instance: &Instance) -> Result<(f64, Vec<usize>)> {
    let n = instance.len();
    too_large(n, MAX_SUBSET_FLEET)?;
    let span: f64 = (0..n).map(|k| 2.0 * instance.halfwidth(k)).sum();
    if (span - instance.beta()).abs() > instance.eps() {
        return Err(DeployError::Precondition(format!(
            "footprints span {span}, not exactly beta = {}",
            instance.beta()
        )));
    }
    let full = 1usize << n;
    let mut width = vec![0.0f64; full];
    let mut cost = vec![f64::INFINITY; full];
    let mut last = vec![usize::MAX; full];
    cost[0] = 0.0;
    for set in 1..full {
        let low = set.trailing_zeros() as usize;
        width[set] = width[set ^ (1 << low)] + 2.0 * instance.halfwidth(low);
        for k in 0..n {
            if set & (1 << k) == 0 {
                continue;
            }
            let rest = set ^ (1 << k);
            let y = width[rest] + instance.halfwidth(k);
            let c = cost[rest] + instance.delay(k, y);
            if c < cost[set] {
                cost[set] = c;
                last[set] = k;
            }
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut set = full - 1;
    while set != 0 {
        order.push(last[set]);
        set ^= 1 << last[set];
    }
    order.reverse();
    Ok((cost[full - 1], order))
}

/// Smallest total grid budget (in steps of `grid_unit`, at most `steps`) for
/// which some order-preserving assignment of per-agent budgets covers the
/// target. Forward search over `(budget, frontier)` states with Pareto pruning.
pub fn grid_minsum_search(instance: &Instance, grid_unit: f64, steps: usize) -> Option<usize> {
    let tol = instance.seam_tol();
    let goal = instance.beta() - tol;
    // frontier[j]: best frontier reachable with total budget exactly j, -inf if none.
    let mut frontier = vec![f64::NEG_INFINITY; steps + 1];
    frontier[0] = 0.0;
    for (k, u) in instance.uavs().iter().enumerate() {
        let w = instance.halfwidth(k);
        let mut next = frontier.clone();
        for j in 0..=steps {
            let f = frontier[j];
            if f == f64::NEG_INFINITY {
                continue;
            }
            for t in 0..=(steps - j) {
                let Some(s) = instance.reach(k, t as f64 * grid_unit) else {
                    continue;
                };
                if f + w < u.x - s - tol {
                    continue;
                }
                let y = (f + w).min(u.x + s).max(u.x - s);
                let g = f.max(y + w);
                if g > next[j + t] {
                    next[j + t] = g;
                }
            }
        }
        // Keep only states not dominated by a cheaper one.
        let mut run = f64::NEG_INFINITY;
        for g in next.iter_mut() {
            if *g <= run {
                *g = f64::NEG_INFINITY;
            } else {
                run = *g;
            }
        }
        frontier = next;
    }
    (0..=steps).find(|&j| frontier[j] >= goal)
}

/// Plain enumeration of every per-agent budget vector in `0..=steps`
/// (`(steps + 1)^n` of them), each checked by the order-preserving sweep.
/// Only usable on tiny cases; cross-checks [`grid_minsum_search`].
pub fn enumerate_grid_budgets(instance: &Instance, grid_unit: f64, steps: usize) -> Option<usize> {
    let n = instance.len();
    let tol = instance.seam_tol();
    let goal = instance.beta() - tol;
    let mut best: Option<usize> = None;
    for budget in (0..n).map(|_| 0..=steps).multi_cartesian_product() {
        let total: usize = budget.iter().sum();
        if best.is_some_and(|b| total >= b) {
            continue;
        }
        let mut f = 0.0f64;
        for (k, &t) in budget.iter().enumerate() {
            let u = &instance.uavs()[k];
            let Some(s) = instance.reach(k, t as f64 * grid_unit) else {
                continue;
            };
            let w = instance.halfwidth(k);
            if f + w < u.x - s - tol {
                continue;
            }
            let y = (f + w).min(u.x + s).max(u.x - s);
            f = f.max(y + w);
        }
        if f >= goal {
            best = Some(total);
        }
    }
    best
}

/// Continuous optimum of the order-preserving min-sum problem (Euclidean,
/// positive effective altitude for every agent).
///
/// For each subset of agents kept in fleet order, every pattern of active
/// constraints is tried: start pinned to 0, end pinned to β, and each seam
/// either free, touching (`y' = y + w + w'`) or stacked (`y' = y`). Active
/// seams glue agents into rigid blocks whose single offset is found by
/// bisecting the derivative. The objective is strictly convex, so the optimum
/// is the equality-constrained minimiser of its own active pattern; the best
/// feasible candidate over all patterns is therefore optimal.
pub fn continuous_minsum_ordered(instance: &Instance) -> Result<(f64, Vec<(usize, f64)>)> {
    let n = instance.len();
    too_large(n, 8)?;
    if instance.metric() != Metric::Euclidean {
        return Err(DeployError::Unsupported("continuous oracle needs the Euclidean metric".into()));
    }
    if instance.uavs().iter().any(|u| u.h == 0.0 && u.z == 0.0) {
        return Err(DeployError::Unsupported("continuous oracle needs positive altitudes".into()));
    }
    let tol = instance.seam_tol() * 10.0;
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 1usize..(1 << n) {
        let sub: Vec<usize> = (0..n).filter(|&k| mask & (1 << k) != 0).collect();
        let span: f64 = sub.iter().map(|&k| 2.0 * instance.halfwidth(k)).sum();
        if span < instance.beta() - tol {
            continue;
        }
        let m = sub.len();
        let seams = 3usize.pow((m - 1) as u32);
        for ends in 0..4 {
            let (pin_start, pin_end) = (ends & 1 != 0, ends & 2 != 0);
            for code in 0..seams {
                if let Some(ys) = solve_pattern(instance, &sub, pin_start, pin_end, code) {
                    if !pattern_feasible(instance, &sub, &ys, tol) {
                        continue;
                    }
                    let cost: f64 = sub.iter().zip(&ys).map(|(&k, &y)| instance.delay(k, y)).sum();
                    if cost < best.0 {
                        best = (cost, sub.iter().copied().zip(ys).collect());
                    }
                }
            }
        }
    }
    if best.0.is_infinite() {
        return Err(DeployError::Infeasible("no subset covers the target".into()));
    }
    Ok(best)
}

fn solve_pattern(instance: &Instance, sub: &[usize], pin_start: bool, pin_end: bool, mut code: usize) -> Option<Vec<f64>> {
    let m = sub.len();
    let w = |l: usize| instance.halfwidth(sub[l]);
    // Offsets of each agent relative to its block's first agent.
    let mut offset = vec![0.0; m];
    let mut block_of = vec![0usize; m];
    let mut blocks = vec![0usize];
    for l in 1..m {
        let state = code % 3;
        code /= 3;
        match state {
            0 => {
                blocks.push(l);
                block_of[l] = blocks.len() - 1;
            }
            1 => {
                block_of[l] = block_of[l - 1];
                offset[l] = offset[l - 1] + w(l - 1) + w(l);
            }
            _ => {
                block_of[l] = block_of[l - 1];
                offset[l] = offset[l - 1];
            }
        }
    }
    let mut base = vec![f64::NAN; blocks.len()];
    if pin_start {
        base[0] = w(0);
    }
    if pin_end {
        let l = m - 1;
        let u = instance.beta() - w(l) - offset[l];
        let b = block_of[l];
        if !base[b].is_nan() && (base[b] - u).abs() > instance.seam_tol() * 10.0 {
            return None;
        }
        base[b] = u;
    }
    for (b, &first) in blocks.iter().enumerate() {
        if !base[b].is_nan() {
            continue;
        }
        let members: Vec<usize> = (first..m).take_while(|&l| block_of[l] == b).collect();
        base[b] = argmin_block(instance, sub, &members, &offset);
    }
    Some((0..m).map(|l| base[block_of[l]] + offset[l]).collect())
}

/// Minimiser of `Σ delay(k, u + offset)` over `u` by bisection on the derivative.
fn argmin_block(instance: &Instance, sub: &[usize], members: &[usize], offset: &[f64]) -> f64 {
    let shift = |l: usize| instance.uavs()[sub[l]].x - offset[l];
    let mut lo = members.iter().map(|&l| shift(l)).fold(f64::INFINITY, f64::min);
    let mut hi = members.iter().map(|&l| shift(l)).fold(f64::NEG_INFINITY, f64::max);
    let slope = |u: f64| -> f64 {
        members
            .iter()
            .map(|&l| {
                let v = &instance.uavs()[sub[l]];
                let dx = u + offset[l] - v.x;
                dx / (v.v * (dx * dx + v.z * v.z + v.h * v.h).sqrt())
            })
            .sum()
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn pattern_feasible(instance: &Instance, sub: &[usize], ys: &[f64], tol: f64) -> bool {
    let m = sub.len();
    let w = |l: usize| instance.halfwidth(sub[l]);
    if ys[0] - w(0) > tol || ys[m - 1] + w(m - 1) < instance.beta() - tol {
        return false;
    }
    (1..m).all(|l| ys[l] >= ys[l - 1] - tol && ys[l] - w(l) <= ys[l - 1] + w(l - 1) + tol)
}

/// Grid optimum of the planar problem for the column decomposition with
/// radius `r_eff`: every split of the fleet into consecutive column segments,
/// each column's deadline found by bisection. Returns the optimal deadline.
pub fn brute_force_minmax_2d(instance: &Instance, r_eff: Option<f64>) -> Result<f64> {
    let n = instance.len();
    too_large(n, 12)?;
    let r_eff = r_eff.unwrap_or_else(|| min_radius(instance));
    let side = std::f64::consts::SQRT_2 * r_eff;
    let cells = |len: f64| ((len / side - 1e-9).ceil() as usize).max(1);
    let (p, q) = (cells(instance.beta()), cells(instance.d()));
    if p * q > n || !(instance.d() > 0.0) {
        return Err(DeployError::Precondition("grid does not fit the fleet".into()));
    }
    let plan = GridPlan {
        p,
        q,
        r_eff,
        square_side: side,
        assignments: Vec::new(),
    };
    let t_u = planar_upper_bound(instance, plan.padded()) * (1.0 + 1e-9);
    let height = q as f64 * side;
    let tol = instance.seam_tol();
    // Column deadline of agents start..end serving column i, infinite if none.
    let column_time = |i: usize, start: usize, end: usize| -> f64 {
        let c = plan.column_center(i);
        let covers = |t: f64| {
            let mut f = 0.0f64;
            for k in start..end {
                let u = &instance.uavs()[k];
                let Some(s) = horizontal_reach(instance.metric(), u, t, (c - u.x).abs()) else {
                    continue;
                };
                let half = side / 2.0;
                if f + half < u.z - s - tol {
                    continue;
                }
                let z = (f + half).min(u.z + s).max(u.z - s);
                f = f.max(z + half);
            }
            f >= height - tol
        };
        if !covers(t_u) {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (0.0, t_u);
        if covers(0.0) {
            return 0.0;
        }
        while hi - lo > ORACLE_REL_PRECISION * hi {
            let mid = 0.5 * (lo + hi);
            if covers(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    // best[i][s]: optimal max deadline for columns i.. using agents from s on.
    let mut best = vec![vec![f64::INFINITY; n + 1]; p + 1];
    best[p].iter_mut().for_each(|b| *b = 0.0);
    for i in (0..p).rev() {
        for s in 0..=n {
            for e in s + 1..=n {
                let rest = best[i + 1][e];
                if rest.is_infinite() {
                    continue;
                }
                let t = column_time(i, s, e).max(rest);
                if t < best[i][s] {
                    best[i][s] = t;
                }
            }
        }
    }
    let t = best[0][0];
    if t.is_infinite() {
        return Err(DeployError::Infeasible("no column split covers the grid".into()));
    }
    Ok(t)
}
