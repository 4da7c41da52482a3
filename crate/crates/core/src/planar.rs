//! Planar targets: the rectangle `[0, β] × [0, d]` is gridded into columns of
//! square cells and each column is covered by a consecutive run of agents.

use serde::Serialize;

use crate::error::{DeployError, Result};
use crate::minmax::{grid, grid_bisect, sweep_cover, Mover};
use crate::model::{horizontal_reach, travel_time_to, Deployment, Instance};

/// Slack subtracted before rounding cell counts up, so exact multiples stay exact.
const CELL_ROUNDING: f64 = 1e-9;

/// Consecutive agents `start .. start + len` assigned to one column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPlan {
    /// Columns along the length.
    pub p: usize,
    /// Cells per column.
    pub q: usize,
    pub r_eff: f64,
    pub square_side: f64,
    pub assignments: Vec<Segment>,
}

impl GridPlan {
    fn shape(instance: &Instance, r_eff: f64) -> (usize, usize, f64) {
        let side = std::f64::consts::SQRT_2 * r_eff;
        let cells = |len: f64| ((len / side - CELL_ROUNDING).ceil() as usize).max(1);
        (cells(instance.beta()), cells(instance.d()), side)
    }

    /// Abscissa of column `i`'s centre line.
    pub fn column_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.square_side
    }

    /// Padded target `[0, p·side] × [0, q·side]`.
    pub fn padded(&self) -> (f64, f64) {
        (self.p as f64 * self.square_side, self.q as f64 * self.square_side)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarFeasibility {
    pub deadline: f64,
    pub feasible: bool,
    /// Columns assigned before the sweep ran out of agents or failed.
    pub plan: GridPlan,
    /// `(fleet position, y, z')` of dispatched agents, column by column.
    pub placements: Vec<(usize, f64, f64)>,
}

impl PlanarFeasibility {
    pub fn deployment(&self, instance: &Instance) -> Deployment {
        Deployment::from_planar_positions(instance, &self.placements)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarDeployment {
    pub deployment: Deployment,
    pub max_delay: f64,
    pub plan: GridPlan,
    pub deadline: f64,
    pub grid_unit: f64,
    pub epsilon: f64,
    pub probes: usize,
}

fn validate(instance: &Instance, r_eff: f64) -> Result<(usize, usize, f64)> {
    if !(instance.d() > 0.0) {
        return Err(DeployError::Precondition("planar target needs width d > 0".into()));
    }
    let r_min = min_radius(instance);
    if !(r_eff > 0.0 && r_eff <= r_min * (1.0 + 1e-12)) {
        return Err(DeployError::Precondition(format!(
            "effective radius {r_eff} must lie in (0, {r_min}]"
        )));
    }
    let (p, q, side) = GridPlan::shape(instance, r_eff);
    if p.saturating_mul(q) > instance.len() {
        return Err(DeployError::Precondition(format!(
            "{p}x{q} grid needs more than the {} available agents",
            instance.len()
        )));
    }
    Ok((p, q, side))
}

pub fn min_radius(instance: &Instance) -> f64 {
    instance.uavs().iter().map(|u| u.r).fold(f64::INFINITY, f64::min)
}

/// Column-by-column feasibility of `deadline`. Each column takes the shortest
/// run of the next agents (at least `q`) whose z-sweep covers the column,
/// leaving at least `q` agents for every later column.
pub fn check_feasibility_2d(instance: &Instance, deadline: f64, r_eff: f64) -> Result<PlanarFeasibility> {
    let (p, q, side) = validate(instance, r_eff)?;
    Ok(column_sweep(instance, deadline, p, q, side, r_eff))
}

fn column_sweep(instance: &Instance, deadline: f64, p: usize, q: usize, side: f64, r_eff: f64) -> PlanarFeasibility {
    let n = instance.len();
    let mut plan = GridPlan {
        p,
        q,
        r_eff,
        square_side: side,
        assignments: Vec::with_capacity(p),
    };
    let height = q as f64 * side;
    let tol = instance.seam_tol();
    let mut placements = Vec::new();
    let mut start = 0;
    for i in 0..p {
        let c = plan.column_center(i);
        let column: Vec<Mover> = (start..n)
            .map(|k| {
                let u = &instance.uavs()[k];
                Mover {
                    index: k,
                    center: u.z,
                    half: side / 2.0,
                    reach: horizontal_reach(instance.metric(), u, deadline, (c - u.x).abs()),
                }
            })
            .collect();
        let longest = (n - start).saturating_sub((p - 1 - i) * q);
        let mut found = None;
        for len in q..=longest {
            let (covered, stack) = sweep_cover(column[..len].iter().copied(), 0.0, height, tol);
            if covered >= height - tol {
                found = Some((len, stack));
                break;
            }
        }
        let Some((len, stack)) = found else {
            return PlanarFeasibility {
                deadline,
                feasible: false,
                plan,
                placements,
            };
        };
        placements.extend(stack.into_iter().map(|(k, z)| (k, c, z)));
        plan.assignments.push(Segment { start, len });
        start += len;
    }
    PlanarFeasibility {
        deadline,
        feasible: true,
        plan,
        placements,
    }
}

/// Upper bound on the planar deadline: every agent can reach every corner of
/// the padded target.
pub fn planar_upper_bound(instance: &Instance, plan_extent: (f64, f64)) -> f64 {
    let (bx, bz) = plan_extent;
    instance
        .uavs()
        .iter()
        .map(|u| {
            [(0.0, 0.0), (bx, 0.0), (0.0, bz), (bx, bz)]
                .into_iter()
                .map(|(y, z)| travel_time_to(u, y, z, instance.metric()))
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// `(1 + ε)` grid bisection over [`check_feasibility_2d`] with `r_eff = min r`.
pub fn fptas_minmax_2d(instance: &Instance, epsilon: f64) -> Result<PlanarDeployment> {
    fptas_minmax_2d_with_radius(instance, epsilon, min_radius(instance))
}

pub fn fptas_minmax_2d_with_radius(instance: &Instance, epsilon: f64, r_eff: f64) -> Result<PlanarDeployment> {
    let (p, q, side) = validate(instance, r_eff)?;
    let t_l = instance
        .uavs()
        .iter()
        .map(|u| u.h / u.v)
        .fold(f64::INFINITY, f64::min);
    let t_u = planar_upper_bound(instance, (p as f64 * side, q as f64 * side));
    let (unit, kmax) = grid(t_l, t_u, epsilon)?;
    let probe = |k: u64| column_sweep(instance, k as f64 * unit, p, q, side, r_eff);
    if !probe(kmax).feasible {
        return Err(DeployError::Infeasible(format!(
            "no column assignment within the upper bound {t_u:.6} h"
        )));
    }
    let (k, probes) = grid_bisect(kmax, |k| probe(k).feasible);
    let out = probe(k);
    let deployment = out.deployment(instance);
    Ok(PlanarDeployment {
        max_delay: deployment.max_delay,
        deployment,
        plan: out.plan,
        deadline: k as f64 * unit,
        grid_unit: unit,
        epsilon,
        probes: probes + 2,
    })
}

/// Whether axis-aligned squares `(cx, cz, half side)` cover the rectangle
/// `[0, bx] × [0, bz]` up to `eps`. Checked slab by slab between square edges.
pub fn squares_cover(squares: &[(f64, f64, f64)], bx: f64, bz: f64, eps: f64) -> bool {
    let mut cuts: Vec<f64> = squares
        .iter()
        .flat_map(|&(cx, _, h)| [cx - h, cx + h])
        .filter(|&x| x > 0.0 && x < bx)
        .collect();
    cuts.push(0.0);
    cuts.push(bx);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut reach = 0.0;
    // x-coverage: every slab wider than eps must be covered at its midpoint.
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a <= eps {
            continue;
        }
        let xm = 0.5 * (a + b);
        let mut spans: Vec<(f64, f64)> = squares
            .iter()
            .filter(|&&(cx, _, h)| (xm - cx).abs() <= h)
            .map(|&(_, cz, h)| (cz - h, cz + h))
            .collect();
        if crate::model::uncovered(&mut spans, 0.0, bz, eps).is_some() {
            return false;
        }
        reach = b;
    }
    reach >= bx - eps
}

/// Coverage of a planar deployment: squares of side `√2·r_eff` over the padded
/// grid, and inscribed squares of the true radii over `[0, β] × [0, d]`.
pub fn verify_planar_coverage(instance: &Instance, deployment: &Deployment, plan: &GridPlan) -> bool {
    let eps = instance.eps();
    let mut grid_squares = Vec::new();
    let mut true_squares = Vec::new();
    for p in &deployment.placements {
        let (Some(k), Some(zp)) = (instance.position_of(p.id), p.zp) else {
            return false;
        };
        grid_squares.push((p.y, zp, plan.square_side / 2.0));
        true_squares.push((p.y, zp, instance.uavs()[k].r / std::f64::consts::SQRT_2));
    }
    let (bx, bz) = plan.padded();
    squares_cover(&grid_squares, bx, bz, eps)
        && squares_cover(&true_squares, instance.beta(), instance.d(), eps)
}
