//! Min-sum deployment: radius greedy from a shared origin and the
//! order-preserving dynamic programme over a discretised delay budget.

use serde::Serialize;

use crate::error::{DeployError, Result};
use crate::minmax::{extend, fptas_minmax, Mover};
use crate::model::{bounds, Deployment, Instance};

/// Grid resolution used when the caller does not choose one.
pub const DEFAULT_GRID_STEPS: usize = 2000;

/// Largest DP table accepted, in cells.
pub const MAX_TABLE_CELLS: usize = 20_000_000;

/// Backpointer of one DP cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Skip,
    /// The agent spends `t` grid steps and hovers above `y`.
    Use { t: usize, y: f64 },
}

const SKIP: u32 = u32::MAX;

/// `R(i, j)`: right end of the longest prefix `[0, R]` the first `i` agents
/// cover with a total budget of `j` grid steps.
#[derive(Debug, Clone)]
pub struct DpTable {
    pub grid_unit: f64,
    pub steps: usize,
    n: usize,
    reach: Vec<f64>,
    values: Vec<f64>,
    spent: Vec<u32>,
}

impl DpTable {
    fn build(instance: &Instance, grid_unit: f64, steps: usize) -> Self {
        let n = instance.len();
        let g = steps + 1;
        let tol = instance.seam_tol();
        // reach[i * g + t]: horizontal reach of agent i with t steps, NaN when grounded.
        let mut reach = vec![f64::NAN; n * g];
        for i in 0..n {
            for t in 0..g {
                if let Some(s) = instance.reach(i, t as f64 * grid_unit) {
                    reach[i * g + t] = s;
                }
            }
        }
        let mut values = vec![0.0f64; (n + 1) * g];
        let mut spent = vec![SKIP; (n + 1) * g];
        for i in 1..=n {
            let (prev, cur) = values.split_at_mut(i * g);
            let prev = &prev[(i - 1) * g..];
            let cur = &mut cur[..g];
            let k = i - 1;
            let (x, w) = (instance.uavs()[k].x, instance.halfwidth(k));
            let first = reach[k * g..(k + 1) * g].iter().position(|s| !s.is_nan());
            for j in 0..g {
                let mut best = prev[j];
                let mut arg = SKIP;
                if let Some(t0) = first {
                    for t in t0..=j {
                        let m = Mover {
                            index: k,
                            center: x,
                            half: w,
                            reach: Some(reach[k * g + t]),
                        };
                        if let Some((next, _)) = extend(prev[j - t], &m, tol) {
                            if next > best {
                                best = next;
                                arg = t as u32;
                            }
                        }
                    }
                }
                cur[j] = best;
                spent[i * g + j] = arg;
            }
        }
        DpTable {
            grid_unit,
            steps,
            n,
            reach,
            values,
            spent,
        }
    }

    pub fn agents(&self) -> usize {
        self.n
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.steps + 1) + j]
    }

    /// Backpointer of cell `(i, j)` for `i ≥ 1`.
    pub fn choice(&self, instance: &Instance, i: usize, j: usize) -> Cell {
        let g = self.steps + 1;
        match self.spent[i * g + j] {
            SKIP => Cell::Skip,
            t => {
                let t = t as usize;
                let k = i - 1;
                let m = Mover {
                    index: k,
                    center: instance.uavs()[k].x,
                    half: instance.halfwidth(k),
                    reach: Some(self.reach[k * g + t]),
                };
                let (_, y) = extend(self.r(i - 1, j - t), &m, instance.seam_tol())
                    .expect("stored choice extends its base");
                Cell::Use { t, y }
            }
        }
    }

    /// Smallest budget index whose prefix reaches `beta`.
    pub fn first_covering(&self, instance: &Instance) -> Option<usize> {
        let goal = instance.beta() - instance.seam_tol();
        (0..=self.steps).find(|&j| self.r(self.n, j) >= goal)
    }

    /// Placements `(fleet position, y)` behind cell `(n, j)`, left to right,
    /// with footprints nested in a later one removed.
    pub fn backtrace(&self, instance: &Instance, j: usize) -> Vec<(usize, f64)> {
        let mut picks = Vec::new();
        let mut j = j;
        for i in (1..=self.n).rev() {
            if let Cell::Use { t, y } = self.choice(instance, i, j) {
                picks.push((i - 1, y));
                j -= t;
            }
        }
        picks.reverse();
        let mut stack: Vec<(usize, f64)> = Vec::with_capacity(picks.len());
        for (k, y) in picks {
            while stack.last().is_some_and(|&(_, prev)| prev > y) {
                stack.pop();
            }
            stack.push((k, y));
        }
        stack
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MinSumMethod {
    GreedyCommonOrigin,
    Dp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinSumSolution {
    pub deployment: Deployment,
    /// Total delay of the returned deployment.
    pub objective: f64,
    /// `j*·δ`: the grid budget the DP certified (DP only).
    pub grid_objective: Option<f64>,
    pub grid_unit: Option<f64>,
    pub grid_steps: Option<usize>,
    pub method: MinSumMethod,
}

/// Order-preserving min-sum DP with `DEFAULT_GRID_STEPS` steps over [`budget_bound`].
pub fn dp_minsum_default(instance: &Instance) -> Result<MinSumSolution> {
    dp_minsum_with_steps(instance, DEFAULT_GRID_STEPS)
}

/// DP with the grid unit chosen so that [`budget_bound`] spans `steps` units.
pub fn dp_minsum_with_steps(instance: &Instance, steps: usize) -> Result<MinSumSolution> {
    if steps == 0 {
        return Err(DeployError::InvalidArgument("grid steps must be positive".into()));
    }
    dp_minsum(instance, budget_bound(instance) / steps as f64)
}

/// Upper bound on the optimal total delay: the smaller of `Γ_u` and the total
/// of a min-max deployment, which is itself a feasible order-preserving cover.
/// `Γ_u` alone is loose by an order of magnitude on spread-out fleets.
pub fn budget_bound(instance: &Instance) -> f64 {
    let gamma_u = bounds(instance).gamma_u;
    match fptas_minmax(instance, 1e-2) {
        Ok(sol) if sol.deployment.total_delay > 0.0 => gamma_u.min(sol.deployment.total_delay),
        _ => gamma_u,
    }
}

/// Order-preserving min-sum DP with budget unit `grid_unit` hours. The grid
/// runs to `⌈Γ/δ⌉ + n` steps, `Γ` from [`budget_bound`], so that rounding
/// every agent's budget up never pushes the optimum off the table.
pub fn dp_minsum(instance: &Instance, grid_unit: f64) -> Result<MinSumSolution> {
    let table = dp_table(instance, grid_unit)?;
    let Some(j) = table.first_covering(instance) else {
        return Err(DeployError::BudgetExhausted {
            covered: table.r(table.agents(), table.steps),
            beta: instance.beta(),
            steps: table.steps,
        });
    };
    let deployment = Deployment::from_positions(instance, &table.backtrace(instance, j));
    Ok(MinSumSolution {
        objective: deployment.total_delay,
        deployment,
        grid_objective: Some(j as f64 * grid_unit),
        grid_unit: Some(grid_unit),
        grid_steps: Some(table.steps),
        method: MinSumMethod::Dp,
    })
}

/// Fills the DP table for `grid_unit`.
pub fn dp_table(instance: &Instance, grid_unit: f64) -> Result<DpTable> {
    if !(grid_unit.is_finite() && grid_unit > 0.0) {
        return Err(DeployError::InvalidArgument(format!(
            "grid unit must be positive, got {grid_unit}"
        )));
    }
    let steps = (budget_bound(instance) / grid_unit).ceil() + instance.len() as f64;
    let cells = (instance.len() as f64 + 1.0) * (steps + 1.0);
    if !(cells <= MAX_TABLE_CELLS as f64) {
        return Err(DeployError::InvalidArgument(format!(
            "grid unit {grid_unit} needs {cells} table cells, limit {MAX_TABLE_CELLS}"
        )));
    }
    Ok(DpTable::build(instance, grid_unit, steps as usize))
}

/// Greedy for a shared origin outside the target: the widest remaining
/// footprint always takes the far end.
pub fn greedy_common_origin_minsum(instance: &Instance) -> Result<MinSumSolution> {
    let Some(x0) = instance.shared_origin() else {
        return Err(DeployError::Precondition(
            "agents do not share an initial abscissa".into(),
        ));
    };
    let tol = instance.seam_tol();
    let pos = if x0 <= tol {
        widest_first(instance)?
    } else if x0 >= instance.beta() - tol {
        let n = instance.len();
        widest_first(&instance.mirrored())?
            .into_iter()
            .map(|(k, y)| (n - 1 - k, instance.beta() - y))
            .collect()
    } else {
        return Err(DeployError::Precondition(format!(
            "shared origin {x0} lies inside the target"
        )));
    };
    let deployment = Deployment::from_positions(instance, &pos);
    Ok(MinSumSolution {
        objective: deployment.total_delay,
        deployment,
        grid_objective: None,
        grid_unit: None,
        grid_steps: None,
        method: MinSumMethod::GreedyCommonOrigin,
    })
}

fn widest_first(instance: &Instance) -> Result<Vec<(usize, f64)>> {
    let tol = instance.seam_tol();
    let mut order: Vec<usize> = (0..instance.len()).collect();
    order.sort_by(|&a, &b| instance.halfwidth(b).total_cmp(&instance.halfwidth(a)).then(a.cmp(&b)));
    let mut frontier = instance.beta();
    let mut pos = Vec::new();
    for k in order {
        if frontier <= tol {
            break;
        }
        let w = instance.halfwidth(k);
        let y = (frontier - w).max(instance.uavs()[k].x);
        pos.push((k, y));
        frontier = y - w;
    }
    if frontier > tol {
        return Err(DeployError::Infeasible(format!(
            "fleet exhausted with [0, {frontier}] uncovered"
        )));
    }
    Ok(pos)
}

/// Totals and maxima of the min-max and min-sum solvers side by side, with
/// every cross bound that failed beyond grid slack.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossBoundsReport {
    pub n: usize,
    pub epsilon: f64,
    /// DP grid unit δ.
    pub delta: f64,
    /// FPTAS grid unit.
    pub unit: f64,
    /// Total delay of the FPTAS deployment.
    pub gamma_fptas: f64,
    /// Total delay of the DP deployment.
    pub gamma_dp: f64,
    /// Max delay of the FPTAS deployment.
    pub t_fptas: f64,
    /// Max delay of the DP deployment.
    pub t_dp: f64,
    pub violations: Vec<String>,
}

impl CrossBoundsReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs both solvers and checks the four sandwich inequalities between them.
pub fn cross_bounds_check(instance: &Instance, epsilon: f64, steps: usize) -> Result<CrossBoundsReport> {
    let mm = fptas_minmax(instance, epsilon)?;
    let ms = dp_minsum_with_steps(instance, steps)?;
    let n = instance.len() as f64;
    let delta = ms.grid_unit.expect("dp sets its unit");
    let unit = mm.grid_unit.expect("fptas sets its unit");
    let (gp, gd) = (mm.deployment.total_delay, ms.deployment.total_delay);
    let (tp, td) = (mm.deployment.max_delay, ms.deployment.max_delay);
    let slack = 1e-9 * (gp + gd + tp + td);
    let mut violations = Vec::new();
    let mut expect = |ok: bool, what: String| {
        if !ok {
            violations.push(what);
        }
    };
    expect(gd <= gp + n * delta + slack, format!("dp total {gd} > fptas total {gp} + n·δ"));
    expect(
        gp <= n * (1.0 + epsilon) * gd + n * delta + n * unit + slack,
        format!("fptas total {gp} > n(1+ε)·dp total {gd} + slack"),
    );
    expect(tp <= td + unit + slack, format!("fptas max {tp} > dp max {td} + unit"));
    expect(td <= n * tp + n * delta + slack, format!("dp max {td} > n·fptas max {tp} + n·δ"));
    Ok(CrossBoundsReport {
        n: instance.len(),
        epsilon,
        delta,
        unit,
        gamma_fptas: gp,
        gamma_dp: gd,
        t_fptas: tp,
        t_dp: td,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{verify_coverage, Metric, Uav};

    fn inst(beta: f64, uavs: Vec<Uav>) -> Instance {
        Instance::new(beta, 0.0, uavs, Metric::Euclidean).unwrap()
    }

    #[test]
    fn greedy_widest_takes_far_end() {
        let i = inst(
            4.0,
            vec![
                Uav::new(0, 0.0, 2.0, 1.0, 1.0),
                Uav::new(1, 0.0, 1.0, 1.0, 1.0),
                Uav::new(2, 0.0, 1.0, 1.0, 1.0),
            ],
        );
        let s = greedy_common_origin_minsum(&i).unwrap();
        assert_eq!(s.deployment.placements.len(), 1);
        assert_eq!(s.deployment.placements[0].id, 0);
        assert!((s.objective - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn greedy_single_exact_span() {
        let i = inst(3.0, vec![Uav::new(0, -1.0, 1.5, 2.0, 4.0)]);
        let s = greedy_common_origin_minsum(&i).unwrap();
        let expect = ((1.5f64 + 1.0).powi(2) + 4.0).sqrt() / 4.0;
        assert!((s.objective - expect).abs() < 1e-12);
    }

    #[test]
    fn greedy_rejects_interior_origin() {
        let i = inst(4.0, vec![Uav::new(0, 2.0, 2.0, 1.0, 1.0)]);
        assert!(matches!(greedy_common_origin_minsum(&i), Err(DeployError::Precondition(_))));
    }

    #[test]
    fn dp_zero_cost_when_already_covering() {
        let i = inst(2.0, vec![Uav::new(0, 1.0, 1.0, 0.0, 1.0)]);
        for unit in [0.5, 0.01] {
            let s = dp_minsum(&i, unit).unwrap();
            assert_eq!(s.objective, 0.0);
            assert_eq!(s.grid_objective, Some(0.0));
        }
    }

    #[test]
    fn dp_pair_within_grid_slack() {
        let i = inst(4.0, vec![Uav::new(0, 0.0, 1.0, 0.0, 1.0), Uav::new(1, 1.0, 1.0, 0.0, 1.0)]);
        let s = dp_minsum(&i, 0.01).unwrap();
        assert!(s.objective >= 3.0 - 1e-9 && s.objective <= 3.0 + 0.02, "{}", s.objective);
        assert!(s.grid_objective.unwrap() <= 3.0 + 0.02 + 1e-9);
        assert!(verify_coverage(&i, &s.deployment));
    }

    #[test]
    fn dp_table_is_monotone() {
        let i = inst(
            5.0,
            vec![
                Uav::new(0, -1.0, 1.2, 0.3, 2.0),
                Uav::new(1, 2.0, 0.8, 0.1, 1.0),
                Uav::new(2, 4.0, 1.0, 0.2, 3.0),
            ],
        );
        let t = dp_table(&i, 0.05).unwrap();
        for a in 0..=3 {
            for j in 0..=t.steps {
                if j < t.steps {
                    assert!(t.r(a, j) <= t.r(a, j + 1));
                }
                if a < 3 {
                    assert!(t.r(a, j) <= t.r(a + 1, j));
                }
            }
        }
        assert!((0..=t.steps).all(|j| t.r(0, j) == 0.0));
    }

    #[test]
    fn dp_rejects_bad_unit_and_huge_tables() {
        let i = inst(2.0, vec![Uav::new(0, 1.0, 1.0, 0.0, 1.0)]);
        assert!(matches!(dp_minsum(&i, 0.0), Err(DeployError::InvalidArgument(_))));
        assert!(matches!(dp_minsum(&i, 1e-12), Err(DeployError::InvalidArgument(_))));
    }

    #[test]
    fn cross_bounds_single_agent() {
        let i = inst(2.0, vec![Uav::new(0, 0.5, 1.0, 0.4, 2.0)]);
        let rep = cross_bounds_check(&i, 1e-3, 400).unwrap();
        assert!(rep.holds(), "{:?}", rep.violations);
        assert!((rep.gamma_fptas - rep.gamma_dp).abs() <= rep.delta + rep.unit);
    }
}
