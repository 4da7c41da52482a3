use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};
use uavdeploy::generate::{gen_hard_instance, gen_random, three_partition_exists, GenConfig};
use uavdeploy::minmax::{
    best_prefix_any_order, check_feasibility, check_feasibility_in_order, fptas_minmax, solve_common_origin_minmax,
};
use uavdeploy::minsum::{dp_minsum_with_steps, greedy_common_origin_minsum, MinSumSolution};
use uavdeploy::model::{coverage_gap, GEOM_REL_TOL};
use uavdeploy::oracle::{brute_force_minmax, brute_force_minmax_2d, brute_force_minsum, feasible_any_order};
use uavdeploy::planar::{fptas_minmax_2d, fptas_minmax_2d_with_radius, squares_cover};
use uavdeploy::{bounds, BoundReport, DeployError, Deployment, Instance, Placement};

use crate::args::{
    BenchArgs, Command, FeasibleArgs, GadgetArgs, GenArgs, Method, Objective, OracleArgs, SolveArgs, SweepArgs,
    VerifyArgs,
};
use crate::bench::{dp_ladder, fptas_ladder, time_solver};
use crate::error::{exit, CliError};
use crate::io::{emit, instance_to_json, parse_json, read_deployment, read_instance, read_text, to_json};
use crate::sweep::{run_sweep, to_csv, SolverKind, SweepSpec};

pub fn dispatch(cmd: &Command) -> Result<i32, CliError> {
    match cmd {
        Command::Solve(a) => solve(a),
        Command::Feasible(a) => feasible(a),
        Command::Sweep(a) => sweep(a),
        Command::Bench(a) => bench(a),
        Command::Gen(a) => gen(a),
        Command::Gadget(a) => gadget(a),
        Command::Verify(a) => verify(a),
        Command::Oracle(a) => oracle(a),
    }
}

/// What `solve` prints. `verify` reads back `placements` and `per_delay`.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub objective: f64,
    pub method: &'static str,
    pub placements: Vec<Placement>,
    pub per_delay: BTreeMap<usize, f64>,
    pub max_delay: f64,
    pub total_delay: f64,
    pub bounds: BoundReport,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub details: Value,
}

impl SolveReport {
    fn new(inst: &Instance, objective: f64, method: &'static str, dep: Deployment, details: Value) -> Self {
        SolveReport {
            objective,
            method,
            placements: dep.placements,
            per_delay: dep.per_delay,
            max_delay: dep.max_delay,
            total_delay: dep.total_delay,
            bounds: bounds(inst),
            details,
        }
    }
}

fn wrong_method(objective: &str, method: Method) -> CliError {
    CliError::Usage(format!("method {method:?} does not solve {objective}").to_lowercase())
}

pub fn solve_instance(
    inst: &Instance,
    objective: Objective,
    method: Method,
    epsilon: f64,
    grid_steps: usize,
    r_eff: Option<f64>,
) -> Result<SolveReport, CliError> {
    match objective {
        Objective::Minmax => {
            let sol = match method {
                Method::Exact => solve_common_origin_minmax(inst)?,
                Method::Fptas => fptas_minmax(inst, epsilon)?,
                Method::Auto => match inst.shared_origin() {
                    Some(_) => match solve_common_origin_minmax(inst) {
                        Err(DeployError::Unsupported(_)) => fptas_minmax(inst, epsilon)?,
                        other => other?,
                    },
                    None => fptas_minmax(inst, epsilon)?,
                },
                m => return Err(wrong_method("minmax", m)),
            };
            let name = match sol.method {
                uavdeploy::minmax::MinMaxMethod::CommonOriginExact => "common_origin_exact",
                uavdeploy::minmax::MinMaxMethod::Fptas => "fptas",
            };
            let details = json!({
                "deadline": sol.deadline,
                "grid_unit": sol.grid_unit,
                "grid_index": sol.grid_index,
                "probes": sol.probes,
                "epsilon": sol.epsilon,
            });
            Ok(SolveReport::new(inst, sol.objective, name, sol.deployment, details))
        }
        Objective::Minsum => {
            let sol: MinSumSolution = match method {
                Method::Auto | Method::Dp => dp_minsum_with_steps(inst, grid_steps)?,
                Method::Greedy => greedy_common_origin_minsum(inst)?,
                m => return Err(wrong_method("minsum", m)),
            };
            let name = match sol.method {
                uavdeploy::minsum::MinSumMethod::GreedyCommonOrigin => "greedy_common_origin",
                uavdeploy::minsum::MinSumMethod::Dp => "dp",
            };
            let details = match sol.grid_unit {
                Some(unit) => json!({
                    "grid_objective": sol.grid_objective,
                    "grid_unit": unit,
                    "grid_steps": sol.grid_steps,
                    "slack": inst.len() as f64 * unit,
                }),
                None => Value::Null,
            };
            Ok(SolveReport::new(inst, sol.objective, name, sol.deployment, details))
        }
        Objective::Minmax2d => {
            if !matches!(method, Method::Auto | Method::Fptas) {
                return Err(wrong_method("minmax2d", method));
            }
            let sol = match r_eff {
                Some(r) => fptas_minmax_2d_with_radius(inst, epsilon, r)?,
                None => fptas_minmax_2d(inst, epsilon)?,
            };
            let details = json!({
                "deadline": sol.deadline,
                "grid_unit": sol.grid_unit,
                "probes": sol.probes,
                "epsilon": sol.epsilon,
                "plan": sol.plan,
            });
            Ok(SolveReport::new(inst, sol.max_delay, "fptas_2d", sol.deployment, details))
        }
    }
}

fn solve(a: &SolveArgs) -> Result<i32, CliError> {
    let inst = read_instance(&a.instance)?;
    let report = solve_instance(&inst, a.objective, a.method, a.epsilon, a.grid_steps, a.r_eff)?;
    emit(a.out.as_deref(), &to_json(&report))?;
    Ok(exit::OK)
}

/// Exit 0 when the deadline is feasible, 2 when it is not; the verdict is
/// printed either way.
fn feasible(a: &FeasibleArgs) -> Result<i32, CliError> {
    if !(a.deadline.is_finite() && a.deadline >= 0.0) {
        return Err(CliError::Usage(format!("deadline {} must be finite and non-negative", a.deadline)));
    }
    let inst = read_instance(&a.instance)?;
    let (feasible, covered, dep) = if a.any_order {
        let ok = feasible_any_order(&inst, a.deadline)?;
        let (covered, order) = best_prefix_any_order(&inst, a.deadline);
        let out = check_feasibility_in_order(&inst, &order, a.deadline);
        (ok, covered.min(inst.beta()), out.deployment(&inst))
    } else {
        let out = check_feasibility(&inst, a.deadline);
        (out.feasible, out.covered, out.deployment(&inst))
    };
    let report = json!({
        "deadline": a.deadline,
        "feasible": feasible,
        "order_preserving": !a.any_order,
        "covered": covered,
        "beta": inst.beta(),
        "placements": dep.placements,
        "per_delay": dep.per_delay,
    });
    emit(a.out.as_deref(), &to_json(&report))?;
    Ok(if feasible { exit::OK } else { exit::INFEASIBLE })
}

/// Exit 0 if the deployment covers the target and every declared delay
/// matches recomputation to `GEOM_REL_TOL`; 3 on a coverage gap; 4 on a
/// delay mismatch.
fn verify(a: &VerifyArgs) -> Result<i32, CliError> {
    let inst = read_instance(&a.instance)?;
    let dep = read_deployment(&a.deployment)?;
    let (code, report) = verify_deployment(&inst, &dep)?;
    print!("{}", to_json(&report));
    if code != exit::OK {
        eprintln!("verify: {}", report["status"].as_str().unwrap_or("failed"));
    }
    Ok(code)
}

pub fn verify_deployment(inst: &Instance, dep: &Deployment) -> Result<(i32, Value), CliError> {
    for (i, p) in dep.placements.iter().enumerate() {
        if inst.position_of(p.id).is_none() {
            return Err(CliError::input(format!("placements[{i}].id"), format!("unknown agent id {}", p.id)));
        }
    }
    let planar = dep.placements.iter().any(|p| p.zp.is_some());
    if planar {
        if let Some(i) = dep.placements.iter().position(|p| p.zp.is_none()) {
            return Err(CliError::input(format!("placements[{i}].z"), "planar deployment needs z for every agent"));
        }
        // Squares inscribed in the true disks must cover the rectangle.
        let squares: Vec<(f64, f64, f64)> = dep
            .placements
            .iter()
            .map(|p| {
                let u = &inst.uavs()[inst.position_of(p.id).expect("checked above")];
                (p.y, p.zp.expect("checked above"), u.r / std::f64::consts::SQRT_2)
            })
            .collect();
        if !squares_cover(&squares, inst.beta(), inst.d(), inst.eps()) {
            let report = json!({"status": "gap", "target": [[0.0, inst.beta()], [0.0, inst.d()]]});
            return Ok((exit::COVERAGE_GAP, report));
        }
    } else if let Some((lo, hi)) = coverage_gap(inst, dep) {
        return Ok((exit::COVERAGE_GAP, json!({"status": "gap", "gap": [lo, hi]})));
    }
    if let Some((id, declared, expected)) = dep.delay_mismatch(inst, GEOM_REL_TOL) {
        let report = json!({
            "status": "delay_mismatch",
            "id": id,
            "declared": declared,
            "expected": expected,
        });
        return Ok((exit::DELAY_MISMATCH, report));
    }
    Ok((
        exit::OK,
        json!({"status": "ok", "max_delay": dep.max_delay, "total_delay": dep.total_delay}),
    ))
}

fn load_config(path: Option<&Path>) -> Result<GenConfig, CliError> {
    match path {
        Some(p) => parse_json(&read_text(p)?),
        None => Ok(GenConfig::default()),
    }
}

fn gen(a: &GenArgs) -> Result<i32, CliError> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(n) = a.n {
        cfg.n = n;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if let Some(beta) = a.beta {
        cfg.beta = beta;
    }
    if a.shared_origin.is_some() {
        cfg.shared_origin = a.shared_origin;
    }
    if let Some(m) = a.metric {
        cfg.metric = m.into();
    }
    let inst = gen_random(&cfg)?;
    emit(a.out.as_deref(), &instance_to_json(&inst))?;
    Ok(exit::OK)
}

fn gadget(a: &GadgetArgs) -> Result<i32, CliError> {
    let g = gen_hard_instance(&a.items, a.variant.into(), a.padding)?;
    let meta = json!({
        "variant": g.variant,
        "m": g.m,
        "b": g.b,
        "k": g.k,
        "partition_exists": three_partition_exists(&a.items)?,
    });
    emit(a.out.as_deref(), &instance_to_json(&g.instance))?;
    match &a.meta {
        Some(path) => emit(Some(path), &to_json(&meta))?,
        None => eprint!("{}", to_json(&meta)),
    }
    Ok(exit::OK)
}

fn oracle(a: &OracleArgs) -> Result<i32, CliError> {
    let inst = read_instance(&a.instance)?;
    let ids = |order: &[usize]| -> Vec<usize> { order.iter().map(|&k| inst.uavs()[k].id).collect() };
    let report = match a.objective {
        Objective::Minmax => {
            let o = brute_force_minmax(&inst, a.max_n)?;
            json!({
                "objective": o.objective,
                "deadline": o.deadline,
                "order": ids(&o.order),
                "placements": o.deployment.placements,
                "per_delay": o.deployment.per_delay,
                "max_delay": o.deployment.max_delay,
                "total_delay": o.deployment.total_delay,
            })
        }
        Objective::Minsum => {
            let o = brute_force_minsum(&inst, a.max_n, a.refine)?;
            json!({
                "objective": o.objective,
                "slack": o.slack,
                "converged": o.converged,
                "order": ids(&o.order),
                "placements": o.deployment.placements,
                "per_delay": o.deployment.per_delay,
                "max_delay": o.deployment.max_delay,
                "total_delay": o.deployment.total_delay,
            })
        }
        Objective::Minmax2d => json!({"objective": brute_force_minmax_2d(&inst, a.r_eff)?}),
    };
    emit(a.out.as_deref(), &to_json(&report))?;
    Ok(exit::OK)
}

fn sweep(a: &SweepArgs) -> Result<i32, CliError> {
    let mut base = load_config(a.config.as_deref())?;
    if a.shared_origin.is_some() {
        base.shared_origin = a.shared_origin;
    }
    let spec = SweepSpec {
        runs: a.runs,
        seed: a.seed,
        epsilon: a.epsilon,
        grid_steps: a.grid_steps,
        antithetic: a.antithetic,
        ..SweepSpec::new(a.param, a.values.clone(), a.solvers.clone(), base)
    };
    let rows = run_sweep(&spec, a.jobs)?;
    emit(a.csv.as_deref(), &to_csv(&spec, &rows, a.timing))?;
    if let Some(path) = &a.svg {
        emit(Some(path), &crate::svg::render(&spec, &rows))?;
    }
    Ok(exit::OK)
}

/// Fleet sizes of the FPTAS doubling ladder.
const SIZE_LADDER: [usize; 4] = [25, 50, 100, 200];
const EPSILON_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn bench(a: &BenchArgs) -> Result<i32, CliError> {
    if a.repeat == 0 {
        return Err(CliError::Usage("repeat must be at least 1".into()));
    }
    let base = load_config(a.gen.as_deref())?;
    let inst = match &a.instance {
        Some(path) => read_instance(path)?,
        None => gen_random(&base)?,
    };
    let timing = time_solver(&inst, a.solver, a.epsilon, a.grid_steps, a.repeat)?;
    let ladder = match (a.ladder, a.solver) {
        (false, _) => Value::Null,
        (true, SolverKind::Fptas) => {
            json!(fptas_ladder(&inst, &EPSILON_LADDER, &base, &SIZE_LADDER, a.repeat)?)
        }
        (true, SolverKind::Dp) => {
            let g = a.grid_steps;
            json!(dp_ladder(&inst, &[g, 2 * g, 4 * g], a.repeat)?)
        }
        (true, s) => return Err(CliError::Usage(format!("no ladder for solver {}", s.name()))),
    };
    let report = json!({
        "solver": a.solver.name(),
        "n": inst.len(),
        "repeat": a.repeat,
        "seconds": timing,
        "ladder": ladder,
    });
    emit(a.out.as_deref(), &to_json(&report))?;
    Ok(exit::OK)
}
