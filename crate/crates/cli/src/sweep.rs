//! Parameter sweeps over random fleets, aggregated into a deterministic CSV.

use std::fmt::Write as _;
use std::time::Instant;

use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use uavdeploy::generate::{gen_random, Dist, GenConfig};
use uavdeploy::minmax::{fptas_minmax, solve_common_origin_minmax};
use uavdeploy::minsum::{dp_minsum_with_steps, greedy_common_origin_minsum};
use uavdeploy::{DeployError, Deployment, Instance};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    N,
    #[value(name = "r_mean")]
    RMean,
    #[value(name = "v_mean")]
    VMean,
    #[value(name = "h_var")]
    HVar,
    #[value(name = "v_var")]
    VVar,
    Epsilon,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::N => "n",
            SweepParam::RMean => "r_mean",
            SweepParam::VMean => "v_mean",
            SweepParam::HVar => "h_var",
            SweepParam::VVar => "v_var",
            SweepParam::Epsilon => "epsilon",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Exact min-max for a shared origin.
    Exact,
    /// Order-preserving min-max grid bisection.
    Fptas,
    /// Radius-greedy min-sum for a shared origin.
    Greedy,
    /// Order-preserving min-sum dynamic program.
    Dp,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Fptas => "fptas",
            SolverKind::Greedy => "greedy",
            SolverKind::Dp => "dp",
        }
    }

    /// Whether the solver minimises the total rather than the largest delay.
    pub fn is_minsum(self) -> bool {
        matches!(self, SolverKind::Greedy | SolverKind::Dp)
    }

    pub fn solve(self, inst: &Instance, epsilon: f64, grid_steps: usize) -> Result<Deployment, DeployError> {
        Ok(match self {
            SolverKind::Exact => solve_common_origin_minmax(inst)?.deployment,
            SolverKind::Fptas => fptas_minmax(inst, epsilon)?.deployment,
            SolverKind::Greedy => greedy_common_origin_minsum(inst)?.deployment,
            SolverKind::Dp => dp_minsum_with_steps(inst, grid_steps)?.deployment,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub param: SweepParam,
    /// Strictly increasing.
    pub values: Vec<f64>,
    pub runs: usize,
    /// Run `k` of every point uses seed `seed + k`, so points share fleets'
    /// random numbers and trends are not swamped by sampling noise.
    pub seed: u64,
    pub solvers: Vec<SolverKind>,
    pub base: GenConfig,
    pub epsilon: f64,
    pub grid_steps: usize,
    /// Runs come in pairs sharing a seed, the second drawn antithetically;
    /// run `k` then uses seed `seed + k / 2`.
    pub antithetic: bool,
}

pub const DEFAULT_RUNS: usize = 1000;

impl SweepSpec {
    pub fn new(param: SweepParam, values: Vec<f64>, solvers: Vec<SolverKind>, base: GenConfig) -> Self {
        SweepSpec {
            param,
            values,
            runs: DEFAULT_RUNS,
            seed: 0,
            solvers,
            base,
            epsilon: 1e-3,
            grid_steps: uavdeploy::minsum::DEFAULT_GRID_STEPS,
            antithetic: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |why: String| Err(CliError::Usage(why));
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.values.is_empty() {
            return bad("no sweep values".into());
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("sweep values must be finite".into());
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("sweep values must be strictly increasing".into());
        }
        if self.solvers.is_empty() {
            return bad("no solvers selected".into());
        }
        if self.param == SweepParam::N && self.values.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
            return bad("fleet sizes must be positive integers".into());
        }
        if self.grid_steps == 0 {
            return bad("grid steps must be positive".into());
        }
        for &v in &self.values {
            let eps = self.epsilon_at(v);
            if !(eps.is_finite() && eps > 0.0) {
                return bad(format!("epsilon {eps} must be positive"));
            }
            // A draw with the first seed rejects impossible distributions up front.
            match gen_random(&self.config_at(v, 0)) {
                Err(DeployError::InvalidArgument(why)) => {
                    return bad(format!("{} = {v}: {why}", self.param.name()))
                }
                _ => continue,
            }
        }
        Ok(())
    }

    /// Generator settings for one run at sweep value `value`. Means keep the
    /// base variance and variances keep the base mean.
    pub fn config_at(&self, value: f64, run: usize) -> GenConfig {
        let mut cfg = self.base.clone();
        if self.antithetic {
            cfg.seed = self.seed.wrapping_add(run as u64 / 2);
            cfg.antithetic = run % 2 == 1;
        } else {
            cfg.seed = self.seed.wrapping_add(run as u64);
        }
        match self.param {
            SweepParam::N => cfg.n = value as usize,
            SweepParam::RMean => cfg.r = Dist::from_mean_var(value, variance(&cfg.r)),
            SweepParam::VMean => cfg.v = Dist::from_mean_var(value, variance(&cfg.v)),
            SweepParam::HVar => cfg.h = Dist::from_mean_var(cfg.h.mean(), value),
            SweepParam::VVar => cfg.v = Dist::from_mean_var(cfg.v.mean(), value),
            SweepParam::Epsilon => {}
        }
        cfg
    }

    pub fn epsilon_at(&self, value: f64) -> f64 {
        match self.param {
            SweepParam::Epsilon => value,
            _ => self.epsilon,
        }
    }
}

fn variance(d: &Dist) -> f64 {
    (d.max() - d.min()).powi(2) / 12.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub objective: f64,
    pub max_delay: f64,
    pub total_delay: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub solver: SolverKind,
    pub runs: usize,
    /// Runs where generation or the solver failed; they are left out of the means.
    pub infeasible: usize,
    pub mean_objective: f64,
    /// Sample standard deviation of the objective.
    pub std_objective: f64,
    pub mean_max_delay: f64,
    pub mean_total_delay: f64,
    pub mean_runtime: f64,
}

fn run_point(spec: &SweepSpec, value: f64, run: usize) -> Vec<Option<RunOutcome>> {
    let Ok(inst) = gen_random(&spec.config_at(value, run)) else {
        return vec![None; spec.solvers.len()];
    };
    let eps = spec.epsilon_at(value);
    spec.solvers
        .iter()
        .map(|s| {
            let start = Instant::now();
            let dep = s.solve(&inst, eps, spec.grid_steps).ok()?;
            let seconds = start.elapsed().as_secs_f64();
            Some(RunOutcome {
                objective: if s.is_minsum() { dep.total_delay } else { dep.max_delay },
                max_delay: dep.max_delay,
                total_delay: dep.total_delay,
                seconds,
            })
        })
        .collect()
}

/// Runs every point on a pool of `jobs` threads (all cores when `None`).
/// Results are gathered in `(value, run)` order before aggregation, so the
/// output does not depend on scheduling.
pub fn run_sweep(spec: &SweepSpec, jobs: Option<usize>) -> Result<Vec<SweepRow>, CliError> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    // Run-major order: the points of one run are solved back to back, so
    // machine drift during a long sweep hits every point's runtime alike.
    let points = spec.values.len();
    let tasks: Vec<(usize, usize)> = (0..spec.runs)
        .flat_map(|r| (0..points).map(move |p| (p, r)))
        .collect();
    let outcomes: Vec<Vec<Option<RunOutcome>>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(p, r)| run_point(spec, spec.values[p], r))
            .collect()
    });
    let mut rows = Vec::new();
    for (p, &value) in spec.values.iter().enumerate() {
        let point: Vec<&Vec<Option<RunOutcome>>> = (0..spec.runs).map(|r| &outcomes[r * points + p]).collect();
        for (s, &solver) in spec.solvers.iter().enumerate() {
            let ok: Vec<RunOutcome> = point.iter().filter_map(|o| o[s]).collect();
            rows.push(aggregate(value, solver, spec.runs, &ok));
        }
    }
    Ok(rows)
}

fn aggregate(value: f64, solver: SolverKind, runs: usize, ok: &[RunOutcome]) -> SweepRow {
    let mean = |f: fn(&RunOutcome) -> f64| {
        if ok.is_empty() {
            f64::NAN
        } else {
            ok.iter().map(f).sum::<f64>() / ok.len() as f64
        }
    };
    let mean_objective = mean(|o| o.objective);
    let std_objective = if ok.len() < 2 {
        0.0
    } else {
        let ss: f64 = ok.iter().map(|o| (o.objective - mean_objective).powi(2)).sum();
        (ss / (ok.len() - 1) as f64).sqrt()
    };
    SweepRow {
        value,
        solver,
        runs,
        infeasible: runs - ok.len(),
        mean_objective,
        std_objective,
        mean_max_delay: mean(|o| o.max_delay),
        mean_total_delay: mean(|o| o.total_delay),
        mean_runtime: mean(|o| o.seconds),
    }
}

/// CSV with `#` comment lines describing the columns. The runtime column is
/// only written with `timing`, since it is the one non-deterministic field.
pub fn to_csv(spec: &SweepSpec, rows: &[SweepRow], timing: bool) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# uavdeploy sweep over {}", spec.param.name());
    let _ = writeln!(
        out,
        "# runs per point: {}; seed base: {}; epsilon: {}; grid steps: {}{}",
        spec.runs,
        spec.seed,
        spec.epsilon,
        spec.grid_steps,
        if spec.antithetic { "; antithetic pairs" } else { "" }
    );
    let _ = writeln!(out, "# value: swept parameter; solver: exact | fptas | greedy | dp");
    let _ = writeln!(out, "# runs: runs per point; infeasible: runs that failed and are excluded from the means");
    let _ = writeln!(
        out,
        "# mean_objective, std_objective: max delay (exact, fptas) or total delay (greedy, dp), hours"
    );
    let _ = writeln!(out, "# mean_max_delay, mean_total_delay: both objectives of the same deployments, hours");
    if timing {
        let _ = writeln!(out, "# mean_runtime_s: wall time per solve, seconds");
    }
    out.push_str("param,value,solver,runs,infeasible,mean_objective,std_objective,mean_max_delay,mean_total_delay");
    if timing {
        out.push_str(",mean_runtime_s");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            spec.param.name(),
            r.value,
            r.solver.name(),
            r.runs,
            r.infeasible,
            r.mean_objective,
            r.std_objective,
            r.mean_max_delay,
            r.mean_total_delay
        );
        if timing {
            let _ = write!(out, ",{}", r.mean_runtime);
        }
        out.push('\n');
    }
    out
}
