//! Wall-clock timing of the solvers and the scaling ladders.

use std::time::Instant;

use serde::Serialize;
use uavdeploy::generate::{gen_random, GenConfig};
use uavdeploy::Instance;

use crate::error::CliError;
use crate::sweep::SolverKind;

/// Largest log-log slope of FPTAS time against fleet size still read as quadratic.
pub const MAX_FPTAS_SLOPE: f64 = 2.3;

/// Accepted band for the DP time ratio when the grid doubles.
pub const DP_RATIO_BAND: (f64, f64) = (2.0, 6.0);

/// Wall-time summary in seconds; percentiles use the nearest-rank rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub samples: usize,
    pub min: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
    pub mean: f64,
}

impl Timing {
    pub fn from_samples(samples: &[f64]) -> Timing {
        assert!(!samples.is_empty(), "at least one sample");
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let rank = |p: f64| s[((p * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
        Timing {
            samples: s.len(),
            min: s[0],
            p50: rank(0.5),
            p90: rank(0.9),
            p99: rank(0.99),
            max: s[s.len() - 1],
            mean: s.iter().sum::<f64>() / s.len() as f64,
        }
    }
}

/// Times `repeat` solves of one instance.
pub fn time_solver(
    inst: &Instance,
    solver: SolverKind,
    epsilon: f64,
    grid_steps: usize,
    repeat: usize,
) -> Result<Timing, CliError> {
    if repeat == 0 {
        return Err(CliError::Usage("repeat must be at least 1".into()));
    }
    let mut samples = Vec::with_capacity(repeat);
    for _ in 0..repeat {
        let start = Instant::now();
        let dep = solver.solve(inst, epsilon, grid_steps)?;
        samples.push(start.elapsed().as_secs_f64());
        std::hint::black_box(dep);
    }
    Ok(Timing::from_samples(&samples))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let (mx, my) = logs.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x / m, b + y / m));
    let (num, den) = logs
        .iter()
        .fold((0.0, 0.0), |(n, d), &(x, y)| (n + (x - mx) * (y - my), d + (x - mx) * (x - mx)));
    num / den
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderStep {
    pub parameter: f64,
    /// Median seconds per solve.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FptasLadder {
    /// Median time at each ε, coarsest first.
    pub epsilon: Vec<LadderStep>,
    pub increasing_in_inverse_epsilon: bool,
    /// Median time at each fleet size of the doubling ladder.
    pub sizes: Vec<LadderStep>,
    pub slope: f64,
    pub slope_within_bound: bool,
}

/// Runtime against `1/ε` on `inst`, and against fleet size on fleets drawn
/// from `base` with `n` doubled along `sizes`.
pub fn fptas_ladder(
    inst: &Instance,
    epsilons: &[f64],
    base: &GenConfig,
    sizes: &[usize],
    repeat: usize,
) -> Result<FptasLadder, CliError> {
    let mut epsilon = Vec::new();
    for &eps in epsilons {
        let t = time_solver(inst, SolverKind::Fptas, eps, 1, repeat)?;
        epsilon.push(LadderStep {
            parameter: eps,
            seconds: t.p50,
        });
    }
    let eps = epsilons.last().copied().unwrap_or(1e-3);
    let mut by_size = Vec::new();
    for &n in sizes {
        let fleet = gen_random(&GenConfig { n, ..base.clone() })?;
        let t = time_solver(&fleet, SolverKind::Fptas, eps, 1, repeat)?;
        by_size.push(LadderStep {
            parameter: n as f64,
            seconds: t.p50,
        });
    }
    let slope = loglog_slope(&by_size.iter().map(|s| (s.parameter, s.seconds)).collect::<Vec<_>>());
    Ok(FptasLadder {
        increasing_in_inverse_epsilon: epsilon.windows(2).all(|w| w[1].seconds > w[0].seconds),
        epsilon,
        sizes: by_size,
        slope,
        slope_within_bound: slope <= MAX_FPTAS_SLOPE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpLadder {
    pub steps: Vec<LadderStep>,
    /// Time ratio between consecutive doublings.
    pub ratios: Vec<f64>,
    pub ratios_within_band: bool,
}

pub fn dp_ladder(inst: &Instance, steps: &[usize], repeat: usize) -> Result<DpLadder, CliError> {
    let mut out = Vec::new();
    for &g in steps {
        let t = time_solver(inst, SolverKind::Dp, 1e-3, g, repeat)?;
        out.push(LadderStep {
            parameter: g as f64,
            seconds: t.p50,
        });
    }
    let ratios: Vec<f64> = out.windows(2).map(|w| w[1].seconds / w[0].seconds).collect();
    Ok(DpLadder {
        ratios_within_band: ratios.iter().all(|&r| (DP_RATIO_BAND.0..=DP_RATIO_BAND.1).contains(&r)),
        steps: out,
        ratios,
    })
}
