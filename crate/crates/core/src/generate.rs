//! Seeded random fleets and 3-partition gadget instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DeployError, Result};
use crate::model::{Instance, Metric, Uav};

/// A scalar distribution. Every draw consumes exactly one uniform variate, so
/// fleets sampled with the same seed share their random numbers across
/// parameter values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dist {
    Uniform { lo: f64, hi: f64 },
    Const(f64),
}

impl Dist {
    /// Uniform law with the given mean and variance (a constant when the variance is 0).
    pub fn from_mean_var(mean: f64, var: f64) -> Self {
        if var <= 0.0 {
            return Dist::Const(mean);
        }
        let half = (3.0 * var).sqrt();
        Dist::Uniform {
            lo: mean - half,
            hi: mean + half,
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Dist::Uniform { lo, hi } => 0.5 * (lo + hi),
            Dist::Const(c) => c,
        }
    }

    pub fn min(&self) -> f64 {
        match *self {
            Dist::Uniform { lo, .. } => lo,
            Dist::Const(c) => c,
        }
    }

    pub fn max(&self) -> f64 {
        match *self {
            Dist::Uniform { hi, .. } => hi,
            Dist::Const(c) => c,
        }
    }

    fn at(&self, u: f64) -> f64 {
        match *self {
            Dist::Uniform { lo, hi } => lo + (hi - lo) * u,
            Dist::Const(c) => c,
        }
    }

    fn valid(&self) -> bool {
        self.min().is_finite() && self.max().is_finite() && self.min() <= self.max()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenConfig {
    pub n: usize,
    pub beta: f64,
    pub d: f64,
    pub r: Dist,
    pub v: Dist,
    pub h: Dist,
    /// Initial abscissae. Ignored when `shared_origin` is set.
    pub x: Dist,
    pub shared_origin: Option<f64>,
    pub metric: Metric,
    pub seed: u64,
    /// Fleets redrawn before giving up when the footprints cannot span `beta`.
    pub max_attempts: usize,
    /// Draw every uniform as `1 - u`. Pairing a seed with its antithetic
    /// twin cancels the first-order sampling noise in sweep means.
    pub antithetic: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n: 30,
            beta: 20.0,
            d: 0.1,
            r: Dist::Uniform { lo: 1.0, hi: 3.0 },
            v: Dist::Uniform { lo: 10.0, hi: 50.0 },
            h: Dist::Uniform { lo: 0.05, hi: 0.15 },
            x: Dist::Uniform { lo: 0.0, hi: 20.0 },
            shared_origin: None,
            metric: Metric::Euclidean,
            seed: 0,
            max_attempts: 100,
            antithetic: false,
        }
    }
}

impl GenConfig {
    fn check(&self) -> Result<()> {
        let bad = |what: &str| Err(DeployError::InvalidArgument(what.to_string()));
        if self.n == 0 {
            return bad("fleet size must be positive");
        }
        if !(self.beta.is_finite() && self.beta > 0.0) || !(self.d.is_finite() && self.d >= 0.0) {
            return bad("target length must be positive and width non-negative");
        }
        if ![self.r, self.v, self.h, self.x].iter().all(Dist::valid) {
            return bad("distribution bounds must be finite and ordered");
        }
        if self.r.min() < self.d / 2.0 || self.r.min() <= 0.0 {
            return bad("radius range must stay above half the target width");
        }
        if self.v.min() <= 0.0 || self.h.min() < 0.0 {
            return bad("speeds must be positive and altitudes non-negative");
        }
        if self.max_attempts == 0 {
            return bad("at least one attempt is required");
        }
        Ok(())
    }
}

/// Deterministic random instance; redraws the whole fleet (continuing the same
/// stream) until the footprints can span the target.
pub fn gen_random(config: &GenConfig) -> Result<Instance> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.max_attempts {
        let uavs: Vec<Uav> = (0..config.n)
            .map(|id| {
                let mut draw = || {
                    let u: f64 = rng.gen();
                    if config.antithetic { 1.0 - u } else { u }
                };
                let (ux, ur, uh, uv) = (draw(), draw(), draw(), draw());
                let x = config.shared_origin.unwrap_or_else(|| config.x.at(ux));
                Uav::new(id, x, config.r.at(ur), config.h.at(uh), config.v.at(uv))
            })
            .collect();
        match Instance::new(config.beta, config.d, uavs, config.metric) {
            Ok(inst) => return Ok(inst),
            Err(DeployError::InvalidInstance { path, .. }) if path == "uavs" => continue,
            Err(e) => return Err(e),
        }
    }
    Err(DeployError::GenerationFailed {
        attempts: config.max_attempts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GadgetVariant {
    MinMax,
    MinSum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gadget {
    pub instance: Instance,
    pub variant: GadgetVariant,
    pub m: usize,
    pub b: u64,
    /// Deadline (min-max) or total budget (min-sum) that is achievable iff the
    /// multiset has a 3-partition.
    pub k: f64,
}

/// Checks the 3-partition preconditions and returns `(m, B)`.
pub fn three_partition_shape(multiset: &[u64]) -> Result<(usize, u64)> {
    let bad = |why: String| Err(DeployError::Precondition(why));
    if multiset.is_empty() || multiset.len() % 3 != 0 {
        return bad(format!("{} items is not a positive multiple of 3", multiset.len()));
    }
    let m = multiset.len() / 3;
    let sum: u64 = multiset.iter().sum();
    if sum % m as u64 != 0 {
        return bad(format!("sum {sum} is not divisible by m = {m}"));
    }
    let b = sum / m as u64;
    if let Some(a) = multiset.iter().find(|&&a| !(4 * a > b && 2 * a < b)) {
        return bad(format!("item {a} is outside (B/4, B/2) for B = {b}"));
    }
    Ok((m, b))
}

/// Reduction instance for a 3-partition multiset. The first group holds one
/// agent per item, waiting left of the target; the second group marks the
/// unit separators between the `m` blocks of length `B`. `padding` adds a
/// spare unit-radius agent that may never pay off.
pub fn gen_hard_instance(multiset: &[u64], variant: GadgetVariant, padding: bool) -> Result<Gadget> {
    let (m, b) = three_partition_shape(multiset)?;
    let bf = b as f64;
    let beta = m as f64 * bf + m as f64 - 1.0;
    let k = match variant {
        GadgetVariant::MinMax => beta,
        GadgetVariant::MinSum => 3.0 * bf * (m * (m + 1)) as f64 + 3.0 * (m as f64 - 1.0),
    };
    let mut uavs: Vec<Uav> = multiset
        .iter()
        .enumerate()
        .map(|(id, &a)| Uav::new(id, -(a as f64) / 2.0, a as f64 / 2.0, 0.0, 1.0))
        .collect();
    for j in 1..m {
        let x = j as f64 * bf + (2.0 * j as f64 - 1.0) / 2.0;
        let (h, v) = match variant {
            GadgetVariant::MinMax => (1.0, 1.0 / k),
            GadgetVariant::MinSum => (0.0, 1.0 / (k + 1.0)),
        };
        uavs.push(Uav::new(uavs.len(), x, 0.5, h, v));
    }
    if padding {
        uavs.push(Uav::new(uavs.len(), -1.5, 1.0, 0.0, 1.0 / (k + 1.0)));
    }
    let instance = Instance::new(beta, 0.0, uavs, Metric::Euclidean)?;
    Ok(Gadget {
        instance,
        variant,
        m,
        b,
        k,
    })
}

/// Exhaustive search for a split into `m` triples that each sum to `B`.
pub fn three_partition_exists(multiset: &[u64]) -> Result<bool> {
    let (m, b) = three_partition_shape(multiset)?;
    let mut items = multiset.to_vec();
    items.sort_unstable_by(|a, c| c.cmp(a));
    let mut bins = vec![(0u64, 0usize); m];
    Ok(place(&items, 0, &mut bins, b))
}

fn place(items: &[u64], at: usize, bins: &mut [(u64, usize)], b: u64) -> bool {
    if at == items.len() {
        return bins.iter().all(|&(s, c)| s == b && c == 3);
    }
    for k in 0..bins.len() {
        let (s, c) = bins[k];
        if c == 3 || s + items[at] > b {
            continue;
        }
        // Empty bins are interchangeable.
        if c == 0 && bins[..k].iter().any(|&(_, c)| c == 0) {
            continue;
        }
        bins[k] = (s + items[at], c + 1);
        if place(items, at + 1, bins, b) {
            return true;
        }
        bins[k] = (s, c);
    }
    false
}

/// Every nondecreasing multiset of `3m` integers in `(B/4, B/2)` summing to `mB`.
pub fn enumerate_multisets(m: usize, b: u64) -> Vec<Vec<u64>> {
    let lo = b / 4 + 1;
    let hi = (b - 1) / 2;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(3 * m);
    fn rec(cur: &mut Vec<u64>, left: usize, rest: u64, lo: u64, hi: u64, out: &mut Vec<Vec<u64>>) {
        if left == 0 {
            if rest == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for a in lo..=hi {
            if a * left as u64 > rest || hi * (left as u64) < rest {
                break;
            }
            cur.push(a);
            rec(cur, left - 1, rest - a, a, hi, out);
            cur.pop();
        }
    }
    if lo <= hi {
        rec(&mut cur, 3 * m, m as u64 * b, lo, hi, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_instance() {
        let cfg = GenConfig {
            seed: 42,
            ..GenConfig::default()
        };
        assert_eq!(gen_random(&cfg).unwrap(), gen_random(&cfg).unwrap());
        let other = GenConfig { seed: 43, ..cfg.clone() };
        assert_ne!(gen_random(&cfg).unwrap(), gen_random(&other).unwrap());
    }

    #[test]
    fn defaults_span_target() {
        let inst = gen_random(&GenConfig::default()).unwrap();
        assert_eq!(inst.len(), 30);
        let span: f64 = (0..inst.len()).map(|k| 2.0 * inst.halfwidth(k)).sum();
        assert!(span >= inst.beta());
    }

    #[test]
    fn collapsed_radius_range() {
        let cfg = GenConfig {
            r: Dist::Uniform { lo: 2.0, hi: 2.0 },
            ..GenConfig::default()
        };
        let inst = gen_random(&cfg).unwrap();
        assert!(inst.uavs().iter().all(|u| u.r == 2.0));
    }

    #[test]
    fn shared_random_numbers_across_means() {
        let base = GenConfig {
            n: 10,
            seed: 7,
            ..GenConfig::default()
        };
        let a = gen_random(&base).unwrap();
        let b = gen_random(&GenConfig {
            v: Dist::Uniform { lo: 20.0, hi: 60.0 },
            ..base
        })
        .unwrap();
        for (ua, ub) in a.uavs().iter().zip(b.uavs()) {
            assert_eq!((ua.id, ua.x, ua.r, ua.h), (ub.id, ub.x, ub.r, ub.h));
        }
    }

    #[test]
    fn hopeless_ranges_fail_after_retries() {
        let cfg = GenConfig {
            n: 2,
            r: Dist::Const(1.0),
            max_attempts: 3,
            ..GenConfig::default()
        };
        assert_eq!(gen_random(&cfg), Err(DeployError::GenerationFailed { attempts: 3 }));
    }

    #[test]
    fn mean_var_uniform() {
        let d = Dist::from_mean_var(40.0, 144.0);
        assert!((d.mean() - 40.0).abs() < 1e-12);
        let w = d.max() - d.min();
        assert!((w * w / 12.0 - 144.0).abs() < 1e-9);
        assert_eq!(Dist::from_mean_var(5.0, 0.0), Dist::Const(5.0));
    }

    #[test]
    fn gadget_geometry() {
        let g = gen_hard_instance(&[5, 4, 4, 3, 3, 3], GadgetVariant::MinMax, false).unwrap();
        assert_eq!((g.m, g.b), (2, 11));
        assert_eq!(g.instance.beta(), 23.0);
        assert_eq!(g.k, 23.0);
        let sep = g.instance.uavs().iter().find(|u| u.h == 1.0).unwrap();
        assert_eq!((sep.x, sep.r, sep.v), (11.5, 0.5, 1.0 / 23.0));
        let s = gen_hard_instance(&[5, 4, 4, 3, 3, 3], GadgetVariant::MinSum, true).unwrap();
        assert_eq!(s.k, 3.0 * 11.0 * 6.0 + 3.0);
        assert_eq!(s.instance.len(), 8);
    }

    #[test]
    fn gadget_rejects_malformed_multisets() {
        assert!(gen_hard_instance(&[5, 4, 4, 3, 3], GadgetVariant::MinMax, false).is_err());
        assert!(gen_hard_instance(&[6, 4, 4, 3, 3, 2], GadgetVariant::MinMax, false).is_err());
        assert!(gen_hard_instance(&[5, 4, 4, 3, 3, 4], GadgetVariant::MinMax, false).is_err());
    }

    #[test]
    fn partition_checker() {
        assert!(three_partition_exists(&[5, 4, 4, 3, 3, 3]).unwrap());
        assert!(!three_partition_exists(&[4, 4, 4, 4, 4, 6]).unwrap());
        assert!(three_partition_exists(&[10, 9, 8, 7, 7, 7, 9, 8, 7]).unwrap());
    }

    #[test]
    fn multiset_enumeration() {
        let all = enumerate_multisets(2, 11);
        assert!(all.contains(&vec![3, 3, 3, 4, 4, 5]));
        assert!(all.iter().all(|s| s.iter().sum::<u64>() == 22 && s.len() == 6));
        assert!(all.iter().all(|s| three_partition_exists(s).unwrap()));
        let b13 = enumerate_multisets(2, 13);
        assert!(b13.contains(&vec![4, 4, 4, 4, 4, 6]));
        assert!(b13.iter().any(|s| !three_partition_exists(s).unwrap()));
    }
}
