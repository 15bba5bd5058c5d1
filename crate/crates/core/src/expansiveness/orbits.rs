//! Orbit-shape fractions: converging semi-orbits and near-periodic points.

use serde::{Deserialize, Serialize};

use super::{level_histogram, require_inverse, Sided};
use crate::error::{Error, Result};
use crate::geometry::{Point, SpaceDescriptor};
use crate::measures::MeasureSpec;
use crate::rng::{domain, StreamFamily};
use crate::scalar::Scalar;
use crate::stats::Proportion;
use crate::systems::SystemSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiOrbitSettings {
    /// Number of trailing steps that must be Cauchy.
    pub window: usize,
    pub tol: f64,
    pub n_max: usize,
    pub samples: u64,
    pub seed: u64,
}

impl Default for SemiOrbitSettings {
    fn default() -> Self {
        Self {
            window: 4,
            tol: 1e-6,
            n_max: 64,
            samples: 20_000,
            seed: 0,
        }
    }
}

/// Diameter of the last `window + 1` points of the orbit `step^k(z)`,
/// `k <= n_max`.
fn tail_spread<S: Scalar>(
    space: &SpaceDescriptor<S>,
    z: &Point<S>,
    n_max: usize,
    window: usize,
    step: impl Fn(&Point<S>) -> Point<S>,
) -> S {
    let mut p = *z;
    for _ in 0..n_max - window {
        p = step(&p);
    }
    let mut tail = Vec::with_capacity(window + 1);
    tail.push(p);
    for _ in 0..window {
        p = step(&p);
        tail.push(p);
    }
    let mut spread = S::zero();
    for (i, a) in tail.iter().enumerate() {
        for b in &tail[i + 1..] {
            spread = spread.max(space.dist(a, b));
        }
    }
    spread
}

/// Fraction of `mu`-samples whose forward and backward orbits both look
/// convergent: the last `window + 1` iterates up to `n_max` lie within
/// `tol` of each other. Finite-horizon convergence over-counts true
/// convergence.
pub fn converging_semiorbit_fraction<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    s: &SemiOrbitSettings,
) -> Result<Proportion> {
    require_inverse(f, Sided::TwoSided)?;
    if s.window < 2 || s.window > s.n_max {
        return Err(Error::InvalidArgument("need 2 <= window <= n_max".into()));
    }
    if !(s.tol > 0.0) || s.samples == 0 {
        return Err(Error::InvalidArgument("tol and samples must be positive".into()));
    }
    let tol = S::lit(s.tol);
    let fam = StreamFamily::new(s.seed, domain::SAMPLES);
    let map = f.map();
    let hits = level_histogram(s.samples, 1, |i| {
        let z = mu.draw(&mut fam.stream(i));
        let fwd = tail_spread(&f.space, &z, s.n_max, s.window, |p| f.forward(p));
        if fwd > tol {
            return 0;
        }
        let bwd = tail_spread(&f.space, &z, s.n_max, s.window, |p| {
            map.inverse(p).expect("checked invertible")
        });
        u32::from(bwd <= tol)
    })[1];
    Ok(Proportion::new(hits, s.samples, 1.0))
}

/// Fraction of `mu`-samples `z` with `d(f^p z, z) <= eps` for some
/// `1 <= p <= max_period`.
pub fn periodic_fraction<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    max_period: u32,
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<Proportion> {
    if max_period < 1 || !(eps > 0.0) || samples == 0 {
        return Err(Error::InvalidArgument(
            "max_period, eps and samples must be positive".into(),
        ));
    }
    let eps = S::lit(eps);
    let fam = StreamFamily::new(seed, domain::SAMPLES);
    let hits = level_histogram(samples, 1, |i| {
        let z = mu.draw(&mut fam.stream(i));
        let mut p = z;
        for _ in 0..max_period {
            p = f.forward(&p);
            if f.space.dist(&p, &z) <= eps {
                return 1;
            }
        }
        0
    })[1];
    Ok(Proportion::new(hits, samples, 1.0))
}
