//! Dynamical balls and estimates of their measure.
//!
//! The two-sided ball is `V[x, delta, n] = { y : d(f^i x, f^i y) <= delta,
//! -n <= i < n }` and the one-sided ball `B[x, delta, n]` uses `0 <= i < n`.
//! Both shrink as `n` grows. For a sample `y` the estimators compute its
//! level, the largest `n <= n_max` with `y` in the ball, so a single batch
//! yields the whole exactly nonincreasing decay series.

mod diagonal;
mod generator;
mod orbits;
mod verdict;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::measures::MeasureSpec;
use crate::rng::{domain, StreamFamily};
use crate::scalar::Scalar;
use crate::stats::Proportion;
use crate::systems::SystemSpec;

pub use diagonal::{fubini_cross_check, product_diagonal_test, FubiniReport};
pub use generator::{
    generator_check, grid_cover, BallRecord, GeneratorReport, GeneratorSettings, SequenceEstimate,
    SequenceKind,
};
pub use orbits::{converging_semiorbit_fraction, periodic_fraction, SemiOrbitSettings};
pub use verdict::{
    expansiveness_verdict, power_consistency_check, PowerConsistencyReport, ProbeSummary,
    ExpansivenessVerdict, Verdict, VerdictSettings,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sided {
    OneSided,
    TwoSided,
}

impl fmt::Display for Sided {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sided::OneSided => "one",
            Sided::TwoSided => "two",
        })
    }
}

impl FromStr for Sided {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" | "one_sided" | "one-sided" => Ok(Sided::OneSided),
            "two" | "two_sided" | "two-sided" => Ok(Sided::TwoSided),
            _ => Err(Error::InvalidArgument(format!(
                "sided must be `one` or `two`, got `{s}`"
            ))),
        }
    }
}

/// How the samples of a decay series are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Straight from the measure.
    Direct,
    /// From the measure restricted to `B[x, delta]`, rescaled by its exact
    /// mass. Every dynamical ball lies inside that closed ball.
    BallConditioned,
    /// Ball-conditioned when the measure has a ball oracle, else direct.
    Auto,
}

impl fmt::Display for SamplingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplingMode::Direct => "direct",
            SamplingMode::BallConditioned => "ball_conditioned",
            SamplingMode::Auto => "auto",
        })
    }
}

impl FromStr for SamplingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(SamplingMode::Direct),
            "ball_conditioned" | "ball-conditioned" | "conditioned" => Ok(SamplingMode::BallConditioned),
            "auto" => Ok(SamplingMode::Auto),
            _ => Err(Error::InvalidArgument(format!(
                "mode must be `direct`, `ball_conditioned` or `auto`, got `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynBallQuery<S> {
    pub center: Point<S>,
    pub delta: S,
    pub n: u32,
    pub sided: Sided,
}

pub(crate) fn require_inverse<S: Scalar>(f: &SystemSpec<S>, sided: Sided) -> Result<()> {
    if sided == Sided::TwoSided && !f.invertible() {
        return Err(Error::Capability(format!(
            "two-sided balls need an inverse and `{}` has none",
            f.name
        )));
    }
    Ok(())
}

pub fn dyn_ball_contains<S: Scalar>(f: &SystemSpec<S>, q: &DynBallQuery<S>, y: &Point<S>) -> Result<bool> {
    require_inverse(f, q.sided)?;
    f.space.distance(&q.center, y)?;
    Ok(pair_level(f, &q.center, y, q.delta, q.n, q.sided) >= q.n)
}

/// Orbit of a ball center, computed once and shared by all samples.
pub(crate) struct CenterOrbit<S> {
    /// `f^i x` for `0 <= i < n_max`.
    forward: Vec<Point<S>>,
    /// `f^{-j} x` for `1 <= j <= n_max`; empty when one-sided.
    backward: Vec<Point<S>>,
    n_max: u32,
}

impl<S: Scalar> CenterOrbit<S> {
    pub(crate) fn new(f: &SystemSpec<S>, x: &Point<S>, n_max: u32, sided: Sided) -> Self {
        let mut forward = Vec::with_capacity(n_max as usize);
        let mut p = *x;
        for i in 0..n_max {
            forward.push(p);
            if i + 1 < n_max {
                p = f.forward(&p);
            }
        }
        let mut backward = Vec::new();
        if sided == Sided::TwoSided {
            let inv = f.map();
            let mut p = *x;
            for _ in 0..n_max {
                p = inv.inverse(&p).expect("checked invertible");
                backward.push(p);
            }
        }
        Self {
            forward,
            backward,
            n_max,
        }
    }

    /// Largest `n <= n_max` with `y` in the dynamical ball of window `n`.
    #[inline]
    pub(crate) fn level(&self, f: &SystemSpec<S>, y: &Point<S>, delta: S) -> u32 {
        let space = &f.space;
        let delta = closed_radius(delta);
        let mut q = *y;
        let mut fwd = self.n_max;
        for (i, xi) in self.forward.iter().enumerate() {
            if space.dist(xi, &q) > delta {
                fwd = i as u32;
                break;
            }
            if i + 1 < self.forward.len() {
                q = f.forward(&q);
            }
        }
        if self.backward.is_empty() || fwd == 0 {
            return fwd;
        }
        // window n also needs j = 1..=n backward steps
        let map = f.map();
        let mut q = *y;
        for (j, xj) in self.backward.iter().enumerate().take(fwd as usize) {
            q = map.inverse(&q).expect("checked invertible");
            if space.dist(xj, &q) > delta {
                return j as u32;
            }
        }
        fwd
    }
}

/// Closed-ball cutoff, widened by a few ulps as in
/// [`SpaceDescriptor::ball_contains`](crate::geometry::SpaceDescriptor::ball_contains).
#[inline]
pub(crate) fn closed_radius<S: Scalar>(delta: S) -> S {
    delta + S::epsilon() * S::lit(8.0) * delta.max(S::one())
}

/// Level of the pair `(x, y)` without precomputing the orbit of `x`; cheap
/// when most pairs separate immediately.
#[inline]
pub(crate) fn pair_level<S: Scalar>(
    f: &SystemSpec<S>,
    x: &Point<S>,
    y: &Point<S>,
    delta: S,
    n_max: u32,
    sided: Sided,
) -> u32 {
    let space = &f.space;
    let delta = closed_radius(delta);
    let (mut p, mut q) = (*x, *y);
    let mut fwd = n_max;
    for i in 0..n_max {
        if space.dist(&p, &q) > delta {
            fwd = i;
            break;
        }
        if i + 1 < n_max {
            p = f.forward(&p);
            q = f.forward(&q);
        }
    }
    if sided == Sided::OneSided || fwd == 0 {
        return fwd;
    }
    let map = f.map();
    let (mut p, mut q) = (*x, *y);
    for j in 0..fwd {
        p = map.inverse(&p).expect("checked invertible");
        q = map.inverse(&q).expect("checked invertible");
        if space.dist(&p, &q) > delta {
            return j;
        }
    }
    fwd
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySettings {
    pub delta: f64,
    pub sided: Sided,
    pub n_max: u32,
    pub samples: u64,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl Default for DecaySettings {
    fn default() -> Self {
        Self {
            delta: 0.05,
            sided: Sided::TwoSided,
            n_max: 20,
            samples: 100_000,
            seed: 0,
            mode: SamplingMode::Auto,
        }
    }
}

/// Estimates of the dynamical-ball measure for `n = 1..=n_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub center: Vec<f64>,
    pub delta: f64,
    pub sided: Sided,
    pub n_values: Vec<u32>,
    pub estimates: Vec<Proportion>,
    pub sample_count: u64,
    pub seed: u64,
    pub mode: SamplingMode,
    /// Exact mass of `B[x, delta]` when ball-conditioned.
    pub ball_mass: Option<f64>,
}

impl DecaySeries {
    pub fn terminal(&self) -> &Proportion {
        self.estimates.last().expect("n_max >= 1")
    }

    pub fn counts(&self) -> Vec<u64> {
        self.estimates.iter().map(|p| p.successes).collect()
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.estimates.windows(2).all(|w| w[1].estimate <= w[0].estimate)
    }

    pub(crate) fn from_histogram(
        center: Vec<f64>,
        s: &DecaySettings,
        mode: SamplingMode,
        ball_mass: Option<f64>,
        hist: &[u64],
    ) -> Self {
        let scale = ball_mass.unwrap_or(1.0);
        let mut surviving: u64 = hist.iter().sum();
        let mut estimates = Vec::with_capacity(s.n_max as usize);
        for n in 1..=s.n_max as usize {
            surviving -= hist[n - 1];
            estimates.push(Proportion::new(surviving, s.samples, scale));
        }
        Self {
            center,
            delta: s.delta,
            sided: s.sided,
            n_values: (1..=s.n_max).collect(),
            estimates,
            sample_count: s.samples,
            seed: s.seed,
            mode,
            ball_mass,
        }
    }
}

pub(crate) fn check_decay_settings(s: &DecaySettings) -> Result<()> {
    if s.n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    if s.samples < 100 {
        return Err(Error::InvalidArgument("samples must be at least 100".into()));
    }
    if !(s.delta > 0.0 && s.delta.is_finite()) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    Ok(())
}

/// Parallel histogram of `level(i)` over `0..count`. Integer counts make the
/// result independent of how the work is split.
pub(crate) fn level_histogram<F>(count: u64, n_max: u32, level: F) -> Vec<u64>
where
    F: Fn(u64) -> u32 + Sync,
{
    let bins = n_max as usize + 1;
    (0..count)
        .into_par_iter()
        .fold(
            || vec![0u64; bins],
            |mut h, i| {
                h[level(i) as usize] += 1;
                h
            },
        )
        .reduce(
            || vec![0u64; bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Estimate the measure of the dynamical balls around `x` for every window
/// up to `n_max` from one batch of samples.
pub fn decay_series<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    x: &Point<S>,
    s: &DecaySettings,
) -> Result<DecaySeries> {
    check_decay_settings(s)?;
    require_inverse(f, s.sided)?;
    f.space.distance(x, x)?;
    if mu.space.kind() != f.space.kind() || mu.space.dim() != f.space.dim() {
        return Err(Error::Domain(format!(
            "measure on {} used with a system on {}",
            mu.space.kind(),
            f.space.kind()
        )));
    }
    let delta = S::lit(s.delta);
    let oracle = match s.mode {
        SamplingMode::Direct => None,
        _ => mu.ball_mass(x, delta),
    };
    if s.mode == SamplingMode::BallConditioned && oracle.is_none() {
        return Err(Error::Capability(format!(
            "measure `{}` has no ball oracle for conditioned sampling",
            mu.name
        )));
    }
    let mode = if oracle.is_some() {
        SamplingMode::BallConditioned
    } else {
        SamplingMode::Direct
    };
    let orbit = CenterOrbit::new(f, x, s.n_max, s.sided);
    let fam = StreamFamily::new(s.seed, domain::SAMPLES);
    let hist = match oracle {
        Some(m) if m <= 0.0 => {
            let mut h = vec![0; s.n_max as usize + 1];
            h[0] = s.samples;
            h
        }
        Some(_) => level_histogram(s.samples, s.n_max, |i| {
            let mut rng = fam.stream(i);
            let y = mu.draw_in_ball(x, delta, &mut rng).expect("oracle measure samples balls");
            orbit.level(f, &y, delta)
        }),
        None => level_histogram(s.samples, s.n_max, |i| {
            let y = mu.draw(&mut fam.stream(i));
            orbit.level(f, &y, delta)
        }),
    };
    Ok(DecaySeries::from_histogram(x.to_f64_vec(), s, mode, oracle, &hist))
}

/// Centers drawn from `mu`, independent of the sample streams.
pub fn probe_centers<S: Scalar>(mu: &MeasureSpec<S>, seed: u64, count: usize) -> Vec<Point<S>> {
    let fam = StreamFamily::new(seed, domain::PROBES);
    (0..count as u64).map(|i| mu.draw(&mut fam.stream(i))).collect()
}
