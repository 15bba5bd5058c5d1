//! Finite covers whose itineraries cut out null sets.
//!
//! For a cover `{A}` and a sequence `A_n`, the set of points `y` with
//! `f^n(y)` in the closure of `A_n` for every `n` in the window must be
//! null. Sequences come from two sources: following the orbit of a
//! `mu`-typical point and always picking the cover element centered
//! nearest to it (the hardest case), and uniformly random choices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{require_inverse, Sided};
use crate::error::{Error, Result};
use crate::geometry::{Ball, Point, SpaceDescriptor};
use crate::measures::MeasureSpec;
use crate::rng::{derive_seed, domain, StreamFamily};
use crate::scalar::Scalar;
use crate::stats::Proportion;
use crate::systems::SystemSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSettings {
    pub n_max: u32,
    /// Sequences of each kind.
    pub sequences: usize,
    pub mc_samples: u64,
    pub threshold: f64,
    pub sided: Sided,
    pub seed: u64,
    /// Grid size used to certify the cover.
    pub cover_probes: usize,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        Self {
            n_max: 10,
            sequences: 16,
            mc_samples: 20_000,
            threshold: 0.01,
            sided: Sided::OneSided,
            seed: 0,
            cover_probes: 4_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    Adversarial,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceEstimate {
    pub kind: SequenceKind,
    /// Cover indices for `n = n_first, n_first + 1, ...`.
    pub n_first: i64,
    pub elements: Vec<usize>,
    pub estimate: Proportion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallRecord {
    pub center: Vec<f64>,
    pub radius: f64,
    pub closed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub system: String,
    pub measure: String,
    pub cover: Vec<BallRecord>,
    pub lebesgue_number: f64,
    pub sequences_tested: usize,
    pub max_intersection_estimate: f64,
    pub max_upper_bound: f64,
    pub max_lower_bound: f64,
    pub threshold: f64,
    pub is_generator_evidence: bool,
    pub sequences: Vec<SequenceEstimate>,
}

/// Open balls of radius `radius` centered on a grid of spacing `spacing`.
pub fn grid_cover<S: Scalar>(space: &SpaceDescriptor<S>, spacing: f64, radius: f64) -> Result<Vec<Ball<S>>> {
    if !(spacing > 0.0 && radius > 0.0) {
        return Err(Error::InvalidArgument("spacing and radius must be positive".into()));
    }
    let axes: Vec<Vec<f64>> = space
        .bounds()
        .iter()
        .map(|(lo, hi)| {
            let (lo, hi) = (lo.as_f64(), hi.as_f64());
            let m = ((hi - lo) / spacing - 1e-9).ceil() as usize;
            let m = if space.is_periodic() { m } else { m + 1 };
            (0..m).map(|k| (lo + k as f64 * spacing).min(hi)).collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; axes.len()];
    loop {
        let coords: Vec<S> = idx.iter().zip(&axes).map(|(&i, a)| S::lit(a[i])).collect();
        out.push(space.ball(space.point(&coords)?, S::lit(radius), false)?);
        let mut a = 0;
        loop {
            if a == axes.len() {
                return Ok(out);
            }
            idx[a] += 1;
            if idx[a] < axes[a].len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

fn nearest<S: Scalar>(space: &SpaceDescriptor<S>, cover: &[Ball<S>], p: &Point<S>) -> usize {
    let mut best = (0, S::infinity());
    for (i, b) in cover.iter().enumerate() {
        // largest margin r - d(c, p)
        let m = space.dist(&b.center, p) - b.radius;
        if m < best.1 {
            best = (i, m);
        }
    }
    best.0
}

/// Closed-ball membership with the same tolerance as
/// [`SpaceDescriptor::ball_contains`].
#[inline]
fn in_closure<S: Scalar>(space: &SpaceDescriptor<S>, b: &Ball<S>, y: &Point<S>) -> bool {
    space.dist(&b.center, y) <= super::closed_radius(b.radius)
}

/// Test whether `cover` behaves like a (positive, when one-sided) generator.
pub fn generator_check<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    cover: &[Ball<S>],
    s: &GeneratorSettings,
) -> Result<GeneratorReport> {
    require_inverse(f, s.sided)?;
    if s.n_max < 1 || s.sequences < 1 || s.mc_samples < 1 {
        return Err(Error::InvalidArgument(
            "n_max, sequences and mc_samples must be positive".into(),
        ));
    }
    let lebesgue_number = f.space.lebesgue_number(cover, s.cover_probes)?.as_f64();
    let (n_first, n_last) = match s.sided {
        Sided::OneSided => (0_i64, s.n_max as i64 - 1),
        Sided::TwoSided => (-(s.n_max as i64), s.n_max as i64),
    };
    let len = (n_last - n_first + 1) as usize;
    let zero = (-n_first) as usize;

    let seq_fam = StreamFamily::new(s.seed, domain::SEQUENCES);
    let mut sequences = Vec::with_capacity(2 * s.sequences);
    for j in 0..2 * s.sequences {
        let kind = if j < s.sequences {
            SequenceKind::Adversarial
        } else {
            SequenceKind::Random
        };
        let mut rng = seq_fam.stream(j as u64);
        let elements: Vec<usize> = match kind {
            SequenceKind::Adversarial => {
                let x = mu.draw(&mut rng);
                let mut e = vec![0; len];
                let mut p = x;
                for slot in e.iter_mut().skip(zero) {
                    *slot = nearest(&f.space, cover, &p);
                    p = f.forward(&p);
                }
                let mut p = x;
                for slot in e[..zero].iter_mut().rev() {
                    p = f.inverse(&p)?;
                    *slot = nearest(&f.space, cover, &p);
                }
                e
            }
            SequenceKind::Random => (0..len).map(|_| rng.random_range(0..cover.len())).collect(),
        };
        let estimate = intersection_mass(f, mu, cover, &elements, zero, s, j)?;
        sequences.push(SequenceEstimate {
            kind,
            n_first,
            elements,
            estimate,
        });
    }
    let max_of = |g: fn(&Proportion) -> f64| {
        sequences
            .iter()
            .map(|q| g(&q.estimate))
            .fold(0.0, f64::max)
    };
    let max_upper_bound = max_of(|p| p.ci_high);
    Ok(GeneratorReport {
        system: f.name.clone(),
        measure: mu.name.clone(),
        cover: cover
            .iter()
            .map(|b| BallRecord {
                center: b.center.to_f64_vec(),
                radius: b.radius.as_f64(),
                closed: b.closed,
            })
            .collect(),
        lebesgue_number,
        sequences_tested: sequences.len(),
        max_intersection_estimate: max_of(|p| p.estimate),
        max_upper_bound,
        max_lower_bound: max_of(|p| p.ci_low),
        threshold: s.threshold,
        is_generator_evidence: max_upper_bound <= s.threshold,
        sequences,
    })
}

fn intersection_mass<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    cover: &[Ball<S>],
    elements: &[usize],
    zero: usize,
    s: &GeneratorSettings,
    j: usize,
) -> Result<Proportion> {
    let a0 = &cover[elements[zero]];
    let oracle = mu.ball_mass(&a0.center, a0.radius);
    if oracle == Some(0.0) {
        return Ok(Proportion::new(0, s.mc_samples, 0.0));
    }
    let fam = StreamFamily::new(derive_seed(s.seed, domain::SAMPLES, j as u64), domain::SAMPLES);
    let space = &f.space;
    let map = f.map();
    let hits = super::level_histogram(s.mc_samples, 1, |i| {
        let mut rng = fam.stream(i);
        let y = match oracle {
            Some(_) => mu
                .draw_in_ball(&a0.center, a0.radius, &mut rng)
                .expect("oracle measure samples balls"),
            None => mu.draw(&mut rng),
        };
        let mut p = y;
        for e in &elements[zero..] {
            if !in_closure(space, &cover[*e], &p) {
                return 0;
            }
            p = f.forward(&p);
        }
        let mut p = y;
        for e in elements[..zero].iter().rev() {
            p = map.inverse(&p).expect("checked invertible");
            if !in_closure(space, &cover[*e], &p) {
                return 0;
            }
        }
        1
    })[1];
    Ok(Proportion::new(hits, s.mc_samples, oracle.unwrap_or(1.0)))
}
