//! Borel probability measures as seeded samplers.
//!
//! Every measure can draw points. Some also know the exact mass of closed
//! balls and can sample from the measure restricted to a ball; estimators
//! use that to resolve dynamical balls far smaller than `1 / samples`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point, SpaceDescriptor, SpaceKind, MAX_DIM};
use crate::rng::{domain, StreamFamily};
use crate::scalar::Scalar;
use crate::systems::{build_denjoy, golden_conjugate, DenjoyConstruction, PointMap};

/// Sampling backend of a [`MeasureSpec`].
pub trait MeasureSampler<S: Scalar>: Send + Sync {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<S>;

    /// Exact mass of the closed ball `B[center, radius]`, when known.
    fn ball_mass(&self, _center: &Point<S>, _radius: S) -> Option<f64> {
        None
    }

    /// A draw from the measure conditioned on `B[center, radius]`. Only
    /// called when `ball_mass` returned a positive value.
    fn draw_in_ball(&self, _center: &Point<S>, _radius: S, _rng: &mut ChaCha8Rng) -> Option<Point<S>> {
        None
    }

    /// Distribution function of a one-dimensional measure, if available.
    fn distribution(&self) -> Option<Distribution1d<S>> {
        None
    }
}

pub type ScalarMap<S> = Arc<dyn Fn(S) -> S + Send + Sync>;

/// A nonatomic measure on the circle or the interval given by its
/// distribution function `cdf(x) = mu([0, x])` and a quantile function
/// `quantile(t)` with `cdf(quantile(t)) = t`.
#[derive(Clone)]
pub struct Distribution1d<S> {
    pub kind: SpaceKind,
    pub cdf: ScalarMap<S>,
    pub quantile: ScalarMap<S>,
}

impl<S: Scalar> Distribution1d<S> {
    fn identity(kind: SpaceKind) -> Self {
        Self {
            kind,
            cdf: Arc::new(|x| x),
            quantile: Arc::new(|t| t),
        }
    }

    /// Lift of the distribution function to the real line. On the circle
    /// `F(x + 1) = F(x) + 1`; on the interval `F` is clamped.
    fn lift(&self, x: S) -> S {
        match self.kind {
            SpaceKind::Circle => {
                let base = x.floor();
                base + (self.cdf)(x - base)
            }
            _ => (self.cdf)(x.max(S::zero()).min(S::one())),
        }
    }

    fn point(&self, x: S) -> Point<S> {
        match self.kind {
            SpaceKind::Circle => Point::circle(x),
            _ => Point::interval(x),
        }
    }

    fn arc(&self, center: S, radius: S) -> (S, S) {
        match self.kind {
            SpaceKind::Circle if radius + radius >= S::one() => (S::zero(), S::one()),
            SpaceKind::Circle => (self.lift(center - radius), self.lift(center + radius)),
            _ => (self.lift(center - radius), self.lift(center + radius)),
        }
    }
}

impl<S: Scalar> MeasureSampler<S> for Distribution1d<S> {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<S> {
        self.point((self.quantile)(S::lit(rng.random::<f64>())))
    }

    fn ball_mass(&self, center: &Point<S>, radius: S) -> Option<f64> {
        let (lo, hi) = self.arc(center.x(), radius);
        Some((hi - lo).as_f64().clamp(0.0, 1.0))
    }

    fn draw_in_ball(&self, center: &Point<S>, radius: S, rng: &mut ChaCha8Rng) -> Option<Point<S>> {
        let (lo, hi) = self.arc(center.x(), radius);
        let t = lo + (hi - lo) * S::lit(rng.random::<f64>());
        let x = match self.kind {
            SpaceKind::Circle => {
                let base = t.floor();
                base + (self.quantile)(t - base)
            }
            _ => (self.quantile)(t.min(S::one())),
        };
        Some(self.point(x))
    }

    fn distribution(&self) -> Option<Distribution1d<S>> {
        Some(self.clone())
    }
}

struct Lebesgue<S> {
    space: SpaceDescriptor<S>,
}

fn uniform_coords<S: Scalar>(space: &SpaceDescriptor<S>, rng: &mut ChaCha8Rng) -> [S; MAX_DIM] {
    let mut c = [S::zero(); MAX_DIM];
    for (i, (lo, hi)) in space.bounds().into_iter().enumerate() {
        c[i] = lo + (hi - lo) * S::lit(rng.random::<f64>());
    }
    c
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|i| i as f64).product()
}

impl<S: Scalar> Lebesgue<S> {
    fn volume(&self) -> f64 {
        self.space
            .bounds()
            .iter()
            .map(|(lo, hi)| (*hi - *lo).as_f64())
            .product()
    }

    fn box_ball_inside(&self, center: &Point<S>, radius: S) -> bool {
        self.space
            .bounds()
            .iter()
            .enumerate()
            .all(|(i, (lo, hi))| center.coords()[i] - radius >= *lo && center.coords()[i] + radius <= *hi)
    }
}

impl<S: Scalar> MeasureSampler<S> for Lebesgue<S> {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<S> {
        self.space.project(uniform_coords(&self.space, rng))
    }

    fn ball_mass(&self, center: &Point<S>, radius: S) -> Option<f64> {
        let r = radius.as_f64();
        match self.space.kind() {
            SpaceKind::Circle => Some((2.0 * r).min(1.0)),
            SpaceKind::Interval => {
                let c = center.x().as_f64();
                Some(((c + r).min(1.0) - (c - r).max(0.0)).max(0.0))
            }
            SpaceKind::Torus2 => Some(if r <= 0.5 {
                2.0 * r * r
            } else if r < 1.0 {
                2.0 * r * r - 4.0 * (r - 0.5) * (r - 0.5)
            } else {
                1.0
            }),
            SpaceKind::Box => {
                if self.box_ball_inside(center, radius) {
                    let d = self.space.dim();
                    Some((2.0 * r).powi(d as i32) / factorial(d) / self.volume())
                } else {
                    None
                }
            }
        }
    }

    fn draw_in_ball(&self, center: &Point<S>, radius: S, rng: &mut ChaCha8Rng) -> Option<Point<S>> {
        let mut u = || S::lit(rng.random::<f64>());
        match self.space.kind() {
            SpaceKind::Circle => {
                let r = radius.min(S::lit(0.5));
                Some(Point::circle(center.x() - r + (r + r) * u()))
            }
            SpaceKind::Interval => {
                let lo = (center.x() - radius).max(S::zero());
                let hi = (center.x() + radius).min(S::one());
                Some(Point::interval(lo + (hi - lo) * u()))
            }
            SpaceKind::Torus2 => {
                if radius >= S::one() {
                    return Some(Point::torus(u(), u()));
                }
                let half = S::lit(0.5);
                loop {
                    // uniform on the L1 diamond as the image of a square
                    let s = S::lit(2.0) * u() - S::one();
                    let t = S::lit(2.0) * u() - S::one();
                    let a = radius * (s + t) * half;
                    let b = radius * (s - t) * half;
                    if a.abs() <= half && b.abs() <= half {
                        let c = center.coords();
                        return Some(Point::torus(c[0] + a, c[1] + b));
                    }
                }
            }
            SpaceKind::Box => {
                let d = self.space.dim();
                let c = center.raw();
                loop {
                    let mut p = c;
                    let mut l1 = S::zero();
                    for v in p.iter_mut().take(d) {
                        let off = radius * (S::lit(2.0) * u() - S::one());
                        l1 = l1 + off.abs();
                        *v = *v + off;
                    }
                    if l1 <= radius {
                        return Some(self.space.project(p));
                    }
                }
            }
        }
    }

    fn distribution(&self) -> Option<Distribution1d<S>> {
        match self.space.kind() {
            k @ (SpaceKind::Circle | SpaceKind::Interval) => Some(Distribution1d::identity(k)),
            _ => None,
        }
    }
}

struct Dirac<S: Scalar> {
    space: SpaceDescriptor<S>,
    atom: Point<S>,
}

impl<S: Scalar> MeasureSampler<S> for Dirac<S> {
    fn draw(&self, _rng: &mut ChaCha8Rng) -> Point<S> {
        self.atom
    }

    fn ball_mass(&self, center: &Point<S>, radius: S) -> Option<f64> {
        let ball = self.space.ball(*center, radius, true).ok()?;
        Some(if self.space.ball_contains(&ball, &self.atom).ok()? {
            1.0
        } else {
            0.0
        })
    }

    fn draw_in_ball(&self, _center: &Point<S>, _radius: S, _rng: &mut ChaCha8Rng) -> Option<Point<S>> {
        Some(self.atom)
    }
}

struct Pushforward<S: Scalar> {
    base: Arc<dyn MeasureSampler<S>>,
    phi: PointMap<S>,
}

impl<S: Scalar> MeasureSampler<S> for Pushforward<S> {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Point<S> {
        (self.phi)(&self.base.draw(rng))
    }
}

/// A Borel probability measure on a space.
#[derive(Clone)]
pub struct MeasureSpec<S: Scalar> {
    pub name: String,
    pub space: SpaceDescriptor<S>,
    pub nonatomic: bool,
    /// Name of the measure this one was pushed forward from.
    pub pushforward_of: Option<String>,
    sampler: Arc<dyn MeasureSampler<S>>,
}

impl<S: Scalar> fmt::Debug for MeasureSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureSpec")
            .field("name", &self.name)
            .field("space", &self.space.kind())
            .field("nonatomic", &self.nonatomic)
            .field("pushforward_of", &self.pushforward_of)
            .field("ball_oracle", &self.has_ball_oracle())
            .finish()
    }
}

impl<S: Scalar> MeasureSpec<S> {
    pub fn new(
        name: impl Into<String>,
        space: SpaceDescriptor<S>,
        nonatomic: bool,
        sampler: Arc<dyn MeasureSampler<S>>,
    ) -> Self {
        Self {
            name: name.into(),
            space,
            nonatomic,
            pushforward_of: None,
            sampler,
        }
    }

    /// One draw from the stream.
    #[inline]
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Point<S> {
        self.sampler.draw(rng)
    }

    pub fn ball_mass(&self, center: &Point<S>, radius: S) -> Option<f64> {
        self.sampler.ball_mass(center, radius)
    }

    #[inline]
    pub fn draw_in_ball(&self, center: &Point<S>, radius: S, rng: &mut ChaCha8Rng) -> Option<Point<S>> {
        self.sampler.draw_in_ball(center, radius, rng)
    }

    /// True when ball masses are known for at least the small balls used by
    /// the estimators.
    pub fn has_ball_oracle(&self) -> bool {
        let c = self.sampler.draw(&mut StreamFamily::new(0, domain::PROBES).stream(0));
        self.sampler.ball_mass(&c, S::lit(1e-3)).is_some()
    }

    pub fn distribution(&self) -> Option<Distribution1d<S>> {
        self.sampler.distribution()
    }

    /// `phi_* mu`. The ball oracle is dropped.
    pub fn pushforward(&self, name: impl Into<String>, target: SpaceDescriptor<S>, phi: PointMap<S>) -> Self {
        Self {
            name: name.into(),
            space: target,
            nonatomic: self.nonatomic,
            pushforward_of: Some(self.name.clone()),
            sampler: Arc::new(Pushforward {
                base: self.sampler.clone(),
                phi,
            }),
        }
    }

    /// Pushforward of a one-dimensional measure under an increasing
    /// homeomorphism `phi` with inverse `phi_inv`, both fixing 0 and 1.
    /// The ball oracle survives because the image of an arc is an arc.
    pub fn monotone_pushforward(
        &self,
        name: impl Into<String>,
        phi: ScalarMap<S>,
        phi_inv: ScalarMap<S>,
    ) -> Result<Self> {
        let base = self.distribution().ok_or_else(|| {
            Error::Capability(format!("measure `{}` has no distribution function", self.name))
        })?;
        let (cdf, quantile) = (base.cdf.clone(), base.quantile.clone());
        let pushed = Distribution1d {
            kind: base.kind,
            cdf: Arc::new(move |y| cdf(phi_inv(y))),
            quantile: Arc::new(move |t| phi(quantile(t))),
        };
        Ok(Self {
            name: name.into(),
            space: self.space,
            nonatomic: self.nonatomic,
            pushforward_of: Some(self.name.clone()),
            sampler: Arc::new(pushed),
        })
    }
}

pub fn make_lebesgue<S: Scalar>(space: SpaceDescriptor<S>) -> MeasureSpec<S> {
    MeasureSpec::new("lebesgue", space, true, Arc::new(Lebesgue { space }))
}

pub fn make_dirac<S: Scalar>(space: SpaceDescriptor<S>, atom: Point<S>) -> Result<MeasureSpec<S>> {
    if !space.contains(&atom) {
        return Err(Error::Domain(format!("atom {atom} not in {}", space.kind())));
    }
    Ok(MeasureSpec::new(
        format!("dirac:{}", atom),
        space,
        false,
        Arc::new(Dirac { space, atom }),
    ))
}

/// The invariant measure of a Denjoy map: Lebesgue pulled back through the
/// staircase, supported on the Cantor minimal set.
pub fn make_denjoy_minimal<S: Scalar>(d: Arc<DenjoyConstruction<S>>) -> MeasureSpec<S> {
    let (dc, dq) = (d.clone(), d);
    let dist = Distribution1d {
        kind: SpaceKind::Circle,
        cdf: Arc::new(move |x| dc.staircase_lift(x)),
        quantile: Arc::new(move |t| dq.staircase_inverse(t)),
    };
    MeasureSpec::new("denjoy-minimal", SpaceDescriptor::circle(), true, Arc::new(dist))
}

/// A batch of points drawn from a measure.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalBatch<S> {
    pub points: Vec<Point<S>>,
    pub seed: u64,
    pub count: usize,
}

/// Draw `count` points. Point `i` depends only on `(seed, i)`.
pub fn sample<S: Scalar>(mu: &MeasureSpec<S>, seed: u64, count: usize) -> Result<EmpiricalBatch<S>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be positive".into()));
    }
    let fam = StreamFamily::new(seed, domain::SAMPLES);
    let points = (0..count as u64)
        .into_par_iter()
        .map(|i| mu.draw(&mut fam.stream(i)))
        .collect();
    Ok(EmpiricalBatch {
        points,
        seed,
        count,
    })
}

pub fn measure_names() -> &'static [&'static str] {
    &[
        "lebesgue",
        "lebesgue-squared",
        "lebesgue-sqrt",
        "denjoy-minimal",
        "denjoy-collapsed",
        "dirac:<x>[,<y>]",
    ]
}

fn denjoy_from_params<S: Scalar>(params: &BTreeMap<String, f64>) -> Result<Arc<DenjoyConstruction<S>>> {
    let get = |k: &str, d: f64| params.get(k).copied().unwrap_or(d);
    let n = get("n", 64.0);
    if n < 1.0 || n.fract() != 0.0 {
        return Err(Error::InvalidArgument("denjoy n must be a positive integer".into()));
    }
    Ok(Arc::new(build_denjoy(
        S::lit(get("alpha", golden_conjugate::<f64>())),
        n as usize,
        S::lit(get("gap_total", 0.5)),
    )?))
}

/// Look up a measure by name on `space`.
///
/// `lebesgue-squared` and `lebesgue-sqrt` push Lebesgue forward under
/// `x -> x^2` and `x -> sqrt(x)` (circle or interval). `denjoy-minimal` is
/// the Cantor measure of the Denjoy map built from `params` (same keys as
/// the `denjoy` system) and `denjoy-collapsed` its image under the
/// staircase. `dirac:x` or `dirac:x,y` is a point mass.
pub fn measure_by_name<S: Scalar>(
    name: &str,
    space: SpaceDescriptor<S>,
    params: &BTreeMap<String, f64>,
) -> Result<MeasureSpec<S>> {
    let one_dim = matches!(space.kind(), SpaceKind::Circle | SpaceKind::Interval);
    let need_circle = |what: &str| -> Result<()> {
        if space.kind() == SpaceKind::Circle {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} lives on the circle, not {}", space.kind())))
        }
    };
    if let Some(rest) = name.strip_prefix("dirac:") {
        let coords: Vec<S> = rest
            .split(',')
            .map(|v| v.trim().parse::<f64>().map(S::lit))
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad dirac coordinates `{rest}`")))?;
        let atom = space.point(&coords)?;
        return make_dirac(space, atom);
    }
    match name {
        "lebesgue" => Ok(make_lebesgue(space)),
        "lebesgue-squared" | "lebesgue-sqrt" if one_dim => {
            let sq: ScalarMap<S> = Arc::new(|x: S| x * x);
            let rt: ScalarMap<S> = Arc::new(|x: S| x.max(S::zero()).sqrt());
            let (phi, inv) = if name == "lebesgue-squared" { (sq, rt) } else { (rt, sq) };
            make_lebesgue(space).monotone_pushforward(name, phi, inv)
        }
        "lebesgue-squared" | "lebesgue-sqrt" => Err(Error::Domain(format!(
            "{name} needs a one-dimensional space, not {}",
            space.kind()
        ))),
        "denjoy-minimal" => {
            need_circle(name)?;
            Ok(make_denjoy_minimal(denjoy_from_params(params)?))
        }
        "denjoy-collapsed" => {
            need_circle(name)?;
            let d = denjoy_from_params::<S>(params)?;
            let h = d.clone();
            Ok(make_denjoy_minimal(d).pushforward(
                name,
                SpaceDescriptor::circle(),
                Arc::new(move |p: &Point<S>| Point::circle(h.staircase(p.x()))),
            ))
        }
        other => Err(Error::UnknownName {
            kind: "measure",
            name: other.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lebesgue_ball_masses() {
        let c = make_lebesgue(SpaceDescriptor::<f64>::circle());
        assert!((c.ball_mass(&Point::circle(0.3), 0.05).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(c.ball_mass(&Point::circle(0.3), 0.6).unwrap(), 1.0);
        let t = make_lebesgue(SpaceDescriptor::<f64>::torus2());
        assert!((t.ball_mass(&Point::torus(0.2, 0.9), 0.1).unwrap() - 0.02).abs() < 1e-15);
        let i = make_lebesgue(SpaceDescriptor::<f64>::interval());
        assert!((i.ball_mass(&Point::interval(0.05), 0.1).unwrap() - 0.15).abs() < 1e-15);
    }

    #[test]
    fn dirac_is_a_point_mass() {
        let d = measure_by_name::<f64>("dirac:0.5", SpaceDescriptor::circle(), &BTreeMap::new()).unwrap();
        let batch = sample(&d, 3, 100).unwrap();
        assert!(batch.points.iter().all(|p| p.x() == 0.5));
        assert!(!d.nonatomic);
        assert_eq!(d.ball_mass(&Point::circle(0.55), 0.05), Some(1.0));
        assert_eq!(d.ball_mass(&Point::circle(0.7), 0.05), Some(0.0));
    }

    #[test]
    fn unknown_measure() {
        let e = measure_by_name::<f64>("nosuch", SpaceDescriptor::circle(), &BTreeMap::new()).unwrap_err();
        assert!(matches!(e, Error::UnknownName { .. }));
        assert!(measure_by_name::<f64>("denjoy-minimal", SpaceDescriptor::torus2(), &BTreeMap::new()).is_err());
        assert!(measure_by_name::<f64>("dirac:2,3", SpaceDescriptor::circle(), &BTreeMap::new()).is_err());
    }
}
