//! The concrete systems used by the estimators and the theorem battery.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{build_denjoy, DynamicalMap, ExpectedBehaviour, SystemMeta, SystemSpec};
use crate::error::{Error, Result};
use crate::geometry::{Point, SpaceDescriptor, MAX_DIM};
use crate::scalar::{frac, Scalar};

/// `(sqrt(5) - 1) / 2`, the default irrational rotation number.
pub fn golden_conjugate<S: Scalar>() -> S {
    (S::lit(5.0).sqrt() - S::one()) / S::lit(2.0)
}

fn meta(expected: ExpectedBehaviour, h_top: f64) -> SystemMeta {
    SystemMeta {
        canonical_measure: "lebesgue".into(),
        expected: Some(expected),
        topological_entropy: Some(h_top),
    }
}

fn scalar_jacobian<S: Scalar>(v: S) -> DMatrix<S> {
    DMatrix::from_element(1, 1, v)
}

pub struct Identity;

struct IdentityMap<S: Scalar>(SpaceDescriptor<S>);

impl<S: Scalar> DynamicalMap<S> for IdentityMap<S> {
    fn forward(&self, p: &Point<S>) -> Point<S> {
        *p
    }
    fn inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        Some(*p)
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn jacobian(&self, _p: &Point<S>) -> Option<DMatrix<S>> {
        Some(DMatrix::identity(self.0.dim(), self.0.dim()))
    }
    fn has_jacobian(&self) -> bool {
        true
    }
}

impl Identity {
    pub fn system<S: Scalar>(space: SpaceDescriptor<S>) -> SystemSpec<S> {
        SystemSpec::new("identity", space, Arc::new(IdentityMap(space)))
            .with_isometry(true)
            .with_meta(meta(ExpectedBehaviour::NotExpansive, 0.0))
    }
}

/// Circle rotation `x -> x + alpha (mod 1)`.
pub struct Rotation;

struct RotationMap<S> {
    alpha: S,
}

impl<S: Scalar> DynamicalMap<S> for RotationMap<S> {
    #[inline]
    fn forward(&self, p: &Point<S>) -> Point<S> {
        Point::circle(p.x() + self.alpha)
    }
    fn inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        Some(Point::circle(p.x() - self.alpha))
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn jacobian(&self, _p: &Point<S>) -> Option<DMatrix<S>> {
        Some(scalar_jacobian(S::one()))
    }
    fn has_jacobian(&self) -> bool {
        true
    }
}

impl Rotation {
    pub fn system<S: Scalar>(alpha: S) -> SystemSpec<S> {
        let alpha = frac(alpha);
        SystemSpec::new(
            "rotation",
            SpaceDescriptor::circle(),
            Arc::new(RotationMap { alpha }),
        )
        .with_isometry(true)
        .with_param("alpha", alpha.as_f64())
        .with_meta(meta(ExpectedBehaviour::NotExpansive, 0.0))
    }
}

/// `x -> 2x (mod 1)` on the circle.
pub struct Doubling;

struct DoublingMap;

impl<S: Scalar> DynamicalMap<S> for DoublingMap {
    #[inline]
    fn forward(&self, p: &Point<S>) -> Point<S> {
        Point::circle(p.x() + p.x())
    }
    fn jacobian(&self, _p: &Point<S>) -> Option<DMatrix<S>> {
        Some(scalar_jacobian(S::lit(2.0)))
    }
    fn has_jacobian(&self) -> bool {
        true
    }
}

impl Doubling {
    pub fn system<S: Scalar>() -> SystemSpec<S> {
        SystemSpec::new("doubling", SpaceDescriptor::circle(), Arc::new(DoublingMap))
            .with_meta(meta(ExpectedBehaviour::Expansive, std::f64::consts::LN_2))
    }
}

/// The hyperbolic toral automorphism `[[2, 1], [1, 1]]`.
pub struct CatMap;

struct CatMapImpl;

impl<S: Scalar> DynamicalMap<S> for CatMapImpl {
    #[inline]
    fn forward(&self, p: &Point<S>) -> Point<S> {
        let [x, y, ..] = p.raw();
        Point::torus(x + x + y, x + y)
    }
    fn inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        let [x, y, ..] = p.raw();
        Some(Point::torus(x - y, y + y - x))
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn jacobian(&self, _p: &Point<S>) -> Option<DMatrix<S>> {
        Some(DMatrix::from_row_slice(
            2,
            2,
            &[S::lit(2.0), S::one(), S::one(), S::one()],
        ))
    }
    fn has_jacobian(&self) -> bool {
        true
    }
}

impl CatMap {
    pub fn system<S: Scalar>() -> SystemSpec<S> {
        let golden = (3.0 + 5.0_f64.sqrt()) / 2.0;
        SystemSpec::new("cat", SpaceDescriptor::torus2(), Arc::new(CatMapImpl))
            .with_meta(meta(ExpectedBehaviour::Expansive, golden.ln()))
    }
}

/// `x -> x^2` on `[0, 1]`; fixed points 0 and 1.
pub struct IntervalSquare;

struct IntervalSquareMap;

impl<S: Scalar> DynamicalMap<S> for IntervalSquareMap {
    #[inline]
    fn forward(&self, p: &Point<S>) -> Point<S> {
        let x = p.x();
        interval_point(x * x)
    }
    fn inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        Some(interval_point(p.x().sqrt()))
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn jacobian(&self, p: &Point<S>) -> Option<DMatrix<S>> {
        Some(scalar_jacobian(p.x() + p.x()))
    }
    fn has_jacobian(&self) -> bool {
        true
    }
}

#[inline]
fn interval_point<S: Scalar>(x: S) -> Point<S> {
    let mut c = [S::zero(); MAX_DIM];
    c[0] = x;
    SpaceDescriptor::interval().project(c)
}

impl IntervalSquare {
    pub fn system<S: Scalar>() -> SystemSpec<S> {
        SystemSpec::new(
            "interval-square",
            SpaceDescriptor::interval(),
            Arc::new(IntervalSquareMap),
        )
        .with_meta(meta(ExpectedBehaviour::NotExpansive, 0.0))
    }
}

/// The tent map `x -> 1 - |2x - 1|` on `[0, 1]`.
pub struct Tent;

struct TentMap;

impl<S: Scalar> DynamicalMap<S> for TentMap {
    #[inline]
    fn forward(&self, p: &Point<S>) -> Point<S> {
        let two = S::lit(2.0);
        interval_point(S::one() - (two * p.x() - S::one()).abs())
    }
    fn jacobian(&self, p: &Point<S>) -> Option<DMatrix<S>> {
        let slope = if p.x() < S::lit(0.5) {
            S::lit(2.0)
        } else {
            S::lit(-2.0)
        };
        Some(scalar_jacobian(slope))
    }
    fn has_jacobian(&self) -> bool {
        true
    }
}

impl Tent {
    pub fn system<S: Scalar>() -> SystemSpec<S> {
        SystemSpec::new("tent", SpaceDescriptor::interval(), Arc::new(TentMap))
            .with_meta(meta(ExpectedBehaviour::Expansive, std::f64::consts::LN_2))
    }
}

pub fn zoo_names() -> &'static [&'static str] {
    &[
        "identity",
        "rotation",
        "doubling",
        "cat",
        "interval-square",
        "denjoy",
        "tent",
    ]
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Look up a zoo system by name. Recognised parameters: `alpha` for
/// `rotation` and `denjoy`; `n` and `gap_total` for `denjoy`.
pub fn system_by_name<S: Scalar>(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<SystemSpec<S>> {
    let golden = golden_conjugate::<f64>();
    let allowed: &[&str] = match name {
        "rotation" => &["alpha"],
        "denjoy" => &["alpha", "n", "gap_total"],
        _ => &[],
    };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::InvalidArgument(format!(
            "system `{name}` does not take parameter `{k}`"
        )));
    }
    Ok(match name {
        "identity" => Identity::system(SpaceDescriptor::circle()),
        "rotation" => Rotation::system(S::lit(param(params, "alpha", golden))),
        "doubling" => Doubling::system(),
        "cat" => CatMap::system(),
        "interval-square" => IntervalSquare::system(),
        "tent" => Tent::system(),
        "denjoy" => {
            let n = param(params, "n", 64.0);
            if n < 1.0 || n.fract() != 0.0 {
                return Err(Error::InvalidArgument("denjoy n must be a positive integer".into()));
            }
            build_denjoy(
                S::lit(param(params, "alpha", golden)),
                n as usize,
                S::lit(param(params, "gap_total", 0.5)),
            )?
            .system()
        }
        other => {
            return Err(Error::UnknownName {
                kind: "system",
                name: other.to_string(),
            })
        }
    })
}

/// Every zoo system with default parameters.
pub fn make_zoo<S: Scalar>() -> Vec<SystemSpec<S>> {
    zoo_names()
        .iter()
        .map(|n| system_by_name(n, &BTreeMap::new()).expect("zoo defaults are valid"))
        .collect()
}
