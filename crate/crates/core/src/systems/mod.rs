//! Dynamical systems: maps on the spaces of [`geometry`](crate::geometry),
//! their iterates, powers and conjugates.

mod denjoy;
mod linear;
mod zoo;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use denjoy::{build_denjoy, DenjoyConstruction, DenjoyMap, Gap};
pub use linear::{linear_gamma_zero, GammaZeroClass, LinearMapSpec};
pub use zoo::{
    golden_conjugate, make_zoo, system_by_name, zoo_names, CatMap, Doubling, Identity,
    IntervalSquare, Rotation, Tent,
};

use crate::error::{Error, Result};
use crate::geometry::{Point, SpaceDescriptor};
use crate::scalar::Scalar;

/// A map `f: X -> X` with optional inverse and derivative.
pub trait DynamicalMap<S: Scalar>: Send + Sync {
    fn forward(&self, p: &Point<S>) -> Point<S>;

    fn inverse(&self, _p: &Point<S>) -> Option<Point<S>> {
        None
    }

    fn has_inverse(&self) -> bool {
        false
    }

    fn jacobian(&self, _p: &Point<S>) -> Option<DMatrix<S>> {
        None
    }

    fn has_jacobian(&self) -> bool {
        false
    }
}

/// Plain point-to-point function, used for conjugacies and pushforwards.
pub type PointMap<S> = Arc<dyn Fn(&Point<S>) -> Point<S> + Send + Sync>;

/// Which side of the expansiveness verdict a system is known to fall on
/// for its canonical measure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedBehaviour {
    Expansive,
    NotExpansive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemMeta {
    /// Name of the measure the expectation refers to.
    pub canonical_measure: String,
    pub expected: Option<ExpectedBehaviour>,
    /// Known topological entropy, for the variational bound.
    pub topological_entropy: Option<f64>,
}

#[derive(Clone)]
pub struct SystemSpec<S: Scalar> {
    pub name: String,
    pub space: SpaceDescriptor<S>,
    pub isometry: bool,
    pub params: BTreeMap<String, f64>,
    pub meta: SystemMeta,
    map: Arc<dyn DynamicalMap<S>>,
}

impl<S: Scalar> fmt::Debug for SystemSpec<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SystemSpec")
            .field("name", &self.name)
            .field("space", &self.space.kind())
            .field("invertible", &self.invertible())
            .field("isometry", &self.isometry)
            .field("params", &self.params)
            .finish()
    }
}

impl<S: Scalar> SystemSpec<S> {
    pub fn new(
        name: impl Into<String>,
        space: SpaceDescriptor<S>,
        map: Arc<dyn DynamicalMap<S>>,
    ) -> Self {
        Self {
            name: name.into(),
            space,
            isometry: false,
            params: BTreeMap::new(),
            meta: SystemMeta {
                canonical_measure: "lebesgue".into(),
                expected: None,
                topological_entropy: None,
            },
            map,
        }
    }

    pub fn with_isometry(mut self, isometry: bool) -> Self {
        self.isometry = isometry;
        self
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_meta(mut self, meta: SystemMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn invertible(&self) -> bool {
        self.map.has_inverse()
    }

    pub fn has_jacobian(&self) -> bool {
        self.map.has_jacobian()
    }

    pub fn map(&self) -> &Arc<dyn DynamicalMap<S>> {
        &self.map
    }

    #[inline]
    pub fn forward(&self, p: &Point<S>) -> Point<S> {
        self.map.forward(p)
    }

    pub fn inverse(&self, p: &Point<S>) -> Result<Point<S>> {
        self.map
            .inverse(p)
            .ok_or_else(|| Error::Capability(format!("system `{}` has no inverse", self.name)))
    }

    pub fn jacobian(&self, p: &Point<S>) -> Result<DMatrix<S>> {
        self.map
            .jacobian(p)
            .ok_or_else(|| Error::Capability(format!("system `{}` has no jacobian", self.name)))
    }

    /// `f^n(x)`; negative `n` requires an inverse.
    pub fn iterate(&self, x: &Point<S>, n: i64) -> Result<Point<S>> {
        if !self.space.contains(x) {
            return Err(Error::Domain(format!(
                "point {x} is not in the space of `{}`",
                self.name
            )));
        }
        if n < 0 && !self.invertible() {
            return Err(Error::Capability(format!(
                "negative iterate of non-invertible system `{}`",
                self.name
            )));
        }
        let mut p = *x;
        if n >= 0 {
            for _ in 0..n {
                p = self.map.forward(&p);
            }
        } else {
            for _ in 0..(-n) {
                p = self.inverse(&p)?;
            }
        }
        Ok(p)
    }

    /// The `k`-th power `f^k` as a system of its own.
    pub fn power(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("power must be at least 1".into()));
        }
        let mut params = self.params.clone();
        params.insert("power".into(), f64::from(k));
        Ok(Self {
            name: format!("{}^{k}", self.name),
            space: self.space,
            isometry: self.isometry,
            params,
            meta: SystemMeta {
                canonical_measure: self.meta.canonical_measure.clone(),
                expected: self.meta.expected,
                topological_entropy: self.meta.topological_entropy.map(|h| h * f64::from(k)),
            },
            map: Arc::new(Power {
                base: self.map.clone(),
                k,
            }),
        })
    }

    /// `phi ∘ f ∘ phi^{-1}` for a homeomorphism `phi` of the same space.
    pub fn conjugate(&self, name: &str, phi: PointMap<S>, phi_inv: PointMap<S>) -> Self {
        Self {
            name: name.to_string(),
            space: self.space,
            isometry: false,
            params: self.params.clone(),
            meta: SystemMeta {
                canonical_measure: format!("pushforward({})", self.meta.canonical_measure),
                expected: self.meta.expected,
                topological_entropy: self.meta.topological_entropy,
            },
            map: Arc::new(Conjugated {
                base: self.map.clone(),
                phi,
                phi_inv,
            }),
        }
    }
}

struct Power<S: Scalar> {
    base: Arc<dyn DynamicalMap<S>>,
    k: u32,
}

impl<S: Scalar> DynamicalMap<S> for Power<S> {
    fn forward(&self, p: &Point<S>) -> Point<S> {
        let mut q = *p;
        for _ in 0..self.k {
            q = self.base.forward(&q);
        }
        q
    }

    fn inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        let mut q = *p;
        for _ in 0..self.k {
            q = self.base.inverse(&q)?;
        }
        Some(q)
    }

    fn has_inverse(&self) -> bool {
        self.base.has_inverse()
    }

    fn jacobian(&self, p: &Point<S>) -> Option<DMatrix<S>> {
        let mut q = *p;
        let mut acc = self.base.jacobian(&q)?;
        for _ in 1..self.k {
            q = self.base.forward(&q);
            acc = self.base.jacobian(&q)? * acc;
        }
        Some(acc)
    }

    fn has_jacobian(&self) -> bool {
        self.base.has_jacobian()
    }
}

struct Conjugated<S: Scalar> {
    base: Arc<dyn DynamicalMap<S>>,
    phi: PointMap<S>,
    phi_inv: PointMap<S>,
}

impl<S: Scalar> DynamicalMap<S> for Conjugated<S> {
    fn forward(&self, p: &Point<S>) -> Point<S> {
        (self.phi)(&self.base.forward(&(self.phi_inv)(p)))
    }

    fn inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        Some((self.phi)(&self.base.inverse(&(self.phi_inv)(p))?))
    }

    fn has_inverse(&self) -> bool {
        self.base.has_inverse()
    }
}

/// `|det(Df(x))|` evaluated in `f64`.
pub fn abs_det<S: Scalar>(m: &DMatrix<S>) -> f64 {
    m.map(|v| v.as_f64()).determinant().abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iterate_examples() {
        let rot = Rotation::system(0.25_f64);
        let p = rot.iterate(&Point::circle(0.1), 2).unwrap();
        assert!((p.x() - 0.6).abs() < 1e-15);

        let dbl = Doubling::system::<f64>();
        let p = dbl.iterate(&Point::circle(1.0 / 3.0), 2).unwrap();
        assert!((p.x() - 1.0 / 3.0).abs() < 1e-15);

        let cat = CatMap::system::<f64>();
        let p = cat.iterate(&Point::torus(0.0, 0.0), 5).unwrap();
        assert_eq!(p.coords(), &[0.0, 0.0]);

        let id = Identity::system(SpaceDescriptor::<f64>::circle());
        assert_eq!(id.iterate(&Point::circle(0.3), 0).unwrap().x(), 0.3);
    }

    #[test]
    fn negative_iterate_needs_inverse() {
        let dbl = Doubling::system::<f64>();
        assert!(matches!(
            dbl.iterate(&Point::circle(0.2), -1),
            Err(Error::Capability(_))
        ));
        let rot = Rotation::system(0.25_f64);
        let p = rot.iterate(&Point::circle(0.1), -1).unwrap();
        assert!((p.x() - 0.85).abs() < 1e-15);
    }

    #[test]
    fn power_and_its_jacobian() {
        let dbl = Doubling::system::<f64>().power(2).unwrap();
        assert_eq!(dbl.name, "doubling^2");
        let p = dbl.forward(&Point::circle(0.1));
        assert!((p.x() - 0.4).abs() < 1e-15);
        assert_eq!(abs_det(&dbl.jacobian(&Point::circle(0.1)).unwrap()), 4.0);
        assert!(Doubling::system::<f64>().power(0).is_err());
    }

    #[test]
    fn conjugate_by_square_map() {
        let dbl = Doubling::system::<f64>();
        let phi: PointMap<f64> = Arc::new(|p: &Point<f64>| Point::circle(p.x() * p.x()));
        let phi_inv: PointMap<f64> = Arc::new(|p: &Point<f64>| Point::circle(p.x().sqrt()));
        let g = dbl.conjugate("doubling-conj", phi, phi_inv);
        // g(y) = (2 sqrt(y) mod 1)^2
        let y = 0.09;
        let expected = (2.0_f64 * 0.3).powi(2);
        assert!((g.forward(&Point::circle(y)).x() - expected).abs() < 1e-12);
    }
}
