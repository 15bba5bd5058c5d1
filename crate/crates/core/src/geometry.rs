//! Compact metric spaces, points and balls.
//!
//! Circle and 2-torus coordinates live in `[0, 1)` and use the quotient
//! metric `min(|u|, 1 - |u|)` per coordinate. Multi-dimensional spaces use
//! the sum metric over coordinates.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{frac, Scalar};

/// Largest supported dimension of a [`SpaceDescriptor`].
pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Circle,
    Interval,
    Torus2,
    Box,
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SpaceKind::Circle => "circle",
            SpaceKind::Interval => "interval",
            SpaceKind::Torus2 => "torus2",
            SpaceKind::Box => "box",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceDescriptor<S> {
    kind: SpaceKind,
    dim: u8,
    lower: [S; MAX_DIM],
    upper: [S; MAX_DIM],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<S> {
    coords: [S; MAX_DIM],
    dim: u8,
    kind: SpaceKind,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ball<S> {
    pub center: Point<S>,
    pub radius: S,
    pub closed: bool,
}

impl<S: Scalar> SpaceDescriptor<S> {
    fn unit(kind: SpaceKind, dim: u8) -> Self {
        let mut upper = [S::zero(); MAX_DIM];
        for u in upper.iter_mut().take(dim as usize) {
            *u = S::one();
        }
        Self {
            kind,
            dim,
            lower: [S::zero(); MAX_DIM],
            upper,
        }
    }

    pub fn circle() -> Self {
        Self::unit(SpaceKind::Circle, 1)
    }

    pub fn interval() -> Self {
        Self::unit(SpaceKind::Interval, 1)
    }

    pub fn torus2() -> Self {
        Self::unit(SpaceKind::Torus2, 2)
    }

    /// Axis-aligned product of closed intervals with the sum metric.
    pub fn boxed(bounds: &[(S, S)]) -> Result<Self> {
        if bounds.is_empty() || bounds.len() > MAX_DIM {
            return Err(Error::InvalidArgument(format!(
                "box dimension must be in 1..={MAX_DIM}, got {}",
                bounds.len()
            )));
        }
        let mut lower = [S::zero(); MAX_DIM];
        let mut upper = [S::zero(); MAX_DIM];
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "box side {i} must satisfy lo < hi"
                )));
            }
            lower[i] = lo;
            upper[i] = hi;
        }
        Ok(Self {
            kind: SpaceKind::Box,
            dim: bounds.len() as u8,
            lower,
            upper,
        })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn bounds(&self) -> Vec<(S, S)> {
        (0..self.dim()).map(|i| (self.lower[i], self.upper[i])).collect()
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.kind, SpaceKind::Circle | SpaceKind::Torus2)
    }

    /// Largest distance between two points.
    pub fn diameter(&self) -> S {
        match self.kind {
            SpaceKind::Circle => S::lit(0.5),
            SpaceKind::Torus2 => S::one(),
            SpaceKind::Interval | SpaceKind::Box => (0..self.dim())
                .map(|i| self.upper[i] - self.lower[i])
                .fold(S::zero(), |a, b| a + b),
        }
    }

    /// Build a point, wrapping periodic coordinates into `[0, 1)`.
    pub fn point(&self, coords: &[S]) -> Result<Point<S>> {
        if coords.len() != self.dim() {
            return Err(Error::Domain(format!(
                "{} expects {} coordinates, got {}",
                self.kind,
                self.dim(),
                coords.len()
            )));
        }
        let mut c = [S::zero(); MAX_DIM];
        for (i, &v) in coords.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Domain("non-finite coordinate".into()));
            }
            c[i] = if self.is_periodic() {
                frac(v)
            } else {
                if v < self.lower[i] || v > self.upper[i] {
                    return Err(Error::Domain(format!(
                        "coordinate {v} outside [{}, {}]",
                        self.lower[i], self.upper[i]
                    )));
                }
                v
            };
        }
        Ok(Point {
            coords: c,
            dim: self.dim,
            kind: self.kind,
        })
    }

    /// Like [`point`](Self::point) but clamps non-periodic coordinates into
    /// the bounds instead of failing. Used by maps to absorb rounding.
    #[inline]
    pub fn project(&self, coords: [S; MAX_DIM]) -> Point<S> {
        let mut c = coords;
        for i in 0..self.dim() {
            c[i] = if self.is_periodic() {
                frac(c[i])
            } else {
                c[i].max(self.lower[i]).min(self.upper[i])
            };
        }
        Point {
            coords: c,
            dim: self.dim,
            kind: self.kind,
        }
    }

    pub fn contains(&self, p: &Point<S>) -> bool {
        p.kind == self.kind
            && p.dim == self.dim
            && (0..self.dim()).all(|i| {
                let v = p.coords[i];
                if self.is_periodic() {
                    v >= S::zero() && v < S::one()
                } else {
                    v >= self.lower[i] && v <= self.upper[i]
                }
            })
    }

    /// Metric without tag checks, for inner loops over points already known
    /// to belong to this space.
    #[inline]
    pub fn dist(&self, x: &Point<S>, y: &Point<S>) -> S {
        let mut total = S::zero();
        for i in 0..self.dim() {
            let u = (x.coords[i] - y.coords[i]).abs();
            total = total
                + if self.is_periodic() {
                    u.min(S::one() - u)
                } else {
                    u
                };
        }
        total
    }

    /// Checked metric.
    pub fn distance(&self, x: &Point<S>, y: &Point<S>) -> Result<S> {
        for p in [x, y] {
            if p.kind != self.kind || p.dim != self.dim {
                return Err(Error::Domain(format!(
                    "point from {} used in {}",
                    p.kind, self.kind
                )));
            }
        }
        Ok(self.dist(x, y))
    }

    pub fn ball(&self, center: Point<S>, radius: S, closed: bool) -> Result<Ball<S>> {
        if !self.contains(&center) {
            return Err(Error::Domain(format!("ball center not in {}", self.kind)));
        }
        if !(radius > S::zero()) {
            return Err(Error::InvalidArgument("ball radius must be positive".into()));
        }
        Ok(Ball {
            center,
            radius,
            closed,
        })
    }

    /// Ball membership. Distances within a few ulps of the radius count as
    /// lying on the sphere, so decimal inputs such as `B(0.5, 0.1)` and
    /// `0.6` behave as they do over the reals.
    pub fn ball_contains(&self, b: &Ball<S>, y: &Point<S>) -> Result<bool> {
        let d = self.distance(&b.center, y)?;
        let tol = S::epsilon() * S::lit(8.0) * b.radius.max(S::one());
        Ok(if b.closed {
            d <= b.radius + tol
        } else {
            d < b.radius - tol
        })
    }

    /// Cell centers of a regular grid with about `count` points, and the
    /// largest distance from any point of the space to its nearest grid point.
    pub fn grid(&self, count: usize) -> (Vec<Point<S>>, S) {
        let d = self.dim();
        let per_axis = ((count.max(1) as f64).powf(1.0 / d as f64)).ceil().max(1.0) as usize;
        let m = S::from_usize(per_axis).unwrap();
        let half = S::lit(0.5);
        let mut idx = vec![0usize; d];
        let mut out = Vec::with_capacity(per_axis.pow(d as u32));
        loop {
            let mut c = [S::zero(); MAX_DIM];
            for a in 0..d {
                let step = (self.upper[a] - self.lower[a]) / m;
                c[a] = self.lower[a] + (S::from_usize(idx[a]).unwrap() + half) * step;
            }
            out.push(self.project(c));
            let mut a = 0;
            loop {
                if a == d {
                    let mesh = (0..d)
                        .map(|i| (self.upper[i] - self.lower[i]) / (m + m))
                        .fold(S::zero(), |x, y| x + y);
                    return (out, mesh);
                }
                idx[a] += 1;
                if idx[a] < per_axis {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
        }
    }

    /// A conservative Lebesgue number of a finite cover by balls.
    ///
    /// Each grid probe `p` gets the margin `max_A (r_A - d(c_A, p))`; any
    /// closed ball around `p` with radius below the margin sits inside some
    /// cover element. The margin is 1-Lipschitz in `p`, so subtracting the
    /// grid mesh turns the minimum over probes into a bound valid for every
    /// point of the space.
    pub fn lebesgue_number(&self, cover: &[Ball<S>], probe_count: usize) -> Result<S> {
        if cover.is_empty() {
            return Err(Error::NotACover("empty cover".into()));
        }
        for b in cover {
            if !self.contains(&b.center) {
                return Err(Error::Domain("cover ball from a different space".into()));
            }
        }
        let (probes, mesh) = self.grid(probe_count);
        let mut worst = S::infinity();
        for p in &probes {
            let margin = cover
                .iter()
                .map(|b| b.radius - self.dist(&b.center, p))
                .fold(S::neg_infinity(), |a, b| a.max(b));
            if margin <= S::zero() {
                return Err(Error::NotACover(format!("{:?}", p.to_f64_vec())));
            }
            worst = worst.min(margin);
        }
        let delta = worst - mesh;
        if delta <= S::zero() {
            return Err(Error::NotACover(format!(
                "probe grid of {} points too coarse to certify the cover",
                probes.len()
            )));
        }
        Ok(delta)
    }
}

impl<S: Scalar> Point<S> {
    pub fn circle(x: S) -> Self {
        SpaceDescriptor::circle().project([x, S::zero(), S::zero(), S::zero()])
    }

    /// Interval point; panics outside `[0, 1]`.
    pub fn interval(x: S) -> Self {
        SpaceDescriptor::interval().point(&[x]).expect("x in [0, 1]")
    }

    pub fn torus(x: S, y: S) -> Self {
        SpaceDescriptor::torus2().project([x, y, S::zero(), S::zero()])
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[S] {
        &self.coords[..self.dim as usize]
    }

    /// Raw coordinate array, padded with zeros beyond `dim`.
    #[inline]
    pub fn raw(&self) -> [S; MAX_DIM] {
        self.coords
    }

    /// First coordinate.
    #[inline]
    pub fn x(&self) -> S {
        self.coords[0]
    }

    pub fn to_f64_vec(&self) -> Vec<f64> {
        self.coords().iter().map(|v| v.as_f64()).collect()
    }
}

impl<S: Scalar> fmt::Display for Point<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        let c = SpaceDescriptor::<f64>::circle();
        let d = c.distance(&Point::circle(0.1), &Point::circle(0.9)).unwrap();
        assert!((d - 0.2).abs() < 1e-15);

        let i = SpaceDescriptor::<f64>::interval();
        assert_eq!(
            i.distance(&Point::interval(0.0), &Point::interval(1.0)).unwrap(),
            1.0
        );

        let t = SpaceDescriptor::<f64>::torus2();
        let d = t
            .distance(&Point::torus(0.0, 0.0), &Point::torus(0.5, 0.5))
            .unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn mismatched_spaces_are_a_domain_error() {
        let c = SpaceDescriptor::<f64>::circle();
        let err = c
            .distance(&Point::circle(0.1), &Point::interval(0.2))
            .unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn ball_membership_examples() {
        let i = SpaceDescriptor::<f64>::interval();
        let closed = i.ball(Point::interval(0.5), 0.1, true).unwrap();
        let open = i.ball(Point::interval(0.5), 0.1, false).unwrap();
        assert!(i.ball_contains(&closed, &Point::interval(0.6)).unwrap());
        assert!(!i.ball_contains(&open, &Point::interval(0.6)).unwrap());

        let c = SpaceDescriptor::<f64>::circle();
        let b = c.ball(Point::circle(0.95), 0.1, true).unwrap();
        assert!(c.ball_contains(&b, &Point::circle(0.02)).unwrap());
    }

    #[test]
    fn points_outside_bounds_are_rejected() {
        let i = SpaceDescriptor::<f64>::interval();
        assert!(i.point(&[1.5]).is_err());
        let c = SpaceDescriptor::<f64>::circle();
        assert_eq!(c.point(&[1.25]).unwrap().x(), 0.25);
        let b = SpaceDescriptor::<f64>::boxed(&[(0.0, 2.0), (-1.0, 1.0)]).unwrap();
        assert!(b.point(&[1.0, 0.5]).is_ok());
        assert!(b.point(&[1.0, 1.5]).is_err());
        assert!(SpaceDescriptor::<f64>::boxed(&[(1.0, 0.0)]).is_err());
    }

    #[test]
    fn diameters() {
        assert_eq!(SpaceDescriptor::<f64>::circle().diameter(), 0.5);
        assert_eq!(SpaceDescriptor::<f64>::torus2().diameter(), 1.0);
        let b = SpaceDescriptor::<f64>::boxed(&[(0.0, 2.0), (-1.0, 1.0)]).unwrap();
        assert_eq!(b.diameter(), 4.0);
    }

    fn circle_cover(step: f64, radius: f64) -> Vec<Ball<f64>> {
        let c = SpaceDescriptor::<f64>::circle();
        let n = (1.0 / step).round() as usize;
        (0..n)
            .map(|i| c.ball(Point::circle(i as f64 * step), radius, false).unwrap())
            .collect()
    }

    #[test]
    fn lebesgue_number_examples() {
        let c = SpaceDescriptor::<f64>::circle();
        let delta = c.lebesgue_number(&circle_cover(0.1, 0.2), 1000).unwrap();
        assert!(delta >= 0.1 && delta <= 0.15, "{delta}");

        let i = SpaceDescriptor::<f64>::interval();
        let whole = vec![i.ball(Point::interval(0.5), 1.0, false).unwrap()];
        assert!(i.lebesgue_number(&whole, 1000).unwrap() >= 0.4);

        let two = vec![
            i.ball(Point::interval(0.25), 0.3, false).unwrap(),
            i.ball(Point::interval(0.75), 0.3, false).unwrap(),
        ];
        let delta = i.lebesgue_number(&two, 1000).unwrap();
        assert!(delta > 0.0 && delta <= 0.3);
    }

    #[test]
    fn non_cover_is_rejected() {
        let i = SpaceDescriptor::<f64>::interval();
        let gap = vec![
            i.ball(Point::interval(0.1), 0.2, false).unwrap(),
            i.ball(Point::interval(0.9), 0.2, false).unwrap(),
        ];
        assert!(matches!(
            i.lebesgue_number(&gap, 500),
            Err(Error::NotACover(_))
        ));
    }

    #[test]
    fn grid_mesh_on_torus() {
        let t = SpaceDescriptor::<f64>::torus2();
        let (pts, mesh) = t.grid(100);
        assert_eq!(pts.len(), 100);
        assert!((mesh - 0.1).abs() < 1e-12);
    }
}
