//! A piecewise-affine Denjoy circle homeomorphism.
//!
//! The orbit `{k alpha}` of an irrational rotation is blown up into gaps
//! `I_k` of length `l_k ~ 1 / ((|k| + 2)(|k| + 3))` for `|k| <= N`. The map
//! sends `I_k` affinely onto `I_{k+1}` and translates the remainder, so the
//! staircase `h` collapsing every gap semi-conjugates it to the rotation.
//!
//! Truncation leaves two loose ends: `I_N` has no successor and `I_{-N}` no
//! predecessor. They are tied off with two "ghost" intervals of width
//! `eta` placed at the staircase preimages of `(N + 1) alpha` and
//! `-(N + 1) alpha`: `I_N` is squeezed onto the first and the second is
//! stretched onto `I_{-N}`. Away from the ghosts the map is an exact
//! translation on the remainder and `h ∘ D = R_alpha ∘ h` up to `eta`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::{DynamicalMap, ExpectedBehaviour, SystemMeta, SystemSpec};
use crate::error::{Error, Result};
use crate::geometry::{Point, SpaceDescriptor};
use crate::scalar::{frac, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gap<S> {
    pub index: i64,
    /// Rotation coordinate the gap collapses to.
    pub t: S,
    pub left: S,
    pub right: S,
}

impl<S: Scalar> Gap<S> {
    pub fn len(&self) -> S {
        self.right - self.left
    }
}

/// Increasing degree-one circle map, affine between nodes.
///
/// `ys` is a lift of the node images: strictly increasing with
/// `ys[last] < ys[0] + 1`.
#[derive(Clone, Debug)]
pub struct DenjoyMap<S> {
    xs: Vec<S>,
    ys: Vec<S>,
}

impl<S: Scalar> DenjoyMap<S> {
    fn new(mut nodes: Vec<(S, S)>) -> Result<Self> {
        nodes.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite nodes"));
        let xs: Vec<S> = nodes.iter().map(|n| n.0).collect();
        let mut ys: Vec<S> = Vec::with_capacity(nodes.len());
        for &(_, y) in &nodes {
            let mut y = y;
            if let Some(&prev) = ys.last() {
                while y <= prev {
                    y = y + S::one();
                }
            }
            ys.push(y);
        }
        let strictly_increasing = xs.windows(2).all(|w| w[0] < w[1]);
        let degree_one = ys[ys.len() - 1] < ys[0] + S::one();
        if !strictly_increasing || !degree_one || xs[0] < S::zero() || xs[xs.len() - 1] >= S::one() {
            return Err(Error::Construction(
                "breakpoints do not define an increasing circle homeomorphism".into(),
            ));
        }
        Ok(Self { xs, ys })
    }

    /// Segment containing `x` in `[0, 1)` as (x0, x1, y0, y1), with `x`
    /// shifted by one when it precedes the first node.
    #[inline]
    fn segment(&self, x: S) -> (S, S, S, S, S) {
        let m = self.xs.len();
        let i = self.xs.partition_point(|&v| v <= x);
        if i == 0 || i == m {
            let xx = if i == 0 { x + S::one() } else { x };
            (
                xx,
                self.xs[m - 1],
                self.xs[0] + S::one(),
                self.ys[m - 1],
                self.ys[0] + S::one(),
            )
        } else {
            (x, self.xs[i - 1], self.xs[i], self.ys[i - 1], self.ys[i])
        }
    }

    /// Lifted image of `x` in `[0, 1)`.
    #[inline]
    pub fn lift(&self, x: S) -> S {
        let (xx, x0, x1, y0, y1) = self.segment(x);
        let shift = xx - x;
        y0 + (xx - x0) * (y1 - y0) / (x1 - x0) - shift
    }

    #[inline]
    pub fn apply(&self, x: S) -> S {
        frac(self.lift(x))
    }

    pub fn slope(&self, x: S) -> S {
        let (_, x0, x1, y0, y1) = self.segment(x);
        (y1 - y0) / (x1 - x0)
    }

    pub fn apply_inverse(&self, y: S) -> S {
        let m = self.ys.len();
        let base = self.ys[0];
        let yy = base + frac(y - base);
        let i = self.ys.partition_point(|&v| v <= yy);
        let (y0, y1, x0, x1) = if i == m {
            (self.ys[m - 1], base + S::one(), self.xs[m - 1], self.xs[0] + S::one())
        } else {
            (self.ys[i - 1], self.ys[i], self.xs[i - 1], self.xs[i])
        };
        frac(x0 + (yy - y0) * (x1 - x0) / (y1 - y0))
    }

    pub fn nodes(&self) -> impl Iterator<Item = (S, S)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().map(|&y| frac(y)))
    }
}

impl<S: Scalar> DynamicalMap<S> for DenjoyMap<S> {
    #[inline]
    fn forward(&self, p: &Point<S>) -> Point<S> {
        Point::circle(self.apply(p.x()))
    }
    fn inverse(&self, p: &Point<S>) -> Option<Point<S>> {
        Some(Point::circle(self.apply_inverse(p.x())))
    }
    fn has_inverse(&self) -> bool {
        true
    }
    fn jacobian(&self, p: &Point<S>) -> Option<DMatrix<S>> {
        Some(DMatrix::from_element(1, 1, self.slope(p.x())))
    }
    fn has_jacobian(&self) -> bool {
        true
    }
}

#[derive(Clone, Debug)]
pub struct DenjoyConstruction<S: Scalar> {
    pub alpha: S,
    /// Gaps are retained for `|k| <= gap_index_bound`.
    pub gap_index_bound: usize,
    /// Total length of the retained gaps.
    pub gap_total: S,
    /// Width of the two ghost intervals tying off the truncated gap orbit.
    pub ghost_width: S,
    gaps: Vec<Gap<S>>,
    by_t: Vec<usize>,
    map: Arc<DenjoyMap<S>>,
}

/// Build the truncated Denjoy homeomorphism with rotation number `alpha`,
/// gaps `I_k` for `|k| <= n` and total gap length `gap_total`.
pub fn build_denjoy<S: Scalar>(alpha: S, n: usize, gap_total: S) -> Result<DenjoyConstruction<S>> {
    if n < 8 {
        return Err(Error::Construction(format!(
            "gap index bound {n} too small to separate gaps (need >= 8)"
        )));
    }
    if !(alpha > S::zero() && alpha < S::one()) {
        return Err(Error::Construction("alpha must lie in (0, 1)".into()));
    }
    if !(gap_total > S::zero() && gap_total < S::one()) {
        return Err(Error::Construction("gap_total must lie in (0, 1)".into()));
    }
    let ghost_width = S::lit(1e-10).max(S::epsilon() * S::lit(64.0));
    let nn = n as i64;
    // alpha must not be close to p/q for any q that can close up the orbit
    // segment used by the construction
    let resolution = S::lit(1e-6).max(S::lit(100.0) * ghost_width);
    for q in 1..=(2 * nn + 2) {
        let r = frac(S::from_i64(q).unwrap() * alpha);
        if r.min(S::one() - r) < resolution {
            return Err(Error::Construction(format!(
                "alpha is within {} of a rational with denominator {q}",
                resolution
            )));
        }
    }

    let weight = |k: i64| {
        let a = S::from_i64(k.abs() + 2).unwrap();
        S::one() / (a * (a + S::one()))
    };
    let norm = (-nn..=nn).map(weight).fold(S::zero(), |a, b| a + b);
    let scale = gap_total / norm;
    let remainder = S::one() - gap_total;

    let mut gaps: Vec<Gap<S>> = (-nn..=nn)
        .map(|k| Gap {
            index: k,
            t: frac(S::from_i64(k).unwrap() * alpha),
            left: S::zero(),
            right: scale * weight(k),
        })
        .collect();
    let mut by_t: Vec<usize> = (0..gaps.len()).collect();
    by_t.sort_by(|&a, &b| gaps[a].t.partial_cmp(&gaps[b].t).unwrap());
    let mut cumulative = S::zero();
    for &i in &by_t {
        let len = gaps[i].right;
        gaps[i].left = gaps[i].t * remainder + cumulative;
        gaps[i].right = gaps[i].left + len;
        cumulative = cumulative + len;
    }

    let mut c = DenjoyConstruction {
        alpha,
        gap_index_bound: n,
        gap_total,
        ghost_width,
        gaps,
        by_t,
        map: Arc::new(DenjoyMap {
            xs: vec![S::zero()],
            ys: vec![S::zero()],
        }),
    };

    let half = ghost_width / S::lit(2.0);
    let after = c.staircase_inverse(frac(S::from_i64(nn + 1).unwrap() * alpha));
    let before = c.staircase_inverse(frac(-S::from_i64(nn + 1).unwrap() * alpha));
    let mut nodes = Vec::with_capacity(4 * n + 4);
    for k in -nn..=nn {
        let g = *c.gap(k).unwrap();
        let (l, r) = if k < nn {
            let next = c.gap(k + 1).unwrap();
            (next.left, next.right)
        } else {
            (frac(after - half), frac(after + half))
        };
        nodes.push((g.left, l));
        nodes.push((g.right, r));
    }
    let first = *c.gap(-nn).unwrap();
    nodes.push((frac(before - half), first.left));
    nodes.push((frac(before + half), first.right));
    c.map = Arc::new(DenjoyMap::new(nodes)?);
    Ok(c)
}

impl<S: Scalar> DenjoyConstruction<S> {
    pub fn gap(&self, k: i64) -> Option<&Gap<S>> {
        let n = self.gap_index_bound as i64;
        if k.abs() > n {
            None
        } else {
            self.gaps.get((k + n) as usize)
        }
    }

    /// Retained gaps ordered by index `k = -N..=N`.
    pub fn gaps(&self) -> &[Gap<S>] {
        &self.gaps
    }

    pub fn gap_lengths(&self) -> Vec<S> {
        self.gaps.iter().map(Gap::len).collect()
    }

    pub fn smallest_gap(&self) -> S {
        self.gaps
            .iter()
            .map(Gap::len)
            .fold(S::infinity(), |a, b| a.min(b))
    }

    /// Sorted gap endpoints, `2 (2N + 1)` points.
    pub fn breakpoints(&self) -> Vec<S> {
        self.by_t
            .iter()
            .flat_map(|&i| [self.gaps[i].left, self.gaps[i].right])
            .collect()
    }

    pub fn map(&self) -> &Arc<DenjoyMap<S>> {
        &self.map
    }

    /// True when `x` lies in the interior of a retained gap.
    pub fn in_open_gap(&self, x: S) -> bool {
        let j = self.last_gap_starting_before(x);
        let g = &self.gaps[self.by_t[j]];
        x > g.left && x < g.right
    }

    fn last_gap_starting_before(&self, x: S) -> usize {
        // the k = 0 gap starts at position 0
        self.by_t
            .partition_point(|&i| self.gaps[i].left <= x)
            .saturating_sub(1)
    }

    /// The staircase `h`: continuous, nondecreasing, constant on each gap.
    pub fn staircase(&self, x: S) -> S {
        frac(self.staircase_unreduced(frac(x)))
    }

    /// Staircase on `[0, 1)` with values in `[0, 1]`.
    fn staircase_unreduced(&self, x: S) -> S {
        let g = &self.gaps[self.by_t[self.last_gap_starting_before(x)]];
        if x <= g.right {
            g.t
        } else {
            (g.t + (x - g.right) / (S::one() - self.gap_total)).min(S::one())
        }
    }

    /// Lift of the staircase to the real line, `H(x + 1) = H(x) + 1`.
    pub fn staircase_lift(&self, x: S) -> S {
        let base = x.floor();
        base + self.staircase_unreduced(x - base)
    }

    /// Left inverse of the staircase: the left end of the fiber over `t`.
    pub fn staircase_inverse(&self, t: S) -> S {
        let t = frac(t);
        let j = self
            .by_t
            .partition_point(|&i| self.gaps[i].t <= t)
            .saturating_sub(1);
        let g = &self.gaps[self.by_t[j]];
        if t == g.t {
            g.left
        } else {
            frac(g.right + (t - g.t) * (S::one() - self.gap_total))
        }
    }

    /// Largest circle distance between `h(D(p))` and `h(p) + alpha` over the
    /// gap endpoints.
    pub fn semiconjugacy_defect(&self) -> S {
        self.breakpoints()
            .into_iter()
            .map(|p| {
                let lhs = self.staircase(self.map.apply(p));
                let rhs = frac(self.staircase(p) + self.alpha);
                let u = (lhs - rhs).abs();
                u.min(S::one() - u)
            })
            .fold(S::zero(), |a, b| a.max(b))
    }

    /// Birkhoff average of the lift displacement along the orbit of `x0`.
    pub fn rotation_number(&self, x0: S, iterations: usize) -> f64 {
        let mut x = frac(x0);
        let mut total = 0.0_f64;
        for _ in 0..iterations {
            let y = self.map.lift(x);
            total += (y - x).as_f64();
            x = frac(y);
        }
        total / iterations as f64
    }

    pub fn system(&self) -> SystemSpec<S> {
        let mut params = BTreeMap::new();
        params.insert("alpha".to_string(), self.alpha.as_f64());
        params.insert("n".to_string(), self.gap_index_bound as f64);
        params.insert("gap_total".to_string(), self.gap_total.as_f64());
        let mut sys = SystemSpec::new("denjoy", SpaceDescriptor::circle(), self.map.clone())
            .with_meta(SystemMeta {
                canonical_measure: "denjoy-minimal".into(),
                expected: Some(ExpectedBehaviour::Expansive),
                topological_entropy: Some(0.0),
            });
        sys.params = params;
        sys
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::golden_conjugate;

    fn standard() -> DenjoyConstruction<f64> {
        build_denjoy(golden_conjugate(), 64, 0.5).unwrap()
    }

    #[test]
    fn breakpoints_are_strictly_increasing() {
        let d = standard();
        let bp = d.breakpoints();
        assert_eq!(bp.len(), 2 * (2 * 64 + 1));
        assert!(bp.windows(2).all(|w| w[0] < w[1]));
        assert!(bp[0] >= 0.0 && *bp.last().unwrap() < 1.0);
    }

    #[test]
    fn gap_lengths_follow_the_profile() {
        let d = standard();
        let total: f64 = d.gap_lengths().iter().sum();
        assert!((total - 0.5).abs() < 1e-12);
        // l_k (|k|+2)(|k|+3) is the same constant for every k
        let c0 = d.gap(0).unwrap().len() * 6.0;
        for g in d.gaps() {
            let a = (g.index.abs() + 2) as f64;
            assert!((g.len() * a * (a + 1.0) - c0).abs() < 1e-12);
        }
        assert!((d.smallest_gap() - c0 / (66.0 * 67.0)).abs() < 1e-15);
    }

    #[test]
    fn gaps_map_onto_their_successors() {
        let d = standard();
        for k in -64..64 {
            let g = d.gap(k).unwrap();
            let h = d.gap(k + 1).unwrap();
            assert!((d.map().apply(g.left) - h.left).abs() < 1e-12);
            assert!((d.map().apply(g.right) - h.right).abs() < 1e-12);
            let mid = 0.5 * (g.left + g.right);
            assert!((d.map().apply(mid) - 0.5 * (h.left + h.right)).abs() < 1e-12);
        }
    }

    #[test]
    fn staircase_collapses_gaps_and_is_monotone() {
        let d = standard();
        for g in d.gaps() {
            assert_eq!(d.staircase(g.left), d.staircase(g.right));
        }
        let mut prev = d.staircase_lift(0.0);
        for i in 1..=20_000 {
            let h = d.staircase_lift(i as f64 / 20_000.0 - 1e-12);
            assert!(h >= prev - 1e-12, "not monotone at {i}");
            // continuity: slope is at most 1 / (1 - gap_total) = 2
            assert!(h - prev <= 2.0 / 20_000.0 + 1e-9, "jump at {i}: {prev} -> {h}");
            prev = h;
        }
    }

    #[test]
    fn staircase_inverse_is_a_section() {
        let d = standard();
        for i in 0..1000 {
            let t = (i as f64 + 0.5) / 1000.0;
            let x = d.staircase_inverse(t);
            assert!((d.staircase(x) - t).abs() < 1e-12);
            assert!(!d.in_open_gap(x));
        }
    }

    #[test]
    fn semiconjugate_to_rotation_on_breakpoints() {
        let d = standard();
        assert!(d.semiconjugacy_defect() <= 1e-9, "{}", d.semiconjugacy_defect());
    }

    #[test]
    fn rotation_number_matches_alpha() {
        let d = standard();
        let rho = d.rotation_number(0.123, 2_000_000);
        assert!((rho - golden_conjugate::<f64>()).abs() < 1e-6, "{rho}");
    }

    #[test]
    fn inverse_round_trip() {
        let d = standard();
        let sys = d.system();
        for i in 0..1000 {
            let x = Point::circle((i as f64 * 0.618_033_988_7 + 0.01) % 1.0);
            let back = sys.inverse(&sys.forward(&x)).unwrap();
            assert!(sys.space.dist(&back, &x) <= 1e-9);
        }
        // points inside the squeezed gap I_N
        let g = d.gap(64).unwrap();
        for i in 1..10 {
            let x = Point::circle(g.left + g.len() * i as f64 / 10.0);
            let back = sys.inverse(&sys.forward(&x)).unwrap();
            assert!(sys.space.dist(&back, &x) <= 1e-9);
        }
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            build_denjoy(golden_conjugate::<f64>(), 4, 0.5),
            Err(Error::Construction(_))
        ));
        assert!(build_denjoy(0.5_f64, 16, 0.5).is_err());
        assert!(build_denjoy(golden_conjugate::<f64>(), 16, 1.5).is_err());
    }

    #[test]
    fn single_precision_build() {
        let d = build_denjoy(golden_conjugate::<f32>(), 16, 0.5).unwrap();
        assert!(d.breakpoints().windows(2).all(|w| w[0] < w[1]));
    }
}
