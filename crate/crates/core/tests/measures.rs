use std::collections::BTreeMap;
use std::sync::Arc;

use measure_expansive::geometry::{Point, SpaceDescriptor};
use measure_expansive::measures::{make_denjoy_minimal, make_dirac, make_lebesgue, measure_by_name, sample};
use measure_expansive::rng::StreamFamily;
use measure_expansive::stats::{wilson, Z95};
use measure_expansive::systems::{build_denjoy, golden_conjugate};
use measure_expansive::Error;

fn fraction(points: &[Point<f64>], pred: impl Fn(&Point<f64>) -> bool) -> (u64, u64) {
    (points.iter().filter(|p| pred(p)).count() as u64, points.len() as u64)
}

fn assert_covers(k: u64, n: u64, expected: f64) {
    let (lo, hi) = wilson(k, n, 3.0);
    assert!(lo <= expected && expected <= hi, "{k}/{n} vs {expected}");
}

#[test]
fn lebesgue_quarter_circle() {
    let leb = make_lebesgue(SpaceDescriptor::<f64>::circle());
    let b = sample(&leb, 3, 100_000).unwrap();
    let (k, n) = fraction(&b.points, |p| p.x() < 0.25);
    assert_covers(k, n, 0.25);
    assert!(b.points.iter().all(|p| (0.0..1.0).contains(&p.x())));
}

#[test]
fn lebesgue_torus_quadrant() {
    let leb = make_lebesgue(SpaceDescriptor::<f64>::torus2());
    let b = sample(&leb, 4, 50_000).unwrap();
    let (k, n) = fraction(&b.points, |p| p.coords()[0] < 0.5 && p.coords()[1] < 0.3);
    assert_covers(k, n, 0.15);
}

#[test]
fn denjoy_measure_avoids_gaps() {
    let d = Arc::new(build_denjoy(golden_conjugate::<f64>(), 64, 0.5).unwrap());
    let nu = make_denjoy_minimal(d.clone());
    let b = sample(&nu, 5, 50_000).unwrap();
    assert!(b.points.iter().all(|p| !d.in_open_gap(p.x())));
    // the staircase pushes the Cantor measure to Lebesgue, so h^-1([0, 1/2])
    // carries half the mass
    let (k, n) = fraction(&b.points, |p| d.staircase(p.x()) < 0.5);
    assert_covers(k, n, 0.5);
}

#[test]
fn denjoy_ball_mass_matches_staircase() {
    let d = Arc::new(build_denjoy(golden_conjugate::<f64>(), 64, 0.5).unwrap());
    let nu = make_denjoy_minimal(d.clone());
    for (c, r) in [(0.3, 0.05), (0.9, 0.2), (0.01, 0.03)] {
        let m = nu.ball_mass(&Point::circle(c), r).unwrap();
        let expected = d.staircase_lift(c + r) - d.staircase_lift(c - r);
        assert!((m - expected).abs() < 1e-12, "{m} vs {expected}");
    }
    let gap = d.gap(0).unwrap();
    let mid = 0.5 * (gap.left + gap.right);
    let m = nu.ball_mass(&Point::circle(mid), 0.4 * gap.len()).unwrap();
    assert!(m.abs() < 1e-12, "open gap interior carries mass {m}");
}

#[test]
fn squared_pushforward_cdf() {
    let space = SpaceDescriptor::<f64>::interval();
    let mu = measure_by_name("lebesgue-squared", space, &BTreeMap::new()).unwrap();
    let b = sample(&mu, 6, 100_000).unwrap();
    // P(U^2 <= 1/4) = P(U <= 1/2)
    let (k, n) = fraction(&b.points, |p| p.x() <= 0.25);
    assert_covers(k, n, 0.5);
    let m = mu.ball_mass(&Point::interval(0.25), 0.25).unwrap();
    assert!((m - 0.5f64.sqrt()).abs() < 1e-12);
    let root = measure_by_name("lebesgue-sqrt", space, &BTreeMap::new()).unwrap();
    let m = root.ball_mass(&Point::interval(0.5), 0.5).unwrap();
    assert!((m - 1.0).abs() < 1e-12);
    let m = root.ball_mass(&Point::interval(0.25), 0.25).unwrap();
    assert!((m - 0.25).abs() < 1e-12);
}

#[test]
fn collapsed_denjoy_is_lebesgue_in_distribution() {
    let params: BTreeMap<String, f64> = [("n".to_string(), 32.0)].into();
    let mu = measure_by_name("denjoy-collapsed", SpaceDescriptor::<f64>::circle(), &params).unwrap();
    assert!(!mu.has_ball_oracle());
    let b = sample(&mu, 8, 50_000).unwrap();
    for t in [0.1, 0.37, 0.8] {
        let (k, n) = fraction(&b.points, |p| p.x() < t);
        assert_covers(k, n, t);
    }
}

#[test]
fn dirac_is_a_point_mass() {
    let space = SpaceDescriptor::<f64>::torus2();
    let atom = Point::torus(0.25, 0.5);
    let mu = make_dirac(space, atom).unwrap();
    let b = sample(&mu, 1, 100).unwrap();
    assert!(b.points.iter().all(|p| *p == atom));
    assert_eq!(mu.ball_mass(&Point::torus(0.3, 0.5), 0.1), Some(1.0));
    assert_eq!(mu.ball_mass(&Point::torus(0.9, 0.5), 0.1), Some(0.0));
    assert!(!mu.nonatomic);
    assert!(make_dirac(SpaceDescriptor::<f64>::circle(), Point::torus(0.1, 0.1)).is_err());
}

#[test]
fn conditioned_draws_stay_in_ball() {
    let mut rng = StreamFamily::new(9, 1).stream(0);
    for space in [
        SpaceDescriptor::<f64>::circle(),
        SpaceDescriptor::interval(),
        SpaceDescriptor::torus2(),
    ] {
        let leb = make_lebesgue(space);
        let c = space.point(&vec![0.97; space.dim()]).unwrap();
        for _ in 0..2_000 {
            let y = leb.draw_in_ball(&c, 0.1, &mut rng).unwrap();
            assert!(space.dist(&c, &y) <= 0.1 + 1e-12);
            assert!(space.contains(&y));
        }
    }
}

#[test]
fn unknown_and_misplaced_measures() {
    let circle = SpaceDescriptor::<f64>::circle();
    assert!(matches!(
        measure_by_name("nosuch", circle, &BTreeMap::new()),
        Err(Error::UnknownName { .. })
    ));
    assert!(measure_by_name("denjoy-minimal", SpaceDescriptor::<f64>::interval(), &BTreeMap::new()).is_err());
    assert!(measure_by_name("lebesgue-squared", SpaceDescriptor::<f64>::torus2(), &BTreeMap::new()).is_err());
    assert!(measure_by_name("dirac:abc", circle, &BTreeMap::new()).is_err());
    let wilson_zero = wilson(0, 10, Z95);
    assert_eq!(wilson_zero.0, 0.0);
}
