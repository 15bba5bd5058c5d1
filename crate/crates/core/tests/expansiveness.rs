use std::collections::BTreeMap;

use measure_expansive::expansiveness::{
    converging_semiorbit_fraction, decay_series, dyn_ball_contains, expansiveness_verdict,
    fubini_cross_check, generator_check, grid_cover, periodic_fraction, power_consistency_check,
    product_diagonal_test, DecaySettings, DynBallQuery, GeneratorSettings, SamplingMode,
    SemiOrbitSettings, Sided, Verdict, VerdictSettings,
};
use measure_expansive::geometry::{Point, SpaceDescriptor};
use measure_expansive::measures::{make_lebesgue, measure_by_name};
use measure_expansive::systems::{
    golden_conjugate, CatMap, Doubling, Identity, IntervalSquare, Rotation,
};
use measure_expansive::Error;

fn decay(delta: f64, sided: Sided, n_max: u32, samples: u64, mode: SamplingMode) -> DecaySettings {
    DecaySettings {
        delta,
        sided,
        n_max,
        samples,
        seed: 7,
        mode,
    }
}

#[test]
fn ball_membership_examples() {
    let rot = Rotation::system(golden_conjugate::<f64>());
    let x = Point::circle(0.3);
    for (y, n) in [(0.34, 1), (0.25, 7), (0.349, 50)] {
        let q = DynBallQuery {
            center: x,
            delta: 0.05,
            n,
            sided: Sided::TwoSided,
        };
        assert!(dyn_ball_contains(&rot, &q, &Point::circle(y)).unwrap());
    }
    let dbl = Doubling::system::<f64>();
    let q = DynBallQuery {
        center: Point::circle(1.0 / 3.0),
        delta: 0.05,
        n: 2,
        sided: Sided::OneSided,
    };
    assert!(!dyn_ball_contains(&dbl, &q, &Point::circle(1.0 / 3.0 + 0.04)).unwrap());
    let two = DynBallQuery {
        sided: Sided::TwoSided,
        ..q
    };
    assert!(matches!(
        dyn_ball_contains(&dbl, &two, &Point::circle(0.3)),
        Err(Error::Capability(_))
    ));
    let id = Identity::system(SpaceDescriptor::<f64>::torus2());
    let p = Point::torus(0.2, 0.7);
    let q = DynBallQuery {
        center: p,
        delta: 1e-9,
        n: 100,
        sided: Sided::TwoSided,
    };
    assert!(dyn_ball_contains(&id, &q, &p).unwrap());
}

#[test]
fn rotation_decay_is_flat_at_two_delta() {
    let rot = Rotation::system(golden_conjugate::<f64>());
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let s = decay(0.05, Sided::TwoSided, 20, 100_000, SamplingMode::Direct);
    let series = decay_series(&rot, &leb, &Point::circle(0.4), &s).unwrap();
    assert_eq!(series.estimates.len(), 20);
    let first = series.estimates[0];
    for p in &series.estimates {
        assert_eq!(p.successes, first.successes);
        assert!((p.estimate - 0.1).abs() <= 0.01);
        assert!(p.ci_low <= 0.1 && 0.1 <= p.ci_high);
    }
}

#[test]
fn doubling_decay_halves() {
    let dbl = Doubling::system::<f64>();
    let leb = make_lebesgue(SpaceDescriptor::circle());
    for mode in [SamplingMode::Direct, SamplingMode::BallConditioned] {
        let s = decay(0.01, Sided::OneSided, 8, 100_000, mode);
        let series = decay_series(&dbl, &leb, &Point::circle(1.0 / 3.0), &s).unwrap();
        assert!(series.is_nonincreasing());
        for (i, p) in series.estimates.iter().enumerate() {
            let exact = 0.02 * 0.5_f64.powi(i as i32);
            let tol = 3.0 * p.half_width().max(1e-12);
            assert!((p.estimate - exact).abs() <= tol, "{mode:?} n={} {} vs {exact}", i + 1, p.estimate);
        }
    }
}

#[test]
fn identity_decay_is_constant() {
    let id = Identity::system(SpaceDescriptor::<f64>::circle());
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let s = decay(0.05, Sided::TwoSided, 15, 1_000, SamplingMode::Direct);
    let series = decay_series(&id, &leb, &Point::circle(0.9), &s).unwrap();
    assert!(series.estimates.iter().all(|p| *p == series.estimates[0]));
}

#[test]
fn two_sided_decay_needs_inverse() {
    let dbl = Doubling::system::<f64>();
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let s = decay(0.05, Sided::TwoSided, 5, 1_000, SamplingMode::Auto);
    assert!(matches!(
        decay_series(&dbl, &leb, &Point::circle(0.2), &s),
        Err(Error::Capability(_))
    ));
}

fn verdict_settings(delta: f64, sided: Sided) -> VerdictSettings {
    VerdictSettings {
        delta,
        sided,
        n_max: 20,
        samples: 5_000,
        x_probes: 20,
        threshold: 0.01,
        seed: 3,
        mode: SamplingMode::Auto,
    }
}

#[test]
fn verdict_examples() {
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let rot = Rotation::system(golden_conjugate::<f64>());
    let v = expansiveness_verdict(&rot, &leb, &verdict_settings(0.05, Sided::TwoSided)).unwrap();
    assert_eq!(v.verdict, Verdict::EvidenceNotExpansive);
    assert!(v.witness.is_some());

    let dbl = Doubling::system::<f64>();
    let v = expansiveness_verdict(&dbl, &leb, &verdict_settings(0.01, Sided::OneSided)).unwrap();
    assert_eq!(v.verdict, Verdict::EvidenceExpansive);
    assert!(v.worst_upper_bound <= 0.01);

    let sq = IntervalSquare::system::<f64>();
    let ileb = make_lebesgue(SpaceDescriptor::interval());
    for delta in [0.2, 0.1, 0.05] {
        let v = expansiveness_verdict(&sq, &ileb, &verdict_settings(delta, Sided::TwoSided)).unwrap();
        assert_eq!(v.verdict, Verdict::EvidenceNotExpansive, "delta {delta}");
    }
}

#[test]
fn dirac_measures_are_never_expansive() {
    let dbl = Doubling::system::<f64>();
    let dirac = measure_by_name("dirac:0.25", SpaceDescriptor::circle(), &BTreeMap::new()).unwrap();
    for delta in [0.1, 0.01, 0.001] {
        let v = expansiveness_verdict(&dbl, &dirac, &verdict_settings(delta, Sided::OneSided)).unwrap();
        assert_eq!(v.verdict, Verdict::EvidenceNotExpansive);
    }
}

#[test]
fn power_consistency_examples() {
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let grid = [0.05, 0.02, 0.01];
    let s = VerdictSettings {
        n_max: 10,
        samples: 2_000,
        ..verdict_settings(0.05, Sided::OneSided)
    };
    let r = power_consistency_check(&Doubling::system::<f64>(), &leb, 2, &grid, &s).unwrap();
    assert!(r.consistent && r.identical);
    assert!(r.power.iter().all(|&v| v == Verdict::EvidenceExpansive));
    let s2 = VerdictSettings {
        sided: Sided::TwoSided,
        ..s
    };
    let r = power_consistency_check(&Rotation::system(golden_conjugate::<f64>()), &leb, 2, &grid, &s2).unwrap();
    assert!(r.consistent && r.identical);
    assert!(r.base.iter().all(|&v| v == Verdict::EvidenceNotExpansive));
    let r = power_consistency_check(&Identity::system(SpaceDescriptor::circle()), &leb, 3, &grid, &s2).unwrap();
    assert!(r.consistent && r.identical);
}

#[test]
fn diagonal_examples() {
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let rot = Rotation::system(golden_conjugate::<f64>());
    let s = decay(0.05, Sided::TwoSided, 10, 50_000, SamplingMode::Auto);
    let d = product_diagonal_test(&rot, &leb, &s).unwrap();
    assert!(d.estimates.iter().all(|p| p.successes == d.estimates[0].successes));
    assert!((d.terminal().estimate - 0.1).abs() < 0.01);

    let cat = CatMap::system::<f64>();
    let tleb = make_lebesgue(SpaceDescriptor::torus2());
    let s = decay(0.05, Sided::TwoSided, 12, 50_000, SamplingMode::Auto);
    let d = product_diagonal_test(&cat, &tleb, &s).unwrap();
    assert!(d.terminal().ci_high < 0.01);
    let fub = fubini_cross_check(&cat, &tleb, &s, 20).unwrap();
    assert!(fub.agree, "{fub:?}");

    let s = decay(1.0, Sided::TwoSided, 10, 1_000, SamplingMode::Auto);
    let d = product_diagonal_test(&cat, &tleb, &s).unwrap();
    assert!(d.estimates.iter().all(|p| p.estimate == 1.0));
}

#[test]
fn generator_examples() {
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let cover = grid_cover(&SpaceDescriptor::<f64>::circle(), 0.05, 0.1).unwrap();
    assert_eq!(cover.len(), 20);
    let s = GeneratorSettings {
        n_max: 12,
        sequences: 8,
        mc_samples: 5_000,
        ..GeneratorSettings::default()
    };
    let r = generator_check(&Doubling::system::<f64>(), &leb, &cover, &s).unwrap();
    assert!(r.is_generator_evidence, "{}", r.max_upper_bound);
    let r = generator_check(&Identity::system(SpaceDescriptor::circle()), &leb, &cover, &s).unwrap();
    assert!(!r.is_generator_evidence);
    assert!(r.max_intersection_estimate >= 0.2 - 1e-9);

    let whole = grid_cover(&SpaceDescriptor::<f64>::circle(), 1.0, 1.0).unwrap();
    assert_eq!(whole.len(), 1);
    let r = generator_check(&Doubling::system::<f64>(), &leb, &whole, &s).unwrap();
    assert!(!r.is_generator_evidence);
    assert_eq!(r.max_intersection_estimate, 1.0);

    let gappy = grid_cover(&SpaceDescriptor::<f64>::circle(), 0.25, 0.1).unwrap();
    assert!(matches!(
        generator_check(&Doubling::system::<f64>(), &leb, &gappy, &s),
        Err(Error::NotACover(_))
    ));
}

#[test]
fn semiorbit_and_periodic_examples() {
    let ileb = make_lebesgue(SpaceDescriptor::interval());
    let cleb = make_lebesgue(SpaceDescriptor::circle());
    let s = SemiOrbitSettings {
        samples: 5_000,
        ..SemiOrbitSettings::default()
    };
    let sq = converging_semiorbit_fraction(&IntervalSquare::system::<f64>(), &ileb, &s).unwrap();
    assert!(sq.estimate >= 0.99);
    let rot = converging_semiorbit_fraction(&Rotation::system(golden_conjugate::<f64>()), &cleb, &s).unwrap();
    assert_eq!(rot.successes, 0);
    let id = converging_semiorbit_fraction(&Identity::system(SpaceDescriptor::circle()), &cleb, &s).unwrap();
    assert_eq!(id.estimate, 1.0);
    assert!(converging_semiorbit_fraction(&Doubling::system::<f64>(), &cleb, &s).is_err());

    let tleb = make_lebesgue(SpaceDescriptor::torus2());
    let p = periodic_fraction(&CatMap::system::<f64>(), &tleb, 6, 1e-4, 100_000, 7).unwrap();
    assert!(p.estimate <= 1e-3);
    let p = periodic_fraction(&Identity::system(SpaceDescriptor::circle()), &cleb, 1, 1e-12, 1_000, 7).unwrap();
    assert_eq!(p.estimate, 1.0);
    let p = periodic_fraction(&Rotation::system(1.0 / 3.0), &cleb, 3, 1e-9, 1_000, 7).unwrap();
    assert_eq!(p.estimate, 1.0);
}
