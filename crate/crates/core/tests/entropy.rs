use measure_expansive::entropy::{
    bk_entropy, entropy_implies_expansive_check, local_entropy, power_law_check,
    volume_expanding_check, EntropySettings, ImplicationStatus,
};
use measure_expansive::expansiveness::{Sided, VerdictSettings};
use measure_expansive::geometry::{Point, SpaceDescriptor};
use measure_expansive::measures::make_lebesgue;
use measure_expansive::stats::RateEstimate;
use measure_expansive::systems::{golden_conjugate, CatMap, Doubling, Identity, Rotation, Tent};
use measure_expansive::Error;

fn settings(grid: &[f64], samples: u64) -> EntropySettings {
    EntropySettings {
        delta_grid: grid.to_vec(),
        n_min: 1,
        n_max: 14,
        x_probes: 30,
        samples,
        seed: 7,
        ..EntropySettings::default()
    }
}

#[test]
fn local_rates() {
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let s = settings(&[0.01], 20_000);
    let r = local_entropy(&Doubling::system::<f64>(), &leb, &Point::circle(1.0 / 3.0), &s).unwrap();
    assert!((r[0].rate.value() - std::f64::consts::LN_2).abs() < 0.05);
    let r = local_entropy(&Identity::system(SpaceDescriptor::circle()), &leb, &Point::circle(0.2), &s).unwrap();
    assert_eq!(r[0].rate.value(), 0.0);
    let r = local_entropy(&Rotation::system(golden_conjugate::<f64>()), &leb, &Point::circle(0.7), &s).unwrap();
    assert_eq!(r[0].rate.value(), 0.0);
    assert!(matches!(r[0].rate, RateEstimate::Fitted(_)));
}

#[test]
fn zero_first_count_is_insufficient() {
    use measure_expansive::expansiveness::SamplingMode;
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let s = EntropySettings {
        mode: SamplingMode::Direct,
        samples: 200,
        ..settings(&[1e-6], 200)
    };
    let e = local_entropy(&Doubling::system::<f64>(), &leb, &Point::circle(0.3), &s).unwrap_err();
    assert!(matches!(e, Error::InsufficientSamples(_)));
}

#[test]
fn benchmark_entropies() {
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let s = settings(&[0.02, 0.01, 0.005], 20_000);
    let e = bk_entropy(&Doubling::system::<f64>(), &leb, &s).unwrap();
    assert!((0.64..=0.75).contains(&e.extrapolated_e), "{e:?}");
    let tleb = make_lebesgue(SpaceDescriptor::torus2());
    let e = bk_entropy(&CatMap::system::<f64>(), &tleb, &s).unwrap();
    assert!((0.86..=1.06).contains(&e.extrapolated_e), "{:?} {:?}", e.extrapolated_e, e.e_of_delta);
    let e = bk_entropy(&Identity::system(SpaceDescriptor::circle()), &leb, &s).unwrap();
    assert_eq!(e.extrapolated_e, 0.0);
}

#[test]
fn power_law() {
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let s = settings(&[0.02, 0.01, 0.005], 10_000);
    let r = power_law_check(&Doubling::system::<f64>(), &leb, 2, &s).unwrap();
    assert!(r.holds, "{r:?}");
    assert!((r.e_power - 2.0 * std::f64::consts::LN_2).abs() < 0.1);
    let r = power_law_check(&Identity::system(SpaceDescriptor::circle()), &leb, 3, &s).unwrap();
    assert!(r.holds && r.e_power == 0.0);
}

#[test]
fn implication() {
    let leb = make_lebesgue(SpaceDescriptor::circle());
    let s = settings(&[0.02, 0.01], 5_000);
    let v = VerdictSettings {
        sided: Sided::OneSided,
        samples: 5_000,
        ..VerdictSettings::default()
    };
    let r = entropy_implies_expansive_check(&Doubling::system::<f64>(), &leb, &s, &v).unwrap();
    assert_eq!(r.status, ImplicationStatus::Holds);
    let r = entropy_implies_expansive_check(&Identity::system(SpaceDescriptor::circle()), &leb, &s, &v).unwrap();
    assert_eq!(r.status, ImplicationStatus::Vacuous);
}

#[test]
fn volume_expanding() {
    let d = volume_expanding_check(&Doubling::system::<f64>(), 20, 50).unwrap();
    assert!(d.detected && (d.lambda_est - 2.0).abs() < 1e-12);
    let t = volume_expanding_check(&Tent::system::<f64>(), 20, 50).unwrap();
    assert!(t.detected && t.lambda_est >= 1.9);
    let r = volume_expanding_check(&Rotation::system(golden_conjugate::<f64>()), 20, 50).unwrap();
    assert!(!r.detected);
}
