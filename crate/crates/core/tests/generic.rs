use measure_expansive::expansiveness::{decay_series, DecaySettings, SamplingMode, Sided};
use measure_expansive::measures::make_lebesgue;
use measure_expansive::systems::{Doubling, Rotation};
use measure_expansive::{Point32, System32, System64};

#[test]
fn single_precision_matches_double_on_the_rotation() {
    let f32sys: System32 = Rotation::system(0.618_034_f32);
    let f64sys: System64 = Rotation::system(0.618_034_f64);
    let s = DecaySettings {
        delta: 0.05,
        sided: Sided::TwoSided,
        n_max: 10,
        samples: 20_000,
        seed: 2,
        mode: SamplingMode::Direct,
    };
    let a = decay_series(&f32sys, &make_lebesgue(f32sys.space), &Point32::circle(0.3), &s).unwrap();
    let b = decay_series(&f64sys, &make_lebesgue(f64sys.space), &measure_expansive::Point64::circle(0.3), &s).unwrap();
    for (p, q) in a.estimates.iter().zip(&b.estimates) {
        assert!((p.estimate - q.estimate).abs() < 0.01);
    }
}

#[test]
fn single_precision_doubling_halves() {
    let f: System32 = Doubling::system();
    let s = DecaySettings {
        delta: 0.01,
        sided: Sided::OneSided,
        n_max: 5,
        samples: 50_000,
        seed: 4,
        mode: SamplingMode::BallConditioned,
    };
    let series = decay_series(&f, &make_lebesgue(f.space), &Point32::circle(0.2), &s).unwrap();
    for (n, p) in series.n_values.iter().zip(&series.estimates) {
        let exact = 0.02 * 0.5f64.powi(*n as i32 - 1);
        assert!((p.estimate - exact).abs() <= 3.0 * p.half_width() + 1e-6, "n {n}: {}", p.estimate);
    }
}
