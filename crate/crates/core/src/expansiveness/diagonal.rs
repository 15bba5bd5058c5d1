//! The product system `f x f` near the diagonal.
//!
//! Under the sum metric `d((x, y), Diag) ~ d(x, y)`, so a pair stays in the
//! `delta`-tube around the diagonal through window `n` exactly when `y`
//! lies in the dynamical ball of `x`. Averaging over `x` recovers the
//! probe-averaged decay series.

use serde::{Deserialize, Serialize};

use super::{
    check_decay_settings, decay_series, level_histogram, pair_level, probe_centers,
    require_inverse, DecaySeries, DecaySettings, SamplingMode,
};
use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::rng::{derive_seed, domain, StreamFamily};
use crate::scalar::Scalar;
use crate::stats::{Proportion, Z95};
use crate::systems::SystemSpec;

/// Estimate `mu x mu` of the pairs whose orbits stay `delta`-close through
/// each window. Pairs are drawn independently from `mu`.
pub fn product_diagonal_test<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    s: &DecaySettings,
) -> Result<DecaySeries> {
    check_decay_settings(s)?;
    require_inverse(f, s.sided)?;
    let delta = S::lit(s.delta);
    let fam = StreamFamily::new(s.seed, domain::PAIRS);
    let hist = level_histogram(s.samples, s.n_max, |i| {
        let mut rng = fam.stream(i);
        let x = mu.draw(&mut rng);
        let y = mu.draw(&mut rng);
        pair_level(f, &x, &y, delta, s.n_max, s.sided)
    });
    Ok(DecaySeries::from_histogram(
        Vec::new(),
        s,
        SamplingMode::Direct,
        None,
        &hist,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FubiniReport {
    pub system: String,
    pub measure: String,
    pub delta: f64,
    pub n_max: u32,
    pub diagonal: Proportion,
    pub probe_mean: f64,
    pub probe_ci: (f64, f64),
    pub probe_count: usize,
    pub agree: bool,
}

/// Compare the diagonal estimate at `n_max` with the mean over `mu`-sampled
/// centers of the decay series at `n_max`.
pub fn fubini_cross_check<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    s: &DecaySettings,
    probes: usize,
) -> Result<FubiniReport> {
    if probes < 2 {
        return Err(Error::InvalidArgument("need at least two probes".into()));
    }
    let diagonal = *product_diagonal_test(f, mu, s)?.terminal();
    let centers = probe_centers(mu, s.seed, probes);
    let mut terminals = Vec::with_capacity(probes);
    for (i, x) in centers.iter().enumerate() {
        let ds = DecaySettings {
            seed: derive_seed(s.seed, domain::SAMPLES, i as u64),
            ..*s
        };
        terminals.push(*decay_series(f, mu, x, &ds)?.terminal());
    }
    let m = probes as f64;
    let mean = terminals.iter().map(|p| p.estimate).sum::<f64>() / m;
    let between = terminals
        .iter()
        .map(|p| (p.estimate - mean).powi(2))
        .sum::<f64>()
        / (m - 1.0);
    let within = terminals
        .iter()
        .map(|p| (p.half_width() / Z95).powi(2))
        .sum::<f64>()
        / m;
    let hw = Z95 * ((between + within) / m).sqrt();
    let probe_ci = ((mean - hw).max(0.0), (mean + hw).min(1.0));
    let agree = diagonal.ci_low <= probe_ci.1 && probe_ci.0 <= diagonal.ci_high;
    Ok(FubiniReport {
        system: f.name.clone(),
        measure: mu.name.clone(),
        delta: s.delta,
        n_max: s.n_max,
        diagonal,
        probe_mean: mean,
        probe_ci,
        probe_count: probes,
        agree,
    })
}
