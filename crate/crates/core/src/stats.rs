//! Binomial confidence intervals and decay-rate fitting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p + z2 / (2.0 * n);
    let rad = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { ((center - rad) / denom).max(0.0) };
    let hi = if successes == trials { 1.0 } else { ((center + rad) / denom).min(1.0) };
    (lo, hi)
}

/// A Monte-Carlo measure estimate `scale * successes / trials`.
///
/// `scale` is 1 for plain sampling from the measure and equals the exact
/// mass of the conditioning set when samples were drawn from the measure
/// restricted to that set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub scale: f64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64, scale: f64) -> Self {
        let (lo, hi) = wilson(successes, trials, Z95);
        let estimate = if trials == 0 {
            0.0
        } else {
            scale * successes as f64 / trials as f64
        };
        Self {
            successes,
            trials,
            scale,
            estimate,
            ci_low: scale * lo,
            ci_high: scale * hi,
        }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// Result of fitting `-log p_n` against `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub std_err: f64,
    /// First and last `n` of the window the slope was fitted on.
    pub window: (u32, u32),
    pub chi2_per_dof: f64,
    /// Estimates beyond the window hit zero counts.
    pub censored_tail: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RateEstimate {
    Fitted(RateFit),
    /// Too few survivors to fit; only a lower bound on the rate is known.
    Censored { lower_bound: f64 },
}

impl RateEstimate {
    /// Point value used when aggregating: the slope, or the lower bound.
    pub fn value(&self) -> f64 {
        match self {
            RateEstimate::Fitted(f) => f.slope,
            RateEstimate::Censored { lower_bound } => *lower_bound,
        }
    }

    pub fn std_err(&self) -> f64 {
        match self {
            RateEstimate::Fitted(f) => f.std_err,
            RateEstimate::Censored { .. } => f64::INFINITY,
        }
    }
}

/// Fit the exponential decay rate of nested survivor counts.
///
/// `counts[i]` is the number of samples (out of `trials`) still inside the
/// dynamical ball at window `n_values[i]`. Because the sets are nested the
/// per-step log ratios `log(k_i / k_{i+1})` are close to independent, with
/// binomial variance `(1 - q) / (k_i q)`. The slope is their inverse-variance
/// weighted mean over the longest tail window that is consistent with a
/// single rate (chi-square test), which removes the `n`-independent prefactor
/// of `p_n`.
pub fn fit_decay_rate(
    n_values: &[u32],
    counts: &[u64],
    trials: u64,
    min_count: u64,
) -> Result<RateEstimate> {
    if n_values.len() != counts.len() || n_values.is_empty() {
        return Err(Error::InvalidArgument(
            "n_values and counts must be non-empty and of equal length".into(),
        ));
    }
    if counts[0] == 0 {
        return Err(Error::InsufficientSamples(format!(
            "no sample survives the first window (n = {})",
            n_values[0]
        )));
    }
    let usable = counts.iter().take_while(|&&k| k >= min_count.max(1)).count();
    let censored_tail = usable < counts.len() && counts[counts.len() - 1] < min_count.max(1);

    if usable < 2 {
        let last = counts.len() - 1;
        let span = f64::from(n_values[last] - n_values[0]);
        if span <= 0.0 {
            return Ok(RateEstimate::Censored { lower_bound: 0.0 });
        }
        let p0 = counts[0] as f64 / trials as f64;
        let (_, hi) = wilson(counts[last], trials, Z95);
        let lb = ((p0 / hi).ln() / span).max(0.0);
        return Ok(RateEstimate::Censored { lower_bound: lb });
    }

    // per-step rates, counts and window lengths
    let steps: Vec<(f64, f64, f64)> = (0..usable - 1)
        .map(|i| {
            let dn = f64::from(n_values[i + 1] - n_values[i]);
            let k0 = counts[i] as f64;
            let k1 = counts[i + 1] as f64;
            ((k0 / k1).ln() / dn, k0, dn)
        })
        .collect();
    // binomial variance of one step's rate at survival ratio `q`
    let var = |k0: f64, dn: f64, q: f64| {
        let q = q.clamp(1e-12, 1.0 - 1e-12);
        (1.0 - q) / (k0 * q) / (dn * dn)
    };

    // A first pass weights steps by their observed ratios; the second uses
    // the ratio implied by the common rate, so that a step which happens to
    // lose many samples does not also get an inflated variance.
    let weighted = |window: &[(f64, f64, f64)]| {
        let pass = |v: &dyn Fn(&(f64, f64, f64)) -> f64| {
            let sw: f64 = window.iter().map(|s| 1.0 / v(s)).sum();
            let mean = window.iter().map(|s| s.0 / v(s)).sum::<f64>() / sw;
            let chi2: f64 = window.iter().map(|s| (s.0 - mean).powi(2) / v(s)).sum();
            (mean, sw, chi2)
        };
        let (m0, _, _) = pass(&|&(r, k0, dn)| var(k0, dn, (-r * dn).exp().max(0.5 / k0)));
        pass(&|&(_, k0, dn)| var(k0, dn, (-m0.max(0.0) * dn).exp()))
    };

    // longest tail window consistent with a single rate
    let min_len = steps.len().min(3);
    let passes = |start: usize| {
        let (_, _, chi2) = weighted(&steps[start..]);
        let dof = (steps.len() - start - 1).max(1) as f64;
        chi2 <= dof + 3.0 * (2.0 * dof).sqrt()
    };
    let per_dof = |start: usize| {
        let (_, _, chi2) = weighted(&steps[start..]);
        chi2 / (steps.len() - start - 1).max(1) as f64
    };
    let last_start = steps.len() - min_len;
    // otherwise the best-fitting window, so that a single noisy step near
    // the censoring cutoff cannot dominate
    let start = (0..last_start).find(|&i| passes(i)).unwrap_or_else(|| {
        (0..=last_start)
            .min_by(|&a, &b| per_dof(a).total_cmp(&per_dof(b)))
            .expect("non-empty range")
    });
    let window = &steps[start..];
    let (slope, sw, chi2) = weighted(window);
    let dof = (window.len().saturating_sub(1)).max(1) as f64;
    let chi2_per_dof = chi2 / dof;
    let std_err = (1.0 / sw).sqrt() * chi2_per_dof.max(1.0).sqrt();
    Ok(RateEstimate::Fitted(RateFit {
        slope,
        std_err,
        window: (n_values[start], n_values[usable - 1]),
        chi2_per_dof,
        censored_tail,
    }))
}
