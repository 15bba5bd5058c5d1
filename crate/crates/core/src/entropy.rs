//! Decay rates of one-sided dynamical balls.
//!
//! The local rate at `x` and scale `delta` is the exponential decay rate of
//! `mu(B[x, delta, n])` in `n`. Its infimum over `x` is the metric entropy
//! at scale `delta`, which grows as `delta` shrinks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expansiveness::{
    decay_series, expansiveness_verdict, probe_centers, DecaySeries, DecaySettings, SamplingMode,
    Sided, Verdict, VerdictSettings,
};
use crate::geometry::{Point, MAX_DIM};
use crate::measures::MeasureSpec;
use crate::rng::{derive_seed, domain};
use crate::scalar::{frac, Scalar};
use crate::stats::{fit_decay_rate, RateEstimate, Z95};
use crate::systems::{abs_det, SystemSpec};

/// Survivor counts below this are treated as censored by the rate fit.
pub const MIN_COUNT: u64 = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropySettings {
    /// Strictly decreasing scales.
    pub delta_grid: Vec<f64>,
    pub n_min: u32,
    pub n_max: u32,
    pub x_probes: usize,
    pub samples: u64,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl Default for EntropySettings {
    fn default() -> Self {
        Self {
            delta_grid: vec![0.02, 0.01, 0.005],
            n_min: 1,
            n_max: 14,
            x_probes: 30,
            samples: 100_000,
            seed: 0,
            mode: SamplingMode::Auto,
        }
    }
}

impl EntropySettings {
    fn check(&self) -> Result<()> {
        if self.delta_grid.is_empty() || self.delta_grid.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::InvalidArgument("delta grid must be non-empty and positive".into()));
        }
        if self.delta_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("delta grid must be strictly decreasing".into()));
        }
        if self.n_min < 1 || self.n_max < self.n_min + 2 {
            return Err(Error::InvalidArgument("need 1 <= n_min and n_max >= n_min + 2".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalRate {
    pub delta: f64,
    pub rate: RateEstimate,
    /// True when the decay ran below [`MIN_COUNT`] survivors before `n_max`,
    /// so the tail only bounds the rate from below.
    pub censored_tail: bool,
}

fn rate_from_series(series: &DecaySeries, n_min: u32) -> Result<LocalRate> {
    let skip = (n_min - 1) as usize;
    let n_values = &series.n_values[skip..];
    let counts: Vec<u64> = series.counts()[skip..].to_vec();
    let rate = fit_decay_rate(n_values, &counts, series.sample_count, MIN_COUNT)?;
    let censored_tail = match &rate {
        RateEstimate::Fitted(f) => f.censored_tail,
        RateEstimate::Censored { .. } => true,
    };
    Ok(LocalRate {
        delta: series.delta,
        rate,
        censored_tail,
    })
}

/// Fitted decay rate of `mu(B[x, delta, n])` over `n_min..=n_max` for each
/// `delta`.
pub fn local_entropy<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    x: &Point<S>,
    s: &EntropySettings,
) -> Result<Vec<LocalRate>> {
    s.check()?;
    s.delta_grid
        .iter()
        .enumerate()
        .map(|(j, &delta)| {
            let ds = DecaySettings {
                delta,
                sided: Sided::OneSided,
                n_max: s.n_max,
                samples: s.samples,
                seed: derive_seed(s.seed, domain::SAMPLES, j as u64),
                mode: s.mode,
            };
            rate_from_series(&decay_series(f, mu, x, &ds)?, s.n_min)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    /// Smallest per-probe rate.
    pub value: f64,
    pub std_err: f64,
    pub argmin_probe: usize,
    /// The minimum is a censored lower bound.
    pub censored: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostic {
    pub delta: f64,
    pub probe: usize,
    pub window: Option<(u32, u32)>,
    pub chi2_per_dof: Option<f64>,
    pub censored_tail: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub system: String,
    pub measure: String,
    pub delta_grid: Vec<f64>,
    pub e_of_delta: Vec<DeltaEstimate>,
    /// `per_x_rates[j][i]`: rate at `delta_grid[j]` for probe `i`.
    pub per_x_rates: Vec<Vec<f64>>,
    pub probes: Vec<Vec<f64>>,
    pub extrapolated_e: f64,
    pub extrapolated_se: f64,
    /// A plateau was found in the small-`delta` end of the grid.
    pub converged: bool,
    pub fit_diagnostics: Vec<FitDiagnostic>,
}

impl EntropyEstimate {
    /// `(delta, lower 95% bound)` per scale.
    pub fn lower_bounds(&self) -> Vec<(f64, f64)> {
        self.e_of_delta
            .iter()
            .map(|e| (e.delta, e.value - Z95 * e.std_err))
            .collect()
    }
}

/// Entropy estimate from the minimum over `mu`-sampled probes of the
/// fitted rates, extrapolated to small `delta` by plateau detection.
pub fn bk_entropy<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    s: &EntropySettings,
) -> Result<EntropyEstimate> {
    s.check()?;
    if s.x_probes < 20 {
        return Err(Error::InvalidArgument("x_probes must be at least 20".into()));
    }
    let centers = probe_centers(mu, s.seed, s.x_probes);
    let mut rates: Vec<Vec<LocalRate>> = Vec::with_capacity(centers.len());
    for (i, x) in centers.iter().enumerate() {
        let ps = EntropySettings {
            seed: derive_seed(s.seed, domain::PROBES, i as u64),
            ..s.clone()
        };
        rates.push(local_entropy(f, mu, x, &ps)?);
    }
    let mut e_of_delta = Vec::new();
    let mut per_x_rates = Vec::new();
    let mut fit_diagnostics = Vec::new();
    for (j, &delta) in s.delta_grid.iter().enumerate() {
        let row: Vec<f64> = rates.iter().map(|r| r[j].rate.value()).collect();
        let (argmin, value) = row
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let best = &rates[argmin][j].rate;
        e_of_delta.push(DeltaEstimate {
            delta,
            value,
            std_err: best.std_err(),
            argmin_probe: argmin,
            censored: matches!(best, RateEstimate::Censored { .. }),
        });
        for (i, r) in rates.iter().enumerate() {
            let (window, chi2) = match &r[j].rate {
                RateEstimate::Fitted(fit) => (Some(fit.window), Some(fit.chi2_per_dof)),
                RateEstimate::Censored { .. } => (None, None),
            };
            fit_diagnostics.push(FitDiagnostic {
                delta,
                probe: i,
                window,
                chi2_per_dof: chi2,
                censored_tail: r[j].censored_tail,
            });
        }
        per_x_rates.push(row);
    }
    let (extrapolated, converged) = plateau(&e_of_delta);
    Ok(EntropyEstimate {
        system: f.name.clone(),
        measure: mu.name.clone(),
        delta_grid: s.delta_grid.clone(),
        per_x_rates,
        probes: centers.iter().map(|c| c.to_f64_vec()).collect(),
        extrapolated_e: extrapolated.value.max(0.0),
        extrapolated_se: extrapolated.std_err,
        converged,
        e_of_delta,
        fit_diagnostics,
    })
}

/// The smallest scale whose estimate is within two standard errors of the
/// next larger scale; the smallest scale, unconverged, when none is.
fn plateau(e: &[DeltaEstimate]) -> (&DeltaEstimate, bool) {
    for i in (1..e.len()).rev() {
        let (a, b) = (&e[i], &e[i - 1]);
        if (a.value - b.value).abs() <= 2.0 * (a.std_err + b.std_err) {
            return (a, true);
        }
    }
    (e.last().expect("non-empty grid"), e.len() == 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawReport {
    pub system: String,
    pub k: u32,
    pub e_base: f64,
    pub se_base: f64,
    pub e_power: f64,
    pub se_power: f64,
    pub tolerance: f64,
    pub holds: bool,
    /// Both extrapolations converged.
    pub converged: bool,
}

/// Check `e(f^k) = k e(f)` with identical budgets and seed.
pub fn power_law_check<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    k: u32,
    s: &EntropySettings,
) -> Result<PowerLawReport> {
    if !(2..=3).contains(&k) {
        return Err(Error::InvalidArgument("power law is checked for k in {2, 3}".into()));
    }
    let base = bk_entropy(f, mu, s)?;
    let power = bk_entropy(&f.power(k)?, mu, s)?;
    let kf = f64::from(k);
    let se = (power.extrapolated_se.powi(2) + (kf * base.extrapolated_se).powi(2)).sqrt();
    let tolerance = 2.0 * se + 0.05;
    Ok(PowerLawReport {
        system: f.name.clone(),
        k,
        e_base: base.extrapolated_e,
        se_base: base.extrapolated_se,
        e_power: power.extrapolated_e,
        se_power: power.extrapolated_se,
        tolerance,
        holds: (power.extrapolated_e - kf * base.extrapolated_e).abs() <= tolerance,
        converged: base.converged && power.converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImplicationStatus {
    /// Entropy not bounded away from zero at this scale.
    Vacuous,
    Holds,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicationRow {
    pub delta: f64,
    pub e: f64,
    pub e_lower: f64,
    pub verdict: Option<Verdict>,
    pub status: ImplicationStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImplicationReport {
    pub system: String,
    pub measure: String,
    pub rows: Vec<ImplicationRow>,
    pub status: ImplicationStatus,
}

/// At every scale where the entropy lower bound is positive, the one-sided
/// verdict must not be `evidence_not_expansive`.
pub fn entropy_implies_expansive_check<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    s: &EntropySettings,
    v: &VerdictSettings,
) -> Result<ImplicationReport> {
    let est = bk_entropy(f, mu, s)?;
    implication_from_estimate(f, mu, &est, v)
}

/// As [`entropy_implies_expansive_check`], reusing an entropy estimate.
pub fn implication_from_estimate<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    est: &EntropyEstimate,
    v: &VerdictSettings,
) -> Result<ImplicationReport> {
    let mut rows = Vec::new();
    for (e, (delta, lower)) in est.e_of_delta.iter().zip(est.lower_bounds()) {
        let (verdict, status) = if lower > 0.0 {
            let vs = VerdictSettings {
                delta,
                sided: Sided::OneSided,
                ..*v
            };
            let verdict = expansiveness_verdict(f, mu, &vs)?.verdict;
            let status = if verdict == Verdict::EvidenceNotExpansive {
                ImplicationStatus::Violated
            } else {
                ImplicationStatus::Holds
            };
            (Some(verdict), status)
        } else {
            (None, ImplicationStatus::Vacuous)
        };
        rows.push(ImplicationRow {
            delta,
            e: e.value,
            e_lower: lower,
            verdict,
            status,
        });
    }
    let status = if rows.iter().any(|r| r.status == ImplicationStatus::Violated) {
        ImplicationStatus::Violated
    } else if rows.iter().any(|r| r.status == ImplicationStatus::Holds) {
        ImplicationStatus::Holds
    } else {
        ImplicationStatus::Vacuous
    };
    Ok(ImplicationReport {
        system: f.name.clone(),
        measure: mu.name.clone(),
        rows,
        status,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    pub system: String,
    pub detected: bool,
    /// `min_x |det Df^H(x)|^(1 / H)` at the horizon `H`.
    pub lambda_est: f64,
    /// `min_{x, n <= H} |det Df^n(x)| / lambda_est^n`.
    pub k_const: f64,
    pub horizon: u32,
    pub probes: usize,
}

/// Kronecker-sequence increments; irrational so probes avoid rational
/// points such as kinks at `1/2`.
const KRONECKER: [f64; MAX_DIM] = [
    0.618_033_988_749_894_8,
    0.754_877_666_246_692_7,
    0.569_840_290_998_053_3,
    0.430_159_709_001_946_7,
];

/// Look for a uniform exponential lower bound on `|det Df^n|`.
pub fn volume_expanding_check<S: Scalar>(f: &SystemSpec<S>, horizon: u32, probes: usize) -> Result<VolumeReport> {
    if !f.has_jacobian() {
        return Err(Error::Capability(format!("`{}` has no jacobian", f.name)));
    }
    if horizon < 1 || probes < 1 {
        return Err(Error::InvalidArgument("horizon and probes must be positive".into()));
    }
    let bounds = f.space.bounds();
    let logs: Vec<Vec<f64>> = (0..probes)
        .map(|i| {
            let mut c = [S::zero(); MAX_DIM];
            for (a, (lo, hi)) in bounds.iter().enumerate() {
                let u = frac((i as f64 + 0.5) * KRONECKER[a]);
                c[a] = *lo + (*hi - *lo) * S::lit(u);
            }
            let mut p = f.space.project(c);
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(horizon as usize);
            for _ in 0..horizon {
                acc += abs_det(&f.jacobian(&p)?).ln();
                out.push(acc);
                p = f.forward(&p);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let h = f64::from(horizon);
    let log_lambda = logs
        .iter()
        .map(|l| l[horizon as usize - 1] / h)
        .fold(f64::INFINITY, f64::min);
    let log_k = logs
        .iter()
        .flat_map(|l| l.iter().enumerate().map(|(n, v)| v - (n + 1) as f64 * log_lambda))
        .fold(f64::INFINITY, f64::min);
    let lambda_est = log_lambda.exp();
    Ok(VolumeReport {
        system: f.name.clone(),
        detected: lambda_est > 1.0 + 1e-6,
        lambda_est,
        k_const: log_k.exp(),
        horizon,
        probes,
    })
}
