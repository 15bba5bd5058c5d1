use serde::{Deserialize, Serialize};

use super::{decay_series, probe_centers, DecaySettings, SamplingMode, Sided};
use crate::error::{Error, Result};
use crate::measures::MeasureSpec;
use crate::rng::{derive_seed, domain};
use crate::scalar::Scalar;
use crate::stats::Proportion;
use crate::systems::SystemSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    EvidenceExpansive,
    EvidenceNotExpansive,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::EvidenceExpansive => "evidence_expansive",
            Verdict::EvidenceNotExpansive => "evidence_not_expansive",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictSettings {
    pub delta: f64,
    pub sided: Sided,
    pub n_max: u32,
    pub samples: u64,
    pub x_probes: usize,
    pub threshold: f64,
    pub seed: u64,
    pub mode: SamplingMode,
}

impl Default for VerdictSettings {
    fn default() -> Self {
        Self {
            delta: 0.05,
            sided: Sided::TwoSided,
            n_max: 20,
            samples: 20_000,
            x_probes: 20,
            threshold: 0.01,
            seed: 0,
            mode: SamplingMode::Auto,
        }
    }
}

impl VerdictSettings {
    pub fn decay(&self, probe: usize) -> DecaySettings {
        DecaySettings {
            delta: self.delta,
            sided: self.sided,
            n_max: self.n_max,
            samples: self.samples,
            seed: derive_seed(self.seed, domain::SAMPLES, probe as u64),
            mode: self.mode,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub center: Vec<f64>,
    pub first: Proportion,
    pub terminal: Proportion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansivenessVerdict {
    pub system: String,
    pub measure: String,
    pub delta: f64,
    pub sided: Sided,
    pub verdict: Verdict,
    pub x_probe_count: usize,
    pub n_max: u32,
    pub samples: u64,
    pub threshold: f64,
    /// Largest upper confidence bound at `n_max` over the probes.
    pub worst_upper_bound: f64,
    /// Probe with the largest lower confidence bound at `n_max`.
    pub witness: Option<Vec<f64>>,
    pub witness_lower_bound: f64,
    /// Largest `p_{n_max} / p_1` over probes with `p_1 > 0`.
    pub worst_relative_survival: f64,
    pub probes: Vec<ProbeSummary>,
}

/// Decide whether `mu(Gamma_delta(x))` (two-sided) or `mu(Phi_delta(x))`
/// (one-sided) looks null at `mu`-typical centers.
pub fn expansiveness_verdict<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    s: &VerdictSettings,
) -> Result<ExpansivenessVerdict> {
    if !(s.threshold > 0.0) {
        return Err(Error::InvalidArgument("threshold must be positive".into()));
    }
    if s.x_probes < 20 {
        return Err(Error::InvalidArgument("x_probes must be at least 20".into()));
    }
    let centers = probe_centers(mu, s.seed, s.x_probes);
    let mut probes = Vec::with_capacity(centers.len());
    for (i, x) in centers.iter().enumerate() {
        let series = decay_series(f, mu, x, &s.decay(i))?;
        probes.push(ProbeSummary {
            center: series.center.clone(),
            first: series.estimates[0],
            terminal: *series.terminal(),
        });
    }
    let worst_upper_bound = probes
        .iter()
        .map(|p| p.terminal.ci_high)
        .fold(0.0, f64::max);
    let (witness_idx, witness_lower_bound) = probes
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p.terminal.ci_low))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let worst_relative_survival = probes
        .iter()
        .filter(|p| p.first.estimate > 0.0)
        .map(|p| p.terminal.estimate / p.first.estimate)
        .fold(0.0, f64::max);
    let verdict = if worst_upper_bound <= s.threshold {
        Verdict::EvidenceExpansive
    } else if witness_lower_bound >= s.threshold {
        Verdict::EvidenceNotExpansive
    } else {
        Verdict::Inconclusive
    };
    let witness = (verdict == Verdict::EvidenceNotExpansive).then(|| probes[witness_idx].center.clone());
    Ok(ExpansivenessVerdict {
        system: f.name.clone(),
        measure: mu.name.clone(),
        delta: s.delta,
        sided: s.sided,
        verdict,
        x_probe_count: probes.len(),
        n_max: s.n_max,
        samples: s.samples,
        threshold: s.threshold,
        worst_upper_bound,
        witness,
        witness_lower_bound,
        worst_relative_survival,
        probes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerConsistencyReport {
    pub system: String,
    pub k: u32,
    pub deltas: Vec<f64>,
    /// Verdicts for `f` with window `k * n_max`.
    pub base: Vec<Verdict>,
    /// Verdicts for `f^k` with window `n_max`.
    pub power: Vec<Verdict>,
    pub contradictions: Vec<String>,
    pub consistent: bool,
    /// Same verdict at every delta.
    pub identical: bool,
}

/// Compare verdicts for `f` and `f^k` over a grid of scales.
///
/// `f` runs with window `k * n_max` so that its dynamical balls are contained
/// in those of `f^k` with window `n_max`; with shared seeds the base counts
/// are then pointwise below the power counts.
pub fn power_consistency_check<S: Scalar>(
    f: &SystemSpec<S>,
    mu: &MeasureSpec<S>,
    k: u32,
    deltas: &[f64],
    s: &VerdictSettings,
) -> Result<PowerConsistencyReport> {
    if k < 2 {
        return Err(Error::InvalidArgument("power k must be at least 2".into()));
    }
    if deltas.is_empty() {
        return Err(Error::InvalidArgument("empty delta grid".into()));
    }
    let fk = f.power(k)?;
    let mut base = Vec::new();
    let mut power = Vec::new();
    let mut contradictions = Vec::new();
    for &delta in deltas {
        let sb = VerdictSettings {
            delta,
            n_max: s.n_max * k,
            ..*s
        };
        let sp = VerdictSettings { delta, ..*s };
        let vb = expansiveness_verdict(f, mu, &sb)?.verdict;
        let vp = expansiveness_verdict(&fk, mu, &sp)?.verdict;
        if vp == Verdict::EvidenceExpansive && vb == Verdict::EvidenceNotExpansive {
            contradictions.push(format!(
                "delta {delta}: {} evidence_expansive but {} evidence_not_expansive",
                fk.name, f.name
            ));
        }
        base.push(vb);
        power.push(vp);
    }
    let all = |v: &[Verdict], w: Verdict| v.iter().all(|&x| x == w);
    if (all(&base, Verdict::EvidenceExpansive) && all(&power, Verdict::EvidenceNotExpansive))
        || (all(&base, Verdict::EvidenceNotExpansive) && all(&power, Verdict::EvidenceExpansive))
    {
        contradictions.push("opposite verdicts at every tested delta".into());
    }
    Ok(PowerConsistencyReport {
        system: f.name.clone(),
        k,
        deltas: deltas.to_vec(),
        identical: base == power,
        consistent: contradictions.is_empty(),
        base,
        power,
        contradictions,
    })
}
