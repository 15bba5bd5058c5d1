//! Executable checks of the structural results over the zoo.
//!
//! Each case runs estimators with fixed budgets and compares the results
//! with a declarative expectation. Case errors become `inconclusive`
//! outcomes. Cases run one after another with parallelism inside the
//! estimators, so reports are byte-identical for any worker count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::entropy::{
    bk_entropy, implication_from_estimate, power_law_check, volume_expanding_check, EntropyEstimate,
    EntropySettings, ImplicationStatus,
};
use crate::error::{Error, Result};
use crate::expansiveness::{
    converging_semiorbit_fraction, decay_series, expansiveness_verdict, fubini_cross_check,
    generator_check, grid_cover, periodic_fraction, power_consistency_check, product_diagonal_test,
    DecaySettings, ExpansivenessVerdict, GeneratorSettings, SamplingMode, SemiOrbitSettings, Sided,
    Verdict, VerdictSettings,
};
use crate::geometry::{Point, SpaceDescriptor};
use crate::measures::{make_lebesgue, measure_by_name, MeasureSpec};
use crate::stats::Proportion;
use crate::systems::{build_denjoy, golden_conjugate, system_by_name, PointMap, SystemSpec};

type Sys = SystemSpec<f64>;
type Mu = MeasureSpec<f64>;

const CAT_ENTROPY: f64 = 0.962_423_650_119_206_9;
const DENJOY_N: usize = 64;
const DENJOY_GAP_TOTAL: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Vacuous,
    Inconclusive,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Vacuous => "vacuous",
            Outcome::Inconclusive => "inconclusive",
        })
    }
}

/// Static description of a battery case.
#[derive(Clone, Copy, Debug)]
pub struct TheoremCase {
    pub id: &'static str,
    pub claim: &'static str,
    pub restatement: &'static str,
    pub systems: &'static [&'static str],
    pub measures: &'static [&'static str],
    pub budgets: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub label: String,
    pub observed: String,
    pub expected: String,
    pub outcome: Outcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub id: String,
    pub claim: String,
    pub systems: Vec<String>,
    pub measures: Vec<String>,
    pub outcome: Outcome,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub seed: u64,
    pub sample_scale: u64,
    pub cases: Vec<CaseReport>,
    /// Every non-vacuous case passed.
    pub passed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryOptions {
    pub seed: u64,
    /// Multiplier on every Monte Carlo sample budget.
    pub sample_scale: u64,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            sample_scale: 1,
        }
    }
}

pub const CASES: &[TheoremCase] = &[
    TheoremCase {
        id: "isometry",
        claim: "An isometry is not expansive for any nonatomic probability measure.",
        restatement: "Rotation by the golden conjugate under Lebesgue at delta 0.05: every decay estimate lies in [0.09, 0.11] and the two-sided verdict is evidence_not_expansive; the identity gives the same verdict.",
        systems: &["rotation", "identity"],
        measures: &["lebesgue"],
        budgets: "decay: 1e5 direct samples, n <= 20, two centers; verdicts: 20 probes x 2e4 samples, n_max 20, threshold 0.01",
    },
    TheoremCase {
        id: "decay-law",
        claim: "For the doubling map the one-sided ball B[x, delta, n] has Lebesgue measure 2 delta 2^-(n-1) while 2^(n-1) delta is small.",
        restatement: "Doubling, delta 0.01, x in {1/3, 0.1}, n <= 8: estimates within 3 Wilson half-widths of the closed form, with direct and ball-conditioned sampling.",
        systems: &["doubling"],
        measures: &["lebesgue"],
        budgets: "1e5 samples per series, four series",
    },
    TheoremCase {
        id: "bk-entropy",
        claim: "The metric entropy from ball decay matches log 2 for doubling and log((3 + sqrt 5) / 2) for the cat map, and vanishes for the identity.",
        restatement: "Extrapolated entropy over delta in {0.02, 0.01, 0.005}: doubling in [0.64, 0.75], cat in [0.86, 1.06], identity exactly 0.",
        systems: &["doubling", "cat", "identity"],
        measures: &["lebesgue"],
        budgets: "30 probes x 1e5 samples, n <= 14",
    },
    TheoremCase {
        id: "variational",
        claim: "The metric entropy never exceeds the topological entropy.",
        restatement: "Extrapolated entropy of doubling <= log 2 + 0.05 and of the cat map <= 0.9624 + 0.1.",
        systems: &["doubling", "cat"],
        measures: &["lebesgue"],
        budgets: "shared with bk-entropy",
    },
    TheoremCase {
        id: "power",
        claim: "f is expansive exactly when f^k is, and entropy scales as e(f^k) = k e(f).",
        restatement: "|e(f^2) - 2 e(f)| within tolerance for doubling; identical verdicts for f (window 2 n_max) and f^2 (window n_max) for every zoo system over its delta grid.",
        systems: &["identity", "rotation", "doubling", "cat", "interval-square", "denjoy", "tent"],
        measures: &["lebesgue", "denjoy-minimal"],
        budgets: "entropy: 30 probes x 2e4 samples; verdicts: 20 probes x 5e3 samples, n_max 10",
    },
    TheoremCase {
        id: "thD",
        claim: "No homeomorphism of a compact interval is expansive for a nonatomic Borel probability.",
        restatement: "x -> x^2 on [0, 1] under Lebesgue and its pushforwards by x^2 and sqrt(x): evidence_not_expansive at delta 0.2, 0.1, 0.05.",
        systems: &["interval-square"],
        measures: &["lebesgue", "lebesgue-squared", "lebesgue-sqrt"],
        budgets: "20 probes x 2e4 samples, n_max 20, threshold 0.01",
    },
    TheoremCase {
        id: "circle1",
        claim: "A circle homeomorphism is expansive for some nonatomic probability precisely when it is a Denjoy map.",
        restatement: "The Denjoy map (N = 64) with its Cantor measure at delta = half the smallest retained gap is evidence_expansive by n_max 30 at threshold 0.05; the golden rotation under Lebesgue, the Cantor measure and its image under the staircase is evidence_not_expansive at delta 0.2, 0.1, 0.05. The construction has rotation number alpha and its staircase semiconjugates it to the rotation.",
        systems: &["denjoy", "rotation"],
        measures: &["denjoy-minimal", "lebesgue", "denjoy-collapsed"],
        budgets: "20 probes x 2e4 samples; rotation number over 2e6 iterates",
    },
    TheoremCase {
        id: "diagonal",
        claim: "f is expansive for mu exactly when the diagonal is isolated for f x f under mu x mu.",
        restatement: "The pair estimate near the diagonal matches the probe-averaged decay terminal within joined 95% intervals for doubling, rotation and cat.",
        systems: &["doubling", "rotation", "cat"],
        measures: &["lebesgue"],
        budgets: "5e4 pairs and 20 probes x 5e4 samples per system",
    },
    TheoremCase {
        id: "generator",
        claim: "f is positively expansive for mu exactly when it has a positive generator for mu.",
        restatement: "The cover by open balls of radius 0.1 on a 0.05 grid is a generator for doubling (every intersection <= 0.01) and is not one for the identity (some intersection reaches the ball mass).",
        systems: &["doubling", "identity"],
        measures: &["lebesgue"],
        budgets: "16 adversarial and 16 random sequences, 2e4 samples each, n_max 10",
    },
    TheoremCase {
        id: "thA",
        claim: "For an expansive measure the periodic points form a null set.",
        restatement: "Cat map, periods <= 6, eps 1e-4: fraction of near-periodic Lebesgue samples <= 1e-3; identity gives fraction 1.",
        systems: &["cat", "identity"],
        measures: &["lebesgue"],
        budgets: "1e5 samples",
    },
    TheoremCase {
        id: "semi-orbits",
        claim: "For an expansive homeomorphism the points with converging forward and backward orbits form a null set.",
        restatement: "x -> x^2 gives fraction >= 0.99 and the rotation 0; the cat and Denjoy maps, whose verdicts are evidence_expansive, have fraction lower bound <= the verdict threshold.",
        systems: &["interval-square", "rotation", "cat", "denjoy"],
        measures: &["lebesgue", "denjoy-minimal"],
        budgets: "2e4 samples, orbit length 64, tail window 4, tolerance 1e-6",
    },
    TheoremCase {
        id: "entropy-expansive",
        claim: "Positive metric entropy forces positive expansiveness.",
        restatement: "For every zoo system and delta where the entropy lower bound is positive, the one-sided verdict is not evidence_not_expansive.",
        systems: &["identity", "rotation", "doubling", "cat", "interval-square", "denjoy", "tent"],
        measures: &["lebesgue", "denjoy-minimal"],
        budgets: "entropy: 30 probes x 2e4 samples (benchmarks reuse bk-entropy); verdicts: 20 probes x 2e4 samples",
    },
    TheoremCase {
        id: "volume-expanding",
        claim: "A volume expanding map is positively expansive for Lebesgue measure.",
        restatement: "Doubling and tent are detected with lambda >= 1.9, the rotation is not; detected maps are not evidence_not_expansive under Lebesgue at delta 0.01.",
        systems: &["doubling", "tent", "rotation"],
        measures: &["lebesgue"],
        budgets: "64 probes, horizon 20; verdicts 20 probes x 2e4 samples",
    },
    TheoremCase {
        id: "atomic",
        claim: "A measure with an atom is never expansive.",
        restatement: "The point mass at 0.25 gives evidence_not_expansive for doubling and rotation at delta 0.1, 0.01, 0.001.",
        systems: &["doubling", "rotation"],
        measures: &["dirac:0.25"],
        budgets: "20 probes x 2e4 samples, n_max 20",
    },
    TheoremCase {
        id: "conjugacy",
        claim: "Expansiveness is preserved by topological conjugacy when the measure is pushed forward.",
        restatement: "Doubling under Lebesgue and its conjugate by x -> x^2 under the pushed measure share verdicts at delta 0.05, 0.02, 0.01; likewise the rotation.",
        systems: &["doubling", "rotation"],
        measures: &["lebesgue", "lebesgue-squared"],
        budgets: "20 probes x 2e4 samples, n_max 20",
    },
];

pub fn case_ids() -> Vec<&'static str> {
    CASES.iter().map(|c| c.id).collect()
}

pub fn find_case(id: &str) -> Option<&'static TheoremCase> {
    CASES.iter().find(|c| c.id == id)
}

/// Human-readable description of a case: claim, restatement and budgets.
pub fn explain(id: &str) -> Result<String> {
    let c = find_case(id).ok_or_else(|| Error::UnknownName {
        kind: "battery case",
        name: id.to_string(),
    })?;
    Ok(format!(
        "case: {}\nclaim: {}\ncheck: {}\nsystems: {}\nmeasures: {}\nbudgets: {}\n",
        c.id,
        c.claim,
        c.restatement,
        c.systems.join(", "),
        c.measures.join(", "),
        c.budgets
    ))
}

fn check(label: impl Into<String>, observed: String, expected: impl Into<String>, outcome: Outcome) -> Check {
    Check {
        label: label.into(),
        observed,
        expected: expected.into(),
        outcome,
    }
}

fn pass_if(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn in_range(label: impl Into<String>, value: f64, lo: f64, hi: f64) -> Check {
    check(
        label,
        format!("{value:.6}"),
        format!("in [{lo}, {hi}]"),
        pass_if(value >= lo && value <= hi),
    )
}

fn verdict_check(label: impl Into<String>, v: &ExpansivenessVerdict, want: Verdict) -> Check {
    let outcome = if v.verdict == want {
        Outcome::Pass
    } else if v.verdict == Verdict::Inconclusive {
        Outcome::Inconclusive
    } else {
        Outcome::Fail
    };
    check(
        label,
        format!(
            "{} (worst upper {:.3e}, witness lower {:.3e})",
            v.verdict, v.worst_upper_bound, v.witness_lower_bound
        ),
        want.to_string(),
        outcome,
    )
}

fn not_verdict_check(label: impl Into<String>, v: &ExpansivenessVerdict, avoid: Verdict) -> Check {
    check(
        label,
        v.verdict.to_string(),
        format!("not {avoid}"),
        pass_if(v.verdict != avoid),
    )
}

fn combine(checks: &[Check]) -> Outcome {
    if checks.iter().any(|c| c.outcome == Outcome::Fail) {
        Outcome::Fail
    } else if checks.iter().any(|c| c.outcome == Outcome::Inconclusive) {
        Outcome::Inconclusive
    } else if !checks.is_empty() && checks.iter().all(|c| c.outcome == Outcome::Vacuous) {
        Outcome::Vacuous
    } else {
        Outcome::Pass
    }
}

fn system(name: &str) -> Result<Sys> {
    system_by_name(name, &BTreeMap::new())
}

fn measure(name: &str, space: SpaceDescriptor<f64>) -> Result<Mu> {
    measure_by_name(name, space, &BTreeMap::new())
}

fn smallest_denjoy_gap() -> Result<f64> {
    Ok(build_denjoy(golden_conjugate::<f64>(), DENJOY_N, DENJOY_GAP_TOTAL)?.smallest_gap())
}

/// Canonical measure, sidedness and delta grid for a zoo system.
fn zoo_setup(name: &str) -> Result<(Sys, Mu, Sided, Vec<f64>)> {
    let f = system(name)?;
    let grid = vec![0.05, 0.02, 0.01];
    Ok(match name {
        "denjoy" => {
            let mu = measure("denjoy-minimal", f.space)?;
            (f, mu, Sided::TwoSided, vec![0.01, 0.002, smallest_denjoy_gap()? / 2.0])
        }
        "doubling" | "tent" => {
            let mu = make_lebesgue(f.space);
            (f, mu, Sided::OneSided, grid)
        }
        _ => {
            let mu = make_lebesgue(f.space);
            (f, mu, Sided::TwoSided, grid)
        }
    })
}

struct Runner {
    opts: BatteryOptions,
    entropies: BTreeMap<String, EntropyEstimate>,
    verdicts: BTreeMap<String, ExpansivenessVerdict>,
}

impl Runner {
    fn samples(&self, base: u64) -> u64 {
        base * self.opts.sample_scale
    }

    fn verdict_settings(&self, delta: f64, sided: Sided) -> VerdictSettings {
        VerdictSettings {
            delta,
            sided,
            samples: self.samples(20_000),
            seed: self.opts.seed,
            ..VerdictSettings::default()
        }
    }

    fn verdict(&mut self, f: &Sys, mu: &Mu, s: &VerdictSettings) -> Result<ExpansivenessVerdict> {
        let key = format!("{}|{}|{}|{:?}", f.name, mu.name, f.params.len(), s);
        if let Some(v) = self.verdicts.get(&key) {
            return Ok(v.clone());
        }
        let v = expansiveness_verdict(f, mu, s)?;
        self.verdicts.insert(key, v.clone());
        Ok(v)
    }

    fn denjoy_verdict(&mut self) -> Result<ExpansivenessVerdict> {
        let (f, mu, _, _) = zoo_setup("denjoy")?;
        let s = VerdictSettings {
            n_max: 30,
            threshold: 0.05,
            ..self.verdict_settings(smallest_denjoy_gap()? / 2.0, Sided::TwoSided)
        };
        self.verdict(&f, &mu, &s)
    }

    fn entropy_settings(&self, samples: u64) -> EntropySettings {
        EntropySettings {
            samples: self.samples(samples),
            seed: self.opts.seed,
            ..EntropySettings::default()
        }
    }

    fn entropy(&mut self, name: &str, samples: u64) -> Result<EntropyEstimate> {
        let key = format!("{name}|{samples}");
        if let Some(e) = self.entropies.get(&key) {
            return Ok(e.clone());
        }
        let (f, mu, _, _) = zoo_setup(name)?;
        let e = bk_entropy(&f, &mu, &self.entropy_settings(samples))?;
        self.entropies.insert(key, e.clone());
        Ok(e)
    }

    fn run(&mut self, id: &str) -> Result<Vec<Check>> {
        match id {
            "isometry" => self.isometry(),
            "decay-law" => self.decay_law(),
            "bk-entropy" => self.bk(),
            "variational" => self.variational(),
            "power" => self.power(),
            "thD" => self.interval(),
            "circle1" => self.circle(),
            "diagonal" => self.diagonal(),
            "generator" => self.generator(),
            "thA" => self.periodic(),
            "semi-orbits" => self.semi_orbits(),
            "entropy-expansive" => self.entropy_expansive(),
            "volume-expanding" => self.volume(),
            "atomic" => self.atomic(),
            "conjugacy" => self.conjugacy(),
            other => Err(Error::UnknownName {
                kind: "battery case",
                name: other.to_string(),
            }),
        }
    }

    fn isometry(&mut self) -> Result<Vec<Check>> {
        let rot = system("rotation")?;
        let leb = make_lebesgue(rot.space);
        let mut out = Vec::new();
        for x in [0.3, 0.77] {
            let s = DecaySettings {
                delta: 0.05,
                sided: Sided::TwoSided,
                n_max: 20,
                samples: self.samples(100_000),
                seed: self.opts.seed,
                mode: SamplingMode::Direct,
            };
            let series = decay_series(&rot, &leb, &Point::circle(x), &s)?;
            let (lo, hi) = series
                .estimates
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
                    (a.min(p.estimate), b.max(p.estimate))
                });
            out.push(check(
                format!("rotation decay at x = {x}"),
                format!("estimates in [{lo:.5}, {hi:.5}]"),
                "all in [0.09, 0.11]",
                pass_if(lo >= 0.09 && hi <= 0.11),
            ));
        }
        let s = self.verdict_settings(0.05, Sided::TwoSided);
        let v = self.verdict(&rot, &leb, &s)?;
        out.push(verdict_check("rotation verdict, delta 0.05", &v, Verdict::EvidenceNotExpansive));
        let id = system("identity")?;
        let v = self.verdict(&id, &leb, &s)?;
        out.push(verdict_check("identity verdict, delta 0.05", &v, Verdict::EvidenceNotExpansive));
        Ok(out)
    }

    fn decay_law(&mut self) -> Result<Vec<Check>> {
        let f = system("doubling")?;
        let leb = make_lebesgue(f.space);
        let mut out = Vec::new();
        for x in [1.0 / 3.0, 0.1] {
            for mode in [SamplingMode::Direct, SamplingMode::BallConditioned] {
                let s = DecaySettings {
                    delta: 0.01,
                    sided: Sided::OneSided,
                    n_max: 8,
                    samples: self.samples(100_000),
                    seed: self.opts.seed,
                    mode,
                };
                let series = decay_series(&f, &leb, &Point::circle(x), &s)?;
                let worst = series
                    .n_values
                    .iter()
                    .zip(&series.estimates)
                    .map(|(&n, p)| {
                        let exact = 0.02 * 0.5f64.powi(n as i32 - 1);
                        (p.estimate - exact).abs() / p.half_width().max(f64::MIN_POSITIVE)
                    })
                    .fold(0.0, f64::max);
                out.push(check(
                    format!("x = {x:.4}, {mode:?}"),
                    format!("max deviation {worst:.3} half-widths"),
                    "<= 3 half-widths for n <= 8",
                    pass_if(worst <= 3.0),
                ));
            }
        }
        Ok(out)
    }

    fn bk(&mut self) -> Result<Vec<Check>> {
        let d = self.entropy("doubling", 100_000)?;
        let c = self.entropy("cat", 100_000)?;
        let i = self.entropy("identity", 100_000)?;
        Ok(vec![
            in_range("doubling entropy", d.extrapolated_e, 0.64, 0.75),
            in_range("cat entropy", c.extrapolated_e, 0.86, 1.06),
            check(
                "identity entropy",
                format!("{}", i.extrapolated_e),
                "exactly 0",
                pass_if(i.extrapolated_e == 0.0),
            ),
        ])
    }

    fn variational(&mut self) -> Result<Vec<Check>> {
        let d = self.entropy("doubling", 100_000)?;
        let c = self.entropy("cat", 100_000)?;
        let ld = std::f64::consts::LN_2 + 0.05;
        let lc = CAT_ENTROPY + 0.1;
        Ok(vec![
            check(
                "doubling entropy",
                format!("{:.6}", d.extrapolated_e),
                format!("<= {ld:.4}"),
                pass_if(d.extrapolated_e <= ld),
            ),
            check(
                "cat entropy",
                format!("{:.6}", c.extrapolated_e),
                format!("<= {lc:.4}"),
                pass_if(c.extrapolated_e <= lc),
            ),
        ])
    }

    fn power(&mut self) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        let (f, mu, _, _) = zoo_setup("doubling")?;
        let es = EntropySettings {
            x_probes: 30,
            ..self.entropy_settings(20_000)
        };
        let r = power_law_check(&f, &mu, 2, &es)?;
        out.push(check(
            "doubling e(f^2) vs 2 e(f)",
            format!(
                "|{:.4} - 2 x {:.4}| = {:.4}",
                r.e_power,
                r.e_base,
                (r.e_power - 2.0 * r.e_base).abs()
            ),
            format!("<= {:.4}", r.tolerance),
            pass_if(r.holds),
        ));
        for name in crate::systems::zoo_names() {
            let (f, mu, sided, grid) = zoo_setup(name)?;
            let s = VerdictSettings {
                n_max: 10,
                samples: self.samples(5_000),
                ..self.verdict_settings(grid[0], sided)
            };
            let r = power_consistency_check(&f, &mu, 2, &grid, &s)?;
            let outcome = if r.identical {
                Outcome::Pass
            } else if !r.consistent {
                Outcome::Fail
            } else if r.base.contains(&Verdict::Inconclusive) || r.power.contains(&Verdict::Inconclusive) {
                Outcome::Inconclusive
            } else {
                Outcome::Fail
            };
            let show = |v: &[Verdict]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("/");
            out.push(check(
                format!("{name}: f vs f^2"),
                format!("{} vs {}", show(&r.base), show(&r.power)),
                "identical verdicts",
                outcome,
            ));
        }
        Ok(out)
    }

    fn interval(&mut self) -> Result<Vec<Check>> {
        let f = system("interval-square")?;
        let mut out = Vec::new();
        for m in ["lebesgue", "lebesgue-squared", "lebesgue-sqrt"] {
            let mu = measure(m, f.space)?;
            for delta in [0.2, 0.1, 0.05] {
                let v = self.verdict(&f, &mu, &self.verdict_settings(delta, Sided::TwoSided))?;
                out.push(verdict_check(
                    format!("{m}, delta {delta}"),
                    &v,
                    Verdict::EvidenceNotExpansive,
                ));
            }
        }
        Ok(out)
    }

    fn circle(&mut self) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        let alpha = golden_conjugate::<f64>();
        let d = build_denjoy(alpha, DENJOY_N, DENJOY_GAP_TOTAL)?;
        let rho = d.rotation_number(0.1, 2_000_000);
        out.push(check(
            "denjoy rotation number",
            format!("{rho:.9}"),
            format!("within 1e-6 of {alpha:.9}"),
            pass_if((rho - alpha).abs() <= 1e-6),
        ));
        let defect = d.semiconjugacy_defect();
        out.push(check(
            "staircase semiconjugacy defect",
            format!("{defect:.3e}"),
            "<= 1e-9",
            pass_if(defect <= 1e-9),
        ));
        let v = self.denjoy_verdict()?;
        out.push(verdict_check(
            format!("denjoy, delta {:.3e}, threshold 0.05", v.delta),
            &v,
            Verdict::EvidenceExpansive,
        ));
        let rot = system("rotation")?;
        for m in ["lebesgue", "denjoy-minimal", "denjoy-collapsed"] {
            let mu = measure(m, rot.space)?;
            for delta in [0.2, 0.1, 0.05] {
                let v = self.verdict(&rot, &mu, &self.verdict_settings(delta, Sided::TwoSided))?;
                out.push(verdict_check(
                    format!("rotation under {m}, delta {delta}"),
                    &v,
                    Verdict::EvidenceNotExpansive,
                ));
            }
        }
        Ok(out)
    }

    fn diagonal(&mut self) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for (name, sided, n_max) in [
            ("doubling", Sided::OneSided, 8),
            ("rotation", Sided::TwoSided, 10),
            ("cat", Sided::TwoSided, 12),
        ] {
            let f = system(name)?;
            let mu = make_lebesgue(f.space);
            let s = DecaySettings {
                delta: 0.05,
                sided,
                n_max,
                samples: self.samples(50_000),
                seed: self.opts.seed,
                mode: SamplingMode::Auto,
            };
            let r = fubini_cross_check(&f, &mu, &s, 20)?;
            out.push(check(
                format!("{name}, delta 0.05, n_max {n_max}"),
                format!(
                    "diagonal [{:.4e}, {:.4e}], probes [{:.4e}, {:.4e}]",
                    r.diagonal.ci_low, r.diagonal.ci_high, r.probe_ci.0, r.probe_ci.1
                ),
                "overlapping 95% intervals",
                pass_if(r.agree),
            ));
        }
        Ok(out)
    }

    fn generator(&mut self) -> Result<Vec<Check>> {
        let s = GeneratorSettings {
            mc_samples: self.samples(20_000),
            seed: self.opts.seed,
            ..GeneratorSettings::default()
        };
        let dbl = system("doubling")?;
        let leb = make_lebesgue(dbl.space);
        let cover = grid_cover(&dbl.space, 0.05, 0.1)?;
        let r = generator_check(&dbl, &leb, &cover, &s)?;
        let mut out = vec![check(
            "doubling, radius 0.1 cover",
            format!(
                "max estimate {:.3e}, max upper {:.3e}",
                r.max_intersection_estimate, r.max_upper_bound
            ),
            "generator evidence, max estimate <= 0.01",
            pass_if(r.is_generator_evidence && r.max_intersection_estimate <= 0.01),
        )];
        let id = system("identity")?;
        let r = generator_check(&id, &leb, &cover, &s)?;
        out.push(check(
            "identity, radius 0.1 cover",
            format!("max upper {:.4}", r.max_upper_bound),
            "not a generator, some intersection reaches ball mass 0.2",
            pass_if(!r.is_generator_evidence && r.max_upper_bound >= 0.2),
        ));
        Ok(out)
    }

    fn periodic(&mut self) -> Result<Vec<Check>> {
        let cat = system("cat")?;
        let leb = make_lebesgue(cat.space);
        let p = periodic_fraction(&cat, &leb, 6, 1e-4, self.samples(100_000), self.opts.seed)?;
        let id = system("identity")?;
        let q = periodic_fraction(&id, &make_lebesgue(id.space), 6, 1e-4, self.samples(100_000), self.opts.seed)?;
        Ok(vec![
            check(
                "cat, period <= 6, eps 1e-4",
                show_prop(&p),
                "upper bound <= 1e-3",
                pass_if(p.ci_high <= 1e-3),
            ),
            check("identity", show_prop(&q), "exactly 1", pass_if(q.estimate == 1.0)),
        ])
    }

    fn semi_orbits(&mut self) -> Result<Vec<Check>> {
        let s = SemiOrbitSettings {
            samples: self.samples(20_000),
            seed: self.opts.seed,
            ..SemiOrbitSettings::default()
        };
        let sq = system("interval-square")?;
        let a = converging_semiorbit_fraction(&sq, &make_lebesgue(sq.space), &s)?;
        let rot = system("rotation")?;
        let b = converging_semiorbit_fraction(&rot, &make_lebesgue(rot.space), &s)?;
        let mut out = vec![
            check("x^2 on [0, 1]", show_prop(&a), ">= 0.99", pass_if(a.estimate >= 0.99)),
            check("rotation", show_prop(&b), "exactly 0", pass_if(b.estimate == 0.0)),
        ];
        let cat = system("cat")?;
        let leb = make_lebesgue(cat.space);
        let cat_v = self.verdict(&cat, &leb, &self.verdict_settings(0.05, Sided::TwoSided))?;
        let den_v = self.denjoy_verdict()?;
        let (den, nu, _, _) = zoo_setup("denjoy")?;
        for (f, mu, v) in [(&cat, &leb, cat_v), (&den, &nu, den_v)] {
            let frac = converging_semiorbit_fraction(f, mu, &s)?;
            let outcome = if v.verdict != Verdict::EvidenceExpansive {
                Outcome::Vacuous
            } else {
                pass_if(frac.ci_low <= v.threshold)
            };
            out.push(check(
                format!("{} (verdict {})", f.name, v.verdict),
                show_prop(&frac),
                format!("lower bound <= {} when expansive", v.threshold),
                outcome,
            ));
        }
        Ok(out)
    }

    fn entropy_expansive(&mut self) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for name in crate::systems::zoo_names() {
            let est = match *name {
                "doubling" | "cat" => self.entropy(name, 100_000)?,
                _ => self.entropy(name, 20_000)?,
            };
            let (f, mu, _, _) = zoo_setup(name)?;
            let vs = self.verdict_settings(0.05, Sided::OneSided);
            let r = implication_from_estimate(&f, &mu, &est, &vs)?;
            let outcome = match r.status {
                ImplicationStatus::Holds => Outcome::Pass,
                ImplicationStatus::Violated => Outcome::Fail,
                ImplicationStatus::Vacuous => Outcome::Vacuous,
            };
            let rows = r
                .rows
                .iter()
                .map(|row| {
                    let v = row.verdict.map_or("-".to_string(), |v| v.to_string());
                    format!("{}: e_lower {:.4}, {}", row.delta, row.e_lower, v)
                })
                .collect::<Vec<_>>()
                .join("; ");
            out.push(check(
                format!("{name} under {}", mu.name),
                rows,
                "not evidence_not_expansive where e_lower > 0",
                outcome,
            ));
        }
        Ok(out)
    }

    fn volume(&mut self) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for name in ["doubling", "tent"] {
            let f = system(name)?;
            let r = volume_expanding_check(&f, 20, 64)?;
            out.push(check(
                format!("{name} volume expansion"),
                format!("detected {}, lambda {:.4}", r.detected, r.lambda_est),
                "detected, lambda >= 1.9",
                pass_if(r.detected && r.lambda_est >= 1.9),
            ));
            if r.detected {
                let v = self.verdict(&f, &make_lebesgue(f.space), &self.verdict_settings(0.01, Sided::OneSided))?;
                out.push(not_verdict_check(
                    format!("{name} one-sided verdict, delta 0.01"),
                    &v,
                    Verdict::EvidenceNotExpansive,
                ));
            }
        }
        let rot = system("rotation")?;
        let r = volume_expanding_check(&rot, 20, 64)?;
        out.push(check(
            "rotation volume expansion",
            format!("detected {}, lambda {:.4}", r.detected, r.lambda_est),
            "not detected",
            pass_if(!r.detected),
        ));
        Ok(out)
    }

    fn atomic(&mut self) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        for name in ["doubling", "rotation"] {
            let f = system(name)?;
            let mu = measure("dirac:0.25", f.space)?;
            let sided = if f.invertible() { Sided::TwoSided } else { Sided::OneSided };
            for delta in [0.1, 0.01, 0.001] {
                let v = self.verdict(&f, &mu, &self.verdict_settings(delta, sided))?;
                out.push(verdict_check(
                    format!("{name}, delta {delta}"),
                    &v,
                    Verdict::EvidenceNotExpansive,
                ));
            }
        }
        Ok(out)
    }

    fn conjugacy(&mut self) -> Result<Vec<Check>> {
        let mut out = Vec::new();
        let phi: PointMap<f64> = std::sync::Arc::new(|p: &Point<f64>| Point::circle(p.x() * p.x()));
        let phi_inv: PointMap<f64> = std::sync::Arc::new(|p: &Point<f64>| Point::circle(p.x().sqrt()));
        for (name, sided) in [("doubling", Sided::OneSided), ("rotation", Sided::TwoSided)] {
            let f = system(name)?;
            let g = f.conjugate(&format!("{name}-conjugate"), phi.clone(), phi_inv.clone());
            let leb = make_lebesgue(f.space);
            let pushed = measure("lebesgue-squared", f.space)?;
            for delta in [0.05, 0.02, 0.01] {
                let s = self.verdict_settings(delta, sided);
                let a = self.verdict(&f, &leb, &s)?.verdict;
                let b = self.verdict(&g, &pushed, &s)?.verdict;
                let outcome = if a == b && a != Verdict::Inconclusive {
                    Outcome::Pass
                } else if a == Verdict::Inconclusive || b == Verdict::Inconclusive {
                    Outcome::Inconclusive
                } else {
                    Outcome::Fail
                };
                out.push(check(
                    format!("{name}, delta {delta}"),
                    format!("{a} vs {b}"),
                    "same definite verdict",
                    outcome,
                ));
            }
        }
        Ok(out)
    }
}

fn show_prop(p: &Proportion) -> String {
    format!("{:.4e} [{:.4e}, {:.4e}]", p.estimate, p.ci_low, p.ci_high)
}

/// Run the cases named in `filter` (all cases when `None`) in catalogue order.
pub fn run_battery(filter: Option<&[String]>, seed: u64) -> Result<BatteryReport> {
    run_battery_with(
        filter,
        &BatteryOptions {
            seed,
            ..BatteryOptions::default()
        },
    )
}

pub fn run_battery_with(filter: Option<&[String]>, opts: &BatteryOptions) -> Result<BatteryReport> {
    if opts.sample_scale == 0 {
        return Err(Error::InvalidArgument("sample scale must be positive".into()));
    }
    if let Some(ids) = filter {
        if let Some(bad) = ids.iter().find(|id| find_case(id).is_none()) {
            return Err(Error::UnknownName {
                kind: "battery case",
                name: bad.clone(),
            });
        }
    }
    let mut runner = Runner {
        opts: *opts,
        entropies: BTreeMap::new(),
        verdicts: BTreeMap::new(),
    };
    let cases: Vec<CaseReport> = CASES
        .iter()
        .filter(|c| filter.is_none_or(|ids| ids.iter().any(|id| id == c.id)))
        .map(|c| {
            let (checks, error, outcome) = match runner.run(c.id) {
                Ok(checks) => {
                    let o = combine(&checks);
                    (checks, None, o)
                }
                Err(e) => (Vec::new(), Some(e.to_string()), Outcome::Inconclusive),
            };
            CaseReport {
                id: c.id.to_string(),
                claim: c.claim.to_string(),
                systems: c.systems.iter().map(|s| s.to_string()).collect(),
                measures: c.measures.iter().map(|s| s.to_string()).collect(),
                outcome,
                checks,
                error,
            }
        })
        .collect();
    let passed = cases
        .iter()
        .all(|c| matches!(c.outcome, Outcome::Pass | Outcome::Vacuous));
    Ok(BatteryReport {
        seed: opts.seed,
        sample_scale: opts.sample_scale,
        cases,
        passed,
    })
}

impl BatteryReport {
    pub fn failing_ids(&self) -> Vec<&str> {
        self.cases
            .iter()
            .filter(|c| !matches!(c.outcome, Outcome::Pass | Outcome::Vacuous))
            .map(|c| c.id.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# Battery report\n");
        let _ = writeln!(s, "seed: {}, sample scale: {}\n", self.seed, self.sample_scale);
        let _ = writeln!(s, "| case | outcome | claim |");
        let _ = writeln!(s, "|---|---|---|");
        for c in &self.cases {
            let _ = writeln!(s, "| {} | {} | {} |", c.id, c.outcome, c.claim);
        }
        for c in &self.cases {
            let _ = writeln!(s, "\n## {}: {}\n", c.id, c.outcome);
            let _ = writeln!(s, "{}\n", c.claim);
            if let Some(e) = &c.error {
                let _ = writeln!(s, "error: {e}\n");
            }
            if !c.checks.is_empty() {
                let _ = writeln!(s, "| check | observed | expected | outcome |");
                let _ = writeln!(s, "|---|---|---|---|");
                for k in &c.checks {
                    let _ = writeln!(s, "| {} | {} | {} | {} |", k.label, k.observed, k.expected, k.outcome);
                }
            }
        }
        let _ = writeln!(
            s,
            "\noverall: {}",
            if self.passed { "pass" } else { "fail" }
        );
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub system: String,
    pub decay: Verdict,
    pub diagonal: Verdict,
    pub generator: Verdict,
    pub diagonal_terminal: Proportion,
    pub generator_max_upper: f64,
    pub agree: bool,
    pub flags: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyMatrix {
    pub seed: u64,
    pub delta: f64,
    pub threshold: f64,
    pub rows: Vec<ConsistencyRow>,
}

fn verdict_from_bounds(low: f64, high: f64, threshold: f64) -> Verdict {
    if high <= threshold {
        Verdict::EvidenceExpansive
    } else if low >= threshold {
        Verdict::EvidenceNotExpansive
    } else {
        Verdict::Inconclusive
    }
}

/// Compare one-sided decay verdicts, the pair-diagonal estimate and the
/// generator check on doubling, identity and rotation.
pub fn consistency_matrix(seed: u64) -> Result<ConsistencyMatrix> {
    let delta = 0.05;
    let threshold = 0.01;
    let mut rows = Vec::new();
    for name in ["doubling", "identity", "rotation"] {
        let f = system(name)?;
        let mu = make_lebesgue(f.space);
        let vs = VerdictSettings {
            delta,
            sided: Sided::OneSided,
            n_max: 12,
            threshold,
            seed,
            ..VerdictSettings::default()
        };
        let decay = expansiveness_verdict(&f, &mu, &vs)?.verdict;
        let ds = DecaySettings {
            delta,
            sided: Sided::OneSided,
            n_max: 12,
            samples: 100_000,
            seed,
            mode: SamplingMode::Direct,
        };
        let term = *product_diagonal_test(&f, &mu, &ds)?.terminal();
        let diagonal = verdict_from_bounds(term.ci_low, term.ci_high, threshold);
        let gs = GeneratorSettings {
            threshold,
            seed,
            ..GeneratorSettings::default()
        };
        let g = generator_check(&f, &mu, &grid_cover(&f.space, 0.05, 0.1)?, &gs)?;
        let generator = if g.is_generator_evidence {
            Verdict::EvidenceExpansive
        } else {
            verdict_from_bounds(g.max_lower_bound, g.max_upper_bound, threshold)
        };
        let mut flags = Vec::new();
        for (a, an, b, bn) in [
            (decay, "decay", diagonal, "diagonal"),
            (decay, "decay", generator, "generator"),
            (diagonal, "diagonal", generator, "generator"),
        ] {
            if a != b {
                flags.push(format!("{an} {a} vs {bn} {b}"));
            }
        }
        rows.push(ConsistencyRow {
            system: name.to_string(),
            decay,
            diagonal,
            generator,
            diagonal_terminal: term,
            generator_max_upper: g.max_upper_bound,
            agree: flags.is_empty(),
            flags,
        });
    }
    Ok(ConsistencyMatrix {
        seed,
        delta,
        threshold,
        rows,
    })
}

impl ConsistencyMatrix {
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "| system | decay | diagonal | generator | agree |\n|---|---|---|---|---|"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {} |",
                r.system, r.decay, r.diagonal, r.generator, r.agree
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_unique_and_explained() {
        let ids = case_ids();
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
        for id in ids {
            assert!(explain(id).unwrap().contains(id));
        }
        assert!(matches!(explain("nosuch"), Err(Error::UnknownName { .. })));
    }

    #[test]
    fn combine_outcomes() {
        let c = |o| check("x", String::new(), "", o);
        assert_eq!(combine(&[c(Outcome::Pass), c(Outcome::Vacuous)]), Outcome::Pass);
        assert_eq!(combine(&[c(Outcome::Vacuous)]), Outcome::Vacuous);
        assert_eq!(combine(&[c(Outcome::Inconclusive), c(Outcome::Pass)]), Outcome::Inconclusive);
        assert_eq!(combine(&[c(Outcome::Inconclusive), c(Outcome::Fail)]), Outcome::Fail);
    }

    #[test]
    fn unknown_filter_is_rejected() {
        let ids = vec!["nosuch".to_string()];
        assert!(run_battery(Some(&ids), 0).is_err());
    }
}
