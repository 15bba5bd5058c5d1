//! Command execution and output files.
//!
//! With `out` set, the primary output goes to that path. CSV outputs get a
//! `<out>.json` sidecar with the config echo and the full result, and every
//! run writes its wall-clock runtime to `<out>.timing.json` so that the
//! result files stay byte-stable. Without `out`, the primary output goes to
//! standard output and the runtime to standard error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use measure_expansive::battery::{consistency_matrix, run_battery_with, BatteryOptions};
use measure_expansive::entropy::{bk_entropy, EntropySettings};
use measure_expansive::expansiveness::{
    decay_series, expansiveness_verdict, generator_check, grid_cover, probe_centers, DecaySettings,
    GeneratorSettings, SamplingMode, Sided, VerdictSettings,
};
use measure_expansive::measures::measure_by_name;
use measure_expansive::systems::system_by_name;
use measure_expansive::{Measure64, System64, VERSION};
use serde::Serialize;

use crate::config::{Command, ExperimentConfig, Format};
use crate::{CliError, EXIT_BATTERY_FAILURE, EXIT_OK};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub exit_code: i32,
    /// Battery cases that neither passed nor were vacuous.
    pub failing: Vec<String>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'a str,
    command: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    result: T,
}

#[derive(Serialize)]
struct Timing<'a> {
    version: &'a str,
    command: &'a str,
    seed: u64,
    runtime_seconds: f64,
}

fn envelope<T: Serialize>(cfg: &ExperimentConfig, result: T) -> String {
    let e = Envelope {
        version: VERSION,
        command: cfg.command.name(),
        seed: cfg.seed,
        config: cfg,
        result,
    };
    let mut s = serde_json::to_string_pretty(&e).expect("results serialize");
    s.push('\n');
    s
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn load(cfg: &ExperimentConfig) -> Result<(System64, Measure64), CliError> {
    let name = cfg
        .system
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("`{}` needs --system", cfg.command.name())))?;
    let f: System64 = system_by_name(name, &cfg.system_params)?;
    let measure = cfg.measure.as_deref().unwrap_or("lebesgue");
    // Denjoy measures default to the parameters of a Denjoy system.
    let params = if cfg.measure_params.is_empty() && name == "denjoy" && measure.starts_with("denjoy") {
        &cfg.system_params
    } else {
        &cfg.measure_params
    };
    let mu = measure_by_name(measure, f.space, params)?;
    Ok((f, mu))
}

/// Fill unset options with the defaults of `cfg.command`.
pub fn resolve(cfg: &ExperimentConfig) -> Result<ExperimentConfig, CliError> {
    let mut c = cfg.clone();
    let default_sided = |c: &ExperimentConfig| -> Result<Sided, CliError> {
        let (f, _) = load(c)?;
        Ok(if f.invertible() { Sided::TwoSided } else { Sided::OneSided })
    };
    match c.command {
        Command::Decay | Command::Verdict | Command::Entropy | Command::Generator => {
            c.measure.get_or_insert_with(|| "lebesgue".into());
        }
        _ => {}
    }
    match c.command {
        Command::Decay => {
            c.delta.get_or_insert(0.05);
            c.n_max.get_or_insert(20);
            c.samples.get_or_insert(100_000);
            c.mode.get_or_insert(SamplingMode::Auto);
            if c.sided.is_none() {
                c.sided = Some(default_sided(&c)?);
            }
            if c.center.is_none() {
                let (_, mu) = load(&c)?;
                c.center = Some(probe_centers(&mu, c.seed, 1)[0].to_f64_vec());
            }
            c.format.get_or_insert(Format::Csv);
        }
        Command::Verdict => {
            let d = VerdictSettings::default();
            c.delta.get_or_insert(d.delta);
            c.n_max.get_or_insert(d.n_max);
            c.samples.get_or_insert(d.samples);
            c.x_probes.get_or_insert(d.x_probes);
            c.threshold.get_or_insert(d.threshold);
            c.mode.get_or_insert(d.mode);
            if c.sided.is_none() {
                c.sided = Some(default_sided(&c)?);
            }
            c.format.get_or_insert(Format::Json);
        }
        Command::Entropy => {
            let d = EntropySettings::default();
            c.delta_grid.get_or_insert(d.delta_grid);
            c.n_max.get_or_insert(d.n_max);
            c.samples.get_or_insert(d.samples);
            c.x_probes.get_or_insert(d.x_probes);
            c.mode.get_or_insert(d.mode);
            c.format.get_or_insert(Format::Json);
        }
        Command::Generator => {
            let d = GeneratorSettings::default();
            c.n_max.get_or_insert(d.n_max);
            c.samples.get_or_insert(d.mc_samples);
            c.threshold.get_or_insert(d.threshold);
            c.sided.get_or_insert(d.sided);
            c.cover_radius.get_or_insert(0.1);
            c.cover_spacing.get_or_insert(0.05);
            c.format.get_or_insert(Format::Json);
        }
        Command::Battery | Command::Consistency => {
            if c.command == Command::Battery {
                c.sample_scale.get_or_insert(1);
            }
            c.format.get_or_insert(Format::Markdown);
        }
    }
    let fmt = c.format.expect("set above");
    let allowed = match c.command {
        Command::Battery | Command::Consistency => fmt != Format::Csv,
        _ => fmt != Format::Markdown,
    };
    if !allowed {
        return Err(CliError::Usage(format!(
            "`{}` cannot write {} output",
            c.command.name(),
            fmt.name()
        )));
    }
    Ok(c)
}

fn csv_string<R: Serialize>(rows: impl IntoIterator<Item = R>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

struct Output {
    primary: String,
    sidecar: Option<String>,
}

fn write_outputs(cfg: &ExperimentConfig, out: &Output, runtime: f64) -> Result<(), CliError> {
    let timing = Timing {
        version: VERSION,
        command: cfg.command.name(),
        seed: cfg.seed,
        runtime_seconds: runtime,
    };
    match &cfg.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, &out.primary)?;
            if let Some(side) = &out.sidecar {
                std::fs::write(with_suffix(path, ".json"), side)?;
            }
            let t = serde_json::to_string_pretty(&timing).expect("timing serializes");
            std::fs::write(with_suffix(path, ".timing.json"), t + "\n")?;
        }
        None => {
            print!("{}", out.primary);
            eprintln!("runtime: {runtime:.3} s");
        }
    }
    Ok(())
}

/// Resolve `cfg`, run it and write its outputs.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let cfg = resolve(cfg)?;
    let fmt = cfg.format.expect("resolved");
    let mut outcome = RunOutcome {
        exit_code: EXIT_OK,
        failing: Vec::new(),
    };
    let output = match cfg.command {
        Command::Decay => {
            let (f, mu) = load(&cfg)?;
            let center = f.space.point(cfg.center.as_deref().expect("resolved"))?;
            let s = DecaySettings {
                delta: cfg.delta.expect("resolved"),
                sided: cfg.sided.expect("resolved"),
                n_max: cfg.n_max.expect("resolved"),
                samples: cfg.samples.expect("resolved"),
                seed: cfg.seed,
                mode: cfg.mode.expect("resolved"),
            };
            let series = decay_series(&f, &mu, &center, &s)?;
            let json = envelope(&cfg, &series);
            match fmt {
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row {
                        n: u32,
                        estimate: f64,
                        ci_low: f64,
                        ci_high: f64,
                    }
                    let rows = series.n_values.iter().zip(&series.estimates).map(|(&n, p)| Row {
                        n,
                        estimate: p.estimate,
                        ci_low: p.ci_low,
                        ci_high: p.ci_high,
                    });
                    Output {
                        primary: csv_string(rows)?,
                        sidecar: Some(json),
                    }
                }
                _ => Output {
                    primary: json,
                    sidecar: None,
                },
            }
        }
        Command::Verdict => {
            let (f, mu) = load(&cfg)?;
            let s = VerdictSettings {
                delta: cfg.delta.expect("resolved"),
                sided: cfg.sided.expect("resolved"),
                n_max: cfg.n_max.expect("resolved"),
                samples: cfg.samples.expect("resolved"),
                x_probes: cfg.x_probes.expect("resolved"),
                threshold: cfg.threshold.expect("resolved"),
                seed: cfg.seed,
                mode: cfg.mode.expect("resolved"),
            };
            let v = expansiveness_verdict(&f, &mu, &s)?;
            let json = envelope(&cfg, &v);
            match fmt {
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row {
                        probe: usize,
                        center: String,
                        first: f64,
                        terminal: f64,
                        terminal_ci_low: f64,
                        terminal_ci_high: f64,
                    }
                    let rows = v.probes.iter().enumerate().map(|(i, p)| Row {
                        probe: i,
                        center: join(&p.center),
                        first: p.first.estimate,
                        terminal: p.terminal.estimate,
                        terminal_ci_low: p.terminal.ci_low,
                        terminal_ci_high: p.terminal.ci_high,
                    });
                    Output {
                        primary: csv_string(rows)?,
                        sidecar: Some(json),
                    }
                }
                _ => Output {
                    primary: json,
                    sidecar: None,
                },
            }
        }
        Command::Entropy => {
            let (f, mu) = load(&cfg)?;
            let s = EntropySettings {
                delta_grid: cfg.delta_grid.clone().expect("resolved"),
                n_max: cfg.n_max.expect("resolved"),
                x_probes: cfg.x_probes.expect("resolved"),
                samples: cfg.samples.expect("resolved"),
                seed: cfg.seed,
                mode: cfg.mode.expect("resolved"),
                ..EntropySettings::default()
            };
            let e = bk_entropy(&f, &mu, &s)?;
            let json = envelope(&cfg, &e);
            match fmt {
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row {
                        delta: f64,
                        probe: usize,
                        rate: f64,
                        window_start: Option<u32>,
                        window_end: Option<u32>,
                        chi2_per_dof: Option<f64>,
                        censored_tail: bool,
                    }
                    let rows = e.fit_diagnostics.iter().map(|d| {
                        let j = e.delta_grid.iter().position(|&x| x == d.delta).expect("grid delta");
                        Row {
                            delta: d.delta,
                            probe: d.probe,
                            rate: e.per_x_rates[j][d.probe],
                            window_start: d.window.map(|w| w.0),
                            window_end: d.window.map(|w| w.1),
                            chi2_per_dof: d.chi2_per_dof,
                            censored_tail: d.censored_tail,
                        }
                    });
                    Output {
                        primary: csv_string(rows)?,
                        sidecar: Some(json),
                    }
                }
                _ => Output {
                    primary: json,
                    sidecar: None,
                },
            }
        }
        Command::Generator => {
            let (f, mu) = load(&cfg)?;
            let cover = grid_cover(
                &f.space,
                cfg.cover_spacing.expect("resolved"),
                cfg.cover_radius.expect("resolved"),
            )?;
            let s = GeneratorSettings {
                n_max: cfg.n_max.expect("resolved"),
                mc_samples: cfg.samples.expect("resolved"),
                threshold: cfg.threshold.expect("resolved"),
                sided: cfg.sided.expect("resolved"),
                seed: cfg.seed,
                ..GeneratorSettings::default()
            };
            let g = generator_check(&f, &mu, &cover, &s)?;
            let json = envelope(&cfg, &g);
            match fmt {
                Format::Csv => {
                    #[derive(Serialize)]
                    struct Row {
                        sequence: usize,
                        kind: String,
                        n_first: i64,
                        elements: String,
                        estimate: f64,
                        ci_low: f64,
                        ci_high: f64,
                    }
                    let rows = g.sequences.iter().enumerate().map(|(i, q)| Row {
                        sequence: i,
                        kind: format!("{:?}", q.kind).to_lowercase(),
                        n_first: q.n_first,
                        elements: q.elements.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(";"),
                        estimate: q.estimate.estimate,
                        ci_low: q.estimate.ci_low,
                        ci_high: q.estimate.ci_high,
                    });
                    Output {
                        primary: csv_string(rows)?,
                        sidecar: Some(json),
                    }
                }
                _ => Output {
                    primary: json,
                    sidecar: None,
                },
            }
        }
        Command::Battery => {
            let opts = BatteryOptions {
                seed: cfg.seed,
                sample_scale: cfg.sample_scale.expect("resolved"),
            };
            let report = run_battery_with(cfg.cases.as_deref(), &opts)?;
            if !report.passed {
                outcome.exit_code = EXIT_BATTERY_FAILURE;
                outcome.failing = report.failing_ids().iter().map(|s| s.to_string()).collect();
            }
            let json = envelope(&cfg, &report);
            match fmt {
                Format::Json => Output {
                    primary: json,
                    sidecar: None,
                },
                _ => Output {
                    primary: report.to_markdown(),
                    sidecar: Some(json),
                },
            }
        }
        Command::Consistency => {
            let m = consistency_matrix(cfg.seed)?;
            let json = envelope(&cfg, &m);
            match fmt {
                Format::Json => Output {
                    primary: json,
                    sidecar: None,
                },
                _ => Output {
                    primary: m.to_markdown(),
                    sidecar: Some(json),
                },
            }
        }
    };
    write_outputs(&cfg, &output, start.elapsed().as_secs_f64())?;
    Ok(outcome)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}
