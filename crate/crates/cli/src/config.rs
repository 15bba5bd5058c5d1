//! Experiment configuration and its plain-text `key = value` form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use measure_expansive::expansiveness::{SamplingMode, Sided};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Decay,
    Verdict,
    Entropy,
    Generator,
    Battery,
    Consistency,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Decay => "decay",
            Command::Verdict => "verdict",
            Command::Entropy => "entropy",
            Command::Generator => "generator",
            Command::Battery => "battery",
            Command::Consistency => "consistency",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "decay" => Command::Decay,
            "verdict" => Command::Verdict,
            "entropy" => Command::Entropy,
            "generator" => Command::Generator,
            "battery" => Command::Battery,
            "consistency" => Command::Consistency,
            _ => return Err(CliError::Usage(format!("unknown command `{s}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Markdown => "markdown",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "json" => Format::Json,
            "csv" => Format::Csv,
            "markdown" | "md" => Format::Markdown,
            _ => return Err(CliError::Usage(format!("unknown format `{s}`"))),
        })
    }
}

/// Everything that determines the output of a run. Unset options take
/// per-command defaults when the run is resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub system: Option<String>,
    pub system_params: BTreeMap<String, f64>,
    pub measure: Option<String>,
    pub measure_params: BTreeMap<String, f64>,
    pub center: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub delta_grid: Option<Vec<f64>>,
    pub n_max: Option<u32>,
    pub samples: Option<u64>,
    pub x_probes: Option<usize>,
    pub threshold: Option<f64>,
    pub sided: Option<Sided>,
    pub mode: Option<SamplingMode>,
    pub cover_radius: Option<f64>,
    pub cover_spacing: Option<f64>,
    pub cases: Option<Vec<String>>,
    pub sample_scale: Option<u64>,
    pub seed: u64,
    pub format: Option<Format>,
    /// Kept out of the JSON echo so that reports do not depend on where
    /// they are written.
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            system: None,
            system_params: BTreeMap::new(),
            measure: None,
            measure_params: BTreeMap::new(),
            center: None,
            delta: None,
            delta_grid: None,
            n_max: None,
            samples: None,
            x_probes: None,
            threshold: None,
            sided: None,
            mode: None,
            cover_radius: None,
            cover_spacing: None,
            cases: None,
            sample_scale: None,
            seed: 0,
            format: None,
            out: None,
        }
    }

    /// One `key = value` line per set field, in a fixed order. Floats use
    /// the shortest representation that parses back to the same value.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(",");
        line("command", self.command.name().into());
        if let Some(v) = &self.system {
            line("system", v.clone());
        }
        for (k, v) in &self.system_params {
            line(&format!("param.{k}"), format!("{v:?}"));
        }
        if let Some(v) = &self.measure {
            line("measure", v.clone());
        }
        for (k, v) in &self.measure_params {
            line(&format!("measure_param.{k}"), format!("{v:?}"));
        }
        if let Some(v) = &self.center {
            line("center", list(v));
        }
        if let Some(v) = self.delta {
            line("delta", format!("{v:?}"));
        }
        if let Some(v) = &self.delta_grid {
            line("delta_grid", list(v));
        }
        if let Some(v) = self.n_max {
            line("n_max", v.to_string());
        }
        if let Some(v) = self.samples {
            line("samples", v.to_string());
        }
        if let Some(v) = self.x_probes {
            line("x_probes", v.to_string());
        }
        if let Some(v) = self.threshold {
            line("threshold", format!("{v:?}"));
        }
        if let Some(v) = self.sided {
            line("sided", v.to_string());
        }
        if let Some(v) = self.mode {
            line("mode", v.to_string());
        }
        if let Some(v) = self.cover_radius {
            line("cover_radius", format!("{v:?}"));
        }
        if let Some(v) = self.cover_spacing {
            line("cover_spacing", format!("{v:?}"));
        }
        if let Some(v) = &self.cases {
            line("cases", v.join(","));
        }
        if let Some(v) = self.sample_scale {
            line("sample_scale", v.to_string());
        }
        line("seed", self.seed.to_string());
        if let Some(v) = self.format {
            line("format", v.name().into());
        }
        if let Some(v) = &self.out {
            line("out", v.display().to_string());
        }
        s
    }

    /// Parse the text form. Blank lines and `#` comments are skipped; the
    /// `command` key defaults to `fallback`.
    pub fn from_text(text: &str, fallback: Command) -> Result<Self, CliError> {
        let mut c = Self::new(fallback);
        for (i, raw) in text.lines().enumerate() {
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') {
                continue;
            }
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            c.set(k.trim(), v.trim())
                .map_err(|e| CliError::Usage(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(c)
    }

    /// Set one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if let Some(p) = key.strip_prefix("param.") {
            self.system_params.insert(p.to_string(), parse(key, value)?);
            return Ok(());
        }
        if let Some(p) = key.strip_prefix("measure_param.") {
            self.measure_params.insert(p.to_string(), parse(key, value)?);
            return Ok(());
        }
        match key {
            "command" => self.command = value.parse()?,
            "system" => self.system = Some(value.to_string()),
            "measure" => self.measure = Some(value.to_string()),
            "center" => self.center = Some(parse_list(key, value)?),
            "delta" => self.delta = Some(parse(key, value)?),
            "delta_grid" => self.delta_grid = Some(parse_list(key, value)?),
            "n_max" => self.n_max = Some(parse(key, value)?),
            "samples" => self.samples = Some(parse(key, value)?),
            "x_probes" => self.x_probes = Some(parse(key, value)?),
            "threshold" => self.threshold = Some(parse(key, value)?),
            "sided" => self.sided = Some(value.parse().map_err(|e| CliError::Usage(format!("{e}")))?),
            "mode" => self.mode = Some(value.parse().map_err(|e| CliError::Usage(format!("{e}")))?),
            "cover_radius" => self.cover_radius = Some(parse(key, value)?),
            "cover_spacing" => self.cover_spacing = Some(parse(key, value)?),
            "cases" => {
                self.cases = Some(
                    value
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect(),
                )
            }
            "sample_scale" => self.sample_scale = Some(parse(key, value)?),
            "seed" => self.seed = parse(key, value)?,
            "format" => self.format = Some(value.parse()?),
            "out" => self.out = Some(PathBuf::from(value)),
            _ => return Err(CliError::Usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("bad value `{value}` for `{key}`")))
}

pub fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

/// Parse `key=value` with a numeric value.
pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("bad number `{v}`"))?;
    Ok((k.trim().to_string(), v))
}
