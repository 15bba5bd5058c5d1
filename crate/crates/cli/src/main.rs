use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use measure_expansive::battery::explain;
use measure_expansive::measures::measure_names;
use measure_expansive::systems::zoo_names;
use mexp_cli::config::{parse_list, parse_param};
use mexp_cli::{execute, CliError, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "mexp", version, about = "Measure-expansiveness estimators and theorem battery")]
struct Cli {
    /// List zoo systems and measures.
    #[arg(long)]
    list: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decay series of one dynamical ball.
    Decay(RunArgs),
    /// Expansiveness verdict over sampled centers.
    Verdict(RunArgs),
    /// Entropy from ball decay rates.
    Entropy(RunArgs),
    /// Generator check for a grid cover by balls.
    Generator(RunArgs),
    /// Run the theorem battery.
    Battery(RunArgs),
    /// Cross-estimator agreement table.
    Consistency(RunArgs),
    /// Describe a battery case.
    Explain { case: String },
    /// List zoo systems and measures.
    List,
}

#[derive(Args, Default)]
struct RunArgs {
    /// Plain-text key = value config; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    system: Option<String>,
    /// System parameter, key=value; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long)]
    measure: Option<String>,
    /// Measure parameter, key=value; repeatable.
    #[arg(long = "measure-param", value_parser = parse_param)]
    measure_params: Vec<(String, f64)>,
    /// Ball center for `decay`, comma-separated coordinates.
    #[arg(long)]
    center: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated, strictly decreasing.
    #[arg(long)]
    delta_grid: Option<String>,
    #[arg(long)]
    nmax: Option<u32>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    x_probes: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    /// `one` or `two`.
    #[arg(long)]
    sided: Option<String>,
    /// `direct`, `ball_conditioned` or `auto`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    cover_radius: Option<f64>,
    #[arg(long)]
    cover_spacing: Option<f64>,
    /// Battery case ids, comma-separated.
    #[arg(long)]
    cases: Option<String>,
    /// Multiplier on battery sample budgets.
    #[arg(long)]
    sample_scale: Option<u64>,
    #[arg(long, env = "MEXP_SEED")]
    seed: Option<u64>,
    /// `json`, `csv` or `markdown`.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self, command: Command) -> Result<ExperimentConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::from_text(&std::fs::read_to_string(p)?, command)?,
            None => ExperimentConfig::new(command),
        };
        c.command = command;
        if let Some(v) = self.system {
            c.system = Some(v);
        }
        c.system_params.extend(self.params);
        if let Some(v) = self.measure {
            c.measure = Some(v);
        }
        c.measure_params.extend(self.measure_params);
        if let Some(v) = self.center {
            c.center = Some(parse_list("center", &v)?);
        }
        if let Some(v) = self.delta_grid {
            c.delta_grid = Some(parse_list("delta-grid", &v)?);
        }
        c.delta = self.delta.or(c.delta);
        c.n_max = self.nmax.or(c.n_max);
        c.samples = self.samples.or(c.samples);
        c.x_probes = self.x_probes.or(c.x_probes);
        c.threshold = self.threshold.or(c.threshold);
        c.cover_radius = self.cover_radius.or(c.cover_radius);
        c.cover_spacing = self.cover_spacing.or(c.cover_spacing);
        c.sample_scale = self.sample_scale.or(c.sample_scale);
        c.seed = self.seed.unwrap_or(c.seed);
        c.out = self.out.or(c.out);
        for (key, value) in [
            ("sided", self.sided),
            ("mode", self.mode),
            ("cases", self.cases),
            ("format", self.format),
        ] {
            if let Some(v) = value {
                c.set(key, &v)?;
            }
        }
        Ok(c)
    }
}

fn list() {
    println!("systems:");
    for s in zoo_names() {
        println!("  {s}");
    }
    println!("measures:");
    for m in measure_names() {
        println!("  {m}");
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (command, args) = match cli.command {
        None if cli.list => {
            list();
            return Ok(0);
        }
        None => return Err(CliError::Usage("no command given; see --help".into())),
        Some(Cmd::List) => {
            list();
            return Ok(0);
        }
        Some(Cmd::Explain { case }) => {
            print!("{}", explain(&case).map_err(|e| CliError::Usage(e.to_string()))?);
            return Ok(0);
        }
        Some(Cmd::Decay(a)) => (Command::Decay, a),
        Some(Cmd::Verdict(a)) => (Command::Verdict, a),
        Some(Cmd::Entropy(a)) => (Command::Entropy, a),
        Some(Cmd::Generator(a)) => (Command::Generator, a),
        Some(Cmd::Battery(a)) => (Command::Battery, a),
        Some(Cmd::Consistency(a)) => (Command::Consistency, a),
    };
    let cfg = args.into_config(command)?;
    let outcome = match cli.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {w} workers: {e}")))?
            .install(|| execute(&cfg))?,
        None => execute(&cfg)?,
    };
    if !outcome.failing.is_empty() {
        eprintln!("failing cases: {}", outcome.failing.join(", "));
    }
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
