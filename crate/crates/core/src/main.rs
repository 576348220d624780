use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use starris::config::{parse_eve_model, ScenarioConfig};
use starris::output::write_file;
use starris::sweep::{parse_values, run_optimize, run_sweep, Metric, SweepSpec, SweepVariable};
use starris::validate::{run_validate, ValidationHooks};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

/// Secrecy-rate analysis and optimization for a UAV-mounted STAR surface.
#[derive(Parser)]
#[command(name = "starris", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct Common {
    /// Scenario file; the bundled reference scenario when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Monte Carlo seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trial count override.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Eavesdropper phase model for Monte Carlo.
    #[arg(long, global = true, value_parser = ["approx", "exact"])]
    eve_model: Option<String>,
}

#[derive(Subcommand)]
enum Verb {
    /// Sweep one parameter and write one CSV per series value.
    Sweep {
        /// ps_dbm, elements, kappa or zeta.
        #[arg(long = "var")]
        variable: SweepVariable,
        /// `start:step:end` or a comma-separated list.
        #[arg(long)]
        values: String,
        /// Repeat the sweep for each value, e.g. `kappa=10,15,20`.
        #[arg(long)]
        series: Option<String>,
        /// Comma-separated metric names; all when omitted.
        #[arg(long)]
        metrics: Option<String>,
        /// Evaluate a single user/eavesdropper pair instead of the pair mean.
        #[arg(long)]
        pair: Option<usize>,
        /// Add Monte Carlo mean and standard-error columns.
        #[arg(long)]
        with_mc: bool,
    },
    /// Run the alternating optimizer; writes a trace CSV and a summary.
    Optimize {
        /// Optimize the Monte Carlo WSSR instead of the closed form (slow).
        #[arg(long)]
        mc_objective: bool,
    },
    /// Run the acceptance suite and write a report.
    Validate {
        /// Scale every Gamma spread (negative control).
        #[arg(long, hide = true, default_value_t = 1.0)]
        corrupt_spread: f64,
    },
    /// Print the resolved scenario.
    ShowConfig,
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn load(common: &Common) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path),
        None => Ok(ScenarioConfig::reference()),
    }
    .map_err(|e| match e {
        starris::config::ConfigError::Io { .. } => Failure::Io(e.to_string()),
        other => Failure::Config(other.to_string()),
    })?;
    if let Some(seed) = common.seed {
        cfg.mc.seed = seed;
    }
    if let Some(trials) = common.trials {
        if trials == 0 {
            return Err(Failure::Config("--trials must be >= 1".into()));
        }
        cfg.mc.trials = trials;
    }
    if let Some(m) = &common.eve_model {
        cfg.mc.eve_phase_model = parse_eve_model(m).expect("clap restricts values");
    }
    Ok(cfg)
}

fn sweep_spec(
    variable: SweepVariable,
    values: &str,
    series: Option<&str>,
    metrics: Option<&str>,
    pair: Option<usize>,
) -> Result<SweepSpec, String> {
    let mut spec = SweepSpec::new(variable, parse_values(values)?);
    if let Some(s) = series {
        let (var, vals) = s
            .split_once('=')
            .ok_or_else(|| format!("--series expects name=values, got {s:?}"))?;
        spec.series = Some((var.trim().parse()?, parse_values(vals)?));
    }
    if let Some(m) = metrics {
        spec.metrics = m.split(',').map(|n| n.trim().parse::<Metric>()).collect::<Result<_, _>>()?;
    }
    spec.pair = pair;
    Ok(spec)
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let cfg = load(&cli.common)?;
    let out = &cli.common.out;
    match cli.verb {
        Verb::ShowConfig => {
            print!("{}", cfg.to_toml_string());
        }
        Verb::Sweep {
            variable,
            values,
            series,
            metrics,
            pair,
            with_mc,
        } => {
            let spec = sweep_spec(variable, &values, series.as_deref(), metrics.as_deref(), pair)
                .map_err(Failure::Config)?;
            let tables = run_sweep(&cfg, &spec, with_mc).map_err(|e| Failure::Config(e.to_string()))?;
            for t in tables {
                let path = write_file(out, &t.file_name, &t.to_csv())?;
                println!("{}", path.display());
            }
        }
        Verb::Optimize { mc_objective } => {
            let art = run_optimize(&cfg, mc_objective).map_err(|e| Failure::Config(e.to_string()))?;
            let path = write_file(out, "optimize_trace.csv", &art.trace.to_csv(&cfg))?;
            println!("{}", path.display());
            write_file(out, "optimize_summary.txt", &art.summary)?;
            print!("{}", art.summary);
        }
        Verb::Validate { corrupt_spread } => {
            let hooks = ValidationHooks {
                spread_scale: corrupt_spread,
            };
            let report = run_validate(&cfg, &hooks);
            let text = report.render();
            write_file(out, "validation_report.txt", &text)?;
            print!("{text}");
            if !report.pass() {
                return Ok(EXIT_VALIDATION);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
    }
}
