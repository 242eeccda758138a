//! `kinex`: run wealth-exchange, gas, fitting, entropy and sweep experiments.
//!
//! Every flag mirrors a configuration key (`--write-samples` sets
//! `write_samples`). Values from `--config` are applied first, flags override.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kinex::harness::{run_experiment, ExperimentConfig, Mode, RunResults};

#[derive(Parser)]
#[command(name = "kinex", version, about = "Kinetic wealth-exchange and gas Monte Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Saving-propensity exchange model at one lambda.
    Exchange(Flags),
    /// Elastic-collision gas in N dimensions.
    Gas(Flags),
    /// Fit and measure samples read from --input.
    Fit(Flags),
    /// Variational check of the gamma law for dimension N.
    Entropy(Flags),
    /// Exchange model over several lambdas, with overlaid equilibrium curves.
    Sweep(Flags),
}

#[derive(Args, Default)]
struct Flags {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory (default: $KINEX_OUT_DIR or ./kinex-out).
    #[arg(long)]
    out: Option<String>,
    /// Report format: json | csv.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    replicates: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Comma-separated saving propensities for `sweep`.
    #[arg(long)]
    lambdas: Option<String>,
    #[arg(long)]
    dimension: Option<String>,
    #[arg(long)]
    agents: Option<String>,
    /// Trades or collisions per replicate (accepts 1e7).
    #[arg(long)]
    iterations: Option<String>,
    #[arg(long)]
    mean: Option<String>,
    #[arg(long)]
    input: Option<String>,
    /// default | linear:<bins>[:<lo>:<hi>] | log:<bins>[:<lo>:<hi>]
    #[arg(long)]
    histogram: Option<String>,
    /// moments | mle
    #[arg(long)]
    fit: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    write_samples: bool,
    /// Record wall-clock time in the report.
    #[arg(long)]
    timing: bool,
}

impl Flags {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let mut v = Vec::new();
        let opts = [
            ("seed", &self.seed),
            ("out", &self.out),
            ("format", &self.format),
            ("replicates", &self.replicates),
            ("lambda", &self.lambda),
            ("lambdas", &self.lambdas),
            ("dimension", &self.dimension),
            ("agents", &self.agents),
            ("iterations", &self.iterations),
            ("mean", &self.mean),
            ("input", &self.input),
            ("histogram", &self.histogram),
            ("fit", &self.fit),
            ("trials", &self.trials),
            ("amplitude", &self.amplitude),
            ("beta", &self.beta),
        ];
        for (k, val) in opts {
            if let Some(val) = val {
                v.push((k, val.clone()));
            }
        }
        if self.write_samples {
            v.push(("write_samples", "true".into()));
        }
        if self.timing {
            v.push(("timing", "true".into()));
        }
        v
    }
}

fn build_config(mode: Mode, flags: &Flags) -> kinex::Result<ExperimentConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            let cfg = ExperimentConfig::from_text(Some(mode), &text)?;
            if let Some((_, m)) = kinex::harness::parse_pairs(&text)?.iter().find(|(k, _)| k == "mode") {
                if m.parse::<Mode>()? != mode {
                    return Err(kinex::Error::Config(format!(
                        "config file sets mode '{m}' but the subcommand is '{mode}'"
                    )));
                }
            }
            cfg
        }
        None => ExperimentConfig::new(mode),
    };
    for (k, v) in flags.pairs() {
        cfg.set(k, &v)?;
    }
    Ok(cfg)
}

fn summary_line(results: &RunResults) -> String {
    let eq = |s: &kinex::harness::EquilibriumSummary| {
        let mut line = format!(
            "samples={} shape={:.4} rate={:.4} gini={:.4} ks={:.4}",
            s.samples,
            s.inequality.fitted.shape,
            s.inequality.fitted.rate,
            s.inequality.gini,
            s.inequality.ks_statistic
        );
        if let Some(p) = s.predicted {
            line.push_str(&format!(" predicted_shape={:.4}", p.shape));
        }
        line
    };
    match results {
        RunResults::Exchange(s) | RunResults::Gas(s) | RunResults::Fit(s) => eq(s),
        RunResults::Sweep { runs, .. } => runs
            .iter()
            .map(|r| format!("lambda={} {}", r.lambda.unwrap_or(f64::NAN), eq(r)))
            .collect::<Vec<_>>()
            .join("\n"),
        RunResults::Entropy(e) => format!(
            "min_margin={:.3e} mean_margin={:.3e} scaling_ratio={:.3} mb_max_diff={:.1e}",
            e.stationarity.min_margin,
            e.stationarity.mean_margin,
            e.scaling_ratio,
            e.maxwell_boltzmann.max_abs_difference
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, flags) = match &cli.command {
        Command::Exchange(f) => (Mode::Exchange, f),
        Command::Gas(f) => (Mode::Gas, f),
        Command::Fit(f) => (Mode::Fit, f),
        Command::Entropy(f) => (Mode::Entropy, f),
        Command::Sweep(f) => (Mode::Sweep, f),
    };
    let outcome = build_config(mode, flags).and_then(|cfg| run_experiment(&cfg));
    match outcome {
        Ok(out) => {
            println!("{}", summary_line(&out.report.results));
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = match &e {
                kinex::Error::Domain(_) => "domain",
                kinex::Error::Parameter(_) => "parameter",
                kinex::Error::Config(_) => "config",
                kinex::Error::Degenerate(_) => "degenerate",
                kinex::Error::Undefined(_) => "undefined",
                kinex::Error::Io(_) => "io",
                kinex::Error::Parse(_) => "parse",
            };
            eprintln!("{}", serde_json::json!({ "error": kind, "message": e.to_string() }));
            ExitCode::from(2)
        }
    }
}
