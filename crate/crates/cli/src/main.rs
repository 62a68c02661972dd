use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use lyapunov_cli::{
    compare, comparison_passes, ratio, simulate, theory, OutputFormat, Overrides, RatioConfig, RunConfig, Threads,
};
use lyapunov_core::{Beta, EnsembleSpec};

#[derive(Parser)]
#[command(name = "lyapunov", version, about = "Lyapunov spectra of random matrix products")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form exponents and variances.
    Theory(RunArgs),
    /// Monte Carlo estimates.
    Simulate(RunArgs),
    /// Theory and simulation side by side; exits with status 2 if any |z| > 5.
    Compare(CompareArgs),
    /// Largest singular value over largest eigenvalue modulus of a Gaussian matrix.
    Ratio(RatioArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Ensemble as JSON, e.g. '{"type":"StandardGaussian","beta":2,"d":2}'.
    #[arg(long)]
    ensemble: Option<String>,
    /// Number of factors per chain.
    #[arg(long = "N")]
    steps: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, or "auto".
    #[arg(long)]
    threads: Option<Threads>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the resolved configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Take the theory from this ensemble instead (gate self-test).
    #[arg(long)]
    theory_ensemble: Option<String>,
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long, default_value_t = 2)]
    beta: u32,
    #[arg(long, default_value_t = 500)]
    d: usize,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value_t = lyapunov_cli::config::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "auto")]
    threads: Threads,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_ensemble(json: &str) -> anyhow::Result<EnsembleSpec> {
    serde_json::from_str(json).with_context(|| format!("parsing ensemble {json:?}"))
}

impl RunArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let file = self.config.as_deref().map(RunConfig::load).transpose()?;
        let flags = Overrides {
            ensemble: self.ensemble.as_deref().map(parse_ensemble).transpose()?,
            steps: self.steps,
            chains: self.chains,
            k_max: self.k_max,
            seed: self.seed,
            output_format: self.format,
            threads: self.threads,
        };
        RunConfig::resolve(file, flags)
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn warn(warning: &Option<String>) {
    if let Some(w) = warning {
        eprintln!("warning: {w}");
    }
}

fn dump(args: &RunArgs, config: &RunConfig) -> anyhow::Result<ExitCode> {
    let mut text = serde_json::to_string_pretty(config)?;
    text.push('\n');
    emit(args.out.as_ref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Theory(args) => {
            let config = args.resolve()?;
            if args.dump_config {
                return dump(&args, &config);
            }
            let report = theory(&config)?;
            warn(&report.meta.warning);
            emit(args.out.as_ref(), &report.render(config.output_format))?;
        }
        Command::Simulate(args) => {
            let config = args.resolve()?;
            if args.dump_config {
                return dump(&args, &config);
            }
            let report = simulate(&config)?;
            if config.output_format == OutputFormat::Csv {
                let m = &report.meta;
                eprintln!("seed={} N={} chains={} wall_ms={} redraws={}", m.seed, config.steps, config.chains, m.wall_ms, m.redraws);
            }
            emit(args.out.as_ref(), &report.render(config.output_format))?;
        }
        Command::Compare(CompareArgs { run: args, theory_ensemble }) => {
            let config = args.resolve()?;
            if args.dump_config {
                return dump(&args, &config);
            }
            let theory_spec = theory_ensemble.as_deref().map(parse_ensemble).transpose()?;
            let report = compare(&config, theory_spec.as_ref())?;
            warn(&report.meta.warning);
            emit(args.out.as_ref(), &report.render(config.output_format))?;
            if !comparison_passes(&report.rows) {
                eprintln!("comparison failed: |z| > {} for at least one index", lyapunov_cli::Z_GATE);
                return Ok(ExitCode::from(2));
            }
        }
        Command::Ratio(args) => {
            let config = RatioConfig {
                beta: Beta::try_from(args.beta)?,
                d: args.d,
                samples: args.samples,
                seed: args.seed,
            };
            let report = ratio(&config, args.threads)?;
            emit(args.out.as_ref(), &report.render(args.format))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
