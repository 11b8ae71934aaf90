use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use emobench::corpus::convert_isear;
use emobench::harness::verify::{verify, verify_config};
use emobench::harness::{render_report, run_experiment, ExperimentConfig, OutputFormat};

/// Emotion classification benchmark.
#[derive(Parser)]
#[command(name = "bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate classifiers on a labeled CSV and print a report.
    Run(Box<RunArgs>),
    /// Convert a raw ISEAR export into the canonical `label,text` CSV.
    ConvertIsear {
        input: PathBuf,
        output: PathBuf,
    },
    /// Run the reproduction checks on an ISEAR CSV; exits nonzero on failure.
    Verify {
        #[arg(long)]
        data: PathBuf,
        /// Also print the full report.
        #[arg(long)]
        report: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Canonical `label,text` CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated seeds to average over.
    #[arg(long)]
    seeds: Option<String>,
    /// Comma-separated classifier kinds (default: all eight).
    #[arg(long)]
    classifiers: Option<String>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Fit vocabulary and IDF on the whole corpus.
    #[arg(long)]
    fit_on_all: bool,
    /// k-fold cross-validation instead of a hold-out split.
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    test_fraction: Option<f64>,
    /// count, tf or tfidf.
    #[arg(long)]
    scheme: Option<String>,
    /// Stratify the hold-out split by label.
    #[arg(long)]
    stratified: bool,
    /// One stop word per line.
    #[arg(long)]
    stop_words: Option<PathBuf>,
    /// Directory for trained models (versioned JSON).
    #[arg(long)]
    save_models: Option<PathBuf>,
    /// JSONL file for the feature matrix of the first split.
    #[arg(long)]
    dump_features: Option<PathBuf>,
    /// Hyperparameter override, e.g. `--set knn.k=10`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn experiment_config(args: &RunArgs) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::new("");
    if let Some(path) = &args.config {
        config.apply_file(path)?;
    }
    let mut set = |key: &str, value: String| config.set(key, &value);
    if let Some(v) = &args.data {
        set("data", v.display().to_string())?;
    }
    if let Some(v) = args.seed {
        set("seed", v.to_string())?;
    }
    if let Some(v) = &args.seeds {
        set("seeds", v.clone())?;
    }
    if let Some(v) = &args.classifiers {
        set("classifiers", v.clone())?;
    }
    if let Some(v) = args.format {
        set("format", v.to_string())?;
    }
    if args.fit_on_all {
        set("fit_on_all", "true".into())?;
    }
    if let Some(v) = args.folds {
        set("folds", v.to_string())?;
    }
    if let Some(v) = args.test_fraction {
        set("test_fraction", v.to_string())?;
    }
    if let Some(v) = &args.scheme {
        set("scheme", v.clone())?;
    }
    if args.stratified {
        set("stratified", "true".into())?;
    }
    if let Some(v) = &args.stop_words {
        set("stop_words", v.display().to_string())?;
    }
    if let Some(v) = &args.save_models {
        set("save_models", v.display().to_string())?;
    }
    if let Some(v) = &args.dump_features {
        set("dump_features", v.display().to_string())?;
    }
    for o in &args.overrides {
        let (key, value) = o
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got {o:?}"))?;
        set(key, value.to_string())?;
    }
    if config.dataset_path.as_os_str().is_empty() {
        anyhow::bail!("no dataset given: pass --data or set `data` in the config file");
    }
    Ok(config)
}

fn run(args: &RunArgs) -> Result<ExitCode> {
    let config = experiment_config(args)?;
    let report = run_experiment(&config)?;
    let text = render_report(&report, config.output_format)?;
    match &args.output {
        Some(path) => std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(&args),
        Command::ConvertIsear { input, output } => convert_isear(&input, &output)
            .map(|n| {
                eprintln!("wrote {n} reviews to {}", output.display());
                ExitCode::SUCCESS
            })
            .map_err(Into::into),
        Command::Verify { data, report } => verify(&verify_config(&data)).map_err(Into::into).and_then(|outcome| {
            if report {
                print!("{}", render_report(&outcome.report, OutputFormat::Markdown)?);
            }
            for check in &outcome.checks {
                println!("{}", check.line());
            }
            let failed = outcome.checks.iter().filter(|c| !c.passed).count();
            println!("{} of {} checks passed", outcome.checks.len() - failed, outcome.checks.len());
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
