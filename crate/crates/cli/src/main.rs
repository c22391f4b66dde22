use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cat_core::attribution::AttributionMethod;
use cat_core::eval::{render_comparison, render_table, TestKind};
use cat_core::io::explanations::load_explanations;
use cat_core::io::RunConfig;
use cat_core::registry::MetricBackends;
use cat_core::runner::{compare_lines, evaluate_lines, run_explain, run_train, Overrides, TrainTarget};
use cat_core::CatError;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cat", version, about = "Contrastive, attribute-aware explanations for text classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search a contrast for every record of a dataset.
    Explain(ExplainArgs),
    /// Compute Flip/Dist/Cont/Fluency over an explanation file.
    Evaluate(EvaluateArgs),
    /// Compare two explanation files with per-metric t-tests.
    Compare(CompareArgs),
    /// Train reference checkpoints.
    Train(TrainArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Attribution {
    Ig,
    Occlusion,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct ExplainArgs {
    /// Dataset JSONL, or `-` for standard input. Defaults to the config's `dataset`.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    config: PathBuf,
    /// Output JSONL, or `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,
    #[arg(long, value_enum)]
    attribution: Option<Attribution>,
    #[arg(long, overrides_with = "no_early_exit")]
    early_exit: bool,
    #[arg(long, overrides_with = "early_exit")]
    no_early_exit: bool,
    #[arg(long)]
    beam_k: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    explanations: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Recompute metrics with this config's embedder and fluency model
    /// instead of using the values stored in the files.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Unpaired Welch test instead of the paired test.
    #[arg(long)]
    welch: bool,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    config: PathBuf,
    /// classifier, attribute-bank, filler, fluency, embedder or all.
    #[arg(long)]
    target: String,
}

fn write_out(dest: &str, content: &str) -> Result<(), CatError> {
    if dest == "-" {
        print!("{content}");
    } else {
        let path = Path::new(dest);
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, content)?;
    }
    Ok(())
}

fn explain(args: ExplainArgs) -> Result<u8, CatError> {
    let mut config = RunConfig::load(&args.config)?;
    let early_exit = match (args.early_exit, args.no_early_exit) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    };
    Overrides {
        attribution: args.attribution.map(|a| match a {
            Attribution::Ig => AttributionMethod::IntegratedGradients,
            Attribution::Occlusion => AttributionMethod::Occlusion,
        }),
        early_exit,
        beam_k: args.beam_k,
        edit_budget: args.budget,
    }
    .apply(&mut config)?;
    let input = match args.input.as_deref() {
        Some("-") => {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf)?;
            buf
        }
        Some(path) => std::fs::read(path).map_err(|e| CatError::Config(format!("cannot read {path}: {e}")))?,
        None => std::fs::read(config.require("dataset")?)?,
    };
    let run = run_explain(&config, &input)?;
    write_out(&args.out, &run.output)?;
    log::info!(
        "{} ok, {} no_contrast, {} error (config {})",
        run.count(cat_core::io::Status::Ok),
        run.count(cat_core::io::Status::NoContrast),
        run.count(cat_core::io::Status::Error),
        &run.config_hash[..12]
    );
    Ok(run.exit_code() as u8)
}

fn metric_backends(config: &Path) -> Result<MetricBackends, CatError> {
    MetricBackends::load(&RunConfig::load(config)?)
}

fn evaluate(args: EvaluateArgs) -> Result<u8, CatError> {
    let lines = load_explanations(&args.explanations)?;
    let metrics = metric_backends(&args.config)?;
    let agg = evaluate_lines(&lines, metrics.models())?;
    match args.format {
        Format::Table => print!("{}", render_table(&[("cat", &agg)])),
        Format::Json => println!("{}", cat_core::io::json::to_string(&agg)?),
    }
    Ok(0)
}

fn compare(args: CompareArgs) -> Result<u8, CatError> {
    let a = load_explanations(&args.a)?;
    let b = load_explanations(&args.b)?;
    let metrics = args.config.as_deref().map(metric_backends).transpose()?;
    let test = if args.welch { TestKind::Welch } else { TestKind::Paired };
    let report = compare_lines(&a, &b, metrics.as_ref().map(MetricBackends::models), test)?;
    match args.format {
        Format::Table => print!("{}", render_comparison(&report)),
        Format::Json => println!("{}", cat_core::io::json::to_string(&report)?),
    }
    Ok(0)
}

fn train(args: TrainArgs) -> Result<u8, CatError> {
    let config = RunConfig::load(&args.config)?;
    let target: TrainTarget = args.target.parse()?;
    for line in run_train(&config, target)? {
        println!("{line}");
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Explain(a) => explain(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Compare(a) => compare(a),
        Command::Train(a) => train(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
