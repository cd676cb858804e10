//! Thin command-line front end over the `ssrpu` library.
//!
//! Every subcommand delegates to `experiment` or `checks`; nothing here does
//! math. Exit codes: 0 success, 2 bad config or flags, 3 bad data, 4
//! training divergence, 5 verification failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use ssrpu::datagen::SynthConfig;
use ssrpu::experiment::{
    default_out_dir, run_eval, run_generate, run_sweep, run_train, DataSpec, EvalRow,
    ExperimentConfig, SweepAxis,
};
use ssrpu::loss::{LossFamily, LossForm};
use ssrpu::model::{Architecture, Scorer, TrainConfig};
use ssrpu::risk::RiskEstimator;
use ssrpu::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ssrpu",
    version,
    about = "Multi-label positive-unlabeled learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and save it as JSONL.
    Generate(GenerateArgs),
    /// Train a scorer; writes model, training report, and config.
    Train(TrainArgs),
    /// Score a dataset with a saved model and report metrics against gold.
    Eval(EvalArgs),
    /// Train and evaluate across one axis and several seeds, merged to CSV.
    Sweep(SweepArgs),
    /// Run the built-in verification suite.
    Check(CheckArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of instances.
    #[arg(long, default_value_t = 20_000)]
    n: usize,
    /// Feature dimension.
    #[arg(long, default_value_t = 32)]
    d: usize,
    /// Number of classes; defaults to the length of --priors.
    #[arg(long)]
    k: Option<usize>,
    /// Gold class priors, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.2, 0.1, 0.05])]
    priors: Vec<f64>,
    /// Probability a gold positive keeps its label; one value broadcasts.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0 / 3.0])]
    keep: Vec<f64>,
    /// Concept separation; higher means cleaner classes.
    #[arg(long, default_value_t = 4.0)]
    separation: f64,
    /// Keep at most this many observed labels per class.
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long, default_value_t = 62)]
    seed: u64,
    /// Output file; defaults to data.jsonl in the output directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ModelOpts {
    /// Risk estimator: pn, nnpu, or nnspu.
    #[arg(long, default_value = "nnspu")]
    estimator: RiskEstimator,
    /// Loss family: squared or log-sigmoid.
    #[arg(long, default_value = "squared")]
    loss: LossFamily,
    /// Loss form: plain or ranking.
    #[arg(long, default_value = "ranking")]
    form: LossForm,
    /// Ranking margin; must be nonzero unless --allow-zero-margin is set.
    #[arg(long, default_value_t = 0.25)]
    margin: f64,
    /// Weight each class's positive risk by sqrt((1 - pi) / pi).
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    class_weighting: bool,
    /// Scale estimated labeled priors by this factor to approximate gold.
    #[arg(long, default_value_t = 3.0)]
    multiplier: f64,
    /// Floor for zero labeled priors and gap kept below a prior of one.
    #[arg(long, default_value_t = 0.01)]
    epsilon: f64,
    /// Scorer architecture: linear or mlp1.
    #[arg(long, default_value = "linear")]
    arch: String,
    /// Hidden width when --arch mlp1.
    #[arg(long, default_value_t = 64)]
    hidden: usize,
    #[arg(long, default_value_t = 0.02)]
    lr: f64,
    #[arg(long, default_value_t = 20)]
    epochs: usize,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    weight_decay: f64,
    /// Fraction of steps spent in linear warmup.
    #[arg(long, default_value_t = 0.06)]
    warmup: f64,
    #[arg(long, default_value_t = 62)]
    seed: u64,
    /// Accept a zero ranking margin; the run degrades to a diagnostic.
    #[arg(long)]
    allow_zero_margin: bool,
}

impl ModelOpts {
    fn architecture(&self) -> Result<Architecture> {
        match self.arch.as_str() {
            "linear" => Ok(Architecture::Linear),
            "mlp1" => Ok(Architecture::Mlp1 {
                hidden: self.hidden,
            }),
            other => Err(Error::Config(format!(
                "unknown architecture {other:?}; expected linear or mlp1"
            ))),
        }
    }

    fn build_config(&self, data: DataSpec) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            data,
            estimator: self.estimator,
            loss_family: self.loss,
            loss_form: self.form,
            margin: self.margin,
            class_weighting: self.class_weighting,
            allow_degenerate_margin: self.allow_zero_margin,
            multiplier: self.multiplier,
            epsilon: self.epsilon,
            architecture: self.architecture()?,
            train: TrainConfig {
                lr: self.lr,
                epochs: self.epochs,
                batch_size: self.batch_size,
                weight_decay: self.weight_decay,
                warmup_fraction: self.warmup,
                seed: self.seed,
            },
        })
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset file (JSONL).
    #[arg(long, conflicts_with = "benchmark", required_unless_present_any = ["benchmark", "config"])]
    data: Option<PathBuf>,
    /// Use the built-in synthetic benchmark instead of a file.
    #[arg(long)]
    benchmark: bool,
    /// Full experiment config JSON; other flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelOpts,
    /// Output directory; defaults to $SSRPU_OUT_DIR or the working directory.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Saved model file ({run_id}-model.json).
    #[arg(long)]
    model: PathBuf,
    /// Dataset to score; defaults to the dataset in the run's config.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Run config; defaults to the model's sibling {run_id}-config.json.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Dataset file (JSONL).
    #[arg(long, conflicts_with = "benchmark", required_unless_present_any = ["benchmark", "config"])]
    data: Option<PathBuf>,
    /// Use the built-in synthetic benchmark instead of a file.
    #[arg(long)]
    benchmark: bool,
    /// Base experiment config JSON; other model flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelOpts,
    /// Axis to vary: margin, multiplier, or keep-prob.
    #[arg(long)]
    axis: SweepAxis,
    /// Axis values, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Seeds, comma separated; each drives training and data generation.
    #[arg(long, value_delimiter = ',', default_values_t = [62, 63, 64, 65, 66])]
    seeds: Vec<u64>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Also write the results as JSON to this path.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => generate(args),
        Command::Train(args) => train(args),
        Command::Eval(args) => eval(args),
        Command::Sweep(args) => sweep(args),
        Command::Check(args) => check(args),
    }
}

fn generate(args: GenerateArgs) -> Result<()> {
    let k = args.k.unwrap_or(args.priors.len());
    if k != args.priors.len() {
        return Err(Error::Config(format!(
            "--k {} disagrees with {} values in --priors",
            k,
            args.priors.len()
        )));
    }
    let keep = if args.keep.len() == 1 {
        vec![args.keep[0]; k]
    } else if args.keep.len() == k {
        args.keep.clone()
    } else {
        return Err(Error::Config(format!(
            "--keep needs 1 or {} values, got {}",
            k,
            args.keep.len()
        )));
    };
    let cfg = SynthConfig {
        n: args.n,
        d: args.d,
        class_priors: args.priors.clone(),
        label_keep_prob: keep,
        separation: args.separation,
        cap_per_class: args.cap,
        seed: args.seed,
    };
    let path = args
        .out
        .unwrap_or_else(|| default_out_dir().join("data.jsonl"));
    let summary = run_generate(&cfg, &path)?;
    println!(
        "wrote {} instances to {}",
        summary.instances,
        summary.path.display()
    );
    for (class, (gold, labeled)) in summary
        .gold_priors
        .iter()
        .zip(&summary.labeled_priors)
        .enumerate()
    {
        println!("class {class}: gold prior {gold:.4}, labeled prior {labeled:.4}");
    }
    Ok(())
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Data(format!("malformed config {}: {e}", path.display())))
}

fn resolve_train_config(
    config: Option<&PathBuf>,
    data: Option<PathBuf>,
    benchmark: bool,
    model: &ModelOpts,
) -> Result<ExperimentConfig> {
    if let Some(path) = config {
        return load_config(path);
    }
    let spec = if benchmark {
        DataSpec::Synth(SynthConfig::benchmark(model.seed))
    } else {
        DataSpec::Path(data.expect("clap enforces --data unless --benchmark or --config"))
    };
    model.build_config(spec)
}

fn train(args: TrainArgs) -> Result<()> {
    let cfg = resolve_train_config(args.config.as_ref(), args.data, args.benchmark, &args.model)?;
    let out_dir = args.out.unwrap_or_else(default_out_dir);
    let outcome = run_train(&cfg, &out_dir)?;
    let last = outcome
        .report
        .epoch_records
        .last()
        .expect("training produces at least one epoch");
    println!("run {} finished", outcome.run_id);
    println!(
        "final epoch mean risk {:.6}, clamp fraction {:.4}",
        last.mean_risk, last.clamp_fraction
    );
    println!("model:  {}", outcome.model_path.display());
    println!("report: {}", outcome.report_path.display());
    println!("config: {}", outcome.config_path.display());
    Ok(())
}

fn sibling_config_path(model: &Path) -> Option<PathBuf> {
    let name = model.file_name()?.to_str()?;
    let stem = name.strip_suffix("-model.json")?;
    Some(model.with_file_name(format!("{stem}-config.json")))
}

fn eval(args: EvalArgs) -> Result<()> {
    let config_path = match args.config {
        Some(path) => path,
        None => sibling_config_path(&args.model)
            .filter(|p| p.exists())
            .ok_or_else(|| {
                Error::Config(format!(
                    "no config found next to {}; pass --config",
                    args.model.display()
                ))
            })?,
    };
    let cfg = load_config(&config_path)?;
    let scorer = Scorer::load(&args.model)?;
    let data = match args.data {
        Some(path) => ssrpu::io::load_jsonl(&path)?,
        None => cfg.resolve_dataset()?,
    };
    let out_dir = args.out.unwrap_or_else(default_out_dir);
    let outcome = run_eval(&cfg, &scorer, &data, &out_dir)?;
    println!("{}", serde_json::to_string_pretty(&outcome.report)?);
    println!("eval json: {}", outcome.json_path.display());
    println!("eval csv:  {}", outcome.csv_path.display());
    Ok(())
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize_cell(rows: &[EvalRow], pick: fn(&EvalRow) -> f64) -> String {
    let finite: Vec<f64> = rows.iter().map(pick).filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return "failed".to_string();
    }
    let (mean, std) = mean_std(&finite);
    format!("{mean:.4} ± {std:.4}")
}

fn sweep(args: SweepArgs) -> Result<()> {
    let base = resolve_train_config(args.config.as_ref(), args.data, args.benchmark, &args.model)?;
    let out_dir = args.out.unwrap_or_else(default_out_dir);
    let outcome = run_sweep(&base, args.axis, &args.values, &args.seeds, &out_dir)?;
    for (idx, message) in &outcome.failures {
        eprintln!("cell {idx} failed: {message}");
    }
    println!("sweep {} over {}", outcome.sweep_id, args.axis);
    for (chunk, value) in outcome.rows.chunks(args.seeds.len()).zip(&args.values) {
        println!(
            "{} = {:<8} F1 {}  P {}  R {}  L_NA {}",
            args.axis,
            format!("{value}"),
            summarize_cell(chunk, |r| r.f1),
            summarize_cell(chunk, |r| r.p),
            summarize_cell(chunk, |r| r.r),
            summarize_cell(chunk, |r| r.l_na),
        );
    }
    println!("csv: {}", outcome.csv_path.display());
    Ok(())
}

fn check(args: CheckArgs) -> Result<()> {
    let results = ssrpu::checks::run_all_checks()?;
    if let Some(path) = &args.out {
        let mut text = serde_json::to_string_pretty(&results)?;
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut failed = Vec::new();
    for result in &results {
        let verdict = if result.passed { "PASS" } else { "FAIL" };
        println!(
            "{verdict}  {:<32} measured {:>12.3e} vs threshold {:>9.3e}  {}",
            result.name, result.measured, result.threshold, result.detail
        );
        if !result.passed {
            failed.push(result.name.clone());
        }
    }
    if failed.is_empty() {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        Err(Error::CheckFailed(format!(
            "{} of {} checks failed: {}",
            failed.len(),
            results.len(),
            failed.join(", ")
        )))
    }
}
