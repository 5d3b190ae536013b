//! Argument parsing, configuration layering, and command dispatch for the
//! `multimd` binary.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use multimd::consistency::compute_pseudo_truth;
use multimd::dataset::{balance_undersample, generate_synthetic, load_dataset, save_dataset, Dataset, SynthConfig};
use multimd::experiment::{
    ablation_suite, ablation_table_text, cross_validate, cv_table_text, file_sha256,
    prepare_samples, read_ablation_csv, read_cv_csv, summarize_ablation, train, write_manifest, write_run, ExperimentConfig,
    RunManifest, TrainConfig, ABLATION_FILE, CV_FILE,
};
use multimd::model::{save_checkpoint, Ablation, Component, ModelConfig, MultiMdModel};
use multimd::numeric::Activation;
use multimd::{Error, Result};

pub const SEED_ENV: &str = "MULTIMD_SEED";
pub const DATASET_FILE: &str = "dataset.jsonl";
pub const CONSISTENCY_FILE: &str = "consistency.csv";
pub const CHECKPOINT_FILE: &str = "model.json";
pub const LOSS_FILE: &str = "loss.csv";

#[derive(Debug, Parser)]
#[command(name = "multimd", version, about = "Multimodal misinformation detection with cross-modal entity consistency")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic feature file with planted signals.
    Synth(SynthArgs),
    /// Compute per-record entity-consistency scores.
    Consistency(ConsistencyArgs),
    /// Train one model on the whole dataset and save a checkpoint.
    Train(RunArgs),
    /// k-fold cross-validation.
    Cv(RunArgs),
    /// Full model against ablated variants, with paired t-tests over folds.
    Ablate(RunArgs),
    /// Print the tables of a finished cv or ablate run.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory; the dataset is written as dataset.jsonl.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of records (even).
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ConsistencyArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for consistency.csv.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `cv` or `ablate`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblateArg {
    Image,
    Text,
    Audio,
    Consistency,
}

impl From<AblateArg> for Component {
    fn from(a: AblateArg) -> Self {
        match a {
            AblateArg::Image => Component::Image,
            AblateArg::Text => Component::Text,
            AblateArg::Audio => Component::Audio,
            AblateArg::Consistency => Component::Consistency,
        }
    }
}

/// Layer widths: `paper` uses 1024-wide layers, `desk` narrow ones for quick runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    #[default]
    Paper,
    Desk,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for balancing, folds, initialization, and shuffling. Falls back to MULTIMD_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub k: Option<u64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: Option<u64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub lambda_aux: Option<f64>,
    /// Component to remove. Repeatable. For `ablate`, the variants to compare (default: all).
    #[arg(long, value_enum)]
    pub ablate: Vec<AblateArg>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// TOML file with settings; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Skip under-sampling of the majority class.
    #[arg(long)]
    pub no_balance: bool,
}

/// Settings accepted in a `--config` file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub k: Option<usize>,
    pub preset: Option<Preset>,
    pub balance: Option<bool>,
    #[serde(default)]
    pub model: ModelOverrides,
    #[serde(default)]
    pub train: TrainOverrides,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOverrides {
    pub hidden: Option<usize>,
    pub consistency_dim: Option<usize>,
    pub extractor_hidden: Option<usize>,
    pub activation: Option<Activation>,
    pub dropout: Option<f64>,
    pub lambda_aux: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub shuffle: Option<bool>,
}

/// Fully resolved settings of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub balance: bool,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

pub fn read_file_config(path: &Path) -> Result<FileConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Defaults, then `MULTIMD_SEED`, then the config file, then flags.
pub fn resolve(args: &RunArgs, dataset: &Dataset<f64>) -> Result<Resolved> {
    let file = match &args.config {
        Some(p) => read_file_config(p)?,
        None => FileConfig::default(),
    };
    let seed = args.seed.or(file.seed).or(env_seed()?).unwrap_or(0);

    let preset = args.preset.or(file.preset).unwrap_or_default();
    let mut model = match preset {
        Preset::Paper => ModelConfig::for_manifest(dataset.manifest()),
        Preset::Desk => ModelConfig::desk(dataset.manifest()),
    };
    let m = &file.model;
    model.hidden = m.hidden.unwrap_or(model.hidden);
    model.consistency_dim = m.consistency_dim.unwrap_or(model.consistency_dim);
    model.extractor_hidden = m.extractor_hidden.unwrap_or(model.extractor_hidden);
    model.activation = m.activation.unwrap_or(model.activation);
    model.dropout = m.dropout.unwrap_or(model.dropout);
    model.lambda_aux = args.lambda_aux.or(m.lambda_aux).unwrap_or(model.lambda_aux);
    model.seed = seed;
    model.ablation = Ablation::removing(args.ablate.iter().map(|&a| Component::from(a)));

    let t = &file.train;
    let defaults = TrainConfig::default();
    let train = TrainConfig {
        lr: args.lr.or(t.lr).unwrap_or(defaults.lr),
        epochs: args.epochs.map(|e| e as usize).or(t.epochs).unwrap_or(defaults.epochs),
        batch_size: t.batch_size.unwrap_or(defaults.batch_size),
        shuffle: t.shuffle.unwrap_or(defaults.shuffle),
        seed,
    };
    let k = args.k.map(|k| k as usize).or(file.k).unwrap_or(10);
    let mut experiment = ExperimentConfig::new(model, train, k, seed);
    experiment.parallel = true;
    experiment.validate()?;
    Ok(Resolved {
        experiment,
        balance: file.balance.unwrap_or(true) && !args.no_balance,
    })
}

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::io(
            path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "dataset file not found"),
        ))
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(f))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs one parsed command. Human-readable output goes to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(&a),
        Command::Consistency(a) => consistency(&a),
        Command::Train(a) => train_cmd(&a),
        Command::Cv(a) => cv(&a),
        Command::Ablate(a) => ablate(&a),
        Command::Report(a) => report(&a),
    }
}

fn synth(a: &SynthArgs) -> Result<()> {
    let seed = a.seed.or(env_seed()?).unwrap_or(0);
    let d: Dataset<f64> = generate_synthetic(&SynthConfig::desk(a.n, seed))?;
    create_dir(&a.out)?;
    let path = a.out.join(DATASET_FILE);
    save_dataset(&d, &path)?;
    println!("wrote {} records to {}", d.len(), path.display());
    Ok(())
}

fn consistency(a: &ConsistencyArgs) -> Result<()> {
    require_file(&a.data)?;
    let d: Dataset<f64> = load_dataset(&a.data)?;
    create_dir(&a.out)?;
    let path = a.out.join(CONSISTENCY_FILE);
    let mut w = csv_writer(&path)?;
    w.write_record(["id", "text_image", "text_audio", "image_audio", "smc_level", "defined_pairs"])?;
    for r in d.records() {
        let s = compute_pseudo_truth(r)?;
        w.write_record([
            r.id.clone(),
            s.text_image.to_string(),
            s.text_audio.to_string(),
            s.image_audio.to_string(),
            s.smc_level.to_string(),
            s.defined_pairs.to_string(),
        ])?;
    }
    finish(w, &path)?;
    println!("wrote {} rows to {}", d.len(), path.display());
    Ok(())
}

/// Loads, resolves settings, and balances; shared by train, cv, and ablate.
fn prepare(a: &RunArgs) -> Result<(Dataset<f64>, Resolved)> {
    require_file(&a.data)?;
    if let Some(c) = &a.config {
        require_file(c)?;
    }
    let loaded: Dataset<f64> = load_dataset(&a.data)?;
    let resolved = resolve(a, &loaded)?;
    let data = if resolved.balance {
        balance_undersample(&loaded, resolved.experiment.seed)?
    } else {
        loaded
    };
    Ok((data, resolved))
}

fn manifest(command: &str, a: &RunArgs, data: &Dataset<f64>, r: &Resolved, ablations: Vec<String>) -> Result<RunManifest> {
    Ok(RunManifest {
        command: command.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        dataset: a.data.display().to_string(),
        dataset_sha256: file_sha256(&a.data)?,
        records: data.len(),
        balanced: r.balance,
        config: r.experiment.clone(),
        ablations,
    })
}

fn ablation_labels(r: &Resolved) -> Vec<String> {
    r.experiment.model.ablation.components().map(|c| c.name().to_owned()).collect()
}

fn train_cmd(a: &RunArgs) -> Result<()> {
    let (data, r) = prepare(a)?;
    let samples = prepare_samples(&data)?;
    let mut model = MultiMdModel::<f64>::new(r.experiment.model.clone())?;
    let history = train(&mut model, &samples, &r.experiment.train)?;
    create_dir(&a.out)?;
    save_checkpoint(&model, a.out.join(CHECKPOINT_FILE))?;
    let loss_path = a.out.join(LOSS_FILE);
    let mut w = csv_writer(&loss_path)?;
    w.write_record(["epoch", "loss"])?;
    for (e, l) in history.history.iter().enumerate() {
        w.write_record([(e + 1).to_string(), l.to_string()])?;
    }
    finish(w, &loss_path)?;
    write_manifest(&a.out, &manifest("train", a, &data, &r, ablation_labels(&r))?)?;
    println!(
        "trained on {} records for {} epochs, final loss {:.6}",
        data.len(),
        history.history.len(),
        history.final_loss()
    );
    Ok(())
}

fn cv(a: &RunArgs) -> Result<()> {
    let (data, r) = prepare(a)?;
    let (_, report) = cross_validate(&data, &r.experiment)?;
    write_run(&a.out, &manifest("cv", a, &data, &r, ablation_labels(&r))?, &report, None)?;
    print!("{}", cv_table_text(&report));
    Ok(())
}

fn ablate(a: &RunArgs) -> Result<()> {
    let (data, mut r) = prepare(a)?;
    let components: Vec<Component> = if a.ablate.is_empty() {
        Component::ABLATION_ORDER.to_vec()
    } else {
        a.ablate.iter().map(|&c| c.into()).collect()
    };
    // variants are selected per row; the base run is the full model
    r.experiment.model.ablation = Ablation::none();
    let table = ablation_suite(&data, &r.experiment, &components)?;
    let labels = components.iter().map(|c| c.name().to_owned()).collect();
    write_run(&a.out, &manifest("ablate", a, &data, &r, labels)?, &table.full, Some(&table))?;
    print!("{}\n{}", cv_table_text(&table.full), ablation_table_text(&summarize_ablation(&table)));
    Ok(())
}

fn report(a: &ReportArgs) -> Result<()> {
    let cv_path = a.out.join(CV_FILE);
    require_file(&cv_path)?;
    let f = fs::File::open(&cv_path).map_err(|e| Error::io(&cv_path, e))?;
    print!("{}", cv_table_text(&read_cv_csv(f)?));
    let ab_path = a.out.join(ABLATION_FILE);
    if ab_path.is_file() {
        let f = fs::File::open(&ab_path).map_err(|e| Error::io(&ab_path, e))?;
        print!("\n{}", ablation_table_text(&read_ablation_csv(f)?));
    }
    Ok(())
}
