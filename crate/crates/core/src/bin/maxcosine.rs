use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use maxcosine::checkpoint::{is_checkpoint, Checkpoint, CheckpointMeta};
use maxcosine::config::{load_libraries, EmbeddingFormat, RunConfig};
use maxcosine::data::{load_pairs, tokenize, Label, SentencePair};
use maxcosine::ensemble::{train_ensemble, Ensemble, Manifest};
use maxcosine::matcher::build_augmented_sequence;
use maxcosine::model::{label_of, ModelConfig};
use maxcosine::synthetic::check_model_gradients;
use maxcosine::training::{self, EpochMetrics, Evaluation};
use maxcosine::{EmbeddingLibrary, Error, Result};

#[derive(Parser)]
#[command(name = "maxcosine", version, about = "Max-cosine matching LSTM for textual entailment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model; writes model.ckpt and metrics.tsv into out_dir.
    Train(RunArgs),
    /// Accuracy and confusion matrix of a checkpoint or ensemble manifest.
    Eval(EvalArgs),
    /// Classify one premise/hypothesis pair.
    Predict(PredictArgs),
    /// Show the max-cosine alignment of hypothesis words to premise words.
    Match(MatchArgs),
    /// Train one model per seed and write an ensemble manifest.
    EnsembleTrain(RunArgs),
    /// Compare analytic and finite-difference gradients on a random model.
    Gradcheck(GradcheckArgs),
    /// Convert an embedding file between the text and binary formats.
    EmbedConvert(ConvertArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key = value configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Training pairs (SNLI .jsonl or cached .tsv).
    #[arg(long)]
    train: Option<String>,
    /// Validation pairs, used for best-epoch selection.
    #[arg(long)]
    val: Option<String>,
    /// Optional test pairs, evaluated once after training.
    #[arg(long)]
    test: Option<String>,
    /// First embedding library.
    #[arg(long)]
    embeddings: Option<String>,
    /// Second embedding library, concatenated after the first (bi-embedding).
    #[arg(long)]
    embeddings2: Option<String>,
    /// auto | text | binary (auto: .bin is binary).
    #[arg(long)]
    embedding_format: Option<String>,
    /// Expected dimension of each embedding file.
    #[arg(long)]
    embedding_dim: Option<String>,
    #[arg(long)]
    out_dir: Option<String>,
    /// LSTM hidden size k.
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    dropout: Option<String>,
    /// true | false
    #[arg(long)]
    biway: Option<String>,
    /// true | false
    #[arg(long)]
    bi_embedding: Option<String>,
    /// Run seed (falls back to MAXCOSINE_SEED, then 1).
    #[arg(long)]
    seed: Option<String>,
    /// Half-width of the OOV context window.
    #[arg(long)]
    oov_window: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    batch_size: Option<String>,
    #[arg(long)]
    learning_rate: Option<String>,
    #[arg(long)]
    beta1: Option<String>,
    #[arg(long)]
    beta2: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<String>,
    /// Comma-separated ensemble seeds.
    #[arg(long)]
    seeds: Option<String>,
    /// Number of ensemble members when --seeds is absent.
    #[arg(long)]
    ensemble_size: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let flags = [
            ("train", &self.train),
            ("val", &self.val),
            ("test", &self.test),
            ("embeddings", &self.embeddings),
            ("embeddings2", &self.embeddings2),
            ("embedding_format", &self.embedding_format),
            ("embedding_dim", &self.embedding_dim),
            ("out_dir", &self.out_dir),
            ("hidden", &self.hidden),
            ("dropout", &self.dropout),
            ("biway", &self.biway),
            ("bi_embedding", &self.bi_embedding),
            ("seed", &self.seed),
            ("oov_window", &self.oov_window),
            ("epochs", &self.epochs),
            ("batch_size", &self.batch_size),
            ("learning_rate", &self.learning_rate),
            ("beta1", &self.beta1),
            ("beta2", &self.beta2),
            ("epsilon", &self.epsilon),
            ("workers", &self.workers),
            ("seeds", &self.seeds),
            ("ensemble_size", &self.ensemble_size),
        ];
        let overrides: Vec<(String, String)> = flags
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        RunConfig::load(self.config.as_deref(), &overrides)
    }
}

#[derive(Args)]
struct EmbeddingArgs {
    /// Embedding library; defaults to the files recorded in the checkpoint.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Second library for bi-embedding models.
    #[arg(long)]
    embeddings2: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    embedding_format: FormatArg,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint file or ensemble manifest.
    #[arg(long)]
    model: PathBuf,
    /// SNLI .jsonl or cached .tsv.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    emb: EmbeddingArgs,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct PredictArgs {
    /// Checkpoint file or ensemble manifest.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    premise: String,
    #[arg(long)]
    hypothesis: String,
    #[command(flatten)]
    emb: EmbeddingArgs,
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long)]
    embeddings2: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    embedding_format: FormatArg,
    #[arg(long)]
    premise: String,
    #[arg(long)]
    hypothesis: String,
    #[arg(long, default_value_t = maxcosine::embedding::DEFAULT_OOV_WINDOW)]
    oov_window: usize,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Word-vector dimension d.
    #[arg(long, default_value_t = 8)]
    embed_dim: usize,
    /// Hidden size k.
    #[arg(long, default_value_t = 12)]
    hidden: usize,
    /// Random pairs in the checked batch.
    #[arg(long, default_value_t = 4)]
    pairs: usize,
    #[arg(long, value_enum, default_value_t = Arch::Both)]
    arch: Arch,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    step: f64,
    /// Pass threshold on the max relative error.
    #[arg(long, default_value_t = 1e-5)]
    tolerance: f64,
    /// Falls back to MAXCOSINE_SEED, then 1.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Output format.
    #[arg(long, value_enum)]
    to: Direction,
    /// Input format.
    #[arg(long, value_enum, default_value_t = FormatArg::Auto)]
    from: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Text,
    Binary,
}

impl From<FormatArg> for EmbeddingFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Auto => EmbeddingFormat::Auto,
            FormatArg::Text => EmbeddingFormat::Text,
            FormatArg::Binary => EmbeddingFormat::Binary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Text,
    Binary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Arch {
    Base,
    Biway,
    Both,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Train(args) => cmd_train(&args.resolve()?),
        Command::Eval(args) => cmd_eval(&args),
        Command::Predict(args) => cmd_predict(&args),
        Command::Match(args) => cmd_match(&args),
        Command::EnsembleTrain(args) => cmd_ensemble(&args.resolve()?),
        Command::Gradcheck(args) => cmd_gradcheck(&args),
        Command::EmbedConvert(args) => cmd_embed_convert(&args),
    }
    .map(|_| ExitCode::SUCCESS)
    .or_else(|e| match e {
        Error::Config(ref m) if m == GRADCHECK_FAILED => Ok(ExitCode::FAILURE),
        e => Err(e),
    })
}

const GRADCHECK_FAILED: &str = "gradient check failed";

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Config(format!("{what} path is required")))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn write_metrics(path: &Path, metrics: &[EpochMetrics]) -> Result<()> {
    let mut text = String::new();
    for m in metrics {
        text.push_str(&m.log_line());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn embedding_strings(cfg: &RunConfig) -> Result<Vec<String>> {
    Ok(cfg
        .embedding_paths()?
        .iter()
        .map(|p| p.display().to_string())
        .collect())
}

fn load_data(cfg: &RunConfig) -> Result<(Vec<SentencePair>, Vec<SentencePair>, EmbeddingLibrary)> {
    let train = load_pairs(required(&cfg.train, "train")?)?;
    let val = load_pairs(required(&cfg.val, "val")?)?;
    let lib = cfg.load_library()?;
    eprintln!(
        "{} train / {} val pairs, {} words x {} dims",
        train.len(),
        val.len(),
        lib.len(),
        lib.dim()
    );
    Ok((train, val, lib))
}

fn cmd_train(cfg: &RunConfig) -> Result<()> {
    let (train, val, lib) = load_data(cfg)?;
    let model_cfg = cfg.model_config(lib.dim())?;
    let train_cfg = cfg.train_config()?;
    create_dir(&cfg.out_dir)?;
    let outcome = training::train(&train, &val, &model_cfg, &train_cfg, &lib)?;
    write_metrics(&cfg.out_dir.join("metrics.tsv"), &outcome.metrics)?;
    let mut best = outcome.best;
    best.meta.embeddings = embedding_strings(cfg)?;
    let path = cfg.out_dir.join("model.ckpt");
    best.save(&path)?;
    println!(
        "best epoch {} val_accuracy {:.6} -> {}",
        best.meta.epoch.unwrap_or(0),
        best.meta.val_accuracy.unwrap_or(0.0),
        path.display()
    );
    if let Some(test) = &cfg.test {
        let eval = training::evaluate(&load_pairs(test)?, &best.model, &lib)?;
        println!("test\n{}", eval.report());
    }
    Ok(())
}

fn cmd_ensemble(cfg: &RunConfig) -> Result<()> {
    let (train, val, lib) = load_data(cfg)?;
    let model_cfg = cfg.model_config(lib.dim())?;
    let train_cfg = cfg.train_config()?;
    let seeds = cfg.ensemble_seeds()?;
    create_dir(&cfg.out_dir)?;
    let (ensemble, outcomes) = train_ensemble(&model_cfg, &train_cfg, &seeds, &train, &val, &lib)?;
    let mut manifest = Manifest { members: Vec::new() };
    for (seed, outcome) in seeds.iter().zip(outcomes) {
        let name = format!("member-{seed}.ckpt");
        write_metrics(&cfg.out_dir.join(format!("metrics-{seed}.tsv")), &outcome.metrics)?;
        let mut ck = outcome.best;
        ck.meta.embeddings = embedding_strings(cfg)?;
        ck.save(cfg.out_dir.join(&name))?;
        println!(
            "seed {seed}: best epoch {} val_accuracy {:.6}",
            ck.meta.epoch.unwrap_or(0),
            ck.meta.val_accuracy.unwrap_or(0.0)
        );
        manifest.members.push((*seed, PathBuf::from(name)));
    }
    let mpath = cfg.out_dir.join("ensemble.manifest");
    manifest.save(&mpath)?;
    println!("ensemble val\n{}", ensemble.evaluate(&val, &lib)?.report());
    if let Some(test) = &cfg.test {
        println!("ensemble test\n{}", ensemble.evaluate(&load_pairs(test)?, &lib)?.report());
    }
    println!("manifest -> {}", mpath.display());
    Ok(())
}

/// A single checkpoint or a manifest of them.
enum Predictor {
    Single(Box<Checkpoint>),
    Ensemble(Ensemble, Vec<Checkpoint>),
}

impl Predictor {
    fn load(path: &Path) -> Result<Self> {
        if is_checkpoint(path) {
            Ok(Predictor::Single(Box::new(Checkpoint::load(path)?)))
        } else {
            let (e, cks) = Manifest::load_ensemble(path)?;
            Ok(Predictor::Ensemble(e, cks))
        }
    }

    fn config(&self) -> &ModelConfig {
        match self {
            Predictor::Single(c) => &c.model.config,
            Predictor::Ensemble(e, _) => e.config(),
        }
    }

    fn meta(&self) -> &CheckpointMeta {
        match self {
            Predictor::Single(c) => &c.meta,
            Predictor::Ensemble(_, cks) => &cks[0].meta,
        }
    }

    fn library(&self, emb: &EmbeddingArgs) -> Result<EmbeddingLibrary> {
        let paths: Vec<PathBuf> = match &emb.embeddings {
            Some(first) => std::iter::once(first.clone())
                .chain(emb.embeddings2.clone())
                .collect(),
            None => self.meta().embeddings.iter().map(PathBuf::from).collect(),
        };
        if paths.is_empty() {
            return Err(Error::Config("no embeddings given and none recorded in the model".into()));
        }
        let lib = load_libraries(&paths, emb.embedding_format.into(), None)?;
        if lib.dim() != self.config().embed_dim {
            return Err(Error::Dimension(format!(
                "model expects {}-d word vectors but the embedding library has dimension {}",
                self.config().embed_dim,
                lib.dim()
            )));
        }
        Ok(lib)
    }

    fn evaluate(&self, data: &[SentencePair], lib: &EmbeddingLibrary) -> Result<Evaluation> {
        match self {
            Predictor::Single(c) => training::evaluate(data, &c.model, lib),
            Predictor::Ensemble(e, _) => e.evaluate(data, lib),
        }
    }

    fn predict(&self, pair: &SentencePair, lib: &EmbeddingLibrary) -> Result<[f64; 3]> {
        match self {
            Predictor::Single(c) => c.model.predict(pair, lib).map(|r| r.0),
            Predictor::Ensemble(e, _) => e.predict(pair, lib).map(|r| r.0),
        }
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let predictor = Predictor::load(&args.model)?;
    let lib = predictor.library(&args.emb)?;
    let data = load_pairs(&args.data)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let eval = pool.install(|| predictor.evaluate(&data, &lib))?;
    println!("{}", eval.report());
    Ok(())
}

fn sentence_pair(premise: &str, hypothesis: &str) -> Result<SentencePair> {
    let premise = tokenize(premise);
    let hypothesis = tokenize(hypothesis);
    if premise.is_empty() {
        return Err(Error::Empty("premise after tokenization"));
    }
    if hypothesis.is_empty() {
        return Err(Error::Empty("hypothesis after tokenization"));
    }
    Ok(SentencePair {
        premise,
        hypothesis,
        // Placeholder; prediction never reads the gold label.
        label: Label::Entailment,
        id: 0,
    })
}

fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let predictor = Predictor::load(&args.model)?;
    let lib = predictor.library(&args.emb)?;
    let pair = sentence_pair(&args.premise, &args.hypothesis)?;
    let probs = predictor.predict(&pair, &lib)?;
    let mut out = std::io::stdout().lock();
    for l in Label::ALL {
        let _ = writeln!(out, "{}\t{:.6}", l.name(), probs[l.index()]);
    }
    let _ = writeln!(out, "label\t{}", label_of(&probs));
    Ok(())
}

fn cmd_match(args: &MatchArgs) -> Result<()> {
    let paths: Vec<PathBuf> = std::iter::once(args.embeddings.clone())
        .chain(args.embeddings2.clone())
        .collect();
    let lib = load_libraries(&paths, args.embedding_format.into(), None)?;
    let pair = sentence_pair(&args.premise, &args.hypothesis)?;
    let z = build_augmented_sequence(&pair.hypothesis, &pair.premise, &lib, args.oov_window)?;
    for (t, (&j, sim)) in z.matched_indices.iter().zip(&z.similarities).enumerate() {
        println!("{} -> {} ({sim:.4})", pair.hypothesis[t], pair.premise[j]);
    }
    Ok(())
}

fn cmd_gradcheck(args: &GradcheckArgs) -> Result<()> {
    let seed = match args.seed {
        Some(s) => s,
        None => RunConfig::default().resolved_seed()?,
    };
    let archs: &[bool] = match args.arch {
        Arch::Base => &[false],
        Arch::Biway => &[true],
        Arch::Both => &[false, true],
    };
    let mut worst = 0.0f64;
    for &biway in archs {
        let cfg = ModelConfig {
            embed_dim: args.embed_dim,
            hidden: args.hidden,
            dropout: 0.0,
            biway,
            bi_embedding: false,
            seed,
            oov_window: maxcosine::embedding::DEFAULT_OOV_WINDOW,
        };
        let err = check_model_gradients(&cfg, args.pairs, args.step)?;
        println!(
            "{}\tmax_relative_error\t{err:.3e}",
            if biway { "biway" } else { "base" }
        );
        worst = worst.max(err);
    }
    if worst < args.tolerance {
        println!("PASS (< {:e})", args.tolerance);
        Ok(())
    } else {
        println!("FAIL (>= {:e})", args.tolerance);
        Err(Error::Config(GRADCHECK_FAILED.into()))
    }
}

fn cmd_embed_convert(args: &ConvertArgs) -> Result<()> {
    let lib = maxcosine::config::load_library(&args.input, args.from.into(), None)?;
    match args.to {
        Direction::Text => lib.write_text(&args.output)?,
        Direction::Binary => lib.write_binary(&args.output)?,
    }
    println!("{} words x {} dims -> {}", lib.len(), lib.dim(), args.output.display());
    Ok(())
}
