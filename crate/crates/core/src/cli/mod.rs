//! The `spanparse` command line.
//!
//! Every command reads the flat settings (defaults, then `--config FILE`,
//! then `--set KEY=VALUE` and dedicated flags), logs the resolved values and
//! runs one pipeline stage. Exit status is 0 on success, 1 on runtime
//! failure and 2 on usage errors.

pub mod experiment;
pub mod settings;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::augment;
use crate::error::{Error, Result};
use crate::eval;
use crate::scorer::{load_model, save_model, PretrainedEmbeddings, ScorerModel};
use crate::selftrain;
use crate::trainer;
use crate::treebank::{
    build_vocabulary_from_sentences, read_raw_sentences, read_treebank, write_treebank, Sentence,
};
pub use settings::Settings;

#[derive(Parser, Debug)]
#[command(name = "spanparse", version, about = "Few-shot span-based constituency parsing")]
pub struct Cli {
    /// More log output (-v debug); -q keeps warnings only.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Common {
    /// Flat `key = value` settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one setting; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a parser on a bracketed treebank.
    Train {
        #[command(flatten)]
        common: Common,
        /// Training treebank.
        #[arg(long)]
        train: PathBuf,
        /// Dev treebank; required unless --split is given.
        #[arg(long)]
        dev: Option<PathBuf>,
        /// Use only the first N trees of the training file.
        #[arg(long)]
        take_first: Option<usize>,
        /// Carve train/dev out of the training file, e.g. 10/5.
        #[arg(long)]
        split: Option<String>,
        /// Vocabulary cap (`all` for none).
        #[arg(long)]
        vocab_size: Option<String>,
        /// Extra raw sentences whose tokens join the vocabulary.
        #[arg(long)]
        vocab_pool: Option<PathBuf>,
        /// Pretrained word vectors (`token v1 v2 ...` per line).
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Output model file.
        #[arg(long)]
        model: PathBuf,
        /// Per-epoch metrics CSV.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Grow a treebank with subtree substitution.
    Augment {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Output corpus size, originals included.
        #[arg(long)]
        size: Option<usize>,
        /// Replace numbers with the number token before augmenting.
        #[arg(long)]
        normalize_numbers: bool,
    },
    /// Parse raw sentences, one per line.
    Parse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Self-train a model on unlabeled sentences.
    Selftrain {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        /// Raw-sentence pool files; repeatable.
        #[arg(long)]
        pool: Vec<PathBuf>,
        /// Separate raw sentences for model selection.
        #[arg(long)]
        dev_pool: Option<PathBuf>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        warm_start: bool,
        /// Write each step's predicted treebanks here.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// Per-step metrics CSV.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Score predicted trees against gold.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        predicted: PathBuf,
        /// corpus or sentence.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        exclude_trivial: bool,
        /// Only sentences with at most this many tokens.
        #[arg(long)]
        max_length: Option<usize>,
        /// Per-sentence counts CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a grid of experiments over seeds.
    Experiment {
        #[command(flatten)]
        common: Common,
        /// Summary CSV (mean and standard deviation per cell).
        #[arg(long)]
        output: PathBuf,
        /// Per-run CSV.
        #[arg(long)]
        runs: Option<PathBuf>,
    },
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Warn,
        (false, 0) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .try_init();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Usage(format!("{what} {} does not exist", path.display())))
    }
}

fn settings(common: &Common, command: &str, extra: &[(&str, Option<String>)]) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &common.config {
        require_file(path, "config file")?;
        s.load_file(path)?;
    }
    if let Some(seed) = common.seed {
        s.set("seed", &seed.to_string())?;
    }
    for (key, value) in extra {
        if let Some(v) = value {
            s.set(key, v)?;
        }
    }
    for pair in &common.set {
        s.set_pair(pair)?;
    }
    s.log_resolved(command);
    Ok(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_pool(paths: &[PathBuf]) -> Result<Vec<Sentence>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(read_raw_sentences(p)?);
    }
    Ok(out)
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Train {
            common,
            train,
            dev,
            take_first,
            split,
            vocab_size,
            vocab_pool,
            embeddings,
            epochs,
            model,
            metrics,
        } => {
            require_file(&train, "training treebank")?;
            if let Some(d) = &dev {
                require_file(d, "dev treebank")?;
            }
            let s = settings(
                &common,
                "train",
                &[
                    ("vocab_size", vocab_size),
                    ("epochs", epochs.map(|e| e.to_string())),
                ],
            )?;
            let mut corpus = read_treebank(&train, true)?;
            if let Some(n) = take_first {
                if n > corpus.len() {
                    return Err(Error::Usage(format!(
                        "--take-first {n} exceeds the {} trees in {}",
                        corpus.len(),
                        train.display()
                    )));
                }
                corpus = corpus.take_first(n);
            }
            let (train_set, dev_set) = match (split, dev) {
                (Some(split), None) => {
                    let budget: experiment::Budget =
                        split.parse().map_err(|e| Error::Usage(format!("--split: {e}")))?;
                    if budget.total() > corpus.len() {
                        return Err(Error::Usage(format!(
                            "--split {budget} needs {} trees, {} available",
                            budget.total(),
                            corpus.len()
                        )));
                    }
                    let (a, rest) = corpus.split_at(budget.train);
                    (a, rest.take_first(budget.dev))
                }
                (None, Some(dev)) => (corpus, read_treebank(&dev, true)?),
                (Some(_), Some(_)) => {
                    return Err(Error::Usage("--split and --dev are mutually exclusive".into()))
                }
                (None, None) => return Err(Error::Usage("either --dev or --split is required".into())),
            };
            let pool = match &vocab_pool {
                Some(p) => read_raw_sentences(p)?,
                None => Vec::new(),
            };
            let vocab = build_vocabulary_from_sentences(
                train_set.iter().map(|t| t.sentence()).chain(pool.iter()),
                s.vocab_size()?,
            )?;
            let pretrained = embeddings.as_deref().map(PretrainedEmbeddings::load).transpose()?;
            let initial = ScorerModel::init(s.scorer_config()?, vocab, pretrained.as_ref())?;
            log::info!(
                "training on {} trees, selecting on {}, vocabulary {}",
                train_set.len(),
                dev_set.len(),
                initial.vocab().len()
            );
            let (trained, report) = trainer::train(initial, &train_set, &dev_set, &s.train_config()?)?;
            save_model(&trained, &model)?;
            if let Some(m) = metrics {
                write_text(&m, &report.to_csv())?;
            }
            println!(
                "best dev F1 {:.2} at epoch {} ({} epochs run)",
                report.best_dev_f1,
                report.best_epoch,
                report.epoch_losses.len()
            );
            Ok(())
        }
        Command::Augment {
            common,
            input,
            output,
            size,
            normalize_numbers,
        } => {
            require_file(&input, "input treebank")?;
            let s = settings(&common, "augment", &[("augment_size", size.map(|n| n.to_string()))])?;
            let mut base = read_treebank(&input, true)?;
            if normalize_numbers {
                base = base.normalize_numbers();
            }
            let config = s.augment_config()?;
            if config.target_size < base.len() {
                return Err(Error::Usage(format!(
                    "--size {} is smaller than the {} input trees",
                    config.target_size,
                    base.len()
                )));
            }
            let out = augment::augment_corpus(&base, &config)?;
            write_treebank(&out, &output)?;
            println!("wrote {} trees ({} generated)", out.len(), out.len() - base.len());
            Ok(())
        }
        Command::Parse {
            common,
            model,
            input,
            output,
        } => {
            require_file(&model, "model file")?;
            require_file(&input, "input file")?;
            settings(&common, "parse", &[])?;
            let m = load_model(&model)?;
            let sentences = read_raw_sentences(&input)?;
            let trees = trainer::parse_all(&m, &sentences)?;
            write_treebank(&trees, &output)?;
            println!("parsed {} sentences", trees.len());
            Ok(())
        }
        Command::Selftrain {
            common,
            model,
            pool,
            dev_pool,
            steps,
            warm_start,
            dump_dir,
            output,
            metrics,
        } => {
            require_file(&model, "model file")?;
            for p in &pool {
                require_file(p, "pool file")?;
            }
            if let Some(d) = &dev_pool {
                require_file(d, "dev pool file")?;
            }
            let s = settings(
                &common,
                "selftrain",
                &[
                    ("st_steps", steps.map(|k| k.to_string())),
                    ("st_warm_start", warm_start.then(|| "true".to_string())),
                ],
            )?;
            let mut config = s.selftrain_config()?;
            config.dump_dir = dump_dir;
            if config.steps > 0 && pool.is_empty() {
                return Err(Error::Usage("--pool is required when --steps is at least 1".into()));
            }
            let initial = load_model(&model)?;
            let sentences = read_pool(&pool)?;
            let dev = dev_pool.map(|d| read_raw_sentences(&d)).transpose()?;
            let (trained, reports) =
                selftrain::self_train(initial, &sentences, dev.as_deref(), &config)?;
            save_model(&trained, &output)?;
            let csv = selftrain::reports_to_csv(&reports);
            if let Some(m) = metrics {
                write_text(&m, &csv)?;
            }
            print!("{csv}");
            Ok(())
        }
        Command::Evaluate {
            common,
            gold,
            predicted,
            mode,
            exclude_trivial,
            max_length,
            csv,
        } => {
            require_file(&gold, "gold treebank")?;
            require_file(&predicted, "predicted treebank")?;
            let s = settings(
                &common,
                "evaluate",
                &[
                    ("eval_mode", mode),
                    ("eval_exclude_trivial", exclude_trivial.then(|| "true".to_string())),
                    ("eval_max_length", max_length.map(|n| n.to_string())),
                ],
            )?;
            let g = read_treebank(&gold, true)?;
            let p = read_treebank(&predicted, true)?;
            let result = eval::score_corpus(&g, &p, &s.eval_config()?)?;
            print!("{}", result.report());
            if let Some(path) = csv {
                write_text(&path, &result.to_csv())?;
            }
            Ok(())
        }
        Command::Experiment { common, output, runs } => {
            match &common.config {
                Some(path) => require_file(path, "experiment config")?,
                None => return Err(Error::Usage("experiment requires --config FILE".into())),
            }
            let s = settings(&common, "experiment", &[])?;
            let results = experiment::run_grid(&s)?;
            let summary = experiment::summarize(&results);
            let csv = experiment::summary_csv(&summary);
            write_text(&output, &csv)?;
            if let Some(r) = runs {
                write_text(&r, &experiment::runs_csv(&results))?;
            }
            print!("{csv}");
            Ok(())
        }
    }
}
