//! `hostility`: reproducible runs of corpus generation, statistics,
//! embedding training, clustering and the two forecasting tasks.

mod commands;
mod config;
mod error;
mod rundir;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hostility_core::experiment::TaskKind;

use crate::config::{Overrides, RunConfig};
use crate::error::CliError;
use crate::rundir::RunDir;

#[derive(Parser)]
#[command(name = "hostility", version, about = "Forecast hostile comments in comment threads")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic corpus.
    Synth(Common),
    /// Rank-count statistics of a corpus.
    Stats(Common),
    /// Train word and subword embeddings on a corpus.
    Embed(Common),
    /// K-SC clustering of hourly hostility series.
    Cluster(Common),
    /// Presence forecasting at one or more lead times.
    Task1(Common),
    /// Intensity forecasting at one or more thresholds N.
    Task2(Common),
    /// Both tasks over their full parameter ranges.
    Sweep(Common),
    /// Fit one model on a full dataset and list its largest coefficients.
    Inspect(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Task1,
    Task2,
}

#[derive(Args)]
struct Common {
    /// JSON config file (or a manifest of an earlier run); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory [default: $HOSTILITY_OUT_ROOT/<command>-<config digest>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSONL corpus; a synthetic corpus is generated when omitted.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Directory with hate_<category>.txt and profane.txt word lists.
    #[arg(long)]
    lexicons: Option<PathBuf>,
    /// Directory with word.vec and subword.vec from `hostility embed`.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Comma-separated lead times in hours.
    #[arg(long, value_delimiter = ',')]
    lead_hours: Option<Vec<f64>>,
    /// Comma-separated intensity thresholds.
    #[arg(long, value_delimiter = ',')]
    n_threshold: Option<Vec<usize>>,
    /// Comma-separated feature sets; groups inside a set are joined by '+'.
    #[arg(long, value_delimiter = ',')]
    features: Option<Vec<String>>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Choose lambda by inner cross-validation.
    #[arg(long)]
    lambda_search: bool,
    /// Number of clusters.
    #[arg(long)]
    k: Option<usize>,
    /// Largest shift in hours tried when aligning series.
    #[arg(long)]
    max_shift: Option<usize>,
    /// Number of posts in a generated corpus.
    #[arg(long)]
    posts: Option<usize>,
    /// Shuffle labels before cross-validation.
    #[arg(long)]
    permute_labels: bool,
    /// Task for `inspect`.
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
    /// Coefficients listed per sign by `inspect`.
    #[arg(long)]
    top: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(Overrides {
            seed: self.seed,
            corpus: self.corpus.clone(),
            lexicon_dir: self.lexicons.clone(),
            embeddings_dir: self.embeddings.clone(),
            lead_hours: self.lead_hours.clone(),
            n_thresholds: self.n_threshold.clone(),
            features: self.features.clone(),
            folds: self.folds,
            lambda: self.lambda,
            lambda_search: self.lambda_search,
            k: self.k,
            max_shift: self.max_shift,
            n_posts: self.posts,
            permute_labels: self.permute_labels,
            task: self.task.map(|t| match t {
                TaskArg::Task1 => TaskKind::Presence,
                TaskArg::Task2 => TaskKind::Intensity,
            }),
            top_k: self.top,
        });
        cfg.validate()?;
        for p in [&cfg.corpus, &cfg.lexicon_dir, &cfg.embeddings_dir].into_iter().flatten() {
            if !p.exists() {
                return Err(CliError::Config(format!("{} does not exist", p.display())));
            }
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<PathBuf, CliError> {
    let (name, common) = match &cli.command {
        Command::Synth(c) => ("synth", c),
        Command::Stats(c) => ("stats", c),
        Command::Embed(c) => ("embed", c),
        Command::Cluster(c) => ("cluster", c),
        Command::Task1(c) => ("task1", c),
        Command::Task2(c) => ("task2", c),
        Command::Sweep(c) => ("sweep", c),
        Command::Inspect(c) => ("inspect", c),
    };
    let cfg = common.resolve()?;
    let out = match &common.out {
        Some(p) => p.clone(),
        None => rundir::default_out(name, &cfg)?,
    };
    let mut dir = RunDir::create(out)?;
    match cli.command {
        Command::Synth(_) => commands::synth(&cfg, &mut dir)?,
        Command::Stats(_) => commands::stats(&cfg, &mut dir)?,
        Command::Embed(_) => commands::embed(&cfg, &mut dir)?,
        Command::Cluster(_) => commands::cluster(&cfg, &mut dir)?,
        Command::Task1(_) => commands::tasks(&cfg, &mut dir, &[TaskKind::Presence])?,
        Command::Task2(_) => commands::tasks(&cfg, &mut dir, &[TaskKind::Intensity])?,
        Command::Sweep(_) => commands::tasks(&cfg, &mut dir, &[TaskKind::Presence, TaskKind::Intensity])?,
        Command::Inspect(_) => commands::inspect(&cfg, &mut dir)?,
    }
    dir.finish(name, &cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("error: {}", msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
