//! Run configuration: a JSON file merged with command-line overrides.
//!
//! Precedence: built-in defaults, then the `--config` file, then flags.
//! The top-level `seed` is copied into every seeded component.

use std::fs;
use std::path::{Path, PathBuf};

use hostility_core::corpus::SynthConfig;
use hostility_core::embed::SgnsConfig;
use hostility_core::experiment::{ExperimentConfig, FeatureSet, TaskKind};
use hostility_core::ksc::KscConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// JSONL corpus; a synthetic corpus is generated from `synth` when absent.
    pub corpus: Option<PathBuf>,
    /// Directory with `hate_*.txt` and `profane.txt`; built-in lists when absent.
    pub lexicon_dir: Option<PathBuf>,
    /// Directory with `word.vec` and `subword.vec`; trained on the corpus when absent.
    pub embeddings_dir: Option<PathBuf>,
    pub synth: SynthConfig,
    pub sgns: SgnsConfig,
    pub experiment: ExperimentConfig,
    pub ksc: KscConfig,
    pub lead_hours: Vec<f64>,
    pub n_thresholds: Vec<usize>,
    /// Feature sets such as `best`, `U+prev-post` or `all`.
    pub features: Vec<String>,
    /// Shuffle labels before cross-validation (null check).
    pub permute_labels: bool,
    /// Task used by `inspect`.
    pub task: TaskKind,
    pub top_k: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let synth = SynthConfig::default();
        RunConfig {
            seed: synth.seed,
            corpus: None,
            lexicon_dir: None,
            embeddings_dir: None,
            synth,
            sgns: SgnsConfig::default(),
            experiment: ExperimentConfig::default(),
            ksc: KscConfig::default(),
            lead_hours: vec![1.0, 3.0, 5.0, 8.0, 10.0],
            n_thresholds: (5..=15).collect(),
            features: vec!["best".into()],
            permute_labels: false,
            task: TaskKind::Presence,
            top_k: 20,
        }
    }
}

/// Flag values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub corpus: Option<PathBuf>,
    pub lexicon_dir: Option<PathBuf>,
    pub embeddings_dir: Option<PathBuf>,
    pub lead_hours: Option<Vec<f64>>,
    pub n_thresholds: Option<Vec<usize>>,
    pub features: Option<Vec<String>>,
    pub folds: Option<usize>,
    pub lambda: Option<f64>,
    pub lambda_search: bool,
    pub k: Option<usize>,
    pub max_shift: Option<usize>,
    pub n_posts: Option<usize>,
    pub permute_labels: bool,
    pub task: Option<TaskKind>,
    pub top_k: Option<usize>,
}

impl RunConfig {
    /// Loads a config file. A manifest written by a previous run is accepted
    /// too, in which case its recorded config is used.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        let value = match value.get("manifest_version") {
            Some(_) => value.get("config").cloned().unwrap_or_default(),
            None => value,
        };
        serde_json::from_value(value).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if o.corpus.is_some() {
            self.corpus = o.corpus;
        }
        if o.lexicon_dir.is_some() {
            self.lexicon_dir = o.lexicon_dir;
        }
        if o.embeddings_dir.is_some() {
            self.embeddings_dir = o.embeddings_dir;
        }
        if let Some(v) = o.lead_hours {
            self.lead_hours = v;
        }
        if let Some(v) = o.n_thresholds {
            self.n_thresholds = v;
        }
        if let Some(v) = o.features {
            self.features = v;
        }
        if let Some(v) = o.folds {
            self.experiment.folds = v;
        }
        if let Some(v) = o.lambda {
            self.experiment.train.lambda = v;
        }
        if o.lambda_search {
            self.experiment.train = self.experiment.train.clone().with_search();
        }
        if let Some(v) = o.k {
            self.ksc.k = v;
        }
        if let Some(v) = o.max_shift {
            self.ksc.max_shift = v;
        }
        if let Some(v) = o.n_posts {
            self.synth.n_posts = v;
        }
        self.permute_labels |= o.permute_labels;
        if let Some(v) = o.task {
            self.task = v;
        }
        if let Some(v) = o.top_k {
            self.top_k = v;
        }
        self.synth.seed = self.seed;
        self.sgns.seed = self.seed;
        self.experiment.seed = self.seed;
        self.ksc.seed = self.seed;
    }

    pub fn feature_sets(&self, task: TaskKind) -> Result<Vec<FeatureSet>, CliError> {
        if self.features.is_empty() {
            return Err(CliError::Config("no feature sets given".into()));
        }
        let sets = self
            .features
            .iter()
            .map(|s| FeatureSet::parse_for(s, task))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(sets)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.experiment.validate()?;
        if self.lead_hours.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(CliError::Config("lead hours must be positive".into()));
        }
        if self.n_thresholds.iter().any(|&n| n < 2) {
            return Err(CliError::Config("N thresholds must be at least 2".into()));
        }
        if self.ksc.k == 0 {
            return Err(CliError::Config("K must be at least 1".into()));
        }
        Ok(())
    }
}
