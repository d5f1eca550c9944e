//! Comment-level hostility posteriors from a double cross-validated inner
//! classifier, and the trend features summarizing them.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::embed::EmbeddingTable;
use crate::linmodel::{train_rows, TrainConfig};
use crate::textfeat::{
    build_vocab, bow, embed_aggregate, lexicon_features, FeatureResources, Group, Layout,
    Lexicons, TokenCache, Vocabulary,
};
use crate::util::rng;
use crate::{Error, Result};

pub const TREND_FEATURE_NAMES: [&str; 4] = ["count_above", "frac_above", "max_slope", "range"];

/// (count above threshold, fraction above threshold, largest increase
/// between adjacent posteriors, max - min). One posterior has slope 0.
pub fn trend_features(ps: &[f64], threshold: f64) -> Result<[f64; 4]> {
    if ps.is_empty() {
        return Err(Error::InsufficientData("trend features need at least one posterior".into()));
    }
    let above = ps.iter().filter(|&&p| p > threshold).count() as f64;
    let slope = ps.windows(2).map(|w| w[1] - w[0]).fold(None, |m: Option<f64>, s| {
        Some(m.map_or(s, |m| m.max(s)))
    });
    let max = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ps.iter().copied().fold(f64::INFINITY, f64::min);
    Ok([above, above / ps.len() as f64, slope.unwrap_or(0.0), max - min])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrendConfig {
    pub inner_folds: usize,
    pub threshold: f64,
    /// Training comments drawn per post; longer threads are subsampled.
    pub max_train_comments: usize,
    pub min_count: usize,
    pub train: TrainConfig,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig {
            inner_folds: 5,
            threshold: 0.3,
            max_train_comments: 20,
            min_count: 2,
            train: TrainConfig { tol: 1e-3, max_iter: 300, ..TrainConfig::default() },
        }
    }
}

/// Identifies one comment classifier: the outer model of a fold, or one of
/// the inner models nested in that fold's training partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModelId {
    pub outer: usize,
    pub inner: Option<usize>,
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.inner {
            None => write!(f, "{}", self.outer),
            Some(i) => write!(f, "{}.{}", self.outer, i),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSeries {
    pub post_id: String,
    pub posteriors: Vec<f64>,
    /// Model that produced every posterior of this post.
    pub model: ModelId,
}

/// Posteriors as seen from one outer fold: test posts scored by the outer
/// model, training posts by the inner model whose held-out part they are in.
#[derive(Debug, Clone, Default)]
pub struct FoldPosteriors {
    pub outer: usize,
    pub series: HashMap<String, PosteriorSeries>,
}

impl FoldPosteriors {
    pub fn posterior_map(&self) -> HashMap<String, Vec<f64>> {
        self.series.iter().map(|(k, v)| (k.clone(), v.posteriors.clone())).collect()
    }

    /// `post_id,comment_idx,posterior,fold_id` rows, sorted by post.
    pub fn dump_csv(&self) -> String {
        let mut s = String::from("post_id,comment_idx,posterior,fold_id\n");
        let mut keys: Vec<&String> = self.series.keys().collect();
        keys.sort();
        for k in keys {
            let ps = &self.series[k];
            for (j, p) in ps.posteriors.iter().enumerate() {
                let _ = writeln!(s, "{},{},{},{}", k, j, p, ps.model);
            }
        }
        s
    }
}

/// Result of a double cross-validation pass, with enough provenance to
/// audit that no post was scored by a model trained on it.
#[derive(Debug, Clone, Default)]
pub struct DoubleCv {
    pub folds: Vec<FoldPosteriors>,
    pub training_posts: BTreeMap<ModelId, BTreeSet<String>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageAudit {
    pub checked: usize,
    pub violations: usize,
}

impl LeakageAudit {
    pub fn merge(&mut self, other: LeakageAudit) {
        self.checked += other.checked;
        self.violations += other.violations;
    }

    pub fn clean(&self) -> bool {
        self.violations == 0
    }
}

impl DoubleCv {
    /// Checks every scored comment against its model's training set.
    pub fn audit(&self) -> LeakageAudit {
        let mut a = LeakageAudit::default();
        for f in &self.folds {
            for s in f.series.values() {
                let leak = self.training_posts.get(&s.model).is_none_or(|t| t.contains(&s.post_id));
                a.checked += s.posteriors.len();
                if leak {
                    a.violations += s.posteriors.len();
                }
            }
        }
        a
    }

    /// Posteriors of the given fold's test posts, as scored by outer models.
    pub fn outer_scores(&self) -> Vec<(&str, &[f64])> {
        let mut v: Vec<(&str, &[f64])> = self
            .folds
            .iter()
            .flat_map(|f| f.series.values())
            .filter(|s| s.model.inner.is_none())
            .map(|s| (s.post_id.as_str(), s.posteriors.as_slice()))
            .collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }
}

/// Fold-independent dense block (subword embedding aggregate + lexicon
/// counts) of every comment of the selected posts.
#[derive(Debug, Clone)]
pub struct CommentDense {
    width: usize,
    rows: HashMap<usize, Vec<f64>>,
}

impl CommentDense {
    pub fn new(
        tokens: &TokenCache,
        posts: impl IntoIterator<Item = usize>,
        subword: &EmbeddingTable,
        lex: &Lexicons,
    ) -> Self {
        let width = 2 * subword.dim() + crate::textfeat::LEXICON_FEATURES;
        let mut rows = HashMap::new();
        for p in posts {
            rows.entry(p).or_insert_with(|| {
                let mut flat = Vec::new();
                for t in tokens.post(p) {
                    flat.extend(embed_aggregate(t, subword));
                    flat.extend(lexicon_features(t, lex));
                }
                flat
            });
        }
        CommentDense { width, rows }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, post: usize, comment: usize) -> Option<&[f64]> {
        self.rows.get(&post).map(|r| &r[comment * self.width..(comment + 1) * self.width])
    }
}

struct CommentRows<'a> {
    tokens: &'a TokenCache,
    dense: &'a CommentDense,
    vocab: &'a Vocabulary,
}

impl CommentRows<'_> {
    fn row(&self, post: usize, comment: usize) -> Result<Vec<(u32, f64)>> {
        let mut r = bow(self.tokens.comment(post, comment), self.vocab);
        let off = self.vocab.len() as u32;
        let d = self
            .dense
            .get(post, comment)
            .ok_or_else(|| Error::MissingResource(format!("dense features for post index {post}")))?;
        r.extend(d.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(j, &x)| (off + j as u32, x)));
        Ok(r)
    }
}

/// Inputs for double cross-validation over a set of posts.
pub struct DoubleCvInput<'a> {
    pub corpus: &'a Corpus,
    pub tokens: &'a TokenCache,
    pub dense: &'a CommentDense,
    pub lexicons: &'a Lexicons,
    pub subword: &'a EmbeddingTable,
    /// Corpus indices of the participating posts.
    pub posts: &'a [usize],
    /// Outer fold of each entry of `posts`.
    pub fold_of: &'a [usize],
    pub n_folds: usize,
}

/// For each outer fold: trains one comment classifier on the fold's
/// training posts to score its test posts, and `inner_folds` classifiers
/// over a partition of the training posts so each training post is scored
/// by a model that never saw it.
pub fn score_comments_double_cv(
    input: &DoubleCvInput,
    cfg: &TrendConfig,
    seed: u64,
) -> Result<DoubleCv> {
    if input.posts.len() != input.fold_of.len() {
        return Err(Error::DimensionMismatch { expected: input.posts.len(), got: input.fold_of.len() });
    }
    if cfg.inner_folds < 2 {
        return Err(Error::InvalidConfig("trend needs at least 2 inner folds".into()));
    }
    let corpus = input.corpus;
    let mut out = DoubleCv::default();
    for outer in 0..input.n_folds {
        let test: Vec<usize> =
            (0..input.posts.len()).filter(|&i| input.fold_of[i] == outer).map(|i| input.posts[i]).collect();
        if test.is_empty() {
            continue;
        }
        let mut train: Vec<usize> =
            (0..input.posts.len()).filter(|&i| input.fold_of[i] != outer).map(|i| input.posts[i]).collect();
        train.sort_unstable();

        let vocab = Arc::new(build_vocab(
            train.iter().flat_map(|&p| input.tokens.post(p).iter().map(|t| t.as_slice())),
            cfg.min_count,
        ));
        let mut res = FeatureResources::new(vocab.clone(), input.lexicons);
        res.subword_table = Some(input.subword);
        let layout = Layout::new(&[Group::FinalCom], &res)?;
        let rows = CommentRows { tokens: input.tokens, dense: input.dense, vocab: &vocab };
        let mut fold = FoldPosteriors { outer, series: HashMap::new() };

        let mut fit_and_score = |id: ModelId, fit_posts: &[usize], score_posts: &[usize]| -> Result<()> {
            let mut data = Vec::new();
            let mut y = Vec::new();
            for &p in fit_posts {
                let n = corpus.post(p).comments.len();
                let picked: Vec<usize> = if n <= cfg.max_train_comments {
                    (0..n).collect()
                } else {
                    let mut r = rng(seed, 1_000 + p as u64);
                    let mut v = index::sample(&mut r, n, cfg.max_train_comments).into_vec();
                    v.sort_unstable();
                    v
                };
                for j in picked {
                    data.push(rows.row(p, j)?);
                    y.push(corpus.post(p).comments[j].hostile);
                }
            }
            let refs: Vec<&[(u32, f64)]> = data.iter().map(|r| r.as_slice()).collect();
            let model = train_rows(
                &refs,
                &y,
                &layout.dense_mask(),
                layout.feature_names(),
                layout.fingerprint(),
                &cfg.train,
            )
            .map_err(|e| match e {
                Error::SingleClass(_) => {
                    Error::SingleClass(format!("comment classifier {id} has a single class"))
                }
                e => e,
            })?;
            let sc = model.scorer();
            for &p in score_posts {
                let post = corpus.post(p);
                let posteriors = (0..post.comments.len())
                    .map(|j| rows.row(p, j).map(|r| sc.proba(&r)))
                    .collect::<Result<Vec<_>>>()?;
                fold.series.insert(
                    post.id.clone(),
                    PosteriorSeries { post_id: post.id.clone(), posteriors, model: id },
                );
            }
            out.training_posts
                .insert(id, fit_posts.iter().map(|&p| corpus.post(p).id.clone()).collect());
            Ok(())
        };

        fit_and_score(ModelId { outer, inner: None }, &train, &test)?;

        let mut shuffled = train.clone();
        shuffled.shuffle(&mut rng(seed, 200 + outer as u64));
        let inner_of: HashMap<usize, usize> =
            shuffled.iter().enumerate().map(|(i, &p)| (p, i % cfg.inner_folds)).collect();
        for inner in 0..cfg.inner_folds {
            let held: Vec<usize> = train.iter().copied().filter(|p| inner_of[p] == inner).collect();
            let fit: Vec<usize> = train.iter().copied().filter(|p| inner_of[p] != inner).collect();
            if held.is_empty() {
                continue;
            }
            fit_and_score(ModelId { outer, inner: Some(inner) }, &fit, &held)?;
        }
        out.folds.push(fold);
    }
    Ok(out)
}
