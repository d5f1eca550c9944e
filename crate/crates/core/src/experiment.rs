//! Task datasets, cross-validated ablations, parameter sweeps and reports.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SECONDS_PER_HOUR};
use crate::embed::{train_sgns, train_subword_sgns, EmbeddingTable, SgnsConfig};
use crate::eval::{auc, make_folds, match_negatives, prf1, FoldPlan, Prf1};
use crate::linmodel::{train, LinearModel, TrainConfig};
use crate::textfeat::{
    assemble_blocks, build_vocab, FeatureResources, FeatureVector, Group, GroupBlock,
    InstanceText, Layout, Lexicons, TokenCache,
};
use crate::trend::{
    score_comments_double_cv, trend_features, CommentDense, DoubleCv, DoubleCvInput,
    LeakageAudit, TrendConfig,
};
use crate::util::{mean, rng, std_error};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskKind {
    /// Will a thread with no hostility so far receive a hostile comment?
    #[serde(rename = "task1")]
    Presence,
    /// Will a thread that just turned hostile reach `N` hostile comments?
    #[serde(rename = "task2")]
    Intensity,
}

impl TaskKind {
    pub fn tag(self) -> &'static str {
        match self {
            TaskKind::Presence => "task1",
            TaskKind::Intensity => "task2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    /// Corpus index of the post.
    pub post: usize,
    pub post_id: String,
    /// Number of observed comments.
    pub k: usize,
    pub label: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskDataset {
    pub task: TaskKind,
    /// Lead time in hours (presence) or threshold N (intensity).
    pub param: f64,
    pub instances: Vec<TaskInstance>,
    /// Positive post id -> matched negative post id.
    pub pairs: Vec<(String, String)>,
}

impl TaskDataset {
    pub fn class_counts(&self) -> (usize, usize) {
        let p = self.instances.iter().filter(|i| i.label).count();
        (p, self.instances.len() - p)
    }

    /// Histogram of observed-comment counts for one class.
    pub fn k_histogram(&self, label: bool) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for i in self.instances.iter().filter(|i| i.label == label) {
            *h.entry(i.k).or_insert(0) += 1;
        }
        h
    }

    /// Same instances with labels shuffled.
    pub fn permuted(&self, seed: u64) -> TaskDataset {
        let mut labels: Vec<bool> = self.instances.iter().map(|i| i.label).collect();
        labels.shuffle(&mut rng(seed, 91));
        let mut d = self.clone();
        for (inst, l) in d.instances.iter_mut().zip(labels) {
            inst.label = l;
        }
        d
    }
}

/// Presence dataset: each hostile post observed through the comments made
/// at least `lead_hours` before its first hostile comment (posts with none
/// are discarded), each paired with a non-hostile post truncated to the
/// same number of comments.
pub fn build_task1(corpus: &Corpus, lead_hours: f64, seed: u64) -> Result<TaskDataset> {
    if !(lead_hours.is_finite() && lead_hours > 0.0) {
        return Err(Error::InvalidConfig(format!("lead time must be positive, got {lead_hours}")));
    }
    let mut positives = Vec::new();
    let mut pool = Vec::new();
    for p in corpus.posts() {
        match p.first_hostile() {
            Some(f) => {
                let cutoff = p.comments[f].t - lead_hours * SECONDS_PER_HOUR;
                let k = p.comments.iter().take_while(|c| c.t <= cutoff).count();
                if k > 0 {
                    positives.push((p.id.clone(), k));
                }
            }
            None if !p.comments.is_empty() => pool.push((p.id.clone(), p.comments.len())),
            None => {}
        }
    }
    if positives.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no hostile posts with comments at least {lead_hours} h before the first hostile comment"
        )));
    }
    if pool.is_empty() {
        return Err(Error::InsufficientData("no non-hostile posts to sample negatives from".into()));
    }
    let pairs = match_negatives(&positives, &pool, seed)?;
    if pairs.is_empty() {
        return Err(Error::InsufficientData("no positive could be matched to a negative".into()));
    }
    let idx = |id: &str| corpus.index_of(id).expect("post id from corpus");
    let mut instances = Vec::with_capacity(2 * pairs.len());
    for pr in &pairs {
        instances.push(TaskInstance { post: idx(&pr.positive), post_id: pr.positive.clone(), k: pr.k, label: true });
        instances.push(TaskInstance { post: idx(&pr.negative), post_id: pr.negative.clone(), k: pr.k, label: false });
    }
    instances.sort_by_key(|i| i.post);
    Ok(TaskDataset {
        task: TaskKind::Presence,
        param: lead_hours,
        instances,
        pairs: pairs.into_iter().map(|p| (p.positive, p.negative)).collect(),
    })
}

/// Intensity dataset: hostile posts observed through their first hostile
/// comment; positive with at least `n` hostile comments in total, negative
/// with exactly one, others excluded.
pub fn build_task2(corpus: &Corpus, n: usize) -> Result<TaskDataset> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("threshold N must be at least 2, got {n}")));
    }
    let mut instances = Vec::new();
    for (i, p) in corpus.posts().iter().enumerate() {
        let Some(f) = p.first_hostile() else { continue };
        let total = p.hostile_count();
        let label = if total >= n {
            true
        } else if total == 1 {
            false
        } else {
            continue;
        };
        instances.push(TaskInstance { post: i, post_id: p.id.clone(), k: f + 1, label });
    }
    let d = TaskDataset { task: TaskKind::Intensity, param: n as f64, instances, pairs: Vec::new() };
    let (pos, neg) = d.class_counts();
    if pos == 0 {
        return Err(Error::InsufficientData(format!("no posts with at least {n} hostile comments")));
    }
    if neg == 0 {
        return Err(Error::InsufficientData("no posts with exactly one hostile comment".into()));
    }
    Ok(d)
}

/// A named combination of feature groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSet {
    pub name: String,
    pub groups: Vec<Group>,
}

impl FeatureSet {
    pub fn new(groups: &[Group]) -> Result<Self> {
        let mut g = groups.to_vec();
        g.sort();
        g.dedup();
        if g.is_empty() {
            return Err(Error::InvalidConfig("empty feature set".into()));
        }
        let name = g.iter().map(|g| g.name()).collect::<Vec<_>>().join("+");
        Ok(FeatureSet { name, groups: g })
    }

    pub fn named(name: &str, groups: &[Group]) -> Result<Self> {
        let mut s = Self::new(groups)?;
        s.name = name.to_string();
        Ok(s)
    }

    /// Every group except w2v and prev-com.
    pub fn best_task1() -> Self {
        let g: Vec<Group> =
            Group::ALL.iter().copied().filter(|g| !matches!(g, Group::W2v | Group::PrevCom)).collect();
        Self::named("best", &g).expect("non-empty")
    }

    pub fn best_task2() -> Self {
        Self::named("best", &[Group::Trend, Group::User, Group::FinalCom]).expect("non-empty")
    }

    pub fn all() -> Self {
        Self::named("all", &Group::ALL).expect("non-empty")
    }

    pub fn uses(&self, g: Group) -> bool {
        self.groups.contains(&g)
    }

    /// Parses `best`, `all` or groups joined by `+`, for the given task.
    pub fn parse_for(s: &str, task: TaskKind) -> Result<Self> {
        match s.trim() {
            "best" => Ok(match task {
                TaskKind::Presence => Self::best_task1(),
                TaskKind::Intensity => Self::best_task2(),
            }),
            other => other.parse(),
        }
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "all" {
            return Ok(Self::all());
        }
        let groups = s.split('+').map(str::parse).collect::<Result<Vec<Group>>>()?;
        Self::new(&groups)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub folds: usize,
    pub seed: u64,
    pub min_count: usize,
    pub threshold: f64,
    pub train: TrainConfig,
    pub trend: TrendConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            folds: 10,
            seed: 1,
            min_count: 2,
            threshold: 0.5,
            train: TrainConfig::default(),
            trend: TrendConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".into()));
        }
        if self.trend.inner_folds < 2 {
            return Err(Error::InvalidConfig("trend inner folds must be at least 2".into()));
        }
        self.train.validate()?;
        self.trend.train.validate()
    }
}

/// Corpus-level inputs shared across datasets: tokens, lexicons, embedding
/// tables and cached per-comment dense features.
pub struct Context<'a> {
    pub corpus: &'a Corpus,
    pub tokens: TokenCache,
    pub lexicons: &'a Lexicons,
    pub word_table: Option<&'a EmbeddingTable>,
    pub subword_table: Option<&'a EmbeddingTable>,
    comment_dense: Option<CommentDense>,
}

impl<'a> Context<'a> {
    pub fn new(
        corpus: &'a Corpus,
        lexicons: &'a Lexicons,
        word_table: Option<&'a EmbeddingTable>,
        subword_table: Option<&'a EmbeddingTable>,
    ) -> Self {
        let tokens = TokenCache::new(corpus);
        Context { corpus, tokens, lexicons, word_table, subword_table, comment_dense: None }
    }

    fn comment_dense(&mut self) -> Result<&CommentDense> {
        if self.comment_dense.is_none() {
            let sub = self
                .subword_table
                .ok_or_else(|| Error::MissingResource("subword embedding table".into()))?;
            self.comment_dense =
                Some(CommentDense::new(&self.tokens, 0..self.corpus.len(), sub, self.lexicons));
        }
        Ok(self.comment_dense.as_ref().expect("just built"))
    }
}

/// Trains the word and subword tables used by the embedding groups on all
/// comment text of the corpus. Training is unsupervised.
pub fn train_embeddings(
    corpus: &Corpus,
    tokens: &TokenCache,
    cfg: &SgnsConfig,
) -> Result<(EmbeddingTable, EmbeddingTable)> {
    let sentences: Vec<Vec<String>> =
        (0..corpus.len()).flat_map(|p| tokens.post(p).iter().cloned()).filter(|s| !s.is_empty()).collect();
    let (w, _) = train_sgns(&sentences, cfg)?;
    let (s, _) = train_subword_sgns(&sentences, cfg)?;
    Ok((w, s))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub n_test: usize,
    pub auc: f64,
    pub prf: Prf1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub task: TaskKind,
    pub feature_set: String,
    pub param: f64,
    pub n_instances: usize,
    pub folds: Vec<FoldMetrics>,
    pub auc: f64,
    pub auc_se: f64,
    pub f1: f64,
    pub f1_se: f64,
    pub precision: f64,
    pub precision_se: f64,
    pub recall: f64,
    pub recall_se: f64,
}

impl ReportRow {
    fn from_folds(task: TaskKind, feature_set: &str, param: f64, n: usize, folds: Vec<FoldMetrics>) -> Self {
        let col = |f: &dyn Fn(&FoldMetrics) -> f64| -> Vec<f64> { folds.iter().map(f).collect() };
        let a = col(&|m| m.auc);
        let f1 = col(&|m| m.prf.f1);
        let p = col(&|m| m.prf.precision);
        let r = col(&|m| m.prf.recall);
        ReportRow {
            task,
            feature_set: feature_set.to_string(),
            param,
            n_instances: n,
            auc: mean(&a),
            auc_se: std_error(&a),
            f1: mean(&f1),
            f1_se: std_error(&f1),
            precision: mean(&p),
            precision_se: std_error(&p),
            recall: mean(&r),
            recall_se: std_error(&r),
            folds,
        }
    }
}

/// An out-of-fold prediction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OofScore {
    pub feature_set: String,
    pub param: f64,
    pub post_id: String,
    pub k: usize,
    pub label: bool,
    pub score: f64,
    pub fold: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub oof: Vec<OofScore>,
    /// Comment- and instance-level checks that no prediction came from a
    /// model trained on the same post.
    pub audit: LeakageAudit,
}

impl Report {
    pub fn merge(&mut self, other: Report) {
        self.rows.extend(other.rows);
        self.oof.extend(other.oof);
        self.audit.merge(other.audit);
    }

    pub fn row(&self, feature_set: &str, param: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.feature_set == feature_set && r.param == param)
    }

    /// `task,feature_set,param,fold,auc,f1,precision,recall`.
    pub fn folds_csv(&self) -> String {
        let mut s = String::from("task,feature_set,param,fold,auc,f1,precision,recall\n");
        for r in &self.rows {
            for f in &r.folds {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{}",
                    r.task.tag(),
                    r.feature_set,
                    r.param,
                    f.fold,
                    f.auc,
                    f.prf.f1,
                    f.prf.precision,
                    f.prf.recall
                );
            }
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from(
            "task,feature_set,param,n_instances,n_folds,auc,auc_se,f1,f1_se,precision,precision_se,recall,recall_se\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.task.tag(),
                r.feature_set,
                r.param,
                r.n_instances,
                r.folds.len(),
                r.auc,
                r.auc_se,
                r.f1,
                r.f1_se,
                r.precision,
                r.precision_se,
                r.recall,
                r.recall_se
            );
        }
        s
    }

    /// AUC against the swept parameter, one line per (feature set, param).
    pub fn series_csv(&self) -> String {
        let mut s = String::from("feature_set,param,auc,auc_se\n");
        let mut rows: Vec<&ReportRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| a.feature_set.cmp(&b.feature_set).then(a.param.total_cmp(&b.param)));
        for r in rows {
            let _ = writeln!(s, "{},{},{},{}", r.feature_set, r.param, r.auc, r.auc_se);
        }
        s
    }

    pub fn oof_csv(&self) -> String {
        let mut s = String::from("feature_set,param,post_id,k,label,fold,score\n");
        for o in &self.oof {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                o.feature_set, o.param, o.post_id, o.k, o.label as u8, o.fold, o.score
            );
        }
        s
    }
}

/// One experiment run: feature sets evaluated over a dataset's folds.
#[derive(Debug, Clone)]
pub struct AblationRun {
    pub report: Report,
    pub plan: FoldPlan,
    pub trend: Option<DoubleCv>,
}

fn fold_plan(ds: &TaskDataset, cfg: &ExperimentConfig) -> Result<FoldPlan> {
    let items: Vec<(String, bool)> = ds.instances.iter().map(|i| (i.post_id.clone(), i.label)).collect();
    make_folds(&items, &ds.pairs, cfg.folds, cfg.seed)
}

/// Builds the per-fold feature vectors of a dataset. Separated from model
/// fitting so tests can compare against direct assembly.
struct Featurizer<'c, 'a> {
    ctx: &'c Context<'a>,
    texts: Vec<InstanceText>,
    dense: HashMap<(usize, Group), Vec<f64>>,
}

impl<'c, 'a> Featurizer<'c, 'a> {
    fn new(ctx: &'c Context<'a>, ds: &TaskDataset) -> Result<Self> {
        let texts = ds
            .instances
            .iter()
            .map(|i| InstanceText::new(ctx.corpus, i.post, i.k, Some(&ctx.tokens)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Featurizer { ctx, texts, dense: HashMap::new() })
    }

    fn resources(&self, vocab: Arc<crate::textfeat::Vocabulary>) -> FeatureResources<'a> {
        let mut res = FeatureResources::new(vocab, self.ctx.lexicons);
        res.word_table = self.ctx.word_table;
        res.subword_table = self.ctx.subword_table;
        res
    }

    /// Fold-independent dense blocks, computed once per (instance, group).
    fn prepare(&mut self, groups: &[Group], res: &FeatureResources) -> Result<()> {
        for (i, t) in self.texts.iter().enumerate() {
            for &g in groups {
                if g == Group::Trend || self.dense.contains_key(&(i, g)) {
                    continue;
                }
                self.dense.insert((i, g), t.dense_part(g, res)?);
            }
        }
        Ok(())
    }

    fn vector(
        &self,
        i: usize,
        layout: &Arc<Layout>,
        res: &FeatureResources,
        posteriors: Option<&HashMap<String, Vec<f64>>>,
    ) -> Result<FeatureVector> {
        let t = &self.texts[i];
        let blocks = layout
            .spans()
            .iter()
            .map(|s| {
                let dense = if s.group == Group::Trend {
                    let ps = posteriors
                        .and_then(|m| m.get(&t.post_id))
                        .ok_or_else(|| Error::MissingResource(format!("posteriors for {}", t.post_id)))?;
                    trend_features(&ps[..t.k], res.trend_threshold)?.to_vec()
                } else {
                    self.dense[&(i, s.group)].clone()
                };
                Ok(GroupBlock { sparse: t.sparse_part(s.group, &res.vocab), dense })
            })
            .collect::<Result<Vec<_>>>()?;
        assemble_blocks(layout, &blocks)
    }
}

/// Cross-validates every feature set on one dataset. Vocabulary,
/// standardization and trend posteriors are fit on each training partition.
pub fn run_ablation(
    ctx: &mut Context,
    ds: &TaskDataset,
    sets: &[FeatureSet],
    cfg: &ExperimentConfig,
) -> Result<AblationRun> {
    cfg.validate()?;
    if sets.is_empty() {
        return Err(Error::InvalidConfig("no feature sets".into()));
    }
    let plan = fold_plan(ds, cfg)?;
    let fold_of: Vec<usize> = ds.instances.iter().map(|i| plan.fold_of[&i.post_id]).collect();
    let needs_trend = sets.iter().any(|s| s.uses(Group::Trend));

    let mut report = Report::default();
    let trend = if needs_trend {
        let posts: Vec<usize> = ds.instances.iter().map(|i| i.post).collect();
        ctx.comment_dense()?;
        let sub = ctx.subword_table.expect("checked by comment_dense");
        let input = DoubleCvInput {
            corpus: ctx.corpus,
            tokens: &ctx.tokens,
            dense: ctx.comment_dense.as_ref().expect("built"),
            lexicons: ctx.lexicons,
            subword: sub,
            posts: &posts,
            fold_of: &fold_of,
            n_folds: cfg.folds,
        };
        let dcv = score_comments_double_cv(&input, &cfg.trend, cfg.seed)?;
        report.audit.merge(dcv.audit());
        Some(dcv)
    } else {
        None
    };
    let fold_posteriors: HashMap<usize, HashMap<String, Vec<f64>>> = trend
        .as_ref()
        .map(|d| d.folds.iter().map(|f| (f.outer, f.posterior_map())).collect())
        .unwrap_or_default();

    let mut feat = Featurizer::new(ctx, ds)?;
    let mut per_set: Vec<Vec<FoldMetrics>> = vec![Vec::new(); sets.len()];
    for fold in 0..cfg.folds {
        let test: Vec<usize> = (0..ds.instances.len()).filter(|&i| fold_of[i] == fold).collect();
        if test.is_empty() {
            continue;
        }
        let train_idx: Vec<usize> = (0..ds.instances.len()).filter(|&i| fold_of[i] != fold).collect();
        let train_posts: BTreeSet<&str> =
            train_idx.iter().map(|&i| ds.instances[i].post_id.as_str()).collect();
        let vocab = Arc::new(build_vocab(
            train_idx.iter().map(|&i| feat.texts[i].observed.as_slice()),
            cfg.min_count,
        ));
        let mut res = feat.resources(vocab);
        res.trend_threshold = cfg.trend.threshold;
        let posteriors = fold_posteriors.get(&fold);
        let y_train: Vec<bool> = train_idx.iter().map(|&i| ds.instances[i].label).collect();
        let y_test: Vec<bool> = test.iter().map(|&i| ds.instances[i].label).collect();

        for (si, set) in sets.iter().enumerate() {
            let layout = Arc::new(Layout::new(&set.groups, &res)?);
            feat.prepare(&set.groups, &res)?;
            let xs = train_idx
                .iter()
                .map(|&i| feat.vector(i, &layout, &res, posteriors))
                .collect::<Result<Vec<_>>>()?;
            let model = train(&xs, &y_train, &cfg.train)?;
            let xt = test
                .iter()
                .map(|&i| feat.vector(i, &layout, &res, posteriors))
                .collect::<Result<Vec<_>>>()?;
            let scores = model.predict_many(&xt)?;
            for &i in &test {
                report.audit.checked += 1;
                if train_posts.contains(ds.instances[i].post_id.as_str()) {
                    report.audit.violations += 1;
                }
            }
            for (j, &i) in test.iter().enumerate() {
                let inst = &ds.instances[i];
                report.oof.push(OofScore {
                    feature_set: set.name.clone(),
                    param: ds.param,
                    post_id: inst.post_id.clone(),
                    k: inst.k,
                    label: inst.label,
                    score: scores[j],
                    fold,
                });
            }
            match auc(&scores, &y_test) {
                Ok(a) => per_set[si].push(FoldMetrics {
                    fold,
                    n_test: test.len(),
                    auc: a,
                    prf: prf1(&scores, &y_test, cfg.threshold)?,
                }),
                Err(Error::SingleClass(_)) => {
                    log::warn!("fold {fold} of {} has a single class; skipped", set.name)
                }
                Err(e) => return Err(e),
            }
        }
    }
    for (set, folds) in sets.iter().zip(per_set) {
        if folds.is_empty() {
            return Err(Error::SingleClass(format!("every test fold of {} has a single class", set.name)));
        }
        report.rows.push(ReportRow::from_folds(ds.task, &set.name, ds.param, ds.instances.len(), folds));
    }
    Ok(AblationRun { report, plan, trend })
}

/// A model fit on every instance of a dataset, for coefficient inspection.
#[derive(Debug, Clone)]
pub struct FullFit {
    pub model: LinearModel,
    pub vectors: Vec<FeatureVector>,
}

/// Fits one feature set on the whole dataset. Trend features use each post's
/// outer-fold posteriors, so no comment is scored by a model trained on it.
pub fn fit_full(ctx: &mut Context, ds: &TaskDataset, set: &FeatureSet, cfg: &ExperimentConfig) -> Result<FullFit> {
    cfg.validate()?;
    let posteriors = if set.uses(Group::Trend) {
        let plan = fold_plan(ds, cfg)?;
        let fold_of: Vec<usize> = ds.instances.iter().map(|i| plan.fold_of[&i.post_id]).collect();
        let posts: Vec<usize> = ds.instances.iter().map(|i| i.post).collect();
        ctx.comment_dense()?;
        let input = DoubleCvInput {
            corpus: ctx.corpus,
            tokens: &ctx.tokens,
            dense: ctx.comment_dense.as_ref().expect("built"),
            lexicons: ctx.lexicons,
            subword: ctx.subword_table.expect("checked by comment_dense"),
            posts: &posts,
            fold_of: &fold_of,
            n_folds: cfg.folds,
        };
        let dcv = score_comments_double_cv(&input, &cfg.trend, cfg.seed)?;
        let mut all = HashMap::new();
        for f in &dcv.folds {
            all.extend(f.posterior_map());
        }
        Some(all)
    } else {
        None
    };
    let mut feat = Featurizer::new(ctx, ds)?;
    let vocab = Arc::new(build_vocab(feat.texts.iter().map(|t| t.observed.as_slice()), cfg.min_count));
    let mut res = feat.resources(vocab);
    res.trend_threshold = cfg.trend.threshold;
    let layout = Arc::new(Layout::new(&set.groups, &res)?);
    feat.prepare(&set.groups, &res)?;
    let vectors = (0..ds.instances.len())
        .map(|i| feat.vector(i, &layout, &res, posteriors.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let y: Vec<bool> = ds.instances.iter().map(|i| i.label).collect();
    let model = train(&vectors, &y, &cfg.train)?;
    Ok(FullFit { model, vectors })
}

/// Presence ablations at each lead time, one model per (set, lead).
pub fn sweep_lead_time(
    ctx: &mut Context,
    sets: &[FeatureSet],
    leads: &[f64],
    cfg: &ExperimentConfig,
) -> Result<Report> {
    if leads.is_empty() {
        return Err(Error::InvalidConfig("no lead times".into()));
    }
    let mut report = Report::default();
    for &lead in leads {
        let ds = build_task1(ctx.corpus, lead, cfg.seed)?;
        report.merge(run_ablation(ctx, &ds, sets, cfg)?.report);
    }
    Ok(report)
}

/// Intensity ablations at each threshold N.
pub fn sweep_intensity(
    ctx: &mut Context,
    sets: &[FeatureSet],
    ns: &[usize],
    cfg: &ExperimentConfig,
) -> Result<Report> {
    if ns.is_empty() {
        return Err(Error::InvalidConfig("no thresholds".into()));
    }
    let mut report = Report::default();
    for &n in ns {
        let ds = build_task2(ctx.corpus, n)?;
        report.merge(run_ablation(ctx, &ds, sets, cfg)?.report);
    }
    Ok(report)
}

/// Inclusive ranges of observed-comment counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    pub lo: usize,
    pub hi: usize,
}

impl Bucket {
    pub fn label(&self) -> String {
        if self.hi == usize::MAX {
            format!("{}+", self.lo)
        } else if self.lo == self.hi {
            self.lo.to_string()
        } else {
            format!("{}-{}", self.lo, self.hi)
        }
    }

    pub fn contains(&self, k: usize) -> bool {
        (self.lo..=self.hi).contains(&k)
    }
}

pub fn default_buckets() -> Vec<Bucket> {
    vec![
        Bucket { lo: 1, hi: 1 },
        Bucket { lo: 2, hi: 3 },
        Bucket { lo: 4, hi: 6 },
        Bucket { lo: 7, hi: 9 },
        Bucket { lo: 10, hi: usize::MAX },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub feature_set: String,
    pub param: f64,
    pub bucket: String,
    pub n: usize,
    pub auc: f64,
}

/// AUC of pooled out-of-fold scores within each observed-count bucket.
/// Buckets without both classes are skipped.
pub fn stratify_report(report: &Report, buckets: &[Bucket]) -> Result<Vec<BucketRow>> {
    for w in buckets.windows(2) {
        if w[1].lo != w[0].hi.saturating_add(1) {
            return Err(Error::InvalidConfig("buckets must be contiguous".into()));
        }
    }
    let mut groups: BTreeMap<(String, u64), Vec<&OofScore>> = BTreeMap::new();
    for o in &report.oof {
        groups.entry((o.feature_set.clone(), o.param.to_bits())).or_default().push(o);
    }
    let mut rows = Vec::new();
    for ((set, param), scores) in groups {
        for b in buckets {
            let sel: Vec<&&OofScore> = scores.iter().filter(|o| b.contains(o.k)).collect();
            let s: Vec<f64> = sel.iter().map(|o| o.score).collect();
            let l: Vec<bool> = sel.iter().map(|o| o.label).collect();
            match auc(&s, &l) {
                Ok(a) => rows.push(BucketRow {
                    feature_set: set.clone(),
                    param: f64::from_bits(param),
                    bucket: b.label(),
                    n: sel.len(),
                    auc: a,
                }),
                Err(_) => log::warn!("bucket {} of {set} lacks both classes; skipped", b.label()),
            }
        }
    }
    Ok(rows)
}

pub fn buckets_csv(rows: &[BucketRow]) -> String {
    let mut s = String::from("feature_set,param,bucket,n,auc\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.feature_set, r.param, r.bucket, r.n, r.auc);
    }
    s
}

/// Greedy forward selection: repeatedly adds the group that most improves
/// mean AUC, stopping when nothing helps.
pub fn forward_search(
    ctx: &mut Context,
    ds: &TaskDataset,
    candidates: &[Group],
    cfg: &ExperimentConfig,
) -> Result<Vec<(FeatureSet, f64)>> {
    let mut chosen: Vec<Group> = Vec::new();
    let mut path = Vec::new();
    let mut best_auc = f64::NEG_INFINITY;
    loop {
        let trial: Vec<FeatureSet> = candidates
            .iter()
            .filter(|g| !chosen.contains(g))
            .map(|&g| {
                let mut gs = chosen.clone();
                gs.push(g);
                FeatureSet::new(&gs)
            })
            .collect::<Result<_>>()?;
        if trial.is_empty() {
            break;
        }
        let run = run_ablation(ctx, ds, &trial, cfg)?;
        let (i, row) = run
            .report
            .rows
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.auc.total_cmp(&b.1.auc).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        if row.auc <= best_auc {
            break;
        }
        best_auc = row.auc;
        chosen = trial[i].groups.clone();
        path.push((trial[i].clone(), row.auc));
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Comment, Post};
    use crate::textfeat::assemble;

    fn c(id: &str, author: &str, text: &str, hours: f64, hostile: bool) -> Comment {
        Comment { id: id.into(), author: author.into(), text: text.into(), t: hours * 3600.0, hostile }
    }

    fn post(id: &str, comments: Vec<Comment>) -> Post {
        Post { id: id.into(), author: format!("a_{id}"), created_at: 0.0, comments }
    }

    #[test]
    fn task1_cutoffs() {
        let corpus = Corpus::new(vec![
            post(
                "h1",
                vec![
                    c("1", "u", "hi", 0.5, false),
                    c("2", "u", "hi", 1.0, false),
                    c("3", "u", "hi", 4.0, false),
                    c("4", "v", "bad", 5.0, true),
                ],
            ),
            post("h2", vec![c("1", "u", "bad", 0.5, true)]),
            post("n1", (0..4).map(|i| c(&i.to_string(), "w", "ok", i as f64, false)).collect()),
        ])
        .unwrap();
        let ds = build_task1(&corpus, 3.0, 1).unwrap();
        assert_eq!(ds.instances.len(), 2);
        let pos = ds.instances.iter().find(|i| i.label).unwrap();
        assert_eq!((pos.post_id.as_str(), pos.k), ("h1", 2));
        let neg = ds.instances.iter().find(|i| !i.label).unwrap();
        assert_eq!((neg.post_id.as_str(), neg.k), ("n1", 2));
        // first hostile within the first hour leaves nothing at lead 1 h
        assert!(matches!(
            build_task1(&Corpus::new(vec![corpus.post(1).clone(), corpus.post(2).clone()]).unwrap(), 1.0, 1),
            Err(Error::InsufficientData(_))
        ));
        assert!(build_task1(&corpus, 0.0, 1).is_err());
    }

    #[test]
    fn task2_labels() {
        let mk = |id: &str, hostile: usize| {
            let mut v = vec![c("0", "u", "ok", 0.1, false)];
            for j in 0..hostile {
                v.push(c(&format!("h{j}"), "u", "bad", 1.0 + j as f64, true));
            }
            post(id, v)
        };
        let corpus = Corpus::new(vec![mk("a", 12), mk("b", 1), mk("c", 5), mk("d", 0)]).unwrap();
        let ds = build_task2(&corpus, 10).unwrap();
        let lab: Vec<(&str, bool, usize)> =
            ds.instances.iter().map(|i| (i.post_id.as_str(), i.label, i.k)).collect();
        assert_eq!(lab, vec![("a", true, 2), ("b", false, 2)]);
        assert!(build_task2(&corpus, 1).is_err());
        assert!(build_task2(&corpus, 20).is_err());
    }

    #[test]
    fn feature_set_parsing() {
        let s: FeatureSet = "prev-post+U".parse().unwrap();
        assert_eq!(s.name, "U+prev-post");
        assert!("U+nope".parse::<FeatureSet>().is_err());
        assert_eq!(FeatureSet::best_task1().groups.len(), 7);
        assert!(!FeatureSet::best_task1().uses(Group::W2v));
        assert_eq!(FeatureSet::parse_for("best", TaskKind::Intensity).unwrap().groups.len(), 3);
    }

    #[test]
    fn buckets() {
        let b = default_buckets();
        assert!(b[3].contains(9) && !b[3].contains(10) && b[4].contains(10));
        assert_eq!(b[4].label(), "10+");
        assert_eq!(b[1].label(), "2-3");
        let mut r = Report::default();
        for (i, k) in [1usize, 1, 1, 1].iter().enumerate() {
            r.oof.push(OofScore {
                feature_set: "U".into(),
                param: 1.0,
                post_id: i.to_string(),
                k: *k,
                label: i % 2 == 0,
                score: i as f64,
                fold: 0,
            });
        }
        let rows = stratify_report(&r, &b).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].bucket, "1");
    }

    fn small_corpus() -> Corpus {
        let mut posts = Vec::new();
        for i in 0..24 {
            let hostile = i % 2 == 0;
            let mut cs: Vec<Comment> = (0..5)
                .map(|j| {
                    let text = if hostile && j < 2 { "ugh whatever @bob" } else { "lovely photo" };
                    c(&format!("c{j}"), &format!("u{}", (i + j) % 7), text, j as f64, false)
                })
                .collect();
            if hostile {
                cs.push(c("h", "u9", "you idiot stfu", 9.0, true));
                cs.push(c("h2", "u8", "idiot", 9.5, true));
            }
            posts.push(Post { id: format!("p{i:02}"), author: format!("a{}", i % 5), created_at: i as f64 * 1e5, comments: cs });
        }
        Corpus::new(posts).unwrap()
    }

    fn tables(corpus: &Corpus, tokens: &TokenCache) -> (EmbeddingTable, EmbeddingTable) {
        let cfg = SgnsConfig { dim: 8, epochs: 1, min_count: 1, ..SgnsConfig::default() };
        train_embeddings(corpus, tokens, &cfg).unwrap()
    }

    #[test]
    fn cached_vectors_match_direct_assembly() {
        let corpus = small_corpus();
        let lex = Lexicons::builtin();
        let tokens = TokenCache::new(&corpus);
        let (w, s) = tables(&corpus, &tokens);
        let mut ctx = Context::new(&corpus, &lex, Some(&w), Some(&s));
        let ds = build_task1(&corpus, 1.0, 3).unwrap();
        let cfg = ExperimentConfig { folds: 3, ..Default::default() };
        let run = run_ablation(&mut ctx, &ds, &[FeatureSet::all()], &cfg).unwrap();
        assert!(run.report.audit.clean());
        assert!(run.report.audit.checked > 0);

        let feat = Featurizer::new(&ctx, &ds).unwrap();
        let vocab = Arc::new(build_vocab(feat.texts.iter().map(|t| t.observed.as_slice()), 1));
        let mut res = feat.resources(vocab);
        let trend = run.trend.as_ref().unwrap();
        let pm = trend.folds[0].posterior_map();
        res.posteriors = Some(&pm);
        let layout = Arc::new(Layout::new(&Group::ALL, &res).unwrap());
        let mut feat = feat;
        feat.prepare(&Group::ALL, &res).unwrap();
        for (i, inst) in ds.instances.iter().enumerate() {
            let a = feat.vector(i, &layout, &res, Some(&pm)).unwrap();
            let b = assemble(&corpus, inst.post, inst.k, &layout, &res).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn reports_are_deterministic_and_consistent() {
        let corpus = small_corpus();
        let lex = Lexicons::builtin();
        let mut ctx = Context::new(&corpus, &lex, None, None);
        let ds = build_task1(&corpus, 1.0, 3).unwrap();
        let cfg = ExperimentConfig { folds: 3, ..Default::default() };
        let u: FeatureSet = "U".parse().unwrap();
        let a = run_ablation(&mut ctx, &ds, &[u.clone(), u.clone()], &cfg).unwrap().report;
        assert_eq!(a.rows[0].folds, a.rows[1].folds);
        let b = run_ablation(&mut ctx, &ds, &[u.clone(), u], &cfg).unwrap().report;
        assert_eq!(a.folds_csv(), b.folds_csv());
        for r in &a.rows {
            let m = r.folds.iter().map(|f| f.auc).sum::<f64>() / r.folds.len() as f64;
            assert!((m - r.auc).abs() < 1e-9);
        }
        // missing tables are reported as missing resources
        let w2v: FeatureSet = "w2v".parse().unwrap();
        assert!(matches!(run_ablation(&mut ctx, &ds, &[w2v], &cfg), Err(Error::MissingResource(_))));
    }
}
