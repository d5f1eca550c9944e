use std::collections::{BTreeMap, HashMap};

use rand::distr::Distribution;
use rand::Rng as _;
use rand_distr::weighted::WeightedAliasIndex;
use serde::{Deserialize, Serialize};

use super::{subword_units, EmbeddingTable};
use crate::util::{rng, sigmoid, softplus};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial learning rate, decayed linearly to zero.
    pub lr: f64,
    pub min_count: usize,
    /// Frequent-word subsampling threshold; 0 disables subsampling.
    pub subsample: f64,
    pub seed: u64,
    pub min_n: usize,
    pub max_n: usize,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            lr: 0.025,
            min_count: 2,
            subsample: 1e-3,
            seed: 1,
            min_n: 3,
            max_n: 6,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    /// Mean negative-sampling loss per (center, context) pair, per epoch.
    pub epoch_loss: Vec<f64>,
    /// Objective on a fixed sample of triples: before training, then after each epoch.
    pub frozen_objective: Vec<f64>,
}

/// Loss of one positive target (label true) or negative target.
fn target_term(score: f64, positive: bool) -> (f64, f64) {
    if positive {
        (softplus(-score), sigmoid(score) - 1.0)
    } else {
        (softplus(score), sigmoid(score))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairGrad {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Negative-sampling loss `-log σ(u_o·v) - Σ log σ(-u_k·v)` and its
/// gradient with respect to the center vector `v`, the context output
/// vector `u_o` and each negative output vector `u_k`.
pub fn sgns_loss_grad(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGrad {
    let d = center.len();
    let mut g_center = vec![0.0; d];
    let (mut loss, g) = target_term(dot(center, context), true);
    for i in 0..d {
        g_center[i] += g * context[i];
    }
    let g_context = center.iter().map(|c| g * c).collect();
    let mut g_neg = Vec::with_capacity(negatives.len());
    for u in negatives {
        let (l, g) = target_term(dot(center, u), false);
        loss += l;
        for i in 0..d {
            g_center[i] += g * u[i];
        }
        g_neg.push(center.iter().map(|c| g * c).collect());
    }
    PairGrad { loss, center: g_center, context: g_context, negatives: g_neg }
}

/// Same loss with the center vector composed as the mean of `units`;
/// returns the loss and the gradient for each unit.
pub fn subword_loss_grad(
    units: &[Vec<f64>],
    context: &[f64],
    negatives: &[&[f64]],
) -> (f64, Vec<Vec<f64>>) {
    let d = context.len();
    let n = units.len() as f64;
    let mut h = vec![0.0; d];
    for u in units {
        for i in 0..d {
            h[i] += u[i];
        }
    }
    h.iter_mut().for_each(|x| *x /= n);
    let pg = sgns_loss_grad(&h, context, negatives);
    let per_unit: Vec<f64> = pg.center.iter().map(|g| g / n).collect();
    (pg.loss, vec![per_unit; units.len()])
}

/// Trains word vectors; each word is its own single input unit.
pub fn train_sgns(sentences: &[Vec<String>], cfg: &SgnsConfig) -> Result<(EmbeddingTable, TrainLog)> {
    let vocab = Vocab::build(sentences, cfg)?;
    let units: Vec<Vec<usize>> = (0..vocab.words.len()).map(|i| vec![i]).collect();
    let (w_in, log) = train_core(sentences, cfg, &vocab, &units, vocab.words.len())?;
    let mut table = EmbeddingTable::new(cfg.dim);
    for (i, w) in vocab.words.iter().enumerate() {
        table.insert(w.clone(), to_f32(&w_in[i * cfg.dim..(i + 1) * cfg.dim]));
    }
    table.set_config(cfg.clone());
    Ok((table, log))
}

/// Trains subword vectors: a word's input vector is the mean of its
/// whole-word vector and its character n-gram vectors (`min_n..=max_n`).
pub fn train_subword_sgns(
    sentences: &[Vec<String>],
    cfg: &SgnsConfig,
) -> Result<(EmbeddingTable, TrainLog)> {
    if cfg.min_n == 0 || cfg.max_n < cfg.min_n {
        return Err(Error::InvalidConfig("invalid n-gram range".into()));
    }
    let vocab = Vocab::build(sentences, cfg)?;
    let mut unit_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut units = Vec::with_capacity(vocab.words.len());
    for w in &vocab.words {
        let mut ids = Vec::new();
        for u in subword_units(w, cfg.min_n, cfg.max_n) {
            let next = unit_index.len();
            ids.push(*unit_index.entry(u).or_insert(next));
        }
        units.push(ids);
    }
    let (w_in, log) = train_core(sentences, cfg, &vocab, &units, unit_index.len())?;
    let unit_vecs: HashMap<String, Vec<f32>> = unit_index
        .into_iter()
        .map(|(u, i)| (u, to_f32(&w_in[i * cfg.dim..(i + 1) * cfg.dim])))
        .collect();
    let mut table =
        EmbeddingTable::from_subwords(cfg.dim, unit_vecs, vocab.words.iter().cloned(), (cfg.min_n, cfg.max_n));
    table.set_config(cfg.clone());
    Ok((table, log))
}

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

struct Vocab {
    words: Vec<String>,
    index: HashMap<String, usize>,
    counts: Vec<u64>,
    total: u64,
}

impl Vocab {
    fn build(sentences: &[Vec<String>], cfg: &SgnsConfig) -> Result<Self> {
        if cfg.dim == 0 || cfg.window == 0 || cfg.epochs == 0 {
            return Err(Error::InvalidConfig("dim, window and epochs must be positive".into()));
        }
        let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
        for s in sentences {
            for t in s {
                *counts.entry(t.as_str()).or_default() += 1;
            }
        }
        let mut kept: Vec<(&str, u64)> =
            counts.into_iter().filter(|&(_, c)| c >= cfg.min_count.max(1) as u64).collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let words: Vec<String> = kept.iter().map(|(w, _)| w.to_string()).collect();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let counts: Vec<u64> = kept.iter().map(|&(_, c)| c).collect();
        let total = counts.iter().sum();
        Ok(Vocab { words, index, counts, total })
    }
}

struct Model<'a> {
    dim: usize,
    w_in: Vec<f64>,
    w_out: Vec<f64>,
    units: &'a [Vec<usize>],
}

impl Model<'_> {
    fn hidden(&self, word: usize, h: &mut [f64]) {
        h.iter_mut().for_each(|x| *x = 0.0);
        let us = &self.units[word];
        for &u in us {
            let row = &self.w_in[u * self.dim..(u + 1) * self.dim];
            for (a, x) in h.iter_mut().zip(row) {
                *a += x;
            }
        }
        let inv = 1.0 / us.len() as f64;
        h.iter_mut().for_each(|x| *x *= inv);
    }

    fn out_row(&self, w: usize) -> &[f64] {
        &self.w_out[w * self.dim..(w + 1) * self.dim]
    }

    /// Objective of one triple at the current parameters.
    fn triple_loss(&self, center: usize, context: usize, negs: &[usize], h: &mut [f64]) -> f64 {
        self.hidden(center, h);
        let mut loss = target_term(dot(h, self.out_row(context)), true).0;
        for &n in negs {
            loss += target_term(dot(h, self.out_row(n)), false).0;
        }
        loss
    }

    fn all_finite(&self) -> bool {
        self.w_in.iter().chain(&self.w_out).all(|x| x.is_finite())
    }
}

fn train_core(
    sentences: &[Vec<String>],
    cfg: &SgnsConfig,
    vocab: &Vocab,
    units: &[Vec<usize>],
    n_units: usize,
) -> Result<(Vec<f64>, TrainLog)> {
    let dim = cfg.dim;
    let mut r = rng(cfg.seed, 11);
    let ids: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|t| vocab.index.get(t).copied()).collect())
        .collect();
    let neg_dist =
        WeightedAliasIndex::new(vocab.counts.iter().map(|&c| (c as f64).powf(0.75)).collect())
            .map_err(|e| Error::InvalidConfig(format!("negative sampling table: {e}")))?;
    let keep_prob: Vec<f64> = vocab
        .counts
        .iter()
        .map(|&c| {
            if cfg.subsample <= 0.0 {
                1.0
            } else {
                let f = c as f64 / vocab.total as f64;
                ((f / cfg.subsample).sqrt() + 1.0) * cfg.subsample / f
            }
        })
        .collect();

    let mut model = Model {
        dim,
        w_in: (0..n_units * dim).map(|_| (r.random::<f64>() - 0.5) / dim as f64).collect(),
        w_out: vec![0.0; vocab.words.len() * dim],
        units,
    };

    // frozen evaluation sample, drawn from its own stream
    let mut rf = rng(cfg.seed, 12);
    let mut frozen: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    let flat: Vec<(usize, usize)> = ids
        .iter()
        .enumerate()
        .flat_map(|(si, s)| (0..s.len()).map(move |p| (si, p)))
        .collect();
    if !flat.is_empty() {
        for _ in 0..flat.len().min(2000) {
            let (si, p) = flat[rf.random_range(0..flat.len())];
            let s = &ids[si];
            if s.len() < 2 {
                continue;
            }
            let mut q = rf.random_range(0..s.len() - 1);
            if q >= p {
                q += 1;
            }
            let negs = (0..cfg.negatives).map(|_| neg_dist.sample(&mut rf)).collect();
            frozen.push((s[p], s[q], negs));
        }
    }
    let mut h = vec![0.0; dim];
    let frozen_objective = |m: &Model, h: &mut [f64]| -> f64 {
        if frozen.is_empty() {
            return 0.0;
        }
        frozen.iter().map(|(c, o, n)| m.triple_loss(*c, *o, n, h)).sum::<f64>() / frozen.len() as f64
    };

    let mut log = TrainLog::default();
    log.frozen_objective.push(frozen_objective(&model, &mut h));

    let planned = (cfg.epochs as u64 * vocab.total).max(1) as f64;
    let mut processed = 0u64;
    let mut grad_h = vec![0.0; dim];
    let mut kept = Vec::new();
    let mut negs = Vec::with_capacity(cfg.negatives);
    for _epoch in 0..cfg.epochs {
        let mut loss_sum = 0.0;
        let mut pairs = 0u64;
        for sent in &ids {
            kept.clear();
            for &w in sent {
                processed += 1;
                if keep_prob[w] >= 1.0 || r.random::<f64>() < keep_prob[w] {
                    kept.push(w);
                }
            }
            let lr = cfg.lr * (1.0 - processed as f64 / planned).max(1e-4);
            for pos in 0..kept.len() {
                let center = kept[pos];
                let reach = cfg.window - r.random_range(0..cfg.window);
                let lo = pos.saturating_sub(reach);
                let hi = (pos + reach).min(kept.len() - 1);
                if lo == hi {
                    continue;
                }
                model.hidden(center, &mut h);
                grad_h.iter_mut().for_each(|g| *g = 0.0);
                for cpos in lo..=hi {
                    if cpos == pos {
                        continue;
                    }
                    let ctx = kept[cpos];
                    negs.clear();
                    for _ in 0..cfg.negatives {
                        let n = neg_dist.sample(&mut r);
                        if n != ctx {
                            negs.push(n);
                        }
                    }
                    pairs += 1;
                    for (target, positive) in
                        std::iter::once((ctx, true)).chain(negs.iter().map(|&n| (n, false)))
                    {
                        let row = &mut model.w_out[target * dim..(target + 1) * dim];
                        let (l, g) = target_term(dot(&h, row), positive);
                        loss_sum += l;
                        for i in 0..dim {
                            grad_h[i] += g * row[i];
                            row[i] -= lr * g * h[i];
                        }
                    }
                }
                for &u in &units[center] {
                    let row = &mut model.w_in[u * dim..(u + 1) * dim];
                    for i in 0..dim {
                        row[i] -= lr * grad_h[i];
                    }
                }
            }
        }
        if !model.all_finite() {
            return Err(Error::InvalidConfig("embedding training diverged (non-finite weights)".into()));
        }
        let mean_loss = if pairs > 0 { loss_sum / pairs as f64 } else { 0.0 };
        log::debug!("sgns epoch loss {mean_loss:.5}");
        log.epoch_loss.push(mean_loss);
        log.frozen_objective.push(frozen_objective(&model, &mut h));
    }
    Ok((model.w_in, log))
}
