//! Ranking and threshold metrics, fold construction and matched sampling.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::util::rng;
use crate::{Error, Result};

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let p = labels.iter().filter(|&&l| l).count();
    (p, labels.len() - p)
}

/// Area under the ROC curve via midranks: ties between a positive and a
/// negative count one half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), got: scores.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InsufficientData("NaN score".into()));
    }
    let (p, n) = class_counts(labels);
    if p == 0 || n == 0 {
        return Err(Error::SingleClass("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j+1 share their mean
        let mid = (i + j + 2) as f64 / 2.0;
        for &o in &order[i..=j] {
            if labels[o] {
                pos_rank_sum += mid;
            }
        }
        i = j + 1;
    }
    let u = pos_rank_sum - (p * (p + 1)) as f64 / 2.0;
    Ok(u / (p as f64 * n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf1 {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Precision, recall and F1 predicting positive when `score >= threshold`.
/// Zero denominators give zero.
pub fn prf1(scores: &[f64], labels: &[bool], threshold: f64) -> Result<Prf1> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch { expected: labels.len(), got: scores.len() });
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(prf1_counts(tp, fp, fn_))
}

pub fn prf1_counts(tp: usize, fp: usize, fn_: usize) -> Prf1 {
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Prf1 { precision, recall, f1 }
}

/// A positive post paired with a negative observed over the same number of
/// comments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub positive: String,
    pub negative: String,
    pub k: usize,
}

/// Pairs every positive `(post, k)` with a distinct pool post `(post,
/// comment count)` that has at least `k` comments. Positives are served in
/// descending `k` (ties by id); those left without a candidate are dropped.
pub fn match_negatives(
    positives: &[(String, usize)],
    pool: &[(String, usize)],
    seed: u64,
) -> Result<Vec<Pair>> {
    if pool.is_empty() {
        return Err(Error::InsufficientData("negative pool is empty".into()));
    }
    let mut pos: Vec<&(String, usize)> = positives.iter().collect();
    pos.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let mut pool: Vec<&(String, usize)> = pool.iter().collect();
    pool.sort_by(|a, b| a.0.cmp(&b.0));
    let mut used = vec![false; pool.len()];
    let mut r = rng(seed, 41);
    let mut pairs = Vec::with_capacity(pos.len());
    let mut dropped = 0usize;
    for (id, k) in pos {
        let cands: Vec<usize> = (0..pool.len()).filter(|&i| !used[i] && pool[i].1 >= *k).collect();
        if cands.is_empty() {
            dropped += 1;
            continue;
        }
        let c = cands[r.random_range(0..cands.len())];
        used[c] = true;
        pairs.push(Pair { positive: id.clone(), negative: pool[c].0.clone(), k: *k });
    }
    if dropped > 0 {
        log::warn!("{dropped} positives dropped: no unused negative with enough comments");
    }
    Ok(pairs)
}

/// Assignment of posts to cross-validation folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    pub fold_of: BTreeMap<String, usize>,
    /// positive post -> matched negative post
    pub pairs: BTreeMap<String, String>,
}

impl FoldPlan {
    pub fn fold(&self, post: &str) -> Option<usize> {
        self.fold_of.get(post).copied()
    }

    pub fn members(&self, fold: usize) -> Vec<&str> {
        self.fold_of.iter().filter(|(_, &f)| f == fold).map(|(p, _)| p.as_str()).collect()
    }
}

/// Label-stratified partition into `k` folds. Matched pairs form single
/// units so both members land together; units are shuffled within each
/// stratum and dealt round-robin, the rotation continuing across strata.
/// Strata smaller than `k` are spread as evenly as the rotation allows.
pub fn make_folds(
    instances: &[(String, bool)],
    pairs: &[(String, String)],
    k: usize,
    seed: u64,
) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidConfig("need at least 2 folds".into()));
    }
    if instances.len() < k {
        return Err(Error::InsufficientData(format!(
            "{} instances cannot fill {k} folds",
            instances.len()
        )));
    }
    let ids: HashSet<&str> = instances.iter().map(|(p, _)| p.as_str()).collect();
    if ids.len() != instances.len() {
        return Err(Error::InvalidConfig("duplicate post in fold instances".into()));
    }
    let mut paired: HashSet<&str> = HashSet::new();
    for (a, b) in pairs {
        for x in [a, b] {
            if !ids.contains(x.as_str()) || !paired.insert(x.as_str()) {
                return Err(Error::InvalidConfig(format!("invalid pairing for post {x}")));
            }
        }
    }
    let mut pair_units: Vec<Vec<String>> = pairs.iter().map(|(a, b)| vec![a.clone(), b.clone()]).collect();
    let mut pos_units = Vec::new();
    let mut neg_units = Vec::new();
    let mut sorted: Vec<&(String, bool)> = instances.iter().collect();
    sorted.sort();
    for (id, l) in sorted {
        if paired.contains(id.as_str()) {
            continue;
        }
        if *l {
            pos_units.push(vec![id.clone()]);
        } else {
            neg_units.push(vec![id.clone()]);
        }
    }
    pair_units.sort();
    let mut r = rng(seed, 43);
    let mut fold_of = BTreeMap::new();
    let mut next = 0usize;
    for stratum in [&mut pair_units, &mut pos_units, &mut neg_units] {
        stratum.shuffle(&mut r);
        for unit in stratum.iter() {
            for id in unit {
                fold_of.insert(id.clone(), next % k);
            }
            next += 1;
        }
    }
    Ok(FoldPlan { k, seed, fold_of, pairs: pairs.iter().cloned().collect() })
}
