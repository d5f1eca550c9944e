//! L2-regularized logistic regression over sparse feature vectors.

use serde::{Deserialize, Serialize};

use crate::eval::auc;
use crate::textfeat::{FeatureVector, Layout};
use crate::util::{rng, sigmoid, softplus};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lambda: f64,
    pub max_iter: usize,
    /// Stop once the gradient's infinity norm falls below this.
    pub tol: f64,
    /// When non-empty, lambda is chosen from this grid by inner CV AUC.
    pub lambda_grid: Vec<f64>,
    pub inner_folds: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lambda: 1.0,
            max_iter: 1000,
            tol: 1e-6,
            lambda_grid: Vec::new(),
            inner_folds: 3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        TrainConfig { lambda, ..Self::default() }
    }

    pub fn with_search(mut self) -> Self {
        self.lambda_grid = vec![0.01, 0.1, 1.0, 10.0];
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return bad("lambda must be finite and non-negative");
        }
        if self.lambda_grid.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return bad("lambda grid values must be finite and non-negative");
        }
        if !self.lambda_grid.is_empty() && self.inner_folds < 2 {
            return bad("lambda search needs at least 2 inner folds");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        Ok(())
    }
}

/// A trained model. Weights live in standardized space for dense columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub fingerprint: String,
    pub names: Vec<String>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub dense: Vec<bool>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Objective after each accepted step, starting from the initial point.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Weights and bias acting directly on raw (unstandardized) values.
    fn effective(&self) -> (Vec<f64>, f64) {
        to_raw(&self.weights, self.bias, &self.mean, &self.std, &self.dense)
    }

    /// Decision value for raw entries; callers are responsible for layout.
    pub fn margin_raw(&self, entries: &[(u32, f64)]) -> f64 {
        let mut z = self.bias;
        for &(i, x) in entries {
            let i = i as usize;
            if self.dense[i] {
                z += self.weights[i] * (x - self.mean[i]) / self.std[i];
            } else {
                z += self.weights[i] * x;
            }
        }
        // dense columns absent from `entries` are zeros that still standardize
        for i in 0..self.dim() {
            if self.dense[i] && entries.binary_search_by_key(&(i as u32), |e| e.0).is_err() {
                z -= self.weights[i] * self.mean[i] / self.std[i];
            }
        }
        z
    }

    /// Precomputed raw-space weights for fast repeated scoring.
    pub fn scorer(&self) -> Scorer {
        let (w, b) = self.effective();
        Scorer { w, b }
    }

    pub fn predict_proba(&self, x: &FeatureVector) -> Result<f64> {
        if x.layout().fingerprint() != self.fingerprint {
            return Err(Error::LayoutMismatch {
                model: self.fingerprint.clone(),
                input: x.layout().fingerprint().to_string(),
            });
        }
        Ok(sigmoid(self.margin_raw(x.entries())))
    }

    pub fn predict_many(&self, xs: &[FeatureVector]) -> Result<Vec<f64>> {
        let (w, b) = self.effective();
        xs.iter()
            .map(|x| {
                if x.layout().fingerprint() != self.fingerprint {
                    return Err(Error::LayoutMismatch {
                        model: self.fingerprint.clone(),
                        input: x.layout().fingerprint().to_string(),
                    });
                }
                Ok(sigmoid(dot(&w, b, x.entries())))
            })
            .collect()
    }

    /// The `k` largest-magnitude weights of the requested sign, ties broken
    /// by feature name.
    pub fn top_coefficients(&self, k: usize, sign: Sign) -> Vec<(String, f64)> {
        let mut v: Vec<(String, f64)> = self
            .names
            .iter()
            .zip(&self.weights)
            .filter(|(_, &w)| match sign {
                Sign::Positive => w > 0.0,
                Sign::Negative => w < 0.0,
            })
            .map(|(n, &w)| (n.clone(), w))
            .collect();
        v.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()).then_with(|| a.0.cmp(&b.0)));
        v.truncate(k);
        v
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: LinearModel = serde_json::from_str(s)?;
        let d = m.weights.len();
        for len in [m.names.len(), m.dense.len(), m.mean.len(), m.std.len()] {
            if len != d {
                return Err(Error::DimensionMismatch { expected: d, got: len });
            }
        }
        Ok(m)
    }
}

/// Raw-space view of a model: `sigmoid(w·x + b)` on unstandardized rows.
#[derive(Debug, Clone)]
pub struct Scorer {
    w: Vec<f64>,
    b: f64,
}

impl Scorer {
    pub fn margin(&self, entries: &[(u32, f64)]) -> f64 {
        dot(&self.w, self.b, entries)
    }

    pub fn proba(&self, entries: &[(u32, f64)]) -> f64 {
        sigmoid(self.margin(entries))
    }
}

fn dot(w: &[f64], b: f64, entries: &[(u32, f64)]) -> f64 {
    entries.iter().fold(b, |z, &(i, x)| z + w[i as usize] * x)
}

fn to_raw(w: &[f64], b: f64, mean: &[f64], std: &[f64], dense: &[bool]) -> (Vec<f64>, f64) {
    let mut out = w.to_vec();
    let mut bias = b;
    for i in 0..w.len() {
        if dense[i] {
            out[i] = w[i] / std[i];
            bias -= w[i] * mean[i] / std[i];
        }
    }
    (out, bias)
}

/// Regularized mean log-loss and its gradient at `(w, b)` for raw rows and
/// the given per-column standardization. Exposed for gradient checking.
pub struct Problem<'a> {
    pub rows: &'a [&'a [(u32, f64)]],
    pub y: &'a [bool],
    pub dense: &'a [bool],
    pub mean: &'a [f64],
    pub std: &'a [f64],
    pub lambda: f64,
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.dense.len()
    }

    fn margins(&self, w: &[f64], b: f64) -> Vec<f64> {
        let (we, be) = to_raw(w, b, self.mean, self.std, self.dense);
        self.rows.iter().map(|r| dot(&we, be, r)).collect()
    }

    fn loss_from_margins(&self, z: &[f64], w: &[f64]) -> f64 {
        let n = z.len() as f64;
        let data: f64 = z
            .iter()
            .zip(self.y)
            .map(|(&z, &y)| if y { softplus(-z) } else { softplus(z) })
            .sum::<f64>()
            / n;
        data + 0.5 * self.lambda * w.iter().map(|x| x * x).sum::<f64>()
    }

    pub fn objective(&self, w: &[f64], b: f64) -> f64 {
        self.loss_from_margins(&self.margins(w, b), w)
    }

    fn gradient_from_margins(&self, z: &[f64], w: &[f64]) -> (Vec<f64>, f64) {
        let n = z.len() as f64;
        let mut g = vec![0.0; self.dim()];
        let mut esum = 0.0;
        for ((r, &z), &y) in self.rows.iter().zip(z).zip(self.y) {
            let e = sigmoid(z) - if y { 1.0 } else { 0.0 };
            esum += e;
            for &(i, x) in r.iter() {
                g[i as usize] += e * x;
            }
        }
        for i in 0..g.len() {
            if self.dense[i] {
                g[i] = (g[i] - self.mean[i] * esum) / (n * self.std[i]);
            } else {
                g[i] /= n;
            }
            g[i] += self.lambda * w[i];
        }
        (g, esum / n)
    }

    pub fn gradient(&self, w: &[f64], b: f64) -> (Vec<f64>, f64) {
        self.gradient_from_margins(&self.margins(w, b), w)
    }

    /// Gradient descent with Barzilai-Borwein initial steps and Armijo
    /// backtracking. Returns weights, bias and the objective trace.
    fn minimize(&self, max_iter: usize, tol: f64) -> (Vec<f64>, f64, Vec<f64>) {
        let d = self.dim();
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut z = self.margins(&w, b);
        let mut f = self.loss_from_margins(&z, &w);
        let mut trace = vec![f];
        let (mut g, mut gb) = self.gradient_from_margins(&z, &w);
        let mut step = 1.0;
        for _ in 0..max_iter {
            let gnorm_inf = g.iter().fold(gb.abs(), |m, x| m.max(x.abs()));
            if gnorm_inf < tol {
                break;
            }
            let gsq: f64 = g.iter().map(|x| x * x).sum::<f64>() + gb * gb;
            // direction is -g; its effect on margins is linear
            let neg: Vec<f64> = g.iter().map(|x| -x).collect();
            let (de, dbe) = to_raw(&neg, -gb, self.mean, self.std, self.dense);
            let dz: Vec<f64> = self.rows.iter().map(|r| dot(&de, dbe, r)).collect();
            let mut t = step;
            let mut accepted = None;
            for _ in 0..60 {
                let zt: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + t * b).collect();
                let wt: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - t * b).collect();
                let ft = self.loss_from_margins(&zt, &wt);
                if ft <= f - 1e-4 * t * gsq && ft < f {
                    accepted = Some((zt, wt, ft));
                    break;
                }
                t *= 0.5;
            }
            let Some((zt, wt, ft)) = accepted else { break };
            let bt = b - t * gb;
            let (gt, gbt) = self.gradient_from_margins(&zt, &wt);
            // BB1 step from the displacement and gradient change
            let mut ss = (bt - b).powi(2);
            let mut sy = (bt - b) * (gbt - gb);
            for i in 0..d {
                let s = wt[i] - w[i];
                ss += s * s;
                sy += s * (gt[i] - g[i]);
            }
            step = if sy > 0.0 { (ss / sy).clamp(1e-10, 1e10) } else { t * 2.0 };
            w = wt;
            b = bt;
            z = zt;
            f = ft;
            g = gt;
            gb = gbt;
            trace.push(f);
        }
        (w, b, trace)
    }
}

fn check_labels(y: &[bool]) -> Result<()> {
    if y.len() < 2 || y.iter().all(|&v| v) || y.iter().all(|&v| !v) {
        return Err(Error::SingleClass("training labels need both classes".into()));
    }
    Ok(())
}

/// Column means and (population) standard deviations of dense columns;
/// sparse columns and constant columns get mean 0 / std 1 and mean / std 1.
pub fn standardization(rows: &[&[(u32, f64)]], dense: &[bool]) -> (Vec<f64>, Vec<f64>) {
    let d = dense.len();
    let n = rows.len().max(1) as f64;
    let mut sum = vec![0.0; d];
    let mut sq = vec![0.0; d];
    for r in rows {
        for &(i, x) in r.iter() {
            if dense[i as usize] {
                sum[i as usize] += x;
                sq[i as usize] += x * x;
            }
        }
    }
    let mut mean = vec![0.0; d];
    let mut std = vec![1.0; d];
    for i in 0..d {
        if dense[i] {
            let m = sum[i] / n;
            let var = (sq[i] / n - m * m).max(0.0);
            mean[i] = m;
            let s = var.sqrt();
            std[i] = if s > 1e-12 { s } else { 1.0 };
        }
    }
    (mean, std)
}

/// Trains on raw sparse rows with an explicit column mask and names.
pub fn train_rows(
    rows: &[&[(u32, f64)]],
    y: &[bool],
    dense: &[bool],
    names: Vec<String>,
    fingerprint: &str,
    cfg: &TrainConfig,
) -> Result<LinearModel> {
    cfg.validate()?;
    if rows.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: rows.len(), got: y.len() });
    }
    check_labels(y)?;
    let d = dense.len();
    if names.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: names.len() });
    }
    for r in rows {
        if let Some(&(i, _)) = r.iter().find(|e| e.0 as usize >= d) {
            return Err(Error::DimensionMismatch { expected: d, got: i as usize + 1 });
        }
    }
    let lambda = if cfg.lambda_grid.is_empty() {
        cfg.lambda
    } else {
        select_lambda(rows, y, dense, cfg)?
    };
    let (mean, std) = standardization(rows, dense);
    let p = Problem { rows, y, dense, mean: &mean, std: &std, lambda };
    let (weights, bias, objective_trace) = p.minimize(cfg.max_iter, cfg.tol);
    if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
        return Err(Error::InsufficientData("optimizer diverged".into()));
    }
    Ok(LinearModel {
        fingerprint: fingerprint.to_string(),
        names,
        weights,
        bias,
        lambda,
        dense: dense.to_vec(),
        mean,
        std,
        objective_trace,
    })
}

fn select_lambda(
    rows: &[&[(u32, f64)]],
    y: &[bool],
    dense: &[bool],
    cfg: &TrainConfig,
) -> Result<f64> {
    use rand::seq::SliceRandom;
    let k = cfg.inner_folds;
    // stratified assignment
    let mut fold = vec![0usize; y.len()];
    let mut r = rng(cfg.seed, 31);
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut r);
        for (j, &i) in idx.iter().enumerate() {
            fold[i] = j % k;
        }
    }
    let mut best = (f64::NEG_INFINITY, cfg.lambda_grid[0]);
    for &lambda in &cfg.lambda_grid {
        let mut aucs = Vec::new();
        for f in 0..k {
            let tr: Vec<usize> = (0..y.len()).filter(|&i| fold[i] != f).collect();
            let te: Vec<usize> = (0..y.len()).filter(|&i| fold[i] == f).collect();
            let tr_rows: Vec<&[(u32, f64)]> = tr.iter().map(|&i| rows[i]).collect();
            let tr_y: Vec<bool> = tr.iter().map(|&i| y[i]).collect();
            let te_y: Vec<bool> = te.iter().map(|&i| y[i]).collect();
            if check_labels(&tr_y).is_err() || check_labels(&te_y).is_err() {
                continue;
            }
            let (mean, std) = standardization(&tr_rows, dense);
            let p = Problem { rows: &tr_rows, y: &tr_y, dense, mean: &mean, std: &std, lambda };
            let (w, b, _) = p.minimize(cfg.max_iter, cfg.tol);
            let (we, be) = to_raw(&w, b, &mean, &std, dense);
            let scores: Vec<f64> = te.iter().map(|&i| dot(&we, be, rows[i])).collect();
            aucs.push(auc(&scores, &te_y)?);
        }
        if aucs.is_empty() {
            continue;
        }
        let m = aucs.iter().sum::<f64>() / aucs.len() as f64;
        if m > best.0 {
            best = (m, lambda);
        }
    }
    log::debug!("selected lambda {} (inner AUC {:.4})", best.1, best.0);
    Ok(best.1)
}

/// Trains a model on feature vectors that share one layout.
pub fn train(x: &[FeatureVector], y: &[bool], cfg: &TrainConfig) -> Result<LinearModel> {
    let first = x.first().ok_or_else(|| Error::SingleClass("no training data".into()))?;
    let layout: &Layout = first.layout();
    if let Some(bad) = x.iter().find(|v| v.layout().fingerprint() != layout.fingerprint()) {
        return Err(Error::LayoutMismatch {
            model: layout.fingerprint().to_string(),
            input: bad.layout().fingerprint().to_string(),
        });
    }
    let rows: Vec<&[(u32, f64)]> = x.iter().map(|v| v.entries()).collect();
    train_rows(&rows, y, &layout.dense_mask(), layout.feature_names(), layout.fingerprint(), cfg)
}
