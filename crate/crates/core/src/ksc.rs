//! Hourly hostile-comment series and K-Spectral-Centroid clustering under a
//! distance invariant to scaling and bounded integer shifts.

use std::fmt::Write as _;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::corpus::{Post, SECONDS_PER_HOUR};
use crate::util::rng;
use crate::{Error, Result};

/// Number of hourly bins (ten days).
pub const SERIES_LEN: usize = 240;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostilitySeries {
    pub post_id: String,
    pub values: Vec<f64>,
    pub smoothed: bool,
}

/// Counts hostile comments per hour since the post was created; bin `h`
/// covers `[3600 h, 3600 (h + 1))` seconds.
pub fn build_series(post: &Post) -> Result<HostilitySeries> {
    let mut values = vec![0.0; SERIES_LEN];
    let mut any = false;
    for c in post.comments.iter().filter(|c| c.hostile) {
        let h = (c.t / SECONDS_PER_HOUR).floor();
        if h < SERIES_LEN as f64 {
            values[h as usize] += 1.0;
            any = true;
        }
    }
    if !any {
        return Err(Error::NoHostileComment(post.id.clone()));
    }
    Ok(HostilitySeries { post_id: post.id.clone(), values, smoothed: false })
}

/// Convolution with a normalized Gaussian kernel of `width` taps; near the
/// edges the kernel is truncated and renormalized.
pub fn smooth_values(x: &[f64], width: usize, sigma: f64) -> Vec<f64> {
    let half = (width / 2) as isize;
    let taps: Vec<f64> = (-half..=half).map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let n = x.len() as isize;
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            let mut norm = 0.0;
            for (t, d) in (-half..=half).enumerate() {
                let j = i + d;
                if (0..n).contains(&j) {
                    acc += taps[t] * x[j as usize];
                    norm += taps[t];
                }
            }
            acc / norm
        })
        .collect()
}

/// Five-tap, unit-sigma Gaussian smoothing of a raw series.
pub fn smooth(s: &HostilitySeries) -> HostilitySeries {
    HostilitySeries { post_id: s.post_id.clone(), values: smooth_values(&s.values, 5, 1.0), smoothed: true }
}

/// `shift(y, q)[i] = y[i - q]`, zero outside the support.
pub fn shift(y: &[f64], q: i32) -> Vec<f64> {
    let n = y.len() as i64;
    (0..n)
        .map(|i| {
            let j = i - q as i64;
            if (0..n).contains(&j) {
                y[j as usize]
            } else {
                0.0
            }
        })
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Distance {
    pub d: f64,
    pub q: i32,
    pub alpha: f64,
}

/// `min over |q| <= max_shift of ||x - a shift(y, q)|| / ||x||` with the
/// optimal scale `a` in closed form. Shifts are tried in order of
/// increasing magnitude, negative first; the first minimum wins.
pub fn ksc_distance(x: &[f64], y: &[f64], max_shift: usize) -> Result<Distance> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
    }
    let nx = norm(x);
    if nx == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let n = x.len() as i64;
    let max_shift = max_shift.min(x.len().saturating_sub(1)) as i32;
    let mut best = Distance { d: f64::INFINITY, q: 0, alpha: 0.0 };
    let mut order = vec![0i32];
    for s in 1..=max_shift {
        order.push(-s);
        order.push(s);
    }
    for q in order {
        let lo = (q as i64).max(0);
        let hi = (n + q as i64).min(n);
        let (mut xy, mut yy) = (0.0, 0.0);
        for i in lo..hi {
            let v = y[(i - q as i64) as usize];
            xy += x[i as usize] * v;
            yy += v * v;
        }
        let alpha = if yy > 0.0 { xy / yy } else { 0.0 };
        let mut r = 0.0;
        for i in 0..n {
            let j = i - q as i64;
            let v = if (0..n).contains(&j) { y[j as usize] } else { 0.0 };
            let e = x[i as usize] - alpha * v;
            r += e * e;
        }
        let d = r.sqrt() / nx;
        if d < best.d {
            best = Distance { d, q, alpha };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KscConfig {
    pub k: usize,
    pub max_shift: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KscConfig {
    fn default() -> Self {
        KscConfig { k: 4, max_shift: 24, max_iter: 100, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub k: usize,
    pub assignments: Vec<usize>,
    /// Shift aligning the assigned centroid to each series.
    pub shifts: Vec<i32>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances of each cluster's members.
    pub cluster_objective: Vec<f64>,
    /// Total objective after each assignment step.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ClusterResult {
    pub fn objective(&self) -> f64 {
        self.cluster_objective.iter().sum()
    }

    pub fn members(&self, c: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == c).collect()
    }
}

fn unit(x: &[f64]) -> Vec<f64> {
    let n = norm(x);
    x.iter().map(|v| v / n).collect()
}

/// Top eigenvector of `sum_i a_i a_i^T` by power iteration from `start`.
/// Maximizing this Rayleigh quotient minimizes the summed squared
/// distances of the aligned, normalized members `a_i`.
fn spectral_centroid(aligned: &[Vec<f64>], start: &[f64]) -> Vec<f64> {
    let t = start.len();
    let mut s = vec![0.0; t * t];
    for a in aligned {
        for i in 0..t {
            if a[i] == 0.0 {
                continue;
            }
            let ai = a[i];
            let row = &mut s[i * t..(i + 1) * t];
            for (r, &aj) in row.iter_mut().zip(a) {
                *r += ai * aj;
            }
        }
    }
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..t).map(|i| s[i * t..(i + 1) * t].iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    };
    let mut v = start.to_vec();
    if norm(&apply(&v)) == 0.0 {
        let mut sum = vec![0.0; t];
        for a in aligned {
            for (x, y) in sum.iter_mut().zip(a) {
                *x += y;
            }
        }
        v = sum;
    }
    if norm(&v) == 0.0 {
        return start.to_vec();
    }
    v = unit(&v);
    for _ in 0..10_000 {
        let w = apply(&v);
        let nw = norm(&w);
        if nw == 0.0 {
            break;
        }
        let w: Vec<f64> = w.iter().map(|x| x / nw).collect();
        let delta = w.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = w;
        if delta < 1e-10 {
            break;
        }
    }
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// Squared distance of every member to `centroid`.
fn member_cost(series: &[Vec<f64>], members: &[usize], centroid: &[f64], max_shift: usize) -> Result<f64> {
    let mut s = 0.0;
    for &i in members {
        s += ksc_distance(&series[i], centroid, max_shift)?.d.powi(2);
    }
    Ok(s)
}

/// K-SC clustering. Seeds with `k` distinct random members, then alternates
/// assignment, alignment and spectral centroid refinement until the
/// assignments stop changing or `max_iter` is reached. A refined centroid is
/// kept only if it does not raise its cluster's cost. A cluster left empty
/// is reseeded with the series farthest from its centroid.
pub fn ksc_cluster(series: &[Vec<f64>], cfg: &KscConfig) -> Result<ClusterResult> {
    let n = series.len();
    if cfg.k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1".into()));
    }
    if n < cfg.k {
        return Err(Error::TooFewSeries { needed: cfg.k, got: n });
    }
    let t = series[0].len();
    for s in series {
        if s.len() != t {
            return Err(Error::DimensionMismatch { expected: t, got: s.len() });
        }
        if norm(s) == 0.0 {
            return Err(Error::ZeroNorm);
        }
    }
    let mut r = rng(cfg.seed, 71);
    let mut seeds = index::sample(&mut r, n, cfg.k).into_vec();
    seeds.sort_unstable();
    let mut centroids: Vec<Vec<f64>> = seeds.iter().map(|&i| unit(&series[i])).collect();
    let mut assign = vec![usize::MAX; n];
    let mut shifts = vec![0i32; n];
    let mut dist = vec![0.0f64; n];
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iter.max(1) {
        iterations += 1;
        let mut next = vec![0usize; n];
        for i in 0..n {
            let mut best = (f64::INFINITY, 0usize, 0i32);
            for (c, mu) in centroids.iter().enumerate() {
                let d = ksc_distance(&series[i], mu, cfg.max_shift)?;
                if d.d < best.0 {
                    best = (d.d, c, d.q);
                }
            }
            next[i] = best.1;
            dist[i] = best.0;
            shifts[i] = best.2;
        }
        // empty-cluster repair
        for c in 0..cfg.k {
            if next.contains(&c) {
                continue;
            }
            let mut sizes = vec![0usize; cfg.k];
            next.iter().for_each(|&a| sizes[a] += 1);
            let far = (0..n)
                .filter(|&i| sizes[next[i]] > 1)
                .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)));
            if let Some(i) = far {
                log::debug!("reseeding empty cluster {c} with series {i}");
                next[i] = c;
                centroids[c] = unit(&series[i]);
                dist[i] = 0.0;
                shifts[i] = 0;
            }
        }
        trace.push(dist.iter().map(|d| d * d).sum::<f64>());
        if next == assign {
            converged = true;
            break;
        }
        assign = next;

        for c in 0..cfg.k {
            let members: Vec<usize> = (0..n).filter(|&i| assign[i] == c).collect();
            if members.is_empty() {
                continue;
            }
            let aligned: Vec<Vec<f64>> = members
                .iter()
                .map(|&i| {
                    let nx = norm(&series[i]);
                    shift(&series[i], -shifts[i]).into_iter().map(|v| v / nx).collect()
                })
                .collect();
            let candidate = spectral_centroid(&aligned, &centroids[c]);
            let old: f64 = members.iter().map(|&i| dist[i] * dist[i]).sum();
            let new = member_cost(series, &members, &candidate, cfg.max_shift)?;
            if new <= old {
                centroids[c] = candidate;
            }
        }
    }

    let mut cluster_objective = vec![0.0; cfg.k];
    for i in 0..n {
        cluster_objective[assign[i]] += dist[i] * dist[i];
    }
    Ok(ClusterResult {
        k: cfg.k,
        assignments: assign,
        shifts,
        centroids,
        cluster_objective,
        objective_trace: trace,
        iterations,
        converged,
    })
}

/// CSV tables describing a clustering of raw hourly series.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterExport {
    /// Per cluster: `hour,centroid,<post ids...>` with every column divided
    /// by its maximum; members are smoothed before scaling.
    pub clusters: Vec<String>,
    /// `cluster,size,mean_volume,mean_onset_hour,objective`.
    pub summary: String,
}

fn max_normalized(x: &[f64]) -> Vec<f64> {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m > 0.0 {
        x.iter().map(|v| v / m).collect()
    } else {
        x.to_vec()
    }
}

pub fn export_clusters(result: &ClusterResult, raw: &[HostilitySeries]) -> ClusterExport {
    let mut clusters = Vec::with_capacity(result.k);
    let mut summary = String::from("cluster,size,mean_volume,mean_onset_hour,objective\n");
    for c in 0..result.k {
        let members = result.members(c);
        let cols: Vec<Vec<f64>> = members
            .iter()
            .map(|&i| {
                let s = &raw[i];
                let v = if s.smoothed { s.values.clone() } else { smooth_values(&s.values, 5, 1.0) };
                max_normalized(&v)
            })
            .collect();
        let centroid = max_normalized(&result.centroids[c]);
        let mut csv = String::from("hour,centroid");
        for &i in &members {
            csv.push(',');
            csv.push_str(&raw[i].post_id);
        }
        csv.push('\n');
        for h in 0..centroid.len() {
            let _ = write!(csv, "{h},{}", centroid[h]);
            for col in &cols {
                let _ = write!(csv, ",{}", col[h]);
            }
            csv.push('\n');
        }
        clusters.push(csv);

        let volumes: Vec<f64> = members.iter().map(|&i| raw[i].values.iter().sum()).collect();
        let onsets: Vec<f64> = members
            .iter()
            .filter_map(|&i| raw[i].values.iter().position(|&v| v > 0.0).map(|h| h as f64))
            .collect();
        let avg = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        let _ = writeln!(
            summary,
            "{c},{},{},{},{}",
            members.len(),
            avg(&volumes),
            avg(&onsets),
            result.cluster_objective[c]
        );
    }
    ClusterExport { clusters, summary }
}
