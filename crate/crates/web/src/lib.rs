//! Browser bindings: corpus rank curves, K-SC clustering of a generated
//! corpus, and an explorer for the shift/scale-invariant distance and the
//! trend features. Every export returns a JSON string.

use hostility_core::corpus::{corpus_stats, generate_synthetic, SynthConfig};
use hostility_core::ksc::{
    build_series, ksc_cluster, ksc_distance, shift, smooth, KscConfig, SERIES_LEN,
};
use hostility_core::trend::{trend_features, TREND_FEATURE_NAMES};
use hostility_core::Result;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct Curve {
    pub name: &'static str,
    pub values: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct CorpusView {
    pub posts: usize,
    pub hostile_posts: usize,
    pub comments: usize,
    pub hostile_comments: usize,
    pub users: usize,
    pub curves: Vec<Curve>,
}

pub fn corpus_view(seed: u64, n_posts: usize) -> Result<CorpusView> {
    let cfg = SynthConfig { seed, n_posts, ..Default::default() };
    let corpus = generate_synthetic(&cfg)?.corpus;
    let st = corpus_stats(&corpus)?;
    let c = &st.counts;
    Ok(CorpusView {
        posts: c.posts,
        hostile_posts: c.hostile_posts,
        comments: c.comments,
        hostile_comments: c.hostile_comments,
        users: c.users,
        curves: st.series().into_iter().map(|(name, v)| Curve { name, values: v.to_vec() }).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct ClusterView {
    pub size: usize,
    pub mean_volume: f64,
    pub mean_onset_hour: f64,
    /// Max-normalized centroid, one value per hour.
    pub centroid: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct ClusteringView {
    pub series: usize,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub clusters: Vec<ClusterView>,
}

pub fn clustering_view(seed: u64, n_posts: usize, k: usize, max_shift: usize) -> Result<ClusteringView> {
    let corpus = generate_synthetic(&SynthConfig { seed, n_posts, ..Default::default() })?.corpus;
    let raw = corpus
        .posts()
        .iter()
        .filter(|p| p.is_hostile())
        .filter_map(|p| build_series(p).ok())
        .collect::<Vec<_>>();
    let smoothed: Vec<Vec<f64>> = raw.iter().map(|s| smooth(s).values).collect();
    let res = ksc_cluster(&smoothed, &KscConfig { k, max_shift, seed, ..Default::default() })?;
    let clusters = (0..res.k)
        .map(|c| {
            let members = res.members(c);
            let volumes: Vec<f64> = members.iter().map(|&i| raw[i].values.iter().sum()).collect();
            let onsets: Vec<f64> = members
                .iter()
                .filter_map(|&i| raw[i].values.iter().position(|&v| v > 0.0).map(|h| h as f64))
                .collect();
            let peak = res.centroids[c].iter().copied().fold(0.0, f64::max);
            ClusterView {
                size: members.len(),
                mean_volume: mean(&volumes),
                mean_onset_hour: mean(&onsets),
                centroid: res.centroids[c].iter().map(|v| if peak > 0.0 { v / peak } else { *v }).collect(),
            }
        })
        .collect();
    Ok(ClusteringView {
        series: raw.len(),
        iterations: res.iterations,
        objective_trace: res.objective_trace,
        clusters,
    })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// A Gaussian bump over the series window.
pub fn bump(center: f64, width: f64, scale: f64) -> Vec<f64> {
    (0..SERIES_LEN).map(|i| scale * (-((i as f64 - center) / width).powi(2) / 2.0).exp()).collect()
}

#[derive(Debug, Serialize)]
pub struct DistanceView {
    pub distance: f64,
    pub shift: i32,
    pub scale: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `alpha * shift(y, q)`, the copy of `y` closest to `x`.
    pub aligned: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn distance_view(
    cx: f64,
    wx: f64,
    sx: f64,
    cy: f64,
    wy: f64,
    sy: f64,
    max_shift: usize,
) -> Result<DistanceView> {
    let x = bump(cx, wx, sx);
    let y = bump(cy, wy, sy);
    let d = ksc_distance(&x, &y, max_shift)?;
    let aligned = shift(&y, d.q).into_iter().map(|v| v * d.alpha).collect();
    Ok(DistanceView { distance: d.d, shift: d.q, scale: d.alpha, x, y, aligned })
}

#[derive(Debug, Serialize)]
pub struct TrendView {
    pub names: [&'static str; 4],
    pub values: [f64; 4],
}

/// Trend features of comma- or space-separated posteriors.
pub fn trend_view(posteriors: &str, threshold: f64) -> std::result::Result<TrendView, String> {
    let ps = posteriors
        .split([',', ' ', '\n', '\t'])
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| format!("not a number: {s}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(format!("posterior {p} outside [0, 1]"));
    }
    let values = trend_features(&ps, threshold).map_err(|e| e.to_string())?;
    Ok(TrendView { names: TREND_FEATURE_NAMES, values })
}

fn to_js<T: Serialize, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<String, JsValue> {
    let v = r.map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = corpusView)]
pub fn corpus_view_js(seed: u32, n_posts: u32) -> std::result::Result<String, JsValue> {
    to_js(corpus_view(seed as u64, n_posts as usize))
}

#[wasm_bindgen(js_name = clusteringView)]
pub fn clustering_view_js(seed: u32, n_posts: u32, k: u32, max_shift: u32) -> std::result::Result<String, JsValue> {
    to_js(clustering_view(seed as u64, n_posts as usize, k as usize, max_shift as usize))
}

#[allow(clippy::too_many_arguments)]
#[wasm_bindgen(js_name = distanceView)]
pub fn distance_view_js(
    cx: f64,
    wx: f64,
    sx: f64,
    cy: f64,
    wy: f64,
    sy: f64,
    max_shift: u32,
) -> std::result::Result<String, JsValue> {
    to_js(distance_view(cx, wx, sx, cy, wy, sy, max_shift as usize))
}

#[wasm_bindgen(js_name = trendView)]
pub fn trend_view_js(posteriors: &str, threshold: f64) -> std::result::Result<String, JsValue> {
    to_js(trend_view(posteriors, threshold))
}
