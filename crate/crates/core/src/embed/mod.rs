//! Word embeddings: skip-gram with negative sampling, a character n-gram
//! (subword) variant, and a plain-text table format.

mod io;
mod sgns;

pub use io::{load_table, ngram_path, save_table};
pub use sgns::{
    sgns_loss_grad, subword_loss_grad, train_sgns, train_subword_sgns, PairGrad, SgnsConfig,
    TrainLog,
};

use std::borrow::Cow;
use std::collections::HashMap;

/// Character n-grams (by codepoint) of `<word>`, lengths `min_n..=max_n`,
/// excluding the bracketed word itself. Repeated n-grams are kept.
pub fn char_ngrams(word: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let chars: Vec<char> = format!("<{word}>").chars().collect();
    let mut out = Vec::new();
    for n in min_n..=max_n {
        if n > chars.len() {
            break;
        }
        for start in 0..=chars.len() - n {
            if n == chars.len() {
                continue;
            }
            out.push(chars[start..start + n].iter().collect());
        }
    }
    out
}

/// Key under which a subword table stores a whole-word vector.
pub fn word_key(word: &str) -> String {
    format!("<{word}>")
}

/// Subword units of a word: its whole-word key followed by its n-grams.
pub fn subword_units(word: &str, min_n: usize, max_n: usize) -> Vec<String> {
    let mut units = vec![word_key(word)];
    units.extend(char_ngrams(word, min_n, max_n));
    units
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: HashMap<String, Vec<f32>>,
    ngrams: Option<HashMap<String, Vec<f32>>>,
    ngram_range: (usize, usize),
    config: Option<SgnsConfig>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable { dim, words: HashMap::new(), ngrams: None, ngram_range: (3, 6), config: None }
    }

    /// Builds a subword table from unit vectors; each vocabulary word's
    /// stored vector is its composition.
    pub fn from_subwords<I: IntoIterator<Item = String>>(
        dim: usize,
        units: HashMap<String, Vec<f32>>,
        vocabulary: I,
        ngram_range: (usize, usize),
    ) -> Self {
        let mut t = EmbeddingTable {
            dim,
            words: HashMap::new(),
            ngrams: Some(units),
            ngram_range,
            config: None,
        };
        for w in vocabulary {
            if let Some(v) = t.compose(&w) {
                t.words.insert(w, v);
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_subword(&self) -> bool {
        self.ngrams.is_some()
    }

    pub fn config(&self) -> Option<&SgnsConfig> {
        self.config.as_ref()
    }

    pub(crate) fn set_config(&mut self, cfg: SgnsConfig) {
        self.ngram_range = (cfg.min_n, cfg.max_n);
        self.config = Some(cfg);
    }

    pub fn insert(&mut self, word: impl Into<String>, v: Vec<f32>) {
        assert_eq!(v.len(), self.dim, "vector length must equal the table dimension");
        self.words.insert(word.into(), v);
    }

    pub fn words(&self) -> &HashMap<String, Vec<f32>> {
        &self.words
    }

    pub fn ngrams(&self) -> Option<&HashMap<String, Vec<f32>>> {
        self.ngrams.as_ref()
    }

    pub(crate) fn set_ngrams(&mut self, ngrams: HashMap<String, Vec<f32>>) {
        self.ngrams = Some(ngrams);
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.words.get(word).map(Vec::as_slice)
    }

    /// Mean of the unit vectors available for `word`; `None` when the table
    /// has no n-grams or none of the word's units are known.
    pub fn compose(&self, word: &str) -> Option<Vec<f32>> {
        let ngrams = self.ngrams.as_ref()?;
        let (lo, hi) = self.ngram_range;
        let mut acc = vec![0f32; self.dim];
        let mut n = 0usize;
        for unit in subword_units(word, lo, hi) {
            if let Some(v) = ngrams.get(&unit) {
                for (a, x) in acc.iter_mut().zip(v) {
                    *a += x;
                }
                n += 1;
            }
        }
        if n == 0 {
            return None;
        }
        let inv = 1.0 / n as f32;
        acc.iter_mut().for_each(|a| *a *= inv);
        Some(acc)
    }

    /// Stored vector, or for subword tables a composition for unseen words.
    pub fn lookup(&self, word: &str) -> Option<Cow<'_, [f32]>> {
        match self.words.get(word) {
            Some(v) => Some(Cow::Borrowed(v.as_slice())),
            None => self.compose(word).map(Cow::Owned),
        }
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (&x, &y) in a.iter().zip(b) {
        dot += x as f64 * y as f64;
        na += x as f64 * x as f64;
        nb += y as f64 * y as f64;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}
