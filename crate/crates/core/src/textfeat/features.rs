use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::lexicon::{lexicon_features, Lexicons, LEXICON_FEATURE_NAMES};
use super::tokenize::{tokenize, MENTION};
use super::vocab::{bow, Vocabulary};
use crate::corpus::{Corpus, Post};
use crate::embed::EmbeddingTable;
use crate::trend::{trend_features, TREND_FEATURE_NAMES};
use crate::util::sha256_hex;
use crate::{Error, Result};

/// Feature groups, in canonical layout order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "U")]
    Unigram,
    #[serde(rename = "lex")]
    Lex,
    #[serde(rename = "w2v")]
    W2v,
    #[serde(rename = "n-w2v")]
    NW2v,
    #[serde(rename = "final-com")]
    FinalCom,
    #[serde(rename = "prev-com")]
    PrevCom,
    #[serde(rename = "prev-post")]
    PrevPost,
    #[serde(rename = "trend")]
    Trend,
    #[serde(rename = "user")]
    User,
}

impl Group {
    pub const ALL: [Group; 9] = [
        Group::Unigram,
        Group::Lex,
        Group::W2v,
        Group::NW2v,
        Group::FinalCom,
        Group::PrevCom,
        Group::PrevPost,
        Group::Trend,
        Group::User,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Group::Unigram => "U",
            Group::Lex => "lex",
            Group::W2v => "w2v",
            Group::NW2v => "n-w2v",
            Group::FinalCom => "final-com",
            Group::PrevCom => "prev-com",
            Group::PrevPost => "prev-post",
            Group::Trend => "trend",
            Group::User => "user",
        }
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Group::ALL
            .iter()
            .copied()
            .find(|g| g.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownGroup(s.to_string()))
    }
}

impl std::fmt::Display for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Values of one group with group-local indices: unigram counts first
/// (indices below the vocabulary size), then the dense block in order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupBlock {
    pub sparse: Vec<(u32, f64)>,
    pub dense: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpan {
    pub group: Group,
    pub offset: usize,
    pub sparse_len: usize,
    pub dense_names: Vec<String>,
}

impl GroupSpan {
    pub fn len(&self) -> usize {
        self.sparse_len + self.dense_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Index layout of a feature space: which ranges belong to which group.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    spans: Vec<GroupSpan>,
    vocab: Arc<Vocabulary>,
    dim: usize,
    fingerprint: String,
}

fn embed_names(prefix: &str, dim: usize) -> Vec<String> {
    (0..dim)
        .map(|i| format!("{prefix}max_{i}"))
        .chain((0..dim).map(|i| format!("{prefix}avg_{i}")))
        .collect()
}

fn lex_names(prefix: &str) -> Vec<String> {
    LEXICON_FEATURE_NAMES.iter().map(|n| format!("{prefix}{n}")).collect()
}

impl Layout {
    /// Layout over the given groups (deduplicated, in canonical order).
    pub fn new(groups: &[Group], res: &FeatureResources) -> Result<Self> {
        let mut groups = groups.to_vec();
        groups.sort();
        groups.dedup();
        let v = res.vocab.len();
        let mut spans = Vec::with_capacity(groups.len());
        let mut offset = 0;
        for g in groups {
            let (sparse_len, dense_names) = match g {
                Group::Unigram => (v, Vec::new()),
                Group::Lex => (0, lex_names("")),
                Group::W2v => (0, embed_names("", res.word_table()?.dim())),
                Group::NW2v => (0, embed_names("", res.subword_table()?.dim())),
                Group::FinalCom | Group::PrevCom | Group::PrevPost => {
                    let mut names = embed_names("n-w2v:", res.subword_table()?.dim());
                    names.extend(lex_names("lex:"));
                    if g != Group::FinalCom {
                        names.push("no_history".into());
                    }
                    (v, names)
                }
                Group::Trend => (0, TREND_FEATURE_NAMES.iter().map(|s| s.to_string()).collect()),
                Group::User => {
                    (0, vec!["unique_user_ratio".to_string(), "mention_fraction".to_string()])
                }
            };
            let span = GroupSpan { group: g, offset, sparse_len, dense_names };
            offset += span.len();
            spans.push(span);
        }
        let mut fp = String::new();
        for s in &spans {
            let _ = writeln!(fp, "{}|{}|{}", s.group, s.sparse_len, s.dense_names.join(","));
        }
        fp.push_str(&res.vocab.tokens().join("\n"));
        let fingerprint = sha256_hex(fp.as_bytes())[..16].to_string();
        Ok(Layout { spans, vocab: res.vocab.clone(), dim: offset, fingerprint })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn spans(&self) -> &[GroupSpan] {
        &self.spans
    }

    pub fn groups(&self) -> Vec<Group> {
        self.spans.iter().map(|s| s.group).collect()
    }

    pub fn span(&self, g: Group) -> Option<&GroupSpan> {
        self.spans.iter().find(|s| s.group == g)
    }

    fn span_of(&self, idx: usize) -> &GroupSpan {
        let i = self.spans.partition_point(|s| s.offset + s.len() <= idx);
        &self.spans[i]
    }

    pub fn group_of(&self, idx: usize) -> Group {
        self.span_of(idx).group
    }

    pub fn is_dense(&self, idx: usize) -> bool {
        let s = self.span_of(idx);
        idx - s.offset >= s.sparse_len
    }

    pub fn dense_mask(&self) -> Vec<bool> {
        let mut m = Vec::with_capacity(self.dim);
        for s in &self.spans {
            m.extend(std::iter::repeat_n(false, s.sparse_len));
            m.extend(std::iter::repeat_n(true, s.dense_names.len()));
        }
        m
    }

    pub fn feature_name(&self, idx: usize) -> String {
        let s = self.span_of(idx);
        let local = idx - s.offset;
        if local < s.sparse_len {
            if s.group == Group::Unigram {
                format!("U:{}", self.vocab.token(local as u32))
            } else {
                format!("{}:U:{}", s.group, self.vocab.token(local as u32))
            }
        } else {
            format!("{}:{}", s.group, s.dense_names[local - s.sparse_len])
        }
    }

    pub fn feature_names(&self) -> Vec<String> {
        (0..self.dim).map(|i| self.feature_name(i)).collect()
    }
}

/// Sparse feature vector bound to its layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    layout: Arc<Layout>,
    entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    /// Non-zero entries, indices strictly increasing.
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn get(&self, idx: usize) -> f64 {
        match self.entries.binary_search_by_key(&(idx as u32), |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.layout.dim()];
        for &(i, x) in &self.entries {
            v[i as usize] = x;
        }
        v
    }

    /// Entries of one group with group-local indices.
    pub fn group_entries(&self, g: Group) -> Vec<(usize, f64)> {
        match self.layout.span(g) {
            None => Vec::new(),
            Some(s) => self
                .entries
                .iter()
                .filter(|(i, _)| s.range().contains(&(*i as usize)))
                .map(|&(i, x)| (i as usize - s.offset, x))
                .collect(),
        }
    }

    /// `group,index,name,value` rows for the non-zero entries.
    pub fn dump_csv(&self) -> String {
        let mut s = String::from("group,index,name,value\n");
        for &(i, x) in &self.entries {
            let i = i as usize;
            let _ = writeln!(
                s,
                "{},{},{},{}",
                self.layout.group_of(i),
                i,
                csv_field(&self.layout.feature_name(i)),
                x
            );
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Shared, read-only inputs to featurization.
#[derive(Debug, Clone)]
pub struct FeatureResources<'a> {
    pub vocab: Arc<Vocabulary>,
    pub lexicons: &'a Lexicons,
    pub word_table: Option<&'a EmbeddingTable>,
    pub subword_table: Option<&'a EmbeddingTable>,
    /// Per-post comment hostility posteriors, aligned to comment order.
    pub posteriors: Option<&'a HashMap<String, Vec<f64>>>,
    pub trend_threshold: f64,
}

impl<'a> FeatureResources<'a> {
    pub fn new(vocab: Arc<Vocabulary>, lexicons: &'a Lexicons) -> Self {
        FeatureResources {
            vocab,
            lexicons,
            word_table: None,
            subword_table: None,
            posteriors: None,
            trend_threshold: 0.3,
        }
    }

    fn word_table(&self) -> Result<&'a EmbeddingTable> {
        self.word_table.ok_or_else(|| Error::MissingResource("word embedding table".into()))
    }

    fn subword_table(&self) -> Result<&'a EmbeddingTable> {
        self.subword_table.ok_or_else(|| Error::MissingResource("subword embedding table".into()))
    }
}

/// Per-dimension max over the token vectors followed by the per-dimension
/// mean. Tokens without a vector are skipped; no vectors gives zeros.
pub fn embed_aggregate<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Vec<f64> {
    let d = table.dim();
    let mut max = vec![f64::NEG_INFINITY; d];
    let mut sum = vec![0.0f64; d];
    let mut n = 0usize;
    for t in tokens {
        if let Some(v) = table.lookup(t.as_ref()) {
            for (i, &x) in v.iter().enumerate() {
                let x = x as f64;
                if x > max[i] {
                    max[i] = x;
                }
                sum[i] += x;
            }
            n += 1;
        }
    }
    if n == 0 {
        return vec![0.0; 2 * d];
    }
    let inv = 1.0 / n as f64;
    max.into_iter().chain(sum.into_iter().map(|s| s * inv)).collect()
}

/// Tokens of every comment in a corpus, computed once.
#[derive(Debug, Clone)]
pub struct TokenCache {
    tokens: Vec<Vec<Vec<String>>>,
}

impl TokenCache {
    pub fn new(corpus: &Corpus) -> Self {
        TokenCache {
            tokens: corpus
                .posts()
                .iter()
                .map(|p| p.comments.iter().map(|c| tokenize(&c.text)).collect())
                .collect(),
        }
    }

    pub fn comment(&self, post: usize, comment: usize) -> &[String] {
        &self.tokens[post][comment]
    }

    pub fn post(&self, post: usize) -> &[Vec<String>] {
        &self.tokens[post]
    }
}

/// The token material of one forecasting instance (a post observed up to
/// its `k`-th comment), from which every group can be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceText {
    pub post_id: String,
    pub k: usize,
    /// Concatenated tokens of the observed comments.
    pub observed: Vec<String>,
    pub final_comment: Vec<String>,
    /// Concatenated latest outside comments of observed commenters, if any.
    pub prev_comments: Option<Vec<String>>,
    /// Concatenated comments of the author's previous post, if it exists.
    pub prev_post: Option<Vec<String>>,
    pub user: [f64; 2],
}

impl InstanceText {
    pub fn new(corpus: &Corpus, post: usize, k: usize, cache: Option<&TokenCache>) -> Result<Self> {
        let p = corpus.post(post);
        check_k(p, k)?;
        let toks = |pi: usize, ci: usize| -> Vec<String> {
            match cache {
                Some(c) => c.comment(pi, ci).to_vec(),
                None => tokenize(&corpus.post(pi).comments[ci].text),
            }
        };
        let per_comment: Vec<Vec<String>> = (0..k).map(|j| toks(post, j)).collect();
        let observed: Vec<String> = per_comment.iter().flatten().cloned().collect();
        let final_comment = per_comment[k - 1].clone();

        let forecast_time = p.abs_time(k - 1);
        let mut seen = HashSet::new();
        let mut prev = Vec::new();
        let mut any_history = false;
        for c in &p.comments[..k] {
            if !seen.insert(c.author.as_str()) {
                continue;
            }
            if let Some(r) = corpus.latest_comment_before(&c.author, forecast_time, post) {
                any_history = true;
                prev.extend(toks(r.post, r.comment));
            }
        }
        let prev_comments = any_history.then_some(prev);
        let prev_post = corpus.previous_post(post).map(|pp| {
            (0..corpus.post(pp).comments.len()).flat_map(|j| toks(pp, j)).collect()
        });
        let unique = seen.len() as f64 / k as f64;
        let mentions =
            per_comment.iter().filter(|t| t.iter().any(|x| x == MENTION)).count() as f64 / k as f64;
        Ok(InstanceText {
            post_id: p.id.clone(),
            k,
            observed,
            final_comment,
            prev_comments,
            prev_post,
            user: [unique, mentions],
        })
    }

    /// Unigram part of a group (empty for groups without one).
    pub fn sparse_part(&self, g: Group, vocab: &Vocabulary) -> Vec<(u32, f64)> {
        match g {
            Group::Unigram => bow(&self.observed, vocab),
            Group::FinalCom => bow(&self.final_comment, vocab),
            Group::PrevCom => self.prev_comments.as_deref().map_or_else(Vec::new, |t| bow(t, vocab)),
            Group::PrevPost => self.prev_post.as_deref().map_or_else(Vec::new, |t| bow(t, vocab)),
            _ => Vec::new(),
        }
    }

    /// Dense part of a group; independent of the vocabulary.
    pub fn dense_part(&self, g: Group, res: &FeatureResources) -> Result<Vec<f64>> {
        let text_dense = |tokens: Option<&[String]>, indicator: bool| -> Result<Vec<f64>> {
            let table = res.subword_table()?;
            let mut v = match tokens {
                Some(t) => {
                    let mut v = embed_aggregate(t, table);
                    v.extend(lexicon_features(t, res.lexicons));
                    v
                }
                None => vec![0.0; 2 * table.dim() + LEXICON_FEATURE_NAMES.len()],
            };
            if indicator {
                v.push(if tokens.is_none() { 1.0 } else { 0.0 });
            }
            Ok(v)
        };
        Ok(match g {
            Group::Unigram => Vec::new(),
            Group::Lex => lexicon_features(&self.observed, res.lexicons).to_vec(),
            Group::W2v => embed_aggregate(&self.observed, res.word_table()?),
            Group::NW2v => embed_aggregate(&self.observed, res.subword_table()?),
            Group::FinalCom => text_dense(Some(&self.final_comment), false)?,
            Group::PrevCom => text_dense(self.prev_comments.as_deref(), true)?,
            Group::PrevPost => text_dense(self.prev_post.as_deref(), true)?,
            Group::Trend => {
                let all = res
                    .posteriors
                    .ok_or_else(|| Error::MissingResource("comment posteriors".into()))?;
                let ps = all.get(&self.post_id).ok_or_else(|| {
                    Error::MissingResource(format!("posteriors for post {}", self.post_id))
                })?;
                if ps.len() < self.k {
                    return Err(Error::ObservedOutOfRange { k: self.k, n: ps.len() });
                }
                trend_features(&ps[..self.k], res.trend_threshold)?.to_vec()
            }
            Group::User => self.user.to_vec(),
        })
    }

    pub fn block(&self, g: Group, res: &FeatureResources) -> Result<GroupBlock> {
        Ok(GroupBlock { sparse: self.sparse_part(g, &res.vocab), dense: self.dense_part(g, res)? })
    }
}

fn check_k(p: &Post, k: usize) -> Result<()> {
    if k == 0 || k > p.comments.len() {
        return Err(Error::ObservedOutOfRange { k, n: p.comments.len() });
    }
    Ok(())
}

/// Concatenates per-group blocks (in layout order) into one vector.
pub fn assemble_blocks(layout: &Arc<Layout>, blocks: &[GroupBlock]) -> Result<FeatureVector> {
    if blocks.len() != layout.spans().len() {
        return Err(Error::DimensionMismatch { expected: layout.spans().len(), got: blocks.len() });
    }
    let mut entries = Vec::new();
    for (span, block) in layout.spans().iter().zip(blocks) {
        if block.dense.len() != span.dense_names.len() {
            return Err(Error::DimensionMismatch {
                expected: span.dense_names.len(),
                got: block.dense.len(),
            });
        }
        for &(i, x) in &block.sparse {
            if i as usize >= span.sparse_len {
                return Err(Error::DimensionMismatch { expected: span.sparse_len, got: i as usize + 1 });
            }
            if x != 0.0 {
                entries.push(((span.offset + i as usize) as u32, x));
            }
        }
        for (j, &x) in block.dense.iter().enumerate() {
            if x != 0.0 {
                entries.push(((span.offset + span.sparse_len + j) as u32, x));
            }
        }
    }
    Ok(FeatureVector { layout: layout.clone(), entries })
}

/// Feature vector of post `post` observed up to its `k`-th comment over
/// exactly the requested groups.
pub fn assemble(
    corpus: &Corpus,
    post: usize,
    k: usize,
    layout: &Arc<Layout>,
    res: &FeatureResources,
) -> Result<FeatureVector> {
    let text = InstanceText::new(corpus, post, k, None)?;
    let blocks = layout
        .spans()
        .iter()
        .map(|s| text.block(s.group, res))
        .collect::<Result<Vec<_>>>()?;
    assemble_blocks(layout, &blocks)
}

/// Unigram, subword-embedding and lexicon features of comment `k` alone.
pub fn final_comment_features(
    corpus: &Corpus,
    post: usize,
    k: usize,
    res: &FeatureResources,
) -> Result<GroupBlock> {
    InstanceText::new(corpus, post, k, None)?.block(Group::FinalCom, res)
}

/// Features of the commenters' latest comments made elsewhere before the
/// forecast time, plus a missing-history indicator.
pub fn prev_comment_features(
    corpus: &Corpus,
    post: usize,
    k: usize,
    res: &FeatureResources,
) -> Result<GroupBlock> {
    InstanceText::new(corpus, post, k, None)?.block(Group::PrevCom, res)
}

/// Features of all comments on the author's previous post, plus a
/// missing-history indicator.
pub fn prev_post_features(corpus: &Corpus, post: usize, res: &FeatureResources) -> Result<GroupBlock> {
    let k = corpus.post(post).comments.len().max(1);
    if corpus.post(post).comments.is_empty() {
        // the block does not depend on observed comments
        let prev = corpus.previous_post(post).map(|pp| {
            corpus.post(pp).comments.iter().flat_map(|c| tokenize(&c.text)).collect()
        });
        let text = InstanceText {
            post_id: corpus.post(post).id.clone(),
            k,
            observed: Vec::new(),
            final_comment: Vec::new(),
            prev_comments: None,
            prev_post: prev,
            user: [0.0; 2],
        };
        return text.block(Group::PrevPost, res);
    }
    InstanceText::new(corpus, post, k, None)?.block(Group::PrevPost, res)
}

/// (unique commenters / k, share of observed comments with a mention).
pub fn user_activity_features(post: &Post, k: usize) -> Result<[f64; 2]> {
    check_k(post, k)?;
    let obs = &post.comments[..k];
    let unique = obs.iter().map(|c| c.author.as_str()).collect::<HashSet<_>>().len();
    let mentions = obs.iter().filter(|c| tokenize(&c.text).iter().any(|t| t == MENTION)).count();
    Ok([unique as f64 / k as f64, mentions as f64 / k as f64])
}
