//! Comment-thread data model and JSONL interchange.
//!
//! A [`Post`] carries its absolute creation time and a comment list whose
//! timestamps are relative to that creation time. The [`Corpus`] owns the
//! posts plus two indices: posts by author and comments by user, both in
//! absolute-time order, which the history features query.

mod stats;
mod synth;

pub use stats::{corpus_stats, median, AggregateCounts, StatsReport};
pub use synth::{generate_synthetic, Archetype, SynthConfig, SynthCorpus};

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const SECONDS_PER_DAY: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comment {
    pub id: String,
    pub author: String,
    pub text: String,
    /// Seconds since the parent post was created.
    pub t: f64,
    pub hostile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub id: String,
    pub author: String,
    /// Absolute creation time, epoch seconds.
    pub created_at: f64,
    pub comments: Vec<Comment>,
}

impl Post {
    pub fn is_hostile(&self) -> bool {
        self.comments.iter().any(|c| c.hostile)
    }

    pub fn first_hostile(&self) -> Option<usize> {
        self.comments.iter().position(|c| c.hostile)
    }

    pub fn hostile_count(&self) -> usize {
        self.comments.iter().filter(|c| c.hostile).count()
    }

    pub fn abs_time(&self, comment: usize) -> f64 {
        self.created_at + self.comments[comment].t
    }

    /// Sorts comments by (t, id); ties on t resolve lexicographically by id.
    pub fn sort_comments(&mut self) {
        self.comments.sort_by(|a, b| a.t.total_cmp(&b.t).then_with(|| a.id.cmp(&b.id)));
    }
}

/// A comment located inside the corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommentRef {
    pub post: usize,
    pub comment: usize,
    pub abs_time: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    posts: Vec<Post>,
    post_index: HashMap<String, usize>,
    by_author: HashMap<String, Vec<usize>>,
    by_user: HashMap<String, Vec<CommentRef>>,
}

impl PartialEq for Corpus {
    fn eq(&self, other: &Self) -> bool {
        self.posts == other.posts
    }
}

impl Corpus {
    /// Validates posts, sorts their comments and builds the indices.
    pub fn new(posts: Vec<Post>) -> Result<Self> {
        let mut corpus = Corpus::default();
        for (i, post) in posts.into_iter().enumerate() {
            corpus.push(post, i + 1)?;
        }
        corpus.build_indices();
        Ok(corpus)
    }

    fn push(&mut self, mut post: Post, line: usize) -> Result<()> {
        if self.post_index.contains_key(&post.id) {
            return Err(Error::DuplicatePost { line, id: post.id });
        }
        validate_post(&post, line)?;
        post.sort_comments();
        self.post_index.insert(post.id.clone(), self.posts.len());
        self.posts.push(post);
        Ok(())
    }

    fn build_indices(&mut self) {
        self.by_author.clear();
        self.by_user.clear();
        for (pi, post) in self.posts.iter().enumerate() {
            self.by_author.entry(post.author.clone()).or_default().push(pi);
            for (ci, c) in post.comments.iter().enumerate() {
                self.by_user.entry(c.author.clone()).or_default().push(CommentRef {
                    post: pi,
                    comment: ci,
                    abs_time: post.abs_time(ci),
                });
            }
        }
        let posts = &self.posts;
        for list in self.by_author.values_mut() {
            list.sort_by(|&a, &b| {
                posts[a]
                    .created_at
                    .total_cmp(&posts[b].created_at)
                    .then_with(|| posts[a].id.cmp(&posts[b].id))
            });
        }
        for list in self.by_user.values_mut() {
            list.sort_by(|a, b| {
                a.abs_time
                    .total_cmp(&b.abs_time)
                    .then_with(|| posts[a.post].id.cmp(&posts[b.post].id))
                    .then_with(|| {
                        posts[a.post].comments[a.comment]
                            .id
                            .cmp(&posts[b.post].comments[b.comment].id)
                    })
            });
        }
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn post(&self, idx: usize) -> &Post {
        &self.posts[idx]
    }

    pub fn len(&self) -> usize {
        self.posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.posts.is_empty()
    }

    pub fn index_of(&self, post_id: &str) -> Option<usize> {
        self.post_index.get(post_id).copied()
    }

    pub fn comment_count(&self) -> usize {
        self.posts.iter().map(|p| p.comments.len()).sum()
    }

    /// Posts authored by `author`, oldest first.
    pub fn posts_by_author(&self, author: &str) -> &[usize] {
        self.by_author.get(author).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Comments written by `user` anywhere in the corpus, oldest first.
    pub fn comments_by_user(&self, user: &str) -> &[CommentRef] {
        self.by_user.get(user).map(Vec::as_slice).unwrap_or(&[])
    }

    /// The author's latest post created strictly before the given post.
    pub fn previous_post(&self, post: usize) -> Option<usize> {
        let target = &self.posts[post];
        self.posts_by_author(&target.author)
            .iter()
            .copied()
            .filter(|&p| p != post && self.posts[p].created_at < target.created_at)
            .last()
    }

    /// The user's latest comment strictly before `before` (absolute seconds)
    /// on any post other than `exclude_post`.
    pub fn latest_comment_before(
        &self,
        user: &str,
        before: f64,
        exclude_post: usize,
    ) -> Option<CommentRef> {
        self.comments_by_user(user)
            .iter()
            .rev()
            .find(|r| r.abs_time < before && r.post != exclude_post)
            .copied()
    }

    pub fn comment(&self, r: CommentRef) -> &Comment {
        &self.posts[r.post].comments[r.comment]
    }
}

fn validate_post(post: &Post, line: usize) -> Result<()> {
    if !post.created_at.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("post {} has non-finite created_at", post.id),
        });
    }
    let mut seen = HashSet::new();
    for c in &post.comments {
        if !(c.t.is_finite() && c.t >= 0.0) {
            return Err(Error::InvalidTimestamp { line, comment: c.id.clone(), t: c.t });
        }
        if !seen.insert(c.id.as_str()) {
            return Err(Error::DuplicateComment { post: post.id.clone(), comment: c.id.clone() });
        }
    }
    Ok(())
}

/// Reads a JSONL corpus: one post object per line, blank lines ignored.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Corpus> {
    let mut corpus = Corpus::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let post: Post = serde_json::from_str(&line)
            .map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
        corpus.push(post, line_no)?;
    }
    corpus.build_indices();
    Ok(corpus)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    read_corpus(BufReader::new(File::open(path)?))
}

pub fn write_corpus<W: Write>(corpus: &Corpus, mut w: W) -> Result<()> {
    for post in corpus.posts() {
        serde_json::to_writer(&mut w, post)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    write_corpus(corpus, BufWriter::new(File::create(path)?))
}
