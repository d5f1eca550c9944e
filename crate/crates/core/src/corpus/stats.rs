//! Rank-count statistics of a corpus.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use super::{Corpus, SECONDS_PER_DAY, SECONDS_PER_HOUR};
use crate::{Error, Result};

/// Aggregate counts laid out like the usual dataset summary table.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCounts {
    pub posts: usize,
    pub hostile_posts: usize,
    pub non_hostile_posts: usize,
    pub comments: usize,
    pub hostile_comments: usize,
    pub users: usize,
}

/// Each series is sorted in descending order (rank 1 first).
#[derive(Debug, Clone, PartialEq)]
pub struct StatsReport {
    pub comments_per_post: Vec<f64>,
    pub hostile_per_post: Vec<f64>,
    /// Time of the last comment, in days after post creation.
    pub duration_days: Vec<f64>,
    /// Hours from post creation to the first hostile comment (hostile posts only).
    pub first_hostile_hours: Vec<f64>,
    pub unique_users_per_post: Vec<f64>,
    pub counts: AggregateCounts,
}

fn rank_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn corpus_stats(corpus: &Corpus) -> Result<StatsReport> {
    if corpus.is_empty() {
        return Err(Error::InsufficientData("corpus has no posts".into()));
    }
    let posts = corpus.posts();
    let mut users = HashSet::new();
    for p in posts {
        users.insert(p.author.as_str());
        users.extend(p.comments.iter().map(|c| c.author.as_str()));
    }
    let counts = AggregateCounts {
        posts: posts.len(),
        hostile_posts: posts.iter().filter(|p| p.is_hostile()).count(),
        non_hostile_posts: posts.iter().filter(|p| !p.is_hostile()).count(),
        comments: corpus.comment_count(),
        hostile_comments: posts.iter().map(|p| p.hostile_count()).sum(),
        users: users.len(),
    };
    Ok(StatsReport {
        comments_per_post: rank_sorted(posts.iter().map(|p| p.comments.len() as f64).collect()),
        hostile_per_post: rank_sorted(posts.iter().map(|p| p.hostile_count() as f64).collect()),
        duration_days: rank_sorted(
            posts
                .iter()
                .map(|p| p.comments.last().map_or(0.0, |c| c.t / SECONDS_PER_DAY))
                .collect(),
        ),
        first_hostile_hours: rank_sorted(
            posts
                .iter()
                .filter_map(|p| p.first_hostile().map(|i| p.comments[i].t / SECONDS_PER_HOUR))
                .collect(),
        ),
        unique_users_per_post: rank_sorted(
            posts
                .iter()
                .map(|p| p.comments.iter().map(|c| &c.author).collect::<HashSet<_>>().len() as f64)
                .collect(),
        ),
        counts,
    })
}

impl StatsReport {
    pub fn series(&self) -> [(&'static str, &[f64]); 5] {
        [
            ("comments_per_post", &self.comments_per_post),
            ("hostile_comments_per_post", &self.hostile_per_post),
            ("duration_days", &self.duration_days),
            ("first_hostile_hours", &self.first_hostile_hours),
            ("unique_users_per_post", &self.unique_users_per_post),
        ]
    }

    /// Writes one `rank,value` CSV per statistic plus `table.csv`.
    pub fn write_csv(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        for (name, values) in self.series() {
            let mut s = String::from("rank,value\n");
            for (i, v) in values.iter().enumerate() {
                s.push_str(&format!("{},{}\n", i + 1, v));
            }
            fs::write(dir.join(format!("{name}.csv")), s)?;
        }
        let c = &self.counts;
        let table = format!(
            "statistic,value\nposts,{}\nhostile_posts,{}\nnon_hostile_posts,{}\ncomments,{}\nhostile_comments,{}\nhostile_comment_fraction,{}\nusers,{}\n",
            c.posts,
            c.hostile_posts,
            c.non_hostile_posts,
            c.comments,
            c.hostile_comments,
            c.hostile_comments as f64 / c.comments.max(1) as f64,
            c.users
        );
        fs::write(dir.join("table.csv"), table)?;
        Ok(())
    }
}

/// Median of a series (any order).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Comment, Post};

    fn c(id: &str, author: &str, t: f64) -> Comment {
        Comment { id: id.into(), author: author.into(), text: String::new(), t, hostile: false }
    }

    #[test]
    fn single_post_counts() {
        let post = Post {
            id: "p".into(),
            author: "a".into(),
            created_at: 0.0,
            comments: vec![c("1", "x", 0.0), c("2", "y", 10.0), c("3", "x", 864_000.0)],
        };
        let s = corpus_stats(&Corpus::new(vec![post]).unwrap()).unwrap();
        assert_eq!(s.comments_per_post, vec![3.0]);
        assert_eq!(s.unique_users_per_post, vec![2.0]);
        assert_eq!(s.duration_days, vec![10.0]);
        assert!(s.first_hostile_hours.is_empty());
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(corpus_stats(&Corpus::default()).is_err());
    }

    #[test]
    fn synthetic_series_are_long_tailed() {
        let s = crate::corpus::generate_synthetic(&Default::default()).unwrap();
        let st = corpus_stats(&s.corpus).unwrap();
        for (name, series) in st.series() {
            let med = median(series);
            assert!(series[0] >= 5.0 * med, "{name}: max {} median {med}", series[0]);
        }
    }
}
