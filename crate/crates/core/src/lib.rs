//! Forecasting hostile comments in online comment threads.
//!
//! The crate covers the whole pipeline: a thread data model with a calibrated
//! synthetic generator ([`corpus`]), text features ([`textfeat`]), word and
//! subword embeddings ([`embed`]), L2-regularized logistic regression
//! ([`linmodel`]), comment-level trend features from a nested
//! cross-validated classifier ([`trend`]), K-Spectral-Centroid clustering of
//! hostility time series ([`ksc`]), metrics and fold construction ([`eval`])
//! and the two forecasting tasks with their ablation and sweep reports
//! ([`experiment`]).

pub mod corpus;
pub mod embed;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod ksc;
pub mod linmodel;
pub mod textfeat;
pub mod trend;
pub(crate) mod util;

pub use error::{Error, Result};
