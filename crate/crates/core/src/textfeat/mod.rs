//! Tokenization, vocabularies, lexicon matching and the per-post feature
//! groups used by the forecasting models.

mod features;
mod lexicon;
mod tokenize;
mod vocab;

pub use features::{
    assemble, assemble_blocks, embed_aggregate, final_comment_features, prev_comment_features,
    prev_post_features, user_activity_features, FeatureResources, FeatureVector, Group,
    GroupBlock, GroupSpan, InstanceText, Layout, TokenCache,
};
pub use lexicon::{lexicon_features, HateCategory, Lexicons, LEXICON_FEATURES, LEXICON_FEATURE_NAMES};
pub use tokenize::{is_emoji, tokenize, MENTION};
pub use vocab::{bow, build_vocab, Vocabulary};
