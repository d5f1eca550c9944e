use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::{Error, Result};

/// The six hate-lexicon categories, in feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HateCategory {
    Class,
    Disability,
    Ethnicity,
    Gender,
    Nationality,
    Religion,
}

impl HateCategory {
    pub const ALL: [HateCategory; 6] = [
        HateCategory::Class,
        HateCategory::Disability,
        HateCategory::Ethnicity,
        HateCategory::Gender,
        HateCategory::Nationality,
        HateCategory::Religion,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HateCategory::Class => "class",
            HateCategory::Disability => "disability",
            HateCategory::Ethnicity => "ethnicity",
            HateCategory::Gender => "gender",
            HateCategory::Nationality => "nationality",
            HateCategory::Religion => "religion",
        }
    }
}

/// Hate words by category plus a profanity list. All entries lowercase.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicons {
    hate: [BTreeSet<String>; 6],
    profane: BTreeSet<String>,
}

pub const LEXICON_FEATURES: usize = 9;

pub const LEXICON_FEATURE_NAMES: [&str; LEXICON_FEATURES] = [
    "hate_class",
    "hate_disability",
    "hate_ethnicity",
    "hate_gender",
    "hate_nationality",
    "hate_religion",
    "hate_count",
    "profane",
    "profane_count",
];

// Placeholder hate terms: the real lists are licensed and must be supplied
// by the user. The profanity list is mild on purpose.
const BUILTIN_HATE: [&[&str]; 6] = [
    &["hbclass1", "hbclass2", "hbclass3", "hbclass4", "hbclass5"],
    &["hbdisab1", "hbdisab2", "hbdisab3", "hbdisab4", "hbdisab5"],
    &["hbethn1", "hbethn2", "hbethn3", "hbethn4", "hbethn5"],
    &["hbgender1", "hbgender2", "hbgender3", "hbgender4", "hbgender5"],
    &["hbnation1", "hbnation2", "hbnation3", "hbnation4", "hbnation5"],
    &["hbrelig1", "hbrelig2", "hbrelig3", "hbrelig4", "hbrelig5"],
];

const BUILTIN_PROFANE: &[&str] = &[
    "stfu", "wtf", "damn", "crap", "hell", "pissed", "screwed", "jerk", "idiot", "moron",
    "dumbass", "bs", "effing", "frick", "shutup",
];

impl Lexicons {
    pub fn new<I, J, S>(hate: I, profane: J) -> Self
    where
        I: IntoIterator<Item = (HateCategory, Vec<S>)>,
        J: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lex = Lexicons::default();
        for (cat, words) in hate {
            lex.hate[cat as usize].extend(words.iter().map(|w| w.as_ref().to_lowercase()));
        }
        lex.profane.extend(profane.into_iter().map(|w| w.as_ref().to_lowercase()));
        lex
    }

    /// Small six-category test lexicon shipped with the crate.
    pub fn builtin() -> Self {
        Lexicons::new(
            HateCategory::ALL.iter().map(|&c| (c, BUILTIN_HATE[c as usize].to_vec())),
            BUILTIN_PROFANE.iter().copied(),
        )
    }

    /// Loads `<category>.txt` for each hate category and `profane.txt` from
    /// `dir`. One word per line; blank lines and `#` comments are skipped.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let read = |name: &str| -> Result<Vec<String>> {
            let path = dir.join(format!("{name}.txt"));
            let text = fs::read_to_string(&path).map_err(|e| {
                Error::MissingResource(format!("lexicon file {}: {e}", path.display()))
            })?;
            Ok(text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect())
        };
        let mut hate = Vec::new();
        for cat in HateCategory::ALL {
            hate.push((cat, read(cat.name())?));
        }
        Ok(Lexicons::new(hate, read("profane")?))
    }

    pub fn hate_words(&self, cat: HateCategory) -> &BTreeSet<String> {
        &self.hate[cat as usize]
    }

    pub fn profane_words(&self) -> &BTreeSet<String> {
        &self.profane
    }

    pub fn is_profane(&self, token: &str) -> bool {
        self.profane.contains(token)
    }

    pub fn is_hate(&self, token: &str) -> bool {
        self.hate.iter().any(|s| s.contains(token))
    }
}

/// Six per-category hate binaries, the total hate count, the profane binary
/// and the profane count. A token in several categories counts once per
/// category.
pub fn lexicon_features<S: AsRef<str>>(tokens: &[S], lex: &Lexicons) -> [f64; LEXICON_FEATURES] {
    let mut out = [0.0; LEXICON_FEATURES];
    let mut total = 0.0;
    let mut profane = 0.0;
    for tok in tokens {
        let tok = tok.as_ref();
        for (i, set) in lex.hate.iter().enumerate() {
            if set.contains(tok) {
                out[i] = 1.0;
                total += 1.0;
            }
        }
        if lex.profane.contains(tok) {
            profane += 1.0;
        }
    }
    out[6] = total;
    out[7] = if profane > 0.0 { 1.0 } else { 0.0 };
    out[8] = profane;
    out
}
