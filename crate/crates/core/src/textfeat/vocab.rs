use std::collections::{BTreeMap, HashMap};

/// Token → column map with dense indices assigned in sorted token order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    min_count: usize,
}

impl Vocabulary {
    pub fn from_tokens<I: IntoIterator<Item = String>>(tokens: I, min_count: usize) -> Self {
        let mut tokens: Vec<String> = tokens.into_iter().collect();
        tokens.sort();
        tokens.dedup();
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary { tokens, index, min_count }
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, idx: u32) -> &str {
        &self.tokens[idx as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }
}

/// Vocabulary of every token occurring at least `min_count` times.
pub fn build_vocab<'a, I, S>(sequences: I, min_count: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a [S]>,
    S: AsRef<str> + 'a,
{
    let min_count = min_count.max(1);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for seq in sequences {
        for tok in seq {
            *counts.entry(tok.as_ref()).or_default() += 1;
        }
    }
    Vocabulary::from_tokens(
        counts.into_iter().filter(|&(_, c)| c >= min_count).map(|(t, _)| t.to_string()),
        min_count,
    )
}

/// Token counts over `tokens`, restricted to the vocabulary, by column.
pub fn bow<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> Vec<(u32, f64)> {
    let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
    for t in tokens {
        if let Some(i) = vocab.get(t.as_ref()) {
            *counts.entry(i).or_default() += 1.0;
        }
    }
    counts.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn threshold() {
        let a = seq(&["a", "b", "a"]);
        let b = seq(&["a"]);
        let v = build_vocab([a.as_slice(), b.as_slice()], 2);
        assert_eq!(v.tokens(), &["a".to_string()]);
        let empty: Vec<&[String]> = vec![];
        assert!(build_vocab(empty, 1).is_empty());
    }

    #[test]
    fn deterministic_sorted_indices() {
        let a = seq(&["z", "y", "x", "y"]);
        let v1 = build_vocab([a.as_slice()], 1);
        let v2 = build_vocab([a.as_slice()], 1);
        assert_eq!(v1, v2);
        assert_eq!(v1.get("x"), Some(0));
        assert_eq!(v1.get("z"), Some(2));
    }

    #[test]
    fn bow_counts_and_oov() {
        let v = Vocabulary::from_tokens(seq(&["you", "suck"]), 1);
        // sorted: suck=0, you=1
        assert_eq!(bow(&["you", "you", "suck"], &v), vec![(0, 1.0), (1, 2.0)]);
        assert!(bow(&["nope", "nah"], &v).is_empty());
    }

    #[test]
    fn bow_is_additive() {
        let v = Vocabulary::from_tokens(seq(&["a", "b", "c"]), 1);
        let x = seq(&["a", "b", "zz"]);
        let y = seq(&["b", "c", "c"]);
        let joined: Vec<String> = x.iter().chain(&y).cloned().collect();
        let mut sum: BTreeMap<u32, f64> = BTreeMap::new();
        for (i, c) in bow(&x, &v).into_iter().chain(bow(&y, &v)) {
            *sum.entry(i).or_default() += c;
        }
        assert_eq!(bow(&joined, &v), sum.into_iter().collect::<Vec<_>>());
    }
}
