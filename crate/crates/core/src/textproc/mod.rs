//! Text normalization and per-researcher document assembly.

pub mod porter;
pub mod stopwords;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::profiles::{Publication, ResearcherProfile};

pub use stopwords::{is_stopword, STOPWORDS, STOPWORDS_VERSION};

/// Tokens shorter than this are dropped.
pub const MIN_TOKEN_LEN: usize = 2;

/// Multiset of stemmed tokens.
///
/// Counts are kept in a sorted map so iteration order is deterministic.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenBag {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl TokenBag {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `n` occurrences of `token`. Zero is a no-op.
    pub fn add(&mut self, token: &str, n: u64) {
        if n == 0 {
            return;
        }
        *self.counts.entry(token.to_string()).or_insert(0) += n;
        self.total += n;
    }

    pub fn merge(&mut self, other: &TokenBag) {
        for (token, &n) in &other.counts {
            self.add(token, n);
        }
    }

    /// Every count multiplied by `factor`; a zero factor yields the empty bag.
    pub fn scaled(&self, factor: u64) -> TokenBag {
        let mut out = TokenBag::new();
        for (token, &n) in &self.counts {
            out.add(token, n * factor);
        }
        out
    }

    pub fn count(&self, token: &str) -> u64 {
        self.counts.get(token).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &BTreeMap<String, u64> {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.counts.iter().map(|(t, &n)| (t.as_str(), n))
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}

impl<'a> FromIterator<(&'a str, u64)> for TokenBag {
    fn from_iter<I: IntoIterator<Item = (&'a str, u64)>>(iter: I) -> Self {
        let mut bag = TokenBag::new();
        for (t, n) in iter {
            bag.add(t, n);
        }
        bag
    }
}

/// Weight placed on a researcher's profile keywords.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmphasisLevel {
    None,
    Normal,
    High,
}

impl EmphasisLevel {
    pub const ALL: [EmphasisLevel; 3] = [
        EmphasisLevel::None,
        EmphasisLevel::Normal,
        EmphasisLevel::High,
    ];

    /// Number of times the keyword tokens are repeated.
    pub fn weight(self) -> u64 {
        match self {
            EmphasisLevel::None => 0,
            EmphasisLevel::Normal => 1,
            EmphasisLevel::High => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmphasisLevel::None => "none",
            EmphasisLevel::Normal => "normal",
            EmphasisLevel::High => "high",
        }
    }
}

impl fmt::Display for EmphasisLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn keep(token: &str) -> bool {
    token.len() >= MIN_TOKEN_LEN && !is_stopword(token)
}

/// Lowercases, splits on everything that is not an ASCII letter, drops
/// short tokens and stopwords, then stems.
///
/// Stems are filtered a second time: stemming can shorten a token below the
/// minimum length or land on a stopword ("wills" -> "will").
pub fn normalize(text: &str) -> TokenBag {
    let lowered = text.to_lowercase();
    let mut bag = TokenBag::new();
    for raw in lowered.split(|c: char| !c.is_ascii_lowercase()) {
        if !keep(raw) {
            continue;
        }
        let stemmed = porter::stem_to_fixed_point(raw);
        if keep(&stemmed) {
            bag.add(&stemmed, 1);
        }
    }
    bag
}

/// Combined document of a researcher: publication titles and abstracts plus
/// the profile keywords repeated `emphasis.weight()` times.
pub fn assemble_document(
    profile: &ResearcherProfile,
    pubs: &[Publication],
    emphasis: EmphasisLevel,
) -> TokenBag {
    let text = pubs
        .iter()
        .flat_map(|p| [p.title.as_str(), p.abstract_text.as_str()])
        .collect::<Vec<_>>()
        .join(" ");
    let mut bag = normalize(&text);
    let keywords = normalize(&profile.keywords.join(" "));
    bag.merge(&keywords.scaled(emphasis.weight()));
    bag
}
