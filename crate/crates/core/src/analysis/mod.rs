//! Text analysis chain: split on non-alphanumeric characters, lowercase,
//! drop stopwords, Porter-stem.

mod porter;

use std::collections::HashSet;
use std::fmt;
use std::sync::OnceLock;

pub use porter::stem;

/// Versioned stopword list shipped with the crate.
pub const STOPWORDS_SOURCE: &str = include_str!("../../data/stopwords.txt");

/// A normalized index term: lowercased, stemmed, never a stopword.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub fn stopwords() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        STOPWORDS_SOURCE
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(word: &str) -> bool {
    stopwords().contains(word)
}

/// Runs the full analysis chain over `text`, preserving input order.
pub fn analyze(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    analyze_into(text, |t| out.push(Token(t)));
    out
}

/// Like [`analyze`] but hands each term to `sink` without building tokens.
pub fn analyze_into(text: &str, mut sink: impl FnMut(String)) {
    for raw in text.split(|c: char| !c.is_alphanumeric()) {
        if raw.is_empty() {
            continue;
        }
        let lower = raw.to_lowercase();
        if is_stopword(&lower) {
            continue;
        }
        let stemmed = stem(&lower);
        // Stemming can land on a stopword ("thes" -> "the"); those are dropped too.
        if !stemmed.is_empty() && !is_stopword(&stemmed) {
            sink(stemmed);
        }
    }
}
