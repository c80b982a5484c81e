//! Seedable synthetic linked corpus: Zipfian vocabulary, preferential
//! (power-law) in-links, and an optional coupling between how strongly a
//! document attracts links and how rich its text is.

use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Pareto, Zipf};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;

/// Relation between link attractiveness and text richness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Richness drawn independently of attractiveness.
    #[default]
    None,
    /// The most linked-to documents are the richest.
    Positive,
    /// The most linked-to documents are the poorest.
    Anti,
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coupling::None => "none",
            Coupling::Positive => "positive",
            Coupling::Anti => "anti",
        })
    }
}

impl FromStr for Coupling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Coupling::None),
            "positive" => Ok(Coupling::Positive),
            "anti" => Ok(Coupling::Anti),
            other => Err(format!("unknown coupling {other:?} (expected none, positive or anti)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub docs: usize,
    pub vocab: usize,
    pub seed: u64,
    pub zipf_exponent: f64,
    pub min_len: usize,
    pub max_len: usize,
    /// Mean outlinks of a non-dangling document.
    pub mean_outlinks: f64,
    /// In-link attractiveness of the document at prominence rank r is `(r + 1)^-exponent`.
    pub link_exponent: f64,
    pub dangling_fraction: f64,
    /// Probability that an outlink points outside the corpus.
    pub external_link_rate: f64,
    pub coupling: Coupling,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            docs: 500,
            vocab: 5000,
            seed: 42,
            zipf_exponent: 1.07,
            min_len: 40,
            max_len: 400,
            mean_outlinks: 6.0,
            link_exponent: 1.0,
            dangling_fraction: 0.1,
            external_link_rate: 0.02,
            coupling: Coupling::None,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("invalid synthetic corpus parameter: {0}")]
    Invalid(String),
}

const CONSONANTS: &[u8] = b"bdfgkmnprtvz";
const VOWELS: &[u8] = b"ao";

/// Pronounceable word for vocabulary rank `t`. Words are built from
/// consonant-vowel syllables ending in `a` or `o`, which the stemmer leaves
/// unchanged and which never collide with stopwords.
pub fn synth_word(t: usize) -> String {
    let base = CONSONANTS.len() * VOWELS.len();
    let mut n = t + base;
    let mut syllables = Vec::new();
    while n > 0 {
        let s = n % base;
        syllables.push([CONSONANTS[s / VOWELS.len()], VOWELS[s % VOWELS.len()]]);
        n /= base;
    }
    syllables.reverse();
    syllables.iter().flat_map(|s| s.iter().map(|&b| b as char)).collect()
}

pub fn doc_id(i: usize) -> String {
    format!("doc-{i:06}")
}

pub fn generate(p: &SynthParams) -> Result<Vec<Document>, SynthError> {
    let invalid = |m: &str| Err(SynthError::Invalid(m.to_owned()));
    if p.vocab == 0 {
        return invalid("vocab must be positive");
    }
    if p.min_len == 0 || p.min_len > p.max_len {
        return invalid("need 0 < min_len <= max_len");
    }
    if !(0.0..=1.0).contains(&p.dangling_fraction) || !(0.0..=1.0).contains(&p.external_link_rate) {
        return invalid("fractions must lie in [0, 1]");
    }
    if p.docs == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let zipf = Zipf::new(p.vocab as f64, p.zipf_exponent).map_err(|e| SynthError::Invalid(e.to_string()))?;
    let pareto = Pareto::new(1.0, 2.0).expect("valid pareto");

    // prominence[i] = rank of document i by link attractiveness (0 = most attractive).
    let mut prominence: Vec<usize> = (0..p.docs).collect();
    prominence.shuffle(&mut rng);
    let attract: Vec<f64> = prominence
        .iter()
        .map(|&r| ((r + 1) as f64).powf(-p.link_exponent))
        .collect();
    let targets = WeightedIndex::new(&attract).map_err(|e| SynthError::Invalid(e.to_string()))?;

    // Topical band: vocabulary ranks 2% to 16%.
    let band_lo = p.vocab / 50;
    let band = band_lo..(p.vocab * 4 / 25).max(band_lo + 1);
    let n = p.docs as f64;
    let mut docs = Vec::with_capacity(p.docs);
    for (i, &rank) in prominence.iter().enumerate() {
        let top = 1.0 - rank as f64 / n;
        let richness = match p.coupling {
            Coupling::Positive => top,
            Coupling::Anti => 1.0 - top,
            Coupling::None => rng.random::<f64>(),
        };
        let spread = (p.max_len - p.min_len) as f64;
        let jitter = 0.9 + 0.2 * rng.random::<f64>();
        let len = (p.min_len as f64 + spread * richness * jitter).round() as usize;
        let len = len.clamp(p.min_len, p.max_len);
        // Rich documents draw heavily from a mid-frequency topical band, which
        // is what makes them answer many distinct queries.
        let topical_rate = 0.9 * richness.powi(8);
        let words: Vec<String> = (0..len)
            .map(|_| {
                let t = if rng.random::<f64>() < topical_rate {
                    rng.random_range(band.clone())
                } else {
                    zipf.sample(&mut rng) as usize - 1
                };
                synth_word(t)
            })
            .collect();
        let title = Some(words[..2.min(words.len())].join(" "));
        let mut body = String::new();
        for (k, w) in words[2.min(words.len())..].iter().enumerate() {
            if k > 0 {
                body.push_str(if k % 12 == 0 { ". " } else { " " });
            }
            body.push_str(w);
        }

        let outlinks = if rng.random::<f64>() < p.dangling_fraction {
            Vec::new()
        } else {
            let x: f64 = pareto.sample(&mut rng);
            let degree = (1.0 + (x - 1.0) * (p.mean_outlinks - 1.0)).round().max(1.0) as usize;
            let degree = degree.min(p.docs * 2);
            (0..degree)
                .map(|_| {
                    if rng.random::<f64>() < p.external_link_rate {
                        format!("ext-{}", rng.random_range(0..1_000_000u32))
                    } else {
                        doc_id(targets.sample(&mut rng))
                    }
                })
                .collect()
        };
        docs.push(Document {
            id: doc_id(i),
            title,
            body,
            outlinks,
        });
    }
    Ok(docs)
}
