//! Per-document score vectors and the `doc_id,score` CSV format.

use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Retrievability,
    Pagerank,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScoreParams {
    Retrievability {
        cutoff: usize,
        query_count: usize,
    },
    Pagerank {
        damping: f64,
        tolerance: f64,
        max_iterations: usize,
    },
}

/// Scores indexed by document ordinal.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub values: Vec<f64>,
    pub kind: ScoreKind,
    pub params: ScoreParams,
}

impl ScoreVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[derive(Debug, Error)]
pub enum ScoreFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("score file: {0}")]
    Format(String),
}

/// Writes `doc_id,score` rows in ordinal order. Scores use the shortest
/// decimal form that round-trips, so integral counts print without a fraction.
pub fn write_score_csv(out: impl Write, doc_ids: &[String], values: &[f64]) -> Result<(), ScoreFileError> {
    if doc_ids.len() != values.len() {
        return Err(ScoreFileError::Format(format!(
            "{} ids for {} scores",
            doc_ids.len(),
            values.len()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["doc_id", "score"])?;
    for (id, v) in doc_ids.iter().zip(values) {
        w.write_record([id.as_str(), &format!("{v}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_score_csv(input: impl Read) -> Result<Vec<(String, f64)>, ScoreFileError> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "doc_id" || &headers[1] != "score" {
        return Err(ScoreFileError::Format("expected header doc_id,score".into()));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let score: f64 = rec[1]
            .parse()
            .map_err(|e| ScoreFileError::Format(format!("bad score {:?}: {e}", &rec[1])))?;
        rows.push((rec[0].to_owned(), score));
    }
    Ok(rows)
}
