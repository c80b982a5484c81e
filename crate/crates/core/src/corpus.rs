//! Linked-corpus records: one JSON object per line with `id`, optional
//! `title`, `body` and `outlinks`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("duplicate document id {id:?} on line {line}")]
    DuplicateId { id: String, line: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub body: String,
    #[serde(default)]
    pub outlinks: Vec<String>,
}

impl Document {
    /// Analyzed terms of the title followed by the body.
    pub fn analyzed_terms(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(t) = &self.title {
            analysis::analyze_into(t, |s| out.push(s));
        }
        analysis::analyze_into(&self.body, |s| out.push(s));
        out
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub doc_count: u64,
    pub term_count: u64,
    pub total_tokens: u64,
}

/// A record that failed to parse and was skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MalformedRecord {
    pub line: usize,
    pub message: String,
}

/// Streaming reader over a corpus file. Yields documents in file order,
/// skipping (and remembering) malformed lines. A duplicate id ends the stream
/// with an error.
pub struct CorpusReader<R> {
    lines: io::Lines<R>,
    line_no: usize,
    seen: HashSet<String>,
    malformed: Vec<MalformedRecord>,
    path: PathBuf,
    failed: bool,
}

impl CorpusReader<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| CorpusError::Io {
            path: path.to_owned(),
            source,
        })?;
        Ok(Self::new(BufReader::new(file), path))
    }
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, origin: impl Into<PathBuf>) -> Self {
        Self {
            lines: reader.lines(),
            line_no: 0,
            seen: HashSet::new(),
            malformed: Vec::new(),
            path: origin.into(),
            failed: false,
        }
    }

    pub fn malformed(&self) -> &[MalformedRecord] {
        &self.malformed
    }

    fn parse(line: &str) -> Result<Document, String> {
        let doc: Document = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if doc.id.is_empty() {
            return Err("empty document id".into());
        }
        Ok(doc)
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<Document, CorpusError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(source) => {
                    self.failed = true;
                    return Some(Err(CorpusError::Io {
                        path: self.path.clone(),
                        source,
                    }));
                }
            };
            self.line_no += 1;
            if line.trim().is_empty() {
                continue;
            }
            match Self::parse(&line) {
                Ok(doc) => {
                    if !self.seen.insert(doc.id.clone()) {
                        self.failed = true;
                        return Some(Err(CorpusError::DuplicateId {
                            id: doc.id,
                            line: self.line_no,
                        }));
                    }
                    return Some(Ok(doc));
                }
                Err(message) => {
                    log::warn!("{}:{}: skipping malformed record: {message}", self.path.display(), self.line_no);
                    self.malformed.push(MalformedRecord {
                        line: self.line_no,
                        message,
                    });
                }
            }
        }
    }
}

/// A fully loaded corpus.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub malformed: Vec<MalformedRecord>,
}

impl Corpus {
    /// Counts documents, distinct analyzed terms and analyzed tokens.
    pub fn stats(&self) -> CorpusStats {
        let mut vocab = HashSet::new();
        let mut total = 0u64;
        for doc in &self.documents {
            for t in doc.analyzed_terms() {
                total += 1;
                if !vocab.contains(&t) {
                    vocab.insert(t);
                }
            }
        }
        CorpusStats {
            doc_count: self.documents.len() as u64,
            term_count: vocab.len() as u64,
            total_tokens: total,
        }
    }
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let mut reader = CorpusReader::open(path)?;
    let documents = reader.by_ref().collect::<Result<Vec<_>, _>>()?;
    Ok(Corpus {
        documents,
        malformed: reader.malformed,
    })
}

pub fn write_corpus<'a>(
    out: impl Write,
    docs: impl IntoIterator<Item = &'a Document>,
) -> io::Result<()> {
    let mut out = BufWriter::new(out);
    for doc in docs {
        serde_json::to_writer(&mut out, doc)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_corpus(path: impl AsRef<Path>, docs: &[Document]) -> io::Result<()> {
    write_corpus(File::create(path)?, docs)
}
