//! Binary index snapshot.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! "CAIX" u32:version
//! "IDMP" u64:n   n x (u32:len bytes)            document ids by ordinal
//! "DLEN" u64:n   n x u32                        document lengths
//! "TERM" u64:t   t x (u32:len bytes u64:df u64:cf)
//! "POST"         t x (u64:len len x (u32:doc u32:tf))
//! ```

use std::io::{self, Read, Write};

use thiserror::Error;

use super::{InvertedIndex, Posting};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"CAIX";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not an index snapshot (bad magic bytes)")]
    BadMagic,
    #[error("unsupported snapshot version {0} (this build reads version {SNAPSHOT_VERSION})")]
    UnsupportedVersion(u32),
    #[error("corrupt snapshot: {0}")]
    Corrupt(String),
}

pub fn write_snapshot(index: &InvertedIndex, out: impl Write) -> io::Result<()> {
    let mut w = io::BufWriter::new(out);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;

    w.write_all(b"IDMP")?;
    w.write_all(&(index.doc_ids.len() as u64).to_le_bytes())?;
    for id in &index.doc_ids {
        write_str(&mut w, id)?;
    }

    w.write_all(b"DLEN")?;
    w.write_all(&(index.doc_lengths.len() as u64).to_le_bytes())?;
    for &l in &index.doc_lengths {
        w.write_all(&l.to_le_bytes())?;
    }

    w.write_all(b"TERM")?;
    w.write_all(&(index.terms.len() as u64).to_le_bytes())?;
    for (term, st) in index.terms.iter().zip(&index.stats) {
        write_str(&mut w, term)?;
        w.write_all(&st.document_frequency.to_le_bytes())?;
        w.write_all(&st.collection_frequency.to_le_bytes())?;
    }

    w.write_all(b"POST")?;
    for list in &index.postings {
        w.write_all(&(list.len() as u64).to_le_bytes())?;
        for p in list {
            w.write_all(&p.doc.to_le_bytes())?;
            w.write_all(&p.tf.to_le_bytes())?;
        }
    }
    w.flush()
}

pub fn read_snapshot(input: impl Read) -> Result<InvertedIndex, SnapshotError> {
    let mut r = io::BufReader::new(input);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != SNAPSHOT_VERSION {
        return Err(SnapshotError::UnsupportedVersion(version));
    }

    expect_tag(&mut r, b"IDMP")?;
    let n = read_len(&mut r)?;
    let doc_ids = (0..n).map(|_| read_str(&mut r)).collect::<Result<Vec<_>, _>>()?;

    expect_tag(&mut r, b"DLEN")?;
    if read_len(&mut r)? != n {
        return Err(corrupt("document length count differs from id count"));
    }
    let doc_lengths = (0..n).map(|_| read_u32(&mut r)).collect::<Result<Vec<_>, _>>()?;

    expect_tag(&mut r, b"TERM")?;
    let t = read_len(&mut r)?;
    let mut terms = Vec::with_capacity(t);
    let mut declared = Vec::with_capacity(t);
    for _ in 0..t {
        terms.push(read_str(&mut r)?);
        declared.push((read_u64(&mut r)?, read_u64(&mut r)?));
    }
    if terms.windows(2).any(|w| w[0] >= w[1]) {
        return Err(corrupt("term dictionary not strictly sorted"));
    }

    expect_tag(&mut r, b"POST")?;
    let mut postings = Vec::with_capacity(t);
    for (term, &(df, cf)) in terms.iter().zip(&declared) {
        let len = read_len(&mut r)?;
        let mut list = Vec::with_capacity(len);
        let mut sum = 0u64;
        for _ in 0..len {
            let doc = read_u32(&mut r)?;
            let tf = read_u32(&mut r)?;
            if doc as usize >= n || tf == 0 || list.last().is_some_and(|p: &Posting| p.doc >= doc) {
                return Err(corrupt(&format!("bad posting for term {term:?}")));
            }
            sum += tf as u64;
            list.push(Posting { doc, tf });
        }
        if len as u64 != df || sum != cf {
            return Err(corrupt(&format!("term statistics disagree with postings for {term:?}")));
        }
        postings.push(list);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(corrupt("trailing bytes after postings"));
    }
    Ok(InvertedIndex::from_parts(doc_ids, doc_lengths, terms, postings))
}

fn corrupt(msg: &str) -> SnapshotError {
    SnapshotError::Corrupt(msg.to_owned())
}

fn write_str(w: &mut impl Write, s: &str) -> io::Result<()> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())
}

fn expect_tag(r: &mut impl Read, tag: &[u8; 4]) -> Result<(), SnapshotError> {
    let mut got = [0u8; 4];
    r.read_exact(&mut got)?;
    if &got != tag {
        return Err(corrupt(&format!("expected section {}", String::from_utf8_lossy(tag))));
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_len(r: &mut impl Read) -> Result<usize, SnapshotError> {
    let n = read_u64(r)?;
    usize::try_from(n).map_err(|_| corrupt("length overflows usize"))
}

fn read_str(r: &mut impl Read) -> Result<String, SnapshotError> {
    let len = read_u32(r)? as usize;
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| corrupt("invalid UTF-8 string"))
}
