//! Single-file binary index layout, version 1. All integers little-endian.
//!
//! ```text
//! magic        8 bytes   "TIERANK\0"
//! version      u32       1
//! flags        u32       bit 0: documents carry timestamps
//! doc_count    u32
//! doc_count times, in internal id order:
//!   id_len     u32
//!   id         id_len bytes, UTF-8 external id
//!   doc_len    u32
//!   timestamp  i64       only when flag bit 0 is set
//! term_count   u32
//! term_count times, terms in ascending byte order:
//!   term_len   u32
//!   term       term_len bytes, UTF-8
//!   df         u32
//!   df times:  doc u32, tf u32   (doc strictly increasing)
//! ```
//!
//! Term vectors and collection statistics are rebuilt from the postings on
//! load. Two indexes with the same arrival order serialize to identical bytes.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use super::{Index, InternalDocId, Posting};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"TIERANK\0";
pub const FORMAT_VERSION: u32 = 1;

const FLAG_TIMESTAMPS: u32 = 1;

fn io(e: std::io::Error) -> Error {
    Error::io("<index stream>", e)
}

fn put_u32(w: &mut impl Write, v: u32) -> Result<()> {
    w.write_all(&v.to_le_bytes()).map_err(io)
}

fn put_str(w: &mut impl Write, s: &str) -> Result<()> {
    let len = u32::try_from(s.len()).map_err(|_| Error::IndexFormat("string too long".into()))?;
    put_u32(w, len)?;
    w.write_all(s.as_bytes()).map_err(io)
}

pub fn write_index(index: &Index, w: &mut impl Write) -> Result<()> {
    w.write_all(MAGIC).map_err(io)?;
    put_u32(w, FORMAT_VERSION)?;
    put_u32(
        w,
        if index.has_timestamps() {
            FLAG_TIMESTAMPS
        } else {
            0
        },
    )?;
    put_u32(w, index.doc_count() as u32)?;
    for d in 0..index.doc_count() as u32 {
        let doc = InternalDocId(d);
        put_str(w, index.external_id(doc))?;
        put_u32(w, index.doc_len(doc))?;
        if let Some(ts) = index.timestamp(doc) {
            w.write_all(&ts.to_le_bytes()).map_err(io)?;
        }
    }
    let mut terms: Vec<&String> = index.postings.keys().collect();
    terms.sort_unstable();
    put_u32(w, terms.len() as u32)?;
    for term in terms {
        put_str(w, term)?;
        let list = &index.postings[term];
        put_u32(w, list.len() as u32)?;
        for p in list {
            put_u32(w, p.doc.0)?;
            put_u32(w, p.tf)?;
        }
    }
    Ok(())
}

struct Reader<'a, R: Read>(&'a mut R);

impl<R: Read> Reader<'_, R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut buf = [0u8; N];
        self.0.read_exact(&mut buf).map_err(|e| {
            if e.kind() == std::io::ErrorKind::UnexpectedEof {
                Error::IndexFormat("truncated file".into())
            } else {
                io(e)
            }
        })?;
        Ok(buf)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.bytes()?))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let mut buf = vec![0u8; len];
        self.0
            .read_exact(&mut buf)
            .map_err(|_| Error::IndexFormat("truncated file".into()))?;
        String::from_utf8(buf).map_err(|_| Error::IndexFormat("invalid UTF-8".into()))
    }
}

pub fn read_index(r: &mut impl Read) -> Result<Index> {
    let mut r = Reader(r);
    if &r.bytes::<8>()? != MAGIC {
        return Err(Error::IndexFormat("bad magic".into()));
    }
    let version = r.u32()?;
    if version != FORMAT_VERSION {
        return Err(Error::IndexFormat(format!("unsupported version {version}")));
    }
    let flags = r.u32()?;
    let doc_count = r.u32()? as usize;
    if doc_count == 0 {
        return Err(Error::EmptyCollection);
    }

    let mut external_ids = Vec::with_capacity(doc_count);
    let mut by_external = HashMap::with_capacity(doc_count);
    let mut doc_len = Vec::with_capacity(doc_count);
    let mut timestamps = (flags & FLAG_TIMESTAMPS != 0).then(|| Vec::with_capacity(doc_count));
    for d in 0..doc_count as u32 {
        let id = r.string()?;
        if by_external.insert(id.clone(), InternalDocId(d)).is_some() {
            return Err(Error::DuplicateDocId(id));
        }
        external_ids.push(id);
        doc_len.push(r.u32()?);
        if let Some(ts) = timestamps.as_mut() {
            ts.push(r.i64()?);
        }
    }

    let term_count = r.u32()?;
    let mut postings = HashMap::with_capacity(term_count as usize);
    let mut doc_vectors = vec![BTreeMap::new(); doc_count];
    for _ in 0..term_count {
        let term = r.string()?;
        let df = r.u32()? as usize;
        if df == 0 || df > doc_count {
            return Err(Error::IndexFormat(format!("bad df for term {term:?}")));
        }
        let mut list = Vec::with_capacity(df);
        for _ in 0..df {
            let doc = r.u32()?;
            let tf = r.u32()?;
            if doc as usize >= doc_count || tf == 0 {
                return Err(Error::IndexFormat(format!("bad posting for term {term:?}")));
            }
            if list.last().is_some_and(|p: &Posting| p.doc.0 >= doc) {
                return Err(Error::IndexFormat(format!(
                    "unsorted postings for term {term:?}"
                )));
            }
            doc_vectors[doc as usize].insert(term.clone(), tf);
            list.push(Posting {
                doc: InternalDocId(doc),
                tf,
            });
        }
        postings.insert(term, list);
    }
    for (d, vector) in doc_vectors.iter().enumerate() {
        if vector.values().sum::<u32>() != doc_len[d] {
            return Err(Error::IndexFormat(format!(
                "document length mismatch for {:?}",
                external_ids[d]
            )));
        }
    }

    Index::assemble(
        postings,
        doc_len,
        external_ids,
        by_external,
        timestamps,
        doc_vectors,
    )
}

#[cfg(test)]
mod tests {
    use crate::corpus::Document;
    use crate::index::{build_index, BuildOptions};

    use super::*;

    fn docs() -> Vec<Document> {
        (0..40)
            .map(|i| {
                Document::new(
                    format!("doc-{i}"),
                    format!("alpha beta{} gamma{}", i % 3, i % 7),
                )
                .with_timestamp(1_000 + i as i64)
            })
            .collect()
    }

    fn bytes(index: &Index) -> Vec<u8> {
        let mut out = Vec::new();
        write_index(index, &mut out).unwrap();
        out
    }

    #[test]
    fn round_trip_preserves_everything() {
        let index = build_index(docs(), BuildOptions::seeded(3)).unwrap();
        let encoded = bytes(&index);
        let decoded = read_index(&mut encoded.as_slice()).unwrap();
        assert_eq!(decoded, index);
    }

    #[test]
    fn same_arrival_order_gives_identical_bytes() {
        let a = build_index(docs(), BuildOptions::seeded(9)).unwrap();
        let b = build_index(docs(), BuildOptions::seeded(9)).unwrap();
        assert_eq!(bytes(&a), bytes(&b));
        let c = build_index(docs(), BuildOptions::seeded(10)).unwrap();
        assert_ne!(bytes(&a), bytes(&c));
    }

    #[test]
    fn header_layout() {
        let index = build_index(vec![Document::new("d", "x")], BuildOptions::sequential()).unwrap();
        let b = bytes(&index);
        assert_eq!(&b[..8], MAGIC);
        assert_eq!(&b[8..12], &1u32.to_le_bytes());
        assert_eq!(&b[12..16], &0u32.to_le_bytes());
        assert_eq!(&b[16..20], &1u32.to_le_bytes());
        // id "d", doc_len 1, one term "x" with a single posting (0, 1)
        assert_eq!(
            &b[20..],
            &[
                1, 0, 0, 0, b'd', 1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, b'x', 1, 0, 0, 0, 0, 0, 0, 0,
                1, 0, 0, 0
            ]
        );
    }

    #[test]
    fn rejects_corruption() {
        let index = build_index(docs(), BuildOptions::sequential()).unwrap();
        let mut b = bytes(&index);
        assert!(read_index(&mut &b[..b.len() - 3]).is_err());
        b[0] = b'X';
        assert!(matches!(
            read_index(&mut b.as_slice()),
            Err(Error::IndexFormat(_))
        ));
        let mut b = bytes(&index);
        b[8] = 2;
        assert!(matches!(
            read_index(&mut b.as_slice()),
            Err(Error::IndexFormat(_))
        ));
    }

    #[test]
    fn save_and_load_file() {
        let index = build_index(docs(), BuildOptions::seeded(1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("idx.bin");
        index.save(&path).unwrap();
        assert_eq!(Index::load(&path).unwrap(), index);
    }
}
