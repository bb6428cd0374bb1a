//! Minimal ZIP container support: stored and deflated entries, no ZIP64,
//! no encryption, single disk.
//!
//! The writer is deterministic. Entries are sorted by name, every timestamp
//! is 1980-01-01 00:00, and an entry is deflated iff that makes it smaller.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;

const LOCAL_SIG: u32 = 0x0403_4b50;
const CENTRAL_SIG: u32 = 0x0201_4b50;
const EOCD_SIG: u32 = 0x0605_4b50;
const EOCD_LEN: usize = 22;
const STORED: u16 = 0;
const DEFLATED: u16 = 8;
const FLAG_ENCRYPTED: u16 = 0x0001;
const FLAG_UTF8: u16 = 0x0800;
/// MS-DOS date for 1980-01-01.
const EPOCH_DATE: u16 = (1 << 5) | 1;
const VERSION: u16 = 20;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ZipError {
    #[error("not a ZIP archive: {0}")]
    NotZip(&'static str),
    #[error("corrupt ZIP archive at offset {offset}: {reason}")]
    Corrupt { offset: usize, reason: &'static str },
    #[error("entry {name}: unsupported compression method {method}")]
    UnsupportedMethod { name: String, method: u16 },
    #[error("entry {0}: encrypted entries are not supported")]
    Encrypted(String),
    #[error("ZIP64 and multi-disk archives are not supported")]
    Zip64,
    #[error("duplicate entry {0}")]
    DuplicateEntry(String),
    #[error("archive too large for the ZIP format without ZIP64")]
    TooLarge,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn at(data: &'a [u8], pos: usize) -> Self {
        Cursor { data, pos }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], ZipError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len()).ok_or(ZipError::Corrupt {
            offset: self.pos,
            reason: "unexpected end of data",
        })?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16, ZipError> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn u32(&mut self) -> Result<u32, ZipError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

fn find_eocd(data: &[u8]) -> Result<usize, ZipError> {
    if data.len() < EOCD_LEN {
        return Err(ZipError::NotZip("too short"));
    }
    let lowest = data.len().saturating_sub(EOCD_LEN + u16::MAX as usize);
    (lowest..=data.len() - EOCD_LEN)
        .rev()
        .find(|&i| data[i..i + 4] == EOCD_SIG.to_le_bytes())
        .ok_or(ZipError::NotZip("no end of central directory record"))
}

/// Entries in central-directory order. Directory entries are skipped;
/// stored CRCs, timestamps and attributes are ignored.
pub fn read_zip(data: &[u8]) -> Result<Vec<(String, Vec<u8>)>, ZipError> {
    let eocd = find_eocd(data)?;
    let mut r = Cursor::at(data, eocd + 4);
    let (disk, cd_disk) = (r.u16()?, r.u16()?);
    let (on_disk, total) = (r.u16()?, r.u16()?);
    let (cd_size, cd_offset) = (r.u32()?, r.u32()?);
    if disk != 0 || cd_disk != 0 || on_disk != total || total == u16::MAX || cd_offset == u32::MAX {
        return Err(ZipError::Zip64);
    }
    if cd_offset as usize + cd_size as usize > eocd {
        return Err(ZipError::Corrupt {
            offset: eocd,
            reason: "central directory overlaps its end record",
        });
    }

    let mut names = BTreeSet::new();
    let mut out = Vec::with_capacity(total as usize);
    let mut cd = Cursor::at(data, cd_offset as usize);
    for _ in 0..total {
        let at = cd.pos;
        if cd.u32()? != CENTRAL_SIG {
            return Err(ZipError::Corrupt {
                offset: at,
                reason: "bad central directory signature",
            });
        }
        cd.take(4)?;
        let flags = cd.u16()?;
        let method = cd.u16()?;
        cd.take(8)?;
        let compressed = cd.u32()?;
        let size = cd.u32()?;
        let (name_len, extra_len, comment_len) = (cd.u16()?, cd.u16()?, cd.u16()?);
        cd.take(8)?;
        let local = cd.u32()?;
        let name = std::str::from_utf8(cd.take(name_len as usize)?)
            .map_err(|_| ZipError::Corrupt {
                offset: at,
                reason: "entry name is not UTF-8",
            })?
            .to_string();
        cd.take(extra_len as usize + comment_len as usize)?;
        if compressed == u32::MAX || size == u32::MAX || local == u32::MAX {
            return Err(ZipError::Zip64);
        }
        if !names.insert(name.clone()) {
            return Err(ZipError::DuplicateEntry(name));
        }
        if name.ends_with('/') {
            continue;
        }
        if flags & FLAG_ENCRYPTED != 0 {
            return Err(ZipError::Encrypted(name));
        }

        let mut lh = Cursor::at(data, local as usize);
        if lh.u32()? != LOCAL_SIG {
            return Err(ZipError::Corrupt {
                offset: local as usize,
                reason: "bad local header signature",
            });
        }
        lh.take(22)?;
        let (lname, lextra) = (lh.u16()?, lh.u16()?);
        lh.take(lname as usize + lextra as usize)?;
        let raw = lh.take(compressed as usize)?;
        let bytes = match method {
            STORED => raw.to_vec(),
            DEFLATED => inflate(raw, size as usize).ok_or(ZipError::Corrupt {
                offset: lh.pos - raw.len(),
                reason: "bad deflate stream",
            })?,
            method => return Err(ZipError::UnsupportedMethod { name, method }),
        };
        if bytes.len() != size as usize {
            return Err(ZipError::Corrupt {
                offset: local as usize,
                reason: "entry size does not match its header",
            });
        }
        out.push((name, bytes));
    }
    Ok(out)
}

fn inflate(raw: &[u8], size: usize) -> Option<Vec<u8>> {
    let mut out = Vec::with_capacity(size);
    // One byte of slack so oversized streams are detected, not truncated.
    DeflateDecoder::new(raw).take(size as u64 + 1).read_to_end(&mut out).ok()?;
    Some(out)
}

fn deflate(data: &[u8]) -> Vec<u8> {
    let mut enc = DeflateEncoder::new(Vec::new(), flate2::Compression::best());
    enc.write_all(data).expect("writing to a Vec cannot fail");
    enc.finish().expect("writing to a Vec cannot fail")
}

/// Deterministic archive. Duplicate names are rejected.
pub fn write_zip<'a>(entries: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> Result<Vec<u8>, ZipError> {
    let mut entries: Vec<(&str, &[u8])> = entries.into_iter().collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(ZipError::DuplicateEntry(w[0].0.to_string()));
    }
    if entries.len() >= u16::MAX as usize {
        return Err(ZipError::TooLarge);
    }

    let mut out = Vec::new();
    let mut central = Vec::new();
    for (name, data) in &entries {
        let offset = u32::try_from(out.len()).map_err(|_| ZipError::TooLarge)?;
        let crc = crc32fast::hash(data);
        let packed = deflate(data);
        let (method, body): (u16, &[u8]) = if packed.len() < data.len() {
            (DEFLATED, &packed)
        } else {
            (STORED, data)
        };
        let size = u32::try_from(data.len()).map_err(|_| ZipError::TooLarge)?;
        let csize = u32::try_from(body.len()).map_err(|_| ZipError::TooLarge)?;
        let name_len = u16::try_from(name.len()).map_err(|_| ZipError::TooLarge)?;

        let common = |buf: &mut Vec<u8>| {
            buf.extend_from_slice(&VERSION.to_le_bytes());
            buf.extend_from_slice(&FLAG_UTF8.to_le_bytes());
            buf.extend_from_slice(&method.to_le_bytes());
            buf.extend_from_slice(&0u16.to_le_bytes());
            buf.extend_from_slice(&EPOCH_DATE.to_le_bytes());
            buf.extend_from_slice(&crc.to_le_bytes());
            buf.extend_from_slice(&csize.to_le_bytes());
            buf.extend_from_slice(&size.to_le_bytes());
            buf.extend_from_slice(&name_len.to_le_bytes());
            buf.extend_from_slice(&0u16.to_le_bytes());
        };

        out.extend_from_slice(&LOCAL_SIG.to_le_bytes());
        common(&mut out);
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(body);

        central.extend_from_slice(&CENTRAL_SIG.to_le_bytes());
        central.extend_from_slice(&VERSION.to_le_bytes());
        common(&mut central);
        central.extend_from_slice(&[0; 10]);
        central.extend_from_slice(&offset.to_le_bytes());
        central.extend_from_slice(name.as_bytes());
    }
    let cd_offset = u32::try_from(out.len()).map_err(|_| ZipError::TooLarge)?;
    let cd_size = u32::try_from(central.len()).map_err(|_| ZipError::TooLarge)?;
    out.extend_from_slice(&central);
    out.extend_from_slice(&EOCD_SIG.to_le_bytes());
    out.extend_from_slice(&[0; 4]);
    out.extend_from_slice(&(entries.len() as u16).to_le_bytes());
    out.extend_from_slice(&(entries.len() as u16).to_le_bytes());
    out.extend_from_slice(&cd_size.to_le_bytes());
    out.extend_from_slice(&cd_offset.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_determinism() {
        let big = vec![b'a'; 4096];
        let entries = [("b.txt", &b"tiny"[..]), ("a/big.bin", &big[..]), ("empty", &[][..])];
        let zip = write_zip(entries).unwrap();
        assert_eq!(write_zip(entries).unwrap(), zip);
        let read = read_zip(&zip).unwrap();
        let names: Vec<&str> = read.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(names, ["a/big.bin", "b.txt", "empty"]);
        assert_eq!(read[0].1, big);
        assert!(zip.len() < 1024, "repetitive entry should be deflated");
    }

    #[test]
    fn empty_archive() {
        let zip = write_zip([]).unwrap();
        assert_eq!(zip.len(), EOCD_LEN);
        assert!(read_zip(&zip).unwrap().is_empty());
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        assert!(matches!(
            write_zip([("x", &b"1"[..]), ("x", &b"2"[..])]),
            Err(ZipError::DuplicateEntry(_))
        ));
        assert!(matches!(read_zip(b"definitely not a zip file"), Err(ZipError::NotZip(_))));
    }
}
