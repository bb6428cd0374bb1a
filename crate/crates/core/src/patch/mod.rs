//! Patch files: a small header followed by a (possibly deflated) payload.
//!
//! ```text
//! "ASPA"  u16 format version  u8 compression  payload
//! ```
//!
//! The payload starts with a body kind byte (`C` for one class, `A` for an
//! archive) followed by the encoded [`PatchNode`] or [`ArchivePatch`].

mod dump;
mod wire;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::ClassAst;
use crate::codec::CodecError;
use crate::diff::PatchNode;

pub use dump::{dump_archive_patch, dump_patch, dump_patch_with_base};

pub const PATCH_MAGIC: [u8; 4] = *b"ASPA";
pub const FORMAT_VERSION: u16 = 1;
/// Magic, format version and compression byte.
pub const HEADER_LEN: usize = 7;

const BODY_CLASS: u8 = b'C';
const BODY_ARCHIVE: u8 = b'A';
const DEFLATE_LEVEL: u8 = 9;

/// Payload compression recorded in the header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Compression {
    None = 0,
    Deflate = 1,
}

/// Change to a non-class archive entry. Such entries are handled whole.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EntryChange {
    Added(Vec<u8>),
    Removed,
    Replaced(Vec<u8>),
}

/// One patch covering every class of an archive. Class maps are keyed by
/// binary class name (`toy/Foo`); `other_entries` by entry path.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArchivePatch {
    pub patched: BTreeMap<String, PatchNode>,
    pub added: BTreeMap<String, ClassAst>,
    pub removed: BTreeSet<String>,
    pub other_entries: BTreeMap<String, EntryChange>,
}

impl ArchivePatch {
    pub fn is_empty(&self) -> bool {
        self.patched.is_empty() && self.added.is_empty() && self.removed.is_empty() && self.other_entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PatchBody {
    Class(PatchNode),
    Archive(ArchivePatch),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("not a patch file (bad magic)")]
    BadMagic,
    #[error("unsupported patch format version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown compression method {0}")]
    UnknownCompression(u8),
    #[error("corrupt compressed payload")]
    CorruptCompression,
    #[error("unknown patch body kind {0:#04x}")]
    UnknownBody(u8),
    #[error("unknown node tag {tag:#04x} at payload offset {offset}")]
    UnknownNodeTag { tag: u8, offset: usize },
    #[error("truncated patch at payload offset {offset}")]
    Truncated { offset: usize },
    #[error("bad varint at payload offset {offset}")]
    BadVarint { offset: usize },
    #[error("bad patch value at payload offset {offset}: {reason}")]
    BadValue { offset: usize, reason: &'static str },
    #[error("trailing bytes after patch body at payload offset {offset}")]
    TrailingBytes { offset: usize },
    #[error(transparent)]
    Codec(#[from] CodecError),
}

/// Serializes a patch. With [`Compression::Deflate`] the payload is deflated
/// only if that makes it smaller; the header records what was written.
pub fn encode_patch(body: &PatchBody, compression: Compression) -> Result<Vec<u8>, FormatError> {
    let mut payload = Vec::new();
    match body {
        PatchBody::Class(node) => {
            payload.push(BODY_CLASS);
            wire::encode_node(node, &mut payload)?;
        }
        PatchBody::Archive(archive) => {
            payload.push(BODY_ARCHIVE);
            wire::encode_archive(archive, &mut payload)?;
        }
    }
    let mut method = Compression::None;
    if compression == Compression::Deflate {
        let packed = miniz_oxide::deflate::compress_to_vec(&payload, DEFLATE_LEVEL);
        if packed.len() < payload.len() {
            payload = packed;
            method = Compression::Deflate;
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&PATCH_MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_be_bytes());
    out.push(method as u8);
    out.extend_from_slice(&payload);
    Ok(out)
}

pub fn decode_patch(bytes: &[u8]) -> Result<PatchBody, FormatError> {
    if bytes.len() < PATCH_MAGIC.len() {
        return if PATCH_MAGIC.starts_with(bytes) {
            Err(FormatError::Truncated { offset: 0 })
        } else {
            Err(FormatError::BadMagic)
        };
    }
    if bytes[..4] != PATCH_MAGIC {
        return Err(FormatError::BadMagic);
    }
    if bytes.len() < HEADER_LEN {
        return Err(FormatError::Truncated { offset: 0 });
    }
    let version = u16::from_be_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let inflated;
    let payload = match bytes[6] {
        0 => &bytes[HEADER_LEN..],
        1 => {
            inflated = inflate(&bytes[HEADER_LEN..])?;
            &inflated[..]
        }
        other => return Err(FormatError::UnknownCompression(other)),
    };
    let mut r = wire::In::new(payload);
    let body = match r.u8()? {
        BODY_CLASS => PatchBody::Class(wire::decode_node(&mut r, 0)?),
        BODY_ARCHIVE => PatchBody::Archive(wire::decode_archive(&mut r)?),
        other => return Err(FormatError::UnknownBody(other)),
    };
    if !r.is_empty() {
        return Err(FormatError::TrailingBytes { offset: r.offset() });
    }
    Ok(body)
}

fn inflate(data: &[u8]) -> Result<Vec<u8>, FormatError> {
    use miniz_oxide::inflate::{decompress_to_vec, TINFLStatus};
    decompress_to_vec(data).map_err(|e| match e.status {
        TINFLStatus::FailedCannotMakeProgress => FormatError::Truncated { offset: e.output.len() },
        _ => FormatError::CorruptCompression,
    })
}
