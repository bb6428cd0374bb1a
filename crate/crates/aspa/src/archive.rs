//! Archive-level diffing and patching over JAR-like ZIP files.

use std::collections::BTreeMap;

use aspa_core::{
    apply_patch, canonical_equal, diff_class, emit_class, parse_class, ArchivePatch, ClassAst, CodecError,
    EntryChange, PatchError, PatchNode,
};
use rayon::prelude::*;

use crate::zip::{read_zip, write_zip, ZipError};

/// Archive contents with entry metadata abstracted away.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Archive {
    /// By binary class name (`toy/Foo`).
    pub classes: BTreeMap<String, ClassAst>,
    /// Non-class entries by path.
    pub resources: BTreeMap<String, Vec<u8>>,
}

impl Archive {
    /// Same class and resource names, canonically equal classes, byte-equal resources.
    pub fn equivalent(&self, other: &Archive) -> bool {
        self.resources == other.resources
            && self.classes.len() == other.classes.len()
            && self
                .classes
                .iter()
                .zip(&other.classes)
                .all(|((n1, c1), (n2, c2))| n1 == n2 && canonical_equal(c1, c2))
    }
}

/// Class counts of an archive patch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ArchiveStats {
    pub patched: usize,
    pub added: usize,
    pub removed: usize,
    pub total: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error(transparent)]
    Zip(#[from] ZipError),
    #[error("entry {entry}: {source}")]
    Class { entry: String, source: CodecError },
    #[error("entry {entry} declares class {declared}")]
    NameMismatch { entry: String, declared: String },
    #[error("signed archives are not supported (found {0})")]
    Signed(String),
    #[error("multi-release archives are not supported (found {0})")]
    MultiRelease(String),
    #[error("class {class}: {source}")]
    Emit { class: String, source: CodecError },
    #[error("class {class}: {source}")]
    Patch { class: String, source: PatchError },
    #[error("patch mismatch at {entry}: {reason}")]
    Mismatch { entry: String, reason: &'static str },
}

impl ArchiveError {
    /// True if the archive and patch do not fit together (as opposed to bad input bytes).
    pub fn is_mismatch(&self) -> bool {
        matches!(self, ArchiveError::Patch { .. } | ArchiveError::Mismatch { .. })
    }
}

fn is_signature_file(name: &str) -> bool {
    let Some(file) = name.strip_prefix("META-INF/") else {
        return false;
    };
    !file.contains('/')
        && [".SF", ".RSA", ".DSA", ".EC"]
            .iter()
            .any(|ext| file.to_ascii_uppercase().ends_with(ext))
}

fn is_multi_release(name: &str, bytes: &[u8]) -> bool {
    name.starts_with("META-INF/versions/")
        || (name == "META-INF/MANIFEST.MF"
            && String::from_utf8_lossy(bytes)
                .lines()
                .any(|l| l.trim().eq_ignore_ascii_case("Multi-Release: true")))
}

/// Parses a ZIP archive. Class entries must declare the class their path names.
pub fn read_archive(bytes: &[u8]) -> Result<Archive, ArchiveError> {
    let entries = read_zip(bytes)?;
    for (name, data) in &entries {
        if is_signature_file(name) {
            return Err(ArchiveError::Signed(name.clone()));
        }
        if is_multi_release(name, data) {
            return Err(ArchiveError::MultiRelease(name.clone()));
        }
    }
    let (classes, resources): (Vec<_>, Vec<_>) = entries.into_iter().partition(|(n, _)| n.ends_with(".class"));
    let classes = classes
        .into_par_iter()
        .map(|(entry, data)| {
            let class = parse_class(&data).map_err(|source| ArchiveError::Class {
                entry: entry.clone(),
                source,
            })?;
            if entry.strip_suffix(".class") != Some(class.class_type.as_str()) {
                return Err(ArchiveError::NameMismatch {
                    entry,
                    declared: class.class_type,
                });
            }
            Ok((class.class_type.clone(), class))
        })
        .collect::<Result<BTreeMap<_, _>, _>>()?;
    Ok(Archive {
        classes,
        resources: resources.into_iter().collect(),
    })
}

/// Deterministic ZIP of the archive; class entries are named `<class>.class`.
pub fn write_archive(archive: &Archive) -> Result<Vec<u8>, ArchiveError> {
    let classes = archive
        .classes
        .par_iter()
        .map(|(name, class)| {
            emit_class(class)
                .map(|bytes| (format!("{name}.class"), bytes))
                .map_err(|source| ArchiveError::Emit {
                    class: name.clone(),
                    source,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let entries = classes
        .iter()
        .map(|(n, b)| (n.as_str(), b.as_slice()))
        .chain(archive.resources.iter().map(|(n, b)| (n.as_str(), b.as_slice())));
    Ok(write_zip(entries)?)
}

pub fn diff_archive(old: &Archive, new: &Archive) -> ArchivePatch {
    let patched = new
        .classes
        .par_iter()
        .filter_map(|(name, n)| {
            let o = old.classes.get(name)?;
            let patch = diff_class(o, n);
            (!patch.is_unchanged()).then(|| (name.clone(), patch))
        })
        .collect::<BTreeMap<String, PatchNode>>();
    let added = new
        .classes
        .iter()
        .filter(|(name, _)| !old.classes.contains_key(*name))
        .map(|(name, c)| (name.clone(), c.canonical()))
        .collect();
    let removed = old
        .classes
        .keys()
        .filter(|name| !new.classes.contains_key(*name))
        .cloned()
        .collect();
    let mut other_entries = BTreeMap::new();
    for (name, bytes) in &new.resources {
        match old.resources.get(name) {
            None => {
                other_entries.insert(name.clone(), EntryChange::Added(bytes.clone()));
            }
            Some(o) if o != bytes => {
                other_entries.insert(name.clone(), EntryChange::Replaced(bytes.clone()));
            }
            Some(_) => {}
        }
    }
    for name in old.resources.keys() {
        if !new.resources.contains_key(name) {
            other_entries.insert(name.clone(), EntryChange::Removed);
        }
    }
    ArchivePatch {
        patched,
        added,
        removed,
        other_entries,
    }
}

pub fn apply_archive_patch(patch: &ArchivePatch, old: &Archive) -> Result<Archive, ArchiveError> {
    let mismatch = |entry: &str, reason| ArchiveError::Mismatch {
        entry: entry.to_string(),
        reason,
    };
    for name in &patch.removed {
        if !old.classes.contains_key(name) {
            return Err(mismatch(name, "removed class is not in the archive"));
        }
    }
    for name in patch.added.keys() {
        if old.classes.contains_key(name) {
            return Err(mismatch(name, "added class is already in the archive"));
        }
        if patch.removed.contains(name) || patch.patched.contains_key(name) {
            return Err(mismatch(name, "class is both added and removed or patched"));
        }
    }
    let patched = patch
        .patched
        .par_iter()
        .map(|(name, node)| {
            if patch.removed.contains(name) {
                return Err(mismatch(name, "class is both patched and removed"));
            }
            let base = old
                .classes
                .get(name)
                .ok_or_else(|| mismatch(name, "patched class is not in the archive"))?;
            let class = apply_patch(node, base).map_err(|source| ArchiveError::Patch {
                class: name.clone(),
                source,
            })?;
            Ok((name.clone(), class))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut classes = old.classes.clone();
    for name in &patch.removed {
        classes.remove(name);
    }
    classes.extend(patched);
    classes.extend(patch.added.iter().map(|(n, c)| (n.clone(), c.clone())));

    let mut resources = old.resources.clone();
    for (name, change) in &patch.other_entries {
        match change {
            EntryChange::Added(bytes) => {
                if resources.insert(name.clone(), bytes.clone()).is_some() {
                    return Err(mismatch(name, "added entry is already in the archive"));
                }
            }
            EntryChange::Removed => {
                resources
                    .remove(name)
                    .ok_or_else(|| mismatch(name, "removed entry is not in the archive"))?;
            }
            EntryChange::Replaced(bytes) => {
                let slot = resources
                    .get_mut(name)
                    .ok_or_else(|| mismatch(name, "replaced entry is not in the archive"))?;
                *slot = bytes.clone();
            }
        }
    }
    Ok(Archive { classes, resources })
}

/// Class counts; resource changes are not counted.
pub fn archive_stats(patch: &ArchivePatch) -> ArchiveStats {
    let (patched, added, removed) = (patch.patched.len(), patch.added.len(), patch.removed.len());
    ArchiveStats {
        patched,
        added,
        removed,
        total: patched + added + removed,
    }
}
