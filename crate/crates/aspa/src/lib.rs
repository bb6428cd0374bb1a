//! Archive handling and command-line front end for `aspa-core`.
//!
//! [`archive`] reads and writes JAR-like ZIP files with entry metadata
//! abstracted away and diffs or patches them class by class. [`cli`] is the
//! `aspa` binary.

pub mod archive;
pub mod cli;
pub mod zip;

pub use archive::{
    apply_archive_patch, archive_stats, diff_archive, read_archive, write_archive, Archive, ArchiveError,
    ArchiveStats,
};
pub use cli::run;
