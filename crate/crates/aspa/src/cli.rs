//! The `aspa` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 unreadable or malformed input,
//! 3 patch does not fit its base.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use aspa_core::{
    apply_patch, decode_patch, diff_class, dump_archive_patch, dump_patch, dump_patch_with_base, emit_class,
    encode_patch, parse_class, Compression, PatchBody, PatchNode,
};
use clap::{Parser, Subcommand, ValueEnum};

use crate::archive::{apply_archive_patch, archive_stats, diff_archive, read_archive, write_archive, ArchiveStats};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FORMAT: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "aspa", version, about = "Fine-grained patches for JVM class files and JARs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Derive a patch turning OLD into NEW (two classes or two archives).
    Diff {
        old: PathBuf,
        new: PathBuf,
        /// Output file (default: standard output).
        #[arg(short)]
        o: Option<PathBuf>,
        /// Write the payload uncompressed.
        #[arg(long)]
        no_compress: bool,
    },
    /// Apply PATCH to BASE.
    Apply {
        base: PathBuf,
        patch: PathBuf,
        #[arg(short)]
        o: Option<PathBuf>,
    },
    /// Print a patch in readable form.
    Dump {
        patch: PathBuf,
        /// Class the patch applies to; shows unchanged and deleted items by content.
        #[arg(long)]
        base: Option<PathBuf>,
        /// Class name heading a class patch (default: the patch file stem).
        #[arg(long)]
        name: Option<String>,
    },
    /// Count patched, added and removed classes between OLD and NEW.
    Stats {
        old: PathBuf,
        new: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        no_compress: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Tsv,
}

/// Failure with its exit code and one-line diagnostic.
struct Failure(i32, String);

impl Failure {
    fn format(msg: impl std::fmt::Display) -> Self {
        Failure(EXIT_FORMAT, msg.to_string())
    }
}

impl From<crate::archive::ArchiveError> for Failure {
    fn from(e: crate::archive::ArchiveError) -> Self {
        let code = if e.is_mismatch() { EXIT_MISMATCH } else { EXIT_FORMAT };
        Failure(code, e.to_string())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Class,
    Archive,
}

fn kind_of(path: &Path, bytes: &[u8]) -> Result<Kind, Failure> {
    match bytes {
        [0xCA, 0xFE, 0xBA, 0xBE, ..] => Ok(Kind::Class),
        [b'P', b'K', 3, 4, ..] | [b'P', b'K', 5, 6, ..] => Ok(Kind::Archive),
        _ => Err(Failure::format(format_args!(
            "{}: neither a class file nor a ZIP archive",
            path.display()
        ))),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::format(format_args!("{}: {e}", path.display())))
}

fn output(o: Option<&Path>, bytes: &[u8], stdout: &mut Vec<u8>) -> Result<(), Failure> {
    match o {
        Some(path) => std::fs::write(path, bytes),
        None => {
            stdout.extend_from_slice(bytes);
            Ok(())
        }
    }
    .map_err(|e| Failure::format(format_args!("cannot write output: {e}")))
}

fn parse(path: &Path, bytes: &[u8]) -> Result<aspa_core::ClassAst, Failure> {
    parse_class(bytes).map_err(|e| Failure::format(format_args!("{}: {e}", path.display())))
}

fn derive(old: &Path, new: &Path) -> Result<PatchBody, Failure> {
    let (a, b) = (read(old)?, read(new)?);
    match (kind_of(old, &a)?, kind_of(new, &b)?) {
        (Kind::Class, Kind::Class) => Ok(PatchBody::Class(diff_class(&parse(old, &a)?, &parse(new, &b)?))),
        (Kind::Archive, Kind::Archive) => Ok(PatchBody::Archive(diff_archive(
            &read_archive(&a)?,
            &read_archive(&b)?,
        ))),
        _ => Err(Failure::format("cannot diff a class file against an archive")),
    }
}

fn compression(no_compress: bool) -> Compression {
    if no_compress {
        Compression::None
    } else {
        Compression::Deflate
    }
}

fn encode(body: &PatchBody, no_compress: bool) -> Result<Vec<u8>, Failure> {
    encode_patch(body, compression(no_compress)).map_err(|e| Failure::format(format_args!("cannot encode patch: {e}")))
}

fn class_stats(node: &PatchNode) -> ArchiveStats {
    let patched = usize::from(!node.is_unchanged());
    ArchiveStats {
        patched,
        total: patched,
        ..ArchiveStats::default()
    }
}

fn execute(cli: Cli, stdout: &mut Vec<u8>) -> Result<(), Failure> {
    match cli.command {
        Command::Diff {
            old,
            new,
            o,
            no_compress,
        } => {
            let body = derive(&old, &new)?;
            output(o.as_deref(), &encode(&body, no_compress)?, stdout)
        }
        Command::Apply { base, patch, o } => {
            let base_bytes = read(&base)?;
            let kind = kind_of(&base, &base_bytes)?;
            let body = decode_patch(&read(&patch)?).map_err(|e| Failure::format(format_args!("{}: {e}", patch.display())))?;
            let bytes = match (kind, body) {
                (Kind::Class, PatchBody::Class(node)) => {
                    let old = parse(&base, &base_bytes)?;
                    let new = apply_patch(&node, &old).map_err(|e| Failure(EXIT_MISMATCH, e.to_string()))?;
                    emit_class(&new).map_err(|e| Failure::format(format_args!("cannot emit patched class: {e}")))?
                }
                (Kind::Archive, PatchBody::Archive(p)) => write_archive(&apply_archive_patch(&p, &read_archive(&base_bytes)?)?)?,
                (Kind::Class, PatchBody::Archive(_)) => {
                    return Err(Failure::format("archive patch cannot be applied to a class file"))
                }
                (Kind::Archive, PatchBody::Class(_)) => {
                    return Err(Failure::format("class patch cannot be applied to an archive"))
                }
            };
            output(o.as_deref(), &bytes, stdout)
        }
        Command::Dump { patch, base, name } => {
            let body = decode_patch(&read(&patch)?).map_err(|e| Failure::format(format_args!("{}: {e}", patch.display())))?;
            let text = match body {
                PatchBody::Class(node) => match (base, name) {
                    (Some(base), _) => dump_patch_with_base(&node, &parse(&base, &read(&base)?)?),
                    (None, Some(name)) => dump_patch(&node, &name),
                    (None, None) => {
                        let stem = patch.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                        dump_patch(&node, &stem)
                    }
                },
                PatchBody::Archive(p) => dump_archive_patch(&p),
            };
            output(None, text.as_bytes(), stdout)
        }
        Command::Stats {
            old,
            new,
            format,
            no_compress,
        } => {
            let body = derive(&old, &new)?;
            let size = encode(&body, no_compress)?.len();
            let s = match &body {
                PatchBody::Class(node) => class_stats(node),
                PatchBody::Archive(p) => archive_stats(p),
            };
            let text = match format {
                Format::Text => format!(
                    "p {}\n+ {}\n- {}\nΣ {}\npatch bytes {size}\n",
                    s.patched, s.added, s.removed, s.total
                ),
                Format::Tsv => format!(
                    "p\t+\t-\tΣ\tbytes\n{}\t{}\t{}\t{}\t{size}\n",
                    s.patched, s.added, s.removed, s.total
                ),
            };
            output(None, text.as_bytes(), stdout)
        }
    }
}

/// Size of the worker pool requested by `ASPA_THREADS` (0 or unset: automatic).
fn threads() -> usize {
    std::env::var("ASPA_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads()).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(stderr, "aspa: cannot start worker threads: {e}");
            return EXIT_USAGE;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| execute(cli, &mut buf));
    if let Err(e) = stdout.write_all(&buf).and_then(|()| stdout.flush()) {
        let _ = writeln!(stderr, "aspa: cannot write output: {e}");
        return EXIT_FORMAT;
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure(code, msg)) => {
            let _ = writeln!(stderr, "aspa: {msg}");
            code
        }
    }
}
