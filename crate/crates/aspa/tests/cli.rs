mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use aspa::archive::read_archive;
use aspa_core::{canonical_equal, emit_class, parse_class};
use aspa_fixtures::{foo_new, foo_old, generated_class, Layout};
use common::{class_entries, manifest, raw_zip, Meta};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: Vec<u8>,
    stderr: String,
}

impl Run {
    fn text(&self) -> String {
        String::from_utf8(self.stdout.clone()).unwrap()
    }
}

fn aspa(args: &[&str]) -> Run {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let code = aspa::run(std::iter::once("aspa").chain(args.iter().copied()), &mut stdout, &mut stderr);
    Run {
        code,
        stdout,
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, bytes: &[u8]) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, bytes).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn class_diff_apply_dump() {
    let dir = TempDir::new().unwrap();
    let old = write(&dir, "Foo-old.class", &foo_old());
    let new = write(&dir, "Foo-new.class", &foo_new());
    let patch = dir.path().join("Foo.aspa");
    let out = dir.path().join("Foo.class");

    let r = aspa(&["diff", s(&old), s(&new), "-o", s(&patch)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());

    let r = aspa(&["apply", s(&old), s(&patch), "-o", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let patched = std::fs::read(&out).unwrap();
    let expected = parse_class(&foo_new()).unwrap();
    assert!(canonical_equal(&parse_class(&patched).unwrap(), &expected));
    assert_eq!(patched, emit_class(&expected).unwrap());

    let r = aspa(&["dump", s(&patch)]);
    assert_eq!(r.code, 0);
    assert!(r.text().starts_with("p Foo {\n"), "{}", r.text());
    let r = aspa(&["dump", s(&patch), "--name", "toy.Foo"]);
    assert!(r.text().starts_with("p toy.Foo {\n"));
    let r = aspa(&["dump", s(&patch), "--base", s(&old)]);
    assert!(r.text().starts_with("p toy/Foo {\n"));
    assert!(r.text().contains("      - iconst_0\n      + iconst_1\n"));

    let r = aspa(&["diff", s(&old), s(&new), "--no-compress"]);
    assert_eq!(r.code, 0);
    assert_eq!(&r.stdout[..7], b"ASPA\x00\x01\x00");
}

#[test]
fn archive_workflow() {
    let dir = TempDir::new().unwrap();
    let v1: Vec<_> = (0..5).map(|i| generated_class(&format!("toy/K{i}"), 3, None)).collect();
    let mut v2 = v1.clone();
    v2[2] = generated_class("toy/K2", 3, Some(0));
    v2.push(generated_class("toy/K9", 1, None));
    let mut e1 = class_entries(&v1, Layout::default());
    e1.push(manifest());
    let mut e2 = class_entries(&v2, Layout::default());
    e2.push(manifest());
    let old = write(&dir, "v1.jar", &raw_zip(&e1, Meta::default()));
    let new = write(&dir, "v2.jar", &raw_zip(&e2, Meta::default()));
    let patch = dir.path().join("u.aspa");
    let out = dir.path().join("v2-patched.jar");

    assert_eq!(aspa(&["diff", s(&old), s(&new), "-o", s(&patch)]).code, 0);
    let r = aspa(&["apply", s(&old), s(&patch), "-o", s(&out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let got = read_archive(&std::fs::read(&out).unwrap()).unwrap();
    let want = read_archive(&std::fs::read(&new).unwrap()).unwrap();
    assert!(got.equivalent(&want));

    let r = aspa(&["stats", s(&old), s(&new)]);
    assert_eq!(r.code, 0);
    let text = r.text();
    assert!(text.starts_with("p 1\n+ 1\n- 0\nΣ 2\npatch bytes "), "{text}");
    let r = aspa(&["stats", s(&old), s(&new), "--format", "tsv"]);
    let lines: Vec<&str> = std::str::from_utf8(&r.stdout).unwrap().lines().collect();
    assert_eq!(lines[0], "p\t+\t-\tΣ\tbytes");
    assert!(lines[1].starts_with("1\t1\t0\t2\t"));

    let r = aspa(&["dump", s(&patch)]);
    assert!(r.text().contains("toy/K2"), "{}", r.text());
    assert!(r.text().contains("toy/K9"));

    let r = aspa(&["apply", s(&new), s(&patch)]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let old = write(&dir, "a.class", &foo_old());
    let new = write(&dir, "b.class", &foo_new());
    let junk = write(&dir, "junk.bin", b"hello world");
    let jar = write(&dir, "x.jar", &raw_zip(&[manifest()], Meta::default()));
    let patch = dir.path().join("p.aspa");

    assert_eq!(aspa(&[]).code, 1);
    assert_eq!(aspa(&["frobnicate"]).code, 1);
    assert_eq!(aspa(&["diff", s(&old)]).code, 1);
    assert_eq!(aspa(&["--help"]).code, 0);

    let r = aspa(&["diff", s(&old), s(&junk)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.starts_with("aspa: "), "{}", r.stderr);
    assert_eq!(aspa(&["diff", s(&old), "/nonexistent/x.class"]).code, 2);
    assert_eq!(aspa(&["diff", s(&old), s(&jar)]).code, 2);
    assert_eq!(aspa(&["dump", s(&junk)]).code, 2);

    assert_eq!(aspa(&["diff", s(&old), s(&new), "-o", s(&patch)]).code, 0);
    assert_eq!(aspa(&["apply", s(&jar), s(&patch)]).code, 2);
    let r = aspa(&["apply", s(&new), s(&patch)]);
    assert_eq!(r.code, 3);
    assert!(r.stderr.contains("mismatch"), "{}", r.stderr);
}

#[test]
fn binary_honours_thread_setting() {
    let dir = TempDir::new().unwrap();
    let old = write(&dir, "a.class", &foo_old());
    let new = write(&dir, "b.class", &foo_new());
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_aspa"))
            .args(["diff", s(&old), s(&new)])
            .env("ASPA_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = run("1");
    let four = run("4");
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);

    let bad = Command::new(env!("CARGO_BIN_EXE_aspa")).arg("apply").output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
