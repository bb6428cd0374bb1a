mod common;

use aspa_core::{
    apply_patch, canonical_equal, decode_patch, diff_class, diff_seq, diff_set, encode_patch, parse_class, Compression,
    ConstantValue, Key, PatchBody, PatchNode, SeqOp, Value,
};
use aspa_fixtures::{foo_new, foo_old, generated_class, Layout};
use common::{corpus_asts, mutate::mutate};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

/// Minimum insertions plus deletions turning `a` into `b`, by the textbook LCS table.
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

/// Replays a sequence script against `old` without using the library's applier.
fn replay(old: &[String], patch: &PatchNode) -> Option<Vec<String>> {
    let ops = match patch {
        PatchNode::Unchanged => return Some(old.to_vec()),
        PatchNode::Seq(ops) => ops,
        _ => return None,
    };
    let mut out = Vec::new();
    let mut rest = old.iter();
    for op in ops {
        match op {
            SeqOp::Copy(n) => {
                for _ in 0..*n {
                    out.push(rest.next()?.clone());
                }
            }
            SeqOp::Delete(n) => {
                for _ in 0..*n {
                    rest.next()?;
                }
            }
            SeqOp::Insert(items) => {
                for v in items {
                    match v {
                        Value::Name(s) => out.push(s.clone()),
                        _ => return None,
                    }
                }
            }
            SeqOp::PatchItem(_) => return None,
        }
    }
    rest.next().is_none().then_some(out)
}

fn edit_count(patch: &PatchNode) -> usize {
    match patch {
        PatchNode::Seq(ops) => ops
            .iter()
            .map(|op| match op {
                SeqOp::Delete(n) => *n as usize,
                SeqOp::Insert(v) => v.len(),
                _ => 0,
            })
            .sum(),
        _ => 0,
    }
}

fn letters(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]).prop_map(String::from), 0..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn seq_script_is_shortest_and_correct(a in letters(40), b in letters(40)) {
        let patch = diff_seq(&a, &b);
        prop_assert_eq!(replay(&a, &patch), Some(b.clone()));
        prop_assert_eq!(edit_count(&patch), dp_distance(&a, &b));
        prop_assert_eq!(patch.is_unchanged(), a == b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mutated_corpus_patches_apply(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        for (name, old) in corpus_asts() {
            let new = mutate(&old, &mut rng, 4);
            let patch = diff_class(&old, &new);
            let applied = apply_patch(&patch, &old).map_err(|e| TestCaseError::fail(format!("{name}: {e}")))?;
            prop_assert!(canonical_equal(&applied, &new), "{}", name);
        }
    }
}

#[test]
fn identical_classes_give_unchanged() {
    for (name, c) in corpus_asts() {
        assert!(diff_class(&c, &c).is_unchanged(), "{name}");
        assert!(canonical_equal(&apply_patch(&PatchNode::Unchanged, &c).unwrap(), &c));
    }
}

#[test]
fn layout_only_changes_give_unchanged() {
    for (name, class) in aspa_fixtures::corpus() {
        let base = parse_class(&class.bytes()).unwrap();
        for seed in 1..6 {
            let layout = Layout {
                pool_seed: Some(seed),
                member_seed: Some(seed * 31),
            };
            let shuffled = parse_class(&class.bytes_with(layout)).unwrap();
            assert!(diff_class(&base, &shuffled).is_unchanged(), "{name} seed {seed}");
        }
    }
}

#[test]
fn reordering_members_gives_unchanged() {
    let mut rng = StdRng::seed_from_u64(7);
    for (name, mut c) in corpus_asts() {
        let old = c.clone();
        use rand::seq::SliceRandom;
        c.fields.shuffle(&mut rng);
        c.methods.shuffle(&mut rng);
        c.constants.shuffle(&mut rng);
        c.interfaces.shuffle(&mut rng);
        assert!(diff_class(&old, &c).is_unchanged(), "{name}");
    }
}

#[test]
fn patches_survive_the_wire() {
    let mut rng = StdRng::seed_from_u64(0xA5A5);
    for round in 0..40 {
        for (name, old) in corpus_asts() {
            let new = mutate(&old, &mut rng, 6);
            let patch = diff_class(&old, &new);
            for compression in [Compression::None, Compression::Deflate] {
                let bytes = encode_patch(&PatchBody::Class(patch.clone()), compression).unwrap();
                let decoded = decode_patch(&bytes).unwrap_or_else(|e| panic!("{name} round {round}: {e}"));
                assert_eq!(decoded, PatchBody::Class(patch.clone()), "{name} round {round}");
            }
        }
    }
}

#[test]
fn foo_patch_does_not_fit_other_classes() {
    let old = parse_class(&foo_old()).unwrap();
    let new = parse_class(&foo_new()).unwrap();
    let patch = diff_class(&old, &new);
    let other = parse_class(&generated_class("toy/Gen", 3, None).bytes()).unwrap();
    let err = apply_patch(&patch, &other).unwrap_err();
    assert!(!err.path.is_empty() || !err.reason.is_empty());
    // Applying twice must fail too: getX is already gone.
    let once = apply_patch(&patch, &old).unwrap();
    assert!(apply_patch(&patch, &once).is_err());
}

#[test]
fn set_diff_of_constants() {
    let old = [ConstantValue::utf8("a"), ConstantValue::Integer(1), ConstantValue::utf8("b")];
    let new = [ConstantValue::utf8("b"), ConstantValue::utf8("c"), ConstantValue::Integer(1)];
    let p = diff_set(&old, &new);
    assert_eq!(p.removed, vec![Key::Constant(ConstantValue::utf8("a"))]);
    assert_eq!(p.added, vec![Value::Constant(ConstantValue::utf8("c"))]);
    assert!(p.patched.is_empty());
    assert!(diff_set(&old, &old).is_empty());
}
