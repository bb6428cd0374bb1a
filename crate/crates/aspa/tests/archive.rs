mod common;

use aspa::archive::{
    apply_archive_patch, archive_stats, diff_archive, read_archive, write_archive, ArchiveError, ArchiveStats,
};
use aspa::zip::{read_zip, ZipError};
use aspa_core::{decode_patch, encode_patch, Compression, EntryChange, PatchBody};
use aspa_fixtures::{generated_class, Layout};
use common::{class_entries, corpus_classes, manifest, raw_zip, Meta};

fn jar(entries: &[(String, Vec<u8>)]) -> Vec<u8> {
    raw_zip(entries, Meta::default())
}

#[test]
fn read_write_roundtrip() {
    let mut entries = class_entries(&corpus_classes(), Layout::default());
    entries.push(manifest());
    entries.push(("res/data.bin".into(), vec![7; 100]));
    let archive = read_archive(&jar(&entries)).unwrap();
    assert_eq!(archive.classes.len(), corpus_classes().len());
    assert_eq!(archive.resources.len(), 2);

    let written = write_archive(&archive).unwrap();
    assert_eq!(write_archive(&archive).unwrap(), written);
    let again = read_archive(&written).unwrap();
    assert!(again.equivalent(&archive));
    let names: Vec<String> = read_zip(&written).unwrap().into_iter().map(|(n, _)| n).collect();
    let mut sorted = names.clone();
    sorted.sort();
    assert_eq!(names, sorted);
}

#[test]
fn diff_and_apply() {
    let old_classes: Vec<_> = (0..6).map(|i| generated_class(&format!("toy/C{i}"), 4, None)).collect();
    let mut new_classes: Vec<_> = old_classes[..4].to_vec();
    new_classes[1] = generated_class("toy/C1", 4, Some(2));
    new_classes[3] = generated_class("toy/C3", 5, None);
    new_classes.push(generated_class("toy/N", 1, None));

    let mut old_entries = class_entries(&old_classes, Layout::default());
    old_entries.push(manifest());
    old_entries.push(("gone.txt".into(), b"bye".to_vec()));
    old_entries.push(("kept.txt".into(), b"v1".to_vec()));
    let mut new_entries = class_entries(&new_classes, Layout::default());
    new_entries.push(manifest());
    new_entries.push(("kept.txt".into(), b"v2".to_vec()));
    new_entries.push(("fresh.txt".into(), b"hi".to_vec()));

    let old = read_archive(&jar(&old_entries)).unwrap();
    let new = read_archive(&jar(&new_entries)).unwrap();
    let patch = diff_archive(&old, &new);

    assert_eq!(patch.patched.keys().collect::<Vec<_>>(), ["toy/C1", "toy/C3"]);
    assert_eq!(patch.added.keys().collect::<Vec<_>>(), ["toy/N"]);
    assert_eq!(patch.removed.iter().collect::<Vec<_>>(), ["toy/C4", "toy/C5"]);
    assert_eq!(patch.other_entries.len(), 3);
    assert_eq!(patch.other_entries["gone.txt"], EntryChange::Removed);
    assert_eq!(patch.other_entries["kept.txt"], EntryChange::Replaced(b"v2".to_vec()));
    assert_eq!(patch.other_entries["fresh.txt"], EntryChange::Added(b"hi".to_vec()));
    assert_eq!(
        archive_stats(&patch),
        ArchiveStats {
            patched: 2,
            added: 1,
            removed: 2,
            total: 5
        }
    );

    let bytes = encode_patch(&PatchBody::Archive(patch.clone()), Compression::Deflate).unwrap();
    let PatchBody::Archive(decoded) = decode_patch(&bytes).unwrap() else {
        panic!("class body")
    };
    assert_eq!(decoded, patch);

    let applied = apply_archive_patch(&decoded, &old).unwrap();
    assert!(applied.equivalent(&new));
    let rewritten = read_archive(&write_archive(&applied).unwrap()).unwrap();
    assert!(rewritten.equivalent(&new));

    let err = apply_archive_patch(&decoded, &new).unwrap_err();
    assert!(err.is_mismatch(), "{err}");
}

#[test]
fn patched_class_with_wrong_content_is_a_mismatch() {
    let archive = |n| read_archive(&jar(&class_entries(&[generated_class("toy/A", n, None)], Layout::default()))).unwrap();
    // Additions are local: growing 3 -> 4 methods also applies to a 2-method base.
    let grow = diff_archive(&archive(3), &archive(4));
    assert_eq!(apply_archive_patch(&grow, &archive(2)).unwrap().classes["toy/A"].methods.len(), 4);
    // Removing m2 needs m2.
    let patch = diff_archive(&archive(3), &archive(2));
    let other = archive(1);
    let err = apply_archive_patch(&patch, &other).unwrap_err();
    assert!(matches!(err, ArchiveError::Patch { .. }), "{err}");
}

#[test]
fn entry_name_must_match_class() {
    let bytes = generated_class("toy/A", 1, None).bytes();
    let err = read_archive(&jar(&[("toy/B.class".into(), bytes)])).unwrap_err();
    assert!(matches!(err, ArchiveError::NameMismatch { .. }), "{err}");
}

#[test]
fn unsupported_archives() {
    let signed = jar(&[("META-INF/KEY.RSA".into(), vec![1])]);
    assert!(matches!(read_archive(&signed), Err(ArchiveError::Signed(_))));
    let mr = jar(&[(
        "META-INF/MANIFEST.MF".into(),
        b"Manifest-Version: 1.0\r\nMulti-Release: true\r\n".to_vec(),
    )]);
    assert!(matches!(read_archive(&mr), Err(ArchiveError::MultiRelease(_))));
    let dup = jar(&[("a".into(), vec![1]), ("a".into(), vec![2])]);
    assert!(matches!(
        read_archive(&dup),
        Err(ArchiveError::Zip(ZipError::DuplicateEntry(_)))
    ));
    let bad = jar(&[("toy/X.class".into(), vec![0xCA, 0xFE, 0xBA, 0xBE, 0])]);
    assert!(matches!(read_archive(&bad), Err(ArchiveError::Class { .. })));
}

#[test]
fn directory_entries_are_ignored() {
    let mut entries = class_entries(&[generated_class("toy/A", 1, None)], Layout::default());
    entries.insert(0, ("toy/".into(), vec![]));
    let archive = read_archive(&jar(&entries)).unwrap();
    assert_eq!(archive.classes.len(), 1);
    assert!(archive.resources.is_empty());
}
