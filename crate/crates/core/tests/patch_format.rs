mod common;

use aspa_core::{
    decode_patch, diff_class, dump_archive_patch, dump_patch, dump_patch_with_base, encode_patch, parse_class,
    ArchivePatch, Compression, EntryChange, FormatError, PatchBody, PatchNode,
};
use aspa_fixtures::{foo_new, foo_old, generated_class, ClassFile};
use common::{corpus_asts, mutate::mutate};
use rand::rngs::StdRng;
use rand::SeedableRng;

fn foo_patch() -> PatchBody {
    let old = parse_class(&foo_old()).unwrap();
    let new = parse_class(&foo_new()).unwrap();
    PatchBody::Class(diff_class(&old, &new))
}

#[test]
fn unchanged_is_header_body_kind_and_tag() {
    let bytes = encode_patch(&PatchBody::Class(PatchNode::Unchanged), Compression::Deflate).unwrap();
    // magic, format version 1, no compression, class body, Unchanged tag.
    assert_eq!(bytes, b"ASPA\x00\x01\x00C=");
    assert_eq!(decode_patch(&bytes).unwrap(), PatchBody::Class(PatchNode::Unchanged));
}

#[test]
fn compression_byte_records_the_method_used() {
    let p = foo_patch();
    let plain = encode_patch(&p, Compression::None).unwrap();
    let packed = encode_patch(&p, Compression::Deflate).unwrap();
    assert_eq!(plain[6], 0);
    assert_eq!(packed[6], 1);
    assert!(packed.len() < plain.len());
    assert_eq!(decode_patch(&plain).unwrap(), p);
    assert_eq!(decode_patch(&packed).unwrap(), p);
    assert_eq!(encode_patch(&p, Compression::Deflate).unwrap(), packed, "encoding is deterministic");
}

#[test]
fn header_errors() {
    let good = encode_patch(&foo_patch(), Compression::None).unwrap();
    let with = |i: usize, b: u8| {
        let mut v = good.clone();
        v[i] = b;
        decode_patch(&v)
    };
    assert_eq!(with(0, b'B'), Err(FormatError::BadMagic));
    assert_eq!(with(5, 2), Err(FormatError::UnsupportedVersion(2)));
    assert_eq!(with(6, 9), Err(FormatError::UnknownCompression(9)));
    assert_eq!(with(7, b'Z'), Err(FormatError::UnknownBody(b'Z')));
    // Offsets count from the start of the payload, which begins at the body kind byte.
    assert_eq!(with(8, 0x77), Err(FormatError::UnknownNodeTag { tag: 0x77, offset: 1 }));
    let mut trailing = good.clone();
    trailing.push(0);
    assert!(matches!(decode_patch(&trailing), Err(FormatError::TrailingBytes { .. })));
    let mut packed = encode_patch(&foo_patch(), Compression::Deflate).unwrap();
    packed.truncate(packed.len() - 3);
    assert!(decode_patch(&packed).is_err());
}

#[test]
fn bad_varint_is_rejected() {
    // Seq node whose op count never terminates.
    let mut bytes = b"ASPA\x00\x01\x00CQ\x00".to_vec();
    bytes.extend_from_slice(&[0xFF; 11]);
    assert!(matches!(decode_patch(&bytes), Err(FormatError::BadVarint { .. })));
}

#[test]
fn every_truncation_is_an_error() {
    for compression in [Compression::None, Compression::Deflate] {
        let bytes = encode_patch(&foo_patch(), compression).unwrap();
        for len in 0..bytes.len() {
            assert!(decode_patch(&bytes[..len]).is_err(), "{compression:?}: prefix {len}");
        }
    }
}

#[test]
fn corrupted_patches_never_panic() {
    let mut rng = StdRng::seed_from_u64(11);
    for (_, old) in corpus_asts() {
        let new = mutate(&old, &mut rng, 5);
        let bytes = encode_patch(&PatchBody::Class(diff_class(&old, &new)), Compression::None).unwrap();
        for i in 7..bytes.len() {
            for flip in [0x01, 0x80, 0xFF] {
                let mut b = bytes.clone();
                b[i] ^= flip;
                let _ = decode_patch(&b);
            }
        }
    }
}

#[test]
fn deep_nesting_is_bounded() {
    let mut bytes = b"ASPA\x00\x01\x00C".to_vec();
    for _ in 0..10_000 {
        bytes.extend_from_slice(&[b'T', 0x01]);
    }
    bytes.push(b'=');
    assert!(decode_patch(&bytes).is_err());
}

#[test]
fn archive_patch_roundtrip() {
    let mut p = ArchivePatch::default();
    if let PatchBody::Class(node) = foo_patch() {
        p.patched.insert("toy/Foo".into(), node);
    }
    let added = parse_class(&generated_class("toy/Gen", 2, None).bytes()).unwrap();
    p.added.insert("toy/Gen".into(), added.canonical());
    p.removed.insert("toy/Old".into());
    p.other_entries.insert("META-INF/MANIFEST.MF".into(), EntryChange::Replaced(b"Manifest-Version: 1.0\n".to_vec()));
    p.other_entries.insert("a.txt".into(), EntryChange::Removed);
    p.other_entries.insert("b.bin".into(), EntryChange::Added(vec![0, 1, 2]));
    let body = PatchBody::Archive(p);
    for compression in [Compression::None, Compression::Deflate] {
        let bytes = encode_patch(&body, compression).unwrap();
        if compression == Compression::None {
            assert_eq!(bytes[7], b'A');
        }
        assert_eq!(decode_patch(&bytes).unwrap(), body);
    }

    let empty = encode_patch(&PatchBody::Archive(ArchivePatch::default()), Compression::Deflate).unwrap();
    assert!(empty.len() <= 7 + 8, "{} bytes", empty.len());
    assert_eq!(decode_patch(&empty).unwrap(), PatchBody::Archive(ArchivePatch::default()));
}

#[test]
fn foo_dump() {
    let PatchBody::Class(patch) = foo_patch() else { unreachable!() };
    let old = parse_class(&foo_old()).unwrap();
    let text = dump_patch_with_base(&patch, &old);
    let expected = r#"p toy/Foo {
 p constants {
  + utf8 "(I)V"
  - utf8 "getX"
  + utf8 "setX"
  + utf8 "y"
  + fieldref toy/Foo.y:int
  + nameandtype y:I
 }
 p fields {
  + name=y type=int flags=0x0002
 }
 p methods {
  p Foo() {
   p attributes {
    p Code {
     p instructions {
      = aload_0
      = invokespecial java/lang/Object.<init>()
      = aload_0
      - iconst_0
      + iconst_1
      = putfield toy/Foo.x:int
      + aload_0
      + iconst_0
      + putfield toy/Foo.y:int
      = return
     }
    }
   }
  }
  - int getX()
  + void setX(int)
 }
}
"#;
    assert_eq!(text, expected);

    let bare = dump_patch(&patch, "Foo");
    assert!(bare.starts_with("p Foo {\n"));
    assert!(bare.contains("      = 3 unchanged\n      - #3\n      + iconst_1\n"));
    assert!(!bare.contains("sqX"));
}

#[test]
fn version_only_dump() {
    let old = parse_class(&ClassFile::new("toy/V").version(52, 0).bytes()).unwrap();
    let new = parse_class(&ClassFile::new("toy/V").version(51, 0).bytes()).unwrap();
    let text = dump_patch(&diff_class(&old, &new), "toy/V");
    assert!(text.starts_with("p toy/V {"));
    assert!(text.contains("version -> 51.0"), "{text}");
    assert!(!text.contains("methods") && !text.contains("fields"));
}

#[test]
fn archive_dump_lists_entries() {
    let mut p = ArchivePatch::default();
    p.removed.insert("toy/Gone".into());
    p.other_entries.insert("x.txt".into(), EntryChange::Added(vec![]));
    let text = dump_archive_patch(&p);
    assert!(text.contains("toy/Gone"), "{text}");
    assert!(text.contains("x.txt"), "{text}");
}
