use std::collections::BTreeSet;

use aspa_core::{canonical_equal, emit_class, parse_class, validate, CodecError, JavaType, Signature};
use aspa_fixtures::{corpus, foo_old, pool_end, ClassFile, Layout};

#[test]
fn corpus_parses_and_roundtrips() {
    for (name, class) in corpus() {
        let bytes = class.bytes();
        let ast = parse_class(&bytes).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(validate(&ast).is_empty(), "{name}: {:?}", validate(&ast));
        let emitted = emit_class(&ast).unwrap_or_else(|e| panic!("{name}: {e}"));
        let again = parse_class(&emitted).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(canonical_equal(&ast, &again), "{name}");
        assert_eq!(emit_class(&again).unwrap(), emitted, "{name}: emit is not a fixed point");
    }
}

#[test]
fn layout_variants_emit_identically() {
    for (name, class) in corpus() {
        let reference = emit_class(&parse_class(&class.bytes()).unwrap()).unwrap();
        for seed in [3, 17, 99] {
            let layout = Layout {
                pool_seed: Some(seed),
                member_seed: Some(seed + 1),
            };
            let ast = parse_class(&class.bytes_with(layout)).unwrap();
            assert_eq!(emit_class(&ast).unwrap(), reference, "{name} seed {seed}");
        }
    }
}

#[test]
fn foo_members() {
    let foo = parse_class(&foo_old()).unwrap();
    assert_eq!(foo.class_type, "toy/Foo");
    assert_eq!(foo.superclass.as_deref(), Some("java/lang/Object"));
    let fields: Vec<(&str, &JavaType)> = foo.fields.iter().map(|f| (f.name.as_str(), &f.ty)).collect();
    assert_eq!(fields, [("x", &JavaType::Int)]);
    let methods: BTreeSet<&Signature> = foo.methods.iter().map(|m| &m.signature).collect();
    let expected = [
        Signature::new("<init>", JavaType::Void, vec![]),
        Signature::new("sqX", JavaType::Int, vec![]),
        Signature::new("getX", JavaType::Int, vec![]),
    ];
    assert_eq!(methods, expected.iter().collect());
}

#[test]
fn every_truncation_is_an_error() {
    for (name, class) in corpus() {
        let bytes = class.bytes();
        for len in 0..bytes.len() {
            assert!(parse_class(&bytes[..len]).is_err(), "{name}: prefix of {len} bytes parsed");
        }
    }
}

#[test]
fn header_errors() {
    let mut bytes = foo_old();
    bytes[0] = 0xCB;
    assert!(matches!(parse_class(&bytes), Err(CodecError::BadMagic { found: 0xCBFEBABE })));

    for (major, ok) in [(44, false), (45, true), (52, true), (53, false)] {
        let bytes = ClassFile::new("toy/V").version(major, 0).bytes();
        let result = parse_class(&bytes);
        assert_eq!(result.is_ok(), ok, "major {major}: {result:?}");
        if !ok {
            assert_eq!(result, Err(CodecError::UnsupportedVersion { major, minor: 0 }));
        }
    }
    assert!(matches!(
        parse_class(&[0xCA, 0xFE, 0xBA, 0xBE, 0, 0]),
        Err(CodecError::Truncated { offset: 6 })
    ));
}

#[test]
fn bad_pool_reference_is_located() {
    let mut bytes = foo_old();
    let this_class = pool_end(&bytes) + 2;
    bytes[this_class..this_class + 2].copy_from_slice(&[0xFF, 0xF0]);
    match parse_class(&bytes) {
        Err(CodecError::BadPoolReference { index, offset, .. }) => {
            assert_eq!((index, offset), (0xFFF0, this_class));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_opcode_is_located() {
    let class = ClassFile::new("toy/Op").method(0x0009, "f", "()V", 1, 0, "bipush 77\npop\nreturn");
    let mut bytes = class.bytes();
    let at = bytes.windows(4).position(|w| w == [0x10, 77, 0x57, 0xB1]).unwrap() + 2;
    bytes[at] = 0xCB;
    assert_eq!(
        parse_class(&bytes),
        Err(CodecError::UnknownOpcode { opcode: 0xCB, offset: at })
    );
}

#[test]
fn corrupted_bytes_never_panic() {
    let mut state = 0x9E37_79B9_7F4A_7C15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for (_, class) in corpus() {
        let bytes = class.bytes();
        for _ in 0..300 {
            let mut b = bytes.clone();
            for _ in 0..1 + next() % 4 {
                let i = (next() % b.len() as u64) as usize;
                b[i] = next() as u8;
            }
            if let Ok(ast) = parse_class(&b) {
                let _ = emit_class(&ast);
            }
        }
    }
}
