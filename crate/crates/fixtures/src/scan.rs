//! Read-only scan of a class file's constant pool, used as an oracle.

use std::collections::BTreeSet;

/// Utf8 entries of the constant pool, decoded from modified UTF-8.
/// Panics on malformed input; fixtures are trusted.
pub fn utf8_constants(class: &[u8]) -> BTreeSet<String> {
    walk(class).0
}

/// Offset of `access_flags`, the first byte after the constant pool.
pub fn pool_end(class: &[u8]) -> usize {
    walk(class).1
}

fn walk(class: &[u8]) -> (BTreeSet<String>, usize) {
    assert_eq!(&class[..4], [0xCA, 0xFE, 0xBA, 0xBE], "not a class file");
    let count = u16::from_be_bytes([class[8], class[9]]) as usize;
    let mut out = BTreeSet::new();
    let mut pos = 10;
    let mut index = 1;
    while index < count {
        let tag = class[pos];
        pos += 1;
        let (len, slots) = match tag {
            1 => {
                let n = u16::from_be_bytes([class[pos], class[pos + 1]]) as usize;
                out.insert(demutf8(&class[pos + 2..pos + 2 + n]));
                (2 + n, 1)
            }
            3 | 4 | 9 | 10 | 11 | 12 | 18 => (4, 1),
            5 | 6 => (8, 2),
            7 | 8 | 16 => (2, 1),
            15 => (3, 1),
            t => panic!("unknown constant tag {t}"),
        };
        pos += len;
        index += slots;
    }
    (out, pos)
}

fn demutf8(bytes: &[u8]) -> String {
    let mut units = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i] as u16;
        let (unit, n) = if b < 0x80 {
            (b, 1)
        } else if b & 0xE0 == 0xC0 {
            (((b & 0x1F) << 6) | (bytes[i + 1] as u16 & 0x3F), 2)
        } else {
            let unit = ((b & 0x0F) << 12) | ((bytes[i + 1] as u16 & 0x3F) << 6) | (bytes[i + 2] as u16 & 0x3F);
            (unit, 3)
        };
        units.push(unit);
        i += n;
    }
    String::from_utf16(&units).expect("fixture strings are well-formed")
}
