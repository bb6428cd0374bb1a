//! The class-file string encoding: UTF-8 except that NUL is two bytes
//! (`C0 80`) and supplementary characters are written as surrogate pairs.

use alloc::string::String;
use alloc::vec::Vec;

pub(crate) fn decode(bytes: &[u8]) -> Option<String> {
    if bytes.is_ascii() && !bytes.contains(&0) {
        return core::str::from_utf8(bytes).ok().map(String::from);
    }
    let mut units: Vec<u16> = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let cont = |j: usize| bytes.get(j).copied().filter(|c| c & 0xc0 == 0x80);
        match b {
            0x01..=0x7f => {
                units.push(u16::from(b));
                i += 1;
            }
            0xc0..=0xdf => {
                let c1 = cont(i + 1)?;
                units.push((u16::from(b & 0x1f) << 6) | u16::from(c1 & 0x3f));
                i += 2;
            }
            0xe0..=0xef => {
                let c1 = cont(i + 1)?;
                let c2 = cont(i + 2)?;
                units.push(
                    (u16::from(b & 0x0f) << 12) | (u16::from(c1 & 0x3f) << 6) | u16::from(c2 & 0x3f),
                );
                i += 3;
            }
            _ => return None,
        }
    }
    String::from_utf16(&units).ok()
}

pub(crate) fn encode_into(s: &str, out: &mut Vec<u8>) {
    for ch in s.chars() {
        let c = ch as u32;
        match c {
            0x01..=0x7f => out.push(c as u8),
            0 | 0x80..=0x7ff => {
                out.push(0xc0 | (c >> 6) as u8);
                out.push(0x80 | (c & 0x3f) as u8);
            }
            0x800..=0xffff => push3(c as u16, out),
            _ => {
                let mut pair = [0u16; 2];
                for unit in ch.encode_utf16(&mut pair) {
                    push3(*unit, out);
                }
            }
        }
    }
}

fn push3(unit: u16, out: &mut Vec<u8>) {
    out.push(0xe0 | (unit >> 12) as u8);
    out.push(0x80 | ((unit >> 6) & 0x3f) as u8);
    out.push(0x80 | (unit & 0x3f) as u8);
}

pub(crate) fn encode(s: &str) -> Vec<u8> {
    let mut out = Vec::with_capacity(s.len());
    encode_into(s, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrips_special_characters() {
        for s in ["", "abc", "a\0b", "é", "中文", "😀x", "\u{7ff}\u{800}\u{ffff}"] {
            let enc = encode(s);
            assert!(!enc.contains(&0));
            assert_eq!(decode(&enc).as_deref(), Some(s));
        }
        assert_eq!(encode("\0"), [0xc0, 0x80]);
        assert_eq!(encode("😀").len(), 6);
    }

    #[test]
    fn rejects_raw_nul_and_lone_surrogates() {
        assert!(decode(&[b'a', 0]).is_none());
        assert!(decode(&[0xed, 0xa0, 0x80]).is_none());
        assert!(decode(&[0xf0, 0x9f, 0x98, 0x80]).is_none());
        assert!(decode(&[0xc3]).is_none());
    }
}
