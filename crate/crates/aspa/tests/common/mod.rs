#![allow(dead_code)]

use aspa_fixtures::{ClassFile, Layout};

/// Entry metadata knobs for [`raw_zip`].
#[derive(Clone, Copy, Default)]
pub struct Meta {
    pub time: u16,
    pub date: u16,
    /// Store a wrong CRC-32 for every entry.
    pub bad_crc: bool,
}

/// Stored-only ZIP in exactly the given entry order.
pub fn raw_zip(entries: &[(String, Vec<u8>)], meta: Meta) -> Vec<u8> {
    let mut out = Vec::new();
    let mut central = Vec::new();
    for (name, data) in entries {
        let offset = out.len() as u32;
        let crc = crc32fast::hash(data) ^ u32::from(meta.bad_crc);
        let mut fields = Vec::new();
        fields.extend_from_slice(&10u16.to_le_bytes());
        fields.extend_from_slice(&0u16.to_le_bytes());
        fields.extend_from_slice(&0u16.to_le_bytes());
        fields.extend_from_slice(&meta.time.to_le_bytes());
        fields.extend_from_slice(&meta.date.to_le_bytes());
        fields.extend_from_slice(&crc.to_le_bytes());
        fields.extend_from_slice(&(data.len() as u32).to_le_bytes());
        fields.extend_from_slice(&(data.len() as u32).to_le_bytes());
        fields.extend_from_slice(&(name.len() as u16).to_le_bytes());
        fields.extend_from_slice(&0u16.to_le_bytes());

        out.extend_from_slice(b"PK\x03\x04");
        out.extend_from_slice(&fields);
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(data);

        central.extend_from_slice(b"PK\x01\x02");
        central.extend_from_slice(&10u16.to_le_bytes());
        central.extend_from_slice(&fields);
        central.extend_from_slice(&[0; 10]);
        central.extend_from_slice(&offset.to_le_bytes());
        central.extend_from_slice(name.as_bytes());
    }
    let cd_offset = out.len() as u32;
    out.extend_from_slice(&central);
    out.extend_from_slice(b"PK\x05\x06");
    out.extend_from_slice(&[0; 4]);
    out.extend_from_slice(&(entries.len() as u16).to_le_bytes());
    out.extend_from_slice(&(entries.len() as u16).to_le_bytes());
    out.extend_from_slice(&(central.len() as u32).to_le_bytes());
    out.extend_from_slice(&cd_offset.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out
}

/// `(entry name, class bytes)` for each class.
pub fn class_entries(classes: &[ClassFile], layout: Layout) -> Vec<(String, Vec<u8>)> {
    classes
        .iter()
        .map(|c| (format!("{}.class", c.name), c.bytes_with(layout)))
        .collect()
}

/// Corpus classes with distinct names.
pub fn corpus_classes() -> Vec<ClassFile> {
    aspa_fixtures::corpus()
        .into_iter()
        .filter(|(name, _)| !name.contains('#'))
        .map(|(_, c)| c)
        .collect()
}

pub fn manifest() -> (String, Vec<u8>) {
    ("META-INF/MANIFEST.MF".into(), b"Manifest-Version: 1.0\r\n\r\n".to_vec())
}
