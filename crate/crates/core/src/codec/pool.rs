use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::bytes::{PutBe, Reader};
use super::{mutf8, CodecError};
use crate::ast::{
    AttributeAst, AttributeContent, ClassAst, CodeAst, ConstantValue, FieldAst, FrameKind,
    InnerClass, Instruction, MemberKind, MemberRef, MethodAst, Operand, StackFrame,
    VerificationType,
};

/// Largest number of pool slots a class file can hold (count field is `slots + 1`).
pub const MAX_POOL_SLOTS: usize = 65534;

/// A constant pool read from a class file (or a patch mini-pool), with every
/// entry resolved to a self-contained value.
#[derive(Clone, Debug, Default)]
pub struct ConstantPool {
    /// Indexed by pool index; slot 0 and the phantom slot after long/double are `None`.
    entries: Vec<Option<ConstantValue>>,
}

enum Raw {
    Utf8(String),
    Value(ConstantValue),
    Class(u16),
    String(u16),
    Member(MemberKind, u16, u16),
    NameAndType(u16, u16),
    MethodHandle(u8, u16),
    MethodType(u16),
    InvokeDynamic(u16, u16),
    Phantom,
}

impl ConstantPool {
    /// Reads `count - 1` slots (the class-file `constant_pool_count` convention).
    pub(crate) fn read(r: &mut Reader<'_>, count: u16) -> Result<Self, CodecError> {
        let mut raw: Vec<(Raw, usize)> = Vec::with_capacity(count as usize);
        raw.push((Raw::Phantom, r.offset()));
        while raw.len() < count as usize {
            let offset = r.offset();
            let tag = r.u8()?;
            let entry = match tag {
                1 => {
                    let len = r.u16()? as usize;
                    let bytes = r.bytes(len)?;
                    Raw::Utf8(mutf8::decode(bytes).ok_or(CodecError::BadUtf8 { offset })?)
                }
                3 => Raw::Value(ConstantValue::Integer(r.i32()?)),
                4 => Raw::Value(ConstantValue::Float(r.u32()?)),
                5 => Raw::Value(ConstantValue::Long(r.u64()? as i64)),
                6 => Raw::Value(ConstantValue::Double(r.u64()?)),
                7 => Raw::Class(r.u16()?),
                8 => Raw::String(r.u16()?),
                9 => Raw::Member(MemberKind::Field, r.u16()?, r.u16()?),
                10 => Raw::Member(MemberKind::Method, r.u16()?, r.u16()?),
                11 => Raw::Member(MemberKind::InterfaceMethod, r.u16()?, r.u16()?),
                12 => Raw::NameAndType(r.u16()?, r.u16()?),
                15 => Raw::MethodHandle(r.u8()?, r.u16()?),
                16 => Raw::MethodType(r.u16()?),
                18 => Raw::InvokeDynamic(r.u16()?, r.u16()?),
                _ => return Err(CodecError::BadConstantTag { tag, offset }),
            };
            let wide = matches!(
                entry,
                Raw::Value(ConstantValue::Long(_)) | Raw::Value(ConstantValue::Double(_))
            );
            raw.push((entry, offset));
            if wide {
                if raw.len() >= count as usize {
                    return Err(CodecError::Malformed {
                        offset,
                        reason: "8-byte constant in last pool slot",
                    });
                }
                raw.push((Raw::Phantom, offset));
            }
        }
        let mut entries = Vec::with_capacity(raw.len());
        for i in 0..raw.len() {
            entries.push(match raw[i].0 {
                Raw::Phantom => None,
                _ => Some(resolve(&raw, i as u16, raw[i].1, 0)?),
            });
        }
        Ok(ConstantPool { entries })
    }

    pub fn get(&self, index: u16) -> Option<&ConstantValue> {
        self.entries.get(index as usize).and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.iter().all(Option::is_none)
    }

    /// Resolved entries in pool order.
    pub fn values(&self) -> impl Iterator<Item = &ConstantValue> {
        self.entries.iter().flatten()
    }

    pub(crate) fn entry(
        &self,
        index: u16,
        offset: usize,
        expected: &'static str,
    ) -> Result<&ConstantValue, CodecError> {
        self.get(index)
            .ok_or(CodecError::BadPoolReference {
                index,
                offset,
                expected,
            })
    }

    pub(crate) fn utf8(&self, index: u16, offset: usize) -> Result<&str, CodecError> {
        match self.entry(index, offset, "utf8")? {
            ConstantValue::Utf8(s) => Ok(s),
            _ => Err(CodecError::BadPoolReference {
                index,
                offset,
                expected: "utf8",
            }),
        }
    }

    pub(crate) fn opt_utf8(&self, index: u16, offset: usize) -> Result<Option<&str>, CodecError> {
        if index == 0 {
            Ok(None)
        } else {
            self.utf8(index, offset).map(Some)
        }
    }

    pub(crate) fn class(&self, index: u16, offset: usize) -> Result<&str, CodecError> {
        match self.entry(index, offset, "class")? {
            ConstantValue::Class(s) => Ok(s),
            _ => Err(CodecError::BadPoolReference {
                index,
                offset,
                expected: "class",
            }),
        }
    }

    pub(crate) fn opt_class(&self, index: u16, offset: usize) -> Result<Option<&str>, CodecError> {
        if index == 0 {
            Ok(None)
        } else {
            self.class(index, offset).map(Some)
        }
    }
}

fn resolve(raw: &[(Raw, usize)], index: u16, offset: usize, depth: u8) -> Result<ConstantValue, CodecError> {
    let bad = |expected| CodecError::BadPoolReference {
        index,
        offset,
        expected,
    };
    if depth > 4 {
        return Err(bad("acyclic reference"));
    }
    let entry = match raw.get(index as usize) {
        Some((entry, _)) if index != 0 => entry,
        _ => return Err(bad("pool entry")),
    };
    let utf8 = |i: u16| -> Result<String, CodecError> {
        match raw.get(i as usize) {
            Some((Raw::Utf8(s), _)) if i != 0 => Ok(s.clone()),
            _ => Err(CodecError::BadPoolReference {
                index: i,
                offset,
                expected: "utf8",
            }),
        }
    };
    let name_and_type = |i: u16| -> Result<(String, String), CodecError> {
        match raw.get(i as usize) {
            Some((Raw::NameAndType(n, d), _)) if i != 0 => Ok((utf8(*n)?, utf8(*d)?)),
            _ => Err(CodecError::BadPoolReference {
                index: i,
                offset,
                expected: "name-and-type",
            }),
        }
    };
    Ok(match entry {
        Raw::Utf8(s) => ConstantValue::Utf8(s.clone()),
        Raw::Value(v) => v.clone(),
        Raw::Class(i) => ConstantValue::Class(utf8(*i)?),
        Raw::String(i) => ConstantValue::String(utf8(*i)?),
        Raw::MethodType(i) => ConstantValue::MethodType(utf8(*i)?),
        Raw::NameAndType(n, d) => ConstantValue::NameAndType {
            name: utf8(*n)?,
            descriptor: utf8(*d)?,
        },
        Raw::Member(kind, class, nat) => {
            let owner = match raw.get(*class as usize) {
                Some((Raw::Class(c), _)) if *class != 0 => utf8(*c)?,
                _ => {
                    return Err(CodecError::BadPoolReference {
                        index: *class,
                        offset,
                        expected: "class",
                    })
                }
            };
            let (name, descriptor) = name_and_type(*nat)?;
            ConstantValue::Member(MemberRef {
                kind: *kind,
                owner,
                name,
                descriptor,
            })
        }
        Raw::MethodHandle(kind, reference) => match resolve(raw, *reference, offset, depth + 1)? {
            ConstantValue::Member(m) if (1..=9).contains(kind) => ConstantValue::MethodHandle {
                kind: *kind,
                reference: m,
            },
            _ => return Err(bad("method handle reference")),
        },
        Raw::InvokeDynamic(bootstrap, nat) => {
            let (name, descriptor) = name_and_type(*nat)?;
            ConstantValue::InvokeDynamic {
                bootstrap: *bootstrap,
                name,
                descriptor,
            }
        }
        Raw::Phantom => return Err(bad("pool entry")),
    })
}

/// Deterministic assignment of pool indexes to constants, used only when
/// emitting. Entries are ordered by tag, then by their canonical payload bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolLayout {
    entries: Vec<(u16, ConstantValue)>,
    index: BTreeMap<ConstantValue, u16>,
    slots: usize,
}

impl PoolLayout {
    pub fn from_constants<'a>(
        constants: impl IntoIterator<Item = &'a ConstantValue>,
    ) -> Result<Self, CodecError> {
        let unique: BTreeSet<&ConstantValue> = constants.into_iter().collect();
        let mut keyed: Vec<((u8, Vec<u8>), &ConstantValue)> = unique
            .into_iter()
            .map(|c| ((c.tag(), canonical_bytes(c)), c))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut entries = Vec::with_capacity(keyed.len());
        let mut index = BTreeMap::new();
        let mut next = 1usize;
        for (_, c) in keyed {
            let width = if c.is_wide() { 2 } else { 1 };
            if next + width - 1 > MAX_POOL_SLOTS {
                return Err(CodecError::CapacityOverflow {
                    what: "constant pool slots",
                    count: next + width - 1,
                });
            }
            entries.push((next as u16, c.clone()));
            index.insert(c.clone(), next as u16);
            next += width;
        }
        Ok(PoolLayout {
            entries,
            index,
            slots: next - 1,
        })
    }

    pub fn index_of(&self, constant: &ConstantValue) -> Option<u16> {
        self.index.get(constant).copied()
    }

    /// `(index, constant)` pairs in index order.
    pub fn entries(&self) -> impl Iterator<Item = (u16, &ConstantValue)> {
        self.entries.iter().map(|(i, c)| (*i, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of slots used, counting the phantom slot of 8-byte entries.
    pub fn slots(&self) -> usize {
        self.slots
    }

    pub(crate) fn resolve(&self, constant: &ConstantValue) -> Result<u16, CodecError> {
        self.index_of(constant)
            .ok_or_else(|| CodecError::UnresolvedConstant {
                constant: format!("{constant}"),
            })
    }

    pub(crate) fn utf8(&self, s: &str) -> Result<u16, CodecError> {
        self.resolve(&ConstantValue::Utf8(s.into()))
    }

    pub(crate) fn class(&self, name: &str) -> Result<u16, CodecError> {
        self.resolve(&ConstantValue::Class(name.into()))
    }

    /// Writes the `cp_info` entries (without the count).
    pub(crate) fn write(&self, out: &mut Vec<u8>) -> Result<(), CodecError> {
        for (_, c) in &self.entries {
            out.put_u8(c.tag());
            match c {
                ConstantValue::Utf8(s) => {
                    let bytes = mutf8::encode(s);
                    let len = u16::try_from(bytes.len()).map_err(|_| CodecError::CapacityOverflow {
                        what: "utf8 constant length",
                        count: bytes.len(),
                    })?;
                    out.put_u16(len);
                    out.extend_from_slice(&bytes);
                }
                ConstantValue::Integer(v) => out.put_u32(*v as u32),
                ConstantValue::Float(bits) => out.put_u32(*bits),
                ConstantValue::Long(v) => out.extend_from_slice(&v.to_be_bytes()),
                ConstantValue::Double(bits) => out.extend_from_slice(&bits.to_be_bytes()),
                ConstantValue::Class(s) | ConstantValue::String(s) | ConstantValue::MethodType(s) => {
                    out.put_u16(self.utf8(s)?)
                }
                ConstantValue::Member(m) => {
                    out.put_u16(self.class(&m.owner)?);
                    out.put_u16(self.resolve(&name_and_type(&m.name, &m.descriptor))?);
                }
                ConstantValue::NameAndType { name, descriptor } => {
                    out.put_u16(self.utf8(name)?);
                    out.put_u16(self.utf8(descriptor)?);
                }
                ConstantValue::MethodHandle { kind, reference } => {
                    out.put_u8(*kind);
                    out.put_u16(self.resolve(&ConstantValue::Member(reference.clone()))?);
                }
                ConstantValue::InvokeDynamic {
                    bootstrap,
                    name,
                    descriptor,
                } => {
                    out.put_u16(*bootstrap);
                    out.put_u16(self.resolve(&name_and_type(name, descriptor))?);
                }
            }
        }
        Ok(())
    }
}

fn name_and_type(name: &str, descriptor: &str) -> ConstantValue {
    ConstantValue::NameAndType {
        name: name.into(),
        descriptor: descriptor.into(),
    }
}

fn put_prefixed(s: &str, out: &mut Vec<u8>) {
    let bytes = mutf8::encode(s);
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(&bytes);
}

/// Payload bytes used to order pool entries within one tag. Injective per tag.
pub(crate) fn canonical_bytes(c: &ConstantValue) -> Vec<u8> {
    let mut out = Vec::new();
    match c {
        ConstantValue::Utf8(s)
        | ConstantValue::Class(s)
        | ConstantValue::String(s)
        | ConstantValue::MethodType(s) => mutf8::encode_into(s, &mut out),
        ConstantValue::Integer(v) => out.extend_from_slice(&v.to_be_bytes()),
        ConstantValue::Float(bits) => out.extend_from_slice(&bits.to_be_bytes()),
        ConstantValue::Long(v) => out.extend_from_slice(&v.to_be_bytes()),
        ConstantValue::Double(bits) => out.extend_from_slice(&bits.to_be_bytes()),
        ConstantValue::Member(m) => {
            put_prefixed(&m.owner, &mut out);
            put_prefixed(&m.name, &mut out);
            put_prefixed(&m.descriptor, &mut out);
        }
        ConstantValue::NameAndType { name, descriptor } => {
            put_prefixed(name, &mut out);
            put_prefixed(descriptor, &mut out);
        }
        ConstantValue::MethodHandle { kind, reference } => {
            out.push(*kind);
            out.push(ConstantValue::Member(reference.clone()).tag());
            put_prefixed(&reference.owner, &mut out);
            put_prefixed(&reference.name, &mut out);
            put_prefixed(&reference.descriptor, &mut out);
        }
        ConstantValue::InvokeDynamic {
            bootstrap,
            name,
            descriptor,
        } => {
            out.extend_from_slice(&bootstrap.to_be_bytes());
            put_prefixed(name, &mut out);
            put_prefixed(descriptor, &mut out);
        }
    }
    out
}

/// Gathers every constant the writer will look up for a given tree.
/// This walk must mirror what `attr`, `code` and `emit_class` resolve.
#[derive(Default)]
pub(crate) struct Collector {
    pub(crate) set: BTreeSet<ConstantValue>,
}

impl Collector {
    pub(crate) fn utf8(&mut self, s: &str) {
        self.set.insert(ConstantValue::Utf8(s.into()));
    }

    pub(crate) fn class(&mut self, name: &str) {
        self.constant(&ConstantValue::Class(name.into()));
    }

    /// Adds `c` and everything it references.
    pub(crate) fn constant(&mut self, c: &ConstantValue) {
        if self.set.contains(c) {
            return;
        }
        self.set.insert(c.clone());
        match c {
            ConstantValue::Class(s) | ConstantValue::String(s) | ConstantValue::MethodType(s) => {
                self.utf8(s)
            }
            ConstantValue::Member(m) => {
                self.class(&m.owner);
                self.constant(&name_and_type(&m.name, &m.descriptor));
            }
            ConstantValue::NameAndType { name, descriptor } => {
                self.utf8(name);
                self.utf8(descriptor);
            }
            ConstantValue::MethodHandle { reference, .. } => {
                self.constant(&ConstantValue::Member(reference.clone()))
            }
            ConstantValue::InvokeDynamic {
                name, descriptor, ..
            } => self.constant(&name_and_type(name, descriptor)),
            _ => {}
        }
    }

    pub(crate) fn class_ast(&mut self, class: &ClassAst) {
        self.class(&class.class_type);
        if let Some(sup) = &class.superclass {
            self.class(sup);
        }
        for i in &class.interfaces {
            self.class(i);
        }
        for f in &class.fields {
            self.field(f);
        }
        for m in &class.methods {
            self.method(m);
        }
        self.attributes(&class.attributes);
    }

    pub(crate) fn field(&mut self, f: &FieldAst) {
        self.utf8(&f.name);
        self.utf8(&f.ty.descriptor());
        self.attributes(&f.attributes);
    }

    pub(crate) fn method(&mut self, m: &MethodAst) {
        self.utf8(&m.signature.name);
        self.utf8(&m.signature.descriptor());
        self.attributes(&m.attributes);
    }

    pub(crate) fn attributes(&mut self, attributes: &[AttributeAst]) {
        for a in attributes {
            self.attribute(a);
        }
    }

    pub(crate) fn attribute(&mut self, a: &AttributeAst) {
        self.utf8(&a.name);
        match &a.content {
            AttributeContent::Code(code) => self.code(code),
            AttributeContent::Exceptions(names) => names.iter().for_each(|n| self.class(n)),
            AttributeContent::ConstantValue(c) => self.constant(c),
            AttributeContent::SourceFile(s) | AttributeContent::Signature(s) => self.utf8(s),
            AttributeContent::InnerClasses(rows) => rows.iter().for_each(|r| self.inner_class(r)),
            AttributeContent::LocalVariableTable(vars)
            | AttributeContent::LocalVariableTypeTable(vars) => {
                for v in vars {
                    self.utf8(&v.name);
                    self.utf8(&v.descriptor);
                }
            }
            AttributeContent::StackMapTable(frames) => frames.iter().for_each(|f| self.frame(f)),
            AttributeContent::LineNumberTable(_)
            | AttributeContent::Deprecated
            | AttributeContent::Synthetic
            | AttributeContent::Opaque(_) => {}
        }
    }

    pub(crate) fn inner_class(&mut self, row: &InnerClass) {
        self.class(&row.inner);
        if let Some(o) = &row.outer {
            self.class(o);
        }
        if let Some(n) = &row.name {
            self.utf8(n);
        }
    }

    pub(crate) fn code(&mut self, code: &CodeAst) {
        for insn in &code.instructions {
            self.instruction(insn);
        }
        for h in &code.exception_table {
            if let Some(c) = &h.catch_type {
                self.class(c);
            }
        }
        self.attributes(&code.attributes);
    }

    pub(crate) fn instruction(&mut self, insn: &Instruction) {
        match &insn.operand {
            Operand::Constant(c) => self.constant(c),
            Operand::Member(m) => self.constant(&ConstantValue::Member(m.clone())),
            Operand::Type(t) => self.class(t),
            Operand::MultiArray { class, .. } => self.class(class),
            _ => {}
        }
    }

    pub(crate) fn frame(&mut self, frame: &StackFrame) {
        let mut visit = |t: &VerificationType| {
            if let VerificationType::Object(name) = t {
                self.class(name);
            }
        };
        match &frame.kind {
            FrameKind::SameLocals1(t) => visit(t),
            FrameKind::Append(ts) => ts.iter().for_each(visit),
            FrameKind::Full { locals, stack } => locals.iter().chain(stack).for_each(visit),
            FrameKind::Same | FrameKind::Chop(_) => {}
        }
    }
}

/// Every constant a class's members, instructions and attributes refer to.
pub fn referenced_constants(class: &ClassAst) -> BTreeSet<ConstantValue> {
    let mut c = Collector::default();
    c.class_ast(class);
    c.set
}

/// Pool layout covering the declared constants plus everything referenced.
pub fn build_pool(class: &ClassAst) -> Result<PoolLayout, CodecError> {
    let referenced = referenced_constants(class);
    PoolLayout::from_constants(class.constants.iter().chain(referenced.iter()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn layout_orders_by_tag_then_payload_and_skips_phantom_slots() {
        let cs = vec![
            ConstantValue::Class("b".into()),
            ConstantValue::utf8("b"),
            ConstantValue::Long(7),
            ConstantValue::utf8("a"),
            ConstantValue::Integer(1),
        ];
        let layout = PoolLayout::from_constants(&cs).unwrap();
        let order: Vec<_> = layout.entries().map(|(i, c)| (i, c.clone())).collect();
        assert_eq!(
            order,
            vec![
                (1, ConstantValue::utf8("a")),
                (2, ConstantValue::utf8("b")),
                (3, ConstantValue::Integer(1)),
                (4, ConstantValue::Long(7)),
                (6, ConstantValue::Class("b".into())),
            ]
        );
        assert_eq!(layout.slots(), 6);
    }

    #[test]
    fn pool_roundtrip_through_bytes() {
        let mut c = Collector::default();
        c.constant(&ConstantValue::Member(MemberRef::method("a/B", "f", "(J)V")));
        c.constant(&ConstantValue::Double(1.5f64.to_bits()));
        c.constant(&ConstantValue::String("hi\0".into()));
        let layout = PoolLayout::from_constants(&c.set).unwrap();
        let mut bytes = Vec::new();
        layout.write(&mut bytes).unwrap();
        let pool = ConstantPool::read(&mut Reader::new(&bytes), layout.slots() as u16 + 1).unwrap();
        let read: BTreeSet<ConstantValue> = pool.values().cloned().collect();
        assert_eq!(read, c.set);
        for (i, v) in layout.entries() {
            assert_eq!(pool.get(i), Some(v));
        }
    }

    #[test]
    fn too_many_constants_overflow() {
        let cs: Vec<ConstantValue> = (0..70_000).map(ConstantValue::Integer).collect();
        assert!(matches!(
            PoolLayout::from_constants(&cs),
            Err(CodecError::CapacityOverflow { .. })
        ));
    }
}
