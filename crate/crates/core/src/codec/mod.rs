//! Class-file bytes to [`ClassAst`] and back.
//!
//! Parsing resolves every pool index and byte offset; emitting re-derives
//! them from a deterministic [`PoolLayout`]. `emit_class` is a pure function
//! of the canonical AST, so equal ASTs always produce identical bytes.

mod attr;
mod bytes;
mod code;
mod mutf8;
mod pool;

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

pub use code::{decode_code, encode_code};
pub use pool::{build_pool, referenced_constants, ConstantPool, PoolLayout, MAX_POOL_SLOTS};

pub(crate) use attr::{is_code_level, read_attribute, write_attribute};
pub(crate) use bytes::{PutBe, Reader};
pub(crate) use code::Pcs;
pub(crate) use pool::Collector;

use crate::ast::{
    validate, AttributeAst, AttributeContent, ClassAst, FieldAst, JavaType, Keyed, MethodAst,
    Signature, Violation, ViolationKind,
};
use attr::{count16, read_attributes, write_attributes};

pub const MAGIC: u32 = 0xCAFE_BABE;
/// Oldest and newest supported major versions (JDK 1.1 through 8).
pub const MIN_MAJOR: u16 = 45;
pub const MAX_MAJOR: u16 = 52;

/// Opaque attributes that embed pool indexes or byte offsets. Their bytes
/// cannot be copied into a re-laid-out pool, so emitting them is refused.
pub const NON_RELOCATABLE: [&str; 16] = [
    "RuntimeVisibleAnnotations",
    "RuntimeInvisibleAnnotations",
    "RuntimeVisibleParameterAnnotations",
    "RuntimeInvisibleParameterAnnotations",
    "RuntimeVisibleTypeAnnotations",
    "RuntimeInvisibleTypeAnnotations",
    "AnnotationDefault",
    "EnclosingMethod",
    "BootstrapMethods",
    "MethodParameters",
    "Module",
    "ModulePackages",
    "ModuleMainClass",
    "NestHost",
    "NestMembers",
    "Record",
];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CodecError {
    #[error("truncated input at offset {offset}")]
    Truncated { offset: usize },
    #[error("bad magic number {found:#010x}")]
    BadMagic { found: u32 },
    #[error("unsupported class file version {major}.{minor}")]
    UnsupportedVersion { major: u16, minor: u16 },
    #[error("invalid modified UTF-8 at offset {offset}")]
    BadUtf8 { offset: usize },
    #[error("unknown constant pool tag {tag} at offset {offset}")]
    BadConstantTag { tag: u8, offset: usize },
    #[error("bad constant pool reference #{index} at offset {offset} (expected {expected})")]
    BadPoolReference {
        index: u16,
        offset: usize,
        expected: &'static str,
    },
    #[error("unknown opcode {opcode:#04x} at offset {offset}")]
    UnknownOpcode { opcode: u8, offset: usize },
    #[error("branch at offset {offset} targets {target}, which is not an instruction boundary")]
    BadBranchTarget { offset: usize, target: i64 },
    #[error("truncated or empty code at offset {offset}")]
    TruncatedCode { offset: usize },
    #[error("bad descriptor {descriptor:?} at offset {offset}")]
    BadDescriptor { descriptor: String, offset: usize },
    #[error("malformed {name} attribute at offset {offset}")]
    BadAttribute { name: String, offset: usize },
    #[error("conflicting duplicate {what} {key}")]
    DuplicateMember { what: &'static str, key: String },
    #[error("malformed class file at offset {offset}: {reason}")]
    Malformed { offset: usize, reason: &'static str },
    #[error("invalid class: {} violation(s), first: {}", .violations.len(), .violations[0])]
    InvalidClass { violations: Vec<Violation> },
    #[error("too many {what}: {count}")]
    CapacityOverflow { what: &'static str, count: usize },
    #[error("code length {length} exceeds 65535 bytes")]
    CodeLengthOverflow { length: usize },
    #[error("constant {constant} is not in the pool")]
    UnresolvedConstant { constant: String },
    #[error("instruction {from} targets missing instruction {target}")]
    UnresolvedLabel { from: usize, target: u32 },
    #[error("{name} refers to missing instruction {target}")]
    DanglingAttributeLabel { name: String, target: u32 },
    #[error("conditional branch at instruction {from} to {target} does not fit 16 bits")]
    BranchOutOfRange { from: usize, target: u32 },
    #[error("stack map frame at instruction {target} is out of order")]
    FrameOrder { target: u32 },
    #[error("method body has no instructions")]
    EmptyCode,
    #[error("attribute {name} is not allowed in this position")]
    MisplacedAttribute { name: String },
    #[error("opaque attribute {name} holds pool indexes and cannot be re-emitted")]
    AttributeNotRelocatable { name: String },
}

/// Parses and validates one class file.
pub fn parse_class(bytes: &[u8]) -> Result<ClassAst, CodecError> {
    let mut r = Reader::new(bytes);
    let magic = r.u32()?;
    if magic != MAGIC {
        return Err(CodecError::BadMagic { found: magic });
    }
    let minor = r.u16()?;
    let major = r.u16()?;
    if !(MIN_MAJOR..=MAX_MAJOR).contains(&major) {
        return Err(CodecError::UnsupportedVersion { major, minor });
    }
    let count_at = r.offset();
    let count = r.u16()?;
    if count == 0 {
        return Err(CodecError::Malformed {
            offset: count_at,
            reason: "constant_pool_count is zero",
        });
    }
    let pool = ConstantPool::read(&mut r, count)?;
    let flags = r.u16()?;
    let at = r.offset();
    let class_type = String::from(pool.class(r.u16()?, at)?);
    let at = r.offset();
    let superclass = pool.opt_class(r.u16()?, at)?.map(String::from);

    let n = r.u16()?;
    let mut interfaces: Vec<String> = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let at = r.offset();
        let name = pool.class(r.u16()?, at)?;
        if !interfaces.iter().any(|i| i == name) {
            interfaces.push(name.into());
        }
    }

    let n = r.u16()?;
    let mut fields = Vec::with_capacity(n as usize);
    for _ in 0..n {
        push_unique(&mut fields, read_field(&mut r, &pool)?, "field")?;
    }
    let n = r.u16()?;
    let mut methods = Vec::with_capacity(n as usize);
    for _ in 0..n {
        push_unique(&mut methods, read_method(&mut r, &pool)?, "method")?;
    }
    let attributes = read_attributes(&mut r, &pool, None)?;
    if !r.is_empty() {
        return Err(CodecError::Malformed {
            offset: r.offset(),
            reason: "trailing bytes after class",
        });
    }

    let constants: BTreeSet<_> = pool.values().cloned().collect();
    let class = ClassAst {
        class_type,
        superclass,
        interfaces,
        fields,
        methods,
        constants: constants.into_iter().collect(),
        attributes,
        version: (u32::from(major) << 16) | u32::from(minor),
        flags,
    };
    let violations = validate(&class);
    if !violations.is_empty() {
        return Err(CodecError::InvalidClass { violations });
    }
    Ok(class)
}

/// Identical duplicates are dropped; conflicting ones are an error.
fn push_unique<T: Keyed + PartialEq>(
    items: &mut Vec<T>,
    item: T,
    what: &'static str,
) -> Result<(), CodecError> {
    let key = item.key();
    match items.iter().find(|x| x.key() == key) {
        None => items.push(item),
        Some(existing) if *existing == item => {}
        Some(_) => {
            return Err(CodecError::DuplicateMember {
                what,
                key: alloc::format!("{key}"),
            })
        }
    }
    Ok(())
}

pub(crate) fn read_field(r: &mut Reader<'_>, pool: &ConstantPool) -> Result<FieldAst, CodecError> {
    let flags = r.u16()?;
    let at = r.offset();
    let name = pool.utf8(r.u16()?, at)?;
    let at = r.offset();
    let descriptor = pool.utf8(r.u16()?, at)?;
    let ty = JavaType::parse_field_descriptor(descriptor).ok_or_else(|| CodecError::BadDescriptor {
        descriptor: descriptor.into(),
        offset: at,
    })?;
    Ok(FieldAst {
        name: name.into(),
        ty,
        flags,
        attributes: read_attributes(r, pool, None)?,
    })
}

pub(crate) fn read_method(r: &mut Reader<'_>, pool: &ConstantPool) -> Result<MethodAst, CodecError> {
    let flags = r.u16()?;
    let at = r.offset();
    let name = pool.utf8(r.u16()?, at)?;
    let at = r.offset();
    let descriptor = pool.utf8(r.u16()?, at)?;
    let signature =
        Signature::from_descriptor(name, descriptor).ok_or_else(|| CodecError::BadDescriptor {
            descriptor: descriptor.into(),
            offset: at,
        })?;
    Ok(MethodAst {
        signature,
        flags,
        attributes: read_attributes(r, pool, None)?,
    })
}

pub(crate) fn write_field(f: &FieldAst, pool: &PoolLayout, out: &mut Vec<u8>) -> Result<(), CodecError> {
    out.put_u16(f.flags);
    out.put_u16(pool.utf8(&f.name)?);
    out.put_u16(pool.utf8(&f.ty.descriptor())?);
    write_attributes(&f.attributes, pool, None, out)
}

pub(crate) fn write_method(m: &MethodAst, pool: &PoolLayout, out: &mut Vec<u8>) -> Result<(), CodecError> {
    out.put_u16(m.flags);
    out.put_u16(pool.utf8(&m.signature.name)?);
    out.put_u16(pool.utf8(&m.signature.descriptor())?);
    write_attributes(&m.attributes, pool, None, out)
}

/// First opaque attribute that cannot be copied verbatim, if any.
pub fn non_relocatable_attribute(class: &ClassAst) -> Option<&str> {
    fn scan(attributes: &[AttributeAst]) -> Option<&str> {
        attributes.iter().find_map(|a| match &a.content {
            AttributeContent::Opaque(_) if NON_RELOCATABLE.contains(&a.name.as_str()) => {
                Some(a.name.as_str())
            }
            AttributeContent::Code(code) => scan(&code.attributes),
            _ => None,
        })
    }
    scan(&class.attributes)
        .or_else(|| class.fields.iter().find_map(|f| scan(&f.attributes)))
        .or_else(|| class.methods.iter().find_map(|m| scan(&m.attributes)))
}

/// Serializes a class. The output depends only on the canonical form of
/// `class`: set order is irrelevant and the pool is laid out afresh.
pub fn emit_class(class: &ClassAst) -> Result<Vec<u8>, CodecError> {
    // Declared constants are a superset hint; the layout adds whatever is referenced.
    let violations: Vec<Violation> = validate(class)
        .into_iter()
        .filter(|v| v.kind != ViolationKind::MissingConstant)
        .collect();
    if !violations.is_empty() {
        return Err(CodecError::InvalidClass { violations });
    }
    let (major, minor) = (class.major_version(), class.minor_version());
    if !(MIN_MAJOR..=MAX_MAJOR).contains(&major) {
        return Err(CodecError::UnsupportedVersion { major, minor });
    }
    if let Some(name) = non_relocatable_attribute(class) {
        return Err(CodecError::AttributeNotRelocatable { name: name.into() });
    }
    let class = class.canonical();
    let pool = build_pool(&class)?;

    let mut out = Vec::with_capacity(1024);
    out.put_u32(MAGIC);
    out.put_u16(class.minor_version());
    out.put_u16(class.major_version());
    out.put_u16(pool.slots() as u16 + 1);
    pool.write(&mut out)?;
    out.put_u16(class.flags);
    out.put_u16(pool.class(&class.class_type)?);
    out.put_u16(match &class.superclass {
        Some(s) => pool.class(s)?,
        None => 0,
    });
    out.put_u16(count16(class.interfaces.len(), "interfaces")?);
    for i in &class.interfaces {
        out.put_u16(pool.class(i)?);
    }
    out.put_u16(count16(class.fields.len(), "fields")?);
    for f in &class.fields {
        write_field(f, &pool, &mut out)?;
    }
    out.put_u16(count16(class.methods.len(), "methods")?);
    for m in &class.methods {
        write_method(m, &pool, &mut out)?;
    }
    write_attributes(&class.attributes, &pool, None, &mut out)?;
    Ok(out)
}
