//! Attribute tables, for both member-level and `Code`-level attribute lists.
//!
//! `pcs` selects the context: `None` for class, field and method attributes,
//! `Some(_)` for attributes nested in `Code`. Each context structures only the
//! attributes that belong there; everything else stays opaque.

use alloc::string::String;
use alloc::vec::Vec;

use super::bytes::{PutBe, Reader};
use super::code::{read_code, write_code, Pcs};
use super::pool::{ConstantPool, PoolLayout};
use super::CodecError;
use crate::ast::{
    AttributeAst, AttributeContent, ConstantValue, FrameKind, InnerClass, LineNumber,
    LocalVariable, StackFrame, VerificationType,
};

const CODE_LEVEL: [&str; 4] = [
    "LineNumberTable",
    "LocalVariableTable",
    "LocalVariableTypeTable",
    "StackMapTable",
];

/// True if an attribute called `name` is structured when read in a `Code` context.
pub(crate) fn is_code_level(name: &str) -> bool {
    CODE_LEVEL.contains(&name)
}

pub(crate) fn read_attributes(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    pcs: Option<Pcs<'_>>,
) -> Result<Vec<AttributeAst>, CodecError> {
    let count = r.u16()?;
    let mut out: Vec<AttributeAst> = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let attr = read_attribute(r, pool, pcs)?;
        let existing = out.iter_mut().find(|a| a.name == attr.name);
        match (existing, attr.content) {
            (None, content) => out.push(AttributeAst {
                name: attr.name,
                content,
            }),
            // Compilers may split these tables across several attributes.
            (Some(a), content) => match (&mut a.content, content) {
                (AttributeContent::LineNumberTable(xs), AttributeContent::LineNumberTable(ys)) => {
                    xs.extend(ys)
                }
                (
                    AttributeContent::LocalVariableTable(xs),
                    AttributeContent::LocalVariableTable(ys),
                )
                | (
                    AttributeContent::LocalVariableTypeTable(xs),
                    AttributeContent::LocalVariableTypeTable(ys),
                ) => xs.extend(ys),
                (old, new) if *old == new => {}
                (_, new) => out.push(AttributeAst {
                    name: attr.name,
                    content: new,
                }),
            },
        }
    }
    Ok(out)
}

pub(crate) fn read_attribute(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    pcs: Option<Pcs<'_>>,
) -> Result<AttributeAst, CodecError> {
    let offset = r.offset();
    let name = String::from(pool.utf8(r.u16()?, offset)?);
    let length = r.u32()? as usize;
    let mut body = r.sub(length)?;
    let content = read_content(&name, &mut body, pool, pcs).map_err(|e| match e {
        CodecError::Truncated { offset } => CodecError::BadAttribute {
            name: name.clone(),
            offset,
        },
        e => e,
    })?;
    if !body.is_empty() {
        return Err(CodecError::BadAttribute {
            name,
            offset: body.offset(),
        });
    }
    Ok(AttributeAst { name, content })
}

fn read_content(
    name: &str,
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    pcs: Option<Pcs<'_>>,
) -> Result<AttributeContent, CodecError> {
    let at = r.offset();
    let Some(pcs) = pcs else {
        return Ok(match name {
            "Code" => AttributeContent::Code(read_code(r, pool)?),
            "Exceptions" => {
                let n = r.u16()?;
                let mut names = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    names.push(pool.class(r.u16()?, at)?.into());
                }
                AttributeContent::Exceptions(names)
            }
            "ConstantValue" => {
                let index = r.u16()?;
                match pool.entry(index, at, "constant value")? {
                    c @ (ConstantValue::Integer(_)
                    | ConstantValue::Float(_)
                    | ConstantValue::Long(_)
                    | ConstantValue::Double(_)
                    | ConstantValue::String(_)) => AttributeContent::ConstantValue(c.clone()),
                    _ => {
                        return Err(CodecError::BadPoolReference {
                            index,
                            offset: at,
                            expected: "constant value",
                        })
                    }
                }
            }
            "SourceFile" => AttributeContent::SourceFile(pool.utf8(r.u16()?, at)?.into()),
            "Signature" => AttributeContent::Signature(pool.utf8(r.u16()?, at)?.into()),
            "InnerClasses" => {
                let n = r.u16()?;
                let mut rows = Vec::with_capacity(n as usize);
                for _ in 0..n {
                    let at = r.offset();
                    rows.push(InnerClass {
                        inner: pool.class(r.u16()?, at)?.into(),
                        outer: pool.opt_class(r.u16()?, at)?.map(Into::into),
                        name: pool.opt_utf8(r.u16()?, at)?.map(Into::into),
                        flags: r.u16()?,
                    });
                }
                AttributeContent::InnerClasses(rows)
            }
            "Deprecated" => AttributeContent::Deprecated,
            "Synthetic" => AttributeContent::Synthetic,
            _ => AttributeContent::Opaque(r.bytes(r.remaining())?.into()),
        });
    };
    let bad = |offset: usize| CodecError::BadAttribute {
        name: name.into(),
        offset,
    };
    Ok(match name {
        "LineNumberTable" => {
            let n = r.u16()?;
            let mut lines = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let at = r.offset();
                let start = pcs.index_of(r.u16()?.into(), false).ok_or(bad(at))?;
                lines.push(LineNumber {
                    start,
                    line: r.u16()?,
                });
            }
            AttributeContent::LineNumberTable(lines)
        }
        "LocalVariableTable" | "LocalVariableTypeTable" => {
            let n = r.u16()?;
            let mut vars = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let at = r.offset();
                let start_pc = u32::from(r.u16()?);
                let length = u32::from(r.u16()?);
                vars.push(LocalVariable {
                    start: pcs.index_of(start_pc, true).ok_or(bad(at))?,
                    end: pcs.index_of(start_pc + length, true).ok_or(bad(at))?,
                    name: pool.utf8(r.u16()?, at)?.into(),
                    descriptor: pool.utf8(r.u16()?, at)?.into(),
                    slot: r.u16()?,
                });
            }
            if name == "LocalVariableTable" {
                AttributeContent::LocalVariableTable(vars)
            } else {
                AttributeContent::LocalVariableTypeTable(vars)
            }
        }
        "StackMapTable" => {
            let n = r.u16()?;
            let mut frames = Vec::with_capacity(n as usize);
            let mut previous: Option<u32> = None;
            for _ in 0..n {
                let at = r.offset();
                let frame_type = r.u8()?;
                let (delta, kind) = match frame_type {
                    0..=63 => (u32::from(frame_type), FrameKind::Same),
                    64..=127 => (
                        u32::from(frame_type - 64),
                        FrameKind::SameLocals1(read_vtype(r, pool, pcs)?),
                    ),
                    247 => {
                        let delta = u32::from(r.u16()?);
                        (delta, FrameKind::SameLocals1(read_vtype(r, pool, pcs)?))
                    }
                    248..=250 => (u32::from(r.u16()?), FrameKind::Chop(251 - frame_type)),
                    251 => (u32::from(r.u16()?), FrameKind::Same),
                    252..=254 => {
                        let delta = u32::from(r.u16()?);
                        let types = (0..frame_type - 251)
                            .map(|_| read_vtype(r, pool, pcs))
                            .collect::<Result<_, _>>()?;
                        (delta, FrameKind::Append(types))
                    }
                    255 => {
                        let delta = u32::from(r.u16()?);
                        let locals = read_vtypes(r, pool, pcs)?;
                        let stack = read_vtypes(r, pool, pcs)?;
                        (delta, FrameKind::Full { locals, stack })
                    }
                    _ => return Err(bad(at)),
                };
                let offset = match previous {
                    None => delta,
                    Some(p) => p + delta + 1,
                };
                previous = Some(offset);
                frames.push(StackFrame {
                    target: pcs.index_of(offset, false).ok_or(bad(at))?,
                    kind,
                });
            }
            AttributeContent::StackMapTable(frames)
        }
        _ => AttributeContent::Opaque(r.bytes(r.remaining())?.into()),
    })
}

fn read_vtypes(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    pcs: Pcs<'_>,
) -> Result<Vec<VerificationType>, CodecError> {
    let n = r.u16()?;
    (0..n).map(|_| read_vtype(r, pool, pcs)).collect()
}

fn read_vtype(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    pcs: Pcs<'_>,
) -> Result<VerificationType, CodecError> {
    let at = r.offset();
    Ok(match r.u8()? {
        0 => VerificationType::Top,
        1 => VerificationType::Integer,
        2 => VerificationType::Float,
        3 => VerificationType::Double,
        4 => VerificationType::Long,
        5 => VerificationType::Null,
        6 => VerificationType::UninitializedThis,
        7 => VerificationType::Object(pool.class(r.u16()?, at)?.into()),
        8 => {
            let offset = u32::from(r.u16()?);
            VerificationType::Uninitialized(pcs.index_of(offset, false).ok_or(
                CodecError::BadAttribute {
                    name: "StackMapTable".into(),
                    offset: at,
                },
            )?)
        }
        _ => {
            return Err(CodecError::BadAttribute {
                name: "StackMapTable".into(),
                offset: at,
            })
        }
    })
}

pub(crate) fn write_attributes(
    attributes: &[AttributeAst],
    pool: &PoolLayout,
    pcs: Option<Pcs<'_>>,
    out: &mut Vec<u8>,
) -> Result<(), CodecError> {
    out.put_u16(count16(attributes.len(), "attributes")?);
    for a in attributes {
        write_attribute(a, pool, pcs, out)?;
    }
    Ok(())
}

pub(crate) fn write_attribute(
    attr: &AttributeAst,
    pool: &PoolLayout,
    pcs: Option<Pcs<'_>>,
    out: &mut Vec<u8>,
) -> Result<(), CodecError> {
    out.put_u16(pool.utf8(&attr.name)?);
    let length_at = out.len();
    out.put_u32(0);
    write_content(attr, pool, pcs, out)?;
    let length = out.len() - length_at - 4;
    let length = u32::try_from(length).map_err(|_| CodecError::CapacityOverflow {
        what: "attribute length",
        count: length,
    })?;
    out[length_at..length_at + 4].copy_from_slice(&length.to_be_bytes());
    Ok(())
}

fn write_content(
    attr: &AttributeAst,
    pool: &PoolLayout,
    pcs: Option<Pcs<'_>>,
    out: &mut Vec<u8>,
) -> Result<(), CodecError> {
    let misplaced = || CodecError::MisplacedAttribute {
        name: attr.name.clone(),
    };
    let code_pcs = || pcs.ok_or_else(misplaced);
    let member_level = || if pcs.is_none() { Ok(()) } else { Err(misplaced()) };
    match &attr.content {
        AttributeContent::Code(code) => {
            member_level()?;
            write_code(code, pool, out)?;
        }
        AttributeContent::Exceptions(names) => {
            member_level()?;
            out.put_u16(count16(names.len(), "exceptions")?);
            for n in names {
                out.put_u16(pool.class(n)?);
            }
        }
        AttributeContent::ConstantValue(c) => {
            member_level()?;
            out.put_u16(pool.resolve(c)?);
        }
        AttributeContent::SourceFile(s) | AttributeContent::Signature(s) => {
            member_level()?;
            out.put_u16(pool.utf8(s)?);
        }
        AttributeContent::InnerClasses(rows) => {
            member_level()?;
            out.put_u16(count16(rows.len(), "inner classes")?);
            for row in rows {
                out.put_u16(pool.class(&row.inner)?);
                out.put_u16(match &row.outer {
                    Some(o) => pool.class(o)?,
                    None => 0,
                });
                out.put_u16(match &row.name {
                    Some(n) => pool.utf8(n)?,
                    None => 0,
                });
                out.put_u16(row.flags);
            }
        }
        AttributeContent::Deprecated | AttributeContent::Synthetic => member_level()?,
        AttributeContent::LineNumberTable(lines) => {
            let pcs = code_pcs()?;
            out.put_u16(count16(lines.len(), "line numbers")?);
            for l in lines {
                out.put_u16(offset16(pcs, l.start, false, attr)?);
                out.put_u16(l.line);
            }
        }
        AttributeContent::LocalVariableTable(vars)
        | AttributeContent::LocalVariableTypeTable(vars) => {
            let pcs = code_pcs()?;
            out.put_u16(count16(vars.len(), "local variables")?);
            for v in vars {
                let start = offset16(pcs, v.start, true, attr)?;
                let end = offset16(pcs, v.end, true, attr)?;
                out.put_u16(start);
                out.put_u16(end.checked_sub(start).ok_or_else(misplaced)?);
                out.put_u16(pool.utf8(&v.name)?);
                out.put_u16(pool.utf8(&v.descriptor)?);
                out.put_u16(v.slot);
            }
        }
        AttributeContent::StackMapTable(frames) => {
            let pcs = code_pcs()?;
            out.put_u16(count16(frames.len(), "stack map frames")?);
            let mut previous: Option<u16> = None;
            for frame in frames {
                let offset = offset16(pcs, frame.target, false, attr)?;
                let delta = match previous {
                    None => offset,
                    Some(p) => offset
                        .checked_sub(p + 1)
                        .ok_or(CodecError::FrameOrder { target: frame.target })?,
                };
                previous = Some(offset);
                match &frame.kind {
                    FrameKind::Same if delta < 64 => out.put_u8(delta as u8),
                    FrameKind::Same => {
                        out.put_u8(251);
                        out.put_u16(delta);
                    }
                    FrameKind::SameLocals1(t) => {
                        if delta < 64 {
                            out.put_u8(64 + delta as u8);
                        } else {
                            out.put_u8(247);
                            out.put_u16(delta);
                        }
                        write_vtype(t, pool, pcs, attr, out)?;
                    }
                    FrameKind::Chop(k) if (1..=3).contains(k) => {
                        out.put_u8(251 - k);
                        out.put_u16(delta);
                    }
                    FrameKind::Append(ts) if (1..=3).contains(&ts.len()) => {
                        out.put_u8(251 + ts.len() as u8);
                        out.put_u16(delta);
                        for t in ts {
                            write_vtype(t, pool, pcs, attr, out)?;
                        }
                    }
                    FrameKind::Full { locals, stack } => {
                        out.put_u8(255);
                        out.put_u16(delta);
                        for list in [locals, stack] {
                            out.put_u16(count16(list.len(), "frame entries")?);
                            for t in list {
                                write_vtype(t, pool, pcs, attr, out)?;
                            }
                        }
                    }
                    FrameKind::Chop(_) | FrameKind::Append(_) => {
                        return Err(CodecError::BadAttribute {
                            name: attr.name.clone(),
                            offset: 0,
                        })
                    }
                }
            }
        }
        AttributeContent::Opaque(bytes) => out.extend_from_slice(bytes),
    }
    Ok(())
}

fn write_vtype(
    t: &VerificationType,
    pool: &PoolLayout,
    pcs: Pcs<'_>,
    attr: &AttributeAst,
    out: &mut Vec<u8>,
) -> Result<(), CodecError> {
    match t {
        VerificationType::Top => out.put_u8(0),
        VerificationType::Integer => out.put_u8(1),
        VerificationType::Float => out.put_u8(2),
        VerificationType::Double => out.put_u8(3),
        VerificationType::Long => out.put_u8(4),
        VerificationType::Null => out.put_u8(5),
        VerificationType::UninitializedThis => out.put_u8(6),
        VerificationType::Object(name) => {
            out.put_u8(7);
            out.put_u16(pool.class(name)?);
        }
        VerificationType::Uninitialized(index) => {
            out.put_u8(8);
            out.put_u16(offset16(pcs, *index, false, attr)?);
        }
    }
    Ok(())
}

fn offset16(pcs: Pcs<'_>, index: u32, allow_end: bool, attr: &AttributeAst) -> Result<u16, CodecError> {
    pcs.offset_of(index, allow_end)
        .and_then(|o| u16::try_from(o).ok())
        .ok_or_else(|| CodecError::DanglingAttributeLabel {
            name: attr.name.clone(),
            target: index,
        })
}

pub(crate) fn count16(n: usize, what: &'static str) -> Result<u16, CodecError> {
    u16::try_from(n).map_err(|_| CodecError::CapacityOverflow { what, count: n })
}
