//! Bytecode bodies: byte offsets on the wire, instruction indices in the AST.

use alloc::vec::Vec;

use super::attr::{read_attributes, write_attributes};
use super::bytes::{PutBe, Reader};
use super::pool::{ConstantPool, PoolLayout};
use super::CodecError;
use crate::ast::{
    CodeAst, ConstantValue, ExceptionHandler, Instruction, JavaType, MemberKind, Opcode, Operand,
    OperandShape, GOTO_W, JSR_W, LDC_W, WIDE,
};

/// Translation between instruction indices and byte offsets.
#[derive(Clone, Copy)]
pub(crate) enum Pcs<'a> {
    /// Index and offset coincide (attributes detached from their code, as in patches).
    Identity,
    /// `offsets[i]` is the offset of instruction `i`; the last element is the code length.
    Offsets(&'a [u32]),
}

impl Pcs<'_> {
    /// Instruction index at `offset`; `allow_end` admits the code length itself.
    pub(crate) fn index_of(&self, offset: u32, allow_end: bool) -> Option<u32> {
        match self {
            Pcs::Identity => Some(offset),
            Pcs::Offsets(offsets) => {
                let i = offsets.binary_search(&offset).ok()?;
                (allow_end || i + 1 < offsets.len()).then_some(i as u32)
            }
        }
    }

    pub(crate) fn offset_of(&self, index: u32, allow_end: bool) -> Option<u32> {
        match self {
            Pcs::Identity => Some(index),
            Pcs::Offsets(offsets) => {
                let limit = if allow_end { offsets.len() } else { offsets.len() - 1 };
                ((index as usize) < limit).then(|| offsets[index as usize])
            }
        }
    }
}

/// Decodes a `Code` attribute body (from `max_stack` through its attributes).
pub fn decode_code(bytes: &[u8], pool: &ConstantPool) -> Result<CodeAst, CodecError> {
    let mut r = Reader::new(bytes);
    let code = read_code(&mut r, pool)?;
    if !r.is_empty() {
        return Err(CodecError::Malformed {
            offset: r.offset(),
            reason: "trailing bytes after Code attribute",
        });
    }
    Ok(code)
}

pub(crate) fn read_code(r: &mut Reader<'_>, pool: &ConstantPool) -> Result<CodeAst, CodecError> {
    let max_stack = r.u16()?;
    let max_locals = r.u16()?;
    let length_offset = r.offset();
    let length = r.u32()? as usize;
    if length == 0 {
        return Err(CodecError::TruncatedCode {
            offset: length_offset,
        });
    }
    if length > 65535 {
        return Err(CodecError::CodeLengthOverflow { length });
    }
    if length > r.remaining() {
        return Err(CodecError::TruncatedCode {
            offset: length_offset,
        });
    }
    let mut body = r.sub(length)?;
    let (instructions, offsets) = decode_instructions(&mut body, pool)?;
    let pcs = Pcs::Offsets(&offsets);

    let count = r.u16()?;
    let mut exception_table = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let offset = r.offset();
        let (start, end, handler) = (r.u16()?, r.u16()?, r.u16()?);
        let catch = r.u16()?;
        let bad = |target: u16| CodecError::BadBranchTarget {
            offset,
            target: i64::from(target),
        };
        exception_table.push(ExceptionHandler {
            start: pcs.index_of(start.into(), false).ok_or(bad(start))?,
            end: pcs.index_of(end.into(), true).ok_or(bad(end))?,
            handler: pcs.index_of(handler.into(), false).ok_or(bad(handler))?,
            catch_type: pool.opt_class(catch, offset)?.map(Into::into),
        });
    }
    let attributes = read_attributes(r, pool, Some(pcs))?;
    Ok(CodeAst {
        instructions,
        max_stack,
        max_locals,
        exception_table,
        attributes,
    })
}

fn decode_instructions(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
) -> Result<(Vec<Instruction>, Vec<u32>), CodecError> {
    let start = r.offset();
    let length = r.remaining();
    let mut instructions = Vec::new();
    let mut offsets = Vec::new();
    // Branch targets are decoded as absolute byte offsets, then remapped.
    while !r.is_empty() {
        let at = r.offset();
        let pc = (at - start) as u32;
        offsets.push(pc);
        let insn = decode_one(r, pool, pc, length).map_err(|e| match e {
            CodecError::Truncated { .. } => CodecError::TruncatedCode { offset: at },
            e => e,
        })?;
        instructions.push(insn);
    }
    offsets.push(length as u32);
    let pcs = Pcs::Offsets(&offsets);
    for (i, insn) in instructions.iter_mut().enumerate() {
        let at = start + offsets[i] as usize;
        let remap = |t: &mut u32| -> Result<(), CodecError> {
            *t = pcs.index_of(*t, false).ok_or(CodecError::BadBranchTarget {
                offset: at,
                target: i64::from(*t),
            })?;
            Ok(())
        };
        match &mut insn.operand {
            Operand::Branch(t) => remap(t)?,
            Operand::TableSwitch {
                default, targets, ..
            } => {
                remap(default)?;
                targets.iter_mut().try_for_each(remap)?;
            }
            Operand::LookupSwitch { default, pairs } => {
                remap(default)?;
                pairs.iter_mut().try_for_each(|p| remap(&mut p.1))?;
            }
            _ => {}
        }
    }
    Ok((instructions, offsets))
}

fn decode_one(
    r: &mut Reader<'_>,
    pool: &ConstantPool,
    pc: u32,
    length: usize,
) -> Result<Instruction, CodecError> {
    let at = r.offset();
    let byte = r.u8()?;
    let target = |delta: i64| -> Result<u32, CodecError> {
        let t = i64::from(pc) + delta;
        if t < 0 || t >= length as i64 {
            return Err(CodecError::BadBranchTarget { offset: at, target: t });
        }
        Ok(t as u32)
    };
    match byte {
        WIDE => {
            let op_byte = r.u8()?;
            let opcode = Opcode::from_byte(op_byte).ok_or(CodecError::UnknownOpcode {
                opcode: op_byte,
                offset: at + 1,
            })?;
            return match opcode.shape() {
                OperandShape::Local => Ok(Instruction::new(opcode, Operand::Local(r.u16()?))),
                OperandShape::Iinc => Ok(Instruction::new(
                    opcode,
                    Operand::Iinc {
                        local: r.u16()?,
                        delta: r.u16()? as i16,
                    },
                )),
                _ => Err(CodecError::UnknownOpcode {
                    opcode: op_byte,
                    offset: at + 1,
                }),
            };
        }
        LDC_W => {
            let index = r.u16()?;
            return ldc(pool, index, at).map(|c| Instruction::new(Opcode::Ldc, Operand::Constant(c)));
        }
        GOTO_W | JSR_W => {
            let opcode = if byte == GOTO_W { Opcode::Goto } else { Opcode::Jsr };
            let t = target(i64::from(r.i32()?))?;
            return Ok(Instruction::new(opcode, Operand::Branch(t)));
        }
        _ => {}
    }
    let opcode = Opcode::from_byte(byte).ok_or(CodecError::UnknownOpcode {
        opcode: byte,
        offset: at,
    })?;
    let operand = match opcode.shape() {
        OperandShape::None => Operand::None,
        OperandShape::Byte => Operand::Int(i32::from(r.u8()? as i8)),
        OperandShape::Short => Operand::Int(i32::from(r.u16()? as i16)),
        OperandShape::ArrayType => {
            let atype = r.u8()?;
            if !(4..=11).contains(&atype) {
                return Err(CodecError::Malformed {
                    offset: at,
                    reason: "bad newarray type",
                });
            }
            Operand::Int(i32::from(atype))
        }
        OperandShape::Local => Operand::Local(u16::from(r.u8()?)),
        OperandShape::Iinc => Operand::Iinc {
            local: u16::from(r.u8()?),
            delta: i16::from(r.u8()? as i8),
        },
        OperandShape::Ldc => Operand::Constant(ldc(pool, u16::from(r.u8()?), at)?),
        OperandShape::Ldc2 => {
            let index = r.u16()?;
            match pool.entry(index, at, "long or double")? {
                c @ (ConstantValue::Long(_) | ConstantValue::Double(_)) => Operand::Constant(c.clone()),
                _ => {
                    return Err(CodecError::BadPoolReference {
                        index,
                        offset: at,
                        expected: "long or double",
                    })
                }
            }
        }
        shape @ (OperandShape::Field | OperandShape::Method | OperandShape::InterfaceMethod) => {
            let index = r.u16()?;
            if shape == OperandShape::InterfaceMethod {
                r.skip(2)?;
            }
            let expected = match shape {
                OperandShape::Field => "field reference",
                OperandShape::Method => "method reference",
                _ => "interface method reference",
            };
            match pool.entry(index, at, expected)? {
                ConstantValue::Member(m)
                    if match shape {
                        OperandShape::Field => m.kind == MemberKind::Field,
                        OperandShape::Method => m.kind != MemberKind::Field,
                        _ => m.kind == MemberKind::InterfaceMethod,
                    } =>
                {
                    Operand::Member(m.clone())
                }
                _ => {
                    return Err(CodecError::BadPoolReference {
                        index,
                        offset: at,
                        expected,
                    })
                }
            }
        }
        OperandShape::Dynamic => {
            let index = r.u16()?;
            r.skip(2)?;
            match pool.entry(index, at, "invokedynamic")? {
                c @ ConstantValue::InvokeDynamic { .. } => Operand::Constant(c.clone()),
                _ => {
                    return Err(CodecError::BadPoolReference {
                        index,
                        offset: at,
                        expected: "invokedynamic",
                    })
                }
            }
        }
        OperandShape::Type => Operand::Type(pool.class(r.u16()?, at)?.into()),
        OperandShape::MultiANewArray => {
            let class = pool.class(r.u16()?, at)?.into();
            let dimensions = r.u8()?;
            if dimensions == 0 {
                return Err(CodecError::Malformed {
                    offset: at,
                    reason: "multianewarray with zero dimensions",
                });
            }
            Operand::MultiArray { class, dimensions }
        }
        OperandShape::Branch => Operand::Branch(target(i64::from(r.u16()? as i16))?),
        OperandShape::TableSwitch => {
            r.skip(padding(pc))?;
            let default = target(i64::from(r.i32()?))?;
            let low = r.i32()?;
            let high = r.i32()?;
            if high < low {
                return Err(CodecError::Malformed {
                    offset: at,
                    reason: "tableswitch high < low",
                });
            }
            let n = (i64::from(high) - i64::from(low) + 1) as usize;
            if n * 4 > r.remaining() {
                return Err(CodecError::Truncated { offset: at });
            }
            let targets = (0..n)
                .map(|_| target(i64::from(r.i32()?)))
                .collect::<Result<_, _>>()?;
            Operand::TableSwitch {
                default,
                low,
                targets,
            }
        }
        OperandShape::LookupSwitch => {
            r.skip(padding(pc))?;
            let default = target(i64::from(r.i32()?))?;
            let n = r.i32()?;
            if n < 0 || n as usize * 8 > r.remaining() {
                return Err(CodecError::Malformed {
                    offset: at,
                    reason: "bad lookupswitch pair count",
                });
            }
            let mut pairs: Vec<(i32, u32)> = Vec::with_capacity(n as usize);
            for _ in 0..n {
                let key = r.i32()?;
                let t = target(i64::from(r.i32()?))?;
                if pairs.last().is_some_and(|p| p.0 >= key) {
                    return Err(CodecError::Malformed {
                        offset: at,
                        reason: "lookupswitch keys not sorted",
                    });
                }
                pairs.push((key, t));
            }
            Operand::LookupSwitch { default, pairs }
        }
    };
    Ok(Instruction::new(opcode, operand))
}

fn ldc(pool: &ConstantPool, index: u16, at: usize) -> Result<ConstantValue, CodecError> {
    match pool.entry(index, at, "loadable constant")? {
        c @ (ConstantValue::Integer(_)
        | ConstantValue::Float(_)
        | ConstantValue::String(_)
        | ConstantValue::Class(_)
        | ConstantValue::MethodHandle { .. }
        | ConstantValue::MethodType(_)) => Ok(c.clone()),
        _ => Err(CodecError::BadPoolReference {
            index,
            offset: at,
            expected: "loadable constant",
        }),
    }
}

/// Switch padding: operands start at the next multiple of four after the opcode.
fn padding(pc: u32) -> usize {
    ((4 - (pc + 1) % 4) % 4) as usize
}

/// Encodes a `Code` attribute body against a pool layout.
pub fn encode_code(code: &CodeAst, pool: &PoolLayout) -> Result<Vec<u8>, CodecError> {
    let mut out = Vec::new();
    write_code(code, pool, &mut out)?;
    Ok(out)
}

pub(crate) fn write_code(code: &CodeAst, pool: &PoolLayout, out: &mut Vec<u8>) -> Result<(), CodecError> {
    let count = code.instructions.len();
    if count == 0 {
        return Err(CodecError::EmptyCode);
    }
    let indexes: Vec<u16> = code
        .instructions
        .iter()
        .map(|insn| operand_index(insn, pool))
        .collect::<Result<_, _>>()?;
    for (i, insn) in code.instructions.iter().enumerate() {
        if let Some(&t) = insn.targets().iter().find(|&&t| t as usize >= count) {
            return Err(CodecError::UnresolvedLabel { from: i, target: t });
        }
    }

    // Unconditional jumps start narrow and are widened until offsets settle;
    // widening only grows code, so this terminates.
    let mut wide_jump = alloc::vec![false; count];
    let offsets = loop {
        let mut offsets = Vec::with_capacity(count + 1);
        let mut pc = 0u32;
        for (i, insn) in code.instructions.iter().enumerate() {
            offsets.push(pc);
            pc = pc.saturating_add(length(insn, pc, indexes[i], wide_jump[i]));
        }
        offsets.push(pc);
        let mut changed = false;
        for (i, insn) in code.instructions.iter().enumerate() {
            if let (Operand::Branch(t), false) = (&insn.operand, wide_jump[i]) {
                let delta = i64::from(offsets[*t as usize]) - i64::from(offsets[i]);
                if i16::try_from(delta).is_err() {
                    if matches!(insn.opcode, Opcode::Goto | Opcode::Jsr) {
                        wide_jump[i] = true;
                        changed = true;
                    } else {
                        return Err(CodecError::BranchOutOfRange {
                            from: i,
                            target: *t,
                        });
                    }
                }
            }
        }
        if !changed {
            break offsets;
        }
    };
    let code_length = offsets[count] as usize;
    if code_length > 65535 {
        return Err(CodecError::CodeLengthOverflow {
            length: code_length,
        });
    }

    out.put_u16(code.max_stack);
    out.put_u16(code.max_locals);
    out.put_u32(code_length as u32);
    let body_start = out.len();
    for (i, insn) in code.instructions.iter().enumerate() {
        write_one(insn, offsets[i], indexes[i], wide_jump[i], &offsets, out)?;
    }
    debug_assert_eq!(out.len() - body_start, code_length);

    let pcs = Pcs::Offsets(&offsets);
    let table_len = u16::try_from(code.exception_table.len()).map_err(|_| CodecError::CapacityOverflow {
        what: "exception table rows",
        count: code.exception_table.len(),
    })?;
    out.put_u16(table_len);
    for (i, h) in code.exception_table.iter().enumerate() {
        let at = |index: u32, allow_end| {
            pcs.offset_of(index, allow_end)
                .map(|o| o as u16)
                .ok_or(CodecError::UnresolvedLabel { from: i, target: index })
        };
        out.put_u16(at(h.start, false)?);
        out.put_u16(at(h.end, true)?);
        out.put_u16(at(h.handler, false)?);
        out.put_u16(match &h.catch_type {
            Some(c) => pool.class(c)?,
            None => 0,
        });
    }
    write_attributes(&code.attributes, pool, Some(pcs), out)
}

fn operand_index(insn: &Instruction, pool: &PoolLayout) -> Result<u16, CodecError> {
    Ok(match &insn.operand {
        Operand::Constant(c) => pool.resolve(c)?,
        Operand::Member(m) => pool.resolve(&ConstantValue::Member(m.clone()))?,
        Operand::Type(t) => pool.class(t)?,
        Operand::MultiArray { class, .. } => pool.class(class)?,
        _ => 0,
    })
}

fn length(insn: &Instruction, pc: u32, index: u16, wide_jump: bool) -> u32 {
    match &insn.operand {
        Operand::None => 1,
        Operand::Int(_) => match insn.opcode {
            Opcode::Sipush => 3,
            _ => 2,
        },
        Operand::Local(l) => {
            if *l <= 255 {
                2
            } else {
                4
            }
        }
        Operand::Iinc { local, delta } => {
            if *local <= 255 && i8::try_from(*delta).is_ok() {
                3
            } else {
                6
            }
        }
        Operand::Constant(_) => match insn.opcode {
            Opcode::Ldc if index <= 255 => 2,
            Opcode::Invokedynamic => 5,
            _ => 3,
        },
        Operand::Member(_) => {
            if insn.opcode == Opcode::Invokeinterface {
                5
            } else {
                3
            }
        }
        Operand::Type(_) => 3,
        Operand::MultiArray { .. } => 4,
        Operand::Branch(_) => {
            if wide_jump {
                5
            } else {
                3
            }
        }
        Operand::TableSwitch { targets, .. } => 1 + padding(pc) as u32 + 12 + 4 * targets.len() as u32,
        Operand::LookupSwitch { pairs, .. } => 1 + padding(pc) as u32 + 8 + 8 * pairs.len() as u32,
    }
}

fn write_one(
    insn: &Instruction,
    pc: u32,
    index: u16,
    wide_jump: bool,
    offsets: &[u32],
    out: &mut Vec<u8>,
) -> Result<(), CodecError> {
    let op = insn.opcode as u8;
    let rel = |t: u32| (i64::from(offsets[t as usize]) - i64::from(pc)) as i32;
    match &insn.operand {
        Operand::None => out.put_u8(op),
        Operand::Int(v) => {
            out.put_u8(op);
            if insn.opcode == Opcode::Sipush {
                out.put_u16(*v as i16 as u16);
            } else {
                out.put_u8(*v as u8);
            }
        }
        Operand::Local(l) => {
            if *l <= 255 {
                out.put_u8(op);
                out.put_u8(*l as u8);
            } else {
                out.put_u8(WIDE);
                out.put_u8(op);
                out.put_u16(*l);
            }
        }
        Operand::Iinc { local, delta } => {
            if *local <= 255 && i8::try_from(*delta).is_ok() {
                out.put_u8(op);
                out.put_u8(*local as u8);
                out.put_u8(*delta as i8 as u8);
            } else {
                out.put_u8(WIDE);
                out.put_u8(op);
                out.put_u16(*local);
                out.put_u16(*delta as u16);
            }
        }
        Operand::Constant(_) => match insn.opcode {
            Opcode::Ldc if index <= 255 => {
                out.put_u8(op);
                out.put_u8(index as u8);
            }
            Opcode::Ldc => {
                out.put_u8(LDC_W);
                out.put_u16(index);
            }
            Opcode::Invokedynamic => {
                out.put_u8(op);
                out.put_u16(index);
                out.put_u16(0);
            }
            _ => {
                out.put_u8(op);
                out.put_u16(index);
            }
        },
        Operand::Member(m) => {
            out.put_u8(op);
            out.put_u16(index);
            if insn.opcode == Opcode::Invokeinterface {
                let (args, _) = JavaType::parse_method_descriptor(&m.descriptor).ok_or_else(|| {
                    CodecError::BadDescriptor {
                        descriptor: m.descriptor.clone(),
                        offset: 0,
                    }
                })?;
                let slots: usize = 1 + args
                    .iter()
                    .map(|a| match a {
                        JavaType::Long | JavaType::Double => 2,
                        _ => 1,
                    })
                    .sum::<usize>();
                out.put_u8(slots.min(255) as u8);
                out.put_u8(0);
            }
        }
        Operand::Type(_) => {
            out.put_u8(op);
            out.put_u16(index);
        }
        Operand::MultiArray { dimensions, .. } => {
            out.put_u8(op);
            out.put_u16(index);
            out.put_u8(*dimensions);
        }
        Operand::Branch(t) => {
            if wide_jump {
                out.put_u8(if insn.opcode == Opcode::Goto { GOTO_W } else { JSR_W });
                out.put_u32(rel(*t) as u32);
            } else {
                out.put_u8(op);
                out.put_u16(rel(*t) as i16 as u16);
            }
        }
        Operand::TableSwitch {
            default,
            low,
            targets,
        } => {
            out.put_u8(op);
            out.extend(core::iter::repeat_n(0, padding(pc)));
            out.put_u32(rel(*default) as u32);
            out.put_u32(*low as u32);
            out.put_u32((*low as i64 + targets.len() as i64 - 1) as i32 as u32);
            for t in targets {
                out.put_u32(rel(*t) as u32);
            }
        }
        Operand::LookupSwitch { default, pairs } => {
            out.put_u8(op);
            out.extend(core::iter::repeat_n(0, padding(pc)));
            out.put_u32(rel(*default) as u32);
            out.put_u32(pairs.len() as u32);
            for (k, t) in pairs {
                out.put_u32(*k as u32);
                out.put_u32(rel(*t) as u32);
            }
        }
    }
    Ok(())
}
