//! Binary encoding of patch trees.
//!
//! Nodes start with a one-byte tag. `Replace`, `Set` and `Seq` nodes carry a
//! mini constant pool (slot count as a varint, then class-file `cp_info`
//! entries) that the values and keys directly inside them index into.

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use super::{ArchivePatch, EntryChange, FormatError};
use crate::ast::{
    AttributeAst, ConstantValue, ExceptionHandler, FrameKind, InnerClass, Instruction, JavaType,
    Key, LineNumber, LocalVariable, MemberKind, MemberRef, Opcode, Operand, OperandShape,
    Signature, StackFrame, VerificationType,
};
use crate::codec::{
    emit_class, is_code_level, parse_class, read_attribute, read_field, read_method,
    write_attribute, write_field, write_method, CodecError, Collector, ConstantPool, Pcs,
    PoolLayout, Reader,
};
use crate::diff::{PatchNode, SeqOp, SetPatch, Value};

pub const TAG_UNCHANGED: u8 = 0x3D;
pub const TAG_REPLACE: u8 = 0x52;
pub const TAG_TUPLE: u8 = 0x54;
pub const TAG_SET: u8 = 0x53;
pub const TAG_SEQ: u8 = 0x51;

const OP_COPY: u8 = b'c';
const OP_DELETE: u8 = b'd';
const OP_INSERT: u8 = b'i';
const OP_PATCH: u8 = b'p';

const MAX_DEPTH: usize = 64;

pub(crate) fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn put_zigzag(out: &mut Vec<u8>, v: i64) {
    put_varint(out, ((v << 1) ^ (v >> 63)) as u64);
}

fn put_len(out: &mut Vec<u8>, n: usize) {
    put_varint(out, n as u64);
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    put_len(out, bytes.len());
    out.extend_from_slice(bytes);
}

/// Cursor over a decompressed payload.
pub(crate) struct In<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> In<'a> {
    pub(crate) fn new(data: &'a [u8]) -> Self {
        In { data, pos: 0 }
    }

    pub(crate) fn offset(&self) -> usize {
        self.pos
    }

    pub(crate) fn is_empty(&self) -> bool {
        self.pos == self.data.len()
    }

    pub(crate) fn u8(&mut self) -> Result<u8, FormatError> {
        let b = *self.data.get(self.pos).ok_or(FormatError::Truncated { offset: self.pos })?;
        self.pos += 1;
        Ok(b)
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.data.len() - self.pos < n {
            return Err(FormatError::Truncated {
                offset: self.data.len(),
            });
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub(crate) fn varint(&mut self) -> Result<u64, FormatError> {
        let start = self.pos;
        let mut v = 0u64;
        for shift in (0..70).step_by(7) {
            let b = self.u8()?;
            let bits = u64::from(b & 0x7f);
            if shift == 63 && bits > 1 {
                return Err(FormatError::BadVarint { offset: start });
            }
            v |= bits << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(FormatError::BadVarint { offset: start })
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        let at = self.pos;
        u32::try_from(self.varint()?).map_err(|_| FormatError::BadVarint { offset: at })
    }

    fn u16(&mut self) -> Result<u16, FormatError> {
        let at = self.pos;
        u16::try_from(self.varint()?).map_err(|_| FormatError::BadVarint { offset: at })
    }

    fn zigzag(&mut self) -> Result<i64, FormatError> {
        let v = self.varint()?;
        Ok(((v >> 1) as i64) ^ -((v & 1) as i64))
    }

    fn i32(&mut self) -> Result<i32, FormatError> {
        let at = self.pos;
        i32::try_from(self.zigzag()?).map_err(|_| FormatError::BadVarint { offset: at })
    }

    /// Element count, bounded by the remaining input so hostile counts cannot
    /// trigger huge allocations.
    fn count(&mut self) -> Result<usize, FormatError> {
        let at = self.pos;
        let n = self.varint()?;
        if n > (self.data.len() - self.pos) as u64 {
            return Err(FormatError::Truncated { offset: at });
        }
        Ok(n as usize)
    }

    fn bytes(&mut self) -> Result<&'a [u8], FormatError> {
        let n = self.count()?;
        self.take(n)
    }

    fn string(&mut self) -> Result<String, FormatError> {
        let at = self.pos;
        let bytes = self.bytes()?;
        core::str::from_utf8(bytes)
            .map(String::from)
            .map_err(|_| FormatError::BadValue {
                offset: at,
                reason: "entry name is not UTF-8",
            })
    }
}

fn bad(offset: usize, reason: &'static str) -> FormatError {
    FormatError::BadValue { offset, reason }
}

// ---------------------------------------------------------------- encoding

pub(crate) fn encode_node(node: &PatchNode, out: &mut Vec<u8>) -> Result<(), FormatError> {
    match node {
        PatchNode::Unchanged => out.push(TAG_UNCHANGED),
        PatchNode::Replace(v) => {
            out.push(TAG_REPLACE);
            let mut c = Collector::default();
            collect_value(&mut c, v);
            let pool = write_pool(&c, out)?;
            encode_value(v, &pool, out)?;
        }
        PatchNode::Tuple(children) => {
            out.push(TAG_TUPLE);
            let mask = children.iter().fold(0u64, |m, (i, _)| m | (1 << i));
            put_varint(out, mask);
            for (_, child) in children {
                encode_node(child, out)?;
            }
        }
        PatchNode::Set(sp) => {
            out.push(TAG_SET);
            let mut c = Collector::default();
            sp.removed.iter().for_each(|k| collect_key(&mut c, k));
            sp.added.iter().for_each(|v| collect_value(&mut c, v));
            sp.patched.iter().for_each(|(k, _)| collect_key(&mut c, k));
            let pool = write_pool(&c, out)?;
            put_len(out, sp.removed.len());
            for k in &sp.removed {
                encode_key(k, &pool, out)?;
            }
            put_len(out, sp.added.len());
            for v in &sp.added {
                encode_value(v, &pool, out)?;
            }
            put_len(out, sp.patched.len());
            for (k, child) in &sp.patched {
                encode_key(k, &pool, out)?;
                encode_node(child, out)?;
            }
        }
        PatchNode::Seq(ops) => {
            out.push(TAG_SEQ);
            let mut c = Collector::default();
            for op in ops {
                if let SeqOp::Insert(values) = op {
                    values.iter().for_each(|v| collect_value(&mut c, v));
                }
            }
            let pool = write_pool(&c, out)?;
            put_len(out, ops.len());
            for op in ops {
                match op {
                    SeqOp::Copy(n) => {
                        out.push(OP_COPY);
                        put_varint(out, u64::from(*n));
                    }
                    SeqOp::Delete(n) => {
                        out.push(OP_DELETE);
                        put_varint(out, u64::from(*n));
                    }
                    SeqOp::Insert(values) => {
                        out.push(OP_INSERT);
                        put_len(out, values.len());
                        for v in values {
                            encode_value(v, &pool, out)?;
                        }
                    }
                    SeqOp::PatchItem(child) => {
                        out.push(OP_PATCH);
                        encode_node(child, out)?;
                    }
                }
            }
        }
    }
    Ok(())
}

fn write_pool(c: &Collector, out: &mut Vec<u8>) -> Result<PoolLayout, FormatError> {
    let pool = PoolLayout::from_constants(&c.set)?;
    put_len(out, pool.slots());
    pool.write(out)?;
    Ok(pool)
}

fn collect_key(c: &mut Collector, key: &Key) {
    match key {
        Key::Name(n) => c.utf8(n),
        Key::Signature(s) => {
            c.utf8(&s.name);
            c.utf8(&s.descriptor());
        }
        Key::Constant(k) => c.constant(k),
    }
}

fn collect_value(c: &mut Collector, v: &Value) {
    match v {
        Value::Name(n) | Value::OptName(Some(n)) => c.utf8(n),
        Value::OptName(None) | Value::U16(_) | Value::U32(_) | Value::LineNumber(_) => {}
        Value::Type(t) => c.utf8(&t.descriptor()),
        Value::Constant(k) => c.constant(k),
        Value::Field(f) => c.field(f),
        Value::Method(m) => c.method(m),
        Value::Attribute(a) => c.attribute(a),
        Value::Instruction(i) => c.instruction(i),
        Value::Handler(h) => {
            if let Some(t) = &h.catch_type {
                c.class(t);
            }
        }
        Value::LocalVariable(l) => {
            c.utf8(&l.name);
            c.utf8(&l.descriptor);
        }
        Value::Frame(f) => c.frame(f),
        Value::InnerClass(r) => c.inner_class(r),
    }
}

fn idx(out: &mut Vec<u8>, index: u16) {
    put_varint(out, u64::from(index));
}

fn encode_key(key: &Key, pool: &PoolLayout, out: &mut Vec<u8>) -> Result<(), FormatError> {
    match key {
        Key::Name(n) => {
            out.push(0);
            idx(out, pool.utf8(n)?);
        }
        Key::Signature(s) => {
            out.push(1);
            idx(out, pool.utf8(&s.name)?);
            idx(out, pool.utf8(&s.descriptor())?);
        }
        Key::Constant(k) => {
            out.push(2);
            idx(out, pool.resolve(k)?);
        }
    }
    Ok(())
}

const V_NAME: u8 = 0;
const V_OPT_NAME: u8 = 1;
const V_U16: u8 = 2;
const V_U32: u8 = 3;
const V_TYPE: u8 = 4;
const V_CONSTANT: u8 = 5;
const V_FIELD: u8 = 6;
const V_METHOD: u8 = 7;
const V_ATTRIBUTE: u8 = 8;
const V_INSTRUCTION: u8 = 9;
const V_HANDLER: u8 = 10;
const V_LINE: u8 = 11;
const V_LOCAL: u8 = 12;
const V_FRAME: u8 = 13;
const V_INNER: u8 = 14;

fn opt_utf8(out: &mut Vec<u8>, pool: &PoolLayout, s: &Option<String>) -> Result<(), CodecError> {
    idx(out, match s {
        Some(s) => pool.utf8(s)?,
        None => 0,
    });
    Ok(())
}

fn opt_class(out: &mut Vec<u8>, pool: &PoolLayout, s: &Option<String>) -> Result<(), CodecError> {
    idx(out, match s {
        Some(s) => pool.class(s)?,
        None => 0,
    });
    Ok(())
}

fn encode_value(v: &Value, pool: &PoolLayout, out: &mut Vec<u8>) -> Result<(), FormatError> {
    match v {
        Value::Name(n) => {
            out.push(V_NAME);
            idx(out, pool.utf8(n)?);
        }
        Value::OptName(n) => {
            out.push(V_OPT_NAME);
            opt_utf8(out, pool, n)?;
        }
        Value::U16(x) => {
            out.push(V_U16);
            put_varint(out, u64::from(*x));
        }
        Value::U32(x) => {
            out.push(V_U32);
            put_varint(out, u64::from(*x));
        }
        Value::Type(t) => {
            out.push(V_TYPE);
            idx(out, pool.utf8(&t.descriptor())?);
        }
        Value::Constant(k) => {
            out.push(V_CONSTANT);
            idx(out, pool.resolve(k)?);
        }
        Value::Field(f) => {
            out.push(V_FIELD);
            write_field(f, pool, out)?;
        }
        Value::Method(m) => {
            out.push(V_METHOD);
            write_method(m, pool, out)?;
        }
        Value::Attribute(a) => {
            out.push(V_ATTRIBUTE);
            let code_level = attribute_is_code_level(a);
            out.push(code_level as u8);
            write_attribute(a, pool, code_level.then_some(Pcs::Identity), out)?;
        }
        Value::Instruction(i) => {
            out.push(V_INSTRUCTION);
            encode_instruction(i, pool, out)?;
        }
        Value::Handler(h) => {
            out.push(V_HANDLER);
            put_varint(out, u64::from(h.start));
            put_varint(out, u64::from(h.end));
            put_varint(out, u64::from(h.handler));
            opt_class(out, pool, &h.catch_type)?;
        }
        Value::LineNumber(l) => {
            out.push(V_LINE);
            put_varint(out, u64::from(l.start));
            put_varint(out, u64::from(l.line));
        }
        Value::LocalVariable(l) => {
            out.push(V_LOCAL);
            put_varint(out, u64::from(l.start));
            put_varint(out, u64::from(l.end));
            idx(out, pool.utf8(&l.name)?);
            idx(out, pool.utf8(&l.descriptor)?);
            put_varint(out, u64::from(l.slot));
        }
        Value::Frame(f) => {
            out.push(V_FRAME);
            put_varint(out, u64::from(f.target));
            encode_frame(&f.kind, pool, out)?;
        }
        Value::InnerClass(r) => {
            out.push(V_INNER);
            idx(out, pool.class(&r.inner)?);
            opt_class(out, pool, &r.outer)?;
            opt_utf8(out, pool, &r.name)?;
            put_varint(out, u64::from(r.flags));
        }
    }
    Ok(())
}

/// Standalone attributes are decoded in the context whose reader keeps them
/// intact: `Code`-level tables in a code context, everything else at member
/// level (where an opaque attribute named like a table stays opaque).
fn attribute_is_code_level(a: &AttributeAst) -> bool {
    use crate::ast::AttributeContent as A;
    match &a.content {
        A::LineNumberTable(_) | A::LocalVariableTable(_) | A::LocalVariableTypeTable(_) | A::StackMapTable(_) => {
            true
        }
        A::Opaque(_) => !is_code_level(&a.name),
        _ => false,
    }
}

fn encode_instruction(i: &Instruction, pool: &PoolLayout, out: &mut Vec<u8>) -> Result<(), FormatError> {
    out.push(i.opcode as u8);
    match &i.operand {
        Operand::None => {}
        Operand::Int(v) => put_zigzag(out, i64::from(*v)),
        Operand::Local(l) => put_varint(out, u64::from(*l)),
        Operand::Iinc { local, delta } => {
            put_varint(out, u64::from(*local));
            put_zigzag(out, i64::from(*delta));
        }
        Operand::Constant(k) => idx(out, pool.resolve(k)?),
        Operand::Member(m) => idx(out, pool.resolve(&ConstantValue::Member(m.clone()))?),
        Operand::Type(t) => idx(out, pool.class(t)?),
        Operand::MultiArray { class, dimensions } => {
            idx(out, pool.class(class)?);
            out.push(*dimensions);
        }
        Operand::Branch(t) => put_varint(out, u64::from(*t)),
        Operand::TableSwitch {
            default,
            low,
            targets,
        } => {
            put_varint(out, u64::from(*default));
            put_zigzag(out, i64::from(*low));
            put_len(out, targets.len());
            for t in targets {
                put_varint(out, u64::from(*t));
            }
        }
        Operand::LookupSwitch { default, pairs } => {
            put_varint(out, u64::from(*default));
            put_len(out, pairs.len());
            for (k, t) in pairs {
                put_zigzag(out, i64::from(*k));
                put_varint(out, u64::from(*t));
            }
        }
    }
    Ok(())
}

fn encode_frame(kind: &FrameKind, pool: &PoolLayout, out: &mut Vec<u8>) -> Result<(), FormatError> {
    let vts = |out: &mut Vec<u8>, ts: &[VerificationType]| -> Result<(), FormatError> {
        put_len(out, ts.len());
        for t in ts {
            encode_vtype(t, pool, out)?;
        }
        Ok(())
    };
    match kind {
        FrameKind::Same => out.push(0),
        FrameKind::SameLocals1(t) => {
            out.push(1);
            encode_vtype(t, pool, out)?;
        }
        FrameKind::Chop(k) => {
            out.push(2);
            out.push(*k);
        }
        FrameKind::Append(ts) => {
            out.push(3);
            vts(out, ts)?;
        }
        FrameKind::Full { locals, stack } => {
            out.push(4);
            vts(out, locals)?;
            vts(out, stack)?;
        }
    }
    Ok(())
}

fn encode_vtype(t: &VerificationType, pool: &PoolLayout, out: &mut Vec<u8>) -> Result<(), FormatError> {
    match t {
        VerificationType::Top => out.push(0),
        VerificationType::Integer => out.push(1),
        VerificationType::Float => out.push(2),
        VerificationType::Double => out.push(3),
        VerificationType::Long => out.push(4),
        VerificationType::Null => out.push(5),
        VerificationType::UninitializedThis => out.push(6),
        VerificationType::Object(n) => {
            out.push(7);
            idx(out, pool.class(n)?);
        }
        VerificationType::Uninitialized(at) => {
            out.push(8);
            put_varint(out, u64::from(*at));
        }
    }
    Ok(())
}

pub(crate) fn encode_archive(p: &ArchivePatch, out: &mut Vec<u8>) -> Result<(), FormatError> {
    put_len(out, p.patched.len());
    for (name, node) in &p.patched {
        put_bytes(out, name.as_bytes());
        encode_node(node, out)?;
    }
    put_len(out, p.added.len());
    for (name, class) in &p.added {
        put_bytes(out, name.as_bytes());
        put_bytes(out, &emit_class(class)?);
    }
    put_len(out, p.removed.len());
    for name in &p.removed {
        put_bytes(out, name.as_bytes());
    }
    put_len(out, p.other_entries.len());
    for (name, change) in &p.other_entries {
        put_bytes(out, name.as_bytes());
        match change {
            EntryChange::Added(bytes) => {
                out.push(0);
                put_bytes(out, bytes);
            }
            EntryChange::Removed => out.push(1),
            EntryChange::Replaced(bytes) => {
                out.push(2);
                put_bytes(out, bytes);
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- decoding

pub(crate) fn decode_node(r: &mut In<'_>, depth: usize) -> Result<PatchNode, FormatError> {
    if depth > MAX_DEPTH {
        return Err(bad(r.offset(), "patch tree nested too deeply"));
    }
    let at = r.offset();
    Ok(match r.u8()? {
        TAG_UNCHANGED => PatchNode::Unchanged,
        TAG_REPLACE => {
            let pool = read_pool(r)?;
            PatchNode::Replace(decode_value(r, &pool)?)
        }
        TAG_TUPLE => {
            let mask = r.varint()?;
            let mut children = Vec::new();
            for i in 0..64u8 {
                if mask & (1 << i) != 0 {
                    children.push((i, decode_node(r, depth + 1)?));
                }
            }
            PatchNode::Tuple(children)
        }
        TAG_SET => {
            let pool = read_pool(r)?;
            let mut sp = SetPatch::default();
            for _ in 0..r.count()? {
                sp.removed.push(decode_key(r, &pool)?);
            }
            for _ in 0..r.count()? {
                sp.added.push(decode_value(r, &pool)?);
            }
            for _ in 0..r.count()? {
                let key = decode_key(r, &pool)?;
                sp.patched.push((key, decode_node(r, depth + 1)?));
            }
            PatchNode::Set(sp)
        }
        TAG_SEQ => {
            let pool = read_pool(r)?;
            let n = r.count()?;
            let mut ops = Vec::with_capacity(n);
            for _ in 0..n {
                let at = r.offset();
                ops.push(match r.u8()? {
                    OP_COPY => SeqOp::Copy(r.u32()?),
                    OP_DELETE => SeqOp::Delete(r.u32()?),
                    OP_INSERT => {
                        let n = r.count()?;
                        let mut values = Vec::with_capacity(n);
                        for _ in 0..n {
                            values.push(decode_value(r, &pool)?);
                        }
                        SeqOp::Insert(values)
                    }
                    OP_PATCH => SeqOp::PatchItem(Box::new(decode_node(r, depth + 1)?)),
                    _ => return Err(bad(at, "unknown sequence op")),
                });
            }
            PatchNode::Seq(ops)
        }
        tag => return Err(FormatError::UnknownNodeTag { tag, offset: at }),
    })
}

struct MiniPool {
    pool: ConstantPool,
}

fn read_pool(r: &mut In<'_>) -> Result<MiniPool, FormatError> {
    let at = r.offset();
    let slots = r.varint()?;
    if slots > crate::codec::MAX_POOL_SLOTS as u64 {
        return Err(bad(at, "mini-pool too large"));
    }
    let mut reader = Reader::at(&r.data[r.pos..], r.pos);
    let pool = ConstantPool::read(&mut reader, slots as u16 + 1).map_err(|e| codec_at(e, r))?;
    r.pos = reader.offset();
    Ok(MiniPool { pool })
}

fn codec_at(e: CodecError, r: &In<'_>) -> FormatError {
    match e {
        CodecError::Truncated { .. } => FormatError::Truncated { offset: r.data.len() },
        e => FormatError::Codec(e),
    }
}

/// Runs a class-file reader over the rest of the input and advances past what it consumed.
fn with_reader<T>(
    r: &mut In<'_>,
    f: impl FnOnce(&mut Reader<'_>) -> Result<T, CodecError>,
) -> Result<T, FormatError> {
    let mut reader = Reader::at(&r.data[r.pos..], r.pos);
    let out = f(&mut reader).map_err(|e| codec_at(e, r))?;
    r.pos = reader.offset();
    Ok(out)
}

fn pool_entry<'p>(r: &mut In<'_>, pool: &'p MiniPool) -> Result<&'p ConstantValue, FormatError> {
    let at = r.offset();
    let index = r.u16()?;
    pool.pool.get(index).ok_or(bad(at, "mini-pool index out of range"))
}

fn utf8(r: &mut In<'_>, pool: &MiniPool) -> Result<String, FormatError> {
    let at = r.offset();
    match pool_entry(r, pool)? {
        ConstantValue::Utf8(s) => Ok(s.clone()),
        _ => Err(bad(at, "expected a utf8 constant")),
    }
}

fn class(r: &mut In<'_>, pool: &MiniPool) -> Result<String, FormatError> {
    let at = r.offset();
    match pool_entry(r, pool)? {
        ConstantValue::Class(s) => Ok(s.clone()),
        _ => Err(bad(at, "expected a class constant")),
    }
}

fn optional(
    r: &mut In<'_>,
    pool: &MiniPool,
    read: fn(&mut In<'_>, &MiniPool) -> Result<String, FormatError>,
) -> Result<Option<String>, FormatError> {
    let mut peek = In {
        data: r.data,
        pos: r.pos,
    };
    if peek.varint()? == 0 {
        r.pos = peek.pos;
        Ok(None)
    } else {
        read(r, pool).map(Some)
    }
}

fn decode_key(r: &mut In<'_>, pool: &MiniPool) -> Result<Key, FormatError> {
    let at = r.offset();
    Ok(match r.u8()? {
        0 => Key::Name(utf8(r, pool)?),
        1 => {
            let name = utf8(r, pool)?;
            let d_at = r.offset();
            let descriptor = utf8(r, pool)?;
            Key::Signature(
                Signature::from_descriptor(&name, &descriptor).ok_or(bad(d_at, "bad method descriptor"))?,
            )
        }
        2 => Key::Constant(pool_entry(r, pool)?.clone()),
        _ => return Err(bad(at, "unknown key kind")),
    })
}

fn decode_value(r: &mut In<'_>, pool: &MiniPool) -> Result<Value, FormatError> {
    let at = r.offset();
    Ok(match r.u8()? {
        V_NAME => Value::Name(utf8(r, pool)?),
        V_OPT_NAME => Value::OptName(optional(r, pool, utf8)?),
        V_U16 => Value::U16(r.u16()?),
        V_U32 => Value::U32(r.u32()?),
        V_TYPE => {
            let d_at = r.offset();
            let d = utf8(r, pool)?;
            Value::Type(JavaType::parse_field_descriptor(&d).ok_or(bad(d_at, "bad field descriptor"))?)
        }
        V_CONSTANT => Value::Constant(pool_entry(r, pool)?.clone()),
        V_FIELD => Value::Field(with_reader(r, |rd| read_field(rd, &pool.pool))?),
        V_METHOD => Value::Method(with_reader(r, |rd| read_method(rd, &pool.pool))?),
        V_ATTRIBUTE => {
            let pcs = match r.u8()? {
                0 => None,
                1 => Some(Pcs::Identity),
                _ => return Err(bad(at, "unknown attribute context")),
            };
            Value::Attribute(with_reader(r, |rd| read_attribute(rd, &pool.pool, pcs))?)
        }
        V_INSTRUCTION => Value::Instruction(decode_instruction(r, pool)?),
        V_HANDLER => Value::Handler(ExceptionHandler {
            start: r.u32()?,
            end: r.u32()?,
            handler: r.u32()?,
            catch_type: optional(r, pool, class)?,
        }),
        V_LINE => Value::LineNumber(LineNumber {
            start: r.u32()?,
            line: r.u16()?,
        }),
        V_LOCAL => Value::LocalVariable(LocalVariable {
            start: r.u32()?,
            end: r.u32()?,
            name: utf8(r, pool)?,
            descriptor: utf8(r, pool)?,
            slot: r.u16()?,
        }),
        V_FRAME => Value::Frame(StackFrame {
            target: r.u32()?,
            kind: decode_frame(r, pool)?,
        }),
        V_INNER => Value::InnerClass(InnerClass {
            inner: class(r, pool)?,
            outer: optional(r, pool, class)?,
            name: optional(r, pool, utf8)?,
            flags: r.u16()?,
        }),
        _ => return Err(bad(at, "unknown value kind")),
    })
}

fn decode_instruction(r: &mut In<'_>, pool: &MiniPool) -> Result<Instruction, FormatError> {
    let at = r.offset();
    let opcode = Opcode::from_byte(r.u8()?).ok_or(bad(at, "unknown opcode"))?;
    let member = |r: &mut In<'_>, ok: fn(MemberKind) -> bool| -> Result<MemberRef, FormatError> {
        match pool_entry(r, pool)? {
            ConstantValue::Member(m) if ok(m.kind) => Ok(m.clone()),
            _ => Err(bad(at, "operand constant does not fit the opcode")),
        }
    };
    let operand = match opcode.shape() {
        OperandShape::None => Operand::None,
        OperandShape::Byte | OperandShape::Short | OperandShape::ArrayType => Operand::Int(r.i32()?),
        OperandShape::Local => Operand::Local(r.u16()?),
        OperandShape::Iinc => {
            let local = r.u16()?;
            let d_at = r.offset();
            let delta = i16::try_from(r.zigzag()?).map_err(|_| FormatError::BadVarint { offset: d_at })?;
            Operand::Iinc { local, delta }
        }
        OperandShape::Ldc | OperandShape::Ldc2 | OperandShape::Dynamic => {
            Operand::Constant(pool_entry(r, pool)?.clone())
        }
        OperandShape::Field => Operand::Member(member(r, |k| k == MemberKind::Field)?),
        OperandShape::Method => Operand::Member(member(r, |k| k != MemberKind::Field)?),
        OperandShape::InterfaceMethod => {
            Operand::Member(member(r, |k| k == MemberKind::InterfaceMethod)?)
        }
        OperandShape::Type => Operand::Type(class(r, pool)?),
        OperandShape::MultiANewArray => Operand::MultiArray {
            class: class(r, pool)?,
            dimensions: r.u8()?,
        },
        OperandShape::Branch => Operand::Branch(r.u32()?),
        OperandShape::TableSwitch => {
            let default = r.u32()?;
            let low = r.i32()?;
            let n = r.count()?;
            let targets = (0..n).map(|_| r.u32()).collect::<Result<_, _>>()?;
            Operand::TableSwitch {
                default,
                low,
                targets,
            }
        }
        OperandShape::LookupSwitch => {
            let default = r.u32()?;
            let n = r.count()?;
            let mut pairs = Vec::with_capacity(n);
            for _ in 0..n {
                pairs.push((r.i32()?, r.u32()?));
            }
            Operand::LookupSwitch { default, pairs }
        }
    };
    let insn = Instruction::new(opcode, operand);
    if !insn.is_well_formed() {
        return Err(bad(at, "operand does not fit the opcode"));
    }
    Ok(insn)
}

fn decode_frame(r: &mut In<'_>, pool: &MiniPool) -> Result<FrameKind, FormatError> {
    let at = r.offset();
    let vts = |r: &mut In<'_>| -> Result<Vec<VerificationType>, FormatError> {
        let n = r.count()?;
        (0..n).map(|_| decode_vtype(r, pool)).collect()
    };
    Ok(match r.u8()? {
        0 => FrameKind::Same,
        1 => FrameKind::SameLocals1(decode_vtype(r, pool)?),
        2 => FrameKind::Chop(r.u8()?),
        3 => FrameKind::Append(vts(r)?),
        4 => {
            let locals = vts(r)?;
            FrameKind::Full {
                locals,
                stack: vts(r)?,
            }
        }
        _ => return Err(bad(at, "unknown frame kind")),
    })
}

fn decode_vtype(r: &mut In<'_>, pool: &MiniPool) -> Result<VerificationType, FormatError> {
    let at = r.offset();
    Ok(match r.u8()? {
        0 => VerificationType::Top,
        1 => VerificationType::Integer,
        2 => VerificationType::Float,
        3 => VerificationType::Double,
        4 => VerificationType::Long,
        5 => VerificationType::Null,
        6 => VerificationType::UninitializedThis,
        7 => VerificationType::Object(class(r, pool)?),
        8 => VerificationType::Uninitialized(r.u32()?),
        _ => return Err(bad(at, "unknown verification type")),
    })
}

pub(crate) fn decode_archive(r: &mut In<'_>) -> Result<ArchivePatch, FormatError> {
    let mut p = ArchivePatch::default();
    for _ in 0..r.count()? {
        let name = r.string()?;
        p.patched.insert(name, decode_node(r, 0)?);
    }
    for _ in 0..r.count()? {
        let name = r.string()?;
        let bytes = r.bytes()?;
        p.added.insert(name, parse_class(bytes)?.canonical());
    }
    let mut removed = BTreeSet::new();
    for _ in 0..r.count()? {
        removed.insert(r.string()?);
    }
    p.removed = removed;
    let mut other = BTreeMap::new();
    for _ in 0..r.count()? {
        let name = r.string()?;
        let at = r.offset();
        let change = match r.u8()? {
            0 => EntryChange::Added(r.bytes()?.into()),
            1 => EntryChange::Removed,
            2 => EntryChange::Replaced(r.bytes()?.into()),
            _ => return Err(bad(at, "unknown entry change")),
        };
        other.insert(name, change);
    }
    p.other_entries = other;
    Ok(p)
}
