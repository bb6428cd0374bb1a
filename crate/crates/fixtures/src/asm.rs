//! A small textual assembler for class files.
//!
//! Method bodies are written one instruction per line:
//!
//! ```text
//!     aload_0
//!     invokespecial java/lang/Object.<init>()V
//!     iload_1
//!     ifeq Skip
//!     getfield toy/Foo.x:I
//! Skip:
//!     .frame same
//!     return
//! ```
//!
//! Directives: `.line N`, `.catch <class|any> From To Handler`,
//! `.var slot name descriptor From To`, `.frame same | same1 T | chop k |
//! append T.. | full T.. / T..`. Verification types are `I F D J N T U`,
//! `new:Label` or a class name.

use std::collections::HashMap;
use std::fmt::Write as _;

const MNEMONICS: &str = "nop aconst_null iconst_m1 iconst_0 iconst_1 iconst_2 iconst_3 iconst_4 \
iconst_5 lconst_0 lconst_1 fconst_0 fconst_1 fconst_2 dconst_0 dconst_1 bipush sipush ldc ldc_w \
ldc2_w iload lload fload dload aload iload_0 iload_1 iload_2 iload_3 lload_0 lload_1 lload_2 \
lload_3 fload_0 fload_1 fload_2 fload_3 dload_0 dload_1 dload_2 dload_3 aload_0 aload_1 aload_2 \
aload_3 iaload laload faload daload aaload baload caload saload istore lstore fstore dstore astore \
istore_0 istore_1 istore_2 istore_3 lstore_0 lstore_1 lstore_2 lstore_3 fstore_0 fstore_1 fstore_2 \
fstore_3 dstore_0 dstore_1 dstore_2 dstore_3 astore_0 astore_1 astore_2 astore_3 iastore lastore \
fastore dastore aastore bastore castore sastore pop pop2 dup dup_x1 dup_x2 dup2 dup2_x1 dup2_x2 \
swap iadd ladd fadd dadd isub lsub fsub dsub imul lmul fmul dmul idiv ldiv fdiv ddiv irem lrem \
frem drem ineg lneg fneg dneg ishl lshl ishr lshr iushr lushr iand land ior lor ixor lxor iinc i2l \
i2f i2d l2i l2f l2d f2i f2l f2d d2i d2l d2f i2b i2c i2s lcmp fcmpl fcmpg dcmpl dcmpg ifeq ifne \
iflt ifge ifgt ifle if_icmpeq if_icmpne if_icmplt if_icmpge if_icmpgt if_icmple if_acmpeq \
if_acmpne goto jsr ret tableswitch lookupswitch ireturn lreturn freturn dreturn areturn return \
getstatic putstatic getfield putfield invokevirtual invokespecial invokestatic invokeinterface \
invokedynamic new newarray anewarray arraylength athrow checkcast instanceof monitorenter \
monitorexit wide multianewarray ifnull ifnonnull goto_w jsr_w";

fn opcode(name: &str) -> Option<u8> {
    MNEMONICS.split_whitespace().position(|m| m == name).map(|p| p as u8)
}

/// Operand layout of an opcode, as needed by the assembler.
#[derive(Clone, Copy, PartialEq, Debug)]
enum Shape {
    None,
    Byte,
    Short,
    NewArray,
    Local,
    Iinc,
    Ldc,
    Ldc2,
    FieldRef,
    MethodRef,
    InterfaceRef,
    Type,
    MultiArray,
    Branch,
    TableSwitch,
    LookupSwitch,
}

fn shape(op: u8) -> Shape {
    match op {
        16 => Shape::Byte,
        17 => Shape::Short,
        18 | 19 => Shape::Ldc,
        20 => Shape::Ldc2,
        21..=25 | 54..=58 | 169 => Shape::Local,
        132 => Shape::Iinc,
        153..=168 | 198 | 199 => Shape::Branch,
        170 => Shape::TableSwitch,
        171 => Shape::LookupSwitch,
        178..=181 => Shape::FieldRef,
        182..=184 => Shape::MethodRef,
        185 => Shape::InterfaceRef,
        187 | 189 | 192 | 193 => Shape::Type,
        188 => Shape::NewArray,
        197 => Shape::MultiArray,
        _ => Shape::None,
    }
}

/// Pool entry by value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Const {
    Utf8(String),
    Int(i32),
    /// Raw IEEE bits.
    Float(u32),
    Long(i64),
    Double(u64),
    Class(String),
    Str(String),
    Field(String, String, String),
    Method(String, String, String),
    InterfaceMethod(String, String, String),
    NameAndType(String, String),
    MethodType(String),
}

impl Const {
    fn wide(&self) -> bool {
        matches!(self, Const::Long(_) | Const::Double(_))
    }
}

/// Modified UTF-8: NUL as two bytes, supplementary characters as surrogate pairs.
pub fn mutf8(s: &str) -> Vec<u8> {
    let mut out = Vec::new();
    for unit in s.encode_utf16() {
        match unit {
            0x0001..=0x007f => out.push(unit as u8),
            0x0000 | 0x0080..=0x07ff => {
                out.push(0xc0 | (unit >> 6) as u8);
                out.push(0x80 | (unit & 0x3f) as u8);
            }
            _ => {
                out.push(0xe0 | (unit >> 12) as u8);
                out.push(0x80 | ((unit >> 6) & 0x3f) as u8);
                out.push(0x80 | (unit & 0x3f) as u8);
            }
        }
    }
    out
}

/// Constant pool that hands out indexes on first use. Once frozen, every
/// lookup must hit an existing entry.
#[derive(Default)]
struct Pool {
    entries: Vec<Const>,
    index: HashMap<Const, u16>,
    next: u16,
    frozen: bool,
}

impl Pool {
    fn new() -> Self {
        Pool {
            next: 1,
            ..Pool::default()
        }
    }

    fn add(&mut self, c: Const) -> u16 {
        if let Some(&i) = self.index.get(&c) {
            return i;
        }
        assert!(!self.frozen, "constant {c:?} was not interned in the first pass");
        match &c {
            Const::Class(n) | Const::Str(n) | Const::MethodType(n) => {
                self.utf8(n);
            }
            Const::Field(o, n, d) | Const::Method(o, n, d) | Const::InterfaceMethod(o, n, d) => {
                self.class(o);
                self.add(Const::NameAndType(n.clone(), d.clone()));
            }
            Const::NameAndType(n, d) => {
                self.utf8(n);
                self.utf8(d);
            }
            _ => {}
        }
        let i = self.next;
        self.next += if c.wide() { 2 } else { 1 };
        self.entries.push(c.clone());
        self.index.insert(c, i);
        i
    }

    fn utf8(&mut self, s: &str) -> u16 {
        self.add(Const::Utf8(s.into()))
    }

    fn class(&mut self, s: &str) -> u16 {
        self.add(Const::Class(s.into()))
    }

    /// Reorders entries and reassigns indexes, then freezes the pool.
    fn freeze(&mut self, seed: Option<u64>) {
        if let Some(seed) = seed {
            shuffle(&mut self.entries, seed);
        }
        self.index.clear();
        self.next = 1;
        for c in &self.entries {
            self.index.insert(c.clone(), self.next);
            self.next += if c.wide() { 2 } else { 1 };
        }
        self.frozen = true;
    }

    fn write(&self, out: &mut Vec<u8>) {
        put16(out, self.next);
        for c in &self.entries {
            match c {
                Const::Utf8(s) => {
                    out.push(1);
                    let b = mutf8(s);
                    put16(out, b.len() as u16);
                    out.extend_from_slice(&b);
                }
                Const::Int(v) => {
                    out.push(3);
                    out.extend_from_slice(&v.to_be_bytes());
                }
                Const::Float(v) => {
                    out.push(4);
                    out.extend_from_slice(&v.to_be_bytes());
                }
                Const::Long(v) => {
                    out.push(5);
                    out.extend_from_slice(&v.to_be_bytes());
                }
                Const::Double(v) => {
                    out.push(6);
                    out.extend_from_slice(&v.to_be_bytes());
                }
                Const::Class(n) => {
                    out.push(7);
                    put16(out, self.index[&Const::Utf8(n.clone())]);
                }
                Const::Str(s) => {
                    out.push(8);
                    put16(out, self.index[&Const::Utf8(s.clone())]);
                }
                Const::Field(o, n, d) | Const::Method(o, n, d) | Const::InterfaceMethod(o, n, d) => {
                    out.push(match c {
                        Const::Field(..) => 9,
                        Const::Method(..) => 10,
                        _ => 11,
                    });
                    put16(out, self.index[&Const::Class(o.clone())]);
                    put16(out, self.index[&Const::NameAndType(n.clone(), d.clone())]);
                }
                Const::NameAndType(n, d) => {
                    out.push(12);
                    put16(out, self.index[&Const::Utf8(n.clone())]);
                    put16(out, self.index[&Const::Utf8(d.clone())]);
                }
                Const::MethodType(d) => {
                    out.push(16);
                    put16(out, self.index[&Const::Utf8(d.clone())]);
                }
            }
        }
    }
}

/// Deterministic xorshift-driven Fisher-Yates shuffle.
pub fn shuffle<T>(items: &mut [T], seed: u64) {
    let mut state = seed ^ 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };
    for i in (1..items.len()).rev() {
        let j = (next() % (i as u64 + 1)) as usize;
        items.swap(i, j);
    }
}

fn put16(out: &mut Vec<u8>, v: u16) {
    out.extend_from_slice(&v.to_be_bytes());
}

fn put32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_be_bytes());
}

/// Raw attribute: name plus bytes that reference no pool entries.
#[derive(Clone, Debug)]
pub struct RawAttr {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug)]
pub struct Field {
    pub flags: u16,
    pub name: String,
    pub descriptor: String,
    pub constant: Option<Const>,
    pub signature: Option<String>,
    pub synthetic: bool,
    pub deprecated: bool,
}

#[derive(Clone, Debug)]
pub struct Method {
    pub flags: u16,
    pub name: String,
    pub descriptor: String,
    /// `(max_stack, max_locals, assembly)`.
    pub code: Option<(u16, u16, String)>,
    pub throws: Vec<String>,
    pub signature: Option<String>,
    pub deprecated: bool,
    pub raw: Vec<RawAttr>,
}

#[derive(Clone, Debug)]
pub struct InnerClassRow {
    pub inner: String,
    pub outer: Option<String>,
    pub name: Option<String>,
    pub flags: u16,
}

/// Emission options used to produce semantically equal but byte-different
/// variants of one class.
#[derive(Clone, Copy, Debug, Default)]
pub struct Layout {
    /// Shuffle the constant pool with this seed.
    pub pool_seed: Option<u64>,
    /// Shuffle fields and methods with this seed.
    pub member_seed: Option<u64>,
}

/// A class under construction.
#[derive(Clone, Debug)]
pub struct ClassFile {
    pub name: String,
    pub superclass: Option<String>,
    pub interfaces: Vec<String>,
    pub flags: u16,
    pub major: u16,
    pub minor: u16,
    pub fields: Vec<Field>,
    pub methods: Vec<Method>,
    pub source_file: Option<String>,
    pub signature: Option<String>,
    pub deprecated: bool,
    pub inner_classes: Vec<InnerClassRow>,
    pub raw: Vec<RawAttr>,
    /// Pool entries no member refers to.
    pub extra_constants: Vec<Const>,
}

impl ClassFile {
    /// Public class extending `java/lang/Object`, version 52.0.
    pub fn new(name: &str) -> Self {
        ClassFile {
            name: name.into(),
            superclass: Some("java/lang/Object".into()),
            interfaces: Vec::new(),
            flags: 0x0021,
            major: 52,
            minor: 0,
            fields: Vec::new(),
            methods: Vec::new(),
            source_file: None,
            signature: None,
            deprecated: false,
            inner_classes: Vec::new(),
            raw: Vec::new(),
            extra_constants: Vec::new(),
        }
    }

    pub fn version(mut self, major: u16, minor: u16) -> Self {
        self.major = major;
        self.minor = minor;
        self
    }

    pub fn flags(mut self, flags: u16) -> Self {
        self.flags = flags;
        self
    }

    pub fn superclass(mut self, name: Option<&str>) -> Self {
        self.superclass = name.map(Into::into);
        self
    }

    pub fn implements(mut self, name: &str) -> Self {
        self.interfaces.push(name.into());
        self
    }

    pub fn field(mut self, flags: u16, name: &str, descriptor: &str) -> Self {
        self.fields.push(Field {
            flags,
            name: name.into(),
            descriptor: descriptor.into(),
            constant: None,
            signature: None,
            synthetic: false,
            deprecated: false,
        });
        self
    }

    pub fn field_with(mut self, field: Field) -> Self {
        self.fields.push(field);
        self
    }

    /// Method with a body.
    pub fn method(mut self, flags: u16, name: &str, descriptor: &str, max_stack: u16, max_locals: u16, asm: &str) -> Self {
        self.methods.push(Method {
            flags,
            name: name.into(),
            descriptor: descriptor.into(),
            code: Some((max_stack, max_locals, asm.into())),
            throws: Vec::new(),
            signature: None,
            deprecated: false,
            raw: Vec::new(),
        });
        self
    }

    /// Abstract or native method.
    pub fn declare(mut self, flags: u16, name: &str, descriptor: &str) -> Self {
        self.methods.push(Method {
            flags,
            name: name.into(),
            descriptor: descriptor.into(),
            code: None,
            throws: Vec::new(),
            signature: None,
            deprecated: false,
            raw: Vec::new(),
        });
        self
    }

    pub fn method_with(mut self, method: Method) -> Self {
        self.methods.push(method);
        self
    }

    pub fn source_file(mut self, name: &str) -> Self {
        self.source_file = Some(name.into());
        self
    }

    pub fn constant(mut self, c: Const) -> Self {
        self.extra_constants.push(c);
        self
    }

    /// Bytes in definition order with the pool in first-use order.
    pub fn bytes(&self) -> Vec<u8> {
        self.bytes_with(Layout::default())
    }

    pub fn bytes_with(&self, layout: Layout) -> Vec<u8> {
        let mut class = self.clone();
        if let Some(seed) = layout.member_seed {
            shuffle(&mut class.fields, seed);
            shuffle(&mut class.methods, seed.wrapping_add(1));
        }
        let mut pool = Pool::new();
        let mut scratch = Vec::new();
        class.body(&mut pool, &mut scratch);
        pool.freeze(layout.pool_seed);
        let mut body = Vec::new();
        class.body(&mut pool, &mut body);

        let mut out = Vec::new();
        put32(&mut out, 0xCAFE_BABE);
        put16(&mut out, class.minor);
        put16(&mut out, class.major);
        pool.write(&mut out);
        out.extend_from_slice(&body);
        out
    }

    fn body(&self, pool: &mut Pool, out: &mut Vec<u8>) {
        for c in &self.extra_constants {
            pool.add(c.clone());
        }
        put16(out, self.flags);
        put16(out, pool.class(&self.name));
        put16(out, self.superclass.as_deref().map_or(0, |s| pool.class(s)));
        put16(out, self.interfaces.len() as u16);
        for i in &self.interfaces {
            put16(out, pool.class(i));
        }
        put16(out, self.fields.len() as u16);
        for f in &self.fields {
            put16(out, f.flags);
            put16(out, pool.utf8(&f.name));
            put16(out, pool.utf8(&f.descriptor));
            let mut attrs = Vec::new();
            if let Some(c) = &f.constant {
                let i = pool.add(c.clone());
                attrs.push(attr(pool, "ConstantValue", i.to_be_bytes().to_vec()));
            }
            if let Some(s) = &f.signature {
                let i = pool.utf8(s);
                attrs.push(attr(pool, "Signature", i.to_be_bytes().to_vec()));
            }
            if f.synthetic {
                attrs.push(attr(pool, "Synthetic", Vec::new()));
            }
            if f.deprecated {
                attrs.push(attr(pool, "Deprecated", Vec::new()));
            }
            write_attrs(out, &attrs);
        }
        put16(out, self.methods.len() as u16);
        for m in &self.methods {
            put16(out, m.flags);
            put16(out, pool.utf8(&m.name));
            put16(out, pool.utf8(&m.descriptor));
            let mut attrs = Vec::new();
            if let Some((max_stack, max_locals, asm)) = &m.code {
                let code = assemble(pool, *max_stack, *max_locals, asm)
                    .unwrap_or_else(|e| panic!("{}.{}{}: {e}", self.name, m.name, m.descriptor));
                attrs.push(attr(pool, "Code", code));
            }
            if !m.throws.is_empty() {
                let mut b = Vec::new();
                put16(&mut b, m.throws.len() as u16);
                for t in &m.throws {
                    put16(&mut b, pool.class(t));
                }
                attrs.push(attr(pool, "Exceptions", b));
            }
            if let Some(s) = &m.signature {
                let i = pool.utf8(s);
                attrs.push(attr(pool, "Signature", i.to_be_bytes().to_vec()));
            }
            if m.deprecated {
                attrs.push(attr(pool, "Deprecated", Vec::new()));
            }
            for r in &m.raw {
                attrs.push(attr(pool, &r.name, r.bytes.clone()));
            }
            write_attrs(out, &attrs);
        }
        let mut attrs = Vec::new();
        if let Some(s) = &self.source_file {
            let i = pool.utf8(s);
            attrs.push(attr(pool, "SourceFile", i.to_be_bytes().to_vec()));
        }
        if let Some(s) = &self.signature {
            let i = pool.utf8(s);
            attrs.push(attr(pool, "Signature", i.to_be_bytes().to_vec()));
        }
        if self.deprecated {
            attrs.push(attr(pool, "Deprecated", Vec::new()));
        }
        if !self.inner_classes.is_empty() {
            let mut b = Vec::new();
            put16(&mut b, self.inner_classes.len() as u16);
            for r in &self.inner_classes {
                put16(&mut b, pool.class(&r.inner));
                put16(&mut b, r.outer.as_deref().map_or(0, |o| pool.class(o)));
                put16(&mut b, r.name.as_deref().map_or(0, |n| pool.utf8(n)));
                put16(&mut b, r.flags);
            }
            attrs.push(attr(pool, "InnerClasses", b));
        }
        for r in &self.raw {
            attrs.push(attr(pool, &r.name, r.bytes.clone()));
        }
        write_attrs(out, &attrs);
    }
}

fn attr(pool: &mut Pool, name: &str, bytes: Vec<u8>) -> (u16, Vec<u8>) {
    (pool.utf8(name), bytes)
}

fn write_attrs(out: &mut Vec<u8>, attrs: &[(u16, Vec<u8>)]) {
    put16(out, attrs.len() as u16);
    for (name, bytes) in attrs {
        put16(out, *name);
        put32(out, bytes.len() as u32);
        out.extend_from_slice(bytes);
    }
}

// ------------------------------------------------------------------ code

enum Line<'a> {
    Label(&'a str),
    Source(u16),
    Catch(Option<&'a str>, &'a str, &'a str, &'a str),
    Var(u16, &'a str, &'a str, &'a str, &'a str),
    Frame(Vec<&'a str>),
    Insn(u8, Vec<&'a str>, &'a str),
}

fn parse_line(line: &str) -> Result<Option<Line<'_>>, String> {
    let line = line.split("//").next().unwrap_or("").trim();
    if line.is_empty() {
        return Ok(None);
    }
    if let Some(label) = line.strip_suffix(':') {
        return Ok(Some(Line::Label(label)));
    }
    let mut words = line.split_whitespace();
    let head = words.next().unwrap_or_default();
    let rest: Vec<&str> = words.collect();
    let arg = |i: usize| rest.get(i).copied().ok_or_else(|| format!("missing operand in `{line}`"));
    Ok(Some(match head {
        ".line" => Line::Source(arg(0)?.parse().map_err(|_| format!("bad line in `{line}`"))?),
        ".catch" => Line::Catch(Some(arg(0)?).filter(|t| *t != "any"), arg(1)?, arg(2)?, arg(3)?),
        ".var" => Line::Var(
            arg(0)?.parse().map_err(|_| format!("bad slot in `{line}`"))?,
            arg(1)?,
            arg(2)?,
            arg(3)?,
            arg(4)?,
        ),
        ".frame" => Line::Frame(rest),
        _ => {
            let op = opcode(head).ok_or_else(|| format!("unknown mnemonic `{head}`"))?;
            let operand = line[head.len()..].trim();
            Line::Insn(op, rest, operand)
        }
    }))
}

fn int(s: &str) -> Result<i64, String> {
    let (neg, digits) = match s.strip_prefix('-') {
        Some(d) => (true, d),
        None => (false, s),
    };
    let v = match digits.strip_prefix("0x") {
        Some(h) => i64::from_str_radix(h, 16),
        None => digits.parse(),
    }
    .map_err(|_| format!("bad integer `{s}`"))?;
    Ok(if neg { -v } else { v })
}

fn unquote(s: &str) -> Result<String, String> {
    let inner = s
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .ok_or_else(|| format!("bad string literal {s}"))?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('0') => out.push('\0'),
            Some('"') => out.push('"'),
            Some('\\') => out.push('\\'),
            Some('u') => {
                let hex: String = chars.by_ref().take(4).collect();
                let v = u32::from_str_radix(&hex, 16).map_err(|_| format!("bad escape in {s}"))?;
                out.push(char::from_u32(v).ok_or_else(|| format!("bad escape in {s}"))?);
            }
            Some('U') => {
                let hex: String = chars.by_ref().take(6).collect();
                let v = u32::from_str_radix(&hex, 16).map_err(|_| format!("bad escape in {s}"))?;
                out.push(char::from_u32(v).ok_or_else(|| format!("bad escape in {s}"))?);
            }
            _ => return Err(format!("bad escape in {s}")),
        }
    }
    Ok(out)
}

/// `ldc` operand: `42`, `1.5f`, `"text"`, `class Name`, `type (I)V`.
fn ldc_constant(operand: &str) -> Result<Const, String> {
    if operand.starts_with('"') {
        return Ok(Const::Str(unquote(operand)?));
    }
    if let Some(name) = operand.strip_prefix("class ") {
        return Ok(Const::Class(name.trim().into()));
    }
    if let Some(d) = operand.strip_prefix("type ") {
        return Ok(Const::MethodType(d.trim().into()));
    }
    if let Some(bits) = operand.strip_prefix("fbits ") {
        return Ok(Const::Float(int(bits.trim())? as u32));
    }
    if let Some(f) = operand.strip_suffix('f') {
        let v: f32 = f.parse().map_err(|_| format!("bad float `{operand}`"))?;
        return Ok(Const::Float(v.to_bits()));
    }
    Ok(Const::Int(int(operand)? as i32))
}

fn ldc2_constant(operand: &str) -> Result<Const, String> {
    if let Some(l) = operand.strip_suffix('L') {
        return Ok(Const::Long(int(l)?));
    }
    if let Some(bits) = operand.strip_prefix("dbits ") {
        return Ok(Const::Double(u64::from_str_radix(bits.trim().trim_start_matches("0x"), 16).map_err(|e| e.to_string())?));
    }
    let d = operand.strip_suffix('d').unwrap_or(operand);
    let v: f64 = d.parse().map_err(|_| format!("bad double `{operand}`"))?;
    Ok(Const::Double(v.to_bits()))
}

/// `owner.name:descriptor` or `owner.name(args)ret`.
fn member(operand: &str) -> Result<(String, String, String), String> {
    let split = operand.find(['(', ':']).ok_or_else(|| format!("bad member `{operand}`"))?;
    let (path, desc) = operand.split_at(split);
    let desc = desc.strip_prefix(':').unwrap_or(desc);
    let dot = path.rfind('.').ok_or_else(|| format!("bad member `{operand}`"))?;
    Ok((path[..dot].into(), path[dot + 1..].into(), desc.into()))
}

fn arg_slots(descriptor: &str) -> u8 {
    let args = &descriptor[1..descriptor.find(')').unwrap_or(1)];
    let mut slots = 1u8;
    let mut chars = args.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            'J' | 'D' => slots += 2,
            'L' => {
                for c in chars.by_ref() {
                    if c == ';' {
                        break;
                    }
                }
                slots += 1;
            }
            '[' => {
                while chars.peek() == Some(&'[') {
                    chars.next();
                }
                if chars.next() == Some('L') {
                    for c in chars.by_ref() {
                        if c == ';' {
                            break;
                        }
                    }
                }
                slots += 1;
            }
            _ => slots += 1,
        }
    }
    slots
}

const NEWARRAY_TYPES: [&str; 8] = ["boolean", "char", "float", "double", "byte", "short", "int", "long"];

/// Encoded instruction size at `pc`.
fn size(op: u8, args: &[&str], operand: &str, pc: usize, pool: &mut Pool) -> Result<usize, String> {
    let local_wide = |s: &str| -> Result<bool, String> { Ok(int(s)? > 255) };
    Ok(match shape(op) {
        Shape::None => 1,
        Shape::Byte | Shape::NewArray => 2,
        Shape::Short | Shape::Branch | Shape::FieldRef | Shape::MethodRef | Shape::Type | Shape::Ldc2 => 3,
        Shape::Local => {
            if local_wide(args.first().ok_or("missing local")?)? {
                4
            } else {
                2
            }
        }
        Shape::Iinc => {
            let local = int(args.first().ok_or("missing local")?)?;
            let delta = int(args.get(1).ok_or("missing delta")?)?;
            if local > 255 || !(-128..=127).contains(&delta) {
                6
            } else {
                3
            }
        }
        Shape::Ldc => {
            let i = pool.add(ldc_constant(operand)?);
            if op == 19 || i > 255 {
                3
            } else {
                2
            }
        }
        Shape::InterfaceRef => 5,
        Shape::MultiArray => 4,
        Shape::TableSwitch => {
            let pad = (4 - (pc + 1) % 4) % 4;
            1 + pad + 12 + 4 * (args.len() - 2)
        }
        Shape::LookupSwitch => {
            let pad = (4 - (pc + 1) % 4) % 4;
            1 + pad + 8 + 8 * (args.len() - 1)
        }
    })
}

fn assemble(pool: &mut Pool, max_stack: u16, max_locals: u16, asm: &str) -> Result<Vec<u8>, String> {
    let lines: Vec<Line<'_>> = asm
        .lines()
        .map(parse_line)
        .filter_map(Result::transpose)
        .collect::<Result<_, _>>()?;

    // Pass 1: offsets.
    let mut labels = HashMap::new();
    let mut pc = 0usize;
    for line in &lines {
        match line {
            Line::Label(l) => {
                labels.insert(*l, pc);
            }
            Line::Insn(op, args, operand) => pc += size(*op, args, operand, pc, pool)?,
            _ => {}
        }
    }
    let end = pc;
    let target = |l: &str| labels.get(l).copied().ok_or_else(|| format!("undefined label `{l}`"));

    // Pass 2: bytes and tables.
    let mut code = Vec::new();
    let mut handlers = Vec::new();
    let mut line_numbers = Vec::new();
    let mut vars = Vec::new();
    let mut frames: Vec<(usize, &[&str])> = Vec::new();
    let mut pending_line = None;
    let mut pending_frame: Option<&[&str]> = None;
    for line in &lines {
        match line {
            Line::Label(_) => {}
            Line::Source(n) => pending_line = Some(*n),
            Line::Catch(ty, from, to, handler) => {
                let ty = ty.map_or(0, |t| pool.class(t));
                handlers.push((target(from)?, target(to)?, target(handler)?, ty));
            }
            Line::Var(slot, name, desc, from, to) => {
                let (n, d) = (pool.utf8(name), pool.utf8(desc));
                let (s, e) = (target(from)?, target(to)?);
                vars.push((s, e - s, n, d, *slot));
            }
            Line::Frame(words) => pending_frame = Some(words),
            Line::Insn(op, args, operand) => {
                let pc = code.len();
                if let Some(n) = pending_line.take() {
                    line_numbers.push((pc, n));
                }
                if let Some(f) = pending_frame.take() {
                    frames.push((pc, f));
                }
                encode(*op, args, operand, pc, pool, &target, &mut code)?;
            }
        }
    }
    debug_assert_eq!(code.len(), end);

    let mut out = Vec::new();
    put16(&mut out, max_stack);
    put16(&mut out, max_locals);
    put32(&mut out, code.len() as u32);
    out.extend_from_slice(&code);
    put16(&mut out, handlers.len() as u16);
    for (s, e, h, t) in handlers {
        put16(&mut out, s as u16);
        put16(&mut out, e as u16);
        put16(&mut out, h as u16);
        put16(&mut out, t);
    }
    let mut attrs = Vec::new();
    if !line_numbers.is_empty() {
        let mut b = Vec::new();
        put16(&mut b, line_numbers.len() as u16);
        for (pc, n) in line_numbers {
            put16(&mut b, pc as u16);
            put16(&mut b, n);
        }
        attrs.push(attr(pool, "LineNumberTable", b));
    }
    if !vars.is_empty() {
        let mut b = Vec::new();
        put16(&mut b, vars.len() as u16);
        for (s, len, n, d, slot) in vars {
            put16(&mut b, s as u16);
            put16(&mut b, len as u16);
            put16(&mut b, n);
            put16(&mut b, d);
            put16(&mut b, slot);
        }
        attrs.push(attr(pool, "LocalVariableTable", b));
    }
    if !frames.is_empty() {
        let mut b = Vec::new();
        put16(&mut b, frames.len() as u16);
        let mut last: Option<usize> = None;
        for (pc, words) in frames {
            let delta = match last {
                None => pc,
                Some(prev) => pc - prev - 1,
            };
            last = Some(pc);
            frame(&mut b, delta, words, pool, &target)?;
        }
        attrs.push(attr(pool, "StackMapTable", b));
    }
    write_attrs(&mut out, &attrs);
    Ok(out)
}

fn vtype(out: &mut Vec<u8>, word: &str, pool: &mut Pool, target: &dyn Fn(&str) -> Result<usize, String>) -> Result<(), String> {
    match word {
        "T" => out.push(0),
        "I" => out.push(1),
        "F" => out.push(2),
        "D" => out.push(3),
        "J" => out.push(4),
        "N" => out.push(5),
        "U" => out.push(6),
        _ => match word.strip_prefix("new:") {
            Some(label) => {
                out.push(8);
                put16(out, target(label)? as u16);
            }
            None => {
                out.push(7);
                put16(out, pool.class(word));
            }
        },
    }
    Ok(())
}

fn frame(
    out: &mut Vec<u8>,
    delta: usize,
    words: &[&str],
    pool: &mut Pool,
    target: &dyn Fn(&str) -> Result<usize, String>,
) -> Result<(), String> {
    let kind = words.first().copied().unwrap_or("same");
    let rest = words.get(1..).unwrap_or_default();
    match kind {
        "same" if delta < 64 => out.push(delta as u8),
        "same" => {
            out.push(251);
            put16(out, delta as u16);
        }
        "same1" if delta < 64 => {
            out.push(64 + delta as u8);
            vtype(out, rest.first().ok_or("same1 needs a type")?, pool, target)?;
        }
        "same1" => {
            out.push(247);
            put16(out, delta as u16);
            vtype(out, rest.first().ok_or("same1 needs a type")?, pool, target)?;
        }
        "chop" => {
            let k = int(rest.first().ok_or("chop needs a count")?)? as u8;
            out.push(251 - k);
            put16(out, delta as u16);
        }
        "append" => {
            out.push(251 + rest.len() as u8);
            put16(out, delta as u16);
            for w in rest {
                vtype(out, w, pool, target)?;
            }
        }
        "full" => {
            let split = rest.iter().position(|w| *w == "/").unwrap_or(rest.len());
            let (locals, stack) = (&rest[..split], rest.get(split + 1..).unwrap_or_default());
            out.push(255);
            put16(out, delta as u16);
            put16(out, locals.len() as u16);
            for w in locals {
                vtype(out, w, pool, target)?;
            }
            put16(out, stack.len() as u16);
            for w in stack {
                vtype(out, w, pool, target)?;
            }
        }
        other => return Err(format!("unknown frame kind `{other}`")),
    }
    Ok(())
}

fn encode(
    op: u8,
    args: &[&str],
    operand: &str,
    pc: usize,
    pool: &mut Pool,
    target: &dyn Fn(&str) -> Result<usize, String>,
    out: &mut Vec<u8>,
) -> Result<(), String> {
    let arg = |i: usize| args.get(i).copied().ok_or_else(|| format!("missing operand for opcode {op}"));
    let rel = |label: &str| -> Result<i32, String> { Ok(target(label)? as i32 - pc as i32) };
    match shape(op) {
        Shape::None => out.push(op),
        Shape::Byte => {
            out.push(op);
            out.push(int(arg(0)?)? as i8 as u8);
        }
        Shape::Short => {
            out.push(op);
            put16(out, int(arg(0)?)? as i16 as u16);
        }
        Shape::NewArray => {
            let name = arg(0)?;
            let t = NEWARRAY_TYPES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| format!("bad array type {name}"))?;
            out.push(op);
            out.push(t as u8 + 4);
        }
        Shape::Local => {
            let local = int(arg(0)?)? as u16;
            if local > 255 {
                out.push(196);
                out.push(op);
                put16(out, local);
            } else {
                out.push(op);
                out.push(local as u8);
            }
        }
        Shape::Iinc => {
            let local = int(arg(0)?)?;
            let delta = int(arg(1)?)?;
            if local > 255 || !(-128..=127).contains(&delta) {
                out.push(196);
                out.push(op);
                put16(out, local as u16);
                put16(out, delta as i16 as u16);
            } else {
                out.push(op);
                out.push(local as u8);
                out.push(delta as i8 as u8);
            }
        }
        Shape::Ldc => {
            let i = pool.add(ldc_constant(operand)?);
            if op == 19 || i > 255 {
                out.push(19);
                put16(out, i);
            } else {
                out.push(18);
                out.push(i as u8);
            }
        }
        Shape::Ldc2 => {
            out.push(op);
            put16(out, pool.add(ldc2_constant(operand)?));
        }
        Shape::FieldRef => {
            let (o, n, d) = member(arg(0)?)?;
            out.push(op);
            put16(out, pool.add(Const::Field(o, n, d)));
        }
        Shape::MethodRef => {
            let (o, n, d) = member(arg(0)?)?;
            out.push(op);
            put16(out, pool.add(Const::Method(o, n, d)));
        }
        Shape::InterfaceRef => {
            let (o, n, d) = member(arg(0)?)?;
            let count = arg_slots(&d);
            out.push(op);
            put16(out, pool.add(Const::InterfaceMethod(o, n, d)));
            out.push(count);
            out.push(0);
        }
        Shape::Type => {
            out.push(op);
            put16(out, pool.class(arg(0)?));
        }
        Shape::MultiArray => {
            out.push(op);
            put16(out, pool.class(arg(0)?));
            out.push(int(arg(1)?)? as u8);
        }
        Shape::Branch => {
            out.push(op);
            put16(out, rel(arg(0)?)? as i16 as u16);
        }
        Shape::TableSwitch => {
            // tableswitch <low> <default> <label>...
            out.push(op);
            while !out.len().is_multiple_of(4) {
                out.push(0);
            }
            let low = int(arg(0)?)? as i32;
            let labels = &args[2..];
            put32(out, rel(arg(1)?)? as u32);
            put32(out, low as u32);
            put32(out, (low + labels.len() as i32 - 1) as u32);
            for l in labels {
                put32(out, rel(l)? as u32);
            }
        }
        Shape::LookupSwitch => {
            // lookupswitch <default> <key>:<label>...
            out.push(op);
            while !out.len().is_multiple_of(4) {
                out.push(0);
            }
            put32(out, rel(arg(0)?)? as u32);
            put32(out, (args.len() - 1) as u32);
            for pair in &args[1..] {
                let (k, l) = pair.split_once(':').ok_or_else(|| format!("bad lookupswitch pair `{pair}`"))?;
                put32(out, int(k)? as i32 as u32);
                put32(out, rel(l)? as u32);
            }
        }
    }
    Ok(())
}

/// Hex dump helper for test diagnostics.
pub fn hex(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 3);
    for (i, b) in bytes.iter().enumerate() {
        if i > 0 {
            s.push(if i % 16 == 0 { '\n' } else { ' ' });
        }
        let _ = write!(s, "{b:02x}");
    }
    s
}
