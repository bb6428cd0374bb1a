//! The class AST: a self-contained, pool-index-free view of one class file.
//!
//! Set-valued attributes (interfaces, fields, methods, constants,
//! attributes) are stored as vectors in parse order, but that order carries
//! no meaning: [`canonical_equal`] compares them as sets keyed by
//! [`key_of`]. Sequences (instructions, exception tables, line tables)
//! are compared in order.
//!
//! The derived `PartialEq` impls are structural and order-sensitive; use
//! [`canonical_equal`] or [`ClassAst::canonical`] for AST equality.

mod opcode;
mod types;
mod validate;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use opcode::{Opcode, OperandShape};
pub(crate) use opcode::{GOTO_W, JSR_W, LDC_W, WIDE};
pub use types::{JavaType, Signature};
pub use validate::{validate, Violation, ViolationKind};

pub const ACC_NATIVE: u16 = 0x0100;
pub const ACC_ABSTRACT: u16 = 0x0400;

/// Root of the AST: one class or interface.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassAst {
    /// Binary name, e.g. `toy/Foo`.
    pub class_type: String,
    /// `None` only for `java/lang/Object`.
    pub superclass: Option<String>,
    pub interfaces: Vec<String>,
    pub fields: Vec<FieldAst>,
    pub methods: Vec<MethodAst>,
    /// Constants of the source pool, by value.
    pub constants: Vec<ConstantValue>,
    pub attributes: Vec<AttributeAst>,
    /// `major << 16 | minor`.
    pub version: u32,
    pub flags: u16,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FieldAst {
    pub name: String,
    pub ty: JavaType,
    pub flags: u16,
    pub attributes: Vec<AttributeAst>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodAst {
    pub signature: Signature,
    pub flags: u16,
    pub attributes: Vec<AttributeAst>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttributeAst {
    pub name: String,
    pub content: AttributeContent,
}

/// Attribute payloads. Structured variants hold no pool indexes and no byte
/// offsets; anything else is carried as [`AttributeContent::Opaque`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AttributeContent {
    Code(CodeAst),
    Exceptions(Vec<String>),
    ConstantValue(ConstantValue),
    SourceFile(String),
    Signature(String),
    InnerClasses(Vec<InnerClass>),
    LineNumberTable(Vec<LineNumber>),
    LocalVariableTable(Vec<LocalVariable>),
    LocalVariableTypeTable(Vec<LocalVariable>),
    StackMapTable(Vec<StackFrame>),
    Deprecated,
    Synthetic,
    Opaque(Vec<u8>),
}

impl AttributeContent {
    /// The attribute name a structured variant is stored under.
    pub fn standard_name(&self) -> Option<&'static str> {
        Some(match self {
            AttributeContent::Code(_) => "Code",
            AttributeContent::Exceptions(_) => "Exceptions",
            AttributeContent::ConstantValue(_) => "ConstantValue",
            AttributeContent::SourceFile(_) => "SourceFile",
            AttributeContent::Signature(_) => "Signature",
            AttributeContent::InnerClasses(_) => "InnerClasses",
            AttributeContent::LineNumberTable(_) => "LineNumberTable",
            AttributeContent::LocalVariableTable(_) => "LocalVariableTable",
            AttributeContent::LocalVariableTypeTable(_) => "LocalVariableTypeTable",
            AttributeContent::StackMapTable(_) => "StackMapTable",
            AttributeContent::Deprecated => "Deprecated",
            AttributeContent::Synthetic => "Synthetic",
            AttributeContent::Opaque(_) => return None,
        })
    }
}

impl AttributeAst {
    /// Builds a structured attribute under its standard name.
    ///
    /// # Panics
    /// If `content` is [`AttributeContent::Opaque`]; use [`AttributeAst::opaque`].
    pub fn new(content: AttributeContent) -> Self {
        let name = content
            .standard_name()
            .expect("opaque attributes need an explicit name");
        AttributeAst {
            name: name.into(),
            content,
        }
    }

    pub fn opaque(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        AttributeAst {
            name: name.into(),
            content: AttributeContent::Opaque(bytes),
        }
    }

    pub fn as_code(&self) -> Option<&CodeAst> {
        match &self.content {
            AttributeContent::Code(code) => Some(code),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodeAst {
    pub instructions: Vec<Instruction>,
    pub max_stack: u16,
    pub max_locals: u16,
    pub exception_table: Vec<ExceptionHandler>,
    pub attributes: Vec<AttributeAst>,
}

/// Exception-table row. All positions are instruction indices; `end` is
/// exclusive and may equal the instruction count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExceptionHandler {
    pub start: u32,
    pub end: u32,
    pub handler: u32,
    /// `None` catches everything (`finally`).
    pub catch_type: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LineNumber {
    pub start: u32,
    pub line: u16,
}

/// Row of a local variable (or local variable type) table. `end` is exclusive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalVariable {
    pub start: u32,
    pub end: u32,
    pub name: String,
    /// Field descriptor, or generic signature in a type table.
    pub descriptor: String,
    pub slot: u16,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InnerClass {
    pub inner: String,
    pub outer: Option<String>,
    pub name: Option<String>,
    pub flags: u16,
}

/// Stack map frame anchored at an instruction index. The compact
/// `same_frame`/`same_frame_extended` distinction is an encoding detail and
/// is chosen by the encoder.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StackFrame {
    pub target: u32,
    pub kind: FrameKind,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FrameKind {
    Same,
    SameLocals1(VerificationType),
    /// Drops 1 to 3 locals.
    Chop(u8),
    /// Adds 1 to 3 locals.
    Append(Vec<VerificationType>),
    Full {
        locals: Vec<VerificationType>,
        stack: Vec<VerificationType>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VerificationType {
    Top,
    Integer,
    Float,
    Double,
    Long,
    Null,
    UninitializedThis,
    Object(String),
    /// Instruction index of the `new` that created the value.
    Uninitialized(u32),
}

/// One bytecode instruction with symbolically resolved operand.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instruction {
    pub opcode: Opcode,
    pub operand: Operand,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Operand {
    None,
    /// `bipush`, `sipush`, `newarray`.
    Int(i32),
    Local(u16),
    Iinc {
        local: u16,
        delta: i16,
    },
    /// `ldc`, `ldc2_w`, `invokedynamic`.
    Constant(ConstantValue),
    Member(MemberRef),
    /// Class name, or array descriptor for array classes.
    Type(String),
    MultiArray {
        class: String,
        dimensions: u8,
    },
    /// Target instruction index.
    Branch(u32),
    TableSwitch {
        default: u32,
        low: i32,
        targets: Vec<u32>,
    },
    LookupSwitch {
        default: u32,
        pairs: Vec<(i32, u32)>,
    },
}

impl Instruction {
    pub fn new(opcode: Opcode, operand: Operand) -> Self {
        Instruction { opcode, operand }
    }

    pub fn simple(opcode: Opcode) -> Self {
        Instruction {
            opcode,
            operand: Operand::None,
        }
    }

    /// True if the operand variant is the one the opcode requires.
    pub fn is_well_formed(&self) -> bool {
        use ConstantValue as C;
        match (self.opcode.shape(), &self.operand) {
            (OperandShape::None, Operand::None) => true,
            (OperandShape::Byte, Operand::Int(v)) => i8::try_from(*v).is_ok(),
            (OperandShape::Short, Operand::Int(v)) => i16::try_from(*v).is_ok(),
            (OperandShape::ArrayType, Operand::Int(v)) => (4..=11).contains(v),
            (OperandShape::Local, Operand::Local(_)) => true,
            (OperandShape::Iinc, Operand::Iinc { .. }) => true,
            (OperandShape::Ldc, Operand::Constant(c)) => matches!(
                c,
                C::Integer(_) | C::Float(_) | C::String(_) | C::Class(_) | C::MethodHandle { .. } | C::MethodType(_)
            ),
            (OperandShape::Ldc2, Operand::Constant(c)) => matches!(c, C::Long(_) | C::Double(_)),
            (OperandShape::Field, Operand::Member(m)) => m.kind == MemberKind::Field,
            (OperandShape::Method, Operand::Member(m)) => m.kind != MemberKind::Field,
            (OperandShape::InterfaceMethod, Operand::Member(m)) => {
                m.kind == MemberKind::InterfaceMethod
            }
            (OperandShape::Dynamic, Operand::Constant(C::InvokeDynamic { .. })) => true,
            (OperandShape::Type, Operand::Type(_)) => true,
            (OperandShape::MultiANewArray, Operand::MultiArray { dimensions, .. }) => {
                *dimensions >= 1
            }
            (OperandShape::Branch, Operand::Branch(_)) => true,
            (OperandShape::TableSwitch, Operand::TableSwitch { low, targets, .. }) => {
                !targets.is_empty()
                    && i64::from(*low) + targets.len() as i64 - 1 <= i64::from(i32::MAX)
            }
            (OperandShape::LookupSwitch, Operand::LookupSwitch { pairs, .. }) => {
                pairs.windows(2).all(|w| w[0].0 < w[1].0)
            }
            _ => false,
        }
    }

    /// Instruction indices this instruction may transfer control to.
    pub fn targets(&self) -> Vec<u32> {
        match &self.operand {
            Operand::Branch(t) => alloc::vec![*t],
            Operand::TableSwitch {
                default, targets, ..
            } => core::iter::once(*default).chain(targets.iter().copied()).collect(),
            Operand::LookupSwitch { default, pairs } => core::iter::once(*default)
                .chain(pairs.iter().map(|p| p.1))
                .collect(),
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.opcode.mnemonic())?;
        match &self.operand {
            Operand::None => Ok(()),
            Operand::Int(v) => write!(f, " {v}"),
            Operand::Local(v) => write!(f, " {v}"),
            Operand::Iinc { local, delta } => write!(f, " {local} {delta}"),
            Operand::Constant(c) => write!(f, " {c}"),
            Operand::Member(m) => write!(f, " {m}"),
            Operand::Type(t) => write!(f, " {t}"),
            Operand::MultiArray { class, dimensions } => write!(f, " {class} {dimensions}"),
            Operand::Branch(t) => write!(f, " @{t}"),
            Operand::TableSwitch {
                default,
                low,
                targets,
            } => {
                write!(f, " {low}:")?;
                for t in targets {
                    write!(f, " @{t}")?;
                }
                write!(f, " default @{default}")
            }
            Operand::LookupSwitch { default, pairs } => {
                for (k, t) in pairs {
                    write!(f, " {k}=@{t}")?;
                }
                write!(f, " default @{default}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MemberKind {
    Field,
    Method,
    InterfaceMethod,
}

/// Symbolic field or method reference.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MemberRef {
    pub kind: MemberKind,
    pub owner: String,
    pub name: String,
    pub descriptor: String,
}

impl MemberRef {
    pub fn field(owner: &str, name: &str, descriptor: &str) -> Self {
        MemberRef {
            kind: MemberKind::Field,
            owner: owner.into(),
            name: name.into(),
            descriptor: descriptor.into(),
        }
    }

    pub fn method(owner: &str, name: &str, descriptor: &str) -> Self {
        MemberRef {
            kind: MemberKind::Method,
            owner: owner.into(),
            name: name.into(),
            descriptor: descriptor.into(),
        }
    }

    pub fn interface_method(owner: &str, name: &str, descriptor: &str) -> Self {
        MemberRef {
            kind: MemberKind::InterfaceMethod,
            ..MemberRef::method(owner, name, descriptor)
        }
    }
}

/// `toy/Foo.x:int` for fields, `java/lang/Object.<init>()` for methods.
impl fmt::Display for MemberRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.", self.owner)?;
        match self.kind {
            MemberKind::Field => match JavaType::parse_field_descriptor(&self.descriptor) {
                Some(ty) => write!(f, "{}:{ty}", self.name),
                None => write!(f, "{}:{}", self.name, self.descriptor),
            },
            _ => match Signature::from_descriptor(&self.name, &self.descriptor) {
                Some(sig) => sig.fmt_call(&self.name, f),
                None => write!(f, "{}{}", self.name, self.descriptor),
            },
        }
    }
}

/// A constant-pool entry by value. Nested references are stored as values,
/// never as indexes. Floating-point payloads are raw IEEE bit patterns so
/// that equality is bitwise and NaN payloads survive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstantValue {
    Utf8(String),
    Integer(i32),
    Float(u32),
    Long(i64),
    Double(u64),
    Class(String),
    String(String),
    Member(MemberRef),
    NameAndType {
        name: String,
        descriptor: String,
    },
    MethodHandle {
        kind: u8,
        reference: MemberRef,
    },
    MethodType(String),
    InvokeDynamic {
        bootstrap: u16,
        name: String,
        descriptor: String,
    },
}

impl ConstantValue {
    pub fn utf8(s: &str) -> Self {
        ConstantValue::Utf8(s.into())
    }

    pub fn float(v: f32) -> Self {
        ConstantValue::Float(v.to_bits())
    }

    pub fn double(v: f64) -> Self {
        ConstantValue::Double(v.to_bits())
    }

    /// Class-file tag number.
    pub fn tag(&self) -> u8 {
        match self {
            ConstantValue::Utf8(_) => 1,
            ConstantValue::Integer(_) => 3,
            ConstantValue::Float(_) => 4,
            ConstantValue::Long(_) => 5,
            ConstantValue::Double(_) => 6,
            ConstantValue::Class(_) => 7,
            ConstantValue::String(_) => 8,
            ConstantValue::Member(m) => match m.kind {
                MemberKind::Field => 9,
                MemberKind::Method => 10,
                MemberKind::InterfaceMethod => 11,
            },
            ConstantValue::NameAndType { .. } => 12,
            ConstantValue::MethodHandle { .. } => 15,
            ConstantValue::MethodType(_) => 16,
            ConstantValue::InvokeDynamic { .. } => 18,
        }
    }

    /// Long and double entries occupy two pool slots.
    pub fn is_wide(&self) -> bool {
        matches!(self, ConstantValue::Long(_) | ConstantValue::Double(_))
    }

    fn tag_name(&self) -> &'static str {
        match self {
            ConstantValue::Utf8(_) => "utf8",
            ConstantValue::Integer(_) => "i4",
            ConstantValue::Float(_) => "f4",
            ConstantValue::Long(_) => "i8",
            ConstantValue::Double(_) => "f8",
            ConstantValue::Class(_) => "class",
            ConstantValue::String(_) => "string",
            ConstantValue::Member(m) => match m.kind {
                MemberKind::Field => "fieldref",
                MemberKind::Method => "methodref",
                MemberKind::InterfaceMethod => "imethodref",
            },
            ConstantValue::NameAndType { .. } => "nameandtype",
            ConstantValue::MethodHandle { .. } => "methodhandle",
            ConstantValue::MethodType(_) => "methodtype",
            ConstantValue::InvokeDynamic { .. } => "indy",
        }
    }
}

/// Renders as in patch dumps: `utf8 "setX"`, `i4 42`, `fieldref toy/Foo.x:int`.
impl fmt::Display for ConstantValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.tag_name())?;
        match self {
            ConstantValue::Utf8(s) | ConstantValue::String(s) => write!(f, "{s:?}"),
            ConstantValue::Integer(v) => write!(f, "{v}"),
            ConstantValue::Float(bits) => write!(f, "{:?}", f32::from_bits(*bits)),
            ConstantValue::Long(v) => write!(f, "{v}"),
            ConstantValue::Double(bits) => write!(f, "{:?}", f64::from_bits(*bits)),
            ConstantValue::Class(s) | ConstantValue::MethodType(s) => f.write_str(s),
            ConstantValue::Member(m) => write!(f, "{m}"),
            ConstantValue::NameAndType { name, descriptor } => write!(f, "{name}:{descriptor}"),
            ConstantValue::MethodHandle { kind, reference } => write!(f, "{kind} {reference}"),
            ConstantValue::InvokeDynamic {
                bootstrap,
                name,
                descriptor,
            } => write!(f, "#{bootstrap} {name}:{descriptor}"),
        }
    }
}

/// Identity of a set member: two members are compared (diffed) only if
/// their keys are equal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Key {
    /// Field names, attribute names and interface names.
    Name(String),
    Signature(Signature),
    /// Constants are keyed by their whole value.
    Constant(ConstantValue),
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Key::Name(n) => f.write_str(n),
            Key::Signature(s) => write!(f, "{s}"),
            Key::Constant(c) => write!(f, "{c}"),
        }
    }
}

/// Borrowed view of any member of a set-valued attribute.
#[derive(Clone, Copy, Debug)]
pub enum SetMember<'a> {
    Field(&'a FieldAst),
    Method(&'a MethodAst),
    Attribute(&'a AttributeAst),
    Constant(&'a ConstantValue),
    Interface(&'a str),
}

/// Name for fields and attributes, signature for methods, the whole value
/// for constants, the name itself for interfaces.
pub fn key_of(node: SetMember<'_>) -> Key {
    match node {
        SetMember::Field(f) => f.key(),
        SetMember::Method(m) => m.key(),
        SetMember::Attribute(a) => a.key(),
        SetMember::Constant(c) => c.key(),
        SetMember::Interface(i) => Key::Name(i.into()),
    }
}

/// Members of set-valued attributes.
pub trait Keyed {
    fn key(&self) -> Key;
}

impl Keyed for FieldAst {
    fn key(&self) -> Key {
        Key::Name(self.name.clone())
    }
}

impl Keyed for MethodAst {
    fn key(&self) -> Key {
        Key::Signature(self.signature.clone())
    }
}

impl Keyed for AttributeAst {
    fn key(&self) -> Key {
        Key::Name(self.name.clone())
    }
}

impl Keyed for ConstantValue {
    fn key(&self) -> Key {
        Key::Constant(self.clone())
    }
}

impl Keyed for String {
    fn key(&self) -> Key {
        Key::Name(self.clone())
    }
}

fn sort_set<T: Keyed + Ord>(items: &mut [T]) {
    // Full-value tiebreak keeps the order total on (invalid) duplicate keys.
    items.sort_by(|a, b| a.key().cmp(&b.key()).then_with(|| a.cmp(b)));
}

fn canonical_attributes(attributes: &[AttributeAst]) -> Vec<AttributeAst> {
    let mut out: Vec<AttributeAst> = attributes
        .iter()
        .map(|a| match &a.content {
            AttributeContent::Code(code) => AttributeAst {
                name: a.name.clone(),
                content: AttributeContent::Code(CodeAst {
                    attributes: canonical_attributes(&code.attributes),
                    ..code.clone()
                }),
            },
            _ => a.clone(),
        })
        .collect();
    sort_set(&mut out);
    out
}

impl FieldAst {
    pub fn new(name: &str, ty: JavaType, flags: u16) -> Self {
        FieldAst {
            name: name.into(),
            ty,
            flags,
            attributes: Vec::new(),
        }
    }
}

impl MethodAst {
    pub fn code(&self) -> Option<&CodeAst> {
        self.attributes.iter().find_map(AttributeAst::as_code)
    }

    pub fn code_mut(&mut self) -> Option<&mut CodeAst> {
        self.attributes.iter_mut().find_map(|a| match &mut a.content {
            AttributeContent::Code(code) => Some(code),
            _ => None,
        })
    }
}

impl ClassAst {
    /// Copy with every set attribute sorted by key, recursively. Two ASTs
    /// are canonically equal iff their canonical forms are structurally equal.
    pub fn canonical(&self) -> ClassAst {
        let mut interfaces = self.interfaces.clone();
        sort_set(&mut interfaces);
        let mut fields: Vec<FieldAst> = self
            .fields
            .iter()
            .map(|f| FieldAst {
                attributes: canonical_attributes(&f.attributes),
                ..f.clone()
            })
            .collect();
        sort_set(&mut fields);
        let mut methods: Vec<MethodAst> = self
            .methods
            .iter()
            .map(|m| MethodAst {
                attributes: canonical_attributes(&m.attributes),
                ..m.clone()
            })
            .collect();
        sort_set(&mut methods);
        let mut constants = self.constants.clone();
        sort_set(&mut constants);
        ClassAst {
            class_type: self.class_type.clone(),
            superclass: self.superclass.clone(),
            interfaces,
            fields,
            methods,
            constants,
            attributes: canonical_attributes(&self.attributes),
            version: self.version,
            flags: self.flags,
        }
    }

    pub fn major_version(&self) -> u16 {
        (self.version >> 16) as u16
    }

    pub fn minor_version(&self) -> u16 {
        self.version as u16
    }

    pub fn field(&self, name: &str) -> Option<&FieldAst> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn method(&self, name: &str, descriptor: &str) -> Option<&MethodAst> {
        let sig = Signature::from_descriptor(name, descriptor)?;
        self.methods.iter().find(|m| m.signature == sig)
    }
}

/// AST equality: set semantics for set attributes, sequence semantics for
/// sequences, deep equality for terminals.
pub fn canonical_equal(a: &ClassAst, b: &ClassAst) -> bool {
    a.canonical() == b.canonical()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn class() -> ClassAst {
        ClassAst {
            class_type: "toy/Foo".into(),
            superclass: Some("java/lang/Object".into()),
            interfaces: vec!["a/I".into(), "a/J".into()],
            fields: vec![
                FieldAst::new("x", JavaType::Int, 2),
                FieldAst::new("y", JavaType::Int, 2),
            ],
            methods: vec![],
            constants: vec![ConstantValue::utf8("x"), ConstantValue::Integer(4)],
            attributes: vec![],
            version: 52 << 16,
            flags: 0x21,
        }
    }

    #[test]
    fn set_order_is_irrelevant() {
        let a = class();
        let mut b = class();
        b.interfaces.reverse();
        b.fields.reverse();
        b.constants.reverse();
        assert_ne!(a, b);
        assert!(canonical_equal(&a, &b));
        b.fields[0].flags = 1;
        assert!(!canonical_equal(&a, &b));
    }

    #[test]
    fn keys() {
        let m = MethodAst {
            signature: Signature::new("sqX", JavaType::Int, vec![]),
            flags: 1,
            attributes: vec![],
        };
        assert_eq!(
            key_of(SetMember::Method(&m)),
            Key::Signature(Signature::new("sqX", JavaType::Int, vec![]))
        );
        let f = FieldAst::new("x", JavaType::Int, 2);
        assert_eq!(key_of(SetMember::Field(&f)), Key::Name("x".into()));
        let c = ConstantValue::utf8("setX");
        assert_eq!(key_of(SetMember::Constant(&c)), Key::Constant(c.clone()));
        assert_eq!(c.to_string(), "utf8 \"setX\"");
        assert_eq!(key_of(SetMember::Interface("a/I")), Key::Name("a/I".into()));
    }

    #[test]
    fn nan_payloads_compare_bitwise() {
        let a = ConstantValue::Float(0x7fc0_0001);
        let b = ConstantValue::Float(0x7fc0_0002);
        assert_ne!(a, b);
        assert_eq!(a, a.clone());
    }

    #[test]
    fn member_ref_display() {
        let m = MemberRef::method("java/lang/Object", "<init>", "()V");
        assert_eq!(m.to_string(), "java/lang/Object.<init>()");
        let f = MemberRef::field("toy/Foo", "x", "I");
        assert_eq!(f.to_string(), "toy/Foo.x:int");
    }
}
