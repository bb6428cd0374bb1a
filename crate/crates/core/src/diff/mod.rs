//! Syntax-driven differencing of class ASTs and application of the result.
//!
//! Each grammar node kind has one diff rule:
//!
//! * terminals are either unchanged or replaced whole;
//! * tuples (class, field, method, `Code`, exception handler, line number)
//!   are diffed attribute by attribute;
//! * sets (interfaces, fields, methods, constants, attributes) are matched
//!   by [`Key`]: members only on one side are added or removed, members on
//!   both sides with different content are patched recursively;
//! * sequences (instructions, exception tables, line tables, ...) get a
//!   shortest edit script.

mod apply;
mod derive;
mod myers;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::ast::{
    AttributeAst, ConstantValue, ExceptionHandler, FieldAst, InnerClass, Instruction, JavaType,
    Key, Keyed, LineNumber, LocalVariable, MethodAst, StackFrame,
};

pub use apply::apply_patch;
pub use derive::{diff_class, diff_seq, diff_set, diff_terminal};
pub use myers::{edit_script, Edit};

pub use apply::Trail;

/// Tuple child indexes, in grammar order.
pub mod index {
    pub const CLASS_TYPE: u8 = 0;
    pub const SUPERCLASS: u8 = 1;
    pub const INTERFACES: u8 = 2;
    pub const FIELDS: u8 = 3;
    pub const METHODS: u8 = 4;
    pub const CONSTANTS: u8 = 5;
    pub const CLASS_ATTRIBUTES: u8 = 6;
    pub const VERSION: u8 = 7;
    pub const CLASS_FLAGS: u8 = 8;

    pub const FIELD_NAME: u8 = 0;
    pub const FIELD_TYPE: u8 = 1;
    pub const FIELD_FLAGS: u8 = 2;
    pub const FIELD_ATTRIBUTES: u8 = 3;

    pub const METHOD_SIGNATURE: u8 = 0;
    pub const METHOD_FLAGS: u8 = 1;
    pub const METHOD_ATTRIBUTES: u8 = 2;

    pub const INSTRUCTIONS: u8 = 0;
    pub const MAX_STACK: u8 = 1;
    pub const MAX_LOCALS: u8 = 2;
    pub const EXCEPTION_TABLE: u8 = 3;
    pub const CODE_ATTRIBUTES: u8 = 4;

    pub const HANDLER_START: u8 = 0;
    pub const HANDLER_END: u8 = 1;
    pub const HANDLER_PC: u8 = 2;
    pub const HANDLER_CATCH: u8 = 3;

    pub const LINE_START: u8 = 0;
    pub const LINE_NUMBER: u8 = 1;
}

/// A tree-edit script over a [`ClassAst`](crate::ClassAst) (or any subtree).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PatchNode {
    Unchanged,
    /// The node is replaced by this value.
    Replace(Value),
    /// Changed children only, as `(child index, patch)` in ascending index order.
    Tuple(Vec<(u8, PatchNode)>),
    Set(SetPatch),
    Seq(Vec<SeqOp>),
}

impl PatchNode {
    pub fn is_unchanged(&self) -> bool {
        matches!(self, PatchNode::Unchanged)
    }
}

/// Keyed set difference. All three lists are sorted by key.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct SetPatch {
    pub removed: Vec<Key>,
    pub added: Vec<Value>,
    pub patched: Vec<(Key, PatchNode)>,
}

impl SetPatch {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty() && self.patched.is_empty()
    }

    /// `Unchanged` for an empty set patch.
    pub fn into_node(self) -> PatchNode {
        if self.is_empty() {
            PatchNode::Unchanged
        } else {
            PatchNode::Set(self)
        }
    }
}

/// One step of a sequence edit script, applied left to right against the old sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SeqOp {
    /// Keep the next `n` old items.
    Copy(u32),
    /// Drop the next `n` old items.
    Delete(u32),
    /// Emit new items.
    Insert(Vec<Value>),
    /// Replace the next old item by its patched version.
    PatchItem(Box<PatchNode>),
}

/// Any value a patch can carry: replaced terminals, inserted sequence
/// items and added set members.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Name(String),
    OptName(Option<String>),
    U16(u16),
    U32(u32),
    Type(JavaType),
    Constant(ConstantValue),
    Field(FieldAst),
    Method(MethodAst),
    Attribute(AttributeAst),
    Instruction(Instruction),
    Handler(ExceptionHandler),
    LineNumber(LineNumber),
    LocalVariable(LocalVariable),
    Frame(StackFrame),
    InnerClass(InnerClass),
}

impl Value {
    pub fn kind(&self) -> &'static str {
        match self {
            Value::Name(_) => "name",
            Value::OptName(_) => "optional name",
            Value::U16(_) => "u16",
            Value::U32(_) => "u32",
            Value::Type(_) => "type",
            Value::Constant(_) => "constant",
            Value::Field(_) => "field",
            Value::Method(_) => "method",
            Value::Attribute(_) => "attribute",
            Value::Instruction(_) => "instruction",
            Value::Handler(_) => "exception handler",
            Value::LineNumber(_) => "line number",
            Value::LocalVariable(_) => "local variable",
            Value::Frame(_) => "stack map frame",
            Value::InnerClass(_) => "inner class",
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Name(n) => f.write_str(n),
            Value::OptName(Some(n)) => f.write_str(n),
            Value::OptName(None) => f.write_str("none"),
            Value::U16(v) => write!(f, "{v:#06x}"),
            Value::U32(v) => write!(f, "{v}"),
            Value::Type(t) => write!(f, "{t}"),
            Value::Constant(c) => write!(f, "{c}"),
            Value::Field(x) => write!(f, "name={} type={} flags={:#06x}", x.name, x.ty, x.flags),
            Value::Method(m) => write!(f, "{}", m.signature),
            Value::Attribute(a) => f.write_str(&a.name),
            Value::Instruction(i) => write!(f, "{i}"),
            Value::Handler(h) => {
                write!(f, "try [{}, {}) -> {} catch ", h.start, h.end, h.handler)?;
                f.write_str(h.catch_type.as_deref().unwrap_or("any"))
            }
            Value::LineNumber(l) => write!(f, "line {} @{}", l.line, l.start),
            Value::LocalVariable(v) => write!(
                f,
                "local {} {}:{} [{}, {})",
                v.slot, v.name, v.descriptor, v.start, v.end
            ),
            Value::Frame(fr) => write!(f, "frame @{} {:?}", fr.target, fr.kind),
            Value::InnerClass(c) => {
                write!(f, "inner {}", c.inner)?;
                if let Some(o) = &c.outer {
                    write!(f, " in {o}")?;
                }
                if let Some(n) = &c.name {
                    write!(f, " as {n}")?;
                }
                write!(f, " flags={:#06x}", c.flags)
            }
        }
    }
}

/// A value that can travel inside a patch.
pub trait Term: Clone + PartialEq {
    fn wrap(&self) -> Value;
    fn unwrap(value: &Value) -> Option<Self>;
}

macro_rules! terms {
    ($($ty:ty => $variant:ident),* $(,)?) => {$(
        impl Term for $ty {
            fn wrap(&self) -> Value {
                Value::$variant(self.clone())
            }
            fn unwrap(value: &Value) -> Option<Self> {
                match value {
                    Value::$variant(v) => Some(v.clone()),
                    _ => None,
                }
            }
        }
    )*};
}

terms! {
    String => Name,
    Option<String> => OptName,
    u16 => U16,
    u32 => U32,
    JavaType => Type,
    ConstantValue => Constant,
    FieldAst => Field,
    MethodAst => Method,
    AttributeAst => Attribute,
    Instruction => Instruction,
    ExceptionHandler => Handler,
    LineNumber => LineNumber,
    LocalVariable => LocalVariable,
    StackFrame => Frame,
    InnerClass => InnerClass,
}

/// Element of a diffed sequence. Tuple-shaped elements may be patched in
/// place instead of being deleted and re-inserted.
pub trait SeqItem: Term + Eq {
    /// Patch turning `self` into `new`, if this element kind supports in-place patches.
    fn diff_item(&self, _new: &Self) -> Option<PatchNode> {
        None
    }

    fn apply_item(&self, _patch: &PatchNode, trail: &Trail<'_>) -> Result<Self, PatchError> {
        Err(trail.mismatch("in-place patch of an untupled sequence item"))
    }
}

/// Member of a keyed set.
pub trait SetItem: Term + Keyed {
    /// Patch between two members with equal keys.
    fn diff_member(&self, new: &Self) -> PatchNode;

    fn apply_member(&self, patch: &PatchNode, trail: &Trail<'_>) -> Result<Self, PatchError>;
}

/// The patch does not fit the tree it is applied to.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("patch mismatch at {path}: {reason}")]
pub struct PatchError {
    /// Slash-separated location, e.g. `methods/int getX()`.
    pub path: String,
    pub reason: String,
}
