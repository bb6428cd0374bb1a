//! AST-level differencing and patching of compiled JVM classes.
//!
//! A class file is lifted into a [`ClassAst`]: constant-pool indexes are
//! resolved into values, branch offsets become instruction indices and the
//! definition order of members is irrelevant to equality. Two such trees are
//! diffed into a [`PatchNode`] (a tree-edit script) that can be applied to the
//! old tree, serialized into a compact binary patch file, or rendered as text.
//!
//! The pipeline is:
//!
//! ```text
//! bytes --parse_class--> ClassAst --diff_class--> PatchNode --encode_patch--> bytes
//!                          |                          |
//!                          +-------apply_patch--------+--> ClassAst --emit_class--> bytes
//! ```
//!
//! This crate is `no_std` and only needs `alloc`. File and archive handling
//! live in the `aspa` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod ast;
pub mod codec;
pub mod diff;
pub mod patch;

pub use ast::{
    canonical_equal, key_of, validate, AttributeAst, AttributeContent, ClassAst, CodeAst,
    ConstantValue, ExceptionHandler, FieldAst, FrameKind, InnerClass, Instruction, JavaType, Key,
    LineNumber, LocalVariable, MemberKind, MemberRef, MethodAst, Opcode, Operand, SetMember,
    Signature, StackFrame, VerificationType, Violation, ViolationKind,
};
pub use codec::{
    build_pool, decode_code, emit_class, encode_code, parse_class, CodecError, ConstantPool,
    PoolLayout,
};
pub use diff::{
    apply_patch, diff_class, diff_seq, diff_set, diff_terminal, PatchError, PatchNode, SeqOp,
    SetPatch, Value,
};
pub use patch::{
    decode_patch, dump_archive_patch, dump_patch, dump_patch_with_base, encode_patch, ArchivePatch,
    Compression, EntryChange, FormatError, PatchBody,
};
