use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::apply::{self, Trail};
use super::index::*;
use super::myers::{edit_script, Edit};
use super::{PatchError, PatchNode, SeqItem, SeqOp, SetItem, SetPatch, Term, Value};
use crate::ast::{
    AttributeAst, AttributeContent, ClassAst, CodeAst, ConstantValue, ExceptionHandler, FieldAst,
    InnerClass, Instruction, Key, LineNumber, LocalVariable, MethodAst, StackFrame,
};

/// `Unchanged` if equal, otherwise `Replace(new)`.
pub fn diff_terminal(old: &Value, new: &Value) -> PatchNode {
    if old == new {
        PatchNode::Unchanged
    } else {
        PatchNode::Replace(new.clone())
    }
}

pub(crate) fn term<T: Term>(old: &T, new: &T) -> PatchNode {
    if old == new {
        PatchNode::Unchanged
    } else {
        PatchNode::Replace(new.wrap())
    }
}

/// Collects changed tuple children; all-unchanged collapses to `Unchanged`.
#[derive(Default)]
pub(crate) struct Tuple(Vec<(u8, PatchNode)>);

impl Tuple {
    pub(crate) fn child(mut self, index: u8, patch: PatchNode) -> Self {
        if !patch.is_unchanged() {
            self.0.push((index, patch));
        }
        self
    }

    pub(crate) fn finish(self) -> PatchNode {
        if self.0.is_empty() {
            PatchNode::Unchanged
        } else {
            PatchNode::Tuple(self.0)
        }
    }
}

/// Tree-edit script turning `old` into `new`.
pub fn diff_class(old: &ClassAst, new: &ClassAst) -> PatchNode {
    Tuple::default()
        .child(CLASS_TYPE, term(&old.class_type, &new.class_type))
        .child(SUPERCLASS, term(&old.superclass, &new.superclass))
        .child(INTERFACES, diff_set(&old.interfaces, &new.interfaces).into_node())
        .child(FIELDS, diff_set(&old.fields, &new.fields).into_node())
        .child(METHODS, diff_set(&old.methods, &new.methods).into_node())
        .child(CONSTANTS, diff_set(&old.constants, &new.constants).into_node())
        .child(CLASS_ATTRIBUTES, diff_set(&old.attributes, &new.attributes).into_node())
        .child(VERSION, term(&old.version, &new.version))
        .child(CLASS_FLAGS, term(&old.flags, &new.flags))
        .finish()
}

/// Keyed set difference. Members are matched by key only, so definition
/// order never shows up in the result.
pub fn diff_set<T: SetItem>(old: &[T], new: &[T]) -> SetPatch {
    let old_by_key: BTreeMap<Key, &T> = old.iter().map(|m| (m.key(), m)).collect();
    let new_by_key: BTreeMap<Key, &T> = new.iter().map(|m| (m.key(), m)).collect();
    let mut patch = SetPatch::default();
    for (key, o) in &old_by_key {
        match new_by_key.get(key) {
            None => patch.removed.push(key.clone()),
            Some(n) => {
                let child = o.diff_member(n);
                if !child.is_unchanged() {
                    patch.patched.push((key.clone(), child));
                }
            }
        }
    }
    for (key, n) in &new_by_key {
        if !old_by_key.contains_key(key) {
            patch.added.push(n.wrap());
        }
    }
    patch
}

/// Shortest edit script over a sequence. Each hunk between copied runs is
/// `Delete` then `Insert`; a one-for-one hunk over tuple-shaped items becomes
/// an in-place `PatchItem`.
pub fn diff_seq<T: SeqItem>(old: &[T], new: &[T]) -> PatchNode {
    let script = edit_script(old, new);
    let mut ops = Vec::with_capacity(script.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut k = 0;
    while k < script.len() {
        match script[k] {
            Edit::Equal(n) => {
                ops.push(SeqOp::Copy(n as u32));
                i += n;
                j += n;
            }
            Edit::Delete(d) => {
                let ins = match script.get(k + 1) {
                    Some(Edit::Insert(n)) => {
                        k += 1;
                        *n
                    }
                    _ => 0,
                };
                let fused = (d == 1 && ins == 1)
                    .then(|| old[i].diff_item(&new[j]))
                    .flatten();
                match fused {
                    Some(patch) => ops.push(SeqOp::PatchItem(Box::new(patch))),
                    None => {
                        ops.push(SeqOp::Delete(d as u32));
                        if ins > 0 {
                            ops.push(SeqOp::Insert(new[j..j + ins].iter().map(Term::wrap).collect()));
                        }
                    }
                }
                i += d;
                j += ins;
            }
            Edit::Insert(n) => {
                ops.push(SeqOp::Insert(new[j..j + n].iter().map(Term::wrap).collect()));
                j += n;
            }
        }
        k += 1;
    }
    if ops.iter().all(|op| matches!(op, SeqOp::Copy(_))) {
        PatchNode::Unchanged
    } else {
        PatchNode::Seq(ops)
    }
}

pub(crate) fn diff_code(old: &CodeAst, new: &CodeAst) -> PatchNode {
    Tuple::default()
        .child(INSTRUCTIONS, diff_seq(&old.instructions, &new.instructions))
        .child(MAX_STACK, term(&old.max_stack, &new.max_stack))
        .child(MAX_LOCALS, term(&old.max_locals, &new.max_locals))
        .child(EXCEPTION_TABLE, diff_seq(&old.exception_table, &new.exception_table))
        .child(CODE_ATTRIBUTES, diff_set(&old.attributes, &new.attributes).into_node())
        .finish()
}

/// Attribute patches are content patches; a change of content kind replaces the attribute.
fn diff_attribute(old: &AttributeAst, new: &AttributeAst) -> PatchNode {
    use AttributeContent as A;
    match (&old.content, &new.content) {
        (A::Code(a), A::Code(b)) => diff_code(a, b),
        (A::Exceptions(a), A::Exceptions(b)) => diff_seq(a, b),
        (A::InnerClasses(a), A::InnerClasses(b)) => diff_seq(a, b),
        (A::LineNumberTable(a), A::LineNumberTable(b)) => diff_seq(a, b),
        (A::LocalVariableTable(a), A::LocalVariableTable(b))
        | (A::LocalVariableTypeTable(a), A::LocalVariableTypeTable(b)) => diff_seq(a, b),
        (A::StackMapTable(a), A::StackMapTable(b)) => diff_seq(a, b),
        _ => term(old, new),
    }
}

impl SetItem for FieldAst {
    fn diff_member(&self, new: &Self) -> PatchNode {
        Tuple::default()
            .child(FIELD_TYPE, term(&self.ty, &new.ty))
            .child(FIELD_FLAGS, term(&self.flags, &new.flags))
            .child(FIELD_ATTRIBUTES, diff_set(&self.attributes, &new.attributes).into_node())
            .finish()
    }

    fn apply_member(&self, patch: &PatchNode, trail: &Trail<'_>) -> Result<Self, PatchError> {
        apply::field(self, patch, trail)
    }
}

impl SetItem for MethodAst {
    fn diff_member(&self, new: &Self) -> PatchNode {
        Tuple::default()
            .child(METHOD_FLAGS, term(&self.flags, &new.flags))
            .child(METHOD_ATTRIBUTES, diff_set(&self.attributes, &new.attributes).into_node())
            .finish()
    }

    fn apply_member(&self, patch: &PatchNode, trail: &Trail<'_>) -> Result<Self, PatchError> {
        apply::method(self, patch, trail)
    }
}

impl SetItem for AttributeAst {
    fn diff_member(&self, new: &Self) -> PatchNode {
        diff_attribute(self, new)
    }

    fn apply_member(&self, patch: &PatchNode, trail: &Trail<'_>) -> Result<Self, PatchError> {
        apply::attribute(self, patch, trail)
    }
}

/// Constants and interface names are their own keys: equal keys mean equal members.
macro_rules! atomic_set_item {
    ($($ty:ty),*) => {$(
        impl SetItem for $ty {
            fn diff_member(&self, new: &Self) -> PatchNode {
                term(self, new)
            }

            fn apply_member(&self, patch: &PatchNode, trail: &Trail<'_>) -> Result<Self, PatchError> {
                match patch {
                    PatchNode::Unchanged => Ok(self.clone()),
                    _ => Err(trail.mismatch("atomic set members cannot be patched")),
                }
            }
        }
    )*};
}

atomic_set_item!(ConstantValue, alloc::string::String);

impl SeqItem for Instruction {}
impl SeqItem for alloc::string::String {}
impl SeqItem for LocalVariable {}
impl SeqItem for StackFrame {}
impl SeqItem for InnerClass {}

impl SeqItem for ExceptionHandler {
    fn diff_item(&self, new: &Self) -> Option<PatchNode> {
        Some(
            Tuple::default()
                .child(HANDLER_START, term(&self.start, &new.start))
                .child(HANDLER_END, term(&self.end, &new.end))
                .child(HANDLER_PC, term(&self.handler, &new.handler))
                .child(HANDLER_CATCH, term(&self.catch_type, &new.catch_type))
                .finish(),
        )
    }

    fn apply_item(&self, patch: &PatchNode, trail: &Trail<'_>) -> Result<Self, PatchError> {
        apply::handler(self, patch, trail)
    }
}

impl SeqItem for LineNumber {
    fn diff_item(&self, new: &Self) -> Option<PatchNode> {
        Some(
            Tuple::default()
                .child(LINE_START, term(&self.start, &new.start))
                .child(LINE_NUMBER, term(&self.line, &new.line))
                .finish(),
        )
    }

    fn apply_item(&self, patch: &PatchNode, trail: &Trail<'_>) -> Result<Self, PatchError> {
        apply::line_number(self, patch, trail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{MemberRef, Opcode, Operand};
    use alloc::vec;

    fn ctor(new: bool) -> Vec<Instruction> {
        let put = |f: &str| {
            Instruction::new(Opcode::Putfield, Operand::Member(MemberRef::field("toy/Foo", f, "I")))
        };
        let mut v = vec![
            Instruction::simple(Opcode::Aload0),
            Instruction::new(
                Opcode::Invokespecial,
                Operand::Member(MemberRef::method("java/lang/Object", "<init>", "()V")),
            ),
            Instruction::simple(Opcode::Aload0),
        ];
        if new {
            v.extend([
                Instruction::simple(Opcode::Iconst1),
                put("x"),
                Instruction::simple(Opcode::Aload0),
                Instruction::simple(Opcode::Iconst0),
                put("y"),
            ]);
        } else {
            v.extend([Instruction::simple(Opcode::Iconst0), put("x")]);
        }
        v.push(Instruction::simple(Opcode::Return));
        v
    }

    #[test]
    fn constructor_script() {
        let (old, new) = (ctor(false), ctor(true));
        let PatchNode::Seq(ops) = diff_seq(&old, &new) else {
            panic!("expected a sequence patch")
        };
        let ins = |xs: &[Instruction]| SeqOp::Insert(xs.iter().map(Term::wrap).collect());
        assert_eq!(
            ops,
            vec![
                SeqOp::Copy(3),
                SeqOp::Delete(1),
                ins(&new[3..4]),
                SeqOp::Copy(1),
                ins(&new[5..8]),
                SeqOp::Copy(1),
            ]
        );
    }

    #[test]
    fn handlers_fuse_into_item_patches() {
        let h = |end| ExceptionHandler {
            start: 0,
            end,
            handler: 4,
            catch_type: None,
        };
        let PatchNode::Seq(ops) = diff_seq(&[h(2)], &[h(3)]) else {
            panic!()
        };
        assert_eq!(
            ops,
            vec![SeqOp::PatchItem(Box::new(PatchNode::Tuple(vec![(
                HANDLER_END,
                PatchNode::Replace(Value::U32(3))
            )])))]
        );
    }
}
