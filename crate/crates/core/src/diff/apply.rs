use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::index::*;
use super::{PatchError, PatchNode, SeqItem, SeqOp, SetItem, Term};
use crate::ast::{
    validate, AttributeAst, AttributeContent, ClassAst, CodeAst, ExceptionHandler, FieldAst, Key,
    LineNumber, MethodAst,
};

/// Location inside the tree being patched. Rendered only when an error occurs.
pub struct Trail<'a> {
    parent: Option<&'a Trail<'a>>,
    segment: Segment<'a>,
}

enum Segment<'a> {
    Root,
    Name(&'static str),
    Key(&'a Key),
    Item(usize),
}

impl<'a> Trail<'a> {
    pub(crate) fn root() -> Trail<'static> {
        Trail {
            parent: None,
            segment: Segment::Root,
        }
    }

    fn push(&'a self, segment: Segment<'a>) -> Trail<'a> {
        Trail {
            parent: Some(self),
            segment,
        }
    }

    pub(crate) fn name(&'a self, name: &'static str) -> Trail<'a> {
        self.push(Segment::Name(name))
    }

    pub(crate) fn key(&'a self, key: &'a Key) -> Trail<'a> {
        self.push(Segment::Key(key))
    }

    pub(crate) fn item(&'a self, index: usize) -> Trail<'a> {
        self.push(Segment::Item(index))
    }

    pub fn path(&self) -> String {
        let mut segments = Vec::new();
        let mut at = Some(self);
        while let Some(t) = at {
            match &t.segment {
                Segment::Root => {}
                Segment::Name(n) => segments.push(String::from(*n)),
                Segment::Key(k) => segments.push(k.to_string()),
                Segment::Item(i) => segments.push(format!("#{i}")),
            }
            at = t.parent;
        }
        segments.reverse();
        segments.join("/")
    }

    pub fn mismatch(&self, reason: impl Into<String>) -> PatchError {
        PatchError {
            path: self.path(),
            reason: reason.into(),
        }
    }
}

/// Applies `patch` to `old`. The result is validated, so a patch derived
/// against a different base fails here rather than producing a broken class.
pub fn apply_patch(patch: &PatchNode, old: &ClassAst) -> Result<ClassAst, PatchError> {
    let root = Trail::root();
    let class = class(old, patch, &root)?;
    if let Some(v) = validate(&class).into_iter().next() {
        return Err(PatchError {
            path: v.path,
            reason: format!("result is invalid: {:?} {}", v.kind, v.detail),
        });
    }
    Ok(class)
}

/// Children of a tuple patch, checked to be ascending and within `arity`.
fn children<'p>(
    patch: &'p PatchNode,
    arity: u8,
    trail: &Trail<'_>,
) -> Result<&'p [(u8, PatchNode)], PatchError> {
    match patch {
        PatchNode::Unchanged => Ok(&[]),
        PatchNode::Tuple(children) => {
            let mut last: Option<u8> = None;
            for (i, _) in children {
                if *i >= arity || last.is_some_and(|l| l >= *i) {
                    return Err(trail.mismatch(format!("bad tuple child index {i}")));
                }
                last = Some(*i);
            }
            Ok(children)
        }
        other => Err(trail.mismatch(format!("expected a tuple patch, found {}", shape(other)))),
    }
}

fn shape(p: &PatchNode) -> &'static str {
    match p {
        PatchNode::Unchanged => "unchanged",
        PatchNode::Replace(_) => "replacement",
        PatchNode::Tuple(_) => "tuple patch",
        PatchNode::Set(_) => "set patch",
        PatchNode::Seq(_) => "sequence patch",
    }
}

pub(crate) fn term<T: Term>(old: &T, patch: &PatchNode, trail: &Trail<'_>) -> Result<T, PatchError> {
    match patch {
        PatchNode::Unchanged => Ok(old.clone()),
        PatchNode::Replace(v) => {
            T::unwrap(v).ok_or_else(|| trail.mismatch(format!("unexpected {} value", v.kind())))
        }
        other => Err(trail.mismatch(format!("expected a terminal, found {}", shape(other)))),
    }
}

pub(crate) fn set<T: SetItem>(old: &[T], patch: &PatchNode, trail: &Trail<'_>) -> Result<Vec<T>, PatchError> {
    let sp = match patch {
        PatchNode::Unchanged => return Ok(old.to_vec()),
        PatchNode::Set(sp) => sp,
        other => return Err(trail.mismatch(format!("expected a set patch, found {}", shape(other)))),
    };
    let mut slots: Vec<Option<T>> = old.iter().cloned().map(Some).collect();
    let mut by_key: BTreeMap<Key, usize> = old.iter().enumerate().map(|(i, m)| (m.key(), i)).collect();
    for key in &sp.removed {
        let i = by_key
            .remove(key)
            .ok_or_else(|| trail.key(key).mismatch("removed member is absent"))?;
        slots[i] = None;
    }
    for (key, child) in &sp.patched {
        let t = trail.key(key);
        let i = *by_key.get(key).ok_or_else(|| t.mismatch("patched member is absent"))?;
        let member = slots[i].as_ref().expect("live slot");
        let patched = member.apply_member(child, &t)?;
        if patched.key() != *key {
            return Err(t.mismatch("patch changes the member key"));
        }
        slots[i] = Some(patched);
    }
    for value in &sp.added {
        let member = T::unwrap(value)
            .ok_or_else(|| trail.mismatch(format!("unexpected {} among added members", value.kind())))?;
        let key = member.key();
        if by_key.contains_key(&key) {
            return Err(trail.key(&key).mismatch("added member is already present"));
        }
        by_key.insert(key, slots.len());
        slots.push(Some(member));
    }
    Ok(slots.into_iter().flatten().collect())
}

pub(crate) fn seq<T: SeqItem>(old: &[T], patch: &PatchNode, trail: &Trail<'_>) -> Result<Vec<T>, PatchError> {
    let ops = match patch {
        PatchNode::Unchanged => return Ok(old.to_vec()),
        PatchNode::Seq(ops) => ops,
        other => {
            return Err(trail.mismatch(format!("expected a sequence patch, found {}", shape(other))))
        }
    };
    let mut out = Vec::with_capacity(old.len());
    let mut i = 0usize;
    let overrun = |i: usize, n: usize| {
        trail.item(i).mismatch(format!("edit of {n} item(s) overruns {} old items", old.len()))
    };
    for op in ops {
        match op {
            SeqOp::Copy(n) => {
                let n = *n as usize;
                let end = i.checked_add(n).filter(|e| *e <= old.len()).ok_or_else(|| overrun(i, n))?;
                out.extend_from_slice(&old[i..end]);
                i = end;
            }
            SeqOp::Delete(n) => {
                let n = *n as usize;
                i = i.checked_add(n).filter(|e| *e <= old.len()).ok_or_else(|| overrun(i, n))?;
            }
            SeqOp::Insert(values) => {
                for v in values {
                    out.push(T::unwrap(v).ok_or_else(|| {
                        trail.item(i).mismatch(format!("unexpected inserted {}", v.kind()))
                    })?);
                }
            }
            SeqOp::PatchItem(child) => {
                let item = old.get(i).ok_or_else(|| overrun(i, 1))?;
                out.push(item.apply_item(child, &trail.item(i))?);
                i += 1;
            }
        }
    }
    if i != old.len() {
        return Err(trail.item(i).mismatch(format!(
            "edit script covers {i} of {} old items",
            old.len()
        )));
    }
    Ok(out)
}

fn class(old: &ClassAst, patch: &PatchNode, trail: &Trail<'_>) -> Result<ClassAst, PatchError> {
    let mut c = old.clone();
    for (i, child) in children(patch, 9, trail)? {
        match *i {
            CLASS_TYPE => c.class_type = term(&old.class_type, child, &trail.name("class"))?,
            SUPERCLASS => c.superclass = term(&old.superclass, child, &trail.name("superclass"))?,
            INTERFACES => c.interfaces = set(&old.interfaces, child, &trail.name("interfaces"))?,
            FIELDS => c.fields = set(&old.fields, child, &trail.name("fields"))?,
            METHODS => c.methods = set(&old.methods, child, &trail.name("methods"))?,
            CONSTANTS => c.constants = set(&old.constants, child, &trail.name("constants"))?,
            CLASS_ATTRIBUTES => {
                c.attributes = set(&old.attributes, child, &trail.name("attributes"))?
            }
            VERSION => c.version = term(&old.version, child, &trail.name("version"))?,
            _ => c.flags = term(&old.flags, child, &trail.name("flags"))?,
        }
    }
    Ok(c)
}

pub(crate) fn field(old: &FieldAst, patch: &PatchNode, trail: &Trail<'_>) -> Result<FieldAst, PatchError> {
    let mut f = old.clone();
    for (i, child) in children(patch, 4, trail)? {
        match *i {
            FIELD_NAME => return Err(trail.mismatch("field name is a key and cannot be patched")),
            FIELD_TYPE => f.ty = term(&old.ty, child, &trail.name("type"))?,
            FIELD_FLAGS => f.flags = term(&old.flags, child, &trail.name("flags"))?,
            _ => f.attributes = set(&old.attributes, child, &trail.name("attributes"))?,
        }
    }
    Ok(f)
}

pub(crate) fn method(old: &MethodAst, patch: &PatchNode, trail: &Trail<'_>) -> Result<MethodAst, PatchError> {
    let mut m = old.clone();
    for (i, child) in children(patch, 3, trail)? {
        match *i {
            METHOD_SIGNATURE => {
                return Err(trail.mismatch("method signature is a key and cannot be patched"))
            }
            METHOD_FLAGS => m.flags = term(&old.flags, child, &trail.name("flags"))?,
            _ => m.attributes = set(&old.attributes, child, &trail.name("attributes"))?,
        }
    }
    Ok(m)
}

fn code(old: &CodeAst, patch: &PatchNode, trail: &Trail<'_>) -> Result<CodeAst, PatchError> {
    let mut c = old.clone();
    for (i, child) in children(patch, 5, trail)? {
        match *i {
            INSTRUCTIONS => {
                c.instructions = seq(&old.instructions, child, &trail.name("instructions"))?
            }
            MAX_STACK => c.max_stack = term(&old.max_stack, child, &trail.name("max_stack"))?,
            MAX_LOCALS => c.max_locals = term(&old.max_locals, child, &trail.name("max_locals"))?,
            EXCEPTION_TABLE => {
                c.exception_table = seq(&old.exception_table, child, &trail.name("exception_table"))?
            }
            _ => c.attributes = set(&old.attributes, child, &trail.name("attributes"))?,
        }
    }
    Ok(c)
}

pub(crate) fn attribute(
    old: &AttributeAst,
    patch: &PatchNode,
    trail: &Trail<'_>,
) -> Result<AttributeAst, PatchError> {
    use AttributeContent as A;
    let content = match (patch, &old.content) {
        (PatchNode::Unchanged, _) => return Ok(old.clone()),
        (PatchNode::Replace(_), _) => return term(old, patch, trail),
        (PatchNode::Tuple(_), A::Code(c)) => A::Code(code(c, patch, trail)?),
        (PatchNode::Seq(_), A::Exceptions(v)) => A::Exceptions(seq(v, patch, trail)?),
        (PatchNode::Seq(_), A::InnerClasses(v)) => A::InnerClasses(seq(v, patch, trail)?),
        (PatchNode::Seq(_), A::LineNumberTable(v)) => A::LineNumberTable(seq(v, patch, trail)?),
        (PatchNode::Seq(_), A::LocalVariableTable(v)) => A::LocalVariableTable(seq(v, patch, trail)?),
        (PatchNode::Seq(_), A::LocalVariableTypeTable(v)) => {
            A::LocalVariableTypeTable(seq(v, patch, trail)?)
        }
        (PatchNode::Seq(_), A::StackMapTable(v)) => A::StackMapTable(seq(v, patch, trail)?),
        (p, _) => {
            return Err(trail.mismatch(format!(
                "{} does not fit attribute {}",
                shape(p),
                old.name
            )))
        }
    };
    Ok(AttributeAst {
        name: old.name.clone(),
        content,
    })
}

pub(crate) fn handler(
    old: &ExceptionHandler,
    patch: &PatchNode,
    trail: &Trail<'_>,
) -> Result<ExceptionHandler, PatchError> {
    let mut h = old.clone();
    for (i, child) in children(patch, 4, trail)? {
        match *i {
            HANDLER_START => h.start = term(&old.start, child, &trail.name("start"))?,
            HANDLER_END => h.end = term(&old.end, child, &trail.name("end"))?,
            HANDLER_PC => h.handler = term(&old.handler, child, &trail.name("handler"))?,
            _ => h.catch_type = term(&old.catch_type, child, &trail.name("catch_type"))?,
        }
    }
    Ok(h)
}

pub(crate) fn line_number(
    old: &LineNumber,
    patch: &PatchNode,
    trail: &Trail<'_>,
) -> Result<LineNumber, PatchError> {
    let mut l = old.clone();
    for (i, child) in children(patch, 2, trail)? {
        match *i {
            LINE_START => l.start = term(&old.start, child, &trail.name("start"))?,
            _ => l.line = term(&old.line, child, &trail.name("line"))?,
        }
    }
    Ok(l)
}
