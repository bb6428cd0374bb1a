use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use super::{
    AttributeAst, AttributeContent, ClassAst, CodeAst, FrameKind, JavaType, Keyed,
    VerificationType, ACC_ABSTRACT, ACC_NATIVE,
};
use crate::codec::referenced_constants;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    DuplicateKey,
    InvalidClassName,
    EmptyName,
    BadType,
    /// More than one `Code` attribute on a method.
    MultipleCode,
    /// `Code` on an abstract or native method.
    UnexpectedCode,
    EmptyCode,
    DanglingTarget,
    OperandMismatch,
    /// Attribute name disagrees with its structured content.
    AttributeName,
    /// Stack map frames out of order.
    FrameOrder,
    /// A referenced constant is absent from `constants`.
    MissingConstant,
}

/// One broken invariant, with the path of the offending node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {:?}", self.path, self.kind)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

struct Checker {
    out: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, path: &str, kind: ViolationKind, detail: String) {
        self.out.push(Violation {
            path: path.into(),
            kind,
            detail,
        });
    }

    fn unique_keys<T: Keyed>(&mut self, path: &str, items: &[T]) {
        let mut seen = BTreeSet::new();
        for item in items {
            let key = item.key();
            if !seen.insert(key.clone()) {
                self.push(path, ViolationKind::DuplicateKey, format!("{key}"));
            }
        }
    }

    fn class_name(&mut self, path: &str, name: &str) {
        if !is_binary_class_name(name) {
            self.push(path, ViolationKind::InvalidClassName, name.into());
        }
    }

    fn ty(&mut self, path: &str, ty: &JavaType, allow_void: bool) {
        if (!allow_void && *ty == JavaType::Void) || ty.has_nested_void() {
            self.push(path, ViolationKind::BadType, format!("{ty}"));
        }
    }

    fn attributes(&mut self, path: &str, attributes: &[AttributeAst]) {
        self.unique_keys(path, attributes);
        for attr in attributes {
            let path = format!("{path}/{}", attr.name);
            if let Some(expected) = attr.content.standard_name() {
                if attr.name != expected {
                    self.push(&path, ViolationKind::AttributeName, expected.into());
                }
            }
            if attr.name.is_empty() {
                self.push(&path, ViolationKind::EmptyName, String::new());
            }
            match &attr.content {
                AttributeContent::Code(code) => self.code(&path, code),
                AttributeContent::Exceptions(names) => {
                    for n in names {
                        self.class_name(&path, n);
                    }
                }
                _ => {}
            }
        }
    }

    fn code(&mut self, path: &str, code: &CodeAst) {
        let count = code.instructions.len() as u64;
        if count == 0 {
            self.push(path, ViolationKind::EmptyCode, String::new());
        }
        let in_body = |t: u32| u64::from(t) < count;
        let dangling = |checker: &mut Checker, what: String, target: u32, limit_ok: bool| {
            if !limit_ok {
                checker.push(
                    path,
                    ViolationKind::DanglingTarget,
                    format!("{what} -> {target} (of {count})"),
                );
            }
        };
        for (i, insn) in code.instructions.iter().enumerate() {
            if !insn.is_well_formed() {
                self.push(
                    path,
                    ViolationKind::OperandMismatch,
                    format!("#{i} {:?}", insn.opcode),
                );
            }
            for t in insn.targets() {
                dangling(self, format!("#{i}"), t, in_body(t));
            }
        }
        for (i, h) in code.exception_table.iter().enumerate() {
            let ok = in_body(h.start) && u64::from(h.end) <= count && h.start < h.end;
            dangling(self, format!("handler {i} range"), h.end, ok);
            dangling(self, format!("handler {i}"), h.handler, in_body(h.handler));
        }
        let mut previous: Option<u32> = None;
        for attr in &code.attributes {
            match &attr.content {
                AttributeContent::LineNumberTable(lines) => {
                    for l in lines {
                        dangling(self, "line".into(), l.start, in_body(l.start));
                    }
                }
                AttributeContent::LocalVariableTable(vars)
                | AttributeContent::LocalVariableTypeTable(vars) => {
                    for v in vars {
                        let ok = u64::from(v.end) <= count && v.start <= v.end;
                        dangling(self, format!("local {}", v.name), v.end, ok);
                    }
                }
                AttributeContent::StackMapTable(frames) => {
                    for frame in frames {
                        dangling(self, "frame".into(), frame.target, in_body(frame.target));
                        if previous.is_some_and(|p| frame.target <= p) {
                            self.push(path, ViolationKind::FrameOrder, format!("{}", frame.target));
                        }
                        previous = Some(frame.target);
                        let types: Vec<&VerificationType> = match &frame.kind {
                            FrameKind::SameLocals1(t) => alloc::vec![t],
                            FrameKind::Append(ts) => ts.iter().collect(),
                            FrameKind::Full { locals, stack } => {
                                locals.iter().chain(stack.iter()).collect()
                            }
                            _ => Vec::new(),
                        };
                        for t in types {
                            if let VerificationType::Uninitialized(at) = t {
                                dangling(self, "uninitialized".into(), *at, in_body(*at));
                            }
                        }
                        match &frame.kind {
                            FrameKind::Chop(k) if !(1..=3).contains(k) => self.push(
                                path,
                                ViolationKind::OperandMismatch,
                                format!("chop {k}"),
                            ),
                            FrameKind::Append(ts) if !(1..=3).contains(&ts.len()) => self.push(
                                path,
                                ViolationKind::OperandMismatch,
                                format!("append {}", ts.len()),
                            ),
                            _ => {}
                        }
                    }
                }
                _ => {}
            }
        }
        self.attributes(&format!("{path}/attributes"), &code.attributes);
    }
}

/// A binary class name: non-empty `/`-separated segments with no `.`, `;` or `[`.
pub(crate) fn is_binary_class_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .split('/')
            .all(|seg| !seg.is_empty() && !seg.contains(['.', ';', '[']))
}

/// Checks every AST invariant. Empty iff the AST is valid.
pub fn validate(class: &ClassAst) -> Vec<Violation> {
    let mut c = Checker { out: Vec::new() };
    c.class_name("class", &class.class_type);
    if let Some(sup) = &class.superclass {
        c.class_name("superclass", sup);
    }
    c.unique_keys("interfaces", &class.interfaces);
    for i in &class.interfaces {
        c.class_name("interfaces", i);
    }
    c.unique_keys("fields", &class.fields);
    for f in &class.fields {
        let path = format!("fields/{}", f.name);
        if f.name.is_empty() {
            c.push(&path, ViolationKind::EmptyName, String::new());
        }
        c.ty(&path, &f.ty, false);
        c.attributes(&format!("{path}/attributes"), &f.attributes);
    }
    c.unique_keys("methods", &class.methods);
    for m in &class.methods {
        let path = format!("methods/{}", m.signature);
        if m.signature.name.is_empty() {
            c.push(&path, ViolationKind::EmptyName, String::new());
        }
        c.ty(&path, &m.signature.return_type, true);
        for arg in &m.signature.args {
            c.ty(&path, arg, false);
        }
        let codes = m.attributes.iter().filter(|a| a.as_code().is_some()).count();
        if codes > 1 {
            c.push(&path, ViolationKind::MultipleCode, String::new());
        }
        if codes > 0 && m.flags & (ACC_ABSTRACT | ACC_NATIVE) != 0 {
            c.push(&path, ViolationKind::UnexpectedCode, String::new());
        }
        c.attributes(&format!("{path}/attributes"), &m.attributes);
    }
    c.unique_keys("constants", &class.constants);
    c.attributes("attributes", &class.attributes);

    let declared: BTreeSet<_> = class.constants.iter().collect();
    for needed in referenced_constants(class) {
        if !declared.contains(&needed) {
            c.push("constants", ViolationKind::MissingConstant, format!("{needed}"));
        }
    }
    c.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{FieldAst, Instruction, MethodAst, Opcode, Operand, Signature};
    use alloc::vec;

    fn closed(mut class: ClassAst) -> ClassAst {
        class.constants = referenced_constants(&class).into_iter().collect();
        class
    }

    fn base() -> ClassAst {
        closed(ClassAst {
            class_type: "toy/Foo".into(),
            superclass: Some("java/lang/Object".into()),
            interfaces: vec![],
            fields: vec![FieldAst::new("x", JavaType::Int, 2)],
            methods: vec![],
            constants: vec![],
            attributes: vec![],
            version: 52 << 16,
            flags: 0x20,
        })
    }

    #[test]
    fn well_formed_is_clean() {
        assert_eq!(validate(&base()), vec![]);
    }

    #[test]
    fn duplicate_field_names() {
        let mut c = base();
        c.fields.push(FieldAst::new("x", JavaType::Long, 2));
        let c = closed(c);
        let v = validate(&c);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::DuplicateKey);
        assert_eq!(v[0].path, "fields");
    }

    #[test]
    fn dangling_branch_target() {
        let mut c = base();
        let mut body = vec![Instruction::simple(Opcode::Nop); 9];
        body.push(Instruction::new(Opcode::Goto, Operand::Branch(99)));
        c.methods.push(MethodAst {
            signature: Signature::new("f", JavaType::Void, vec![]),
            flags: 0,
            attributes: vec![AttributeAst::new(AttributeContent::Code(CodeAst {
                instructions: body,
                max_stack: 0,
                max_locals: 1,
                exception_table: vec![],
                attributes: vec![],
            }))],
        });
        let c = closed(c);
        let v = validate(&c);
        assert_eq!(v.len(), 1, "{v:?}");
        assert_eq!(v[0].kind, ViolationKind::DanglingTarget);
    }

    #[test]
    fn missing_constant_and_bad_name() {
        let mut c = base();
        c.constants.retain(|k| *k != crate::ast::ConstantValue::utf8("x"));
        c.class_type = "toy.Foo".into();
        let kinds: Vec<_> = validate(&c).into_iter().map(|v| v.kind).collect();
        assert!(kinds.contains(&ViolationKind::MissingConstant));
        assert!(kinds.contains(&ViolationKind::InvalidClassName));
    }

    #[test]
    fn abstract_method_with_code() {
        let mut c = base();
        c.methods.push(MethodAst {
            signature: Signature::new("f", JavaType::Void, vec![]),
            flags: ACC_ABSTRACT,
            attributes: vec![AttributeAst::new(AttributeContent::Code(CodeAst {
                instructions: vec![Instruction::simple(Opcode::Return)],
                max_stack: 0,
                max_locals: 1,
                exception_table: vec![],
                attributes: vec![],
            }))],
        });
        let c = closed(c);
        let kinds: Vec<_> = validate(&c).into_iter().map(|v| v.kind).collect();
        assert_eq!(kinds, vec![ViolationKind::UnexpectedCode]);
    }
}
