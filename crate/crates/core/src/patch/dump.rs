//! Human-readable rendering of patch trees.
//!
//! One line per change, indented one space per level. Line marks: `p`
//! patched, `+` added, `-` removed, `=` unchanged. Without a base class,
//! deleted and copied sequence items can only be shown by position.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write};

use super::{ArchivePatch, EntryChange};
use crate::ast::{AttributeAst, AttributeContent, ClassAst, CodeAst, Key, Keyed, Signature};
use crate::diff::index::*;
use crate::diff::{PatchNode, SeqOp, Term, Value};

/// Renders a class patch. `class_name` heads the output; constructors are
/// shown by its simple name.
pub fn dump_patch(patch: &PatchNode, class_name: &str) -> String {
    let mut d = Dumper::new(class_name);
    d.class_root(class_name, patch, None);
    d.text
}

/// Like [`dump_patch`], but copied and deleted items are shown by content.
pub fn dump_patch_with_base(patch: &PatchNode, base: &ClassAst) -> String {
    let mut d = Dumper::new(&base.class_type);
    d.class_root(&base.class_type, patch, Some(base));
    d.text
}

/// Renders an archive patch: patched classes in full, then added and
/// removed classes and resource changes one line each.
pub fn dump_archive_patch(patch: &ArchivePatch) -> String {
    let mut d = Dumper::new("");
    if patch.is_empty() {
        d.line('=', "archive");
    }
    for (name, node) in &patch.patched {
        d.ctor = simple_name(name).into();
        d.class_root(name, node, None);
    }
    for name in patch.added.keys() {
        d.line('+', format_args!("class {name}"));
    }
    for name in &patch.removed {
        d.line('-', format_args!("class {name}"));
    }
    for (name, change) in &patch.other_entries {
        match change {
            EntryChange::Added(b) => d.line('+', format_args!("{name} ({} bytes)", b.len())),
            EntryChange::Removed => d.line('-', name),
            EntryChange::Replaced(b) => d.line('p', format_args!("{name} ({} bytes)", b.len())),
        }
    }
    d.text
}

fn simple_name(class: &str) -> &str {
    class.rsplit('/').next().unwrap_or(class)
}

#[derive(Clone, Copy)]
enum Elem {
    Atom,
    Field,
    Method,
    Attribute,
}

/// `Foo(int)` for constructors, `static {}` for class initializers,
/// `int getX()` otherwise.
struct MethodLabel<'a>(&'a Signature, &'a str);

impl fmt::Display for MethodLabel<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.name.as_str() {
            "<init>" => self.0.fmt_call(self.1, f),
            "<clinit>" => f.write_str("static {}"),
            _ => write!(f, "{}", self.0),
        }
    }
}

fn value_key(v: &Value) -> Key {
    match v {
        Value::Field(x) => x.key(),
        Value::Method(x) => x.key(),
        Value::Attribute(x) => x.key(),
        Value::Constant(x) => x.key(),
        Value::Name(n) => Key::Name(n.clone()),
        other => Key::Name(other.to_string()),
    }
}

fn content_items(content: &AttributeContent) -> Option<Vec<Value>> {
    fn wrap<T: Term>(xs: &[T]) -> Option<Vec<Value>> {
        Some(xs.iter().map(Term::wrap).collect())
    }
    match content {
        AttributeContent::Exceptions(xs) => wrap(xs),
        AttributeContent::InnerClasses(xs) => wrap(xs),
        AttributeContent::LineNumberTable(xs) => wrap(xs),
        AttributeContent::LocalVariableTable(xs) | AttributeContent::LocalVariableTypeTable(xs) => wrap(xs),
        AttributeContent::StackMapTable(xs) => wrap(xs),
        _ => None,
    }
}

fn keyed<T: Term + Keyed>(xs: &[T]) -> BTreeMap<Key, Value> {
    xs.iter().map(|x| (x.key(), x.wrap())).collect()
}

/// Plain decimal rendering of numeric terminals.
fn plain(v: &Value) -> String {
    match v {
        Value::U16(x) => x.to_string(),
        Value::U32(x) => x.to_string(),
        other => other.to_string(),
    }
}

fn version(v: &Value) -> String {
    match v {
        Value::U32(x) => format!("{}.{}", x >> 16, x & 0xffff),
        other => other.to_string(),
    }
}

struct Dumper {
    text: String,
    depth: usize,
    ctor: String,
}

impl Dumper {
    fn new(class_name: &str) -> Self {
        Dumper {
            text: String::new(),
            depth: 0,
            ctor: simple_name(class_name).into(),
        }
    }

    fn line(&mut self, mark: char, text: impl fmt::Display) {
        for _ in 0..self.depth {
            self.text.push(' ');
        }
        let _ = writeln!(self.text, "{mark} {text}");
    }

    fn open(&mut self, label: impl fmt::Display) {
        self.line('p', format_args!("{label} {{"));
        self.depth += 1;
    }

    fn close(&mut self) {
        self.depth -= 1;
        for _ in 0..self.depth {
            self.text.push(' ');
        }
        self.text.push_str("}\n");
    }

    fn method_label(&self, sig: &Signature) -> String {
        MethodLabel(sig, &self.ctor).to_string()
    }

    fn key_label(&self, key: &Key, elem: Elem) -> String {
        match (key, elem) {
            (Key::Name(n), Elem::Field) => format!("name={n}"),
            (Key::Signature(s), _) => self.method_label(s),
            (k, _) => k.to_string(),
        }
    }

    fn value_label(&self, v: &Value) -> String {
        match v {
            Value::Method(m) => self.method_label(&m.signature),
            Value::Attribute(a) => attribute_label(a),
            other => other.to_string(),
        }
    }

    fn class_root(&mut self, name: &str, node: &PatchNode, base: Option<&ClassAst>) {
        let PatchNode::Tuple(children) = node else {
            return self.generic(name, node);
        };
        // Constants are listed first, then members.
        let rank = |i: u8| match i {
            CONSTANTS => INTERFACES,
            i if (INTERFACES..CONSTANTS).contains(&i) => i + 1,
            i => i,
        };
        let mut children: Vec<&(u8, PatchNode)> = children.iter().collect();
        children.sort_by_key(|(i, _)| rank(*i));
        self.open(name);
        for (i, child) in children {
            match *i {
                CLASS_TYPE => self.terminal("class", child, Value::to_string),
                SUPERCLASS => self.terminal("superclass", child, Value::to_string),
                INTERFACES => self.set("interfaces", child, base.map(|b| keyed(&b.interfaces)), Elem::Atom),
                FIELDS => self.set("fields", child, base.map(|b| keyed(&b.fields)), Elem::Field),
                METHODS => self.set("methods", child, base.map(|b| keyed(&b.methods)), Elem::Method),
                CONSTANTS => self.set("constants", child, base.map(|b| keyed(&b.constants)), Elem::Atom),
                CLASS_ATTRIBUTES => {
                    self.set("attributes", child, base.map(|b| keyed(&b.attributes)), Elem::Attribute)
                }
                VERSION => self.terminal("version", child, version),
                CLASS_FLAGS => self.terminal("flags", child, Value::to_string),
                other => self.generic(&format!("[{other}]"), child),
            }
        }
        self.close();
    }

    fn terminal(&mut self, name: &str, node: &PatchNode, show: fn(&Value) -> String) {
        match node {
            PatchNode::Replace(v) => self.line('p', format_args!("{name} -> {}", show(v))),
            other => self.generic(name, other),
        }
    }

    fn set(&mut self, section: &str, node: &PatchNode, base: Option<BTreeMap<Key, Value>>, elem: Elem) {
        let PatchNode::Set(sp) = node else {
            return self.generic(section, node);
        };
        enum Entry<'a> {
            Removed,
            Added(&'a Value),
            Patched(&'a PatchNode),
        }
        let mut entries: Vec<(Key, Entry<'_>)> = Vec::new();
        entries.extend(sp.removed.iter().map(|k| (k.clone(), Entry::Removed)));
        entries.extend(sp.added.iter().map(|v| (value_key(v), Entry::Added(v))));
        entries.extend(sp.patched.iter().map(|(k, p)| (k.clone(), Entry::Patched(p))));
        entries.sort_by(|a, b| a.0.cmp(&b.0));

        self.open(section);
        for (key, entry) in &entries {
            let old = base.as_ref().and_then(|b| b.get(key));
            match entry {
                Entry::Removed => {
                    let label = match old {
                        Some(v) => self.value_label(v),
                        None => self.key_label(key, elem),
                    };
                    self.line('-', label);
                }
                Entry::Added(v) => {
                    let label = self.value_label(v);
                    self.line('+', label);
                }
                Entry::Patched(p) => self.member(key, p, old, elem),
            }
        }
        self.close();
    }

    fn member(&mut self, key: &Key, node: &PatchNode, old: Option<&Value>, elem: Elem) {
        let label = self.key_label(key, elem);
        match (elem, node) {
            (Elem::Field, PatchNode::Tuple(children)) => {
                let attrs = match old {
                    Some(Value::Field(f)) => Some(keyed(&f.attributes)),
                    _ => None,
                };
                self.open(label);
                for (i, child) in children {
                    match *i {
                        FIELD_TYPE => self.terminal("type", child, Value::to_string),
                        FIELD_FLAGS => self.terminal("flags", child, Value::to_string),
                        FIELD_ATTRIBUTES => self.set("attributes", child, attrs.clone(), Elem::Attribute),
                        other => self.generic(&format!("[{other}]"), child),
                    }
                }
                self.close();
            }
            (Elem::Method, PatchNode::Tuple(children)) => {
                let attrs = match old {
                    Some(Value::Method(m)) => Some(keyed(&m.attributes)),
                    _ => None,
                };
                self.open(label);
                for (i, child) in children {
                    match *i {
                        METHOD_FLAGS => self.terminal("flags", child, Value::to_string),
                        METHOD_ATTRIBUTES => self.set("attributes", child, attrs.clone(), Elem::Attribute),
                        other => self.generic(&format!("[{other}]"), child),
                    }
                }
                self.close();
            }
            (Elem::Attribute, _) => {
                let old = match old {
                    Some(Value::Attribute(a)) => Some(a),
                    _ => None,
                };
                self.attribute(&label, node, old);
            }
            _ => self.generic(&label, node),
        }
    }

    fn attribute(&mut self, name: &str, node: &PatchNode, old: Option<&AttributeAst>) {
        match node {
            PatchNode::Replace(Value::Attribute(a)) => {
                self.line('p', format_args!("{name} -> {}", attribute_label(a)))
            }
            PatchNode::Tuple(children) => {
                let code = old.and_then(AttributeAst::as_code);
                self.open(name);
                self.code(children, code);
                self.close();
            }
            PatchNode::Seq(ops) => {
                let items = old.and_then(|a| content_items(&a.content));
                let fields: &[&str] = if name == "LineNumberTable" { &["start", "line"] } else { &[] };
                self.open(name);
                self.seq(ops, items.as_deref(), fields);
                self.close();
            }
            other => self.generic(name, other),
        }
    }

    fn code(&mut self, children: &[(u8, PatchNode)], old: Option<&CodeAst>) {
        for (i, child) in children {
            match (*i, child) {
                (INSTRUCTIONS, PatchNode::Seq(ops)) => {
                    let items: Option<Vec<Value>> = old.map(|c| c.instructions.iter().map(Term::wrap).collect());
                    self.open("instructions");
                    self.seq(ops, items.as_deref(), &[]);
                    self.close();
                }
                (MAX_STACK, _) => self.terminal("max_stack", child, plain),
                (MAX_LOCALS, _) => self.terminal("max_locals", child, plain),
                (EXCEPTION_TABLE, PatchNode::Seq(ops)) => {
                    let items: Option<Vec<Value>> = old.map(|c| c.exception_table.iter().map(Term::wrap).collect());
                    self.open("exception_table");
                    self.seq(ops, items.as_deref(), &["start", "end", "handler", "catch"]);
                    self.close();
                }
                (CODE_ATTRIBUTES, _) => {
                    let base = old.map(|c| keyed(&c.attributes));
                    self.set("attributes", child, base, Elem::Attribute);
                }
                (other, _) => self.generic(&format!("[{other}]"), child),
            }
        }
    }

    /// Edit script lines. `fields` names the tuple children of patched items.
    fn seq(&mut self, ops: &[SeqOp], old: Option<&[Value]>, fields: &[&str]) {
        let mut at = 0usize;
        let item = |k: usize| -> String {
            match old.and_then(|o| o.get(k)) {
                Some(v) => v.to_string(),
                None => format!("#{k}"),
            }
        };
        for op in ops {
            match op {
                SeqOp::Copy(n) => {
                    let n = *n as usize;
                    if old.is_some() {
                        for k in at..at + n {
                            self.line('=', item(k));
                        }
                    } else {
                        self.line('=', format_args!("{n} unchanged"));
                    }
                    at += n;
                }
                SeqOp::Delete(n) => {
                    for k in at..at + *n as usize {
                        self.line('-', item(k));
                    }
                    at += *n as usize;
                }
                SeqOp::Insert(values) => {
                    for v in values {
                        self.line('+', v);
                    }
                }
                SeqOp::PatchItem(p) => {
                    let label = item(at);
                    match &**p {
                        PatchNode::Tuple(children) => {
                            self.open(label);
                            for (i, child) in children {
                                match fields.get(*i as usize) {
                                    Some(name) => self.terminal(name, child, plain),
                                    None => self.generic(&format!("[{i}]"), child),
                                }
                            }
                            self.close();
                        }
                        other => self.generic(&label, other),
                    }
                    at += 1;
                }
            }
        }
    }

    /// Shape-only rendering for nodes outside the expected grammar position.
    fn generic(&mut self, label: &str, node: &PatchNode) {
        match node {
            PatchNode::Unchanged => self.line('=', label),
            PatchNode::Replace(v) => {
                let v = self.value_label(v);
                self.line('p', format_args!("{label} -> {v}"));
            }
            PatchNode::Tuple(children) => {
                self.open(label);
                for (i, child) in children {
                    self.generic(&format!("[{i}]"), child);
                }
                self.close();
            }
            PatchNode::Set(_) => self.set(label, node, None, Elem::Atom),
            PatchNode::Seq(ops) => {
                self.open(label);
                self.seq(ops, None, &[]);
                self.close();
            }
        }
    }
}

fn attribute_label(a: &AttributeAst) -> String {
    match &a.content {
        AttributeContent::SourceFile(s) | AttributeContent::Signature(s) => format!("{} {s:?}", a.name),
        AttributeContent::ConstantValue(c) => format!("{} {c}", a.name),
        AttributeContent::Code(c) => format!("{} ({} instructions)", a.name, c.instructions.len()),
        AttributeContent::Opaque(b) => format!("{} ({} bytes)", a.name, b.len()),
        AttributeContent::Deprecated | AttributeContent::Synthetic => a.name.clone(),
        other => match content_items(other) {
            Some(items) => format!("{} ({} entries)", a.name, items.len()),
            None => a.name.clone(),
        },
    }
}
