//! Test fixtures: a small class-file assembler that shares no code with the
//! codec under test, and a corpus of classes built with it.
//!
//! Layout variants ([`Layout`]) emit the same class with a shuffled constant
//! pool or member order, for invariance tests.

pub mod asm;
pub mod corpus;
pub mod scan;

pub use asm::{hex, mutf8, shuffle, ClassFile, Const, Field, InnerClassRow, Layout, Method, RawAttr};
pub use corpus::{
    api_class, corpus, custom_class, foo_new, foo_new_class, foo_old, foo_old_class, generated_class,
    inner_class, legacy_class, root_class, shapes_class, strings_class,
};
pub use scan::{pool_end, utf8_constants};
