#![allow(dead_code)]

pub mod mutate;

use aspa_core::{parse_class, ClassAst};

/// Every corpus class, parsed.
pub fn corpus_asts() -> Vec<(String, ClassAst)> {
    aspa_fixtures::corpus()
        .into_iter()
        .map(|(name, c)| {
            let ast = parse_class(&c.bytes()).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, ast)
        })
        .collect()
}
