use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::ast::{DeclKind, Ident, Program};

/// An array together with its witness pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayInfo {
    pub name: Ident,
    pub size: u64,
    /// `x_a`
    pub witness_var: Ident,
    /// `i_a`
    pub witness_idx: Ident,
}

/// Highest valid index of the array.
pub fn lastof(a: &ArrayInfo) -> i64 {
    a.size as i64 - 1
}

/// Hands out identifiers that collide with nothing declared so far.
#[derive(Clone, Debug, Default)]
pub struct NameSupply {
    taken: BTreeSet<String>,
}

impl NameSupply {
    pub fn for_program(p: &Program) -> Self {
        NameSupply { taken: p.decls.iter().map(|d| d.name.clone()).collect() }
    }

    /// `base`, or `base_1`, `base_2`, ... on collision.
    pub fn fresh(&mut self, base: &str) -> String {
        let mut name = String::from(base);
        let mut n = 1;
        while self.taken.contains(&name) {
            name = format!("{base}_{n}");
            n += 1;
        }
        self.taken.insert(name.clone());
        name
    }
}

/// One entry per declared array, in declaration order, with fresh witness names.
pub fn collect_arrays(p: &Program) -> Vec<ArrayInfo> {
    collect_arrays_with(p, &mut NameSupply::for_program(p))
}

pub fn collect_arrays_with(p: &Program, names: &mut NameSupply) -> Vec<ArrayInfo> {
    p.decls
        .iter()
        .filter_map(|d| match d.kind {
            DeclKind::Array { size } => Some(ArrayInfo {
                name: d.name.clone(),
                size,
                witness_var: names.fresh(&format!("x_{}", d.name)),
                witness_idx: names.fresh(&format!("i_{}", d.name)),
            }),
            _ => None,
        })
        .collect()
}
