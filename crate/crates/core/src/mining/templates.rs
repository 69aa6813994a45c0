//! Templated cliques: queries that are identical once their literal values
//! are replaced by numbered variables.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::ast::{AstNode, DiffPath, NodeCatalog, Template, Value, SELECT_SLOTS};
use crate::diff::{DiffRecord, DiffTable};
use crate::log::QueryEntry;
use crate::pilang::{match_pathexpr, Statement};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TemplatedClique {
    pub template_hash: u64,
    pub template_ast: Template,
    /// (pid, literal vector) in log order.
    pub members: Vec<(String, Vec<Value>)>,
    /// Where variable `k` sits in every member's tree.
    pub var_paths: Vec<DiffPath>,
}

fn structural_hash(t: &Template) -> u64 {
    let mut h = DefaultHasher::new();
    t.hash(&mut h);
    h.finish()
}

/// Groups the log by literal template, cliques ordered by first occurrence.
/// Only literal nodes are abstracted: column names, operators and function
/// names stay part of the shape.
pub fn extract_templates(log: &[QueryEntry], catalog: &NodeCatalog) -> Vec<TemplatedClique> {
    let mut out: Vec<TemplatedClique> = Vec::new();
    let mut index: HashMap<Template, usize> = HashMap::new();
    for e in log {
        let (t, values, paths) = Template::parameterize_literals(&e.ast, catalog);
        match index.get(&t) {
            Some(&c) => out[c].members.push((e.pid.clone(), values)),
            None => {
                index.insert(t.clone(), out.len());
                out.push(TemplatedClique {
                    template_hash: structural_hash(&t),
                    template_ast: t,
                    members: vec![(e.pid.clone(), values)],
                    var_paths: paths,
                });
            }
        }
    }
    out
}

impl TemplatedClique {
    pub fn rebind(&self, member: usize) -> AstNode {
        self.template_ast.instantiate(&self.members[member].1).expect("member vectors have template arity")
    }
}

/// The diff table of two same-template trees, read off their literal
/// vectors: one replacement per differing variable. This is what `align`
/// returns for such pairs (the positional mapping leaves no node unmatched),
/// without running it.
pub fn literal_diff(a: &AstNode, b: &AstNode, va: &[Value], vb: &[Value], var_paths: &[DiffPath], pid1: &str, pid2: &str) -> DiffTable {
    let records = var_paths
        .iter()
        .zip(va.iter().zip(vb))
        .filter(|(_, (x, y))| x != y)
        .map(|(p, _)| DiffRecord {
            did: 0,
            pid1: String::new(),
            pid2: String::new(),
            path: p.clone(),
            counterpart: p.clone(),
            tau1: a.subtree_at(p).ok().cloned(),
            tau2: b.subtree_at(p).ok().cloned(),
        })
        .collect();
    DiffTable::from_records(pid1, pid2, records)
}

/// Top-level clause slots in which two trees differ.
pub fn differing_slots(a: &AstNode, b: &AstNode) -> Vec<usize> {
    (0..a.children.len().max(b.children.len())).filter(|&i| a.children.get(i) != b.children.get(i)).collect()
}

/// Clause slots a statement's bindings could reach; `None` means any.
///
/// Every node below a slot has that slot's type on its root chain and no
/// other slot type, so a pattern naming one slot type can only match
/// records under that slot, and a pattern naming two can match nothing.
pub fn reachable_slots(stmt: &Statement) -> Option<Vec<usize>> {
    let mut slots = Vec::new();
    for b in &stmt.bindings {
        let named: Vec<usize> = b
            .path
            .steps
            .iter()
            .filter_map(|s| match &s.test {
                crate::pilang::NodeTest::Type(t) => SELECT_SLOTS.iter().position(|x| x == t),
                crate::pilang::NodeTest::Any => None,
            })
            .collect();
        match named.split_first() {
            None => return None,
            Some((first, rest)) if rest.iter().all(|x| x == first) => slots.push(*first),
            Some(_) => {}
        }
    }
    slots.sort_unstable();
    slots.dedup();
    Some(slots)
}

/// Could any record at one of `var_paths` be lifted by the statement?
pub fn statement_touches(stmt: &Statement, ast: &AstNode, var_paths: &[DiffPath], catalog: &NodeCatalog) -> bool {
    stmt.bindings.iter().any(|b| var_paths.iter().any(|p| match_pathexpr(&b.path, p, ast, catalog).is_some()))
}
