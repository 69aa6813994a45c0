use super::{DiffKind, DiffTable};
use crate::ast::{edit, AstError, AstNode, NodeCatalog};

/// Applies a diff table to its source tree.
///
/// Replacements and deletions address source coordinates and are applied
/// deepest/rightmost first so earlier edits never shift later paths.
/// Insertions address target coordinates and are applied afterwards in
/// ascending order, which rebuilds each list left to right.
pub fn replay(p1: &AstNode, table: &DiffTable, catalog: &NodeCatalog) -> Result<AstNode, AstError> {
    let mut out = p1.clone();
    let mut removals: Vec<_> = table.records.iter().filter(|r| r.tau1.is_some()).collect();
    removals.sort_by(|a, b| b.path.cmp(&a.path));
    for r in removals {
        match (&r.tau2, r.kind()) {
            (Some(t), DiffKind::Replace) => edit::replace(&mut out, &r.path, t.clone(), catalog)?,
            _ => edit::delete(&mut out, &r.path, catalog)?,
        }
    }
    let mut inserts: Vec<_> = table.records.iter().filter(|r| r.kind() == DiffKind::Insert).collect();
    inserts.sort_by(|a, b| a.path.cmp(&b.path));
    for r in inserts {
        if let Some(t) = &r.tau2 {
            edit::insert(&mut out, &r.path, t.clone(), catalog)?;
        }
    }
    Ok(out)
}
