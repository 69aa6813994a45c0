use crate::ast::{AstNode, DiffPath, NodeCatalog, Template};
use crate::pilang::MatchTable;

use super::{EdgeLabel, EdgeValue, LabelKind};

fn list_ancestor<'a>(ast: &'a AstNode, path: &DiffPath, catalog: &NodeCatalog) -> Option<(DiffPath, &'a AstNode)> {
    (0..path.len()).rev().find_map(|d| {
        let p = path.prefix(d);
        let n = ast.subtree_at(&p).ok()?;
        catalog.is_list(&n.node_type).then_some((p, n))
    })
}

/// Collapses a multi-record match into one edge on the enclosing list when
/// every changed subtree sits directly or indirectly under the same list
/// node and all elements of that list, before and after, share one
/// template. The edge's value is the target list as a set of element
/// parameter tuples, in list order.
pub fn detect_collection_edge(table: &MatchTable, ast1: &AstNode, ast2: &AstNode, catalog: &NodeCatalog) -> Option<(EdgeLabel, EdgeValue)> {
    if table.records.len() < 2 {
        return None;
    }
    let mut anchor: Option<(DiffPath, &AstNode, &AstNode)> = None;
    for r in &table.records {
        let sides = [(r.tau1.is_some(), ast1, r.path1()), (r.tau2.is_some(), ast2, r.path2())];
        for (present, ast, path) in sides {
            if !present {
                continue;
            }
            let (p, _) = list_ancestor(ast, path, catalog)?;
            match &anchor {
                None => {
                    let (l1, l2) = (ast1.subtree_at(&p).ok()?, ast2.subtree_at(&p).ok()?);
                    if !l1.same_label(l2) || !catalog.is_list(&l2.node_type) {
                        return None;
                    }
                    anchor = Some((p, l1, l2));
                }
                Some((q, ..)) if *q == p => {}
                Some(_) => return None,
            }
        }
    }
    let (path, before, after) = anchor?;
    let mut template: Option<Template> = None;
    let mut items = Vec::with_capacity(after.children.len());
    for (i, el) in before.children.iter().chain(&after.children).enumerate() {
        let (t, v) = Template::parameterize(el);
        if template.get_or_insert_with(|| t.clone()) != &t {
            return None;
        }
        if i >= before.children.len() {
            items.push(v);
        }
    }
    Some((EdgeLabel { kind: LabelKind::Collection, path, template }, EdgeValue::Set(items)))
}
