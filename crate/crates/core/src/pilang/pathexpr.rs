use super::syntax::{Axis, PathExpr};
use crate::ast::{AstNode, DiffPath, NodeCatalog};

struct Link<'a> {
    node_type: &'a str,
    /// position among all siblings, and among siblings of the same type
    index: Option<(usize, usize)>,
}

fn chain<'a>(ast: &'a AstNode, path: &DiffPath) -> Option<Vec<Link<'a>>> {
    let mut out = vec![Link { node_type: &ast.node_type, index: None }];
    let mut cur = ast;
    for &i in &path.0 {
        let child = cur.children.get(i)?;
        let same = cur.children[..i].iter().filter(|c| c.node_type == child.node_type).count();
        out.push(Link { node_type: &child.node_type, index: Some((i, same)) });
        cur = child;
    }
    Some(out)
}

fn step_accepts(expr: &PathExpr, s: usize, link: &Link) -> bool {
    let step = &expr.steps[s];
    if !step.test.accepts(link.node_type) {
        return false;
    }
    match (step.index, link.index) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(k), Some((all, same))) => {
            if step.test == super::syntax::NodeTest::Any {
                all == k
            } else {
                same == k
            }
        }
    }
}

/// Whether `expr` matches the whole sequence, ending exactly at its last element.
fn matches_sequence(expr: &PathExpr, seq: &[&Link]) -> bool {
    let n = seq.len();
    if n == 0 || expr.steps.is_empty() {
        return false;
    }
    let mut reach: Vec<bool> = (0..n).map(|j| (!expr.absolute || j == 0) && step_accepts(expr, 0, seq[j])).collect();
    for s in 1..expr.steps.len() {
        let mut next = vec![false; n];
        for p in 0..n {
            if !reach[p] {
                continue;
            }
            match expr.steps[s].axis {
                Axis::Child => {
                    if p + 1 < n && step_accepts(expr, s, seq[p + 1]) {
                        next[p + 1] = true;
                    }
                }
                Axis::Descendant => {
                    for j in p + 1..n {
                        if step_accepts(expr, s, seq[j]) {
                            next[j] = true;
                        }
                    }
                }
            }
        }
        reach = next;
    }
    reach[n - 1]
}

/// Deepest node on the root-to-`path` chain whose type chain satisfies `expr`.
/// Transparent wrapper nodes are invisible to patterns unless they are the
/// node being tested.
pub fn match_pathexpr(expr: &PathExpr, path: &DiffPath, ast: &AstNode, catalog: &NodeCatalog) -> Option<DiffPath> {
    let links = chain(ast, path)?;
    for k in (0..links.len()).rev() {
        let seq: Vec<&Link> = links[..k]
            .iter()
            .filter(|l| !catalog.is_transparent(l.node_type))
            .chain(std::iter::once(&links[k]))
            .collect();
        if matches_sequence(expr, &seq) {
            return Some(path.prefix(k));
        }
    }
    None
}
