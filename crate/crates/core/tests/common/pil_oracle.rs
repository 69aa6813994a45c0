//! Reference evaluation of a statement over one pair: filter the diff rows
//! by a regex rendering of the path pattern, lift them to the matched
//! ancestor, then enumerate every assignment of rows to bindings.

use pi_core::ast::{AstNode, DiffPath, NodeCatalog};
use pi_core::diff::DiffTable;
use pi_core::pilang::{Axis, Env, Lifted, NodeTest, PathExpr, Statement};
use regex::Regex;

pub type Row = (usize, String, DiffPath, Option<AstNode>, Option<AstNode>);

fn to_regex(e: &PathExpr) -> Regex {
    let mut rx = String::from(if e.absolute { "^" } else { "^(?:/[^/]*)*?" });
    for (i, s) in e.steps.iter().enumerate() {
        let gap = if i > 0 && s.axis == Axis::Descendant { "(?:/[^/]*)*?" } else { "" };
        let ty = match &s.test { NodeTest::Any => "[^/#]+".to_string(), NodeTest::Type(t) => regex::escape(t) };
        let ix = match (s.index, &s.test) { (None, _) => "#[^/]*".into(), (Some(k), NodeTest::Any) => format!("#{k}#\\d+"), (Some(k), _) => format!("#\\d+#{k}") };
        rx.push_str(&format!("{gap}/{ty}{ix}"));
    }
    Regex::new(&(rx + "$")).unwrap()
}

/// Depth of the deepest chain prefix whose rendering `/Type#index#typed-index...` the regex accepts.
fn matched_depth(rx: &Regex, ast: &AstNode, path: &DiffPath, cat: &NodeCatalog) -> Option<usize> {
    let (mut items, mut cur) = (vec![(ast.node_type.clone(), "#-#-".to_string())], ast);
    for &i in &path.0 {
        let same = cur.children[..i].iter().filter(|x| x.node_type == cur.children[i].node_type).count();
        cur = &cur.children[i];
        items.push((cur.node_type.clone(), format!("#{i}#{same}")));
    }
    (0..items.len()).rev().find(|&k| {
        let kept = items[..k].iter().filter(|(t, _)| !cat.is_transparent(t)).chain(std::iter::once(&items[k]));
        rx.is_match(&kept.map(|(t, ix)| format!("/{t}{ix}")).collect::<String>())
    })
}

pub fn reference_eval(s: &Statement, t: &DiffTable, a: &AstNode, b: &AstNode, cat: &NodeCatalog) -> Vec<Row> {
    let rows: Vec<Vec<Lifted>> = s.bindings.iter().map(|bd| (to_regex(&bd.path), bd)).map(|(rx, _)| t.records.iter().filter_map(|r| {
        let d = matched_depth(&rx, if r.tau1.is_some() { a } else { b }, &r.path, cat)?;
        let (p1, p2, whole) = (r.path1().prefix(d), r.path2().prefix(d), d == r.path.len());
        let (t1, t2) = ((!whole || r.tau1.is_some()).then(|| p1.clone()), (!whole || r.tau2.is_some()).then(|| p2.clone()));
        let (path, counterpart) = if t1.is_some() { (p1, p2) } else { (p2, p1) };
        Some(Lifted { did: r.did, t1, t2, path, counterpart })
    }).collect()).collect();
    let mut combos: Vec<Vec<usize>> = vec![vec![]]; // every full assignment, one row per binding
    for r in &rows {
        combos = combos.into_iter().flat_map(|c| (0..r.len()).map(move |k| [c.clone(), vec![k]].concat())).collect();
    }
    let env = |c: &[usize]| Env { ast1: a, ast2: b, catalog: cat, vars: c.iter().enumerate().map(|(i, &k)| (s.bindings[i].var.as_str(), &rows[i][k])).collect() };
    let sat: Vec<&Vec<usize>> = combos.iter().filter(|c| s.predicate.as_ref().is_none_or(|p| env(c).holds(p))).collect();
    let ret = s.bindings.iter().position(|x| x.var == s.returned).unwrap();
    let order: Vec<usize> = std::iter::once(ret).chain((0..s.bindings.len()).filter(|&i| i != ret)).collect();
    let get = |tree: &AstNode, p: &Option<DiffPath>| p.as_ref().map(|p| tree.subtree_at(p).unwrap().clone());
    let mut out = Vec::new();
    for r in &t.records {
        let Some((i, l)) = order.iter().find_map(|&i| sat.iter().find(|c| rows[i][c[i]].did == r.did).map(|c| (i, &rows[i][c[i]]))) else { return vec![] };
        out.push((r.did, s.bindings[i].var.clone(), l.path.clone(), get(a, &l.t1), get(b, &l.t2)));
    }
    out
}
