//! Naive pairwise match relation and its connected components.

use pi_core::ast::sql_catalog;
use pi_core::diff::align;
use pi_core::log::QueryEntry;
use pi_core::pilang::{eval_statement, Statement};

pub fn related(s: &Statement, a: &QueryEntry, b: &QueryEntry) -> bool {
    if a.ast == b.ast {
        return true;
    }
    let t = align(&a.ast, &b.ast, sql_catalog());
    eval_statement(s, &t, &a.ast, &b.ast, sql_catalog()).is_match()
        || eval_statement(s, &t.reversed(), &b.ast, &a.ast, sql_catalog()).is_match()
}

fn find(p: &mut [usize], x: usize) -> usize {
    if p[x] != x {
        p[x] = find(p, p[x]);
    }
    p[x]
}

/// Components as sorted member lists, sorted by first member.
pub fn components(n: usize, mut edge: impl FnMut(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if edge(i, j) {
                let (a, b) = (find(&mut p, i), find(&mut p, j));
                p[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut p, i);
        groups.entry(r).or_default().push(i);
    }
    let mut v: Vec<Vec<usize>> = groups.into_values().collect();
    v.sort();
    v
}
