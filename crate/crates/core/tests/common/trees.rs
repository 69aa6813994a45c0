//! Random small trees and an exhaustive alignment oracle.

use pi_core::ast::{AstNode, NodeCatalog};
use rand::Rng;

pub fn toy_catalog() -> NodeCatalog {
    NodeCatalog::from_json(
        r#"{"dialect":"toy","literal_types":{"V":"integer"},"list_types":{"L":"E"},"interior_types":["R","E"]}"#,
    )
    .unwrap()
}

/// A random tree with at most `budget` nodes over the toy catalog.
pub fn random_tree(rng: &mut impl Rng, budget: usize) -> AstNode {
    let mut left = budget.max(1) - 1;
    let mut root = AstNode::new("R").with_attr("k", rng.gen_range(0..2i64));
    let arity = rng.gen_range(0..3);
    for _ in 0..arity {
        if left == 0 {
            break;
        }
        root.children.push(grow(rng, &mut left, 0));
    }
    root
}

fn grow(rng: &mut impl Rng, left: &mut usize, depth: usize) -> AstNode {
    *left -= 1;
    let pick = if depth > 3 || *left == 0 { 2 } else { rng.gen_range(0..3) };
    match pick {
        0 => {
            let mut l = AstNode::new("L");
            let n = rng.gen_range(0..5);
            for _ in 0..n {
                if *left == 0 {
                    break;
                }
                l.children.push(element(rng, left, depth + 1));
            }
            l
        }
        1 => {
            // an element-shaped interior node outside a list
            let mut e = AstNode::new("E").with_attr("v", rng.gen_range(0..3i64));
            let n = rng.gen_range(0..3);
            for _ in 0..n {
                if *left == 0 {
                    break;
                }
                e.children.push(grow(rng, left, depth + 1));
            }
            e
        }
        _ => AstNode::new("V").with_attr("value", rng.gen_range(0..3i64)),
    }
}

fn element(rng: &mut impl Rng, left: &mut usize, depth: usize) -> AstNode {
    *left -= 1;
    let mut e = AstNode::new("E").with_attr("v", rng.gen_range(0..3i64));
    let n = if depth > 3 { 0 } else { rng.gen_range(0..3) };
    for _ in 0..n {
        if *left == 0 {
            break;
        }
        e.children.push(grow(rng, left, depth + 1));
    }
    e
}

/// (unmatched nodes, records) of the best order-preserving top-down mapping,
/// found by enumerating every monotone matching of list children explicitly.
pub fn brute_force_cost(a: &AstNode, b: &AstNode, cat: &NodeCatalog) -> (u32, u32) {
    let replace = ((a.size() + b.size()) as u32, 1);
    if !(a.node_type == b.node_type && a.attrs == b.attrs) {
        return replace;
    }
    let matched = if cat.is_list(&a.node_type) {
        let mut best = None::<(u32, u32)>;
        for (xs, ys) in monotone_matchings(a.children.len(), b.children.len()) {
            let mut c = (0u32, 0u32);
            for (&x, &y) in xs.iter().zip(&ys) {
                let s = brute_force_cost(&a.children[x], &b.children[y], cat);
                c = (c.0 + s.0, c.1 + s.1);
            }
            for (i, ch) in a.children.iter().enumerate() {
                if !xs.contains(&i) {
                    c = (c.0 + ch.size() as u32, c.1 + 1);
                }
            }
            for (j, ch) in b.children.iter().enumerate() {
                if !ys.contains(&j) {
                    c = (c.0 + ch.size() as u32, c.1 + 1);
                }
            }
            best = Some(best.map_or(c, |b| b.min(c)));
        }
        best
    } else if a.children.len() == b.children.len() {
        Some(a.children.iter().zip(&b.children).fold((0, 0), |acc, (x, y)| {
            let s = brute_force_cost(x, y, cat);
            (acc.0 + s.0, acc.1 + s.1)
        }))
    } else {
        None
    };
    matched.map_or(replace, |m| m.min(replace))
}

/// All pairs of equal-length strictly increasing index sequences.
pub fn monotone_matchings(n: usize, m: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    let subsets = |k: usize| -> Vec<Vec<usize>> {
        (0u32..(1 << k)).map(|mask| (0..k).filter(|i| mask & (1 << i) != 0).collect()).collect()
    };
    let (sa, sb) = (subsets(n), subsets(m));
    let mut out = Vec::new();
    for x in &sa {
        for y in &sb {
            if x.len() == y.len() {
                out.push((x.clone(), y.clone()));
            }
        }
    }
    out
}
