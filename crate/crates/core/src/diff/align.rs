use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use super::{DiffRecord, DiffTable};
use crate::ast::{AstNode, DiffPath, NodeCatalog};

/// Lexicographic alignment cost: unmatched nodes, then records.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct AlignCost {
    pub unmatched: u32,
    pub records: u32,
}

// Packed as unmatched << 32 | records so that addition and comparison are
// single integer operations in the DP.
type Packed = u64;
const UNSET: Packed = u64::MAX;

fn gap(size: u32) -> Packed {
    ((size as u64) << 32) | 1
}

fn unpack(c: Packed) -> AlignCost {
    AlignCost { unmatched: (c >> 32) as u32, records: c as u32 }
}

struct Flat<'a> {
    nodes: Vec<&'a AstNode>,
    children: Vec<Vec<usize>>,
    size: Vec<u32>,
    label: Vec<u64>,
    hash: Vec<u64>,
}

impl<'a> Flat<'a> {
    fn new(root: &'a AstNode) -> Self {
        let mut f = Flat { nodes: Vec::new(), children: Vec::new(), size: Vec::new(), label: Vec::new(), hash: Vec::new() };
        f.push(root);
        f
    }

    fn push(&mut self, node: &'a AstNode) -> usize {
        let id = self.nodes.len();
        self.nodes.push(node);
        self.children.push(Vec::new());
        self.size.push(0);
        let mut h = DefaultHasher::new();
        node.node_type.hash(&mut h);
        node.attrs.hash(&mut h);
        let label = h.finish();
        self.label.push(label);
        self.hash.push(0);
        let mut size = 1u32;
        let mut sh = DefaultHasher::new();
        label.hash(&mut sh);
        for c in &node.children {
            let cid = self.push(c);
            size += self.size[cid];
            self.hash[cid].hash(&mut sh);
            self.children[id].push(cid);
        }
        self.size[id] = size;
        self.hash[id] = sh.finish();
        id
    }
}

struct Aligner<'a, 'c> {
    a: Flat<'a>,
    b: Flat<'a>,
    catalog: &'c NodeCatalog,
    memo: Vec<Packed>,
}

impl<'a, 'c> Aligner<'a, 'c> {
    fn new(p1: &'a AstNode, p2: &'a AstNode, catalog: &'c NodeCatalog) -> Self {
        let a = Flat::new(p1);
        let b = Flat::new(p2);
        let memo = vec![UNSET; a.nodes.len() * b.nodes.len()];
        Aligner { a, b, catalog, memo }
    }

    fn replace_cost(&self, i: usize, j: usize) -> Packed {
        (((self.a.size[i] + self.b.size[j]) as u64) << 32) | 1
    }

    fn same_label(&self, i: usize, j: usize) -> bool {
        self.a.label[i] == self.b.label[j] && self.a.nodes[i].same_label(self.b.nodes[j])
    }

    fn is_list(&self, i: usize) -> bool {
        self.catalog.is_list(&self.a.nodes[i].node_type)
    }

    fn cost(&mut self, i: usize, j: usize) -> Packed {
        let slot = i * self.b.nodes.len() + j;
        if self.memo[slot] != UNSET {
            return self.memo[slot];
        }
        let c = if self.a.hash[i] == self.b.hash[j] && self.a.nodes[i] == self.b.nodes[j] {
            0
        } else if !self.same_label(i, j) {
            self.replace_cost(i, j)
        } else if self.is_list(i) {
            let dp = self.list_dp(i, j);
            dp[0]
        } else if self.a.children[i].len() == self.b.children[j].len() {
            let pairs: Vec<(usize, usize)> =
                self.a.children[i].iter().copied().zip(self.b.children[j].iter().copied()).collect();
            pairs.into_iter().map(|(x, y)| self.cost(x, y)).sum()
        } else {
            self.replace_cost(i, j)
        };
        self.memo[slot] = c;
        c
    }

    /// Suffix DP over the children of two list nodes; `dp[x * (m + 1) + y]`
    /// is the cost of aligning `a[x..]` with `b[y..]`.
    fn list_dp(&mut self, i: usize, j: usize) -> Vec<Packed> {
        let ac = self.a.children[i].clone();
        let bc = self.b.children[j].clone();
        let (n, m) = (ac.len(), bc.len());
        let w = m + 1;
        let mut dp = vec![0 as Packed; (n + 1) * w];
        for x in (0..=n).rev() {
            for y in (0..=m).rev() {
                if x == n && y == m {
                    continue;
                }
                let mut best = UNSET;
                if x < n && y < m {
                    best = best.min(self.cost(ac[x], bc[y]) + dp[(x + 1) * w + y + 1]);
                }
                if x < n {
                    best = best.min(gap(self.a.size[ac[x]]) + dp[(x + 1) * w + y]);
                }
                if y < m {
                    best = best.min(gap(self.b.size[bc[y]]) + dp[x * w + y + 1]);
                }
                dp[x * w + y] = best;
            }
        }
        dp
    }

    fn emit(&mut self, i: usize, j: usize, p1: &mut Vec<usize>, p2: &mut Vec<usize>, out: &mut Vec<DiffRecord>) {
        if self.cost(i, j) == 0 {
            return;
        }
        let fixed_arity = self.a.children[i].len() == self.b.children[j].len();
        if !self.same_label(i, j) || (!self.is_list(i) && !fixed_arity) {
            out.push(record(p1, p2, Some(self.a.nodes[i]), Some(self.b.nodes[j])));
            return;
        }
        let ac = self.a.children[i].clone();
        let bc = self.b.children[j].clone();
        if !self.is_list(i) {
            for (k, (&x, &y)) in ac.iter().zip(bc.iter()).enumerate() {
                p1.push(k);
                p2.push(k);
                self.emit(x, y, p1, p2, out);
                p1.pop();
                p2.pop();
            }
            return;
        }
        let dp = self.list_dp(i, j);
        let (n, m) = (ac.len(), bc.len());
        let w = m + 1;
        let (mut x, mut y) = (0, 0);
        // Forward trace preferring pair, then delete, then insert: the
        // longest common prefix is matched first and ties break leftmost.
        while x < n || y < m {
            let here = dp[x * w + y];
            if x < n && y < m && here == self.cost(ac[x], bc[y]) + dp[(x + 1) * w + y + 1] {
                p1.push(x);
                p2.push(y);
                self.emit(ac[x], bc[y], p1, p2, out);
                p1.pop();
                p2.pop();
                x += 1;
                y += 1;
            } else if x < n && here == gap(self.a.size[ac[x]]) + dp[(x + 1) * w + y] {
                p1.push(x);
                p2.push(y);
                out.push(record(p1, p2, Some(self.a.nodes[ac[x]]), None));
                p1.pop();
                p2.pop();
                x += 1;
            } else {
                p1.push(x);
                p2.push(y);
                out.push(record(p1, p2, None, Some(self.b.nodes[bc[y]])));
                p1.pop();
                p2.pop();
                y += 1;
            }
        }
    }
}

fn record(p1: &[usize], p2: &[usize], tau1: Option<&AstNode>, tau2: Option<&AstNode>) -> DiffRecord {
    let (path, counterpart) = if tau1.is_some() { (p1, p2) } else { (p2, p1) };
    DiffRecord {
        did: 0,
        pid1: String::new(),
        pid2: String::new(),
        path: DiffPath(path.to_vec()),
        counterpart: DiffPath(counterpart.to_vec()),
        tau1: tau1.cloned(),
        tau2: tau2.cloned(),
    }
}

/// Aligns two canonical trees. Pids are left empty; see
/// [`DiffTable::with_pids`].
pub fn align(p1: &AstNode, p2: &AstNode, catalog: &NodeCatalog) -> DiffTable {
    let mut al = Aligner::new(p1, p2, catalog);
    let mut out = Vec::new();
    al.emit(0, 0, &mut Vec::new(), &mut Vec::new(), &mut out);
    DiffTable::from_records("", "", out)
}

/// Optimal cost of the alignment `align` would return.
pub fn align_cost(p1: &AstNode, p2: &AstNode, catalog: &NodeCatalog) -> AlignCost {
    unpack(Aligner::new(p1, p2, catalog).cost(0, 0))
}
