//! Ordered top-down tree alignment and the diff table it produces.
//!
//! A mapping pairs the two roots, then recursively pairs children: slots of
//! ordinary nodes positionally, elements of list nodes by an order-preserving
//! sequence alignment. Nodes whose labels differ (or whose fixed arity
//! differs) are reported as one replacement of the whole subtree; list
//! elements left unpaired become deletions or insertions. Among all such
//! mappings we minimise the number of unmatched nodes first and the number of
//! records second, which is what makes `sales`→`costs` with `USA`→`EUR` report the
//! deepest differing subtrees rather than one replacement at the root.

mod align;
mod replay;

use serde::{Deserialize, Serialize};

use crate::ast::{unparse_fragment, AstNode, DiffPath, NodeCatalog};

pub use align::{align, align_cost, AlignCost};
pub use replay::replay;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiffKind {
    Replace,
    Delete,
    Insert,
}

/// One maximal unmatched subtree pair.
///
/// `path` follows the usual convention (source coordinates when `tau1` is
/// present, target coordinates for insertions); `counterpart` is the same
/// position expressed in the other tree, which lets callers lift a record to
/// a common ancestor on both sides and reverse a table exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiffRecord {
    pub did: usize,
    pub pid1: String,
    pub pid2: String,
    pub path: DiffPath,
    pub counterpart: DiffPath,
    pub tau1: Option<AstNode>,
    pub tau2: Option<AstNode>,
}

impl DiffRecord {
    pub fn kind(&self) -> DiffKind {
        match (&self.tau1, &self.tau2) {
            (Some(_), Some(_)) => DiffKind::Replace,
            (Some(_), None) => DiffKind::Delete,
            _ => DiffKind::Insert,
        }
    }

    /// Position of the record in the first tree's coordinates.
    pub fn path1(&self) -> &DiffPath {
        if self.tau1.is_some() {
            &self.path
        } else {
            &self.counterpart
        }
    }

    /// Position of the record in the second tree's coordinates.
    pub fn path2(&self) -> &DiffPath {
        match self.kind() {
            DiffKind::Replace | DiffKind::Delete => &self.counterpart,
            DiffKind::Insert => &self.path,
        }
    }

    fn sort_key(&self) -> (&DiffPath, DiffKind) {
        (&self.path, self.kind())
    }
}

/// Differences between one ordered pair of queries, in preorder of `path`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffTable {
    pub pid1: String,
    pub pid2: String,
    pub records: Vec<DiffRecord>,
}

impl DiffTable {
    pub(crate) fn from_records(pid1: &str, pid2: &str, mut records: Vec<DiffRecord>) -> Self {
        records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        for (i, r) in records.iter_mut().enumerate() {
            r.did = i;
            r.pid1 = pid1.to_string();
            r.pid2 = pid2.to_string();
        }
        DiffTable { pid1: pid1.to_string(), pid2: pid2.to_string(), records }
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// The same differences seen from the other side: taus swap and
    /// insertions become deletions and vice versa.
    pub fn reversed(&self) -> DiffTable {
        let records = self
            .records
            .iter()
            .map(|r| {
                let (path, counterpart) = match r.kind() {
                    DiffKind::Replace => (r.counterpart.clone(), r.path.clone()),
                    DiffKind::Delete | DiffKind::Insert => (r.path.clone(), r.counterpart.clone()),
                };
                DiffRecord {
                    did: 0,
                    pid1: String::new(),
                    pid2: String::new(),
                    path,
                    counterpart,
                    tau1: r.tau2.clone(),
                    tau2: r.tau1.clone(),
                }
            })
            .collect();
        DiffTable::from_records(&self.pid2, &self.pid1, records)
    }

    pub fn with_pids(mut self, pid1: &str, pid2: &str) -> Self {
        self.pid1 = pid1.to_string();
        self.pid2 = pid2.to_string();
        for r in &mut self.records {
            r.pid1 = pid1.to_string();
            r.pid2 = pid2.to_string();
        }
        self
    }
}

#[derive(Serialize)]
struct DebugRecord<'a> {
    did: usize,
    pid1: &'a str,
    pid2: &'a str,
    path: String,
    tau1: Option<String>,
    tau2: Option<String>,
    tau1_node: Option<String>,
    tau2_node: Option<String>,
}

/// Pretty JSON used by the `diff` subcommand: one object per record with the
/// path as `i/j/k` and each subtree both unparsed and in compact node form.
pub fn debug_json(table: &DiffTable, catalog: &NodeCatalog) -> String {
    let render = |t: &Option<AstNode>| t.as_ref().map(|n| unparse_fragment(n, catalog).unwrap_or_else(|_| n.label()));
    let recs: Vec<DebugRecord> = table
        .records
        .iter()
        .map(|r| DebugRecord {
            did: r.did,
            pid1: &r.pid1,
            pid2: &r.pid2,
            path: r.path.to_string(),
            tau1: render(&r.tau1),
            tau2: render(&r.tau2),
            tau1_node: r.tau1.as_ref().map(AstNode::label),
            tau2_node: r.tau2.as_ref().map(AstNode::label),
        })
        .collect();
    serde_json::to_string_pretty(&recs).expect("diff records serialize")
}
