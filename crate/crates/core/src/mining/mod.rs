//! Interaction mining: pick query pairs, diff them, run the PILang
//! statements and assemble the labeled multigraph, with the clique and
//! template shortcuts that avoid most of the pairwise work.

pub mod clique;
mod collection;
pub mod templates;

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{parse_query, AstError, AstNode, DiffPath, NodeCatalog, Template, Value, SQL_SUBSET};
use crate::diff::{align, DiffTable};
use crate::log::QueryEntry;
use crate::pilang::{eval_statement, is_transitive, lift, parse_one, MatchRecord, MatchTable, PilangError, Statement};

pub use clique::{clique_detect, CliqueError};
pub use collection::detect_collection_edge;
pub use templates::{extract_templates, literal_diff, TemplatedClique};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelKind {
    Replace,
    Insert,
    Delete,
    /// The whole target list of a collapsed multi-record match.
    Collection,
}

/// `(kind, path, τ2 template)`. Every primitive of τ2 is a parameter; the
/// edge carries the values. Insert paths are target coordinates, the others
/// source coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeLabel {
    pub kind: LabelKind,
    pub path: DiffPath,
    pub template: Option<Template>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeValue {
    Tuple(Vec<Value>),
    Set(Vec<Vec<Value>>),
}

/// One labeled edge of a transition.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Part {
    pub statement: usize,
    pub label: usize,
    pub value: EdgeValue,
}

/// All edges needed to turn `src` into `dst` under one explanation. Parallel
/// edges of one match form a super-edge: a transition is usable only when
/// every part is.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub src: usize,
    pub dst: usize,
    pub parts: Vec<Part>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clique {
    pub statement: usize,
    pub members: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphNode {
    pub pid: String,
    pub query: String,
    pub ast: AstNode,
    /// Nodes with equal ASTs share a class.
    pub class: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiningStats {
    pub queries: usize,
    pub pairs: usize,
    pub align_calls: usize,
    pub literal_diffs: usize,
    pub skipped_pairs: usize,
    pub eval_calls: usize,
    /// Pair comparisons made by clique detection.
    pub clique_probes: usize,
    pub cliques: usize,
    pub materialize_align_calls: usize,
    pub materialize_eval_calls: usize,
}

impl MiningStats {
    fn add(&mut self, o: &MiningStats) {
        self.align_calls += o.align_calls;
        self.literal_diffs += o.literal_diffs;
        self.skipped_pairs += o.skipped_pairs;
        self.eval_calls += o.eval_calls;
        self.clique_probes += o.clique_probes;
    }
}

#[derive(Clone, Debug)]
pub struct InteractionGraph {
    pub nodes: Vec<GraphNode>,
    pub statements: Vec<Statement>,
    pub labels: Vec<EdgeLabel>,
    pub transitions: Vec<Transition>,
    /// Matches of transitive statements kept as cliques; see
    /// [`InteractionGraph::materialize`].
    pub cliques: Vec<Clique>,
    pub stats: MiningStats,
    label_index: HashMap<EdgeLabel, usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMode {
    All,
    #[serde(rename = "seq")]
    Sequential,
}

/// `key=value` over `user`, `tstamp` or any extra metadata field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaFilter {
    pub key: String,
    pub value: String,
}

impl MetaFilter {
    pub fn accepts(&self, e: &QueryEntry) -> bool {
        let v = match self.key.as_str() {
            "user" => e.user.clone(),
            "tstamp" => e.tstamp.clone(),
            k => e.extra.get(k).map(|v| v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())),
        };
        v.as_deref() == Some(self.value.as_str())
    }
}

impl FromStr for MetaFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (k, v) = s.split_once('=').ok_or_else(|| format!("filter '{s}' is not key=value"))?;
        Ok(MetaFilter { key: k.trim().to_string(), value: v.trim().to_string() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairStrategy {
    pub mode: PairMode,
    pub filter: Option<MetaFilter>,
}

impl PairStrategy {
    pub fn all() -> Self {
        PairStrategy { mode: PairMode::All, filter: None }
    }

    pub fn sequential() -> Self {
        PairStrategy { mode: PairMode::Sequential, filter: None }
    }
}

/// Unordered index pairs over the entries that pass the filter: every pair
/// (i < j), or each entry with its successor in log order.
pub fn select_pairs(log: &[QueryEntry], strategy: &PairStrategy) -> Vec<(usize, usize)> {
    let kept: Vec<usize> = (0..log.len()).filter(|&i| strategy.filter.as_ref().is_none_or(|f| f.accepts(&log[i]))).collect();
    match strategy.mode {
        PairMode::All => kept.iter().enumerate().flat_map(|(x, &i)| kept[x + 1..].iter().map(move |&j| (i, j))).collect(),
        PairMode::Sequential => kept.windows(2).map(|w| (w[0], w[1])).collect(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MineOpts {
    /// Route transitive statements through clique detection (all-pairs only).
    pub clique: bool,
    /// Diff same-template pairs from literal vectors and skip pairs of
    /// templates whose differences no statement can reach.
    pub template: bool,
    /// Accept a pair that no single statement explains when the statements
    /// together cover all of its differences.
    pub compose: bool,
}

impl FromStr for MineOpts {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (clique, template) = match s {
            "none" => (false, false),
            "clique" => (true, false),
            "template" => (false, true),
            "both" => (true, true),
            other => return Err(format!("unknown optimization '{other}' (none|clique|template|both)")),
        };
        Ok(MineOpts { clique, template, compose: false })
    }
}

#[derive(Debug, Error)]
pub enum MineError {
    #[error(transparent)]
    Clique(#[from] CliqueError),
    #[error("graph: {0}")]
    Format(String),
    #[error("statement {name}: {source}")]
    Statement { name: String, source: PilangError },
    #[error("node {pid}: {source}")]
    Query { pid: String, source: AstError },
}

/// Template bookkeeping shared by the workers.
struct TemplateIndex {
    of: Vec<usize>,
    member: Vec<usize>,
    cliques: Vec<TemplatedClique>,
    /// touches[c][s]: some variable path of clique c is reachable by statement s
    touches: Vec<Vec<bool>>,
    /// bitmask of top-level slots per statement
    reach: Vec<u8>,
}

impl TemplateIndex {
    fn new(nodes: &[GraphNode], stmts: &[Statement], catalog: &NodeCatalog) -> Self {
        let entries: Vec<QueryEntry> = nodes
            .iter()
            .map(|n| QueryEntry { pid: n.pid.clone(), source: String::new(), ast: n.ast.clone(), tstamp: None, user: None, extra: Default::default() })
            .collect();
        let cliques = extract_templates(&entries, catalog);
        let mut of = vec![0; nodes.len()];
        let mut member = vec![0; nodes.len()];
        let pos: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (n.pid.as_str(), i)).collect();
        for (c, cl) in cliques.iter().enumerate() {
            for (m, (pid, _)) in cl.members.iter().enumerate() {
                of[pos[pid.as_str()]] = c;
                member[pos[pid.as_str()]] = m;
            }
        }
        let touches = cliques
            .iter()
            .map(|cl| {
                let rep = cl.rebind(0);
                stmts.iter().map(|s| templates::statement_touches(s, &rep, &cl.var_paths, catalog)).collect()
            })
            .collect();
        let reach = stmts
            .iter()
            .map(|s| match templates::reachable_slots(s) {
                None => u8::MAX,
                Some(v) => v.iter().fold(0u8, |m, &i| m | (1 << i)),
            })
            .collect();
        TemplateIndex { of, member, cliques, touches, reach }
    }

    fn slot_mask(&self, i: usize, j: usize) -> u8 {
        let (a, b) = (&self.cliques[self.of[i]].template_ast, &self.cliques[self.of[j]].template_ast);
        (0..a.children.len().max(b.children.len()))
            .filter(|&k| a.children.get(k) != b.children.get(k))
            .fold(0u8, |m, k| m | (1 << k.min(7)))
    }
}

struct Miner<'a> {
    nodes: &'a [GraphNode],
    stmts: &'a [Statement],
    catalog: &'a NodeCatalog,
    tmpl: Option<TemplateIndex>,
}

enum Diff {
    Table(DiffTable),
    Identical,
    Skipped,
}

impl Miner<'_> {
    /// Diff for the pair, or a proof that none of `wanted` can match it.
    /// Returns the statements worth evaluating.
    fn diff(&self, i: usize, j: usize, wanted: &[usize], union: bool, st: &mut MiningStats) -> (Diff, Vec<usize>) {
        let (a, b) = (&self.nodes[i], &self.nodes[j]);
        if a.class == b.class {
            return (Diff::Identical, vec![]);
        }
        if let Some(t) = &self.tmpl {
            if t.of[i] == t.of[j] {
                let cl = &t.cliques[t.of[i]];
                let keep: Vec<usize> = wanted.iter().copied().filter(|&s| t.touches[t.of[i]][s]).collect();
                if keep.is_empty() {
                    st.skipped_pairs += 1;
                    return (Diff::Skipped, keep);
                }
                st.literal_diffs += 1;
                let (va, vb) = (&cl.members[t.member[i]].1, &cl.members[t.member[j]].1);
                return (Diff::Table(literal_diff(&a.ast, &b.ast, va, vb, &cl.var_paths, &a.pid, &b.pid)), keep);
            }
            let mask = t.slot_mask(i, j);
            let keep: Vec<usize> = wanted.iter().copied().filter(|&s| union || mask & !t.reach[s] == 0).collect();
            let reachable = if union { keep.iter().fold(0u8, |m, &s| m | t.reach[s]) & mask == mask } else { !keep.is_empty() };
            if !reachable {
                st.skipped_pairs += 1;
                return (Diff::Skipped, vec![]);
            }
            st.align_calls += 1;
            return (Diff::Table(align(&a.ast, &b.ast, self.catalog).with_pids(&a.pid, &b.pid)), keep);
        }
        st.align_calls += 1;
        (Diff::Table(align(&a.ast, &b.ast, self.catalog).with_pids(&a.pid, &b.pid)), wanted.to_vec())
    }

    fn eval(&self, s: usize, t: &DiffTable, i: usize, j: usize, st: &mut MiningStats) -> MatchTable {
        st.eval_calls += 1;
        eval_statement(&self.stmts[s], t, &self.nodes[i].ast, &self.nodes[j].ast, self.catalog)
    }

    /// The symmetric relation used by clique detection.
    fn related(&self, s: usize, i: usize, j: usize, st: &mut MiningStats) -> bool {
        st.clique_probes += 1;
        match self.diff(i, j, &[s], false, st) {
            (Diff::Identical, _) => true,
            (Diff::Skipped, _) => false,
            (Diff::Table(t), keep) => {
                !keep.is_empty() && (self.eval(s, &t, i, j, st).is_match() || self.eval(s, &t.reversed(), j, i, st).is_match())
            }
        }
    }

    /// Transitions for both orientations of one unordered pair.
    fn pair(&self, i: usize, j: usize, direct: &[usize], compose: bool, st: &mut MiningStats) -> Vec<RawTransition> {
        let all: Vec<usize> = (0..self.stmts.len()).collect();
        let wanted = if compose { &all[..] } else { direct };
        let (t, keep) = match self.diff(i, j, wanted, compose, st) {
            (Diff::Table(t), keep) => (t, keep),
            _ => return vec![],
        };
        let rev = t.reversed();
        let mut out = Vec::new();
        for (tab, src, dst) in [(&t, i, j), (&rev, j, i)] {
            let mut full = false;
            for &s in &keep {
                let m = self.eval(s, tab, src, dst, st);
                if m.is_match() {
                    full = true;
                    if direct.contains(&s) {
                        out.push(self.raw(src, dst, vec![(s, m)]));
                    }
                }
            }
            if compose && !full {
                if let Some(parts) = self.compose(tab, src, dst, &keep, st) {
                    out.push(self.raw(src, dst, parts));
                }
            }
        }
        out
    }

    /// Each statement restricted to the records it can lift; accepted when
    /// the partial matches jointly cover the table.
    fn compose(&self, t: &DiffTable, i: usize, j: usize, keep: &[usize], st: &mut MiningStats) -> Option<Vec<(usize, MatchTable)>> {
        let (a, b) = (&self.nodes[i].ast, &self.nodes[j].ast);
        let mut covered = vec![false; t.len()];
        let mut parts = Vec::new();
        for &s in keep {
            let stmt = &self.stmts[s];
            let records: Vec<_> = t
                .records
                .iter()
                .filter(|r| stmt.bindings.iter().any(|bd| lift(&bd.path, r, a, b, self.catalog).is_some()))
                .cloned()
                .collect();
            if records.is_empty() {
                continue;
            }
            let sub = DiffTable { pid1: t.pid1.clone(), pid2: t.pid2.clone(), records };
            let m = self.eval(s, &sub, i, j, st);
            for r in &m.records {
                covered[r.did] = true;
            }
            if m.is_match() {
                parts.push((s, m));
            }
        }
        (parts.len() > 1 && covered.iter().all(|c| *c)).then_some(parts)
    }

    fn raw(&self, src: usize, dst: usize, tables: Vec<(usize, MatchTable)>) -> RawTransition {
        let (a, b) = (&self.nodes[src].ast, &self.nodes[dst].ast);
        let mut parts = Vec::new();
        for (s, m) in tables {
            match detect_collection_edge(&m, a, b, self.catalog) {
                Some((label, value)) => parts.push((s, label, value)),
                None => parts.extend(m.records.iter().map(|r| {
                    let (label, value) = label_of(r);
                    (s, label, value)
                })),
            }
        }
        let mut seen = BTreeSet::new();
        parts.retain(|p| seen.insert((p.1.clone(), p.2.clone())));
        RawTransition { src, dst, parts }
    }
}

struct RawTransition {
    src: usize,
    dst: usize,
    parts: Vec<(usize, EdgeLabel, EdgeValue)>,
}

pub fn label_of(r: &MatchRecord) -> (EdgeLabel, EdgeValue) {
    let kind = match (&r.tau1, &r.tau2) {
        (Some(_), Some(_)) => LabelKind::Replace,
        (Some(_), None) => LabelKind::Delete,
        _ => LabelKind::Insert,
    };
    let (template, values) = match &r.tau2 {
        Some(t) => {
            let (tp, v) = Template::parameterize(t);
            (Some(tp), v)
        }
        None => (None, Vec::new()),
    };
    (EdgeLabel { kind, path: r.path.clone(), template }, EdgeValue::Tuple(values))
}

fn graph_nodes(log: &[QueryEntry]) -> Vec<GraphNode> {
    let mut classes: HashMap<&AstNode, usize> = HashMap::new();
    log.iter()
        .map(|e| {
            let n = classes.len();
            let class = *classes.entry(&e.ast).or_insert(n);
            GraphNode { pid: e.pid.clone(), query: e.source.clone(), ast: e.ast.clone(), class }
        })
        .collect()
}

const CHUNK: usize = 4096;

/// Mines the interaction graph. Whatever the options, the labeled edges
/// obtainable from the result (after [`InteractionGraph::materialize`]) are
/// those of aligning every selected pair and evaluating every statement on
/// both orientations.
pub fn build_graph(
    log: &[QueryEntry],
    statements: &[Statement],
    strategy: &PairStrategy,
    opts: MineOpts,
    catalog: &NodeCatalog,
) -> Result<InteractionGraph, MineError> {
    let kept: Vec<QueryEntry> = log.iter().filter(|e| strategy.filter.as_ref().is_none_or(|f| f.accepts(e))).cloned().collect();
    let nodes = graph_nodes(&kept);
    let local = PairStrategy { mode: strategy.mode, filter: None };
    let pairs = select_pairs(&kept, &local);
    let use_cliques = opts.clique && strategy.mode == PairMode::All;
    let (routed, direct): (Vec<usize>, Vec<usize>) = (0..statements.len()).partition(|&s| use_cliques && is_transitive(&statements[s]));
    let miner = Miner { nodes: &nodes, stmts: statements, catalog, tmpl: opts.template.then(|| TemplateIndex::new(&nodes, statements, catalog)) };
    let mut g = InteractionGraph::empty(nodes.clone(), statements.to_vec());
    g.stats.queries = nodes.len();
    g.stats.pairs = pairs.len();

    let mut st = MiningStats::default();
    for &s in &routed {
        let members: Vec<usize> = (0..nodes.len()).collect();
        let found = clique_detect(&statements[s], &members, |a, b| miner.related(s, a, b, &mut st))?;
        g.cliques.extend(found.into_iter().filter(|c| c.len() > 1).map(|members| Clique { statement: s, members }));
    }
    g.stats.cliques = g.cliques.len();

    if !direct.is_empty() || opts.compose {
        for chunk in pairs.chunks(CHUNK) {
            let results: Vec<(Vec<RawTransition>, MiningStats)> = chunk
                .par_iter()
                .map(|&(i, j)| {
                    let mut local = MiningStats::default();
                    let t = miner.pair(i, j, &direct, opts.compose, &mut local);
                    (t, local)
                })
                .collect();
            for (ts, s) in results {
                st.add(&s);
                for t in ts {
                    g.push(t);
                }
            }
        }
    }
    g.stats.add(&st);
    tracing::info!(pairs = g.stats.pairs, align = g.stats.align_calls, evals = g.stats.eval_calls, cliques = g.stats.cliques, "mined");
    Ok(g)
}

impl InteractionGraph {
    fn empty(nodes: Vec<GraphNode>, statements: Vec<Statement>) -> Self {
        InteractionGraph {
            nodes,
            statements,
            labels: Vec::new(),
            transitions: Vec::new(),
            cliques: Vec::new(),
            stats: MiningStats::default(),
            label_index: HashMap::new(),
        }
    }

    fn intern(&mut self, l: EdgeLabel) -> usize {
        if let Some(&i) = self.label_index.get(&l) {
            return i;
        }
        self.labels.push(l.clone());
        self.label_index.insert(l, self.labels.len() - 1);
        self.labels.len() - 1
    }

    fn push(&mut self, t: RawTransition) {
        let parts = t.parts.into_iter().map(|(statement, l, value)| Part { statement, label: self.intern(l), value }).collect();
        self.transitions.push(Transition { src: t.src, dst: t.dst, parts });
    }

    pub fn node_index(&self, pid: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.pid == pid)
    }

    /// Turns stored cliques into ordinary transitions by evaluating their
    /// statement on every ordered member pair with distinct ASTs.
    pub fn materialize(&mut self, catalog: &NodeCatalog) {
        if self.cliques.is_empty() {
            return;
        }
        let cliques = std::mem::take(&mut self.cliques);
        let nodes = std::mem::take(&mut self.nodes);
        let stmts = std::mem::take(&mut self.statements);
        {
            let miner = Miner { nodes: &nodes, stmts: &stmts, catalog, tmpl: Some(TemplateIndex::new(&nodes, &stmts, catalog)) };
            let mut st = MiningStats::default();
            for c in &cliques {
                let pairs: Vec<(usize, usize)> =
                    c.members.iter().enumerate().flat_map(|(x, &i)| c.members[x + 1..].iter().map(move |&j| (i, j))).collect();
                for chunk in pairs.chunks(CHUNK) {
                    let results: Vec<(Vec<RawTransition>, MiningStats)> = chunk
                        .par_iter()
                        .map(|&(i, j)| {
                            let mut local = MiningStats::default();
                            (miner.pair(i, j, &[c.statement], false, &mut local), local)
                        })
                        .collect();
                    for (ts, s) in results {
                        st.add(&s);
                        for t in ts {
                            self.push(t);
                        }
                    }
                }
            }
            self.stats.materialize_align_calls += st.align_calls;
            self.stats.materialize_eval_calls += st.eval_calls;
        }
        self.nodes = nodes;
        self.statements = stmts;
    }

    /// Order-independent fingerprints of every `(src, dst, statement,
    /// label, value)` edge, sorted; equal sets give equal vectors.
    pub fn edge_fingerprints(&self) -> Vec<u128> {
        let label_hash: Vec<u64> = self.labels.iter().map(|l| hash_of(&(0u8, l))).collect();
        let label_hash = &label_hash;
        let mut v: Vec<u128> = self
            .transitions
            .iter()
            .flat_map(|t| {
                t.parts.iter().map(move |p| {
                    let key = (&self.nodes[t.src].pid, &self.nodes[t.dst].pid, &self.statements[p.statement].name, label_hash[p.label], &p.value);
                    ((hash_of(&(1u8, &key)) as u128) << 64) | hash_of(&(2u8, &key)) as u128
                })
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// The same set spelled out; meant for small graphs.
    pub fn labeled_edges(&self) -> BTreeSet<(String, String, String, EdgeLabel, EdgeValue)> {
        self.transitions
            .iter()
            .flat_map(|t| {
                t.parts.iter().map(move |p| {
                    (
                        self.nodes[t.src].pid.clone(),
                        self.nodes[t.dst].pid.clone(),
                        self.statements[p.statement].name.clone(),
                        self.labels[p.label].clone(),
                        p.value.clone(),
                    )
                })
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.transitions.iter().map(|t| t.parts.len()).sum()
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            nodes: self.nodes.iter().map(|n| NodeJson { pid: n.pid.clone(), query: n.query.clone(), class: n.class }).collect(),
            statements: self.statements.iter().map(|s| StatementJson { name: s.name.clone(), text: s.to_string() }).collect(),
            edges: self
                .transitions
                .iter()
                .enumerate()
                .flat_map(|(k, t)| {
                    t.parts.iter().map(move |p| EdgeJson {
                        transition: k,
                        src: self.nodes[t.src].pid.clone(),
                        dst: self.nodes[t.dst].pid.clone(),
                        statement: self.statements[p.statement].name.clone(),
                        label: self.labels[p.label].clone(),
                        collection: self.labels[p.label].kind == LabelKind::Collection,
                        value: p.value.clone(),
                    })
                })
                .collect(),
            cliques: self
                .cliques
                .iter()
                .map(|c| CliqueJson {
                    statement: self.statements[c.statement].name.clone(),
                    members: c.members.iter().map(|&m| self.nodes[m].pid.clone()).collect(),
                })
                .collect(),
            stats: self.stats.clone(),
            log_size: None,
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Self, MineError> {
        let statements = j
            .statements
            .iter()
            .map(|s| parse_one(&s.text, 1).map_err(|source| MineError::Statement { name: s.name.clone(), source }))
            .collect::<Result<Vec<_>, _>>()?;
        let nodes = j
            .nodes
            .iter()
            .map(|n| {
                let ast = parse_query(&n.query, SQL_SUBSET).map_err(|source| MineError::Query { pid: n.pid.clone(), source })?;
                Ok(GraphNode { pid: n.pid.clone(), query: n.query.clone(), ast, class: n.class })
            })
            .collect::<Result<Vec<_>, MineError>>()?;
        let mut g = InteractionGraph::empty(nodes, statements);
        let pid: HashMap<String, usize> = g.nodes.iter().enumerate().map(|(i, n)| (n.pid.clone(), i)).collect();
        let stmt: HashMap<String, usize> = g.statements.iter().enumerate().map(|(i, s)| (s.name.clone(), i)).collect();
        let find = |m: &HashMap<String, usize>, k: &str| m.get(k).copied().ok_or_else(|| MineError::Format(format!("unknown reference '{k}'")));
        let mut current: Option<(usize, RawTransition)> = None;
        for e in &j.edges {
            let part = (find(&stmt, &e.statement)?, e.label.clone(), e.value.clone());
            match &mut current {
                Some((k, t)) if *k == e.transition => t.parts.push(part),
                _ => {
                    if let Some((_, t)) = current.take() {
                        g.push(t);
                    }
                    current = Some((e.transition, RawTransition { src: find(&pid, &e.src)?, dst: find(&pid, &e.dst)?, parts: vec![part] }));
                }
            }
        }
        if let Some((_, t)) = current {
            g.push(t);
        }
        for c in &j.cliques {
            let members = c.members.iter().map(|m| find(&pid, m)).collect::<Result<_, _>>()?;
            g.cliques.push(Clique { statement: find(&stmt, &c.statement)?, members });
        }
        g.stats = j.stats.clone();
        Ok(g)
    }
}

fn hash_of<T: Hash>(t: &T) -> u64 {
    let mut h = DefaultHasher::new();
    t.hash(&mut h);
    h.finish()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeJson {
    pub pid: String,
    pub query: String,
    pub class: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatementJson {
    pub name: String,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub transition: usize,
    pub src: String,
    pub dst: String,
    pub statement: String,
    pub label: EdgeLabel,
    pub value: EdgeValue,
    pub collection: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CliqueJson {
    pub statement: String,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub nodes: Vec<NodeJson>,
    pub statements: Vec<StatementJson>,
    pub edges: Vec<EdgeJson>,
    pub cliques: Vec<CliqueJson>,
    pub stats: MiningStats,
    /// Log entries including unparseable ones, when known; coverage is
    /// measured against it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_size: Option<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::sql_catalog;
    use crate::pilang::parse_pilang;

    fn log(qs: &[&str]) -> Vec<QueryEntry> {
        qs.iter().enumerate().map(|(i, q)| QueryEntry::parse(format!("q{}", i + 1), *q).unwrap()).collect()
    }

    #[test]
    fn pair_selection() {
        let mut l = log(&["SELECT a FROM t", "SELECT b FROM t", "SELECT c FROM t", "SELECT d FROM t"]);
        assert_eq!(select_pairs(&l, &PairStrategy::all()).len(), 6);
        assert_eq!(select_pairs(&l, &PairStrategy::sequential()), vec![(0, 1), (1, 2), (2, 3)]);
        l[0].user = Some("alice".into());
        l[2].user = Some("alice".into());
        let f = PairStrategy { mode: PairMode::All, filter: Some("user=alice".parse().unwrap()) };
        assert_eq!(select_pairs(&l, &f), vec![(0, 2)]);
    }

    #[test]
    fn sales_pair_with_literal_only_variant() {
        let l = log(&["SELECT date, sales FROM sales WHERE cty = 'USA'", "SELECT date, sales FROM sales WHERE cty = 'EUR'"]);
        let s = parse_pilang("FROM Where/BiExpr AS T\nWHERE T.τ.op = '=' AND T.τ/*[0].name = 'cty'\nMATCH change-where-equal(T)").unwrap();
        let g = build_graph(&l, &s, &PairStrategy::sequential(), MineOpts::default(), sql_catalog()).unwrap();
        assert_eq!(g.transitions.len(), 2, "one per orientation");
        let e = &g.transitions[0];
        assert_eq!((e.src, e.dst, e.parts.len()), (0, 1, 1));
        assert_eq!(g.labels[e.parts[0].label].path.to_string(), "2/0/0");
        assert_eq!(e.parts[0].value, EdgeValue::Tuple(vec!["=".into(), "cty".into(), "EUR".into()]));
        assert_eq!(build_graph(&l, &[], &PairStrategy::all(), MineOpts::default(), sql_catalog()).unwrap().edge_count(), 0);
    }

    #[test]
    fn options_do_not_change_edges() {
        let l = crate::gen::generate_templated_log(40, 2);
        let s = parse_pilang(crate::gen::TEMPLATED_STATEMENTS).unwrap();
        let run = |o: &str| build_graph(&l, &s, &PairStrategy::all(), o.parse().unwrap(), sql_catalog()).unwrap();
        let base = run("none");
        let mut stats = vec![];
        for o in ["clique", "template", "both"] {
            let mut g = run(o);
            stats.push(g.stats.clone());
            g.materialize(sql_catalog());
            assert_eq!(g.labeled_edges(), base.labeled_edges(), "{o}");
        }
        let [clique, template, both] = &stats[..] else { unreachable!() };
        assert!(template.align_calls <= base.stats.align_calls && both.align_calls <= clique.align_calls);
        assert!(clique.eval_calls <= base.stats.eval_calls && both.eval_calls <= template.eval_calls);
        assert!(both.align_calls * 10 <= base.stats.align_calls, "{both:?}");
    }

    #[test]
    fn json_round_trip() {
        let l = log(&["SELECT a FROM t GROUP BY a, b, c", "SELECT a FROM t GROUP BY a, d"]);
        let s = parse_pilang("FROM GroupBy/* AS T MATCH group(T)").unwrap();
        let g = build_graph(&l, &s, &PairStrategy::all(), MineOpts::default(), sql_catalog()).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.labels.iter().all(|l| l.kind == LabelKind::Collection));
        let j = g.to_json();
        let text = serde_json::to_string(&j).unwrap();
        let back = InteractionGraph::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.labeled_edges(), g.labeled_edges());
        assert_eq!(back.transitions, g.transitions);
    }

    #[test]
    fn composition_covers_sales_pair() {
        let l = log(&["SELECT date, sales FROM sales WHERE cty = 'USA'", "SELECT date, costs FROM sales WHERE cty = 'EUR'"]);
        let s = parse_pilang("FROM Project//* AS T MATCH project-change(T)\n\nFROM Where/BiExpr/* AS T MATCH literal-change(T)").unwrap();
        let plain = build_graph(&l, &s, &PairStrategy::all(), MineOpts::default(), sql_catalog()).unwrap();
        assert_eq!(plain.edge_count(), 0);
        let opts = MineOpts { compose: true, ..Default::default() };
        let g = build_graph(&l, &s, &PairStrategy::all(), opts, sql_catalog()).unwrap();
        assert_eq!(g.transitions.len(), 2);
        assert_eq!(g.transitions[0].parts.len(), 2);
        let mut stmts: Vec<usize> = g.transitions[0].parts.iter().map(|p| p.statement).collect();
        stmts.sort();
        assert_eq!(stmts, vec![0, 1]);
    }
}
