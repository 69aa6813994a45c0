//! Interface synthesis: widgets over labeled edges, closures, and the
//! greedy merge heuristic.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{AstNode, DiffPath, Template, Value};
use crate::mining::{EdgeLabel, EdgeValue, InteractionGraph, LabelKind};

pub mod widgets;

pub use widgets::{candidate_widgets, extract_template_function, widget_cost, CandidateSet, DomainShape, WidgetType, COST_FAMILIES};

use widgets::{project, varying};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("expected {expected} cost weights, got {found}")]
    WeightMismatch { expected: usize, found: usize },
    #[error("no widget type can express the domain")]
    NoCandidate,
    #[error("subtrees span several templates")]
    HeterogeneousGroup,
    #[error("the interaction graph has no queries")]
    EmptyGraph,
    #[error("coverage {achieved:.4} is below the target {gamma}")]
    CoverageUnreachable { achieved: f64, gamma: f64 },
}

const EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SynthOpts {
    pub types: Vec<WidgetType>,
    /// One weight per entry of [`COST_FAMILIES`].
    pub alphas: Vec<f64>,
    pub gamma: f64,
    pub c0: f64,
    /// Size of the log coverage is measured against; defaults to the graph's
    /// node count. Queries that failed to parse count here but can never be
    /// covered.
    pub log_size: Option<usize>,
}

impl Default for SynthOpts {
    fn default() -> Self {
        SynthOpts { types: WidgetType::ALL.to_vec(), alphas: vec![1.0, 1.0], gamma: 1.0, c0: 1.0, log_size: None }
    }
}

/// A value a widget can be set to: one tuple, or a set of element tuples
/// for collection widgets.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WidgetValue {
    Tuple(Vec<Value>),
    Set(Vec<Vec<Value>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthWidget {
    pub label: EdgeLabel,
    /// Parameters of the label template the widget controls; the others are
    /// bound into `template`.
    pub k: Vec<usize>,
    pub widget_type: WidgetType,
    pub candidates: Vec<WidgetType>,
    /// f_w: instantiated with a domain tuple it yields the subtree to put
    /// at the label's path (a list element for collection widgets).
    pub template: Option<Template>,
    pub domain: Vec<Vec<Value>>,
    pub cost: f64,
}

impl SynthWidget {
    /// The widget value an edge value corresponds to.
    pub fn project(&self, v: &EdgeValue) -> WidgetValue {
        match v {
            EdgeValue::Tuple(t) => WidgetValue::Tuple(project(t, &self.k)),
            EdgeValue::Set(items) => WidgetValue::Set(items.clone()),
        }
    }

    pub fn admits(&self, v: &WidgetValue) -> bool {
        let has = |t: &Vec<Value>| self.domain.binary_search(t).is_ok();
        match v {
            WidgetValue::Tuple(t) if self.label.kind == LabelKind::Collection => t.is_empty(),
            WidgetValue::Tuple(t) => has(t),
            WidgetValue::Set(items) => self.label.kind == LabelKind::Collection && items.iter().all(has),
        }
    }
}

/// How a covered query is reached from the interface's initial query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reach {
    Initial,
    /// Setting these widgets, in order, on `from` yields the query.
    Edge { from: usize, transition: usize, steps: Vec<(usize, WidgetValue)> },
    /// Same AST as an already reached query.
    Identical { to: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthInterface {
    pub initial: usize,
    pub widgets: Vec<SynthWidget>,
    /// Node indices, ascending.
    pub closure: Vec<usize>,
    /// C_I, without c0.
    pub cost: f64,
    /// BFS order.
    pub trace: Vec<(usize, Reach)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceSet {
    pub interfaces: Vec<SynthInterface>,
    pub alphas: Vec<f64>,
    pub c0: f64,
    pub gamma: f64,
    pub covered: usize,
    pub log_size: usize,
    pub coverage: f64,
    pub merges: usize,
}

impl InterfaceSet {
    /// Σ (c0 + C_I).
    pub fn cost(&self) -> f64 {
        set_cost(self.interfaces.iter().map(|i| i.cost), self.c0)
    }

    pub fn widget_count(&self) -> usize {
        self.interfaces.iter().map(|i| i.widgets.len()).sum()
    }

    /// Err when the coverage target was not met; the set is still usable.
    pub fn check_coverage(&self) -> Result<(), SynthError> {
        if self.coverage + EPS < self.gamma {
            return Err(SynthError::CoverageUnreachable { achieved: self.coverage, gamma: self.gamma });
        }
        Ok(())
    }
}

pub fn interface_cost(widget_costs: impl IntoIterator<Item = f64>) -> f64 {
    widget_costs.into_iter().sum()
}

pub fn set_cost(interface_costs: impl IntoIterator<Item = f64>, c0: f64) -> f64 {
    interface_costs.into_iter().map(|c| c0 + c).sum()
}

/// Queries reachable from `initial` over transitions every part of which
/// some widget expresses: same label, value in the domain. Queries with the
/// same AST as a reached one are reached too.
pub fn closure(graph: &InteractionGraph, initial: usize, widgets: &[SynthWidget]) -> Vec<usize> {
    let by_label: HashMap<&EdgeLabel, &SynthWidget> = widgets.iter().map(|w| (&w.label, w)).collect();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); graph.nodes.len()];
    for (i, t) in graph.transitions.iter().enumerate() {
        out[t.src].push(i);
    }
    let mut seen = vec![false; graph.nodes.len()];
    let mut queue = VecDeque::from([initial]);
    while let Some(u) = queue.pop_front() {
        if seen[u] {
            continue;
        }
        for (v, n) in graph.nodes.iter().enumerate() {
            if n.class == graph.nodes[u].class {
                seen[v] = true;
            }
        }
        for &ti in &out[u] {
            let t = &graph.transitions[ti];
            let ok = t.parts.iter().all(|p| by_label.get(&graph.labels[p.label]).is_some_and(|w| w.admits(&w.project(&p.value))));
            if ok && !seen[t.dst] {
                queue.push_back(t.dst);
            }
        }
    }
    (0..seen.len()).filter(|&i| seen[i]).collect()
}

/// Label `l` as the search sees it: values interned per label after
/// projection onto the template group's varying parameters.
struct LabelModel {
    k: Vec<usize>,
    /// Values of the bound parameters; `None` for collections and deletes.
    bound: Option<Vec<Value>>,
    template: Option<Template>,
    collection: bool,
    arity: usize,
    values: Vec<Vec<Value>>,
    index: HashMap<Vec<Value>, u32>,
}

impl LabelModel {
    fn intern(&mut self, t: Vec<Value>) -> u32 {
        if let Some(&i) = self.index.get(&t) {
            return i;
        }
        self.values.push(t.clone());
        self.index.insert(t, self.values.len() as u32 - 1);
        self.values.len() as u32 - 1
    }
}

struct PartIds {
    label: usize,
    /// What the edge needs in the domain.
    dst: Vec<u32>,
    /// The source side's value, when it has the label's shape; merging adds
    /// it so the interface can also express the way back.
    src: Vec<u32>,
}

type Widgets = BTreeMap<usize, Vec<u32>>;

#[derive(Clone)]
struct Iface {
    p0: usize,
    widgets: Widgets,
    cost: f64,
    closure: Vec<usize>,
}

struct Model<'g> {
    g: &'g InteractionGraph,
    opts: &'g SynthOpts,
    labels: Vec<LabelModel>,
    parts: Vec<Vec<PartIds>>,
    out: Vec<Vec<usize>>,
    /// The value a node shows for a label's widget: the widget's state when
    /// that node is the initial query.
    initial: HashMap<(usize, usize), Vec<u32>>,
    /// The same statement's transition in the other direction, if mined.
    reverse: Vec<Option<usize>>,
    classes: Vec<Vec<usize>>,
}

fn src_value(label: &EdgeLabel, src: &AstNode) -> Option<EdgeValue> {
    let node = src.subtree_at(&label.path).ok()?;
    let want = label.template.as_ref()?;
    match label.kind {
        LabelKind::Replace => {
            let (t, v) = Template::parameterize(node);
            (&t == want).then_some(EdgeValue::Tuple(v))
        }
        LabelKind::Collection => node
            .children
            .iter()
            .map(|c| {
                let (t, v) = Template::parameterize(c);
                (&t == want).then_some(v)
            })
            .collect::<Option<Vec<_>>>()
            .map(EdgeValue::Set),
        _ => None,
    }
}

impl<'g> Model<'g> {
    fn new(g: &'g InteractionGraph, opts: &'g SynthOpts) -> Self {
        let srcs: Vec<Vec<Option<EdgeValue>>> = g
            .transitions
            .iter()
            .map(|t| t.parts.iter().map(|p| src_value(&g.labels[p.label], &g.nodes[t.src].ast)).collect())
            .collect();

        // K per template, over every tuple either side of an edge carries.
        let mut rows: HashMap<&Template, Vec<Vec<Value>>> = HashMap::new();
        for (t, ss) in g.transitions.iter().zip(&srcs) {
            for (p, s) in t.parts.iter().zip(ss) {
                let l = &g.labels[p.label];
                if l.kind == LabelKind::Collection {
                    continue;
                }
                if let Some(tp) = &l.template {
                    for v in [Some(&p.value), s.as_ref()].into_iter().flatten() {
                        if let EdgeValue::Tuple(v) = v {
                            rows.entry(tp).or_default().push(v.clone());
                        }
                    }
                }
            }
        }
        let ks: HashMap<&Template, Vec<usize>> = rows.iter().map(|(t, r)| (*t, varying(r))).collect();
        let mut labels: Vec<LabelModel> = g
            .labels
            .iter()
            .map(|l| {
                let collection = l.kind == LabelKind::Collection;
                let k = match &l.template {
                    Some(t) if collection => (0..t.param_count()).collect(),
                    Some(t) => ks.get(t).cloned().unwrap_or_default(),
                    None => Vec::new(),
                };
                let template = match &l.template {
                    Some(t) if !collection => Some(t.bind_except(&rows.get(t).map_or(vec![], |r| r[0].clone()), &k)),
                    t => t.clone(),
                };
                let arity = if collection { template.as_ref().map_or(0, Template::param_count) } else { k.len() };
                let bound = match &l.template {
                    Some(t) if !collection => rows.get(t).map(|r| r[0].clone()),
                    _ => None,
                };
                LabelModel { k, bound, template, collection, arity, values: Vec::new(), index: HashMap::new() }
            })
            .collect();

        let mut parts = Vec::with_capacity(g.transitions.len());
        let mut out = vec![Vec::new(); g.nodes.len()];
        for (ti, (t, ss)) in g.transitions.iter().zip(&srcs).enumerate() {
            out[t.src].push(ti);
            let ps = t
                .parts
                .iter()
                .zip(ss)
                .map(|(p, s)| {
                    let lm = &mut labels[p.label];
                    let mut ids = |v: Option<&EdgeValue>| -> Vec<u32> {
                        let mut r: Vec<u32> = match v {
                            None => vec![],
                            Some(EdgeValue::Tuple(v)) => vec![lm.intern(project(v, &lm.k))],
                            Some(EdgeValue::Set(items)) => items.iter().map(|i| lm.intern(i.clone())).collect(),
                        };
                        r.sort_unstable();
                        r.dedup();
                        r
                    };
                    let dst = ids(Some(&p.value));
                    let src = ids(s.as_ref());
                    PartIds { label: p.label, dst, src }
                })
                .collect();
            parts.push(ps);
        }
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, n) in g.nodes.iter().enumerate() {
            classes.entry(n.class).or_default().push(i);
        }
        let mut classes: Vec<Vec<usize>> = classes.into_values().collect();
        classes.sort_by_key(|c| c[0]);
        let reverse = g
            .transitions
            .iter()
            .map(|t| {
                let stmt = t.parts.first().map(|p| p.statement);
                out[t.dst].iter().copied().find(|&r| {
                    let u = &g.transitions[r];
                    u.dst == t.src && u.parts.first().map(|p| p.statement) == stmt
                })
            })
            .collect();
        let mut initial = HashMap::new();
        for (li, l) in g.labels.iter().enumerate() {
            if !matches!(l.kind, LabelKind::Replace | LabelKind::Collection) {
                continue;
            }
            for (ni, n) in g.nodes.iter().enumerate() {
                let lm = &mut labels[li];
                let ids = match src_value(l, &n.ast) {
                    Some(EdgeValue::Tuple(v)) => {
                        let fits = lm.bound.as_ref().is_some_and(|b| (0..v.len()).all(|i| lm.k.contains(&i) || v[i] == b[i]));
                        fits.then(|| vec![lm.intern(project(&v, &lm.k))])
                    }
                    Some(EdgeValue::Set(items)) => {
                        let mut ids: Vec<u32> = items.into_iter().map(|i| lm.intern(i)).collect();
                        ids.sort_unstable();
                        ids.dedup();
                        Some(ids)
                    }
                    None => None,
                };
                if let Some(ids) = ids {
                    initial.insert((li, ni), ids);
                }
            }
        }
        Model { g, opts, labels, parts, out, initial, reverse, classes }
    }

    fn class_members(&self, u: usize) -> &[usize] {
        let c = self.g.nodes[u].class;
        self.classes.iter().find(|m| self.g.nodes[m[0]].class == c).map_or(&[], |m| m.as_slice())
    }

    /// Cheapest admissible type for a label over a domain; infinite when no
    /// allowed type fits.
    fn widget(&self, l: usize, dom: &[u32]) -> (Option<WidgetType>, f64) {
        let lm = &self.labels[l];
        let mut shape = DomainShape::empty(lm.arity, lm.collection);
        for &v in dom {
            shape.add(&lm.values[v as usize]);
        }
        let mut best = (None, f64::INFINITY);
        for &t in &self.opts.types {
            if t.accepts(&shape) {
                let c = widget_cost(t, shape.n, &self.opts.alphas).unwrap_or(f64::INFINITY);
                if c < best.1 {
                    best = (Some(t), c);
                }
            }
        }
        best
    }

    fn cost(&self, w: &Widgets) -> f64 {
        w.iter().map(|(&l, d)| self.widget(l, d).1).sum()
    }

    fn expressible(&self, w: &Widgets, ti: usize) -> bool {
        self.parts[ti].iter().all(|p| w.get(&p.label).is_some_and(|d| p.dst.iter().all(|v| d.binary_search(v).is_ok())))
    }

    /// Closure with BFS parents: `None` for the initial query's class,
    /// `Some(Err(u))` for an identical query, `Some(Ok(t))` via transition.
    fn bfs(&self, p0: usize, w: &Widgets) -> Vec<(usize, Option<Result<usize, usize>>)> {
        let mut seen = vec![false; self.g.nodes.len()];
        let mut order = Vec::new();
        let mut queue: VecDeque<(usize, Option<usize>)> = VecDeque::from([(p0, None)]);
        while let Some((u, via)) = queue.pop_front() {
            if seen[u] {
                continue;
            }
            order.push((u, via.map(Ok)));
            for &v in self.class_members(u) {
                if !seen[v] {
                    seen[v] = true;
                    if v != u {
                        order.push((v, Some(Err(u))));
                    }
                }
            }
            for &ti in &self.out[u] {
                let d = self.g.transitions[ti].dst;
                if !seen[d] && self.expressible(w, ti) {
                    queue.push_back((d, Some(ti)));
                }
            }
        }
        order
    }

    fn closure(&self, p0: usize, w: &Widgets) -> Vec<usize> {
        let mut c: Vec<usize> = self.bfs(p0, w).into_iter().map(|(u, _)| u).collect();
        c.sort_unstable();
        c
    }

    fn fuse(&self, a: &Iface, b: &Iface, ti: usize) -> Widgets {
        let mut w = a.widgets.clone();
        let mut add = |l: usize, vs: &[u32]| {
            let d = w.entry(l).or_default();
            d.extend_from_slice(vs);
            d.sort_unstable();
            d.dedup();
        };
        for (&l, d) in &b.widgets {
            add(l, d);
        }
        for t in std::iter::once(ti).chain(self.reverse[ti]) {
            for p in &self.parts[t] {
                add(p.label, &p.dst);
                add(p.label, &p.src);
            }
        }
        for (l, d) in w.iter_mut() {
            if let Some(v) = self.initial.get(&(*l, a.p0)) {
                d.extend_from_slice(v);
                d.sort_unstable();
                d.dedup();
            }
        }
        w
    }
}

fn is_superset(big: &[usize], small: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

/// Greedy interface merging. Starts from one widgetless interface per
/// distinct query and repeatedly applies the merge with the largest cost
/// reduction `C_i + C_j + c0 − C_ij`, where the merged interface keeps the
/// left initial query and gains the widgets of a transition from the left
/// closure into the right one. Ties prefer the larger closure, then the
/// lexicographically smallest pair of initial pids. Merges whose closure
/// would not contain both closures are skipped.
pub fn greedy_synthesize(g: &InteractionGraph, opts: &SynthOpts) -> Result<InterfaceSet, SynthError> {
    if opts.alphas.len() != COST_FAMILIES.len() {
        return Err(SynthError::WeightMismatch { expected: COST_FAMILIES.len(), found: opts.alphas.len() });
    }
    if opts.types.is_empty() {
        return Err(SynthError::NoCandidate);
    }
    if g.nodes.is_empty() {
        return Err(SynthError::EmptyGraph);
    }
    let m = Model::new(g, opts);
    let mut ifaces: Vec<Option<Iface>> = m
        .classes
        .iter()
        .map(|c| Some(Iface { p0: c[0], widgets: Widgets::new(), cost: 0.0, closure: c.clone() }))
        .collect();
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); g.nodes.len()];
    for (i, c) in m.classes.iter().enumerate() {
        for &n in c {
            owners[n].push(i);
        }
    }
    let mut gens = vec![0u64; ifaces.len()];
    let mut cache: HashMap<(usize, usize, usize), (u64, u64, f64)> = HashMap::new();
    let mut banned: HashSet<(usize, usize, usize, u64, u64)> = HashSet::new();
    let mut merges = 0;

    loop {
        let mut keys: Vec<(usize, usize, usize)> = Vec::new();
        for (ti, t) in g.transitions.iter().enumerate() {
            for &a in &owners[t.src] {
                for &b in &owners[t.dst] {
                    if a != b {
                        keys.push((a, b, ti));
                    }
                }
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let fresh = |k: &(usize, usize, usize), cache: &HashMap<_, (u64, u64, f64)>| {
            cache.get(k).filter(|&&(ga, gb, _)| ga == gens[k.0] && gb == gens[k.1]).map(|e| e.2)
        };
        let missing: Vec<(usize, usize, usize)> = keys.iter().copied().filter(|k| fresh(k, &cache).is_none()).collect();
        let computed: Vec<f64> = missing
            .par_iter()
            .map(|&(a, b, ti)| {
                let (ia, ib) = (ifaces[a].as_ref().unwrap(), ifaces[b].as_ref().unwrap());
                ia.cost + ib.cost + opts.c0 - m.cost(&m.fuse(ia, ib, ti))
            })
            .collect();
        for (k, gain) in missing.into_iter().zip(computed) {
            cache.insert(k, (gens[k.0], gens[k.1], gain));
        }
        let live: Vec<((usize, usize, usize), f64)> = keys
            .iter()
            .filter(|k| !banned.contains(&(k.0, k.1, k.2, gens[k.0], gens[k.1])))
            .map(|k| (*k, fresh(k, &cache).unwrap()))
            .collect();
        let best = live.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
        if best <= EPS {
            break;
        }
        let mut ties: Vec<((usize, usize, usize), Widgets, Vec<usize>)> = live
            .iter()
            .filter(|e| e.1 >= best - EPS)
            .map(|&((a, b, ti), _)| {
                let w = m.fuse(ifaces[a].as_ref().unwrap(), ifaces[b].as_ref().unwrap(), ti);
                let c = m.closure(ifaces[a].as_ref().unwrap().p0, &w);
                ((a, b, ti), w, c)
            })
            .collect();
        let pid = |i: usize| g.nodes[ifaces[i].as_ref().unwrap().p0].pid.as_str();
        ties.sort_by(|x, y| {
            y.2.len()
                .cmp(&x.2.len())
                .then_with(|| (pid(x.0 .0), pid(x.0 .1)).cmp(&(pid(y.0 .0), pid(y.0 .1))))
                .then_with(|| x.0.cmp(&y.0))
        });
        let mut chosen = None;
        for (k, w, c) in ties {
            let (ia, ib) = (ifaces[k.0].as_ref().unwrap(), ifaces[k.1].as_ref().unwrap());
            if is_superset(&c, &ia.closure) && is_superset(&c, &ib.closure) {
                chosen = Some((k, w, c));
                break;
            }
            banned.insert((k.0, k.1, k.2, gens[k.0], gens[k.1]));
        }
        let Some(((a, b, _), w, c)) = chosen else { continue };
        let old_b = ifaces[b].take().unwrap();
        let ia = ifaces[a].as_mut().unwrap();
        for &n in &ia.closure {
            owners[n].retain(|&x| x != a);
        }
        for &n in &old_b.closure {
            owners[n].retain(|&x| x != b);
        }
        ia.cost = m.cost(&w);
        ia.widgets = w;
        ia.closure = c;
        for &n in &ia.closure {
            owners[n].push(a);
            owners[n].sort_unstable();
        }
        gens[a] += 1;
        gens[b] += 1;
        merges += 1;
    }

    let log_size = opts.log_size.unwrap_or(g.nodes.len()).max(g.nodes.len());
    let mut kept: Vec<Iface> = ifaces.into_iter().flatten().collect();
    kept.par_iter_mut().for_each(|i| drop_redundant(&m, i));
    prune(&mut kept, opts, log_size);
    let covered = union_len(&kept, usize::MAX);

    let mut interfaces: Vec<SynthInterface> = kept.iter().map(|i| resolve(&m, i)).collect();
    interfaces.sort_by_key(|i| i.initial);
    Ok(InterfaceSet {
        interfaces,
        alphas: opts.alphas.clone(),
        c0: opts.c0,
        gamma: opts.gamma,
        covered,
        log_size,
        coverage: covered as f64 / log_size as f64,
        merges,
    })
}

/// Removes widgets the closure does not need, costliest first. Each removal
/// lowers C_I and leaves the closure as it is.
fn drop_redundant(m: &Model, i: &mut Iface) {
    let mut order: Vec<(usize, f64)> = i.widgets.iter().map(|(&l, d)| (l, m.widget(l, d).1)).collect();
    order.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(Ordering::Equal).then(x.0.cmp(&y.0)));
    for (l, _) in order {
        let d = i.widgets.remove(&l).unwrap();
        if m.closure(i.p0, &i.widgets) != i.closure {
            i.widgets.insert(l, d);
        }
    }
    i.cost = m.cost(&i.widgets);
}

fn union_len(ifaces: &[Iface], skip: usize) -> usize {
    let all: BTreeSet<usize> = ifaces.iter().enumerate().filter(|(i, _)| *i != skip).flat_map(|(_, f)| f.closure.iter().copied()).collect();
    all.len()
}

/// With gamma below one, drops the costliest interfaces whose removal keeps
/// coverage on target.
fn prune(ifaces: &mut Vec<Iface>, opts: &SynthOpts, log_size: usize) {
    if opts.gamma >= 1.0 {
        return;
    }
    loop {
        let drop = (0..ifaces.len())
            .filter(|&i| ifaces.len() > 1 && union_len(ifaces, i) as f64 + EPS >= opts.gamma * log_size as f64)
            .max_by(|&x, &y| {
                (ifaces[x].cost).partial_cmp(&ifaces[y].cost).unwrap_or(Ordering::Equal).then_with(|| ifaces[x].p0.cmp(&ifaces[y].p0))
            });
        match drop {
            Some(i) => {
                ifaces.remove(i);
            }
            None => return,
        }
    }
}

/// Fixes each widget to its cheapest candidate and records the trace.
fn resolve(m: &Model, i: &Iface) -> SynthInterface {
    let mut widgets = Vec::new();
    let mut position = HashMap::new();
    for (&l, dom) in &i.widgets {
        let lm = &m.labels[l];
        let mut shape = DomainShape::empty(lm.arity, lm.collection);
        dom.iter().for_each(|&v| shape.add(&lm.values[v as usize]));
        let candidates: Vec<WidgetType> = m.opts.types.iter().copied().filter(|t| t.accepts(&shape)).collect();
        let (t, cost) = m.widget(l, dom);
        let mut domain: Vec<Vec<Value>> = dom.iter().map(|&v| lm.values[v as usize].clone()).collect();
        domain.sort();
        position.insert(l, widgets.len());
        widgets.push(SynthWidget {
            label: m.g.labels[l].clone(),
            k: lm.k.clone(),
            widget_type: t.expect("merged widgets have a finite cost"),
            candidates,
            template: lm.template.clone(),
            domain,
            cost,
        });
    }
    let trace = m
        .bfs(i.p0, &i.widgets)
        .into_iter()
        .map(|(u, via)| {
            let reach = match via {
                None => Reach::Initial,
                Some(Err(to)) => Reach::Identical { to },
                Some(Ok(ti)) => {
                    let t = &m.g.transitions[ti];
                    let mut parts: Vec<&crate::mining::Part> = t.parts.iter().collect();
                    parts.sort_by(|x, y| replay_order(&m.g.labels[x.label], &m.g.labels[y.label]));
                    let steps = parts
                        .into_iter()
                        .map(|p| {
                            let w = position[&p.label];
                            (w, widgets[w].project(&p.value))
                        })
                        .collect();
                    Reach::Edge { from: t.src, transition: ti, steps }
                }
            };
            (u, reach)
        })
        .collect();
    SynthInterface { initial: i.p0, widgets, closure: i.closure.clone(), cost: i.cost, trace }
}

/// Source-coordinate edits deepest and rightmost first, then insertions in
/// ascending target coordinates.
pub fn replay_order(a: &EdgeLabel, b: &EdgeLabel) -> Ordering {
    let ins = |l: &EdgeLabel| l.kind == LabelKind::Insert;
    match (ins(a), ins(b)) {
        (false, true) => Ordering::Less,
        (true, false) => Ordering::Greater,
        (true, true) => a.path.cmp(&b.path),
        (false, false) => b.path.cmp(&a.path),
    }
}

/// Path of a widget as its label stores it.
pub fn widget_path(w: &SynthWidget) -> &DiffPath {
    &w.label.path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::sql_catalog;
    use crate::log::QueryEntry;
    use crate::mining::{build_graph, MineOpts, PairStrategy};
    use crate::pilang::parse_pilang;

    fn graph(qs: &[&str], stmts: &str) -> InteractionGraph {
        let log: Vec<QueryEntry> = qs.iter().enumerate().map(|(i, q)| QueryEntry::parse(format!("q{i}"), *q).unwrap()).collect();
        let s = parse_pilang(stmts).unwrap();
        let mut g = build_graph(&log, &s, &PairStrategy::all(), MineOpts::default(), sql_catalog()).unwrap();
        g.materialize(sql_catalog());
        g
    }

    #[test]
    fn costs_add_up() {
        assert_eq!(set_cost([interface_cost([])], 1.0), 1.0);
        assert!((set_cost([interface_cost([0.2, 0.5])], 1.0) - 1.7).abs() < EPS);
    }

    #[test]
    fn two_cities_make_one_toggle() {
        let g = graph(&["SELECT a FROM t WHERE city = 'NY'", "SELECT a FROM t WHERE city = 'LA'"], "FROM Where//StrExpr AS S MATCH m");
        let s = greedy_synthesize(&g, &SynthOpts::default()).unwrap();
        assert_eq!(s.interfaces.len(), 1);
        let w = &s.interfaces[0].widgets;
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].widget_type, WidgetType::Toggle);
        assert_eq!(w[0].domain, vec![vec![Value::from("LA")], vec![Value::from("NY")]]);
        assert_eq!(s.coverage, 1.0);
        assert!((s.cost() - 1.1).abs() < EPS);
        assert_eq!(closure(&g, 0, w), vec![0, 1]);
        assert_eq!(closure(&g, 0, &[]), vec![0]);
    }

    #[test]
    fn singleton_log() {
        let g = graph(&["SELECT a FROM t"], "");
        let s = greedy_synthesize(&g, &SynthOpts::default()).unwrap();
        assert_eq!(s.interfaces.len(), 1);
        assert!(s.interfaces[0].widgets.is_empty());
        assert_eq!(s.cost(), 1.0);
        assert_eq!(s.interfaces[0].trace, vec![(0, Reach::Initial)]);
    }

    #[test]
    fn numeric_walk_gets_one_widget_over_all_values() {
        let qs: Vec<String> = [3, 8, 1, 5].iter().map(|v| format!("SELECT a FROM t WHERE x > {v}")).collect();
        let refs: Vec<&str> = qs.iter().map(String::as_str).collect();
        let g = graph(&refs, "FROM Where//IntExpr AS I MATCH m");
        let s = greedy_synthesize(&g, &SynthOpts::default()).unwrap();
        assert_eq!(s.interfaces.len(), 1);
        let w = &s.interfaces[0].widgets[0];
        assert_eq!(w.domain.len(), 4);
        assert_eq!(w.widget_type, WidgetType::Slider);
        assert_eq!(s.interfaces[0].closure, vec![0, 1, 2, 3]);
    }

    #[test]
    fn identical_queries_share_an_interface() {
        let g = graph(&["SELECT a FROM t", "SELECT b FROM t", "SELECT a FROM t"], "");
        let s = greedy_synthesize(&g, &SynthOpts::default()).unwrap();
        assert_eq!(s.interfaces.len(), 2);
        assert_eq!(s.interfaces[0].closure, vec![0, 2]);
        assert_eq!(s.covered, 3);
    }

    #[test]
    fn coverage_targets() {
        let g = graph(&["SELECT a FROM t", "SELECT b FROM u"], "");
        let full = greedy_synthesize(&g, &SynthOpts { log_size: Some(3), ..Default::default() }).unwrap();
        assert!(matches!(full.check_coverage(), Err(SynthError::CoverageUnreachable { .. })));
        let half = greedy_synthesize(&g, &SynthOpts { gamma: 0.5, ..Default::default() }).unwrap();
        assert_eq!(half.interfaces.len(), 1);
        assert!(half.check_coverage().is_ok());
        assert!(matches!(greedy_synthesize(&g, &SynthOpts { alphas: vec![1.0], ..Default::default() }), Err(SynthError::WeightMismatch { .. })));
    }

    #[test]
    fn chain_closure() {
        let g = graph(
            &["SELECT a FROM t WHERE c = 'v1'", "SELECT a FROM t WHERE c = 'v2'", "SELECT a FROM t WHERE c = 'v3'"],
            "FROM Where//StrExpr AS S MATCH m",
        );
        let s = greedy_synthesize(&g, &SynthOpts::default()).unwrap();
        let mut w = s.interfaces[0].widgets.clone();
        w[0].domain = vec![vec![Value::from("v2")], vec![Value::from("v3")]];
        assert_eq!(closure(&g, 0, &w), vec![0, 1, 2]);
        w[0].domain = vec![vec![Value::from("v3")]];
        assert_eq!(closure(&g, 0, &w), vec![0, 2]);
    }
}
