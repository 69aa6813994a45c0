//! Log → graph → interfaces → spec JSON, and applying widget states to a
//! spec's interfaces.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{edit, parse_query, sql_catalog, unparse, AstError, AstNode, DiffPath, Template, Value, SQL_SUBSET};
use crate::log::{read_log_file, LogError, QueryLog};
use crate::mining::{build_graph, InteractionGraph, LabelKind, MineError, MineOpts, PairStrategy};
use crate::pilang::{parse_pilang, PilangError, Statement};
use crate::synth::{greedy_synthesize, InterfaceSet, Reach, SynthError, SynthOpts, WidgetType, WidgetValue, COST_FAMILIES};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecMeta {
    pub gamma: f64,
    pub alphas: BTreeMap<String, f64>,
    pub c0: f64,
    pub coverage: f64,
    /// Entries in the log, including ones that failed to parse.
    pub log_size: usize,
    pub parsed: usize,
    pub covered: usize,
    pub total_cost: f64,
    /// Per interface, in interface order.
    pub closure_sizes: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidgetSpec {
    pub id: String,
    pub type_id: WidgetType,
    pub kind: LabelKind,
    pub path: String,
    /// Subtree with `{"param": n}` slots; absent for deletions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<Template>,
    pub domain: Vec<Vec<Value>>,
    pub cost: f64,
    pub candidates: Vec<WidgetType>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepSpec {
    pub widget: String,
    pub value: WidgetValue,
}

/// How the synthesis reached a covered query; replaying `steps` on `from`
/// yields it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSpec {
    pub pid: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub same_as: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceEntry {
    pub id: String,
    pub initial_pid: String,
    pub initial_query: String,
    pub cost: f64,
    pub closure: Vec<String>,
    pub widgets: Vec<WidgetSpec>,
    pub trace: Vec<TraceSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSpec {
    pub meta: SpecMeta,
    pub interfaces: Vec<InterfaceEntry>,
}

impl InterfaceSpec {
    pub fn interface(&self, id: &str) -> Option<&InterfaceEntry> {
        self.interfaces.iter().find(|i| i.id == id)
    }

    pub fn coverage_met(&self) -> bool {
        self.meta.coverage + 1e-12 >= self.meta.gamma
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Turns a synthesis result into the interface spec handed to the service and UI.
pub fn emit_spec(g: &InteractionGraph, set: &InterfaceSet, log_size: usize) -> InterfaceSpec {
    let pid = |n: usize| g.nodes[n].pid.clone();
    let interfaces: Vec<InterfaceEntry> = set
        .interfaces
        .iter()
        .enumerate()
        .map(|(k, i)| {
            let wid = |w: usize| format!("w{w}");
            let widgets = i
                .widgets
                .iter()
                .enumerate()
                .map(|(n, w)| WidgetSpec {
                    id: wid(n),
                    type_id: w.widget_type,
                    kind: w.label.kind,
                    path: w.label.path.to_string(),
                    template: w.template.clone(),
                    domain: w.domain.clone(),
                    cost: w.cost,
                    candidates: w.candidates.clone(),
                })
                .collect();
            let trace = i
                .trace
                .iter()
                .map(|(n, r)| match r {
                    Reach::Initial => TraceSpec { pid: pid(*n), from: None, steps: vec![], same_as: None },
                    Reach::Identical { to } => TraceSpec { pid: pid(*n), from: None, steps: vec![], same_as: Some(pid(*to)) },
                    Reach::Edge { from, steps, .. } => TraceSpec {
                        pid: pid(*n),
                        from: Some(pid(*from)),
                        steps: steps.iter().map(|(w, v)| StepSpec { widget: wid(*w), value: v.clone() }).collect(),
                        same_as: None,
                    },
                })
                .collect();
            InterfaceEntry {
                id: format!("i{k}"),
                initial_pid: pid(i.initial),
                initial_query: g.nodes[i.initial].query.clone(),
                cost: i.cost,
                closure: i.closure.iter().map(|&n| pid(n)).collect(),
                widgets,
                trace,
            }
        })
        .collect();
    let alphas = COST_FAMILIES.iter().zip(&set.alphas).map(|(k, a)| (k.to_string(), *a)).collect();
    InterfaceSpec {
        meta: SpecMeta {
            gamma: set.gamma,
            alphas,
            c0: set.c0,
            coverage: set.covered as f64 / log_size.max(1) as f64,
            log_size,
            parsed: g.nodes.len(),
            covered: set.covered,
            total_cost: set.cost(),
            closure_sizes: set.interfaces.iter().map(|i| i.closure.len()).collect(),
        },
        interfaces,
    }
}

/// Widget states keyed by widget id.
pub type WidgetState = BTreeMap<String, WidgetValue>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApplyError {
    #[error("no interface {0}")]
    UnknownInterface(String),
    #[error("no widget {0}")]
    UnknownWidget(String),
    #[error("value {value} is outside the domain of widget {widget}")]
    DomainViolation { widget: String, value: String },
    #[error("widget {widget}: path {path} does not resolve")]
    PathNotFound { widget: String, path: String },
    #[error("widget {widget}: {source}")]
    Ast { widget: String, source: AstError },
    #[error("query: {0}")]
    Query(AstError),
}

fn check_domain(w: &WidgetSpec, v: &WidgetValue) -> Result<(), ApplyError> {
    let violation = || ApplyError::DomainViolation { widget: w.id.clone(), value: serde_json::to_string(v).unwrap_or_default() };
    let has = |t: &Vec<Value>| w.domain.contains(t);
    let ok = match (w.kind, v) {
        (LabelKind::Collection, WidgetValue::Set(items)) => items.iter().all(has),
        (LabelKind::Collection, WidgetValue::Tuple(t)) => t.is_empty(),
        (_, WidgetValue::Tuple(t)) if w.type_id.free_form() => t.len() == w.domain.first().map_or(1, Vec::len),
        (_, WidgetValue::Tuple(t)) => has(t),
        (_, WidgetValue::Set(_)) => false,
    };
    ok.then_some(()).ok_or_else(violation)
}

/// w(p): the widget's subtree for `v` put at its path.
pub fn apply_widget(ast: &mut AstNode, w: &WidgetSpec, v: &WidgetValue) -> Result<(), ApplyError> {
    check_domain(w, v)?;
    let path: DiffPath = w.path.parse().map_err(|e| ApplyError::Ast { widget: w.id.clone(), source: e })?;
    let not_found = || ApplyError::PathNotFound { widget: w.id.clone(), path: w.path.clone() };
    let ast_err = |e: AstError| match e {
        AstError::PathNotFound { .. } => not_found(),
        e => ApplyError::Ast { widget: w.id.clone(), source: e },
    };
    let build = |t: &[Value]| -> Result<AstNode, ApplyError> {
        w.template.as_ref().ok_or_else(not_found)?.instantiate(t).map_err(|e| ApplyError::Ast { widget: w.id.clone(), source: e })
    };
    let catalog = sql_catalog();
    match (w.kind, v) {
        (LabelKind::Replace, WidgetValue::Tuple(t)) => edit::replace(ast, &path, build(t)?, catalog).map_err(ast_err),
        (LabelKind::Insert, WidgetValue::Tuple(t)) => edit::insert(ast, &path, build(t)?, catalog).map_err(ast_err),
        (LabelKind::Delete, _) => edit::delete(ast, &path, catalog).map_err(ast_err),
        (LabelKind::Collection, v) => {
            let items = match v {
                WidgetValue::Set(items) => items.clone(),
                WidgetValue::Tuple(_) => vec![],
            };
            let children = items.iter().map(|t| build(t)).collect::<Result<Vec<_>, _>>()?;
            let list = ast.subtree_at_mut(&path).map_err(|_| not_found())?;
            if !catalog.is_list(&list.node_type) {
                return Err(not_found());
            }
            list.children = children;
            Ok(())
        }
        _ => Err(ApplyError::DomainViolation { widget: w.id.clone(), value: serde_json::to_string(v).unwrap_or_default() }),
    }
}

/// Applies the stated widgets, shallowest path first, to `base` (the
/// interface's initial query when absent). Returns the SQL and its AST.
pub fn apply_widgets(spec: &InterfaceSpec, interface_id: &str, state: &WidgetState, base: Option<&str>) -> Result<(String, AstNode), ApplyError> {
    let iface = spec.interface(interface_id).ok_or_else(|| ApplyError::UnknownInterface(interface_id.into()))?;
    let mut ast = parse_query(base.unwrap_or(&iface.initial_query), SQL_SUBSET).map_err(ApplyError::Query)?;
    let mut stated = Vec::with_capacity(state.len());
    for (id, v) in state {
        let w = iface.widgets.iter().find(|w| &w.id == id).ok_or_else(|| ApplyError::UnknownWidget(id.clone()))?;
        check_domain(w, v)?;
        let depth = w.path.split('/').filter(|s| !s.is_empty()).count();
        stated.push((depth, w, v));
    }
    stated.sort_by_key(|(d, w, _)| (*d, w.id.clone()));
    for (_, w, v) in stated {
        apply_widget(&mut ast, w, v)?;
    }
    let sql = unparse(&ast, sql_catalog()).map_err(ApplyError::Query)?;
    Ok((sql, ast))
}

/// Rebuilds every query an interface claims from its trace.
pub fn replay_trace(spec: &InterfaceSpec, interface_id: &str) -> Result<BTreeMap<String, AstNode>, ApplyError> {
    let iface = spec.interface(interface_id).ok_or_else(|| ApplyError::UnknownInterface(interface_id.into()))?;
    let mut out: BTreeMap<String, AstNode> = BTreeMap::new();
    for t in &iface.trace {
        let ast = match (&t.from, &t.same_as) {
            (Some(from), _) => {
                let mut ast = out.get(from).cloned().ok_or_else(|| ApplyError::UnknownInterface(from.clone()))?;
                for s in &t.steps {
                    let w = iface.widgets.iter().find(|w| w.id == s.widget).ok_or_else(|| ApplyError::UnknownWidget(s.widget.clone()))?;
                    apply_widget(&mut ast, w, &s.value)?;
                }
                ast
            }
            (None, Some(to)) => out.get(to).cloned().ok_or_else(|| ApplyError::UnknownInterface(to.clone()))?,
            (None, None) => parse_query(&iface.initial_query, SQL_SUBSET).map_err(ApplyError::Query)?,
        };
        out.insert(t.pid.clone(), ast);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOpts {
    pub strategy: PairStrategy,
    pub mine: MineOpts,
    pub synth: SynthOpts,
}

impl Default for PipelineOpts {
    fn default() -> Self {
        PipelineOpts { strategy: PairStrategy::all(), mine: "both".parse().expect("known option"), synth: SynthOpts::default() }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Log { path: PathBuf, source: LogError },
    #[error("{path}: {source}")]
    Pilang { path: PathBuf, source: PilangError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Mine(#[from] MineError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

/// Materializes `g` and synthesizes its interfaces; an empty graph gives an
/// empty spec rather than an error.
pub fn synthesize_spec(g: &mut InteractionGraph, log_size: usize, opts: &SynthOpts) -> Result<InterfaceSpec, SynthError> {
    g.materialize(sql_catalog());
    let synth = SynthOpts { log_size: Some(log_size), ..opts.clone() };
    let set = if g.nodes.is_empty() {
        InterfaceSet {
            interfaces: vec![],
            alphas: synth.alphas.clone(),
            c0: synth.c0,
            gamma: synth.gamma,
            covered: 0,
            log_size,
            coverage: 0.0,
            merges: 0,
        }
    } else {
        greedy_synthesize(g, &synth)?
    };
    Ok(emit_spec(g, &set, log_size))
}

/// mine → synthesize → emit on an in-memory log.
pub fn pipeline(log: &QueryLog, statements: &[Statement], opts: &PipelineOpts) -> Result<(InteractionGraph, InterfaceSpec), PipelineError> {
    let mut g = build_graph(&log.entries, statements, &opts.strategy, opts.mine, sql_catalog())?;
    let spec = synthesize_spec(&mut g, log.total(), &opts.synth)?;
    Ok((g, spec))
}

pub fn read_statements(path: &Path) -> Result<Vec<Statement>, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::Io { path: path.into(), source: e })?;
    parse_pilang(&text).map_err(|e| PipelineError::Pilang { path: path.into(), source: e })
}

/// The file-level pipeline: reads the log and statements, returns the graph
/// and spec. Coverage below gamma is reported through
/// [`InterfaceSpec::coverage_met`], not as an error.
pub fn run_pipeline(log_path: &Path, pilang_path: &Path, opts: &PipelineOpts) -> Result<(InteractionGraph, InterfaceSpec), PipelineError> {
    let log = read_log_file(log_path).map_err(|e| PipelineError::Log { path: log_path.into(), source: e })?;
    let statements = read_statements(pilang_path)?;
    pipeline(&log, &statements, opts)
}
