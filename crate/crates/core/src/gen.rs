//! Synthetic query logs: a random walk over group-by/aggregate queries
//! (one clause edit per step) and a templated log for the mining
//! optimizations.

use std::collections::BTreeMap;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::Value;
use crate::log::QueryEntry;

/// Seven statements covering the edit families of the OLAP walk.
pub const OLAP_STATEMENTS: &str = include_str!("../resources/olap.pil");
/// Statements for [`generate_templated_log`] logs.
pub const TEMPLATED_STATEMENTS: &str = include_str!("../resources/templated.pil");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OlapEdit {
    DimAdd,
    DimRemove,
    DimChange,
    MeasureAdd,
    MeasureRemove,
    MeasureChangeCol,
    MeasureChangeAgg,
    FilterAdd,
    FilterRemove,
    FilterChangeCol,
    FilterChangeVal,
}

impl OlapEdit {
    pub const ALL: [OlapEdit; 11] = [
        OlapEdit::DimAdd,
        OlapEdit::DimRemove,
        OlapEdit::DimChange,
        OlapEdit::MeasureAdd,
        OlapEdit::MeasureRemove,
        OlapEdit::MeasureChangeCol,
        OlapEdit::MeasureChangeAgg,
        OlapEdit::FilterAdd,
        OlapEdit::FilterRemove,
        OlapEdit::FilterChangeCol,
        OlapEdit::FilterChangeVal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OlapEdit::DimAdd => "dim-add",
            OlapEdit::DimRemove => "dim-remove",
            OlapEdit::DimChange => "dim-change",
            OlapEdit::MeasureAdd => "measure-add",
            OlapEdit::MeasureRemove => "measure-remove",
            OlapEdit::MeasureChangeCol => "measure-change-col",
            OlapEdit::MeasureChangeAgg => "measure-change-agg",
            OlapEdit::FilterAdd => "filter-add",
            OlapEdit::FilterRemove => "filter-remove",
            OlapEdit::FilterChangeCol => "filter-change-col",
            OlapEdit::FilterChangeVal => "filter-change-val",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OlapGenConfig {
    pub seed: u64,
    pub steps: usize,
    pub table: String,
    pub dimensions: Vec<String>,
    pub measures: Vec<String>,
    pub aggregates: Vec<String>,
    /// Filter columns with the values each may take.
    pub filters: Vec<(String, Vec<Value>)>,
    /// Relative edit weights; edits missing from the map never happen.
    pub edits: BTreeMap<OlapEdit, f64>,
}

impl Default for OlapGenConfig {
    fn default() -> Self {
        let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let strs = |xs: &[&str]| xs.iter().map(|x| Value::from(*x)).collect::<Vec<_>>();
        let mut edits: BTreeMap<OlapEdit, f64> = OlapEdit::ALL.iter().map(|e| (*e, 1.0)).collect();
        edits.insert(OlapEdit::FilterChangeVal, 4.0);
        OlapGenConfig {
            seed: 1,
            steps: 100,
            table: "ontime".into(),
            dimensions: s(&["carrier", "origin", "dest", "month", "dayofweek", "year"]),
            measures: s(&["arrdelay", "depdelay", "distance", "airtime"]),
            aggregates: s(&["sum", "avg", "min", "max", "count"]),
            filters: vec![
                ("carrier".into(), strs(&["AA", "UA", "DL", "WN", "B6"])),
                ("origin".into(), strs(&["SFO", "JFK", "ORD", "LAX", "BOS", "SEA"])),
                ("dest".into(), strs(&["SFO", "JFK", "ORD", "LAX", "ATL"])),
                ("month".into(), (1..=12).map(Value::Int).collect()),
                ("year".into(), (2010..=2016).map(Value::Int).collect()),
            ],
            edits,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("empty pool: {0}")]
    EmptyPool(&'static str),
    #[error("steps must be at least 1")]
    NoSteps,
    #[error("edit weights must be non-negative with a positive total")]
    Weights,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct State {
    dims: Vec<usize>,
    measures: Vec<(usize, usize)>,
    filters: Vec<(usize, usize)>,
}

fn sql_value(v: &Value) -> String {
    match v {
        Value::Str(s) => format!("'{}'", s.replace('\'', "''")),
        other => other.to_string(),
    }
}

impl State {
    fn sql(&self, cfg: &OlapGenConfig) -> String {
        let mut proj: Vec<String> = self.dims.iter().map(|&d| cfg.dimensions[d].clone()).collect();
        proj.extend(self.measures.iter().map(|&(a, m)| format!("{}({})", cfg.aggregates[a], cfg.measures[m])));
        let mut q = format!("SELECT {} FROM {}", proj.join(", "), cfg.table);
        if !self.filters.is_empty() {
            let f: Vec<String> =
                self.filters.iter().map(|&(c, v)| format!("{} = {}", cfg.filters[c].0, sql_value(&cfg.filters[c].1[v]))).collect();
            q.push_str(&format!(" WHERE {}", f.join(" AND ")));
        }
        if !self.dims.is_empty() {
            let g: Vec<&str> = self.dims.iter().map(|&d| cfg.dimensions[d].as_str()).collect();
            q.push_str(&format!(" GROUP BY {}", g.join(", ")));
        }
        q
    }

    fn width(&self) -> usize {
        self.dims.len() + self.measures.len()
    }
}

fn pick<T: Copy>(rng: &mut ChaCha8Rng, xs: &[T]) -> Option<T> {
    xs.choose(rng).copied()
}

/// Applies one edit of the given kind, or returns `None` if the kind has
/// no legal target in this state.
fn apply(edit: OlapEdit, s: &State, cfg: &OlapGenConfig, rng: &mut ChaCha8Rng) -> Option<State> {
    let mut n = s.clone();
    let unused_dims: Vec<usize> = (0..cfg.dimensions.len()).filter(|d| !s.dims.contains(d)).collect();
    let unused_meas: Vec<(usize, usize)> = (0..cfg.aggregates.len())
        .flat_map(|a| (0..cfg.measures.len()).map(move |m| (a, m)))
        .filter(|p| !s.measures.contains(p))
        .collect();
    let unused_filters: Vec<usize> = (0..cfg.filters.len()).filter(|c| !s.filters.iter().any(|f| f.0 == *c)).collect();
    match edit {
        OlapEdit::DimAdd => n.dims.push(pick(rng, &unused_dims)?),
        OlapEdit::DimRemove => {
            if s.dims.is_empty() || s.width() < 2 {
                return None;
            }
            n.dims.remove(rng.gen_range(0..s.dims.len()));
        }
        OlapEdit::DimChange => {
            if s.dims.is_empty() {
                return None;
            }
            let to = pick(rng, &unused_dims)?;
            n.dims[rng.gen_range(0..s.dims.len())] = to;
        }
        OlapEdit::MeasureAdd => n.measures.push(pick(rng, &unused_meas)?),
        OlapEdit::MeasureRemove => {
            if s.measures.is_empty() || s.width() < 2 {
                return None;
            }
            n.measures.remove(rng.gen_range(0..s.measures.len()));
        }
        OlapEdit::MeasureChangeCol | OlapEdit::MeasureChangeAgg => {
            let options: Vec<(usize, (usize, usize))> = s
                .measures
                .iter()
                .enumerate()
                .flat_map(|(i, &(a, m))| {
                    let alts: Vec<(usize, usize)> = if edit == OlapEdit::MeasureChangeCol {
                        (0..cfg.measures.len()).filter(|&m2| m2 != m).map(|m2| (a, m2)).collect()
                    } else {
                        (0..cfg.aggregates.len()).filter(|&a2| a2 != a).map(|a2| (a2, m)).collect()
                    };
                    alts.into_iter().filter(|p| !s.measures.contains(p)).map(move |p| (i, p))
                })
                .collect();
            let (i, p) = pick(rng, &options)?;
            n.measures[i] = p;
        }
        OlapEdit::FilterAdd => {
            let c = pick(rng, &unused_filters)?;
            n.filters.push((c, rng.gen_range(0..cfg.filters[c].1.len())));
        }
        OlapEdit::FilterRemove => {
            if s.filters.is_empty() {
                return None;
            }
            n.filters.remove(rng.gen_range(0..s.filters.len()));
        }
        OlapEdit::FilterChangeCol => {
            if s.filters.is_empty() {
                return None;
            }
            let c = pick(rng, &unused_filters)?;
            let i = rng.gen_range(0..s.filters.len());
            n.filters[i] = (c, rng.gen_range(0..cfg.filters[c].1.len()));
        }
        OlapEdit::FilterChangeVal => {
            let options: Vec<usize> = (0..s.filters.len()).filter(|&i| cfg.filters[s.filters[i].0].1.len() > 1).collect();
            let i = pick(rng, &options)?;
            let (c, v) = s.filters[i];
            let choices: Vec<usize> = (0..cfg.filters[c].1.len()).filter(|&x| x != v).collect();
            n.filters[i] = (c, pick(rng, &choices)?);
        }
    }
    (n != *s).then_some(n)
}

fn seed_state(cfg: &OlapGenConfig, rng: &mut ChaCha8Rng) -> State {
    let count = |rng: &mut ChaCha8Rng, pool: usize| rng.gen_range(1..=pool.min(3));
    let nd = count(rng, cfg.dimensions.len());
    let dims = rand::seq::index::sample(rng, cfg.dimensions.len(), nd).into_vec();
    let all_meas: Vec<(usize, usize)> =
        (0..cfg.aggregates.len()).flat_map(|a| (0..cfg.measures.len()).map(move |m| (a, m))).collect();
    let nm = count(rng, cfg.measures.len());
    let measures = rand::seq::index::sample(rng, all_meas.len(), nm).into_iter().map(|i| all_meas[i]).collect();
    let nf = count(rng, cfg.filters.len());
    let filters = rand::seq::index::sample(rng, cfg.filters.len(), nf)
        .into_iter()
        .map(|c| (c, rng.gen_range(0..cfg.filters[c].1.len())))
        .collect();
    State { dims, measures, filters }
}

/// Deterministic random walk: a seed query, then one sampled edit per step.
/// Each entry records the edit that produced it under `extra["edit"]`.
pub fn generate_olap_log(cfg: &OlapGenConfig) -> Result<Vec<QueryEntry>, ConfigError> {
    if cfg.dimensions.is_empty() {
        return Err(ConfigError::EmptyPool("dimensions"));
    }
    if cfg.measures.is_empty() {
        return Err(ConfigError::EmptyPool("measures"));
    }
    if cfg.aggregates.is_empty() {
        return Err(ConfigError::EmptyPool("aggregates"));
    }
    if cfg.filters.is_empty() || cfg.filters.iter().any(|f| f.1.is_empty()) {
        return Err(ConfigError::EmptyPool("filters"));
    }
    if cfg.steps == 0 {
        return Err(ConfigError::NoSteps);
    }
    let kinds: Vec<(OlapEdit, f64)> = cfg.edits.iter().filter(|(_, w)| **w > 0.0).map(|(e, w)| (*e, *w)).collect();
    if kinds.is_empty() || cfg.edits.values().any(|w| !(*w >= 0.0)) {
        return Err(ConfigError::Weights);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = seed_state(cfg, &mut rng);
    let mut out = Vec::with_capacity(cfg.steps);
    let entry = |i: usize, s: &State, edit: Option<OlapEdit>| {
        let mut e = QueryEntry::parse(format!("q{i}"), s.sql(cfg)).expect("generated queries parse");
        if let Some(edit) = edit {
            e.extra.insert("edit".into(), edit.name().into());
        }
        e
    };
    out.push(entry(0, &state, None));
    while out.len() < cfg.steps {
        let mut live = kinds.clone();
        let next = loop {
            if live.is_empty() {
                break None;
            }
            let dist = WeightedIndex::new(live.iter().map(|k| k.1)).expect("positive weights");
            let k = dist.sample(&mut rng);
            match apply(live[k].0, &state, cfg, &mut rng) {
                Some(s) => break Some((live[k].0, s)),
                None => {
                    live.remove(k);
                }
            }
        };
        let Some((edit, s)) = next else {
            // nothing applies (e.g. only FilterChangeVal with no filters): stop early
            tracing::warn!(steps = out.len(), "no applicable edit; log truncated");
            break;
        };
        state = s;
        out.push(entry(out.len(), &state, Some(edit)));
    }
    Ok(out)
}

/// A log drawn from a few fixed query shapes whose literals vary over small
/// pools, so that many queries share a template and some are identical.
pub fn generate_templated_log(n: usize, seed: u64) -> Vec<QueryEntry> {
    const SHAPES: [&str; 5] = [
        "SELECT carrier, sum(arrdelay) FROM ontime WHERE month = {i} AND origin = {s} GROUP BY carrier",
        "SELECT origin, avg(depdelay) FROM ontime WHERE year = {y} GROUP BY origin",
        "SELECT dest FROM ontime WHERE carrier = {s} AND distance > {d}",
        "SELECT count(arrdelay) FROM ontime WHERE dest = {s}",
        "SELECT month, max(airtime) FROM ontime WHERE month >= {i} AND month <= {j} GROUP BY month",
    ];
    const AIRPORTS: [&str; 6] = ["SFO", "JFK", "ORD", "LAX", "BOS", "SEA"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let shape = SHAPES[rng.gen_range(0..SHAPES.len())];
            let lo = rng.gen_range(1..=6);
            let q = shape
                .replace("{i}", &lo.to_string())
                .replace("{j}", &(lo + rng.gen_range(1..=6)).to_string())
                .replace("{s}", &format!("'{}'", AIRPORTS[rng.gen_range(0..AIRPORTS.len())]))
                .replace("{y}", &rng.gen_range(2010..=2016).to_string())
                .replace("{d}", &(rng.gen_range(1..=8) * 250).to_string());
            QueryEntry::parse(format!("t{i}"), q).expect("templated queries parse")
        })
        .collect()
}
