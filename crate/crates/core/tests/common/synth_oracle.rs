//! Exhaustive interface-set search for tiny graphs. Interfaces are every
//! (initial query, widget domains ⊆ observed values) combination; the best
//! set is found by DP over covered-query masks.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use pi_core::ast::{sql_catalog, Template, Value};
use pi_core::log::QueryEntry;
use pi_core::mining::{build_graph, EdgeValue, InteractionGraph, LabelKind, PairStrategy};
use pi_core::pilang::parse_pilang;

fn visual(kind: &str, n: f64) -> f64 {
    match kind {
        "button" => (n - 1.0).clamp(0.0, 1.0),
        "toggle" => {
            if n == 2.0 {
                0.0
            } else {
                1.0
            }
        }
        "dropdown" => (n / 20.0).min(1.0),
        "textbox" => 0.1,
        _ => 0.15,
    }
}

fn effort(kind: &str) -> f64 {
    match kind {
        "button" | "toggle" => 0.1,
        "dropdown" => 0.4,
        "textbox" => 1.0,
        _ => 0.2,
    }
}

fn cheapest(arity: usize, dom: &BTreeSet<Vec<Value>>, alphas: [f64; 2]) -> f64 {
    let n = dom.len() as f64;
    let num = |i: usize| dom.iter().all(|t| matches!(t[i], Value::Int(_) | Value::Float(_)));
    let mut kinds = vec![];
    if arity == 0 {
        kinds.push("button");
    }
    if arity == 1 {
        kinds.extend(["textbox", "dropdown"]);
        if dom.len() <= 2 {
            kinds.push("toggle");
        }
        if num(0) {
            kinds.push("slider");
        }
    }
    if arity >= 2 {
        kinds.push("dropdown");
    }
    if arity == 2 && num(0) && num(1) && dom.iter().all(|t| t[0].as_f64() < t[1].as_f64()) {
        kinds.push("range_slider");
    }
    kinds.iter().map(|k| alphas[0] * visual(k, n) + alphas[1] * effort(k)).fold(f64::INFINITY, f64::min)
}

fn subsets<T: Clone + Ord>(items: &[T]) -> Vec<BTreeSet<T>> {
    (1u32..(1 << items.len())).map(|m| items.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, x)| x.clone()).collect()).collect()
}

/// Minimal Σ (c0 + C_I) over interface sets covering every query. Only
/// tuple-valued labels are supported.
pub fn optimum(g: &InteractionGraph, c0: f64, alphas: [f64; 2]) -> f64 {
    let n = g.nodes.len();
    assert!(n <= 12);
    let full = |node: usize, li: usize| -> Option<Vec<Value>> {
        let l = &g.labels[li];
        let sub = g.nodes[node].ast.subtree_at(&l.path).ok()?;
        let (t, v) = Template::parameterize(sub);
        (Some(&t) == l.template.as_ref() && l.kind == LabelKind::Replace).then_some(v)
    };
    // K over the tuples either side of each edge carries, per template.
    let mut rows: BTreeMap<Template, Vec<Vec<Value>>> = BTreeMap::new();
    for t in &g.transitions {
        for p in &t.parts {
            assert_ne!(g.labels[p.label].kind, LabelKind::Collection);
            let Some(tp) = g.labels[p.label].template.clone() else { continue };
            if let EdgeValue::Tuple(v) = &p.value {
                rows.entry(tp.clone()).or_default().push(v.clone());
            }
            if let Some(v) = full(t.src, p.label) {
                rows.entry(tp).or_default().push(v);
            }
        }
    }
    let k_of = |li: usize| -> (Vec<usize>, Option<Vec<Value>>) {
        match &g.labels[li].template {
            None => (vec![], None),
            Some(t) => {
                let r = &rows[t];
                ((0..r[0].len()).filter(|&i| r.iter().any(|x| x[i] != r[0][i])).collect(), Some(r[0].clone()))
            }
        }
    };
    let labels: Vec<usize> = {
        let s: BTreeSet<usize> = g.transitions.iter().flat_map(|t| t.parts.iter().map(|p| p.label)).collect();
        s.into_iter().collect()
    };
    let ks: BTreeMap<usize, (Vec<usize>, Option<Vec<Value>>)> = labels.iter().map(|&l| (l, k_of(l))).collect();
    let proj = |l: usize, v: &[Value]| -> Vec<Value> { ks[&l].0.iter().map(|&i| v[i].clone()).collect() };
    let fits = |l: usize, v: &[Value]| ks[&l].1.as_ref().is_some_and(|b| (0..v.len()).all(|i| ks[&l].0.contains(&i) || v[i] == b[i]));
    let initial = |node: usize, l: usize| full(node, l).filter(|v| fits(l, v)).map(|v| proj(l, &v));

    let mut observed: BTreeMap<usize, BTreeSet<Vec<Value>>> = BTreeMap::new();
    for t in &g.transitions {
        for p in &t.parts {
            if let EdgeValue::Tuple(v) = &p.value {
                observed.entry(p.label).or_default().insert(proj(p.label, v));
            }
            if let Some(v) = full(t.src, p.label) {
                observed.entry(p.label).or_default().insert(proj(p.label, &v));
            }
        }
    }
    for &l in &labels {
        for node in 0..n {
            if let Some(v) = initial(node, l) {
                observed.entry(l).or_default().insert(v);
            }
        }
    }

    let closure = |p0: usize, w: &BTreeMap<usize, BTreeSet<Vec<Value>>>| -> u32 {
        let mut seen = 0u32;
        let mut q = VecDeque::from([p0]);
        while let Some(u) = q.pop_front() {
            if seen >> u & 1 == 1 {
                continue;
            }
            for v in 0..n {
                if g.nodes[v].ast == g.nodes[u].ast {
                    seen |= 1 << v;
                }
            }
            for t in g.transitions.iter().filter(|t| t.src == u) {
                let ok = t.parts.iter().all(|p| match (&p.value, w.get(&p.label)) {
                    (EdgeValue::Tuple(v), Some(d)) => d.contains(&proj(p.label, v)),
                    _ => false,
                });
                if ok {
                    q.push_back(t.dst);
                }
            }
        }
        seen
    };

    let mut best_for: BTreeMap<u32, f64> = BTreeMap::new();
    for p0 in 0..n {
        // per label: absent, or any domain holding p0's own value
        let mut choices: Vec<Vec<Option<BTreeSet<Vec<Value>>>>> = Vec::new();
        for &l in &labels {
            let vals: Vec<Vec<Value>> = observed[&l].iter().cloned().collect();
            let init = initial(p0, l);
            let mut c = vec![None];
            c.extend(subsets(&vals).into_iter().filter(|d| init.as_ref().is_none_or(|v| d.contains(v))).map(Some));
            choices.push(c);
        }
        let mut idx = vec![0usize; labels.len()];
        loop {
            let mut w = BTreeMap::new();
            let mut cost = 0.0;
            for (j, &l) in labels.iter().enumerate() {
                if let Some(d) = &choices[j][idx[j]] {
                    cost += cheapest(ks[&l].0.len(), d, alphas);
                    w.insert(l, d.clone());
                }
            }
            let cl = closure(p0, &w);
            let e = best_for.entry(cl).or_insert(f64::INFINITY);
            *e = e.min(cost);
            let mut j = 0;
            while j < idx.len() {
                idx[j] += 1;
                if idx[j] < choices[j].len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == idx.len() {
                break;
            }
        }
    }

    let all = (1u32 << n) - 1;
    let mut f = vec![f64::INFINITY; 1 << n];
    f[0] = 0.0;
    for m in 1..=all {
        for (&cl, &c) in &best_for {
            if cl & m != 0 {
                f[m as usize] = f[m as usize].min(c0 + c + f[(m & !cl) as usize]);
            }
        }
    }
    f[all as usize]
}

pub const LITERAL_CHANGE: &str = "FROM Where//* AS T MATCH literal-change(T)";

/// The materialized all-pairs graph of `qs` under [`LITERAL_CHANGE`].
pub fn graph(qs: &[String]) -> InteractionGraph {
    let log: Vec<QueryEntry> = qs.iter().enumerate().map(|(i, q)| QueryEntry::parse(format!("q{i}"), q).unwrap()).collect();
    let s = parse_pilang(LITERAL_CHANGE).unwrap();
    let mut g = build_graph(&log, &s, &PairStrategy::all(), "both".parse().unwrap(), sql_catalog()).unwrap();
    g.materialize(sql_catalog());
    g
}

fn multisets(pool: usize, k: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in from..pool {
        cur.push(i);
        multisets(pool, k, i, cur, out);
        cur.pop();
    }
}

/// Every log of one to four queries drawn with repetition from six queries
/// differing in two literals, each in ascending and descending order
/// (209 multisets, 418 logs).
pub fn micro_logs() -> Vec<Vec<String>> {
    let mut pool = Vec::new();
    for x in [1, 2, 3] {
        for y in ["a", "b"] {
            pool.push(format!("SELECT m FROM t WHERE x = {x} AND y = '{y}'"));
        }
    }
    let mut sets = Vec::new();
    for k in 1..=4 {
        multisets(pool.len(), k, 0, &mut Vec::new(), &mut sets);
    }
    sets.iter()
        .flat_map(|ix| [ix.clone(), ix.iter().rev().copied().collect::<Vec<_>>()])
        .map(|order| order.iter().map(|&i| pool[i].clone()).collect())
        .collect()
}
