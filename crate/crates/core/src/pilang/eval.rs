use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::{Mutex, OnceLock};

use super::pathexpr::match_pathexpr;
use super::syntax::*;
use super::{MatchRecord, MatchTable};
use crate::ast::{AstNode, DiffPath, NodeCatalog, Value, VALUE_ATTR};
use crate::diff::{DiffKind, DiffRecord, DiffTable};

/// A diff record lifted to the ancestor selected by one binding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lifted {
    pub did: usize,
    /// Coordinates of the lifted node in each tree; `None` where that side
    /// of the record is null.
    pub t1: Option<DiffPath>,
    pub t2: Option<DiffPath>,
    pub path: DiffPath,
    pub counterpart: DiffPath,
}

/// Lifts `r` to the deepest ancestor matched by `expr`, or `None` if the
/// pattern misses. Matching runs on the record's own side: the source tree
/// unless the record is an insertion.
pub fn lift(expr: &PathExpr, r: &DiffRecord, ast1: &AstNode, ast2: &AstNode, catalog: &NodeCatalog) -> Option<Lifted> {
    let side = if r.tau1.is_some() { ast1 } else { ast2 };
    let at = match_pathexpr(expr, &r.path, side, catalog)?;
    let d = at.len();
    let (p1, p2) = (r.path1().prefix(d), r.path2().prefix(d));
    let (t1, t2) = if d == r.path.len() {
        (r.tau1.as_ref().map(|_| p1.clone()), r.tau2.as_ref().map(|_| p2.clone()))
    } else {
        (Some(p1.clone()), Some(p2.clone()))
    };
    let (path, counterpart) = if t1.is_some() { (p1, p2) } else { (p2, p1) };
    Some(Lifted { did: r.did, t1, t2, path, counterpart })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum T3 {
    True,
    False,
    Unknown,
}

impl T3 {
    fn and(self, o: T3) -> T3 {
        match (self, o) {
            (T3::False, _) | (_, T3::False) => T3::False,
            (T3::True, T3::True) => T3::True,
            _ => T3::Unknown,
        }
    }
    fn or(self, o: T3) -> T3 {
        match (self, o) {
            (T3::True, _) | (_, T3::True) => T3::True,
            (T3::False, T3::False) => T3::False,
            _ => T3::Unknown,
        }
    }
    fn not(self) -> T3 {
        match self {
            T3::True => T3::False,
            T3::False => T3::True,
            T3::Unknown => T3::Unknown,
        }
    }
    fn of(b: bool) -> T3 {
        if b {
            T3::True
        } else {
            T3::False
        }
    }
}

enum V<'a> {
    Null,
    Prim(Value),
    Node(&'a AstNode, u8, DiffPath),
}

pub struct Env<'a> {
    pub ast1: &'a AstNode,
    pub ast2: &'a AstNode,
    pub catalog: &'a NodeCatalog,
    pub vars: Vec<(&'a str, &'a Lifted)>,
}

fn warn_missing(attr: &str, node_type: &str) {
    static SEEN: OnceLock<Mutex<HashSet<(String, String)>>> = OnceLock::new();
    let seen = SEEN.get_or_init(Default::default);
    if let Ok(mut s) = seen.lock() {
        if s.insert((attr.to_string(), node_type.to_string())) {
            tracing::warn!(attr, node_type, "attribute missing; comparison treated as unknown");
        }
    }
}

impl<'a> Env<'a> {
    fn tree(&self, side: u8) -> &'a AstNode {
        if side == 1 {
            self.ast1
        } else {
            self.ast2
        }
    }

    fn node(&self, side: u8, path: DiffPath) -> V<'a> {
        match self.tree(side).subtree_at(&path) {
            Ok(n) => V::Node(n, side, path),
            Err(_) => V::Null,
        }
    }

    fn resolve(&self, r: &Ref, pass: u8) -> V<'a> {
        let Some((_, row)) = self.vars.iter().find(|(v, _)| *v == r.var) else {
            return V::Null;
        };
        let side = match r.field {
            Field::Tau1 => 1,
            Field::Tau2 => 2,
            Field::Both => pass,
        };
        let start = if side == 1 { &row.t1 } else { &row.t2 };
        let mut cur = match start {
            Some(p) => self.node(side, p.clone()),
            None => V::Null,
        };
        for acc in &r.accessors {
            cur = match (cur, acc) {
                (V::Node(n, _, _), Accessor::Attr(name)) => match n.attr(name) {
                    Some(v) => V::Prim(v.clone()),
                    None if name == "type" => V::Prim(Value::Str(n.node_type.clone())),
                    None => {
                        warn_missing(name, &n.node_type);
                        V::Null
                    }
                },
                (V::Node(_, s, p), Accessor::Parent) => match p.parent() {
                    Some(pp) => self.node(s, pp),
                    None => V::Null,
                },
                (V::Node(n, s, p), Accessor::Child(test, index)) => {
                    let want = index.unwrap_or(0);
                    let hit = match test {
                        NodeTest::Any => n.children.get(want).map(|_| want),
                        NodeTest::Type(_) => n
                            .children
                            .iter()
                            .enumerate()
                            .filter(|(_, c)| test.accepts(&c.node_type))
                            .nth(want)
                            .map(|(i, _)| i),
                    };
                    match hit {
                        Some(i) => self.node(s, p.child(i)),
                        None => V::Null,
                    }
                }
                _ => V::Null,
            };
        }
        cur
    }

    fn operand(&self, o: &Operand, pass: u8) -> V<'a> {
        match o {
            Operand::Null => V::Null,
            Operand::Lit(v) => V::Prim(v.clone()),
            Operand::Ref(r) => self.resolve(r, pass),
        }
    }

    fn literal_value(&self, n: &AstNode) -> Option<Value> {
        if self.catalog.is_literal(&n.node_type) {
            n.attr(VALUE_ATTR).cloned()
        } else {
            None
        }
    }

    fn compare(&self, l: V, op: CmpOp, r: V) -> T3 {
        let ord = match (&l, &r) {
            (V::Null, _) | (_, V::Null) => return T3::Unknown,
            (V::Node(a, ..), V::Node(b, ..)) => match (op, self.literal_value(a), self.literal_value(b)) {
                (_, Some(x), Some(y)) if a.node_type == b.node_type => prim_cmp(&x, &y),
                (CmpOp::Eq, ..) => return T3::of(a == b),
                (CmpOp::Ne, ..) => return T3::of(a != b),
                _ => None,
            },
            (V::Node(a, ..), V::Prim(y)) => self.literal_value(a).and_then(|x| prim_cmp(&x, y)),
            (V::Prim(x), V::Node(b, ..)) => self.literal_value(b).and_then(|y| prim_cmp(x, &y)),
            (V::Prim(x), V::Prim(y)) => prim_cmp(x, y),
        };
        let Some(ord) = ord else {
            return T3::Unknown;
        };
        T3::of(match op {
            CmpOp::Eq => ord == Ordering::Equal,
            CmpOp::Ne => ord != Ordering::Equal,
            CmpOp::Lt => ord == Ordering::Less,
            CmpOp::Le => ord != Ordering::Greater,
            CmpOp::Gt => ord == Ordering::Greater,
            CmpOp::Ge => ord != Ordering::Less,
        })
    }

    fn atom(&self, e: &Expr, pass: u8) -> T3 {
        match e {
            Expr::Cmp(l, op, r) => self.compare(self.operand(l, pass), *op, self.operand(r, pass)),
            Expr::IsNull { operand, negated } => {
                let is_null = matches!(self.operand(operand, pass), V::Null);
                T3::of(is_null != *negated)
            }
            _ => unreachable!(),
        }
    }

    fn eval(&self, e: &Expr) -> T3 {
        match e {
            Expr::And(a, b) => self.eval(a).and(self.eval(b)),
            Expr::Or(a, b) => self.eval(a).or(self.eval(b)),
            Expr::Not(a) => self.eval(a).not(),
            Expr::Const(b) => T3::of(*b),
            Expr::Cmp(..) | Expr::IsNull { .. } => {
                if uses_both(e) {
                    self.atom(e, 1).and(self.atom(e, 2))
                } else {
                    self.atom(e, 1)
                }
            }
        }
    }

    /// Three-valued evaluation collapsed to a boolean; unknown is false.
    pub fn holds(&self, e: &Expr) -> bool {
        self.eval(e) == T3::True
    }
}

fn uses_both(e: &Expr) -> bool {
    let f = |o: &Operand| matches!(o, Operand::Ref(r) if r.field == Field::Both);
    match e {
        Expr::Cmp(l, _, r) => f(l) || f(r),
        Expr::IsNull { operand, .. } => f(operand),
        _ => false,
    }
}

fn prim_cmp(a: &Value, b: &Value) -> Option<Ordering> {
    match (a, b) {
        (Value::Str(x), Value::Str(y)) => Some(x.cmp(y)),
        (Value::Bool(x), Value::Bool(y)) => Some(x.cmp(y)),
        (Value::Int(x), Value::Int(y)) => Some(x.cmp(y)),
        _ if a.is_numeric() && b.is_numeric() => a.as_f64()?.partial_cmp(&b.as_f64()?),
        _ => None,
    }
}

/// Evaluates a statement over one pair's diff table.
///
/// Every record must be lifted by some binding and take part in an
/// assignment (one lifted record per binding) that satisfies the predicate;
/// otherwise the pair does not match and the table is empty.
pub fn eval_statement(stmt: &Statement, table: &DiffTable, ast1: &AstNode, ast2: &AstNode, catalog: &NodeCatalog) -> MatchTable {
    let empty = MatchTable { statement: stmt.name.clone(), pid1: table.pid1.clone(), pid2: table.pid2.clone(), records: Vec::new() };
    if table.is_empty() {
        return empty;
    }
    let rows: Vec<Vec<Lifted>> = stmt
        .bindings
        .iter()
        .map(|b| table.records.iter().filter_map(|r| lift(&b.path, r, ast1, ast2, catalog)).collect())
        .collect();
    if rows.iter().any(Vec::is_empty) {
        return empty;
    }
    // participates[b][k]: row k of binding b appears in a satisfying assignment
    let mut participates: Vec<Vec<bool>> = rows.iter().map(|r| vec![false; r.len()]).collect();
    match &stmt.predicate {
        None => participates.iter_mut().for_each(|p| p.fill(true)),
        Some(pred) => {
            let mut used = Vec::new();
            pred.vars(&mut used);
            let active: Vec<usize> = (0..stmt.bindings.len()).filter(|&b| used.contains(&stmt.bindings[b].var)).collect();
            let mut any = false;
            let mut idx = vec![0usize; active.len()];
            'assign: loop {
                let env = Env {
                    ast1,
                    ast2,
                    catalog,
                    vars: active.iter().zip(&idx).map(|(&b, &k)| (stmt.bindings[b].var.as_str(), &rows[b][k])).collect(),
                };
                if env.holds(pred) {
                    any = true;
                    for (&b, &k) in active.iter().zip(&idx) {
                        participates[b][k] = true;
                    }
                }
                // odometer over the bindings the predicate mentions
                let mut pos = active.len();
                loop {
                    if pos == 0 {
                        break 'assign;
                    }
                    pos -= 1;
                    idx[pos] += 1;
                    if idx[pos] < rows[active[pos]].len() {
                        continue 'assign;
                    }
                    idx[pos] = 0;
                }
            }
            if any {
                for b in 0..stmt.bindings.len() {
                    if !active.contains(&b) {
                        participates[b].fill(true);
                    }
                }
            }
        }
    }
    let returned = stmt.bindings.iter().position(|b| b.var == stmt.returned).unwrap_or(0);
    let mut order: Vec<usize> = vec![returned];
    order.extend((0..stmt.bindings.len()).filter(|&b| b != returned));
    let mut out = Vec::with_capacity(table.len());
    for r in &table.records {
        let hit = order.iter().find_map(|&b| {
            rows[b].iter().zip(&participates[b]).find(|(l, ok)| **ok && l.did == r.did).map(|(l, _)| (b, l))
        });
        let Some((b, l)) = hit else {
            return empty;
        };
        out.push(to_match(stmt, &stmt.bindings[b].var, table, l, ast1, ast2));
    }
    out.sort_by_key(|r| r.did);
    MatchTable { records: out, ..empty }
}

fn to_match(stmt: &Statement, var: &str, table: &DiffTable, l: &Lifted, ast1: &AstNode, ast2: &AstNode) -> MatchRecord {
    let get = |t: &AstNode, p: &Option<DiffPath>| p.as_ref().and_then(|p| t.subtree_at(p).ok().cloned());
    MatchRecord {
        statement_name: stmt.name.clone(),
        var: var.to_string(),
        did: l.did,
        pid1: table.pid1.clone(),
        pid2: table.pid2.clone(),
        path: l.path.clone(),
        counterpart: l.counterpart.clone(),
        tau1: get(ast1, &l.t1),
        tau2: get(ast2, &l.t2),
    }
}

/// Transitive by construction: only equality, inequality and null tests
/// joined by AND.
pub fn is_transitive(stmt: &Statement) -> bool {
    fn ok(e: &Expr) -> bool {
        match e {
            Expr::And(a, b) => ok(a) && ok(b),
            Expr::Cmp(_, op, _) => matches!(op, CmpOp::Eq | CmpOp::Ne),
            Expr::IsNull { .. } => true,
            Expr::Const(_) => true,
            Expr::Or(..) | Expr::Not(_) => false,
        }
    }
    stmt.predicate.as_ref().is_none_or(ok)
}

impl MatchTable {
    pub fn kinds(&self) -> impl Iterator<Item = DiffKind> + '_ {
        self.records.iter().map(|r| match (&r.tau1, &r.tau2) {
            (Some(_), Some(_)) => DiffKind::Replace,
            (Some(_), None) => DiffKind::Delete,
            _ => DiffKind::Insert,
        })
    }
}
