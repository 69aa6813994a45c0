use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::syntax::*;
use super::{eval_statement, PilangError};
use crate::ast::{AstNode, DiffPath, NodeCatalog};
use crate::diff::{align, DiffKind, DiffTable};
use crate::log::QueryEntry;

#[derive(Clone, Debug, PartialEq)]
pub struct Suggestion {
    pub statement: Statement,
    /// Number of sampled pairs in the group.
    pub frequency: usize,
    /// One pair from the group, for showing the user what changed.
    pub example: (String, String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum KindClass {
    Change,
    Insert,
    Delete,
    Mixed,
}

fn type_chain(ast: &AstNode, path: &DiffPath) -> Vec<String> {
    let mut out = vec![ast.node_type.clone()];
    let mut cur = ast;
    for &i in &path.0 {
        cur = &cur.children[i];
        out.push(cur.node_type.clone());
    }
    out
}

/// Longest common typed prefix of the records' root-to-node chains, plus
/// the kind class a candidate must test for.
fn signature(t: &DiffTable, a: &AstNode, b: &AstNode) -> (Vec<String>, KindClass) {
    let chains: Vec<Vec<String>> = t
        .records
        .iter()
        .map(|r| if r.kind() == DiffKind::Insert { type_chain(b, &r.path) } else { type_chain(a, &r.path) })
        .collect();
    let mut lcp = chains[0].clone();
    for c in &chains[1..] {
        let n = lcp.iter().zip(c).take_while(|(x, y)| x == y).count();
        lcp.truncate(n);
    }
    let strict = chains.iter().any(|c| c.len() > lcp.len());
    let kinds: Vec<DiffKind> = t.records.iter().map(|r| r.kind()).collect();
    let class = if strict || kinds.iter().all(|k| *k == DiffKind::Replace) {
        KindClass::Change
    } else if kinds.iter().all(|k| *k == DiffKind::Insert) {
        KindClass::Insert
    } else if kinds.iter().all(|k| *k == DiffKind::Delete) {
        KindClass::Delete
    } else {
        KindClass::Mixed
    };
    (lcp, class)
}

fn candidate(chain: &[String], class: KindClass, catalog: &NodeCatalog, name: String) -> Statement {
    let last = chain.len() - 1;
    let steps = chain
        .iter()
        .enumerate()
        .filter(|(i, t)| *i == last || !catalog.is_transparent(t))
        .map(|(_, t)| Step { axis: Axis::Child, test: NodeTest::Type(t.clone()), index: None })
        .collect();
    let tau = |field| Operand::Ref(Ref { var: "T".into(), field, accessors: vec![] });
    let null = |field, negated| Expr::IsNull { operand: tau(field), negated };
    let predicate = match class {
        KindClass::Change => Some(Expr::Cmp(tau(Field::Tau1), CmpOp::Ne, tau(Field::Tau2))),
        KindClass::Insert => Some(Expr::And(Box::new(null(Field::Tau1, false)), Box::new(null(Field::Tau2, true)))),
        KindClass::Delete => Some(Expr::And(Box::new(null(Field::Tau1, true)), Box::new(null(Field::Tau2, false)))),
        KindClass::Mixed => None,
    };
    Statement {
        bindings: vec![Binding { path: PathExpr { absolute: true, steps }, var: "T".into() }],
        predicate,
        name,
        returned: "T".into(),
    }
}

fn auto_name(chain: &[String], class: KindClass) -> String {
    let verb = match class {
        KindClass::Change => "change",
        KindClass::Insert => "insert",
        KindClass::Delete => "delete",
        KindClass::Mixed => "edit",
    };
    let tail: Vec<String> = chain.iter().rev().take(2).rev().map(|t| t.to_lowercase()).collect();
    format!("{verb}-{}", tail.join("-"))
}

/// Candidate statements for the most common small differences in a
/// uniform sample of the log, excluding pairs an existing statement
/// already explains.
pub fn suggest_statements(
    log: &[QueryEntry],
    sample_size: usize,
    max_diffs: usize,
    existing: &[Statement],
    catalog: &NodeCatalog,
    seed: u64,
) -> Result<Vec<Suggestion>, PilangError> {
    let n = sample_size.min(log.len());
    if n == 0 {
        return Err(PilangError::EmptySample);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, log.len(), n).into_vec();
    picked.sort_unstable();
    let mut groups: BTreeMap<(Vec<String>, KindClass), (usize, (String, String))> = BTreeMap::new();
    for (x, &i) in picked.iter().enumerate() {
        for &j in &picked[x + 1..] {
            let (a, b) = (&log[i], &log[j]);
            let t = align(&a.ast, &b.ast, catalog).with_pids(&a.pid, &b.pid);
            if t.is_empty() || t.len() > max_diffs {
                continue;
            }
            let rev = t.reversed();
            let explained = existing.iter().any(|s| {
                eval_statement(s, &t, &a.ast, &b.ast, catalog).is_match()
                    || eval_statement(s, &rev, &b.ast, &a.ast, catalog).is_match()
            });
            if explained {
                continue;
            }
            let key = signature(&t, &a.ast, &b.ast);
            groups.entry(key).or_insert((0, (a.pid.clone(), b.pid.clone()))).0 += 1;
        }
    }
    let mut ranked: Vec<_> = groups.into_iter().collect();
    ranked.sort_by(|x, y| y.1 .0.cmp(&x.1 .0).then_with(|| x.0.cmp(&y.0)));
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    Ok(ranked
        .into_iter()
        .map(|((chain, class), (frequency, example))| {
            let base = auto_name(&chain, class);
            let k = used.entry(base.clone()).or_insert(0);
            *k += 1;
            let name = if *k == 1 { base } else { format!("{base}-{k}") };
            Suggestion { statement: candidate(&chain, class, catalog, name), frequency, example }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::sql_catalog;
    use crate::pilang::parse_one;

    fn log(qs: &[&str]) -> Vec<QueryEntry> {
        qs.iter().enumerate().map(|(i, q)| QueryEntry::parse(format!("q{i}"), *q).unwrap()).collect()
    }

    #[test]
    fn literal_edits_rank_first_and_candidates_match_their_group() {
        let l = log(&[
            "SELECT a FROM t WHERE x = 1",
            "SELECT a FROM t WHERE x = 2",
            "SELECT a FROM t WHERE x = 3",
            "SELECT a, b FROM t WHERE x = 3",
        ]);
        let s = suggest_statements(&l, 4, 1, &[], sql_catalog(), 0).unwrap();
        assert_eq!(s[0].frequency, 3);
        assert_eq!(s[0].statement.bindings[0].path.to_string(), "/Select/Where/BiExpr/IntExpr");
        assert_eq!(s[0].statement.name, "change-biexpr-intexpr");
        assert_eq!(s[1].frequency, 1);
        assert_eq!(s[1].statement.name, "insert-project-projclause");
        // each candidate explains its example pair
        for sug in &s {
            let (a, b) = (&l.iter().find(|e| e.pid == sug.example.0).unwrap(), &l.iter().find(|e| e.pid == sug.example.1).unwrap());
            let t = align(&a.ast, &b.ast, sql_catalog());
            assert!(eval_statement(&sug.statement, &t, &a.ast, &b.ast, sql_catalog()).is_match(), "{}", sug.statement);
        }
        // and round-trips through the parser
        assert_eq!(parse_one(&s[0].statement.to_string(), 1).unwrap(), s[0].statement);
    }

    #[test]
    fn existing_statements_suppress_everything() {
        let l = log(&["SELECT a FROM t WHERE x = 1", "SELECT a FROM t WHERE x = 2", "SELECT b FROM t WHERE x = 2"]);
        let all = parse_one("FROM *//* AS T MATCH anything(T)", 1).unwrap();
        assert!(suggest_statements(&l, 3, 5, &[all], sql_catalog(), 1).unwrap().is_empty());
        assert_eq!(suggest_statements(&l, 0, 5, &[], sql_catalog(), 1), Err(PilangError::EmptySample));
    }
}
