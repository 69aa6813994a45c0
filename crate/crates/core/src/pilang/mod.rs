//! PILang: FROM/WHERE/MATCH statements that select which structural
//! differences between two queries count as an interaction.

mod eval;
mod parser;
mod pathexpr;
mod suggest;
mod syntax;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{AstNode, DiffPath};

pub use eval::{eval_statement, is_transitive, lift, Env, Lifted};
pub use parser::{parse_one, parse_pilang};
pub use pathexpr::match_pathexpr;
pub use suggest::{suggest_statements, Suggestion};
pub use syntax::*;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PilangError {
    #[error("line {line}, column {column}: expected {expected}{}", if found.is_empty() { String::new() } else { format!(", found {found}") })]
    Syntax { line: usize, column: usize, expected: String, found: String },
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("variable {0} bound twice")]
    DuplicateVariable(String),
    #[error("empty sample")]
    EmptySample,
}

/// One row of a statement's output: a diff record lifted to the subtree
/// its binding selected.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub statement_name: String,
    pub var: String,
    pub did: usize,
    pub pid1: String,
    pub pid2: String,
    /// Source-tree coordinates when `tau1` is present, target otherwise.
    pub path: DiffPath,
    pub counterpart: DiffPath,
    pub tau1: Option<AstNode>,
    pub tau2: Option<AstNode>,
}

impl MatchRecord {
    pub fn path1(&self) -> &DiffPath {
        if self.tau1.is_some() {
            &self.path
        } else {
            &self.counterpart
        }
    }

    pub fn path2(&self) -> &DiffPath {
        if self.tau1.is_some() {
            &self.counterpart
        } else {
            &self.path
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchTable {
    pub statement: String,
    pub pid1: String,
    pub pid2: String,
    pub records: Vec<MatchRecord>,
}

impl MatchTable {
    pub fn is_match(&self) -> bool {
        !self.records.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse_query, sql_catalog, SQL_SUBSET};
    use crate::diff::align;

    const EQUALITY: &str = "FROM Where/BiExpr AS T\nWHERE T.τ.op = '=' AND T.τ/*[0].name = 'cty'\nMATCH change-where-equal(T)";

    fn eval(stmt: &str, a: &str, b: &str) -> MatchTable {
        let s = parse_one(stmt, 1).unwrap();
        let (a, b) = (parse_query(a, SQL_SUBSET).unwrap(), parse_query(b, SQL_SUBSET).unwrap());
        let t = align(&a, &b, sql_catalog()).with_pids("p1", "p2");
        eval_statement(&s, &t, &a, &b, sql_catalog())
    }

    #[test]
    fn parses_sample_statements() {
        let s = parse_one(EQUALITY, 1).unwrap();
        assert_eq!(s.bindings.len(), 1);
        assert_eq!(s.bindings[0].var, "T");
        assert_eq!(s.name, "change-where-equal");
        assert!(is_transitive(&s));
        let long = "FROM Where/BiExpr AS T\nWHERE T.tau1.op = '=' AND T.tau2.op = '=' AND\n  T.tau1/*[0].name = 'cty' AND T.tau2/*[0].name = 'cty'\nMATCH m";
        assert!(parse_one(long, 1).is_ok());
        let ins = parse_one("FROM Project/ProjClause AS T WHERE T.τ1 is null AND T.τ2 is not null MATCH proj-insert(T)", 1).unwrap();
        assert_eq!(ins.name, "proj-insert");
        assert!(matches!(ins.predicate, Some(Expr::And(..))));
    }

    #[test]
    fn unbound_and_syntax_errors() {
        assert_eq!(parse_one("FROM a/b AS T MATCH m(Z)", 1), Err(PilangError::UnboundVariable("Z".into())));
        assert_eq!(parse_one("FROM a AS T WHERE U.τ1 is null MATCH m", 1), Err(PilangError::UnboundVariable("U".into())));
        match parse_one("FROM a AS T WHERE T.τ1 = MATCH m", 1) {
            Err(PilangError::Syntax { line: 1, column, expected, .. }) => {
                assert_eq!(column, 26);
                assert_eq!(expected, "operand");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn transitivity_heuristic() {
        let lt = parse_one("FROM Where//* AS T WHERE T.τ1.value < T.τ2.value MATCH m", 1).unwrap();
        assert!(!is_transitive(&lt));
        assert!(is_transitive(&parse_one("FROM Where//* AS T MATCH m", 1).unwrap()));
        let or = parse_one("FROM a AS T WHERE T.τ1 is null OR T.τ2 is null MATCH m", 1).unwrap();
        assert!(!is_transitive(&or));
    }

    #[test]
    fn file_with_comments_and_blank_lines() {
        let text = format!("-- equality edits\n{EQUALITY}\n\n\n-- inserts\nFROM Project/ProjClause AS T -- trailing\nWHERE T.τ1 is null\nMATCH ins(T)\n");
        let stmts = parse_pilang(&text).unwrap();
        assert_eq!(stmts.len(), 2);
        assert_eq!(stmts[1].name, "ins");
        let err = parse_pilang("FROM a AS T MATCH m\n\nFROM b T MATCH n").unwrap_err();
        assert!(matches!(err, PilangError::Syntax { line: 3, column: 8, .. }), "{err:?}");
    }

    #[test]
    fn display_round_trips() {
        for src in [EQUALITY, "FROM /Select//*[2] AS A, GroupBy/ColExpr AS B WHERE (A.τ1 is null OR B.τ2.name != 'x') AND NOT (A.τ..type = 'Or') MATCH two-vars(B)"] {
            let s = parse_one(src, 1).unwrap();
            assert_eq!(parse_one(&s.to_string(), 1).unwrap(), s);
        }
    }

    #[test]
    fn sales_pair_is_disqualified_by_project_change() {
        let m = eval(EQUALITY, "SELECT a FROM t WHERE cty = 'USA'", "SELECT a, b FROM t WHERE cty = 'EUR'");
        assert!(!m.is_match());
    }

    #[test]
    fn literal_only_pair_matches_at_biexpr() {
        let m = eval(EQUALITY, "SELECT a FROM t WHERE cty = 'USA'", "SELECT a FROM t WHERE cty = 'EUR'");
        assert_eq!(m.records.len(), 1);
        let r = &m.records[0];
        assert_eq!(r.statement_name, "change-where-equal");
        assert_eq!(r.path.to_string(), "2/0/0");
        assert_eq!(r.tau1.as_ref().unwrap().node_type, "BiExpr");
        assert_eq!(r.tau2.as_ref().unwrap().children[1].attr("value"), Some(&"EUR".into()));
        // a different column fails the predicate
        assert!(!eval(EQUALITY, "SELECT a FROM t WHERE z = 'USA'", "SELECT a FROM t WHERE z = 'EUR'").is_match());
    }

    #[test]
    fn empty_table_never_matches() {
        assert!(!eval("FROM *//* AS T MATCH any", "SELECT a FROM t", "SELECT a FROM t").is_match());
    }

    #[test]
    fn insertion_statement() {
        let ins = "FROM Project/ProjClause AS T WHERE T.τ1 is null AND T.τ2 is not null MATCH proj-insert(T)";
        let m = eval(ins, "SELECT a FROM t", "SELECT a, b FROM t");
        assert_eq!(m.records.len(), 1);
        assert_eq!(m.records[0].path.to_string(), "0/1");
        assert!(m.records[0].tau1.is_none());
        assert!(!eval(ins, "SELECT a, b FROM t", "SELECT a FROM t").is_match());
    }

    #[test]
    fn lifting_to_a_strict_ancestor_fills_both_sides() {
        // inserting an argument lifts to the ProjClause that exists in both trees
        let m = eval("FROM Project/ProjClause AS T MATCH pc(T)", "SELECT f(a) FROM t", "SELECT f(a, b) FROM t");
        assert_eq!(m.records.len(), 1);
        let r = &m.records[0];
        assert!(r.tau1.is_some() && r.tau2.is_some());
        assert_eq!(r.path.to_string(), "0/0");
    }

    #[test]
    fn multiple_bindings_need_joint_coverage() {
        let s = "FROM Project/ProjClause AS P, GroupBy/ColExpr AS G WHERE P.τ1 is null AND G.τ1 is null MATCH dim-add(P)";
        let m = eval(s, "SELECT a FROM t GROUP BY a", "SELECT a, b FROM t GROUP BY a, b");
        assert_eq!(m.records.len(), 2);
        assert_eq!(m.records[0].var, "P");
        assert_eq!(m.records[1].var, "G");
        // the group-by half alone cannot satisfy both bindings
        assert!(!eval(s, "SELECT a FROM t GROUP BY a", "SELECT a FROM t GROUP BY a, b").is_match());
    }

    #[test]
    fn missing_attribute_is_false_not_error() {
        let s = "FROM Where//* AS T WHERE T.τ.nope = 1 MATCH m";
        assert!(!eval(s, "SELECT a FROM t WHERE x = 1", "SELECT a FROM t WHERE x = 2").is_match());
        let neg = "FROM Where//* AS T WHERE NOT (T.τ.nope = 1) MATCH m";
        assert!(!eval(neg, "SELECT a FROM t WHERE x = 1", "SELECT a FROM t WHERE x = 2").is_match());
    }
}
