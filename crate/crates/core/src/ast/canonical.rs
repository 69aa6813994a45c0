//! CNF canonicalization: every `Where` node becomes a conjunction list of
//! `Or` clause lists of `BiExpr` predicates. NOT is pushed into comparisons
//! and BETWEEN is desugared to a `>=`/`<=` pair.

use super::{AstNode, Value};

enum Formula {
    Atom(AstNode),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

pub fn canonicalize(ast: &AstNode) -> AstNode {
    if ast.node_type == "Where" {
        let conj = Formula::And(ast.children.iter().map(|c| to_nnf(c, false)).collect());
        let clauses = cnf(conj);
        return AstNode::new("Where").with_children(
            clauses.into_iter().map(|preds| AstNode::new("Or").with_children(preds)),
        );
    }
    AstNode {
        node_type: ast.node_type.clone(),
        attrs: ast.attrs.clone(),
        children: ast.children.iter().map(canonicalize).collect(),
    }
}

fn negate_op(op: &str) -> &'static str {
    match op {
        "=" => "<>",
        "<>" => "=",
        "<" => ">=",
        ">=" => "<",
        ">" => "<=",
        "<=" => ">",
        // the parser only emits the six operators above
        _ => "<>",
    }
}

fn comparison(op: &str, lhs: &AstNode, rhs: &AstNode) -> AstNode {
    AstNode::new("BiExpr").with_attr("op", op).with_children([lhs.clone(), rhs.clone()])
}

fn to_nnf(node: &AstNode, negated: bool) -> Formula {
    let kids = |neg: bool| node.children.iter().map(|c| to_nnf(c, neg)).collect::<Vec<_>>();
    match node.node_type.as_str() {
        "AndExpr" => {
            if negated {
                Formula::Or(kids(true))
            } else {
                Formula::And(kids(false))
            }
        }
        "OrExpr" | "Or" => {
            if negated {
                Formula::And(kids(true))
            } else {
                Formula::Or(kids(false))
            }
        }
        "NotExpr" => match node.children.first() {
            Some(c) => to_nnf(c, !negated),
            None => Formula::And(Vec::new()),
        },
        "BetweenExpr" if node.children.len() == 3 => {
            let (x, lo, hi) = (&node.children[0], &node.children[1], &node.children[2]);
            if negated {
                Formula::Or(vec![
                    Formula::Atom(comparison("<", x, lo)),
                    Formula::Atom(comparison(">", x, hi)),
                ])
            } else {
                Formula::And(vec![
                    Formula::Atom(comparison(">=", x, lo)),
                    Formula::Atom(comparison("<=", x, hi)),
                ])
            }
        }
        "BiExpr" if negated => {
            let mut n = node.clone();
            if let Some(Value::Str(op)) = node.attr("op") {
                n.attrs.insert("op".into(), Value::from(negate_op(op)));
            }
            Formula::Atom(n)
        }
        _ => Formula::Atom(node.clone()),
    }
}

/// Clause lists in CNF; clause order follows distribution order, so an
/// input already in CNF comes back unchanged.
fn cnf(f: Formula) -> Vec<Vec<AstNode>> {
    match f {
        Formula::Atom(a) => vec![vec![a]],
        Formula::And(parts) => parts.into_iter().flat_map(cnf).collect(),
        Formula::Or(parts) => {
            let mut acc: Vec<Vec<AstNode>> = vec![Vec::new()];
            for part in parts {
                let clauses = cnf(part);
                let mut next = Vec::with_capacity(acc.len() * clauses.len());
                for prefix in &acc {
                    for clause in &clauses {
                        let mut c = prefix.clone();
                        c.extend(clause.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parser::parse_raw;

    fn where_of(q: &str) -> Vec<Vec<String>> {
        let t = canonicalize(&parse_raw(q).unwrap());
        t.children[2]
            .children
            .iter()
            .map(|or| or.children.iter().map(|b| b.label()).collect())
            .collect()
    }

    #[test]
    fn already_cnf_only_flattens() {
        assert_eq!(
            where_of("SELECT x FROM T WHERE a>1 AND (b<2 OR c=3)"),
            vec![
                vec!["BiExpr(>, ColExpr(a), IntExpr(1))"],
                vec!["BiExpr(<, ColExpr(b), IntExpr(2))", "BiExpr(=, ColExpr(c), IntExpr(3))"],
            ]
        );
    }

    #[test]
    fn distributes_or_over_and() {
        assert_eq!(
            where_of("SELECT x FROM T WHERE (a>1 AND b<2) OR c=3"),
            vec![
                vec!["BiExpr(>, ColExpr(a), IntExpr(1))", "BiExpr(=, ColExpr(c), IntExpr(3))"],
                vec!["BiExpr(<, ColExpr(b), IntExpr(2))", "BiExpr(=, ColExpr(c), IntExpr(3))"],
            ]
        );
    }

    #[test]
    fn between_and_not_desugar() {
        assert_eq!(
            where_of("SELECT x FROM T WHERE a BETWEEN 1 AND 5"),
            vec![vec!["BiExpr(>=, ColExpr(a), IntExpr(1))"], vec!["BiExpr(<=, ColExpr(a), IntExpr(5))"]]
        );
        assert_eq!(
            where_of("SELECT x FROM T WHERE NOT (a = 1 OR b > 2)"),
            vec![vec!["BiExpr(<>, ColExpr(a), IntExpr(1))"], vec!["BiExpr(<=, ColExpr(b), IntExpr(2))"]]
        );
        assert_eq!(
            where_of("SELECT x FROM T WHERE a NOT BETWEEN 1 AND 5"),
            vec![vec!["BiExpr(<, ColExpr(a), IntExpr(1))", "BiExpr(>, ColExpr(a), IntExpr(5))"]]
        );
    }

    #[test]
    fn no_where_is_identity() {
        let raw = parse_raw("SELECT a FROM T GROUP BY a").unwrap();
        assert_eq!(canonicalize(&raw), raw);
    }

    #[test]
    fn idempotent() {
        let once = canonicalize(&parse_raw("SELECT x FROM T WHERE (a>1 AND b<2) OR NOT c=3").unwrap());
        assert_eq!(canonicalize(&once), once);
    }
}
