//! Single-line SQL rendering with uppercase keywords and single spaces.

use super::parser::{is_reserved, SELECT_SLOTS};
use super::{AstError, AstNode, DiffPath, NodeCatalog, Value, VALUE_ATTR};

pub fn unparse(ast: &AstNode, catalog: &NodeCatalog) -> Result<String, AstError> {
    catalog.check(ast)?;
    Render { path: Vec::new() }.node(ast)
}

/// Renders any subtree, e.g. `'USA'` for a string literal or `(a = 1 OR b = 2)`
/// for a clause. Used for diff output and widget option labels.
pub fn unparse_fragment(node: &AstNode, catalog: &NodeCatalog) -> Result<String, AstError> {
    unparse(node, catalog)
}

struct Render {
    path: Vec<usize>,
}

impl Render {
    fn bad(&self, node: &AstNode, reason: &str) -> AstError {
        AstError::MalformedTree {
            node_type: node.node_type.clone(),
            path: DiffPath(self.path.clone()),
            reason: reason.to_string(),
        }
    }

    fn child(&mut self, node: &AstNode, i: usize) -> Result<String, AstError> {
        let c = node.children.get(i).ok_or_else(|| self.bad(node, "missing child"))?;
        self.path.push(i);
        let out = self.node(c);
        self.path.pop();
        out
    }

    fn join(&mut self, node: &AstNode, sep: &str) -> Result<String, AstError> {
        let parts = (0..node.children.len()).map(|i| self.child(node, i)).collect::<Result<Vec<_>, _>>()?;
        Ok(parts.join(sep))
    }

    fn str_attr<'a>(&self, node: &'a AstNode, name: &str) -> Result<&'a str, AstError> {
        match node.attr(name) {
            Some(Value::Str(s)) => Ok(s),
            _ => Err(self.bad(node, &format!("missing string attribute '{name}'"))),
        }
    }

    fn node(&mut self, node: &AstNode) -> Result<String, AstError> {
        let n = node;
        match n.node_type.as_str() {
            "Select" => {
                let slots: Vec<&str> = n.children.iter().map(|c| c.node_type.as_str()).collect();
                if slots != SELECT_SLOTS {
                    return Err(self.bad(n, "Select must hold Project, From, Where, GroupBy, OrderBy, Limit"));
                }
                if n.children[0].children.is_empty() {
                    return Err(self.bad(n, "empty projection"));
                }
                if n.children[1].children.is_empty() {
                    return Err(self.bad(n, "empty FROM"));
                }
                let mut out = format!("SELECT {} FROM {}", self.child(n, 0)?, self.child(n, 1)?);
                for (i, kw) in [(2, " WHERE "), (3, " GROUP BY "), (4, " ORDER BY "), (5, " LIMIT ")] {
                    if !n.children[i].children.is_empty() {
                        out.push_str(kw);
                        out.push_str(&self.child(n, i)?);
                    }
                }
                Ok(out)
            }
            "Project" | "From" | "GroupBy" | "OrderBy" => self.join(n, ", "),
            "Limit" => {
                if n.children.len() > 1 {
                    return Err(self.bad(n, "LIMIT takes one value"));
                }
                self.join(n, "")
            }
            "Where" | "AndExpr" => {
                let parts = (0..n.children.len())
                    .map(|i| {
                        let s = self.child(n, i)?;
                        let c = &n.children[i];
                        let wrap = matches!(c.node_type.as_str(), "OrExpr") || (c.node_type == "Or" && c.children.len() > 1);
                        Ok(if wrap { format!("({s})") } else { s })
                    })
                    .collect::<Result<Vec<_>, AstError>>()?;
                Ok(parts.join(" AND "))
            }
            "Or" | "OrExpr" => {
                if n.children.is_empty() {
                    return Err(self.bad(n, "empty disjunction"));
                }
                let parts = (0..n.children.len())
                    .map(|i| {
                        let s = self.child(n, i)?;
                        Ok(if n.children[i].node_type == "AndExpr" { format!("({s})") } else { s })
                    })
                    .collect::<Result<Vec<_>, AstError>>()?;
                Ok(parts.join(" OR "))
            }
            "NotExpr" => Ok(format!("NOT ({})", self.child(n, 0)?)),
            "BetweenExpr" => Ok(format!("{} BETWEEN {} AND {}", self.child(n, 0)?, self.child(n, 1)?, self.child(n, 2)?)),
            "BiExpr" => {
                if n.children.len() != 2 {
                    return Err(self.bad(n, "comparison needs two operands"));
                }
                let op = self.str_attr(n, "op")?;
                if !matches!(op, "=" | "<>" | "<" | "<=" | ">" | ">=") {
                    return Err(self.bad(n, "unknown comparison operator"));
                }
                Ok(format!("{} {op} {}", self.child(n, 0)?, self.child(n, 1)?))
            }
            "ProjClause" => {
                if n.children.len() != 1 {
                    return Err(self.bad(n, "projection clause holds one expression"));
                }
                let e = self.child(n, 0)?;
                Ok(match n.attr("alias") {
                    Some(Value::Str(a)) => format!("{e} AS {}", ident(a)),
                    _ => e,
                })
            }
            "TableRef" => {
                let name = qualified(self.str_attr(n, "name")?);
                Ok(match n.attr("alias") {
                    Some(Value::Str(a)) => format!("{name} AS {}", ident(a)),
                    _ => name,
                })
            }
            "ColExpr" => {
                if !n.children.is_empty() {
                    return Err(self.bad(n, "column reference has children"));
                }
                Ok(qualified(self.str_attr(n, "name")?))
            }
            "FuncExpr" => {
                let name = self.str_attr(n, "name")?;
                Ok(format!("{}({})", ident(name), self.join(n, ", ")?))
            }
            "OrderItem" => {
                let dir = self.str_attr(n, "dir")?;
                if dir != "ASC" && dir != "DESC" {
                    return Err(self.bad(n, "direction must be ASC or DESC"));
                }
                Ok(format!("{} {dir}", self.child(n, 0)?))
            }
            "StrExpr" | "IntExpr" | "FloatExpr" | "BoolExpr" => {
                let v = n.attr(VALUE_ATTR).ok_or_else(|| self.bad(n, "literal without value"))?;
                match (n.node_type.as_str(), v) {
                    ("StrExpr", Value::Str(s)) => Ok(format!("'{}'", s.replace('\'', "''"))),
                    ("IntExpr", Value::Int(i)) => Ok(i.to_string()),
                    ("FloatExpr", Value::Float(x)) if x.is_finite() => Ok(format!("{x:?}")),
                    ("BoolExpr", Value::Bool(b)) => Ok(if *b { "TRUE" } else { "FALSE" }.to_string()),
                    _ => Err(self.bad(n, "literal value does not match its type")),
                }
            }
            _ => Err(self.bad(n, "unknown node type")),
        }
    }
}

fn plain(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_reserved(s)
}

fn ident(s: &str) -> String {
    if plain(s) {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('"', "\"\""))
    }
}

fn qualified(name: &str) -> String {
    name.split('.').map(|part| if part == "*" { "*".to_string() } else { ident(part) }).collect::<Vec<_>>().join(".")
}
