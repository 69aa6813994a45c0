use std::fmt;

use crate::ast::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    Child,
    Descendant,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NodeTest {
    Any,
    Type(String),
}

impl NodeTest {
    pub fn accepts(&self, node_type: &str) -> bool {
        match self {
            NodeTest::Any => true,
            NodeTest::Type(t) => t == node_type,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub axis: Axis,
    pub test: NodeTest,
    pub index: Option<usize>,
}

/// XPath-like pattern over the node types on a root-to-node chain. Without
/// a leading `/` the first step may match anywhere on the chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathExpr {
    pub absolute: bool,
    pub steps: Vec<Step>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub path: PathExpr,
    pub var: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Tau1,
    Tau2,
    /// `τ`: shorthand that must hold for both sides.
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Accessor {
    Attr(String),
    Parent,
    Child(NodeTest, Option<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ref {
    pub var: String,
    pub field: Field,
    pub accessors: Vec<Accessor>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Operand {
    Lit(Value),
    Null,
    Ref(Ref),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Cmp(Operand, CmpOp, Operand),
    IsNull { operand: Operand, negated: bool },
    Const(bool),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statement {
    pub bindings: Vec<Binding>,
    pub predicate: Option<Expr>,
    pub name: String,
    pub returned: String,
}

impl Expr {
    /// Variables referenced anywhere in the expression.
    pub fn vars(&self, out: &mut Vec<String>) {
        let op = |o: &Operand, out: &mut Vec<String>| {
            if let Operand::Ref(r) = o {
                if !out.contains(&r.var) {
                    out.push(r.var.clone());
                }
            }
        };
        match self {
            Expr::And(a, b) | Expr::Or(a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::Not(a) => a.vars(out),
            Expr::Cmp(l, _, r) => {
                op(l, out);
                op(r, out);
            }
            Expr::IsNull { operand, .. } => op(operand, out),
            Expr::Const(_) => {}
        }
    }
}

impl fmt::Display for NodeTest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeTest::Any => f.write_str("*"),
            NodeTest::Type(t) => f.write_str(t),
        }
    }
}

impl fmt::Display for PathExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            match (i, s.axis) {
                (0, _) if self.absolute => f.write_str("/")?,
                (0, _) => {}
                (_, Axis::Child) => f.write_str("/")?,
                (_, Axis::Descendant) => f.write_str("//")?,
            }
            write!(f, "{}", s.test)?;
            if let Some(k) = s.index {
                write!(f, "[{k}]")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for Ref {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = match self.field {
            Field::Tau1 => "τ1",
            Field::Tau2 => "τ2",
            Field::Both => "τ",
        };
        write!(f, "{}.{field}", self.var)?;
        for a in &self.accessors {
            match a {
                Accessor::Attr(n) => write!(f, ".{n}")?,
                Accessor::Parent => f.write_str("..")?,
                Accessor::Child(t, i) => {
                    write!(f, "/{t}")?;
                    if let Some(i) = i {
                        write!(f, "[{i}]")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Null => f.write_str("null"),
            Operand::Lit(Value::Str(s)) => write!(f, "'{}'", s.replace('\'', "''")),
            Operand::Lit(v) => write!(f, "{v}"),
            Operand::Ref(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::And(a, b) => write!(f, "{} AND {}", Paren(a, true), Paren(b, true)),
            Expr::Or(a, b) => write!(f, "{} OR {}", Paren(a, false), Paren(b, false)),
            Expr::Not(a) => write!(f, "NOT ({a})"),
            Expr::Cmp(l, op, r) => write!(f, "{l} {} {r}", op.symbol()),
            Expr::IsNull { operand, negated } => {
                write!(f, "{operand} is {}null", if *negated { "not " } else { "" })
            }
            Expr::Const(b) => f.write_str(if *b { "true" } else { "false" }),
        }
    }
}

struct Paren<'a>(&'a Expr, bool);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = matches!((self.0, self.1), (Expr::Or(..), true));
        if wrap {
            write!(f, "({})", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FROM ")?;
        for (i, b) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{} AS {}", b.path, b.var)?;
        }
        if let Some(p) = &self.predicate {
            write!(f, "\nWHERE {p}")?;
        }
        write!(f, "\nMATCH {}({})", self.name, self.returned)
    }
}
