//! Recursive-descent parser producing the raw (pre-canonical) tree.
//!
//! Clause slots under `Select` are fixed — Project, From, Where, GroupBy,
//! OrderBy, Limit — and absent clauses are empty lists, so a missing WHERE
//! never shifts the index of GROUP BY. The raw `Where` holds a single
//! logical expression built from `AndExpr`/`OrExpr`/`NotExpr`/`BetweenExpr`
//! and `BiExpr`; canonicalization rewrites it into clause lists.

use super::lexer::{tokenize, Tok, Token};
use super::{AstError, AstNode, Value, VALUE_ATTR};

pub const SELECT_SLOTS: [&str; 6] = ["Project", "From", "Where", "GroupBy", "OrderBy", "Limit"];

const RESERVED: &[&str] = &[
    "SELECT", "FROM", "WHERE", "GROUP", "BY", "ORDER", "LIMIT", "AS", "AND", "OR", "NOT", "BETWEEN", "ASC",
    "DESC", "TRUE", "FALSE", "IS", "NULL", "IN", "LIKE", "JOIN", "ON", "HAVING", "UNION", "DISTINCT", "OFFSET",
    "WITH", "CASE", "EXISTS", "INTERSECT", "EXCEPT", "INNER", "LEFT", "RIGHT", "OUTER", "CROSS", "ALL",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word.to_ascii_uppercase().as_str())
}

pub fn parse_raw(src: &str) -> Result<AstNode, AstError> {
    if src.trim().is_empty() {
        return Err(AstError::EmptySource);
    }
    let mut p = Parser { toks: tokenize(src)?, pos: 0 };
    let q = p.select()?;
    if matches!(p.peek().tok, Tok::Semi) {
        p.pos += 1;
    }
    if let Some(k @ ("UNION" | "INTERSECT" | "EXCEPT")) = p.peek().keyword().as_deref() { return Err(AstError::Unsupported(k.to_string())) }
    if !matches!(p.peek().tok, Tok::Eof) {
        return Err(p.error("end of query"));
    }
    Ok(q)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Token {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> AstError {
        let t = self.peek();
        let found = match &t.tok {
            Tok::Ident { text, .. } => format!("'{text}'"),
            Tok::Eof => "end of input".to_string(),
            other => format!("{other:?}"),
        };
        AstError::Syntax { line: t.line, column: t.column, message: format!("expected {expected}, found {found}") }
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.peek().keyword().as_deref() == Some(kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), AstError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            Err(self.error(kw))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.next();
            true
        } else {
            false
        }
    }

    fn unsupported_here(&self) -> Result<(), AstError> {
        if let Some(k) = self.peek().keyword() {
            let named = match k.as_str() {
                "JOIN" | "INNER" | "LEFT" | "RIGHT" | "OUTER" | "CROSS" | "ON" => Some("JOIN"),
                "HAVING" | "UNION" | "DISTINCT" | "OFFSET" | "WITH" | "CASE" | "EXISTS" | "IN" | "LIKE"
                | "INTERSECT" | "EXCEPT" | "ALL" => Some(k.as_str()),
                "IS" => Some("IS NULL"),
                "NULL" => Some("NULL"),
                _ => None,
            };
            if let Some(n) = named {
                return Err(AstError::Unsupported(n.to_string()));
            }
        }
        Ok(())
    }

    fn ident(&mut self, what: &str) -> Result<String, AstError> {
        self.unsupported_here()?;
        match &self.peek().tok {
            Tok::Ident { text, quoted } if *quoted || !is_reserved(text) => {
                let t = text.clone();
                self.next();
                Ok(t)
            }
            _ => Err(self.error(what)),
        }
    }

    fn select(&mut self) -> Result<AstNode, AstError> {
        if self.at_kw("WITH") {
            return Err(AstError::Unsupported("WITH".into()));
        }
        self.expect_kw("SELECT")?;
        if self.at_kw("DISTINCT") || self.at_kw("ALL") {
            return Err(AstError::Unsupported(self.peek().keyword().unwrap_or_default()));
        }
        let mut project = AstNode::new("Project");
        loop {
            project.children.push(self.proj_clause()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect_kw("FROM")?;
        let mut from = AstNode::new("From");
        loop {
            from.children.push(self.table_ref()?);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.unsupported_here()?;
        let mut where_ = AstNode::new("Where");
        if self.eat_kw("WHERE") {
            where_.children.push(self.or_cond()?);
        }
        let mut group = AstNode::new("GroupBy");
        if self.eat_kw("GROUP") {
            self.expect_kw("BY")?;
            loop {
                group.children.push(self.column()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.unsupported_here()?;
        let mut order = AstNode::new("OrderBy");
        if self.eat_kw("ORDER") {
            self.expect_kw("BY")?;
            loop {
                let e = self.operand()?;
                let dir = if self.eat_kw("DESC") {
                    "DESC"
                } else {
                    self.eat_kw("ASC");
                    "ASC"
                };
                order.children.push(AstNode::new("OrderItem").with_attr("dir", dir).with_child(e));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        let mut limit = AstNode::new("Limit");
        if self.eat_kw("LIMIT") {
            match self.next().tok {
                Tok::Int(n) => limit.children.push(literal("IntExpr", Value::Int(n))),
                _ => {
                    self.pos -= 1;
                    return Err(self.error("integer LIMIT"));
                }
            }
        }
        self.unsupported_here()?;
        Ok(AstNode::new("Select").with_children([project, from, where_, group, order, limit]))
    }

    fn proj_clause(&mut self) -> Result<AstNode, AstError> {
        let expr = if self.eat(&Tok::Star) {
            AstNode::new("ColExpr").with_attr("name", "*")
        } else {
            self.operand()?
        };
        let mut clause = AstNode::new("ProjClause");
        if self.eat_kw("AS") {
            clause.attrs.insert("alias".into(), Value::Str(self.ident("alias")?));
        } else if let Tok::Ident { text, quoted } = &self.peek().tok {
            if *quoted || !is_reserved(text) {
                let a = text.clone();
                self.next();
                clause.attrs.insert("alias".into(), Value::Str(a));
            }
        }
        Ok(clause.with_child(expr))
    }

    fn table_ref(&mut self) -> Result<AstNode, AstError> {
        if matches!(self.peek().tok, Tok::LParen) {
            return Err(AstError::Unsupported("subquery".into()));
        }
        let name = self.ident("table name")?;
        let mut t = AstNode::new("TableRef").with_attr("name", name);
        if self.eat_kw("AS") {
            t.attrs.insert("alias".into(), Value::Str(self.ident("table alias")?));
        } else if let Tok::Ident { text, quoted } = &self.peek().tok {
            if *quoted || !is_reserved(text) {
                let a = text.clone();
                self.next();
                t.attrs.insert("alias".into(), Value::Str(a));
            }
        }
        Ok(t)
    }

    fn column(&mut self) -> Result<AstNode, AstError> {
        let mut name = self.ident("column name")?;
        while self.eat(&Tok::Dot) {
            if self.eat(&Tok::Star) {
                name.push_str(".*");
                break;
            }
            name.push('.');
            name.push_str(&self.ident("column name")?);
        }
        Ok(AstNode::new("ColExpr").with_attr("name", name))
    }

    /// Column, function call or literal.
    fn operand(&mut self) -> Result<AstNode, AstError> {
        self.unsupported_here()?;
        let t = self.peek().clone();
        match &t.tok {
            Tok::Str(s) => {
                self.next();
                Ok(literal("StrExpr", Value::Str(s.clone())))
            }
            Tok::Int(n) => {
                self.next();
                Ok(literal("IntExpr", Value::Int(*n)))
            }
            Tok::Float(x) => {
                self.next();
                Ok(literal("FloatExpr", Value::Float(*x)))
            }
            Tok::Minus => {
                self.next();
                match self.next().tok {
                    Tok::Int(n) => Ok(literal("IntExpr", Value::Int(-n))),
                    Tok::Float(x) => Ok(literal("FloatExpr", Value::Float(-x))),
                    _ => {
                        self.pos -= 1;
                        Err(self.error("numeric literal after '-'"))
                    }
                }
            }
            Tok::LParen => {
                if self.peek_at(1).keyword().as_deref() == Some("SELECT") {
                    Err(AstError::Unsupported("subquery".into()))
                } else {
                    Err(AstError::Unsupported("parenthesized expression".into()))
                }
            }
            Tok::Ident { quoted: false, .. } if self.at_kw("TRUE") || self.at_kw("FALSE") => {
                let b = self.at_kw("TRUE");
                self.next();
                Ok(literal("BoolExpr", Value::Bool(b)))
            }
            Tok::Ident { text, .. } if matches!(self.peek_at(1).tok, Tok::LParen) => {
                if is_reserved(text) && !matches!(t.tok, Tok::Ident { quoted: true, .. }) {
                    self.unsupported_here()?;
                    return Err(self.error("expression"));
                }
                let name = text.clone();
                self.next();
                self.next();
                let mut f = AstNode::new("FuncExpr").with_attr("name", name);
                if !self.eat(&Tok::RParen) {
                    if self.at_kw("DISTINCT") {
                        return Err(AstError::Unsupported("DISTINCT".into()));
                    }
                    loop {
                        let arg = if self.eat(&Tok::Star) {
                            AstNode::new("ColExpr").with_attr("name", "*")
                        } else {
                            self.operand()?
                        };
                        f.children.push(arg);
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    if !self.eat(&Tok::RParen) {
                        return Err(self.error("')'"));
                    }
                }
                Ok(f)
            }
            Tok::Ident { .. } => self.column(),
            _ => Err(self.error("expression")),
        }
    }

    fn or_cond(&mut self) -> Result<AstNode, AstError> {
        let first = self.and_cond()?;
        if !self.at_kw("OR") {
            return Ok(first);
        }
        let mut node = AstNode::new("OrExpr").with_child(first);
        while self.eat_kw("OR") {
            node.children.push(self.and_cond()?);
        }
        Ok(node)
    }

    fn and_cond(&mut self) -> Result<AstNode, AstError> {
        let first = self.not_cond()?;
        if !self.at_kw("AND") {
            return Ok(first);
        }
        let mut node = AstNode::new("AndExpr").with_child(first);
        while self.eat_kw("AND") {
            node.children.push(self.not_cond()?);
        }
        Ok(node)
    }

    fn not_cond(&mut self) -> Result<AstNode, AstError> {
        if self.eat_kw("NOT") {
            return Ok(AstNode::new("NotExpr").with_child(self.not_cond()?));
        }
        if matches!(self.peek().tok, Tok::LParen) {
            if self.peek_at(1).keyword().as_deref() == Some("SELECT") {
                return Err(AstError::Unsupported("subquery".into()));
            }
            self.next();
            let inner = self.or_cond()?;
            if !self.eat(&Tok::RParen) {
                return Err(self.error("')'"));
            }
            return Ok(inner);
        }
        self.predicate()
    }

    fn predicate(&mut self) -> Result<AstNode, AstError> {
        let lhs = self.operand()?;
        let negated = self.eat_kw("NOT");
        if self.eat_kw("BETWEEN") {
            let lo = self.operand()?;
            self.expect_kw("AND")?;
            let hi = self.operand()?;
            let b = AstNode::new("BetweenExpr").with_children([lhs, lo, hi]);
            return Ok(if negated { AstNode::new("NotExpr").with_child(b) } else { b });
        }
        if negated {
            self.unsupported_here()?;
            return Err(self.error("BETWEEN"));
        }
        self.unsupported_here()?;
        match self.peek().tok {
            Tok::Op(op) => {
                self.next();
                let rhs = self.operand()?;
                Ok(AstNode::new("BiExpr").with_attr("op", op).with_children([lhs, rhs]))
            }
            _ => Err(self.error("comparison operator")),
        }
    }
}

fn literal(node_type: &str, v: Value) -> AstNode {
    AstNode::new(node_type).with_attr(VALUE_ATTR, v)
}
