use super::syntax::*;
use super::PilangError;
use crate::ast::Value;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Word(String),
    Str(String),
    Int(i64),
    Float(f64),
    Slash,
    DSlash,
    Star,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Dot,
    DotDot,
    Minus,
    Semi,
    Op(CmpOp),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("'{w}'"),
            Tok::Str(s) => format!("string '{s}'"),
            Tok::Int(i) => format!("number {i}"),
            Tok::Float(f) => format!("number {f}"),
            Tok::Eof => "end of statement".into(),
            Tok::Op(op) => format!("'{}'", op.symbol()),
            other => format!("'{}'", match other {
                Tok::Slash => "/",
                Tok::DSlash => "//",
                Tok::Star => "*",
                Tok::LBrack => "[",
                Tok::RBrack => "]",
                Tok::LParen => "(",
                Tok::RParen => ")",
                Tok::Comma => ",",
                Tok::Dot => ".",
                Tok::DotDot => "..",
                Tok::Semi => ";",
                _ => "-",
            }),
        }
    }
}

struct Lexed {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str, first_line: usize) -> Result<Vec<Lexed>, PilangError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, first_line, 1);
    let err = |line, column, msg: String| PilangError::Syntax { line, column, expected: msg, found: String::new() };
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let bump = |n: usize, i: &mut usize, col: &mut usize| {
            *i += n;
            *col += n;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            bump(1, &mut i, &mut col);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let next = chars.get(i + 1).copied();
        let tok = match c {
            '/' if next == Some('/') => {
                bump(2, &mut i, &mut col);
                Tok::DSlash
            }
            '.' if next == Some('.') => {
                bump(2, &mut i, &mut col);
                Tok::DotDot
            }
            '!' if next == Some('=') => {
                bump(2, &mut i, &mut col);
                Tok::Op(CmpOp::Ne)
            }
            '<' if next == Some('>') => {
                bump(2, &mut i, &mut col);
                Tok::Op(CmpOp::Ne)
            }
            '<' if next == Some('=') => {
                bump(2, &mut i, &mut col);
                Tok::Op(CmpOp::Le)
            }
            '>' if next == Some('=') => {
                bump(2, &mut i, &mut col);
                Tok::Op(CmpOp::Ge)
            }
            '\'' | '"' => {
                let quote = c;
                let mut s = String::new();
                bump(1, &mut i, &mut col);
                loop {
                    match chars.get(i) {
                        None => return Err(err(l0, c0, "closing quote".into())),
                        Some(&q) if q == quote && chars.get(i + 1) == Some(&quote) => {
                            s.push(q);
                            bump(2, &mut i, &mut col);
                        }
                        Some(&q) if q == quote => {
                            bump(1, &mut i, &mut col);
                            break;
                        }
                        Some(&'\n') => return Err(err(l0, c0, "closing quote".into())),
                        Some(&q) => {
                            s.push(q);
                            bump(1, &mut i, &mut col);
                        }
                    }
                }
                Tok::Str(s)
            }
            d if d.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump(1, &mut i, &mut col);
                }
                let is_float = chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit());
                if is_float {
                    bump(1, &mut i, &mut col);
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump(1, &mut i, &mut col);
                    }
                }
                let text: String = chars[start..i].iter().collect();
                if is_float {
                    Tok::Float(text.parse().map_err(|_| err(l0, c0, "number".into()))?)
                } else {
                    Tok::Int(text.parse().map_err(|_| err(l0, c0, "number".into()))?)
                }
            }
            w if w.is_alphabetic() || w == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    bump(1, &mut i, &mut col);
                }
                Tok::Word(chars[start..i].iter().collect())
            }
            _ => {
                let t = match c {
                    '/' => Tok::Slash,
                    '*' => Tok::Star,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '-' => Tok::Minus,
                    ';' => Tok::Semi,
                    '=' => Tok::Op(CmpOp::Eq),
                    '<' => Tok::Op(CmpOp::Lt),
                    '>' => Tok::Op(CmpOp::Gt),
                    other => return Err(err(l0, c0, format!("a token, not '{other}'"))),
                };
                bump(1, &mut i, &mut col);
                t
            }
        };
        out.push(Lexed { tok, line: l0, column: c0 });
    }
    out.push(Lexed { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
}

fn is_kw(t: &Tok, kw: &str) -> bool {
    matches!(t, Tok::Word(w) if w.eq_ignore_ascii_case(kw))
}

const KEYWORDS: &[&str] = &["FROM", "AS", "WHERE", "MATCH", "AND", "OR", "NOT", "IS", "NULL"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T, PilangError> {
        let at = &self.toks[self.pos];
        Err(PilangError::Syntax {
            line: at.line,
            column: at.column,
            expected: expected.to_string(),
            found: at.tok.describe(),
        })
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if is_kw(self.peek(), kw) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), PilangError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.fail(kw)
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, PilangError> {
        match self.peek() {
            Tok::Word(w) if !KEYWORDS.iter().any(|k| w.eq_ignore_ascii_case(k)) => {
                let w = w.clone();
                self.next();
                Ok(w)
            }
            _ => self.fail(what),
        }
    }

    fn statement(&mut self) -> Result<Statement, PilangError> {
        self.expect_kw("FROM")?;
        let mut bindings = vec![self.binding()?];
        while self.eat(&Tok::Comma) {
            bindings.push(self.binding()?);
        }
        let predicate = if self.eat_kw("WHERE") { Some(self.or_expr()?) } else { None };
        self.expect_kw("MATCH")?;
        let name = self.match_name()?;
        let returned = if self.eat(&Tok::LParen) {
            let v = self.ident("variable name")?;
            if !self.eat(&Tok::RParen) {
                return self.fail("')'");
            }
            Some(v)
        } else {
            None
        };
        self.eat(&Tok::Semi);
        if *self.peek() != Tok::Eof {
            return self.fail("end of statement");
        }
        let returned = returned.unwrap_or_else(|| bindings[0].var.clone());
        let stmt = Statement { bindings, predicate, name, returned };
        check_bound(&stmt)?;
        Ok(stmt)
    }

    fn match_name(&mut self) -> Result<String, PilangError> {
        let mut name = self.ident("statement name")?;
        while matches!(self.peek(), Tok::Minus) {
            self.next();
            name.push('-');
            match self.next() {
                Tok::Word(w) => name.push_str(&w),
                Tok::Int(i) => name.push_str(&i.to_string()),
                _ => {
                    self.pos -= 1;
                    return self.fail("statement name");
                }
            }
        }
        Ok(name)
    }

    fn binding(&mut self) -> Result<Binding, PilangError> {
        let path = self.path_expr()?;
        self.expect_kw("AS")?;
        let var = self.ident("variable name")?;
        Ok(Binding { path, var })
    }

    fn path_expr(&mut self) -> Result<PathExpr, PilangError> {
        let absolute = self.eat(&Tok::Slash);
        let mut steps = vec![self.step(Axis::Child)?];
        loop {
            let axis = match self.peek() {
                Tok::Slash => Axis::Child,
                Tok::DSlash => Axis::Descendant,
                _ => break,
            };
            self.next();
            steps.push(self.step(axis)?);
        }
        Ok(PathExpr { absolute, steps })
    }

    fn node_test(&mut self) -> Result<NodeTest, PilangError> {
        match self.peek() {
            Tok::Star => {
                self.next();
                Ok(NodeTest::Any)
            }
            // node types may collide with keywords (`Where`, `Or`)
            Tok::Word(w) => {
                let t = NodeTest::Type(w.clone());
                self.next();
                Ok(t)
            }
            _ => self.fail("node type or '*'"),
        }
    }

    fn index(&mut self) -> Result<Option<usize>, PilangError> {
        if !self.eat(&Tok::LBrack) {
            return Ok(None);
        }
        let i = match self.peek() {
            Tok::Int(i) if *i >= 0 => *i as usize,
            _ => return self.fail("non-negative index"),
        };
        self.next();
        if !self.eat(&Tok::RBrack) {
            return self.fail("']'");
        }
        Ok(Some(i))
    }

    fn step(&mut self, axis: Axis) -> Result<Step, PilangError> {
        let test = self.node_test()?;
        let index = self.index()?;
        Ok(Step { axis, test, index })
    }

    fn or_expr(&mut self) -> Result<Expr, PilangError> {
        let mut e = self.and_expr()?;
        while self.eat_kw("OR") {
            e = Expr::Or(Box::new(e), Box::new(self.and_expr()?));
        }
        Ok(e)
    }

    fn and_expr(&mut self) -> Result<Expr, PilangError> {
        let mut e = self.not_expr()?;
        while self.eat_kw("AND") {
            e = Expr::And(Box::new(e), Box::new(self.not_expr()?));
        }
        Ok(e)
    }

    fn not_expr(&mut self) -> Result<Expr, PilangError> {
        if self.eat_kw("NOT") {
            return Ok(Expr::Not(Box::new(self.not_expr()?)));
        }
        if *self.peek() == Tok::LParen {
            self.next();
            let e = self.or_expr()?;
            if !self.eat(&Tok::RParen) {
                return self.fail("')'");
            }
            return Ok(e);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, PilangError> {
        let lhs = self.operand()?;
        if self.eat_kw("IS") {
            let negated = self.eat_kw("NOT");
            self.expect_kw("NULL")?;
            return Ok(Expr::IsNull { operand: lhs, negated });
        }
        let op = match self.peek() {
            Tok::Op(op) => *op,
            _ => {
                return match lhs {
                    Operand::Lit(Value::Bool(b)) => Ok(Expr::Const(b)),
                    _ => self.fail("comparison operator or 'is'"),
                }
            }
        };
        self.next();
        let rhs = self.operand()?;
        // `x = null` is always unknown in three-valued logic; keep it as
        // written rather than silently rewriting it to a null test.
        Ok(Expr::Cmp(lhs, op, rhs))
    }

    fn operand(&mut self) -> Result<Operand, PilangError> {
        match self.peek().clone() {
            Tok::Str(s) => {
                self.next();
                Ok(Operand::Lit(Value::Str(s)))
            }
            Tok::Int(i) => {
                self.next();
                Ok(Operand::Lit(Value::Int(i)))
            }
            Tok::Float(f) => {
                self.next();
                Ok(Operand::Lit(Value::Float(f)))
            }
            Tok::Minus => {
                self.next();
                match self.next() {
                    Tok::Int(i) => Ok(Operand::Lit(Value::Int(-i))),
                    Tok::Float(f) => Ok(Operand::Lit(Value::Float(-f))),
                    _ => {
                        self.pos -= 1;
                        self.fail("number")
                    }
                }
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("null") => {
                self.next();
                Ok(Operand::Null)
            }
            Tok::Word(w) if w.eq_ignore_ascii_case("true") || w.eq_ignore_ascii_case("false") => {
                self.next();
                Ok(Operand::Lit(Value::Bool(w.eq_ignore_ascii_case("true"))))
            }
            Tok::Word(w) if KEYWORDS.iter().any(|k| w.eq_ignore_ascii_case(k)) => self.fail("operand"),
            Tok::Word(_) => Ok(Operand::Ref(self.reference()?)),
            _ => self.fail("operand"),
        }
    }

    fn reference(&mut self) -> Result<Ref, PilangError> {
        let var = self.ident("variable name")?;
        if !self.eat(&Tok::Dot) {
            return self.fail("'.τ1', '.τ2' or '.τ'");
        }
        let field = match self.peek() {
            Tok::Word(w) => match w.as_str() {
                "τ" | "tau" => Field::Both,
                "τ1" | "tau1" => Field::Tau1,
                "τ2" | "tau2" => Field::Tau2,
                _ => return self.fail("τ, τ1 or τ2"),
            },
            _ => return self.fail("τ, τ1 or τ2"),
        };
        self.next();
        let mut accessors = Vec::new();
        loop {
            match self.peek() {
                Tok::Dot => {
                    self.next();
                    match self.next() {
                        Tok::Word(w) => accessors.push(Accessor::Attr(w)),
                        _ => {
                            self.pos -= 1;
                            return self.fail("attribute name");
                        }
                    }
                }
                Tok::DotDot => {
                    self.next();
                    accessors.push(Accessor::Parent);
                    // `x..op` reads as the parent's `op`
                    if let Tok::Word(w) = self.peek().clone() {
                        self.next();
                        accessors.push(Accessor::Attr(w));
                    }
                }
                Tok::Slash => {
                    self.next();
                    let test = self.node_test()?;
                    let index = self.index()?;
                    accessors.push(Accessor::Child(test, index));
                }
                _ => break,
            }
        }
        Ok(Ref { var, field, accessors })
    }
}

fn check_bound(stmt: &Statement) -> Result<(), PilangError> {
    let bound = |v: &str| stmt.bindings.iter().any(|b| b.var == v);
    if !bound(&stmt.returned) {
        return Err(PilangError::UnboundVariable(stmt.returned.clone()));
    }
    let mut vars = Vec::new();
    if let Some(p) = &stmt.predicate {
        p.vars(&mut vars);
    }
    for v in vars {
        if !bound(&v) {
            return Err(PilangError::UnboundVariable(v));
        }
    }
    let mut seen = Vec::new();
    for b in &stmt.bindings {
        if seen.contains(&&b.var) {
            return Err(PilangError::DuplicateVariable(b.var.clone()));
        }
        seen.push(&b.var);
    }
    Ok(())
}

/// Splits on blank lines (comment-only lines do not separate) and parses
/// each chunk as one statement.
pub fn parse_pilang(text: &str) -> Result<Vec<Statement>, PilangError> {
    let mut out = Vec::new();
    let mut chunk = String::new();
    let mut start = 1;
    let flush = |chunk: &mut String, start: usize, out: &mut Vec<Statement>| -> Result<(), PilangError> {
        if !chunk.trim().is_empty() {
            out.push(parse_one(chunk, start)?);
        }
        chunk.clear();
        Ok(())
    };
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            flush(&mut chunk, start, &mut out)?;
            continue;
        }
        if chunk.is_empty() {
            start = i + 1;
        }
        // comment-only lines stay as empty lines so positions are preserved
        chunk.push_str(strip_comment(line));
        chunk.push('\n');
    }
    flush(&mut chunk, start, &mut out)?;
    // an empty file is a valid, empty statement set
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    let mut quote = None;
    let b = line.as_bytes();
    for (i, &c) in b.iter().enumerate() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => {}
            None if c == b'\'' || c == b'"' => quote = Some(c),
            None if c == b'-' && b.get(i + 1) == Some(&b'-') => return &line[..i],
            None => {}
        }
    }
    line
}

/// Parses a single statement; `first_line` offsets reported positions.
pub fn parse_one(text: &str, first_line: usize) -> Result<Statement, PilangError> {
    let toks = lex(text, first_line)?;
    let mut p = Parser { toks, pos: 0 };
    p.statement()
}
