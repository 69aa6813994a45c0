//! Tokenizer for the SQL subset. Whitespace and comments (`--` to end of
//! line, `/* ... */`) are dropped here, so they never reach the tree.

use super::AstError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    /// Bare or double-quoted identifier; `quoted` keeps keywords usable as names.
    Ident { text: String, quoted: bool },
    Str(String),
    Int(i64),
    Float(f64),
    Comma,
    Dot,
    LParen,
    RParen,
    Star,
    Semi,
    Minus,
    Op(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

impl Token {
    pub fn keyword(&self) -> Option<String> {
        match &self.tok {
            Tok::Ident { text, quoted: false } => Some(text.to_ascii_uppercase()),
            _ => None,
        }
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, AstError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let err = |msg: &str| AstError::Syntax { line: tl, column: tc, message: msg.to_string() };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            bump!();
            bump!();
            loop {
                if i >= chars.len() {
                    return Err(err("unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    bump!();
                    bump!();
                    break;
                }
                bump!();
            }
            continue;
        }
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            out.push(Token {
                tok: Tok::Ident { text: chars[start..i].iter().collect(), quoted: false },
                line: tl,
                column: tc,
            });
            continue;
        } else if c.is_ascii_digit() {
            let start = i;
            let mut float = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            if i < chars.len() && chars[i] == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
                float = true;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    float = true;
                    while i < j {
                        bump!();
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if float {
                Tok::Float(text.parse().map_err(|_| err("bad float literal"))?)
            } else {
                Tok::Int(text.parse().map_err(|_| err("integer literal out of range"))?)
            };
            out.push(Token { tok, line: tl, column: tc });
            continue;
        } else if c == '\'' || c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(err("unterminated quoted text"));
                }
                if chars[i] == c {
                    if chars.get(i + 1) == Some(&c) {
                        s.push(c);
                        bump!();
                        bump!();
                        continue;
                    }
                    bump!();
                    break;
                }
                s.push(chars[i]);
                bump!();
            }
            out.push(Token {
                tok: if c == '\'' { Tok::Str(s) } else { Tok::Ident { text: s, quoted: true } },
                line: tl,
                column: tc,
            });
            continue;
        } else {
            let two: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let (tok, width) = match two.as_str() {
                "<=" => (Tok::Op("<="), 2),
                ">=" => (Tok::Op(">="), 2),
                "<>" | "!=" => (Tok::Op("<>"), 2),
                _ => match c {
                    '=' => (Tok::Op("="), 1),
                    '<' => (Tok::Op("<"), 1),
                    '>' => (Tok::Op(">"), 1),
                    ',' => (Tok::Comma, 1),
                    '.' => (Tok::Dot, 1),
                    '(' => (Tok::LParen, 1),
                    ')' => (Tok::RParen, 1),
                    '*' => (Tok::Star, 1),
                    ';' => (Tok::Semi, 1),
                    '-' => (Tok::Minus, 1),
                    _ => return Err(err(&format!("unexpected character '{c}'"))),
                },
            };
            for _ in 0..width {
                bump!();
            }
            tok
        };
        out.push(Token { tok, line: tl, column: tc });
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn comments_and_whitespace_vanish() {
        assert_eq!(toks("a -- note\n /* x */ b"), toks("a b"));
    }

    #[test]
    fn numbers_and_strings() {
        assert_eq!(
            toks("1 2.5 1e3 'it''s'"),
            vec![Tok::Int(1), Tok::Float(2.5), Tok::Float(1000.0), Tok::Str("it's".into()), Tok::Eof]
        );
    }

    #[test]
    fn operators_normalize() {
        assert_eq!(toks("!= <>"), vec![Tok::Op("<>"), Tok::Op("<>"), Tok::Eof]);
    }

    #[test]
    fn error_has_position() {
        match tokenize("a\n  #") {
            Err(AstError::Syntax { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
    }
}
