//! Reader and writer for `.qwp` plate-sequence files.
//!
//! ```text
//! protocol := item* ;
//! item     := plate | repeat | stepmark ;
//! plate    := ("C" | "TX" | "TY") "(" angle ")" ;
//! repeat   := "REPEAT" integer "{" item* "}" ;
//! stepmark := "STEP" ;
//! angle    := number | number "*" "PI" | "PI" | "PI" "/" integer ;
//! ```
//!
//! `#` starts a comment that runs to the end of the line. `REPEAT` blocks
//! are expanded inline; `STEP` closes the current time step. Plates after
//! the last `STEP` form a final step of their own.

use std::f64::consts::PI;
use std::fmt;

use crate::protocol::{PlateOp, Protocol};

/// Upper bound on the number of plates a source may expand to.
pub const MAX_EXPANDED_PLATES: usize = 1 << 22;

/// A rejected source, located at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseDiagnostic {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number { value: f64, integer: Option<i64> },
    LParen,
    RParen,
    LBrace,
    RBrace,
    Star,
    Slash,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Number { value, .. } => write!(f, "number {value}"),
            Tok::LParen => f.write_str("'('"),
            Tok::RParen => f.write_str("')'"),
            Tok::LBrace => f.write_str("'{'"),
            Tok::RBrace => f.write_str("'}'"),
            Tok::Star => f.write_str("'*'"),
            Tok::Slash => f.write_str("'/'"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn diag(pos: Pos, message: impl Into<String>) -> ParseDiagnostic {
    ParseDiagnostic {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
                col += 1;
            }
            continue;
        }
        let single = match c {
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            _ => None,
        };
        if let Some(tok) = single {
            tokens.push(Token { tok, pos });
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            let word: String = chars[start..i].iter().collect();
            tokens.push(Token {
                tok: Tok::Ident(word),
                pos,
            });
            continue;
        }
        let starts_number = c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
            || ((c == '-' || c == '+')
                && chars
                    .get(i + 1)
                    .is_some_and(|d| d.is_ascii_digit() || *d == '.'));
        if starts_number {
            let start = i;
            let mut integer = true;
            if chars[i] == '-' || chars[i] == '+' {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                integer = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integer = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            col += i - start;
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| diag(pos, format!("malformed number '{text}'")))?;
            if !value.is_finite() {
                return Err(diag(pos, format!("non-finite number '{text}'")));
            }
            let integer = if integer {
                text.parse::<i64>().ok()
            } else {
                None
            };
            tokens.push(Token {
                tok: Tok::Number { value, integer },
                pos,
            });
            continue;
        }
        return Err(diag(pos, format!("unknown token '{c}'")));
    }
    Ok(tokens)
}

#[derive(Default)]
struct Expansion {
    plates: Vec<PlateOp>,
    boundaries: Vec<usize>,
}

impl Expansion {
    fn mark_step(&mut self) {
        let last = self.boundaries.last().copied().unwrap_or(0);
        if self.plates.len() > last {
            self.boundaries.push(self.plates.len());
        }
    }
}

enum Item {
    Plate(PlateOp),
    Repeat(usize, Vec<Item>),
    Step,
}

struct Parser {
    tokens: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.at)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    /// Next token, or a diagnostic at `fallback` when the source ended.
    fn expect_any(&mut self, fallback: Pos, what: &str) -> Result<Token, ParseDiagnostic> {
        self.next().ok_or_else(|| {
            diag(
                fallback,
                format!("unexpected end of input, expected {what}"),
            )
        })
    }

    fn expect(&mut self, want: Tok, fallback: Pos) -> Result<Token, ParseDiagnostic> {
        let t = self.expect_any(fallback, &want.to_string())?;
        if t.tok == want {
            Ok(t)
        } else {
            Err(diag(t.pos, format!("expected {want}, found {}", t.tok)))
        }
    }

    fn items(&mut self, closing: Option<Pos>) -> Result<Vec<Item>, ParseDiagnostic> {
        let mut items = Vec::new();
        loop {
            let Some(t) = self.next() else {
                return match closing {
                    Some(open) => Err(diag(open, "unbalanced braces: '{' is never closed")),
                    None => Ok(items),
                };
            };
            match &t.tok {
                Tok::RBrace => {
                    return match closing {
                        Some(_) => Ok(items),
                        None => Err(diag(t.pos, "unbalanced braces: unexpected '}'")),
                    };
                }
                Tok::Ident(word) => match word.as_str() {
                    "C" | "TX" | "TY" => {
                        let kw = word.clone();
                        let angle = self.plate_angle(t.pos)?;
                        let op = match kw.as_str() {
                            "C" => PlateOp::coin(angle),
                            "TX" => PlateOp::shift_x(angle),
                            _ => PlateOp::shift_y(angle),
                        }
                        .map_err(|_| diag(t.pos, "non-finite angle"))?;
                        items.push(Item::Plate(op));
                    }
                    "STEP" => items.push(Item::Step),
                    "REPEAT" => {
                        let count_tok = self.expect_any(t.pos, "repeat count")?;
                        let count = match count_tok.tok {
                            Tok::Number {
                                integer: Some(k), ..
                            } => k,
                            other => {
                                return Err(diag(
                                    count_tok.pos,
                                    format!("expected integer repeat count, found {other}"),
                                ))
                            }
                        };
                        if count < 1 {
                            return Err(diag(
                                count_tok.pos,
                                format!("REPEAT count must be at least 1, found {count}"),
                            ));
                        }
                        let open = self.expect(Tok::LBrace, count_tok.pos)?;
                        let body = self.items(Some(open.pos))?;
                        let count = usize::try_from(count)
                            .map_err(|_| diag(count_tok.pos, "REPEAT count too large"))?;
                        items.push(Item::Repeat(count, body));
                    }
                    "PI" => return Err(diag(t.pos, "unexpected 'PI' outside a plate angle")),
                    other => return Err(diag(t.pos, format!("unknown token '{other}'"))),
                },
                other => return Err(diag(t.pos, format!("unexpected {other}"))),
            }
        }
    }

    fn plate_angle(&mut self, kw: Pos) -> Result<f64, ParseDiagnostic> {
        let open = self.expect(Tok::LParen, kw)?;
        let first = self.expect_any(open.pos, "angle")?;
        let angle = match first.tok {
            Tok::Ident(ref w) if w == "PI" => {
                if matches!(
                    self.peek(),
                    Some(Token {
                        tok: Tok::Slash,
                        ..
                    })
                ) {
                    let slash = self.next().expect("peeked");
                    let den = self.expect_any(slash.pos, "integer divisor")?;
                    match den.tok {
                        Tok::Number {
                            integer: Some(k), ..
                        } => {
                            let v = PI / k as f64;
                            if !v.is_finite() {
                                return Err(diag(den.pos, "non-finite number: division by zero"));
                            }
                            v
                        }
                        other => {
                            return Err(diag(
                                den.pos,
                                format!("expected integer divisor, found {other}"),
                            ))
                        }
                    }
                } else {
                    PI
                }
            }
            Tok::Number { value, .. } => {
                if matches!(self.peek(), Some(Token { tok: Tok::Star, .. })) {
                    let star = self.next().expect("peeked");
                    let pi = self.expect_any(star.pos, "'PI'")?;
                    match pi.tok {
                        Tok::Ident(ref w) if w == "PI" => {}
                        other => return Err(diag(pi.pos, format!("expected 'PI', found {other}"))),
                    }
                    let v = value * PI;
                    if !v.is_finite() {
                        return Err(diag(first.pos, "non-finite number"));
                    }
                    v
                } else {
                    value
                }
            }
            other => return Err(diag(first.pos, format!("expected angle, found {other}"))),
        };
        self.expect(Tok::RParen, first.pos)?;
        Ok(angle)
    }
}

fn expand(items: &[Item], out: &mut Expansion, budget_pos: Pos) -> Result<(), ParseDiagnostic> {
    for item in items {
        match item {
            Item::Plate(op) => {
                if out.plates.len() >= MAX_EXPANDED_PLATES {
                    return Err(diag(budget_pos, "protocol expands to too many plates"));
                }
                out.plates.push(*op);
            }
            Item::Step => out.mark_step(),
            Item::Repeat(count, body) => {
                for _ in 0..*count {
                    expand(body, out, budget_pos)?;
                }
            }
        }
    }
    Ok(())
}

/// Parses and expands a protocol source.
pub fn parse_protocol(src: &str) -> Result<Protocol, ParseDiagnostic> {
    let tokens = lex(src)?;
    let first = tokens.first().map(|t| t.pos);
    let mut parser = Parser { tokens, at: 0 };
    let items = parser.items(None)?;
    let mut exp = Expansion::default();
    expand(
        &items,
        &mut exp,
        first.unwrap_or(Pos { line: 1, column: 1 }),
    )?;
    exp.mark_step();
    Ok(Protocol::new(exp.plates, exp.boundaries).expect("parser emits valid step boundaries"))
}

/// Canonical text of a protocol: one line per step, every step closed by
/// `STEP`. Angles are written with round-trip precision.
pub fn format_protocol(protocol: &Protocol) -> String {
    let mut out = String::new();
    for segment in protocol.segments() {
        for op in segment {
            out.push_str(&format!("{}({:?}) ", op.keyword(), op.angle()));
        }
        out.push_str("STEP\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_step() {
        let p = parse_protocol("C(PI/4) TX(PI) C(PI/4) TY(PI) STEP").unwrap();
        assert_eq!(p, Protocol::balanced());
    }

    #[test]
    fn empty_and_comment_only() {
        assert!(parse_protocol("").unwrap().is_empty());
        assert!(parse_protocol("  # nothing\n\n").unwrap().is_empty());
        assert_eq!(format_protocol(&Protocol::default()), "");
    }

    #[test]
    fn scaled_pi() {
        let p = parse_protocol("TX(0.5*PI)").unwrap();
        assert_eq!(p.plates(), &[PlateOp::ShiftX(PI / 2.0)]);
        assert_eq!(p.step_boundaries(), &[1]);
    }

    #[test]
    fn format_lists_plates_in_order() {
        let text = format_protocol(&Protocol::balanced());
        let kws: Vec<&str> = text
            .split_whitespace()
            .map(|t| t.split('(').next().unwrap())
            .collect();
        assert_eq!(kws, vec!["C", "TX", "C", "TY", "STEP"]);
    }

    #[test]
    fn empty_steps_collapse() {
        let p = parse_protocol("STEP C(1) STEP STEP TX(2)").unwrap();
        assert_eq!(p.step_boundaries(), &[1, 2]);
    }

    #[test]
    fn runaway_expansion_is_rejected() {
        let err = parse_protocol("REPEAT 100000 { REPEAT 100000 { C(0) } }").unwrap_err();
        assert_eq!((err.line, err.column), (1, 1));
    }
}
