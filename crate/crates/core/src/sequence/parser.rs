use std::fmt;

use num_rational::Rational64;

use super::{MacroDef, SequenceProgram, Term};
use crate::angle::Angle;
use crate::ladder::{Direction, Primitive};

/// ωτ given to `FG(θ)` when the call has no explicit second argument.
pub const DEFAULT_OMEGA_TAU: Rational64 = Rational64::new_raw(1, 1);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    pub omega_tau: Rational64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            omega_tau: DEFAULT_OMEGA_TAU,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    WPlus,
    WMinus,
    LParen,
    RParen,
    Comma,
    Slash,
    Minus,
    Dot,
    Eq,
    Newline,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::WPlus => f.write_str("`W+`"),
            Tok::WMinus => f.write_str("`W-`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Newline => f.write_str("end of line"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        let tok = match c {
            '\n' => {
                bump(&mut chars);
                Tok::Newline
            }
            c if c.is_whitespace() => {
                bump(&mut chars);
                continue;
            }
            '#' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
                continue;
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    s.push(d);
                    bump(&mut chars);
                }
                let n = s.parse().map_err(|_| ParseError {
                    line: l,
                    column: col,
                    message: format!("malformed rational: integer `{s}` out of range"),
                })?;
                Tok::Int(n)
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek().filter(|d| d.is_alphanumeric() || **d == '_') {
                    s.push(d);
                    bump(&mut chars);
                }
                match (s.as_str(), chars.peek()) {
                    ("W", Some('+')) => {
                        bump(&mut chars);
                        Tok::WPlus
                    }
                    ("W", Some('-')) => {
                        bump(&mut chars);
                        Tok::WMinus
                    }
                    _ => Tok::Ident(s),
                }
            }
            _ => {
                bump(&mut chars);
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '/' => Tok::Slash,
                    '-' => Tok::Minus,
                    '.' | '\u{b7}' | '\u{22c5}' => Tok::Dot,
                    '=' => Tok::Eq,
                    ';' => Tok::Semi,
                    other => {
                        return Err(ParseError {
                            line: l,
                            column: col,
                            message: format!("unknown token `{other}`"),
                        })
                    }
                }
            }
        };
        out.push(Spanned {
            tok,
            line: l,
            column: col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    opts: ParseOptions,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: String) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError {
            line: t.line,
            column: t.column,
            message,
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        self.error_here(format!("expected {wanted}, found {}", self.peek()))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.unexpected(&tok.to_string()))
        }
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.next();
        }
    }

    /// Skips newlines only if the next significant token continues a term list.
    fn skip_newlines_before_dot(&mut self) {
        let mut k = self.pos;
        while self.toks[k].tok == Tok::Newline {
            k += 1;
        }
        if self.toks[k].tok == Tok::Dot {
            self.pos = k;
        }
    }

    fn program(&mut self) -> Result<SequenceProgram, ParseError> {
        let mut prog = SequenceProgram::default();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Newline | Tok::Semi => {
                    self.next();
                }
                Tok::Ident(s)
                    if s == "def" && matches!(self.toks[self.pos + 1].tok, Tok::Ident(_)) =>
                {
                    self.next();
                    let Tok::Ident(name) = self.next().tok else {
                        unreachable!()
                    };
                    self.expect(Tok::Eq)?;
                    let body = self.terms_opt()?;
                    prog.defs.push(MacroDef { name, body });
                    self.end_of_statement()?;
                }
                _ => {
                    let terms = self.terms()?;
                    prog.items.extend(terms);
                    self.end_of_statement()?;
                }
            }
        }
        Ok(prog)
    }

    fn end_of_statement(&mut self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Newline | Tok::Semi | Tok::Eof => Ok(()),
            _ => Err(self.unexpected("`.` or end of line")),
        }
    }

    fn terms_opt(&mut self) -> Result<Vec<Term>, ParseError> {
        match self.peek() {
            Tok::Newline | Tok::Semi | Tok::Eof => Ok(Vec::new()),
            _ => self.terms(),
        }
    }

    fn terms(&mut self) -> Result<Vec<Term>, ParseError> {
        let mut out = vec![self.term()?];
        loop {
            self.skip_newlines_before_dot();
            if *self.peek() != Tok::Dot {
                return Ok(out);
            }
            self.next();
            self.skip_newlines();
            out.push(self.term()?);
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek().clone() {
            Tok::WPlus | Tok::WMinus => {
                let dir = if self.next().tok == Tok::WPlus {
                    Direction::Up
                } else {
                    Direction::Down
                };
                let args = self.call_args(2, 2)?;
                Ok(Term::Prim(Primitive::Pulse {
                    dir,
                    alpha: Angle::from_ratio(args[0]),
                    phi: Angle::from_ratio(args[1]),
                }))
            }
            Tok::Ident(name) => {
                self.next();
                match name.as_str() {
                    "F" => Ok(Term::Prim(Primitive::f(Angle::from_ratio(
                        self.call_args(1, 1)?[0],
                    )))),
                    "G" if *self.peek() == Tok::LParen => Ok(Term::Prim(Primitive::g(
                        Angle::from_ratio(self.call_args(1, 1)?[0]),
                    ))),
                    "FG" => {
                        let args = self.call_args(1, 2)?;
                        let omega_tau = args.get(1).copied().unwrap_or(self.opts.omega_tau);
                        Ok(Term::Prim(Primitive::fg(
                            Angle::from_ratio(args[0]),
                            omega_tau,
                        )))
                    }
                    _ if *self.peek() == Tok::LParen => {
                        // conventional spelling such as EX(2,1)
                        self.next();
                        let mut label = format!("{name}(");
                        loop {
                            self.skip_newlines();
                            match self.next().tok {
                                Tok::Int(n) => label.push_str(&n.to_string()),
                                _ => {
                                    self.pos -= 1;
                                    return Err(self.unexpected("integer macro argument"));
                                }
                            }
                            self.skip_newlines();
                            match self.next().tok {
                                Tok::Comma => label.push(','),
                                Tok::RParen => break,
                                _ => {
                                    self.pos -= 1;
                                    return Err(self.unexpected("`,` or `)`"));
                                }
                            }
                        }
                        label.push(')');
                        Ok(Term::Macro(label))
                    }
                    _ => Ok(Term::Macro(name)),
                }
            }
            _ => Err(self.unexpected("a primitive or macro name")),
        }
    }

    fn call_args(&mut self, min: usize, max: usize) -> Result<Vec<Rational64>, ParseError> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        loop {
            self.skip_newlines();
            args.push(self.rational()?);
            self.skip_newlines();
            match self.peek() {
                Tok::Comma if args.len() < max => {
                    self.next();
                }
                Tok::RParen if args.len() >= min => {
                    self.next();
                    return Ok(args);
                }
                _ if args.len() < min => return Err(self.unexpected("`,`")),
                _ => return Err(self.unexpected("`)`")),
            }
        }
    }

    fn rational(&mut self) -> Result<Rational64, ParseError> {
        let start = self.pos;
        let mut negative = false;
        if *self.peek() == Tok::Minus {
            self.next();
            negative = true;
        }
        let Tok::Int(numer) = *self.peek() else {
            return Err(self.unexpected("rational"));
        };
        self.next();
        let mut denom = 1;
        if *self.peek() == Tok::Slash {
            self.next();
            let Tok::Int(d) = *self.peek() else {
                return Err(self.error_here(format!(
                    "malformed rational: expected denominator, found {}",
                    self.peek()
                )));
            };
            self.next();
            denom = d;
        }
        if denom == 0 {
            let t = &self.toks[start];
            return Err(ParseError {
                line: t.line,
                column: t.column,
                message: "malformed rational: zero denominator".into(),
            });
        }
        let r = Rational64::new(numer, denom);
        Ok(if negative { -r } else { r })
    }
}

/// Parses program text with default options.
pub fn parse(text: &str) -> Result<SequenceProgram, ParseError> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, opts: ParseOptions) -> Result<SequenceProgram, ParseError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0, opts }.program()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Angle {
        Angle::pi_frac(n, d)
    }

    #[test]
    fn not_body() {
        let p = parse("F(1/2) . W+(1/2, 0) . F(1/2)").unwrap();
        assert_eq!(
            p.items,
            vec![
                Term::Prim(Primitive::f(q(1, 2))),
                Term::Prim(Primitive::up(q(1, 2), Angle::ZERO)),
                Term::Prim(Primitive::f(q(1, 2))),
            ]
        );
    }

    #[test]
    fn empty_and_comment_only() {
        assert_eq!(parse("").unwrap(), SequenceProgram::default());
        assert_eq!(
            parse("  # nothing\n\n").unwrap(),
            SequenceProgram::default()
        );
    }

    #[test]
    fn unclosed_call() {
        let e = parse("W+(1/3,").unwrap_err();
        assert_eq!((e.line, e.column), (1, 8));
        assert!(e.message.contains("end of input"), "{e}");
    }

    #[test]
    fn malformed_rationals() {
        let e = parse("F(1/0)").unwrap_err();
        assert!(e.message.contains("zero denominator"));
        let e = parse("F(1/)").unwrap_err();
        assert!(e.message.contains("malformed rational"));
        assert!(parse("F(x)").is_err());
        assert!(parse("F(1, 2)").is_err());
    }

    #[test]
    fn unknown_token_position() {
        let e = parse("F(1)\n  . G(1/4) $").unwrap_err();
        assert_eq!((e.line, e.column), (2, 12));
        assert!(e.message.contains("unknown token"));
    }

    #[test]
    fn multiline_and_continuation() {
        let p = parse("def A = F(1) .\n   G(1/8)\n  . F(1/2) # tail\nA\nG(1/4)").unwrap();
        assert_eq!(p.defs.len(), 1);
        assert_eq!(p.defs[0].body.len(), 3);
        assert_eq!(
            p.items,
            vec![Term::Macro("A".into()), Term::Prim(Primitive::g(q(1, 4)))]
        );
    }

    #[test]
    fn macro_forms() {
        let p = parse("EX(2, 1) . NOT0 . G . SW3(2,3)").unwrap();
        assert_eq!(
            p.items,
            vec![
                Term::Macro("EX(2,1)".into()),
                Term::Macro("NOT0".into()),
                Term::Macro("G".into()),
                Term::Macro("SW3(2,3)".into())
            ]
        );
    }

    #[test]
    fn combined_free_evolution() {
        let p = parse("FG(1/8) . FG(1/8, 7/3)").unwrap();
        assert_eq!(
            p.items[0],
            Term::Prim(Primitive::fg(q(1, 8), DEFAULT_OMEGA_TAU))
        );
        assert_eq!(
            p.items[1],
            Term::Prim(Primitive::fg(q(1, 8), Rational64::new(7, 3)))
        );
        let p = parse_with(
            "FG(1/8)",
            ParseOptions {
                omega_tau: Rational64::from_integer(5),
            },
        )
        .unwrap();
        assert_eq!(
            p.items[0],
            Term::Prim(Primitive::fg(q(1, 8), Rational64::from_integer(5)))
        );
    }

    #[test]
    fn middle_dot_separator_and_negative_angles() {
        let p = parse("W-(1/4, -5/8) \u{b7} F(-1)").unwrap();
        assert_eq!(p.items[0], Term::Prim(Primitive::down(q(1, 4), q(-5, 8))));
        assert_eq!(p.items[1], Term::Prim(Primitive::f(q(-1, 1))));
    }

    #[test]
    fn statements_need_separators() {
        assert!(parse("F(1) G(1/4)").is_err());
        assert_eq!(parse("F(1); G(1/4)").unwrap().items.len(), 2);
        assert!(parse("def = F(1)").is_err());
        assert!(parse("F(1) . ").is_err());
    }
}
