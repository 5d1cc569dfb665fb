//! The `.ta` text format.
//!
//! ```text
//! # comment
//! clocks x y
//! state q0 initial
//! state q1 accepting
//! trans q0 -> q1 guard x >= 1 && y < 2 reset x
//! ```

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::automaton::{Atom, Automaton, AutomatonError, Comparison, Guard, Transition};

/// A parse failure at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Arrow,
    And,
    Cmp(CmpTok),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CmpTok {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Arrow => write!(f, "`->`"),
            Tok::And => write!(f, "`&&`"),
            Tok::Cmp(_) => write!(f, "comparison"),
        }
    }
}

struct Lexed {
    tok: Tok,
    column: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

fn lex(line_no: usize, text: &str) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let end = (i..chars.len())
                .find(|&j| !(chars[j].is_ascii_alphanumeric() || chars[j] == '_'))
                .unwrap_or(chars.len());
            (Tok::Ident(chars[i..end].iter().collect()), end - i)
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            if c == '-' {
                return Err(err(line_no, column, "negative constant"));
            }
            let end = (i..chars.len()).find(|&j| !chars[j].is_ascii_digit()).unwrap_or(chars.len());
            if chars.get(end) == Some(&'.') {
                return Err(err(line_no, column, "non-integer constant"));
            }
            let digits: String = chars[i..end].iter().collect();
            let value = digits
                .parse::<i64>()
                .ok()
                .filter(|v| *v <= u32::MAX as i64)
                .ok_or_else(|| err(line_no, column, "constant too large"))?;
            (Tok::Int(value), end - i)
        } else {
            match two.as_str() {
                "->" => (Tok::Arrow, 2),
                "&&" => (Tok::And, 2),
                "<=" => (Tok::Cmp(CmpTok::Le), 2),
                ">=" => (Tok::Cmp(CmpTok::Ge), 2),
                "==" => (Tok::Cmp(CmpTok::Eq), 2),
                _ => match c {
                    '<' => (Tok::Cmp(CmpTok::Lt), 1),
                    '>' => (Tok::Cmp(CmpTok::Gt), 1),
                    _ => return Err(err(line_no, column, format!("unexpected character `{c}`"))),
                },
            }
        };
        out.push(Lexed { tok, column });
        i += len;
    }
    Ok(out)
}

struct PendingTransition {
    line: usize,
    source: (String, usize),
    target: (String, usize),
    guard: Guard,
    resets: Vec<usize>,
}

struct Cursor<'a> {
    line: usize,
    toks: &'a [Lexed],
    pos: usize,
    end_column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_column, |l| l.column)
    }

    fn next(&mut self) -> Option<&'a Tok> {
        let t = self.peek();
        self.pos += 1;
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        err(self.line, self.column(), message)
    }

    fn ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        let column = self.column();
        match self.next() {
            Some(Tok::Ident(s)) => Ok((s.clone(), column)),
            Some(t) => Err(err(self.line, column, format!("expected {what}, found {t}"))),
            None => Err(err(self.line, column, format!("expected {what}"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }
}

/// Parses a model; errors carry 1-based line and column numbers.
pub fn parse_model(src: &str) -> Result<Automaton, ParseError> {
    let mut clocks: Option<Vec<String>> = None;
    let mut states: Vec<String> = Vec::new();
    let mut state_index: HashMap<String, usize> = HashMap::new();
    let mut initial: Option<usize> = None;
    let mut accepting: Vec<usize> = Vec::new();
    let mut pending: Vec<PendingTransition> = Vec::new();
    let mut last_line = 1;

    for (i, text) in src.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let toks = lex(line, text)?;
        if toks.is_empty() {
            continue;
        }
        let mut cur = Cursor {
            line,
            toks: &toks,
            pos: 0,
            end_column: text.chars().count() + 1,
        };
        let (keyword, kw_column) = cur.ident("a directive")?;
        match keyword.as_str() {
            "clocks" => {
                if clocks.is_some() {
                    return Err(err(line, kw_column, "clocks declared twice"));
                }
                if !pending.is_empty() {
                    return Err(err(line, kw_column, "clocks must be declared before transitions"));
                }
                let mut names: Vec<String> = Vec::new();
                while cur.peek().is_some() {
                    let column = cur.column();
                    let (name, _) = cur.ident("a clock name")?;
                    if names.contains(&name) {
                        return Err(err(line, column, format!("duplicate clock `{name}`")));
                    }
                    names.push(name);
                }
                if names.is_empty() {
                    return Err(cur.error("expected at least one clock name"));
                }
                clocks = Some(names);
            }
            "state" => {
                let (name, column) = cur.ident("a state name")?;
                if state_index.contains_key(&name) {
                    return Err(err(line, column, format!("duplicate state `{name}`")));
                }
                let q = states.len();
                state_index.insert(name.clone(), q);
                states.push(name);
                while cur.peek().is_some() {
                    let (flag, column) = cur.ident("`initial` or `accepting`")?;
                    match flag.as_str() {
                        "initial" => {
                            if initial.is_some() {
                                return Err(err(line, column, "duplicate initial state"));
                            }
                            initial = Some(q);
                        }
                        "accepting" => accepting.push(q),
                        other => {
                            return Err(err(line, column, format!("unknown state flag `{other}`")));
                        }
                    }
                }
            }
            "trans" => {
                let Some(clock_names) = clocks.as_ref() else {
                    return Err(err(line, kw_column, "clocks must be declared before transitions"));
                };
                let (src_name, src_col) = cur.ident("a source state")?;
                if cur.next() != Some(&Tok::Arrow) {
                    cur.pos -= 1;
                    return Err(cur.error("expected `->`"));
                }
                let (dst_name, dst_col) = cur.ident("a target state")?;
                let clock = |cur: &mut Cursor| -> Result<usize, ParseError> {
                    let column = cur.column();
                    let (name, _) = cur.ident("a clock name")?;
                    clock_names
                        .iter()
                        .position(|c| *c == name)
                        .map(|p| p + 1)
                        .ok_or_else(|| err(line, column, format!("unknown clock `{name}`")))
                };
                let mut guard = Guard::default();
                if cur.at_keyword("guard") {
                    cur.next();
                    loop {
                        let x = clock(&mut cur)?;
                        let cmp = match cur.next() {
                            Some(Tok::Cmp(c)) => *c,
                            _ => {
                                cur.pos -= 1;
                                return Err(cur.error("expected a comparison"));
                            }
                        };
                        let c = match cur.next() {
                            Some(Tok::Int(v)) => *v as u32,
                            _ => {
                                cur.pos -= 1;
                                return Err(cur.error("expected a non-negative integer"));
                            }
                        };
                        match cmp {
                            CmpTok::Lt => guard.push(Atom::new(x, Comparison::Lt, c)),
                            CmpTok::Le => guard.push(Atom::new(x, Comparison::Le, c)),
                            CmpTok::Ge => guard.push(Atom::new(x, Comparison::Ge, c)),
                            CmpTok::Gt => guard.push(Atom::new(x, Comparison::Gt, c)),
                            CmpTok::Eq => guard.push_equal(x, c),
                        }
                        if cur.peek() == Some(&Tok::And) {
                            cur.next();
                        } else {
                            break;
                        }
                    }
                }
                let mut resets = Vec::new();
                if cur.at_keyword("reset") {
                    cur.next();
                    while cur.peek().is_some() {
                        resets.push(clock(&mut cur)?);
                    }
                    if resets.is_empty() {
                        return Err(cur.error("expected a clock name"));
                    }
                }
                if let Some(t) = cur.peek() {
                    return Err(cur.error(format!("unexpected {t}")));
                }
                pending.push(PendingTransition {
                    line,
                    source: (src_name, src_col),
                    target: (dst_name, dst_col),
                    guard,
                    resets,
                });
            }
            other => {
                return Err(err(line, kw_column, format!("unknown directive `{other}`")));
            }
        }
    }

    let clocks = clocks.ok_or_else(|| err(last_line, 1, "missing clocks declaration"))?;
    let initial = initial.ok_or_else(|| err(last_line, 1, "no initial state"))?;
    let mut transitions = Vec::with_capacity(pending.len());
    for p in pending {
        let lookup = |(name, column): &(String, usize)| {
            state_index
                .get(name)
                .copied()
                .ok_or_else(|| err(p.line, *column, format!("unknown state `{name}`")))
        };
        let source = lookup(&p.source)?;
        let target = lookup(&p.target)?;
        transitions.push(Transition::new(source, p.guard, p.resets, target));
    }
    Automaton::new(states, initial, &accepting, clocks, transitions)
        .map_err(|e: AutomatonError| err(last_line, 1, e.to_string()))
}

/// Canonical text of an automaton; [`parse_model`] reads it back unchanged.
pub fn print_model(a: &Automaton) -> String {
    let mut out = format!("clocks {}\n", a.clocks().join(" "));
    for (q, name) in a.states().iter().enumerate() {
        out.push_str("state ");
        out.push_str(name);
        if q == a.initial() {
            out.push_str(" initial");
        }
        if a.is_accepting(q) {
            out.push_str(" accepting");
        }
        out.push('\n');
    }
    for t in a.transitions() {
        out.push_str(&format!("trans {} -> {}", a.states()[t.source], a.states()[t.target]));
        if !t.guard.is_true() {
            let atoms: Vec<String> = t
                .guard
                .atoms()
                .iter()
                .map(|at| format!("{}{}{}", a.clocks()[at.clock - 1], at.comparison.symbol(), at.constant))
                .collect();
            out.push_str(&format!(" guard {}", atoms.join(" && ")));
        }
        if !t.resets.is_empty() {
            let names: Vec<&str> = t.resets.iter().map(|&x| a.clocks()[x - 1].as_str()).collect();
            out.push_str(&format!(" reset {}", names.join(" ")));
        }
        out.push('\n');
    }
    out
}
