//! Concrete ASCII syntax for terms and query scripts.
//!
//! ```text
//! 0   bot   a.t   tau.t   t [] t   t /\ t   t \/ t   t |[a,b]| t   X
//! rec X { X = t ; Y = u }
//! ```
//!
//! Binding strength, tightest first: prefix, `/\`, `\/`, `[]`, `|[..]|`.
//! All binary operators associate to the left. Identifiers starting with an
//! uppercase letter are variables, lowercase ones are actions. `#` starts a
//! line comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{free_vars, Action, Name, RecSpec, Term, TermError};

const KEYWORDS: &[&str] = &["rec", "bot", "tau", "let", "check"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Keyword(&'static str),
    Zero,
    Dot,
    Box,
    And,
    Or,
    ParOpen,
    ParClose,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Eq,
    Semi,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => format!("`{s}`"),
            Tok::Keyword(k) => format!("`{k}`"),
            Tok::Zero => "`0`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Box => "`[]`".into(),
            Tok::And => "`/\\`".into(),
            Tok::Or => "`\\/`".into(),
            Tok::ParOpen => "`|[`".into(),
            Tok::ParClose => "`]|`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
    start: usize,
    end: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let at = |i: usize| chars.get(i).map(|&(_, c)| c);
    let offset = |i: usize| chars.get(i).map(|&(o, _)| o).unwrap_or(src.len());
    while i < chars.len() {
        let c = chars[i].1;
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let (tok, len) = if c.is_ascii_alphabetic() {
            let mut j = i;
            while at(j).is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                j += 1;
            }
            let word: String = chars[i..j].iter().map(|&(_, c)| c).collect();
            let tok = if let Some(k) = KEYWORDS.iter().find(|k| **k == word) {
                Tok::Keyword(k)
            } else if c.is_ascii_uppercase() {
                Tok::Upper(word)
            } else {
                Tok::Lower(word)
            };
            (tok, j - i)
        } else {
            let next = at(i + 1);
            match (c, next) {
                ('0', n) if !n.is_some_and(|n| n.is_ascii_alphanumeric()) => (Tok::Zero, 1),
                ('.', _) => (Tok::Dot, 1),
                ('[', Some(']')) => (Tok::Box, 2),
                ('/', Some('\\')) => (Tok::And, 2),
                ('\\', Some('/')) => (Tok::Or, 2),
                ('|', Some('[')) => (Tok::ParOpen, 2),
                (']', Some('|')) => (Tok::ParClose, 2),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                ('=', _) => (Tok::Eq, 1),
                (';', _) => (Tok::Semi, 1),
                (',', _) => (Tok::Comma, 1),
                _ => {
                    return Err(ParseError {
                        span: SourceSpan {
                            line,
                            column: col,
                            length: 1,
                        },
                        message: format!("unexpected character `{c}`"),
                        expected: Vec::new(),
                    })
                }
            }
        };
        out.push(Token {
            tok,
            span: SourceSpan {
                line,
                column: col,
                length: len,
            },
            start: offset(start),
            end: offset(start + len),
        });
        i += len;
        col += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        span: SourceSpan {
            line,
            column: col,
            length: 1,
        },
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    definitions: BTreeMap<Name, Term>,
    /// Variables allowed free everywhere (equation variables of queries).
    permitted: Vec<Name>,
    bound: Vec<Name>,
    /// First occurrence of each undefined free name in the current term.
    free_seen: BTreeMap<Name, SourceSpan>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        Ok(Parser {
            src,
            toks: lex(src)?,
            pos: 0,
            definitions: BTreeMap::new(),
            permitted: Vec::new(),
            bound: Vec::new(),
            free_seen: BTreeMap::new(),
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError {
            span: self.peek().span,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            let found = self.peek().tok.describe();
            Err(self.error_here(format!("unexpected {found}"), &[&tok.describe()]))
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut left = self.choice()?;
        while self.peek().tok == Tok::ParOpen {
            self.bump();
            let mut sync = BTreeSet::new();
            if self.peek().tok != Tok::ParClose {
                loop {
                    sync.insert(self.action_name()?);
                    if self.peek().tok == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::ParClose)?;
            let right = self.choice()?;
            left = Term::Par(sync, Arc::new(left), Arc::new(right));
        }
        Ok(left)
    }

    fn action_name(&mut self) -> Result<Name, ParseError> {
        match &self.peek().tok {
            Tok::Lower(name) => {
                let name = Arc::from(name.as_str());
                self.bump();
                Ok(name)
            }
            other => {
                let found = other.describe();
                Err(self.error_here(format!("unexpected {found}"), &["action name"]))
            }
        }
    }

    fn choice(&mut self) -> Result<Term, ParseError> {
        let mut left = self.disj()?;
        while self.peek().tok == Tok::Box {
            self.bump();
            left = Term::choice(left, self.disj()?);
        }
        Ok(left)
    }

    fn disj(&mut self) -> Result<Term, ParseError> {
        let mut left = self.conj()?;
        while self.peek().tok == Tok::Or {
            self.bump();
            left = Term::disj(left, self.conj()?);
        }
        Ok(left)
    }

    fn conj(&mut self) -> Result<Term, ParseError> {
        let mut left = self.prefix()?;
        while self.peek().tok == Tok::And {
            self.bump();
            left = Term::conj(left, self.prefix()?);
        }
        Ok(left)
    }

    fn prefix(&mut self) -> Result<Term, ParseError> {
        let action = match &self.peek().tok {
            Tok::Keyword("tau") => Some(Action::Tau),
            Tok::Lower(name) => Some(Action::Visible(Arc::from(name.as_str()))),
            _ => None,
        };
        match action {
            Some(action) => {
                self.bump();
                self.expect(Tok::Dot)?;
                let body = self.prefix()?;
                Ok(Term::prefix(action, body))
            }
            None => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let tok = self.peek().clone();
        match &tok.tok {
            Tok::Zero => {
                self.bump();
                Ok(Term::Stop)
            }
            Tok::Keyword("bot") => {
                self.bump();
                Ok(Term::Bottom)
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Upper(name) => {
                self.bump();
                self.resolve(name, tok.span)
            }
            Tok::Keyword("rec") => self.rec(),
            other => {
                let found = other.describe();
                Err(self.error_here(
                    format!("unexpected {found}"),
                    &["`0`", "`bot`", "action prefix", "variable", "`rec`", "`(`"],
                ))
            }
        }
    }

    fn resolve(&mut self, name: &str, span: SourceSpan) -> Result<Term, ParseError> {
        let name: Name = Arc::from(name);
        if self.bound.contains(&name) || self.permitted.contains(&name) {
            return Ok(Term::Var(name));
        }
        if let Some(def) = self.definitions.get(&name) {
            return Ok(def.clone());
        }
        if !self.bound.is_empty() {
            return Err(ParseError {
                span,
                message: format!("variable {name} is not declared by an enclosing rec"),
                expected: Vec::new(),
            });
        }
        self.free_seen.entry(name.clone()).or_insert(span);
        Ok(Term::Var(name))
    }

    fn rec(&mut self) -> Result<Term, ParseError> {
        let rec_tok = self.bump();
        let initial = self.upper_name()?;
        self.expect(Tok::LBrace)?;
        // Collect equation heads first so bodies may refer to later equations.
        let heads = self.equation_heads();
        let mark = self.bound.len();
        self.bound.extend(heads.iter().cloned());
        let mut equations = Vec::new();
        loop {
            let var = self.upper_name()?;
            self.expect(Tok::Eq)?;
            let body = self.term()?;
            equations.push((var, body));
            if self.peek().tok == Tok::Semi {
                self.bump();
                if self.peek().tok == Tok::RBrace {
                    break;
                }
            } else {
                break;
            }
        }
        self.bound.truncate(mark);
        self.expect(Tok::RBrace)?;
        let spec = RecSpec::new(initial, equations).map_err(|e: TermError| ParseError {
            span: rec_tok.span,
            message: e.to_string(),
            expected: Vec::new(),
        })?;
        Ok(Term::Rec(Arc::new(spec)))
    }

    fn equation_heads(&self) -> Vec<Name> {
        // Scan ahead at brace depth 1 for `Name =` pairs.
        let mut heads = Vec::new();
        let mut depth = 0usize;
        let mut k = self.pos;
        let mut expect_head = true;
        loop {
            let tok = &self.toks[k].tok;
            match tok {
                Tok::Eof => break,
                Tok::LBrace => depth += 1,
                Tok::RBrace => {
                    if depth == 0 {
                        break;
                    }
                    depth -= 1;
                }
                Tok::Semi if depth == 0 => expect_head = true,
                Tok::Upper(name) if depth == 0 && expect_head => {
                    if self.toks[k + 1].tok == Tok::Eq {
                        heads.push(Arc::from(name.as_str()));
                    }
                    expect_head = false;
                }
                _ => expect_head = false,
            }
            k += 1;
        }
        heads
    }

    fn upper_name(&mut self) -> Result<Name, ParseError> {
        match &self.peek().tok {
            Tok::Upper(name) => {
                let name = Arc::from(name.as_str());
                self.bump();
                Ok(name)
            }
            other => {
                let found = other.describe();
                Err(self.error_here(format!("unexpected {found}"), &["variable"]))
            }
        }
    }

    fn lower_word(&mut self, words: &[&str]) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Lower(w) if words.contains(&w.as_str()) => {
                let w = w.clone();
                self.bump();
                Ok(w)
            }
            other => {
                let found = other.describe();
                let expected: Vec<String> = words.iter().map(|w| format!("`{w}`")).collect();
                let expected: Vec<&str> = expected.iter().map(String::as_str).collect();
                Err(self.error_here(format!("unexpected {found}"), &expected))
            }
        }
    }

    /// A term that must be closed (query operand).
    fn closed_term(&mut self) -> Result<Term, ParseError> {
        let span = self.peek().span;
        self.free_seen.clear();
        let t = self.term()?;
        if let Some(x) = free_vars(&t).into_iter().next() {
            let span = self.free_seen.get(&x).copied().unwrap_or(span);
            return Err(ParseError {
                span,
                message: format!("undefined name {x}: query terms must be closed"),
                expected: Vec::new(),
            });
        }
        Ok(t)
    }

    /// An equation body whose only free variable may be `var`.
    fn body_term(&mut self, var: &Name) -> Result<Term, ParseError> {
        let span = self.peek().span;
        self.permitted = vec![var.clone()];
        self.free_seen.clear();
        let t = self.term();
        self.permitted.clear();
        let t = t?;
        if let Some(x) = free_vars(&t).into_iter().find(|x| x != var) {
            let span = self.free_seen.get(&x).copied().unwrap_or(span);
            return Err(ParseError {
                span,
                message: format!("undefined name {x}: the equation body may only mention {var}"),
                expected: Vec::new(),
            });
        }
        Ok(t)
    }
}

/// Parses a single term. Variables outside `rec` bodies may be free;
/// inside a `rec` body every variable must be bound by an enclosing `rec`.
pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(src)?;
    let t = p.term()?;
    if p.peek().tok != Tok::Eof {
        let found = p.peek().tok.describe();
        return Err(p.error_here(
            format!("unexpected {found} after term"),
            &["operator", "end of input"],
        ));
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Pretty printing

const LVL_PAR: u8 = 1;
const LVL_CHOICE: u8 = 2;
const LVL_DISJ: u8 = 3;
const LVL_CONJ: u8 = 4;
const LVL_PREFIX: u8 = 5;

fn level(t: &Term) -> u8 {
    match t {
        Term::Par(..) => LVL_PAR,
        Term::ExtChoice(..) => LVL_CHOICE,
        Term::Disj(..) => LVL_DISJ,
        Term::Conj(..) => LVL_CONJ,
        Term::Prefix(..) => LVL_PREFIX,
        _ => 6,
    }
}

/// Minimal-parentheses ASCII rendering that parses back to an α-equal term.
pub fn pretty(t: &Term) -> String {
    let mut out = String::new();
    write_at(t, LVL_PAR, &mut out);
    out
}

fn write_at(t: &Term, min: u8, out: &mut String) {
    if level(t) < min {
        out.push('(');
        write_term(t, out);
        out.push(')');
    } else {
        write_term(t, out);
    }
}

fn write_binary(l: &Term, op: &str, r: &Term, lvl: u8, out: &mut String) {
    write_at(l, lvl, out);
    out.push_str(op);
    write_at(r, lvl + 1, out);
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::Stop => out.push('0'),
        Term::Bottom => out.push_str("bot"),
        Term::Var(x) => out.push_str(x),
        Term::Prefix(a, body) => {
            out.push_str(a.name());
            out.push('.');
            write_at(body, LVL_PREFIX, out);
        }
        Term::ExtChoice(l, r) => write_binary(l, " [] ", r, LVL_CHOICE, out),
        Term::Disj(l, r) => write_binary(l, " \\/ ", r, LVL_DISJ, out),
        Term::Conj(l, r) => write_binary(l, " /\\ ", r, LVL_CONJ, out),
        Term::Par(sync, l, r) => {
            let names: Vec<&str> = sync.iter().map(|s| &**s).collect();
            let op = format!(" |[{}]| ", names.join(","));
            write_binary(l, &op, r, LVL_PAR, out);
        }
        Term::Rec(spec) => {
            out.push_str("rec ");
            out.push_str(spec.initial());
            out.push_str(" { ");
            for (i, (v, body)) in spec.equations().iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                out.push_str(v);
                out.push_str(" = ");
                write_at(body, LVL_PAR, out);
            }
            out.push_str(" }");
        }
    }
}

// ---------------------------------------------------------------------------
// Scripts

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QueryKind {
    Consistent(Term),
    Refines(Term, Term),
    Equiv(Term, Term),
    Solution {
        var: Name,
        body: Term,
        candidate: Term,
    },
    Greatest {
        var: Name,
        body: Term,
        candidates: Vec<Term>,
    },
    Unique {
        var: Name,
        body: Term,
        first: Term,
        second: Term,
    },
    Explore(Term),
    Guardedness {
        var: Name,
        body: Term,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub kind: QueryKind,
    /// Source text of the query, whitespace-normalised.
    pub text: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Script {
    pub definitions: Vec<(Name, Term)>,
    pub queries: Vec<Query>,
}

/// Parses `let` definitions and `check` queries. Definitions are macros:
/// a later occurrence of the name is replaced by the defining term.
pub fn parse_script(src: &str) -> Result<Script, ParseError> {
    let mut p = Parser::new(src)?;
    let mut script = Script::default();
    let mut pending_free: Vec<(usize, BTreeMap<Name, SourceSpan>)> = Vec::new();
    loop {
        match p.peek().tok.clone() {
            Tok::Eof => break,
            Tok::Keyword("let") => {
                p.bump();
                let name_tok = p.peek().clone();
                let name = p.upper_name()?;
                if p.definitions.contains_key(&name) {
                    return Err(ParseError {
                        span: name_tok.span,
                        message: format!("{name} is already defined"),
                        expected: Vec::new(),
                    });
                }
                p.expect(Tok::Eq)?;
                p.free_seen.clear();
                let t = p.term()?;
                pending_free.push((script.definitions.len(), std::mem::take(&mut p.free_seen)));
                p.definitions.insert(name.clone(), t.clone());
                script.definitions.push((name, t));
            }
            Tok::Keyword("check") => {
                let q = parse_query(&mut p)?;
                script.queries.push(q);
            }
            other => {
                let found = other.describe();
                return Err(p.error_here(format!("unexpected {found}"), &["`let`", "`check`"]));
            }
        }
    }
    for (index, free) in pending_free {
        for (x, span) in free {
            if script.definitions[index + 1..].iter().any(|(n, _)| *n == x) {
                return Err(ParseError {
                    span,
                    message: format!("{x} is used before its definition"),
                    expected: Vec::new(),
                });
            }
        }
    }
    Ok(script)
}

fn parse_query(p: &mut Parser<'_>) -> Result<Query, ParseError> {
    let check = p.bump();
    let kind_word = p.lower_word(&[
        "consistent",
        "refines",
        "equiv",
        "solution",
        "greatest",
        "unique",
        "explore",
        "guarded",
    ])?;
    let kind = match kind_word.as_str() {
        "consistent" => QueryKind::Consistent(p.closed_term()?),
        "refines" => {
            let l = p.closed_term()?;
            QueryKind::Refines(l, p.closed_term()?)
        }
        "equiv" => {
            let l = p.closed_term()?;
            QueryKind::Equiv(l, p.closed_term()?)
        }
        "explore" => QueryKind::Explore(p.closed_term()?),
        "solution" => {
            let var = p.upper_name()?;
            let body = p.body_term(&var)?;
            let candidate = p.closed_term()?;
            QueryKind::Solution {
                var,
                body,
                candidate,
            }
        }
        "unique" => {
            let var = p.upper_name()?;
            let body = p.body_term(&var)?;
            let first = p.closed_term()?;
            let second = p.closed_term()?;
            QueryKind::Unique {
                var,
                body,
                first,
                second,
            }
        }
        "greatest" => {
            let var = p.upper_name()?;
            let body = p.body_term(&var)?;
            p.expect(Tok::LBracket)?;
            let mut candidates = Vec::new();
            if p.peek().tok != Tok::RBracket {
                loop {
                    candidates.push(p.closed_term()?);
                    if p.peek().tok == Tok::Comma {
                        p.bump();
                    } else {
                        break;
                    }
                }
            }
            p.expect(Tok::RBracket)?;
            QueryKind::Greatest {
                var,
                body,
                candidates,
            }
        }
        "guarded" => {
            let var = p.upper_name()?;
            let body = p.body_term(&var)?;
            QueryKind::Guardedness { var, body }
        }
        _ => unreachable!("lower_word only returns listed words"),
    };
    let end = p.toks[p.pos.saturating_sub(1)].end;
    let text = p.src[check.start..end]
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    Ok(Query {
        kind,
        text,
        span: check.span,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::alpha_eq;

    fn ax() -> Term {
        Term::rec1("X", Term::act("a", Term::var("X"))).unwrap()
    }

    #[test]
    fn parses_rec() {
        assert_eq!(parse_term("rec X { X = a.X }").unwrap(), ax());
    }

    #[test]
    fn precedence() {
        let t = parse_term("a.0 /\\ b.0 \\/ 0").unwrap();
        assert_eq!(
            t,
            Term::disj(
                Term::conj(Term::act("a", Term::Stop), Term::act("b", Term::Stop)),
                Term::Stop
            )
        );
        let t = parse_term("a.0 [] b.0 /\\ c.0").unwrap();
        assert_eq!(
            t,
            Term::choice(
                Term::act("a", Term::Stop),
                Term::conj(Term::act("b", Term::Stop), Term::act("c", Term::Stop))
            )
        );
        let t = parse_term("a.0 |[a]| a.0 [] b.0").unwrap();
        assert_eq!(
            t,
            Term::par(
                ["a"],
                Term::act("a", Term::Stop),
                Term::choice(Term::act("a", Term::Stop), Term::act("b", Term::Stop))
            )
        );
        // Left associativity.
        let t = parse_term("0 [] bot [] X").unwrap();
        assert_eq!(
            t,
            Term::choice(Term::choice(Term::Stop, Term::Bottom), Term::var("X"))
        );
    }

    #[test]
    fn parses_example_body() {
        let t = parse_term("(rec Y { Y = a.Y } /\\ a.X) \\/ (rec Z { Z = b.Z } /\\ b.X)").unwrap();
        let py = Term::rec1("Y", Term::act("a", Term::var("Y"))).unwrap();
        let pz = Term::rec1("Z", Term::act("b", Term::var("Z"))).unwrap();
        let expected = Term::disj(
            Term::conj(py, Term::act("a", Term::var("X"))),
            Term::conj(pz, Term::act("b", Term::var("X"))),
        );
        assert_eq!(t, expected);
    }

    #[test]
    fn empty_sync_set_and_tau() {
        let t = parse_term("tau.bot |[]| 0").unwrap();
        assert_eq!(
            t,
            Term::par(Vec::<&str>::new(), Term::tau(Term::Bottom), Term::Stop)
        );
        assert_eq!(pretty(&t), "tau.bot |[]| 0");
    }

    #[test]
    fn parse_errors_carry_spans() {
        let e = parse_term("a.0 [] ").unwrap_err();
        assert_eq!(e.span.line, 1);
        assert_eq!(e.span.column, 8);
        assert!(!e.expected.is_empty());

        let e = parse_term("rec X { X = X [] a.0 }").unwrap_err();
        assert!(e.message.contains("unguarded"), "{e}");

        let e = parse_term("rec X { X = a.Y }").unwrap_err();
        assert!(e.message.contains("not declared"), "{e}");

        let e = parse_term("a.\n  $").unwrap_err();
        assert_eq!((e.span.line, e.span.column), (2, 3));

        assert!(parse_term("a 0").is_err());
        assert!(parse_term("tau").is_err());
        assert!(parse_term("(0").is_err());
    }

    #[test]
    fn pretty_examples() {
        assert_eq!(pretty(&Term::Stop), "0");
        assert_eq!(pretty(&Term::tau(Term::Bottom)), "tau.bot");
        let t = Term::act(
            "a",
            Term::choice(Term::act("b", Term::Stop), Term::act("c", Term::Stop)),
        );
        assert_eq!(pretty(&t), "a.(b.0 [] c.0)");
        let t = Term::choice(Term::Stop, Term::choice(Term::Stop, Term::Stop));
        assert_eq!(pretty(&t), "0 [] (0 [] 0)");
        assert_eq!(pretty(&ax()), "rec X { X = a.X }");
    }

    #[test]
    fn mutual_recursion_and_forward_reference() {
        let t = parse_term("rec X { X = a.Y; Y = b.X }").unwrap();
        let u = parse_term(&pretty(&t)).unwrap();
        assert!(alpha_eq(&t, &u));
        assert!(t.is_closed());
    }

    #[test]
    fn script_basics() {
        let s = parse_script("let P = rec X { X = a.X }\ncheck consistent P").unwrap();
        assert_eq!(s.definitions.len(), 1);
        assert_eq!(s.queries.len(), 1);
        assert_eq!(s.queries[0].kind, QueryKind::Consistent(ax()));
        assert_eq!(s.queries[0].text, "check consistent P");

        assert_eq!(parse_script("").unwrap(), Script::default());
        assert_eq!(
            parse_script("# only a comment\n").unwrap(),
            Script::default()
        );
    }

    #[test]
    fn script_example_definitions() {
        let src = "\
let TX = (rec Y { Y = a.Y } /\\ a.X) \\/ (rec Z { Z = b.Z } /\\ b.X)
let PA = rec X { X = a.X }
let PB = rec X { X = b.X }
check greatest X TX [PA, PB]
check solution X TX PA
check equiv PA PB
";
        let s = parse_script(src).unwrap();
        assert_eq!(s.definitions.len(), 3);
        assert_eq!(s.queries.len(), 3);
        match &s.queries[0].kind {
            QueryKind::Greatest { candidates, .. } => assert_eq!(candidates.len(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn equation_variable_shadows_definitions() {
        let s = parse_script("let X = 0\ncheck solution X a.X X").unwrap();
        match &s.queries[0].kind {
            QueryKind::Solution {
                body, candidate, ..
            } => {
                assert_eq!(body, &Term::act("a", Term::var("X")));
                assert_eq!(candidate, &Term::Stop);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn script_errors() {
        let e = parse_script("let P = 0\nlet P = 0").unwrap_err();
        assert!(e.message.contains("already defined"));
        assert_eq!(e.span.line, 2);

        let e = parse_script("let Q = a.P\nlet P = 0").unwrap_err();
        assert!(e.message.contains("before its definition"), "{e}");

        let e = parse_script("check consistent P").unwrap_err();
        assert!(e.message.contains("closed"), "{e}");

        let e = parse_script("check solution X a.Y 0").unwrap_err();
        assert!(e.message.contains("equation body"), "{e}");

        let e = parse_script("check frobnicate 0").unwrap_err();
        assert!(e.expected.len() > 3);
    }

    #[test]
    fn terms_in_queries_are_delimited_by_tokens() {
        let s = parse_script("check equiv rec X { X = a.X } rec X { X = b.X }").unwrap();
        match &s.queries[0].kind {
            QueryKind::Equiv(l, r) => {
                assert_eq!(l, &ax());
                assert!(alpha_eq(
                    r,
                    &Term::rec1("Y", Term::act("b", Term::var("Y"))).unwrap()
                ));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
