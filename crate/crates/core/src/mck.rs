//! CTL+K model checking over [`KripkeModel`]s.
//!
//! Formulas combine boolean connectives, the branching-time operators EX,
//! EG and E(· U ·) with their derived forms, and per-judge knowledge:
//! `K i f` holds where every state judge `i` cannot distinguish from the
//! current one satisfies `f`, and `P i f` is the dual possibility. The
//! checker evaluates by set operations: atoms from state labels, EX as a
//! predecessor image, EG as a greatest fixpoint, EU as a least fixpoint
//! computed by a backward worklist, and knowledge per observation class.
//! Derived operators are rewritten on the fly: `EF f = E(true U f)`,
//! `AF f = !EG !f`, `AG f = !EF !f`, `AX f = !EX !f`, `P i f = !K i !f`,
//! and `A(f U g) = !(E(!g U (!f & !g)) | EG !g)`.
//!
//! The concrete syntax is ASCII: atoms `v=1`, `v=unknown`, `d2=0`,
//! `profile=101`, `true`, `false`; prefix `!`, `K <i>`, `P <i>`, `EX`,
//! `AX`, `EF`, `AF`, `EG`, `AG`; infix `&`, `|`, `->` (binding in that
//! order, loosest last); and `E (f U g)`, `A (f U g)`.

use crate::kripke::KripkeModel;
use crate::protocols::VerdictValue;
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MckError {
    #[error("parse error at {line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("formula mentions agent {agent} but the model has agents 0..{agents}")]
    AgentOutOfRange { agent: usize, agents: usize },
    #[error("formula mentions judge {judge} but the model has judges 0..{agents}")]
    JudgeOutOfRange { judge: usize, agents: usize },
    #[error("profile atom has {got} bits but the model has {agents} judges")]
    ProfileWidth { got: usize, agents: usize },
}

/// Propositional atoms, read directly off state labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Atom {
    True,
    False,
    VerdictUnknown,
    /// Announced verdict bit, or announced count for the modular sum.
    Verdict(u8),
    /// Judge's decision equals the given bit.
    Decision(usize, bool),
    /// The whole decision profile equals the given mask.
    Profile { mask: u32, judges: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Knows(usize, Box<Formula>),
    Possible(usize, Box<Formula>),
    Ex(Box<Formula>),
    Ax(Box<Formula>),
    Ef(Box<Formula>),
    Af(Box<Formula>),
    Eg(Box<Formula>),
    Ag(Box<Formula>),
    Eu(Box<Formula>, Box<Formula>),
    Au(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn truth() -> Formula {
        Formula::Atom(Atom::True)
    }

    pub fn falsity() -> Formula {
        Formula::Atom(Atom::False)
    }

    pub fn verdict_unknown() -> Formula {
        Formula::Atom(Atom::VerdictUnknown)
    }

    pub fn verdict(v: u8) -> Formula {
        Formula::Atom(Atom::Verdict(v))
    }

    pub fn decision(judge: usize, value: bool) -> Formula {
        Formula::Atom(Atom::Decision(judge, value))
    }

    pub fn profile(bits: &[bool]) -> Formula {
        let mask = bits
            .iter()
            .enumerate()
            .fold(0u32, |m, (i, &b)| m | (u32::from(b) << i));
        Formula::Atom(Atom::Profile {
            mask,
            judges: bits.len(),
        })
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn knows(agent: usize, f: Formula) -> Formula {
        Formula::Knows(agent, Box::new(f))
    }

    pub fn possible(agent: usize, f: Formula) -> Formula {
        Formula::Possible(agent, Box::new(f))
    }

    pub fn ex(f: Formula) -> Formula {
        Formula::Ex(Box::new(f))
    }

    pub fn ax(f: Formula) -> Formula {
        Formula::Ax(Box::new(f))
    }

    pub fn ef(f: Formula) -> Formula {
        Formula::Ef(Box::new(f))
    }

    pub fn af(f: Formula) -> Formula {
        Formula::Af(Box::new(f))
    }

    pub fn eg(f: Formula) -> Formula {
        Formula::Eg(Box::new(f))
    }

    pub fn ag(f: Formula) -> Formula {
        Formula::Ag(Box::new(f))
    }

    pub fn eu(a: Formula, b: Formula) -> Formula {
        Formula::Eu(Box::new(a), Box::new(b))
    }

    pub fn au(a: Formula, b: Formula) -> Formula {
        Formula::Au(Box::new(a), Box::new(b))
    }

    /// Conjunction of all formulas; `true` when empty.
    pub fn conj<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::truth(),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of all formulas; `false` when empty.
    pub fn disj<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::falsity(),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Atom(_) => 4,
            Formula::Implies(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            _ => 3,
        }
    }
}

fn fmt_prec(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if f.precedence() < min {
        write!(out, "({f})")
    } else {
        write!(out, "{f}")
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::True => out.write_str("true"),
            Atom::False => out.write_str("false"),
            Atom::VerdictUnknown => out.write_str("v=unknown"),
            Atom::Verdict(v) => write!(out, "v={v}"),
            Atom::Decision(j, b) => write!(out, "d{j}={}", u8::from(*b)),
            Atom::Profile { mask, judges } => {
                out.write_str("profile=")?;
                for i in 0..*judges {
                    write!(out, "{}", mask >> i & 1)?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(out, "{a}"),
            Formula::Not(f) => {
                out.write_str("!")?;
                fmt_prec(f, 3, out)
            }
            Formula::And(a, b) => {
                fmt_prec(a, 2, out)?;
                out.write_str(" & ")?;
                fmt_prec(b, 3, out)
            }
            Formula::Or(a, b) => {
                fmt_prec(a, 1, out)?;
                out.write_str(" | ")?;
                fmt_prec(b, 2, out)
            }
            Formula::Implies(a, b) => {
                fmt_prec(a, 1, out)?;
                out.write_str(" -> ")?;
                fmt_prec(b, 0, out)
            }
            Formula::Knows(i, f) => {
                write!(out, "K {i} ")?;
                fmt_prec(f, 3, out)
            }
            Formula::Possible(i, f) => {
                write!(out, "P {i} ")?;
                fmt_prec(f, 3, out)
            }
            Formula::Ex(f) => {
                out.write_str("EX ")?;
                fmt_prec(f, 3, out)
            }
            Formula::Ax(f) => {
                out.write_str("AX ")?;
                fmt_prec(f, 3, out)
            }
            Formula::Ef(f) => {
                out.write_str("EF ")?;
                fmt_prec(f, 3, out)
            }
            Formula::Af(f) => {
                out.write_str("AF ")?;
                fmt_prec(f, 3, out)
            }
            Formula::Eg(f) => {
                out.write_str("EG ")?;
                fmt_prec(f, 3, out)
            }
            Formula::Ag(f) => {
                out.write_str("AG ")?;
                fmt_prec(f, 3, out)
            }
            Formula::Eu(a, b) => write!(out, "E ({a} U {b})"),
            Formula::Au(a, b) => write!(out, "A ({a} U {b})"),
        }
    }
}

// ---------------------------------------------------------------------
// Parsing

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Eq,
    Word(String),
    Int { value: u64, text: String },
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::LParen => out.write_str("'('"),
            Tok::RParen => out.write_str("')'"),
            Tok::Bang => out.write_str("'!'"),
            Tok::Amp => out.write_str("'&'"),
            Tok::Pipe => out.write_str("'|'"),
            Tok::Arrow => out.write_str("'->'"),
            Tok::Eq => out.write_str("'='"),
            Tok::Word(w) => write!(out, "'{w}'"),
            Tok::Int { text, .. } => write!(out, "'{text}'"),
            Tok::Eof => out.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, MckError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    loop {
        let (tok_line, tok_col) = (line, col);
        let c = match chars.next() {
            None => {
                out.push(Token {
                    tok: Tok::Eof,
                    line,
                    col,
                });
                return Ok(out);
            }
            Some(c) => c,
        };
        if c == '\n' {
            line += 1;
            col = 1;
            continue;
        }
        col += 1;
        let tok = match c {
            c if c.is_whitespace() => continue,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '!' => Tok::Bang,
            '&' => Tok::Amp,
            '|' => Tok::Pipe,
            '=' => Tok::Eq,
            '-' => match chars.next() {
                Some('>') => {
                    col += 1;
                    Tok::Arrow
                }
                _ => {
                    return Err(MckError::Parse {
                        line: tok_line,
                        col: tok_col,
                        message: "expected '->' after '-'".into(),
                    })
                }
            },
            c if c.is_ascii_digit() => {
                let mut text = String::from(c);
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    text.push(d);
                    chars.next();
                    col += 1;
                }
                let value = text.parse::<u64>().map_err(|_| MckError::Parse {
                    line: tok_line,
                    col: tok_col,
                    message: format!("number {text} out of range"),
                })?;
                Tok::Int { value, text }
            }
            c if c.is_ascii_alphabetic() => {
                let mut word = String::from(c);
                while let Some(&d) = chars.peek() {
                    if !(d.is_ascii_alphanumeric() || d == '_') {
                        break;
                    }
                    word.push(d);
                    chars.next();
                    col += 1;
                }
                Tok::Word(word)
            }
            other => {
                return Err(MckError::Parse {
                    line: tok_line,
                    col: tok_col,
                    message: format!("unexpected character {other:?}"),
                })
            }
        };
        out.push(Token {
            tok,
            line: tok_line,
            col: tok_col,
        });
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
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

    fn fail<T>(&self, message: String) -> Result<T, MckError> {
        let t = self.peek();
        Err(MckError::Parse {
            line: t.line,
            col: t.col,
            message,
        })
    }

    fn expect(&mut self, want: Tok) -> Result<(), MckError> {
        if self.peek().tok == want {
            self.bump();
            Ok(())
        } else {
            self.fail(format!("expected {want}, found {}", self.peek().tok))
        }
    }

    fn expect_index(&mut self, what: &str) -> Result<usize, MckError> {
        match self.peek().tok.clone() {
            Tok::Int { value, .. } if value <= u32::MAX as u64 => {
                self.bump();
                Ok(value as usize)
            }
            other => self.fail(format!("expected {what} index, found {other}")),
        }
    }

    // implies := or ('->' implies)?   (right associative)
    fn formula(&mut self) -> Result<Formula, MckError> {
        let left = self.or_level()?;
        if self.peek().tok == Tok::Arrow {
            self.bump();
            let right = self.formula()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn or_level(&mut self) -> Result<Formula, MckError> {
        let mut left = self.and_level()?;
        while self.peek().tok == Tok::Pipe {
            self.bump();
            left = Formula::or(left, self.and_level()?);
        }
        Ok(left)
    }

    fn and_level(&mut self) -> Result<Formula, MckError> {
        let mut left = self.unary()?;
        while self.peek().tok == Tok::Amp {
            self.bump();
            left = Formula::and(left, self.unary()?);
        }
        Ok(left)
    }

    fn until_body(&mut self) -> Result<(Formula, Formula), MckError> {
        self.expect(Tok::LParen)?;
        let a = self.formula()?;
        match &self.peek().tok {
            Tok::Word(w) if w == "U" => {
                self.bump();
            }
            other => return self.fail(format!("expected 'U', found {other}")),
        }
        let b = self.formula()?;
        self.expect(Tok::RParen)?;
        Ok((a, b))
    }

    fn unary(&mut self) -> Result<Formula, MckError> {
        match self.peek().tok.clone() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Word(w) => match w.as_str() {
                "EX" | "AX" | "EF" | "AF" | "EG" | "AG" => {
                    self.bump();
                    let f = self.unary()?;
                    Ok(match w.as_str() {
                        "EX" => Formula::ex(f),
                        "AX" => Formula::ax(f),
                        "EF" => Formula::ef(f),
                        "AF" => Formula::af(f),
                        "EG" => Formula::eg(f),
                        _ => Formula::ag(f),
                    })
                }
                "K" | "P" => {
                    self.bump();
                    let agent = self.expect_index("agent")?;
                    let f = self.unary()?;
                    Ok(if w == "K" {
                        Formula::knows(agent, f)
                    } else {
                        Formula::possible(agent, f)
                    })
                }
                "E" | "A" => {
                    self.bump();
                    let (a, b) = self.until_body()?;
                    Ok(if w == "E" {
                        Formula::eu(a, b)
                    } else {
                        Formula::au(a, b)
                    })
                }
                "true" => {
                    self.bump();
                    Ok(Formula::truth())
                }
                "false" => {
                    self.bump();
                    Ok(Formula::falsity())
                }
                "v" => {
                    self.bump();
                    self.expect(Tok::Eq)?;
                    match self.peek().tok.clone() {
                        Tok::Word(w) if w == "unknown" => {
                            self.bump();
                            Ok(Formula::verdict_unknown())
                        }
                        Tok::Int { value, .. } if value < u8::MAX as u64 => {
                            self.bump();
                            Ok(Formula::verdict(value as u8))
                        }
                        other => {
                            self.fail(format!("expected verdict value, found {other}"))
                        }
                    }
                }
                "profile" => {
                    self.bump();
                    self.expect(Tok::Eq)?;
                    match self.peek().tok.clone() {
                        Tok::Int { text, .. }
                            if text.len() <= 32 && text.chars().all(|c| c == '0' || c == '1') =>
                        {
                            self.bump();
                            let bits: Vec<bool> =
                                text.chars().map(|c| c == '1').collect();
                            Ok(Formula::profile(&bits))
                        }
                        other => self.fail(format!(
                            "expected a profile bit string of up to 32 judges, found {other}"
                        )),
                    }
                }
                _ if w.len() > 1
                    && w.starts_with('d')
                    && w[1..].chars().all(|c| c.is_ascii_digit()) =>
                {
                    self.bump();
                    let judge = w[1..].parse::<usize>().map_err(|_| MckError::Parse {
                        line: self.peek().line,
                        col: self.peek().col,
                        message: format!("judge index {} out of range", &w[1..]),
                    })?;
                    self.expect(Tok::Eq)?;
                    match self.peek().tok.clone() {
                        Tok::Int { value: 0, .. } => {
                            self.bump();
                            Ok(Formula::decision(judge, false))
                        }
                        Tok::Int { value: 1, .. } => {
                            self.bump();
                            Ok(Formula::decision(judge, true))
                        }
                        other => self.fail(format!("expected decision bit, found {other}")),
                    }
                }
                _ => self.fail(format!("unexpected word '{w}'")),
            },
            other => self.fail(format!("expected a formula, found {other}")),
        }
    }
}

/// Parses the ASCII formula syntax; see the module documentation.
pub fn parse_formula(src: &str) -> Result<Formula, MckError> {
    let toks = lex(src)?;
    let mut parser = Parser { toks, pos: 0 };
    let f = parser.formula()?;
    if parser.peek().tok != Tok::Eof {
        return parser.fail(format!("trailing input, found {}", parser.peek().tok));
    }
    Ok(f)
}

// ---------------------------------------------------------------------
// Evaluation

/// Fixed-size bitset over state indices.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits {
    words: Vec<u64>,
    len: usize,
}

impl Bits {
    fn empty(len: usize) -> Bits {
        Bits {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    fn full(len: usize) -> Bits {
        let mut b = Bits {
            words: vec![!0u64; len.div_ceil(64)],
            len,
        };
        b.mask_tail();
        b
    }

    fn mask_tail(&mut self) {
        let spare = self.words.len() * 64 - self.len;
        if spare > 0 {
            let last = self.words.len() - 1;
            self.words[last] &= !0u64 >> spare;
        }
    }

    fn get(&self, i: u32) -> bool {
        self.words[i as usize / 64] >> (i % 64) & 1 == 1
    }

    fn set(&mut self, i: u32) {
        self.words[i as usize / 64] |= 1 << (i % 64);
    }

    fn invert(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.mask_tail();
    }

    fn and_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    fn or_with(&mut self, other: &Bits) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn ones(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros();
                w &= w - 1;
                Some(wi as u32 * 64 + bit)
            })
        })
    }
}

/// Result of checking one formula against a model: whether it holds in
/// every initial state, which initial states falsify it, and the size of
/// its satisfying set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub holds: bool,
    pub initial_states: usize,
    pub failing_initial: Vec<u32>,
    pub satisfying_states: usize,
}

/// Human-readable justification of a check outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Explanation {
    pub holds: bool,
    pub lines: Vec<String>,
}

/// Evaluator with a per-model cache of satisfying sets.
pub struct Checker<'m> {
    model: &'m KripkeModel,
    cache: HashMap<Formula, Bits>,
}

impl<'m> Checker<'m> {
    pub fn new(model: &'m KripkeModel) -> Checker<'m> {
        Checker {
            model,
            cache: HashMap::new(),
        }
    }

    pub fn model(&self) -> &'m KripkeModel {
        self.model
    }

    /// Rejects formulas that talk about agents or judges the model lacks.
    pub fn validate(&self, f: &Formula) -> Result<(), MckError> {
        let agents = self.model.agents();
        match f {
            Formula::Atom(Atom::Decision(judge, _)) if *judge >= agents => {
                Err(MckError::JudgeOutOfRange {
                    judge: *judge,
                    agents,
                })
            }
            Formula::Atom(Atom::Profile { judges, .. }) if *judges != agents => {
                Err(MckError::ProfileWidth {
                    got: *judges,
                    agents,
                })
            }
            Formula::Atom(_) => Ok(()),
            Formula::Knows(agent, g) | Formula::Possible(agent, g) => {
                if *agent >= agents {
                    return Err(MckError::AgentOutOfRange {
                        agent: *agent,
                        agents,
                    });
                }
                self.validate(g)
            }
            Formula::Not(g)
            | Formula::Ex(g)
            | Formula::Ax(g)
            | Formula::Ef(g)
            | Formula::Af(g)
            | Formula::Eg(g)
            | Formula::Ag(g) => self.validate(g),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Eu(a, b)
            | Formula::Au(a, b) => {
                self.validate(a)?;
                self.validate(b)
            }
        }
    }

    pub fn check(&mut self, f: &Formula) -> Result<CheckResult, MckError> {
        self.validate(f)?;
        let sat = self.eval(f);
        let failing_initial: Vec<u32> = self
            .model
            .init_states()
            .iter()
            .copied()
            .filter(|&s| !sat.get(s))
            .collect();
        Ok(CheckResult {
            holds: failing_initial.is_empty(),
            initial_states: self.model.init_states().len(),
            failing_initial,
            satisfying_states: sat.count(),
        })
    }

    /// States satisfying the formula, ascending.
    pub fn satisfying_states(&mut self, f: &Formula) -> Result<Vec<u32>, MckError> {
        self.validate(f)?;
        Ok(self.eval(f).ones().collect())
    }

    fn eval(&mut self, f: &Formula) -> Bits {
        if let Some(hit) = self.cache.get(f) {
            return hit.clone();
        }
        let n = self.model.state_count();
        let out = match f {
            Formula::Atom(a) => self.eval_atom(a),
            Formula::Not(g) => {
                let mut s = self.eval(g);
                s.invert();
                s
            }
            Formula::And(a, b) => {
                let mut s = self.eval(a);
                s.and_with(&self.eval(b));
                s
            }
            Formula::Or(a, b) => {
                let mut s = self.eval(a);
                s.or_with(&self.eval(b));
                s
            }
            Formula::Implies(a, b) => {
                let mut s = self.eval(a);
                s.invert();
                s.or_with(&self.eval(b));
                s
            }
            Formula::Knows(agent, g) => {
                let sat = self.eval(g);
                self.classes_where(*agent, |members| members.iter().all(|&s| sat.get(s)))
            }
            Formula::Possible(agent, g) => {
                let sat = self.eval(g);
                self.classes_where(*agent, |members| members.iter().any(|&s| sat.get(s)))
            }
            Formula::Ex(g) => {
                let sat = self.eval(g);
                self.preimage(&sat)
            }
            Formula::Ax(g) => {
                // AX f = !EX !f
                let mut sat = self.eval(g);
                sat.invert();
                let mut s = self.preimage(&sat);
                s.invert();
                s
            }
            Formula::Ef(g) => {
                // EF f = E(true U f)
                let sat = self.eval(g);
                self.until(&Bits::full(n), &sat)
            }
            Formula::Af(g) => {
                // AF f = !EG !f
                let mut sat = self.eval(g);
                sat.invert();
                let mut s = self.globally(&sat);
                s.invert();
                s
            }
            Formula::Eg(g) => {
                let sat = self.eval(g);
                self.globally(&sat)
            }
            Formula::Ag(g) => {
                // AG f = !E(true U !f)
                let mut sat = self.eval(g);
                sat.invert();
                let mut s = self.until(&Bits::full(n), &sat);
                s.invert();
                s
            }
            Formula::Eu(a, b) => {
                let sa = self.eval(a);
                let sb = self.eval(b);
                self.until(&sa, &sb)
            }
            Formula::Au(a, b) => {
                // A(a U b) = !(E(!b U (!a & !b)) | EG !b)
                let mut na = self.eval(a);
                na.invert();
                let mut nb = self.eval(b);
                nb.invert();
                na.and_with(&nb);
                let mut s = self.until(&nb, &na);
                s.or_with(&self.globally(&nb));
                s.invert();
                s
            }
        };
        self.cache.insert(f.clone(), out.clone());
        out
    }

    fn eval_atom(&self, a: &Atom) -> Bits {
        let n = self.model.state_count();
        match a {
            Atom::True => Bits::full(n),
            Atom::False => Bits::empty(n),
            _ => {
                let mut out = Bits::empty(n);
                for s in 0..n as u32 {
                    let hit = match a {
                        Atom::VerdictUnknown => self.model.verdict(s) == VerdictValue::Unknown,
                        Atom::Verdict(v) => self.model.verdict(s) == VerdictValue::Value(*v),
                        Atom::Decision(j, b) => self.model.decision(s, *j) == *b,
                        Atom::Profile { mask, .. } => self.model.decisions_mask(s) == *mask,
                        Atom::True | Atom::False => unreachable!(),
                    };
                    if hit {
                        out.set(s);
                    }
                }
                out
            }
        }
    }

    /// States whose whole observation class passes the test.
    fn classes_where(&self, agent: usize, test: impl Fn(&[u32]) -> bool) -> Bits {
        let mut out = Bits::empty(self.model.state_count());
        for class in 0..self.model.class_count(agent) as u32 {
            let members = self.model.class_states(agent, class);
            if test(members) {
                for &s in members {
                    out.set(s);
                }
            }
        }
        out
    }

    /// States with at least one successor in the set.
    fn preimage(&self, set: &Bits) -> Bits {
        let mut out = Bits::empty(self.model.state_count());
        for t in set.ones() {
            for &s in self.model.predecessors(t) {
                out.set(s);
            }
        }
        out
    }

    /// Least fixpoint of E(a U b) by a backward worklist from b.
    fn until(&self, a: &Bits, b: &Bits) -> Bits {
        let mut sat = b.clone();
        let mut stack: Vec<u32> = b.ones().collect();
        while let Some(t) = stack.pop() {
            for &s in self.model.predecessors(t) {
                if a.get(s) && !sat.get(s) {
                    sat.set(s);
                    stack.push(s);
                }
            }
        }
        sat
    }

    /// Greatest fixpoint of EG: repeatedly strip states without a
    /// successor still in the set, until stable.
    fn globally(&self, g: &Bits) -> Bits {
        let mut z = g.clone();
        loop {
            let mut next = self.preimage(&z);
            next.and_with(g);
            if next == z {
                return z;
            }
            z = next;
        }
    }

    // -----------------------------------------------------------------
    // Evidence

    /// Justifies the check outcome: positive evidence at the first
    /// initial state when the formula holds, otherwise a breakdown of the
    /// first failing initial state (paths for temporal violations,
    /// indistinguishable states for knowledge).
    pub fn explain(&mut self, f: &Formula) -> Result<Explanation, MckError> {
        let result = self.check(f)?;
        let mut lines = Vec::new();
        let start = if result.holds {
            lines.push(format!(
                "holds in all {} initial states ({} of {} states satisfy it)",
                result.initial_states,
                result.satisfying_states,
                self.model.state_count()
            ));
            self.model.init_states()[0]
        } else {
            lines.push(format!(
                "fails in {} of {} initial states",
                result.failing_initial.len(),
                result.initial_states
            ));
            result.failing_initial[0]
        };
        lines.push(format!("at {}:", self.model.describe(start)));
        self.justify(f, start, 1, &mut lines);
        Ok(Explanation {
            holds: result.holds,
            lines,
        })
    }

    fn justify(&mut self, f: &Formula, s: u32, depth: usize, lines: &mut Vec<String>) {
        let indent = "  ".repeat(depth);
        if depth > 6 {
            lines.push(format!("{indent}(deeper evidence elided)"));
            return;
        }
        let value = self.eval(f).get(s);
        let model = self.model;
        match f {
            Formula::Atom(_) => {
                lines.push(format!("{indent}{f} is {value} here"));
            }
            Formula::Not(g) => {
                self.justify(g, s, depth, lines);
            }
            Formula::And(a, b) => {
                if value {
                    lines.push(format!("{indent}both conjuncts hold"));
                    self.justify(a, s, depth + 1, lines);
                    self.justify(b, s, depth + 1, lines);
                } else {
                    let first_false = if !self.eval(a).get(s) { a } else { b };
                    lines.push(format!("{indent}conjunct {first_false} fails:"));
                    self.justify(first_false, s, depth + 1, lines);
                }
            }
            Formula::Or(a, b) => {
                if value {
                    let first_true = if self.eval(a).get(s) { a } else { b };
                    lines.push(format!("{indent}disjunct {first_true} holds:"));
                    self.justify(first_true, s, depth + 1, lines);
                } else {
                    lines.push(format!("{indent}neither disjunct holds"));
                    self.justify(a, s, depth + 1, lines);
                    self.justify(b, s, depth + 1, lines);
                }
            }
            Formula::Implies(a, b) => {
                if !self.eval(a).get(s) {
                    lines.push(format!("{indent}premise {a} does not hold here"));
                } else if value {
                    lines.push(format!("{indent}premise holds and so does {b}:"));
                    self.justify(b, s, depth + 1, lines);
                } else {
                    lines.push(format!("{indent}premise {a} holds but {b} fails:"));
                    self.justify(b, s, depth + 1, lines);
                }
            }
            Formula::Knows(agent, g) => {
                let class = model.class_states(*agent, model.obs_class(*agent, s));
                if value {
                    lines.push(format!(
                        "{indent}judge {agent} knows {g}: it holds in all {} states the judge cannot tell apart",
                        class.len()
                    ));
                    for &t in class.iter().take(3) {
                        lines.push(format!("{indent}  {}", model.describe(t)));
                    }
                    if class.len() > 3 {
                        lines.push(format!("{indent}  ({} more)", class.len() - 3));
                    }
                } else {
                    let sat = self.eval(g);
                    let witness = class.iter().copied().find(|&t| !sat.get(t));
                    if let Some(t) = witness {
                        lines.push(format!(
                            "{indent}judge {agent} cannot rule out {}:",
                            model.describe(t)
                        ));
                        self.justify(g, t, depth + 1, lines);
                    }
                }
            }
            Formula::Possible(agent, g) => {
                let class = model.class_states(*agent, model.obs_class(*agent, s));
                if value {
                    let sat = self.eval(g);
                    if let Some(t) = class.iter().copied().find(|&t| sat.get(t)) {
                        lines.push(format!(
                            "{indent}judge {agent} considers possible {}:",
                            model.describe(t)
                        ));
                        self.justify(g, t, depth + 1, lines);
                    }
                } else {
                    lines.push(format!(
                        "{indent}{g} fails in all {} states judge {agent} cannot tell apart",
                        class.len()
                    ));
                }
            }
            Formula::Ex(g) | Formula::Ax(g) => {
                let sat = self.eval(g);
                let succ = model.successors(s);
                let witness = if value == matches!(f, Formula::Ex(_)) {
                    succ.iter().copied().find(|&t| sat.get(t))
                } else {
                    succ.iter().copied().find(|&t| !sat.get(t))
                };
                if let Some(t) = witness {
                    lines.push(format!("{indent}successor {}:", model.describe(t)));
                    self.justify(g, t, depth + 1, lines);
                } else {
                    lines.push(format!(
                        "{indent}all {} successors agree on {g} being {}",
                        succ.len(),
                        !value
                    ));
                }
            }
            Formula::Ag(g) => {
                if value {
                    lines.push(format!("{indent}every state reachable from here satisfies {g}"));
                } else {
                    let mut bad = self.eval(g);
                    bad.invert();
                    if let Some(path) = self.find_path(s, &bad, None) {
                        self.push_path(&path, "reaches a violation", depth, lines);
                        self.justify(g, *path.last().expect("nonempty path"), depth + 1, lines);
                    }
                }
            }
            Formula::Ef(g) => {
                if value {
                    let sat = self.eval(g);
                    if let Some(path) = self.find_path(s, &sat, None) {
                        self.push_path(&path, "reaches a witness", depth, lines);
                        self.justify(g, *path.last().expect("nonempty path"), depth + 1, lines);
                    }
                } else {
                    lines.push(format!("{indent}no reachable state satisfies {g}"));
                }
            }
            Formula::Af(g) => {
                if value {
                    lines.push(format!("{indent}every path from here eventually satisfies {g}"));
                } else {
                    let mut ng = self.eval(g);
                    ng.invert();
                    let trap = self.globally(&ng);
                    let (path, loop_at) = self.find_lasso(s, &trap);
                    self.push_lasso(&path, loop_at, g, depth, lines);
                }
            }
            Formula::Eg(g) => {
                if value {
                    let sat = self.eval(g);
                    let trap = self.globally(&sat);
                    let (path, loop_at) = self.find_lasso(s, &trap);
                    self.push_lasso(&path, loop_at, &Formula::not((**g).clone()), depth, lines);
                } else {
                    lines.push(format!("{indent}every path from here eventually leaves {g}"));
                }
            }
            Formula::Eu(a, b) => {
                if value {
                    let sa = self.eval(a);
                    let sb = self.eval(b);
                    if let Some(path) = self.find_path(s, &sb, Some(&sa)) {
                        self.push_path(&path, "reaches the goal", depth, lines);
                    }
                } else {
                    lines.push(format!(
                        "{indent}no path keeps {a} alive until {b} holds"
                    ));
                }
            }
            Formula::Au(a, b) => {
                lines.push(format!(
                    "{indent}A ({a} U {b}) is {value} here (via its until/globally expansion)"
                ));
            }
        }
    }

    /// Breadth-first path from `from` to any state in `goal`; intermediate
    /// hops stay in `within` when given. Includes both endpoints.
    fn find_path(&self, from: u32, goal: &Bits, within: Option<&Bits>) -> Option<Vec<u32>> {
        if goal.get(from) {
            return Some(vec![from]);
        }
        if let Some(w) = within {
            if !w.get(from) {
                return None;
            }
        }
        let mut parent: HashMap<u32, u32> = HashMap::new();
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(s) = queue.pop_front() {
            for &t in self.model.successors(s) {
                if t == from || parent.contains_key(&t) {
                    continue;
                }
                parent.insert(t, s);
                if goal.get(t) {
                    let mut path = vec![t];
                    let mut cur = t;
                    while cur != from {
                        cur = parent[&cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                if within.map_or(true, |w| w.get(t)) {
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// Walks inside `trap` (a set closed under taking some successor in
    /// itself) until a state repeats; returns the walk and the loop start.
    fn find_lasso(&self, from: u32, trap: &Bits) -> (Vec<u32>, usize) {
        let mut order: HashMap<u32, usize> = HashMap::new();
        let mut path = Vec::new();
        let mut cur = from;
        loop {
            if let Some(&at) = order.get(&cur) {
                return (path, at);
            }
            order.insert(cur, path.len());
            path.push(cur);
            cur = *self
                .model
                .successors(cur)
                .iter()
                .find(|&&t| trap.get(t))
                .expect("trap set is closed under successors");
        }
    }

    fn push_path(&self, path: &[u32], what: &str, depth: usize, lines: &mut Vec<String>) {
        let indent = "  ".repeat(depth);
        lines.push(format!("{indent}{what} after {} steps:", path.len() - 1));
        for &s in path {
            lines.push(format!("{indent}  {}", self.model.describe(s)));
        }
    }

    fn push_lasso(
        &self,
        path: &[u32],
        loop_at: usize,
        stuck: &Formula,
        depth: usize,
        lines: &mut Vec<String>,
    ) {
        let indent = "  ".repeat(depth);
        lines.push(format!(
            "{indent}a path avoids it forever ({stuck} stays false), looping at step {loop_at}:"
        ));
        for &s in path {
            lines.push(format!("{indent}  {}", self.model.describe(s)));
        }
    }
}
