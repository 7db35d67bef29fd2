//! Fixed-width bitwise logic over a finite set of variables.
//!
//! Terms are variables, constants, `~t`, `t & t`, `t | t` and `t ^ t`.
//! Formulas are `t = t`, `t != t`, `true`, `false`, negation (`~` or `!`),
//! conjunction `/\` and disjunction `\/`. Bit `i` of a word weighs `2^i`.
//!
//! A leading `~` is read as bitwise complement when the rest parses as an
//! equation (`~x = y` is `(~x) = y`), otherwise as logical negation.

use std::collections::BTreeMap;
use std::fmt;

use crate::arithmetic::BitWord;
use crate::error::{Error, Result};

pub const MAX_WIDTH: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BvTerm {
    Var(usize),
    Const(u128),
    Not(Box<BvTerm>),
    And(Box<BvTerm>, Box<BvTerm>),
    Or(Box<BvTerm>, Box<BvTerm>),
    Xor(Box<BvTerm>, Box<BvTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BvFormula {
    True,
    False,
    Eq(BvTerm, BvTerm),
    Not(Box<BvFormula>),
    And(Box<BvFormula>, Box<BvFormula>),
    Or(Box<BvFormula>, Box<BvFormula>),
}

/// Negation normal form: negations only on equalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Nnf {
    True,
    False,
    /// `lhs = rhs` when `positive`, `lhs != rhs` otherwise.
    Atom { lhs: BvTerm, rhs: BvTerm, positive: bool },
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
}

fn mask(width: usize) -> u128 {
    if width >= 128 {
        u128::MAX
    } else {
        (1u128 << width) - 1
    }
}

impl BvTerm {
    pub fn eval(&self, words: &[u128], width: usize) -> u128 {
        match self {
            BvTerm::Var(i) => words[*i],
            BvTerm::Const(c) => *c,
            BvTerm::Not(t) => !t.eval(words, width) & mask(width),
            BvTerm::And(a, b) => a.eval(words, width) & b.eval(words, width),
            BvTerm::Or(a, b) => a.eval(words, width) | b.eval(words, width),
            BvTerm::Xor(a, b) => a.eval(words, width) ^ b.eval(words, width),
        }
    }

    /// Bit `j` of the term given only the `j`-th slice: bit `i` of `slice` is
    /// bit `j` of variable `i`.
    pub fn eval_slice(&self, j: usize, slice: u64) -> bool {
        match self {
            BvTerm::Var(i) => (slice >> i) & 1 == 1,
            BvTerm::Const(c) => j < 128 && (c >> j) & 1 == 1,
            BvTerm::Not(t) => !t.eval_slice(j, slice),
            BvTerm::And(a, b) => a.eval_slice(j, slice) & b.eval_slice(j, slice),
            BvTerm::Or(a, b) => a.eval_slice(j, slice) | b.eval_slice(j, slice),
            BvTerm::Xor(a, b) => a.eval_slice(j, slice) ^ b.eval_slice(j, slice),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            BvTerm::Var(i) => Some(*i),
            BvTerm::Const(_) => None,
            BvTerm::Not(t) => t.max_var(),
            BvTerm::And(a, b) | BvTerm::Or(a, b) | BvTerm::Xor(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// `a ^ b` rewritten as `(a | b) & ~(a & b)`.
    pub fn desugar_xor(&self) -> BvTerm {
        match self {
            BvTerm::Var(_) | BvTerm::Const(_) => self.clone(),
            BvTerm::Not(t) => BvTerm::Not(Box::new(t.desugar_xor())),
            BvTerm::And(a, b) => BvTerm::And(Box::new(a.desugar_xor()), Box::new(b.desugar_xor())),
            BvTerm::Or(a, b) => BvTerm::Or(Box::new(a.desugar_xor()), Box::new(b.desugar_xor())),
            BvTerm::Xor(a, b) => {
                let (a, b) = (a.desugar_xor(), b.desugar_xor());
                BvTerm::And(
                    Box::new(BvTerm::Or(Box::new(a.clone()), Box::new(b.clone()))),
                    Box::new(BvTerm::Not(Box::new(BvTerm::And(Box::new(a), Box::new(b))))),
                )
            }
        }
    }
}

impl BvFormula {
    pub fn eval(&self, words: &[u128], width: usize) -> bool {
        match self {
            BvFormula::True => true,
            BvFormula::False => false,
            BvFormula::Eq(a, b) => a.eval(words, width) == b.eval(words, width),
            BvFormula::Not(p) => !p.eval(words, width),
            BvFormula::And(p, q) => p.eval(words, width) && q.eval(words, width),
            BvFormula::Or(p, q) => p.eval(words, width) || q.eval(words, width),
        }
    }

    pub fn nnf(&self) -> Nnf {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, positive: bool) -> Nnf {
        match (self, positive) {
            (BvFormula::True, true) | (BvFormula::False, false) => Nnf::True,
            (BvFormula::True, false) | (BvFormula::False, true) => Nnf::False,
            (BvFormula::Eq(a, b), _) => Nnf::Atom {
                lhs: a.clone(),
                rhs: b.clone(),
                positive,
            },
            (BvFormula::Not(p), _) => p.nnf_signed(!positive),
            (BvFormula::And(p, q), true) | (BvFormula::Or(p, q), false) => {
                Nnf::And(Box::new(p.nnf_signed(positive)), Box::new(q.nnf_signed(positive)))
            }
            (BvFormula::Or(p, q), true) | (BvFormula::And(p, q), false) => {
                Nnf::Or(Box::new(p.nnf_signed(positive)), Box::new(q.nnf_signed(positive)))
            }
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            BvFormula::True | BvFormula::False => None,
            BvFormula::Eq(a, b) => a.max_var().max(b.max_var()),
            BvFormula::Not(p) => p.max_var(),
            BvFormula::And(p, q) | BvFormula::Or(p, q) => p.max_var().max(q.max_var()),
        }
    }

    pub fn desugar_xor(&self) -> BvFormula {
        match self {
            BvFormula::True | BvFormula::False => self.clone(),
            BvFormula::Eq(a, b) => BvFormula::Eq(a.desugar_xor(), b.desugar_xor()),
            BvFormula::Not(p) => BvFormula::Not(Box::new(p.desugar_xor())),
            BvFormula::And(p, q) => BvFormula::And(Box::new(p.desugar_xor()), Box::new(q.desugar_xor())),
            BvFormula::Or(p, q) => BvFormula::Or(Box::new(p.desugar_xor()), Box::new(q.desugar_xor())),
        }
    }
}

impl Nnf {
    pub fn eval(&self, words: &[u128], width: usize) -> bool {
        match self {
            Nnf::True => true,
            Nnf::False => false,
            Nnf::Atom { lhs, rhs, positive } => (lhs.eval(words, width) == rhs.eval(words, width)) == *positive,
            Nnf::And(p, q) => p.eval(words, width) && q.eval(words, width),
            Nnf::Or(p, q) => p.eval(words, width) || q.eval(words, width),
        }
    }
}

/// Variable name to word.
pub type BvAssignment = BTreeMap<String, BitWord>;

/// A formula together with its width and declared variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BvSpec {
    width: usize,
    vars: Vec<String>,
    formula: BvFormula,
}

impl BvSpec {
    pub fn new(width: usize, vars: Vec<String>, formula: BvFormula) -> Result<Self> {
        if width == 0 || width > MAX_WIDTH {
            return Err(Error::WidthMismatch {
                expected: MAX_WIDTH,
                got: width,
            });
        }
        if let Some(v) = formula.max_var().filter(|&v| v >= vars.len()) {
            return Err(Error::UnboundVariable(format!("#{v}")));
        }
        Ok(BvSpec { width, vars, formula })
    }

    pub fn trivial(width: usize, vars: Vec<String>) -> Self {
        BvSpec {
            width,
            vars,
            formula: BvFormula::True,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn formula(&self) -> &BvFormula {
        &self.formula
    }

    pub fn parse(text: &str, width: usize, vars: &[String]) -> Result<Self> {
        let formula = parse_formula(text, width, vars)?;
        BvSpec::new(width, vars.to_vec(), formula)
    }

    /// Truth value on words given positionally (one per declared variable).
    pub fn eval_words(&self, words: &[u128]) -> bool {
        self.formula.eval(words, self.width)
    }

    pub fn model_check(&self, assignment: &BvAssignment) -> Result<bool> {
        let mut words = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            let w = assignment.get(v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
            if w.len() != self.width {
                return Err(Error::WidthMismatch {
                    expected: self.width,
                    got: w.len(),
                });
            }
            words.push(w.to_u128());
        }
        Ok(self.eval_words(&words))
    }

    pub fn assignment(&self, words: &[u128]) -> BvAssignment {
        self.vars
            .iter()
            .zip(words)
            .map(|(v, &w)| (v.clone(), BitWord::from_u128(w, self.width)))
            .collect()
    }

    /// Exhaustive search over all assignments, refusing more than
    /// `2^cap_bits` of them. Returns the least model in lexicographic order
    /// of the variable words.
    pub fn sat_bruteforce(&self, cap_bits: usize) -> Result<Option<Vec<u128>>> {
        let bits = self.vars.len() * self.width;
        if bits > cap_bits || bits >= 128 {
            return Err(Error::SearchSpaceTooLarge { bits, cap: cap_bits });
        }
        let m = mask(self.width);
        let mut words = vec![0u128; self.vars.len()];
        for code in 0..(1u128 << bits) {
            for (i, w) in words.iter_mut().enumerate() {
                // first variable varies slowest
                let shift = (self.vars.len() - 1 - i) * self.width;
                *w = (code >> shift) & m;
            }
            if self.eval_words(&words) {
                return Ok(Some(words));
            }
        }
        Ok(None)
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, t: &BvTerm, vars: &[String], width: usize) -> fmt::Result {
    match t {
        BvTerm::Var(i) => f.write_str(&vars[*i]),
        BvTerm::Const(c) => write!(f, "0b{:0w$b}", c, w = width),
        BvTerm::Not(a) => {
            f.write_str("~")?;
            write_term(f, a, vars, width)
        }
        BvTerm::And(a, b) | BvTerm::Or(a, b) | BvTerm::Xor(a, b) => {
            let op = match t {
                BvTerm::And(..) => "&",
                BvTerm::Or(..) => "|",
                _ => "^",
            };
            f.write_str("(")?;
            write_term(f, a, vars, width)?;
            write!(f, " {op} ")?;
            write_term(f, b, vars, width)?;
            f.write_str(")")
        }
    }
}

fn write_formula(f: &mut fmt::Formatter<'_>, p: &BvFormula, vars: &[String], width: usize) -> fmt::Result {
    match p {
        BvFormula::True => f.write_str("true"),
        BvFormula::False => f.write_str("false"),
        BvFormula::Eq(a, b) => {
            write_term(f, a, vars, width)?;
            f.write_str(" = ")?;
            write_term(f, b, vars, width)
        }
        BvFormula::Not(q) => {
            f.write_str("!(")?;
            write_formula(f, q, vars, width)?;
            f.write_str(")")
        }
        BvFormula::And(a, b) | BvFormula::Or(a, b) => {
            f.write_str("(")?;
            write_formula(f, a, vars, width)?;
            f.write_str(if matches!(p, BvFormula::And(..)) { " /\\ " } else { " \\/ " })?;
            write_formula(f, b, vars, width)?;
            f.write_str(")")
        }
    }
}

impl fmt::Display for BvSpec {
    /// The formula alone, fully parenthesised.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(f, &self.formula, &self.vars, self.width)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Tilde,
    Bang,
    Amp,
    Pipe,
    Caret,
    Eq,
    Ne,
    LParen,
    RParen,
    Conj,
    Disj,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize, usize)>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            let next = chars.get(i + 1).copied();
            let tok = match (c, next) {
                (' ' | '\t' | '\r', _) => {
                    i += 1;
                    continue;
                }
                ('/', Some('\\')) => {
                    i += 1;
                    Tok::Conj
                }
                ('\\', Some('/')) => {
                    i += 1;
                    Tok::Disj
                }
                ('!', Some('=')) => {
                    i += 1;
                    Tok::Ne
                }
                ('=', Some('=')) => {
                    i += 1;
                    Tok::Eq
                }
                ('~', _) => Tok::Tilde,
                ('!', _) => Tok::Bang,
                ('&', _) => Tok::Amp,
                ('|', _) => Tok::Pipe,
                ('^', _) => Tok::Caret,
                ('=', _) => Tok::Eq,
                ('(', _) => Tok::LParen,
                (')', _) => Tok::RParen,
                (c, _) if c.is_ascii_alphanumeric() || c == '_' => {
                    let start = i;
                    while i + 1 < chars.len() && (chars[i + 1].is_ascii_alphanumeric() || chars[i + 1] == '_') {
                        i += 1;
                    }
                    let word: String = chars[start..=i].iter().collect();
                    if c.is_ascii_digit() {
                        Tok::Num(word)
                    } else {
                        Tok::Ident(word)
                    }
                }
                (c, _) => return Err(Error::syntax(n + 1, col, format!("unexpected character `{c}`"))),
            };
            out.push((tok, n + 1, col));
            i += 1;
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
    width: usize,
    vars: &'a [String],
}

type PResult<T> = std::result::Result<T, Error>;

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        let (l, c) = self
            .toks
            .get(self.pos)
            .or(self.toks.last())
            .map_or((1, 1), |t| (t.1, t.2));
        Error::syntax(l, c, msg)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn formula(&mut self) -> PResult<BvFormula> {
        let mut p = self.conj()?;
        while self.eat(&Tok::Disj) {
            p = BvFormula::Or(Box::new(p), Box::new(self.conj()?));
        }
        Ok(p)
    }

    fn conj(&mut self) -> PResult<BvFormula> {
        let mut p = self.unary()?;
        while self.eat(&Tok::Conj) {
            p = BvFormula::And(Box::new(p), Box::new(self.unary()?));
        }
        Ok(p)
    }

    /// Runs `f`, rewinding on failure. Semantic errors are not retried.
    fn attempt<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<PResult<T>> {
        let save = self.pos;
        match f(self) {
            Ok(v) => Some(Ok(v)),
            Err(e @ Error::ConstantTooWide { .. }) => Some(Err(e)),
            Err(_) => {
                self.pos = save;
                None
            }
        }
    }

    fn unary(&mut self) -> PResult<BvFormula> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.pos += 1;
                Ok(BvFormula::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Tilde) => {
                if let Some(r) = self.attempt(Self::atom) {
                    return r;
                }
                self.pos += 1;
                Ok(BvFormula::Not(Box::new(self.unary()?)))
            }
            Some(Tok::LParen) => {
                let grouped = self.attempt(|p| {
                    p.pos += 1;
                    let f = p.formula()?;
                    p.expect(Tok::RParen, "`)`")?;
                    // `(x = y) & ...` is not a formula
                    if matches!(p.peek(), Some(Tok::Amp | Tok::Pipe | Tok::Caret | Tok::Eq | Tok::Ne)) {
                        return Err(p.error("unexpected operator"));
                    }
                    Ok(f)
                });
                match grouped {
                    Some(r) => r,
                    None => self.atom(),
                }
            }
            Some(Tok::Ident(w)) if w == "true" || w == "false" => {
                let v = w == "true";
                self.pos += 1;
                Ok(if v { BvFormula::True } else { BvFormula::False })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<BvFormula> {
        let lhs = self.term()?;
        let positive = match self.peek() {
            Some(Tok::Eq) => true,
            Some(Tok::Ne) => false,
            _ => return Err(self.error("expected `=` or `!=`")),
        };
        self.pos += 1;
        let rhs = self.term()?;
        let eq = BvFormula::Eq(lhs, rhs);
        Ok(if positive { eq } else { BvFormula::Not(Box::new(eq)) })
    }

    fn term(&mut self) -> PResult<BvTerm> {
        let mut t = self.xor_term()?;
        while self.eat(&Tok::Pipe) {
            t = BvTerm::Or(Box::new(t), Box::new(self.xor_term()?));
        }
        Ok(t)
    }

    fn xor_term(&mut self) -> PResult<BvTerm> {
        let mut t = self.and_term()?;
        while self.eat(&Tok::Caret) {
            t = BvTerm::Xor(Box::new(t), Box::new(self.and_term()?));
        }
        Ok(t)
    }

    fn and_term(&mut self) -> PResult<BvTerm> {
        let mut t = self.prim()?;
        while self.eat(&Tok::Amp) {
            t = BvTerm::And(Box::new(t), Box::new(self.prim()?));
        }
        Ok(t)
    }

    fn prim(&mut self) -> PResult<BvTerm> {
        match self.peek().cloned() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(BvTerm::Not(Box::new(self.prim()?)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Some(Tok::Num(s)) => {
                let value = parse_constant(&s).ok_or_else(|| self.error(format!("invalid constant `{s}`")))?;
                if value > mask(self.width) {
                    return Err(Error::ConstantTooWide {
                        constant: s,
                        width: self.width,
                    });
                }
                self.pos += 1;
                Ok(BvTerm::Const(value))
            }
            Some(Tok::Ident(name)) => {
                let i = self
                    .vars
                    .iter()
                    .position(|v| *v == name)
                    .ok_or_else(|| self.error(format!("undeclared variable `{name}`")))?;
                self.pos += 1;
                Ok(BvTerm::Var(i))
            }
            _ => Err(self.error("expected a term")),
        }
    }
}

fn parse_constant(s: &str) -> Option<u128> {
    let s = s.replace('_', "");
    if let Some(b) = s.strip_prefix("0b") {
        u128::from_str_radix(b, 2).ok()
    } else if let Some(h) = s.strip_prefix("0x") {
        u128::from_str_radix(h, 16).ok()
    } else {
        s.parse().ok()
    }
}

pub fn parse_formula(text: &str, width: usize, vars: &[String]) -> Result<BvFormula> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Ok(BvFormula::True);
    }
    let mut p = Parser {
        toks,
        pos: 0,
        width,
        vars,
    };
    let f = p.formula()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

/// Standalone file: `width <l>`, `vars <names...>`, then the formula.
pub fn parse_bv_file(text: &str) -> Result<BvSpec> {
    let mut width = None;
    let mut vars = None;
    let mut body = String::new();
    for (n, line) in text.lines().enumerate() {
        let trimmed = line.split('#').next().unwrap_or("").trim();
        if trimmed == "format=1" {
            continue;
        }
        if let Some(w) = trimmed.strip_prefix("width ") {
            width = Some(w.trim().parse::<usize>().map_err(|_| Error::syntax(n + 1, 7, "bad width"))?);
            body.push('\n');
        } else if let Some(v) = trimmed.strip_prefix("vars ") {
            vars = Some(v.split_whitespace().map(String::from).collect::<Vec<_>>());
            body.push('\n');
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    let width = width.ok_or_else(|| Error::syntax(1, 1, "missing `width` header"))?;
    BvSpec::parse(&body, width, &vars.unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn var(i: usize) -> BvTerm {
        BvTerm::Var(i)
    }

    #[test]
    fn parse_examples() {
        let spec = BvSpec::parse("(x & 0b101) = 0b100", 3, &names(&["x"])).unwrap();
        assert_eq!(
            spec.formula(),
            &BvFormula::Eq(
                BvTerm::And(Box::new(var(0)), Box::new(BvTerm::Const(5))),
                BvTerm::Const(4)
            )
        );
        let spec = BvSpec::parse("~(x = y)", 3, &names(&["x", "y"])).unwrap();
        assert_eq!(spec.formula(), &BvFormula::Not(Box::new(BvFormula::Eq(var(0), var(1)))));
        assert!(matches!(
            BvSpec::parse("x = 9", 3, &names(&["x"])),
            Err(Error::ConstantTooWide { width: 3, .. })
        ));
        assert!(matches!(
            BvSpec::parse("x = (9)", 3, &names(&["x"])),
            Err(Error::ConstantTooWide { .. })
        ));
        let spec = BvSpec::parse("~x = y", 2, &names(&["x", "y"])).unwrap();
        assert_eq!(spec.formula(), &BvFormula::Eq(BvTerm::Not(Box::new(var(0))), var(1)));
        let spec = BvSpec::parse("(x = 0x3) \\/ !(x != 2) /\\ true", 2, &names(&["x"])).unwrap();
        assert!(matches!(spec.formula(), BvFormula::Or(..)));
        assert!(BvSpec::parse("x = ", 2, &names(&["x"])).is_err());
        assert!(BvSpec::parse("z = 1", 2, &names(&["x"])).is_err());
        assert!(BvSpec::parse("x = 1 y", 2, &names(&["x", "y"])).is_err());
    }

    #[test]
    fn display_round_trip() {
        let vars = names(&["x", "y"]);
        for text in ["(x & 0b101) = 0b100", "~(x = y) \\/ x ^ y = ~0", "!(x != y) /\\ false"] {
            let spec = BvSpec::parse(text, 3, &vars).unwrap();
            let again = BvSpec::parse(&spec.to_string(), 3, &vars).unwrap();
            assert_eq!(again, spec, "{text}");
        }
    }

    #[test]
    fn model_check_examples() {
        let spec = BvSpec::parse("(x & 0b101) = 0b100", 3, &names(&["x"])).unwrap();
        let mut a = BvAssignment::new();
        a.insert("x".into(), BitWord::from_u128(0b110, 3));
        assert!(spec.model_check(&a).unwrap());
        let spec = BvSpec::parse("~(x = x)", 2, &names(&["x"])).unwrap();
        for v in 0..4 {
            assert!(!spec.eval_words(&[v]));
        }
        a.insert("x".into(), BitWord::from_u128(1, 2));
        assert!(matches!(
            BvSpec::parse("x = 1", 3, &names(&["x"])).unwrap().model_check(&a),
            Err(Error::WidthMismatch { expected: 3, got: 2 })
        ));
        assert!(matches!(
            BvSpec::parse("y = 1", 2, &names(&["y"])).unwrap().model_check(&a),
            Err(Error::UnboundVariable(_))
        ));
    }

    #[test]
    fn connective_truth_tables_at_width_one() {
        let vars = names(&["x", "y"]);
        type Case = (&'static str, fn(bool, bool) -> bool);
        let cases: [Case; 7] = [
            ("(x & y) = 1", |a, b| a & b),
            ("(x | y) = 1", |a, b| a | b),
            ("(x ^ y) = 1", |a, b| a ^ b),
            ("~x = 1", |a, _| !a),
            ("x = y", |a, b| a == b),
            ("!(x = 1)", |a, _| !a),
            ("x = 1 /\\ y = 1", |a, b| a && b),
        ];
        for (text, truth) in cases {
            let spec = BvSpec::parse(text, 1, &vars).unwrap();
            for a in 0..2u128 {
                for b in 0..2u128 {
                    assert_eq!(spec.eval_words(&[a, b]), truth(a == 1, b == 1), "{text} {a}{b}");
                }
            }
        }
        let spec = BvSpec::parse("x = 1 \\/ y = 1", 1, &vars).unwrap();
        assert!(!spec.eval_words(&[0, 0]) && spec.eval_words(&[0, 1]));
    }

    #[test]
    fn bruteforce_examples() {
        let spec = BvSpec::parse("x = 0b01", 2, &names(&["x"])).unwrap();
        assert_eq!(spec.sat_bruteforce(20).unwrap(), Some(vec![1]));
        let spec = BvSpec::parse("x = 0 /\\ ~(x = 0)", 2, &names(&["x"])).unwrap();
        assert_eq!(spec.sat_bruteforce(20).unwrap(), None);
        assert!(matches!(
            BvSpec::parse("x = y", 16, &names(&["x", "y"])).unwrap().sat_bruteforce(20),
            Err(Error::SearchSpaceTooLarge { bits: 32, cap: 20 })
        ));
    }

    #[test]
    fn slices_match_whole_words() {
        let vars = names(&["x", "y"]);
        let spec = BvSpec::parse("(~x ^ (y | 0b1010)) & 0b0110 = x", 4, &vars).unwrap();
        let BvFormula::Eq(t, _) = spec.formula() else { unreachable!() };
        for x in 0..16u128 {
            for y in 0..16u128 {
                let whole = t.eval(&[x, y], 4);
                for j in 0..4 {
                    let slice = ((x >> j) & 1) as u64 | (((y >> j) & 1) as u64) << 1;
                    assert_eq!(t.eval_slice(j, slice), (whole >> j) & 1 == 1);
                }
            }
        }
        assert!(BvTerm::Const(0b101).eval_slice(2, 0));
        let and = BvTerm::And(Box::new(var(0)), Box::new(var(1)));
        assert!(!and.eval_slice(0, 0b01));
    }

    #[test]
    fn nnf_and_desugaring_preserve_semantics() {
        let vars = names(&["x", "y"]);
        let spec = BvSpec::parse("!((x ^ y) = 3 /\\ !(x = 1 \\/ y != 2))", 2, &vars).unwrap();
        let nnf = spec.formula().nnf();
        let plain = spec.formula().desugar_xor();
        for x in 0..4 {
            for y in 0..4 {
                let w = [x, y];
                assert_eq!(nnf.eval(&w, 2), spec.eval_words(&w));
                assert_eq!(plain.eval(&w, 2), spec.eval_words(&w));
            }
        }
    }

    #[test]
    fn file_format() {
        let spec = parse_bv_file("format=1\nwidth 3\nvars x y\n# c\nx != y\n").unwrap();
        assert_eq!(spec.width(), 3);
        assert_eq!(spec.vars(), &names(&["x", "y"])[..]);
        assert!(parse_bv_file("x = y").is_err());
    }
}
