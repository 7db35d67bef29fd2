//! Conjunctions of linear constraints over rational variables.
//!
//! Grammar (`#` starts a comment, constraints separated by newlines or `/\`):
//!
//! ```text
//! constraint := sum rel sum
//! rel        := "<" | "<=" | "=" | "==" | ">=" | ">"
//! sum        := ["+" | "-"] term (("+" | "-") term)*
//! term       := number ["*" var] | var
//! number     := digits ["/" digits | "." digits]
//! var        := letters digits          (e.g. x1, y3; 1-based positions)
//! ```
//!
//! Both sides may mix variables and constants; the normal form moves every
//! variable to the left and every constant to the right.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use super::simplex::{maximise, Outcome, Row, RowKind};
use crate::arithmetic::{parse_rational, ArithmeticFormat, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Relation {
    pub fn holds(self, ord: Ordering) -> bool {
        match self {
            Relation::Lt => ord == Ordering::Less,
            Relation::Le => ord != Ordering::Greater,
            Relation::Eq => ord == Ordering::Equal,
            Relation::Ge => ord != Ordering::Less,
            Relation::Gt => ord == Ordering::Greater,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, Relation::Lt | Relation::Gt)
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
            Relation::Gt => ">",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// `coeffs · x  relation  bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub bound: Rational,
}

impl Constraint {
    pub fn new(coeffs: Vec<Rational>, relation: Relation, bound: Rational) -> Self {
        Constraint {
            coeffs,
            relation,
            bound,
        }
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.coeffs.iter().zip(x).map(|(a, v)| a * v).sum()
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        self.relation.holds(self.lhs(x).cmp(&self.bound))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProgram {
    vars: Vec<String>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    /// Variables named `prefix1..prefix{dim}`.
    pub fn new(prefix: &str, dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if let Some(c) = constraints.iter().find(|c| c.coeffs.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: c.coeffs.len(),
            });
        }
        Ok(LinearProgram {
            vars: (1..=dim).map(|i| format!("{prefix}{i}")).collect(),
            constraints,
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Extends the variable list to `dim` positions (new columns are zero).
    pub fn with_dim(mut self, prefix: &str, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::UnboundVariable(format!("{prefix}{}", self.dim())));
        }
        for c in &mut self.constraints {
            c.coeffs.resize(dim, Rational::zero());
        }
        self.vars = (1..=dim).map(|i| format!("{prefix}{i}")).collect();
        Ok(self)
    }

    pub fn check(&self, x: &[Rational]) -> Result<bool> {
        if x.len() < self.dim() {
            return Err(Error::MissingVariable(self.vars[x.len()].clone()));
        }
        Ok(self.constraints.iter().all(|c| c.holds(x)))
    }

    /// Every coefficient and bound replaced by its quantised value.
    pub fn quantise(&self, fmt: &ArithmeticFormat) -> LinearProgram {
        LinearProgram {
            vars: self.vars.clone(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint {
                    coeffs: c.coeffs.iter().map(|a| fmt.quantize(a)).collect(),
                    relation: c.relation,
                    bound: fmt.quantize(&c.bound),
                })
                .collect(),
        }
    }

    /// Satisfaction under the format: the quantised left-hand side is
    /// evaluated exactly and compared with the bound after quantising both.
    pub fn check_quantised(&self, x: &[Rational], fmt: &ArithmeticFormat) -> Result<bool> {
        if x.len() < self.dim() {
            return Err(Error::MissingVariable(self.vars[x.len()].clone()));
        }
        let q = self.quantise(fmt);
        Ok(q
            .constraints
            .iter()
            .all(|c| c.relation.holds(fmt.cmp_quantized(&c.lhs(x), &c.bound))))
    }

    /// Simplex rows over split variables `x_j = z_2j - z_2j+1`, plus the
    /// strictness slack column when `slack` is set.
    fn rows(&self, slack: bool) -> Vec<Row> {
        let n = self.dim();
        let width = 2 * n + slack as usize;
        let mut rows = Vec::with_capacity(self.constraints.len() + 1);
        for c in &self.constraints {
            let mut coeffs = Vec::with_capacity(width);
            for a in &c.coeffs {
                coeffs.push(a.clone());
                coeffs.push(-a);
            }
            let kind = match c.relation {
                Relation::Lt | Relation::Le => RowKind::Le,
                Relation::Eq => RowKind::Eq,
                Relation::Gt | Relation::Ge => RowKind::Ge,
            };
            if slack {
                coeffs.push(match c.relation {
                    Relation::Lt => Rational::one(),
                    Relation::Gt => -Rational::one(),
                    _ => Rational::zero(),
                });
            }
            rows.push(Row {
                coeffs,
                kind,
                rhs: c.bound.clone(),
            });
        }
        rows
    }

    /// An exact point satisfying every constraint, strict ones included.
    pub fn feasible(&self) -> Option<Vec<Rational>> {
        let n = self.dim();
        let strict = self.constraints.iter().any(|c| c.relation.is_strict());
        let width = 2 * n + strict as usize;
        let mut rows = self.rows(strict);
        let mut objective = vec![Rational::zero(); width];
        if strict {
            let mut cap = vec![Rational::zero(); width];
            cap[2 * n] = Rational::one();
            rows.push(Row {
                coeffs: cap,
                kind: RowKind::Le,
                rhs: Rational::one(),
            });
            objective[2 * n] = Rational::one();
        }
        match maximise(width, &rows, &objective) {
            Outcome::Optimal { value, point } => {
                if strict && !value.is_positive() {
                    return None;
                }
                let x: Vec<Rational> = (0..n).map(|j| &point[2 * j] - &point[2 * j + 1]).collect();
                debug_assert!(self.check(&x).unwrap_or(false));
                Some(x)
            }
            Outcome::Infeasible => None,
            Outcome::Unbounded => unreachable!("slack objective is bounded"),
        }
    }

    /// Supremum of `objective . x` over the closure of the feasible set, or
    /// `None` when that set is empty or the objective is unbounded.
    pub fn supremum(&self, objective: &[Rational]) -> Option<Rational> {
        let split: Vec<Rational> = objective.iter().flat_map(|a| [a.clone(), -a]).collect();
        match maximise(2 * self.dim(), &self.rows(false), &split) {
            Outcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }

    pub fn conjoin(&self, other: &LinearProgram) -> Result<LinearProgram> {
        if self.vars != other.vars {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let mut constraints = self.constraints.clone();
        constraints.extend(other.constraints.iter().cloned());
        Ok(LinearProgram {
            vars: self.vars.clone(),
            constraints,
        })
    }
}

fn fmt_sum(f: &mut fmt::Formatter<'_>, coeffs: &[Rational], vars: &[String]) -> fmt::Result {
    let mut first = true;
    for (a, v) in coeffs.iter().zip(vars) {
        if a.is_zero() {
            continue;
        }
        let mag = a.abs();
        match (first, a.is_negative()) {
            (true, true) => f.write_str("-")?,
            (true, false) => {}
            (false, true) => f.write_str(" - ")?,
            (false, false) => f.write_str(" + ")?,
        }
        if mag.is_one() {
            write!(f, "{v}")?;
        } else {
            write!(f, "{mag}*{v}")?;
        }
        first = false;
    }
    if first {
        f.write_str("0")?;
    }
    Ok(())
}

impl fmt::Display for LinearProgram {
    /// One constraint per line in normal form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            fmt_sum(f, &c.coeffs, &self.vars)?;
            writeln!(f, " {} {}", c.relation, c.bound)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Var(String, usize),
    Plus,
    Minus,
    Star,
    Rel(Relation),
    And,
}

fn tokenize(line_no: usize, line: &str, out: &mut Vec<(Tok, usize, usize)>) -> Result<()> {
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let tok = match c {
            ' ' | '\t' | '\r' => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' if chars.get(i + 1) == Some(&'\\') => {
                i += 1;
                Tok::And
            }
            '<' | '>' | '=' => {
                let eq = chars.get(i + 1) == Some(&'=');
                if eq {
                    i += 1;
                }
                Tok::Rel(match (c, eq) {
                    ('<', false) => Relation::Lt,
                    ('<', true) => Relation::Le,
                    ('>', false) => Relation::Gt,
                    ('>', true) => Relation::Ge,
                    _ => Relation::Eq,
                })
            }
            d if d.is_ascii_digit() => {
                let start = i;
                while i + 1 < chars.len() && (chars[i + 1].is_ascii_digit() || chars[i + 1] == '.') {
                    i += 1;
                }
                if chars.get(i + 1) == Some(&'/') && chars.get(i + 2).is_some_and(|c| c.is_ascii_digit()) {
                    i += 2;
                    while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text: String = chars[start..=i].iter().collect();
                Tok::Num(
                    parse_rational(&text)
                        .map_err(|_| Error::syntax(line_no, col, format!("invalid number `{text}`")))?,
                )
            }
            a if a.is_ascii_alphabetic() || a == '_' => {
                let start = i;
                while i + 1 < chars.len() && chars[i + 1].is_ascii_alphabetic() {
                    i += 1;
                }
                let name: String = chars[start..=i].iter().collect();
                let dstart = i + 1;
                while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[dstart..=i].iter().collect();
                match digits.parse::<usize>() {
                    Ok(k) if k >= 1 => Tok::Var(name, k),
                    _ => {
                        return Err(Error::syntax(
                            line_no,
                            col,
                            format!("variable `{name}{digits}` needs a positive index"),
                        ))
                    }
                }
            }
            other => return Err(Error::syntax(line_no, col, format!("unexpected character `{other}`"))),
        };
        out.push((tok, line_no, col));
        i += 1;
    }
    Ok(())
}

/// A side of a constraint: variable coefficients and a constant.
#[derive(Default)]
struct Side {
    terms: BTreeMap<(String, usize), Rational>,
    constant: Rational,
}

struct Parser<'a> {
    toks: &'a [(Tok, usize, usize)],
    pos: usize,
    end: (usize, usize),
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map_or(self.end, |t| (t.1, t.2))
    }

    fn error(&self, msg: &str) -> Error {
        let (l, c) = self.here();
        Error::syntax(l, c, msg)
    }

    fn sum(&mut self) -> Result<Side> {
        let mut side = Side::default();
        let mut first = true;
        loop {
            let mut sign = Rational::one();
            match self.peek() {
                Some(Tok::Plus) => self.pos += 1,
                Some(Tok::Minus) => {
                    sign = -sign;
                    self.pos += 1
                }
                _ if first => {}
                _ => return Ok(side),
            }
            first = false;
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    if self.peek() == Some(&Tok::Star) {
                        self.pos += 1;
                        match self.peek().cloned() {
                            Some(Tok::Var(v, k)) => {
                                self.pos += 1;
                                *side.terms.entry((v, k)).or_default() += sign * n;
                            }
                            _ => return Err(self.error("expected a variable after `*`")),
                        }
                    } else {
                        side.constant += sign * n;
                    }
                }
                Some(Tok::Var(v, k)) => {
                    self.pos += 1;
                    *side.terms.entry((v, k)).or_default() += sign;
                }
                _ => return Err(self.error("expected a number or variable")),
            }
        }
    }
}

/// Parses constraints and resolves variables with `resolve(prefix, index)`.
fn parse_with(
    text: &str,
    mut resolve: impl FnMut(&str, usize, (usize, usize)) -> Result<usize>,
    dim: usize,
) -> Result<Vec<Constraint>> {
    let mut toks = Vec::new();
    let mut last = (1, 1);
    for (n, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        let before = toks.len();
        tokenize(n + 1, body, &mut toks)?;
        if toks.len() > before {
            last = (n + 1, body.trim_end().len() + 1);
            toks.push((Tok::And, n + 1, body.len() + 1));
        }
    }
    let mut out = Vec::new();
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        end: last,
    };
    while p.pos < toks.len() {
        if p.peek() == Some(&Tok::And) {
            p.pos += 1;
            continue;
        }
        let lhs = p.sum()?;
        let rel = match p.peek() {
            Some(Tok::Rel(r)) => *r,
            _ => return Err(p.error("expected a relation")),
        };
        p.pos += 1;
        let at = p.here();
        let rhs = p.sum()?;
        if !matches!(p.peek(), Some(Tok::And) | None) {
            return Err(p.error("expected `/\\` or end of line"));
        }
        let mut coeffs = vec![Rational::zero(); dim];
        for ((v, k), a) in lhs.terms {
            coeffs[resolve(&v, k, at)?] += a;
        }
        for ((v, k), a) in rhs.terms {
            coeffs[resolve(&v, k, at)?] -= a;
        }
        out.push(Constraint {
            coeffs,
            relation: rel,
            bound: rhs.constant - lhs.constant,
        });
    }
    Ok(out)
}

/// Parses with variables bound to `prefix1..prefix{dim}`.
pub fn parse_lp_over(text: &str, prefix: &str, dim: usize) -> Result<LinearProgram> {
    let constraints = parse_with(
        text,
        |v, k, (l, c)| {
            if v != prefix || k > dim {
                Err(Error::syntax(l, c, format!("unbound variable `{v}{k}`")))
            } else {
                Ok(k - 1)
            }
        },
        dim,
    )?;
    LinearProgram::new(prefix, dim, constraints)
}

/// Parses with the dimension inferred from the largest index used. All
/// variables must share one prefix (`x` if there are none).
pub fn parse_lp(text: &str) -> Result<LinearProgram> {
    let mut prefix: Option<String> = None;
    let mut dim = 0;
    parse_with(
        text,
        |v, k, (l, c)| {
            match &prefix {
                Some(p) if p != v => {
                    return Err(Error::syntax(l, c, format!("mixed variable prefixes `{p}` and `{v}`")))
                }
                _ => prefix = Some(v.to_string()),
            }
            dim = dim.max(k);
            Ok(0)
        },
        1,
    )?;
    parse_lp_over(text, prefix.as_deref().unwrap_or("x"), dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{int, rat};

    #[test]
    fn parse_examples() {
        let lp = parse_lp("x1 + 2*x2 <= 3/2").unwrap();
        assert_eq!(
            lp.constraints(),
            &[Constraint::new(vec![int(1), int(2)], Relation::Le, rat(3, 2))]
        );
        let lp = parse_lp("x1 >= 0 /\\ x1 <= 1").unwrap();
        assert_eq!(lp.constraints().len(), 2);
        assert!(matches!(parse_lp("x1 ++ 2"), Err(Error::Syntax { .. })));
        assert!(parse_lp("x1 <= ").is_err());
        assert!(parse_lp("x1 + y2 <= 1").is_err());
        assert!(parse_lp_over("x3 <= 1", "x", 2).is_err());
        let lp = parse_lp("2 + x2 > 1/2*x1 - 0.5 # comment\n\ny1 = 0").unwrap_err();
        assert!(matches!(lp, Error::Syntax { location, .. } if location.line == 3));
    }

    #[test]
    fn normal_form_round_trip() {
        let lp = parse_lp("2 + x2 > 1/2*x1 - 0.5\nx1 = x1\n-x3 < 4").unwrap();
        let text = lp.to_string();
        assert_eq!(text, "-1/2*x1 + x2 > -5/2\n0 = 0\n-x3 < 4\n");
        assert_eq!(parse_lp(&text).unwrap(), lp);
    }

    #[test]
    fn check_examples() {
        let lp = parse_lp("x1 >= 0 /\\ x1 <= 1").unwrap();
        assert!(lp.check(&[rat(1, 2)]).unwrap());
        assert!(!parse_lp("x1 > 0").unwrap().check(&[int(0)]).unwrap());
        assert!(parse_lp("x1 + x2 = 1").unwrap().check(&[rat(1, 3), rat(2, 3)]).unwrap());
        assert!(matches!(lp.check(&[]), Err(Error::MissingVariable(v)) if v == "x1"));
    }

    #[test]
    fn feasibility_examples() {
        let lp = parse_lp("x1 >= 0 /\\ x1 <= 1").unwrap();
        let w = lp.feasible().unwrap();
        assert!(lp.check(&w).unwrap());
        assert!(parse_lp("x1 > 0 /\\ x1 < 0").unwrap().feasible().is_none());
        let lp = parse_lp("x1 > 0 /\\ x1 < 1/1000 /\\ x2 = x1 - 3").unwrap();
        let w = lp.feasible().unwrap();
        assert!(lp.check(&w).unwrap());
        assert!(parse_lp("x1 >= 1 /\\ x1 <= 1 /\\ x1 < 1").unwrap().feasible().is_none());
        assert_eq!(LinearProgram::new("x", 0, vec![]).unwrap().feasible(), Some(vec![]));
    }

    #[test]
    fn quantised_check() {
        use crate::arithmetic::{OverflowMode, RoundingMode};
        let fmt = ArithmeticFormat::fixed(4, 1, RoundingMode::NearestHalfUp, OverflowMode::Saturate).unwrap();
        // 1/3 -> 1/2, 5 -> 7/2: 1/2·3 = 3/2 <= 7/2
        let lp = parse_lp("1/3*x1 <= 5").unwrap();
        assert!(lp.check_quantised(&[int(3)], &fmt).unwrap());
        // exact lhs 7 saturates to 7/2 which equals the bound
        let lp = parse_lp("2*x1 = 7/2").unwrap();
        assert!(lp.check_quantised(&[rat(7, 2)], &fmt).unwrap());
        assert!(!lp.check(&[rat(7, 2)]).unwrap());
    }
}
