//! Compiles 3CNF formulas into reachability instances.
//!
//! For a formula over `d` variables with `n` clauses the network has four
//! ReLU layers:
//!
//! 1. per variable: `relu(x)`, `relu(1 - x)`, `relu(x - 1/2)`, `relu(1/2 - x)`
//! 2. per clause: `relu(S)` and `relu(S - 1)` where `S` sums the literal
//!    outputs; per variable: the binarity value `relu(1/2 - relu(x - 1/2) - relu(1/2 - x))`
//! 3. per clause: `relu(relu(S) - relu(S - 1))`; binarity values passed through
//! 4. `relu(sum of clause outputs - (n - 1))`; binarity values passed through
//!
//! Inputs are constrained to `[0, 1]`; the output spec asks for a conjunction
//! output of exactly 1 and every binarity output equal to 0.

use std::fmt;

use num_traits::Zero;

use crate::arithmetic::{int, rat, FixedFormat, OverflowMode, Rational, RoundingMode};
use crate::error::{Error, Result};
use crate::network::{Layer, Network};
use crate::spec::{Constraint, LinearProgram, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    /// 0-based variable index.
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn eval(&self, assignment: &[bool]) -> bool {
        assignment[self.var] == self.positive
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf3 {
    num_vars: usize,
    clauses: Vec<[Literal; 3]>,
}

impl Cnf3 {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        if let Some(l) = clauses.iter().flatten().find(|l| l.var >= num_vars) {
            return Err(Error::IndexOutOfRange(format!(
                "literal on variable {} with {num_vars} variables",
                l.var + 1
            )));
        }
        Ok(Cnf3 { num_vars, clauses })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[[Literal; 3]] {
        &self.clauses
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|l| l.eval(assignment)))
    }

    /// First satisfying assignment in binary counting order.
    pub fn solve_truth_table(&self) -> Option<Vec<bool>> {
        assert!(self.num_vars < 32, "truth table over too many variables");
        (0u32..1 << self.num_vars)
            .map(|code| (0..self.num_vars).map(|j| (code >> j) & 1 == 1).collect::<Vec<_>>())
            .find(|a| self.eval(a))
    }
}

impl fmt::Display for Cnf3 {
    /// DIMACS text.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for c in &self.clauses {
            for l in c {
                let v = l.var as i64 + 1;
                write!(f, "{} ", if l.positive { v } else { -v })?;
            }
            writeln!(f, "0")?;
        }
        Ok(())
    }
}

/// Parses DIMACS CNF, padding short clauses by repeating their last literal.
pub fn parse_dimacs(text: &str) -> Result<Cnf3> {
    let mut num_vars = None;
    let mut clauses = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut start_line = 0;
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if let Some(rest) = line.strip_prefix('p') {
            let words: Vec<&str> = rest.split_whitespace().collect();
            match words.as_slice() {
                ["cnf", v, _] if num_vars.is_none() => {
                    num_vars = Some(v.parse::<usize>().map_err(|_| Error::syntax(line_no, 1, "bad variable count"))?)
                }
                _ => return Err(Error::syntax(line_no, 1, "expected a single `p cnf <vars> <clauses>` line")),
            }
            continue;
        }
        let nv = num_vars.ok_or_else(|| Error::syntax(line_no, 1, "clause before `p cnf` header"))?;
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| Error::syntax(line_no, 1, format!("invalid literal `{tok}`")))?;
            if current.is_empty() {
                start_line = line_no;
            }
            if v == 0 {
                match current.len() {
                    0 => return Err(Error::EmptyClause(line_no)),
                    1..=3 => {
                        let last = *current.last().unwrap();
                        current.resize(3, last);
                        clauses.push([current[0], current[1], current[2]]);
                        current.clear();
                    }
                    len => return Err(Error::ClauseTooWide { line: start_line, len }),
                }
                continue;
            }
            let var = v.unsigned_abs() as usize;
            if var > nv {
                return Err(Error::syntax(line_no, 1, format!("variable {var} exceeds the declared {nv}")));
            }
            current.push(Literal {
                var: var - 1,
                positive: v > 0,
            });
        }
    }
    if !current.is_empty() {
        if current.len() > 3 {
            return Err(Error::ClauseTooWide {
                line: start_line,
                len: current.len(),
            });
        }
        return Err(Error::syntax(start_line, 1, "clause is not terminated by 0"));
    }
    let num_vars = num_vars.ok_or_else(|| Error::syntax(1, 1, "missing `p cnf` header"))?;
    Cnf3::new(num_vars, clauses)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinarityGadget {
    /// `relu(1/2 - relu(x - 1/2) - relu(1/2 - x))`, which is `min(x, 1 - x)`
    /// on `[0, 1]`.
    #[default]
    Corrected,
    /// `relu(relu(1/2 - x) + relu(1/2 - x) - 1/2)`. Nonzero at `x = 0`, so it
    /// does not characterise binary inputs.
    Printed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub network: Network,
    pub input_spec: LinearProgram,
    pub output_spec: LinearProgram,
}

pub fn reduce(cnf: &Cnf3) -> Instance {
    reduce_with(cnf, BinarityGadget::Corrected)
}

pub fn reduce_with(cnf: &Cnf3, gadget: BinarityGadget) -> Instance {
    let d = cnf.num_vars();
    let n = cnf.clauses().len();
    let zero = || Rational::zero();
    let half = rat(1, 2);

    // layer 1 order: pos_j, neg_j, hi_j = relu(x - 1/2), lo_j = relu(1/2 - x)
    let mut w1 = Vec::with_capacity(4 * d);
    let mut b1 = Vec::with_capacity(4 * d);
    for (weight, bias) in [(int(1), zero()), (int(-1), int(1)), (int(1), -half.clone()), (int(-1), half.clone())] {
        for j in 0..d {
            let mut row = vec![zero(); d];
            row[j] = weight.clone();
            w1.push(row);
            b1.push(bias.clone());
        }
    }
    let (pos, neg, hi, lo) = (0, d, 2 * d, 3 * d);

    // layer 2: s_i, t_i, bin_j
    let mut w2 = Vec::with_capacity(2 * n + d);
    let mut b2 = Vec::with_capacity(2 * n + d);
    for offset in [zero(), int(-1)] {
        for clause in cnf.clauses() {
            let mut row = vec![zero(); 4 * d];
            for l in clause {
                row[if l.positive { pos } else { neg } + l.var] += int(1);
            }
            w2.push(row);
            b2.push(offset.clone());
        }
    }
    for j in 0..d {
        let mut row = vec![zero(); 4 * d];
        match gadget {
            BinarityGadget::Corrected => {
                row[hi + j] = int(-1);
                row[lo + j] = int(-1);
                b2.push(half.clone());
            }
            BinarityGadget::Printed => {
                row[lo + j] = int(2);
                b2.push(-half.clone());
            }
        }
        w2.push(row);
    }

    // layer 3: c_i = relu(s_i - t_i), binarity passthrough
    let mut w3 = Vec::with_capacity(n + d);
    for i in 0..n {
        let mut row = vec![zero(); 2 * n + d];
        row[i] = int(1);
        row[n + i] = int(-1);
        w3.push(row);
    }
    for j in 0..d {
        let mut row = vec![zero(); 2 * n + d];
        row[2 * n + j] = int(1);
        w3.push(row);
    }
    let b3 = vec![zero(); n + d];

    // layer 4: conjunction, binarity passthrough
    let mut w4 = Vec::with_capacity(1 + d);
    let mut conj = vec![zero(); n + d];
    for v in conj.iter_mut().take(n) {
        *v = int(1);
    }
    w4.push(conj);
    let mut b4 = vec![int(1) - int(n as i64)];
    for j in 0..d {
        let mut row = vec![zero(); n + d];
        row[n + j] = int(1);
        w4.push(row);
        b4.push(zero());
    }

    let network = Network::new(
        vec![
            Layer::new(w1, b1),
            Layer::new(w2, b2),
            Layer::new(w3, b3),
            Layer::new(w4, b4),
        ],
        true,
    )
    .expect("gadget dimensions are consistent");

    let unit = |k: usize, len: usize| {
        let mut v = vec![zero(); len];
        v[k] = int(1);
        v
    };
    let mut l1 = Vec::with_capacity(2 * d);
    for j in 0..d {
        l1.push(Constraint::new(unit(j, d), Relation::Ge, zero()));
        l1.push(Constraint::new(unit(j, d), Relation::Le, int(1)));
    }
    let mut l2 = vec![Constraint::new(unit(0, 1 + d), Relation::Eq, int(1))];
    for j in 0..d {
        l2.push(Constraint::new(unit(1 + j, 1 + d), Relation::Eq, zero()));
    }
    Instance {
        network,
        input_spec: LinearProgram::new("x", d, l1).expect("dimensions match"),
        output_spec: LinearProgram::new("y", 1 + d, l2).expect("dimensions match"),
    }
}

/// Integer bits (sign included) for a formula with `clauses` clauses.
pub fn integer_bits(clauses: usize) -> u32 {
    let mut bits = 0;
    while (1usize << bits) < clauses + 1 {
        bits += 1;
    }
    bits + 2
}

/// The same instance together with a fixed-point format in which every gadget
/// constant is exact and evaluation on binary inputs incurs no rounding.
pub fn reduce_quantised(cnf: &Cnf3, frac_bits: u32) -> Result<(Instance, FixedFormat)> {
    if frac_bits == 0 {
        return Err(Error::InvalidFormat(
            "the reduction needs at least one fraction bit to represent 1/2".into(),
        ));
    }
    let fmt = FixedFormat::new(
        integer_bits(cnf.clauses().len()) + frac_bits,
        frac_bits,
        RoundingMode::NearestHalfUp,
        OverflowMode::Saturate,
    )?;
    Ok((reduce(cnf), fmt))
}
