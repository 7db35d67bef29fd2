//! The reachability problems over their backends.
//!
//! Every entry point returns a [`Report`]. Exceeding an enumeration cap or
//! the automaton budget gives [`Verdict::Resource`], never a guess. A valid
//! verdict always carries a witness that has been re-checked by direct
//! evaluation; a witness failing that check is an internal error.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arithmetic::{decode, encode, ArithmeticFormat, BitWord, Rational};
use crate::automata::fixed::FixedFnnNfa;
use crate::automata::float::{FloatFnnNfa, DEFAULT_E_CAP};
use crate::automata::{bv::BvNfa, intersect, is_empty, Budget, Lift, Stats, SuccinctNfa, Symbol};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::spec::{BvSpec, Constraint, LinearProgram, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    ReachQLp,
    ReachFLp,
    ReachLp,
    ReachFBv,
    ReachBv,
}

impl Problem {
    pub fn name(self) -> &'static str {
        match self {
            Problem::ReachQLp => "reach-q-lp",
            Problem::ReachFLp => "reach-f-lp",
            Problem::ReachLp => "reach-lp",
            Problem::ReachFBv => "reach-f-bv",
            Problem::ReachBv => "reach-bv",
        }
    }

    pub fn is_bv(self) -> bool {
        matches!(self, Problem::ReachFBv | Problem::ReachBv)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Problem::ReachQLp, Problem::ReachFLp, Problem::ReachLp, Problem::ReachFBv, Problem::ReachBv]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::syntax(1, 1, format!("unknown problem `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    PatternLp,
    Brute,
    Automata,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::PatternLp => "pattern-lp",
            Backend::Brute => "brute",
            Backend::Automata => "automata",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Backend::PatternLp, Backend::Brute, Backend::Automata]
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::syntax(1, 1, format!("unknown backend `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    /// Some admissible input reaches the output specification.
    Valid,
    Invalid,
    /// A cap was hit before the question was settled.
    Resource(String),
}

impl Verdict {
    pub fn is_resource(&self) -> bool {
        matches!(self, Verdict::Resource(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => f.write_str("valid"),
            Verdict::Invalid => f.write_str("invalid"),
            Verdict::Resource(_) => f.write_str("resource"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub input: Vec<Rational>,
    pub output: Vec<Rational>,
    /// Encoded words, for problems over a format.
    pub words: Option<(Vec<BitWord>, Vec<BitWord>)>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Pattern-tree nodes, enumerated inputs or automaton states.
    pub explored: u64,
    pub automaton: Option<Stats>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub problem: Problem,
    pub backend: Backend,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub stats: RunStats,
}

impl Report {
    fn new(problem: Problem, backend: Backend) -> Self {
        Report {
            problem,
            backend,
            verdict: Verdict::Invalid,
            witness: None,
            stats: RunStats::default(),
        }
    }

    fn resource(mut self, why: impl Into<String>) -> Self {
        self.verdict = Verdict::Resource(why.into());
        self
    }
}

/// One `key value` pair per line, in a fixed order.
impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "format=1")?;
        writeln!(f, "problem {}", self.problem)?;
        writeln!(f, "backend {}", self.backend)?;
        writeln!(f, "verdict {}", self.verdict)?;
        if let Verdict::Resource(why) = &self.verdict {
            writeln!(f, "reason {why}")?;
        }
        if let Some(w) = &self.witness {
            for (i, x) in w.input.iter().enumerate() {
                writeln!(f, "x{} {x}", i + 1)?;
            }
            for (i, y) in w.output.iter().enumerate() {
                writeln!(f, "y{} {y}", i + 1)?;
            }
            if let Some((xs, ys)) = &w.words {
                for (i, x) in xs.iter().enumerate() {
                    writeln!(f, "word.x{} {x}", i + 1)?;
                }
                for (i, y) in ys.iter().enumerate() {
                    writeln!(f, "word.y{} {y}", i + 1)?;
                }
            }
        }
        writeln!(f, "explored {}", self.stats.explored)?;
        if let Some(s) = &self.stats.automaton {
            writeln!(f, "widest-layer {}", s.widest_layer)?;
            writeln!(f, "max-descriptor {}", s.max_descriptor)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Limits {
    pub max_inputs: u64,
    pub max_patterns: u64,
    pub budget: Budget,
    pub float_e_cap: u32,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_inputs: 1 << 22,
            max_patterns: 1 << 20,
            budget: Budget::default(),
            float_e_cap: DEFAULT_E_CAP,
        }
    }
}

fn check_dims(net: &Network, input: usize, output: usize) -> Result<()> {
    if input != net.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: input,
        });
    }
    if output != net.output_dim() {
        return Err(Error::DimensionMismatch {
            expected: net.output_dim(),
            got: output,
        });
    }
    Ok(())
}

/// An affine function of the inputs: coefficients then constant.
type Affine = Vec<Rational>;

fn constraint_on(expr: &Affine, relation: Relation) -> Constraint {
    let d = expr.len() - 1;
    Constraint::new(expr[..d].to_vec(), relation, -expr[d].clone())
}

/// Per-coordinate bounds of the input region's closure.
fn input_box(input: &LinearProgram) -> Option<Vec<(Rational, Rational)>> {
    (0..input.dim())
        .map(|k| {
            let mut e = vec![Rational::zero(); input.dim()];
            e[k] = Rational::one();
            let hi = input.supremum(&e)?;
            e[k] = -Rational::one();
            Some((-input.supremum(&e)?, hi))
        })
        .collect()
}

/// Range of an affine form over a box.
fn interval(expr: &Affine, bounds: &[(Rational, Rational)]) -> (Rational, Rational) {
    let d = bounds.len();
    let (mut lo, mut hi) = (expr[d].clone(), expr[d].clone());
    for (a, (l, h)) in expr[..d].iter().zip(bounds) {
        if a.is_positive() {
            lo += a * l;
            hi += a * h;
        } else if a.is_negative() {
            lo += a * h;
            hi += a * l;
        }
    }
    (lo, hi)
}

/// Output constraints rewritten over the inputs.
fn substitute(out: &LinearProgram, exprs: &[Affine], d: usize) -> Vec<Constraint> {
    out.constraints()
        .iter()
        .map(|c| {
            let mut coeffs = vec![Rational::zero(); d];
            let mut bound = c.bound.clone();
            for (a, e) in c.coeffs.iter().zip(exprs) {
                for (k, coef) in coeffs.iter_mut().enumerate() {
                    *coef += a * &e[k];
                }
                bound -= a * &e[d];
            }
            Constraint::new(coeffs, c.relation, bound)
        })
        .collect()
}

struct PatternSearch<'a> {
    net: &'a Network,
    d: usize,
    output: &'a LinearProgram,
    cap: u64,
    explored: u64,
    /// Bounding box of the input region, when bounded.
    bounds: Option<Vec<(Rational, Rational)>>,
}

impl PatternSearch<'_> {
    fn feasible(&self, constraints: &[Constraint]) -> Option<Vec<Rational>> {
        LinearProgram::new("x", self.d, constraints.to_vec())
            .expect("dimension checked")
            .feasible()
    }

    /// Depth-first over the ReLU nodes in order. `layer`/`node` locate the
    /// next decision, `cur` holds the affine values of the finished layers.
    /// `point` is a feasible point of `constraints`.
    fn search(
        &mut self,
        layer: usize,
        cur: &[Affine],
        next: &mut Vec<Affine>,
        constraints: &mut Vec<Constraint>,
        point: &[Rational],
    ) -> Result<Option<Vec<Rational>>> {
        self.explored += 1;
        if self.explored > self.cap {
            return Err(Error::PatternSpaceTooLarge(self.cap));
        }
        let layers = self.net.layers();
        if layer == layers.len() {
            let out = substitute(self.output, cur, self.d);
            if out.iter().all(|c| c.holds(point)) {
                return Ok(Some(point.to_vec()));
            }
            let mut all = constraints.clone();
            all.extend(out);
            return Ok(self.feasible(&all));
        }
        let l = &layers[layer];
        if next.len() == l.outputs() {
            let done = std::mem::take(next);
            let found = self.search(layer + 1, &done, &mut Vec::new(), constraints, point)?;
            *next = done;
            return Ok(found);
        }
        let i = next.len();
        let mut pre = vec![Rational::zero(); self.d + 1];
        for (w, e) in l.weights[i].iter().zip(cur) {
            if !w.is_zero() {
                for (p, v) in pre.iter_mut().zip(e) {
                    *p += w * v;
                }
            }
        }
        pre[self.d] += &l.bias[i];
        if !self.net.has_relu(layer) {
            next.push(pre);
            let found = self.search(layer, cur, next, constraints, point);
            next.pop();
            return found;
        }
        // inactive (<= 0) first, then active (> 0); the two branches
        // partition the region, and an infeasible one is cut at once
        // the branch holding `point` needs no LP, and a constant
        // pre-activation has no other branch
        let at_point = pre[..self.d].iter().zip(point).map(|(a, x)| a * x).sum::<Rational>() + &pre[self.d];
        let point_active = at_point.is_positive();
        let constant = pre[..self.d].iter().all(Zero::is_zero);
        let range = self.bounds.as_ref().map(|b| interval(&pre, b));
        for active in [false, true] {
            constraints.push(constraint_on(&pre, if active { Relation::Gt } else { Relation::Le }));
            let inner = if active == point_active {
                Some(point.to_vec())
            } else if constant
                || range.as_ref().is_some_and(|(lo, hi)| if active { !hi.is_positive() } else { lo.is_positive() })
            {
                None
            } else {
                self.feasible(constraints)
            };
            if let Some(inner) = inner {
                next.push(if active { pre.clone() } else { vec![Rational::zero(); self.d + 1] });
                let found = self.search(layer, cur, next, constraints, &inner);
                next.pop();
                if let Some(x) = found? {
                    constraints.pop();
                    return Ok(Some(x));
                }
            }
            constraints.pop();
        }
        Ok(None)
    }
}

/// `Reach_Q(LP)`: exact real semantics, searched over activation patterns.
pub fn reach_q_lp(net: &Network, input: &LinearProgram, output: &LinearProgram, limits: &Limits) -> Result<Report> {
    check_dims(net, input.dim(), output.dim())?;
    let mut report = Report::new(Problem::ReachQLp, Backend::PatternLp);
    let d = net.input_dim();
    let identity: Vec<Affine> = (0..d)
        .map(|k| {
            let mut e = vec![Rational::zero(); d + 1];
            e[k] = Rational::one();
            e
        })
        .collect();
    let mut search = PatternSearch {
        net,
        d,
        output,
        cap: limits.max_patterns,
        explored: 0,
        bounds: input_box(input),
    };
    let mut constraints = input.constraints().to_vec();
    let found = match search.feasible(&constraints) {
        None => Ok(None),
        Some(point) => search.search(0, &identity, &mut Vec::new(), &mut constraints, &point),
    };
    report.stats.explored = search.explored;
    match found {
        Err(Error::PatternSpaceTooLarge(cap)) => {
            Ok(report.resource(format!("more than {cap} activation-pattern nodes")))
        }
        Err(e) => Err(e),
        Ok(None) => Ok(report),
        Ok(Some(x)) => {
            let y = net.eval_rational(&x)?;
            if !input.check(&x)? || !output.check(&y)? {
                return Err(Error::Internal("pattern-LP witness fails re-evaluation".into()));
            }
            report.verdict = Verdict::Valid;
            report.witness = Some(Witness {
                input: x,
                output: y,
                words: None,
            });
            Ok(report)
        }
    }
}

/// Candidate values per input coordinate, and the size of their product
/// (`None` past `u64`).
fn candidates(fmt: &ArithmeticFormat, d: usize, keep: impl Fn(usize, &Rational) -> bool) -> (Vec<Vec<Rational>>, Option<u64>) {
    let values = fmt.values();
    let per: Vec<Vec<Rational>> = (0..d)
        .map(|i| values.iter().filter(|v| keep(i, v)).cloned().collect())
        .collect();
    let total = per.iter().try_fold(1u64, |acc, v| acc.checked_mul(v.len() as u64));
    (per, total)
}

fn nth_point(per: &[Vec<Rational>], mut code: u64) -> Vec<Rational> {
    // first coordinate varies slowest
    let mut x = vec![Rational::zero(); per.len()];
    for i in (0..per.len()).rev() {
        let n = per[i].len() as u64;
        x[i] = per[i][(code % n) as usize].clone();
        code /= n;
    }
    x
}

/// Enumerates the product in canonical order and returns the first point
/// passing `test`, in parallel.
fn first_point<T: Send>(per: &[Vec<Rational>], total: u64, test: impl Fn(&[Rational]) -> Option<T> + Sync) -> Option<(Vec<Rational>, T)> {
    (0..total).into_par_iter().find_map_first(|code| {
        let x = nth_point(per, code);
        test(&x).map(|t| (x, t))
    })
}

fn too_many(fmt: &ArithmeticFormat, d: usize, cap: u64) -> String {
    format!("input space of {}^{d} points exceeds the cap {cap}", fmt.cardinality())
}

fn require_quantised(net: &Network, fmt: &ArithmeticFormat) -> Result<()> {
    if net.is_quantised(fmt) {
        Ok(())
    } else {
        Err(Error::UnquantisedNetwork(fmt.to_string()))
    }
}

/// `Reach_F(LP)` for a network already quantised to `fmt`, by enumeration.
pub fn reach_f_lp(
    net: &Network,
    input: &LinearProgram,
    output: &LinearProgram,
    fmt: &ArithmeticFormat,
    limits: &Limits,
) -> Result<Report> {
    check_dims(net, input.dim(), output.dim())?;
    require_quantised(net, fmt)?;
    let mut report = Report::new(Problem::ReachFLp, Backend::Brute);
    let d = net.input_dim();
    let q_in = input.quantise(fmt);
    // single-variable input constraints filter each coordinate up front
    let (per, total) = candidates(fmt, d, |i, v| {
        q_in.constraints().iter().all(|c| {
            let only_i = c.coeffs.iter().enumerate().all(|(k, a)| k == i || a.is_zero());
            if !only_i || c.coeffs[i].is_zero() {
                return true;
            }
            c.relation.holds(fmt.cmp_quantized(&(&c.coeffs[i] * v), &c.bound))
        })
    });
    let total = match total {
        Some(t) if t <= limits.max_inputs => t,
        _ => return Ok(report.resource(too_many(fmt, d, limits.max_inputs))),
    };
    report.stats.explored = total;
    let found = first_point(&per, total, |x| {
        if !input.check_quantised(x, fmt).ok()? {
            return None;
        }
        let y = net.eval_quantised(x, fmt).ok()?;
        output.check_quantised(&y, fmt).ok()?.then_some(y)
    });
    if let Some((x, y)) = found {
        if net.eval_quantised(&x, fmt)? != y || !input.check_quantised(&x, fmt)? {
            return Err(Error::Internal("enumeration witness fails re-evaluation".into()));
        }
        report.verdict = Verdict::Valid;
        report.witness = Some(Witness {
            words: Some(encode_all(&x, &y, fmt)?),
            input: x,
            output: y,
        });
    }
    Ok(report)
}

/// `Reach(F, LP)`: quantise the network and both specifications, then
/// enumerate.
pub fn reach_lp(
    net: &Network,
    input: &LinearProgram,
    output: &LinearProgram,
    fmt: &ArithmeticFormat,
    limits: &Limits,
) -> Result<Report> {
    let mut report = reach_f_lp(&net.quantise(fmt), &input.quantise(fmt), &output.quantise(fmt), fmt, limits)?;
    report.problem = Problem::ReachLp;
    Ok(report)
}

fn encode_all(x: &[Rational], y: &[Rational], fmt: &ArithmeticFormat) -> Result<(Vec<BitWord>, Vec<BitWord>)> {
    let enc = |v: &[Rational]| v.iter().map(|z| encode(z, fmt)).collect::<Result<Vec<_>>>();
    Ok((enc(x)?, enc(y)?))
}

fn words_of(words: &[BitWord]) -> Vec<u128> {
    words.iter().map(BitWord::to_u128).collect()
}

fn check_bv(net: &Network, phi_in: &BvSpec, phi_out: &BvSpec, fmt: &ArithmeticFormat) -> Result<()> {
    check_dims(net, phi_in.vars().len(), phi_out.vars().len())?;
    for phi in [phi_in, phi_out] {
        if phi.width() != fmt.word_len() {
            return Err(Error::WidthMismatch {
                expected: fmt.word_len(),
                got: phi.width(),
            });
        }
    }
    Ok(())
}

/// Re-checks a BV witness through evaluation and both formulas.
fn revalidate_bv(net: &Network, phi_in: &BvSpec, phi_out: &BvSpec, fmt: &ArithmeticFormat, w: &Witness) -> Result<()> {
    let (xs, ys) = w.words.as_ref().expect("BV witnesses carry words");
    let ok = net.eval_quantised(&w.input, fmt)? == w.output
        && phi_in.model_check(&phi_in.assignment(&words_of(xs)))?
        && phi_out.model_check(&phi_out.assignment(&words_of(ys)))?;
    if ok {
        Ok(())
    } else {
        Err(Error::Internal("BV witness fails re-evaluation".into()))
    }
}

/// `Reach_F(BV)` for a quantised network, by enumeration.
pub fn reach_f_bv(net: &Network, phi_in: &BvSpec, phi_out: &BvSpec, fmt: &ArithmeticFormat, limits: &Limits) -> Result<Report> {
    check_bv(net, phi_in, phi_out, fmt)?;
    require_quantised(net, fmt)?;
    let mut report = Report::new(Problem::ReachFBv, Backend::Brute);
    let d = net.input_dim();
    let (per, total) = candidates(fmt, d, |_, _| true);
    let total = match total {
        Some(t) if t <= limits.max_inputs => t,
        _ => return Ok(report.resource(too_many(fmt, d, limits.max_inputs))),
    };
    report.stats.explored = total;
    let found = first_point(&per, total, |x| {
        let xw: Vec<BitWord> = x.iter().map(|v| encode(v, fmt)).collect::<Result<_>>().ok()?;
        if !phi_in.eval_words(&words_of(&xw)) {
            return None;
        }
        let y = net.eval_quantised(x, fmt).ok()?;
        let yw: Vec<BitWord> = y.iter().map(|v| encode(v, fmt)).collect::<Result<_>>().ok()?;
        phi_out.eval_words(&words_of(&yw)).then_some((y, xw, yw))
    });
    if let Some((x, (y, xw, yw))) = found {
        let w = Witness {
            input: x,
            output: y,
            words: Some((xw, yw)),
        };
        revalidate_bv(net, phi_in, phi_out, fmt, &w)?;
        report.verdict = Verdict::Valid;
        report.witness = Some(w);
    }
    Ok(report)
}

/// Splits an accepted word of the combined automaton into input and
/// output words.
fn split_word(word: &[Symbol], d: usize, m: usize) -> (Vec<BitWord>, Vec<BitWord>) {
    let track = |k: usize| BitWord::new(word.iter().map(|s| (s >> k) & 1 == 1).collect());
    ((0..d).map(track).collect(), (d..d + m).map(track).collect())
}

fn bv_empty(phi: &BvSpec, budget: &Budget) -> Result<bool> {
    Ok(is_empty(&BvNfa::new(phi), budget)?.witness.is_none())
}

fn run_product<M: SuccinctNfa>(
    model: M,
    phi_in: &BvSpec,
    phi_out: &BvSpec,
    d: usize,
    m: usize,
    budget: &Budget,
) -> Result<(Option<Vec<Symbol>>, Stats)> {
    let width = d + m;
    let left = Lift::new(BvNfa::new(phi_in), width, (0..d).collect())?;
    let right = Lift::new(BvNfa::new(phi_out), width, (d..width).collect())?;
    let product = intersect(intersect(model, left)?, right)?;
    let e = is_empty(&product, budget)?;
    Ok((e.witness, e.stats))
}

/// `Reach(F, BV)` on either backend. The network is quantised first.
pub fn reach_bv(
    net: &Network,
    phi_in: &BvSpec,
    phi_out: &BvSpec,
    fmt: &ArithmeticFormat,
    backend: Backend,
    limits: &Limits,
) -> Result<Report> {
    check_bv(net, phi_in, phi_out, fmt)?;
    let net = net.quantise(fmt);
    let mut report = Report::new(Problem::ReachBv, backend);
    if backend == Backend::PatternLp {
        return Err(Error::BackendUnavailable("pattern-lp does not decide BV problems".into()));
    }
    // an unsatisfiable specification settles the question without the network
    let early = match bv_empty(phi_in, &limits.budget) {
        Ok(false) => bv_empty(phi_out, &limits.budget),
        other => other,
    };
    match early {
        Ok(true) => return Ok(report),
        Ok(false) => {}
        Err(Error::BudgetExhausted(why)) => return Ok(report.resource(why)),
        Err(e) => return Err(e),
    }
    if backend == Backend::Brute {
        let mut r = reach_f_bv(&net, phi_in, phi_out, fmt, limits)?;
        r.problem = Problem::ReachBv;
        return Ok(r);
    }

    let (d, m) = (net.input_dim(), net.output_dim());
    if d + m > 63 {
        return Err(Error::BackendUnavailable(format!("{} tracks exceed a 63-bit letter", d + m)));
    }
    let unavailable = |e: Error| match e {
        Error::UnsupportedOverflow(_)
        | Error::UnsupportedRounding(_)
        | Error::UnsupportedDepth { .. }
        | Error::ExponentWidthTooLarge { .. }
        | Error::InvalidFormat(_) => Error::BackendUnavailable(e.to_string()),
        other => other,
    };
    let run = match fmt {
        ArithmeticFormat::Fixed(f) => {
            let model = FixedFnnNfa::new(&net, f).map_err(unavailable)?;
            run_product(model, phi_in, phi_out, d, m, &limits.budget)
        }
        ArithmeticFormat::Float(f) => {
            let model = FloatFnnNfa::with_cap(&net, f, limits.float_e_cap).map_err(unavailable)?;
            run_product(model, phi_in, phi_out, d, m, &limits.budget)
        }
    };
    let (witness, stats) = match run {
        Ok(r) => r,
        Err(Error::BudgetExhausted(why)) => return Ok(report.resource(why)),
        Err(e) => return Err(e),
    };
    report.stats.explored = stats.states as u64;
    report.stats.automaton = Some(stats);
    if let Some(word) = witness {
        let (xs, ys) = split_word(&word, d, m);
        let dec = |ws: &[BitWord]| ws.iter().map(|w| decode(w, fmt)).collect::<Result<Vec<_>>>();
        let w = Witness {
            input: dec(&xs)?,
            output: dec(&ys)?,
            words: Some((xs, ys)),
        };
        revalidate_bv(&net, phi_in, phi_out, fmt, &w)?;
        report.verdict = Verdict::Valid;
        report.witness = Some(w);
    }
    Ok(report)
}

/// Number of points of `fmt^d`, saturating.
pub fn input_space(fmt: &ArithmeticFormat, d: usize) -> u64 {
    let c = fmt.cardinality().to_u64().unwrap_or(u64::MAX);
    (0..d).fold(1u64, |acc, _| acc.saturating_mul(c))
}

/// True when every witness coordinate is exactly 0 or 1.
pub fn is_binary(x: &[Rational]) -> bool {
    x.iter().all(|v| v.is_zero() || v.is_one())
}
