//! The automaton accepting `(encode(x), encode(N(x)))` for a network of
//! depth at most 2 under a float format with a small exponent width.
//!
//! Words are read as written: the sign at position 0, the exponent field in
//! positions `1..=e`, then mantissa bits `m_1..m_p` from the most significant
//! one down. The prefix stores every sign and exponent. Hidden neurons guess
//! their exponent at the start and one mantissa bit per step.
//!
//! Once the exponents are known, every value is `s 2^E (1 + sum m_i 2^-i)`,
//! so a neuron's pre-activation `z` and its output `y` grow by a known
//! multiple of each mantissa bit. The state keeps
//! `R_i = (z_i - y_i) 2^(i-u)`, the difference of the partial values after
//! `i` mantissa bits, where `2^u` divides every term. Then
//! `R_i = 2 R_(i-1) + c_i` with `c_i` the scaled sum of this step's bits.
//! The output is right iff `z` lies in the preimage of `y` under rounding,
//! an interval around `y` whose ends depend only on the sign and exponent of
//! `y` and on whether its mantissa is all zeros or all ones. A residual that
//! can no longer reach that interval is dropped, which keeps the live
//! residuals in a window of constant width per exponent choice.

use num_traits::{Signed, ToPrimitive, Zero};

use super::nfa::{push_varint, varint_len, SuccinctNfa, Symbol};
use crate::arithmetic::{floor_log2, pow2, ArithmeticFormat, FloatFormat, Rational, RoundingMode};
use crate::error::{Error, Result};
use crate::network::Network;

pub const DEFAULT_E_CAP: u32 = 3;
pub const MAX_DEPTH: usize = 2;

/// Sign, exponent field and mantissa shape of one value read so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ValueState {
    pub negative: bool,
    pub field: u32,
    /// Mantissa bits so far are all 0 / all 1 (neuron outputs only).
    pub zeros: bool,
    pub ones: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FloatState {
    pub t: u32,
    /// Inputs, hidden neurons, outputs.
    pub values: Vec<ValueState>,
    /// One residual per neuron once the prefix is read.
    pub residuals: Vec<i64>,
}

/// Inclusive bounds on the final residual; `lo > hi` means impossible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Bounds {
    lo: i64,
    hi: i64,
}

impl Bounds {
    const EMPTY: Bounds = Bounds { lo: 1, hi: 0 };

    fn hull(self, other: Bounds) -> Bounds {
        if self.lo > self.hi {
            other
        } else if other.lo > other.hi {
            self
        } else {
            Bounds {
                lo: self.lo.min(other.lo),
                hi: self.hi.max(other.hi),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shape {
    Bottom,
    Mid,
    Top,
}

#[derive(Debug, Clone)]
struct Neuron {
    /// Value indices of the inputs.
    inputs: Vec<usize>,
    /// `coef[j][E - Emin] = w_j 2^(E-u)`
    coef: Vec<Vec<i64>>,
    bias: i64,
    relu: bool,
}

#[derive(Debug, Clone)]
pub struct FloatFnnNfa {
    fmt: FloatFormat,
    neurons: Vec<Neuron>,
    inputs: usize,
    hidden: usize,
    outputs: usize,
    /// `unit[E - Emin] = 2^(E-u)`
    unit: Vec<i64>,
    /// Final bounds per class, for linear and ReLU neurons.
    bounds: [Vec<Bounds>; 2],
    residual_bound: i64,
}

fn class_index(fmt: &FloatFormat, v: &ValueState, shape: Shape) -> usize {
    if v.field == 0 {
        return 0;
    }
    let exps = (fmt.max_exponent() - fmt.min_exponent() + 1) as usize;
    let e = v.field as usize - 1;
    1 + ((v.negative as usize) * exps + e) * 3 + shape as usize
}

/// The preimage of `y` under `quantize`, optionally followed by ReLU, as
/// offsets from `y` with closedness. `None` is unbounded.
type End = Option<(Rational, bool)>;

fn preimage(fmt: &FloatFormat, y: &Rational, shape: Shape, relu: bool) -> Option<(End, End)> {
    let p = fmt.mantissa_bits() as i64;
    let q = |z: &Rational| {
        let v = fmt.quantize(z);
        if relu && v.is_negative() {
            Rational::zero()
        } else {
            v
        }
    };
    let end = |off: Rational| {
        let closed = q(&(y + &off)) == *y;
        Some((off, closed))
    };
    if y.is_zero() {
        let edge = fmt.min_normal() - pow2(fmt.min_exponent() - 2 - p);
        let lo = if relu { None } else { end(-edge.clone()) };
        return Some((lo, end(edge)));
    }
    if relu && y.is_negative() {
        return None;
    }
    let mag = y.abs();
    let e = log2_abs(&mag);
    let up = pow2(e - p - 1);
    let down = if shape == Shape::Bottom { pow2(e - p - 2) } else { up.clone() };
    let top = mag == fmt.max_value();
    let (lo, hi) = if y.is_positive() {
        (end(-down), if top { None } else { end(up) })
    } else {
        (if top { None } else { end(-up) }, end(down))
    };
    Some((lo, hi))
}

impl FloatFnnNfa {
    pub fn new(net: &Network, fmt: &FloatFormat) -> Result<Self> {
        Self::with_cap(net, fmt, DEFAULT_E_CAP)
    }

    pub fn with_cap(net: &Network, fmt: &FloatFormat, e_cap: u32) -> Result<Self> {
        if fmt.exponent_bits() > e_cap {
            return Err(Error::ExponentWidthTooLarge {
                width: fmt.exponent_bits(),
                cap: e_cap,
            });
        }
        if net.depth() > MAX_DEPTH {
            return Err(Error::UnsupportedDepth {
                depth: net.depth(),
                max: MAX_DEPTH,
            });
        }
        if fmt.rounding != RoundingMode::NearestHalfUp {
            return Err(Error::UnsupportedRounding(fmt.rounding.to_string()));
        }
        let afmt = ArithmeticFormat::Float(*fmt);
        if !net.is_quantised(&afmt) {
            return Err(Error::UnquantisedNetwork(afmt.to_string()));
        }
        let p = fmt.mantissa_bits() as i64;
        let (emin, emax) = (fmt.min_exponent(), fmt.max_exponent());
        let log2 = log2_abs;

        // 2^u divides every weight times input, every bias and 2^(Emin-2-p) 2^p
        let mut u = emin - 2;
        let mut magnitude = Rational::zero();
        for layer in net.layers() {
            for (row, b) in layer.weights.iter().zip(&layer.bias) {
                let mut sum = b.abs();
                for w in row.iter().filter(|w| !w.is_zero()) {
                    u = u.min(log2(w) - p + emin);
                    sum += w.abs() * fmt.max_value();
                }
                if !b.is_zero() {
                    u = u.min(log2(b) - p);
                }
                magnitude = magnitude.max(sum);
            }
        }
        let scale = |x: Rational, k: i64| -> Result<i64> {
            let v = x * pow2(k - u);
            if !v.is_integer() {
                return Err(Error::Internal("float automaton scale".into()));
            }
            v.to_integer()
                .to_i64()
                .filter(|n| n.unsigned_abs() < 1 << 60)
                .ok_or_else(|| Error::InvalidFormat("float format too wide for the automaton".into()))
        };
        let residual_bound = scale((magnitude + fmt.max_value()) * int2(), p)?;
        let unit = (emin..=emax).map(|e| scale(pow2(e), 0)).collect::<Result<Vec<_>>>()?;

        let d = net.input_dim();
        let hidden = if net.depth() == 2 { net.layers()[0].bias.len() } else { 0 };
        let mut neurons = Vec::new();
        let mut offset = 0;
        for (l, layer) in net.layers().iter().enumerate() {
            let first = if l == 0 { 0 } else { d };
            for (row, b) in layer.weights.iter().zip(&layer.bias) {
                let coef = row
                    .iter()
                    .map(|w| (emin..=emax).map(|e| scale(w * pow2(e), 0)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                neurons.push(Neuron {
                    inputs: (first..first + row.len()).collect(),
                    coef,
                    bias: scale(b.clone(), 0)?,
                    relu: net.has_relu(l),
                });
            }
            offset += layer.bias.len();
        }
        debug_assert_eq!(offset, hidden + net.output_dim());

        let mut bounds = [Vec::new(), Vec::new()];
        for (relu, table) in bounds.iter_mut().enumerate() {
            let relu = relu == 1;
            let exps = (emax - emin + 1) as usize;
            table.resize(1 + 2 * exps * 3, Bounds::EMPTY);
            let mut classes = vec![(0usize, Rational::zero(), Shape::Bottom)];
            for negative in [false, true] {
                for (k, e) in (emin..=emax).enumerate() {
                    let top = (int2() - pow2(-p)) * pow2(e);
                    let mut reps = vec![(Shape::Bottom, pow2(e)), (Shape::Top, top)];
                    if p >= 2 {
                        reps.push((Shape::Mid, (Rational::from_integer(1.into()) + pow2(-p)) * pow2(e)));
                    }
                    for (shape, mag) in reps {
                        let v = ValueState {
                            negative,
                            field: k as u32 + 1,
                            ..Default::default()
                        };
                        let y = if negative { -mag } else { mag };
                        classes.push((class_index(fmt, &v, shape), y, shape));
                    }
                }
            }
            for (idx, y, shape) in classes {
                let Some((lo, hi)) = preimage(fmt, &y, shape, relu) else {
                    continue;
                };
                let lo = match lo {
                    None => i64::MIN,
                    Some((off, closed)) => scale(off, p)? + !closed as i64,
                };
                let hi = match hi {
                    None => i64::MAX,
                    Some((off, closed)) => scale(off, p)? - !closed as i64,
                };
                table[idx] = Bounds { lo, hi };
            }
        }

        Ok(FloatFnnNfa {
            fmt: *fmt,
            neurons,
            inputs: d,
            hidden,
            outputs: net.output_dim(),
            unit,
            bounds,
            residual_bound,
        })
    }

    pub fn format(&self) -> &FloatFormat {
        &self.fmt
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    fn e(&self) -> u32 {
        self.fmt.exponent_bits()
    }

    fn p(&self) -> u32 {
        self.fmt.mantissa_bits()
    }

    fn len(&self) -> u32 {
        1 + self.e() + self.p()
    }

    fn exp_index(&self, v: &ValueState) -> usize {
        v.field as usize - 1
    }

    /// Scaled contribution of one mantissa bit of each input and of the
    /// output, signs applied.
    fn step_terms(&self, n: usize, values: &[ValueState]) -> (Vec<i64>, i64) {
        let neuron = &self.neurons[n];
        let ins = neuron
            .inputs
            .iter()
            .zip(&neuron.coef)
            .map(|(&j, coef)| {
                let v = &values[j];
                if v.field == 0 {
                    0
                } else {
                    let c = coef[self.exp_index(v)];
                    if v.negative {
                        -c
                    } else {
                        c
                    }
                }
            })
            .collect();
        let y = &values[self.inputs + n];
        let own = if y.field == 0 {
            0
        } else {
            let c = self.unit[self.exp_index(y)];
            if y.negative {
                c
            } else {
                -c
            }
        };
        (ins, own)
    }

    fn final_bounds(&self, n: usize, y: &ValueState, remaining: u32) -> Bounds {
        let table = &self.bounds[self.neurons[n].relu as usize];
        let shapes: &[Shape] = if remaining == 0 {
            &[if y.zeros {
                Shape::Bottom
            } else if y.ones {
                Shape::Top
            } else {
                Shape::Mid
            }]
        } else {
            &[Shape::Bottom, Shape::Mid, Shape::Top]
        };
        let mut out = Bounds::EMPTY;
        for &s in shapes {
            let reachable = match s {
                Shape::Bottom => y.zeros,
                Shape::Top => y.ones,
                Shape::Mid => self.p() >= 2,
            };
            if reachable || y.field == 0 {
                out = out.hull(table[class_index(&self.fmt, y, s)]);
            }
        }
        out
    }

    /// Whether residual `r` of neuron `n` can still end inside its bounds.
    fn alive(&self, n: usize, r: i64, values: &[ValueState], remaining: u32) -> bool {
        let b = self.final_bounds(n, &values[self.inputs + n], remaining);
        if b.lo > b.hi {
            return false;
        }
        let (ins, own) = self.step_terms(n, values);
        let (mut neg, mut pos) = (0i128, 0i128);
        for c in ins.into_iter().chain([own]) {
            neg += c.min(0) as i128;
            pos += c.max(0) as i128;
        }
        let k = (1i128 << remaining) - 1;
        let base = (r as i128) << remaining;
        base + pos * k >= b.lo as i128 && base + neg * k <= b.hi as i128
    }

    fn well_formed(&self, v: &ValueState) -> bool {
        let all_ones = (1u32 << self.e()) - 1;
        v.field != all_ones && !(v.field == 0 && v.negative)
    }

    fn after_prefix(&self, mut q: FloatState) -> Option<FloatState> {
        for (i, v) in q.values.iter().enumerate() {
            if !self.well_formed(v) {
                return None;
            }
            let n = i.checked_sub(self.inputs);
            if n.is_some_and(|n| self.neurons[n].relu) && v.negative {
                return None;
            }
        }
        let p = self.p();
        let mut residuals = Vec::with_capacity(self.neurons.len());
        for n in 0..self.neurons.len() {
            // the implicit leading ones
            let (ins, own) = self.step_terms(n, &q.values);
            let r = self.neurons[n].bias + ins.iter().sum::<i64>() + own;
            if !self.alive(n, r, &q.values, p) {
                return None;
            }
            residuals.push(r);
        }
        q.residuals = residuals;
        Some(q)
    }

    fn bit(&self, sigma: Symbol, value: usize) -> Option<bool> {
        if value < self.inputs {
            Some((sigma >> value) & 1 == 1)
        } else if value >= self.inputs + self.hidden {
            Some((sigma >> (value - self.hidden)) & 1 == 1)
        } else {
            None
        }
    }

    fn mantissa_step(&self, q: &FloatState, sigma: Symbol, guess: u64) -> Option<FloatState> {
        let i = q.t - self.e(); // 1-based mantissa index
        let remaining = self.p() - i;
        let mut values = q.values.clone();
        let mut bits = vec![false; values.len()];
        for (k, v) in values.iter_mut().enumerate() {
            let b = self
                .bit(sigma, k)
                .unwrap_or_else(|| (guess >> (k - self.inputs)) & 1 == 1);
            if b && v.field == 0 {
                return None;
            }
            bits[k] = b;
            if k >= self.inputs {
                v.zeros &= !b;
                v.ones &= b;
            }
        }
        let mut residuals = Vec::with_capacity(q.residuals.len());
        for (n, &r) in q.residuals.iter().enumerate() {
            let (ins, own) = self.step_terms(n, &q.values);
            let mut c = if bits[self.inputs + n] { own } else { 0 };
            for (j, &w) in self.neurons[n].inputs.iter().zip(&ins) {
                if bits[*j] {
                    c += w;
                }
            }
            let r = 2 * r + c;
            if !self.alive(n, r, &values, remaining) {
                return None;
            }
            residuals.push(r);
        }
        Some(FloatState {
            t: q.t + 1,
            values,
            residuals,
        })
    }
}

fn log2_abs(x: &Rational) -> i64 {
    floor_log2(x.numer().magnitude(), x.denom().magnitude())
}

fn int2() -> Rational {
    Rational::from_integer(2.into())
}

impl SuccinctNfa for FloatFnnNfa {
    type State = FloatState;

    fn symbol_width(&self) -> usize {
        self.inputs + self.outputs
    }

    fn word_len(&self) -> usize {
        self.len() as usize
    }

    fn initial_states(&self) -> Vec<FloatState> {
        let fields = (1u32 << self.e()) - 1;
        let blank = ValueState {
            zeros: true,
            ones: true,
            ..Default::default()
        };
        let mut out = Vec::new();
        let combos = (fields as u64).pow(self.hidden as u32);
        for mut code in 0..combos {
            let mut values = vec![blank; self.inputs + self.hidden + self.outputs];
            for v in &mut values[self.inputs..self.inputs + self.hidden] {
                v.field = (code % fields as u64) as u32;
                code /= fields as u64;
            }
            out.push(FloatState {
                t: 0,
                values,
                residuals: Vec::new(),
            });
        }
        out
    }

    fn successors(&self, q: &FloatState, sigma: Symbol) -> Vec<FloatState> {
        let e = self.e();
        if q.t >= self.len() {
            return Vec::new();
        }
        if q.t <= e {
            let mut next = q.clone();
            next.t += 1;
            for k in 0..next.values.len() {
                if let Some(b) = self.bit(sigma, k) {
                    let v = &mut next.values[k];
                    if q.t == 0 {
                        v.negative = b;
                    } else {
                        v.field |= (b as u32) << (q.t - 1);
                    }
                }
            }
            if next.t == e + 1 {
                return self.after_prefix(next).into_iter().collect();
            }
            return vec![next];
        }
        (0..1u64 << self.hidden)
            .filter_map(|g| self.mantissa_step(q, sigma, g))
            .collect()
    }

    fn is_final(&self, q: &FloatState) -> bool {
        q.t == self.len()
    }

    fn encode_state(&self, q: &FloatState) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.descriptor_bound());
        push_varint(&mut out, q.t as i64);
        for v in &q.values {
            out.push(v.negative as u8 | (v.zeros as u8) << 1 | (v.ones as u8) << 2);
            push_varint(&mut out, v.field as i64);
        }
        for &r in &q.residuals {
            push_varint(&mut out, r);
        }
        out
    }

    fn descriptor_bound(&self) -> usize {
        varint_len(self.len() as u64)
            + (self.inputs + self.hidden + self.outputs) * (1 + varint_len(1 << self.e()))
            + self.neurons.len() * varint_len(self.residual_bound as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{encode, int, rat};
    use crate::automata::{accepted_words, is_empty, Budget};
    use crate::network::Layer;
    use std::collections::BTreeSet;

    fn fmt(p: u32, e: u32) -> FloatFormat {
        FloatFormat::new(p, e, RoundingMode::NearestHalfUp).unwrap()
    }

    fn relation(net: &Network, fmt: &FloatFormat) -> BTreeSet<Vec<Symbol>> {
        let af = ArithmeticFormat::Float(*fmt);
        let vals = af.values();
        let d = net.input_dim();
        let mut out = BTreeSet::new();
        for code in 0..vals.len().pow(d as u32) {
            let x: Vec<Rational> = (0..d).map(|k| vals[code / vals.len().pow(k as u32) % vals.len()].clone()).collect();
            let y = net.eval_quantised(&x, &af).unwrap();
            let words: Vec<_> = x.iter().chain(&y).map(|v| encode(v, &af).unwrap()).collect();
            out.insert(
                (0..fmt.word_len())
                    .map(|t| words.iter().enumerate().fold(0, |a, (k, w)| a | ((w.bit(t) as u64) << k)))
                    .collect(),
            );
        }
        out
    }

    fn check(net: &Network, fmt: &FloatFormat) {
        let a = FloatFnnNfa::new(net, fmt).unwrap();
        assert_eq!(accepted_words(&a, 1 << 22).unwrap(), relation(net, fmt), "{net}{fmt}");
    }

    fn single(w: Rational, b: Rational, relu: bool) -> Network {
        Network::new(vec![Layer::new(vec![vec![w]], vec![b])], relu).unwrap()
    }

    #[test]
    fn preimage_matches_quantize() {
        for (p, e) in [(1, 2), (2, 2), (3, 2), (2, 3)] {
            let f = fmt(p, e);
            let top = f.max_value() * int(2);
            for relu in [false, true] {
                for y in f.values() {
                    let mag = y.abs();
                    let shape = if y.is_zero() {
                        Shape::Bottom
                    } else {
                        let frac = &mag / pow2(log2_abs(&mag)) - int(1);
                        if frac.is_zero() {
                            Shape::Bottom
                        } else if frac == int(1) - pow2(-(p as i64)) {
                            Shape::Top
                        } else {
                            Shape::Mid
                        }
                    };
                    let inside = |z: &Rational| match preimage(&f, &y, shape, relu) {
                        None => false,
                        Some((lo, hi)) => {
                            let off = z - &y;
                            lo.is_none_or(|(l, c)| off > l || (c && off == l))
                                && hi.is_none_or(|(h, c)| off < h || (c && off == h))
                        }
                    };
                    // a window of a few ulps around y, plus both far ends
                    let e = if y.is_zero() { f.min_exponent() } else { log2_abs(&y) };
                    let step = pow2(e - p as i64 - 4);
                    let mut zs = vec![-top.clone(), top.clone()];
                    // zero's window must reach past the smallest normal
                    let reach = int(if y.is_zero() { 1 << (p + 5) } else { 64 });
                    let mut z = &y - &step * &reach;
                    while z <= &y + &step * &reach {
                        zs.push(z.clone());
                        z += &step;
                    }
                    for z in zs {
                        let mut q = f.quantize(&z);
                        if relu && q.is_negative() {
                            q = Rational::zero();
                        }
                        assert_eq!(q == y, inside(&z), "p={p} e={e} y={y} z={z} relu={relu}");
                    }
                }
            }
        }
    }

    #[test]
    fn identity_single_neuron() {
        let f = fmt(2, 2);
        let net = single(int(1), int(0), true);
        check(&net, &f);
        check(&single(int(1), int(0), false), &f);
    }

    #[test]
    fn zero_input_gives_relu_bias() {
        let f = fmt(2, 2);
        let af = ArithmeticFormat::Float(f);
        let net = single(rat(3, 2), rat(5, 4), true);
        let a = FloatFnnNfa::new(&net, &f).unwrap();
        let words = accepted_words(&a, 1 << 20).unwrap();
        let y = encode(&rat(5, 4), &af).unwrap();
        let zero_in: Vec<_> = words.iter().filter(|w| w.iter().all(|s| s & 1 == 0)).collect();
        assert_eq!(zero_in.len(), 1);
        assert!((0..f.word_len()).all(|t| (zero_in[0][t] >> 1 == 1) == y.bit(t)));
    }

    #[test]
    fn single_neuron_family() {
        for (p, e) in [(1, 2), (2, 2), (3, 2)] {
            let f = fmt(p, e);
            let af = ArithmeticFormat::Float(f);
            for (w, b) in [
                (rat(3, 2), rat(-1, 2)),
                (int(-1), int(1)),
                (rat(5, 4), rat(1, 4)),
                (int(3), int(0)),
                (rat(-7, 4), rat(-3, 2)),
                (int(0), int(2)),
            ] {
                for relu in [true, false] {
                    check(&single(w.clone(), b.clone(), relu).quantise(&af), &f);
                }
            }
        }
    }

    #[test]
    fn alignment_across_exponents() {
        // operands two binades apart
        let f = fmt(3, 2);
        let net = Network::new(vec![Layer::new(vec![vec![int(1), rat(1, 4)]], vec![int(0)])], false).unwrap();
        let af = ArithmeticFormat::Float(f);
        let net = net.quantise(&af);
        check(&net, &f);
        let a = FloatFnnNfa::new(&net, &f).unwrap();
        let w = is_empty(&a, &Budget::default()).unwrap().witness.unwrap();
        assert_eq!(w.len(), f.word_len());
    }

    #[test]
    fn two_layers() {
        let f = fmt(2, 2);
        let af = ArithmeticFormat::Float(f);
        let net = Network::new(
            vec![
                Layer::new(vec![vec![int(1), int(-1)], vec![rat(3, 2), int(1)]], vec![int(1), int(-1)]),
                Layer::new(vec![vec![int(1), rat(-5, 4)]], vec![rat(1, 2)]),
            ],
            false,
        )
        .unwrap()
        .quantise(&af);
        check(&net, &f);
        let relu = Network::new(net.layers().to_vec(), true).unwrap();
        check(&relu, &f);
    }

    #[test]
    fn descriptors_stay_within_bound() {
        let f = fmt(3, 2);
        let net = Network::new(
            vec![
                Layer::new(vec![vec![rat(7, 4)], vec![int(-3)]], vec![int(1), rat(3, 2)]),
                Layer::new(vec![vec![int(2), rat(-3, 2)]], vec![int(0)]),
            ],
            true,
        )
        .unwrap();
        let a = FloatFnnNfa::new(&net, &f).unwrap();
        let mut frontier = a.initial_states();
        let mut seen = std::collections::HashSet::new();
        while let Some(q) = frontier.pop() {
            assert!(a.encode_state(&q).len() <= a.descriptor_bound());
            for sigma in 0..4 {
                for r in a.successors(&q, sigma) {
                    if seen.insert(r.clone()) {
                        frontier.push(r);
                    }
                }
            }
        }
    }

    #[test]
    fn state_growth_across_mantissa_widths() {
        let net = Network::new(
            vec![
                Layer::new(vec![vec![rat(7, 4)], vec![int(-3)]], vec![int(1), rat(3, 2)]),
                Layer::new(vec![vec![int(2), rat(-3, 2)]], vec![int(0)]),
            ],
            true,
        )
        .unwrap();
        let mut widest = Vec::new();
        for p in 2..=5 {
            let a = FloatFnnNfa::new(&net, &fmt(p, 2)).unwrap();
            let mut frontier = a.initial_states();
            let mut seen: std::collections::HashSet<_> = frontier.iter().cloned().collect();
            let mut longest = 0;
            while let Some(q) = frontier.pop() {
                longest = longest.max(a.encode_state(&q).len());
                for sigma in 0..4 {
                    for r in a.successors(&q, sigma) {
                        if seen.insert(r.clone()) {
                            frontier.push(r);
                        }
                    }
                }
            }
            println!("p={p}: {} states, descriptors up to {longest} bytes", seen.len());
            widest.push(longest);
        }
        // descriptors grow with log p, not with the state count
        assert!(widest[3] <= widest[0] + 2, "{widest:?}");
    }

    #[test]
    fn rejects_unsupported() {
        let net = single(int(1), int(0), true);
        assert!(matches!(
            FloatFnnNfa::new(&net, &fmt(2, 4)),
            Err(Error::ExponentWidthTooLarge { width: 4, cap: 3 })
        ));
        assert!(FloatFnnNfa::with_cap(&net, &fmt(2, 4), 4).is_ok());
        let floor = FloatFormat::new(2, 2, RoundingMode::TowardNegative).unwrap();
        assert!(matches!(FloatFnnNfa::new(&net, &floor), Err(Error::UnsupportedRounding(_))));
        let deep = Network::new(vec![Layer::new(vec![vec![int(1)]], vec![int(0)]); 3], true).unwrap();
        assert!(matches!(FloatFnnNfa::new(&deep, &fmt(2, 2)), Err(Error::UnsupportedDepth { depth: 3, .. })));
        assert!(matches!(
            FloatFnnNfa::new(&single(rat(1, 3), int(0), true), &fmt(2, 2)),
            Err(Error::UnquantisedNetwork(_))
        ));
    }
}
