//! The automaton accepting `(encode(x), encode(N(x)))` for a network under a
//! fixed-point format, reading all words least significant bit first.
//!
//! Letter `t` carries bit `t` of every input word (tracks `0..d`) and of
//! every output word (tracks `d..d+m`). Words have `b` letters.
//!
//! Everything is scaled to integers: inputs `X`, weights `W` and biases `B`
//! are multiples of `2^-f`, so a neuron's exact pre-activation is
//! `T / 2^2f` with `T = sum W_j X_j + 2^f B`, and its rounded value is
//! `round(T / 2^f)` in units of `2^-f`. Each neuron guesses up front which
//! case applies:
//!
//! * `Identity`: the output `Y` is the rounded value itself. With `c` the
//!   rounding increment, `E = T + 2^f c - 2^f Y` must equal the tail
//!   `T mod 2^f`, i.e. lie in `[0, 2^f)`. `E` is computed by a serial adder
//!   whose digit `t` collects `W_j x_j[t]`, bit `t` of `2^f (B + c)` and
//!   `-2^f y[t]`; digits from position `f` on must vanish, the final carry
//!   must cancel the high part of `2^f (B + c)`, and for nearest rounding `c`
//!   is the top tail digit.
//! * `Zero`, `SatPos`, `SatNeg`: the output is a constant (0, max, min) and
//!   `T` is compared against the threshold where rounding crosses into that
//!   case, again serially.
//!
//! Hidden identity neurons guess their output bit at every step; the next
//! layer consumes it in the same step.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::nfa::{push_varint, varint_len, SuccinctNfa, Symbol};
use crate::arithmetic::{getbit_fixed, ArithmeticFormat, FixedFormat, OverflowMode, RoundingMode};
use crate::error::{Error, Result};
use crate::network::Network;

/// Largest supported total width; keeps every scaled quantity in `i64`.
pub const MAX_BITS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Identity,
    Zero,
    SatPos,
    SatNeg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NeuronState {
    pub mode: Mode,
    /// Rounding increment (identity neurons; fixed once the tail is read).
    pub c_init: bool,
    pub carry: i64,
    /// Comparator: low part of `T` read so far is `>=` the threshold's.
    pub ge: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FixedState {
    pub t: u32,
    pub neurons: Vec<NeuronState>,
}

#[derive(Debug, Clone)]
struct Neuron {
    weights: Vec<i64>,
    /// Scaled bias `B`.
    bias: i64,
    relu: bool,
    modes: Vec<Mode>,
    /// `sum |W_j| + 2^f + 2`
    carry_bound: i64,
}

#[derive(Debug, Clone)]
pub struct FixedFnnNfa {
    fmt: FixedFormat,
    layers: Vec<Vec<Neuron>>,
    inputs: usize,
    outputs: usize,
    len: u32,
    frac: u32,
    nearest: bool,
}

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

impl FixedFnnNfa {
    pub fn new(net: &Network, fmt: &FixedFormat) -> Result<Self> {
        if fmt.overflow != OverflowMode::Saturate {
            return Err(Error::UnsupportedOverflow(fmt.overflow.to_string()));
        }
        let nearest = match fmt.rounding {
            RoundingMode::NearestHalfUp => true,
            RoundingMode::TowardNegative => false,
            other => return Err(Error::UnsupportedRounding(other.to_string())),
        };
        if fmt.total_bits() > MAX_BITS {
            return Err(Error::InvalidFormat(format!(
                "the fixed-point automaton supports at most {MAX_BITS} bits"
            )));
        }
        let afmt = ArithmeticFormat::Fixed(*fmt);
        if !net.is_quantised(&afmt) {
            return Err(Error::UnquantisedNetwork(afmt.to_string()));
        }
        let b = fmt.total_bits();
        let f = fmt.frac_bits();
        let scaled = |x| -> i64 { fmt.scaled(x).and_then(|n| n.to_i64()).expect("quantised") };
        let (smin, smax) = (-(1i64 << (b - 1)), (1i64 << (b - 1)) - 1);
        let mut layers = Vec::new();
        // scaled value ranges of the current layer inputs
        let mut ranges = vec![(smin, smax); net.input_dim()];
        for (l, layer) in net.layers().iter().enumerate() {
            let relu = net.has_relu(l);
            let mut neurons = Vec::new();
            let mut next_ranges = Vec::new();
            for (row, bias) in layer.weights.iter().zip(&layer.bias) {
                let weights: Vec<i64> = row.iter().map(scaled).collect();
                let bias = scaled(bias);
                let (mut tmin, mut tmax) = ((bias as i128) << f, (bias as i128) << f);
                for (&w, &(lo, hi)) in weights.iter().zip(&ranges) {
                    let (a, c) = (w as i128 * lo as i128, w as i128 * hi as i128);
                    tmin += a.min(c);
                    tmax += a.max(c);
                }
                let theta = |n: i64| threshold(n, f, nearest) as i128;
                let lowest = if relu { 0 } else { smin };
                let mut modes = Vec::new();
                if tmax >= theta(lowest) && tmin < theta(smax + 1) {
                    modes.push(Mode::Identity);
                }
                if relu && tmin < theta(1) {
                    modes.push(Mode::Zero);
                }
                if tmax >= theta(smax + 1) {
                    modes.push(Mode::SatPos);
                }
                if !relu && tmin < theta(smin) {
                    modes.push(Mode::SatNeg);
                }
                let carry_bound = weights.iter().map(|w| w.abs()).sum::<i64>() + (1 << f) + 2;
                neurons.push(Neuron {
                    weights,
                    bias,
                    relu,
                    modes,
                    carry_bound,
                });
                next_ranges.push((lowest, smax));
            }
            layers.push(neurons);
            ranges = next_ranges;
        }
        Ok(FixedFnnNfa {
            fmt: *fmt,
            layers,
            inputs: net.input_dim(),
            outputs: net.output_dim(),
            len: b,
            frac: f,
            nearest,
        })
    }

    pub fn format(&self) -> &FixedFormat {
        &self.fmt
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Bit `t` of the scaled weight of `input` in `neuron` of `layer`.
    pub fn weight_bit(&self, layer: usize, neuron: usize, input: usize, t: u32) -> Result<bool> {
        let w = self
            .layers
            .get(layer)
            .and_then(|l| l.get(neuron))
            .and_then(|n| n.weights.get(input))
            .ok_or_else(|| Error::IndexOutOfRange(format!("weight ({layer}, {neuron}, {input})")))?;
        if t >= self.len {
            return Err(Error::IndexOutOfRange(format!("bit {t} of a {}-bit word", self.len)));
        }
        Ok(getbit_fixed(&BigInt::from(*w), &BigInt::from(1), t as i64))
    }

    fn neurons(&self) -> impl Iterator<Item = &Neuron> {
        self.layers.iter().flatten()
    }

    /// Bit `t` of `2^f · v`.
    fn shifted_bit(&self, v: i64, t: u32) -> i64 {
        if t < self.frac {
            0
        } else {
            getbit_fixed(&BigInt::from(v), &BigInt::from(1), (t - self.frac) as i64) as i64
        }
    }

    /// `floor(2^f · v / 2^L)`
    fn shifted_high(&self, v: i64) -> i64 {
        floor_div(v << self.frac, 1i64 << self.len)
    }

    fn const_bit(&self, mode: Mode, t: u32) -> bool {
        let sign = t == self.len - 1;
        match mode {
            Mode::Zero | Mode::Identity => false,
            Mode::SatPos => !sign,
            Mode::SatNeg => sign,
        }
    }

    /// Threshold of the comparison a non-identity neuron performs, and
    /// whether it requires `T >= θ` (otherwise `T < θ`).
    fn comparison(&self, mode: Mode) -> (i64, bool) {
        let b = self.len;
        let (f, nearest) = (self.frac, self.nearest);
        match mode {
            Mode::Zero => (threshold(1, f, nearest), false),
            Mode::SatPos => (threshold(1 << (b - 1), f, nearest), true),
            Mode::SatNeg => (threshold(-(1 << (b - 1)), f, nearest), false),
            Mode::Identity => unreachable!(),
        }
    }

    /// One neuron step. Returns `None` if the run dies.
    fn step_neuron(&self, n: &Neuron, s: &NeuronState, t: u32, inputs: &[bool], out: bool) -> Option<NeuronState> {
        let last = t == self.len - 1;
        let signed = |bit: bool| -> i64 {
            match (bit, last) {
                (false, _) => 0,
                (true, false) => 1,
                (true, true) => -1,
            }
        };
        let dot: i64 = n.weights.iter().zip(inputs).map(|(w, &x)| w * signed(x)).sum();
        let mut next = *s;
        match s.mode {
            Mode::Identity => {
                if n.relu && last && out {
                    return None;
                }
                let k = n.bias + s.c_init as i64;
                let d = s.carry + dot + self.shifted_bit(k, t) - (signed(out) << self.frac);
                let e = d.rem_euclid(2) == 1;
                next.carry = d.div_euclid(2);
                if t + 1 < self.frac {
                    // inside the tail
                } else if t + 1 == self.frac {
                    next.c_init = self.nearest && e;
                } else if e {
                    return None;
                }
                if last && next.carry + self.shifted_high(n.bias + next.c_init as i64) != 0 {
                    return None;
                }
            }
            mode => {
                if out != self.const_bit(mode, t) {
                    return None;
                }
                let d = s.carry + dot + self.shifted_bit(n.bias, t);
                let e = d.rem_euclid(2) == 1;
                next.carry = d.div_euclid(2);
                let (theta, want_ge) = self.comparison(mode);
                let th = theta.rem_euclid(2i64 << t) >> t & 1 == 1;
                if e != th {
                    next.ge = e;
                }
                if last {
                    let high = next.carry + self.shifted_high(n.bias);
                    let theta_high = floor_div(theta, 1i64 << self.len);
                    let ge = high > theta_high || (high == theta_high && next.ge);
                    if ge != want_ge {
                        return None;
                    }
                }
            }
        }
        debug_assert!(next.carry.abs() <= n.carry_bound, "carry escaped its bound");
        Some(next)
    }

    /// All successors on input bits `x`. Output bits come from `y` when
    /// given, otherwise they are guessed and returned with each successor.
    fn step(&self, q: &FixedState, x: u64, y: Option<u64>) -> Vec<(u64, FixedState)> {
        if q.t >= self.len {
            return Vec::new();
        }
        let t = q.t;
        let inputs: Vec<bool> = (0..self.inputs).map(|i| (x >> i) & 1 == 1).collect();
        // Partial runs: neuron states so far, then the previous layer's bits
        // followed by the bits this layer has produced so far.
        let mut partial: Vec<(Vec<NeuronState>, Vec<bool>)> = vec![(Vec::with_capacity(q.neurons.len()), inputs)];
        let mut offset = 0;
        for (l, layer) in self.layers.iter().enumerate() {
            let is_output = l + 1 == self.layers.len();
            for (i, n) in layer.iter().enumerate() {
                let s = &q.neurons[offset + i];
                let fixed_bit = if s.mode != Mode::Identity {
                    Some(self.const_bit(s.mode, t))
                } else if is_output {
                    y.map(|y| (y >> i) & 1 == 1)
                } else {
                    None
                };
                let choices: &[bool] = match fixed_bit {
                    Some(true) => &[true],
                    Some(false) => &[false],
                    None => &[false, true],
                };
                let mut grown = Vec::with_capacity(partial.len() * choices.len());
                for (states, prev) in &partial {
                    for &bit in choices {
                        if let Some(ns) = self.step_neuron(n, s, t, prev, bit) {
                            let mut states = states.clone();
                            states.push(ns);
                            let mut p = prev.clone();
                            p.push(bit);
                            grown.push((states, p));
                        }
                    }
                }
                partial = grown;
                if partial.is_empty() {
                    return Vec::new();
                }
            }
            let width = layer.len();
            for (_, bits) in partial.iter_mut() {
                let start = bits.len() - width;
                *bits = bits.split_off(start);
            }
            offset += layer.len();
        }
        partial
            .into_iter()
            .map(|(neurons, outs)| {
                let y = outs.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
                (y, FixedState { t: t + 1, neurons })
            })
            .collect()
    }
}

/// Smallest scaled `T` whose rounded value `round(T / 2^f)` is at least `n`.
fn threshold(n: i64, f: u32, nearest: bool) -> i64 {
    if nearest && f > 0 {
        (n << f) - (1 << (f - 1))
    } else {
        n << f
    }
}

impl SuccinctNfa for FixedFnnNfa {
    type State = FixedState;

    fn symbol_width(&self) -> usize {
        self.inputs + self.outputs
    }

    fn word_len(&self) -> usize {
        self.len as usize
    }

    fn initial_states(&self) -> Vec<FixedState> {
        let mut states = vec![Vec::new()];
        for n in self.neurons() {
            let mut grown = Vec::with_capacity(states.len() * n.modes.len());
            for s in &states {
                for &mode in &n.modes {
                    let mut s: Vec<NeuronState> = s.clone();
                    s.push(NeuronState {
                        mode,
                        c_init: false,
                        carry: 0,
                        ge: true,
                    });
                    grown.push(s);
                }
            }
            states = grown;
        }
        states.into_iter().map(|neurons| FixedState { t: 0, neurons }).collect()
    }

    fn successors(&self, q: &FixedState, sigma: Symbol) -> Vec<FixedState> {
        let x = sigma & ((1 << self.inputs) - 1);
        let y = sigma >> self.inputs;
        self.step(q, x, Some(y)).into_iter().map(|(_, s)| s).collect()
    }

    fn moves(&self, q: &FixedState) -> Vec<(Symbol, FixedState)> {
        let mut out = Vec::new();
        for x in 0..(1u64 << self.inputs) {
            for (y, s) in self.step(q, x, None) {
                out.push((x | (y << self.inputs), s));
            }
        }
        out
    }

    fn is_final(&self, q: &FixedState) -> bool {
        q.t == self.len
    }

    fn encode_state(&self, q: &FixedState) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.descriptor_bound());
        push_varint(&mut out, q.t as i64);
        for s in &q.neurons {
            let mode = match s.mode {
                Mode::Identity => 0u8,
                Mode::Zero => 1,
                Mode::SatPos => 2,
                Mode::SatNeg => 3,
            };
            out.push(mode | (s.c_init as u8) << 2 | (s.ge as u8) << 3);
            push_varint(&mut out, s.carry);
        }
        out
    }

    fn descriptor_bound(&self) -> usize {
        varint_len(self.len as u64)
            + self
                .neurons()
                .map(|n| 1 + varint_len(n.carry_bound as u64))
                .sum::<usize>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{encode, int, rat, Rational};
    use crate::automata::{accepted_words, is_empty, Budget};
    use crate::network::Layer;
    use std::collections::BTreeSet;

    fn fmt(b: u32, f: u32, r: RoundingMode) -> FixedFormat {
        FixedFormat::new(b, f, r, OverflowMode::Saturate).unwrap()
    }

    /// The relation computed by direct evaluation, as words.
    fn relation(net: &Network, fmt: &FixedFormat) -> BTreeSet<Vec<Symbol>> {
        let af = ArithmeticFormat::Fixed(*fmt);
        let vals = af.values();
        let d = net.input_dim();
        let mut out = BTreeSet::new();
        let mut idx = vec![0usize; d];
        loop {
            let x: Vec<Rational> = idx.iter().map(|&i| vals[i].clone()).collect();
            let y = net.eval_quantised(&x, &af).unwrap();
            let words: Vec<_> = x.iter().chain(&y).map(|v| encode(v, &af).unwrap()).collect();
            let len = fmt.total_bits() as usize;
            out.insert(
                (0..len)
                    .map(|t| words.iter().enumerate().fold(0, |a, (k, w)| a | ((w.bit(t) as u64) << k)))
                    .collect(),
            );
            let mut k = 0;
            while k < d {
                idx[k] += 1;
                if idx[k] < vals.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == d {
                return out;
            }
        }
    }

    fn check(net: &Network, fmt: &FixedFormat) {
        let a = FixedFnnNfa::new(net, fmt).unwrap();
        assert_eq!(accepted_words(&a, 1 << 22).unwrap(), relation(net, fmt), "{net}{fmt}");
    }

    fn single(w: Rational, b: Rational, relu: bool) -> Network {
        Network::new(vec![Layer::new(vec![vec![w]], vec![b])], relu).unwrap()
    }

    #[test]
    fn identity_network() {
        let f = fmt(3, 0, RoundingMode::NearestHalfUp);
        let net = single(int(1), int(0), true);
        check(&net, &f);
        let a = FixedFnnNfa::new(&net, &f).unwrap();
        let words = accepted_words(&a, 1 << 20).unwrap();
        assert_eq!(words.len(), 8);
        // input -1 = 111, output 0 = 000
        assert!(words.contains(&vec![1, 1, 1]));
        assert_eq!(words.iter().filter(|w| w.iter().all(|s| s & 1 == 1)).count(), 1);
    }

    #[test]
    fn rounding_and_saturation() {
        for r in [RoundingMode::NearestHalfUp, RoundingMode::TowardNegative] {
            for (b, f) in [(4, 1), (4, 2), (3, 3), (5, 2), (4, 0)] {
                let fm = fmt(b, f, r);
                let af = ArithmeticFormat::Fixed(fm);
                for (w, bias) in [(rat(1, 2), rat(1, 4)), (int(3), int(-1)), (rat(-3, 4), rat(1, 2)), (int(-2), int(5))] {
                    for relu in [true, false] {
                        let net = single(w.clone(), bias.clone(), relu).quantise(&af);
                        check(&net, &fm);
                    }
                }
            }
        }
    }

    #[test]
    fn two_layers_with_saturation() {
        let fm = fmt(4, 1, RoundingMode::NearestHalfUp);
        let net = Network::new(
            vec![
                Layer::new(vec![vec![int(2)], vec![rat(-1, 2)]], vec![int(1), rat(1, 2)]),
                Layer::new(vec![vec![int(3), rat(-3, 2)]], vec![rat(-1, 2)]),
            ],
            true,
        )
        .unwrap();
        check(&net, &fm);
        let lin = Network::new(net.layers().to_vec(), false).unwrap();
        check(&lin, &fm);
    }

    #[test]
    fn two_inputs() {
        let fm = fmt(3, 1, RoundingMode::NearestHalfUp);
        let net = Network::new(
            vec![Layer::new(vec![vec![rat(1, 2), rat(-3, 2)], vec![int(1), int(1)]], vec![rat(1, 2), int(0)])],
            false,
        )
        .unwrap();
        check(&net, &fm);
    }

    #[test]
    fn rejects_unsupported() {
        let net = single(int(1), int(0), true);
        let wrap = FixedFormat::new(4, 1, RoundingMode::NearestHalfUp, OverflowMode::Wrap).unwrap();
        assert!(matches!(FixedFnnNfa::new(&net, &wrap), Err(Error::UnsupportedOverflow(_))));
        let trunc = fmt(4, 1, RoundingMode::TowardZero);
        assert!(matches!(FixedFnnNfa::new(&net, &trunc), Err(Error::UnsupportedRounding(_))));
        let third = single(rat(1, 3), int(0), true);
        assert!(matches!(
            FixedFnnNfa::new(&third, &fmt(4, 1, RoundingMode::NearestHalfUp)),
            Err(Error::UnquantisedNetwork(_))
        ));
    }

    #[test]
    fn weight_bits_match_encoding() {
        let fm = fmt(4, 1, RoundingMode::NearestHalfUp);
        let af = ArithmeticFormat::Fixed(fm);
        for w in [rat(3, 2), rat(-1, 2), rat(-4, 1)] {
            let a = FixedFnnNfa::new(&single(w.clone(), int(0), true), &fm).unwrap();
            let word = encode(&w, &af).unwrap();
            for t in 0..4 {
                assert_eq!(a.weight_bit(0, 0, 0, t).unwrap(), word.bit(t as usize));
            }
            assert!(a.weight_bit(0, 0, 0, 4).is_err());
            assert!(a.weight_bit(0, 1, 0, 0).is_err());
        }
    }

    #[test]
    fn witness_decodes_to_evaluation() {
        let fm = fmt(5, 2, RoundingMode::NearestHalfUp);
        let af = ArithmeticFormat::Fixed(fm);
        let net = single(rat(3, 4), rat(-1, 4), true);
        let a = FixedFnnNfa::new(&net, &fm).unwrap();
        let r = is_empty(&a, &Budget::default()).unwrap();
        let w = r.witness.unwrap();
        let bits = |k: usize| crate::arithmetic::BitWord::new(w.iter().map(|s| (s >> k) & 1 == 1).collect());
        let x = crate::arithmetic::decode(&bits(0), &af).unwrap();
        let y = crate::arithmetic::decode(&bits(1), &af).unwrap();
        assert_eq!(net.eval_quantised(&[x], &af).unwrap(), vec![y]);
        assert!(r.stats.max_descriptor <= a.descriptor_bound());
    }
}
