//! Feedforward ReLU networks with exact and format-level semantics.
//!
//! Text format (`#` starts a comment):
//!
//! ```text
//! format=1
//! fnn k=2 dims=2,2,1 final=relu
//! layer 1
//! 1 -1/2
//! 0 3/4
//! bias 0 1/4
//! layer 2
//! 1 1
//! bias -1
//! ```
//!
//! `dims` lists the input dimension followed by every layer's size. Each layer
//! block has one row per neuron (as many entries as the previous dimension)
//! and a `bias` row. `final=linear` drops the ReLU after the last layer.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};

use crate::arithmetic::{parse_rational, ArithmeticFormat, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    /// One row per neuron.
    pub weights: Vec<Vec<Rational>>,
    pub bias: Vec<Rational>,
}

impl Layer {
    pub fn new(weights: Vec<Vec<Rational>>, bias: Vec<Rational>) -> Self {
        Layer { weights, bias }
    }

    pub fn inputs(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn outputs(&self) -> usize {
        self.bias.len()
    }

    /// Exact pre-activation of neuron `i`.
    pub fn affine(&self, i: usize, x: &[Rational]) -> Rational {
        self.weights[i]
            .iter()
            .zip(x)
            .fold(self.bias[i].clone(), |acc, (w, v)| acc + w * v)
    }
}

/// How a quantised neuron computes its pre-activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Semantics {
    /// Exact affine sum, quantised once per neuron.
    #[default]
    PerNeuron,
    /// Every product and every partial sum is quantised, left to right.
    PerOperation,
}

/// One bit per ReLU node in layer-major order; `true` = identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActivationPattern(pub Vec<bool>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    layers: Vec<Layer>,
    final_relu: bool,
}

fn relu(x: Rational) -> Rational {
    if x.is_negative() {
        Rational::zero()
    } else {
        x
    }
}

impl Network {
    pub fn new(layers: Vec<Layer>, final_relu: bool) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        let mut prev = layers[0].inputs();
        for layer in &layers {
            if layer.outputs() == 0 || layer.weights.len() != layer.outputs() {
                return Err(Error::DimensionMismatch {
                    expected: layer.outputs().max(1),
                    got: layer.weights.len(),
                });
            }
            for row in &layer.weights {
                if row.len() != prev || prev == 0 {
                    return Err(Error::DimensionMismatch {
                        expected: prev,
                        got: row.len(),
                    });
                }
            }
            prev = layer.outputs();
        }
        Ok(Network { layers, final_relu })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().outputs()
    }

    pub fn final_relu(&self) -> bool {
        self.final_relu
    }

    /// Input dimension followed by every layer size.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Layer::outputs))
            .collect()
    }

    pub fn has_relu(&self, layer: usize) -> bool {
        layer + 1 < self.layers.len() || self.final_relu
    }

    pub fn relu_count(&self) -> usize {
        (0..self.depth())
            .filter(|&l| self.has_relu(l))
            .map(|l| self.layers[l].outputs())
            .sum()
    }

    fn check_input(&self, x: &[Rational]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn eval_rational(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        self.check_input(x)?;
        let mut cur = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            cur = (0..layer.outputs())
                .map(|i| {
                    let z = layer.affine(i, &cur);
                    if self.has_relu(l) {
                        relu(z)
                    } else {
                        z
                    }
                })
                .collect();
        }
        Ok(cur)
    }

    pub fn eval_quantised(&self, x: &[Rational], fmt: &ArithmeticFormat) -> Result<Vec<Rational>> {
        self.eval_quantised_with(x, fmt, Semantics::PerNeuron)
    }

    pub fn eval_quantised_with(
        &self,
        x: &[Rational],
        fmt: &ArithmeticFormat,
        semantics: Semantics,
    ) -> Result<Vec<Rational>> {
        self.check_input(x)?;
        if !self.is_quantised(fmt) {
            return Err(Error::UnquantisedNetwork(fmt.to_string()));
        }
        if let Some(index) = x.iter().position(|v| !fmt.contains(v)) {
            return Err(Error::UnrepresentableInput {
                index,
                format: fmt.to_string(),
            });
        }
        let mut cur = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            cur = (0..layer.outputs())
                .map(|i| {
                    let z = match semantics {
                        Semantics::PerNeuron => fmt.quantize(&layer.affine(i, &cur)),
                        Semantics::PerOperation => {
                            let mut acc: Option<Rational> = None;
                            for (w, v) in layer.weights[i].iter().zip(&cur) {
                                let term = fmt.quantize(&(w * v));
                                acc = Some(match acc {
                                    None => term,
                                    Some(a) => fmt.quantize(&(a + term)),
                                });
                            }
                            fmt.quantize(&(acc.unwrap_or_default() + &layer.bias[i]))
                        }
                    };
                    if self.has_relu(l) {
                        relu(z)
                    } else {
                        z
                    }
                })
                .collect();
        }
        Ok(cur)
    }

    /// Replaces every parameter by its quantised value.
    pub fn quantise(&self, fmt: &ArithmeticFormat) -> Network {
        let layers = self
            .layers
            .iter()
            .map(|layer| Layer {
                weights: layer
                    .weights
                    .iter()
                    .map(|row| row.iter().map(|w| fmt.quantize(w)).collect())
                    .collect(),
                bias: layer.bias.iter().map(|b| fmt.quantize(b)).collect(),
            })
            .collect();
        Network {
            layers,
            final_relu: self.final_relu,
        }
    }

    pub fn is_quantised(&self, fmt: &ArithmeticFormat) -> bool {
        self.layers.iter().all(|layer| {
            layer.bias.iter().all(|b| fmt.contains(b))
                && layer.weights.iter().flatten().all(|w| fmt.contains(w))
        })
    }

    /// The pattern induced by exact evaluation: a node is active iff its
    /// pre-activation is non-negative.
    pub fn pattern_of(&self, x: &[Rational]) -> Result<ActivationPattern> {
        self.check_input(x)?;
        let mut bits = Vec::with_capacity(self.relu_count());
        let mut cur = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let pre: Vec<Rational> = (0..layer.outputs()).map(|i| layer.affine(i, &cur)).collect();
            if self.has_relu(l) {
                bits.extend(pre.iter().map(|z| !z.is_negative()));
                cur = pre.into_iter().map(relu).collect();
            } else {
                cur = pre;
            }
        }
        Ok(ActivationPattern(bits))
    }

    /// Evaluates with every ReLU node fixed by `pattern` (identity or zero),
    /// and reports whether the pattern agrees with the true pre-activation
    /// signs (`>= 0` for active, `<= 0` for inactive).
    pub fn eval_with_pattern(
        &self,
        x: &[Rational],
        pattern: &ActivationPattern,
    ) -> Result<(Vec<Rational>, bool)> {
        self.check_input(x)?;
        if pattern.0.len() != self.relu_count() {
            return Err(Error::DimensionMismatch {
                expected: self.relu_count(),
                got: pattern.0.len(),
            });
        }
        let mut node = 0;
        let mut consistent = true;
        let mut cur = x.to_vec();
        for (l, layer) in self.layers.iter().enumerate() {
            let mut next = Vec::with_capacity(layer.outputs());
            for i in 0..layer.outputs() {
                let z = layer.affine(i, &cur);
                if self.has_relu(l) {
                    let active = pattern.0[node];
                    node += 1;
                    consistent &= if active { !z.is_negative() } else { !z.is_positive() };
                    next.push(if active { z } else { Rational::zero() });
                } else {
                    next.push(z);
                }
            }
            cur = next;
        }
        Ok((cur, consistent))
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.dims().iter().map(ToString::to_string).collect();
        writeln!(f, "format=1")?;
        writeln!(
            f,
            "fnn k={} dims={} final={}",
            self.depth(),
            dims.join(","),
            if self.final_relu { "relu" } else { "linear" }
        )?;
        for (l, layer) in self.layers.iter().enumerate() {
            writeln!(f, "layer {}", l + 1)?;
            for row in &layer.weights {
                let row: Vec<String> = row.iter().map(ToString::to_string).collect();
                writeln!(f, "{}", row.join(" "))?;
            }
            let bias: Vec<String> = layer.bias.iter().map(ToString::to_string).collect();
            writeln!(f, "bias {}", bias.join(" "))?;
        }
        Ok(())
    }
}

/// Strips comments and blank lines, keeping 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_row(line_no: usize, text: &str) -> Result<Vec<Rational>> {
    text.split_whitespace()
        .map(|tok| {
            parse_rational(tok).map_err(|_| Error::syntax(line_no, 1, format!("invalid rational `{tok}`")))
        })
        .collect()
}

impl FromStr for Network {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = content_lines(text).peekable();
        if let Some((_, l)) = lines.peek() {
            if l.starts_with("format=") {
                let (n, l) = lines.next().unwrap();
                if l != "format=1" {
                    return Err(Error::syntax(n, 1, format!("unsupported `{l}`")));
                }
            }
        }
        let (hn, header) = lines
            .next()
            .ok_or_else(|| Error::syntax(1, 1, "missing `fnn` header"))?;
        let mut words = header.split_whitespace();
        if words.next() != Some("fnn") {
            return Err(Error::syntax(hn, 1, "expected `fnn k=<depth> dims=<...>`"));
        }
        let (mut depth, mut dims, mut final_relu) = (None, None, true);
        for w in words {
            match w.split_once('=') {
                Some(("k", v)) => {
                    depth = Some(v.parse::<usize>().map_err(|_| Error::syntax(hn, 1, "bad depth"))?)
                }
                Some(("dims", v)) => {
                    dims = Some(
                        v.split(',')
                            .map(|d| d.parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| Error::syntax(hn, 1, "bad dims list"))?,
                    )
                }
                Some(("final", "relu")) => final_relu = true,
                Some(("final", "linear")) => final_relu = false,
                _ => return Err(Error::syntax(hn, 1, format!("unexpected header field `{w}`"))),
            }
        }
        let depth = depth.ok_or_else(|| Error::syntax(hn, 1, "missing k="))?;
        let dims = dims.ok_or_else(|| Error::syntax(hn, 1, "missing dims="))?;
        if depth == 0 || dims.len() != depth + 1 || dims.contains(&0) {
            return Err(Error::syntax(hn, 1, "dims must list k+1 positive sizes"));
        }
        let mut layers = Vec::with_capacity(depth);
        for l in 0..depth {
            let (n, line) = lines
                .next()
                .ok_or_else(|| Error::syntax(hn, 1, format!("missing layer {}", l + 1)))?;
            if line != format!("layer {}", l + 1) {
                return Err(Error::syntax(n, 1, format!("expected `layer {}`", l + 1)));
            }
            let mut weights = Vec::with_capacity(dims[l + 1]);
            for _ in 0..dims[l + 1] {
                let (n, line) = lines
                    .next()
                    .ok_or_else(|| Error::syntax(n, 1, "missing weight row"))?;
                let row = parse_row(n, line)?;
                if row.len() != dims[l] {
                    return Err(Error::syntax(
                        n,
                        1,
                        format!("expected {} weights, found {}", dims[l], row.len()),
                    ));
                }
                weights.push(row);
            }
            let (n, line) = lines
                .next()
                .ok_or_else(|| Error::syntax(n, 1, "missing bias row"))?;
            let rest = line
                .strip_prefix("bias")
                .ok_or_else(|| Error::syntax(n, 1, "expected `bias ...`"))?;
            let bias = parse_row(n, rest)?;
            if bias.len() != dims[l + 1] {
                return Err(Error::syntax(
                    n,
                    1,
                    format!("expected {} biases, found {}", dims[l + 1], bias.len()),
                ));
            }
            layers.push(Layer { weights, bias });
        }
        if let Some((n, _)) = lines.next() {
            return Err(Error::syntax(n, 1, "trailing content after last layer"));
        }
        Network::new(layers, final_relu)
    }
}
