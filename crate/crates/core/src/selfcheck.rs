//! Random instance families and the cross-backend agreement suite.

use num_traits::Signed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::arithmetic::{ArithmeticFormat, FixedFormat, FloatFormat, OverflowMode, Rational, RoundingMode};
use crate::error::Result;
use crate::network::{Layer, Network};
use crate::spec::{BvFormula, BvSpec, BvTerm};
use crate::verifier::{reach_bv, Backend, Limits, Report, Verdict};

#[derive(Debug, Clone)]
pub struct BvInstance {
    pub net: Network,
    pub phi_in: BvSpec,
    pub phi_out: BvSpec,
    pub fmt: ArithmeticFormat,
}

/// Fixed-point formats with `b + f <= 6`, saturating.
pub fn random_fixed_format(rng: &mut impl Rng) -> FixedFormat {
    let (b, f) = loop {
        let b = rng.gen_range(2..=6u32);
        let f = rng.gen_range(0..=b);
        if b + f <= 6 {
            break (b, f);
        }
    };
    let rounding = if rng.gen_bool(0.5) {
        RoundingMode::NearestHalfUp
    } else {
        RoundingMode::TowardNegative
    };
    FixedFormat::new(b, f, rounding, OverflowMode::Saturate).expect("valid format")
}

pub fn random_float_format(rng: &mut impl Rng, max_p: u32) -> FloatFormat {
    FloatFormat::new(rng.gen_range(1..=max_p), 2, RoundingMode::NearestHalfUp).expect("valid format")
}

/// A network with parameters drawn from the format's values, biased toward
/// small magnitudes.
pub fn random_network(rng: &mut impl Rng, fmt: &ArithmeticFormat, inputs: usize, widths: &[usize]) -> Network {
    let mut values = fmt.values();
    values.sort_by_key(|v| v.abs());
    let small = values.len().div_ceil(2).max(1);
    let pick = |rng: &mut dyn rand::RngCore| -> Rational {
        let pool = if rng.gen_bool(0.8) { &values[..small] } else { &values[..] };
        pool.choose(rng).expect("non-empty").clone()
    };
    let mut layers = Vec::new();
    let mut prev = inputs;
    for &w in widths {
        let weights = (0..w).map(|_| (0..prev).map(|_| pick(rng)).collect()).collect();
        let bias = (0..w).map(|_| pick(rng)).collect();
        layers.push(Layer::new(weights, bias));
        prev = w;
    }
    Network::new(layers, rng.gen_bool(0.5)).expect("consistent shapes")
}

/// Input dimension 1 or 2, one or two layers of at most 3 neurons.
pub fn random_shape(rng: &mut impl Rng) -> (usize, Vec<usize>) {
    let d = rng.gen_range(1..=2);
    let depth = rng.gen_range(1..=2);
    let widths = (0..depth).map(|_| rng.gen_range(1..=3)).collect();
    (d, widths)
}

fn random_term(rng: &mut impl Rng, vars: usize, width: usize, depth: u32) -> BvTerm {
    let mask = if width >= 128 { u128::MAX } else { (1u128 << width) - 1 };
    if depth == 0 || rng.gen_bool(0.4) {
        return if rng.gen_bool(0.7) {
            BvTerm::Var(rng.gen_range(0..vars))
        } else {
            BvTerm::Const(rng.gen::<u128>() & mask)
        };
    }
    let op = rng.gen_range(0..4);
    let mut sub = || Box::new(random_term(rng, vars, width, depth - 1));
    match op {
        0 => BvTerm::Not(sub()),
        1 => BvTerm::And(sub(), sub()),
        2 => BvTerm::Or(sub(), sub()),
        _ => BvTerm::Xor(sub(), sub()),
    }
}

pub fn random_formula(rng: &mut impl Rng, vars: usize, width: usize, depth: u32) -> BvFormula {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..12) {
            0 => BvFormula::True,
            1 => BvFormula::False,
            _ => BvFormula::Eq(random_term(rng, vars, width, 2), random_term(rng, vars, width, 2)),
        };
    }
    let op = rng.gen_range(0..3);
    let mut sub = || Box::new(random_formula(rng, vars, width, depth - 1));
    match op {
        0 => BvFormula::Not(sub()),
        1 => BvFormula::And(sub(), sub()),
        _ => BvFormula::Or(sub(), sub()),
    }
}

fn named(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// One instance of the fixed-point agreement family.
pub fn random_fixed_instance(rng: &mut impl Rng) -> BvInstance {
    let fmt = ArithmeticFormat::Fixed(random_fixed_format(rng));
    let (d, widths) = random_shape(rng);
    let net = random_network(rng, &fmt, d, &widths);
    let len = fmt.word_len();
    let m = net.output_dim();
    let phi_in = BvSpec::new(len, named("x", d), random_formula(rng, d, len, 2)).expect("in range");
    let phi_out = BvSpec::new(len, named("y", m), random_formula(rng, m, len, 2)).expect("in range");
    BvInstance {
        net,
        phi_in,
        phi_out,
        fmt,
    }
}

#[derive(Debug, Clone)]
pub struct Agreement {
    pub index: usize,
    pub instance: BvInstance,
    pub brute: Report,
    pub automata: Report,
}

impl Agreement {
    /// Both backends settled the instance and gave the same verdict.
    pub fn agrees(&self) -> bool {
        !self.brute.verdict.is_resource() && self.brute.verdict == self.automata.verdict
    }

    pub fn valid(&self) -> bool {
        self.brute.verdict == Verdict::Valid
    }
}

/// Runs `count` random fixed-point instances from `seed` on both BV
/// backends. Instances run in parallel; results come back in index order.
pub fn agreement_suite(count: usize, seed: u64, limits: &Limits) -> Result<Vec<Agreement>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let instances: Vec<BvInstance> = (0..count).map(|_| random_fixed_instance(&mut rng)).collect();
    instances
        .into_par_iter()
        .enumerate()
        .map(|(index, instance)| {
            let run = |b| reach_bv(&instance.net, &instance.phi_in, &instance.phi_out, &instance.fmt, b, limits);
            let brute = run(Backend::Brute)?;
            let automata = run(Backend::Automata)?;
            Ok(Agreement {
                index,
                instance,
                brute,
                automata,
            })
        })
        .collect()
}
