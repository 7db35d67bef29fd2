use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigInt;
use quantreach::arithmetic::{getbit_fixed, Rational};
use quantreach::automata::fixed::FixedFnnNfa;
use quantreach::automata::accepted_words;
use quantreach::reduction::reduce;
use quantreach::verifier::{reach_bv, reach_q_lp, Backend, Limits};
use quantreach_bench::{fixed_format, float_format, small_net, unsat_cnf, unsat_specs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn quantize(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let xs: Vec<Rational> = (0..256)
        .map(|_| Rational::new(rng.gen_range(-4000..4000).into(), rng.gen_range(1..500).into()))
        .collect();
    let mut g = c.benchmark_group("quantize");
    for fmt in [fixed_format(), float_format()] {
        g.bench_with_input(BenchmarkId::from_parameter(fmt), &fmt, |b, fmt| {
            b.iter(|| xs.iter().map(|x| fmt.quantize(x)).collect::<Vec<_>>())
        });
    }
    g.finish();
}

fn getbit(c: &mut Criterion) {
    let p = BigInt::from(-0x1234_5678_9abc_i64);
    let q = BigInt::from(0xf_edcb_a987_i64);
    c.bench_function("getbit_fixed/t=-2^20", |b| b.iter(|| getbit_fixed(black_box(&p), &q, -(1 << 20))));
}

fn reach(c: &mut Criterion) {
    let net = small_net();
    let limits = Limits::default();
    let mut g = c.benchmark_group("reach_bv_unsat");
    g.sample_size(10);
    for fmt in [fixed_format(), float_format()] {
        let (phi_in, phi_out) = unsat_specs(fmt.word_len());
        for backend in [Backend::Brute, Backend::Automata] {
            let id = BenchmarkId::new(backend.name(), fmt);
            g.bench_function(id, |b| {
                b.iter(|| reach_bv(&net, &phi_in, &phi_out, &fmt, backend, &limits).expect("runs"))
            });
        }
    }
    g.finish();

    let fmt = match fixed_format() {
        quantreach::arithmetic::ArithmeticFormat::Fixed(f) => f,
        _ => unreachable!(),
    };
    let automaton = FixedFnnNfa::new(&net, &fmt).expect("supported");
    c.bench_function("fixed_automaton/enumerate_language", |b| {
        b.iter(|| accepted_words(&automaton, 1 << 20).expect("fits").len())
    });

    let inst = reduce(&unsat_cnf());
    let mut g = c.benchmark_group("pattern_lp");
    g.sample_size(10);
    g.bench_function("reduction_unsat_3vars_4clauses", |b| {
        b.iter(|| reach_q_lp(&inst.network, &inst.input_spec, &inst.output_spec, &limits).expect("runs"))
    });
    g.finish();
}

criterion_group!(benches, quantize, getbit, reach);
criterion_main!(benches);
