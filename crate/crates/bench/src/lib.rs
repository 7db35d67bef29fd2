//! Fixtures shared by the benchmarks.

use quantreach::arithmetic::{rat, ArithmeticFormat};
use quantreach::network::{Layer, Network};
use quantreach::reduction::{parse_dimacs, Cnf3};
use quantreach::spec::BvSpec;

/// Two inputs, a hidden layer of two and one output, with weights on the
/// grid of `fix:b=5,f=2`.
pub fn small_net() -> Network {
    Network::new(
        vec![
            Layer::new(vec![vec![rat(3, 4), rat(-1, 2)], vec![rat(1, 4), rat(1, 1)]], vec![rat(1, 4), rat(-1, 2)]),
            Layer::new(vec![vec![rat(1, 1), rat(-3, 4)]], vec![rat(0, 1)]),
        ],
        true,
    )
    .expect("consistent shapes")
}

pub fn fixed_format() -> ArithmeticFormat {
    "fix:b=5,f=2,round=nearest,ovf=sat".parse().expect("valid format")
}

pub fn float_format() -> ArithmeticFormat {
    "float:m=3,e=2,round=nearest".parse().expect("valid format")
}

/// `x1 != x2` on the input side and an impossible output value on the
/// other, so every backend has to cover the whole space.
pub fn unsat_specs(width: usize) -> (BvSpec, BvSpec) {
    let vars = |p: &str| vec![format!("{p}1"), format!("{p}2")];
    let phi_in = BvSpec::parse("x1 != x2", width, &vars("x")).expect("parses");
    let never = (1u128 << (width - 1)) | 1;
    let phi_out = BvSpec::parse(&format!("y1 = {never} /\\ y1 != {never}"), width, &["y1".to_string()])
        .expect("parses");
    (phi_in, phi_out)
}

pub fn unsat_cnf() -> Cnf3 {
    parse_dimacs("p cnf 3 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n").expect("valid DIMACS")
}
