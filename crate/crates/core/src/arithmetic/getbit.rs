//! Polynomial-time bit extraction from rationals `p/q`.
//!
//! Positions are addressed by a signed weight index `t` (the bit of weight
//! `2^t`), so a fractional bit `i` is `t = -i`. Fractional bits are computed
//! with modular exponentiation; `2^i` is never materialised.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::FloatFormat;

/// `floor(log2(num/den))` for positive `num`, `den`.
pub fn floor_log2(num: &BigUint, den: &BigUint) -> i64 {
    assert!(!num.is_zero() && !den.is_zero(), "floor_log2 of zero");
    let v = num.bits() as i64 - den.bits() as i64;
    // 2^v <= num/den  <=>  num >= den·2^v
    let holds = if v >= 0 {
        num >= &(den << v as u64)
    } else {
        &(num << (-v) as u64) >= den
    };
    if holds {
        v
    } else {
        v - 1
    }
}

/// Bit of weight `2^t` in the two's complement expansion of `p/q`, truncated
/// toward negative infinity. `q` must be positive.
pub fn getbit_fixed(p: &BigInt, q: &BigInt, t: i64) -> bool {
    assert!(q.is_positive(), "getbit_fixed needs a positive denominator");
    if t >= 0 {
        let integer = p.div_floor(q);
        let t = t as u64;
        if t > integer.bits() {
            return integer.is_negative();
        }
        return integer.bit(t);
    }
    // Fractional bit i of frac(p/q) = (p mod q)/q:
    //   r = (p mod q)·2^(i-1) mod q,  bit = [2r >= q]
    let i = BigInt::from(-t);
    let rem = p.mod_floor(q);
    let r = (rem * BigInt::from(2u8).modpow(&(i - 1), q)).mod_floor(q);
    r * 2 >= *q
}

/// Bit at `position` of the float word `sign, exponent (LSB first), mantissa
/// (MSB first)` for the value `p/q`, without rounding: mantissa bits are
/// truncated bits of `|p/q|`. Exponent overflow yields all-ones exponent bits
/// and a zero mantissa, underflow yields zeros. `p` must be non-zero.
pub fn getbit_float(p: &BigInt, q: &BigInt, fmt: &FloatFormat, position: usize) -> bool {
    assert!(!p.is_zero(), "getbit_float is undefined for zero");
    assert!(q.is_positive(), "getbit_float needs a positive denominator");
    let e = fmt.exponent_bits() as usize;
    if position == 0 {
        return p.sign() == Sign::Minus;
    }
    let v = floor_log2(p.magnitude(), q.magnitude());
    let field = v + fmt.bias();
    let overflow = v > fmt.max_exponent();
    let underflow = v < fmt.min_exponent();
    if position <= e {
        if overflow {
            return true;
        }
        if underflow {
            return false;
        }
        return (field >> (position - 1)) & 1 == 1;
    }
    if overflow || underflow {
        return false;
    }
    let j = (position - e) as i64;
    getbit_fixed(&p.abs(), q, v - j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::RoundingMode;
    use num_traits::One;

    fn b(x: i64) -> BigInt {
        BigInt::from(x)
    }

    // Long division with the full expansion materialised.
    fn naive(p: &BigInt, q: &BigInt, t: i64) -> bool {
        let scaled = if t >= 0 {
            p.div_floor(&(q << t as u64))
        } else {
            (p << (-t) as u64).div_floor(q)
        };
        scaled.mod_floor(&b(2)) == BigInt::one()
    }

    #[test]
    fn fixed_examples() {
        assert!(!getbit_fixed(&b(1), &b(3), -1));
        assert!(getbit_fixed(&b(1), &b(3), -2));
        assert!(getbit_fixed(&b(5), &b(1), 0));
        assert!(!getbit_fixed(&b(5), &b(1), 1));
        assert!(getbit_fixed(&b(5), &b(1), 2));
        assert!(!getbit_fixed(&b(5), &b(1), 50));
        assert!(getbit_fixed(&b(-1), &b(2), -1));
        assert!(getbit_fixed(&b(-1), &b(2), 0));
        assert!(getbit_fixed(&b(-1), &b(2), 1000));
    }

    #[test]
    fn fixed_matches_naive_small() {
        for p in -40..40 {
            for q in 1..12 {
                for t in -12..10 {
                    assert_eq!(getbit_fixed(&b(p), &b(q), t), naive(&b(p), &b(q), t), "{p}/{q} @ {t}");
                }
            }
        }
    }

    #[test]
    fn floor_log2_cases() {
        let u = |x: u64| BigUint::from(x);
        assert_eq!(floor_log2(&u(1), &u(1)), 0);
        assert_eq!(floor_log2(&u(3), &u(2)), 0);
        assert_eq!(floor_log2(&u(1), &u(3)), -2);
        assert_eq!(floor_log2(&u(1), &u(4)), -2);
        assert_eq!(floor_log2(&u(5), &u(1)), 2);
        assert_eq!(floor_log2(&u(8), &u(1)), 3);
    }

    #[test]
    fn float_examples() {
        let fmt = FloatFormat::new(3, 3, RoundingMode::NearestHalfUp).unwrap();
        let e = 3;
        // 3/2 = 1.1b: m1 = 1
        assert!(getbit_float(&b(3), &b(2), &fmt, e + 1));
        assert!(getbit_float(&b(-1), &b(1), &fmt, 0));
        assert!(!getbit_float(&b(1), &b(1), &fmt, 0));
        // 5 = 1.01b · 2^2: mantissa 0 1 0
        assert!(!getbit_float(&b(5), &b(1), &fmt, e + 1));
        assert!(getbit_float(&b(5), &b(1), &fmt, e + 2));
        assert!(!getbit_float(&b(5), &b(1), &fmt, e + 3));
        // exponent field of 5: 2 + bias 3 = 5 = 101b, LSB first
        assert!(getbit_float(&b(5), &b(1), &fmt, 1));
        assert!(!getbit_float(&b(5), &b(1), &fmt, 2));
        assert!(getbit_float(&b(5), &b(1), &fmt, 3));
        // overflow and underflow conventions
        assert!(getbit_float(&b(1000), &b(1), &fmt, 2));
        assert!(!getbit_float(&b(1000), &b(1), &fmt, e + 1));
        assert!(!getbit_float(&b(1), &b(1000), &fmt, 1));
    }
}
