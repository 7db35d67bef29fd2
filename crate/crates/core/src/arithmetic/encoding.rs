//! Bit-level encodings of format values.
//!
//! Fixed-point words are two's complement, least-significant bit first: word
//! position `i` has weight `2^(i-f)`, the last position is the sign with
//! weight `-2^(b-1-f)`. Float words are `sign, exponent field (LSB first),
//! mantissa m_1..m_p (MSB first)`; zero is the all-zero word.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{pow2, ArithmeticFormat, FixedFormat, FloatFormat, Rational};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitWord {
    bits: Vec<bool>,
}

impl BitWord {
    pub fn new(bits: Vec<bool>) -> Self {
        BitWord { bits }
    }

    pub fn zeros(len: usize) -> Self {
        BitWord {
            bits: vec![false; len],
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// The word read as an unsigned integer with position `i` weighing `2^i`.
    /// This is the bit-vector value a BV variable sees.
    pub fn to_u128(&self) -> u128 {
        assert!(self.bits.len() <= 128, "word longer than 128 bits");
        self.bits
            .iter()
            .enumerate()
            .fold(0u128, |acc, (i, &b)| acc | ((b as u128) << i))
    }

    pub fn from_u128(value: u128, len: usize) -> Self {
        BitWord {
            bits: (0..len).map(|i| i < 128 && (value >> i) & 1 == 1).collect(),
        }
    }
}

impl fmt::Display for BitWord {
    /// Prints the word in reading order (position 0 first).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

pub fn encode(x: &Rational, fmt: &ArithmeticFormat) -> Result<BitWord> {
    if !fmt.contains(x) {
        return Err(Error::NotRepresentable {
            value: x.to_string(),
            format: fmt.to_string(),
        });
    }
    Ok(match fmt {
        ArithmeticFormat::Fixed(f) => encode_fixed(x, f),
        ArithmeticFormat::Float(f) => encode_float(x, f),
    })
}

pub fn decode(word: &BitWord, fmt: &ArithmeticFormat) -> Result<Rational> {
    if word.len() != fmt.word_len() {
        return Err(Error::WidthMismatch {
            expected: fmt.word_len(),
            got: word.len(),
        });
    }
    match fmt {
        ArithmeticFormat::Fixed(f) => Ok(decode_fixed(word, f)),
        ArithmeticFormat::Float(f) => decode_float(word, f),
    }
}

fn encode_fixed(x: &Rational, fmt: &FixedFormat) -> BitWord {
    let n = fmt.scaled(x).expect("representable value is on the grid");
    let b = fmt.total_bits() as u64;
    BitWord::new((0..b).map(|i| n.bit(i)).collect())
}

fn decode_fixed(word: &BitWord, fmt: &FixedFormat) -> Rational {
    let b = fmt.total_bits() as usize;
    let mut n = BigInt::zero();
    for (i, &bit) in word.bits().iter().enumerate() {
        if bit {
            let w = BigInt::one() << i;
            if i + 1 == b {
                n -= w;
            } else {
                n += w;
            }
        }
    }
    fmt.unscale(n)
}

fn encode_float(x: &Rational, fmt: &FloatFormat) -> BitWord {
    let e = fmt.exponent_bits() as usize;
    let p = fmt.mantissa_bits() as usize;
    let mut bits = vec![false; 1 + e + p];
    if x.is_zero() {
        return BitWord::new(bits);
    }
    bits[0] = x.is_negative();
    let mag = x.abs();
    let v = super::floor_log2(mag.numer().magnitude(), mag.denom().magnitude());
    let field = v + fmt.bias();
    for (i, bit) in bits[1..=e].iter_mut().enumerate() {
        *bit = (field >> i) & 1 == 1;
    }
    // significand·2^p is the integer 2^p + k
    let sig = (mag * pow2(p as i64 - v)).to_integer();
    for j in 1..=p {
        bits[e + j] = sig.bit((p - j) as u64);
    }
    BitWord::new(bits)
}

fn decode_float(word: &BitWord, fmt: &FloatFormat) -> Result<Rational> {
    let e = fmt.exponent_bits() as usize;
    let p = fmt.mantissa_bits() as usize;
    let bits = word.bits();
    let field: i64 = (0..e).map(|i| (bits[1 + i] as i64) << i).sum();
    let mantissa = &bits[1 + e..];
    if field == 0 {
        if bits[0] || mantissa.iter().any(|&b| b) {
            return Err(Error::MalformedWord(format!(
                "{word}: zero exponent field only encodes +0 in {fmt}"
            )));
        }
        return Ok(Rational::zero());
    }
    if field == (1 << e) - 1 {
        return Err(Error::MalformedWord(format!(
            "{word}: all-ones exponent field is reserved in {fmt}"
        )));
    }
    let mut sig = BigInt::one() << p;
    for (j, &m) in mantissa.iter().enumerate() {
        if m {
            sig += BigInt::one() << (p - 1 - j);
        }
    }
    let v = field - fmt.bias();
    let mag = Rational::from_integer(sig) * pow2(v - p as i64);
    Ok(if bits[0] { -mag } else { mag })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arithmetic::{getbit_float, int, rat, OverflowMode, RoundingMode};

    fn fixed(b: u32, f: u32) -> ArithmeticFormat {
        ArithmeticFormat::fixed(b, f, RoundingMode::NearestHalfUp, OverflowMode::Saturate).unwrap()
    }

    fn float(p: u32, e: u32) -> ArithmeticFormat {
        ArithmeticFormat::float(p, e, RoundingMode::NearestHalfUp).unwrap()
    }

    // Decoding formula evaluated directly from the word positions.
    fn fixed_formula(word: &BitWord, b: usize, f: usize) -> Rational {
        let mut x = int(0);
        for (i, &bit) in word.bits().iter().enumerate() {
            if bit {
                let w = pow2(i as i64 - f as i64);
                x += if i == b - 1 { -w } else { w };
            }
        }
        x
    }

    #[test]
    fn fixed_examples() {
        let fmt = fixed(4, 1);
        let w = encode(&int(-4), &fmt).unwrap();
        assert_eq!(w.to_string(), "0001");
        assert_eq!(fixed_formula(&w, 4, 1), int(-4));
        assert_eq!(decode(&w, &fmt).unwrap(), int(-4));
        assert_eq!(decode(&BitWord::zeros(4), &fmt).unwrap(), int(0));
        assert_eq!(encode(&rat(3, 2), &fmt).unwrap().to_string(), "1100");
        assert!(encode(&rat(1, 4), &fmt).is_err());
        assert!(encode(&int(4), &fmt).is_err());
    }

    #[test]
    fn float_example() {
        let fmt = float(1, 2);
        let w = encode(&rat(3, 2), &fmt).unwrap();
        // sign 0, field 0 + bias 1 = 01 (LSB first: 1,0), m1 = 1
        assert_eq!(w.to_string(), "0101");
        assert_eq!(decode(&w, &fmt).unwrap(), rat(3, 2));
        assert_eq!(encode(&int(0), &fmt).unwrap(), BitWord::zeros(4));
    }

    #[test]
    fn fixed_round_trip_exhaustive() {
        for b in 1..=8u32 {
            for f in 0..=b {
                let fmt = fixed(b, f);
                let mut seen = std::collections::HashSet::new();
                for x in fmt.values() {
                    let w = encode(&x, &fmt).unwrap();
                    assert_eq!(fixed_formula(&w, b as usize, f as usize), x);
                    assert_eq!(decode(&w, &fmt).unwrap(), x);
                    assert!(seen.insert(w));
                }
                // every word is well formed and round-trips the other way
                for v in 0..(1u128 << b) {
                    let w = BitWord::from_u128(v, b as usize);
                    assert_eq!(encode(&decode(&w, &fmt).unwrap(), &fmt).unwrap(), w);
                }
            }
        }
    }

    #[test]
    fn float_round_trip_exhaustive() {
        for e in 2..=5u32 {
            for p in 1..=(6 - e.min(5)).max(1) {
                let fmt = float(p, e);
                let ArithmeticFormat::Float(ff) = &fmt else { unreachable!() };
                let len = fmt.word_len();
                let mut decoded = 0usize;
                for v in 0..(1u128 << len) {
                    let w = BitWord::from_u128(v, len);
                    if let Ok(x) = decode(&w, &fmt) {
                        decoded += 1;
                        assert_eq!(encode(&x, &fmt).unwrap(), w);
                    }
                }
                assert_eq!(BigInt::from(decoded), fmt.cardinality());
                for x in fmt.values() {
                    let w = encode(&x, &fmt).unwrap();
                    assert_eq!(decode(&w, &fmt).unwrap(), x);
                    if !x.is_zero() {
                        for pos in 0..len {
                            assert_eq!(getbit_float(x.numer(), x.denom(), ff, pos), w.bit(pos));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn malformed_float_words() {
        let fmt = float(2, 2);
        // negative zero
        assert!(decode(&BitWord::new(vec![true, false, false, false, false]), &fmt).is_err());
        // subnormal pattern
        assert!(decode(&BitWord::new(vec![false, false, false, true, false]), &fmt).is_err());
        // all-ones exponent
        assert!(decode(&BitWord::new(vec![false, true, true, false, false]), &fmt).is_err());
        assert!(decode(&BitWord::zeros(3), &fmt).is_err());
    }
}
