//! Exact rationals and the finite-width number formats built on top of them.
//!
//! A format defines a finite set of representable rationals together with a
//! rounding map onto an (unbounded) grid and a range map (overflow for
//! fixed-point, saturation/flush-to-zero for floating-point). Every format-level
//! operation is "compute exactly, then quantise".

mod encoding;
mod getbit;

pub use encoding::{decode, encode, BitWord};
pub use getbit::{floor_log2, getbit_fixed, getbit_float};

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational, always kept in canonical form.
pub type Rational = BigRational;

/// Builds `num/den` as a canonical rational. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^k` for any signed `k`.
pub fn pow2(k: i64) -> Rational {
    let mag = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

/// Parses `p/q`, an integer, or a finite decimal `i.d` (optionally signed).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::syntax(1, 1, format!("invalid rational literal `{text}`"));
    if let Some((i, d)) = text.split_once('.') {
        if d.is_empty() || !d.bytes().all(|c| c.is_ascii_digit()) || text.contains('/') {
            return Err(bad());
        }
        let digits: BigInt = format!("{i}{d}").parse().map_err(|_| bad())?;
        return Ok(Rational::new(digits, num_traits::pow(BigInt::from(10), d.len())));
    }
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::DivisionByZero);
    }
    Ok(Rational::new(num, den))
}

/// Rational `x · 2^k`.
pub(crate) fn shift(x: &Rational, k: i64) -> Rational {
    x * pow2(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundingMode {
    /// Floor onto the grid.
    TowardNegative,
    /// Truncate toward zero.
    TowardZero,
    /// Nearest grid point, exact halves go toward +infinity.
    NearestHalfUp,
}

impl RoundingMode {
    /// Rounds `x` to an integer under this mode.
    pub fn round_to_integer(self, x: &Rational) -> BigInt {
        match self {
            RoundingMode::TowardNegative => x.floor().to_integer(),
            RoundingMode::TowardZero => x.trunc().to_integer(),
            RoundingMode::NearestHalfUp => (x + rat(1, 2)).floor().to_integer(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            RoundingMode::TowardNegative => "floor",
            RoundingMode::TowardZero => "trunc",
            RoundingMode::NearestHalfUp => "nearest",
        }
    }
}

impl fmt::Display for RoundingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RoundingMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "floor" => Ok(RoundingMode::TowardNegative),
            "trunc" => Ok(RoundingMode::TowardZero),
            "nearest" => Ok(RoundingMode::NearestHalfUp),
            other => Err(Error::InvalidFormat(format!("unknown rounding mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OverflowMode {
    Saturate,
    Wrap,
}

impl fmt::Display for OverflowMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OverflowMode::Saturate => "sat",
            OverflowMode::Wrap => "wrap",
        })
    }
}

impl FromStr for OverflowMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sat" => Ok(OverflowMode::Saturate),
            "wrap" => Ok(OverflowMode::Wrap),
            other => Err(Error::InvalidFormat(format!("unknown overflow mode `{other}`"))),
        }
    }
}

/// Signed fixed-point numbers `n / 2^f` with `n` a `b`-bit two's complement integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixedFormat {
    total_bits: u32,
    frac_bits: u32,
    pub rounding: RoundingMode,
    pub overflow: OverflowMode,
}

impl FixedFormat {
    pub fn new(
        total_bits: u32,
        frac_bits: u32,
        rounding: RoundingMode,
        overflow: OverflowMode,
    ) -> Result<Self> {
        if total_bits == 0 {
            return Err(Error::InvalidFormat("fixed-point needs at least one bit".into()));
        }
        if frac_bits > total_bits {
            return Err(Error::InvalidFormat(format!(
                "fractional bits {frac_bits} exceed total bits {total_bits}"
            )));
        }
        Ok(FixedFormat {
            total_bits,
            frac_bits,
            rounding,
            overflow,
        })
    }

    pub fn total_bits(&self) -> u32 {
        self.total_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn min_scaled(&self) -> BigInt {
        -(BigInt::one() << (self.total_bits - 1))
    }

    pub fn max_scaled(&self) -> BigInt {
        (BigInt::one() << (self.total_bits - 1)) - 1
    }

    pub fn min_value(&self) -> Rational {
        self.unscale(self.min_scaled())
    }

    pub fn max_value(&self) -> Rational {
        self.unscale(self.max_scaled())
    }

    pub fn unscale(&self, n: BigInt) -> Rational {
        Rational::new(n, BigInt::one() << self.frac_bits)
    }

    /// The scaled integer `x · 2^f`, if `x` lies on the grid.
    pub fn scaled(&self, x: &Rational) -> Option<BigInt> {
        let s = shift(x, self.frac_bits as i64);
        s.is_integer().then(|| s.to_integer())
    }

    /// Rounds onto the unbounded grid of multiples of `2^-f`.
    pub fn round(&self, x: &Rational) -> Rational {
        let n = self.rounding.round_to_integer(&shift(x, self.frac_bits as i64));
        self.unscale(n)
    }

    /// Maps a grid value into the representable range. Off-grid inputs are
    /// floored onto the grid first.
    pub fn overflow(&self, x: &Rational) -> Rational {
        let n = shift(x, self.frac_bits as i64).floor().to_integer();
        let (lo, hi) = (self.min_scaled(), self.max_scaled());
        let n = match self.overflow {
            OverflowMode::Saturate => n.clamp(lo, hi),
            OverflowMode::Wrap => {
                let modulus = BigInt::one() << self.total_bits;
                (n - &lo).mod_floor(&modulus) + lo
            }
        };
        self.unscale(n)
    }

    pub fn quantize(&self, x: &Rational) -> Rational {
        self.overflow(&self.round(x))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self.scaled(x) {
            Some(n) => n >= self.min_scaled() && n <= self.max_scaled(),
            None => false,
        }
    }

    /// Number of representable values (`2^b`).
    pub fn cardinality(&self) -> BigInt {
        BigInt::one() << self.total_bits
    }

    /// All representable values in increasing order.
    pub fn values(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut n = self.min_scaled();
        let hi = self.max_scaled();
        while n <= hi {
            out.push(self.unscale(n.clone()));
            n += 1;
        }
        out
    }
}

impl fmt::Display for FixedFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "fix:b={},f={},round={},ovf={}",
            self.total_bits, self.frac_bits, self.rounding, self.overflow
        )
    }
}

/// Normalised binary floating point `±(1 + k/2^p)·2^E` plus zero.
///
/// Exponents range over `-(2^(e-1)-2) ..= 2^(e-1)-1` and are stored with bias
/// `2^(e-1)-1`, so the stored field is `1 ..= 2^e-2`. Field 0 with a zero
/// mantissa is zero; there are no subnormals, infinities or NaNs. Results
/// beyond the largest finite value saturate, results below the smallest
/// normal flush to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FloatFormat {
    mantissa_bits: u32,
    exponent_bits: u32,
    pub rounding: RoundingMode,
}

impl FloatFormat {
    pub fn new(mantissa_bits: u32, exponent_bits: u32, rounding: RoundingMode) -> Result<Self> {
        if mantissa_bits == 0 {
            return Err(Error::InvalidFormat("float needs at least one mantissa bit".into()));
        }
        if !(2..=16).contains(&exponent_bits) {
            return Err(Error::InvalidFormat(format!(
                "exponent width {exponent_bits} outside 2..=16"
            )));
        }
        Ok(FloatFormat {
            mantissa_bits,
            exponent_bits,
            rounding,
        })
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    pub fn exponent_bits(&self) -> u32 {
        self.exponent_bits
    }

    pub fn bias(&self) -> i64 {
        (1i64 << (self.exponent_bits - 1)) - 1
    }

    pub fn min_exponent(&self) -> i64 {
        -((1i64 << (self.exponent_bits - 1)) - 2)
    }

    pub fn max_exponent(&self) -> i64 {
        (1i64 << (self.exponent_bits - 1)) - 1
    }

    /// Largest finite magnitude `(2 - 2^-p)·2^Emax`.
    pub fn max_value(&self) -> Rational {
        (int(2) - pow2(-(self.mantissa_bits as i64))) * pow2(self.max_exponent())
    }

    pub fn min_normal(&self) -> Rational {
        pow2(self.min_exponent())
    }

    /// Rounds to `p` significant fractional bits at the magnitude of `x`,
    /// without range handling.
    pub fn round(&self, x: &Rational) -> Rational {
        if x.is_zero() {
            return Rational::zero();
        }
        let v = floor_log2(x.numer().abs().magnitude(), x.denom().magnitude());
        let ulp = v - self.mantissa_bits as i64;
        let n = self.rounding.round_to_integer(&shift(x, -ulp));
        shift(&Rational::from_integer(n), ulp)
    }

    /// Saturates magnitudes above the largest finite value and flushes
    /// magnitudes below the smallest normal to zero.
    pub fn clamp_range(&self, x: &Rational) -> Rational {
        let mag = x.abs();
        if mag > self.max_value() {
            if x.is_negative() {
                -self.max_value()
            } else {
                self.max_value()
            }
        } else if mag < self.min_normal() {
            Rational::zero()
        } else {
            x.clone()
        }
    }

    pub fn quantize(&self, x: &Rational) -> Rational {
        self.clamp_range(&self.round(x))
    }

    pub fn contains(&self, x: &Rational) -> bool {
        if x.is_zero() {
            return true;
        }
        let mag = x.abs();
        if mag < self.min_normal() || mag > self.max_value() {
            return false;
        }
        self.rounding_independent(x)
    }

    // A value on the p-bit grid at its own magnitude is exactly representable,
    // whatever the rounding mode.
    fn rounding_independent(&self, x: &Rational) -> bool {
        let v = floor_log2(x.numer().abs().magnitude(), x.denom().magnitude());
        shift(x, self.mantissa_bits as i64 - v).is_integer()
    }

    pub fn word_len(&self) -> usize {
        1 + self.exponent_bits as usize + self.mantissa_bits as usize
    }

    pub fn cardinality(&self) -> BigInt {
        let normals = (BigInt::one() << self.exponent_bits) - 2;
        normals * (BigInt::one() << self.mantissa_bits) * 2 + 1
    }

    /// All representable values in increasing order.
    pub fn values(&self) -> Vec<Rational> {
        let p = self.mantissa_bits as i64;
        let mut pos = Vec::new();
        for e in self.min_exponent()..=self.max_exponent() {
            for k in 0..(1i64 << p) {
                pos.push((int(1) + rat(k, 1) * pow2(-p)) * pow2(e));
            }
        }
        let mut out: Vec<Rational> = pos.iter().rev().map(|v| -v.clone()).collect();
        out.push(Rational::zero());
        out.extend(pos);
        out
    }
}

impl fmt::Display for FloatFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "float:m={},e={},round={}",
            self.mantissa_bits, self.exponent_bits, self.rounding
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    Lt,
    Le,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithmeticFormat {
    Fixed(FixedFormat),
    Float(FloatFormat),
}

impl ArithmeticFormat {
    pub fn fixed(b: u32, f: u32, rounding: RoundingMode, overflow: OverflowMode) -> Result<Self> {
        FixedFormat::new(b, f, rounding, overflow).map(ArithmeticFormat::Fixed)
    }

    pub fn float(p: u32, e: u32, rounding: RoundingMode) -> Result<Self> {
        FloatFormat::new(p, e, rounding).map(ArithmeticFormat::Float)
    }

    /// Grid rounding without range handling.
    pub fn round(&self, x: &Rational) -> Rational {
        match self {
            ArithmeticFormat::Fixed(f) => f.round(x),
            ArithmeticFormat::Float(f) => f.round(x),
        }
    }

    /// Rounding followed by the format's range map: the value a single
    /// format operation produces from the exact result `x`.
    pub fn quantize(&self, x: &Rational) -> Rational {
        match self {
            ArithmeticFormat::Fixed(f) => f.quantize(x),
            ArithmeticFormat::Float(f) => f.quantize(x),
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            ArithmeticFormat::Fixed(f) => f.contains(x),
            ArithmeticFormat::Float(f) => f.contains(x),
        }
    }

    pub fn rounding(&self) -> RoundingMode {
        match self {
            ArithmeticFormat::Fixed(f) => f.rounding,
            ArithmeticFormat::Float(f) => f.rounding,
        }
    }

    /// Length of the bit word encoding one value.
    pub fn word_len(&self) -> usize {
        match self {
            ArithmeticFormat::Fixed(f) => f.total_bits as usize,
            ArithmeticFormat::Float(f) => f.word_len(),
        }
    }

    pub fn cardinality(&self) -> BigInt {
        match self {
            ArithmeticFormat::Fixed(f) => f.cardinality(),
            ArithmeticFormat::Float(f) => f.cardinality(),
        }
    }

    pub fn values(&self) -> Vec<Rational> {
        match self {
            ArithmeticFormat::Fixed(f) => f.values(),
            ArithmeticFormat::Float(f) => f.values(),
        }
    }

    /// Exact operation followed by quantisation.
    pub fn op(&self, op: ArithOp, x: &Rational, y: &Rational) -> Result<Rational> {
        let exact = match op {
            ArithOp::Add => x + y,
            ArithOp::Mul => x * y,
            ArithOp::Div => {
                if y.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                x / y
            }
        };
        Ok(self.quantize(&exact))
    }

    /// Compares the quantised operands exactly.
    pub fn compare(&self, rel: Comparison, x: &Rational, y: &Rational) -> bool {
        let (a, b) = (self.quantize(x), self.quantize(y));
        match rel {
            Comparison::Lt => a < b,
            Comparison::Le => a <= b,
            Comparison::Eq => a == b,
        }
    }

    /// Compares the quantised operands, returning their order.
    pub fn cmp_quantized(&self, x: &Rational, y: &Rational) -> Ordering {
        self.quantize(x).cmp(&self.quantize(y))
    }
}

impl fmt::Display for ArithmeticFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithmeticFormat::Fixed(x) => x.fmt(f),
            ArithmeticFormat::Float(x) => x.fmt(f),
        }
    }
}

impl FromStr for ArithmeticFormat {
    type Err = Error;

    /// `fix:b=<int>,f=<int>,round=<floor|trunc|nearest>,ovf=<sat|wrap>` or
    /// `float:m=<int>,e=<int>,round=<...>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidFormat(format!("{msg} in `{s}`"));
        let (kind, rest) = s.trim().split_once(':').ok_or_else(|| bad("missing `:`"))?;
        let mut fields = std::collections::BTreeMap::new();
        for part in rest.split(',') {
            let (k, v) = part.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            if fields.insert(k.trim(), v.trim()).is_some() {
                return Err(bad("duplicate key"));
            }
        }
        let num = |k: &str| -> Result<u32> {
            fields
                .get(k)
                .ok_or_else(|| bad(&format!("missing `{k}`")))?
                .parse()
                .map_err(|_| bad(&format!("`{k}` is not a non-negative integer")))
        };
        let rounding: RoundingMode = fields
            .get("round")
            .copied()
            .unwrap_or("nearest")
            .parse()?;
        match kind.trim() {
            "fix" => {
                for k in fields.keys() {
                    if !["b", "f", "round", "ovf"].contains(k) {
                        return Err(bad(&format!("unknown key `{k}`")));
                    }
                }
                let overflow: OverflowMode = fields.get("ovf").copied().unwrap_or("sat").parse()?;
                ArithmeticFormat::fixed(num("b")?, num("f")?, rounding, overflow)
            }
            "float" => {
                for k in fields.keys() {
                    if !["m", "e", "round"].contains(k) {
                        return Err(bad(&format!("unknown key `{k}`")));
                    }
                }
                ArithmeticFormat::float(num("m")?, num("e")?, rounding)
            }
            other => Err(bad(&format!("unknown format kind `{other}`"))),
        }
    }
}

/// Converts a small rational to `f64` for display purposes only.
pub fn approx(x: &Rational) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}
