//! Scalar abstraction shared by every grid computation.
//!
//! Structural identities run over [`BigRational`] and are exact; quantitative
//! experiments with irrational parameters run over `f64`. Both go through the
//! same generic code.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::error::{HyperHaarError, Result};

/// Numeric mode of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        }
    }
}

impl FromStr for Mode {
    type Err = HyperHaarError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(HyperHaarError::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

/// Anything that can be stored in a dense grid cell.
pub trait Cell: Clone + Num + Debug + Send + Sync + 'static {
    /// Largest grid (log2 of the cell count) this type is allowed to fill densely.
    const MAX_GRID_BITS: u32;
}

/// A field-like scalar usable as a grid value.
pub trait Scalar: Cell + Signed + PartialOrd + FromPrimitive {
    const MODE: Mode;

    fn from_rational(r: &BigRational) -> Self;

    fn to_rational(&self) -> BigRational;

    fn to_f64(&self) -> f64;

    /// Largest integer not exceeding the value.
    fn floor_i64(&self) -> i64;

    /// Canonical text form: `p/q` (or `p`) for exact values, shortest round-trip decimal for floats.
    fn to_text(&self) -> String;

    fn of_int(v: i64) -> Self {
        <Self as FromPrimitive>::from_i64(v).expect("integer fits the scalar")
    }

    fn half(&self) -> Self {
        self.clone() / Self::of_int(2)
    }

    /// `2^k` for possibly negative `k`.
    fn pow2(k: i32) -> Self {
        let two = Self::of_int(2);
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc * two.clone();
        }
        if k < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }

    fn powu(&self, p: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..p {
            acc = acc * self.clone();
        }
        acc
    }

    fn is_exact() -> bool {
        Self::MODE == Mode::Exact
    }
}

impl Cell for BigRational {
    const MAX_GRID_BITS: u32 = 22;
}

impl Scalar for BigRational {
    const MODE: Mode = Mode::Exact;

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn floor_i64(&self) -> i64 {
        self.floor().to_integer().to_i64().expect("floor fits i64")
    }

    fn to_text(&self) -> String {
        rational_to_text(self)
    }

    fn pow2(k: i32) -> Self {
        let p = BigInt::one() << k.unsigned_abs();
        if k < 0 {
            BigRational::new(BigInt::one(), p)
        } else {
            BigRational::from_integer(p)
        }
    }
}

impl Cell for f64 {
    const MAX_GRID_BITS: u32 = 26;
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn floor_i64(&self) -> i64 {
        self.floor() as i64
    }

    fn to_text(&self) -> String {
        format!("{self:?}")
    }

    fn pow2(k: i32) -> Self {
        2f64.powi(k)
    }
}

impl Cell for f32 {
    const MAX_GRID_BITS: u32 = 26;
}

impl Scalar for f32 {
    const MODE: Mode = Mode::Float;

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f32(r).unwrap_or(f32::NAN)
    }

    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).expect("finite float")
    }

    fn to_f64(&self) -> f64 {
        *self as f64
    }

    fn floor_i64(&self) -> i64 {
        self.floor() as i64
    }

    fn to_text(&self) -> String {
        format!("{self:?}")
    }

    fn pow2(k: i32) -> Self {
        2f32.powi(k)
    }
}

/// Integer cell values used for sums of products of ±1-valued r-functions.
pub trait IntCell: Cell + Copy + Signed + Ord + Into<i64> + TryFrom<i64> {}

macro_rules! int_cell {
    ($($t:ty),*) => {$(
        impl Cell for $t {
            const MAX_GRID_BITS: u32 = 26;
        }
        impl IntCell for $t {}
    )*};
}

int_cell!(i8, i16, i32, i64);

pub fn rational_to_text(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q`, an integer, or a finite decimal (`-0.125`, `3e-2`) into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let s = text.trim();
    let bad = || HyperHaarError::Parse(format!("not a rational: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer = BigInt::from_str(if all_digits.is_empty() { "0" } else { &all_digits })
        .map_err(|_| bad())?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// `p/q` shorthand for tests and defaults.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}
