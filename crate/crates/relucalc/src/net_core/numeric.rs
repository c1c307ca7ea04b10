//! Scalar arithmetic in two modes: exact arbitrary-precision rationals and
//! IEEE doubles.
//!
//! Every network and construction in this crate is generic over [`Scalar`].
//! Constructions are normally carried out over [`Q`] so that interpolation
//! and breakpoint identities hold as exact equalities; [`f64`] is used for
//! fast grid sweeps and for the learning utilities.  [`Numeric`] is the
//! mode-tagged value used at the serialization and CLI boundaries.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::NetError;

/// Exact rational scalar.
pub type Q = BigRational;

/// Arithmetic mode of a computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    Exact,
    Float,
}

/// Field operations shared by the exact and floating-point modes.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const MODE: Mode;

    fn from_i64(v: i64) -> Self;
    /// `p / q`; panics on `q == 0`.
    fn from_ratio(p: i64, q: i64) -> Self;
    /// Conversion from an exact rational (rounded in float mode).
    fn from_q(v: &Q) -> Self;
    /// Conversion from a double (exact in rational mode: every finite double
    /// is a dyadic rational).
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    /// Exact square root when it exists in this number system.
    fn sqrt_opt(&self) -> Option<Self>;

    fn relu(&self) -> Self {
        if *self > Self::zero() {
            self.clone()
        } else {
            Self::zero()
        }
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn max_of(a: &Self, b: &Self) -> Self {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    fn min_of(a: &Self, b: &Self) -> Self {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// `2^k` for any integer `k`.
    fn pow2(k: i64) -> Self {
        let two = Self::from_i64(2);
        let mut r = Self::one();
        for _ in 0..k.unsigned_abs() {
            r = r * two.clone();
        }
        if k < 0 {
            Self::one() / r
        } else {
            r
        }
    }

    fn signum_i(&self) -> i32 {
        if *self > Self::zero() {
            1
        } else if *self < Self::zero() {
            -1
        } else {
            0
        }
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        p as f64 / q as f64
    }
    fn from_q(v: &Q) -> Self {
        q_to_f64(v)
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt_opt(&self) -> Option<Self> {
        if *self >= 0.0 {
            Some(self.sqrt())
        } else {
            None
        }
    }
}

impl Scalar for Q {
    const MODE: Mode = Mode::Exact;

    fn from_i64(v: i64) -> Self {
        Q::from_integer(BigInt::from(v))
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        Q::new(BigInt::from(p), BigInt::from(q))
    }
    fn from_q(v: &Q) -> Self {
        v.clone()
    }
    fn from_f64(v: f64) -> Self {
        Q::from_float(v).expect("finite double")
    }
    fn to_f64(&self) -> f64 {
        q_to_f64(self)
    }
    fn sqrt_opt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Some(Q::new(n, d))
        } else {
            None
        }
    }
    fn pow2(k: i64) -> Self {
        let p = BigInt::one() << (k.unsigned_abs() as usize);
        if k < 0 {
            Q::new(BigInt::one(), p)
        } else {
            Q::from_integer(p)
        }
    }
}

/// Rational to double without overflow for huge numerators/denominators.
pub fn q_to_f64(v: &Q) -> f64 {
    if let (Some(n), Some(d)) = (v.numer().to_f64(), v.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Scale both parts down to a representable range first.
    let nb = v.numer().bits() as i64;
    let db = v.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (v.numer() >> (shift_n as usize)).to_f64().unwrap_or(0.0);
    let d = (v.denom() >> (shift_d as usize)).to_f64().unwrap_or(1.0);
    (n / d) * 2f64.powi((shift_n - shift_d) as i32)
}

/// Shorthand for the exact rational `p/q`.
pub fn q(p: i64, d: i64) -> Q {
    Q::from_ratio(p, d)
}

/// Shorthand for the exact integer `v`.
pub fn qi(v: i64) -> Q {
    Q::from_i64(v)
}

/// Convert between scalar modes through the exact representation.
pub fn convert<A: Scalar, B: Scalar>(a: &A) -> B {
    match A::MODE {
        Mode::Float => B::from_f64(a.to_f64()),
        Mode::Exact => B::from_q(&exact_of(a)),
    }
}

/// Textual form: `"p/q"` (or `"p"`) for exact values, shortest round-trip
/// decimal for doubles.
pub fn format_scalar<T: Scalar>(v: &T) -> String {
    match T::MODE {
        Mode::Float => format!("{:?}", v.to_f64()),
        Mode::Exact => {
            // `Debug` of Ratio is not stable across versions; go through Q.
            let qv: Q = exact_of(v);
            if qv.denom().is_one() {
                qv.numer().to_string()
            } else {
                format!("{}/{}", qv.numer(), qv.denom())
            }
        }
    }
}

/// Extract the exact rational from an exact-mode scalar.  For float-mode
/// scalars this is the exact dyadic value of the double.
pub fn exact_of<T: Scalar>(v: &T) -> Q {
    match T::MODE {
        Mode::Float => Q::from_f64(v.to_f64()),
        Mode::Exact => {
            // SAFETY-free downcast: the only exact-mode Scalar is Q.
            let any: &dyn std::any::Any = v;
            any.downcast_ref::<Q>()
                .cloned()
                .expect("exact-mode scalar must be Q")
        }
    }
}

/// Parse `"p/q"`, `"p"`, or a decimal literal into a scalar.  Decimal
/// literals are read exactly in exact mode (`"0.1"` is `1/10`).
pub fn parse_scalar<T: Scalar>(s: &str) -> Result<T, NetError> {
    let t = s.trim();
    let bad = || NetError::Parse(format!("invalid number literal {t:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((a, b)) = t.split_once('/') {
        let n = BigInt::from_str(a.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(b.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(NetError::Parse(format!("zero denominator in {t:?}")));
        }
        return Ok(T::from_q(&Q::new(n, d)));
    }
    if let Ok(n) = BigInt::from_str(t) {
        return Ok(T::from_q(&Q::from_integer(n)));
    }
    match T::MODE {
        Mode::Float => t.parse::<f64>().map(T::from_f64).map_err(|_| bad()),
        Mode::Exact => parse_decimal(t).map(|v| T::from_q(&v)).ok_or_else(bad),
    }
}

/// Exact parse of a decimal literal with optional exponent.
fn parse_decimal(t: &str) -> Option<Q> {
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().ok()?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let scale = exp - fp.len() as i64;
    let ten = BigInt::from(10);
    let mut v = if scale >= 0 {
        Q::from_integer(n * num::pow(ten, scale as usize))
    } else {
        Q::new(n, num::pow(ten, (-scale) as usize))
    };
    if neg {
        v = -v;
    }
    Some(v)
}

/// Mode-tagged scalar used at the file and command-line boundaries.
#[derive(Debug, Clone, PartialEq)]
pub enum Numeric {
    Exact(Q),
    Float(f64),
}

impl Numeric {
    pub fn mode(&self) -> Mode {
        match self {
            Numeric::Exact(_) => Mode::Exact,
            Numeric::Float(_) => Mode::Float,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Numeric::Exact(v) => q_to_f64(v),
            Numeric::Float(v) => *v,
        }
    }

    /// Parse a literal in the requested mode.
    pub fn parse(s: &str, mode: Mode) -> Result<Self, NetError> {
        Ok(match mode {
            Mode::Exact => Numeric::Exact(parse_scalar::<Q>(s)?),
            Mode::Float => Numeric::Float(parse_scalar::<f64>(s)?),
        })
    }

    /// Promote both operands to a common mode (float wins).
    fn binary(self, rhs: Numeric, fq: impl Fn(Q, Q) -> Q, ff: impl Fn(f64, f64) -> f64) -> Numeric {
        match (self, rhs) {
            (Numeric::Exact(a), Numeric::Exact(b)) => Numeric::Exact(fq(a, b)),
            (a, b) => Numeric::Float(ff(a.to_f64(), b.to_f64())),
        }
    }

    /// Division that reports a zero divisor instead of panicking.
    pub fn checked_div(self, rhs: Numeric) -> Option<Numeric> {
        let zero = match &rhs {
            Numeric::Exact(b) => b.is_zero(),
            Numeric::Float(b) => *b == 0.0,
        };
        if zero {
            None
        } else {
            Some(self / rhs)
        }
    }
}

impl fmt::Display for Numeric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Numeric::Exact(v) => f.write_str(&format_scalar(v)),
            Numeric::Float(v) => f.write_str(&format_scalar(v)),
        }
    }
}

impl Add for Numeric {
    type Output = Numeric;
    fn add(self, rhs: Numeric) -> Numeric {
        self.binary(rhs, |a, b| a + b, |a, b| a + b)
    }
}

impl Sub for Numeric {
    type Output = Numeric;
    fn sub(self, rhs: Numeric) -> Numeric {
        self.binary(rhs, |a, b| a - b, |a, b| a - b)
    }
}

impl Mul for Numeric {
    type Output = Numeric;
    fn mul(self, rhs: Numeric) -> Numeric {
        self.binary(rhs, |a, b| a * b, |a, b| a * b)
    }
}

impl Div for Numeric {
    type Output = Numeric;
    fn div(self, rhs: Numeric) -> Numeric {
        self.binary(rhs, |a, b| a / b, |a, b| a / b)
    }
}

impl Neg for Numeric {
    type Output = Numeric;
    fn neg(self) -> Numeric {
        match self {
            Numeric::Exact(v) => Numeric::Exact(-v),
            Numeric::Float(v) => Numeric::Float(-v),
        }
    }
}

/// Exact `ceil(-log2 |c|)`: the unique integer `j` with
/// `2^-j <= |c| < 2^(-j+1)`.
pub fn dyadic_class(c: &Q) -> Option<i64> {
    if c.is_zero() {
        return None;
    }
    let a = c.abs();
    // Initial guess from bit lengths, then correct.
    let mut j = a.denom().bits() as i64 - a.numer().bits() as i64;
    loop {
        let lo = Q::pow2(-j);
        let hi = Q::pow2(-j + 1);
        if a < lo {
            j += 1;
        } else if a >= hi {
            j -= 1;
        } else {
            return Some(j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let v: Q = parse_scalar("1/3").unwrap();
        assert_eq!(v, q(1, 3));
        assert_eq!(format_scalar(&v), "1/3");
        assert_eq!(format_scalar(&qi(-7)), "-7");
        let d: Q = parse_scalar("0.125").unwrap();
        assert_eq!(d, q(1, 8));
        let e: Q = parse_scalar("-2.5e-1").unwrap();
        assert_eq!(e, q(-1, 4));
        let f: f64 = parse_scalar("1/4").unwrap();
        assert_eq!(f, 0.25);
        assert!(parse_scalar::<Q>("1/0").is_err());
        assert!(parse_scalar::<Q>("abc").is_err());
    }

    #[test]
    fn exact_sqrt_only_for_squares() {
        assert_eq!(q(9, 4).sqrt_opt(), Some(q(3, 2)));
        assert_eq!(qi(2).sqrt_opt(), None);
        assert_eq!(qi(-1).sqrt_opt(), None);
    }

    #[test]
    fn pow2_both_signs() {
        assert_eq!(Q::pow2(3), qi(8));
        assert_eq!(Q::pow2(-3), q(1, 8));
        assert_eq!(f64::pow2(-2), 0.25);
    }

    #[test]
    fn numeric_mode_promotion() {
        let a = Numeric::Exact(q(1, 2));
        let b = Numeric::Exact(q(1, 3));
        assert_eq!(a.clone() + b, Numeric::Exact(q(5, 6)));
        let c = a + Numeric::Float(0.25);
        assert_eq!(c, Numeric::Float(0.75));
        assert!(Numeric::Exact(qi(1)).checked_div(Numeric::Exact(qi(0))).is_none());
    }

    #[test]
    fn dyadic_class_brackets() {
        for (c, j) in [(q(1, 2), 1), (q(3, 4), 1), (q(1, 4), 2), (qi(1), 0), (qi(3), -1), (q(-5, 64), 4)] {
            assert_eq!(dyadic_class(&c), Some(j), "c = {c}");
        }
        assert_eq!(dyadic_class(&qi(0)), None);
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = Q::pow2(-3000) * qi(3);
        assert_eq!(q_to_f64(&big), 0.0);
        let x = Q::new(BigInt::from(1) << 2000usize, (BigInt::from(1) << 2000usize) * BigInt::from(4));
        assert_eq!(q_to_f64(&x), 0.25);
    }
}
