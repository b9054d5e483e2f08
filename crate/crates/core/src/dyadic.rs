//! Exact dyadic rationals `m · 2^e` with directed rounding.
//!
//! Ladder roots near the Komornik–Loreti constant differ by far less than
//! `f64` can resolve, so every base is carried as an enclosure of two
//! dyadics. Products and quotients are rounded to a fixed number of
//! fractional bits, always in an explicit direction, which keeps enclosures
//! sound.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    Floor,
    Ceil,
}

/// `mant · 2^exp`, normalized so that `mant` is odd (or zero with `exp == 0`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn from_parts(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn from_i64(v: i64) -> Self {
        Self::from_parts(BigInt::from(v), 0)
    }

    /// Exact conversion; fails on NaN or infinities.
    pub fn from_f64(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::domain(format!("{x} is not a finite number")));
        }
        if x == 0.0 {
            return Ok(Self::zero());
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, exp) = if raw_exp == 0 {
            (frac as i64, -1074)
        } else {
            ((frac | (1u64 << 52)) as i64, raw_exp - 1075)
        };
        Ok(Self::from_parts(BigInt::from(sign * mant), exp))
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        match self.mant.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Nearest `f64` (ties and subnormal edge cases are not treated carefully;
    /// use only for display and float-level estimates).
    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let bits = self.mant.bits() as i64;
        let shift = bits - 64;
        let (top, e) = if shift > 0 {
            (&self.mant >> shift as usize, self.exp + shift)
        } else {
            (self.mant.clone(), self.exp)
        };
        let top = top.to_f64().unwrap_or(0.0);
        if e > i32::MAX as i64 {
            return top.signum() * f64::INFINITY;
        }
        if e < -2000 {
            return 0.0;
        }
        top * 2f64.powi(e.clamp(-1000, 1000) as i32) * 2f64.powi((e - e.clamp(-1000, 1000)) as i32)
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        Self::from_parts(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_i64(&self, k: i64) -> Dyadic {
        Self::from_parts(&self.mant * k, self.exp)
    }

    /// Multiply by `2^k`.
    pub fn scale2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// Round to a multiple of `2^-bits`.
    pub fn round(&self, bits: i64, mode: Rounding) -> Dyadic {
        if self.exp >= -bits {
            return self.clone();
        }
        let k = (-bits - self.exp) as usize;
        let q = shift_round(&self.mant, k, mode);
        Self::from_parts(q, -bits)
    }

    pub fn mul_round(&self, other: &Dyadic, bits: i64, mode: Rounding) -> Dyadic {
        self.mul(other).round(bits, mode)
    }

    /// `self / other` rounded to a multiple of `2^-bits`.
    pub fn div_round(&self, other: &Dyadic, bits: i64, mode: Rounding) -> Result<Dyadic> {
        if other.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        // self/other = (A/B) 2^(ea-eb); want floor/ceil(A 2^(ea-eb+bits) / B)
        let s = self.exp - other.exp + bits;
        let (num, den) = if s >= 0 {
            (&self.mant << s as usize, other.mant.clone())
        } else {
            (self.mant.clone(), &other.mant << (-s) as usize)
        };
        let q = match mode {
            Rounding::Floor => num.div_floor(&den),
            Rounding::Ceil => -((-num).div_floor(&den)),
        };
        Ok(Self::from_parts(q, -bits))
    }

    pub fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        (a + b).scale2(-1)
    }

    /// Largest `k` with `2^k <= |self|`, or `None` for zero.
    pub fn log2_floor(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.mant.bits() as i64 - 1 + self.exp)
        }
    }

    /// Parse a decimal literal (`2.45`, `-0.125`, `1e-3`) into a rounded dyadic.
    pub fn parse_decimal(s: &str, bits: i64, mode: Rounding) -> Result<Dyadic> {
        let (num, pow10) = parse_decimal_rational(s)?;
        // value = num * 10^pow10
        if pow10 >= 0 {
            let v = num * BigInt::from(10).pow(pow10 as u32);
            return Ok(Self::from_parts(v, 0));
        }
        let den = BigInt::from(10).pow((-pow10) as u32);
        let n = num << bits as usize;
        let q = match mode {
            Rounding::Floor => n.div_floor(&den),
            Rounding::Ceil => -((-n).div_floor(&den)),
        };
        Ok(Self::from_parts(q, -bits))
    }

    /// Decimal rendering with `digits` fractional digits, rounded in `mode`.
    pub fn to_decimal(&self, digits: usize, mode: Rounding) -> String {
        // floor/ceil(self * 10^digits)
        let scaled = &self.mant * BigInt::from(10).pow(digits as u32);
        let int = if self.exp >= 0 {
            scaled << self.exp as usize
        } else {
            shift_round(&scaled, (-self.exp) as usize, mode)
        };
        let neg = int.is_negative();
        let mut s = int.abs().to_string();
        if digits > 0 {
            if s.len() <= digits {
                s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
            }
            s.insert(s.len() - digits, '.');
        }
        if neg {
            s.insert(0, '-');
        }
        s
    }
}

fn shift_round(m: &BigInt, k: usize, mode: Rounding) -> BigInt {
    if k == 0 {
        return m.clone();
    }
    let d = BigInt::one() << k;
    match mode {
        Rounding::Floor => m.div_floor(&d),
        Rounding::Ceil => -((-m).div_floor(&d)),
    }
}

/// Returns `(n, e)` with the literal equal to `n · 10^e`.
fn parse_decimal_rational(s: &str) -> Result<(BigInt, i64)> {
    let s = s.trim();
    let bad = || Error::parse(format!("invalid decimal literal {s:?}"));
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n: BigInt = digits.parse().map_err(|_| bad())?;
    if neg {
        n = -n;
    }
    Ok((n, exponent - frac_part.len() as i64))
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let e = self.exp.min(rhs.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &rhs.mant << (rhs.exp - e) as usize;
        Dyadic::from_parts(a + b, e)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: &Dyadic) -> Dyadic {
        self + &(-rhs)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;

    fn neg(self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dyadic({})", self.to_decimal(20, Rounding::Floor))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_decimal(f.precision().unwrap_or(17), Rounding::Floor))
    }
}
