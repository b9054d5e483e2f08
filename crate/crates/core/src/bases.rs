//! The base ladder `w_n`/`q_n`, the Komornik–Loreti constant, and regime
//! classification.
//!
//! Consecutive ladder roots get close very fast (`q_7 − q_6 ≈ 7e−14`,
//! `q_8 − q_7 ≈ 8e−27`, and roughly squaring from there), so roots are
//! carried as dyadic enclosures at `2^n + 64` bits rather than as floats.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::dyadic::{Dyadic, Rounding};
use crate::error::{Error, Result};

/// Hard cap on `n` for ladder words and roots.
pub const LADDER_HARD_CAP: u32 = 20;

/// Default number of ladder levels consulted by [`classify`].
pub const DEFAULT_MAX_N: u32 = 12;

/// Default enclosure tolerance for `q_KL`.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Bits used to enclose user-supplied decimal bases. Enough for the
/// quasi-greedy expansion of 1 to be certified to 4096 digits.
const INPUT_BITS: i64 = 8320;

/// Bases whose quasi-greedy expansion of 1 is known in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Landmark {
    Ladder(u32),
    KomornikLoreti,
}

/// A certified enclosure `[lo, hi]` of a real base.
#[derive(Clone, PartialEq, Eq)]
pub struct BaseValue {
    lo: Dyadic,
    hi: Dyadic,
    landmark: Option<Landmark>,
}

impl BaseValue {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Result<Self> {
        if lo > hi {
            return Err(Error::domain("enclosure has lo > hi"));
        }
        Ok(BaseValue { lo, hi, landmark: None })
    }

    pub fn exact(x: Dyadic) -> Self {
        BaseValue { lo: x.clone(), hi: x, landmark: None }
    }

    /// The enclosure marked as denoting a specific landmark base.
    pub fn with_landmark(mut self, landmark: Landmark) -> Self {
        self.landmark = Some(landmark);
        self
    }

    pub fn landmark(&self) -> Option<Landmark> {
        self.landmark
    }

    pub fn from_f64(x: f64) -> Result<Self> {
        Ok(Self::exact(Dyadic::from_f64(x)?))
    }

    /// Tight enclosure of a decimal literal.
    pub fn parse(s: &str) -> Result<Self> {
        let lo = Dyadic::parse_decimal(s, INPUT_BITS, Rounding::Floor)?;
        let hi = Dyadic::parse_decimal(s, INPUT_BITS, Rounding::Ceil)?;
        Ok(BaseValue { lo, hi, landmark: None })
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn midpoint(&self) -> Dyadic {
        Dyadic::midpoint(&self.lo, &self.hi)
    }

    /// Nearest float to the midpoint.
    pub fn value(&self) -> f64 {
        self.midpoint().to_f64()
    }

    pub fn radius(&self) -> f64 {
        (&self.hi - &self.lo).scale2(-1).to_f64()
    }

    /// `floor(log2(radius))`, or `None` for a point enclosure.
    pub fn radius_log2(&self) -> Option<i64> {
        (&self.hi - &self.lo).scale2(-1).log2_floor()
    }

    pub fn width(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn meets(&self, other: &BaseValue) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_inside(&self, other: &BaseValue) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn is_below(&self, other: &BaseValue) -> bool {
        self.hi < other.lo
    }

    /// Errors unless the whole enclosure lies in `(2, 3)`.
    pub fn check_working_base(&self) -> Result<()> {
        if self.lo > Dyadic::from_i64(2) && self.hi < Dyadic::from_i64(3) {
            Ok(())
        } else {
            Err(Error::domain(format!("base {} is not inside (2, 3)", self.value())))
        }
    }

    /// Decimal bounds with `digits` fractional digits, rounded outward.
    pub fn decimal_bounds(&self, digits: usize) -> (String, String) {
        (self.lo.to_decimal(digits, Rounding::Floor), self.hi.to_decimal(digits, Rounding::Ceil))
    }
}

impl fmt::Debug for BaseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = self.decimal_bounds(24);
        write!(f, "BaseValue[{lo}, {hi}]")
    }
}

impl fmt::Display for BaseValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// JSON view of an enclosure.
#[derive(Clone, Debug, Serialize)]
pub struct EnclosureReport {
    pub value: String,
    pub lo: String,
    pub hi: String,
    pub radius_log2: Option<i64>,
}

impl From<&BaseValue> for EnclosureReport {
    fn from(b: &BaseValue) -> Self {
        let (lo, hi) = b.decimal_bounds(40);
        EnclosureReport {
            value: b.midpoint().to_decimal(20, Rounding::Floor),
            lo,
            hi,
            radius_log2: b.radius_log2(),
        }
    }
}

/// Ladder word `w_n` over {0, 1, 2}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LadderWord {
    pub n: u32,
    pub digits: Vec<u8>,
}

impl fmt::Display for LadderWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.digits {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

pub fn reflect2(w: &[u8]) -> Vec<u8> {
    w.iter().map(|&b| 2 - b).collect()
}

pub fn ladder_word(n: u32) -> Result<LadderWord> {
    if n == 0 {
        return Err(Error::domain("ladder index starts at 1"));
    }
    if n > LADDER_HARD_CAP {
        return Err(Error::Resource(format!("ladder index {n} exceeds cap {LADDER_HARD_CAP}")));
    }
    let mut w = vec![2u8];
    for _ in 1..n {
        let mut next = w.clone();
        next.extend(reflect2(&w));
        let last = next.last_mut().unwrap();
        if *last >= 2 {
            return Err(Error::Internal("ladder word ends in 2 before increment".into()));
        }
        *last += 1;
        w = next;
    }
    Ok(LadderWord { n, digits: w })
}

/// `Σ w_i x^i` with every rounding in `mode`. Monotone in `x` for `x > 0`.
fn ladder_sum(word: &[u8], x: &Dyadic, bits: i64, mode: Rounding) -> Dyadic {
    let mut h = Dyadic::zero();
    for &c in word.iter().rev() {
        h = (&h + &Dyadic::from_i64(c as i64)).mul_round(x, bits, mode);
    }
    h
}

/// Certified bounds on `Σ w_i q^{-i}` at an exact dyadic `q`.
fn ladder_value_bounds(word: &[u8], q: &Dyadic, bits: i64) -> (Dyadic, Dyadic) {
    let one = Dyadic::from_i64(1);
    let x_lo = one.div_round(q, bits, Rounding::Floor).expect("q > 0");
    let x_hi = one.div_round(q, bits, Rounding::Ceil).expect("q > 0");
    (ladder_sum(word, &x_lo, bits, Rounding::Floor), ladder_sum(word, &x_hi, bits, Rounding::Ceil))
}

fn f64_root(word: &[u8]) -> f64 {
    let g = |q: f64| {
        let x = 1.0 / q;
        word.iter().rev().fold(0.0, |h, &c| (h + c as f64) * x)
    };
    let (mut a, mut b) = (2.0f64, 3.0f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) > 1.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// One Newton step on `P(x) = 1` where `P(x) = Σ w_i x^i`.
fn newton_step(word: &[u8], x: &Dyadic, bits: i64) -> Dyadic {
    let mut p = Dyadic::zero();
    let mut dp = Dyadic::zero();
    for &c in word.iter().rev() {
        dp = (&dp.mul_round(x, bits, Rounding::Floor) + &p).round(bits, Rounding::Floor);
        p = (&p.mul_round(x, bits, Rounding::Floor) + &Dyadic::from_i64(c as i64)).round(bits, Rounding::Floor);
    }
    // with a_0 = 0 the loop above stops one step early
    dp = (&dp.mul_round(x, bits, Rounding::Floor) + &p).round(bits, Rounding::Floor);
    p = p.mul_round(x, bits, Rounding::Floor);
    let resid = &p - &Dyadic::from_i64(1);
    match resid.div_round(&dp, bits, Rounding::Floor) {
        Ok(step) => x - &step,
        Err(_) => x.clone(),
    }
}

fn compute_root(n: u32) -> Result<BaseValue> {
    if n == 1 {
        return Ok(BaseValue::exact(Dyadic::from_i64(2)).with_landmark(Landmark::Ladder(1)));
    }
    let word = ladder_word(n)?.digits;
    let target_bits = (1i64 << n) + 64;
    let one = Dyadic::from_i64(1);
    let mut x = one.div_round(&Dyadic::from_f64(f64_root(&word))?, 64, Rounding::Floor)?;
    let mut p = 64i64;
    loop {
        x = newton_step(&word, &x, p + 32);
        if p >= target_bits {
            break;
        }
        p = (2 * p).min(target_bits);
    }
    for _ in 0..2 {
        x = newton_step(&word, &x, target_bits + 32);
    }
    let q_hat = one.div_round(&x, target_bits + 16, Rounding::Floor)?.round(target_bits + 16, Rounding::Floor);
    let eval_bits = target_bits + 48 + n as i64;
    let mut delta = one.scale2(-(target_bits - 8));
    for _ in 0..8 {
        let left = &q_hat - &delta;
        let right = &q_hat + &delta;
        let (g_left, _) = ladder_value_bounds(&word, &left, eval_bits);
        let (_, g_right) = ladder_value_bounds(&word, &right, eval_bits);
        // the sum is strictly decreasing in q, so a sign change pins the unique root
        if g_left > one && g_right < one {
            return Ok(BaseValue::new(left, right)?.with_landmark(Landmark::Ladder(n)));
        }
        delta = delta.scale2(8);
    }
    Err(Error::Internal(format!("could not certify ladder root q_{n}")))
}

fn ladder_memo() -> &'static Mutex<HashMap<u32, BaseValue>> {
    static MEMO: OnceLock<Mutex<HashMap<u32, BaseValue>>> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `q_n`: the root in `[2, 3)` of `Σ w_n[i] q^{-i} = 1`, as a certified enclosure.
pub fn base_root(n: u32) -> Result<BaseValue> {
    if n == 0 {
        return Err(Error::domain("ladder index starts at 1"));
    }
    if let Some(v) = ladder_memo().lock().unwrap().get(&n) {
        return Ok(v.clone());
    }
    let v = compute_root(n)?;
    ladder_memo().lock().unwrap().insert(n, v.clone());
    Ok(v)
}

/// Enclosure of `q_KL` of width below `tolerance`, using ladder levels up to `max_n`.
pub fn kl_constant_capped(tolerance: f64, max_n: u32) -> Result<BaseValue> {
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(Error::domain(format!("tolerance must be positive, got {tolerance}")));
    }
    let half = Dyadic::from_f64(tolerance / 2.0)?;
    let mut prev = base_root(1)?;
    for n in 1..max_n.min(LADDER_HARD_CAP) {
        let next = base_root(n + 1)?;
        let gap = next.hi() - prev.lo();
        if gap < half {
            // the gaps shrink faster than geometrically, so twice the last gap
            // bounds the whole remaining tail
            let hi = next.hi() + &gap.mul_i64(2);
            return Ok(BaseValue::new(next.lo().clone(), hi)?.with_landmark(Landmark::KomornikLoreti));
        }
        prev = next;
    }
    Err(Error::Precision(format!(
        "tolerance {tolerance:e} needs ladder levels beyond {}",
        max_n.min(LADDER_HARD_CAP)
    )))
}

pub fn kl_constant(tolerance: f64) -> Result<BaseValue> {
    kl_constant_capped(tolerance, DEFAULT_MAX_N)
}

/// Consecutive ladder gaps `q_{n+1} − q_n` (midpoint differences) for `n < max_n`.
pub fn ladder_gaps(max_n: u32) -> Result<Vec<f64>> {
    (1..max_n)
        .map(|n| Ok((&base_root(n + 1)?.midpoint() - &base_root(n)?.midpoint()).to_f64()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegimeLabel {
    /// `q ∈ (q_m, q_{m+1}]`.
    Finite { m: u32 },
    KomornikLoreti,
    Interval,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeLabel::Finite { m } => write!(f, "Finite({m})"),
            RegimeLabel::KomornikLoreti => f.write_str("KomornikLoreti"),
            RegimeLabel::Interval => f.write_str("Interval"),
        }
    }
}

pub fn classify(q: &BaseValue) -> Result<RegimeLabel> {
    classify_with(q, DEFAULT_TOLERANCE, DEFAULT_MAX_N)
}

/// Walks up the ladder until the enclosure of `q` is placed.
///
/// An enclosure inside some `q_n` enclosure is `q_n` itself (right endpoint of
/// band `n − 1`). An enclosure that straddles ladder points is accepted as
/// `q_KL` only when it meets the `q_KL` enclosure and is no wider than
/// `2·tolerance`; otherwise it is ambiguous.
pub fn classify_with(q: &BaseValue, tolerance: f64, max_n: u32) -> Result<RegimeLabel> {
    q.check_working_base()?;
    let kl = kl_constant_capped(tolerance, max_n)?;
    let narrow = q.width() <= Dyadic::from_f64(2.0 * tolerance)?;
    for n in 2..=max_n.min(LADDER_HARD_CAP) {
        let qn = base_root(n)?;
        if q.is_below(&qn) || q.is_inside(&qn) {
            return Ok(RegimeLabel::Finite { m: n - 1 });
        }
        if q.meets(&qn) {
            if narrow && q.meets(&kl) {
                return Ok(RegimeLabel::KomornikLoreti);
            }
            return Err(Error::Ambiguous(format!("enclosure of q straddles q_{n}")));
        }
    }
    if q.meets(&kl) {
        Ok(RegimeLabel::KomornikLoreti)
    } else if kl.is_below(q) {
        Ok(RegimeLabel::Interval)
    } else {
        Err(Error::Ambiguous(format!("q lies above q_{max_n} but below the q_KL enclosure")))
    }
}
