//! Pair sequences over `Ω₂ = Ω₁ − Ω₁` and exhaustive finite checks of the
//! matching statements for shifted Thue–Morse block tails.
//!
//! A pair sequence is matched when no term is `(1,1)` or `(−1,−1)`. Everything
//! here is eventually periodic, so one preperiod plus one period decides it.

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::density::Density;
use crate::error::{Error, Result};
use crate::words::{eps, eps_tail, zip, Digit, PairDigit, PairSeq, Periodic, TernarySeq, TernaryWord};

/// Cap on `n` for the verifiers.
pub const MAX_VERIFY_N: u32 = 12;

pub const OMEGA2: [(i8, i8); 7] = [(0, 0), (0, 1), (1, 0), (-1, 0), (-1, 1), (0, -1), (1, -1)];

#[inline]
pub fn in_omega2(p: &PairDigit) -> bool {
    !(p.0 == p.1 && p.0 != Digit::ZERO)
}

#[inline]
fn is_zero_pair(p: &PairDigit) -> bool {
    p.0 == Digit::ZERO && p.1 == Digit::ZERO
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchReport {
    pub matched: bool,
    /// 1-based position of the first `(1,1)` or `(−1,−1)`.
    pub first_violation_index: Option<usize>,
    /// Frequency of `(0,0)` within one period.
    pub zero_pair_density: Density,
    pub zero_pair_in_period: bool,
}

pub fn analyze(p: &PairSeq) -> MatchReport {
    let first_violation_index =
        p.preperiod().iter().chain(p.period()).position(|t| !in_omega2(t)).map(|i| i + 1);
    let zeros = p.period().iter().filter(|t| is_zero_pair(t)).count();
    MatchReport {
        matched: first_violation_index.is_none(),
        first_violation_index,
        zero_pair_density: Density::new(zeros, p.period().len()),
        zero_pair_in_period: zeros > 0,
    }
}

/// `E_{n,m}^i = (σ^i((ε_n ε̄_n)^∞), (ε_m ε̄_m)^∞)`.
pub fn e_seq(n: u32, m: u32, i: usize) -> Result<PairSeq> {
    if n == 0 || m == 0 {
        return Err(Error::domain("block indices start at 1"));
    }
    if i >= 1usize << (n + 1) {
        return Err(Error::domain(format!("shift {i} is not below 2^{}", n + 1)));
    }
    Ok(zip(&eps_tail(n as i32)?.shift(i), &eps_tail(m as i32)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    /// Shift applied to the upper sequence.
    pub i: usize,
    /// 1-based position of the witness term.
    pub u: usize,
    pub term: (i8, i8),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub i: usize,
    pub reason: String,
}

/// Outcome of one of the exhaustive verifiers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub params: Map<String, Value>,
    pub pass: bool,
    pub witnesses: Vec<Witness>,
    pub counterexamples: Vec<Counterexample>,
    /// Extra named checks, e.g. the aligned `i = 2^n` case.
    pub checks: Map<String, Value>,
}

impl LemmaReport {
    fn new(lemma: &str, params: Value) -> Self {
        LemmaReport {
            lemma: lemma.to_string(),
            params: params.as_object().cloned().unwrap_or_default(),
            pass: true,
            witnesses: Vec::new(),
            counterexamples: Vec::new(),
            checks: Map::new(),
        }
    }

    fn fail(&mut self, i: usize, reason: impl Into<String>) {
        self.pass = false;
        self.counterexamples.push(Counterexample { i, reason: reason.into() });
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.to_string(), Value::Bool(ok));
        self.pass &= ok;
    }
}

fn check_n(n: u32, lo: u32) -> Result<()> {
    if n < lo || n > MAX_VERIFY_N {
        return Err(Error::domain(format!("n = {n} outside [{lo}, {MAX_VERIFY_N}]")));
    }
    Ok(())
}

/// For `0 < i < 2^{n+1}`: `i = 2^n` gives a matched sequence with `(0,0)` in
/// its period, odd `i` gives no `(0,0)` at all, other even `i` are unmatched.
pub fn verify_lemma_3_1(n: u32) -> Result<LemmaReport> {
    check_n(n, 1)?;
    let mut rep = LemmaReport::new("3.1", json!({ "n": n }));
    let half = 1usize << n;
    for i in 1..2 * half {
        let r = analyze(&e_seq(n, n, i)?);
        if i == half {
            if !(r.matched && r.zero_pair_in_period) {
                rep.fail(i, "aligned shift is not matched with (0,0) in the period");
            }
        } else if i % 2 == 1 {
            if r.zero_pair_in_period {
                rep.fail(i, "odd shift contains (0,0)");
            }
        } else if r.matched {
            rep.fail(i, "even shift is matched");
        }
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `ε_n ε̄_n^+ ε̄_n ε_n^−`
    Minus,
    /// `ε_n ε̄_n^+ ε̄_n ε_n`
    Plain,
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minus" => Ok(Variant::Minus),
            "plain" => Ok(Variant::Plain),
            _ => Err(Error::parse(format!("variant must be minus or plain, got {s:?}"))),
        }
    }
}

fn lemma_3_2_lower(n: u32, variant: Variant) -> Result<TernarySeq> {
    let e = eps(n)?;
    let eb = e.reflect();
    let last = match variant {
        Variant::Minus => e.word.dec_last()?,
        Variant::Plain => e.word.clone(),
    };
    e.word.concat(&eb.inc_last()?).concat(&eb).concat(&last).repeat_forever()
}

/// For each `0 < i < 2^{n+1}` finds the smallest `u ∈ (0, 2^{n+2})`,
/// `u ≠ 2^{n+1}`, where `σ^i((ε_n ε̄_n)^∞)` against the variant block tail has
/// a term `(1,1)` or `(−1,−1)`. Also checks that `i = 2^n` has `(−1,−1)` at
/// `u = 2^{n+1} + 1`.
pub fn verify_lemma_3_2(n: u32, variant: Variant) -> Result<LemmaReport> {
    check_n(n, 3)?;
    let mut rep = LemmaReport::new("3.2", json!({ "n": n, "variant": variant }));
    let upper = eps_tail(n as i32)?;
    let lower = lemma_3_2_lower(n, variant)?;
    let half = 1usize << n;
    let skip = 2 * half;
    for i in 1..2 * half {
        let top = upper.shift(i);
        let hit = (1..4 * half).filter(|&u| u != skip).find_map(|u| {
            let t = (*top.get(u - 1), *lower.get(u - 1));
            (!in_omega2(&t)).then_some(Witness { i, u, term: (t.0.value(), t.1.value()) })
        });
        match hit {
            Some(w) => rep.witnesses.push(w),
            None => rep.fail(i, "no (1,1) or (-1,-1) in the window"),
        }
    }
    let top = upper.shift(half);
    let u = skip + 1;
    let aligned = (top.get(u - 1).value(), lower.get(u - 1).value()) == (-1, -1);
    rep.check("aligned_shift_minus_pair_at_2^(n+1)+1", aligned);
    Ok(rep)
}

/// For `m > n` every shift `0 < i < 2^{n+1}` of `E_{n,m}^i` is unmatched; for
/// `m = n` the shift `i = 2^n` is matched with `(0,0)` in the period.
pub fn verify_lemma_3_4(n: u32, m: u32) -> Result<LemmaReport> {
    check_n(n, 1)?;
    check_n(m, n)?;
    let mut rep = LemmaReport::new("3.4", json!({ "n": n, "m": m }));
    let half = 1usize << n;
    if m == n {
        let r = analyze(&e_seq(n, m, half)?);
        rep.check("aligned_shift_matched_with_zero_pair", r.matched && r.zero_pair_in_period);
        return Ok(rep);
    }
    for i in 1..2 * half {
        let r = analyze(&e_seq(n, m, i)?);
        match r.first_violation_index {
            Some(u) => {
                let p = e_seq(n, m, i)?;
                let t = p.get(u - 1);
                rep.witnesses.push(Witness { i, u, term: (t.0.value(), t.1.value()) });
            }
            None => rep.fail(i, "shift is matched"),
        }
    }
    Ok(rep)
}

/// `[B_1, B_2, B_3, B_4]`, each of length `2^{n+2}`:
/// `B_1 = ε ε̄^+ ε̄ ε^−`, `B_2 = ε ε̄^+ ε̄ ε`, `B_3 = ε̄ ε^− ε ε̄^+`, `B_4 = ε̄ ε^− ε ε̄`.
pub fn b_blocks(n: u32) -> Result<[TernaryWord; 4]> {
    if n == 0 {
        return Err(Error::domain("blocks need n >= 1"));
    }
    let e = eps(n)?.word;
    let eb = e.reflect();
    let (ebp, em) = (eb.inc_last()?, e.dec_last()?);
    let cat = |ws: [&TernaryWord; 4]| ws.iter().fold(TernaryWord::default(), |acc, w| acc.concat(w));
    Ok([cat([&e, &ebp, &eb, &em]), cat([&e, &ebp, &eb, &e]), cat([&eb, &em, &e, &ebp]), cat([&eb, &em, &e, &eb])])
}

/// `(B_{p_1} B_{p_2} …)^∞` for a pattern over {1, 2, 3, 4}.
pub fn block_concat(n: u32, pattern: &[u8]) -> Result<TernarySeq> {
    if pattern.is_empty() {
        return Err(Error::domain("pattern is empty"));
    }
    let blocks = b_blocks(n)?;
    let mut w = TernaryWord::default();
    for &k in pattern {
        if !(1..=4).contains(&k) {
            return Err(Error::domain(format!("block index {k} not in 1..=4")));
        }
        w = w.concat(&blocks[k as usize - 1]);
    }
    w.repeat_forever()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ShiftOutcome {
    Witness { u: usize, term: (i8, i8) },
    /// Matched, but with no `(0,0)` in the period.
    ZeroFree,
    /// Matched with `(0,0)` in the period.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockCaseReport {
    pub n: u32,
    pub upper: Vec<u8>,
    pub lower: Vec<u8>,
    pub max_shift: usize,
    pub shifts: Vec<(usize, ShiftOutcome)>,
    pub inconclusive: Vec<usize>,
    pub pass: bool,
}

/// Shifts `0 < i < max_shift` of the upper block concatenation against the
/// lower one, each scanned over one full period. `max_shift` defaults to `2^{n+1}`.
pub fn verify_block_case(n: u32, upper: &[u8], lower: &[u8], max_shift: Option<usize>) -> Result<BlockCaseReport> {
    check_n(n, 3)?;
    if upper.len() < 2 || lower.len() < 2 {
        return Err(Error::domain("block patterns need length >= 2"));
    }
    let max_shift = max_shift.unwrap_or(1 << (n + 1));
    let top = block_concat(n, upper)?;
    let bottom = block_concat(n, lower)?;
    let mut shifts = Vec::new();
    let mut inconclusive = Vec::new();
    for i in 1..max_shift {
        let p: Periodic<PairDigit> = zip(&top.shift(i), &bottom);
        let r = analyze(&p);
        let outcome = match r.first_violation_index {
            Some(u) => {
                let t = p.get(u - 1);
                ShiftOutcome::Witness { u, term: (t.0.value(), t.1.value()) }
            }
            None if !r.zero_pair_in_period => ShiftOutcome::ZeroFree,
            None => {
                inconclusive.push(i);
                ShiftOutcome::Inconclusive
            }
        };
        shifts.push((i, outcome));
    }
    Ok(BlockCaseReport {
        n,
        upper: upper.to_vec(),
        lower: lower.to_vec(),
        max_shift,
        pass: inconclusive.is_empty(),
        shifts,
        inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::alternating_sum;
    use crate::words::TernaryWord;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn seq(s: &str) -> TernarySeq {
        TernarySeq::parse(s).unwrap()
    }

    #[test]
    fn omega2_has_seven_members() {
        let mut n = 0;
        for a in -1..=1 {
            for b in -1..=1 {
                let p = (Digit::new(a).unwrap(), Digit::new(b).unwrap());
                if in_omega2(&p) {
                    n += 1;
                    assert!(OMEGA2.contains(&(a as i8, b as i8)));
                }
            }
        }
        assert_eq!(n, 7);
    }

    #[test]
    fn analyze_examples() {
        let r = analyze(&zip(&seq("0^inf"), &seq("0^inf")));
        assert!(r.matched && r.zero_pair_density == Density::new(1, 1));
        let r = analyze(&zip(&seq("+^inf"), &seq("+^inf")));
        assert_eq!(r.first_violation_index, Some(1));
        let e = e_seq(1, 1, 2).unwrap();
        assert_eq!(e, PairSeq::parse("-0+0^inf|+0-0^inf").unwrap());
        let r = analyze(&e);
        assert!(r.matched);
        assert_eq!(r.zero_pair_density, Density::new(1, 2));
    }

    #[test]
    fn e_seq_bounds() {
        assert!(e_seq(0, 1, 0).is_err());
        assert!(e_seq(1, 1, 4).is_err());
        for i in 1..4 {
            assert!(!analyze(&e_seq(1, 2, i).unwrap()).matched);
        }
    }

    #[test]
    fn lemma_3_1_small() {
        for n in 1..=6 {
            assert!(verify_lemma_3_1(n).unwrap().pass, "n={n}");
        }
    }

    #[test]
    fn lemma_3_2_small() {
        let r = verify_lemma_3_2(3, Variant::Minus).unwrap();
        assert!(r.pass);
        assert_eq!(r.witnesses.len(), 15);
        assert!(verify_lemma_3_2(4, Variant::Plain).unwrap().pass);
        assert!(verify_lemma_3_2(2, Variant::Minus).is_err());
    }

    #[test]
    fn lemma_3_4_small() {
        assert!(verify_lemma_3_4(2, 2).unwrap().pass);
        assert!(verify_lemma_3_4(1, 2).unwrap().pass);
        assert!(verify_lemma_3_4(3, 7).unwrap().pass);
        assert!(verify_lemma_3_4(3, 2).is_err());
    }

    #[test]
    fn blocks() {
        let b = b_blocks(1).unwrap();
        assert_eq!(b[0], TernaryWord::from_values(&[1, 0, -1, 1, -1, 0, 1, -1]).unwrap());
        for n in 1..6 {
            let b = b_blocks(n).unwrap();
            assert!(b.iter().all(|w| w.len() == 1 << (n + 2)));
            let e = eps(n).unwrap().word;
            let expect3 = e.reflect().concat(&e.dec_last().unwrap()).concat(&e).concat(&e.reflect().inc_last().unwrap());
            assert_eq!(b[2], expect3);
        }
    }

    #[test]
    fn block_case_small() {
        let r = verify_block_case(3, &[1, 2], &[1, 2], None).unwrap();
        assert!(matches!(r.shifts[1], (2, ShiftOutcome::Witness { .. })));
        assert!(r.pass);
        assert!(verify_block_case(3, &[1], &[1, 2], None).is_err());
        assert!(verify_block_case(3, &[1, 5], &[1, 2], None).is_err());
    }

    #[test]
    fn aligned_density_is_block_density() {
        for n in 1..=10u32 {
            let r = analyze(&e_seq(n, n, 1 << n).unwrap());
            assert_eq!(r.zero_pair_density.ratio(), alternating_sum(n));
            let zeros = eps(n).unwrap().word.count_zeros();
            assert_eq!(r.zero_pair_density.ratio(), Ratio::new(zeros as i64, 1 << n));
        }
    }

    fn arb_seq() -> impl Strategy<Value = TernarySeq> {
        (prop::collection::vec(-1i64..=1, 0..4), prop::collection::vec(-1i64..=1, 1..7)).prop_map(|(a, b)| {
            Periodic::new(
                TernaryWord::from_values(&a).unwrap().into_digits(),
                TernaryWord::from_values(&b).unwrap().into_digits(),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn matched_iff_no_bad_pair(a in arb_seq(), b in arb_seq()) {
            let p = zip(&a, &b);
            let direct = (0..p.span()).all(|i| in_omega2(p.get(i)));
            prop_assert_eq!(analyze(&p).matched, direct);
        }

        #[test]
        fn reflection_and_swap_symmetry(a in arb_seq(), b in arb_seq()) {
            let r = analyze(&zip(&a, &b));
            let neg = |s: &TernarySeq| s.map(|d| d.reflect());
            let rr = analyze(&zip(&neg(&a), &neg(&b)));
            prop_assert_eq!(r.matched, rr.matched);
            prop_assert_eq!(r.zero_pair_density, rr.zero_pair_density);
            prop_assert_eq!(r.matched, analyze(&zip(&b, &a)).matched);
        }
    }
}
