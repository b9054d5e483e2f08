//! Expansions in base `q ∈ (2, 3)` over {−1, 0, 1}, the quasi-greedy
//! expansion of 1 over {0, 1, 2}, and the lexicographic test for unique
//! expansions.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_integer::Integer;
use serde::Serialize;

use crate::bases::{ladder_word, BaseValue, Landmark};
use crate::dyadic::{Dyadic, Rounding};
use crate::error::{Error, Result};
use crate::words::{eps, lambda_unchecked, Digit, Periodic, TernarySeq, TernaryWord};

pub const DEFAULT_ALPHA_HORIZON: usize = 256;
pub const MAX_ALPHA_HORIZON: usize = 4096;

/// Cap on generated tail lengths.
pub const MAX_TAIL_LEN: usize = 1 << 24;

/// `Σ s_i q^{-i}` with the periodic part summed in closed form.
///
/// The result is within a few ulps times the preperiod plus period length of
/// the exact value.
pub fn evaluate(s: &TernarySeq, q: f64) -> f64 {
    let x = 1.0 / q;
    let horner = |w: &[Digit]| w.iter().rev().fold(0.0, |h, d| (h + d.value() as f64) * x);
    let pre = s.preperiod();
    let per = s.period();
    let head = horner(pre);
    let block = horner(per);
    let xp = x.powi(per.len() as i32);
    head + x.powi(pre.len() as i32) * block / (1.0 - xp)
}

/// Greedy expansion of `x ∈ [−1/(q−1), 1/(q−1)]` to `depth` digits.
///
/// Works on the shifted alphabet {0, 1, 2}. The truncation `w·0^∞` satisfies
/// `|x − evaluate(w·0^∞)| ≤ q^{−depth}/(q−1)`.
pub fn greedy_expand(x: f64, q: f64, depth: usize) -> Result<TernaryWord> {
    if !(q > 2.0 && q < 3.0) {
        return Err(Error::domain(format!("base {q} is not inside (2, 3)")));
    }
    let bound = 1.0 / (q - 1.0);
    let slack = 1e-12 * bound;
    if !x.is_finite() || x < -bound - slack || x > bound + slack {
        return Err(Error::domain(format!("{x} lies outside [-{bound}, {bound}]")));
    }
    let mut r = (x + bound).clamp(0.0, 2.0 * bound);
    let mut out = Vec::with_capacity(depth);
    for _ in 0..depth {
        let t = q * r;
        let c = if t >= 2.0 - 1e-12 {
            2
        } else if t >= 1.0 - 1e-12 {
            1
        } else {
            0
        };
        r = (t - c as f64).clamp(0.0, 2.0 * bound);
        out.push(Digit::new(c - 1).expect("shifted digit"));
    }
    Ok(TernaryWord::new(out))
}

/// Quasi-greedy expansion of 1 over {0, 1, 2}.
#[derive(Clone, Debug)]
pub enum Alpha {
    /// `α = per^∞`, known exactly.
    Periodic(Vec<u8>),
    /// `α_i = 1 + λ_i` at the Komornik–Loreti constant.
    ThueMorse,
    /// Digits certified by interval arithmetic on the base enclosure.
    Certified { digits: Vec<u8>, exhausted: bool },
}

impl Alpha {
    pub fn for_base(q: &BaseValue, depth: usize) -> Result<Alpha> {
        q.check_working_base()?;
        match q.landmark() {
            Some(Landmark::Ladder(n)) => {
                let mut w = ladder_word(n)?.digits;
                *w.last_mut().unwrap() -= 1;
                Ok(Alpha::Periodic(w))
            }
            Some(Landmark::KomornikLoreti) => Ok(Alpha::ThueMorse),
            None => {
                let (digits, exhausted) = certified_alpha(q, depth);
                Ok(Alpha::Certified { digits, exhausted })
            }
        }
    }

    /// Digit `i` (0-based), if known.
    pub fn digit(&self, i: usize) -> Option<u8> {
        match self {
            Alpha::Periodic(p) => Some(p[i % p.len()]),
            Alpha::ThueMorse => Some((lambda_unchecked(i as u64 + 1).value() + 1) as u8),
            Alpha::Certified { digits, .. } => digits.get(i).copied(),
        }
    }

    pub fn prefix(&self, depth: usize) -> Result<Vec<u8>> {
        (0..depth)
            .map(|i| {
                self.digit(i)
                    .ok_or_else(|| Error::Precision(format!("quasi-greedy digit {} not certified", i + 1)))
            })
            .collect()
    }
}

/// Quasi-greedy digit for a scaled remainder `t > 0`: the largest `c ≤ 2` with `c < t`.
fn qg_digit(t: &Dyadic) -> i64 {
    let ceil = t.round(0, Rounding::Ceil).to_f64() as i64;
    (ceil - 1).min(2)
}

type AlphaMemo = Mutex<HashMap<(Dyadic, Dyadic), (Vec<u8>, bool)>>;

fn alpha_memo() -> &'static AlphaMemo {
    static MEMO: OnceLock<AlphaMemo> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Digits of α that hold for every base in the enclosure, up to `depth`.
/// The flag reports that certification stopped before `depth`.
fn certified_alpha(q: &BaseValue, depth: usize) -> (Vec<u8>, bool) {
    let key = (q.lo().clone(), q.hi().clone());
    if let Some((d, exhausted)) = alpha_memo().lock().unwrap().get(&key) {
        if *exhausted || d.len() >= depth {
            return (d[..d.len().min(depth)].to_vec(), *exhausted && d.len() < depth);
        }
    }
    let bits = 2 * depth as i64 + 64;
    let mut rl = Dyadic::from_i64(1);
    let mut rh = Dyadic::from_i64(1);
    let mut out = Vec::with_capacity(depth);
    let mut exhausted = false;
    while out.len() < depth {
        let tl = q.lo().mul_round(&rl, bits, Rounding::Floor);
        let th = q.hi().mul_round(&rh, bits, Rounding::Ceil);
        let (cl, ch) = (qg_digit(&tl), qg_digit(&th));
        if cl != ch {
            exhausted = true;
            break;
        }
        let c = Dyadic::from_i64(cl);
        rl = &tl - &c;
        rh = &th - &c;
        out.push(cl as u8);
    }
    alpha_memo().lock().unwrap().insert(key, (out.clone(), exhausted));
    (out, exhausted)
}

pub fn quasi_greedy_alpha(q: &BaseValue, depth: usize) -> Result<Vec<u8>> {
    Alpha::for_base(q, depth)?.prefix(depth)
}

/// Which half of the uniqueness test failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Clause {
    /// `c_n < 2` but `σⁿ(c)` is not below α.
    ShiftBelowAlpha,
    /// `c_n > 0` but the reflected shift is not below α.
    ReflectedShiftBelowAlpha,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniqueVerdict {
    pub unique: bool,
    /// 1-based index `n` of the first failing shift.
    pub failing_index: Option<usize>,
    pub clause: Option<Clause>,
}

/// Strict lexicographic comparison of `u` against α.
fn compare_to_alpha(u: &Periodic<u8>, q: &BaseValue, alpha: &mut Alpha, horizon: usize) -> Result<Ordering> {
    if let Alpha::Periodic(p) = alpha {
        // both sides are eventually periodic, so agreement over this many
        // terms means agreement forever
        let span = u.preperiod().len() + u.period().len().lcm(&p.len());
        for i in 0..span {
            match u.get(i).cmp(&p[i % p.len()]) {
                Ordering::Equal => continue,
                o => return Ok(o),
            }
        }
        return Ok(Ordering::Equal);
    }
    let mut h = horizon.max(1);
    let mut i = 0;
    loop {
        while i < h {
            let a = match alpha.digit(i) {
                Some(a) => a,
                None => {
                    return Err(Error::Precision(format!(
                        "quasi-greedy expansion of 1 only certified to {i} digits at q = {}",
                        q.value()
                    )))
                }
            };
            match u.get(i).cmp(&a) {
                Ordering::Equal => i += 1,
                o => return Ok(o),
            }
        }
        if h >= MAX_ALPHA_HORIZON {
            return Err(Error::Precision(format!(
                "comparison with the quasi-greedy expansion unresolved after {h} digits"
            )));
        }
        h = (2 * h).min(MAX_ALPHA_HORIZON);
        if let Alpha::Certified { .. } = alpha {
            *alpha = Alpha::for_base(q, h)?;
        }
    }
}

pub fn is_unique_expansion(s: &TernarySeq, q: &BaseValue) -> Result<UniqueVerdict> {
    is_unique_expansion_with(s, q, DEFAULT_ALPHA_HORIZON)
}

/// Lexicographic uniqueness test on `c = s + 1` over {0, 1, 2}: for every
/// `n ≥ 1`, `c_n < 2` forces `σⁿ(c) ≺ α(q)` and `c_n > 0` forces
/// `reflect(σⁿ(c)) ≺ α(q)`. Only `|pre| + |per|` shifts are distinct.
pub fn is_unique_expansion_with(s: &TernarySeq, q: &BaseValue, horizon: usize) -> Result<UniqueVerdict> {
    let mut alpha = Alpha::for_base(q, horizon)?;
    let c: Periodic<u8> = s.map(|d| d.shifted());
    let cr: Periodic<u8> = c.map(|&b| 2 - b);
    for n in 1..=c.span() {
        let cn = *c.get(n - 1);
        if cn < 2 && compare_to_alpha(&c.shift(n), q, &mut alpha, horizon)? != Ordering::Less {
            return Ok(UniqueVerdict { unique: false, failing_index: Some(n), clause: Some(Clause::ShiftBelowAlpha) });
        }
        if cn > 0 && compare_to_alpha(&cr.shift(n), q, &mut alpha, horizon)? != Ordering::Less {
            return Ok(UniqueVerdict {
                unique: false,
                failing_index: Some(n),
                clause: Some(Clause::ReflectedShiftBelowAlpha),
            });
        }
    }
    Ok(UniqueVerdict { unique: true, failing_index: None, clause: None })
}

/// Parameters of a block concatenation
/// `(ε_0 ε̄_0)^{j_0} (ε_0 ε̄_1)^{l_0} (ε_1 ε̄_1)^{j_1} (ε_1 ε̄_2)^{l_1} …`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KLTailDescriptor {
    pub j: Vec<u64>,
    pub l: Vec<u8>,
    pub reflected: bool,
    pub truncation: usize,
}

impl KLTailDescriptor {
    /// Every exponent equal: `j_m = j`, `l_m = l` for `m < levels`.
    pub fn uniform(j: u64, l: u8, levels: usize, truncation: usize) -> Self {
        KLTailDescriptor { j: vec![j; levels], l: vec![l; levels], reflected: false, truncation }
    }
}

/// Concatenates the blocks in order and cuts at `truncation` digits. The output
/// is shorter when the exponent lists run out first.
pub fn kl_tail(desc: &KLTailDescriptor) -> Result<TernaryWord> {
    if desc.truncation > MAX_TAIL_LEN {
        return Err(Error::Resource(format!("tail length {} exceeds cap {MAX_TAIL_LEN}", desc.truncation)));
    }
    if let Some(bad) = desc.l.iter().find(|&&b| b > 1) {
        return Err(Error::domain(format!("l entries must be 0 or 1, got {bad}")));
    }
    let k = desc.truncation;
    let mut out: Vec<Digit> = Vec::with_capacity(k);
    let push = |out: &mut Vec<Digit>, w: &TernaryWord, times: u64| {
        for _ in 0..times {
            if out.len() >= k {
                break;
            }
            out.extend_from_slice(w.digits());
        }
    };
    let levels = desc.j.len().max(desc.l.len());
    let mut m = 0u32;
    while (m as usize) < levels && out.len() < k {
        let e = eps(m)?;
        if let Some(&j) = desc.j.get(m as usize) {
            push(&mut out, &e.with_reflection(), j);
        }
        if let Some(&l) = desc.l.get(m as usize) {
            let w = e.word.concat(&eps(m + 1)?.reflect());
            push(&mut out, &w, l as u64);
        }
        m += 1;
    }
    out.truncate(k);
    let w = TernaryWord::new(out);
    Ok(if desc.reflected { w.reflect() } else { w })
}

/// Searches `0^k · tail` for `k ≤ max_k` and returns the first unique one.
pub fn tail_witness(tail: &TernarySeq, q: &BaseValue, max_k: usize) -> Result<Option<TernarySeq>> {
    for k in 0..=max_k {
        let mut pre = vec![Digit::ZERO; k];
        pre.extend_from_slice(tail.preperiod());
        let s = Periodic::new(pre, tail.period().to_vec())?;
        if is_unique_expansion(&s, q)?.unique {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Value-based uniqueness check used as an independent cross-check: for
/// `c = s + 1`, every `n` with `c_n < 2` needs `Σ_i c_{n+i} q^{-i} < 1` and
/// every `n` with `c_n > 0` needs `Σ_i (2 − c_{n+i}) q^{-i} < 1`. Evaluated in
/// floats with margin `slack`; returns `None` when some sum is within `slack` of 1.
pub fn unique_by_values(s: &TernarySeq, q: f64, slack: f64) -> Option<bool> {
    let c: Periodic<u8> = s.map(|d| d.shifted());
    let val = |u: &Periodic<u8>| evaluate(&u.map(|&b| Digit::new(b as i64 - 1).unwrap()), q) + 1.0 / (q - 1.0);
    for n in 1..=c.span() {
        let cn = *c.get(n - 1);
        let tail = c.shift(n);
        let checks = [(cn < 2, val(&tail)), (cn > 0, val(&tail.map(|&b| 2 - b)))];
        for (active, v) in checks {
            if !active {
                continue;
            }
            if (v - 1.0).abs() < slack {
                return None;
            }
            if v > 1.0 {
                return Some(false);
            }
        }
    }
    Some(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{base_root, kl_constant};
    use crate::words::eps_tail;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn seq(s: &str) -> TernarySeq {
        TernarySeq::parse(s).unwrap()
    }

    fn base(s: &str) -> BaseValue {
        BaseValue::parse(s).unwrap()
    }

    #[test]
    fn evaluate_closed_forms() {
        assert_eq!(evaluate(&seq("0^inf"), 2.5), 0.0);
        assert!((evaluate(&seq("+^inf"), 2.5) - 1.0 / 1.5).abs() < 1e-15);
        let q: f64 = 2.5;
        let s = seq("+0-0^inf");
        let direct: f64 = (0..100).map(|i| s.get(i).value() as f64 * q.powi(-(i as i32 + 1))).sum();
        assert!((evaluate(&s, q) - direct).abs() < 1e-12);
        assert!((evaluate(&s, q) - (q.powi(3) - q) / (q.powi(4) - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn greedy_examples() {
        let q = 2.6;
        assert_eq!(greedy_expand(0.0, q, 6).unwrap().values(), vec![0; 6]);
        assert_eq!(greedy_expand(1.0 / (q - 1.0), q, 6).unwrap().values(), vec![1; 6]);
        let x = evaluate(&seq("+0-0^inf"), q);
        assert_eq!(greedy_expand(x, q, 8).unwrap().values(), vec![1, 0, -1, 0, 1, 0, -1, 0]);
        assert!(greedy_expand(1.0, q, 4).is_err());
        assert!(greedy_expand(0.1, 3.2, 4).is_err());
    }

    /// Lexicographically largest prefix of length `d` whose `0^∞` completion
    /// stays within the greedy error window, by exhaustive search.
    fn exhaustive_greedy(x: f64, q: f64, d: usize) -> Vec<i8> {
        let bound = 1.0 / (q - 1.0);
        let tol = q.powi(-(d as i32)) * bound;
        let mut best: Option<Vec<i8>> = None;
        for code in 0..3usize.pow(d as u32) {
            let mut c = code;
            let mut w = vec![0i8; d];
            for k in (0..d).rev() {
                w[k] = (c % 3) as i8 - 1;
                c /= 3;
            }
            let v: f64 = w.iter().enumerate().map(|(i, &b)| b as f64 * q.powi(-(i as i32 + 1))).sum();
            // remaining digits can still add up to the full tail range
            if v - tol <= x + 1e-12 && x <= v + tol + 1e-12 && best.as_ref().is_none_or(|b| w > *b) {
                best = Some(w);
            }
        }
        best.unwrap()
    }

    #[test]
    fn greedy_matches_exhaustive_search() {
        let q = 2.6;
        let x = evaluate(&seq("+0-0^inf"), q);
        assert_eq!(exhaustive_greedy(x, q, 8), vec![1, 0, -1, 0, 1, 0, -1, 0]);
    }

    #[test]
    fn alpha_examples() {
        let q2 = base_root(2).unwrap();
        let a = quasi_greedy_alpha(&q2, 8).unwrap();
        assert_eq!(&a[..4], &[2, 0, 2, 0]);
        let qv = q2.value();
        let sum: f64 = a.iter().cycle().take(80).enumerate().map(|(i, &c)| c as f64 * qv.powi(-(i as i32 + 1))).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert_eq!(quasi_greedy_alpha(&base("2.9"), 1).unwrap(), vec![2]);
        // exact rational check of the defining identity
        for (s, num, den) in [("2.2", 22, 10), ("2.45", 245, 100), ("2.6", 26, 10), ("2.9", 29, 10)] {
            let a = quasi_greedy_alpha(&base(s), 60).unwrap();
            let q = BigRational::new(BigInt::from(num), BigInt::from(den));
            let x = q.recip();
            let mut sum = BigRational::zero();
            let mut p = BigRational::one();
            for &c in &a {
                p = &p * &x;
                sum += &p * BigRational::from_integer(BigInt::from(c));
            }
            let one = BigRational::one();
            assert!(sum <= one, "{s}");
            assert!(sum > &one - &p * BigRational::from_integer(BigInt::from(10)), "{s}");
        }
    }

    #[test]
    fn alpha_at_kl_is_thue_morse() {
        let a = quasi_greedy_alpha(&kl_constant(1e-12).unwrap(), 8).unwrap();
        assert_eq!(a, vec![2, 1, 0, 2, 0, 1, 2, 1]);
    }

    #[test]
    fn certified_alpha_stops_at_ambiguity() {
        // strip the landmark: the enclosure of q_2 straddles the point where
        // the expansion branches
        let q2 = base_root(2).unwrap();
        let plain = BaseValue::new(q2.lo().clone(), q2.hi().clone()).unwrap();
        assert!(matches!(quasi_greedy_alpha(&plain, 8), Err(Error::Precision(_))));
    }

    #[test]
    fn uniqueness_basics() {
        for s in ["2.1", "2.45", "2.9"] {
            let q = base(s);
            assert!(is_unique_expansion(&seq("+^inf"), &q).unwrap().unique);
            assert!(is_unique_expansion(&seq("-^inf"), &q).unwrap().unique);
            assert!(is_unique_expansion(&seq("0^inf"), &q).unwrap().unique);
        }
        let v = is_unique_expansion(&eps_tail(2).unwrap(), &base("2.45")).unwrap();
        assert!(!v.unique);
        assert!(v.failing_index.is_some() && v.clause.is_some());
    }

    #[test]
    fn eps_tail_threshold_is_next_ladder_point() {
        // (ε_k ε̄_k)^∞ is unique exactly above q_{k+2}
        for k in 0..4u32 {
            let t = eps_tail(k as i32).unwrap();
            let at = base_root(k + 2).unwrap();
            assert!(!is_unique_expansion(&t, &at).unwrap().unique);
            let above = at.value() + 1e-3 * 10f64.powi(-(k as i32) * 2);
            assert!(is_unique_expansion(&t, &BaseValue::from_f64(above).unwrap()).unwrap().unique, "k={k}");
        }
    }

    #[test]
    fn value_oracle_agrees() {
        let tails: Vec<TernarySeq> = (-1..4).map(|k| eps_tail(k).unwrap()).collect();
        for q in [2.2, 2.45, 2.53, 2.6, 2.9] {
            for t in &tails {
                let lex = is_unique_expansion(t, &BaseValue::from_f64(q).unwrap()).unwrap().unique;
                if let Some(v) = unique_by_values(t, q, 1e-9) {
                    assert_eq!(lex, v, "q={q} t={}", t.notation());
                }
            }
        }
    }

    #[test]
    fn kl_tail_examples() {
        let d = KLTailDescriptor { j: vec![1], l: vec![], reflected: false, truncation: 2 };
        assert_eq!(kl_tail(&d).unwrap().values(), vec![1, -1]);
        let d = KLTailDescriptor { j: vec![0, 1], l: vec![1], reflected: false, truncation: 7 };
        assert_eq!(kl_tail(&d).unwrap().values(), vec![1, -1, 0, 1, 0, -1, 0]);
        let r = KLTailDescriptor { reflected: true, ..d.clone() };
        assert_eq!(kl_tail(&r).unwrap(), kl_tail(&d).unwrap().reflect());
        let bad = KLTailDescriptor { j: vec![], l: vec![2], reflected: false, truncation: 4 };
        assert!(kl_tail(&bad).is_err());
    }

    fn arb_seq() -> impl Strategy<Value = TernarySeq> {
        (prop::collection::vec(-1i64..=1, 0..5), prop::collection::vec(-1i64..=1, 1..6)).prop_map(|(a, b)| {
            Periodic::new(
                TernaryWord::from_values(&a).unwrap().into_digits(),
                TernaryWord::from_values(&b).unwrap().into_digits(),
            )
            .unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn greedy_error_window(x in -1.0f64..1.0, q in 2.01f64..2.99, d in 1usize..30) {
            let bound = 1.0 / (q - 1.0);
            let x = x * bound;
            let w = greedy_expand(x, q, d).unwrap();
            let v = evaluate(&Periodic::new(w.into_digits(), vec![Digit::ZERO]).unwrap(), q);
            prop_assert!((x - v).abs() <= q.powi(-(d as i32)) * bound * (1.0 + 1e-9) + 1e-13);
        }

        #[test]
        fn uniqueness_reflection_symmetric(s in arb_seq(), q in prop::sample::select(vec!["2.2", "2.45", "2.6", "2.9"])) {
            let q = base(q);
            let a = is_unique_expansion(&s, &q).unwrap().unique;
            let b = is_unique_expansion(&s.map(|d| d.reflect()), &q).unwrap().unique;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn uniqueness_monotone_in_q(s in arb_seq()) {
            let grid = ["2.05", "2.3", "2.5", "2.54", "2.7", "2.95"];
            let mut seen = false;
            for g in grid {
                let u = is_unique_expansion(&s, &base(g)).unwrap().unique;
                prop_assert!(!seen || u);
                seen |= u;
            }
        }
    }
}
