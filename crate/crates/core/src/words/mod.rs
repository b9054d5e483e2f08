//! Ternary digits, finite words, and the Thue–Morse derived sequence.
//!
//! `tau` is indexed from 0 and `lambda` from 1, matching the usual
//! conventions; everything stored internally is 0-based.

mod notation;
mod periodic;

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use periodic::{zip, Periodic};

/// Default cap on the exponent `n` accepted by [`eps`].
pub const MAX_BLOCK_EXPONENT: u32 = 24;

/// A digit of the symmetric alphabet {−1, 0, 1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digit(i8);

impl Digit {
    pub const NEG: Digit = Digit(-1);
    pub const ZERO: Digit = Digit(0);
    pub const POS: Digit = Digit(1);

    pub fn new(v: i64) -> Result<Digit> {
        match v {
            -1..=1 => Ok(Digit(v as i8)),
            _ => Err(Error::domain(format!("digit {v} is not in {{-1,0,1}}"))),
        }
    }

    #[inline]
    pub fn value(self) -> i8 {
        self.0
    }

    #[inline]
    pub fn reflect(self) -> Digit {
        Digit(-self.0)
    }

    /// The digit shifted onto {0, 1, 2}.
    #[inline]
    pub fn shifted(self) -> u8 {
        (self.0 + 1) as u8
    }

    pub(crate) fn symbol(self) -> char {
        match self.0 {
            -1 => '-',
            0 => '0',
            _ => '+',
        }
    }
}

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Digit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.0)
    }
}

pub type TernarySeq = Periodic<Digit>;
pub type PairDigit = (Digit, Digit);
pub type PairSeq = Periodic<PairDigit>;

/// A finite word over {−1, 0, 1}.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TernaryWord(Vec<Digit>);

impl TernaryWord {
    pub fn new(digits: Vec<Digit>) -> Self {
        TernaryWord(digits)
    }

    pub fn from_values(values: &[i64]) -> Result<Self> {
        values.iter().map(|&v| Digit::new(v)).collect::<Result<Vec<_>>>().map(TernaryWord)
    }

    pub fn digits(&self) -> &[Digit] {
        &self.0
    }

    pub fn into_digits(self) -> Vec<Digit> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> Vec<i8> {
        self.0.iter().map(|d| d.0).collect()
    }

    pub fn reflect(&self) -> TernaryWord {
        TernaryWord(self.0.iter().map(|d| d.reflect()).collect())
    }

    /// `w^+`: the last digit raised by one.
    pub fn inc_last(&self) -> Result<TernaryWord> {
        self.bump_last(1)
    }

    /// `w^-`: the last digit lowered by one.
    pub fn dec_last(&self) -> Result<TernaryWord> {
        self.bump_last(-1)
    }

    fn bump_last(&self, by: i64) -> Result<TernaryWord> {
        let last = self.0.last().ok_or_else(|| Error::domain("empty word has no last digit"))?;
        let new = Digit::new(last.0 as i64 + by)
            .map_err(|_| Error::domain(format!("cannot move last digit {} by {by}", last.0)))?;
        let mut out = self.0.clone();
        *out.last_mut().unwrap() = new;
        Ok(TernaryWord(out))
    }

    pub fn concat(&self, other: &TernaryWord) -> TernaryWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        TernaryWord(v)
    }

    pub fn count_zeros(&self) -> usize {
        self.0.iter().filter(|d| d.0 == 0).count()
    }

    /// `self^∞`.
    pub fn repeat_forever(&self) -> Result<TernarySeq> {
        Periodic::new(Vec::new(), self.0.clone())
    }
}

impl fmt::Display for TernaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{}", d.symbol())?;
        }
        Ok(())
    }
}

impl Serialize for TernaryWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter())
    }
}

impl FromIterator<Digit> for TernaryWord {
    fn from_iter<I: IntoIterator<Item = Digit>>(iter: I) -> Self {
        TernaryWord(iter.into_iter().collect())
    }
}

/// Thue–Morse bit `τ_i`: parity of the binary digit sum of `i`.
#[inline]
pub fn tau(i: u64) -> u8 {
    (i.count_ones() & 1) as u8
}

/// `λ_i = τ_i − τ_{i−1}` for `i ≥ 1`.
pub fn lambda(i: u64) -> Result<Digit> {
    if i == 0 {
        return Err(Error::domain("lambda is indexed from 1"));
    }
    Ok(lambda_unchecked(i))
}

#[inline]
pub(crate) fn lambda_unchecked(i: u64) -> Digit {
    Digit(tau(i) as i8 - tau(i - 1) as i8)
}

/// The block `ε_n = λ_1 … λ_{2^n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EpsBlock {
    pub n: u32,
    pub word: TernaryWord,
}

impl EpsBlock {
    pub fn reflect(&self) -> TernaryWord {
        self.word.reflect()
    }

    /// `ε_n ε̄_n`.
    pub fn with_reflection(&self) -> TernaryWord {
        self.word.concat(&self.word.reflect())
    }

    /// `(ε_n ε̄_n)^∞`.
    pub fn tail(&self) -> TernarySeq {
        self.with_reflection().repeat_forever().expect("nonempty block")
    }
}

pub fn eps(n: u32) -> Result<EpsBlock> {
    eps_capped(n, MAX_BLOCK_EXPONENT)
}

pub fn eps_capped(n: u32, cap: u32) -> Result<EpsBlock> {
    if n > cap {
        return Err(Error::Resource(format!("block exponent {n} exceeds cap {cap}")));
    }
    let len = 1u64 << n;
    let word = (1..=len).map(lambda_unchecked).collect();
    Ok(EpsBlock { n, word })
}

/// The tail `(ε_k ε̄_k)^∞`, with `k = −1` standing for `0^∞`.
pub fn eps_tail(k: i32) -> Result<TernarySeq> {
    if k < 0 {
        return Periodic::new(Vec::new(), vec![Digit::ZERO]);
    }
    Ok(eps(k as u32)?.tail())
}

pub fn shift(s: &TernarySeq, i: usize) -> TernarySeq {
    s.shift(i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(v: &[i64]) -> TernaryWord {
        TernaryWord::from_values(v).unwrap()
    }

    #[test]
    fn tau_values() {
        assert_eq!(tau(0), 0);
        assert_eq!(tau(5), 0);
        let prefix: Vec<u8> = (0..8).map(tau).collect();
        assert_eq!(prefix, [0, 1, 1, 0, 1, 0, 0, 1]);
        for k in 0..63 {
            assert_eq!(tau(1 << k), 1);
        }
    }

    #[test]
    fn lambda_values() {
        let got: Vec<i8> = (1..=4).map(|i| lambda(i).unwrap().value()).collect();
        assert_eq!(got, [1, 0, -1, 1]);
        assert_eq!(lambda(16).unwrap(), Digit::POS);
        assert!(lambda(0).is_err());
    }

    #[test]
    fn lambda_recursion() {
        for n in 0..12u32 {
            let p = 1u64 << n;
            assert_eq!(lambda(2 * p).unwrap().value(), 1 - lambda(p).unwrap().value());
            for i in 1..p {
                assert_eq!(lambda(p + i).unwrap(), lambda(i).unwrap().reflect());
            }
        }
    }

    #[test]
    fn eps_small() {
        assert_eq!(eps(0).unwrap().word, w(&[1]));
        assert_eq!(eps(2).unwrap().word, w(&[1, 0, -1, 1]));
        assert_eq!(eps(3).unwrap().word, w(&[1, 0, -1, 1, -1, 0, 1, 0]));
        assert!(matches!(eps(25), Err(Error::Resource(_))));
        assert!(eps_capped(5, 4).is_err());
    }

    #[test]
    fn eps_block_identities() {
        for n in 0..16u32 {
            let e = eps(n).unwrap();
            let next = eps(n + 1).unwrap();
            let built = e.word.concat(&e.reflect().inc_last().unwrap());
            assert_eq!(built, next.word);
            assert!(next.word.digits().starts_with(e.word.digits()));
            let d = e.word.digits();
            assert_eq!(d[0], Digit::POS);
            let last = d[d.len() - 1].value();
            if n % 2 == 1 {
                assert_eq!(last, 0);
            } else {
                assert_eq!(last, 1);
            }
            if n >= 1 {
                assert!(e.word.count_zeros() > 0);
            }
            // odd 1-based positions carry nonzero digits
            assert!(d.iter().step_by(2).all(|x| x.value() != 0));
            if n >= 3 {
                assert!(d.iter().skip(1).step_by(2).take(d.len() / 2 - 1).any(|x| x.value() != 0));
            }
        }
    }

    #[test]
    fn inc_dec_last() {
        assert_eq!(w(&[1, 0]).inc_last().unwrap(), w(&[1, 1]));
        assert_eq!(w(&[1, 0, -1, 1]).dec_last().unwrap(), w(&[1, 0, -1, 0]));
        assert!(w(&[1]).inc_last().is_err());
        assert!(w(&[-1]).dec_last().is_err());
        assert!(TernaryWord::default().inc_last().is_err());
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(w(&[1, 0, -1]).reflect(), w(&[-1, 0, 1]));
        assert_eq!(eps(2).unwrap().reflect(), w(&[-1, 0, 1, -1]));
    }

    #[test]
    fn shift_examples() {
        let s = w(&[1, 0]).repeat_forever().unwrap();
        assert_eq!(shift(&s, 1), w(&[0, 1]).repeat_forever().unwrap());
        let t = eps_tail(1).unwrap();
        assert_eq!(shift(&t, 2), w(&[-1, 0, 1, 0]).repeat_forever().unwrap());
    }

    proptest! {
        #[test]
        fn reflect_is_involution(v in prop::collection::vec(-1i64..=1, 0..40)) {
            let word = w(&v);
            prop_assert_eq!(word.reflect().reflect(), word);
        }

        #[test]
        fn shift_by_period(pre in prop::collection::vec(-1i64..=1, 0..6),
                           per in prop::collection::vec(-1i64..=1, 1..6)) {
            let s = Periodic::new(w(&pre).into_digits(), w(&per).into_digits()).unwrap();
            prop_assert_eq!(s.shift(pre.len() + per.len()), s.shift(pre.len()));
        }
    }
}
