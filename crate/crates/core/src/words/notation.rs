//! Text form of words and eventually periodic sequences.
//!
//! ```text
//! seq    := [word ";"] word "^inf"
//! word   := packed | listed
//! packed := { "+" | "0" | "-" }          e.g.  +0-0
//! listed := int { "," int }              e.g.  1,0,-1,0
//! pair   := seq "|" seq
//! ```
//!
//! `1` is accepted for `+` in packed form and `∞` for `inf`. A bare integer
//! such as `-1` is a one-digit listed word. Whitespace is ignored. The empty
//! word is written as nothing.

use super::{zip, Digit, PairSeq, Periodic, TernarySeq, TernaryWord};
use crate::error::{Error, Result};

impl TernaryWord {
    pub fn parse(s: &str) -> Result<TernaryWord> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Ok(TernaryWord::default());
        }
        if s.contains(',') || matches!(s.as_str(), "-1" | "−1") {
            return s
                .split(',')
                .map(|tok| {
                    let tok = tok.replace('−', "-");
                    let v: i64 = tok.parse().map_err(|_| Error::parse(format!("bad digit {tok:?}")))?;
                    Digit::new(v).map_err(|e| Error::parse(e.to_string()))
                })
                .collect();
        }
        s.chars()
            .map(|c| match c {
                '+' | '1' => Ok(Digit::POS),
                '0' => Ok(Digit::ZERO),
                '-' | '−' => Ok(Digit::NEG),
                _ => Err(Error::parse(format!("bad digit symbol {c:?} in {s:?}"))),
            })
            .collect()
    }
}

impl Periodic<Digit> {
    pub fn parse(s: &str) -> Result<TernarySeq> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let body = t
            .strip_suffix("^inf")
            .or_else(|| t.strip_suffix("^∞"))
            .ok_or_else(|| Error::parse(format!("sequence {s:?} must end with ^inf")))?;
        let (pre, per) = match body.split_once(';') {
            Some((a, b)) => (a, b),
            None => ("", body),
        };
        let per = TernaryWord::parse(per)?;
        if per.is_empty() {
            return Err(Error::parse(format!("sequence {s:?} has an empty period")));
        }
        Periodic::new(TernaryWord::parse(pre)?.into_digits(), per.into_digits())
    }

    /// Packed notation, e.g. `0;+0-0^inf`.
    pub fn notation(&self) -> String {
        let pre = TernaryWord::new(self.preperiod().to_vec());
        let per = TernaryWord::new(self.period().to_vec());
        if pre.is_empty() {
            format!("{per}^inf")
        } else {
            format!("{pre};{per}^inf")
        }
    }
}

impl Periodic<(Digit, Digit)> {
    /// Parses `X|Y` into the zipped pair sequence.
    pub fn parse(s: &str) -> Result<PairSeq> {
        let (a, b) = s
            .split_once('|')
            .ok_or_else(|| Error::parse(format!("pair sequence {s:?} must have the form X|Y")))?;
        Ok(zip(&TernarySeq::parse(a)?, &TernarySeq::parse(b)?))
    }

    /// `X|Y` notation; the two sides share the preperiod and period lengths.
    pub fn notation(&self) -> String {
        let side = |f: fn(&(Digit, Digit)) -> Digit| {
            let pre: TernaryWord = self.preperiod().iter().map(f).collect();
            let per: TernaryWord = self.period().iter().map(f).collect();
            if pre.is_empty() {
                format!("{per}^inf")
            } else {
                format!("{pre};{per}^inf")
            }
        };
        format!("{}|{}", side(|p| p.0), side(|p| p.1))
    }

    pub fn firsts(&self) -> TernarySeq {
        self.map(|p| p.0)
    }

    pub fn seconds(&self) -> TernarySeq {
        self.map(|p| p.1)
    }
}
