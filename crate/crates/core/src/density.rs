use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

/// An exact frequency in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Density(Ratio<i64>);

impl Density {
    pub fn new(count: usize, len: usize) -> Density {
        assert!(len > 0 && count <= len, "density {count}/{len} out of range");
        Density(Ratio::new(count as i64, len as i64))
    }

    pub fn from_ratio(r: Ratio<i64>) -> Density {
        Density(r)
    }

    pub fn ratio(self) -> Ratio<i64> {
        self.0
    }

    pub fn numer(self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(self) -> i64 {
        *self.0.denom()
    }

    pub fn to_f64(self) -> f64 {
        self.numer() as f64 / self.denom() as f64
    }
}

impl fmt::Display for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl Serialize for Density {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `−Σ_{i=1}^n (−1/2)^i`, exactly.
pub fn alternating_sum(n: u32) -> Ratio<i64> {
    let mut acc = Ratio::from_integer(0);
    let mut term = Ratio::from_integer(1);
    for _ in 0..n {
        term *= Ratio::new(-1, 2);
        acc -= term;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_values() {
        assert_eq!(alternating_sum(0), Ratio::from_integer(0));
        assert_eq!(alternating_sum(1), Ratio::new(1, 2));
        assert_eq!(alternating_sum(2), Ratio::new(1, 4));
        assert_eq!(alternating_sum(3), Ratio::new(3, 8));
        assert_eq!(alternating_sum(4), Ratio::new(5, 16));
        // closed form 1/3 − (−1/2)^n / 3
        for n in 0..40u32 {
            let pow = Ratio::new(if n % 2 == 0 { 1 } else { -1 }, 1i64 << n);
            assert_eq!(alternating_sum(n), (Ratio::from_integer(1) - pow) / 3);
        }
    }

    #[test]
    fn reduced_display() {
        assert_eq!(Density::new(6, 16).to_string(), "3/8");
        assert_eq!(serde_json::to_string(&Density::new(2, 4)).unwrap(), "\"1/2\"");
    }
}
