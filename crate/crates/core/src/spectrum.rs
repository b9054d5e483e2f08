//! Zero densities, the dimension formula `dim = (ln 3 / ln q)·d`, and the
//! dimension spectrum of a base in each of the three regimes.
//!
//! Densities stay exact rationals; only the final scaling by `ln 3 / ln q`
//! is done in floating point.

use num_rational::Ratio;
use num_traits::Signed;
use serde::Serialize;

use crate::bases::{classify_with, BaseValue, EnclosureReport, RegimeLabel, DEFAULT_MAX_N, DEFAULT_TOLERANCE};
use crate::density::{alternating_sum, Density};
use crate::error::{Error, Result};
use crate::expansions::{is_unique_expansion, kl_tail, KLTailDescriptor};
use crate::matching::{analyze, b_blocks};
use crate::words::{eps, lambda_unchecked, zip, Digit, PairDigit, PairSeq, TernarySeq, TernaryWord};

pub const DEFAULT_KL_TERMS: u32 = 32;
pub const DEFAULT_SFT_CAP: u32 = 12;

/// Frequency of the digit 0 in a nonempty word.
pub fn d_star(w: &TernaryWord) -> Result<Density> {
    if w.is_empty() {
        return Err(Error::domain("density of the empty word"));
    }
    Ok(Density::new(w.count_zeros(), w.len()))
}

/// Frequency of 0 over one period, which is the lower density of the sequence.
pub fn d_star_seq(s: &TernarySeq) -> Density {
    let per = s.period();
    Density::new(per.iter().filter(|d| **d == Digit::ZERO).count(), per.len())
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockDensityRow {
    pub n: u32,
    pub d_star: Density,
    pub formula: Density,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockDensityReport {
    pub max_n: u32,
    pub rows: Vec<BlockDensityRow>,
    pub pass: bool,
}

/// Compares `d*(ε_n)` with `−Σ_{i≤n} (−1/2)^i` for `1 ≤ n ≤ max_n`.
pub fn lemma_2_2_check(max_n: u32) -> Result<BlockDensityReport> {
    let rows = (1..=max_n)
        .map(|n| {
            let d = d_star(&eps(n)?.word)?;
            let f = Density::from_ratio(alternating_sum(n));
            Ok(BlockDensityRow { n, d_star: d, formula: f, pass: d == f })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockDensityReport { max_n, pass: rows.iter().all(|r| r.pass), rows })
}

pub fn dim_e(q: f64) -> f64 {
    3f64.ln() / q.ln()
}

/// `(ln 3 / ln q) · d`.
pub fn dimension(q: f64, d: Density) -> f64 {
    dim_e(q) * d.to_f64()
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyTerm {
    pub n: u32,
    pub density: Density,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Family {
    pub terms: Vec<FamilyTerm>,
    /// Limit of the terms when the family is infinite.
    pub accumulation: Option<f64>,
    pub accumulation_density: Option<Density>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntervalPart {
    pub lo: f64,
    pub hi: f64,
    pub density_lo: Density,
    pub density_hi: Density,
    /// The interval is contained in the spectrum; nothing more is claimed.
    pub containment_only: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    /// Band index for finite spectra.
    pub m: Option<u32>,
    /// Block level of the subshift for interval spectra.
    pub n: Option<u32>,
    pub q_enclosure: EnclosureReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionSpectrum {
    pub regime: RegimeLabel,
    pub isolated: Vec<f64>,
    pub family: Option<Family>,
    pub interval: Option<IntervalPart>,
    pub provenance: Provenance,
}

impl DimensionSpectrum {
    /// Isolated points and family terms, sorted.
    pub fn values(&self) -> Vec<f64> {
        let mut v = self.isolated.clone();
        if let Some(f) = &self.family {
            v.extend(f.terms.iter().map(|t| t.value));
        }
        v.sort_by(f64::total_cmp);
        v
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SpectrumOptions {
    pub tolerance: f64,
    pub max_n: u32,
    pub kl_terms: u32,
    pub sft_cap: u32,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_n: DEFAULT_MAX_N,
            kl_terms: DEFAULT_KL_TERMS,
            sft_cap: DEFAULT_SFT_CAP,
        }
    }
}

pub fn spectrum_of(q: &BaseValue) -> Result<DimensionSpectrum> {
    spectrum_with(q, &SpectrumOptions::default())
}

fn family_terms(dim: f64, range: std::ops::RangeInclusive<u32>) -> Vec<FamilyTerm> {
    range
        .map(|n| {
            let d = Density::from_ratio(alternating_sum(n));
            FamilyTerm { n, density: d, value: dim * d.to_f64() }
        })
        .collect()
}

pub fn spectrum_with(q: &BaseValue, opts: &SpectrumOptions) -> Result<DimensionSpectrum> {
    let regime = classify_with(q, opts.tolerance, opts.max_n)?;
    let dim = dim_e(q.value());
    let mut provenance = Provenance { m: None, n: None, q_enclosure: q.into() };
    let spectrum = match regime {
        RegimeLabel::Finite { m } => {
            provenance.m = Some(m);
            let terms = if m > 1 { family_terms(dim, 1..=m - 1) } else { Vec::new() };
            DimensionSpectrum {
                regime,
                isolated: vec![0.0, dim],
                family: Some(Family { terms, accumulation: None, accumulation_density: None }),
                interval: None,
                provenance,
            }
        }
        RegimeLabel::KomornikLoreti => DimensionSpectrum {
            regime,
            isolated: vec![0.0, dim / 3.0, dim],
            family: Some(Family {
                terms: family_terms(dim, 1..=opts.kl_terms),
                accumulation: Some(dim / 3.0),
                accumulation_density: Some(Density::from_ratio(Ratio::new(1, 3))),
            }),
            interval: None,
            provenance,
        },
        RegimeLabel::Interval => {
            let spec = sft_spec_with(q, opts)?;
            let (d1, d2) = sft_densities(&spec)?;
            provenance.n = Some(spec.n);
            DimensionSpectrum {
                regime,
                isolated: vec![0.0, dim],
                family: None,
                interval: Some(IntervalPart {
                    lo: dim * d1.to_f64(),
                    hi: dim * d2.to_f64(),
                    density_lo: d1,
                    density_hi: d2,
                    containment_only: true,
                }),
                provenance,
            }
        }
    };
    Ok(spectrum)
}

pub const LETTER_NAMES: [&str; 4] = ["a", "b", "a_bar", "b_bar"];

/// Rows and columns in the order `a, b, ā, b̄`.
pub const TRANSITION: [[u8; 4]; 4] = [[0, 1, 1, 0], [0, 0, 1, 0], [1, 0, 0, 1], [1, 0, 0, 0]];

const A: usize = 0;
const B: usize = 1;
const A_BAR: usize = 2;
const B_BAR: usize = 3;

/// Letters of the level-`n` subshift and its transition matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SFTSpec {
    pub n: u32,
    /// `a_n = 0·λ_1…λ_{2^n−1}`, `b_n = −1·λ_1…λ_{2^n−1}`, then their reflections.
    pub letters: [TernaryWord; 4],
    pub transition: [[u8; 4]; 4],
}

impl SFTSpec {
    pub fn new(n: u32) -> Result<SFTSpec> {
        if n == 0 {
            return Err(Error::domain("subshift level starts at 1"));
        }
        let body: Vec<Digit> = (1..(1u64 << n)).map(lambda_unchecked).collect();
        let with = |d: Digit| {
            let mut v = vec![d];
            v.extend_from_slice(&body);
            TernaryWord::new(v)
        };
        let a = with(Digit::ZERO);
        let b = with(Digit::NEG);
        let letters = [a.reflect(), b.reflect()];
        let [ab, bb] = letters;
        Ok(SFTSpec { n, letters: [a, b, ab, bb], transition: TRANSITION })
    }

    pub fn word(&self, path: &[usize]) -> TernaryWord {
        path.iter().fold(TernaryWord::default(), |acc, &k| acc.concat(&self.letters[k]))
    }

    /// Every consecutive pair of the cyclic path is allowed.
    pub fn admissible_cycle(&self, path: &[usize]) -> bool {
        (0..path.len()).all(|i| self.transition[path[i]][path[(i + 1) % path.len()]] == 1)
    }
}

/// Letter paths of `u_1 = (b ā b̄ a, b̄ a b ā)` and `u_2 = (ā a, a ā)`.
pub const U1: ([usize; 4], [usize; 4]) = ([B, A_BAR, B_BAR, A], [B_BAR, A, B, A_BAR]);
pub const U2: ([usize; 2], [usize; 2]) = ([A_BAR, A], [A, A_BAR]);

/// All simple cycles of the transition graph, each listed once from its
/// smallest letter.
pub fn simple_cycles() -> Vec<Vec<usize>> {
    fn walk(start: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        for (next, &allowed) in TRANSITION[last].iter().enumerate() {
            if allowed == 0 {
                continue;
            }
            if next == start {
                out.push(path.clone());
            } else if next > start && !path.contains(&next) {
                path.push(next);
                walk(start, path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    for s in 0..4 {
        walk(s, &mut vec![s], &mut out);
    }
    out
}

fn periodic_of(w: TernaryWord) -> TernarySeq {
    w.repeat_forever().expect("letters are nonempty")
}

/// The two pair words as periodic pair sequences.
pub fn u_words(spec: &SFTSpec) -> (PairSeq, PairSeq) {
    let u1 = zip(&periodic_of(spec.word(&U1.0)), &periodic_of(spec.word(&U1.1)));
    let u2 = zip(&periodic_of(spec.word(&U2.0)), &periodic_of(spec.word(&U2.1)));
    (u1, u2)
}

pub fn sft_spec(q: &BaseValue) -> Result<SFTSpec> {
    sft_spec_with(q, &SpectrumOptions::default())
}

/// Smallest level `n ≤ sft_cap` at which both coordinates of `u_1^∞` and
/// `u_2^∞`, and the periodic word of every simple cycle of the transition
/// graph, are unique expansions in base `q`.
pub fn sft_spec_with(q: &BaseValue, opts: &SpectrumOptions) -> Result<SFTSpec> {
    let regime = classify_with(q, opts.tolerance, opts.max_n)?;
    if regime != RegimeLabel::Interval {
        return Err(Error::domain(format!("q is in regime {regime}, not above q_KL")));
    }
    let cycles = simple_cycles();
    let mut diagnostics = Vec::new();
    for n in 1..=opts.sft_cap {
        let spec = SFTSpec::new(n)?;
        let mut words: Vec<TernaryWord> =
            vec![spec.word(&U1.0), spec.word(&U1.1), spec.word(&U2.0), spec.word(&U2.1)];
        words.extend(cycles.iter().map(|c| spec.word(c)));
        let mut failed = None;
        for w in words {
            let s = periodic_of(w);
            if !is_unique_expansion(&s, q)?.unique {
                failed = Some(s.notation());
                break;
            }
        }
        match failed {
            None => return Ok(spec),
            Some(s) => diagnostics.push(format!("n={n}: {s} is not unique")),
        }
    }
    Err(Error::Capability(format!(
        "no subshift level up to {} fits in base {}: {}",
        opts.sft_cap,
        q.value(),
        diagnostics.join("; ")
    )))
}

/// Exact `(0,0)`-densities of `u_1` and `u_2`.
pub fn sft_densities(spec: &SFTSpec) -> Result<(Density, Density)> {
    for path in [&U1.0[..], &U1.1[..], &U2.0[..], &U2.1[..]] {
        if !spec.admissible_cycle(path) {
            return Err(Error::Internal(format!("letter path {path:?} breaks the transition matrix")));
        }
    }
    let (u1, u2) = u_words(spec);
    let (r1, r2) = (analyze(&u1), analyze(&u2));
    if !r1.matched || !r2.matched {
        return Err(Error::Internal(format!("pair words at level {} are not matched", spec.n)));
    }
    Ok((r1.zero_pair_density, r2.zero_pair_density))
}

#[derive(Clone, Debug, Serialize)]
pub struct IntervalWitness {
    pub target: Density,
    /// Block choices in order: 1 for `u_1`, 2 for `u_2`.
    pub choices: Vec<u8>,
    pub length: usize,
    pub zero_pairs: usize,
    pub frequency: f64,
    #[serde(skip)]
    pub prefix: Vec<PairDigit>,
}

/// Greedy concatenation of `u_1` and `u_2` whose running `(0,0)`-frequency
/// tracks `target`: below target append `u_2`, above append `u_1`, on target
/// append whichever block density is closer (ties go to `u_1`).
pub fn interval_witness(spec: &SFTSpec, target: Ratio<i64>, length: usize) -> Result<IntervalWitness> {
    let (d1, d2) = sft_densities(spec)?;
    if target < d1.ratio() || target > d2.ratio() {
        return Err(Error::domain(format!("target {target} outside [{d1}, {d2}]")));
    }
    let (u1, u2) = u_words(spec);
    let blocks = [u1.period().to_vec(), u2.period().to_vec()];
    let zeros = |b: &[PairDigit]| b.iter().filter(|p| p.0 == Digit::ZERO && p.1 == Digit::ZERO).count();
    let bz = [zeros(&blocks[0]), zeros(&blocks[1])];
    let (tn, td) = (*target.numer() as i128, *target.denom() as i128);
    let mut prefix = Vec::with_capacity(length + blocks[0].len());
    let mut choices = Vec::new();
    let mut z = 0usize;
    while prefix.len() < length {
        // compare z/len with tn/td without rounding
        let lhs = z as i128 * td;
        let rhs = tn * prefix.len() as i128;
        let k = if lhs < rhs {
            1
        } else if lhs > rhs {
            0
        } else {
            let (e1, e2) = ((d1.ratio() - target).abs(), (d2.ratio() - target).abs());
            usize::from(e2 < e1)
        };
        prefix.extend_from_slice(&blocks[k]);
        z += bz[k];
        choices.push(k as u8 + 1);
    }
    Ok(IntervalWitness {
        target: Density::from_ratio(target),
        choices,
        length: prefix.len(),
        zero_pairs: z,
        frequency: z as f64 / prefix.len() as f64,
        prefix,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TailFamilyRow {
    pub j: Vec<u64>,
    pub l: Vec<u8>,
    pub length: usize,
    pub frequency: f64,
    pub deviation: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockRow {
    pub n: u32,
    pub block: usize,
    pub d_star: Density,
    pub expected: Density,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KlDensityReport {
    pub horizon: usize,
    pub bound_level: u32,
    pub families: Vec<TailFamilyRow>,
    pub blocks: Vec<BlockRow>,
    /// Zero frequency of `(ε_0 ε̄_0)^∞`, which is left out of the claim.
    pub excluded_frequency: Density,
    pub pass: bool,
}

/// Expected `d*(B_k^∞)`: `1/3 ∓ 1/(3·2^{n+1})` for `k = 1, 3` and
/// `1/3 ± 1/(3·2^{n+2})` for `k = 2, 4`, upper signs for odd `n`.
pub fn block_density_formula(n: u32, k: usize) -> Ratio<i64> {
    let third = Ratio::new(1, 3);
    let sign = if n % 2 == 1 { 1 } else { -1 };
    match k {
        1 | 3 => third - Ratio::new(sign, 3 * (1i64 << (n + 1))),
        _ => third + Ratio::new(sign, 3 * (1i64 << (n + 2))),
    }
}

/// Zero frequencies of block-tail prefixes against `1/3`.
///
/// Each family is a uniform exponent pattern `(j, l)` with enough levels to
/// fill `horizon` digits; the bound is `1/(3·2^{bound_level+1})`. The block
/// rows compare `d*(B_k^∞)` with [`block_density_formula`] for `n ≤ 8`.
pub fn kl_density_check(families: &[(u64, u8)], horizon: usize, bound_level: u32) -> Result<KlDensityReport> {
    let bound = 1.0 / (3.0 * (1u64 << (bound_level + 1)) as f64);
    let levels = (usize::BITS - horizon.leading_zeros()) as usize + 1;
    let mut rows = Vec::new();
    for &(j, l) in families {
        if j == 0 && l == 0 {
            return Err(Error::domain("family with all exponents zero is empty"));
        }
        let desc = KLTailDescriptor::uniform(j, l, levels, horizon);
        let w = kl_tail(&desc)?;
        if w.len() < horizon {
            return Err(Error::Internal("tail shorter than the horizon".into()));
        }
        let freq = d_star(&w)?.to_f64();
        let deviation = (freq - 1.0 / 3.0).abs();
        rows.push(TailFamilyRow {
            j: desc.j.clone(),
            l: desc.l.clone(),
            length: w.len(),
            frequency: freq,
            deviation,
            bound,
            pass: deviation < bound,
        });
    }
    let mut blocks = Vec::new();
    for n in 1..=8u32 {
        for (k, b) in b_blocks(n)?.iter().enumerate() {
            let d = d_star(b)?;
            let expected = Density::from_ratio(block_density_formula(n, k + 1));
            blocks.push(BlockRow { n, block: k + 1, d_star: d, expected, pass: d == expected });
        }
    }
    let excluded = d_star_seq(&eps(0)?.tail());
    let pass = rows.iter().all(|r| r.pass) && blocks.iter().all(|r| r.pass);
    Ok(KlDensityReport { horizon, bound_level, families: rows, blocks, excluded_frequency: excluded, pass })
}

pub const DEFAULT_KL_FAMILIES: [(u64, u8); 4] = [(1, 1), (1, 0), (2, 1), (3, 0)];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{base_root, kl_constant};

    fn base(s: &str) -> BaseValue {
        BaseValue::parse(s).unwrap()
    }

    #[test]
    fn d_star_examples() {
        assert_eq!(d_star(&eps(2).unwrap().word).unwrap(), Density::new(1, 4));
        assert_eq!(d_star(&eps(3).unwrap().word).unwrap(), Density::new(3, 8));
        assert_eq!(d_star(&eps(4).unwrap().word).unwrap(), Density::new(5, 16));
        assert_eq!(d_star_seq(&TernarySeq::parse("0^inf").unwrap()), Density::new(1, 1));
        assert!(d_star(&TernaryWord::default()).is_err());
    }

    #[test]
    fn lemma_2_2_to_16() {
        let r = lemma_2_2_check(16).unwrap();
        assert!(r.pass);
        assert_eq!(r.rows[0].d_star, Density::new(1, 2));
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(2.5, Density::new(0, 1)), 0.0);
        assert_eq!(dimension(2.5, Density::new(1, 1)), 3f64.ln() / 2.5f64.ln());
        assert!((dimension(2.2, Density::new(1, 2)) - 3f64.ln() / (2.0 * 2.2f64.ln())).abs() < 1e-15);
        assert!((dimension(2.2, Density::new(1, 2)) - 0.696685).abs() < 1e-6);
    }

    #[test]
    fn dimension_monotonicity() {
        let ds: Vec<Density> = (0..=8).map(|k| Density::new(k, 8)).collect();
        for q in [2.1, 2.5, 2.9] {
            for w in ds.windows(2) {
                assert!(dimension(q, w[0]) < dimension(q, w[1]));
            }
        }
        for w in [2.1, 2.3, 2.5, 2.7, 2.9].windows(2) {
            assert!(dimension(w[0], Density::new(1, 3)) > dimension(w[1], Density::new(1, 3)));
        }
    }

    #[test]
    fn finite_spectra() {
        let s = spectrum_of(&base("2.2")).unwrap();
        assert_eq!(s.regime, RegimeLabel::Finite { m: 1 });
        assert_eq!(s.values().len(), 2);
        let q3 = base_root(3).unwrap();
        let s = spectrum_of(&q3).unwrap();
        assert_eq!(s.regime, RegimeLabel::Finite { m: 2 });
        let d = dim_e(q3.value());
        let v = s.values();
        assert_eq!(v.len(), 3);
        assert!((v[1] - d / 2.0).abs() < 1e-12);
        assert!(s.interval.is_none());
    }

    #[test]
    fn kl_spectrum_family_gaps() {
        let q = kl_constant(1e-10).unwrap();
        let s = spectrum_of(&q).unwrap();
        assert_eq!(s.regime, RegimeLabel::KomornikLoreti);
        let f = s.family.unwrap();
        assert_eq!(f.terms.len(), DEFAULT_KL_TERMS as usize);
        for t in &f.terms {
            let gap = (t.density.ratio() - Ratio::new(1, 3)).abs();
            assert_eq!(gap, Ratio::new(1, 3 * (1i64 << t.n)));
        }
    }

    #[test]
    fn sft_letters_and_cycles() {
        let s = SFTSpec::new(2).unwrap();
        assert_eq!(s.letters[0], TernaryWord::from_values(&[0, 1, 0, -1]).unwrap());
        assert_eq!(s.letters[1], TernaryWord::from_values(&[-1, 1, 0, -1]).unwrap());
        assert!(s.admissible_cycle(&U1.0) && s.admissible_cycle(&U1.1));
        assert!(s.admissible_cycle(&U2.0) && s.admissible_cycle(&U2.1));
        let cycles = simple_cycles();
        assert_eq!(cycles.len(), 4);
        assert!(cycles.iter().all(|c| s.admissible_cycle(c)));
    }

    #[test]
    fn sft_density_closed_forms() {
        for n in 1..=10u32 {
            let spec = SFTSpec::new(n).unwrap();
            let (d1, d2) = sft_densities(&spec).unwrap();
            let z = spec.letters[0].count_zeros() as i64 - 1;
            assert_eq!(d1.ratio(), Ratio::new(2 * z + 1, 1 << (n + 1)));
            assert_eq!(d2.ratio(), Ratio::new(z + 1, 1 << n));
            assert!(d1 < d2);
        }
        let (d1, d2) = sft_densities(&SFTSpec::new(2).unwrap()).unwrap();
        assert_eq!((d1, d2), (Density::new(3, 8), Density::new(1, 2)));
    }

    #[test]
    fn interval_spectra() {
        for s in ["2.6", "2.75", "2.9"] {
            let q = base(s);
            let spec = sft_spec(&q).unwrap();
            assert!(spec.n <= 12);
            let sp = spectrum_of(&q).unwrap();
            let iv = sp.interval.unwrap();
            assert!(iv.containment_only);
            assert!(0.0 < iv.lo && iv.lo < iv.hi && iv.hi < dim_e(q.value()));
        }
        assert!(matches!(sft_spec(&base("2.2")), Err(Error::Domain(_))));
    }

    #[test]
    fn interval_witness_endpoints() {
        let spec = SFTSpec::new(1).unwrap();
        let (d1, d2) = sft_densities(&spec).unwrap();
        let w = interval_witness(&spec, d1.ratio(), 100).unwrap();
        assert!(w.choices.iter().all(|&c| c == 1));
        let w = interval_witness(&spec, d2.ratio(), 100).unwrap();
        assert!(w.choices.iter().all(|&c| c == 2));
        assert!(interval_witness(&spec, Ratio::new(0, 1), 10).is_err());
    }

    #[test]
    fn kl_density_rows() {
        let r = kl_density_check(&DEFAULT_KL_FAMILIES, 1 << 14, 6).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.excluded_frequency, Density::new(0, 1));
        let b1 = &r.blocks[0];
        assert_eq!((b1.n, b1.block), (1, 1));
    }
}
