//! The acceptance battery, shared by `gasket selftest` and the `acceptance`
//! test target.

use std::time::{Duration, Instant};

use num_rational::Ratio;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bases::{base_root, kl_constant, BaseValue, RegimeLabel};
use crate::density::{alternating_sum, Density};
use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::expansions::is_unique_expansion;
use crate::geometry::build_intersection;
use crate::matching::{
    analyze, e_seq, verify_lemma_3_1, verify_lemma_3_2, verify_lemma_3_4, Variant, OMEGA2,
};
use crate::spectrum::{
    dim_e, dimension, interval_witness, kl_density_check, sft_densities, sft_spec, spectrum_of, spectrum_with,
    u_words, SpectrumOptions, DEFAULT_KL_FAMILIES, U1, U2,
};
use crate::words::{eps, eps_tail, Digit, PairDigit, PairSeq, TernaryWord};

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifierRange {
    pub verifier: &'static str,
    pub n_range: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
    pub verifiers: Vec<VerifierRange>,
    pub pass: bool,
}

pub const VERIFIERS: [VerifierRange; 5] = [
    VerifierRange { verifier: "lemma_2_2", n_range: "1..=16" },
    VerifierRange { verifier: "lemma_3_1", n_range: "1..=10" },
    VerifierRange { verifier: "lemma_3_2 (minus, plain)", n_range: "3..=10" },
    VerifierRange { verifier: "lemma_3_4", n_range: "1 <= n <= m <= 8" },
    VerifierRange { verifier: "kl_density_check", n_range: "horizon 2^14, blocks n = 1..=8" },
];

/// Supplies `ε_n` to the checks that consume the block table.
pub type BlockProvider<'a> = &'a dyn Fn(u32) -> Result<TernaryWord>;

pub fn library_blocks(n: u32) -> Result<TernaryWord> {
    Ok(eps(n)?.word)
}

fn timed(id: &str, name: &str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckResult {
    let t = Instant::now();
    let (pass, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckResult { id: id.into(), name: name.into(), pass, detail, elapsed_ms: t.elapsed().as_millis() }
}

fn within(t: Instant, limit: Duration) -> bool {
    t.elapsed() < limit
}

/// `ε_{n+1} = ε_n (ε̄_n)^+` for `n < max_n`.
pub fn p1_check(blocks: BlockProvider, max_n: u32) -> CheckResult {
    timed("P1", "block recursion", || {
        let mut bad = Vec::new();
        for n in 0..max_n {
            let e = blocks(n)?;
            let next = blocks(n + 1)?;
            if next != e.concat(&e.reflect().inc_last()?) {
                bad.push(n);
            }
        }
        Ok((bad.is_empty(), format!("n = 0..{max_n}, mismatches at {bad:?}")))
    })
}

pub fn criterion_1(blocks: BlockProvider) -> CheckResult {
    timed("1", "block zero densities", || {
        let t = Instant::now();
        let mut bad = Vec::new();
        for n in 1..=16u32 {
            let w = blocks(n)?;
            let d = Density::new(w.count_zeros(), w.len());
            if d.ratio() != alternating_sum(n) {
                bad.push(n);
            }
        }
        let fast = within(t, Duration::from_secs(1));
        Ok((bad.is_empty() && fast, format!("n = 1..=16, mismatches {bad:?}, under 1 s: {fast}")))
    })
}

pub fn criterion_2() -> CheckResult {
    timed("2", "shifted block trichotomy", || {
        let t = Instant::now();
        let mut bad = Vec::new();
        for n in 1..=10 {
            if !verify_lemma_3_1(n)?.pass {
                bad.push(n);
            }
        }
        let fast = within(t, Duration::from_secs(10));
        Ok((bad.is_empty() && fast, format!("n = 1..=10, failing {bad:?}, under 10 s: {fast}")))
    })
}

pub fn criterion_3() -> CheckResult {
    timed("3", "block variant witnesses", || {
        let mut bad = Vec::new();
        for n in 3..=10u32 {
            for v in [Variant::Minus, Variant::Plain] {
                let r = verify_lemma_3_2(n, v)?;
                let (half, top) = (1usize << n, 1usize << (n + 2));
                let shifts_ok = r.witnesses.len() == 2 * half - 1
                    && r.witnesses.iter().enumerate().all(|(k, w)| {
                        w.i == k + 1
                            && w.u > 0
                            && w.u < top
                            && w.u != 2 * half
                            && (w.term == (1, 1) || w.term == (-1, -1))
                    });
                let aligned = r.checks.values().all(|v| v.as_bool() == Some(true)) && !r.checks.is_empty();
                if !(r.pass && shifts_ok && aligned) {
                    bad.push(format!("{n}/{v:?}"));
                }
            }
        }
        Ok((bad.is_empty(), format!("n = 3..=10, both variants, failing {bad:?}")))
    })
}

pub fn criterion_4() -> CheckResult {
    timed("4", "cross-level shifts", || {
        let mut bad = Vec::new();
        for m in 1..=8u32 {
            for n in 1..=m {
                let r = verify_lemma_3_4(n, m)?;
                let ok = if n == m {
                    let a = analyze(&e_seq(n, n, 1 << n)?);
                    r.pass && a.matched && a.zero_pair_in_period
                } else {
                    r.pass && r.witnesses.len() == (1 << (n + 1)) - 1
                };
                if !ok {
                    bad.push((n, m));
                }
            }
        }
        Ok((bad.is_empty(), format!("1 <= n <= m <= 8, failing {bad:?}")))
    })
}

/// Bisection root of `q² − 2q − 1` on `[2, 3]`.
fn silver_oracle() -> f64 {
    let (mut lo, mut hi) = (2.0f64, 3.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid - 2.0 * mid - 1.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn criterion_5() -> CheckResult {
    timed("5", "base ladder", || {
        let two = Dyadic::from_i64(2);
        let q1 = base_root(1)?;
        let first = *q1.lo() == two && *q1.hi() == two;
        let q2 = base_root(2)?;
        let second = (q2.value() - silver_oracle()).abs() <= 1e-12 && q2.radius() <= 1e-12;
        let mut order = true;
        let mut prev = q1;
        for n in 2..=12 {
            let q = base_root(n)?;
            order &= prev.hi() < q.lo();
            prev = q;
        }
        Ok((
            first && second && order,
            format!("q_1 exact: {first}, q_2 vs bisection: {second}, disjoint increasing to n = 12: {order}"),
        ))
    })
}

/// An exact point strictly inside `(q_m, q_{m+1})`.
pub fn band_midpoint(m: u32) -> Result<BaseValue> {
    let (a, b) = (base_root(m)?, base_root(m + 1)?);
    let mid = Dyadic::midpoint(a.hi(), b.lo());
    Ok(BaseValue::exact(mid))
}

pub fn criterion_6() -> CheckResult {
    timed("6", "finite spectra", || {
        let mut notes = Vec::new();
        let q = BaseValue::parse("2.2")?;
        let s = spectrum_of(&q)?;
        let d = 3f64.ln() / 2.2f64.ln();
        let v = s.values();
        let a = v.len() == 2 && v[0] == 0.0 && (v[1] - d).abs() <= 1e-12;
        if !a {
            notes.push(format!("2.2 gave {v:?}"));
        }
        let q3 = base_root(3)?;
        let s = spectrum_of(&q3)?;
        let d = 3f64.ln() / q3.value().ln();
        let v = s.values();
        let b = v.len() == 3 && v[0] == 0.0 && (v[1] - d / 2.0).abs() <= 1e-12 && (v[2] - d).abs() <= 1e-12;
        if !b {
            notes.push(format!("q_3 gave {v:?}"));
        }
        let mut c = true;
        for m in 1..=6 {
            let q = band_midpoint(m)?;
            let s = spectrum_of(&q)?;
            let terms = s.family.as_ref().map(|f| f.terms.clone()).unwrap_or_default();
            let ok = s.regime == RegimeLabel::Finite { m }
                && terms.len() == m as usize - 1
                && terms.iter().all(|t| t.density.ratio() == alternating_sum(t.n));
            if !ok {
                notes.push(format!("band {m}"));
            }
            c &= ok;
        }
        Ok((a && b && c, format!("2.2, q_3, band midpoints m = 1..=6; problems {notes:?}")))
    })
}

pub fn criterion_7() -> CheckResult {
    timed("7", "spectrum at q_KL", || {
        let q = kl_constant(1e-10)?;
        let opts = SpectrumOptions { tolerance: 1e-10, ..Default::default() };
        let s = spectrum_with(&q, &opts)?;
        let d = dim_e(q.value());
        let regime = s.regime == RegimeLabel::KomornikLoreti;
        let iso = s.isolated.len() == 3 && s.isolated.iter().any(|&x| (x - d / 3.0).abs() <= 1e-12);
        let fam = s.family.as_ref().is_some_and(|f| {
            f.accumulation_density == Some(Density::from_ratio(Ratio::new(1, 3)))
                && f.terms.iter().all(|t| {
                    let gap = (Ratio::new(1, 3) - t.density.ratio()).abs();
                    gap == Ratio::new(1, 3 * (1i64 << t.n))
                })
        });
        let check = kl_density_check(&DEFAULT_KL_FAMILIES, 1 << 14, 6)?;
        Ok((
            regime && iso && fam && check.pass,
            format!("regime {regime}, isolated {iso}, family gaps {fam}, density check {}", check.pass),
        ))
    })
}

pub fn criterion_8() -> CheckResult {
    timed("8", "interval spectra", || {
        let mut notes = Vec::new();
        for lit in ["2.6", "2.75", "2.9"] {
            let q = BaseValue::parse(lit)?;
            let spec = sft_spec(&q)?;
            let (u1, u2) = u_words(&spec);
            let matched = analyze(&u1).matched && analyze(&u2).matched;
            let admissible = [&U1.0[..], &U1.1[..], &U2.0[..], &U2.1[..]].iter().all(|p| spec.admissible_cycle(p));
            let (d1, d2) = sft_densities(&spec)?;
            let target = (d1.ratio() + d2.ratio()) / 2;
            let w = interval_witness(&spec, target, 100_000)?;
            let close = (w.frequency - Density::from_ratio(target).to_f64()).abs() <= 2.0 / u1.period().len() as f64;
            let ok = spec.n <= 12 && matched && admissible && d1 < d2 && close;
            notes.push(format!("{lit}: n = {}, d = {d1} < {d2}, ok {ok}", spec.n));
            if !ok {
                return Ok((false, notes.join("; ")));
            }
        }
        Ok((true, notes.join("; ")))
    })
}

/// Tails `(ε_k ε̄_k)^∞` against the band index, `k = n − 1`.
pub fn criterion_9() -> CheckResult {
    timed("9", "tail catalogue concordance", || {
        let mut discrepancies = Vec::new();
        for m in 1..=6u32 {
            let q = band_midpoint(m)?;
            for n in 1..=m + 1 {
                let expect = n <= m;
                let got = is_unique_expansion(&eps_tail(n as i32 - 1)?, &q)?.unique;
                if got != expect {
                    discrepancies.push(format!("m={m} n={n} expected {expect}"));
                }
            }
        }
        Ok((
            discrepancies.is_empty(),
            format!("{} discrepancies {discrepancies:?}", discrepancies.len()),
        ))
    })
}

/// A random matched eventually periodic pair sequence.
pub fn random_matched(rng: &mut ChaCha8Rng) -> Result<PairSeq> {
    fn draw(rng: &mut ChaCha8Rng, len: usize) -> Result<Vec<PairDigit>> {
        (0..len)
            .map(|_| {
                let (a, b) = OMEGA2[rng.gen_range(0..OMEGA2.len())];
                Ok((Digit::new(a as i64)?, Digit::new(b as i64)?))
            })
            .collect()
    }
    let (pre, per) = (rng.gen_range(0..4), rng.gen_range(1..7));
    let pre = draw(rng, pre)?;
    let per = draw(rng, per)?;
    PairSeq::new(pre, per)
}

pub fn criterion_10() -> CheckResult {
    timed("10", "intersection counting law", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut bad = Vec::new();
        for k in 0..20 {
            let t = random_matched(&mut rng)?;
            let depth = rng.gen_range(4..=10);
            let q = rng.gen_range(2.05..2.95);
            let z = (0..depth).filter(|&i| {
                let p = t.get(i);
                p.0 == Digit::ZERO && p.1 == Digit::ZERO
            });
            let z = z.count() as u32;
            let n = build_intersection(q, &t, depth)?.points.len();
            if n != 3usize.pow(z) {
                bad.push(k);
            }
        }
        let q = 2.5f64;
        let t = e_seq(1, 1, 2)?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for depth in 4..=10usize {
            xs.push(depth as f64 * q.ln());
            ys.push((build_intersection(q, &t, depth)?.points.len() as f64).ln());
        }
        let slope = least_squares_slope(&xs, &ys);
        let target = dimension(q, Density::new(1, 2));
        let fit = (slope - target).abs() <= 0.02;
        Ok((
            bad.is_empty() && fit,
            format!("20 random cases, failing {bad:?}; slope {slope:.5} vs {target:.5}"),
        ))
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Argument lists exercised by the determinism check.
pub const DETERMINISM_ARGV: &[&[&str]] = &[
    &["bases", "--max-n", "6"],
    &["classify", "--q", "2.45"],
    &["classify", "--q", "kl", "--tolerance", "1e-10"],
    &["expand", "--q", "2.5", "--x", "0.3", "--depth", "24"],
    &["unique", "--q", "2.6", "--seq", "+0-;0+^inf"],
    &["density", "--pair", "-0+0^inf|+0-0^inf", "--q", "2.5"],
    &["density", "--eps", "6"],
    &["verify", "--lemma", "3.1", "--n", "4"],
    &["verify", "--lemma", "3.2", "--n", "3", "--variant", "plain"],
    &["verify", "--lemma", "3.4", "--n", "2", "--m", "5"],
    &["verify", "--lemma", "blocks", "--n", "3", "--upper", "12", "--lower", "34"],
    &["dq", "--q", "2.2"],
    &["dq", "--q", "kl", "--tolerance", "1e-10", "--kl-terms", "8"],
    &["dq", "--q", "2.75"],
    &["render", "--q", "2.5", "--t-seq", "-0+0^inf|+0-0^inf", "--depth", "5", "--format", "svg"],
];

pub fn criterion_11() -> CheckResult {
    timed("11", "determinism", || {
        let mut bad = Vec::new();
        for argv in DETERMINISM_ARGV {
            let mut args: Vec<&str> = vec!["gasket"];
            args.extend_from_slice(argv);
            if !argv.contains(&"--format") {
                args.extend(["--format", "json"]);
            }
            let run = || {
                let mut out = Vec::new();
                let mut err = Vec::new();
                let code = crate::cli::dispatch(args.iter().copied(), |_| None, &mut out, &mut err);
                (code, out)
            };
            let (c1, o1) = run();
            let (c2, o2) = run();
            if c1 != 0 || c1 != c2 || o1 != o2 || o1.is_empty() {
                bad.push(argv.join(" "));
            }
        }
        Ok((bad.is_empty(), format!("{} commands run twice, differing or failing {bad:?}", DETERMINISM_ARGV.len())))
    })
}

pub fn run_with(blocks: BlockProvider) -> SelftestReport {
    let checks = vec![
        p1_check(blocks, 16),
        criterion_1(blocks),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
    ];
    let pass = checks.iter().all(|c| c.pass);
    SelftestReport { checks, verifiers: VERIFIERS.to_vec(), pass }
}

pub fn run() -> SelftestReport {
    run_with(&library_blocks)
}
