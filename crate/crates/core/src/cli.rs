//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain error or failed check, 2 usage or parse
//! error, 3 precision or ambiguity error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use crate::bases::{base_root, kl_constant_capped, ladder_gaps, ladder_word, BaseValue, EnclosureReport, RegimeLabel};
use crate::bases::{classify_with, LADDER_HARD_CAP};
use crate::config::{Format, Overrides, RunConfig};
use crate::density::{alternating_sum, Density};
use crate::error::{Error, Result};
use crate::expansions::{evaluate, greedy_expand, is_unique_expansion_with, UniqueVerdict};
use crate::geometry::{build_gasket, build_intersection, build_translate, render_ppm, render_svg, PointCloud};
use crate::matching::{analyze, verify_block_case, verify_lemma_3_1, verify_lemma_3_2, verify_lemma_3_4, MatchReport};
use crate::report::Report;
use crate::selftest;
use crate::spectrum::{d_star, d_star_seq, dimension, spectrum_with, DimensionSpectrum, SpectrumOptions};
use crate::words::{eps_capped, Digit, PairSeq, TernarySeq};

const LONG_ABOUT: &str = "\
Dimension spectrum of Sierpinski gasket self-intersections in bases q in (2, 3).

Bases: a decimal literal such as 2.45, or `kl` for the Komornik-Loreti constant
enclosed to the configured tolerance.

Sequences: `[pre;]per^inf` with digits packed as + 0 - (or 1 0 -) or listed
with commas, e.g. `+0-;0+^inf` or `1,0,-1;0,1^inf`. Pair sequences join two
sequences with `|`, e.g. `-0+0^inf|+0-0^inf`.

Configuration, highest priority first: flags, GS_* environment variables
(GS_TOLERANCE, GS_MAX_N, GS_KL_TERMS, GS_ALPHA_HORIZON, GS_MAX_BLOCK_EXPONENT,
GS_FORMAT), the TOML file given by --config, built-in defaults.

Exit codes: 0 success, 1 domain error or failed check, 2 usage error,
3 precision or ambiguity error.";

#[derive(Debug, Parser)]
#[command(name = "gasket", version, about = "Dimension spectrum of gasket self-intersections", long_about = LONG_ABOUT)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output format. `svg` and `ppm` only apply to `render`.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Width bound for base enclosures and q_KL.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Highest ladder level used for classification.
    #[arg(long, global = true)]
    pub max_n: Option<u32>,
    /// Number of family terms listed at q_KL.
    #[arg(long, global = true)]
    pub kl_terms: Option<u32>,
    /// Initial number of quasi-greedy digits for uniqueness tests.
    #[arg(long, global = true)]
    pub alpha_horizon: Option<usize>,
    /// Largest block exponent n for 2^n-digit words.
    #[arg(long, global = true)]
    pub max_block_exponent: Option<u32>,
    /// Add wall-clock milliseconds to the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ladder words w_n, certified roots q_n and the q_KL enclosure.
    Bases,
    /// Regime of a base: Finite(m), KomornikLoreti or Interval.
    Classify {
        #[arg(long)]
        q: String,
    },
    /// Greedy expansion of x over {-1, 0, 1}.
    Expand {
        #[arg(long)]
        q: String,
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 32)]
        depth: usize,
    },
    /// Whether an eventually periodic sequence is the unique expansion of its value.
    Unique {
        #[arg(long)]
        q: String,
        #[arg(long, allow_hyphen_values = true)]
        seq: String,
    },
    /// Zero densities of a sequence, a pair sequence or a block eps_n.
    Density {
        #[command(flatten)]
        source: DensitySource,
        /// Also report (ln 3 / ln q) times the density.
        #[arg(long)]
        q: Option<String>,
    },
    /// Exhaustive finite checks of the block matching statements.
    Verify {
        /// One of 3.1, 3.2, 3.4, blocks.
        #[arg(long)]
        lemma: String,
        #[arg(long)]
        n: u32,
        /// Second level for 3.4 (defaults to n).
        #[arg(long)]
        m: Option<u32>,
        /// minus or plain, for 3.2.
        #[arg(long, default_value = "minus")]
        variant: String,
        /// Upper block pattern over 1..4, for blocks.
        #[arg(long)]
        upper: Option<String>,
        /// Lower block pattern over 1..4, for blocks.
        #[arg(long)]
        lower: Option<String>,
        #[arg(long)]
        max_shift: Option<usize>,
    },
    /// The dimension spectrum D_q.
    Dq {
        #[arg(long)]
        q: String,
    },
    /// Picture of E, E + t and their intersection at finite depth.
    Render {
        #[arg(long)]
        q: String,
        /// Pair expansion of t, `X|Y`.
        #[arg(long, allow_hyphen_values = true)]
        t_seq: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Image file; without it the image goes to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma list drawn in order, from e, et, int.
        #[arg(long, default_value = "e,et,int")]
        layers: String,
        /// Raster side in pixels for ppm.
        #[arg(long, default_value_t = 512)]
        size: usize,
    },
    /// Run the acceptance battery.
    Selftest,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DensitySource {
    #[arg(long, allow_hyphen_values = true)]
    seq: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pair: Option<String>,
    #[arg(long)]
    eps: Option<u32>,
}

/// What a command hands back: a serializable result, its text rendering and
/// whether it counts as success.
struct Outcome {
    json: String,
    text: String,
    ok: bool,
    raw: Option<Vec<u8>>,
}

struct Ctx<'a> {
    command: &'a str,
    cfg: RunConfig,
    inputs: BTreeMap<String, String>,
    started: Option<Instant>,
}

impl Ctx<'_> {
    fn input(&mut self, k: &str, v: impl ToString) {
        self.inputs.insert(k.to_string(), v.to_string());
    }

    fn finish<T: Serialize>(&self, result: &T, text: String, ok: bool) -> Outcome {
        let mut r = Report::new(self.command, self.inputs.clone(), result);
        r.timing_ms = self.started.map(|t| t.elapsed().as_millis());
        Outcome { json: r.to_json(), text, ok, raw: None }
    }

    fn base(&self, s: &str) -> Result<BaseValue> {
        if s.trim().eq_ignore_ascii_case("kl") {
            kl_constant_capped(self.cfg.tolerance, LADDER_HARD_CAP)
        } else {
            BaseValue::parse(s)
        }
    }

    fn spectrum_options(&self) -> SpectrumOptions {
        SpectrumOptions {
            tolerance: self.cfg.tolerance,
            max_n: self.cfg.max_n,
            kl_terms: self.cfg.kl_terms,
            ..SpectrumOptions::default()
        }
    }
}

/// Parses `argv` (program name first), runs the command and writes its output.
/// Returns the process exit code.
pub fn dispatch<I, S>(
    argv: I,
    env: impl Fn(&str) -> Option<String>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            return match e.kind() {
                DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = write!(out, "{}", e.render());
                    if e.kind() == DisplayHelpOnMissingArgumentOrSubcommand {
                        2
                    } else {
                        0
                    }
                }
                InvalidSubcommand => {
                    let _ = writeln!(err, "{}", e.render());
                    let _ = writeln!(err, "{}", Cli::command().render_help());
                    2
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    2
                }
            };
        }
    };
    match run(cli, &env) {
        Ok(o) => {
            let _ = match &o.raw {
                Some(bytes) => out.write_all(bytes),
                None => out.write_all(o.text.as_bytes()),
            };
            if o.ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn config(g: &GlobalArgs, env: &dyn Fn(&str) -> Option<String>) -> Result<RunConfig> {
    let file = match &g.config {
        Some(p) => Overrides::from_file(p)?,
        None => Overrides::default(),
    };
    let env = Overrides::from_env(env)?;
    let flags = Overrides {
        tolerance: g.tolerance,
        max_block_exponent: g.max_block_exponent,
        kl_terms: g.kl_terms,
        alpha_horizon: g.alpha_horizon,
        max_n: g.max_n,
        format: g.format,
    };
    RunConfig::layered(&file, &env, &flags)
}

fn run(cli: Cli, env: &dyn Fn(&str) -> Option<String>) -> Result<Outcome> {
    let cfg = config(&cli.global, env)?;
    let name = match &cli.command {
        Command::Bases => "bases",
        Command::Classify { .. } => "classify",
        Command::Expand { .. } => "expand",
        Command::Unique { .. } => "unique",
        Command::Density { .. } => "density",
        Command::Verify { .. } => "verify",
        Command::Dq { .. } => "dq",
        Command::Render { .. } => "render",
        Command::Selftest => "selftest",
    };
    let mut ctx = Ctx {
        command: name,
        inputs: BTreeMap::new(),
        started: cli.global.timing.then(Instant::now),
        cfg: cfg.clone(),
    };
    ctx.input("tolerance", cfg.tolerance);
    ctx.input("max_n", cfg.max_n);
    let mut o = match cli.command {
        Command::Bases => bases(&mut ctx)?,
        Command::Classify { q } => classify_cmd(&mut ctx, &q)?,
        Command::Expand { q, x, depth } => expand(&mut ctx, &q, x, depth)?,
        Command::Unique { q, seq } => unique(&mut ctx, &q, &seq)?,
        Command::Density { source, q } => density(&mut ctx, source, q.as_deref())?,
        Command::Verify { lemma, n, m, variant, upper, lower, max_shift } => {
            verify(&mut ctx, &lemma, n, m, &variant, upper.as_deref(), lower.as_deref(), max_shift)?
        }
        Command::Dq { q } => dq(&mut ctx, &q)?,
        Command::Render { q, t_seq, depth, out, layers, size } => {
            render(&mut ctx, &q, &t_seq, depth, out, &layers, size)?
        }
        Command::Selftest => selftest_cmd(&mut ctx),
    };
    if o.raw.is_none() && cfg.format == Format::Json {
        o.text = std::mem::take(&mut o.json);
    }
    Ok(o)
}

#[derive(Serialize)]
struct LadderRow {
    n: u32,
    w: String,
    q: EnclosureReport,
    gap_to_next: Option<f64>,
}

#[derive(Serialize)]
struct BasesResult {
    ladder: Vec<LadderRow>,
    q_kl: EnclosureReport,
}

fn short(s: &str, keep: usize) -> String {
    if s.chars().count() <= keep {
        s.to_string()
    } else {
        format!("{}... ({} digits)", s.chars().take(keep).collect::<String>(), s.chars().count())
    }
}

fn bases(ctx: &mut Ctx) -> Result<Outcome> {
    let max_n = ctx.cfg.max_n;
    let gaps = ladder_gaps(max_n + 1)?;
    let mut ladder = Vec::new();
    for n in 1..=max_n {
        let q = base_root(n)?;
        ladder.push(LadderRow {
            n,
            w: ladder_word(n)?.to_string(),
            q: (&q).into(),
            gap_to_next: gaps.get(n as usize - 1).copied(),
        });
    }
    let kl = kl_constant_capped(ctx.cfg.tolerance, LADDER_HARD_CAP)?;
    let res = BasesResult { ladder, q_kl: (&kl).into() };
    let mut text = format!("{:>3}  {:<24}  {:<24}  gap\n", "n", "w_n", "q_n");
    for r in &res.ladder {
        let gap = r.gap_to_next.map(|g| format!("{g:.3e}")).unwrap_or_default();
        text += &format!("{:>3}  {:<24}  {:<24}  {gap}\n", r.n, short(&r.w, 16), &r.q.value[..22.min(r.q.value.len())]);
    }
    text += &format!("q_KL in [{}, {}]\n", res.q_kl.lo, res.q_kl.hi);
    Ok(ctx.finish(&res, text, true))
}

#[derive(Serialize)]
struct ClassifyResult {
    regime: RegimeLabel,
    q: EnclosureReport,
}

fn classify_cmd(ctx: &mut Ctx, q: &str) -> Result<Outcome> {
    ctx.input("q", q);
    let b = ctx.base(q)?;
    let regime = classify_with(&b, ctx.cfg.tolerance, ctx.cfg.max_n)?;
    let res = ClassifyResult { regime, q: (&b).into() };
    let text = format!("{regime}\n");
    Ok(ctx.finish(&res, text, true))
}

#[derive(Serialize)]
struct ExpandResult {
    word: String,
    digits: Vec<i8>,
    truncation_value: f64,
    error: f64,
    error_bound: f64,
}

fn expand(ctx: &mut Ctx, q: &str, x: f64, depth: usize) -> Result<Outcome> {
    ctx.input("q", q);
    ctx.input("x", x);
    ctx.input("depth", depth);
    let b = ctx.base(q)?;
    b.check_working_base()?;
    let qf = b.value();
    let w = greedy_expand(x, qf, depth)?;
    let v = evaluate(&TernarySeq::new(w.digits().to_vec(), vec![Digit::ZERO])?, qf);
    let res = ExpandResult {
        word: w.to_string(),
        digits: w.values(),
        truncation_value: v,
        error: (x - v).abs(),
        error_bound: qf.powi(-(depth as i32)) / (qf - 1.0),
    };
    let text = format!("{}\n|x - value| = {:.3e} <= {:.3e}\n", res.word, res.error, res.error_bound);
    Ok(ctx.finish(&res, text, true))
}

#[derive(Serialize)]
struct UniqueResult {
    seq: String,
    #[serde(flatten)]
    verdict: UniqueVerdict,
}

fn unique(ctx: &mut Ctx, q: &str, seq: &str) -> Result<Outcome> {
    ctx.input("q", q);
    ctx.input("seq", seq);
    ctx.input("alpha_horizon", ctx.cfg.alpha_horizon);
    let b = ctx.base(q)?;
    b.check_working_base()?;
    let s = TernarySeq::parse(seq)?;
    let verdict = is_unique_expansion_with(&s, &b, ctx.cfg.alpha_horizon)?;
    let text = match (&verdict.failing_index, &verdict.clause) {
        (Some(i), Some(c)) => format!("not unique: shift {i} fails {c:?}\n"),
        _ => "unique\n".to_string(),
    };
    let res = UniqueResult { seq: s.notation(), verdict };
    Ok(ctx.finish(&res, text, true))
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum DensityResult {
    Sequence { seq: String, zero_density: Density, dimension: Option<f64> },
    Pair { seq: String, #[serde(flatten)] report: MatchReport, dimension: Option<f64> },
    Block { n: u32, d_star: Density, alternating_sum: Density, agree: bool, dimension: Option<f64> },
}

fn density(ctx: &mut Ctx, src: DensitySource, q: Option<&str>) -> Result<Outcome> {
    let qf = match q {
        Some(q) => {
            ctx.input("q", q);
            let b = ctx.base(q)?;
            b.check_working_base()?;
            Some(b.value())
        }
        None => None,
    };
    let dim = |d: Density| qf.map(|q| dimension(q, d));
    let (res, text, ok) = if let Some(s) = src.seq {
        ctx.input("seq", &s);
        let s = TernarySeq::parse(&s)?;
        let d = d_star_seq(&s);
        (DensityResult::Sequence { seq: s.notation(), zero_density: d, dimension: dim(d) }, format!("{d}\n"), true)
    } else if let Some(p) = src.pair {
        ctx.input("pair", &p);
        let p = PairSeq::parse(&p)?;
        let r = analyze(&p);
        let text = format!(
            "matched {}, (0,0) density {}, in period {}\n",
            r.matched, r.zero_pair_density, r.zero_pair_in_period
        );
        let d = r.zero_pair_density;
        (DensityResult::Pair { seq: p.notation(), report: r, dimension: dim(d) }, text, true)
    } else {
        let n = src.eps.ok_or_else(|| Error::Usage("one of --seq, --pair, --eps is required".into()))?;
        ctx.input("eps", n);
        let w = eps_capped(n, ctx.cfg.max_block_exponent)?.word;
        let d = d_star(&w)?;
        let a = Density::from_ratio(alternating_sum(n));
        let agree = d == a;
        (
            DensityResult::Block { n, d_star: d, alternating_sum: a, agree, dimension: dim(d) },
            format!("d*(eps_{n}) = {d}, alternating sum {a}\n"),
            agree,
        )
    };
    Ok(ctx.finish(&res, text, ok))
}

fn pattern(s: Option<&str>, flag: &str) -> Result<Vec<u8>> {
    let s = s.ok_or_else(|| Error::Usage(format!("--{flag} is required for blocks")))?;
    s.chars()
        .filter(|c| *c != ',')
        .map(|c| match c.to_digit(10) {
            Some(d @ 1..=4) => Ok(d as u8),
            _ => Err(Error::parse(format!("block pattern {s:?} must use digits 1 to 4"))),
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn verify(
    ctx: &mut Ctx,
    lemma: &str,
    n: u32,
    m: Option<u32>,
    variant: &str,
    upper: Option<&str>,
    lower: Option<&str>,
    max_shift: Option<usize>,
) -> Result<Outcome> {
    ctx.input("lemma", lemma);
    ctx.input("n", n);
    let summary = |pass: bool, extra: String| format!("{} {extra}\n", if pass { "PASS" } else { "FAIL" });
    match lemma {
        "3.1" | "3.2" | "3.4" => {
            let r = match lemma {
                "3.1" => verify_lemma_3_1(n)?,
                "3.2" => {
                    ctx.input("variant", variant);
                    verify_lemma_3_2(n, variant.parse()?)?
                }
                _ => {
                    let m = m.unwrap_or(n);
                    ctx.input("m", m);
                    verify_lemma_3_4(n, m)?
                }
            };
            let text = summary(
                r.pass,
                format!("{} witnesses, {} counterexamples", r.witnesses.len(), r.counterexamples.len()),
            );
            Ok(ctx.finish(&r, text, r.pass))
        }
        "blocks" => {
            let (u, l) = (pattern(upper, "upper")?, pattern(lower, "lower")?);
            ctx.input("upper", upper.unwrap_or_default());
            ctx.input("lower", lower.unwrap_or_default());
            if let Some(s) = max_shift {
                ctx.input("max_shift", s);
            }
            let r = verify_block_case(n, &u, &l, max_shift)?;
            let text = summary(r.pass, format!("{} shifts, inconclusive {:?}", r.shifts.len(), r.inconclusive));
            Ok(ctx.finish(&r, text, r.pass))
        }
        _ => Err(Error::Usage(format!("unknown lemma {lemma:?} (3.1, 3.2, 3.4, blocks)"))),
    }
}

fn spectrum_text(s: &DimensionSpectrum) -> String {
    let mut t = format!("regime {}\n", s.regime);
    let iso: Vec<String> = s.isolated.iter().map(|v| format!("{v:.12}")).collect();
    t += &format!("isolated {}\n", iso.join(", "));
    if let Some(f) = &s.family {
        for term in &f.terms {
            t += &format!("  n = {:>2}  d = {:<12}  {:.12}\n", term.n, term.density.to_string(), term.value);
        }
        if let Some(a) = f.accumulation {
            t += &format!("accumulates at {a:.12}\n");
        }
    }
    if let Some(i) = &s.interval {
        t += &format!(
            "contains [{:.12}, {:.12}] (densities {} to {}, level n = {})\n",
            i.lo,
            i.hi,
            i.density_lo,
            i.density_hi,
            s.provenance.n.unwrap_or_default()
        );
    }
    t
}

fn dq(ctx: &mut Ctx, q: &str) -> Result<Outcome> {
    ctx.input("q", q);
    ctx.input("kl_terms", ctx.cfg.kl_terms);
    let b = ctx.base(q)?;
    let s = spectrum_with(&b, &ctx.spectrum_options())?;
    let text = spectrum_text(&s);
    Ok(ctx.finish(&s, text, true))
}

#[derive(Serialize)]
struct RenderLayer {
    kind: crate::geometry::CloudKind,
    points: usize,
}

#[derive(Serialize)]
struct RenderResult {
    file: Option<String>,
    format: Format,
    layers: Vec<RenderLayer>,
}

fn render(
    ctx: &mut Ctx,
    q: &str,
    t_seq: &str,
    depth: usize,
    out: Option<PathBuf>,
    layers: &str,
    size: usize,
) -> Result<Outcome> {
    ctx.input("q", q);
    ctx.input("t_seq", t_seq);
    ctx.input("depth", depth);
    ctx.input("layers", layers);
    let b = ctx.base(q)?;
    b.check_working_base()?;
    let qf = b.value();
    let t = PairSeq::parse(t_seq)?;
    let mut clouds: Vec<PointCloud> = Vec::new();
    for l in layers.split(',').map(str::trim).filter(|l| !l.is_empty()) {
        clouds.push(match l {
            "e" => build_gasket(qf, depth)?,
            "et" => build_translate(qf, &t, depth)?,
            "int" => build_intersection(qf, &t, depth)?,
            _ => return Err(Error::Usage(format!("unknown layer {l:?} (e, et, int)"))),
        });
    }
    let format = if ctx.cfg.format == Format::Ppm { Format::Ppm } else { Format::Svg };
    if format == Format::Ppm && (size == 0 || size > 8192) {
        return Err(Error::Usage("--size must lie in 1..=8192".into()));
    }
    let bytes = match format {
        Format::Ppm => render_ppm(&clouds, qf, size, size),
        _ => render_svg(&clouds, qf).into_bytes(),
    };
    let res = RenderResult {
        file: out.as_ref().map(|p| p.display().to_string()),
        format,
        layers: clouds.iter().map(|c| RenderLayer { kind: c.kind, points: c.points.len() }).collect(),
    };
    match out {
        Some(path) => {
            std::fs::write(&path, &bytes).map_err(|e| Error::io(&path, e))?;
            let counts: Vec<String> = res.layers.iter().map(|l| format!("{:?} {}", l.kind, l.points)).collect();
            let text = format!("wrote {} ({})\n", path.display(), counts.join(", "));
            Ok(ctx.finish(&res, text, true))
        }
        None => {
            let mut o = ctx.finish(&res, String::new(), true);
            o.raw = Some(bytes);
            Ok(o)
        }
    }
}

fn selftest_cmd(ctx: &mut Ctx) -> Outcome {
    let r = selftest::run();
    let mut text = String::new();
    for c in &r.checks {
        text += &format!("{} {:<4} {:<28} {}\n", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
    }
    for v in &r.verifiers {
        text += &format!("verifier {} over {}\n", v.verifier, v.n_range);
    }
    ctx.finish(&r, text, r.pass)
}
