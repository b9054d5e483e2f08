//! Finite-depth point clouds of the gasket `E`, its translate `E + t`, and
//! `E ∩ (E + t)` for a translation with a single matched expansion.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansions::evaluate;
use crate::matching::{analyze, in_omega2};
use crate::words::{PairDigit, PairSeq};

pub const DEFAULT_MAX_DEPTH: usize = 12;

/// `Ω₁` in canonical order.
pub const OMEGA1: [(u8, u8); 3] = [(0, 0), (0, 1), (1, 0)];

/// `Ω₁ ∩ (Ω₁ + t)`, in canonical order.
pub fn branch_set(t: PairDigit) -> Result<Vec<(u8, u8)>> {
    if !in_omega2(&t) {
        return Err(Error::domain(format!("({}, {}) is not a difference of gasket digits", t.0, t.1)));
    }
    let (tx, ty) = (t.0.value() as i16, t.1.value() as i16);
    Ok(OMEGA1
        .iter()
        .copied()
        .filter(|&(ax, ay)| {
            let (bx, by) = (ax as i16 - tx, ay as i16 - ty);
            OMEGA1.iter().any(|&(cx, cy)| (cx as i16, cy as i16) == (bx, by))
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudKind {
    E,
    EPlusT,
    Intersection,
}

impl CloudKind {
    pub fn color(self) -> &'static str {
        match self {
            CloudKind::E => "#1f77b4",
            CloudKind::EPlusT => "#ff7f0e",
            CloudKind::Intersection => "#d62728",
        }
    }

    fn rgb(self) -> [u8; 3] {
        match self {
            CloudKind::E => [0x1f, 0x77, 0xb4],
            CloudKind::EPlusT => [0xff, 0x7f, 0x0e],
            CloudKind::Intersection => [0xd6, 0x27, 0x28],
        }
    }

    fn name(self) -> &'static str {
        match self {
            CloudKind::E => "e",
            CloudKind::EPlusT => "et",
            CloudKind::Intersection => "int",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub kind: CloudKind,
    pub depth: usize,
    pub points: Vec<(f64, f64)>,
}

/// Per-level branch sets for a matched expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderTree {
    pub depth: usize,
    pub branch_sets: Vec<Vec<(u8, u8)>>,
}

impl CylinderTree {
    pub fn new(t: &PairSeq, depth: usize) -> Result<CylinderTree> {
        check_depth(depth)?;
        let branch_sets = (0..depth).map(|i| branch_set(*t.get(i))).collect::<Result<_>>()?;
        Ok(CylinderTree { depth, branch_sets })
    }

    pub fn point_count(&self) -> usize {
        self.branch_sets.iter().map(Vec::len).product()
    }
}

fn check_depth(depth: usize) -> Result<()> {
    if depth > DEFAULT_MAX_DEPTH {
        return Err(Error::Resource(format!("depth {depth} exceeds cap {DEFAULT_MAX_DEPTH}")));
    }
    Ok(())
}

fn check_base(q: f64) -> Result<()> {
    if !(q > 2.0 && q < 3.0) {
        return Err(Error::domain(format!("base {q} is not inside (2, 3)")));
    }
    Ok(())
}

/// `Σ_{i ≤ depth} a_i q^{-i}` over the given digit sets, first digit outermost.
fn cylinder_points(q: f64, sets: &[Vec<(u8, u8)>]) -> Vec<(f64, f64)> {
    let mut pts = vec![(0.0, 0.0)];
    let mut scale = 1.0;
    for set in sets {
        scale /= q;
        let mut next = Vec::with_capacity(pts.len() * set.len());
        for &(x, y) in &pts {
            for &(ax, ay) in set {
                next.push((x + ax as f64 * scale, y + ay as f64 * scale));
            }
        }
        pts = next;
    }
    pts
}

pub fn build_gasket(q: f64, depth: usize) -> Result<PointCloud> {
    check_base(q)?;
    check_depth(depth)?;
    let sets = vec![OMEGA1.to_vec(); depth];
    Ok(PointCloud { kind: CloudKind::E, depth, points: cylinder_points(q, &sets) })
}

/// `(Σ x_i q^{-i}, Σ y_i q^{-i})` for the pair expansion.
pub fn translation(q: f64, t: &PairSeq) -> (f64, f64) {
    (evaluate(&t.firsts(), q), evaluate(&t.seconds(), q))
}

pub fn build_translate(q: f64, t: &PairSeq, depth: usize) -> Result<PointCloud> {
    let (tx, ty) = translation(q, t);
    let mut c = build_gasket(q, depth)?;
    c.kind = CloudKind::EPlusT;
    for p in &mut c.points {
        p.0 += tx;
        p.1 += ty;
    }
    Ok(c)
}

pub fn build_intersection(q: f64, t: &PairSeq, depth: usize) -> Result<PointCloud> {
    check_base(q)?;
    check_depth(depth)?;
    let r = analyze(t);
    if let Some(i) = r.first_violation_index {
        return Err(Error::domain(format!("translation expansion leaves the difference set at digit {i}")));
    }
    let tree = CylinderTree::new(t, depth)?;
    Ok(PointCloud { kind: CloudKind::Intersection, depth, points: cylinder_points(q, &tree.branch_sets) })
}

/// Deterministic SVG. The viewport is `[−B, 2B]²` with `B = 1/(q−1)` plus a
/// 5% margin, `y` points up, and each point is a circle of radius
/// `q^{-depth}/2`. One `<g>` per cloud, drawn in the given order.
pub fn render_svg(clouds: &[PointCloud], q: f64) -> String {
    let b = 1.0 / (q - 1.0);
    let m = 0.05 * 3.0 * b;
    let (x0, size) = (-b - m, 3.0 * b + 2.0 * m);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0:.6} {x0:.6} {size:.6} {size:.6}\" width=\"800\" height=\"800\">"
    );
    let _ = writeln!(s, "<rect x=\"{x0:.6}\" y=\"{x0:.6}\" width=\"{size:.6}\" height=\"{size:.6}\" fill=\"#ffffff\"/>");
    for c in clouds {
        let r = q.powi(-(c.depth as i32)) / 2.0;
        let _ = writeln!(s, "<g id=\"{}\" fill=\"{}\" fill-opacity=\"0.8\">", c.kind.name(), c.kind.color());
        for &(x, y) in &c.points {
            let _ = writeln!(s, "<circle cx=\"{x:.6}\" cy=\"{:.6}\" r=\"{r:.6}\"/>", b - y);
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}

/// Binary PPM (P6) on white. Pixel `(px, py)` covers
/// `x ∈ [−B + px·3B/w, …)` and `y ∈ (2B − (py+1)·3B/h, 2B − py·3B/h]`; later
/// clouds overwrite earlier ones.
pub fn render_ppm(clouds: &[PointCloud], q: f64, width: usize, height: usize) -> Vec<u8> {
    let b = 1.0 / (q - 1.0);
    let mut img = vec![255u8; width * height * 3];
    for c in clouds {
        let rgb = c.kind.rgb();
        for &(x, y) in &c.points {
            let px = ((x + b) / (3.0 * b) * width as f64).floor();
            let py = ((2.0 * b - y) / (3.0 * b) * height as f64).floor();
            if px < 0.0 || py < 0.0 || px >= width as f64 || py >= height as f64 {
                continue;
            }
            let k = (py as usize * width + px as usize) * 3;
            img[k..k + 3].copy_from_slice(&rgb);
        }
    }
    let mut out = format!("P6\n{width} {height}\n255\n").into_bytes();
    out.extend(img);
    out
}

pub fn emit_svg(clouds: &[PointCloud], q: f64, path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(clouds, q)).map_err(|e| Error::io(path, e))
}

pub fn emit_ppm(clouds: &[PointCloud], q: f64, size: usize, path: &Path) -> Result<()> {
    std::fs::write(path, render_ppm(clouds, q, size, size)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::e_seq;
    use crate::words::Digit;

    fn pd(a: i64, b: i64) -> PairDigit {
        (Digit::new(a).unwrap(), Digit::new(b).unwrap())
    }

    #[test]
    fn branch_table() {
        // brute force over all 3×3 candidate pairs
        for &(tx, ty) in &crate::matching::OMEGA2 {
            let mut expect = Vec::new();
            for &a in &OMEGA1 {
                for &c in &OMEGA1 {
                    if (a.0 as i8 - c.0 as i8, a.1 as i8 - c.1 as i8) == (tx, ty) {
                        expect.push(a);
                    }
                }
            }
            assert_eq!(branch_set(pd(tx as i64, ty as i64)).unwrap(), expect);
        }
        assert_eq!(branch_set(pd(0, 0)).unwrap(), OMEGA1.to_vec());
        assert_eq!(branch_set(pd(0, 1)).unwrap(), vec![(0, 1)]);
        assert_eq!(branch_set(pd(-1, 1)).unwrap(), vec![(0, 1)]);
        assert_eq!(branch_set(pd(0, -1)).unwrap(), vec![(0, 0)]);
        assert!(branch_set(pd(1, 1)).is_err());
    }

    #[test]
    fn gasket_basics() {
        let g = build_gasket(2.5, 1).unwrap();
        assert_eq!(g.points, vec![(0.0, 0.0), (0.0, 0.4), (0.4, 0.0)]);
        let g = build_gasket(2.5, 8).unwrap();
        assert_eq!(g.points.len(), 6561);
        let mut min = f64::INFINITY;
        for i in 0..g.points.len() {
            for j in i + 1..g.points.len() {
                let (a, b) = (g.points[i], g.points[j]);
                min = min.min((a.0 - b.0).hypot(a.1 - b.1));
            }
        }
        assert!(min > 0.0);
        assert!(build_gasket(2.5, 13).is_err());
        assert!(build_gasket(3.0, 2).is_err());
    }

    #[test]
    fn intersection_counts() {
        let zero = PairSeq::parse("0^inf|0^inf").unwrap();
        assert_eq!(build_intersection(2.5, &zero, 5).unwrap().points, build_gasket(2.5, 5).unwrap().points);
        let e = e_seq(1, 1, 2).unwrap();
        assert_eq!(build_intersection(2.5, &e, 8).unwrap().points.len(), 81);
        let bad = PairSeq::parse("+^inf|+^inf").unwrap();
        assert!(matches!(build_intersection(2.5, &bad, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn intersection_inside_both_clouds() {
        let q = 2.6;
        let t = PairSeq::parse("0;-0+0^inf|+0;0-0+^inf").unwrap();
        let d = 7;
        let inter = build_intersection(q, &t, d).unwrap();
        let g = build_gasket(q, d).unwrap();
        let (tx, ty) = translation(q, &t);
        let near = |p: (f64, f64), tol: f64| g.points.iter().any(|g| (g.0 - p.0).hypot(g.1 - p.1) <= tol);
        let tail = 2.0 * 2f64.sqrt() * q.powi(-(d as i32)) / (q - 1.0);
        for &p in &inter.points {
            assert!(near(p, 1e-9));
            assert!(near((p.0 - tx, p.1 - ty), tail));
        }
    }

    #[test]
    fn svg_is_stable() {
        let empty = render_svg(&[], 2.5);
        assert!(empty.starts_with("<svg") && empty.trim_end().ends_with("</svg>"));
        assert!(!empty.contains("<circle"));
        let one = render_svg(&[build_gasket(2.5, 1).unwrap()], 2.5);
        assert_eq!(one.matches("<circle").count(), 3);
        let t = PairSeq::parse("-0+0^inf|+0-0^inf").unwrap();
        let clouds = vec![
            build_gasket(2.5, 6).unwrap(),
            build_translate(2.5, &t, 6).unwrap(),
            build_intersection(2.5, &t, 6).unwrap(),
        ];
        assert_eq!(render_svg(&clouds, 2.5), render_svg(&clouds, 2.5));
        let ppm = render_ppm(&clouds, 2.5, 64, 64);
        assert!(ppm.starts_with(b"P6\n64 64\n255\n"));
        assert_eq!(ppm.len(), 13 + 64 * 64 * 3);
    }
}
