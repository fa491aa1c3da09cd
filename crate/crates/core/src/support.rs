//! Geometry of the limiting supports: scaled branches `A_i = alpha_j gamma_i`,
//! the loci where three of them are real-collinear, level curves of
//! `Re int (A_i - A_j)`, and the density carried along them.

use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{ContinuationOptions, PlaneCurve, Tracker};
use crate::error::{Error, Result};
use crate::measures::{self, RootMeasure};
use crate::pencil::{self, Pencil, GENERAL_TYPE_TOL};
use crate::poly::ComplexPolynomial;

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if !(x0 < x1 && y0 < y1) || ![x0, y0, x1, y1].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidRect(format!("{x0},{y0},{x1},{y1} is empty or not finite")));
        }
        Ok(Rect { x0, y0, x1, y1 })
    }

    pub fn contains(&self, z: Complex64, margin: f64) -> bool {
        z.re >= self.x0 - margin && z.re <= self.x1 + margin && z.im >= self.y0 - margin && z.im <= self.y1 + margin
    }
}

impl FromStr for Rect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidRect(format!("cannot parse '{s}'")))?;
        if v.len() != 4 {
            return Err(Error::InvalidRect(format!("need four numbers, got '{s}'")));
        }
        Rect::new(v[0], v[1], v[2], v[3])
    }
}

/// The branches of a curve scaled by a common factor, with labels fixed by
/// continuation from the tracker's anchor.
#[derive(Clone, Debug)]
pub struct BranchField {
    pub tracker: Tracker,
    pub alpha: Complex64,
}

impl BranchField {
    pub fn new(curve: &PlaneCurve, alpha: Complex64) -> Result<Self> {
        Ok(BranchField { tracker: Tracker::new(curve, ContinuationOptions::default())?, alpha })
    }

    /// `A_i = alpha_family gamma_i` for a pencil of general type.
    pub fn for_family(p: &Pencil, family: usize) -> Result<Self> {
        let alphas = pencil::validate_general_type(p, GENERAL_TYPE_TOL).alphas;
        let alpha = *alphas
            .get(family)
            .ok_or_else(|| Error::InvalidPair(format!("family {} out of range", family + 1)))?;
        BranchField::new(&PlaneCurve::from_pencil(p), alpha)
    }

    pub fn k(&self) -> usize {
        self.tracker.curve.k()
    }

    /// Unscaled fiber in label order.
    pub fn labeled_fiber(&self, z: Complex64) -> Result<Vec<Complex64>> {
        self.tracker.labeled_fiber(z)
    }

    pub fn at(&self, z: Complex64) -> Result<Vec<Complex64>> {
        Ok(self.labeled_fiber(z)?.into_iter().map(|w| self.alpha * w).collect())
    }

    /// Base point for `H_i`: the labeling anchor.
    pub fn anchor(&self) -> Complex64 {
        self.tracker.anchor()
    }

    fn check_pair(&self, pair: (usize, usize)) -> Result<()> {
        let k = self.k();
        if pair.0 == pair.1 || pair.0 >= k || pair.1 >= k {
            return Err(Error::InvalidPair(format!("pair ({}, {}) with {} branches", pair.0 + 1, pair.1 + 1, k)));
        }
        Ok(())
    }

    /// `int_a^b (A_i - A_j) dw` along the segment, given the labeled fiber at
    /// `a`; returns the integral, its error estimate and the fiber at `b`.
    pub fn integrate(&self, pair: (usize, usize), a: Complex64, w_a: &[Complex64], b: Complex64) -> Result<(Complex64, f64, Vec<Complex64>)> {
        let dz = b - a;
        if dz.norm() == 0.0 {
            return Ok((Complex64::default(), 0.0, w_a.to_vec()));
        }
        let mut w = w_a.to_vec();
        let mut t_now = 0.0;
        let mut total = Complex64::default();
        let mut err_total = 0.0;
        let mut stack = vec![(0.0f64, 1.0f64)];
        let mut intervals = 0usize;
        while let Some((t0, t1)) = stack.pop() {
            intervals += 1;
            if intervals > MAX_INTERVALS {
                return Err(Error::QuadratureFail);
            }
            let mid = 0.5 * (t0 + t1);
            let half = 0.5 * (t1 - t0);
            let mut wn = w.clone();
            let mut zp = a + dz * t0;
            let mut k_sum = Complex64::default();
            let mut g_sum = Complex64::default();
            for (idx, &(x, wk, wg)) in KRONROD.iter().enumerate() {
                let zn = a + dz * (mid + half * x);
                wn = self.tracker.carry(zp, &wn, zn)?;
                zp = zn;
                let f = self.alpha * (wn[pair.0] - wn[pair.1]) * dz;
                k_sum += f * wk;
                if idx % 2 == 1 {
                    g_sum += f * wg;
                }
            }
            let kv = k_sum * half;
            let err = ((k_sum - g_sum) * half).norm();
            if err <= QUAD_TOL * (t1 - t0) || err <= 1e-14 * kv.norm() || half < 1e-12 {
                let z1 = a + dz * t1;
                w = self.tracker.carry(zp, &wn, z1)?;
                total += kv;
                err_total += err;
                t_now = t1;
            } else {
                stack.push((mid, t1));
                stack.push((t0, mid));
            }
        }
        debug_assert!((t_now - 1.0).abs() < 1e-12);
        Ok((total, err_total, w))
    }
}

const QUAD_TOL: f64 = 1e-10;
const MAX_INTERVALS: usize = 4000;

/// Kronrod nodes on [-1, 1] in increasing order with Kronrod weights and,
/// at odd positions, the Gauss weights.
const KRONROD: [(f64, f64, f64); 15] = [
    (-0.991_455_371_120_812_6, 0.022_935_322_010_529_22, 0.0),
    (-0.949_107_912_342_758_5, 0.063_092_092_629_978_55, 0.129_484_966_168_869_7),
    (-0.864_864_423_359_769_1, 0.104_790_010_322_250_2, 0.0),
    (-0.741_531_185_599_394_4, 0.140_653_259_715_525_9, 0.279_705_391_489_276_7),
    (-0.586_087_235_467_691_1, 0.169_004_726_639_267_9, 0.0),
    (-0.405_845_151_377_397_2, 0.190_350_578_064_785_4, 0.381_830_050_505_118_9),
    (-0.207_784_955_007_898_5, 0.204_432_940_075_298_9, 0.0),
    (0.0, 0.209_482_141_084_727_8, 0.417_959_183_673_469_4),
    (0.207_784_955_007_898_5, 0.204_432_940_075_298_9, 0.0),
    (0.405_845_151_377_397_2, 0.190_350_578_064_785_4, 0.381_830_050_505_118_9),
    (0.586_087_235_467_691_1, 0.169_004_726_639_267_9, 0.0),
    (0.741_531_185_599_394_4, 0.140_653_259_715_525_9, 0.279_705_391_489_276_7),
    (0.864_864_423_359_769_1, 0.104_790_010_322_250_2, 0.0),
    (0.949_107_912_342_758_5, 0.063_092_092_629_978_55, 0.129_484_966_168_869_7),
    (0.991_455_371_120_812_6, 0.022_935_322_010_529_22, 0.0),
];

/// `alpha_family gamma_i(z)` for every branch, in label order.
pub fn scaled_branches(p: &Pencil, family: usize, z: Complex64) -> Result<Vec<Complex64>> {
    BranchField::for_family(p, family)?.at(z)
}

/// `H_i(z) - H_j(z) = Re int_base^z (A_i - A_j) dw` along the straight segment.
pub fn h_difference(field: &BranchField, pair: (usize, usize), base: Complex64, z: Complex64) -> Result<f64> {
    h_difference_along(field, pair, &[base, z])
}

/// Same, along a polyline starting at the base point.
pub fn h_difference_along(field: &BranchField, pair: (usize, usize), path: &[Complex64]) -> Result<f64> {
    field.check_pair(pair)?;
    let start = *path.first().ok_or_else(|| Error::InvalidPair("empty path".into()))?;
    let mut w = field.labeled_fiber(start)?;
    let mut total = 0.0;
    for seg in path.windows(2) {
        let (v, _, w1) = field.integrate(pair, seg[0], &w, seg[1])?;
        total += v.re;
        w = w1;
    }
    Ok(total)
}

/// Points where `A_i - A_l` and `A_j - A_l` are real multiples of each other.
#[derive(Clone, Debug, Serialize)]
pub struct GammaLocus {
    pub triple: (usize, usize, usize),
    pub rect: Rect,
    pub res: f64,
    pub points: Vec<Complex64>,
    /// Marching-squares pieces joining crossings within one cell.
    pub segments: Vec<(Complex64, Complex64)>,
    /// Cells skipped because a corner sits on a pole or labels were ambiguous.
    pub skipped_cells: usize,
}

/// Sign-carrying function whose zero set is the locus:
/// `Im[(A_i - A_l) conj(A_j - A_l)]`, normalized to the sine of the angle.
fn collinearity(w: &[Complex64], t: (usize, usize, usize)) -> f64 {
    let u = w[t.0] - w[t.2];
    let v = w[t.1] - w[t.2];
    (u * v.conj()).im / (u.norm() * v.norm()).max(f64::MIN_POSITIVE)
}

/// Reorders `w` to follow `reference` by nearest values; `None` if ambiguous.
fn match_to(reference: &[Complex64], w: &[Complex64]) -> Option<Vec<Complex64>> {
    if w.len() != reference.len() {
        return None;
    }
    let mut used = vec![false; w.len()];
    let mut out = Vec::with_capacity(w.len());
    for r in reference {
        let mut d: Vec<(f64, usize)> = w.iter().enumerate().map(|(i, x)| ((x - r).norm(), i)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        if (d.len() > 1 && d[0].0 > 0.5 * d[1].0) || used[d[0].1] {
            return None;
        }
        used[d[0].1] = true;
        out.push(w[d[0].1]);
    }
    Some(out)
}

/// The locus for `triple` on a grid of spacing `res` over `rect`, with
/// crossings refined by bisection to `res / 10`. Curves with fewer than
/// three branches give an empty locus.
pub fn gamma_locus(field: &BranchField, triple: (usize, usize, usize), rect: Rect, res: f64) -> Result<GammaLocus> {
    let k = field.k();
    let empty = GammaLocus { triple, rect, res, points: Vec::new(), segments: Vec::new(), skipped_cells: 0 };
    if k < 3 {
        return Ok(empty);
    }
    let (i, j, l) = triple;
    if i == j || j == l || i == l || i >= k || j >= k || l >= k {
        return Err(Error::InvalidPair(format!("triple ({}, {}, {}) with {} branches", i + 1, j + 1, l + 1, k)));
    }
    if !(res > 0.0) {
        return Err(Error::InvalidPair("grid resolution must be positive".into()));
    }
    let tr = &field.tracker;
    if let Some(bp) = tr.branch_points.iter().find(|b| rect.contains(**b, tr.clearance)) {
        return Err(Error::BranchCollision { z: *bp, branch_point: *bp });
    }
    let nx = ((rect.x1 - rect.x0) / res).ceil() as usize;
    let ny = ((rect.y1 - rect.y0) / res).ceil() as usize;
    let node = |r: usize, c: usize| Complex64::new(rect.x0 + c as f64 * res, rect.y0 + r as f64 * res);

    // Labeled fibers down the first column, then along each row.
    let mut column: Vec<Option<Vec<Complex64>>> = Vec::with_capacity(ny + 1);
    let mut prev: Option<Vec<Complex64>> = None;
    for r in 0..=ny {
        let z = node(r, 0);
        let w = match &prev {
            Some(w) => tr.carry(node(r - 1, 0), w, z).or_else(|_| tr.labeled_fiber(z)).ok(),
            None => tr.labeled_fiber(z).ok(),
        };
        if w.is_some() {
            prev = w.clone();
        }
        column.push(w);
    }
    let grid: Vec<Vec<Option<Vec<Complex64>>>> = (0..=ny)
        .into_par_iter()
        .map(|r| {
            let mut row = Vec::with_capacity(nx + 1);
            let mut cur = column[r].clone();
            row.push(cur.clone());
            for c in 1..=nx {
                let z = node(r, c);
                let next = match &cur {
                    Some(w) => tr.carry(node(r, c - 1), w, z).or_else(|_| tr.labeled_fiber(z)).ok(),
                    None => tr.labeled_fiber(z).ok(),
                };
                let usable = next.as_ref().filter(|_| !tr.curve.leading_vanishes(z)).cloned();
                row.push(usable);
                if next.is_some() {
                    cur = next;
                }
            }
            row
        })
        .collect();

    // Zero crossing on the edge a -> b, labels taken from a.
    let crossing = |za: Complex64, wa: &[Complex64], zb: Complex64, wb: &[Complex64]| -> Option<Option<Complex64>> {
        let wb = match_to(wa, wb)?;
        let ga = collinearity(wa, triple);
        let gb = collinearity(&wb, triple);
        if !(ga * gb < 0.0) {
            return Some(None);
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let (mut glo, mut ghi) = (ga, gb);
        let mut wlo = wa.to_vec();
        while (hi - lo) * res > 0.1 * res {
            let mid = 0.5 * (lo + hi);
            let zm = za + (zb - za) * mid;
            let fib = tr.fiber(zm, &wlo);
            let wm = match_to(&wlo, &fib)?;
            let gm = collinearity(&wm, triple);
            if glo * gm <= 0.0 {
                hi = mid;
                ghi = gm;
            } else {
                lo = mid;
                glo = gm;
                wlo = wm;
            }
        }
        let t = lo + (hi - lo) * glo / (glo - ghi);
        Some(Some(za + (zb - za) * t))
    };

    type EdgeHit = Option<Option<Complex64>>;
    // Horizontal edges (r, c)-(r, c+1) and vertical edges (r, c)-(r+1, c).
    let horizontal: Vec<Vec<EdgeHit>> = (0..=ny)
        .into_par_iter()
        .map(|r| {
            (0..nx)
                .map(|c| match (&grid[r][c], &grid[r][c + 1]) {
                    (Some(a), Some(b)) => crossing(node(r, c), a, node(r, c + 1), b),
                    _ => None,
                })
                .collect()
        })
        .collect();
    let vertical: Vec<Vec<EdgeHit>> = (0..ny)
        .into_par_iter()
        .map(|r| {
            (0..=nx)
                .map(|c| match (&grid[r][c], &grid[r + 1][c]) {
                    (Some(a), Some(b)) => crossing(node(r, c), a, node(r + 1, c), b),
                    _ => None,
                })
                .collect()
        })
        .collect();

    let mut out = empty;
    for row in horizontal.iter().chain(vertical.iter()) {
        out.points.extend(row.iter().filter_map(|h| h.flatten()));
    }
    for r in 0..ny {
        for c in 0..nx {
            let edges = [horizontal[r][c], vertical[r][c + 1], horizontal[r + 1][c], vertical[r][c]];
            if edges.iter().any(|e| e.is_none()) {
                out.skipped_cells += 1;
                continue;
            }
            let hits: Vec<Complex64> = edges.iter().filter_map(|e| e.flatten()).collect();
            if hits.len() == 2 {
                out.segments.push((hits[0], hits[1]));
            } else if hits.len() == 4 {
                out.segments.push((hits[0], hits[1]));
                out.segments.push((hits[2], hits[3]));
            }
        }
    }
    Ok(out)
}

/// The curve `prod_i ((b_i - z) w - 1) = 0`, whose branches are `1/(b_i - z)`.
pub fn example3_curve(bs: &[Complex64]) -> Result<PlaneCurve> {
    let mut q = vec![ComplexPolynomial::new(vec![Complex64::new(1.0, 0.0)])];
    for &b in bs {
        // Multiply by (b - z) w - 1.
        let lin = ComplexPolynomial::new(vec![b, Complex64::new(-1.0, 0.0)]);
        let mut next = vec![ComplexPolynomial::zero(); q.len() + 1];
        for (i, qi) in q.iter().enumerate() {
            next[i] = next[i].add(&qi.scale_by(&Complex64::new(-1.0, 0.0)));
            next[i + 1] = next[i + 1].add(&qi.mul(&lin));
        }
        q = next;
    }
    PlaneCurve::new(q)
}

/// Closed-form circle `-E (u^2 + v^2) + C_v v + C_u u + D = 0` through
/// which the locus of the three branches `1/(b_i - z)` passes.
#[derive(Clone, Debug, Serialize)]
pub struct Example3Circle {
    pub center: Complex64,
    pub radius: f64,
    /// `[E, C_u, C_v, D]`.
    pub coeffs: [f64; 4],
}

impl Example3Circle {
    pub fn eval(&self, z: Complex64) -> f64 {
        let [e, cu, cv, d] = self.coeffs;
        -e * z.norm_sqr() + cu * z.re + cv * z.im + d
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        ((z - self.center).norm() - self.radius).abs()
    }
}

const S3: [([usize; 3], f64); 6] = [
    ([0, 1, 2], 1.0),
    ([0, 2, 1], -1.0),
    ([1, 0, 2], -1.0),
    ([1, 2, 0], 1.0),
    ([2, 0, 1], 1.0),
    ([2, 1, 0], -1.0),
];

/// Alternating sum over permutations of the pairs `(a_i, b_i)` of the
/// monomial `prod a_i^pa[i] b_i^pb[i]`.
fn eta(a: &[f64; 3], b: &[f64; 3], pa: [i32; 3], pb: [i32; 3]) -> f64 {
    S3.iter()
        .map(|(s, sign)| sign * (0..3).map(|i| a[s[i]].powi(pa[i]) * b[s[i]].powi(pb[i])).product::<f64>())
        .sum()
}

pub fn example3_circle(b1: Complex64, b2: Complex64, b3: Complex64) -> Result<Example3Circle> {
    let a = [b1.re, b2.re, b3.re];
    let b = [b1.im, b2.im, b3.im];
    let e = eta(&a, &b, [1, 0, 0], [0, 1, 0]);
    let cv = eta(&a, &b, [1, 0, 0], [0, 2, 0]) + eta(&a, &b, [1, 2, 0], [0, 0, 0]);
    let cu = eta(&a, &b, [0, 0, 0], [2, 1, 0]) + eta(&a, &b, [2, 0, 0], [0, 1, 0]);
    let d = eta(&a, &b, [1, 0, 0], [0, 1, 2]) + eta(&a, &b, [1, 0, 2], [0, 1, 0]);
    let scale = [b1, b2, b3].iter().map(|z| z.norm()).fold(1.0, f64::max);
    if e.abs() <= 1e-12 * scale * scale {
        return Err(Error::CollinearB);
    }
    let center = Complex64::new(cu / (2.0 * e), cv / (2.0 * e));
    let r2 = center.norm_sqr() + d / e;
    Ok(Example3Circle { center, radius: r2.max(0.0).sqrt(), coeffs: [e, cu, cv, d] })
}

/// Why a trace stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceEnd {
    BranchPoint,
    MaxLength,
    Closed,
    Escaped,
}

/// A piece of the zero level set of `H_i - H_j` through a seed.
#[derive(Clone, Debug, Serialize)]
pub struct LevelCurve {
    pub pair: (usize, usize),
    /// Point where `H_i - H_j` is measured from.
    pub base: Complex64,
    pub points: Vec<Complex64>,
    /// `A_i - A_j` at each vertex.
    pub diffs: Vec<Complex64>,
    /// `|A_i - A_j| / 2 pi`, mass per unit length.
    pub densities: Vec<f64>,
    /// `H_i - H_j` at each vertex relative to the base.
    pub levels: Vec<f64>,
    pub ends: (TraceEnd, TraceEnd),
}

impl LevelCurve {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Angle between the polyline's tangent at each vertex and the direction
    /// orthogonal to `conj(A_i - A_j)`. The tangent is the derivative of the
    /// quartic through five consecutive vertices, parametrized by chord length;
    /// the first and last two vertices are skipped.
    pub fn tangent_errors(&self) -> Vec<f64> {
        let n = self.points.len();
        if n < 5 {
            return Vec::new();
        }
        let mut s = vec![0.0; n];
        for v in 1..n {
            s[v] = s[v - 1] + (self.points[v] - self.points[v - 1]).norm();
        }
        (2..n - 2)
            .map(|v| {
                let tangent = lagrange_derivative(&s[v - 2..=v + 2], &self.points[v - 2..=v + 2], s[v]);
                let normal = self.diffs[v].conj();
                let c = (tangent * normal.conj()).re.abs() / (tangent.norm() * normal.norm());
                c.min(1.0).asin()
            })
            .collect()
    }
}

/// Derivative at `x` of the polynomial interpolating `(xs[m], ys[m])`.
fn lagrange_derivative(xs: &[f64], ys: &[Complex64], x: f64) -> Complex64 {
    let n = xs.len();
    let mut out = Complex64::default();
    for m in 0..n {
        let denom: f64 = (0..n).filter(|&l| l != m).map(|l| xs[m] - xs[l]).product();
        let mut num = 0.0;
        for skip in 0..n {
            if skip == m {
                continue;
            }
            num += (0..n).filter(|&l| l != m && l != skip).map(|l| x - xs[l]).product::<f64>();
        }
        out += ys[m] * (num / denom);
    }
    out
}

const TRACE_TOL: f64 = 1e-10;

/// Follows the level set of `Re int (A_i - A_j)` through `seed` in both
/// directions, with steps of length `step`, until it closes, reaches a
/// branch point or pole, leaves the region `|z| < 10 scale`, or each half
/// reaches `max_len`.
pub fn trace_level_curve(field: &BranchField, pair: (usize, usize), seed: Complex64, step: f64, max_len: f64) -> Result<LevelCurve> {
    field.check_pair(pair)?;
    if !(step > 0.0) {
        return Err(Error::InvalidPair("trace step must be positive".into()));
    }
    let w0 = field.labeled_fiber(seed)?;
    let d0 = field.alpha * (w0[pair.0] - w0[pair.1]);
    if d0.norm() == 0.0 {
        return Err(Error::LostTrack { z: seed });
    }
    let t0 = Complex64::i() * d0.conj() / d0.norm();
    let (fwd, end_f) = trace_half(field, pair, seed, &w0, t0, step, max_len)?;
    let (bwd, end_b) = if end_f == TraceEnd::Closed { (Vec::new(), TraceEnd::Closed) } else { trace_half(field, pair, seed, &w0, -t0, step, max_len)? };
    let mut verts: Vec<(Complex64, Complex64, f64)> = bwd.into_iter().rev().collect();
    verts.push((seed, d0, 0.0));
    verts.extend(fwd);
    Ok(LevelCurve {
        pair,
        base: seed,
        points: verts.iter().map(|v| v.0).collect(),
        diffs: verts.iter().map(|v| v.1).collect(),
        densities: verts.iter().map(|v| v.1.norm() / (2.0 * std::f64::consts::PI)).collect(),
        levels: verts.iter().map(|v| v.2).collect(),
        ends: (end_b, end_f),
    })
}

type Vertex = (Complex64, Complex64, f64);

fn trace_half(
    field: &BranchField,
    pair: (usize, usize),
    seed: Complex64,
    w_seed: &[Complex64],
    dir0: Complex64,
    step: f64,
    max_len: f64,
) -> Result<(Vec<Vertex>, TraceEnd)> {
    let tr = &field.tracker;
    let limit = 10.0 * tr.scale;
    let mut z = seed;
    let mut w = w_seed.to_vec();
    let mut g = 0.0;
    let mut dir = dir0;
    let mut out = Vec::new();
    let mut length = 0.0;
    loop {
        if length >= max_len {
            return Ok((out, TraceEnd::MaxLength));
        }
        if tr.obstacle_distance(z) < step.max(tr.clearance) {
            return Ok((out, TraceEnd::BranchPoint));
        }
        if z.norm() > limit {
            return Ok((out, TraceEnd::Escaped));
        }
        if out.len() > 4 && (z - seed).norm() < step {
            return Ok((out, TraceEnd::Closed));
        }
        let h = step.min(0.1 * tr.obstacle_distance(z));
        let zp = z + dir * h;
        let (iv, _, wp) = field.integrate(pair, z, &w, zp)?;
        let (mut zc, mut gc, mut wc) = (zp, g + iv.re, wp);
        let mut converged = false;
        for _ in 0..12 {
            let d = field.alpha * (wc[pair.0] - wc[pair.1]);
            if gc.abs() <= TRACE_TOL {
                converged = true;
                break;
            }
            let zn = zc - d.conj() * (gc / d.norm_sqr());
            if (zn - zc).norm() > h {
                return Err(Error::LostTrack { z: zc });
            }
            let (iv, _, wn) = field.integrate(pair, zc, &wc, zn)?;
            gc += iv.re;
            zc = zn;
            wc = wn;
        }
        if !converged {
            return Err(Error::LostTrack { z: zc });
        }
        let d = field.alpha * (wc[pair.0] - wc[pair.1]);
        if d.norm() <= 1e-12 {
            return Ok((out, TraceEnd::BranchPoint));
        }
        let mut t = Complex64::i() * d.conj() / d.norm();
        if (t * dir.conj()).re < 0.0 {
            t = -t;
        }
        length += (zc - z).norm();
        z = zc;
        w = wc;
        g = gc;
        dir = t;
        out.push((z, d, g));
    }
}

/// Local picture of the densest part of a root cloud.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClusterSeed {
    /// Midpoint of the densest atom and its nearest neighbour.
    pub point: Complex64,
    pub atom: Complex64,
    /// Mean nearest-neighbour distance around the atom.
    pub spacing: f64,
    /// Unit vector along the local chain of atoms.
    pub direction: Complex64,
}

/// Distance from each atom to its nearest neighbour.
pub fn nearest_distances(atoms: &[Complex64]) -> Vec<f64> {
    atoms
        .iter()
        .enumerate()
        .map(|(i, a)| {
            atoms
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| (a - b).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s[s.len() / 2]
}

pub fn densest_cluster_seed(mu: &RootMeasure) -> Result<ClusterSeed> {
    let atoms = mu.atoms();
    if atoms.len() < 3 {
        return Err(Error::SparseWindow);
    }
    let nn = nearest_distances(atoms);
    let radius = 3.0 * median(&nn);
    let counts: Vec<usize> = atoms.iter().map(|a| atoms.iter().filter(|b| (a - *b).norm() <= radius).count()).collect();
    let best = (0..atoms.len()).max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a))).unwrap();
    let atom = atoms[best];
    let near: Vec<Complex64> = atoms.iter().copied().filter(|b| (atom - b).norm() <= radius).collect();
    let partner = atoms
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != best)
        .min_by(|a, b| (a.1 - atom).norm().total_cmp(&(b.1 - atom).norm()))
        .map(|(_, b)| *b)
        .unwrap();
    // Principal axis of the neighbourhood: half the argument of the
    // second moment sum (z - m)^2.
    let m = near.iter().sum::<Complex64>() / near.len() as f64;
    let q: Complex64 = near.iter().map(|b| (b - m) * (b - m)).sum();
    let direction = if q.norm() > 0.0 { Complex64::from_polar(1.0, 0.5 * q.arg()) } else { (partner - atom) / (partner - atom).norm() };
    let idx: Vec<usize> = (0..atoms.len()).filter(|&j| (atoms[j] - atom).norm() <= radius).collect();
    let spacing = idx.iter().map(|&j| nn[j]).sum::<f64>() / idx.len() as f64;
    Ok(ClusterSeed { point: 0.5 * (atom + partner), atom, spacing, direction })
}

/// The pair of branches the Cauchy transform of `mu` switches between when
/// crossing the root chain at `seed`, read off at points three spacings
/// away on either side.
pub fn select_pair(field: &BranchField, mu: &RootMeasure, seed: &ClusterSeed) -> Result<(usize, usize)> {
    let w = field.labeled_fiber(seed.point)?;
    let normal = Complex64::i() * seed.direction;
    let pick = |side: f64| -> Result<usize> {
        let z = seed.point + normal * (3.0 * seed.spacing * side);
        let wz = field.tracker.carry(seed.point, &w, z)?;
        let c = measures::cauchy_transform(mu, z)?;
        Ok((0..wz.len()).min_by(|&a, &b| (field.alpha * wz[a] - c).norm().total_cmp(&(field.alpha * wz[b] - c).norm())).unwrap())
    };
    let a = pick(1.0)?;
    let b = pick(-1.0)?;
    if a == b {
        return Err(Error::InvalidPair(format!("Cauchy transform matches branch {} on both sides", a + 1)));
    }
    Ok((a, b))
}

/// Symmetric Hausdorff distance between two point sets.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_way = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Atoms reachable from `start` by hops of at most `link`.
pub fn chain_cluster(atoms: &[Complex64], start: Complex64, link: f64) -> Vec<Complex64> {
    let mut in_cluster = vec![false; atoms.len()];
    let mut frontier: Vec<usize> = (0..atoms.len()).filter(|&i| (atoms[i] - start).norm() <= link).collect();
    for &i in &frontier {
        in_cluster[i] = true;
    }
    while let Some(i) = frontier.pop() {
        for j in 0..atoms.len() {
            if !in_cluster[j] && (atoms[j] - atoms[i]).norm() <= link {
                in_cluster[j] = true;
                frontier.push(j);
            }
        }
    }
    (0..atoms.len()).filter(|&i| in_cluster[i]).map(|i| atoms[i]).collect()
}

fn polyline_distance(points: &[Complex64], z: Complex64) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    let mut s = 0.0;
    for seg in points.windows(2) {
        let d = seg[1] - seg[0];
        let l = d.norm();
        let t = if l > 0.0 { (((z - seg[0]) * d.conj()).re / (l * l)).clamp(0.0, 1.0) } else { 0.0 };
        let dist = (seg[0] + d * t - z).norm();
        if dist < best.0 {
            best = (dist, s + t * l);
        }
        s += l;
    }
    best
}

/// Fraction of `atoms` within `radius` of the curve.
pub fn colocation(level: &LevelCurve, atoms: &[Complex64], radius: f64) -> f64 {
    if atoms.is_empty() {
        return 0.0;
    }
    atoms.iter().filter(|a| polyline_distance(&level.points, **a).0 <= radius).count() as f64 / atoms.len() as f64
}

/// Empirical linear density of the atoms along a level curve against
/// `|A_i - A_j| / 2 pi`.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub window: f64,
    /// `(vertex, ratio)` for vertices whose window holds at least three atoms.
    pub ratios: Vec<(usize, f64)>,
    pub mean_ratio: f64,
    pub spread: f64,
    /// Share of all atoms lying within half a window of the curve.
    pub fraction_near: f64,
}

/// Atoms within `window / 2` of the curve are placed at their arclength
/// position; each vertex counts those within `window / 2` of its own
/// position.
pub fn density_vs_roots(level: &LevelCurve, mu: &RootMeasure, window: f64) -> Result<DensityReport> {
    let mut arclen = Vec::with_capacity(level.points.len());
    let mut s = 0.0;
    for (v, z) in level.points.iter().enumerate() {
        if v > 0 {
            s += (z - level.points[v - 1]).norm();
        }
        arclen.push(s);
    }
    let placed: Vec<f64> = mu
        .atoms()
        .iter()
        .map(|a| polyline_distance(&level.points, *a))
        .filter(|(d, _)| *d <= window / 2.0)
        .map(|(_, s)| s)
        .collect();
    let total = mu.len() as f64;
    let mut ratios = Vec::new();
    for (v, &sv) in arclen.iter().enumerate() {
        if sv - window / 2.0 < 0.0 || sv + window / 2.0 > s {
            continue;
        }
        let count = placed.iter().filter(|&&p| (p - sv).abs() <= window / 2.0).count();
        if count < 3 {
            continue;
        }
        let empirical = count as f64 / (window * total);
        ratios.push((v, empirical / level.densities[v]));
    }
    if ratios.is_empty() {
        return Err(Error::SparseWindow);
    }
    let mean = ratios.iter().map(|r| r.1).sum::<f64>() / ratios.len() as f64;
    let var = ratios.iter().map(|r| (r.1 - mean).powi(2)).sum::<f64>() / ratios.len() as f64;
    Ok(DensityReport { window, mean_ratio: mean, spread: var.sqrt(), fraction_near: placed.len() as f64 / total, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn triangle() -> [Complex64; 3] {
        [0, 1, 2].map(|m| Complex64::from_polar(2.0, 2.0 * std::f64::consts::PI * m as f64 / 3.0))
    }

    #[test]
    fn trivial_scaled_branch_is_reciprocal() {
        let p = Pencil::from_coeffs(&[&[c(-1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let a = scaled_branches(&p, 0, c(0.3, 0.7)).unwrap();
        assert_eq!(a.len(), 1);
        assert!((a[0] - 1.0 / c(0.3, 0.7)).norm() < 1e-12);
    }

    #[test]
    fn scaled_branches_are_the_fiber() {
        let p = Pencil::fig1();
        let field = BranchField::for_family(&p, 2).unwrap();
        let z = c(1.7, -2.2);
        let a = field.at(z).unwrap();
        let fiber = crate::curve::branches_at(&field.tracker.curve, z, &Default::default()).unwrap().values;
        for v in &a {
            assert!(fiber.iter().any(|w| (field.alpha * w - v).norm() < 1e-9));
        }
    }

    #[test]
    fn labels_agree_along_a_radial_path() {
        let p = Pencil::fig1();
        let field = BranchField::for_family(&p, 0).unwrap();
        let dir = Complex64::from_polar(1.0, 0.3);
        let mut prev = field.at(dir * 6.0).unwrap();
        for s in [5.5, 5.0, 4.5] {
            let cur = field.at(dir * s).unwrap();
            let carried = field.tracker.carry(dir * (s + 0.5), &prev.iter().map(|a| a / field.alpha).collect::<Vec<_>>(), dir * s).unwrap();
            for (x, y) in cur.iter().zip(&carried) {
                assert!((x - field.alpha * y).norm() < 1e-9);
            }
            prev = cur;
        }
    }

    #[test]
    fn circle_is_the_circumcircle() {
        let bs = [c(0.3, 1.1), c(-1.2, 0.2), c(0.9, -0.7)];
        let circ = example3_circle(bs[0], bs[1], bs[2]).unwrap();
        for b in bs {
            assert!(circ.distance(b) < 1e-12);
            assert!(circ.eval(b).abs() < 1e-12);
        }
        assert!((circ.center - c(-0.05, -1.0 / 60.0)).norm() < 1e-12);
        let swapped = example3_circle(bs[1], bs[0], bs[2]).unwrap();
        assert!((swapped.center - circ.center).norm() < 1e-12);
        assert!((swapped.radius - circ.radius).abs() < 1e-12);
    }

    #[test]
    fn collinear_points_have_no_circle() {
        assert!(matches!(example3_circle(c(0.0, 0.0), c(1.0, 0.0), c(3.0, 0.0)), Err(Error::CollinearB)));
    }

    #[test]
    fn example3_curve_branches() {
        let bs = triangle();
        let curve = example3_curve(&bs).unwrap();
        let z = c(0.4, -0.3);
        let f = crate::curve::branches_at(&curve, z, &Default::default()).unwrap().values;
        for b in bs {
            assert!(f.iter().any(|w| (w - 1.0 / (b - z)).norm() < 1e-10));
        }
    }

    #[test]
    fn locus_lies_on_the_circle() {
        let bs = triangle();
        let field = BranchField::new(&example3_curve(&bs).unwrap(), c(1.0, 0.0)).unwrap();
        let rect = Rect::new(-2.5, -2.5, 2.5, 2.5).unwrap();
        let res = 0.05;
        let circ = example3_circle(bs[0], bs[1], bs[2]).unwrap();
        let locus = gamma_locus(&field, (0, 1, 2), rect, res).unwrap();
        assert!(locus.points.len() > 100);
        for z in &locus.points {
            assert!(circ.distance(*z) <= 2.0 * res, "{z}");
        }
        let other = gamma_locus(&field, (2, 0, 1), rect, res).unwrap();
        assert!(hausdorff(&locus.points, &other.points) <= 2.0 * res);
    }

    #[test]
    fn two_branches_give_empty_locus() {
        let curve = example3_curve(&[c(1.0, 0.0), c(-1.0, 0.5)]).unwrap();
        let field = BranchField::new(&curve, c(1.0, 0.0)).unwrap();
        let locus = gamma_locus(&field, (0, 1, 2), Rect::new(-1.0, -1.0, 1.0, 1.0).unwrap(), 0.1).unwrap();
        assert!(locus.points.is_empty());
    }

    #[test]
    fn rect_with_branch_point_is_rejected() {
        let field = BranchField::for_family(&Pencil::fig1(), 0).unwrap();
        let r = gamma_locus(&field, (0, 1, 2), Rect::new(-10.0, -10.0, 10.0, 10.0).unwrap(), 0.5);
        assert!(matches!(r, Err(Error::BranchCollision { .. })));
    }

    #[test]
    fn h_difference_basics() {
        let field = BranchField::for_family(&Pencil::fig1(), 0).unwrap();
        let z = c(3.0, 3.0);
        assert_eq!(h_difference(&field, (0, 1), z, z).unwrap(), 0.0);
        let k1 = BranchField::for_family(&Pencil::from_coeffs(&[&[c(-1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]).unwrap(), 0).unwrap();
        assert!(matches!(h_difference(&k1, (0, 0), z, z), Err(Error::InvalidPair(_))));
    }

    #[test]
    fn h_difference_is_path_independent() {
        let field = BranchField::for_family(&Pencil::fig1(), 1).unwrap();
        // A rectangle far from every branch point.
        let a = c(12.0, 2.0);
        let b = c(14.0, 5.0);
        let direct = h_difference_along(&field, (0, 2), &[a, b]).unwrap();
        let around = h_difference_along(&field, (0, 2), &[a, c(14.0, 2.0), b]).unwrap();
        let other = h_difference_along(&field, (0, 2), &[a, c(12.0, 5.0), c(13.0, 4.0), b]).unwrap();
        assert!((direct - around).abs() < 1e-8);
        assert!((direct - other).abs() < 1e-8);
    }

    #[test]
    fn level_curve_tangents_and_levels() {
        let field = BranchField::for_family(&Pencil::fig1(), 0).unwrap();
        let seed = c(2.0, -3.0);
        let lc = trace_level_curve(&field, (0, 1), seed, 0.02, 1.0).unwrap();
        assert!(lc.points.len() > 50);
        assert!(lc.levels.iter().all(|g| g.abs() <= TRACE_TOL));
        assert!(lc.densities.iter().all(|d| *d > 0.0));
        assert!(lc.tangent_errors().iter().all(|e| *e < 1e-4));
        let v = lc.points[lc.points.len() / 2 + 10];
        let h = h_difference(&field, (0, 1), seed, v).unwrap();
        assert!(h.abs() <= 10.0 * TRACE_TOL, "{h}");
    }

    #[test]
    fn uniform_circle_density() {
        // Atoms equally spaced on |z| = 1 against a circle with |A_i - A_j| = m.
        let m = 400;
        let atoms = measures::circle_points(c(0.0, 0.0), 1.0, m);
        let mu = RootMeasure::from_atoms(atoms).unwrap();
        let pts = measures::circle_points(c(0.0, 0.0), 1.0, 720);
        let dens = 1.0 / (2.0 * std::f64::consts::PI);
        let lc = LevelCurve {
            pair: (0, 1),
            base: pts[0],
            diffs: vec![c(1.0, 0.0); pts.len()],
            densities: vec![dens; pts.len()],
            levels: vec![0.0; pts.len()],
            points: pts,
            ends: (TraceEnd::Closed, TraceEnd::Closed),
        };
        let r = density_vs_roots(&lc, &mu, 0.2).unwrap();
        assert!((r.mean_ratio - 1.0).abs() < 0.05, "{}", r.mean_ratio);
        assert!(r.fraction_near > 0.99);
    }

    #[test]
    fn rect_parsing() {
        assert_eq!("-1,-2,3,4".parse::<Rect>().unwrap(), Rect::new(-1.0, -2.0, 3.0, 4.0).unwrap());
        assert!("1,2,3".parse::<Rect>().is_err());
        assert!("3,0,1,1".parse::<Rect>().is_err());
    }
}
