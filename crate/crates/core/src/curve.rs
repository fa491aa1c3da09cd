//! The plane algebraic curve `sum_i Q_i(z) w^i = 0`: fibers, branch
//! points, expansions at infinity and continuation of branches.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pencil::{self, Pencil};
use crate::poly::{self, ComplexPolynomial, PrecisionPolicy};
use crate::scalar::Precision;
use crate::series::{self, SeriesOrigin, TruncatedSeries};

#[derive(Clone, Debug)]
pub struct PlaneCurve {
    q: Vec<ComplexPolynomial>,
}

impl PlaneCurve {
    pub fn new(q: Vec<ComplexPolynomial>) -> Result<Self> {
        if q.len() < 2 || q.last().is_none_or(|p| p.is_zero()) {
            return Err(Error::InvalidPencil("curve needs a nonzero leading coefficient in w".into()));
        }
        Ok(PlaneCurve { q })
    }

    pub fn from_pencil(p: &Pencil) -> Self {
        PlaneCurve { q: p.qs().to_vec() }
    }

    /// Degree in `w`.
    pub fn k(&self) -> usize {
        self.q.len() - 1
    }

    pub fn qs(&self) -> &[ComplexPolynomial] {
        &self.q
    }

    pub fn a(&self, i: usize, j: usize) -> Complex64 {
        self.q[i].coeffs().get(j).copied().unwrap_or_default()
    }

    /// Coefficients in `w` at a fixed `z`, low to high.
    pub fn fiber_coeffs(&self, z: Complex64) -> Vec<Complex64> {
        self.q.iter().map(|p| p.eval(&z)).collect()
    }

    /// True when `Q_k(z)` is negligible against the other coefficients.
    pub fn leading_vanishes(&self, z: Complex64) -> bool {
        let c = self.fiber_coeffs(z);
        let scale = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
        c[self.k()].norm() <= 1e-13 * scale
    }

    /// Roots of the reciprocal characteristic equation
    /// `a_kk xi^k + ... + a_00 = 0`, paired with the sorted alphas so that
    /// `xi_j ~ 1/alpha_j`.
    pub fn xi_roots(&self) -> Result<Vec<Complex64>> {
        let k = self.k();
        let diag: Vec<Complex64> = (0..=k).map(|i| self.a(i, i)).collect();
        let scale = diag.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if diag[0].norm() <= 1e-12 * scale || diag[k].norm() <= 1e-12 * scale {
            return Err(Error::DegenerateCharEq);
        }
        let char_poly = ComplexPolynomial::new(diag.iter().rev().copied().collect());
        let mut alphas = poly::roots(&char_poly, &PrecisionPolicy::default())?;
        pencil::sort_families(&mut alphas);
        let recip = ComplexPolynomial::new(diag);
        let xs = poly::roots(&recip, &PrecisionPolicy::default())?;
        let mut used = vec![false; xs.len()];
        let mut out = Vec::with_capacity(k);
        for a in &alphas {
            let target = 1.0 / a;
            let (idx, _) = xs
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|x, y| (x.1 - target).norm().total_cmp(&(y.1 - target).norm()))
                .expect("as many xi as alpha");
            used[idx] = true;
            out.push(xs[idx]);
        }
        Ok(out)
    }

    /// Largest modulus among branch points and zeros of `Q_k`, at least 1.
    pub fn scale(&self, branch_points: &[Complex64]) -> f64 {
        let poles = self.poles();
        branch_points.iter().chain(poles.iter()).map(|z| z.norm()).fold(1.0, f64::max)
    }

    /// Zeros of `Q_k`, where sheets escape to infinity.
    pub fn poles(&self) -> Vec<Complex64> {
        let qk = &self.q[self.k()];
        match qk.degree() {
            Some(d) if d > 0 => poly::roots(qk, &PrecisionPolicy::default()).unwrap_or_default(),
            _ => Vec::new(),
        }
    }
}

/// Values of the branches at one point.
#[derive(Clone, Debug, Serialize)]
pub struct Fiber {
    pub values: Vec<Complex64>,
    /// Sheets lost to infinity because `Q_k(z)` vanishes there.
    pub dropped: usize,
}

pub fn branches_at(c: &PlaneCurve, z: Complex64, policy: &PrecisionPolicy) -> Result<Fiber> {
    let mut coeffs = c.fiber_coeffs(z);
    let scale = coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut dropped = 0;
    while coeffs.len() > 1 && coeffs.last().is_some_and(|x| x.norm() <= 1e-13 * scale) {
        coeffs.pop();
        dropped += 1;
    }
    let p = ComplexPolynomial::new(coeffs);
    let values = if p.degree().unwrap_or(0) == 0 { Vec::new() } else { poly::roots(&p, policy)? };
    Ok(Fiber { values, dropped })
}

/// Finite branch points: distinct zeros of the discriminant in `w`,
/// excluding zeros of `Q_k` (those are poles of a sheet, not branchings).
pub fn branch_points(c: &PlaneCurve, policy: &PrecisionPolicy) -> Result<Vec<Complex64>> {
    let disc = poly::discriminant_in_w(c.qs())?;
    if disc.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let raw = poly::roots(&disc, policy)?;
    let scale = raw.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut out: Vec<Complex64> = Vec::new();
    for z in raw {
        if out.iter().any(|w| (w - z).norm() <= 1e-7 * scale) {
            continue;
        }
        if c.leading_vanishes(z) {
            continue;
        }
        out.push(z);
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Expansion `gamma_j(z) = sum_{i>=1} epsilon_i z^{-i}` of the branch with
/// leading coefficient `xi_j`, through `epsilon_m`.
///
/// Solves `sum_i P_i(y) N(y)^i = 0` with `P_i(y) = sum_j a_ij y^(i-j)` by
/// Newton iteration on truncated series, where `gamma = y N(y)`.
pub fn branch_series_at_infinity(c: &PlaneCurve, family: usize, m: usize) -> Result<TruncatedSeries> {
    let xis = c.xi_roots()?;
    let xi = *xis
        .get(family)
        .ok_or_else(|| Error::InvalidPair(format!("family {} out of range", family + 1)))?;
    let k = c.k();
    let prec = Precision::DOUBLE;
    let len = m.max(1);
    // P_i as series in y: coefficient of y^(i-j) is a_ij.
    let p_series: Vec<Vec<Complex64>> = (0..=k)
        .map(|i| {
            let mut v = vec![Complex64::default(); i + 1];
            for (j, slot) in v.iter_mut().enumerate().rev() {
                *slot = c.a(i, i - j);
            }
            v
        })
        .collect();
    let mut n_ser = vec![Complex64::default(); len];
    n_ser[0] = xi;
    let d0: Complex64 = (1..=k).map(|i| c.a(i, i) * (i as f64) * xi.powu(i as u32 - 1)).sum();
    let d0_scale: f64 = (1..=k).map(|i| (c.a(i, i) * (i as f64) * xi.powu(i as u32 - 1)).norm()).sum();
    if d0.norm() <= 1e-10 * d0_scale {
        return Err(Error::MultipleXi { j: family + 1 });
    }
    let iterations = (usize::BITS - len.leading_zeros()) as usize + 3;
    for _ in 0..iterations {
        let mut f = vec![Complex64::default(); len];
        let mut fd = vec![Complex64::default(); len];
        let mut pow = series::padded(&[Complex64::new(1.0, 0.0)], len, prec);
        for (i, p) in p_series.iter().enumerate() {
            let term = series::mul(p, &pow, len, prec);
            for (a, b) in f.iter_mut().zip(&term) {
                *a += b;
            }
            if i < k {
                let dterm = series::mul(&p_series[i + 1], &pow, len, prec);
                for (a, b) in fd.iter_mut().zip(&dterm) {
                    *a += b * (i as f64 + 1.0);
                }
            }
            pow = series::mul(&pow, &n_ser, len, prec);
        }
        let step = series::div(&f, &fd, len, prec);
        for (a, s) in n_ser.iter_mut().zip(&step) {
            *a -= s;
        }
    }
    let mut coeffs = vec![Complex64::default()];
    coeffs.extend(n_ser.into_iter().take(m));
    Ok(TruncatedSeries::new(coeffs, SeriesOrigin::Branch))
}

/// Options for branch continuation.
#[derive(Clone, Copy, Debug)]
pub struct ContinuationOptions {
    /// Minimum distance to a branch point, as a fraction of the curve scale.
    pub clearance_fraction: f64,
    /// Largest step along the path, as a fraction of the curve scale.
    pub max_step_fraction: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        ContinuationOptions { clearance_fraction: 1e-3, max_step_fraction: 0.02 }
    }
}

/// Follows every sheet of the curve along paths, keeping labels by
/// nearest-root matching with step halving.
#[derive(Clone, Debug)]
pub struct Tracker {
    pub curve: PlaneCurve,
    pub branch_points: Vec<Complex64>,
    /// Zeros of `Q_k`; paths keep the same clearance from them.
    pub poles: Vec<Complex64>,
    pub scale: f64,
    pub clearance: f64,
    pub max_step: f64,
    anchor_w: Option<Vec<Complex64>>,
}

impl Tracker {
    pub fn new(curve: &PlaneCurve, opts: ContinuationOptions) -> Result<Self> {
        let bps = branch_points(curve, &PrecisionPolicy::default())?;
        Ok(Tracker::with_branch_points(curve, bps, opts))
    }

    pub fn with_branch_points(curve: &PlaneCurve, bps: Vec<Complex64>, opts: ContinuationOptions) -> Self {
        let scale = curve.scale(&bps);
        let mut t = Tracker {
            curve: curve.clone(),
            branch_points: bps,
            poles: curve.poles(),
            scale,
            clearance: opts.clearance_fraction * scale,
            max_step: opts.max_step_fraction * scale,
            anchor_w: None,
        };
        t.anchor_w = t.anchor_fiber(t.anchor()).ok();
        t
    }

    /// Branch point or pole within clearance of segment `[a, b]`, if any.
    pub fn blocking_branch_point(&self, a: Complex64, b: Complex64) -> Option<Complex64> {
        self.branch_points
            .iter()
            .chain(self.poles.iter())
            .copied()
            .find(|&bp| segment_distance(a, b, bp) < self.clearance)
    }

    /// Distance from `z` to the nearest branch point or pole.
    pub fn obstacle_distance(&self, z: Complex64) -> f64 {
        self.branch_points.iter().chain(self.poles.iter()).map(|b| (b - z).norm()).fold(f64::INFINITY, f64::min)
    }

    /// All roots of the fiber at `z`, in an arbitrary order, polished from `seeds`.
    pub fn fiber(&self, z: Complex64, seeds: &[Complex64]) -> Vec<Complex64> {
        let coeffs = self.curve.fiber_coeffs(z);
        let k = self.curve.k();
        let mut w: Vec<Complex64> = seeds.to_vec();
        if w.len() != k || w.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
            return branches_at(&self.curve, z, &PrecisionPolicy::default())
                .map(|f| f.values)
                .unwrap_or_default();
        }
        if !poly::aberth(&coeffs, &mut w, 80) {
            if let Ok(f) = branches_at(&self.curve, z, &PrecisionPolicy::default()) {
                if f.values.len() == k {
                    return f.values;
                }
            }
        }
        w
    }

    /// Fiber at `z` relabeled to follow `prev`; `None` if the matching is not
    /// unambiguous (some label's nearest root is not at most half as far as
    /// its second nearest).
    pub fn match_fiber(&self, z: Complex64, prev: &[Complex64]) -> Option<Vec<Complex64>> {
        let roots = self.fiber(z, prev);
        if roots.len() != prev.len() {
            return None;
        }
        let mut used = vec![false; roots.len()];
        let mut out = vec![Complex64::default(); prev.len()];
        for (l, w) in prev.iter().enumerate() {
            let mut d: Vec<(f64, usize)> = roots.iter().enumerate().map(|(i, r)| ((r - w).norm(), i)).collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            if d.len() > 1 && d[0].0 > 0.5 * d[1].0 {
                return None;
            }
            if used[d[0].1] {
                return None;
            }
            used[d[0].1] = true;
            out[l] = roots[d[0].1];
        }
        Some(out)
    }

    /// Carry the labeled fiber `w0` at `a` to `b` along the straight segment.
    pub fn carry(&self, a: Complex64, w0: &[Complex64], b: Complex64) -> Result<Vec<Complex64>> {
        if let Some(bp) = self.blocking_branch_point(a, b) {
            return Err(Error::BranchCollision { z: a, branch_point: bp });
        }
        let len = (b - a).norm();
        let mut t = 0.0;
        let mut w = w0.to_vec();
        let mut h = (self.max_step / len.max(1e-300)).min(1.0);
        let min_h = 1e-12 * self.scale / len.max(1e-300);
        while t < 1.0 {
            let t1 = (t + h).min(1.0);
            let z1 = a + (b - a) * t1;
            match self.match_fiber(z1, &w) {
                Some(next) => {
                    w = next;
                    t = t1;
                    h = (h * 1.5).min(self.max_step / len.max(1e-300));
                }
                None => {
                    h *= 0.5;
                    if h < min_h {
                        return Err(Error::LostTrack { z: a + (b - a) * t });
                    }
                }
            }
        }
        Ok(w)
    }

    /// Labeled fiber at `z` by the convention used throughout: sheets are
    /// named at a real anchor far out, where `gamma_j(z) ~ xi_j / z`, and
    /// carried in along a straight segment (or, if that is blocked, around
    /// the anchor circle and then radially).
    pub fn labeled_fiber(&self, z: Complex64) -> Result<Vec<Complex64>> {
        let anchor = self.anchor();
        let w_anchor = self.anchor_w.clone().ok_or(Error::DegenerateCurve)?;
        if self.blocking_branch_point(anchor, z).is_none() {
            return self.carry(anchor, &w_anchor, z);
        }
        let r = anchor.norm();
        let theta = z.arg();
        let steps = ((theta.abs() * r) / self.max_step).ceil().max(1.0) as usize;
        let mut w = w_anchor;
        let mut prev = anchor;
        for s in 1..=steps {
            let p = Complex64::from_polar(r, theta * s as f64 / steps as f64);
            w = self.carry(prev, &w, p)?;
            prev = p;
        }
        self.carry(prev, &w, z)
    }

    /// Anchor on the positive real axis beyond every branch point and pole.
    pub fn anchor(&self) -> Complex64 {
        let mut a = Complex64::new(4.0 * self.scale, 0.0);
        if self.obstacle_distance(a) < self.clearance {
            a += Complex64::new(0.0, 0.1);
        }
        a
    }

    /// Fiber at the anchor in label order: by the branch series at
    /// infinity, or by argument when the leading coefficients coincide.
    fn anchor_fiber(&self, anchor: Complex64) -> Result<Vec<Complex64>> {
        let mut values = branches_at(&self.curve, anchor, &PrecisionPolicy::default())?.values;
        if values.len() != self.curve.k() {
            return Err(Error::DegenerateCurve);
        }
        match self.anchor_fiber_by_series(anchor, &values) {
            Ok(v) => Ok(v),
            Err(Error::MultipleXi { .. }) | Err(Error::DegenerateCharEq) | Err(Error::PrecisionExhausted { .. }) => {
                values.sort_by(|a, b| pencil::canonical_arg(*a).total_cmp(&pencil::canonical_arg(*b)).then(a.norm().total_cmp(&b.norm())));
                Ok(values)
            }
            Err(e) => Err(e),
        }
    }

    fn anchor_fiber_by_series(&self, anchor: Complex64, values: &[Complex64]) -> Result<Vec<Complex64>> {
        let k = self.curve.k();
        let xis = self.curve.xi_roots()?;
        let mut used = vec![false; values.len()];
        let mut out = Vec::with_capacity(k);
        for j in 0..k {
            let s = branch_series_at_infinity(&self.curve, j, 8)?;
            let guess = s.eval(&(1.0 / anchor));
            let guess = if guess.re.is_finite() { guess } else { xis[j] / anchor };
            let (idx, _) = values
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .min_by(|a, b| (a.1 - guess).norm().total_cmp(&(b.1 - guess).norm()))
                .ok_or(Error::DegenerateCurve)?;
            used[idx] = true;
            out.push(values[idx]);
        }
        Ok(out)
    }
}

pub fn segment_distance(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    let d = b - a;
    let l2 = d.norm_sqr();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / l2).clamp(0.0, 1.0);
    (a + d * t - p).norm()
}

/// Samples of one branch along a path.
#[derive(Clone, Debug, Serialize)]
pub struct Continuation {
    pub samples: Vec<(Complex64, Complex64)>,
    /// Set when a closed path returns to a different sheet.
    pub monodromy: bool,
}

/// Analytic continuation of the branch through `(path[0], w0)` along the
/// polyline `path`.
pub fn continue_branch(c: &PlaneCurve, path: &[Complex64], w0: Complex64, opts: ContinuationOptions) -> Result<Continuation> {
    let tracker = Tracker::new(c, opts)?;
    let start = *path.first().ok_or_else(|| Error::InvalidPair("empty path".into()))?;
    let fiber = branches_at(c, start, &PrecisionPolicy::default())?.values;
    let label = fiber
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - w0).norm().total_cmp(&(b.1 - w0).norm()))
        .map(|(i, _)| i)
        .ok_or(Error::DegenerateCurve)?;
    let mut w = fiber;
    let mut samples = vec![(start, w[label])];
    for pair in path.windows(2) {
        w = tracker.carry(pair[0], &w, pair[1])?;
        samples.push((pair[1], w[label]));
    }
    let last = *path.last().unwrap();
    let closed = (last - start).norm() <= 1e-12 * tracker.scale;
    let end_w = samples.last().unwrap().1;
    let monodromy = closed && (end_w - samples[0].1).norm() > 1e-6 * (1.0 + samples[0].1.norm());
    Ok(Continuation { samples, monodromy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::Pencil;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sqrt_curve() -> PlaneCurve {
        PlaneCurve::new(vec![
            ComplexPolynomial::from_real(&[0.0, -1.0]),
            ComplexPolynomial::zero(),
            ComplexPolynomial::from_real(&[1.0]),
        ])
        .unwrap()
    }

    #[test]
    fn fig1_has_six_branch_points() {
        let curve = PlaneCurve::from_pencil(&Pencil::fig1());
        let bps = branch_points(&curve, &PrecisionPolicy::default()).unwrap();
        assert_eq!(bps.len(), 6);
        let disc = poly::discriminant_in_w(curve.qs()).unwrap();
        for z in &bps {
            assert!(poly::relative_residual(&disc, z) < 1e-8);
            // Two sheets meet: the fiber has a double root.
            let f = branches_at(&curve, *z, &PrecisionPolicy::default()).unwrap();
            let mut min_gap = f64::INFINITY;
            for a in 0..3 {
                for b in a + 1..3 {
                    min_gap = min_gap.min((f.values[a] - f.values[b]).norm());
                }
            }
            assert!(min_gap < 1e-4, "{z}: {min_gap}");
        }
    }

    #[test]
    fn sheet_drop_at_zero_of_leading_coefficient() {
        // z w - 1: at z = 0 the only sheet escapes.
        let curve = PlaneCurve::new(vec![ComplexPolynomial::from_real(&[-1.0]), ComplexPolynomial::from_real(&[0.0, 1.0])]).unwrap();
        let f = branches_at(&curve, c(0.0, 0.0), &PrecisionPolicy::default()).unwrap();
        assert_eq!(f.dropped, 1);
        assert!(f.values.is_empty());
    }

    #[test]
    fn xi_pairs_with_reciprocal_alpha() {
        let p = Pencil::fig1();
        let alphas = crate::pencil::validate_general_type(&p, 1e-9).alphas;
        let xis = PlaneCurve::from_pencil(&p).xi_roots().unwrap();
        for (a, x) in alphas.iter().zip(&xis) {
            assert!((a * x - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn branch_series_satisfies_curve() {
        let curve = PlaneCurve::from_pencil(&Pencil::fig1());
        for j in 0..3 {
            let s = branch_series_at_infinity(&curve, j, 12).unwrap();
            let z = c(40.0, 25.0);
            let g = s.eval(&(1.0 / z));
            let f = branches_at(&curve, z, &PrecisionPolicy::default()).unwrap();
            let d = f.values.iter().map(|w| (w - g).norm()).fold(f64::INFINITY, f64::min);
            assert!(d < 1e-14 * 1e3, "family {j}: {d}");
        }
    }

    #[test]
    fn branch_series_of_hyperbola() {
        // z w - 1 = 0: w = 1/z exactly.
        let curve = PlaneCurve::new(vec![ComplexPolynomial::from_real(&[-1.0]), ComplexPolynomial::from_real(&[0.0, 1.0])]).unwrap();
        let s = branch_series_at_infinity(&curve, 0, 6).unwrap();
        assert!((s.coeffs[1] - 1.0).norm() < 1e-15);
        assert!(s.coeffs[2..].iter().all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn continuation_along_hyperbola() {
        let curve = PlaneCurve::new(vec![ComplexPolynomial::from_real(&[-1.0]), ComplexPolynomial::from_real(&[0.0, 1.0])]).unwrap();
        let out = continue_branch(&curve, &[c(1.0, 0.0), c(2.0, 0.0)], c(1.0, 0.0), ContinuationOptions::default()).unwrap();
        assert!((out.samples.last().unwrap().1 - 0.5).norm() < 1e-12);
        assert!(!out.monodromy);
    }

    #[test]
    fn loop_around_square_root_swaps_sheets() {
        let path: Vec<Complex64> = (0..=64).map(|s| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * s as f64 / 64.0)).collect();
        let mut path = path;
        *path.last_mut().unwrap() = c(1.0, 0.0);
        let out = continue_branch(&sqrt_curve(), &path, c(1.0, 0.0), ContinuationOptions::default()).unwrap();
        assert!((out.samples.last().unwrap().1 + 1.0).norm() < 1e-12);
        assert!(out.monodromy);
    }

    #[test]
    fn path_through_branch_point_is_refused() {
        let r = continue_branch(&sqrt_curve(), &[c(-1.0, 0.0), c(1.0, 0.0)], c(0.0, 1.0), ContinuationOptions::default());
        assert!(matches!(r, Err(Error::BranchCollision { .. })));
    }
}
