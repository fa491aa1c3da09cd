//! Root-counting measures, their Cauchy transforms and logarithmic
//! potentials, and the comparisons between eigenpolynomial data and the
//! branches of the plane curve.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::curve::{self, PlaneCurve};
use crate::error::{Error, Result};
use crate::pencil::{self, EigenSolution, Pencil};
use crate::poly::{self, ComplexPolynomial, PrecisionPolicy};

/// Uniform probability measure on a multiset of points.
#[derive(Clone, Debug, Serialize)]
pub struct RootMeasure {
    atoms: Vec<Complex64>,
}

impl RootMeasure {
    pub fn from_atoms(atoms: Vec<Complex64>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidPencil("measure with no atoms".into()));
        }
        Ok(RootMeasure { atoms })
    }

    pub fn atoms(&self) -> &[Complex64] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.atoms.len() as f64
    }

    /// `max(1, max |atom|)`, the length scale for collision tests.
    pub fn scale(&self) -> f64 {
        self.atoms.iter().map(|a| a.norm()).fold(1.0, f64::max)
    }

    fn check_clear(&self, z: Complex64) -> Result<()> {
        let tol = 1e-13 * self.scale();
        if self.atoms.iter().any(|a| (z - a).norm() <= tol) {
            return Err(Error::AtomCollision);
        }
        Ok(())
    }
}

/// Atoms at the roots of `p`, repeated by multiplicity.
pub fn root_measure(p: &ComplexPolynomial, policy: &PrecisionPolicy) -> Result<RootMeasure> {
    if p.degree().unwrap_or(0) == 0 {
        return Err(Error::InvalidPencil("root measure of a constant".into()));
    }
    RootMeasure::from_atoms(poly::roots(p, policy)?)
}

pub fn cauchy_transform(mu: &RootMeasure, z: Complex64) -> Result<Complex64> {
    mu.check_clear(z)?;
    let s: Complex64 = mu.atoms.iter().map(|a| 1.0 / (z - a)).sum();
    Ok(s * mu.weight())
}

pub fn log_potential(mu: &RootMeasure, z: Complex64) -> Result<f64> {
    mu.check_clear(z)?;
    let s: f64 = mu.atoms.iter().map(|a| (z - a).norm().ln()).sum();
    Ok(s * mu.weight())
}

/// Distance between the normalized log-derivative of an eigenpolynomial
/// and the curve branch of the same family, on a circle.
#[derive(Clone, Debug, Serialize)]
pub struct BranchDeviation {
    pub n: usize,
    pub family: usize,
    pub radius: f64,
    pub samples: usize,
    /// `max |L_n(z) - gamma_j(z)|`.
    pub deviation: f64,
    /// `max |C_mu(z) - alpha_j gamma_j(z)|`.
    pub cauchy_deviation: f64,
    /// `max |sum Q_i(z) L_n(z)^i| / sum |Q_i(z)| |L_n(z)|^i`.
    pub curve_residual: f64,
}

/// Circle of `count` equally spaced points starting on the positive real axis.
pub fn circle_points(center: Complex64, radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|s| center + Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * s as f64 / count as f64))
        .collect()
}

/// Value of branch `family` at `z`, picked from the fiber as the root
/// nearest to the branch series at infinity.
pub fn branch_value(c: &PlaneCurve, family: usize, z: Complex64, series_order: usize) -> Result<Complex64> {
    let series = curve::branch_series_at_infinity(c, family, series_order)?;
    branch_value_with(c, &series.coeffs, z)
}

fn branch_value_with(c: &PlaneCurve, series: &[Complex64], z: Complex64) -> Result<Complex64> {
    let y = 1.0 / z;
    let guess = series.iter().rev().fold(Complex64::default(), |acc, e| acc * y + e);
    let fiber = curve::branches_at(c, z, &PrecisionPolicy::default())?;
    fiber
        .values
        .iter()
        .copied()
        .min_by(|a, b| (a - guess).norm().total_cmp(&(b - guess).norm()))
        .ok_or(Error::DegenerateCurve)
}

/// Deviation for an already computed eigensolution.
pub fn branch_deviation_of(p: &Pencil, family: usize, alpha: Complex64, s: &EigenSolution, radius: f64, samples: usize) -> Result<BranchDeviation> {
    let c = PlaneCurve::from_pencil(p);
    let series = curve::branch_series_at_infinity(&c, family, 16)?.coeffs;
    let mu = RootMeasure::from_atoms(s.roots.clone())?;
    let inv_lambda = 1.0 / s.lambda;
    let rows: Vec<Result<(f64, f64, f64)>> = circle_points(Complex64::default(), radius, samples)
        .into_par_iter()
        .map(|z| {
            let gamma = branch_value_with(&c, &series, z)?;
            let cauchy = cauchy_transform(&mu, z)?;
            let l = cauchy * (s.n as f64) * inv_lambda;
            let mut num = Complex64::default();
            let mut den = 0.0;
            let mut lp = Complex64::new(1.0, 0.0);
            for q in c.qs() {
                let qz = q.eval(&z);
                num += qz * lp;
                den += qz.norm() * lp.norm();
                lp *= l;
            }
            Ok(((l - gamma).norm(), (cauchy - alpha * gamma).norm(), num.norm() / den.max(f64::MIN_POSITIVE)))
        })
        .collect();
    let mut out = BranchDeviation { n: s.n, family, radius, samples, deviation: 0.0, cauchy_deviation: 0.0, curve_residual: 0.0 };
    for r in rows {
        let (d, cd, cr) = r?;
        out.deviation = out.deviation.max(d);
        out.cauchy_deviation = out.cauchy_deviation.max(cd);
        out.curve_residual = out.curve_residual.max(cr);
    }
    Ok(out)
}

/// Solves for `p_{n,family}` and measures its deviation from the branch on
/// `|z| = radius` at `samples` points.
pub fn branch_deviation(p: &Pencil, family: usize, n: usize, radius: f64, samples: usize, policy: &PrecisionPolicy) -> Result<BranchDeviation> {
    let m = pencil::solve_family(p, n, family, policy)?;
    branch_deviation_of(p, family, m.alpha, &m.solution, radius, samples)
}

/// Comparison of the potentials of `p` and `p'` on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialReport {
    pub degree: usize,
    pub slack: f64,
    /// `max (u' - u)` over grid points clear of atoms.
    pub max_excess: f64,
    /// `max (u' - u - slack, 0)`.
    pub violation: f64,
    /// `max |u - u'|` over points outside the inflated convex hull of the roots.
    pub max_outside_gap: f64,
    pub points_outside: usize,
    pub points_used: usize,
}

impl PotentialReport {
    pub fn ordered(&self) -> bool {
        self.violation == 0.0
    }
}

pub fn potential_ordering_check(polys: &[ComplexPolynomial], grid: &[Complex64], policy: &PrecisionPolicy) -> Result<Vec<PotentialReport>> {
    polys.iter().map(|p| potential_report(p, grid, policy)).collect()
}

fn potential_report(p: &ComplexPolynomial, grid: &[Complex64], policy: &PrecisionPolicy) -> Result<PotentialReport> {
    let degree = p.degree().unwrap_or(0);
    if degree < 2 {
        return Err(Error::InvalidPencil("potential comparison needs degree >= 2".into()));
    }
    let mu = root_measure(p, policy)?;
    let mu_d = root_measure(&p.derivative(), policy)?;
    let hull = inflated_hull(mu.atoms(), 1.2);
    let slack = 5.0 / degree as f64;
    let vals: Vec<Option<(f64, bool)>> = grid
        .par_iter()
        .map(|&z| {
            let u = log_potential(&mu, z).ok()?;
            let ud = log_potential(&mu_d, z).ok()?;
            Some((ud - u, !hull.contains(z)))
        })
        .collect();
    let mut r = PotentialReport {
        degree,
        slack,
        max_excess: f64::NEG_INFINITY,
        violation: 0.0,
        max_outside_gap: 0.0,
        points_outside: 0,
        points_used: 0,
    };
    for (d, outside) in vals.into_iter().flatten() {
        r.points_used += 1;
        r.max_excess = r.max_excess.max(d);
        if outside {
            r.points_outside += 1;
            r.max_outside_gap = r.max_outside_gap.max(d.abs());
        }
    }
    r.violation = (r.max_excess - slack).max(0.0);
    Ok(r)
}

/// Convex hull scaled about its centroid.
#[derive(Clone, Debug)]
pub struct Hull {
    vertices: Vec<Complex64>,
    center: Complex64,
    factor: f64,
    width: f64,
}

pub fn inflated_hull(points: &[Complex64], factor: f64) -> Hull {
    let vertices = convex_hull(points);
    let center = if vertices.is_empty() {
        Complex64::default()
    } else {
        vertices.iter().sum::<Complex64>() / vertices.len() as f64
    };
    let width = vertices.iter().map(|v| (v - center).norm()).fold(0.0, f64::max);
    Hull { vertices, center, factor, width }
}

impl Hull {
    pub fn contains(&self, z: Complex64) -> bool {
        let w = self.center + (z - self.center) / self.factor;
        match self.vertices.len() {
            0 => false,
            1 | 2 => {
                let b = *self.vertices.last().unwrap();
                curve::segment_distance(self.vertices[0], b, w) <= (self.factor - 1.0) * self.width
            }
            n => (0..n).all(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                ((b - a).conj() * (w - a)).im >= -1e-12 * self.width * self.width
            }),
        }
    }
}

/// Monotone chain; counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[Complex64]) -> Vec<Complex64> {
    let mut pts: Vec<Complex64> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Complex64, a: Complex64, b: Complex64| ((a - o).conj() * (b - o)).im;
    let mut lower: Vec<Complex64> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex64> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unity(m: usize) -> ComplexPolynomial {
        let mut v = vec![c(0.0, 0.0); m + 1];
        v[0] = c(-1.0, 0.0);
        v[m] = c(1.0, 0.0);
        ComplexPolynomial::new(v)
    }

    #[test]
    fn cube_roots_have_equal_mass() {
        let mu = root_measure(&unity(3), &PrecisionPolicy::default()).unwrap();
        assert_eq!(mu.len(), 3);
        assert_eq!(mu.weight() * 3.0, 1.0);
        for a in mu.atoms() {
            assert!((a.powu(3) - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn double_root_is_two_atoms() {
        let p = ComplexPolynomial::from_roots(&[c(0.5, 1.0), c(0.5, 1.0)], crate::scalar::Precision::DOUBLE);
        let mu = root_measure(&p, &PrecisionPolicy::default()).unwrap();
        assert_eq!(mu.len(), 2);
        assert!(mu.atoms().iter().all(|a| (a - c(0.5, 1.0)).norm() < 1e-7));
    }

    #[test]
    fn single_atom_values() {
        let mu = RootMeasure::from_atoms(vec![c(0.0, 0.0)]).unwrap();
        assert_eq!(cauchy_transform(&mu, c(2.0, 0.0)).unwrap(), c(0.5, 0.0));
        assert!((log_potential(&mu, c(std::f64::consts::E, 0.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(cauchy_transform(&mu, c(0.0, 0.0)), Err(Error::AtomCollision)));
    }

    #[test]
    fn cauchy_transform_of_roots_of_unity() {
        let m = 12;
        let mu = RootMeasure::from_atoms(circle_points(c(0.0, 0.0), 1.0, m)).unwrap();
        let z = c(1.3, -0.4);
        let expected = z.powu(m as u32 - 1) / (z.powu(m as u32) - 1.0);
        assert!((cauchy_transform(&mu, z).unwrap() - expected).norm() < 1e-13);
    }

    #[test]
    fn cauchy_transform_matches_log_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let deg = rng.gen_range(1..=30);
            let coeffs: Vec<Complex64> = (0..=deg).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let p = ComplexPolynomial::new(coeffs);
            let mu = root_measure(&p, &PrecisionPolicy::default()).unwrap();
            let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if mu.atoms().iter().any(|a| (z - a).norm() < 0.05) {
                continue;
            }
            let (v, d) = p.eval_with_derivative(&z);
            let expected = d / (v * mu.len() as f64);
            assert!((cauchy_transform(&mu, z).unwrap() - expected).norm() <= 1e-10 * expected.norm());
        }
    }

    #[test]
    fn potential_of_unit_circle_measure() {
        let mu = root_measure(&unity(200), &PrecisionPolicy::default()).unwrap();
        assert!((log_potential(&mu, c(2.0, 0.0)).unwrap() - 2f64.ln()).abs() <= 0.01);
        assert!(log_potential(&mu, c(0.5, 0.0)).unwrap().abs() <= 0.02);
    }

    #[test]
    fn derivative_potential_is_lower_inside() {
        let grid = vec![c(0.5, 0.0), c(2.0, 0.0), c(0.0, 1.8), c(-0.2, 0.3)];
        let reports = potential_ordering_check(&[unity(50), unity(200)], &grid, &PrecisionPolicy::default()).unwrap();
        for r in &reports {
            assert!(r.ordered());
            assert!(r.points_outside >= 2);
        }
        assert!(reports[1].max_outside_gap < reports[0].max_outside_gap);
        assert!(reports[1].max_outside_gap < 0.01);
    }

    #[test]
    fn hull_membership() {
        let pts = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(0.5, 0.5)];
        assert_eq!(convex_hull(&pts).len(), 4);
        let h = inflated_hull(&pts, 1.2);
        assert!(h.contains(c(1.05, 0.5)));
        assert!(!h.contains(c(1.2, 0.5)));
    }

    #[test]
    fn trivial_pencil_has_no_deviation() {
        let p = Pencil::from_coeffs(&[&[c(-1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let d = branch_deviation(&p, 0, 6, 3.0, 16, &PrecisionPolicy::default()).unwrap();
        assert!(d.deviation < 1e-6, "{}", d.deviation);
    }
}
