//! The series equation satisfied by `L = y N(y)`, the normalized
//! log-derivative of an eigenpolynomial at infinity, and the recurrence
//! that generates its coefficients.
//!
//! With `y = 1/z` and `L(y) = sum_{i>=1} epsilon_i y^i`, define
//! `r_0 = 1`, `r_{i+1} = lambda L r_i - y^2 r_i'`. Then `y^{-i} r_i` is a
//! power series and the pencil acts on `exp(lambda int L)` through
//! `sum_i P_i(y) lambda^{-i} y^{-i} r_i`, with `P_i(y) = sum_j a_ij y^(i-j)`.
//! The coefficient of `y^m` involves `epsilon_1 .. epsilon_{m+1}`, and is
//! affine in `epsilon_{m+1}` with slope `Phi_0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pencil::Pencil;
use crate::poly::{self, Polynomial, PrecisionPolicy};
use crate::scalar::{Precision, Scalar};
use crate::series::{self, SeriesOrigin, TruncatedSeries};

/// Expansion of `p'(z) / (lambda p(z))` in `y = 1/z` through `y^m`,
/// by division of the reversed coefficient sequences of `p'` and `p`.
pub fn log_derivative_series<S: Scalar>(p: &Polynomial<S>, lambda: &S, m: usize) -> Result<TruncatedSeries<S>> {
    let n = p.degree().filter(|&n| n >= 1).ok_or_else(|| Error::InvalidPencil("log-derivative of a constant".into()))?;
    let prec = p.precision().max(lambda.precision());
    let c = p.coeffs();
    let lead = c[n].clone();
    let rev_p: Vec<S> = (0..=n).map(|l| c[n - l].clone() / lead.clone()).collect();
    let rev_dp: Vec<S> = (0..n).map(|l| (c[n - l].clone() / lead.clone()).scale((n - l) as f64)).collect();
    let q = series::div(&rev_dp, &rev_p, m, prec);
    let mut coeffs = vec![S::zero(prec)];
    coeffs.extend(q.into_iter().map(|x| x / lambda.clone()));
    coeffs.truncate(m + 1);
    Ok(TruncatedSeries::new(coeffs, SeriesOrigin::LogDerivative))
}

/// Residual through `y^M` (with `M` the order of `l`) together with a
/// per-coefficient magnitude scale obtained by running the same recursion
/// on coefficient moduli. Coefficients of `l` beyond its order are taken
/// as zero.
pub fn residual_with_scale<S: Scalar>(p: &Pencil, lambda: &S, l: &TruncatedSeries<S>) -> Result<(TruncatedSeries<S>, Vec<f64>)> {
    let k = p.k();
    let m_ord = l.order();
    let prec = lambda.precision().max(l.coeffs.first().map(|c| c.precision()).unwrap_or(Precision::DOUBLE));
    let len = m_ord + k + 1;
    let lp = series::padded(&l.coeffs, len, prec);
    let lam_abs = lambda.modulus();
    let lp_abs: Vec<f64> = lp.iter().map(|c| c.modulus()).collect();

    let mut r: Vec<S> = series::padded(&[S::one(prec)], len, prec);
    let mut r_abs: Vec<f64> = vec![0.0; len];
    r_abs[0] = 1.0;
    let inv_lam = S::one(prec) / lambda.clone();
    let mut inv_pow = S::one(prec);
    let mut inv_abs = 1.0;
    let mut out: Vec<S> = vec![S::zero(prec); m_ord + 1];
    let mut out_abs = vec![0.0f64; m_ord + 1];
    for i in 0..=k {
        // Filtration: y^{-i} r_i must be a power series.
        let top = r_abs.iter().cloned().fold(0.0, f64::max);
        for c in 0..i {
            if r[c].modulus() > 1e-12 * top.max(f64::MIN_POSITIVE) {
                return Err(Error::OrderViolation { i });
            }
        }
        // Add P_i(y) * lambda^{-i} * y^{-i} r_i.
        for j in 0..=i {
            let a = p.a(i, j);
            if a == Complex64::default() {
                continue;
            }
            let shift = i - j;
            let coef = S::lift(a, prec) * inv_pow.clone();
            for c in shift..=m_ord {
                let t = r[c - shift + i].clone();
                out[c] = out[c].clone() + coef.clone() * t;
                out_abs[c] += a.norm() * inv_abs * r_abs[c - shift + i];
            }
        }
        if i == k {
            break;
        }
        let prod = series::mul(&lp, &r, len, prec);
        let mut next: Vec<S> = prod.into_iter().map(|x| lambda.clone() * x).collect();
        let mut next_abs = vec![0.0f64; len];
        for (a, x) in lp_abs.iter().enumerate() {
            if *x == 0.0 {
                continue;
            }
            for (b, y) in r_abs.iter().enumerate().take(len - a) {
                next_abs[a + b] += lam_abs * x * y;
            }
        }
        for c in 2..len {
            let d = r[c - 1].scale((c - 1) as f64);
            next[c] = next[c].clone() - d;
            next_abs[c] += (c - 1) as f64 * r_abs[c - 1];
        }
        r = next;
        r_abs = next_abs;
        inv_pow = inv_pow * inv_lam.clone();
        inv_abs /= lam_abs;
    }
    Ok((TruncatedSeries::new(out, SeriesOrigin::Residual), out_abs))
}

/// The residual of the pencil's series equation for `L = y N`, through
/// the order of `l`.
pub fn pencil_series_residual<S: Scalar>(p: &Pencil, lambda: &S, l: &TruncatedSeries<S>) -> Result<TruncatedSeries<S>> {
    residual_with_scale(p, lambda, l).map(|(s, _)| s)
}

/// `sum_i a_ii (e - 0/lambda)(e - 1/lambda)...(e - (i-1)/lambda)` as a
/// polynomial in `e`, recovered by interpolating the constant term of the
/// residual at `k+1` points on a circle of radius `max(1, 2 max|xi|)`.
pub fn constant_term_polynomial<S: Scalar>(p: &Pencil, lambda: &S) -> Result<Polynomial<S>> {
    let k = p.k();
    let prec = lambda.precision();
    let diag = p.diagonal();
    let xi_max = poly::roots(&poly::ComplexPolynomial::new(diag.clone()), &PrecisionPolicy::default())
        .map(|r| r.iter().map(|x| x.norm()).fold(0.0, f64::max))
        .unwrap_or(0.0);
    let rho = (2.0 * xi_max).max(1.0);
    let count = k + 1;
    let nodes = S::unit_roots(count, prec);
    let mut values = Vec::with_capacity(count);
    for w in &nodes {
        let e = w.scale(rho);
        let l = TruncatedSeries::new(vec![S::zero(prec), e], SeriesOrigin::Recurrence);
        values.push(pencil_series_residual(p, lambda, &l)?.coeffs[0].clone());
    }
    let mut coeffs = Vec::with_capacity(count);
    for m in 0..count {
        let mut acc = S::zero(prec);
        for (t, v) in values.iter().enumerate() {
            let idx = (count - (t * m) % count) % count;
            acc = acc + v.clone() * nodes[idx].clone();
        }
        coeffs.push(acc / S::lift(Complex64::new(count as f64 * rho.powi(m as i32), 0.0), prec));
    }
    Ok(Polynomial::new(coeffs))
}

/// Default large-lambda threshold: `10 k max_i |a_ii|`.
pub fn large_lambda_threshold(p: &Pencil) -> f64 {
    10.0 * p.k() as f64 * p.diagonal().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Admissible values of `epsilon_1`: roots of the constant term.
pub fn epsilon1_candidates<S: Scalar>(p: &Pencil, lambda: &S) -> Result<Vec<S>> {
    epsilon1_candidates_with(p, lambda, large_lambda_threshold(p))
}

pub fn epsilon1_candidates_with<S: Scalar>(p: &Pencil, lambda: &S, threshold: f64) -> Result<Vec<S>> {
    if lambda.modulus() < threshold {
        return Err(Error::LambdaBelowThreshold { lambda: lambda.modulus(), threshold });
    }
    let c = constant_term_polynomial(p, lambda)?;
    let k = p.k();
    let scale = c.max_coeff_modulus();
    if c.degree() != Some(k) || c.coeffs()[k].modulus() <= 1e-12 * scale {
        return Err(Error::RootDeficient);
    }
    let approx = poly::roots(&c.to_c64(), &PrecisionPolicy::default())?;
    let prec = lambda.precision();
    Ok(approx.into_iter().map(|e| newton_polish(&c, S::lift(e, prec))).collect())
}

fn newton_polish<S: Scalar>(c: &Polynomial<S>, mut x: S) -> S {
    let eps = x.precision().epsilon();
    for _ in 0..60 {
        let (v, d) = c.eval_with_derivative(&x);
        if d.is_exact_zero() {
            break;
        }
        let step = v / d;
        let small = step.modulus() <= 4.0 * eps * x.modulus().max(1e-300);
        x = x - step;
        if small {
            break;
        }
    }
    x
}

/// `Phi_0`, the coefficient of `epsilon_{m+1}` in the residual coefficient
/// of order `m`, extracted from two evaluations of the residual. For
/// `m = 0` this is the derivative of the constant term at `epsilon_1`.
pub fn phi0<S: Scalar>(p: &Pencil, eps_prefix: &TruncatedSeries<S>, lambda: &S, m: usize) -> Result<S> {
    let prec = lambda.precision();
    if m == 0 {
        let c = constant_term_polynomial(p, lambda)?;
        let e1 = eps_prefix.coeffs.get(1).cloned().unwrap_or_else(|| S::zero(prec));
        return Ok(c.derivative().eval(&e1));
    }
    let (_, slope) = affine_parts(p, eps_prefix, lambda, m)?;
    Ok(slope)
}

/// `(B, Phi_0)` with `residual_m = B + Phi_0 epsilon_{m+1}`.
fn affine_parts<S: Scalar>(p: &Pencil, eps_prefix: &TruncatedSeries<S>, lambda: &S, m: usize) -> Result<(S, S)> {
    let prec = lambda.precision();
    let mut base = series::padded(&eps_prefix.coeffs, m + 1, prec);
    base.push(S::zero(prec));
    let l0 = TruncatedSeries::new(base.clone(), SeriesOrigin::Recurrence);
    let (r0, _) = residual_with_scale(p, lambda, &l0)?;
    let b = r0.coeffs[m].clone();
    // Probe with a step comparable to B so the difference is well scaled.
    let step = b.modulus().max(1.0);
    let mut probe = base;
    let step = S::lift(Complex64::new(step, 0.0), prec);
    probe[m + 1] = step.clone();
    let (r1, _) = residual_with_scale(p, lambda, &TruncatedSeries::new(probe, SeriesOrigin::Recurrence))?;
    let slope = (r1.coeffs[m].clone() - b.clone()) / step;
    Ok((b, slope))
}

/// Sum of moduli of the terms making up `Phi_0`, used as its natural scale.
fn phi0_scale(p: &Pencil, e1: f64, lam: f64, m: usize) -> f64 {
    let mut c_abs = 1.0;
    let mut d_abs = 0.0;
    let mut total = 0.0;
    for i in 1..=p.k() {
        d_abs = c_abs + (e1 + (i - 1 + m) as f64 / lam) * d_abs;
        c_abs *= e1 + (i - 1) as f64 / lam;
        total += p.a(i, i).norm() * d_abs;
    }
    total
}

/// Coefficients `epsilon_1 .. epsilon_M` generated from `epsilon_1` by
/// `epsilon_{m+1} = -B_m / Phi_0(m)`.
pub fn solve_recurrence<S: Scalar>(p: &Pencil, lambda: &S, eps1: &S, m_total: usize) -> Result<TruncatedSeries<S>> {
    let prec = lambda.precision().max(eps1.precision());
    let start = TruncatedSeries::new(vec![S::zero(prec), eps1.clone()], SeriesOrigin::Recurrence);
    let (r, scale) = residual_with_scale(p, lambda, &start)?;
    let c0 = r.coeffs[0].modulus();
    if c0 > 1e-8 * scale[0].max(f64::MIN_POSITIVE) {
        return Err(Error::NotACandidate { residual: c0 / scale[0].max(f64::MIN_POSITIVE) });
    }
    let mut coeffs = vec![S::zero(prec), eps1.clone()];
    for m in 1..m_total {
        let prefix = TruncatedSeries::new(coeffs.clone(), SeriesOrigin::Recurrence);
        let (b, phi) = affine_parts(p, &prefix, lambda, m)?;
        if phi.modulus() <= 1e-12 * phi0_scale(p, eps1.modulus(), lambda.modulus(), m) {
            return Err(Error::ResonantPhi0 { m });
        }
        coeffs.push(-(b / phi));
    }
    coeffs.truncate(m_total + 1);
    Ok(TruncatedSeries::new(coeffs, SeriesOrigin::Recurrence))
}

/// Result of scanning `|Phi_0(m)|^{-1} (m/lambda)^r` over `0 <= m <= m_max`, `0 <= r < k`.
#[derive(Clone, Debug, Serialize)]
pub struct Phi0Scan {
    pub lambda: Complex64,
    pub eps1: Complex64,
    pub m_max: usize,
    /// Infinite when `Phi_0` vanishes at some `m`.
    pub sup_value: f64,
    pub worst_m: usize,
    pub worst_r: usize,
}

pub fn phi0_sup_scan<S: Scalar>(p: &Pencil, lambda: &S, eps1: &S, m_max: usize) -> Result<Phi0Scan> {
    let prec = lambda.precision();
    let prefix = TruncatedSeries::new(vec![S::zero(prec), eps1.clone()], SeriesOrigin::Recurrence);
    let lam = lambda.modulus();
    let mut scan = Phi0Scan {
        lambda: lambda.to_c64(),
        eps1: eps1.to_c64(),
        m_max,
        sup_value: 0.0,
        worst_m: 0,
        worst_r: 0,
    };
    for m in 0..=m_max {
        let phi = phi0(p, &prefix, lambda, m)?.modulus();
        let x = m as f64 / lam;
        for r in 0..p.k() {
            let v = if phi <= 1e-12 * phi0_scale(p, eps1.modulus(), lam, m) { f64::INFINITY } else { x.powi(r as i32) / phi };
            if v > scan.sup_value {
                scan.sup_value = v;
                scan.worst_m = m;
                scan.worst_r = r;
            }
        }
    }
    Ok(scan)
}

/// Radius of convergence guaranteed by the majorant series with constant `l`.
pub fn majorant_radius(l: f64) -> f64 {
    1.0 / ((1.0 + 2.0 * l) * (1.0 + 2.0 * l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pencil::{self, Pencil, solve_family};
    use crate::scalar::MpComplex;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn log_derivative_of_monomial() {
        // p = z^n: L = n y / lambda exactly.
        let p = poly::ComplexPolynomial::from_real(&[0.0, 0.0, 0.0, 0.0, 1.0]);
        let lam = c(2.0, 0.0);
        let s = log_derivative_series(&p, &lam, 6).unwrap();
        assert_eq!(s.coeffs[1], c(2.0, 0.0));
        assert!(s.coeffs[2..].iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn log_derivative_is_scaled_power_sums() {
        // epsilon_{i+1} = (sum_r r^i) / lambda.
        let roots = [c(1.0, 0.5), c(-2.0, 0.0), c(0.3, -1.0)];
        let p = poly::ComplexPolynomial::from_roots(&roots, Precision::DOUBLE);
        let lam = c(0.5, 1.5);
        let s = log_derivative_series(&p, &lam, 8).unwrap();
        for i in 0..8 {
            let ps: Complex64 = roots.iter().map(|r| r.powu(i as u32)).sum();
            assert!((s.coeffs[i + 1] - ps / lam).norm() < 1e-12 * (1.0 + ps.norm()));
        }
    }

    #[test]
    fn zero_series_leaves_a00() {
        let p = Pencil::fig1();
        let l = TruncatedSeries::new(vec![Complex64::default(); 4], SeriesOrigin::Recurrence);
        let r = pencil_series_residual(&p, &c(7.0, 1.0), &l).unwrap();
        assert!((r.coeffs[0] - p.a(0, 0)).norm() < 1e-15);
    }

    #[test]
    fn constant_term_closed_form() {
        let p = Pencil::fig1();
        let lam = c(40.0, -3.0);
        let ct = constant_term_polynomial(&p, &lam).unwrap();
        for e in [c(0.3, 0.1), c(-1.0, 2.0), c(2.5, 0.0)] {
            let mut expected = Complex64::default();
            for i in 0..=3 {
                let mut prod = c(1.0, 0.0);
                for l in 0..i {
                    prod *= e - l as f64 / lam;
                }
                expected += p.a(i, i) * prod;
            }
            assert!((ct.eval(&e) - expected).norm() < 1e-12 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn eigenvalue_makes_n_over_lambda_a_candidate() {
        let p = Pencil::fig1();
        let set = pencil::spectral_eigenvalues(&p, 55).unwrap();
        for e in &set.eigenvalues {
            let ct = constant_term_polynomial(&p, &e.lambda).unwrap();
            let v = ct.eval(&(55.0 / e.lambda));
            assert!(v.norm() < 1e-10, "{v}");
        }
    }

    #[test]
    fn candidates_near_xi_for_large_lambda() {
        let p = Pencil::fig1();
        let curve = crate::curve::PlaneCurve::from_pencil(&p);
        let xis = curve.xi_roots().unwrap();
        let set = pencil::spectral_eigenvalues(&p, 55).unwrap();
        for e in &set.eigenvalues {
            let cands = epsilon1_candidates(&p, &e.lambda).unwrap();
            let xi = xis[e.family];
            assert_eq!(cands.iter().filter(|x| (*x - xi).norm() < 0.1).count(), 1);
        }
    }

    #[test]
    fn first_order_candidate_and_threshold() {
        let p = Pencil::from_coeffs(&[&[c(-1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let cands = epsilon1_candidates(&p, &c(10.0, 0.0)).unwrap();
        assert_eq!(cands.len(), 1);
        assert!((cands[0] - 1.0).norm() <= 0.2);
        assert!(matches!(epsilon1_candidates(&p, &c(3.0, 0.0)), Err(Error::LambdaBelowThreshold { .. })));
    }

    #[test]
    fn phi0_for_second_order_matches_closed_form() {
        let p = Pencil::from_coeffs(&[&[c(0.7, -0.2)], &[c(0.1, 0.3), c(-1.1, 0.4)], &[c(0.5, 0.0), c(0.2, 0.2), c(1.3, -0.6)]]).unwrap();
        let lam = c(9.0, 4.0);
        let prefix = TruncatedSeries::new(vec![c(0.0, 0.0), c(0.4, 0.9), c(-0.3, 0.2), c(1.1, 0.0), c(0.0, -0.5)], SeriesOrigin::Recurrence);
        for m in 1..4 {
            let got = phi0(&p, &prefix, &lam, m).unwrap();
            let e1 = prefix.coeffs[1];
            let expected = p.a(2, 2) * (2.0 * e1 - m as f64 / lam) + p.a(1, 1) - p.a(2, 2) / lam;
            assert!((got - expected).norm() < 1e-12, "m={m}: {got} vs {expected}");
        }
    }

    #[test]
    fn recurrence_agrees_with_eigenpolynomial_series() {
        let p = Pencil::fig1();
        let policy = PrecisionPolicy { initial_digits: 64, ..PrecisionPolicy::default() };
        let m = solve_family(&p, 30, 1, &policy).unwrap();
        let s = &m.solution;
        let lam = s.lambda_mp.clone();
        let e1 = MpComplex::lift(c(30.0, 0.0), lam.precision()) / lam.clone();
        let rec = solve_recurrence(&p, &lam, &e1, 12).unwrap();
        let ld = log_derivative_series(&s.p_mp, &lam, 12).unwrap();
        for i in 1..=12 {
            let d = (rec.coeffs[i].clone() - ld.coeffs[i].clone()).modulus();
            assert!(d <= 1e-20 * ld.coeffs[i].modulus(), "i={i}: {d}");
        }
    }

    #[test]
    fn nonzero_constant_term_breaks_filtration() {
        let p = Pencil::fig1();
        let l = TruncatedSeries::new(vec![c(1.0, 0.0), c(0.5, 0.0)], SeriesOrigin::Recurrence);
        assert!(matches!(pencil_series_residual(&p, &c(5.0, 0.0), &l), Err(Error::OrderViolation { i: 1 })));
    }

    #[test]
    fn majorant_radius_values() {
        assert_eq!(majorant_radius(0.0), 1.0);
        assert_eq!(majorant_radius(2.0), 1.0 / 25.0);
    }

    #[test]
    fn resonance_is_detected() {
        // a22 = 1, a11 = -1.5, a00 = 0.5 with epsilon_1 = n/lambda: Phi_0 vanishes
        // where 2 e1 - (m+1)/lambda - 1.5 = 0; choose lambda to hit m = 4 exactly.
        let p = Pencil::from_coeffs(&[&[c(0.5, 0.0)], &[c(0.0, 0.0), c(-1.5, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        // Any lambda, eps1 with 2 e1 - 1.5 = 5/lambda; constant term must vanish too:
        // 0.5 - 1.5 e1 + e1 (e1 - 1/lambda) = 0. Solve numerically for lambda.
        let f = |lam: f64| {
            let e1 = (1.5 + 5.0 / lam) / 2.0;
            0.5 - 1.5 * e1 + e1 * (e1 - 1.0 / lam)
        };
        let (mut lo, mut hi) = (2.0f64, 100.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 { hi = mid } else { lo = mid }
        }
        let lam = c(0.5 * (lo + hi), 0.0);
        let e1 = c((1.5 + 5.0 / lam.re) / 2.0, 0.0);
        let r = solve_recurrence(&p, &lam, &e1, 8);
        assert!(matches!(r, Err(Error::ResonantPhi0 { m: 4 })), "{r:?}");
    }

    fn trivial() -> Pencil {
        Pencil::from_coeffs(&[&[c(-1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]).unwrap()
    }

    #[test]
    fn first_order_recurrence_is_exact() {
        let r = solve_recurrence(&trivial(), &c(7.0, 0.0), &c(1.0, 0.0), 10).unwrap();
        assert_eq!(r.coeffs[1], c(1.0, 0.0));
        assert!(r.coeffs[2..].iter().all(|x| x.norm() < 1e-15));
        let scan = phi0_sup_scan(&trivial(), &c(7.0, 0.0), &c(1.0, 0.0), 40).unwrap();
        assert!(scan.sup_value.is_finite());
    }

    #[test]
    fn residual_is_affine_in_next_coefficient() {
        let p = Pencil::fig1();
        let lam = c(31.0, 12.0);
        for m in 1..5 {
            let vals: Vec<Complex64> = [0.0, 1.0, 2.0]
                .iter()
                .map(|t| {
                    let mut v = vec![c(0.0, 0.0), c(0.2, -0.9), c(0.1, 0.1), c(-0.3, 0.0), c(0.05, 0.2), c(0.0, 0.0)];
                    v.truncate(m + 1);
                    v.push(c(*t, 0.0));
                    pencil_series_residual(&p, &lam, &TruncatedSeries::new(v, SeriesOrigin::Recurrence)).unwrap().coeffs[m]
                })
                .collect();
            assert!((vals[2] - 2.0 * vals[1] + vals[0]).norm() < 1e-12 * (1.0 + vals[0].norm()));
        }
    }

    #[test]
    fn two_routes_agree_at_degree_55() {
        let p = Pencil::fig1();
        for family in 0..3 {
            let s = solve_family(&p, 55, family, &PrecisionPolicy::default()).unwrap().solution;
            let lam = s.lambda_mp.clone();
            let e1 = MpComplex::lift(c(55.0, 0.0), lam.precision()) / lam.clone();
            let rec = solve_recurrence(&p, &lam, &e1, 20).unwrap();
            let ld = log_derivative_series(&s.p_mp, &lam, 20).unwrap();
            for i in 1..=20 {
                let d = (rec.coeffs[i].clone() - ld.coeffs[i].clone()).modulus();
                assert!(d <= 1e-8 * ld.coeffs[i].modulus(), "family {family}, i={i}");
            }
            // The eigenpolynomial's own series satisfies the equation to high order.
            let (res, scale) = residual_with_scale(&p, &lam, &ld).unwrap();
            for i in 0..=18 {
                assert!(res.coeffs[i].modulus() <= 1e-9 * scale[i], "residual order {i}");
            }
        }
    }

    #[test]
    fn symmetric_characteristic_roots_make_the_scan_blow_up() {
        // Characteristic roots 1 and 1/2: Phi_0 ~ 1/2 - (m+1)/lambda vanishes near m = lambda/2.
        let p = Pencil::from_coeffs(&[&[c(0.5, 0.0)], &[c(0.0, 0.0), c(-1.5, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let lam = c(40.3, 0.0);
        let cands = epsilon1_candidates(&p, &lam).unwrap();
        let e1 = cands.iter().min_by(|a, b| (*a - 1.0).norm().total_cmp(&(*b - 1.0).norm())).unwrap();
        let short = phi0_sup_scan(&p, &lam, e1, 5).unwrap().sup_value;
        let long = phi0_sup_scan(&p, &lam, e1, 40).unwrap().sup_value;
        assert!(long > 10.0 * short, "{short} {long}");
    }
}
