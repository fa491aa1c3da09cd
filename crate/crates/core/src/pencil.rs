//! Exactly solvable pencils `T_lambda = sum_i Q_i(z) lambda^(k-i) d^i/dz^i`
//! with `deg Q_i <= i`: validation, spectrum and eigenpolynomials.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::poly::{self, ComplexPolynomial, MpPolynomial, Polynomial, PrecisionPolicy};
use crate::scalar::{MpComplex, Precision, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Pencil {
    k: usize,
    q: Vec<ComplexPolynomial>,
}

#[derive(Serialize, Deserialize)]
struct PencilJson {
    k: usize,
    #[serde(rename = "Q")]
    q: Vec<Vec<[f64; 2]>>,
}

impl Pencil {
    /// `q[i]` is the coefficient of `d^i/dz^i`; requires `deg q[i] <= i`.
    pub fn new(q: Vec<ComplexPolynomial>) -> Result<Self> {
        let k = q
            .len()
            .checked_sub(1)
            .filter(|&k| k >= 1)
            .ok_or_else(|| Error::InvalidPencil("need at least Q_0 and Q_1".into()))?;
        for (i, p) in q.iter().enumerate() {
            if let Some(d) = p.degree() {
                if d > i {
                    return Err(Error::InvalidPencil(format!("deg Q_{i} = {d} exceeds {i}")));
                }
            }
        }
        if q[k].is_zero() {
            return Err(Error::InvalidPencil(format!("Q_{k} vanishes identically")));
        }
        Ok(Pencil { k, q })
    }

    pub fn from_coeffs(q: &[&[Complex64]]) -> Result<Self> {
        Pencil::new(q.iter().map(|c| ComplexPolynomial::from_c64(c)).collect())
    }

    /// The third-order pencil used throughout as the reference example:
    /// `Q_3 = z^3 - (5+2i) z^2 + (4+2i) z`, `Q_2 = z^2 + i z + 2`,
    /// `Q_1 = (z - 2 + i)/5`, `Q_0 = 1`.
    pub fn fig1() -> Pencil {
        let c = Complex64::new;
        Pencil::from_coeffs(&[
            &[c(1.0, 0.0)],
            &[c(-0.4, 0.2), c(0.2, 0.0)],
            &[c(2.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)],
            &[c(0.0, 0.0), c(4.0, 2.0), c(-5.0, -2.0), c(1.0, 0.0)],
        ])
        .expect("reference pencil is valid")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: PencilJson = serde_json::from_str(s)?;
        if raw.q.len() != raw.k + 1 {
            return Err(Error::InvalidPencil(format!(
                "k = {} but {} coefficient polynomials given",
                raw.k,
                raw.q.len()
            )));
        }
        Pencil::new(
            raw.q
                .iter()
                .map(|p| ComplexPolynomial::new(p.iter().map(|&[re, im]| Complex64::new(re, im)).collect()))
                .collect(),
        )
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        Pencil::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        let raw = PencilJson {
            k: self.k,
            q: self.q.iter().map(|p| p.coeffs().iter().map(|c| [c.re, c.im]).collect()).collect(),
        };
        serde_json::to_string(&raw).expect("pencil serializes")
    }

    /// Short content hash used to tag exported files.
    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.to_json().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self, i: usize) -> &ComplexPolynomial {
        &self.q[i]
    }

    pub fn qs(&self) -> &[ComplexPolynomial] {
        &self.q
    }

    /// `a_{i,j}`, the coefficient of `z^j` in `Q_i`.
    pub fn a(&self, i: usize, j: usize) -> Complex64 {
        self.q[i].coeffs().get(j).copied().unwrap_or_default()
    }

    /// `a_{i,i}` for `i = 0..=k`.
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..=self.k).map(|i| self.a(i, i)).collect()
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        self.q.iter().map(|p| p.max_coeff_modulus()).fold(0.0, f64::max)
    }

    /// `a_kk + a_{k-1,k-1} t + ... + a_00 t^k`.
    pub fn characteristic_polynomial(&self) -> ComplexPolynomial {
        ComplexPolynomial::new((0..=self.k).map(|i| self.a(self.k - i, self.k - i)).collect())
    }

    /// `sum_i n(n-1)...(n-i+1) a_ii lambda^(k-i)` as a polynomial in lambda.
    pub fn spectral_polynomial(&self, n: usize) -> ComplexPolynomial {
        let mut coeffs = vec![Complex64::default(); self.k + 1];
        for i in 0..=self.k {
            coeffs[self.k - i] = self.a(i, i) * falling(n, i);
        }
        ComplexPolynomial::new(coeffs)
    }

    /// The spectral polynomial with coefficients formed at precision `prec`.
    pub fn spectral_polynomial_mp(&self, n: usize, prec: Precision) -> MpPolynomial {
        let mut coeffs = vec![MpComplex::zero(prec); self.k + 1];
        for i in 0..=self.k {
            coeffs[self.k - i] = MpComplex::lift(self.a(i, i), prec) * MpComplex::lift(Complex64::new(falling(n, i), 0.0), prec);
        }
        MpPolynomial::new(coeffs)
    }
}

/// `n (n-1) ... (n-i+1)`.
pub fn falling(n: usize, i: usize) -> f64 {
    (0..i).map(|l| n as f64 - l as f64).product()
}

/// Outcome of the general-type test.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralTypeReport {
    pub leading_ok: bool,
    pub constant_ok: bool,
    pub roots_distinct: bool,
    pub no_collinear_pair: bool,
    /// Roots of the characteristic equation in family order.
    pub alphas: Vec<Complex64>,
}

impl GeneralTypeReport {
    pub fn is_general(&self) -> bool {
        self.leading_ok && self.constant_ok && self.roots_distinct && self.no_collinear_pair
    }
}

/// Argument in `(-pi, pi]`, treating a negligible imaginary part as zero so
/// that negative reals always land on `+pi`.
pub fn canonical_arg(z: Complex64) -> f64 {
    let im = if z.im.abs() <= 1e-12 * z.norm() { 0.0 } else { z.im };
    let a = im.atan2(z.re);
    if a <= -std::f64::consts::PI + 1e-15 {
        std::f64::consts::PI
    } else {
        a
    }
}

/// Families are numbered by increasing argument of `alpha`, ties by modulus.
pub fn sort_families(alphas: &mut [Complex64]) {
    alphas.sort_by(|a, b| {
        canonical_arg(*a).total_cmp(&canonical_arg(*b)).then(a.norm().total_cmp(&b.norm()))
    });
}

pub fn validate_general_type(p: &Pencil, tol: f64) -> GeneralTypeReport {
    let diag = p.diagonal();
    let scale = diag.iter().map(|c| c.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let leading_ok = diag[p.k].norm() > tol * scale;
    let constant_ok = diag[0].norm() > tol * scale;
    let cp = p.characteristic_polynomial();
    let mut alphas = if cp.degree().unwrap_or(0) == 0 {
        Vec::new()
    } else {
        poly::roots(&cp, &PrecisionPolicy::default()).unwrap_or_default()
    };
    sort_families(&mut alphas);
    let amax = alphas.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut roots_distinct = alphas.len() == p.k;
    let mut no_collinear_pair = alphas.len() == p.k;
    for (r, a) in alphas.iter().enumerate() {
        if a.norm() <= tol * amax.max(1.0) {
            no_collinear_pair = false;
        }
        for b in &alphas[r + 1..] {
            if (a - b).norm() <= tol * amax.max(1.0) {
                roots_distinct = false;
            }
            if (a * b.conj()).im.abs() <= tol * a.norm() * b.norm() {
                no_collinear_pair = false;
            }
        }
    }
    GeneralTypeReport { leading_ok, constant_ok, roots_distinct, no_collinear_pair, alphas }
}

/// Tolerance used when a pencil is validated implicitly.
pub const GENERAL_TYPE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct LabeledEigenvalue {
    /// Zero-based family index into the sorted alphas.
    pub family: usize,
    pub lambda: Complex64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueSet {
    pub n: usize,
    pub eigenvalues: Vec<LabeledEigenvalue>,
    pub warnings: Vec<String>,
}

impl EigenvalueSet {
    pub fn for_family(&self, family: usize) -> Option<Complex64> {
        self.eigenvalues.iter().find(|e| e.family == family).map(|e| e.lambda)
    }
}

/// The `k` eigenvalues at degree `n`, each labeled by the family `j` that
/// minimises `|lambda/n - alpha_j| / |alpha_j|` (greedy, globally smallest first).
pub fn spectral_eigenvalues(p: &Pencil, n: usize) -> Result<EigenvalueSet> {
    let report = validate_general_type(p, GENERAL_TYPE_TOL);
    if !report.leading_ok || !report.constant_ok || report.alphas.len() != p.k {
        return Err(Error::DegenerateCharEq);
    }
    let sp = p.spectral_polynomial(n);
    let lambdas = if sp.degree() == Some(0) || n == 0 {
        vec![Complex64::default(); p.k]
    } else {
        poly::roots(&sp, &PrecisionPolicy::default())?
    };
    let nn = n.max(1) as f64;
    let alphas = &report.alphas;
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (l, lam) in lambdas.iter().enumerate() {
        for (j, a) in alphas.iter().enumerate() {
            cand.push(((lam / nn - a).norm() / a.norm(), l, j));
        }
    }
    cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.cmp(&y.2)));
    let mut used_l = vec![false; lambdas.len()];
    let mut used_j = vec![false; alphas.len()];
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    for &(d, l, j) in &cand {
        if used_l[l] || used_j[j] {
            continue;
        }
        // Another free family almost as close means the label is a coin toss.
        if let Some(&(d2, _, j2)) =
            cand.iter().find(|&&(d2, l2, j2)| l2 == l && j2 != j && !used_j[j2] && d2 >= d)
        {
            if d2 - d <= 1e-9 * d2.max(1e-300) {
                warnings.push(format!("label ambiguity at n={n}: families {} and {} tie", j + 1, j2 + 1));
            }
        }
        used_l[l] = true;
        used_j[j] = true;
        out.push(LabeledEigenvalue { family: j, lambda: lambdas[l] });
    }
    out.sort_by_key(|e| e.family);
    Ok(EigenvalueSet { n, eigenvalues: out, warnings })
}

/// Smallest `n0 <= n_max` such that the spectrum is simple for every
/// `n` in `n0..=n_max`.
pub fn distinctness_onset(p: &Pencil, n_max: usize) -> Option<usize> {
    let mut onset = None;
    for n in (1..=n_max).rev() {
        let sp = p.spectral_polynomial(n);
        let Ok(l) = poly::roots(&sp, &PrecisionPolicy::default()) else { break };
        let scale = l.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let simple = l.len() == p.k
            && (0..l.len()).all(|a| (a + 1..l.len()).all(|b| (l[a] - l[b]).norm() > 1e-9 * scale));
        if !simple {
            break;
        }
        onset = Some(n);
    }
    onset
}

/// Nonzero entries `(row, value, magnitude)` of column `m` of the operator
/// matrix in the monomial basis, where
/// `T z^m = sum_i sum_j a_ij lambda^(k-i) m^(i) z^(m-i+j)` and `magnitude`
/// is the sum of the moduli of the contributing terms.
fn column<S: Scalar>(p: &Pencil, lam_pows: &[S], m: usize, prec: Precision) -> Vec<(usize, S, f64)> {
    let k = p.k;
    let mut out: Vec<(usize, S, f64)> = Vec::with_capacity(k + 1);
    for shift in 0..=k.min(m) {
        let row = m - shift;
        let mut acc = S::zero(prec);
        let mut mag = 0.0;
        let mut any = false;
        for i in shift..=k {
            let f = falling(m, i);
            let a = p.a(i, i - shift);
            if f == 0.0 || a == Complex64::default() {
                continue;
            }
            any = true;
            let term = lam_pows[k - i].clone() * S::lift(a, prec).scale(f);
            mag += term.modulus();
            acc = acc + term;
        }
        if any {
            out.push((row, acc, mag));
        }
    }
    out
}

fn lambda_powers<S: Scalar>(lambda: &S, k: usize) -> Vec<S> {
    let prec = lambda.precision();
    let mut v = vec![S::one(prec)];
    for _ in 0..k {
        let next = v.last().unwrap().clone() * lambda.clone();
        v.push(next);
    }
    v
}

/// `T_lambda p` in the monomial basis.
pub fn operator_apply<S: Scalar>(p: &Pencil, lambda: &S, f: &Polynomial<S>) -> Polynomial<S> {
    let prec = lambda.precision().max(f.precision());
    let Some(n) = f.degree() else { return Polynomial::zero() };
    let pows = lambda_powers(lambda, p.k);
    let mut out = vec![S::zero(prec); n + 1];
    for (m, c) in f.coeffs().iter().enumerate() {
        for (row, t, _) in column(p, &pows, m, prec) {
            out[row] = out[row].clone() + t * c.clone();
        }
    }
    Polynomial::new(out)
}

/// Row-wise relative residual `max_d |(T p)_d| / sum_m |T_dm c_m|`.
pub fn operator_residual<S: Scalar>(p: &Pencil, lambda: &S, f: &Polynomial<S>) -> f64 {
    let prec = lambda.precision().max(f.precision());
    let Some(n) = f.degree() else { return 0.0 };
    let pows = lambda_powers(lambda, p.k);
    let mut val = vec![S::zero(prec); n + 1];
    let mut mag = vec![0.0f64; n + 1];
    for (m, c) in f.coeffs().iter().enumerate() {
        for (row, t, tm) in column(p, &pows, m, prec) {
            mag[row] += tm * c.modulus();
            val[row] = val[row].clone() + t * c.clone();
        }
    }
    val.iter()
        .zip(&mag)
        .map(|(v, &m)| if m == 0.0 { 0.0 } else { v.modulus() / m })
        .fold(0.0, f64::max)
}

/// A monic eigenpolynomial with its roots.
#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub n: usize,
    pub lambda: Complex64,
    /// Eigenvalue at the working precision.
    pub lambda_mp: MpComplex,
    /// Coefficients rounded to f64.
    pub p: ComplexPolynomial,
    /// Coefficients at the working precision.
    pub p_mp: MpPolynomial,
    pub roots: Vec<Complex64>,
    /// Relative residual of `T_lambda p`.
    pub residual: f64,
    pub digits: u32,
}

impl EigenSolution {
    pub fn max_root_modulus(&self) -> f64 {
        self.roots.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

fn refine_eigenvalue(p: &Pencil, n: usize, lambda: Complex64, prec: Precision) -> Result<MpComplex> {
    let sp = p.spectral_polynomial_mp(n, prec);
    let mut lam = MpComplex::lift(lambda, prec);
    for _ in 0..60 {
        let (v, d) = sp.eval_with_derivative(&lam);
        if d.is_exact_zero() {
            break;
        }
        let step = v / d;
        let small = step.modulus() <= 4.0 * prec.epsilon() * lam.modulus().max(1.0);
        lam = lam - step;
        if small {
            break;
        }
    }
    let moved = (lam.to_c64() - lambda).norm();
    if moved > 1e-6 * lambda.norm().max(1.0) || poly::relative_residual(&sp, &lam) > 1e-20_f64.max(1e3 * prec.epsilon()) {
        return Err(Error::NotAnEigenvalue(lambda));
    }
    Ok(lam)
}

fn build_at(p: &Pencil, n: usize, lam: &MpComplex) -> Result<MpPolynomial> {
    let prec = lam.precision();
    let pows = lambda_powers(lam, p.k);
    let cols: Vec<Vec<(usize, MpComplex, f64)>> = (0..=n).map(|m| column(p, &pows, m, prec)).collect();
    let mut c: Vec<MpComplex> = vec![MpComplex::zero(prec); n + 1];
    c[n] = MpComplex::one(prec);
    // Row d involves c_d .. c_{d+k}; solve rows n-1 down to 0.
    for d in (0..n).rev() {
        let mut acc = MpComplex::zero(prec);
        let mut diag = None;
        let mut row_scale: f64 = 0.0;
        for m in d..=(d + p.k).min(n) {
            if let Some((_, t, _)) = cols[m].iter().find(|(r, _, _)| *r == d) {
                row_scale = row_scale.max(t.modulus());
                if m == d {
                    diag = Some(t.clone());
                } else {
                    acc = acc + t.clone() * c[m].clone();
                }
            }
        }
        let diag = diag.unwrap_or_else(|| MpComplex::zero(prec));
        if diag.modulus() <= 1e-12 * row_scale || diag.is_exact_zero() {
            return Err(Error::ResonantDegree { m: d });
        }
        c[d] = -(acc / diag);
    }
    Ok(MpPolynomial::new(c))
}

/// The monic degree-`n` eigenpolynomial for eigenvalue `lambda`, built by
/// back-substitution in the monomial basis at escalating precision until
/// the residual meets the target and the root set is stable between
/// successive precisions.
pub fn eigenpolynomial(p: &Pencil, n: usize, lambda: Complex64, policy: &PrecisionPolicy) -> Result<EigenSolution> {
    let mut prev: Option<Vec<Complex64>> = None;
    let mut last_digits = policy.initial_digits;
    for digits in policy.levels() {
        last_digits = digits;
        let prec = Precision::from_digits(digits);
        let lam = refine_eigenvalue(p, n, lambda, prec)?;
        let pm = build_at(p, n, &lam)?;
        let residual = operator_residual(p, &lam, &pm);
        let seeds: Vec<Complex64> = match &prev {
            Some(r) => r.clone(),
            None => {
                let pf = pm.to_c64();
                let mut z = pf_initial(&pf);
                poly::aberth(pf.coeffs(), &mut z, 500 + 10 * n);
                z
            }
        };
        let (rmp, _) = poly::roots_mp(&pm, Some(&seeds));
        let roots: Vec<Complex64> = rmp.iter().map(|r| r.to_c64()).collect();
        if let Some(prev_roots) = &prev {
            let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let drift = poly::root_set_distance(prev_roots, &roots);
            if residual <= policy.residual_target && drift <= policy.residual_target * scale {
                return Ok(EigenSolution {
                    n,
                    lambda: lam.to_c64(),
                    lambda_mp: lam,
                    p: pm.to_c64(),
                    p_mp: pm,
                    roots,
                    residual,
                    digits,
                });
            }
        }
        prev = Some(roots);
    }
    Err(Error::PrecisionExhausted { digits: last_digits })
}

fn pf_initial(p: &ComplexPolynomial) -> Vec<Complex64> {
    let n = p.degree().unwrap_or(0);
    let r = poly::fujiwara_bound(p.coeffs()).max(1e-12);
    (0..n)
        .map(|m| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * m as f64 / n as f64 + 0.4))
        .collect()
}

/// Eigenvalue and eigenpolynomial for one family at one degree.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub family: usize,
    pub alpha: Complex64,
    pub solution: EigenSolution,
}

pub fn solve_family(p: &Pencil, n: usize, family: usize, policy: &PrecisionPolicy) -> Result<FamilyMember> {
    let set = spectral_eigenvalues(p, n)?;
    let lambda = set
        .for_family(family)
        .ok_or_else(|| Error::InvalidPair(format!("family {} out of range", family + 1)))?;
    let alpha = validate_general_type(p, GENERAL_TYPE_TOL).alphas[family];
    Ok(FamilyMember { family, alpha, solution: eigenpolynomial(p, n, lambda, policy)? })
}

/// Every `(n, family)` combination, solved in parallel; output is ordered
/// by `n` then family regardless of scheduling.
pub fn solve_grid(p: &Pencil, ns: &[usize], families: &[usize], policy: &PrecisionPolicy) -> Result<Vec<FamilyMember>> {
    let jobs: Vec<(usize, usize)> = ns.iter().flat_map(|&n| families.iter().map(move |&j| (n, j))).collect();
    jobs.par_iter().map(|&(n, j)| solve_family(p, n, j, policy)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_excess_degree() {
        let r = Pencil::from_coeffs(&[&[c(1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(matches!(r, Err(Error::InvalidPencil(_))));
    }

    #[test]
    fn json_round_trip() {
        let p = Pencil::fig1();
        let q = Pencil::from_json_str(&p.to_json()).unwrap();
        assert_eq!(p, q);
        assert_eq!(p.hash_hex(), q.hash_hex());
    }

    #[test]
    fn fig1_is_general_type() {
        let r = validate_general_type(&Pencil::fig1(), GENERAL_TYPE_TOL);
        assert!(r.is_general(), "{r:?}");
        // Family order: increasing argument.
        assert!((r.alphas[0] - c(0.2622915346829072, -1.1451232079440654)).norm() < 1e-12);
        assert!((r.alphas[1] - c(0.2622915346829072, 1.1451232079440654)).norm() < 1e-12);
        assert!((r.alphas[2] - c(-0.7245830693658144, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn collinear_pair_is_flagged() {
        // a22 = 1, a11 = -3, a00 = 2: alphas 1/1 and 1/2 up to reciprocal, both real.
        let p = Pencil::from_coeffs(&[&[c(2.0, 0.0)], &[c(0.0, 0.0), c(-3.0, 0.0)], &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let r = validate_general_type(&p, GENERAL_TYPE_TOL);
        assert!(!r.no_collinear_pair);
        assert!(r.roots_distinct);
    }

    #[test]
    fn trivial_first_order_pencil() {
        // T = z d/dz - lambda... here Q_1 = z, Q_0 = -1: eigenvalue n, eigenpolynomial z^n.
        let p = Pencil::from_coeffs(&[&[c(-1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let set = spectral_eigenvalues(&p, 5).unwrap();
        assert_eq!(set.eigenvalues.len(), 1);
        assert!((set.eigenvalues[0].lambda - c(5.0, 0.0)).norm() < 1e-12);
        let sol = eigenpolynomial(&p, 5, set.eigenvalues[0].lambda, &PrecisionPolicy::default()).unwrap();
        assert_eq!(sol.roots, vec![c(0.0, 0.0); 5]);
    }

    #[test]
    fn eigenvalue_equation_by_hand_for_fig1() {
        // lambda^3 + n/5 lambda^2 + n(n-1) lambda + n(n-1)(n-2) = 0.
        let p = Pencil::fig1();
        for n in [3usize, 10, 31] {
            let set = spectral_eigenvalues(&p, n).unwrap();
            let nf = n as f64;
            for e in &set.eigenvalues {
                let l = e.lambda;
                let v = l * l * l + l * l * (nf / 5.0) + l * nf * (nf - 1.0) + nf * (nf - 1.0) * (nf - 2.0);
                assert!(v.norm() <= 1e-9 * (l.norm().powi(3) + nf.powi(3)));
            }
        }
    }

    #[test]
    fn operator_kills_eigenpolynomial() {
        let p = Pencil::fig1();
        let m = solve_family(&p, 12, 2, &PrecisionPolicy::default()).unwrap();
        let s = &m.solution;
        assert!(s.residual <= 1e-10);
        let image = operator_apply(&p, &s.lambda_mp, &s.p_mp);
        let scale = s.p.max_coeff_modulus() * s.lambda.norm().powi(3);
        assert!(image.max_coeff_modulus() <= 1e-20 * scale);
        assert_eq!(s.roots.len(), 12);
    }

    #[test]
    fn resonant_degree_is_reported() {
        // Q_1 = z, Q_0 = -1 gives diagonal m - lambda; lambda = 3 resonates at m = 3 < n = 5
        // only if lambda were 3; use k = 2 with diagonal vanishing at two degrees instead.
        // a22 = 1, a11 = -7, a00 = 0 is excluded; use Q_2 = z^2, Q_1 = -7z, Q_0 = 12:
        // diagonal m(m-1) - 7m + 12 = (m-2)(m-6), so lambda = 1 and n = 6 collides at m = 2.
        let p = Pencil::from_coeffs(&[&[c(12.0, 0.0)], &[c(0.0, 0.0), c(-7.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]]).unwrap();
        let r = eigenpolynomial(&p, 6, c(1.0, 0.0), &PrecisionPolicy::default());
        assert!(matches!(r, Err(Error::ResonantDegree { m: 2 })), "{r:?}");
    }

    #[test]
    fn grid_is_ordered() {
        let p = Pencil::fig1();
        let g = solve_grid(&p, &[6, 4], &[2, 0], &PrecisionPolicy::default()).unwrap();
        let keys: Vec<(usize, usize)> = g.iter().map(|m| (m.solution.n, m.family)).collect();
        assert_eq!(keys, vec![(6, 2), (6, 0), (4, 2), (4, 0)]);
    }

    #[test]
    fn onset_of_distinct_spectrum() {
        // At n = 1 the spectral cubic is lambda^2 (lambda + 1/5): a double zero.
        assert_eq!(distinctness_onset(&Pencil::fig1(), 20), Some(2));
    }
}
