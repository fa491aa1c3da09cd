//! Dense univariate complex polynomials, Aberth root finding with
//! precision escalation, and discriminants of polynomials in two variables.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{MpComplex, Precision, Scalar};

/// How hard root finders may work before giving up.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    pub initial_digits: u32,
    pub max_digits: u32,
    /// Relative residual every accepted root must meet.
    pub residual_target: f64,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy { initial_digits: 16, max_digits: 256, residual_target: 1e-10 }
    }
}

impl PrecisionPolicy {
    /// Digit levels visited by the escalation loop: initial, doubled, ..., capped at max.
    pub fn levels(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut d = self.initial_digits.max(1);
        loop {
            out.push(d.min(self.max_digits));
            if d >= self.max_digits {
                break;
            }
            d *= 2;
        }
        out.dedup();
        out
    }
}

/// Coefficients stored low-to-high; the top coefficient is nonzero unless
/// the polynomial is identically zero (empty coefficient vector).
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<S = Complex64> {
    coeffs: Vec<S>,
}

pub type ComplexPolynomial = Polynomial<Complex64>;
pub type MpPolynomial = Polynomial<MpComplex>;

impl<S: Scalar> Polynomial<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_exact_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `z^m`, zero beyond the degree.
    pub fn coeff(&self, m: usize, prec: Precision) -> S {
        self.coeffs.get(m).cloned().unwrap_or_else(|| S::zero(prec))
    }

    pub fn leading(&self) -> Option<&S> {
        self.coeffs.last()
    }

    pub fn precision(&self) -> Precision {
        self.coeffs.first().map(|c| c.precision()).unwrap_or(Precision::DOUBLE)
    }

    pub fn eval(&self, z: &S) -> S {
        let mut acc = S::zero(z.precision());
        for c in self.coeffs.iter().rev() {
            acc = acc * z.clone() + c.clone();
        }
        acc
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: &S) -> (S, S) {
        horner2(&self.coeffs, z)
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, c)| c.scale(m as f64))
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let prec = self.precision().max(other.precision());
        let mut out = vec![S::zero(prec); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Polynomial::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.precision().max(other.precision());
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|m| self.coeff(m, prec) + other.coeff(m, prec)).collect())
    }

    pub fn scale_by(&self, s: &S) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c.clone() * s.clone()).collect())
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[S], prec: Precision) -> Self {
        let mut coeffs = vec![S::one(prec)];
        for r in roots {
            let mut next = vec![S::zero(prec); coeffs.len() + 1];
            for (m, c) in coeffs.iter().enumerate() {
                next[m + 1] = next[m + 1].clone() + c.clone();
                next[m] = next[m].clone() - c.clone() * r.clone();
            }
            coeffs = next;
        }
        Polynomial::new(coeffs)
    }

    /// Quotient and remainder of division by `d`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dn = d.degree().expect("division by the zero polynomial");
        let prec = self.precision().max(d.precision());
        let Some(n) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if n < dn {
            return (Self::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let lead = d.coeffs[dn].clone();
        let mut quot = vec![S::zero(prec); n - dn + 1];
        for m in (0..=n - dn).rev() {
            let q = rem[m + dn].clone() / lead.clone();
            for (l, dc) in d.coeffs.iter().enumerate() {
                rem[m + l] = rem[m + l].clone() - q.clone() * dc.clone();
            }
            quot[m] = q;
        }
        rem.truncate(dn);
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    pub fn max_coeff_modulus(&self) -> f64 {
        self.coeffs.iter().map(|c| c.modulus()).fold(0.0, f64::max)
    }

    pub fn to_c64(&self) -> ComplexPolynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c.to_c64()).collect())
    }
}

impl ComplexPolynomial {
    pub fn from_c64(coeffs: &[Complex64]) -> Self {
        Polynomial::new(coeffs.to_vec())
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn lift(&self, prec: Precision) -> MpPolynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| MpComplex::lift(c, prec)).collect())
    }
}

impl MpPolynomial {
    pub fn with_precision(&self, prec: Precision) -> Self {
        Polynomial::new(self.coeffs.iter().map(|c| c.with_precision(prec)).collect())
    }
}

fn horner2<S: Scalar>(coeffs: &[S], z: &S) -> (S, S) {
    let prec = z.precision();
    let mut p = S::zero(prec);
    let mut d = S::zero(prec);
    for c in coeffs.iter().rev() {
        d = d * z.clone() + p.clone();
        p = p * z.clone() + c.clone();
    }
    (p, d)
}

/// `ln sum |c_m| r^m` from `ln |c_m|`, computed without overflow.
fn log_modulus_horner(log_moduli: &[f64], log_r: f64) -> f64 {
    let terms = log_moduli.iter().enumerate().map(|(m, &lc)| lc + m as f64 * log_r);
    let top = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + terms.map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// Upper bound on root moduli (Fujiwara).
pub fn fujiwara_bound(coeffs: &[Complex64]) -> f64 {
    let n = coeffs.len() - 1;
    let lead = coeffs[n].norm();
    let mut b: f64 = 0.0;
    for m in 1..=n {
        let c = coeffs[n - m].norm() / lead;
        let c = if m == n { c / 2.0 } else { c };
        b = b.max(c.powf(1.0 / m as f64));
    }
    2.0 * b
}

fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    // Geometric mean of the root moduli, capped by the Fujiwara bound.
    let fj = fujiwara_bound(coeffs);
    let gm = (coeffs[0].norm() / coeffs[n].norm()).powf(1.0 / n as f64);
    let r = if gm.is_finite() && gm > 0.0 { gm.min(fj) } else { fj }.max(f64::MIN_POSITIVE);
    (0..n)
        .map(|m| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * m as f64 / n as f64 + 0.4))
        .collect()
}

/// Aberth-Ehrlich iteration in place. Returns true when every root has
/// either a correction below roundoff or a value below the evaluation
/// error bound.
pub fn aberth<S: Scalar>(coeffs: &[S], z: &mut [S], max_iter: usize) -> bool {
    let n = z.len();
    if n == 0 {
        return true;
    }
    let prec = coeffs[0].precision().max(z[0].precision());
    let eps = prec.epsilon();
    let log_moduli: Vec<f64> = coeffs.iter().map(|c| c.log_modulus()).collect();
    let log_slack = (4.0 * (n as f64 + 1.0) * eps).ln();
    let log_tol = (4.0 * eps).ln();
    let mut done = vec![false; n];
    for _ in 0..max_iter {
        let mut all = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (pv, dv) = horner2(coeffs, &z[i]);
            let zi = z[i].modulus();
            if pv.log_modulus() <= log_slack + log_modulus_horner(&log_moduli, z[i].log_modulus()) {
                done[i] = true;
                continue;
            }
            all = false;
            let mut s = S::zero(prec);
            for j in 0..n {
                if j != i {
                    let diff = z[i].clone() - z[j].clone();
                    if !diff.is_exact_zero() {
                        s = s + S::one(prec).safe_div(diff);
                    }
                }
            }
            let w = if dv.is_exact_zero() {
                // Stationary point: nudge off it.
                S::lift(Complex64::new(1e-3 * zi.max(1e-3), 1e-3 * zi.max(1e-3)), prec)
            } else {
                let ratio = pv.safe_div(dv);
                ratio.clone().safe_div(S::one(prec) - ratio * s)
            };
            z[i] = z[i].clone() - w.clone();
            if w.log_modulus() <= log_tol + z[i].log_modulus() {
                done[i] = true;
            }
        }
        if all {
            return true;
        }
    }
    done.iter().all(|&d| d)
}

/// Relative residual `|p(r)| / (max|c| * max(1,|r|)^deg)`.
pub fn relative_residual<S: Scalar>(p: &Polynomial<S>, r: &S) -> f64 {
    let deg = p.degree().unwrap_or(0) as i32;
    let scale = p.max_coeff_modulus() * r.modulus().max(1.0).powi(deg);
    if scale == 0.0 {
        return 0.0;
    }
    p.eval(r).modulus() / scale
}

/// Roots together with the precision that produced them.
#[derive(Clone, Debug)]
pub struct RootReport {
    pub roots: Vec<Complex64>,
    pub digits: u32,
    pub max_residual: f64,
}

/// All roots of `p` with multiplicity, escalating precision until every
/// root meets the residual target.
pub fn roots(p: &ComplexPolynomial, policy: &PrecisionPolicy) -> Result<Vec<Complex64>> {
    roots_with_report(p, policy).map(|r| r.roots)
}

pub fn roots_with_report(p: &ComplexPolynomial, policy: &PrecisionPolicy) -> Result<RootReport> {
    let Some(deg) = p.degree() else {
        return Err(Error::InvalidPencil("roots of the zero polynomial".into()));
    };
    // Exact zero roots are split off first.
    let zeros = p.coeffs().iter().take_while(|c| c.is_exact_zero()).count();
    let reduced = ComplexPolynomial::new(p.coeffs()[zeros..].to_vec());
    let n = deg - zeros;
    let mut out = vec![Complex64::new(0.0, 0.0); zeros];
    if n == 0 {
        return Ok(RootReport { roots: out, digits: policy.initial_digits, max_residual: 0.0 });
    }
    let mut seeds = initial_guesses(reduced.coeffs());
    let mut last_digits = policy.initial_digits;
    for digits in policy.levels() {
        last_digits = digits;
        let found: Vec<Complex64> = if digits <= 16 {
            let mut z = seeds.clone();
            aberth(reduced.coeffs(), &mut z, 400 + 10 * n);
            z
        } else {
            let prec = Precision::from_digits(digits);
            let mp = reduced.lift(prec);
            let mut z: Vec<MpComplex> = seeds.iter().map(|&s| MpComplex::lift(s, prec)).collect();
            aberth(mp.coeffs(), &mut z, 200 + 4 * n);
            z.iter().map(|r| r.to_c64()).collect()
        };
        // Residual measured at a precision above the working one.
        let check_prec = Precision::from_digits(2 * digits.max(16));
        let check = reduced.lift(check_prec);
        let max_residual = found
            .iter()
            .map(|&r| relative_residual(&check, &MpComplex::lift(r, check_prec)))
            .fold(0.0, f64::max);
        if found.iter().all(|r| r.re.is_finite() && r.im.is_finite())
            && max_residual <= policy.residual_target
        {
            out.extend(found);
            return Ok(RootReport { roots: out, digits, max_residual });
        }
        if found.iter().all(|r| r.re.is_finite() && r.im.is_finite()) {
            seeds = found;
        }
    }
    Err(Error::PrecisionExhausted { digits: last_digits })
}

/// Roots of a multiprecision polynomial at its own precision, seeded from
/// `seeds` (or a Fujiwara circle).
pub fn roots_mp(p: &MpPolynomial, seeds: Option<&[Complex64]>) -> (Vec<MpComplex>, bool) {
    let Some(deg) = p.degree() else {
        return (Vec::new(), false);
    };
    let prec = p.precision();
    let zeros = p.coeffs().iter().take_while(|c| c.is_exact_zero()).count();
    let reduced = MpPolynomial::new(p.coeffs()[zeros..].to_vec());
    let n = deg - zeros;
    let mut out: Vec<MpComplex> = (0..zeros).map(|_| MpComplex::zero(prec)).collect();
    if n == 0 {
        return (out, true);
    }
    let start: Vec<Complex64> = match seeds {
        Some(s) if s.len() == deg && s.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
            // Drop the seeds closest to zero when zero roots were split off.
            let mut s = s.to_vec();
            s.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
            s[zeros..].to_vec()
        }
        _ => initial_guesses(reduced.to_c64().coeffs()),
    };
    let mut z: Vec<MpComplex> = start.iter().map(|&s| MpComplex::lift(s, prec)).collect();
    let ok = aberth(reduced.coeffs(), &mut z, 300 + 6 * n);
    out.extend(z);
    (out, ok)
}

/// Largest distance in a greedy nearest-neighbour pairing of two root
/// multisets of equal size.
pub fn root_set_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
    if a.len() != b.len() || !a.iter().all(finite) || !b.iter().all(finite) {
        return f64::INFINITY;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut used_a = vec![false; a.len()];
    let mut used_b = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for (d, i, j) in pairs {
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
        }
    }
    worst
}

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
pub fn bareiss_det<S: Scalar>(mut m: Vec<Vec<S>>) -> S {
    let n = m.len();
    let prec = m.first().and_then(|r| r.first()).map(|c| c.precision()).unwrap_or(Precision::DOUBLE);
    if n == 0 {
        return S::one(prec);
    }
    let mut sign = 1.0;
    let mut prev = S::one(prec);
    for k in 0..n - 1 {
        let piv = (k..n).max_by(|&a, &b| m[a][k].modulus().total_cmp(&m[b][k].modulus())).unwrap();
        if m[piv][k].is_exact_zero() {
            return S::zero(prec);
        }
        if piv != k {
            m.swap(piv, k);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[k][k].clone() * m[i][j].clone() - m[i][k].clone() * m[k][j].clone();
                m[i][j] = v / prev.clone();
            }
        }
        prev = m[k][k].clone();
    }
    m[n - 1][n - 1].scale(sign)
}

/// Discriminant in `w` of `P(z, w) = sum_i q[i](z) w^i`, as a polynomial in `z`.
///
/// The resultant of `P` and `dP/dw` is sampled at roots of unity in
/// multiprecision, interpolated by inverse DFT, and divided by the leading
/// coefficient `q[k](z)`.
pub fn discriminant_in_w(q: &[ComplexPolynomial]) -> Result<ComplexPolynomial> {
    let k = q.len().checked_sub(1).ok_or(Error::DegenerateCurve)?;
    if q[k].is_zero() {
        return Err(Error::InvalidPencil("leading coefficient in w vanishes identically".into()));
    }
    if k == 0 {
        return Err(Error::DegenerateCurve);
    }
    if k == 1 {
        return Ok(ComplexPolynomial::from_real(&[1.0]));
    }
    let prec = Precision::from_digits(48);
    let dz = q.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
    let size = 2 * k - 1;
    let nodes_count = size * dz + 1;
    let nodes = MpComplex::roots_of_unity(nodes_count, prec);
    let qm: Vec<MpPolynomial> = q.iter().map(|p| p.lift(prec)).collect();
    let mut values = Vec::with_capacity(nodes_count);
    let mut hadamard: f64 = 0.0;
    for z in &nodes {
        // Coefficients in w, high to low.
        let a: Vec<MpComplex> = (0..=k).rev().map(|i| qm[i].eval(z)).collect();
        let da: Vec<MpComplex> = (1..=k).rev().map(|i| qm[i].eval(z).scale(i as f64)).collect();
        let mut rows = vec![vec![MpComplex::zero(prec); size]; size];
        for r in 0..k - 1 {
            for (c, v) in a.iter().enumerate() {
                rows[r][r + c] = v.clone();
            }
        }
        for r in 0..k {
            for (c, v) in da.iter().enumerate() {
                rows[k - 1 + r][r + c] = v.clone();
            }
        }
        let h: f64 = rows
            .iter()
            .map(|row| row.iter().map(|v| v.modulus().powi(2)).sum::<f64>().sqrt())
            .product();
        hadamard = hadamard.max(h);
        values.push(bareiss_det(rows));
    }
    // Inverse DFT: c_m = (1/N) sum_l v_l w^{-lm}.
    let inv_n = 1.0 / nodes_count as f64;
    let mut coeffs = Vec::with_capacity(nodes_count);
    for m in 0..nodes_count {
        let mut acc = MpComplex::zero(prec);
        for (l, v) in values.iter().enumerate() {
            let idx = (nodes_count - (l * m) % nodes_count) % nodes_count;
            acc = acc + v.clone() * nodes[idx].clone();
        }
        coeffs.push(acc.scale(inv_n));
    }
    let tol = 1e-30 * hadamard;
    let coeffs: Vec<MpComplex> = coeffs
        .into_iter()
        .map(|c| if c.modulus() <= tol { MpComplex::zero(prec) } else { c })
        .collect();
    let res = MpPolynomial::new(coeffs);
    if res.is_zero() {
        return Err(Error::DegenerateCurve);
    }
    let (quot, rem) = res.div_rem(&qm[k]);
    debug_assert!(rem.max_coeff_modulus() <= 1e-20 * res.max_coeff_modulus().max(1.0));
    let sign = if (k * (k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(quot.scale_by(&MpComplex::lift(Complex64::new(sign, 0.0), prec)).to_c64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_roots() {
        let p = ComplexPolynomial::from_real(&[-1.0, 0.0, 1.0]);
        let mut r = roots(&p, &PrecisionPolicy::default()).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn unity_roots_of_high_degree() {
        let mut coeffs = vec![0.0; 201];
        coeffs[0] = -1.0;
        coeffs[200] = 1.0;
        let p = ComplexPolynomial::from_real(&coeffs);
        let r = roots(&p, &PrecisionPolicy::default()).unwrap();
        assert_eq!(r.len(), 200);
        for z in &r {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
        let expected: Vec<Complex64> =
            (0..200).map(|m| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / 200.0)).collect();
        assert!(root_set_distance(&r, &expected) < 1e-12);
    }

    #[test]
    fn exact_zero_roots_are_split_off() {
        let p = ComplexPolynomial::from_real(&[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let r = roots(&p, &PrecisionPolicy::default()).unwrap();
        assert_eq!(r, vec![c(0.0, 0.0); 5]);
    }

    #[test]
    fn wilkinson_like_cluster_needs_escalation_or_not_but_meets_target() {
        // (z - 1)^6 (z + 2): a sixfold root is fine by the residual criterion.
        let roots_in = [c(1.0, 0.0); 6];
        let mut all = roots_in.to_vec();
        all.push(c(-2.0, 0.0));
        let p = ComplexPolynomial::from_roots(&all, Precision::DOUBLE);
        let rep = roots_with_report(&p, &PrecisionPolicy::default()).unwrap();
        assert!(rep.max_residual <= 1e-10);
        assert_eq!(rep.roots.len(), 7);
    }

    #[test]
    fn exhausted_when_target_is_unreachable() {
        let policy = PrecisionPolicy { initial_digits: 16, max_digits: 16, residual_target: 1e-40 };
        let p = ComplexPolynomial::from_real(&[-2.0, 0.0, 1.0]);
        assert!(matches!(roots(&p, &policy), Err(Error::PrecisionExhausted { .. })));
    }

    #[test]
    fn multiprecision_level_is_reported() {
        let policy = PrecisionPolicy { initial_digits: 32, max_digits: 64, residual_target: 1e-14 };
        let p = ComplexPolynomial::from_real(&[-2.0, 0.0, 1.0]);
        let rep = roots_with_report(&p, &policy).unwrap();
        assert_eq!(rep.digits, 32);
        assert!(rep.roots.iter().any(|r| (r.re - 2f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn mp_roots_of_degree_twenty() {
        let known: Vec<Complex64> =
            (0..20).map(|m| c(0.3 * m as f64 - 2.0, 0.1 * ((m * 7) % 5) as f64)).collect();
        let prec = Precision::from_digits(60);
        let lifted: Vec<MpComplex> = known.iter().map(|&z| MpComplex::lift(z, prec)).collect();
        let p = MpPolynomial::from_roots(&lifted, prec);
        let (found, ok) = roots_mp(&p, None);
        assert!(ok);
        let found: Vec<Complex64> = found.iter().map(|z| z.to_c64()).collect();
        assert!(root_set_distance(&found, &known) < 1e-13);
    }

    #[test]
    fn division_round_trip() {
        let a = ComplexPolynomial::from_c64(&[c(1.0, 2.0), c(0.0, -1.0), c(3.0, 0.5)]);
        let b = ComplexPolynomial::from_c64(&[c(-1.0, 0.0), c(2.0, 1.0)]);
        let prod = a.mul(&b);
        let (q, r) = prod.div_rem(&b);
        assert!(r.max_coeff_modulus() < 1e-14);
        for (x, y) in q.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        let m = vec![
            vec![c(2.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(3.0, 0.0), c(0.0, -2.0)],
            vec![c(0.0, 0.0), c(1.0, 1.0), c(4.0, 0.0)],
        ];
        let cof = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        assert!((bareiss_det(m) - cof).norm() < 1e-12);
    }

    #[test]
    fn discriminant_of_square_root_curve() {
        // w^2 - z: discriminant 4z, single branch point at 0.
        let q = vec![
            ComplexPolynomial::from_real(&[0.0, -1.0]),
            ComplexPolynomial::zero(),
            ComplexPolynomial::from_real(&[1.0]),
        ];
        let d = discriminant_in_w(&q).unwrap();
        assert_eq!(d.degree(), Some(1));
        assert!(d.coeffs()[0].norm() < 1e-14);
        assert!((d.coeffs()[1] - c(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn discriminant_of_cubic_matches_closed_form() {
        // w^3 + a w + b with a = z, b = 1 + z^2: disc = -4a^3 - 27b^2.
        let q = vec![
            ComplexPolynomial::from_real(&[1.0, 0.0, 1.0]),
            ComplexPolynomial::from_real(&[0.0, 1.0]),
            ComplexPolynomial::zero(),
            ComplexPolynomial::from_real(&[1.0]),
        ];
        let d = discriminant_in_w(&q).unwrap();
        let a = ComplexPolynomial::from_real(&[0.0, 1.0]);
        let b = ComplexPolynomial::from_real(&[1.0, 0.0, 1.0]);
        let expected = a
            .mul(&a)
            .mul(&a)
            .scale_by(&c(-4.0, 0.0))
            .add(&b.mul(&b).scale_by(&c(-27.0, 0.0)));
        assert_eq!(d.degree(), expected.degree());
        for (x, y) in d.coeffs().iter().zip(expected.coeffs()) {
            assert!((x - y).norm() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn everywhere_double_root_is_degenerate() {
        // (z w - 1)^2 = z^2 w^2 - 2 z w + 1.
        let q = vec![
            ComplexPolynomial::from_real(&[1.0]),
            ComplexPolynomial::from_real(&[0.0, -2.0]),
            ComplexPolynomial::from_real(&[0.0, 0.0, 1.0]),
        ];
        assert!(matches!(discriminant_in_w(&q), Err(Error::DegenerateCurve)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn recovered_roots_have_small_residual(raw in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..25)) {
            let known: Vec<Complex64> = raw.iter().map(|&(a, b)| c(a, b)).collect();
            let p = ComplexPolynomial::from_roots(&known, Precision::DOUBLE);
            let found = roots(&p, &PrecisionPolicy::default()).unwrap();
            prop_assert_eq!(found.len(), known.len());
            for r in &found {
                prop_assert!(relative_residual(&p, r) <= 1e-10);
            }
        }

        #[test]
        fn polynomial_product_evaluates_pointwise(a in proptest::collection::vec(-2.0f64..2.0, 1..8),
                                                   b in proptest::collection::vec(-2.0f64..2.0, 1..8),
                                                   x in -1.5f64..1.5, y in -1.5f64..1.5) {
            let pa = ComplexPolynomial::from_real(&a);
            let pb = ComplexPolynomial::from_real(&b);
            let z = c(x, y);
            let lhs = pa.mul(&pb).eval(&z);
            let rhs = pa.eval(&z) * pb.eval(&z);
            prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
        }
    }
}
