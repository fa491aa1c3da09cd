//! Truncated power series in `y = 1/z`.

use num_complex::Complex64;
use serde::Serialize;

use crate::scalar::{Precision, Scalar};

/// Where a series came from; recorded in exported files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesOrigin {
    /// Expansion of `p'/(lambda p)` at infinity.
    LogDerivative,
    /// Coefficients generated by the pencil recurrence.
    Recurrence,
    /// Expansion of an algebraic branch at infinity.
    Branch,
    /// Residual of the pencil series equation.
    Residual,
}

impl SeriesOrigin {
    pub fn tag(self) -> &'static str {
        match self {
            SeriesOrigin::LogDerivative => "log_derivative",
            SeriesOrigin::Recurrence => "recurrence",
            SeriesOrigin::Branch => "branch",
            SeriesOrigin::Residual => "residual",
        }
    }
}

/// `coeffs[i]` multiplies `y^i`. For log-derivative and branch series the
/// constant term is zero and `coeffs[i] = epsilon_i`.
#[derive(Clone, Debug)]
pub struct TruncatedSeries<S = Complex64> {
    pub coeffs: Vec<S>,
    pub origin: SeriesOrigin,
}

impl<S: Scalar> TruncatedSeries<S> {
    pub fn new(coeffs: Vec<S>, origin: SeriesOrigin) -> Self {
        TruncatedSeries { coeffs, origin }
    }

    /// Highest power carried.
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn to_c64(&self) -> TruncatedSeries<Complex64> {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|c| c.to_c64()).collect(), origin: self.origin }
    }

    /// Evaluate the truncated sum at `y`.
    pub fn eval(&self, y: &S) -> S {
        let prec = y.precision();
        let mut acc = S::zero(prec);
        for c in self.coeffs.iter().rev() {
            acc = acc * y.clone() + c.clone();
        }
        acc
    }
}

pub fn padded<S: Scalar>(a: &[S], len: usize, prec: Precision) -> Vec<S> {
    let mut v: Vec<S> = a.iter().take(len).cloned().collect();
    v.resize(len, S::zero(prec));
    v
}

/// Product truncated to `len` terms.
pub fn mul<S: Scalar>(a: &[S], b: &[S], len: usize, prec: Precision) -> Vec<S> {
    let mut out = vec![S::zero(prec); len];
    for (i, x) in a.iter().enumerate().take(len) {
        if x.is_exact_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    out
}

/// Quotient `a / b` truncated to `len` terms; `b[0]` must be nonzero.
pub fn div<S: Scalar>(a: &[S], b: &[S], len: usize, prec: Precision) -> Vec<S> {
    let mut out: Vec<S> = Vec::with_capacity(len);
    let b0 = b[0].clone();
    for m in 0..len {
        let mut acc = a.get(m).cloned().unwrap_or_else(|| S::zero(prec));
        for l in 1..=m.min(b.len().saturating_sub(1)) {
            acc = acc - b[l].clone() * out[m - l].clone();
        }
        out.push(acc / b0.clone());
    }
    out
}

/// `d/dy`, keeping the length.
pub fn derivative<S: Scalar>(a: &[S], prec: Precision) -> Vec<S> {
    let mut out: Vec<S> = a.iter().enumerate().skip(1).map(|(i, c)| c.scale(i as f64)).collect();
    out.push(S::zero(prec));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series_division() {
        let one = [Complex64::new(1.0, 0.0)];
        let b = [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0)];
        let q = div(&one, &b, 6, Precision::DOUBLE);
        for (i, c) in q.iter().enumerate() {
            assert_eq!(c.re, 2f64.powi(i as i32));
        }
        let back = mul(&q, &b, 6, Precision::DOUBLE);
        assert_eq!(back[0].re, 1.0);
        assert!(back[1..].iter().all(|c| c.norm() == 0.0));
    }
}
