//! Complex scalars in two flavours: hardware `Complex64` and a
//! multiprecision complex built on `astro_float::BigFloat`.
//!
//! Numeric kernels (Horner, Aberth, series arithmetic, back-substitution)
//! are written once against [`Scalar`] and run at either precision.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_complex::Complex64;

const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(pub usize);

impl Precision {
    pub const DOUBLE: Precision = Precision(53);

    /// Bits needed to carry `digits` significant decimal digits, plus guard bits.
    pub fn from_digits(digits: u32) -> Self {
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 8;
        Precision(bits.div_ceil(64) * 64)
    }

    pub fn digits(self) -> u32 {
        (self.0 as f64 / std::f64::consts::LOG2_10).floor() as u32
    }

    /// Unit roundoff at this precision.
    pub fn epsilon(self) -> f64 {
        2f64.powi(-(self.0.min(1070) as i32))
    }
}

/// Arithmetic needed by the generic kernels.
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn lift(c: Complex64, prec: Precision) -> Self;
    fn to_c64(&self) -> Complex64;
    fn precision(&self) -> Precision;
    fn is_exact_zero(&self) -> bool;

    fn zero(prec: Precision) -> Self {
        Self::lift(Complex64::new(0.0, 0.0), prec)
    }
    fn one(prec: Precision) -> Self {
        Self::lift(Complex64::new(1.0, 0.0), prec)
    }
    /// Modulus, rounded to f64.
    fn modulus(&self) -> f64 {
        self.to_c64().norm()
    }
    fn scale(&self, f: f64) -> Self {
        self.clone() * Self::lift(Complex64::new(f, 0.0), self.precision())
    }
    fn from_int(v: i64, prec: Precision) -> Self {
        Self::lift(Complex64::new(v as f64, 0.0), prec)
    }
    /// Natural log of the modulus, finite even when the modulus is not
    /// representable in f64.
    fn log_modulus(&self) -> f64 {
        self.modulus().ln()
    }
    /// Quotient that avoids spurious overflow in intermediate products.
    fn safe_div(self, o: Self) -> Self {
        self / o
    }
    /// `exp(2*pi*i*l/n)` for `l = 0..n`.
    fn unit_roots(n: usize, prec: Precision) -> Vec<Self>;
}

impl Scalar for Complex64 {
    fn lift(c: Complex64, _prec: Precision) -> Self {
        c
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn precision(&self) -> Precision {
        Precision::DOUBLE
    }
    fn is_exact_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn unit_roots(n: usize, _prec: Precision) -> Vec<Self> {
        (0..n).map(|l| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * l as f64 / n as f64)).collect()
    }
    fn safe_div(self, o: Self) -> Self {
        // Smith's algorithm.
        if o.re.abs() >= o.im.abs() {
            let r = o.im / o.re;
            let d = o.re + o.im * r;
            Complex64::new((self.re + self.im * r) / d, (self.im - self.re * r) / d)
        } else {
            let r = o.re / o.im;
            let d = o.re * r + o.im;
            Complex64::new((self.re * r + self.im) / d, (self.im * r - self.re) / d)
        }
    }
}

/// Complex number with `BigFloat` parts sharing one precision.
#[derive(Clone)]
pub struct MpComplex {
    re: BigFloat,
    im: BigFloat,
    prec: Precision,
}

impl MpComplex {
    pub fn new(re: BigFloat, im: BigFloat, prec: Precision) -> Self {
        MpComplex { re, im, prec }
    }

    pub fn re(&self) -> &BigFloat {
        &self.re
    }

    pub fn im(&self) -> &BigFloat {
        &self.im
    }

    /// Same value carried at a different precision.
    pub fn with_precision(&self, prec: Precision) -> Self {
        let mut re = self.re.clone();
        let mut im = self.im.clone();
        // Widening is exact; narrowing rounds.
        let _ = re.set_precision(prec.0, RM);
        let _ = im.set_precision(prec.0, RM);
        MpComplex { re, im, prec }
    }

    pub fn conj(&self) -> Self {
        MpComplex { re: self.re.clone(), im: -self.im.clone(), prec: self.prec }
    }

    /// The `n` roots of unity `exp(2*pi*i*l/n)`, `l = 0..n`, at full precision.
    pub fn roots_of_unity(n: usize, prec: Precision) -> Vec<Self> {
        let p = prec.0 + 64;
        let mut cc = Consts::new().expect("astro-float constant cache");
        let two_pi = cc.pi(p, RM).mul(&BigFloat::from_i64(2, p), p, RM);
        (0..n)
            .map(|l| {
                let t = two_pi
                    .mul(&BigFloat::from_u64(l as u64, p), p, RM)
                    .div(&BigFloat::from_u64(n as u64, p), p, RM);
                MpComplex::new(t.cos(p, RM, &mut cc), t.sin(p, RM, &mut cc), Precision(p))
                    .with_precision(prec)
            })
            .collect()
    }

    pub fn norm_sqr(&self) -> BigFloat {
        let p = self.prec.0;
        self.re.mul(&self.re, p, RM).add(&self.im.mul(&self.im, p, RM), p, RM)
    }
}

impl fmt::Debug for MpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MpComplex({}, {}; {} bits)", self.re, self.im, self.prec.0)
    }
}

/// `|x| = m * 2^e` with `m` in `[0.5, 1)`; `(0.0, 0)` for zero.
fn split_exponent(x: &BigFloat) -> (f64, i32) {
    if x.is_zero() {
        return (0.0, 0);
    }
    match x.as_raw_parts() {
        Some((words, _, _, exp, _)) => {
            let top = *words.last().unwrap_or(&0);
            (top as f64 / 2f64.powi(64), exp)
        }
        None => (f64::NAN, 0),
    }
}

/// Round a `BigFloat` to the nearest `f64`.
pub fn big_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf_pos() {
        return f64::INFINITY;
    }
    if x.is_inf_neg() {
        return f64::NEG_INFINITY;
    }
    if x.is_zero() {
        return 0.0;
    }
    let Some((words, _, sign, exp, _)) = x.as_raw_parts() else {
        return f64::NAN;
    };
    let top = *words.last().unwrap_or(&0);
    let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
    // Value is 0.m * 2^exp with the top bit of `top` set.
    let frac = top as f64 / 2f64.powi(64) + next as f64 / 2f64.powi(128);
    let e = exp;
    let mag = if e > 1024 {
        f64::INFINITY
    } else if e < -1100 {
        0.0
    } else if e < -1000 {
        frac * 2f64.powi(e + 100) * 2f64.powi(-100)
    } else {
        frac * 2f64.powi(e)
    };
    match sign {
        Sign::Neg => -mag,
        Sign::Pos => mag,
    }
}

impl Scalar for MpComplex {
    fn lift(c: Complex64, prec: Precision) -> Self {
        MpComplex {
            re: BigFloat::from_f64(c.re, prec.0),
            im: BigFloat::from_f64(c.im, prec.0),
            prec,
        }
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(big_to_f64(&self.re), big_to_f64(&self.im))
    }
    fn precision(&self) -> Precision {
        self.prec
    }
    fn is_exact_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn unit_roots(n: usize, prec: Precision) -> Vec<Self> {
        MpComplex::roots_of_unity(n, prec)
    }
    fn log_modulus(&self) -> f64 {
        let (mr, er) = split_exponent(&self.re);
        let (mi, ei) = split_exponent(&self.im);
        if mr == 0.0 && mi == 0.0 {
            return f64::NEG_INFINITY;
        }
        let e = if mr == 0.0 { ei } else if mi == 0.0 { er } else { er.max(ei) };
        let a = mr * 2f64.powi((er - e).max(-1000));
        let b = mi * 2f64.powi((ei - e).max(-1000));
        a.hypot(b).ln() + e as f64 * std::f64::consts::LN_2
    }
    fn from_int(v: i64, prec: Precision) -> Self {
        MpComplex {
            re: BigFloat::from_i64(v, prec.0),
            im: BigFloat::from_i64(0, prec.0),
            prec,
        }
    }
}

impl Add for MpComplex {
    type Output = MpComplex;
    fn add(self, o: MpComplex) -> MpComplex {
        let p = self.prec.max(o.prec);
        MpComplex {
            re: self.re.add(&o.re, p.0, RM),
            im: self.im.add(&o.im, p.0, RM),
            prec: p,
        }
    }
}

impl Sub for MpComplex {
    type Output = MpComplex;
    fn sub(self, o: MpComplex) -> MpComplex {
        let p = self.prec.max(o.prec);
        MpComplex {
            re: self.re.sub(&o.re, p.0, RM),
            im: self.im.sub(&o.im, p.0, RM),
            prec: p,
        }
    }
}

impl Mul for MpComplex {
    type Output = MpComplex;
    fn mul(self, o: MpComplex) -> MpComplex {
        let p = self.prec.max(o.prec);
        let q = p.0;
        let ac = self.re.mul(&o.re, q, RM);
        let bd = self.im.mul(&o.im, q, RM);
        let ad = self.re.mul(&o.im, q, RM);
        let bc = self.im.mul(&o.re, q, RM);
        MpComplex { re: ac.sub(&bd, q, RM), im: ad.add(&bc, q, RM), prec: p }
    }
}

impl Div for MpComplex {
    type Output = MpComplex;
    fn div(self, o: MpComplex) -> MpComplex {
        let p = self.prec.max(o.prec);
        let q = p.0;
        let den = o.re.mul(&o.re, q, RM).add(&o.im.mul(&o.im, q, RM), q, RM);
        let re = self.re.mul(&o.re, q, RM).add(&self.im.mul(&o.im, q, RM), q, RM);
        let im = self.im.mul(&o.re, q, RM).sub(&self.re.mul(&o.im, q, RM), q, RM);
        MpComplex { re: re.div(&den, q, RM), im: im.div(&den, q, RM), prec: p }
    }
}

impl Neg for MpComplex {
    type Output = MpComplex;
    fn neg(self) -> MpComplex {
        MpComplex { re: self.re.neg(), im: -self.im.clone(), prec: self.prec }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_f64() {
        let p = Precision::from_digits(40);
        for &v in &[1.0, -3.25, 1e-300, 6.02e23, -0.1, 1e300, 2f64.powi(-1000)] {
            let m = MpComplex::lift(Complex64::new(v, -v), p);
            let back = m.to_c64();
            assert_eq!(back.re, v, "{v}");
            assert_eq!(back.im, -v, "{v}");
        }
    }

    #[test]
    fn arithmetic_matches_f64() {
        let p = Precision::from_digits(30);
        let a = Complex64::new(1.5, -0.25);
        let b = Complex64::new(-0.75, 2.0);
        let ma = MpComplex::lift(a, p);
        let mb = MpComplex::lift(b, p);
        let close = |x: Complex64, y: Complex64| (x - y).norm() <= 1e-15 * y.norm().max(1.0);
        assert!(close((ma.clone() + mb.clone()).to_c64(), a + b));
        assert!(close((ma.clone() - mb.clone()).to_c64(), a - b));
        assert!(close((ma.clone() * mb.clone()).to_c64(), a * b));
        assert!(close((ma.clone() / mb.clone()).to_c64(), a / b));
        assert!(close((-ma).to_c64(), -a));
    }

    #[test]
    fn extra_precision_survives_cancellation() {
        let p = Precision::from_digits(50);
        let one = MpComplex::one(p);
        let tiny = MpComplex::lift(Complex64::new(1e-30, 0.0), p);
        let d = (one.clone() + tiny) - one;
        assert!((d.to_c64().re - 1e-30).abs() < 1e-44);
    }

    #[test]
    fn digits_to_bits() {
        assert!(Precision::from_digits(16).0 >= 61);
        assert!(Precision::from_digits(100).digits() >= 100);
    }
}
