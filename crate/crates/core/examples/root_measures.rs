//! Root-counting measures: the Cauchy transform against `P'/(mP)`, the
//! potentials of `z^m - 1` and its derivative, and the distance between
//! `p'/(lambda p)` and the branch of the curve on a large circle.

use num_complex::Complex64;
use pencil_lab::measures;
use pencil_lab::pencil::Pencil;
use pencil_lab::poly::{ComplexPolynomial, PrecisionPolicy};

fn main() -> pencil_lab::Result<()> {
    let policy = PrecisionPolicy::default();

    let p = ComplexPolynomial::from_real(&[2.0, -1.0, 0.0, 3.0, 1.0]);
    let mu = measures::root_measure(&p, &policy)?;
    let z = Complex64::new(0.7, 1.9);
    let direct = p.derivative().eval(&z) / (p.eval(&z) * 4.0);
    println!("Cauchy transform {:.12}, P'/(mP) {:.12}", measures::cauchy_transform(&mu, z)?, direct);

    let m = 200;
    let mut c = vec![Complex64::default(); m + 1];
    c[0] = Complex64::new(-1.0, 0.0);
    c[m] = Complex64::new(1.0, 0.0);
    let q = ComplexPolynomial::from_c64(&c);
    let grid: Vec<Complex64> = (-20..=20).flat_map(|a| (-20..=20).map(move |b| Complex64::new(a as f64 * 0.1, b as f64 * 0.1))).collect();
    let rep = &measures::potential_ordering_check(std::slice::from_ref(&q), &grid, &policy)?[0];
    let mu = measures::root_measure(&q, &policy)?;
    println!("\nz^{m} - 1: u(2) = {:.6}, u(0.5) = {:.2e}", measures::log_potential(&mu, Complex64::new(2.0, 0.0))?, measures::log_potential(&mu, Complex64::new(0.5, 0.0))?);
    println!("u' <= u + {:.3} on the grid: {} (max excess {:.3}, {} points outside the hull)", rep.slack, rep.ordered(), rep.max_excess, rep.points_outside);

    let pencil = Pencil::fig1();
    println!("\nfamily 3 deviation on |z| = 10:");
    for n in [15, 25, 40, 55] {
        let d = measures::branch_deviation(&pencil, 2, n, 10.0, 64, &policy)?;
        println!("  n = {n:>2}: {:.4e} (curve residual {:.1e})", d.deviation, d.curve_residual);
    }
    Ok(())
}
