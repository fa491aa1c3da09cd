//! The plane curve of the reference pencil: branch points, fibers and the
//! expansions of its branches at infinity.

use num_complex::Complex64;
use pencil_lab::curve::{self, PlaneCurve};
use pencil_lab::pencil::Pencil;
use pencil_lab::poly::PrecisionPolicy;

fn main() -> pencil_lab::Result<()> {
    let c = PlaneCurve::from_pencil(&Pencil::fig1());
    let policy = PrecisionPolicy::default();

    let bps = curve::branch_points(&c, &policy)?;
    println!("{} branch points", bps.len());
    for b in &bps {
        println!("  {b:.6}");
    }

    let z = Complex64::new(3.0, 1.0);
    let fiber = curve::branches_at(&c, z, &policy)?;
    println!("\nfiber over {z}:");
    for w in &fiber.values {
        println!("  {w:.8}");
    }

    for (j, xi) in c.xi_roots()?.iter().enumerate() {
        println!("xi_{} = {xi:.8}", j + 1);
    }
    // Far outside the branch points the series converge to the sheets.
    let z = Complex64::new(12.0, 5.0);
    let fiber = curve::branches_at(&c, z, &policy)?;
    for j in 0..c.k() {
        let s = curve::branch_series_at_infinity(&c, j, 6)?;
        let y = 1.0 / z;
        let value = s.coeffs.iter().rev().fold(Complex64::default(), |acc, e| acc * y + e);
        let nearest = fiber.values.iter().map(|w| (w - value).norm()).fold(f64::INFINITY, f64::min);
        println!("branch {}: series at z gives {value:.8}, {nearest:.1e} from the fiber", j + 1);
    }
    Ok(())
}
