//! The log-derivative of an eigenpolynomial at infinity computed two ways:
//! directly from its coefficients and from the recurrence seeded with
//! `epsilon_1 = n / lambda`. Also scans `Phi_0` along the recurrence.

use num_complex::Complex64;
use pencil_lab::pencil::{self, Pencil};
use pencil_lab::poly::PrecisionPolicy;
use pencil_lab::recurrence;
use pencil_lab::scalar::{MpComplex, Scalar};

fn main() -> pencil_lab::Result<()> {
    let p = Pencil::fig1();
    let n = 55;
    let m = pencil::solve_family(&p, n, 1, &PrecisionPolicy::default())?;
    let lam = m.solution.lambda_mp.clone();
    let e1 = MpComplex::lift(Complex64::new(n as f64, 0.0), lam.precision()) / lam.clone();

    let direct = recurrence::log_derivative_series(&m.solution.p_mp, &lam, 12)?;
    let rec = recurrence::solve_recurrence(&p, &lam, &e1, 12)?;
    println!(" i  epsilon_i                                 relative gap");
    for i in 1..=12 {
        let gap = (rec.coeffs[i].clone() - direct.coeffs[i].clone()).modulus() / direct.coeffs[i].modulus();
        println!("{i:>2}  {:<40.10}  {gap:.1e}", direct.coeffs[i].to_c64());
    }

    println!("\nepsilon_1 candidates: {:?}", recurrence::epsilon1_candidates(&p, &m.solution.lambda)?);
    println!("large-lambda threshold: {}", recurrence::large_lambda_threshold(&p));
    let scan = recurrence::phi0_sup_scan(&p, &lam, &e1, 40)?;
    println!("sup |Phi_0|^-1 (m/lambda)^r over m <= 40: {:.4} at m = {}, r = {}", scan.sup_value, scan.worst_m, scan.worst_r);
    println!("majorant radius for L = 2: {}", recurrence::majorant_radius(2.0));
    Ok(())
}
