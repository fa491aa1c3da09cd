//! Eigenvalues of the reference pencil split into families with
//! `lambda / n -> alpha_j`; one eigenpolynomial per family is solved and
//! checked against the operator.

use pencil_lab::pencil::{self, Pencil};
use pencil_lab::poly::PrecisionPolicy;

fn main() -> pencil_lab::Result<()> {
    let p = Pencil::fig1();
    let report = pencil::validate_general_type(&p, pencil::GENERAL_TYPE_TOL);
    println!("general type: {}", report.is_general());
    for (j, a) in report.alphas.iter().enumerate() {
        println!("alpha_{} = {:.6}", j + 1, a);
    }

    println!("\n   n  family  |lambda/n - alpha|");
    for n in [15, 25, 40, 55] {
        let set = pencil::spectral_eigenvalues(&p, n)?;
        for e in &set.eigenvalues {
            let gap = (e.lambda / n as f64 - report.alphas[e.family]).norm();
            println!("{n:>4} {:>7}  {gap:.4e}", e.family + 1);
        }
    }

    let policy = PrecisionPolicy::default();
    for m in pencil::solve_grid(&p, &[55], &[0, 1, 2], &policy)? {
        let s = &m.solution;
        println!(
            "\nfamily {}: lambda = {:.8}, residual {:.1e} at {} digits, max |root| {:.4}",
            m.family + 1,
            s.lambda,
            s.residual,
            s.digits,
            s.max_root_modulus()
        );
    }
    Ok(())
}
