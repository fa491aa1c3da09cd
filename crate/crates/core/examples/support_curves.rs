//! Support curves: a level curve `H_i = H_j` traced through the densest
//! root cluster of `p_{55,1}` with its density compared against the roots,
//! and the circle of the three-line curve recovered from its Gamma locus.

use num_complex::Complex64;
use pencil_lab::measures::RootMeasure;
use pencil_lab::pencil::{self, Pencil};
use pencil_lab::poly::PrecisionPolicy;
use pencil_lab::support::{self, BranchField, Rect};

fn main() -> pencil_lab::Result<()> {
    let p = Pencil::fig1();
    let m = pencil::solve_family(&p, 55, 0, &PrecisionPolicy::default())?;
    let mu = RootMeasure::from_atoms(m.solution.roots.clone())?;
    let seed = support::densest_cluster_seed(&mu)?;
    let field = BranchField::for_family(&p, 0)?;
    let pair = support::select_pair(&field, &mu, &seed)?;
    let lc = support::trace_level_curve(&field, pair, seed.point, seed.spacing / 4.0, 15.0)?;
    let nn = support::nearest_distances(mu.atoms());
    let window = 10.0 * nn.iter().sum::<f64>() / nn.len() as f64;
    let d = support::density_vs_roots(&lc, &mu, window)?;
    println!("seed {:.5}, branches ({}, {})", seed.point, pair.0 + 1, pair.1 + 1);
    println!("{} vertices, length {:.3}, ends {:?}", lc.points.len(), lc.length(), lc.ends);
    println!("max tangent error {:.2e} rad", lc.tangent_errors().into_iter().fold(0.0, f64::max));
    println!("density ratio {:.3} +- {:.3}", d.mean_ratio, d.spread);

    let bs: Vec<Complex64> = (0..3).map(|i| Complex64::from_polar(2.0, 2.0 * std::f64::consts::PI * i as f64 / 3.0 + 0.3)).collect();
    let circle = support::example3_circle(bs[0], bs[1], bs[2])?;
    let field = BranchField::new(&support::example3_curve(&bs)?, Complex64::new(1.0, 0.0))?;
    let locus = support::gamma_locus(&field, (0, 1, 2), Rect::new(-2.6, -2.6, 2.6, 2.6)?, 0.02)?;
    let worst = locus.points.iter().map(|z| circle.distance(*z)).fold(0.0, f64::max);
    println!("\ncircle center {:.6}, radius {:.6}", circle.center, circle.radius);
    println!("{} locus points, farthest {worst:.2e} from the circle", locus.points.len());
    Ok(())
}
