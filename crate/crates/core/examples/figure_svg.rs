//! Writes the four root-cloud panels of the reference pencil as SVG, plus a
//! CSV of the branch points, into the directory given as the first argument.

use std::path::PathBuf;

use pencil_lab::curve::{self, PlaneCurve};
use pencil_lab::export::{self, Stamp, SvgPlot};
use pencil_lab::pencil::{self, Pencil};
use pencil_lab::poly::PrecisionPolicy;

fn main() -> pencil_lab::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fig1_out".into()));
    std::fs::create_dir_all(&out)?;
    let p = Pencil::fig1();
    let policy = PrecisionPolicy::default();
    let members = pencil::solve_grid(&p, &[55], &[0, 1, 2], &policy)?;
    let bps = curve::branch_points(&PlaneCurve::from_pencil(&p), &policy)?;
    let colors = ["#1f77b4", "#d62728", "#2ca02c"];

    let mut union = SvgPlot::new("union of roots, n = 55");
    for m in &members {
        let c = colors[m.family];
        SvgPlot::new(format!("family {}", m.family + 1))
            .points(&m.solution.roots, c, 0.004)
            .points(&bps, "black", 0.01)
            .write(&out.join(format!("family{}.svg", m.family + 1)))?;
        union = union.points(&m.solution.roots, c, 0.004);
    }
    union.points(&bps, "black", 0.01).note(format!("branch points: {}", bps.len())).write(&out.join("union.svg"))?;
    export::write_points(&out.join("branch_points.csv"), &Stamp::new(&p, policy.initial_digits), &bps)?;
    println!("wrote {}", out.display());
    Ok(())
}
