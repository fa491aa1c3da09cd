use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use pencil_lab::battery::{Battery, BatteryConfig};
use pencil_lab::curve::{self, PlaneCurve};
use pencil_lab::export::{self, Stamp, SvgPlot};
use pencil_lab::measures::{self, RootMeasure};
use pencil_lab::pencil::{self, Pencil};
use pencil_lab::poly::PrecisionPolicy;
use pencil_lab::recurrence::{self, Phi0Scan};
use pencil_lab::scalar::{MpComplex, Scalar};
use pencil_lab::support::{self, BranchField, Rect};
use pencil_lab::Error;

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Parser)]
#[command(name = "pencil-lab", version, about = "Eigenpolynomials of exactly solvable operator pencils and their root asymptotics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Initial working precision in decimal digits.
    #[arg(long, global = true)]
    digits: Option<u32>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Test the general-type conditions and print the report as JSON.
    Check(PencilArg),
    /// Eigenvalues, eigenpolynomials and their roots.
    Eigen {
        #[command(flatten)]
        pencil: PencilArg,
        #[arg(long, value_delimiter = ',', default_value = "55")]
        n: Vec<usize>,
        /// 1-based family indices (default: all).
        #[arg(long, value_delimiter = ',')]
        family: Vec<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Root clouds per family and their union, with branch points.
    Fig1 {
        #[command(flatten)]
        pencil: PencilArg,
        #[arg(long, default_value_t = 55)]
        n: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Log-derivative, recurrence and branch series for one eigenpolynomial.
    Series {
        #[command(flatten)]
        pencil: PencilArg,
        #[arg(long, default_value_t = 55)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        family: usize,
        #[arg(long, default_value_t = 20)]
        order: usize,
        /// Circle radius for the branch deviation (default: twice the largest branch point).
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Level curve through the densest root cluster, density check, Gamma locus.
    Support {
        #[command(flatten)]
        pencil: PencilArg,
        #[arg(long, default_value_t = 55)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        family: usize,
        /// Rectangle x0,y0,x1,y1 for the Gamma locus of branches 1,2,3.
        #[arg(long, allow_hyphen_values = true)]
        rect: Option<Rect>,
        #[arg(long, default_value_t = 0.05)]
        res: f64,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the acceptance battery.
    Verify {
        #[command(flatten)]
        pencil: PencilArg,
        /// Multiplier applied to every tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
        /// Directory for verify.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PencilArg {
    /// Pencil JSON file (default: the reference pencil).
    #[arg(long)]
    pencil: Option<PathBuf>,
}

enum Fail {
    Domain(String),
    Usage(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => Fail::Usage(e.to_string()),
            _ => Fail::Domain(e.to_string()),
        }
    }
}

type Run = Result<(), Fail>;

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

/// Parses `args`, runs the command and returns the exit status.
fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut policy = PrecisionPolicy::default();
    if let Some(d) = cli.digits {
        policy.initial_digits = d.clamp(16, policy.max_digits);
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let r = pool.install(|| match cli.cmd {
        Cmd::Check(p) => check(&p),
        Cmd::Eigen { pencil, n, family, out } => eigen(&pencil, &n, &family, &out, &policy),
        Cmd::Fig1 { pencil, n, out } => fig1(&pencil, n, &out, &policy),
        Cmd::Series { pencil, n, family, order, radius, out } => series(&pencil, n, family, order, radius, &out, &policy),
        Cmd::Support { pencil, n, family, rect, res, out } => support_cmd(&pencil, n, family, rect, res, &out, &policy),
        Cmd::Verify { pencil, tol_scale, out } => verify(&pencil, tol_scale, out.as_deref(), policy),
    });
    match r {
        Ok(()) => 0,
        Err(Fail::Domain(m)) => {
            eprintln!("error: {m}");
            1
        }
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
    }
}

fn load(arg: &PencilArg) -> Result<Pencil, Fail> {
    match &arg.pencil {
        None => Ok(Pencil::fig1()),
        Some(path) => Pencil::from_json_file(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display()))),
    }
}

fn out_dir(dir: &Path) -> Result<(), Fail> {
    fs::create_dir_all(dir).map_err(|e| Fail::Usage(format!("{}: {e}", dir.display())))
}

fn io<T>(r: pencil_lab::Result<T>, path: &Path) -> Result<T, Fail> {
    r.map_err(|e| match e {
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => Fail::Usage(format!("{}: {e}", path.display())),
        e => Fail::Domain(e.to_string()),
    })
}

/// 1-based families from the command line, defaulting to all.
fn families(p: &Pencil, given: &[usize]) -> Result<Vec<usize>, Fail> {
    if given.is_empty() {
        return Ok((0..p.k()).collect());
    }
    given
        .iter()
        .map(|&j| {
            if j == 0 || j > p.k() {
                Err(Fail::Usage(format!("family {j} out of range 1..={}", p.k())))
            } else {
                Ok(j - 1)
            }
        })
        .collect()
}

fn require_general(p: &Pencil) -> Run {
    let r = pencil::validate_general_type(p, pencil::GENERAL_TYPE_TOL);
    if r.is_general() {
        Ok(())
    } else {
        Err(Fail::Domain(format!("pencil is not of general type: {}", serde_json::to_string(&r).unwrap_or_default())))
    }
}

fn check(arg: &PencilArg) -> Run {
    let p = load(arg)?;
    let r = pencil::validate_general_type(&p, pencil::GENERAL_TYPE_TOL);
    println!("{}", serde_json::to_string_pretty(&r).unwrap_or_default());
    if r.is_general() {
        Ok(())
    } else {
        Err(Fail::Domain("pencil is not of general type".into()))
    }
}

#[derive(Serialize)]
struct EigenRow {
    n: usize,
    family: usize,
    lambda: Option<Complex64>,
    alpha: Complex64,
    gap: Option<f64>,
    residual: Option<f64>,
    digits: Option<u32>,
    error: Option<String>,
}

fn eigen(arg: &PencilArg, ns: &[usize], fams: &[usize], out: &Path, policy: &PrecisionPolicy) -> Run {
    let p = load(arg)?;
    let fams = families(&p, fams)?;
    require_general(&p)?;
    out_dir(out)?;
    let alphas = pencil::validate_general_type(&p, pencil::GENERAL_TYPE_TOL).alphas;
    let jobs: Vec<(usize, usize)> = ns.iter().flat_map(|&n| fams.iter().map(move |&j| (n, j))).collect();
    let results: Vec<_> = jobs.par_iter().map(|&(n, j)| pencil::solve_family(&p, n, j, policy)).collect();

    let mut rows = Vec::new();
    println!("{:>4} {:>6} {:>28} {:>28} {:>10}", "n", "family", "lambda/n", "alpha", "|gap|");
    for (&(n, j), r) in jobs.iter().zip(&results) {
        let alpha = alphas[j];
        match r {
            Ok(m) => {
                let s = &m.solution;
                let stamp = Stamp::new(&p, s.digits).with_note(format!("n={n} family={}", j + 1));
                let tag = format!("n{n}_f{}", j + 1);
                let path = out.join(format!("roots_{tag}.csv"));
                io(export::write_points(&path, &stamp, &s.roots), &path)?;
                let path = out.join(format!("coeffs_{tag}.csv"));
                io(export::write_indexed(&path, &stamp, s.p.coeffs()), &path)?;
                let ratio = s.lambda / n.max(1) as f64;
                let gap = (ratio - alpha).norm();
                println!("{n:>4} {:>6} {:>28} {:>28} {gap:>10.3e}", j + 1, fmt_c(ratio), fmt_c(alpha));
                rows.push(EigenRow { n, family: j + 1, lambda: Some(s.lambda), alpha, gap: Some(gap), residual: Some(s.residual), digits: Some(s.digits), error: None });
            }
            Err(e) => {
                println!("{n:>4} {:>6} failed: {e}", j + 1);
                rows.push(EigenRow { n, family: j + 1, lambda: None, alpha, gap: None, residual: None, digits: None, error: Some(e.to_string()) });
            }
        }
    }
    let digits = rows.iter().filter_map(|r| r.digits).max().unwrap_or(policy.initial_digits);
    let path = out.join("eigen_summary.csv");
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    io(
        export::write_csv(
            &path,
            &Stamp::new(&p, digits),
            &["n", "family", "lambda_re", "lambda_im", "alpha_re", "alpha_im", "gap", "residual", "digits", "error"],
            rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    r.family.to_string(),
                    opt(r.lambda.map(|l| l.re)),
                    opt(r.lambda.map(|l| l.im)),
                    format!("{:e}", r.alpha.re),
                    format!("{:e}", r.alpha.im),
                    opt(r.gap),
                    opt(r.residual),
                    r.digits.map(|d| d.to_string()).unwrap_or_default(),
                    r.error.clone().unwrap_or_default(),
                ]
            }),
        ),
        &path,
    )?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        return Err(Fail::Domain(format!("{failed} of {} eigenpolynomials failed", rows.len())));
    }
    Ok(())
}

fn fmt_c(z: Complex64) -> String {
    format!("{:.6}{:+.6}i", z.re, z.im)
}

fn branch_points_of(p: &Pencil, policy: &PrecisionPolicy) -> pencil_lab::Result<Vec<Complex64>> {
    if p.k() < 2 {
        return Ok(Vec::new());
    }
    curve::branch_points(&PlaneCurve::from_pencil(p), policy)
}

fn fig1(arg: &PencilArg, n: usize, out: &Path, policy: &PrecisionPolicy) -> Run {
    let p = load(arg)?;
    require_general(&p)?;
    out_dir(out)?;
    let fams: Vec<usize> = (0..p.k()).collect();
    let members = pencil::solve_grid(&p, &[n], &fams, policy)?;
    let bps = branch_points_of(&p, policy)?;
    let note = format!("branch points: {}", bps.len());
    let mut union = SvgPlot::new(format!("roots of all {} eigenpolynomials, n = {n}", p.k()));
    for m in &members {
        let color = COLORS[m.family % COLORS.len()];
        let plot = SvgPlot::new(format!("family {}, n = {n}", m.family + 1))
            .points(&m.solution.roots, color, 0.004)
            .points(&bps, "black", 0.01)
            .note(note.clone());
        let path = out.join(format!("fig1_family{}.svg", m.family + 1));
        io(plot.write(&path), &path)?;
        union = union.points(&m.solution.roots, color, 0.004);
    }
    let path = out.join("fig1_union.svg");
    io(union.points(&bps, "black", 0.01).note(note.clone()).write(&path), &path)?;
    println!("{note}");
    Ok(())
}

#[derive(Serialize)]
struct SeriesReport {
    n: usize,
    family: usize,
    lambda: Complex64,
    order: usize,
    epsilon1_candidates: Vec<Complex64>,
    two_route_max_relative: f64,
    branch_gap: f64,
    phi0_scan: Phi0Scan,
    branch_deviation: measures::BranchDeviation,
}

fn series(arg: &PencilArg, n: usize, family: usize, order: usize, radius: Option<f64>, out: &Path, policy: &PrecisionPolicy) -> Run {
    let p = load(arg)?;
    let j = families(&p, &[family])?[0];
    require_general(&p)?;
    out_dir(out)?;
    let m = pencil::solve_family(&p, n, j, policy)?;
    let s = &m.solution;
    let lam = s.lambda_mp.clone();
    let e1 = MpComplex::lift(Complex64::new(n as f64, 0.0), lam.precision()) / lam.clone();
    let ld = recurrence::log_derivative_series(&s.p_mp, &lam, order)?;
    let rec = recurrence::solve_recurrence(&p, &lam, &e1, order)?;
    let c = PlaneCurve::from_pencil(&p);
    let branch = curve::branch_series_at_infinity(&c, j, order)?;
    let two_route = (1..=order)
        .map(|i| (rec.coeffs[i].clone() - ld.coeffs[i].clone()).modulus() / ld.coeffs[i].modulus().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    let ldc = ld.to_c64();
    let branch_gap = (1..=order).map(|i| (ldc.coeffs[i] - branch.coeffs[i]).norm()).fold(0.0, f64::max);
    let radius = match radius {
        Some(r) => r,
        None => 2.0 * branch_points_of(&p, policy)?.iter().map(|b| b.norm()).fold(0.0, f64::max).max(0.5),
    };
    let report = SeriesReport {
        n,
        family: j + 1,
        lambda: s.lambda,
        order,
        epsilon1_candidates: recurrence::epsilon1_candidates(&p, &s.lambda).unwrap_or_default(),
        two_route_max_relative: two_route,
        branch_gap,
        phi0_scan: recurrence::phi0_sup_scan(&p, &lam, &e1, order)?,
        branch_deviation: measures::branch_deviation_of(&p, j, m.alpha, s, radius, 64)?,
    };
    let stamp = Stamp::new(&p, s.digits).with_note(format!("n={n} family={}", j + 1));
    let tag = format!("n{n}_f{}", j + 1);
    for (name, ser) in [("logderiv", &ldc), ("recurrence", &rec.to_c64()), ("branch", &branch)] {
        let path = out.join(format!("series_{name}_{tag}.csv"));
        io(export::write_series(&path, &stamp, ser), &path)?;
    }
    let path = out.join(format!("series_{tag}.json"));
    io(export::write_json(&path, &report), &path)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    Ok(())
}

#[derive(Serialize)]
struct SupportReport {
    n: usize,
    family: usize,
    seed: support::ClusterSeed,
    pair: (usize, usize),
    vertices: usize,
    length: f64,
    max_tangent_error: f64,
    colocation: f64,
    density: Option<support::DensityReport>,
    gamma_points: Option<usize>,
}

fn support_cmd(arg: &PencilArg, n: usize, family: usize, rect: Option<Rect>, res: f64, out: &Path, policy: &PrecisionPolicy) -> Run {
    let p = load(arg)?;
    let j = families(&p, &[family])?[0];
    if !(res > 0.0) {
        return Err(Fail::Usage("--res must be positive".into()));
    }
    require_general(&p)?;
    out_dir(out)?;
    let m = pencil::solve_family(&p, n, j, policy)?;
    let mu = RootMeasure::from_atoms(m.solution.roots.clone())?;
    let seed = support::densest_cluster_seed(&mu)?;
    let field = BranchField::for_family(&p, j)?;
    let pair = support::select_pair(&field, &mu, &seed)?;
    let lc = support::trace_level_curve(&field, pair, seed.point, seed.spacing / 4.0, 15.0)?;
    let nn = support::nearest_distances(mu.atoms());
    let window = 10.0 * nn.iter().sum::<f64>() / nn.len() as f64;
    let near: Vec<Complex64> = mu.atoms().iter().copied().filter(|a| (a - seed.point).norm() <= 5.0 * seed.spacing).collect();
    let bps = branch_points_of(&p, policy)?;

    let stamp = Stamp::new(&p, m.solution.digits).with_note(format!("n={n} family={}", j + 1));
    let tag = format!("n{n}_f{}", j + 1);
    let path = out.join(format!("atoms_{tag}.csv"));
    io(export::write_atoms(&path, &stamp, mu.atoms()), &path)?;
    let path = out.join(format!("level_{tag}.csv"));
    io(export::write_level_curve(&path, &stamp, &lc), &path)?;
    let path = out.join("branch_points.csv");
    io(export::write_points(&path, &stamp, &bps), &path)?;

    let mut plot = SvgPlot::new(format!("level curve H{} = H{}, family {}, n = {n}", pair.0 + 1, pair.1 + 1, j + 1))
        .points(mu.atoms(), COLORS[j % COLORS.len()], 0.004)
        .polyline(&lc.points, "black")
        .points(&bps, "black", 0.01);
    let mut gamma_points = None;
    if let Some(rect) = rect {
        let locus = support::gamma_locus(&field, (0, 1, 2), rect, res)?;
        let path = out.join(format!("gamma_{tag}.csv"));
        io(export::write_segments(&path, &stamp, &locus.segments), &path)?;
        for (a, b) in &locus.segments {
            plot = plot.polyline(&[*a, *b], "#888888");
        }
        gamma_points = Some(locus.points.len());
    }
    let path = out.join(format!("support_{tag}.svg"));
    io(plot.write(&path), &path)?;

    let report = SupportReport {
        n,
        family: j + 1,
        seed,
        pair: (pair.0 + 1, pair.1 + 1),
        vertices: lc.points.len(),
        length: lc.length(),
        max_tangent_error: lc.tangent_errors().into_iter().fold(0.0, f64::max),
        colocation: support::colocation(&lc, &near, 3.0 * seed.spacing),
        density: support::density_vs_roots(&lc, &mu, window).ok(),
        gamma_points,
    };
    let path = out.join(format!("support_{tag}.json"));
    io(export::write_json(&path, &report), &path)?;
    println!("seed {} (spacing {:.4e}), pair ({}, {})", fmt_c(report.seed.point), report.seed.spacing, report.pair.0, report.pair.1);
    println!("level curve: {} vertices, length {:.4}, max tangent error {:.2e} rad", report.vertices, report.length, report.max_tangent_error);
    println!("co-location with nearby roots: {:.3}", report.colocation);
    match &report.density {
        Some(d) => println!("density ratio: mean {:.4}, spread {:.4}, window {:.4}", d.mean_ratio, d.spread, d.window),
        None => println!("density ratio: no window holds enough roots"),
    }
    if let Some(g) = report.gamma_points {
        println!("gamma locus: {g} points");
    }
    Ok(())
}

fn verify(arg: &PencilArg, tol_scale: f64, out: Option<&Path>, policy: PrecisionPolicy) -> Run {
    let p = load(arg)?;
    if let Some(dir) = out {
        out_dir(dir)?;
    }
    let mut cfg = BatteryConfig::for_pencil(p).with_tolerance_scale(tol_scale);
    cfg.policy = policy;
    let battery = Battery::new(cfg);
    let mut outcomes = Vec::new();
    for id in 1..=12 {
        let o = battery.run(id);
        println!("{}", o.line());
        outcomes.push(o);
    }
    if let Some(dir) = out {
        let path = dir.join("verify.json");
        io(export::write_json(&path, &outcomes), &path)?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        return Err(Fail::Domain(format!("{failed} criteria failed")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmd(args: &[&str]) -> u8 {
        run(std::iter::once("pencil-lab").chain(args.iter().copied()))
    }

    fn s(p: &Path) -> &str {
        p.to_str().unwrap()
    }

    #[test]
    fn check_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(cmd(&["check"]), 0);
        let no_const = dir.path().join("a.json");
        fs::write(&no_const, r#"{"k":1,"Q":[[[0,0]],[[0,0],[1,0]]]}"#).unwrap();
        assert_eq!(cmd(&["check", "--pencil", s(&no_const)]), 1);
        let broken = dir.path().join("b.json");
        fs::write(&broken, "{\"k\":1,").unwrap();
        assert_eq!(cmd(&["check", "--pencil", s(&broken)]), 2);
        assert_eq!(cmd(&["check", "--pencil", s(&dir.path().join("missing.json"))]), 2);
        assert_eq!(cmd(&["nonsense"]), 2);
    }

    #[test]
    fn eigen_writes_root_files_deterministically() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        assert_eq!(cmd(&["eigen", "--n", "55", "--out", s(&a)]), 0);
        assert_eq!(cmd(&["--jobs", "1", "eigen", "--n", "55", "--out", s(&b)]), 0);
        for j in 1..=3 {
            let name = format!("roots_n55_f{j}.csv");
            let text = fs::read_to_string(a.join(&name)).unwrap();
            assert_eq!(text.lines().count(), 2 + 55);
            assert_eq!(text, fs::read_to_string(b.join(&name)).unwrap());
        }
        assert_eq!(fs::read(a.join("eigen_summary.csv")).unwrap(), fs::read(b.join("eigen_summary.csv")).unwrap());
        assert_eq!(cmd(&["eigen", "--family", "4", "--out", s(&a)]), 2);
    }

    #[test]
    fn eigen_first_order_pencil() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("k1.json");
        fs::write(&p, r#"{"k":1,"Q":[[[-1,0]],[[0,0],[1,0]]]}"#).unwrap();
        assert_eq!(cmd(&["eigen", "--pencil", s(&p), "--n", "5", "--out", s(dir.path())]), 0);
        let summary = fs::read_to_string(dir.path().join("eigen_summary.csv")).unwrap();
        let row: Vec<&str> = summary.lines().nth(2).unwrap().split(',').collect();
        assert_eq!(row[2].parse::<f64>().unwrap(), 5.0);
        let roots = fs::read_to_string(dir.path().join("roots_n5_f1.csv")).unwrap();
        assert!(roots.lines().skip(2).all(|l| l == "0e0,0e0"));
        assert_eq!(cmd(&["fig1", "--pencil", s(&p), "--n", "5", "--out", s(dir.path())]), 0);
        assert!(fs::read_to_string(dir.path().join("fig1_union.svg")).unwrap().contains("branch points: 0"));
    }

    #[test]
    fn fig1_panels_and_unwritable_output() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(cmd(&["fig1", "--out", s(dir.path())]), 0);
        for name in ["fig1_family1.svg", "fig1_family2.svg", "fig1_family3.svg", "fig1_union.svg"] {
            let svg = fs::read_to_string(dir.path().join(name)).unwrap();
            assert!(svg.contains("branch points: 6"));
        }
        let file = dir.path().join("plain");
        fs::write(&file, "").unwrap();
        assert_eq!(cmd(&["fig1", "--out", s(&file.join("sub"))]), 2);
    }

    #[test]
    fn series_and_support_outputs() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(cmd(&["series", "--family", "2", "--order", "12", "--radius", "10", "--out", s(dir.path())]), 0);
        let ld = fs::read_to_string(dir.path().join("series_logderiv_n55_f2.csv")).unwrap();
        assert!(ld.lines().next().unwrap().ends_with("origin=log_derivative"));
        assert_eq!(ld.lines().count(), 2 + 13);
        assert_eq!(cmd(&["support", "--out", s(dir.path())]), 0);
        assert!(dir.path().join("level_n55_f1.csv").exists());
        // The rectangle contains a branch point.
        assert_eq!(cmd(&["support", "--rect", "-1,-1,1,1", "--out", s(dir.path())]), 1);
        assert_eq!(cmd(&["support", "--rect", "1,2", "--out", s(dir.path())]), 2);
    }

    #[test]
    fn verify_reports_failures_under_sabotage() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(cmd(&["verify", "--pencil", s(&dir.path().join("missing.json"))]), 2);
        assert_eq!(cmd(&["verify", "--tol-scale", "1e-30", "--out", s(dir.path())]), 1);
        let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
        let items = report.as_array().unwrap();
        assert_eq!(items.len(), 12);
        assert!(items.iter().any(|o| o["passed"] == false));
    }
}
