//! CSV, JSON and SVG output.
//!
//! Every CSV starts with a `#` comment line naming the pencil hash, the tool
//! version and the digit count in effect, followed by a header row.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::pencil::Pencil;
use crate::series::TruncatedSeries;
use crate::support::LevelCurve;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance written at the top of every CSV.
#[derive(Clone, Debug)]
pub struct Stamp {
    pub pencil_hash: String,
    pub digits: u32,
    pub note: String,
}

impl Stamp {
    pub fn new(p: &Pencil, digits: u32) -> Self {
        Stamp { pencil_hash: p.hash_hex(), digits, note: String::new() }
    }

    /// Appends `note` to the comment line.
    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        if !self.note.is_empty() {
            self.note.push(' ');
        }
        self.note.push_str(&note.into());
        self
    }

    fn line(&self) -> String {
        let mut s = format!("# pencil={} pencil-lab={} digits={}", self.pencil_hash, TOOL_VERSION, self.digits);
        if !self.note.is_empty() {
            s.push(' ');
            s.push_str(&self.note);
        }
        s
    }
}

/// Writes `rows` under `header` with the stamp line first.
pub fn write_csv(path: &Path, stamp: &Stamp, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", stamp.line())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_points(path: &Path, stamp: &Stamp, points: &[Complex64]) -> Result<()> {
    write_csv(path, stamp, &["re", "im"], points.iter().map(|z| vec![num(z.re), num(z.im)]))
}

pub fn write_indexed(path: &Path, stamp: &Stamp, values: &[Complex64]) -> Result<()> {
    write_csv(
        path,
        stamp,
        &["index", "re", "im"],
        values.iter().enumerate().map(|(i, z)| vec![i.to_string(), num(z.re), num(z.im)]),
    )
}

pub fn write_series(path: &Path, stamp: &Stamp, s: &TruncatedSeries) -> Result<()> {
    let stamp = stamp.clone().with_note(format!("origin={}", s.origin.tag()));
    write_indexed(path, &stamp, &s.coeffs)
}

pub fn write_atoms(path: &Path, stamp: &Stamp, atoms: &[Complex64]) -> Result<()> {
    let w = 1.0 / atoms.len().max(1) as f64;
    write_csv(path, stamp, &["re", "im", "weight"], atoms.iter().map(|z| vec![num(z.re), num(z.im), num(w)]))
}

pub fn write_level_curve(path: &Path, stamp: &Stamp, lc: &LevelCurve) -> Result<()> {
    let stamp = stamp.clone().with_note(format!("pair={},{}", lc.pair.0 + 1, lc.pair.1 + 1));
    write_csv(
        path,
        &stamp,
        &["index", "re", "im", "density", "level"],
        lc.points
            .iter()
            .enumerate()
            .map(|(i, z)| vec![i.to_string(), num(z.re), num(z.im), num(lc.densities[i]), num(lc.levels[i])]),
    )
}

pub fn write_segments(path: &Path, stamp: &Stamp, segs: &[(Complex64, Complex64)]) -> Result<()> {
    write_csv(
        path,
        stamp,
        &["re0", "im0", "re1", "im1"],
        segs.iter().map(|(a, b)| vec![num(a.re), num(a.im), num(b.re), num(b.im)]),
    )
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

/// Minimal SVG plot: point clouds, emphasized points and polylines in data
/// coordinates, with the view box fitted to the data plus a 10% margin.
#[derive(Clone, Debug, Default)]
pub struct SvgPlot {
    title: String,
    layers: Vec<Layer>,
    notes: Vec<String>,
}

#[derive(Clone, Debug)]
enum Layer {
    Points { pts: Vec<Complex64>, color: String, radius: f64 },
    Line { pts: Vec<Complex64>, color: String },
}

impl SvgPlot {
    pub fn new(title: impl Into<String>) -> Self {
        SvgPlot { title: title.into(), ..Default::default() }
    }

    /// `radius` is in units of the view box diagonal.
    pub fn points(mut self, pts: &[Complex64], color: &str, radius: f64) -> Self {
        self.layers.push(Layer::Points { pts: pts.to_vec(), color: color.into(), radius });
        self
    }

    pub fn polyline(mut self, pts: &[Complex64], color: &str) -> Self {
        self.layers.push(Layer::Line { pts: pts.to_vec(), color: color.into() });
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    fn extent(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for l in &self.layers {
            let pts = match l {
                Layer::Points { pts, .. } | Layer::Line { pts, .. } => pts,
            };
            for z in pts.iter().filter(|z| z.re.is_finite() && z.im.is_finite()) {
                b = (b.0.min(z.re), b.1.min(z.im), b.2.max(z.re), b.3.max(z.im));
            }
        }
        if !b.0.is_finite() {
            return (-1.0, -1.0, 1.0, 1.0);
        }
        let w = (b.2 - b.0).max(1e-9);
        let h = (b.3 - b.1).max(1e-9);
        let side = w.max(h);
        let (cx, cy) = (0.5 * (b.0 + b.2), 0.5 * (b.1 + b.3));
        let half = 0.5 * side * 1.1 + 1e-3;
        (cx - half, cy - half, cx + half, cy + half)
    }

    pub fn render(&self) -> String {
        let (x0, y0, x1, y1) = self.extent();
        let size = x1 - x0;
        // Flip y so the imaginary axis points up.
        let px = |z: &Complex64| (z.re, y1 + y0 - z.im);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0} {y0} {size} {size}" width="600" height="600">"#
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(s, r#"<rect x="{x0}" y="{y0}" width="{size}" height="{size}" fill="white"/>"#);
        for l in &self.layers {
            match l {
                Layer::Points { pts, color, radius } => {
                    let _ = writeln!(s, r#"<g fill="{color}">"#);
                    for z in pts {
                        let (x, y) = px(z);
                        let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="{}"/>"#, radius * size);
                    }
                    let _ = writeln!(s, "</g>");
                }
                Layer::Line { pts, color } => {
                    let coords: Vec<String> = pts.iter().map(|z| {
                        let (x, y) = px(z);
                        format!("{x},{y}")
                    }).collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="{}" points="{}"/>"#,
                        0.002 * size,
                        coords.join(" ")
                    );
                }
            }
        }
        for (i, n) in self.notes.iter().enumerate() {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" font-size="{}" font-family="sans-serif">{}</text>"#,
                x0 + 0.02 * size,
                y0 + (0.05 + 0.04 * i as f64) * size,
                0.03 * size,
                escape(n)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render())?;
        Ok(())
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_stamp_and_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let stamp = Stamp::new(&Pencil::fig1(), 16);
        write_points(&path, &stamp, &[Complex64::new(1.5, -2.0)]).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# pencil="));
        assert!(lines[0].contains("digits=16"));
        assert_eq!(lines[1], "re,im");
        assert_eq!(lines[2], "1.5e0,-2e0");
    }

    #[test]
    fn svg_is_deterministic_and_contains_points() {
        let plot = SvgPlot::new("t").points(&[Complex64::new(0.0, 0.0), Complex64::new(1.0, 2.0)], "black", 0.004).note("two points");
        let a = plot.render();
        assert_eq!(a, plot.render());
        assert_eq!(a.matches("<circle").count(), 2);
        assert!(a.contains("two points"));
    }
}
