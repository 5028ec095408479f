//! Plain-text run artifacts. Every number is written with `{:.8e}` so
//! reruns with the same seed produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::domain::DiscreteSpace;
use crate::elat::ElatReport;
use crate::Result;

pub fn num(x: f64) -> String {
    format!("{x:.8e}")
}

/// Writes a CSV file with the given header; cells are written verbatim.
pub fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Coordinate columns of a grid: `x` in 1D, `x,y` in 2D.
pub fn coord_header(space: &DiscreteSpace) -> Vec<&'static str> {
    if space.dim() == 1 {
        vec!["x"]
    } else {
        vec!["x", "y"]
    }
}

pub fn coord_cells(space: &DiscreteSpace, k: usize) -> Vec<String> {
    let (x, y) = space.coords(k);
    if space.dim() == 1 {
        vec![num(x)]
    } else {
        vec![num(x), num(y)]
    }
}

/// One row per candidate, in order of refined eigenvalue.
pub fn write_report_csv(path: &Path, report: &ElatReport) -> Result<()> {
    let header = [
        "re_mu",
        "im_mu",
        "alpha",
        "lambda_tilde",
        "delta",
        "tau",
        "residual",
        "accepted",
        "reason",
    ];
    let rows = report.outcomes.iter().map(|o| {
        let c = &report.candidates[o.candidate];
        vec![
            num(c.mu.re),
            num(c.mu.im),
            num(c.alpha),
            num(o.lambda),
            num(o.delta),
            num(o.tau),
            num(o.residual),
            o.accepted.to_string(),
            quote(&o.reason),
        ]
    });
    write_csv(path, &header, rows)
}

pub fn report_summary(report: &ElatReport) -> String {
    let p = &report.params;
    let mut out = String::new();
    let _ = writeln!(out, "backend      {}", p.backend);
    let _ = writeln!(out, "interval     [{}, {}]", num(p.a), num(p.b));
    let _ = writeln!(out, "shift s      {}", num(p.s));
    let _ = writeln!(out, "delta_star   {}", num(p.delta_star));
    let _ = writeln!(
        out,
        "sub-regions  {} ({} searched)",
        p.sub_regions, p.searched_regions
    );
    let _ = writeln!(out, "candidates   {}", report.candidates.len());
    if let Some(cert) = &report.certificate {
        let _ = writeln!(out, "certificate  {cert}");
        return out;
    }
    let _ = writeln!(out, "accepted     {}", report.accepted().count());
    for o in report.accepted() {
        let _ = writeln!(
            out,
            "  lambda {}  delta {}  residual {}",
            num(o.lambda),
            num(o.delta),
            num(o.residual)
        );
    }
    let _ = writeln!(out, "rejected     {}", report.rejected().count());
    for o in report.rejected() {
        let _ = writeln!(
            out,
            "  lambda {}  delta {}  ({})",
            num(o.lambda),
            num(o.delta),
            o.reason
        );
    }
    out
}

/// Grid vector as `x[,y],psi`.
pub fn write_grid_vector(path: &Path, space: &DiscreteSpace, psi: &[f64]) -> Result<()> {
    let mut header = coord_header(space);
    header.push("psi");
    let rows = psi.iter().enumerate().map(|(k, v)| {
        let mut row = coord_cells(space, k);
        row.push(num(*v));
        row
    });
    write_csv(path, &header, rows)
}

/// Sampled complex function as `x,re,im`.
pub fn write_samples(path: &Path, xs: &[f64], values: &[Complex64]) -> Result<()> {
    let rows = xs
        .iter()
        .zip(values)
        .map(|(x, z)| vec![num(*x), num(z.re), num(z.im)]);
    write_csv(path, &["x", "re_phi", "im_phi"], rows)
}

/// Landscape function and effective potential as `x[,y],u,W`.
pub fn write_landscape(path: &Path, space: &DiscreteSpace, u: &[f64]) -> Result<()> {
    let mut header = coord_header(space);
    header.extend(["u", "W"]);
    let rows = u.iter().enumerate().map(|(k, v)| {
        let mut row = coord_cells(space, k);
        row.push(num(*v));
        row.push(num(1.0 / v));
        row
    });
    write_csv(path, &header, rows)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}
