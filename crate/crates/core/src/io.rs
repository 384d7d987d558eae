//! File formats: field CSV (`x,y,re,im`), grid records, tabulated
//! superpotential samples and Goursat kernel dumps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ComplexField, ScalarField};
use crate::grid::{Grid1D, Grid2D, GridSpec};
use crate::scalar::Real;
use crate::superpotential::Superpotential;

const NODE_TOL: f64 = 1e-9;

fn fmt<T: Real>(v: T) -> String {
    format!("{:.16e}", v.to_f64_lossy())
}

fn check_header(rdr: &mut csv::Reader<File>, want: &[&str], path: &Path) -> Result<()> {
    let got: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if got != want {
        return Err(Error::Parse(format!(
            "{}: header {:?}, expected {:?}",
            path.display(),
            got,
            want
        )));
    }
    Ok(())
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    check_header(&mut rdr, header, path)?;
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{}: row {}: `{s}`: {e}", path.display(), line + 2)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Parse(format!(
                "{}: row {} has {} columns",
                path.display(),
                line + 2,
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_field_csv<T: Real>(path: &Path, f: &ComplexField<T>) -> Result<()> {
    let g = f.grid();
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,y,re,im")?;
    for iy in 0..g.ny() {
        for ix in 0..g.nx() {
            let (x, y) = g.coords(ix, iy);
            let v = f.at(ix, iy);
            writeln!(w, "{},{},{},{}", fmt(x), fmt(y), fmt(v.re), fmt(v.im))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_real_field_csv<T: Real>(path: &Path, f: &ScalarField<T>) -> Result<()> {
    write_field_csv(path, &f.to_complex())
}

fn axis_from_nodes(mut nodes: Vec<f64>, what: &str) -> Result<(f64, usize)> {
    nodes.sort_by(|a, b| a.total_cmp(b));
    nodes.dedup_by(|a, b| (*a - *b).abs() <= NODE_TOL * (1.0 + b.abs()));
    let n = nodes.len();
    let a = nodes[n - 1];
    if n < 3 || (nodes[0] + a).abs() > NODE_TOL * (1.0 + a) {
        return Err(Error::Grid(format!("{what} nodes are not a symmetric grid")));
    }
    Ok((a, n))
}

/// Reads a field written by [`write_field_csv`]; the grid is inferred from
/// the node coordinates and checked against them.
pub fn read_field_csv<T: Real>(path: &Path) -> Result<ComplexField<T>> {
    let rows = read_rows(path, &["x", "y", "re", "im"])?;
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: no data rows", path.display())));
    }
    let (a1, n1) = axis_from_nodes(rows.iter().map(|r| r[0]).collect(), "x")?;
    let (a2, n2) = axis_from_nodes(rows.iter().map(|r| r[1]).collect(), "y")?;
    let grid = Grid2D::<T>::new(T::lit(a1), n1, T::lit(a2), n2)?;
    if rows.len() != grid.len() {
        return Err(Error::Shape(format!(
            "{}: {} rows for a {n1}x{n2} grid",
            path.display(),
            rows.len()
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (k, r) in rows.iter().enumerate() {
        let (ix, iy) = (k % n1, k / n1);
        let (x, y) = grid.coords(ix, iy);
        let off = (x.to_f64_lossy() - r[0]).abs().max((y.to_f64_lossy() - r[1]).abs());
        if off > NODE_TOL * (1.0 + a1.max(a2)) {
            return Err(Error::Grid(format!(
                "{}: row {} at ({}, {}) is not node ({ix}, {iy}) in row-major order",
                path.display(),
                k + 2,
                r[0],
                r[1]
            )));
        }
        values.push(Complex::new(T::lit(r[2]), T::lit(r[3])));
    }
    ComplexField::from_values(grid, values)
}

pub fn write_grid_json<T: Real>(path: &Path, grid: &Grid2D<T>) -> Result<()> {
    write_json(path, &grid.spec())
}

pub fn read_grid_json<T: Real>(path: &Path) -> Result<Grid2D<T>> {
    let spec: GridSpec = serde_json::from_reader(File::open(path)?)?;
    Grid2D::from_spec(&spec)
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_axis_samples<T: Real>(path: &Path, header: [&str; 2], grid: &Grid1D<T>) -> Result<Vec<T>> {
    let rows = read_rows(path, &header)?;
    if rows.len() != grid.len() {
        return Err(Error::Shape(format!(
            "{}: {} samples for a {}-node axis",
            path.display(),
            rows.len(),
            grid.len()
        )));
    }
    let tol = NODE_TOL * (1.0 + grid.half_width().to_f64_lossy());
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            if (grid.node(i).to_f64_lossy() - r[0]).abs() > tol {
                return Err(Error::Grid(format!(
                    "{}: row {} at {} is not axis node {i}",
                    path.display(),
                    i + 2,
                    r[0]
                )));
            }
            Ok(T::lit(r[1]))
        })
        .collect()
}

/// Tabulated superpotential from `x,chi1` and `y,chi2` files on the grid nodes.
pub fn read_tabulated<T: Real>(x_path: &Path, y_path: &Path, grid: Grid2D<T>) -> Result<Superpotential<T>> {
    let chi1 = read_axis_samples(x_path, ["x", "chi1"], &grid.gx)?;
    let chi2 = read_axis_samples(y_path, ["y", "chi2"], &grid.gy)?;
    Superpotential::tabulated(grid, chi1, chi2)
}

pub fn write_tabulated<T: Real>(x_path: &Path, y_path: &Path, sp: &Superpotential<T>) -> Result<()> {
    for (path, j, head) in [(x_path, 1, "x,chi1"), (y_path, 2, "y,chi2")] {
        let prof = sp.axis(j);
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{head}")?;
        for (s, c) in prof.grid().nodes().iter().zip(prof.chi()) {
            writeln!(w, "{},{}", fmt(*s), fmt(*c))?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Triangular kernel dump `x,t,K`.
pub fn write_kernel_csv<T: Real>(path: &Path, triangle: &[(T, T, T)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x,t,K")?;
    for (x, t, k) in triangle {
        writeln!(w, "{},{},{}", fmt(*x), fmt(*t), fmt(*k))?;
    }
    w.flush()?;
    Ok(())
}
