//! Plot-ready CSV dumps of lattice fields and time series.
//!
//! Numbers are written in shortest round-trip scientific form, so loading a
//! dump gives back the exact `f64` values that were written. Lines starting
//! with `#` carry metadata; the first other line names the columns.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::lattice::{ComplexScalarField, GridSpec, RealVectorField};

/// Unit labels written into the header.
#[derive(Clone, Debug, PartialEq)]
pub struct DumpUnits {
    pub position: String,
    pub value: String,
}

impl DumpUnits {
    pub fn new(position: impl Into<String>, value: impl Into<String>) -> Self {
        Self { position: position.into(), value: value.into() }
    }
}

/// A parsed dump: metadata lines (without `#`), column names and rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub meta: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn grid_line(grid: &GridSpec) -> String {
    let axes: Vec<String> =
        grid.axes().iter().map(|a| format!("{}x{:e}/{:?}", a.points, a.extent, a.boundary).to_lowercase()).collect();
    format!("grid: dims={} axes={}", grid.dims(), axes.join(","))
}

fn position_columns(grid: &GridSpec) -> Vec<&'static str> {
    if grid.dims() == 1 {
        vec!["z"]
    } else {
        vec!["x", "y", "z"]
    }
}

fn position_values(grid: &GridSpec, j: usize) -> Vec<f64> {
    let r = grid.position(j);
    if grid.dims() == 1 {
        vec![r[2]]
    } else {
        r.to_vec()
    }
}

/// Writes a table with `meta` header lines.
pub fn write_table(
    path: &Path,
    meta: &[String],
    columns: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for m in meta {
        writeln!(w, "# {m}")?;
    }
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()
}

/// Columns `z, Ex, Ey, Ez` (or `x, y, z, ...` on 3D lattices) in lattice order.
pub fn dump_vector_field(field: &RealVectorField, label: &str, units: &DumpUnits, path: &Path) -> io::Result<()> {
    let grid = field.grid();
    let mut columns = position_columns(grid);
    let names = [format!("{label}x"), format!("{label}y"), format!("{label}z")];
    columns.extend(names.iter().map(String::as_str));
    let meta = vec![
        "spinfield vector field".to_string(),
        grid_line(grid),
        format!("units: position [{}], {label} [{}]", units.position, units.value),
    ];
    let rows = (0..grid.len()).map(|j| {
        let mut row = position_values(grid, j);
        row.extend(field.at(j));
        row
    });
    write_table(path, &meta, &columns, rows)
}

/// Columns `z, Re, Im` (or `x, y, z, Re, Im`) in lattice order.
pub fn dump_complex_field(field: &ComplexScalarField, units: &DumpUnits, path: &Path) -> io::Result<()> {
    let grid = field.grid();
    let mut columns = position_columns(grid);
    columns.extend(["Re", "Im"]);
    let meta = vec![
        "spinfield complex field".to_string(),
        grid_line(grid),
        format!("units: position [{}], value [{}]", units.position, units.value),
    ];
    let rows = field.values().iter().enumerate().map(|(j, v)| {
        let mut row = position_values(grid, j);
        row.extend([v.re, v.im]);
        row
    });
    write_table(path, &meta, &columns, rows)
}

/// Columns `t, Re, Im`.
pub fn dump_probe(times: &[f64], values: &[Complex64], time_unit: &str, path: &Path) -> io::Result<()> {
    let meta = vec!["spinfield probe series".to_string(), format!("units: t [{time_unit}]")];
    let rows = times.iter().zip(values).map(|(t, v)| vec![*t, v.re, v.im]);
    write_table(path, &meta, &["t", "Re", "Im"], rows)
}

/// Columns `omega, power`.
pub fn dump_spectrum(omega: &[f64], power: &[f64], frequency_unit: &str, path: &Path) -> io::Result<()> {
    let meta = vec!["spinfield power spectrum".to_string(), format!("units: omega [{frequency_unit}]")];
    let rows = omega.iter().zip(power).map(|(w, p)| vec![*w, *p]);
    write_table(path, &meta, &["omega", "power"], rows)
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn load_table(path: &Path) -> io::Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut meta = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(m) = line.strip_prefix('#') {
            meta.push(m.trim_start().to_string());
            continue;
        }
        match &columns {
            None => columns = Some(line.split(',').map(str::to_string).collect()),
            Some(cols) => {
                let row = line
                    .split(',')
                    .map(|c| c.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| invalid(format!("line {}: {e}", n + 1)))?;
                if row.len() != cols.len() {
                    return Err(invalid(format!("line {}: expected {} cells", n + 1, cols.len())));
                }
                rows.push(row);
            }
        }
    }
    let columns = columns.ok_or_else(|| invalid("missing column header".into()))?;
    Ok(Table { meta, columns, rows })
}
