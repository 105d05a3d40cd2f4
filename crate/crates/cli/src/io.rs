//! Self-describing text format for matrices and vectors, plus CSV helpers.
//!
//! The matrix format is one header line `<rows> <cols> <complex|real>`
//! followed by `rows·cols` lines in row-major order, `re im` per line for
//! complex data and a single value for real data. Values are written with
//! Rust's shortest round-trip formatting, so files are diffable and re-read
//! bit-exactly.

use anyhow::{bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::fs;
use std::io::Write;
use std::path::Path;

pub fn write_complex_matrix(path: &Path, m: &DMatrix<Complex64>) -> Result<()> {
    let mut out = String::with_capacity(24 * m.len() + 32);
    out.push_str(&format!("{} {} complex\n", m.nrows(), m.ncols()));
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.push_str(&format!("{} {}\n", z.re, z.im));
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_complex_vector(path: &Path, v: &DVector<Complex64>) -> Result<()> {
    write_complex_matrix(path, &DMatrix::from_column_slice(v.len(), 1, v.as_slice()))
}

pub fn write_real_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut out = String::with_capacity(12 * m.len() + 32);
    out.push_str(&format!("{} {} real\n", m.nrows(), m.ncols()));
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.push_str(&format!("{}\n", m[(r, c)]));
        }
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn write_real_vector(path: &Path, v: &[f64]) -> Result<()> {
    write_real_matrix(path, &DMatrix::from_column_slice(v.len(), 1, v))
}

fn read_header(line: &str, path: &Path) -> Result<(usize, usize, bool)> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 3 {
        bail!("{}: malformed header '{line}'", path.display());
    }
    let rows: usize = parts[0].parse().context("header rows")?;
    let cols: usize = parts[1].parse().context("header cols")?;
    let complex = match parts[2] {
        "complex" => true,
        "real" => false,
        other => bail!("{}: unknown element kind '{other}'", path.display()),
    };
    Ok((rows, cols, complex))
}

pub fn read_complex_matrix(path: &Path) -> Result<DMatrix<Complex64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    let header = lines.next().with_context(|| format!("{}: empty file", path.display()))?;
    let (rows, cols, complex) = read_header(header, path)?;
    let mut data = Vec::with_capacity(rows * cols);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let re: f64 = it
            .next()
            .with_context(|| format!("{}: entry {i} missing", path.display()))?
            .parse()
            .with_context(|| format!("{}: entry {i}", path.display()))?;
        let im: f64 = if complex {
            it.next()
                .with_context(|| format!("{}: entry {i} missing imag part", path.display()))?
                .parse()
                .with_context(|| format!("{}: entry {i}", path.display()))?
        } else {
            0.0
        };
        data.push(Complex64::new(re, im));
    }
    if data.len() != rows * cols {
        bail!(
            "{}: expected {} entries, found {}",
            path.display(),
            rows * cols,
            data.len()
        );
    }
    Ok(DMatrix::from_fn(rows, cols, |r, c| data[r * cols + c]))
}

pub fn read_complex_vector(path: &Path) -> Result<DVector<Complex64>> {
    let m = read_complex_matrix(path)?;
    if m.ncols() != 1 {
        bail!("{}: expected a column vector, got {}x{}", path.display(), m.nrows(), m.ncols());
    }
    Ok(DVector::from_column_slice(m.as_slice()))
}

pub fn read_real_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_complex_matrix(path)?;
    if m.ncols() != 1 {
        bail!("{}: expected a column vector, got {}x{}", path.display(), m.nrows(), m.ncols());
    }
    Ok(m.iter().map(|z| z.re).collect())
}

/// CSV writer that puts a `# schema: <tag>` comment in row 1 and a header
/// row after it.
pub struct CsvWriter {
    file: fs::File,
}

impl CsvWriter {
    pub fn create(path: &Path, schema: &str, header: &str) -> Result<Self> {
        let mut file =
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        writeln!(file, "# schema: {schema}")?;
        writeln!(file, "{header}")?;
        Ok(Self { file })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        writeln!(self.file, "{}", fields.join(","))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        let m = DMatrix::from_fn(3, 2, |r, c| {
            Complex64::new(
                (r as f64 + 0.1) / 3.0,
                -(c as f64) * std::f64::consts::PI,
            )
        });
        write_complex_matrix(&path, &m).unwrap();
        let back = read_complex_matrix(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn real_vector_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        let v = vec![0.1, -2.5e-17, 3.0];
        write_real_vector(&path, &v).unwrap();
        assert_eq!(read_real_vector(&path).unwrap(), v);
    }
}
