//! Potential exchange formats.
//!
//! Text format: `key = value` lines, `#` comments. Either a builtin,
//!
//! ```text
//! name = hedgehog
//! n = 3
//! param.m = 2
//! ```
//!
//! or a linear matrix table Φ(x) = M₀ + Σ_j M_j x_j,
//!
//! ```text
//! name = linear
//! n = 3
//! d = 2
//! gap_c = 1.0
//! gap_r = 1.0
//! matrix.0 = [[0, 0], [0, 0]]
//! matrix.1 = [[1, 2], [2, 1]]
//! matrix.2 = [[1, 2], [2, -1]]
//! matrix.3 = [[0, 1i], [-1i, 0]]
//! ```
//!
//! Binary grid format (little endian): header `n, d, count` as u64, then per
//! record `n` coordinates (f64) followed by the d×d matrix entries row-major
//! as (re, im) f64 pairs. Grid potentials evaluate by nearest sample.

use std::io::{Read, Write};
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use super::builtins::{builtin, linear_from_matrices, Params};
use super::Potential;
use crate::linalg::{self, ComplexMatrix};
use crate::{Error, Result};

/// Parses `a+bi` style complex scalars (also bare reals and `i`, `-i`).
fn parse_complex(s: &str) -> Result<Complex64> {
    let t = s.trim().replace(' ', "");
    if t.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    if let Ok(re) = t.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    if t.ends_with('i') || t.ends_with('I') {
        let body = &t[..t.len() - 1];
        // split into re and im at the last +/- that is not an exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                split = Some(k);
                break;
            }
        }
        let (re_str, im_str) = match split {
            Some(k) => (&body[..k], &body[k..]),
            None => ("0", body),
        };
        let im = match im_str {
            "" | "+" => 1.0,
            "-" => -1.0,
            other => other
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad complex literal `{s}`")))?,
        };
        let re = if re_str.is_empty() {
            0.0
        } else {
            re_str
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad complex literal `{s}`")))?
        };
        return Ok(Complex64::new(re, im));
    }
    Err(Error::Parse(format!("bad complex literal `{s}`")))
}

/// Parses `[[a, b], [c, d]]` into a square matrix.
fn parse_matrix(s: &str) -> Result<ComplexMatrix> {
    let t = s.trim();
    if !t.starts_with("[[") || !t.ends_with("]]") {
        return Err(Error::Parse(format!("matrix literal must look like [[...],[...]]: `{s}`")));
    }
    let inner = &t[2..t.len() - 2];
    let rows: Vec<&str> = inner
        .split("],")
        .map(|r| r.trim().trim_start_matches('[').trim())
        .collect();
    let mut entries = Vec::new();
    let mut ncols = None;
    for row in &rows {
        let cols: Vec<&str> = row.split(',').collect();
        match ncols {
            None => ncols = Some(cols.len()),
            Some(c) if c != cols.len() => {
                return Err(Error::Parse("ragged matrix literal".into()))
            }
            _ => {}
        }
        for c in cols {
            entries.push(parse_complex(c)?);
        }
    }
    let nrows = rows.len();
    let ncols = ncols.unwrap_or(0);
    if nrows != ncols {
        return Err(Error::Parse(format!("matrix literal must be square, got {nrows}x{ncols}")));
    }
    Ok(linalg::from_rows(nrows, ncols, &entries))
}

/// Parses the structured key-value potential description.
pub fn parse_potential_spec(text: &str) -> Result<Potential> {
    let mut kv: Vec<(String, String)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
        kv.push((k.trim().to_string(), v.trim().to_string()));
    }
    let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let name = get("name").ok_or_else(|| Error::Parse("missing `name`".into()))?;
    let n: usize = get("n")
        .map(|v| v.parse().map_err(|_| Error::Parse("bad `n`".into())))
        .transpose()?
        .unwrap_or(3);

    if name == "linear" {
        let mut mats = Vec::new();
        for j in 0..=n {
            let key = format!("matrix.{j}");
            let v = get(&key).ok_or_else(|| Error::Parse(format!("missing `{key}`")))?;
            mats.push(parse_matrix(v)?);
        }
        let mut p = linear_from_matrices(n, mats)?;
        if let Some(c) = get("gap_c") {
            p.gap_c = c.parse().map_err(|_| Error::Parse("bad `gap_c`".into()))?;
        }
        if let Some(r) = get("gap_r") {
            p.gap_radius = r.parse().map_err(|_| Error::Parse("bad `gap_r`".into()))?;
        }
        return Ok(p);
    }

    let mut params = Params::new();
    if let Some(v) = get("n") {
        params.insert("n".into(), v.into());
    }
    if let Some(v) = get("d") {
        params.insert("d".into(), v.into());
    }
    for (k, v) in &kv {
        if let Some(stripped) = k.strip_prefix("param.") {
            params.insert(stripped.to_string(), v.clone());
        }
    }
    builtin(name, &params)
}

/// Writes a potential sampled at `points` in the binary grid layout.
pub fn write_grid_potential<W: Write>(w: &mut W, p: &Potential, points: &[Vec<f64>]) -> Result<()> {
    w.write_u64::<LittleEndian>(p.n() as u64)?;
    w.write_u64::<LittleEndian>(p.d() as u64)?;
    w.write_u64::<LittleEndian>(points.len() as u64)?;
    for x in points {
        for &c in x {
            w.write_f64::<LittleEndian>(c)?;
        }
        let m = p.eval(x);
        for i in 0..p.d() {
            for j in 0..p.d() {
                w.write_f64::<LittleEndian>(m[(i, j)].re)?;
                w.write_f64::<LittleEndian>(m[(i, j)].im)?;
            }
        }
    }
    Ok(())
}

/// Reads a binary grid table into a nearest-sample potential.
pub fn read_grid_potential<R: Read>(r: &mut R) -> Result<Potential> {
    let n = r.read_u64::<LittleEndian>()? as usize;
    let d = r.read_u64::<LittleEndian>()? as usize;
    let count = r.read_u64::<LittleEndian>()? as usize;
    if n == 0 || d == 0 || count == 0 {
        return Err(Error::Parse("grid potential header with zero dimension or count".into()));
    }
    let mut points = Vec::with_capacity(count);
    let mut mats = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x = vec![0.0f64; n];
        for c in x.iter_mut() {
            *c = r.read_f64::<LittleEndian>()?;
        }
        let mut entries = Vec::with_capacity(d * d);
        for _ in 0..d * d {
            let re = r.read_f64::<LittleEndian>()?;
            let im = r.read_f64::<LittleEndian>()?;
            entries.push(Complex64::new(re, im));
        }
        points.push(x);
        mats.push(linalg::from_rows(d, d, &entries));
    }
    let points = Arc::new(points);
    let mats = Arc::new(mats);
    let eval = move |x: &[f64]| -> ComplexMatrix {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, pt) in points.iter().enumerate() {
            let dist: f64 = pt.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            if dist < best_d {
                best_d = dist;
                best = i;
            }
        }
        mats[best].clone()
    };
    Ok(Potential {
        n,
        d,
        eval: Arc::new(eval),
        derivative: None,
        gap_radius: f64::INFINITY,
        gap_c: 1.0,
        label: format!("grid({count} samples)"),
        generalized_witten: false,
    })
}
