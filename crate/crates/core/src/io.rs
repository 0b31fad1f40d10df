//! JSON system and family files.
//!
//! Matrices are nested arrays of rows. An entry is a bare number (real) or
//! a two-element array `[re, im]`. A matrix with zero columns may be
//! written either as `[]` or as a list of empty rows; one with zero rows is
//! always `[]`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::{Channel, FixedSpectrumReport, MultiChannelSystem};
use crate::grank::{FamilyMember, MatrixFamily, VectorPairFamily};
use crate::linalg::ComplexMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> Complex64 {
        match self {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

type RawMatrix = Vec<Vec<Entry>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "A")]
    a: RawMatrix,
    channels: Vec<RawChannel>,
    tolerance: Option<f64>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    #[serde(rename = "B")]
    b: RawMatrix,
    #[serde(rename = "C")]
    c: RawMatrix,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    n1: Option<usize>,
    n2: Option<usize>,
    pairs: Option<Vec<RawPair>>,
    members: Option<Vec<RawMember>>,
    #[serde(rename = "M")]
    m: Option<RawMatrix>,
    tolerance: Option<f64>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    w: Vec<Entry>,
    r: Vec<Entry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMember {
    #[serde(rename = "W")]
    w: RawMatrix,
    #[serde(rename = "R")]
    r: RawMatrix,
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn check_entry(field: &str, row: usize, col: usize, z: Complex64) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format_err(format!(
            "{field}: row {} entry {} is not finite",
            row + 1,
            col + 1
        )))
    }
}

/// Converts nested rows, checking them against the expected shape. An empty
/// list with an expected width of zero yields `expect_rows x 0`.
fn to_matrix(
    raw: &RawMatrix,
    field: &str,
    expect_rows: Option<usize>,
    expect_cols: Option<usize>,
) -> Result<ComplexMatrix> {
    let rows = raw.len();
    if let Some(r) = expect_rows {
        // `[]` stands for a zero-width matrix with the expected row count.
        if rows == 0 && expect_cols == Some(0) {
            return Ok(ComplexMatrix::zeros(r, 0));
        }
        if rows != r {
            return Err(format_err(format!("{field}: expected {r} rows, found {rows}")));
        }
    }
    if rows == 0 {
        return Ok(ComplexMatrix::zeros(0, expect_cols.unwrap_or(0)));
    }
    let cols = raw[0].len();
    if let Some(c) = expect_cols {
        if cols != c {
            return Err(format_err(format!("{field}: row 1 has {cols} entries, expected {c}")));
        }
    }
    let mut entries = Vec::with_capacity(rows * cols);
    for (i, row) in raw.iter().enumerate() {
        if row.len() != cols {
            return Err(format_err(format!(
                "{field}: row {} has {} entries, expected {cols}",
                i + 1,
                row.len()
            )));
        }
        for (j, e) in row.iter().enumerate() {
            entries.push(check_entry(field, i, j, e.value())?);
        }
    }
    ComplexMatrix::from_row_major(rows, cols, entries)
}

fn to_vector(raw: &[Entry], field: &str, expect_len: usize) -> Result<Vec<Complex64>> {
    if raw.len() != expect_len {
        return Err(format_err(format!(
            "{field}: expected {expect_len} entries, found {}",
            raw.len()
        )));
    }
    raw.iter()
        .enumerate()
        .map(|(j, e)| check_entry(field, 0, j, e.value()))
        .collect()
}

fn check_tolerance(tolerance: Option<f64>) -> Result<Option<f64>> {
    match tolerance {
        Some(t) if !(t > 0.0 && t < 1.0) => Err(format_err(format!("tolerance: {t} is outside (0, 1)"))),
        t => Ok(t),
    }
}

/// A parsed system file.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemFile {
    pub system: MultiChannelSystem,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
}

pub fn parse_system(text: &str) -> Result<SystemFile> {
    let raw: RawSystem = serde_json::from_str(text).map_err(|e| format_err(e.to_string()))?;
    let n = raw.a.len();
    let a = to_matrix(&raw.a, "A", Some(n), Some(n))?;
    if raw.channels.is_empty() {
        return Err(format_err("channels: at least one channel is required"));
    }
    let mut channels = Vec::with_capacity(raw.channels.len());
    for (idx, ch) in raw.channels.iter().enumerate() {
        let b_field = format!("channels[{idx}].B");
        let c_field = format!("channels[{idx}].C");
        let m = ch.b.first().map_or(0, Vec::len);
        let b = to_matrix(&ch.b, &b_field, Some(n), Some(m))?;
        let c = to_matrix(&ch.c, &c_field, None, Some(n))?;
        channels.push(Channel { b, c });
    }
    Ok(SystemFile {
        system: MultiChannelSystem::new(a, channels)?,
        tolerance: check_tolerance(raw.tolerance)?,
        seed: raw.seed,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilySpec {
    Pairs(VectorPairFamily),
    Members(MatrixFamily),
}

impl FamilySpec {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            FamilySpec::Pairs(f) => (f.n1(), f.n2()),
            FamilySpec::Members(f) => (f.n1(), f.n2()),
        }
    }

    /// Member-level view; vector pairs become one-column members.
    pub fn to_matrix_family(&self) -> MatrixFamily {
        match self {
            FamilySpec::Pairs(f) => MatrixFamily::from_pairs(f),
            FamilySpec::Members(f) => f.clone(),
        }
    }
}

/// A parsed family file.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyFile {
    pub family: FamilySpec,
    pub constant: Option<ComplexMatrix>,
    pub tolerance: Option<f64>,
    pub seed: Option<u64>,
}

pub fn parse_family(text: &str) -> Result<FamilyFile> {
    let raw: RawFamily = serde_json::from_str(text).map_err(|e| format_err(e.to_string()))?;
    let (n1, n2) = resolve_shape(&raw)?;
    let family = match (&raw.pairs, &raw.members) {
        (Some(_), Some(_)) => return Err(format_err("give either \"pairs\" or \"members\", not both")),
        (None, None) => return Err(format_err("missing \"pairs\" or \"members\"")),
        (Some(pairs), None) => {
            let mut parsed = Vec::with_capacity(pairs.len());
            for (idx, p) in pairs.iter().enumerate() {
                let w = to_vector(&p.w, &format!("pairs[{idx}].w"), n1)?;
                let r = to_vector(&p.r, &format!("pairs[{idx}].r"), n2)?;
                parsed.push((ComplexMatrix::column_vector(&w), ComplexMatrix::row_vector(&r)));
            }
            FamilySpec::Pairs(VectorPairFamily::from_pairs(n1, n2, &parsed)?)
        }
        (None, Some(members)) => {
            let mut parsed = Vec::with_capacity(members.len());
            for (idx, mem) in members.iter().enumerate() {
                let alpha = mem.w.first().map_or(0, Vec::len);
                let w = to_matrix(&mem.w, &format!("members[{idx}].W"), Some(n1), Some(alpha))?;
                let r = to_matrix(&mem.r, &format!("members[{idx}].R"), Some(mem.r.len()), Some(n2))?;
                if r.rows() != alpha {
                    return Err(format_err(format!(
                        "members[{idx}]: W has {alpha} columns but R has {} rows",
                        r.rows()
                    )));
                }
                parsed.push(FamilyMember { w, r });
            }
            FamilySpec::Members(MatrixFamily::new(n1, n2, parsed)?)
        }
    };
    let constant = raw
        .m
        .as_ref()
        .map(|m| to_matrix(m, "M", Some(n1), Some(n2)))
        .transpose()?;
    Ok(FamilyFile {
        family,
        constant,
        tolerance: check_tolerance(raw.tolerance)?,
        seed: raw.seed,
    })
}

/// Ambient dimensions from explicit fields, else the first vector or matrix
/// that carries them.
fn resolve_shape(raw: &RawFamily) -> Result<(usize, usize)> {
    let mut n1 = raw.n1;
    let mut n2 = raw.n2;
    if let Some(pairs) = &raw.pairs {
        if let Some(p) = pairs.first() {
            n1 = n1.or(Some(p.w.len()));
            n2 = n2.or(Some(p.r.len()));
        }
    }
    if let Some(members) = &raw.members {
        for mem in members {
            if n1.is_none() && !mem.w.is_empty() {
                n1 = Some(mem.w.len());
            }
            if n2.is_none() {
                n2 = mem.r.first().map(Vec::len);
            }
        }
    }
    if let Some(m) = &raw.m {
        if n1.is_none() && !m.is_empty() {
            n1 = Some(m.len());
        }
        if n2.is_none() {
            n2 = m.first().map(Vec::len);
        }
    }
    match (n1, n2) {
        (Some(a), Some(b)) => Ok((a, b)),
        (None, None)
            if raw.pairs.as_ref().is_some_and(Vec::is_empty) || raw.members.as_ref().is_some_and(Vec::is_empty) =>
        {
            Ok((0, 0))
        }
        _ => Err(format_err("cannot infer \"n1\"/\"n2\"; give them explicitly")),
    }
}

fn push_number(out: &mut String, x: f64) {
    // Finite by construction.
    out.push_str(&serde_json::to_string(&x).expect("finite float"));
}

fn push_entry(out: &mut String, z: Complex64) {
    if z.im == 0.0 {
        push_number(out, z.re);
    } else {
        out.push('[');
        push_number(out, z.re);
        out.push_str(", ");
        push_number(out, z.im);
        out.push(']');
    }
}

/// One row per line; empty-width matrices keep their rows as `[]` so the
/// row count survives.
fn push_matrix(out: &mut String, m: &ComplexMatrix, indent: &str) {
    if m.rows() == 0 {
        out.push_str("[]");
        return;
    }
    out.push_str("[\n");
    for i in 0..m.rows() {
        let _ = write!(out, "{indent}  [");
        for j in 0..m.cols() {
            if j > 0 {
                out.push_str(", ");
            }
            push_entry(out, m.get(i, j));
        }
        out.push(']');
        if i + 1 < m.rows() {
            out.push(',');
        }
        out.push('\n');
    }
    let _ = write!(out, "{indent}]");
}

/// Serializes a system in the file format, one matrix row per line.
pub fn emit_system(sys: &MultiChannelSystem) -> String {
    let mut out = String::from("{\n  \"A\": ");
    push_matrix(&mut out, sys.a(), "  ");
    out.push_str(",\n  \"channels\": [\n");
    for (idx, ch) in sys.channels().iter().enumerate() {
        out.push_str("    {\n      \"B\": ");
        push_matrix(&mut out, &ch.b, "      ");
        out.push_str(",\n      \"C\": ");
        push_matrix(&mut out, &ch.c, "      ");
        out.push_str("\n    }");
        if idx + 1 < sys.k() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn emit_report(report: &FixedSpectrumReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn parse_report(text: &str) -> Result<FixedSpectrumReport> {
    serde_json::from_str(text).map_err(|e| format_err(e.to_string()))
}
