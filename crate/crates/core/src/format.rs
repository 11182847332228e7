//! Matrix file interchange. The JSON document carries the entries together
//! with their certificate; the CSV form holds entries only.
//!
//! The JSON writer is hand-rolled so that key order and float formatting are
//! fixed; identical inputs always produce identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::Value;
use thiserror::Error;

use crate::numerics::RealMatrix;
use crate::verify::OrthoCertificate;

/// Largest document accepted by the decoders, in bytes.
pub const MAX_INPUT_LEN: usize = 64 << 20;

#[derive(Debug, Error, PartialEq)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("schema violation at `{path}`: {reason}")]
    SchemaViolation { path: String, reason: String },
    #[error("malformed CSV at line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error("non-finite number cannot be serialized at `{path}`")]
    NonFinite { path: String },
    #[error("input of {len} bytes exceeds the {max}-byte limit")]
    TooLarge { len: usize, max: usize },
}

fn violation(path: impl Into<String>, reason: impl Into<String>) -> FormatError {
    FormatError::SchemaViolation {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Value of a provenance parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Param {
    fn from(v: usize) -> Self {
        Param::Int(v as i64)
    }
}

impl From<u64> for Param {
    fn from(v: u64) -> Self {
        Param::Int(v as i64)
    }
}

impl From<u32> for Param {
    fn from(v: u32) -> Self {
        Param::Int(v as i64)
    }
}

impl From<f64> for Param {
    fn from(v: f64) -> Self {
        Param::Float(v)
    }
}

impl From<&str> for Param {
    fn from(v: &str) -> Self {
        Param::Text(v.to_string())
    }
}

impl From<String> for Param {
    fn from(v: String) -> Self {
        Param::Text(v)
    }
}

impl From<bool> for Param {
    fn from(v: bool) -> Self {
        Param::Bool(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateRecord {
    pub claim: String,
    pub passed: bool,
    pub max_residual: f64,
    pub min_offdiag_magnitude: f64,
    pub symmetry: String,
}

impl From<&OrthoCertificate> for CertificateRecord {
    fn from(c: &OrthoCertificate) -> Self {
        CertificateRecord {
            claim: c.claim.to_string(),
            passed: c.passed,
            max_residual: c.max_residual,
            min_offdiag_magnitude: c.min_offdiag_magnitude,
            symmetry: c.symmetry.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub theorem: String,
    pub parameters: BTreeMap<String, Param>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub kind: String,
    pub order: usize,
    pub cols: usize,
    pub scale_c: Option<f64>,
    pub entries: Vec<Vec<f64>>,
    pub plan: Option<String>,
    pub certificate: Option<CertificateRecord>,
    pub provenance: Provenance,
}

impl MatrixFile {
    pub fn from_matrix(kind: &str, m: &RealMatrix, theorem: &str) -> Self {
        MatrixFile {
            kind: kind.to_string(),
            order: m.rows(),
            cols: m.cols(),
            scale_c: m.scale_c(),
            entries: m.to_rows(),
            plan: None,
            certificate: None,
            provenance: Provenance {
                theorem: theorem.to_string(),
                parameters: BTreeMap::new(),
            },
        }
    }

    /// The entries as a matrix, carrying `scale_c` when present.
    pub fn matrix(&self) -> RealMatrix {
        let data: Vec<f64> = self.entries.iter().flatten().copied().collect();
        let m = RealMatrix::from_vec(self.order, self.cols, data);
        match self.scale_c {
            Some(c) => m.with_scale(c),
            None => m,
        }
    }
}

/// Formats a double like C's `%.17g`: 17 significant digits, trailing zeros
/// removed, exponent form outside `[1e-4, 1e17)`. Negative zero becomes
/// `-0.0` so that the sign survives a JSON reader that maps `-0` to an
/// integer.
pub fn format_g17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0.0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        strip_zeros(format!("{:.*}", decimals, x))
    } else {
        let mantissa = strip_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    }
}

fn strip_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn push_number(out: &mut String, x: f64, path: &str) -> Result<(), FormatError> {
    if !x.is_finite() {
        return Err(FormatError::NonFinite { path: path.into() });
    }
    out.push_str(&format_g17(x));
    Ok(())
}

fn push_string(out: &mut String, s: &str) {
    out.push_str(&Value::String(s.to_string()).to_string());
}

fn push_opt_number(out: &mut String, x: Option<f64>, path: &str) -> Result<(), FormatError> {
    match x {
        Some(x) => push_number(out, x, path),
        None => {
            out.push_str("null");
            Ok(())
        }
    }
}

/// Serializes with the fixed key order of the schema, one matrix row per
/// line.
pub fn encode_json(f: &MatrixFile) -> Result<String, FormatError> {
    let mut out = String::new();
    out.push_str("{\n  \"kind\": ");
    push_string(&mut out, &f.kind);
    let _ = write!(
        out,
        ",\n  \"order\": {},\n  \"cols\": {},\n  \"scale_c\": ",
        f.order, f.cols
    );
    push_opt_number(&mut out, f.scale_c, "scale_c")?;
    out.push_str(",\n  \"entries\": [");
    for (i, row) in f.entries.iter().enumerate() {
        out.push_str(if i == 0 { "\n    [" } else { ",\n    [" });
        for (j, &x) in row.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            push_number(&mut out, x, &format!("entries[{i}][{j}]"))?;
        }
        out.push(']');
    }
    out.push_str(if f.entries.is_empty() {
        "],\n  \"plan\": "
    } else {
        "\n  ],\n  \"plan\": "
    });
    match &f.plan {
        Some(p) => push_string(&mut out, p),
        None => out.push_str("null"),
    }
    out.push_str(",\n  \"certificate\": ");
    match &f.certificate {
        Some(c) => {
            out.push_str("{\"claim\": ");
            push_string(&mut out, &c.claim);
            let _ = write!(out, ", \"passed\": {}, \"max_residual\": ", c.passed);
            push_number(&mut out, c.max_residual, "certificate.max_residual")?;
            out.push_str(", \"min_offdiag_magnitude\": ");
            push_number(
                &mut out,
                c.min_offdiag_magnitude,
                "certificate.min_offdiag_magnitude",
            )?;
            out.push_str(", \"symmetry\": ");
            push_string(&mut out, &c.symmetry);
            out.push('}');
        }
        None => out.push_str("null"),
    }
    out.push_str(",\n  \"provenance\": {\"theorem\": ");
    push_string(&mut out, &f.provenance.theorem);
    out.push_str(", \"parameters\": {");
    for (i, (key, value)) in f.provenance.parameters.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        push_string(&mut out, key);
        out.push_str(": ");
        match value {
            Param::Int(v) => {
                let _ = write!(out, "{v}");
            }
            Param::Float(v) => {
                let start = out.len();
                push_number(&mut out, *v, &format!("provenance.parameters.{key}"))?;
                // Keep integral floats distinguishable from `Param::Int`.
                if !out[start..].contains(['.', 'e']) {
                    out.push_str(".0");
                }
            }
            Param::Text(s) => push_string(&mut out, s),
            Param::Bool(b) => {
                let _ = write!(out, "{b}");
            }
        }
    }
    out.push_str("}}\n}\n");
    Ok(out)
}

fn field<'a>(
    obj: &'a serde_json::Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<&'a Value, FormatError> {
    obj.get(key)
        .ok_or_else(|| violation(join(path, key), "missing field"))
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_str(v: &Value, path: &str) -> Result<String, FormatError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| violation(path, "expected a string"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64, FormatError> {
    v.as_f64()
        .ok_or_else(|| violation(path, "expected a number"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, FormatError> {
    v.as_u64()
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| violation(path, "expected a non-negative integer"))
}

fn as_object<'a>(
    v: &'a Value,
    path: &str,
) -> Result<&'a serde_json::Map<String, Value>, FormatError> {
    v.as_object()
        .ok_or_else(|| violation(path, "expected an object"))
}

fn decode_certificate(v: &Value) -> Result<Option<CertificateRecord>, FormatError> {
    const P: &str = "certificate";
    if v.is_null() {
        return Ok(None);
    }
    let obj = as_object(v, P)?;
    let passed = field(obj, "passed", P)?
        .as_bool()
        .ok_or_else(|| violation("certificate.passed", "expected a boolean"))?;
    Ok(Some(CertificateRecord {
        claim: as_str(field(obj, "claim", P)?, "certificate.claim")?,
        passed,
        max_residual: as_f64(field(obj, "max_residual", P)?, "certificate.max_residual")?,
        min_offdiag_magnitude: as_f64(
            field(obj, "min_offdiag_magnitude", P)?,
            "certificate.min_offdiag_magnitude",
        )?,
        symmetry: as_str(field(obj, "symmetry", P)?, "certificate.symmetry")?,
    }))
}

fn decode_param(v: &Value, path: &str) -> Result<Param, FormatError> {
    match v {
        Value::Bool(b) => Ok(Param::Bool(*b)),
        Value::String(s) => Ok(Param::Text(s.clone())),
        Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(Param::Int(i)),
            None => n
                .as_f64()
                .map(Param::Float)
                .ok_or_else(|| violation(path, "unsupported number")),
        },
        _ => Err(violation(path, "expected a scalar")),
    }
}

pub fn decode_json(text: &str) -> Result<MatrixFile, FormatError> {
    if text.len() > MAX_INPUT_LEN {
        return Err(FormatError::TooLarge {
            len: text.len(),
            max: MAX_INPUT_LEN,
        });
    }
    let doc: Value = serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
    let obj = as_object(&doc, "$")?;

    let kind = as_str(field(obj, "kind", "")?, "kind")?;
    let order = as_usize(field(obj, "order", "")?, "order")?;
    let cols = as_usize(field(obj, "cols", "")?, "cols")?;
    let scale_c = match field(obj, "scale_c", "")? {
        Value::Null => None,
        v => Some(as_f64(v, "scale_c")?),
    };

    let rows = field(obj, "entries", "")?
        .as_array()
        .ok_or_else(|| violation("entries", "expected an array of rows"))?;
    if rows.len() != order {
        return Err(violation(
            "entries",
            format!("expected {order} rows, found {}", rows.len()),
        ));
    }
    let mut entries = Vec::with_capacity(order);
    for (i, row) in rows.iter().enumerate() {
        let path = format!("entries[{i}]");
        let row = row
            .as_array()
            .ok_or_else(|| violation(&path, "expected an array"))?;
        if row.len() != cols {
            return Err(violation(
                &path,
                format!("expected {cols} entries, found {}", row.len()),
            ));
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(j, v)| as_f64(v, &format!("entries[{i}][{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        entries.push(parsed);
    }

    let plan = match field(obj, "plan", "")? {
        Value::Null => None,
        v => Some(as_str(v, "plan")?),
    };
    let certificate = decode_certificate(field(obj, "certificate", "")?)?;

    let prov = as_object(field(obj, "provenance", "")?, "provenance")?;
    let theorem = as_str(field(prov, "theorem", "provenance")?, "provenance.theorem")?;
    let params = as_object(
        field(prov, "parameters", "provenance")?,
        "provenance.parameters",
    )?;
    let parameters = params
        .iter()
        .map(|(k, v)| {
            Ok((
                k.clone(),
                decode_param(v, &format!("provenance.parameters.{k}"))?,
            ))
        })
        .collect::<Result<BTreeMap<_, _>, FormatError>>()?;

    Ok(MatrixFile {
        kind,
        order,
        cols,
        scale_c,
        entries,
        plan,
        certificate,
        provenance: Provenance {
            theorem,
            parameters,
        },
    })
}

/// Entries only, comma separated, one row per line.
pub fn encode_csv(m: &RealMatrix) -> Result<String, FormatError> {
    let mut out = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            push_number(&mut out, m.get(i, j), &format!("[{i}][{j}]"))?;
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn decode_csv(text: &str) -> Result<RealMatrix, FormatError> {
    if text.len() > MAX_INPUT_LEN {
        return Err(FormatError::TooLarge {
            len: text.len(),
            max: MAX_INPUT_LEN,
        });
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                let cell = cell.trim();
                cell.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| FormatError::Csv {
                        line: idx + 1,
                        reason: format!("not a finite number: {cell:?}"),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(FormatError::Csv {
                    line: idx + 1,
                    reason: format!("expected {} columns, found {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Ok(RealMatrix::zeros(0, 0));
    }
    RealMatrix::from_rows(&rows).map_err(|e| FormatError::Csv {
        line: 0,
        reason: e.to_string(),
    })
}
