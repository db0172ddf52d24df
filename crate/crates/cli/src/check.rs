//! Spot checks on emitted density CSVs.

use std::collections::BTreeMap;
use std::path::Path;

use twocav::fock::{build_basis, min_eigenvalue, CMatrix, C64};

use crate::error::CliError;
use crate::report::TIME_HEADER;

/// Result of checking one density CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvCheck {
    pub rows: usize,
    pub groups: usize,
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    ket: (usize, usize),
    bra: (usize, usize),
    imag: bool,
}

fn parse_labels(s: &str) -> Option<(usize, usize)> {
    let mut chars = s.chars();
    let a = chars.next()?.to_digit(10)? as usize;
    let b = chars.next()?.to_digit(10)? as usize;
    chars.next().is_none().then_some((a, b))
}

fn parse_slot(name: &str) -> Option<Slot> {
    if name == "rho_off" {
        return Some(Slot {
            ket: (0, 1),
            bra: (1, 0),
            imag: false,
        });
    }
    let rest = name.strip_prefix("rho_")?;
    let (rest, imag) = match rest.strip_suffix("_im") {
        Some(r) => (r, true),
        None => (rest, false),
    };
    let (k, b) = rest.split_once('_')?;
    Some(Slot {
        ket: parse_labels(k)?,
        bra: parse_labels(b)?,
        imag,
    })
}

/// Splits `name[label]` into the element name and the label.
fn split_label(header: &str) -> (&str, &str) {
    match header.find('[') {
        Some(i) if header.ends_with(']') => (&header[..i], &header[i + 1..header.len() - 1]),
        _ => (header, ""),
    }
}

/// Rebuilds each row's Hermitian density matrix from its columns and checks
/// unit trace and positivity within `tolerance`.
pub fn check_density_csv(path: &Path, tolerance: f64) -> Result<CsvCheck, CliError> {
    let bad = |msg: String| CliError::Invariant(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::io(path.display(), e))?;
    let headers = reader.headers().map_err(|e| CliError::io(path.display(), e))?.clone();
    if headers.get(0) != Some(TIME_HEADER) {
        return Err(bad(format!("first column must be {TIME_HEADER}")));
    }
    let mut groups: BTreeMap<String, Vec<(usize, Slot)>> = BTreeMap::new();
    for (col, h) in headers.iter().enumerate().skip(1) {
        let (name, label) = split_label(h);
        let slot = parse_slot(name).ok_or_else(|| bad(format!("column `{h}` is not a density element")))?;
        groups.entry(label.to_string()).or_default().push((col, slot));
    }
    if groups.is_empty() {
        return Err(bad("no density columns".into()));
    }

    let mut check = CsvCheck {
        rows: 0,
        groups: groups.len(),
        max_trace_error: 0.0,
        min_eigenvalue: f64::INFINITY,
    };
    for record in reader.records() {
        let record = record.map_err(|e| CliError::io(path.display(), e))?;
        let value = |col: usize| -> Result<f64, CliError> {
            record
                .get(col)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| bad(format!("row {}: column {col} is not a number", check.rows + 1)))
        };
        for (label, slots) in &groups {
            let top = slots
                .iter()
                .map(|(_, s)| (s.ket.0 + s.ket.1).max(s.bra.0 + s.bra.1))
                .max()
                .unwrap_or(0);
            let basis = build_basis(top);
            let d = basis.dim();
            let mut m = CMatrix::zeros(d, d);
            for &(col, s) in slots {
                let x = value(col)?;
                let i = basis.index(s.ket.0, s.ket.1).expect("labels fit by construction");
                let j = basis.index(s.bra.0, s.bra.1).expect("labels fit by construction");
                let z = if s.imag { C64::new(0.0, x) } else { C64::new(x, 0.0) };
                m[(i, j)] += z;
                if i != j {
                    m[(j, i)] += z.conj();
                }
            }
            let trace_error = (m.trace().re - 1.0).abs();
            let lowest = min_eigenvalue(&m);
            if trace_error > tolerance || lowest < -tolerance {
                let at = value(0)?;
                let group = if label.is_empty() { String::new() } else { format!(" [{label}]") };
                return Err(bad(format!(
                    "row at ςt = {at}{group}: trace error {trace_error:.3e}, lowest eigenvalue {lowest:.3e}"
                )));
            }
            check.max_trace_error = check.max_trace_error.max(trace_error);
            check.min_eigenvalue = check.min_eigenvalue.min(lowest);
        }
        check.rows += 1;
    }
    Ok(check)
}
