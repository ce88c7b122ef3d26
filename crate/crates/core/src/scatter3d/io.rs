//! JSON Lines storage for S-operators.
//!
//! The first line is a header `{"l_max": L, "k_count": n, "unitarity_tol":
//! t, "basis": "(l,m) lexicographic"}`. Each further line holds one `k`,
//! either as a dense matrix (`matrix`: row-major list of `[re, im]` pairs)
//! or in compact partial-wave form (`phase_shifts`: `L + 1` values).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::basis_dim;
use super::{track_eigenphases, PhaseShiftSpectrum, SOperator};
use crate::error::{Error, Result};

const BASIS: &str = "(l,m) lexicographic";

/// Unitarity tolerance used when neither the caller nor the file sets one.
pub const DEFAULT_UNITARITY_TOL: f64 = 1e-6;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    l_max: usize,
    #[serde(default)]
    k_count: Option<usize>,
    #[serde(default)]
    unitarity_tol: Option<f64>,
    #[serde(default)]
    basis: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    k: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase_shifts: Option<Vec<f64>>,
}

/// Which records of a file to load.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum KSelection {
    #[default]
    All,
    Range { lo: f64, hi: f64 },
}

impl KSelection {
    fn contains(&self, k: f64) -> bool {
        match *self {
            KSelection::All => true,
            KSelection::Range { lo, hi } => k >= lo && k <= hi,
        }
    }
}

fn write_lines(path: &Path, l_max: usize, recs: Vec<Record>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let h = Header {
        l_max,
        k_count: Some(recs.len()),
        unitarity_tol: Some(DEFAULT_UNITARITY_TOL),
        basis: Some(BASIS.into()),
    };
    serde_json::to_writer(&mut w, &h)?;
    w.write_all(b"\n")?;
    for r in recs {
        serde_json::to_writer(&mut w, &r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Write dense operators (all with the same `l_max`).
pub fn save_soperators(path: &Path, ops: &[SOperator]) -> Result<()> {
    let Some(first) = ops.first() else {
        return Err(Error::Format("no operators to save".into()));
    };
    if ops.iter().any(|o| o.l_max != first.l_max) {
        return Err(Error::Format("operators disagree on l_max".into()));
    }
    write_lines(
        path,
        first.l_max,
        ops.iter()
            .map(|o| {
                let n = o.dim();
                let a = o.matrix();
                let mut m = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        m.push([a[(i, j)].re, a[(i, j)].im]);
                    }
                }
                Record {
                    k: o.k,
                    matrix: Some(m),
                    phase_shifts: None,
                }
            })
            .collect(),
    )
}

/// Write partial-wave spectra in compact form. Shorter spectra are padded
/// with zero phase shifts up to the largest `l_max`.
pub fn save_spectra(path: &Path, spectra: &[PhaseShiftSpectrum]) -> Result<()> {
    if spectra.is_empty() || spectra.iter().any(|s| s.l_max.is_none()) {
        return Err(Error::Format("compact form needs partial-wave spectra".into()));
    }
    let l_max = spectra.iter().filter_map(|s| s.l_max).max().unwrap();
    let recs = spectra
        .iter()
        .map(|s| {
            let mut ps: Vec<f64> = s.channels.iter().map(|c| c.eta).collect();
            ps.resize(l_max + 1, 0.0);
            Record {
                k: s.k,
                matrix: None,
                phase_shifts: Some(ps),
            }
        })
        .collect();
    write_lines(path, l_max, recs)
}

fn parse_record(rec: Record, l_max: usize, line: usize) -> Result<SOperator> {
    let bad = |m: String| Error::Format(format!("line {line}: {m}"));
    match (rec.matrix, rec.phase_shifts) {
        (Some(a), None) => {
            let n = basis_dim(l_max);
            if a.len() != n * n {
                return Err(bad(format!("expected {} matrix entries", n * n)));
            }
            if a.iter().flatten().any(|v| !v.is_finite()) {
                return Err(bad("non-finite matrix entry".into()));
            }
            let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(a[i * n + j][0], a[i * n + j][1]));
            SOperator::from_matrix(rec.k, l_max, m).map_err(|e| bad(e.to_string()))
        }
        (None, Some(ps)) => {
            if ps.len() != l_max + 1 {
                return Err(bad(format!("expected {} phase shifts", l_max + 1)));
            }
            if ps.iter().any(|v| !v.is_finite()) || !(rec.k > 0.0 && rec.k.is_finite()) {
                return Err(bad("non-finite value".into()));
            }
            SOperator::from_spectrum(&PhaseShiftSpectrum::from_partial_waves(rec.k, &ps))
        }
        _ => Err(bad("record needs exactly one of matrix or phase_shifts".into())),
    }
}

/// Load, validate and branch-track S-operators from a JSON Lines file.
///
/// Every record is checked for unitarity against `unitarity_tol` (falling
/// back to the header value, then [`DEFAULT_UNITARITY_TOL`]); on failure the
/// error carries the deviation for every `k`.
pub fn load_soperator(
    path: &Path,
    selection: KSelection,
    unitarity_tol: Option<f64>,
) -> Result<Vec<SOperator>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::Format("empty S-operator file".into()))?;
    let header: Header = serde_json::from_str(&first?)
        .map_err(|e| Error::Format(format!("line 1 (header): {e}")))?;
    if header.basis.as_deref().is_some_and(|b| b != BASIS) {
        return Err(Error::Format(format!("unsupported basis {:?}", header.basis)));
    }
    let tol = unitarity_tol
        .or(header.unitarity_tol)
        .unwrap_or(DEFAULT_UNITARITY_TOL);
    let mut ops = Vec::new();
    let mut seen = 0;
    for (no, line) in lines {
        seen += 1;
        let rec: Record = serde_json::from_str(&line?)
            .map_err(|e| Error::Format(format!("line {no}: {e}")))?;
        if !selection.contains(rec.k) {
            continue;
        }
        ops.push(parse_record(rec, header.l_max, no)?);
    }
    if header.k_count.is_some_and(|n| n != seen) {
        return Err(Error::Format(format!(
            "header declares {} records, file has {seen}",
            header.k_count.unwrap()
        )));
    }
    if ops.is_empty() {
        return Err(Error::Format("no records in the selected k range".into()));
    }
    if ops.windows(2).any(|w| w[1].k <= w[0].k) {
        return Err(Error::Grid("k values must be strictly ascending".into()));
    }
    let per_k: Vec<(f64, f64)> = ops.iter().map(|o| (o.k, o.unitarity_defect())).collect();
    let &(worst_k, worst) = per_k
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    if worst > tol {
        return Err(Error::Unitarity {
            worst,
            worst_k,
            tol,
            per_k,
        });
    }
    track_eigenphases(&mut ops)?;
    Ok(ops)
}
