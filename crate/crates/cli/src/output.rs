use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use feg_core::solvers::Trace;

use crate::error::{BenchError, Result};

pub const CSV_HEADER: [&str; 6] = ["k", "grad_norm_sq", "bound", "potential", "tau", "eta"];

/// Decimal with 17 significant digits, so that parsing recovers `x` exactly.
/// Fixed notation for `1e-4 <= |x| < 1e16`, scientific otherwise.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.16}", x);
    }
    let sci = format!("{:.16e}", x);
    // exponent after rounding, so 9.99..95e2 correctly becomes 1.0e3
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-4..16).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        sci
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub grad_norm_sq: f64,
    pub bound: Option<f64>,
    pub potential: Option<f64>,
    pub tau: Option<f64>,
    pub eta: Option<f64>,
}

/// One row per iterate, joining the trace with optional bound and potential columns.
pub fn trace_rows(trace: &Trace, bounds: Option<&[Option<f64>]>, potential: Option<&[f64]>) -> Vec<TraceRow> {
    let at = |v: &Option<Vec<f64>>, k: usize| v.as_ref().and_then(|v| v.get(k).copied());
    (0..trace.grad_norm_sq.len())
        .map(|k| TraceRow {
            k,
            grad_norm_sq: trace.grad_norm_sq[k],
            bound: bounds.and_then(|b| b.get(k).copied().flatten()),
            potential: potential.and_then(|v| v.get(k).copied()),
            tau: at(&trace.step_tau, k),
            eta: at(&trace.step_eta, k),
        })
        .collect()
}

fn persist(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| BenchError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| BenchError::io(path, e))?;
    tmp.persist(path).map_err(|e| BenchError::io(path, e.error))?;
    Ok(())
}

/// Writes the rows as CSV, atomically (temp file in the same directory, then rename).
pub fn emit_trace_csv(rows: &[TraceRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| BenchError::io(path, std::io::Error::other(e));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            fmt17(r.grad_norm_sq),
            opt(r.bound),
            opt(r.potential),
            opt(r.tau),
            opt(r.eta),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::io(path, std::io::Error::other(e.to_string())))?;
    persist(path, &bytes)
}

/// Reads a file written by [`emit_trace_csv`].
pub fn read_trace_csv(path: &Path) -> Result<Vec<TraceRow>> {
    let bad = |reason: String| BenchError::config(path.display().to_string(), reason);
    let mut r = csv::Reader::from_path(path).map_err(|e| BenchError::io(path, std::io::Error::other(e)))?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let num = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad(format!("not a number: {s}")))
        }
    };
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            Ok(TraceRow {
                k: rec[0].parse().map_err(|_| bad(format!("bad index {}", &rec[0])))?,
                grad_norm_sq: num(&rec[1])?.ok_or_else(|| bad("missing grad_norm_sq".into()))?,
                bound: num(&rec[2])?,
                potential: num(&rec[3])?,
                tau: num(&rec[4])?,
                eta: num(&rec[5])?,
            })
        })
        .collect()
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    persist(path, text.as_bytes())
}
