use std::collections::BTreeMap;

use serde::Serialize;

use super::metrics::ErrorStats;
use super::pipeline::{CaseRecord, Method};
use crate::error::Result;

/// Per-case CSV: one row per (case, method).
pub fn records_csv(problem: &str, records: &[CaseRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["problem", "fold", "index", "theta", "method", "error", "floor", "clipped", "message"])?;
    for r in records {
        let theta = r.parameter.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        w.write_record([
            problem.to_string(),
            r.fold.to_string(),
            r.index.to_string(),
            theta,
            r.method.name().to_string(),
            r.error.map(|e| e.to_string()).unwrap_or_default(),
            r.floor.to_string(),
            r.clipped.to_string(),
            r.message.clone().unwrap_or_default(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| crate::error::Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub stats: Option<ErrorStats>,
    pub failures: usize,
    pub clipped: usize,
}

/// Pooled statistics per method over successful predictions.
pub fn summarize(records: &[CaseRecord]) -> BTreeMap<Method, MethodSummary> {
    let mut errors: BTreeMap<Method, (Vec<f64>, usize, usize)> = BTreeMap::new();
    for r in records {
        let entry = errors.entry(r.method).or_default();
        match r.error {
            Some(e) => entry.0.push(e),
            None => entry.1 += 1,
        }
        if r.clipped {
            entry.2 += 1;
        }
    }
    errors
        .into_iter()
        .map(|(m, (errs, failures, clipped))| {
            (
                m,
                MethodSummary {
                    stats: ErrorStats::from_errors(&errs),
                    failures,
                    clipped,
                },
            )
        })
        .collect()
}

/// Statistics per fold and method.
pub fn summarize_folds(records: &[CaseRecord]) -> BTreeMap<usize, BTreeMap<Method, MethodSummary>> {
    let mut by_fold: BTreeMap<usize, Vec<CaseRecord>> = BTreeMap::new();
    for r in records {
        by_fold.entry(r.fold).or_default().push(r.clone());
    }
    by_fold.into_iter().map(|(f, rs)| (f, summarize(&rs))).collect()
}

/// Fixed-width summary table, one row per method.
pub fn format_table(summary: &BTreeMap<Method, MethodSummary>) -> String {
    let mut out = format!(
        "{:<8} {:>5} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}\n",
        "method", "n", "mean", "std", "median", "q25", "q75", "min", "max"
    );
    for (m, s) in summary {
        match &s.stats {
            Some(st) => out.push_str(&format!(
                "{:<8} {:>5} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e} {:>11.3e}\n",
                m.name(),
                st.count,
                st.mean,
                st.std,
                st.median,
                st.q25,
                st.q75,
                st.min,
                st.max
            )),
            None => out.push_str(&format!("{:<8} {:>5}\n", m.name(), 0)),
        }
    }
    out
}

/// Parses a per-case CSV written by [`records_csv`]. Returns the problem name
/// of the first row alongside the records.
pub fn read_records_csv(text: &str) -> Result<(Option<String>, Vec<CaseRecord>)> {
    use crate::error::Error;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut problem = None;
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |what: &str| Error::Format(format!("row {}: bad {what}", line + 1));
        if row.len() != 9 {
            return Err(bad("field count"));
        }
        problem.get_or_insert_with(|| row[0].to_string());
        let parameter = if row[3].is_empty() {
            Vec::new()
        } else {
            row[3]
                .split(';')
                .map(|v| v.parse::<f64>().map_err(|_| bad("theta")))
                .collect::<Result<Vec<_>>>()?
        };
        let method = match &row[4] {
            "cxgb" => Method::Cxgb,
            "interp" => Method::Interp,
            "oracle" => Method::Oracle,
            _ => return Err(bad("method")),
        };
        out.push(CaseRecord {
            fold: row[1].parse().map_err(|_| bad("fold"))?,
            index: row[2].parse().map_err(|_| bad("index"))?,
            parameter,
            method,
            error: if row[5].is_empty() {
                None
            } else {
                Some(row[5].parse().map_err(|_| bad("error"))?)
            },
            floor: row[6].parse().map_err(|_| bad("floor"))?,
            clipped: row[7].parse().map_err(|_| bad("clipped"))?,
            message: (!row[8].is_empty()).then(|| row[8].to_string()),
        });
    }
    Ok((problem, out))
}
