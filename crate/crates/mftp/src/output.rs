//! Per-cycle CSV records and the JSON summary.
//!
//! CSV schema, one row per trial and cycle, header included:
//!
//! ```text
//! trial,seed,L,p,cycle,class,failed
//! 0,1234567890123,8,0.02,1,I,0
//! ```
//!
//! `p` is written with Rust's shortest round-trip float formatting, `cycle` is
//! 1-based, `class` is one of `I X Z Y` and `failed` is `1` when the class is
//! not `I`. Rows are ordered by cell (`L` outer, `p` inner), trial, cycle.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use mftp_core::analytics::FitStatus;
use mftp_core::frame::LogicalClass;
use mftp_core::harness::TrialRecord;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sweep::CellResult;

pub const CSV_HEADER: [&str; 7] = ["trial", "seed", "L", "p", "cycle", "class", "failed"];

pub fn write_records_csv<'a, W: Write>(writer: W, records: impl IntoIterator<Item = &'a TrialRecord>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let (trial, seed, l, p) = (
            r.trial.to_string(),
            r.seed.to_string(),
            r.l.to_string(),
            r.p().to_string(),
        );
        for (k, class) in r.classes.iter().enumerate() {
            let cycle = (k + 1).to_string();
            let failed = if class.is_failure() { "1" } else { "0" };
            w.write_record([trial.as_str(), &seed, &l, &p, &cycle, class.as_str(), failed])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads records back, rebuilding `failed_any` and `first_failure` from the
/// classes. Records come out in the order their first row appears.
pub fn read_records_csv<R: Read>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut rd = csv::Reader::from_reader(reader);
    let headers = rd.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::Record(format!("unexpected header {headers:?}")));
    }
    let mut order: Vec<(u64, usize, u64)> = Vec::new();
    let mut by_key: BTreeMap<(u64, usize, u64), TrialRecord> = BTreeMap::new();
    for row in rd.records() {
        let row = row?;
        let field = |i: usize| row.get(i).unwrap_or("");
        let bad = |what: &str| Error::Record(format!("bad {what} in row {:?}", row.position().map(|p| p.line())));
        let trial: u64 = field(0).parse().map_err(|_| bad("trial"))?;
        let seed: u64 = field(1).parse().map_err(|_| bad("seed"))?;
        let l: usize = field(2).parse().map_err(|_| bad("L"))?;
        let p: f64 = field(3).parse().map_err(|_| bad("p"))?;
        let cycle: usize = field(4).parse().map_err(|_| bad("cycle"))?;
        let class: LogicalClass = field(5).parse().map_err(|_| bad("class"))?;
        let key = (trial, l, p.to_bits());
        let rec = by_key.entry(key).or_insert_with(|| {
            order.push(key);
            TrialRecord {
                trial,
                seed,
                l,
                p_bits: p.to_bits(),
                classes: Vec::new(),
                failed_any: Vec::new(),
                first_failure: None,
            }
        });
        if cycle != rec.classes.len() + 1 {
            return Err(bad("cycle order"));
        }
        if class.is_failure() && rec.first_failure.is_none() {
            rec.first_failure = Some(cycle);
        }
        rec.classes.push(class);
        rec.failed_any.push(rec.first_failure.is_some());
    }
    Ok(order.into_iter().filter_map(|k| by_key.remove(&k)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellSummary {
    #[serde(rename = "L")]
    pub l: usize,
    pub p: f64,
    pub trials: usize,
    pub cycles: usize,
    pub gamma_eff: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub ci_level: f64,
    pub fit_status: Option<&'static str>,
    pub residual: Option<f64>,
    /// Fraction of trials with a nontrivial class after the last cycle.
    pub final_failure_fraction: Option<f64>,
    pub error: Option<String>,
}

pub fn fit_status_name(s: FitStatus) -> &'static str {
    match s {
        FitStatus::Ok => "ok",
        FitStatus::AllZero => "all_zero",
        FitStatus::Saturated => "saturated_lower_bound",
    }
}

pub fn summarize(cell: &CellResult, ci_level: f64) -> CellSummary {
    let cycles = cell.records.first().map_or(0, |r| r.classes.len());
    let final_failure_fraction = (!cell.records.is_empty()).then(|| {
        cell.records
            .iter()
            .filter(|r| r.classes.last().is_some_and(|c| c.is_failure()))
            .count() as f64
            / cell.records.len() as f64
    });
    CellSummary {
        l: cell.l,
        p: cell.p,
        trials: cell.records.len(),
        cycles,
        gamma_eff: cell.fit.map(|f| f.gamma),
        ci_low: cell.ci.map(|c| c.0),
        ci_high: cell.ci.map(|c| c.1),
        ci_level,
        fit_status: cell.fit.map(|f| fit_status_name(f.status)),
        residual: cell.fit.map(|f| f.residual),
        final_failure_fraction,
        error: cell.error.clone(),
    }
}

pub fn write_summary_json<W: Write>(writer: W, cells: &[CellResult], ci_level: f64) -> Result<()> {
    let summaries: Vec<CellSummary> = cells.iter().map(|c| summarize(c, ci_level)).collect();
    serde_json::to_writer_pretty(writer, &summaries)?;
    Ok(())
}
