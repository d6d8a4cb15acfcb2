//! Parallel execution of an `L x p` grid of seeded trials.

use mftp_core::analytics::{fit_gamma_eff, GammaFit};
use mftp_core::harness::{failure_series, splitmix64, trial_seed, TrialRecord, TrialRunner};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::stats::bootstrap_gamma;

/// Outcome of one `(L, p)` cell.
#[derive(Clone, Debug)]
pub struct CellResult {
    pub l: usize,
    pub p: f64,
    /// Trial records in trial order.
    pub records: Vec<TrialRecord>,
    pub fit: Option<GammaFit>,
    /// Bootstrap interval of `gamma_eff` at the configured level.
    pub ci: Option<(f64, f64)>,
    /// Reason the cell produced no records or no fit.
    pub error: Option<String>,
}

/// Runs every trial of one cell on the rayon pool. Results are collected in
/// trial order and each trial owns its RNG, so the output does not depend on
/// the number of worker threads.
pub fn run_cell(config: &ExperimentConfig, l: usize, p: f64) -> CellResult {
    let mut cell = CellResult {
        l,
        p,
        records: Vec::new(),
        fit: None,
        ci: None,
        error: None,
    };
    let runner = match TrialRunner::new(&config.trial, l, p) {
        Ok(r) => r,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    };
    match (0..config.trials as u64)
        .into_par_iter()
        .map(|t| runner.run(t))
        .collect::<mftp_core::Result<Vec<_>>>()
    {
        Ok(records) => cell.records = records,
        Err(e) => {
            cell.error = Some(e.to_string());
            return cell;
        }
    }
    match failure_series(&cell.records).and_then(|s| fit_gamma_eff(&s)) {
        Ok(fit) => {
            cell.fit = Some(fit);
            let seed = splitmix64(trial_seed(config.trial.base_seed, u64::MAX, l, p));
            cell.ci = bootstrap_gamma(&cell.records, config.bootstrap, config.ci_level, seed);
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    cell
}

/// Every cell of `L_list x p_list`, `L` outermost. Failing cells carry their
/// error and do not stop the sweep.
pub fn run_sweep(config: &ExperimentConfig) -> Vec<CellResult> {
    config
        .l_list
        .iter()
        .flat_map(|&l| config.p_list.iter().map(move |&p| (l, p)))
        .map(|(l, p)| run_cell(config, l, p))
        .collect()
}
