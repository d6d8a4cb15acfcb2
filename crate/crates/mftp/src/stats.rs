//! Bootstrap confidence intervals for the fitted decay rate.

use mftp_core::analytics::fit_gamma_eff;
use mftp_core::harness::{bootstrap_indices, failure_series_of, splitmix64, TrialRecord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Percentile interval of `gamma_eff` over `replicates` trial resamples.
///
/// Replicate `b` draws its indices from `ChaCha8Rng::seed_from_u64(splitmix64(seed ^ b))`,
/// so the interval does not depend on the thread count. Replicates whose fit
/// fails are dropped; `None` if none succeed.
pub fn bootstrap_gamma(records: &[TrialRecord], replicates: usize, level: f64, seed: u64) -> Option<(f64, f64)> {
    if records.is_empty() || replicates == 0 {
        return None;
    }
    let mut gammas: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .filter_map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ b));
            let picks = bootstrap_indices(records.len(), records.len(), &mut rng);
            let series = failure_series_of(records, &picks).ok()?;
            fit_gamma_eff(&series).ok().map(|f| f.gamma)
        })
        .collect();
    percentile_interval(&mut gammas, level)
}

/// `[(1 - level)/2, (1 + level)/2]` empirical quantiles (nearest rank).
pub fn percentile_interval(values: &mut [f64], level: f64) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let rank = |q: f64| ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
    Some((values[rank((1.0 - level) / 2.0)], values[rank((1.0 + level) / 2.0)]))
}
