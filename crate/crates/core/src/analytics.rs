//! Chain-counting bounds, the analytic threshold, the logical decay-rate fit
//! and the hardware budget estimator.
//!
//! Bound sums run over integer chain lengths `l >= ceil(r_cor)` and are
//! evaluated in closed geometric form. The ground-state population factor is
//! bounded by 1 and dropped.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Value of a (possibly divergent) positive series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeriesValue {
    Finite(f64),
    /// Geometric ratio >= 1.
    Divergent,
}

impl SeriesValue {
    pub fn value(self) -> f64 {
        match self {
            SeriesValue::Finite(v) => v,
            SeriesValue::Divergent => f64::INFINITY,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, SeriesValue::Divergent)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

/// `sum_{l >= l0} x^l = x^l0 / (1 - x)`.
fn geometric_tail(x: f64, l0: u32) -> SeriesValue {
    if x >= 1.0 {
        SeriesValue::Divergent
    } else {
        SeriesValue::Finite(math::powi(x, l0 as i32) / (1.0 - x))
    }
}

fn first_length(r_cor: f64) -> u32 {
    math::ceil(r_cor) as u32
}

/// Per-site chain probability `sum_{l >= r_cor} 3 * 4^{l-1} * 2^l * p^{l/2}
/// = (3/4) * sum (8 sqrt p)^l`. Diverges for `p >= 1/64`.
pub fn saw_chain_bound(p: f64, r_cor: f64) -> Result<SeriesValue> {
    check_p(p)?;
    if !(r_cor >= 1.0) || !r_cor.is_finite() {
        return Err(Error::InvalidParameter("r_cor must be >= 1"));
    }
    let ratio = 8.0 * math::sqrt(p);
    Ok(match geometric_tail(ratio, first_length(r_cor)) {
        SeriesValue::Finite(v) => SeriesValue::Finite(0.75 * v),
        d => d,
    })
}

/// Boundary-mismatch probability at the Nishimori temperature,
/// `e^{-beta h r_cor} = (p / (1 - p))^{r_cor / 2}`.
pub fn boundary_mismatch_bound(p: f64, r_cor: f64) -> Result<f64> {
    check_p(p)?;
    if !(r_cor > 0.0) {
        return Err(Error::InvalidParameter("r_cor must be positive"));
    }
    Ok(math::powf(p / (1.0 - p), r_cor / 2.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundInputs {
    pub p: f64,
    pub l: usize,
    pub alpha: f64,
    pub r_cor: f64,
}

impl BoundInputs {
    /// `r_cor = alpha * ln L`.
    pub fn log_scaled(p: f64, l: usize, alpha: f64) -> Self {
        Self {
            p,
            l,
            alpha,
            r_cor: alpha * math::ln(l as f64),
        }
    }

    /// `r_cor = 4J / (2h)`.
    pub fn from_couplings(p: f64, l: usize, j: f64, h: f64) -> Self {
        Self {
            p,
            l,
            alpha: 0.0,
            r_cor: 2.0 * j / h,
        }
    }

    fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if !(self.r_cor > 0.0) || !self.r_cor.is_finite() {
            return Err(Error::InvalidParameter("r_cor must be positive"));
        }
        if self.l == 0 {
            return Err(Error::InvalidParameter("L must be positive"));
        }
        Ok(())
    }
}

/// `L^2 * [ sum_{l >= r_cor} (8/3) 6^l p^{l/2} + (p/(1-p))^{r_cor/2} ]`.
/// Diverges for `6 sqrt p >= 1`.
pub fn logical_error_bound(inputs: &BoundInputs) -> Result<SeriesValue> {
    inputs.validate()?;
    let sites = (inputs.l * inputs.l) as f64;
    let chains = geometric_tail(6.0 * math::sqrt(inputs.p), first_length(inputs.r_cor));
    let mismatch = boundary_mismatch_bound(inputs.p, inputs.r_cor)?;
    Ok(match chains {
        SeriesValue::Finite(c) => SeriesValue::Finite(sites * (8.0 / 3.0 * c + mismatch)),
        d => d,
    })
}

/// The individual failure channels, each already multiplied by `L^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundBreakdown {
    /// Chains of errors plus matching path longer than `r_cor`.
    pub p_error: SeriesValue,
    /// Thermal field excitations completing such a chain.
    pub p_ex: SeriesValue,
    /// Thermal boundary mismatch.
    pub p_bm: f64,
    /// `p_error + p_ex + p_bm` with the `3 * 4^{l-1} * 2^l` constants.
    pub intermediate_total: SeriesValue,
    /// The final `(8/3) 6^l` form, as returned by [`logical_error_bound`].
    pub total: SeriesValue,
}

pub fn bound_breakdown(inputs: &BoundInputs) -> Result<BoundBreakdown> {
    inputs.validate()?;
    let sites = (inputs.l * inputs.l) as f64;
    let r = inputs.r_cor.max(1.0);
    let chain = saw_chain_bound(inputs.p, r)?;
    let scaled = match chain {
        SeriesValue::Finite(v) => SeriesValue::Finite(sites * v),
        d => d,
    };
    let p_bm = sites * boundary_mismatch_bound(inputs.p, inputs.r_cor)?;
    let intermediate_total = match chain {
        SeriesValue::Finite(v) => SeriesValue::Finite(sites * 2.0 * v + p_bm),
        d => d,
    };
    Ok(BoundBreakdown {
        p_error: scaled,
        p_ex: scaled,
        p_bm,
        intermediate_total,
        total: logical_error_bound(inputs)?,
    })
}

/// Threshold of the log-scaled bound: the `p` solving
/// `p / (1 - p) = e^{-4/alpha} / 36`.
pub fn analytic_threshold(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter("alpha must be positive"));
    }
    let odds = math::exp(-4.0 / alpha) / 36.0;
    Ok(odds / (1.0 + odds))
}

/// Saturating depolarising model `(3/4) (1 - e^{-gamma t})`.
pub fn failure_model(gamma: f64, t: f64) -> f64 {
    0.75 * (1.0 - math::exp(-gamma * t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FailurePoint {
    pub t: f64,
    pub p_fail: f64,
    pub n_trials: usize,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct FailureSeries {
    pub points: Vec<FailurePoint>,
}

impl FailureSeries {
    pub fn new(points: Vec<FailurePoint>) -> Result<Self> {
        for w in points.windows(2) {
            if !(w[1].t > w[0].t) {
                return Err(Error::DegenerateSeries("t must be strictly increasing"));
            }
        }
        if points.iter().any(|p| !(0.0..=1.0).contains(&p.p_fail)) {
            return Err(Error::DegenerateSeries("p_fail outside [0, 1]"));
        }
        Ok(Self { points })
    }

    /// Builds a series from failure counts per cycle `t = 1, 2, ...`.
    pub fn from_counts(failures: &[usize], n_trials: usize) -> Result<Self> {
        if n_trials == 0 {
            return Err(Error::DegenerateSeries("no trials"));
        }
        Self::new(
            failures
                .iter()
                .enumerate()
                .map(|(k, &f)| FailurePoint {
                    t: (k + 1) as f64,
                    p_fail: f as f64 / n_trials as f64,
                    n_trials,
                })
                .collect(),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitStatus {
    Ok,
    /// Every point is zero: no failure observed.
    AllZero,
    /// Every point is at or above saturation: the estimate is a lower bound.
    Saturated,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaFit {
    pub gamma: f64,
    pub residual: f64,
    pub status: FitStatus,
}

pub const FIT_LOG_GAMMA_RANGE: (f64, f64) = (1e-8, 10.0);

fn weighted_residual(series: &FailureSeries, gamma: f64) -> f64 {
    series
        .points
        .iter()
        .map(|pt| {
            let f = failure_model(gamma, pt.t);
            let var = (f * (1.0 - f)).max(1e-300);
            let d = pt.p_fail - f;
            pt.n_trials as f64 * d * d / var
        })
        .sum()
}

/// Weighted least squares of `(3/4)(1 - e^{-gamma t})` against the series
/// with binomial weights `n / (f (1 - f))`, minimised by golden-section
/// search over `ln gamma` in `[1e-8, 10]`.
pub fn fit_gamma_eff(series: &FailureSeries) -> Result<GammaFit> {
    if series.points.len() < 3 {
        return Err(Error::DegenerateSeries("need at least three points"));
    }
    if series.points.iter().all(|p| p.p_fail == 0.0) {
        return Ok(GammaFit {
            gamma: 0.0,
            residual: 0.0,
            status: FitStatus::AllZero,
        });
    }
    let saturated = series.points.iter().all(|p| p.p_fail >= 0.75);

    let objective = |log_g: f64| weighted_residual(series, math::exp(log_g));
    let (mut a, mut b) = (math::ln(FIT_LOG_GAMMA_RANGE.0), math::ln(FIT_LOG_GAMMA_RANGE.1));
    // coarse scan first: the objective can have a flat shoulder near saturation
    let grid = 200;
    let mut best_k = 0;
    let mut best_v = f64::INFINITY;
    for k in 0..=grid {
        let x = a + (b - a) * k as f64 / grid as f64;
        let v = objective(x);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let step = (b - a) / grid as f64;
    let center = a + step * best_k as f64;
    a = (center - step).max(a);
    b = (center + step).min(b);

    let inv_phi = (math::sqrt(5.0) - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = objective(c);
    let mut fd = objective(d);
    for _ in 0..200 {
        if math::abs(b - a) < 1e-14 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    let log_g = (a + b) / 2.0;
    let gamma = math::exp(log_g);
    Ok(GammaFit {
        gamma,
        residual: weighted_residual(series, gamma),
        status: if saturated { FitStatus::Saturated } else { FitStatus::Ok },
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResourceParams {
    /// Ancilla dissipation rate.
    pub gamma: f64,
    /// Qubit-spin coupling rate (limits the gate time `1/kappa`).
    pub kappa: f64,
    /// Qubit decoherence rate.
    pub big_gamma: f64,
    pub j_over_gamma: f64,
    pub h_over_gamma: f64,
    /// Target for `J gamma tau^2`.
    pub trotter_product_j: f64,
    /// Target for `h gamma tau^2`.
    pub trotter_product_h: f64,
    /// Monte Carlo steps per cooling, each lasting `1/gamma`.
    pub mc_steps: f64,
}

impl ResourceParams {
    /// The hardware operating point: `J, h ~ 10 gamma`, Trotter products
    /// `0.1`, `100` Monte Carlo steps, `Gamma/gamma = 1e-4`, `Gamma/kappa = 1e-5`.
    pub fn reference() -> Self {
        Self::from_ratios(1e-4, 1e-5)
    }

    /// `gamma = 1`, with `Gamma` and `kappa` from the two ratios.
    pub fn from_ratios(gamma_ratio: f64, kappa_ratio: f64) -> Self {
        let gamma = 1.0;
        let big_gamma = gamma_ratio * gamma;
        Self {
            gamma,
            kappa: big_gamma / kappa_ratio,
            big_gamma,
            j_over_gamma: 10.0,
            h_over_gamma: 10.0,
            trotter_product_j: 0.1,
            trotter_product_h: 0.1,
            mc_steps: 100.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResourceWarning {
    /// `J <= gamma` or `h <= gamma`: the Markov approximation needs `J, h >> gamma`.
    MarkovApproximation,
    /// `J gamma tau^2 >= 1` or `h gamma tau^2 >= 1`.
    TrotterError,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResourceEstimate {
    pub tau: f64,
    pub m: u64,
    pub t_cool: f64,
    pub t_cycle: f64,
    pub p_cycle: f64,
    pub warnings: Vec<ResourceWarning>,
}

/// Time budget of one cycle: `tau = min(sqrt(P_J / (J/gamma)), sqrt(P_h / (h/gamma))) / gamma`,
/// `t_cool = mc_steps / gamma`, `m = round(t_cool / tau)`,
/// `t_cycle = t_cool + m / kappa`, `p_cycle = 1 - e^{-Gamma t_cycle}`.
pub fn resource_estimate(params: &ResourceParams) -> Result<ResourceEstimate> {
    let positive = [
        params.gamma,
        params.kappa,
        params.big_gamma,
        params.j_over_gamma,
        params.h_over_gamma,
        params.trotter_product_j,
        params.trotter_product_h,
        params.mc_steps,
    ];
    if positive.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "resource parameters must be positive and finite",
        ));
    }
    let tau_j = math::sqrt(params.trotter_product_j / params.j_over_gamma) / params.gamma;
    let tau_h = math::sqrt(params.trotter_product_h / params.h_over_gamma) / params.gamma;
    let tau = tau_j.min(tau_h);
    let t_cool = params.mc_steps / params.gamma;
    let m = (math::round(t_cool / tau) as u64).max(1);
    let t_cycle = t_cool + m as f64 / params.kappa;
    let p_cycle = 1.0 - math::exp(-params.big_gamma * t_cycle);

    let mut warnings = Vec::new();
    if params.j_over_gamma <= 1.0 || params.h_over_gamma <= 1.0 {
        warnings.push(ResourceWarning::MarkovApproximation);
    }
    let j = params.j_over_gamma * params.gamma;
    let h = params.h_over_gamma * params.gamma;
    if j * params.gamma * tau * tau >= 1.0 || h * params.gamma * tau * tau >= 1.0 {
        warnings.push(ResourceWarning::TrotterError);
    }
    Ok(ResourceEstimate {
        tau,
        m,
        t_cool,
        t_cycle,
        p_cycle,
        warnings,
    })
}

/// One fitted decay rate at `(L, p)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatePoint {
    pub l: usize,
    pub p: f64,
    pub gamma: f64,
}

/// Where the decay-rate curves of adjacent sizes cross.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdEstimate {
    /// Crossing per adjacent size pair `(L_small, L_large, p_cross)`.
    pub crossings: Vec<(usize, usize, f64)>,
    /// `[min, max]` of the crossings, when at least one was found.
    pub interval: Option<(f64, f64)>,
    /// Some adjacent pair never crossed inside the sampled `p` range.
    pub open: bool,
}

/// Crossing points of `gamma_eff(p)` between adjacent sizes, locating the
/// sign change of `ln gamma_small - ln gamma_large` and interpolating it
/// linearly in `ln p`.
pub fn estimate_threshold(points: &[RatePoint]) -> Result<ThresholdEstimate> {
    let mut sizes: Vec<usize> = points.iter().map(|r| r.l).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut ps: Vec<f64> = points.iter().map(|r| r.p).collect();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    if sizes.len() < 2 {
        return Err(Error::DegenerateSeries("need at least two sizes"));
    }
    if ps.len() < 3 {
        return Err(Error::DegenerateSeries("need at least three p values"));
    }
    let lookup = |l: usize, p: f64| -> Option<f64> {
        points
            .iter()
            .find(|r| r.l == l && r.p == p && r.gamma > 0.0)
            .map(|r| math::ln(r.gamma))
    };
    let mut crossings = Vec::new();
    let mut open = false;
    for pair in sizes.windows(2) {
        let (small, large) = (pair[0], pair[1]);
        let diffs: Vec<(f64, f64)> = ps
            .iter()
            .filter_map(|&p| Some((math::ln(p), lookup(small, p)? - lookup(large, p)?)))
            .collect();
        let found = diffs.windows(2).find_map(|w| {
            let ((x0, d0), (x1, d1)) = (w[0], w[1]);
            if d0 == 0.0 {
                Some(math::exp(x0))
            } else if d0.signum() != d1.signum() {
                Some(math::exp(x0 + (x1 - x0) * d0 / (d0 - d1)))
            } else {
                None
            }
        });
        let found = found.or_else(|| diffs.last().filter(|d| d.1 == 0.0).map(|d| math::exp(d.0)));
        match found {
            Some(p) => crossings.push((small, large, p)),
            None => open = true,
        }
    }
    let interval = if crossings.is_empty() {
        None
    } else {
        let lo = crossings.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
        let hi = crossings.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    };
    Ok(ThresholdEstimate {
        crossings,
        interval,
        open,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn direct_sum(term: impl Fn(u32) -> f64, l0: u32, terms: u32) -> f64 {
        (l0..l0 + terms).map(term).sum()
    }

    #[test]
    fn saw_bound_closed_form_matches_direct_sum() {
        let p: f64 = 0.001;
        let closed = saw_chain_bound(p, 4.0).unwrap().value();
        let x = 8.0 * p.sqrt();
        assert!((closed - 0.75 * x.powi(4) / (1.0 - x)).abs() < 1e-15);
        let direct = direct_sum(
            |l| {
                let l = l as f64;
                (3f64.ln() + (l - 1.0) * 4f64.ln() + l * 2f64.ln() + l / 2.0 * p.ln()).exp()
            },
            4,
            10_000,
        );
        assert!((closed - direct).abs() / direct < 1e-12);
    }

    #[test]
    fn saw_bound_divergence_and_domain() {
        assert!(saw_chain_bound(1.0 / 64.0, 3.0).unwrap().is_divergent());
        assert!(saw_chain_bound(0.1, 3.0).unwrap().is_divergent());
        assert!(saw_chain_bound(0.0, 3.0).is_err());
        assert!(saw_chain_bound(0.01, 0.5).is_err());
        let mut prev = f64::INFINITY;
        for r in 1..30 {
            let v = saw_chain_bound(0.005, r as f64).unwrap().value();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn logical_bound_closed_form_matches_direct_sum() {
        for &(p, l, alpha) in &[(1e-4, 16usize, 1.0), (5e-3, 64, 2.0), (0.02, 1000, 3.0)] {
            let inputs = BoundInputs::log_scaled(p, l, alpha);
            let closed = logical_error_bound(&inputs).unwrap().value();
            let l0 = inputs.r_cor.ceil() as u32;
            let chains = direct_sum(
                |k| {
                    let k = k as f64;
                    ((8.0f64 / 3.0).ln() + k * 6f64.ln() + k / 2.0 * p.ln()).exp()
                },
                l0,
                20_000,
            );
            let direct = (l * l) as f64 * (chains + (p / (1.0 - p)).powf(inputs.r_cor / 2.0));
            assert!((closed - direct).abs() / direct < 1e-12, "{p} {closed} {direct}");
        }
        assert!(logical_error_bound(&BoundInputs::log_scaled(0.03, 16, 1.0))
            .unwrap()
            .is_divergent());
    }

    #[test]
    fn logical_bound_scaling_examples() {
        let small = logical_error_bound(&BoundInputs::log_scaled(1e-4, 16, 1.0))
            .unwrap()
            .value();
        let large = logical_error_bound(&BoundInputs::log_scaled(1e-4, 256, 1.0))
            .unwrap()
            .value();
        assert!(large < small);
        let small = logical_error_bound(&BoundInputs::log_scaled(0.01, 16, 1.0))
            .unwrap()
            .value();
        let large = logical_error_bound(&BoundInputs::log_scaled(0.01, 256, 1.0))
            .unwrap()
            .value();
        assert!(large > small);
        let mut prev = f64::INFINITY;
        for r in [2.0, 5.0, 10.0, 40.0, 200.0] {
            let v = logical_error_bound(&BoundInputs {
                p: 1e-4,
                l: 16,
                alpha: 0.0,
                r_cor: r,
            })
            .unwrap()
            .value();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-100);
    }

    #[test]
    fn logical_bound_monotone_in_p() {
        let mut prev = 0.0;
        for k in 1..50 {
            let p = k as f64 * 5e-4;
            let v = logical_error_bound(&BoundInputs::log_scaled(p, 32, 1.5))
                .unwrap()
                .value();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn breakdown_is_consistent() {
        let inputs = BoundInputs::log_scaled(1e-4, 64, 2.0);
        let b = bound_breakdown(&inputs).unwrap();
        assert_eq!(b.total, logical_error_bound(&inputs).unwrap());
        assert_eq!(b.p_error, b.p_ex);
        let sum = b.p_error.value() + b.p_ex.value() + b.p_bm;
        assert!((b.intermediate_total.value() - sum).abs() < 1e-15 * sum);
        let inputs = BoundInputs::from_couplings(1e-3, 10, 3.0, 1.0);
        assert_eq!(inputs.r_cor, 6.0);
    }

    #[test]
    fn thresholds() {
        let t1 = analytic_threshold(1.0).unwrap();
        let t2 = analytic_threshold(2.0).unwrap();
        assert!((4.85e-4..=5.35e-4).contains(&t1), "{t1}");
        assert!((3.55e-3..=3.95e-3).contains(&t2), "{t2}");
        assert!((analytic_threshold(1e9).unwrap() - 1.0 / 37.0).abs() < 1e-9);
        let mut prev = 0.0;
        for k in 1..100 {
            let t = analytic_threshold(k as f64 * 0.1).unwrap();
            assert!(t > prev);
            prev = t;
        }
        assert!(analytic_threshold(0.0).is_err());
    }

    fn exact_series(gamma: f64, tmax: usize, n: usize) -> FailureSeries {
        FailureSeries::new(
            (1..=tmax)
                .map(|t| FailurePoint {
                    t: t as f64,
                    p_fail: failure_model(gamma, t as f64),
                    n_trials: n,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn fit_recovers_noiseless_rate() {
        let fit = fit_gamma_eff(&exact_series(0.01, 200, 1000)).unwrap();
        assert!((fit.gamma - 0.01).abs() < 1e-6, "{}", fit.gamma);
        assert_eq!(fit.status, FitStatus::Ok);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn fit_degenerate_cases() {
        let zeros = FailureSeries::from_counts(&[0; 10], 100).unwrap();
        let fit = fit_gamma_eff(&zeros).unwrap();
        assert_eq!((fit.gamma, fit.status), (0.0, FitStatus::AllZero));
        let sat = FailureSeries::from_counts(&[80; 10], 100).unwrap();
        assert_eq!(fit_gamma_eff(&sat).unwrap().status, FitStatus::Saturated);
        let short = FailureSeries::from_counts(&[1, 2], 100).unwrap();
        assert!(fit_gamma_eff(&short).is_err());
        assert!(FailureSeries::new(vec![
            FailurePoint {
                t: 2.0,
                p_fail: 0.1,
                n_trials: 1
            },
            FailurePoint {
                t: 1.0,
                p_fail: 0.1,
                n_trials: 1
            },
        ])
        .is_err());
    }

    #[test]
    fn fit_is_scale_consistent() {
        let base = exact_series(0.02, 100, 500);
        let g1 = fit_gamma_eff(&base).unwrap().gamma;
        let c = 4.0;
        let scaled =
            FailureSeries::new(base.points.iter().map(|p| FailurePoint { t: p.t * c, ..*p }).collect()).unwrap();
        let g2 = fit_gamma_eff(&scaled).unwrap().gamma;
        assert!((g1 / c - g2).abs() < 1e-9 * g1, "{g1} {g2}");
    }

    #[test]
    fn resource_reference_chain() {
        let est = resource_estimate(&ResourceParams::reference()).unwrap();
        assert!((est.tau - 0.1).abs() < 1e-12);
        assert_eq!(est.m, 1000);
        assert!((est.t_cool - 100.0).abs() < 1e-12);
        // kappa = Gamma / 1e-5 = 10 gamma
        assert!((est.t_cycle - (100.0 + 1000.0 / 10.0)).abs() < 1e-9);
        assert!((est.p_cycle - (1.0 - (-0.02f64).exp())).abs() < 1e-12);
        assert!(est.warnings.is_empty());
    }

    #[test]
    fn resource_warnings() {
        let mut p = ResourceParams::reference();
        p.j_over_gamma = 0.5;
        let est = resource_estimate(&p).unwrap();
        assert!(est.warnings.contains(&ResourceWarning::MarkovApproximation));
        let mut p = ResourceParams::reference();
        p.trotter_product_h = 5.0;
        p.trotter_product_j = 5.0;
        assert!(resource_estimate(&p)
            .unwrap()
            .warnings
            .contains(&ResourceWarning::TrotterError));
        p.kappa = 0.0;
        assert!(resource_estimate(&p).is_err());
    }

    #[test]
    fn threshold_from_synthetic_curves() {
        let pc = 0.06;
        let ps = [0.02, 0.03, 0.04, 0.05, 0.07, 0.08];
        let mut pts = Vec::new();
        for l in [8usize, 10, 12, 16] {
            for &p in &ps {
                pts.push(RatePoint {
                    l,
                    p,
                    gamma: 0.05 * (p / pc).powf(0.3 * l as f64),
                });
            }
        }
        let est = estimate_threshold(&pts).unwrap();
        assert!(!est.open);
        let (lo, hi) = est.interval.unwrap();
        assert!((lo - pc).abs() < 0.005 && (hi - pc).abs() < 0.005, "{lo} {hi}");
    }

    #[test]
    fn threshold_flags_and_errors() {
        let mut pts = Vec::new();
        for l in [8usize, 12] {
            for p in [0.01, 0.02, 0.03] {
                pts.push(RatePoint {
                    l,
                    p,
                    gamma: p / l as f64,
                });
            }
        }
        let est = estimate_threshold(&pts).unwrap();
        assert!(est.open && est.interval.is_none());
        let single: Vec<RatePoint> = pts.iter().filter(|r| r.p == 0.01).cloned().collect();
        assert!(estimate_threshold(&single).is_err());
    }
}
