//! One MFTP cycle and one seeded trial.
//!
//! A cycle corrects Z errors through the vertex checks and then X errors
//! through the face checks (the Hadamard basis change is a role swap of the
//! two check families). A trial injects noise, runs a cycle and classifies a
//! cloned frame with the reference decoder, `cycles` times.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use crate::analytics::{FailurePoint, FailureSeries};
use crate::cooler::{
    anneal, correction_from_spins, geometric_schedule, nishimori_beta, CoolingParams, Stage, SweepOrder,
    LADDER_START_BETA_H,
};
use crate::decoder::DecoderConfig;
use crate::digital::{trotter_cool, DigitalCoolingParams, RateMode};
use crate::error::{Error, Result};
use crate::frame::{apply_correction, homology_class, inject_errors, syndrome_of, LogicalClass, PauliFrame, PauliKind};
use crate::lattice::{Boundary, LatticeGeometry};
use crate::math;

/// A cooler bound to concrete parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Cooler {
    /// Metropolis annealing of the RPGM.
    Metropolis(CoolingParams),
    /// Trotterised plaquette/field pumping.
    Digital(DigitalCoolingParams),
    /// Feeds back the exact error indicator (a perfect cooler).
    OracleExact,
}

/// Cooler selector for experiment configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CoolerKind {
    #[default]
    Metropolis,
    Digital,
    OracleExact,
}

impl CoolerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CoolerKind::Metropolis => "metropolis",
            CoolerKind::Digital => "digital",
            CoolerKind::OracleExact => "oracle",
        }
    }
}

impl core::str::FromStr for CoolerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metropolis" => Ok(CoolerKind::Metropolis),
            "digital" => Ok(CoolerKind::Digital),
            "oracle" | "oracle-exact" | "oracle_exact" => Ok(CoolerKind::OracleExact),
            _ => Err(Error::Parse("cooler must be one of metropolis, digital, oracle")),
        }
    }
}

/// Cools one check family and returns the correction to apply.
fn cool_family<R: Rng + ?Sized>(
    frame: &PauliFrame,
    geom: &LatticeGeometry,
    kind: PauliKind,
    cooler: &Cooler,
    rng: &mut R,
) -> Result<crate::bits::BitField> {
    let check = kind.detected_by();
    match cooler {
        Cooler::OracleExact => Ok(frame.errors(kind).clone()),
        Cooler::Metropolis(params) => {
            let signs = syndrome_of(frame.errors(kind), geom, check);
            Ok(correction_from_spins(&anneal(&signs, params, geom, check, rng)?))
        }
        Cooler::Digital(params) => {
            let signs = syndrome_of(frame.errors(kind), geom, check);
            Ok(correction_from_spins(&trotter_cool(&signs, params, geom, check, rng)?))
        }
    }
}

/// Steps (i)-(iv) for Z errors on the vertex checks, then for X errors on
/// the face checks. Noise is injected by the caller.
pub fn mftp_cycle<R: Rng + ?Sized>(
    frame: &mut PauliFrame,
    geom: &LatticeGeometry,
    cooler: &Cooler,
    rng: &mut R,
) -> Result<()> {
    if frame.len() != geom.edge_count() {
        return Err(Error::SizeMismatch {
            expected: geom.edge_count(),
            actual: frame.len(),
        });
    }
    for kind in [PauliKind::Z, PauliKind::X] {
        let correction = cool_family(frame, geom, kind, cooler, rng)?;
        apply_correction(frame, &correction, kind)?;
    }
    Ok(())
}

/// Bounds on the error rate used to pick the cooling temperature, so that
/// `p = 0` and `p >= 1/2` still get a finite Nishimori temperature.
pub const COOLING_P_RANGE: (f64, f64) = (1e-4, 0.49);

/// Per-trial settings shared by every `(L, p)` cell of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialConfig {
    pub boundary: Boundary,
    pub alpha: f64,
    pub h: f64,
    /// Fixed `J`; `None` means log-scaled `J` from `alpha`.
    pub j: Option<f64>,
    pub cooler: CoolerKind,
    pub cycles: usize,
    /// Metropolis sweeps per anneal, or Trotter steps for the digital cooler.
    pub sweeps: usize,
    /// Cooling inverse temperature in units of `1/h`; `None` means Nishimori.
    pub beta_h: Option<f64>,
    /// Stages of the geometric annealing ladder; `1` is a quench at the target.
    pub stages: usize,
    /// Explicit Metropolis schedule, overriding `sweeps`, `stages` and `beta_h`.
    pub schedule: Option<Vec<Stage>>,
    pub order: SweepOrder,
    pub base_seed: u64,
    pub decoder: DecoderConfig,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            boundary: Boundary::Toric,
            alpha: 1.0,
            h: 1.0,
            j: None,
            cooler: CoolerKind::Metropolis,
            cycles: 100,
            sweeps: DEFAULT_TRIAL_SWEEPS,
            beta_h: None,
            stages: DEFAULT_TRIAL_STAGES,
            schedule: None,
            order: SweepOrder::NFold,
            base_seed: 0,
            decoder: DecoderConfig::default(),
        }
    }
}

/// Default annealing stages of the harness cooler: a quench from all-up at
/// the bath temperature, the fixed-temperature dissipative protocol.
pub const DEFAULT_TRIAL_STAGES: usize = 1;
/// Default Metropolis sweeps (or Trotter steps) per sub-cycle.
pub const DEFAULT_TRIAL_SWEEPS: usize = 1000;

/// Time step of the digital cooler; with unit base rate `2 * rate * tau = 1`.
pub const DIGITAL_TAU: f64 = 0.5;

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cycles == 0 {
            return Err(Error::InvalidParameter("cycles must be >= 1"));
        }
        if self.sweeps == 0 {
            return Err(Error::InvalidParameter("sweeps must be >= 1"));
        }
        if !(self.h > 0.0) {
            return Err(Error::InvalidParameter("h must be positive"));
        }
        if self.j.is_none() && !(self.alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive"));
        }
        if let Some(j) = self.j {
            if !(j > 0.0) {
                return Err(Error::InvalidParameter("J must be positive"));
            }
        }
        if self.stages == 0 {
            return Err(Error::InvalidParameter("stages must be >= 1"));
        }
        if let Some(b) = self.beta_h {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::InvalidParameter("beta*h must be positive"));
            }
        }
        Ok(())
    }

    /// Cooling inverse temperature at error rate `p`.
    pub fn cooling_beta(&self, p: f64) -> Result<f64> {
        match self.beta_h {
            Some(b) => Ok(b / self.h),
            None => nishimori_beta(p.clamp(COOLING_P_RANGE.0, COOLING_P_RANGE.1), self.h),
        }
    }

    /// Plaquette coupling on a lattice of size `l`.
    pub fn coupling(&self, l: usize) -> f64 {
        self.j.unwrap_or_else(|| self.alpha * self.h * math::ln(l as f64) / 2.0)
    }

    /// The concrete cooler for one `(L, p)` cell.
    pub fn cooler_for(&self, l: usize, p: f64) -> Result<Cooler> {
        self.validate()?;
        let beta = self.cooling_beta(p)?;
        let j = self.coupling(l);
        Ok(match self.cooler {
            CoolerKind::OracleExact => Cooler::OracleExact,
            CoolerKind::Metropolis => {
                let mut params = CoolingParams::fixed(j, self.h, beta, self.sweeps)?;
                params.alpha = self.alpha;
                params.order = self.order;
                params.schedule = match &self.schedule {
                    Some(stages) => stages.clone(),
                    None => geometric_schedule(LADDER_START_BETA_H / self.h, beta, self.stages, self.sweeps)?,
                };
                if let Some(last) = params.schedule.last() {
                    params.beta_target = last.beta;
                }
                params.validate()?;
                Cooler::Metropolis(params)
            }
            CoolerKind::Digital => Cooler::Digital(DigitalCoolingParams::thermal(
                beta,
                j,
                self.h,
                1.0,
                DIGITAL_TAU,
                self.sweeps,
                RateMode::DetailedBalance,
            )?),
        })
    }
}

/// SplitMix64 finaliser.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one trial:
/// `base_seed ^ splitmix64(trial ^ splitmix64(L ^ splitmix64(p.to_bits())))`.
/// Stable across releases; changing it changes every recorded CSV.
pub fn trial_seed(base_seed: u64, trial: u64, l: usize, p: f64) -> u64 {
    base_seed ^ splitmix64(trial ^ splitmix64(l as u64 ^ splitmix64(p.to_bits())))
}

/// Per-cycle outcome of one trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub l: usize,
    pub p_bits: u64,
    /// Logical class after each cycle.
    pub classes: Vec<LogicalClass>,
    /// Monotone: some cycle up to this one had a nontrivial class.
    pub failed_any: Vec<bool>,
    /// First cycle (1-based) with a nontrivial class.
    pub first_failure: Option<usize>,
}

impl TrialRecord {
    pub fn p(&self) -> f64 {
        f64::from_bits(self.p_bits)
    }
}

/// Geometry and cooler of one `(L, p)` cell, reused across its trials.
#[derive(Clone, Debug)]
pub struct TrialRunner {
    config: TrialConfig,
    geom: LatticeGeometry,
    cooler: Cooler,
    p: f64,
}

impl TrialRunner {
    pub fn new(config: &TrialConfig, l: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
        Ok(Self {
            geom: LatticeGeometry::new(l, config.boundary)?,
            cooler: config.cooler_for(l, p)?,
            config: config.clone(),
            p,
        })
    }

    pub fn geometry(&self) -> &LatticeGeometry {
        &self.geom
    }

    pub fn cooler(&self) -> &Cooler {
        &self.cooler
    }

    pub fn run(&self, trial: u64) -> Result<TrialRecord> {
        let l = self.geom.size();
        let seed = trial_seed(self.config.base_seed, trial, l, self.p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut frame = PauliFrame::for_geometry(&self.geom);
        let cycles = self.config.cycles;
        let mut classes = Vec::with_capacity(cycles);
        let mut failed_any = Vec::with_capacity(cycles);
        let mut first_failure = None;
        for t in 1..=cycles {
            inject_errors(&mut frame, self.p, &mut rng)?;
            mftp_cycle(&mut frame, &self.geom, &self.cooler, &mut rng)?;
            let class = homology_class(&frame, &self.geom, &self.config.decoder)?;
            if class.is_failure() && first_failure.is_none() {
                first_failure = Some(t);
            }
            classes.push(class);
            failed_any.push(first_failure.is_some());
        }
        Ok(TrialRecord {
            trial,
            seed,
            l,
            p_bits: self.p.to_bits(),
            classes,
            failed_any,
            first_failure,
        })
    }
}

/// Runs trial `trial` of the `(L, p)` cell.
pub fn run_trial(config: &TrialConfig, l: usize, p: f64, trial: u64) -> Result<TrialRecord> {
    TrialRunner::new(config, l, p)?.run(trial)
}

/// Number of trials with a nontrivial class at each cycle.
pub fn failure_counts(records: &[TrialRecord]) -> Vec<usize> {
    let cycles = records.iter().map(|r| r.classes.len()).max().unwrap_or(0);
    let mut counts = alloc::vec![0usize; cycles];
    for r in records {
        for (c, class) in counts.iter_mut().zip(&r.classes) {
            *c += class.is_failure() as usize;
        }
    }
    counts
}

/// Per-cycle failure fractions `P(class != I)` with `t` = cycle index.
pub fn failure_series(records: &[TrialRecord]) -> Result<FailureSeries> {
    FailureSeries::from_counts(&failure_counts(records), records.len())
}

/// Failure series restricted to a subset of trials (used for bootstrap resampling).
pub fn failure_series_of(records: &[TrialRecord], picks: &[usize]) -> Result<FailureSeries> {
    if picks.is_empty() {
        return Err(Error::DegenerateSeries("no trials"));
    }
    let cycles = records.first().map_or(0, |r| r.classes.len());
    let mut counts = alloc::vec![0usize; cycles];
    for &i in picks {
        for (c, class) in counts.iter_mut().zip(&records[i].classes) {
            *c += class.is_failure() as usize;
        }
    }
    Ok(FailureSeries {
        points: counts
            .iter()
            .enumerate()
            .map(|(k, &f)| FailurePoint {
                t: (k + 1) as f64,
                p_fail: f as f64 / picks.len() as f64,
                n_trials: picks.len(),
            })
            .collect(),
    })
}

/// Draws `n` indices uniformly with replacement from `0..len`.
pub fn bootstrap_indices<R: RngCore + ?Sized>(len: usize, n: usize, rng: &mut R) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..len)).collect()
}
