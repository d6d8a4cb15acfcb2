//! Flat `key = value` experiment files.
//!
//! One setting per line; `#` starts a comment; keys mirror the CLI flags:
//!
//! ```text
//! # below-threshold scaling at desk scale
//! L = 8, 12
//! p = 0.02, 0.08
//! alpha = 1
//! cooler = metropolis
//! cycles = 100
//! trials = 500
//! sweeps = 2000
//! seed = 42
//! out = run.csv
//! ```
//!
//! Recognised keys: `L`, `p`, `alpha`, `boundary` (`toric`|`planar`),
//! `cooler` (`metropolis`|`digital`|`oracle`), `cycles`, `trials`, `sweeps`,
//! `stages`, `order` (`raster`|`random`|`nfold`), `schedule`
//! (`beta:sweeps,...`), `beta_h`, `J`, `h`, `seed`, `decoder`
//! (`exact`|`greedy`), `out`, `summary`, `bootstrap`, `ci`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use mftp_core::cooler::{parse_schedule, SweepOrder};
use mftp_core::decoder::{DecoderConfig, MatchingMode};
use mftp_core::harness::{CoolerKind, TrialConfig};
use mftp_core::Boundary;

use crate::error::{Error, Result};

/// Default bootstrap replicates per cell.
pub const DEFAULT_BOOTSTRAP: usize = 1000;
/// Default two-sided confidence level of the reported interval.
pub const DEFAULT_CI: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub l_list: Vec<usize>,
    pub p_list: Vec<f64>,
    pub trials: usize,
    pub trial: TrialConfig,
    /// Per-cycle CSV output.
    pub out: Option<PathBuf>,
    /// Summary JSON output.
    pub summary: Option<PathBuf>,
    pub bootstrap: usize,
    pub ci_level: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            l_list: Vec::new(),
            p_list: Vec::new(),
            trials: 100,
            trial: TrialConfig::default(),
            out: None,
            summary: None,
            bootstrap: DEFAULT_BOOTSTRAP,
            ci_level: DEFAULT_CI,
        }
    }
}

pub fn parse_boundary(s: &str) -> std::result::Result<Boundary, String> {
    match s {
        "toric" | "torus" => Ok(Boundary::Toric),
        "planar" => Ok(Boundary::Planar),
        _ => Err(format!("unknown boundary `{s}` (toric|planar)")),
    }
}

pub fn parse_order(s: &str) -> std::result::Result<SweepOrder, String> {
    match s {
        "raster" => Ok(SweepOrder::Raster),
        "random" => Ok(SweepOrder::Random),
        "nfold" => Ok(SweepOrder::NFold),
        _ => Err(format!("unknown sweep order `{s}` (raster|random|nfold)")),
    }
}

pub fn parse_decoder(s: &str) -> std::result::Result<DecoderConfig, String> {
    let mode = match s {
        "exact" => MatchingMode::Exact,
        "greedy" => MatchingMode::Greedy,
        _ => return Err(format!("unknown decoder `{s}` (exact|greedy)")),
    };
    Ok(DecoderConfig {
        mode,
        ..DecoderConfig::default()
    })
}

fn list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<T>().map_err(|_| format!("bad list entry `{v}`")))
        .collect()
}

fn scalar<T: FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse::<T>().map_err(|_| format!("bad value `{value}`"))
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::File {
            path: path.to_owned(),
            source,
        })?;
        text.parse()
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let t = &mut self.trial;
        match key {
            "L" => self.l_list = list(value)?,
            "p" => self.p_list = list(value)?,
            "trials" => self.trials = scalar(value)?,
            "alpha" => t.alpha = scalar(value)?,
            "boundary" => t.boundary = parse_boundary(value)?,
            "cooler" => t.cooler = value.parse::<CoolerKind>().map_err(|e| e.to_string())?,
            "cycles" => t.cycles = scalar(value)?,
            "sweeps" => t.sweeps = scalar(value)?,
            "stages" => t.stages = scalar(value)?,
            "order" => t.order = parse_order(value)?,
            "schedule" => t.schedule = Some(parse_schedule(value).map_err(|e| e.to_string())?),
            "beta_h" => t.beta_h = Some(scalar(value)?),
            "J" => t.j = Some(scalar(value)?),
            "h" => t.h = scalar(value)?,
            "seed" => t.base_seed = scalar(value)?,
            "decoder" => t.decoder = parse_decoder(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "summary" => self.summary = Some(PathBuf::from(value)),
            "bootstrap" => self.bootstrap = scalar(value)?,
            "ci" => self.ci_level = scalar(value)?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Error::Config {
            line: 0,
            msg: msg.to_owned(),
        };
        if self.trials == 0 {
            return Err(bad("trials must be >= 1"));
        }
        if self.l_list.iter().any(|&l| l < 2) {
            return Err(bad("every L must be >= 2"));
        }
        if self.p_list.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(bad("every p must lie in [0, 1]"));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(bad("ci must lie in (0, 1)"));
        }
        self.trial.validate()?;
        Ok(())
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: n + 1,
                msg: "expected `key = value`".into(),
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|msg| Error::Config { line: n + 1, msg })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
