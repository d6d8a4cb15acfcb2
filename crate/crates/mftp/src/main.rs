use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mftp::config::{parse_boundary, parse_decoder, parse_order, ExperimentConfig, DEFAULT_BOOTSTRAP, DEFAULT_CI};
use mftp::output::{fit_status_name, read_records_csv, write_records_csv, write_summary_json};
use mftp::snapshot::{spin_image, write_pgm, write_spin_csv};
use mftp::stats::bootstrap_gamma;
use mftp::sweep::{run_sweep, CellResult};
use mftp_core::analytics::{
    analytic_threshold, bound_breakdown, estimate_threshold, fit_gamma_eff, resource_estimate, BoundInputs, RatePoint,
    ResourceParams, SeriesValue,
};
use mftp_core::cooler::{
    anneal, correction_from_spins, geometric_schedule, parse_schedule, CoolingParams, LADDER_START_BETA_H,
};
use mftp_core::digital::{trotter_cool, DigitalCoolingParams, RateMode};
use mftp_core::frame::{inject_errors, syndrome_of, PauliFrame, PauliKind};
use mftp_core::harness::{failure_series, splitmix64, CoolerKind, TrialConfig, TrialRecord, DIGITAL_TAU};
use mftp_core::{Boundary, CheckKind, LatticeGeometry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

/// Measurement-free topological protection simulator.
#[derive(Parser)]
#[command(name = "mftp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one (L, p) cell and print its summary as JSON.
    Simulate(SimulateArgs),
    /// Run the L x p grid of a key-value config file.
    Sweep(SweepArgs),
    /// Chain-counting bound on the logical error probability.
    Bound(BoundArgs),
    /// Analytic threshold for alpha, or the crossing estimate from a sweep summary.
    Threshold(ThresholdArgs),
    /// Fit gamma_eff per (L, p) from a records CSV.
    Fit(FitArgs),
    /// Cycle time and per-cycle error budget of a hardware operating point.
    Estimate(EstimateArgs),
    /// Cool one noisy syndrome and dump the spin configuration.
    CoolDemo(CoolDemoArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long = "alpha", default_value_t = 1.0)]
    alpha: f64,
    #[arg(long = "cycles", default_value_t = 100)]
    cycles: usize,
    #[arg(long = "trials", default_value_t = 100)]
    trials: usize,
    /// Metropolis sweeps per anneal (Trotter steps for the digital cooler).
    #[arg(long = "sweeps")]
    sweeps: Option<usize>,
    /// metropolis | digital | oracle
    #[arg(long = "cooler", default_value = "metropolis")]
    cooler: CoolerKind,
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
    /// exact | greedy
    #[arg(long = "decoder", default_value = "exact", value_parser = parse_decoder)]
    decoder: mftp_core::decoder::DecoderConfig,
    /// Fixed plaquette coupling (default: log-scaled from alpha).
    #[arg(long = "J")]
    j: Option<f64>,
    #[arg(long = "h", default_value_t = 1.0)]
    h: f64,
    /// Explicit schedule `beta:sweeps,...`.
    #[arg(long = "schedule")]
    schedule: Option<String>,
    /// Cooling beta*h (default: Nishimori temperature of p).
    #[arg(long = "beta-h")]
    beta_h: Option<f64>,
    #[arg(long = "stages")]
    stages: Option<usize>,
    /// raster | random | nfold
    #[arg(long = "order", value_parser = parse_order)]
    order: Option<mftp_core::cooler::SweepOrder>,
    /// toric | planar
    #[arg(long = "boundary", default_value = "toric", value_parser = parse_boundary)]
    boundary: Boundary,
    #[arg(long = "bootstrap", default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    #[arg(long = "ci", default_value_t = DEFAULT_CI)]
    ci: f64,
    /// Per-cycle CSV output.
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// Summary JSON output (also printed to stdout).
    #[arg(long = "summary")]
    summary: Option<PathBuf>,
}

impl RunArgs {
    fn trial_config(&self) -> Result<TrialConfig> {
        let mut t = TrialConfig {
            boundary: self.boundary,
            alpha: self.alpha,
            h: self.h,
            j: self.j,
            cooler: self.cooler,
            cycles: self.cycles,
            beta_h: self.beta_h,
            base_seed: self.seed,
            decoder: self.decoder,
            ..TrialConfig::default()
        };
        if let Some(s) = self.sweeps {
            t.sweeps = s;
        }
        if let Some(s) = self.stages {
            t.stages = s;
        }
        if let Some(o) = self.order {
            t.order = o;
        }
        if let Some(s) = &self.schedule {
            t.schedule = Some(parse_schedule(s)?);
        }
        t.validate()?;
        Ok(t)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long = "L")]
    l: usize,
    #[arg(long = "p")]
    p: f64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "config")]
    config: PathBuf,
    /// Overrides `out` from the config.
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// Overrides `summary` from the config.
    #[arg(long = "summary")]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct BoundArgs {
    #[arg(long = "p")]
    p: f64,
    #[arg(long = "L")]
    l: usize,
    #[arg(long = "alpha", default_value_t = 1.0)]
    alpha: f64,
    /// Use r_cor = 2J/h instead of alpha ln L.
    #[arg(long = "J")]
    j: Option<f64>,
    #[arg(long = "h", default_value_t = 1.0)]
    h: f64,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long = "alpha", default_value_t = 1.0)]
    alpha: f64,
    /// Summary JSON from `simulate`/`sweep`: estimate the crossing instead.
    #[arg(long = "summary")]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Records CSV (`trial,seed,L,p,cycle,class,failed`).
    #[arg(long = "csv")]
    csv: PathBuf,
    #[arg(long = "bootstrap", default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    #[arg(long = "ci", default_value_t = DEFAULT_CI)]
    ci: f64,
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EstimateArgs {
    /// Gamma / gamma (qubit decoherence over ancilla dissipation).
    #[arg(long = "gamma-ratio", default_value_t = 1e-4)]
    gamma_ratio: f64,
    /// Gamma / kappa (qubit decoherence over coupling rate).
    #[arg(long = "kappa-ratio", default_value_t = 1e-5)]
    kappa_ratio: f64,
    #[arg(long = "J-over-gamma", default_value_t = 10.0)]
    j_over_gamma: f64,
    #[arg(long = "h-over-gamma", default_value_t = 10.0)]
    h_over_gamma: f64,
    /// Target J gamma tau^2 and h gamma tau^2.
    #[arg(long = "trotter", default_value_t = 0.1)]
    trotter: f64,
    #[arg(long = "mc-steps", default_value_t = 100.0)]
    mc_steps: f64,
}

#[derive(Args)]
struct CoolDemoArgs {
    /// metropolis | digital
    #[arg(long = "engine", default_value = "metropolis")]
    engine: CoolerKind,
    #[arg(long = "L", default_value_t = 8)]
    l: usize,
    #[arg(long = "p", default_value_t = 0.03)]
    p: f64,
    #[arg(long = "alpha", default_value_t = 1.0)]
    alpha: f64,
    #[arg(long = "J")]
    j: Option<f64>,
    #[arg(long = "h", default_value_t = 1.0)]
    h: f64,
    #[arg(long = "beta-h")]
    beta_h: Option<f64>,
    #[arg(long = "sweeps", default_value_t = 2000)]
    sweeps: usize,
    #[arg(long = "schedule")]
    schedule: Option<String>,
    #[arg(long = "boundary", default_value = "toric", value_parser = parse_boundary)]
    boundary: Boundary,
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
    /// PGM image of the cooled spins.
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// CSV table of the cooled spins.
    #[arg(long = "csv")]
    csv: Option<PathBuf>,
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn finish_run(cfg: &ExperimentConfig, cells: &[CellResult]) -> Result<()> {
    if let Some(path) = &cfg.out {
        let mut w = create(path)?;
        write_records_csv(&mut w, cells.iter().flat_map(|c| c.records.iter()))?;
        w.flush()?;
    }
    if let Some(path) = &cfg.summary {
        let mut w = create(path)?;
        write_summary_json(&mut w, cells, cfg.ci_level)?;
        w.flush()?;
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    write_summary_json(&mut lock, cells, cfg.ci_level)?;
    writeln!(lock)?;
    Ok(())
}

fn series_value(v: SeriesValue) -> Value {
    match v {
        SeriesValue::Finite(x) => json!(x),
        SeriesValue::Divergent => json!("divergent"),
    }
}

fn print(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = ExperimentConfig {
        l_list: vec![args.l],
        p_list: vec![args.p],
        trials: args.run.trials,
        trial: args.run.trial_config()?,
        out: args.run.out.clone(),
        summary: args.run.summary.clone(),
        bootstrap: args.run.bootstrap,
        ci_level: args.run.ci,
    };
    cfg.validate()?;
    let cells = run_sweep(&cfg);
    finish_run(&cfg, &cells)
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if args.summary.is_some() {
        cfg.summary = args.summary;
    }
    let cells = run_sweep(&cfg);
    for c in cells.iter().filter(|c| c.error.is_some()) {
        eprintln!("cell L={} p={}: {}", c.l, c.p, c.error.as_deref().unwrap_or(""));
    }
    finish_run(&cfg, &cells)
}

fn bound(args: BoundArgs) -> Result<()> {
    let inputs = match args.j {
        Some(j) => BoundInputs::from_couplings(args.p, args.l, j, args.h),
        None => BoundInputs::log_scaled(args.p, args.l, args.alpha),
    };
    let b = bound_breakdown(&inputs)?;
    print(&json!({
        "p": args.p,
        "L": args.l,
        "alpha": inputs.alpha,
        "r_cor": inputs.r_cor,
        "p_logi": series_value(b.total),
        "p_error": series_value(b.p_error),
        "p_ex": series_value(b.p_ex),
        "p_bm": b.p_bm,
        "intermediate_total": series_value(b.intermediate_total),
        "analytic_threshold": if inputs.alpha > 0.0 { json!(analytic_threshold(inputs.alpha)?) } else { Value::Null },
    }))
}

#[derive(Deserialize)]
struct RateRow {
    #[serde(rename = "L")]
    l: usize,
    p: f64,
    gamma_eff: Option<f64>,
}

fn threshold(args: ThresholdArgs) -> Result<()> {
    let Some(path) = args.summary else {
        return print(&json!({
            "alpha": args.alpha,
            "p_th": analytic_threshold(args.alpha)?,
            "odds": (-4.0 / args.alpha).exp() / 36.0,
        }));
    };
    let rows: Vec<RateRow> = serde_json::from_reader(BufReader::new(
        File::open(&path).with_context(|| format!("opening {}", path.display()))?,
    ))?;
    let points: Vec<RatePoint> = rows
        .iter()
        .filter_map(|r| r.gamma_eff.map(|gamma| RatePoint { l: r.l, p: r.p, gamma }))
        .collect();
    let est = estimate_threshold(&points)?;
    print(&json!({
        "crossings": est.crossings.iter().map(|&(a, b, p)| json!({"L_small": a, "L_large": b, "p_cross": p})).collect::<Vec<_>>(),
        "interval": est.interval.map(|(lo, hi)| json!([lo, hi])),
        "open": est.open,
    }))
}

fn fit(args: FitArgs) -> Result<()> {
    let file = File::open(&args.csv).with_context(|| format!("opening {}", args.csv.display()))?;
    let records = read_records_csv(BufReader::new(file))?;
    let mut cells: Vec<((usize, u64), Vec<TrialRecord>)> = Vec::new();
    for r in records {
        let key = (r.l, r.p_bits);
        match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => cells.push((key, vec![r])),
        }
    }
    let mut out = Vec::new();
    for ((l, p_bits), recs) in &cells {
        let p = f64::from_bits(*p_bits);
        let fit = failure_series(recs).and_then(|s| fit_gamma_eff(&s));
        let ci = bootstrap_gamma(
            recs,
            args.bootstrap,
            args.ci,
            splitmix64(args.seed ^ *p_bits ^ *l as u64),
        );
        out.push(match fit {
            Ok(f) => json!({
                "L": l, "p": p, "trials": recs.len(), "gamma_eff": f.gamma, "residual": f.residual,
                "fit_status": fit_status_name(f.status), "ci_low": ci.map(|c| c.0), "ci_high": ci.map(|c| c.1),
                "ci_level": args.ci,
            }),
            Err(e) => json!({"L": l, "p": p, "trials": recs.len(), "error": e.to_string()}),
        });
    }
    print(&Value::Array(out))
}

fn estimate(args: EstimateArgs) -> Result<()> {
    let mut params = ResourceParams::from_ratios(args.gamma_ratio, args.kappa_ratio);
    params.j_over_gamma = args.j_over_gamma;
    params.h_over_gamma = args.h_over_gamma;
    params.trotter_product_j = args.trotter;
    params.trotter_product_h = args.trotter;
    params.mc_steps = args.mc_steps;
    let est = resource_estimate(&params)?;
    print(&json!({
        "gamma": params.gamma,
        "kappa": params.kappa,
        "Gamma": params.big_gamma,
        "tau": est.tau,
        "m": est.m,
        "t_cool": est.t_cool,
        "t_cycle": est.t_cycle,
        "p_cycle": est.p_cycle,
        "warnings": est.warnings.iter().map(|w| format!("{w:?}")).collect::<Vec<_>>(),
    }))
}

fn cool_demo(args: CoolDemoArgs) -> Result<()> {
    let geom = LatticeGeometry::new(args.l, args.boundary)?;
    let trial = TrialConfig {
        alpha: args.alpha,
        h: args.h,
        j: args.j,
        beta_h: args.beta_h,
        ..TrialConfig::default()
    };
    let beta = trial.cooling_beta(args.p)?;
    let j = trial.coupling(args.l);
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut frame = PauliFrame::for_geometry(&geom);
    inject_errors(&mut frame, args.p, &mut rng)?;
    let kind = CheckKind::Vertex;
    let signs = syndrome_of(frame.errors(PauliKind::Z), &geom, kind);
    let spins = match args.engine {
        CoolerKind::Metropolis => {
            let mut params = CoolingParams::fixed(j, args.h, beta, args.sweeps)?;
            params.order = trial.order;
            params.schedule = match &args.schedule {
                Some(s) => parse_schedule(s)?,
                None => geometric_schedule(LADDER_START_BETA_H / args.h, beta, trial.stages, args.sweeps)?,
            };
            anneal(&signs, &params, &geom, kind, &mut rng)?
        }
        CoolerKind::Digital => {
            let params = DigitalCoolingParams::thermal(
                beta,
                j,
                args.h,
                1.0,
                DIGITAL_TAU,
                args.sweeps,
                RateMode::DetailedBalance,
            )?;
            trotter_cool(&signs, &params, &geom, kind, &mut rng)?
        }
        CoolerKind::OracleExact => bail!("cool-demo needs a physical engine (metropolis or digital)"),
    };
    let correction = correction_from_spins(&spins);
    let mut residual = frame.errors(PauliKind::Z).clone();
    residual.xor_assign(&correction)?;
    let after = syndrome_of(&residual, &geom, kind);
    let model = mftp_core::cooler::Rpgm::new(&geom, kind, &signs, j, args.h)?;
    if let Some(path) = &args.out {
        let (w, h, px) = spin_image(&geom, kind, &signs, &spins.u);
        let mut f = create(path)?;
        write_pgm(&mut f, w, h, &px)?;
        f.flush()?;
    }
    if let Some(path) = &args.csv {
        let mut f = create(path)?;
        write_spin_csv(&mut f, &geom, &spins.u)?;
        f.flush()?;
    }
    print(&json!({
        "engine": args.engine.as_str(),
        "L": args.l,
        "p": args.p,
        "beta": beta,
        "J": j,
        "h": args.h,
        "z_errors": frame.errors(PauliKind::Z).count_ones(),
        "defects_before": signs.iter().filter(|&&s| s < 0).count(),
        "down_spins": spins.down_count(),
        "energy": model.energy(&spins)?,
        "residual_weight": residual.count_ones(),
        "defects_after": after.iter().filter(|&&s| s < 0).count(),
    }))
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a),
        Command::Bound(a) => bound(a),
        Command::Threshold(a) => threshold(a),
        Command::Fit(a) => fit(a),
        Command::Estimate(a) => estimate(a),
        Command::CoolDemo(a) => cool_demo(a),
    }
}
