//! Config parsing, sweep execution, file formats and determinism.

use mftp::config::ExperimentConfig;
use mftp::output::{read_records_csv, summarize, write_records_csv, write_summary_json, CSV_HEADER};
use mftp::snapshot::{edge_position, spin_image, write_pgm, write_spin_csv, Orientation, PIXEL_DEFECT};
use mftp::stats::{bootstrap_gamma, percentile_interval};
use mftp::sweep::{run_cell, run_sweep};
use mftp::Error;
use mftp_core::harness::CoolerKind;
use mftp_core::{Boundary, CheckKind, LatticeGeometry};

fn small(extra: &str) -> ExperimentConfig {
    format!("L = 3, 4\np = 0.02\ntrials = 6\ncycles = 5\nsweeps = 50\nbootstrap = 50\n{extra}")
        .parse()
        .unwrap()
}

fn csv_bytes(cells: &[mftp::sweep::CellResult]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records_csv(&mut buf, cells.iter().flat_map(|c| &c.records)).unwrap();
    buf
}

#[test]
fn config_parses_every_key() {
    let text = "# comment line\n\
        L = 4, 6\n p = 0.01,0.02 \ntrials = 7\nalpha = 1.5\nboundary = planar\ncooler = digital\n\
        cycles = 9\nsweeps = 11\nstages = 2\norder = random\nbeta_h = 2.0\nJ = 0.8\nh = 1.0\n\
        seed = 42\ndecoder = greedy\nout = r.csv # trailing comment\nsummary = s.json\nbootstrap = 10\nci = 0.8\n";
    let cfg: ExperimentConfig = text.parse().unwrap();
    assert_eq!(cfg.l_list, vec![4, 6]);
    assert_eq!(cfg.p_list, vec![0.01, 0.02]);
    assert_eq!(cfg.trials, 7);
    assert_eq!(cfg.trial.alpha, 1.5);
    assert_eq!(cfg.trial.boundary, Boundary::Planar);
    assert_eq!(cfg.trial.cooler, CoolerKind::Digital);
    assert_eq!((cfg.trial.cycles, cfg.trial.sweeps, cfg.trial.stages), (9, 11, 2));
    assert_eq!(cfg.trial.beta_h, Some(2.0));
    assert_eq!(cfg.trial.j, Some(0.8));
    assert_eq!(cfg.trial.base_seed, 42);
    assert_eq!(cfg.out.as_deref(), Some(std::path::Path::new("r.csv")));
    assert_eq!(cfg.bootstrap, 10);
    assert_eq!(cfg.ci_level, 0.8);
    let sched: ExperimentConfig = "L=4\np=0.1\nschedule = 0.5:10, 1.0:20".parse().unwrap();
    assert_eq!(sched.trial.schedule.unwrap().len(), 2);
}

#[test]
fn config_errors_name_the_line() {
    for (text, line) in [
        ("L = 4\nfoo = 1", 2),
        ("L = 4\np = 0.1\ntrials = x", 3),
        ("no equals sign", 1),
        ("L = 4\ncooler = quantum", 2),
    ] {
        match text.parse::<ExperimentConfig>() {
            Err(Error::Config { line: l, .. }) => assert_eq!(l, line, "{text}"),
            other => panic!("{text}: expected config error, got {other:?}"),
        }
    }
    for bad in ["L = 1", "p = 1.5", "trials = 0", "ci = 1.0", "L = 4\nh = -1"] {
        assert!(bad.parse::<ExperimentConfig>().is_err(), "{bad} should be rejected");
    }
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.cfg");
    assert!(matches!(ExperimentConfig::from_file(&missing), Err(Error::File { .. })));
}

#[test]
fn sweep_table_has_one_row_per_trial_and_cycle() {
    let cfg = small("");
    let cells = run_sweep(&cfg);
    assert_eq!(cells.len(), 2);
    assert_eq!((cells[0].l, cells[1].l), (3, 4));
    let bytes = csv_bytes(&cells);
    let text = String::from_utf8(bytes.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
    assert_eq!(lines.count(), 2 * 6 * 5);

    let back = read_records_csv(bytes.as_slice()).unwrap();
    let original: Vec<_> = cells.iter().flat_map(|c| c.records.clone()).collect();
    assert_eq!(back, original);
}

#[test]
fn empty_grid_gives_an_empty_table() {
    let cfg: ExperimentConfig = "L = 4\ntrials = 3".parse().unwrap();
    let cells = run_sweep(&cfg);
    assert!(cells.is_empty());
    let text = String::from_utf8(csv_bytes(&cells)).unwrap();
    assert_eq!(text.lines().count(), 1, "header only");
}

#[test]
fn output_is_independent_of_thread_count() {
    let cfg = small("seed = 9");
    let run_with = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let cells = run_sweep(&cfg);
            let mut summary = Vec::new();
            write_summary_json(&mut summary, &cells, cfg.ci_level).unwrap();
            (csv_bytes(&cells), summary)
        })
    };
    let one = run_with(1);
    assert_eq!(one, run_with(3));
    assert_eq!(one, run_with(1), "same seed, same bytes");
    let other = small("seed = 10");
    assert_ne!(csv_bytes(&run_sweep(&other)), one.0, "seed must matter");
}

#[test]
fn bad_cells_are_reported_without_stopping_the_sweep() {
    let mut cfg = small("");
    cfg.trial.boundary = Boundary::Planar;
    cfg.l_list = vec![1, 3];
    let cells = run_sweep(&cfg);
    assert!(cells[0].error.is_some() && cells[0].records.is_empty());
    assert!(cells[1].error.is_none() && cells[1].records.len() == 6);
    let s = summarize(&cells[0], 0.9);
    assert!(s.gamma_eff.is_none() && s.error.is_some());
}

#[test]
fn percentile_interval_uses_nearest_rank() {
    let mut v: Vec<f64> = (1..=100).rev().map(f64::from).collect();
    assert_eq!(percentile_interval(&mut v, 0.9), Some((5.0, 95.0)));
    assert_eq!(percentile_interval(&mut [3.0], 0.9), Some((3.0, 3.0)));
    assert_eq!(percentile_interval(&mut [], 0.9), None);
}

#[test]
fn bootstrap_brackets_the_point_estimate() {
    let cfg = small("L = 4\np = 0.1\ntrials = 40\ncycles = 10");
    let cell = run_cell(&cfg, 4, 0.1);
    let gamma = cell.fit.unwrap().gamma;
    let (lo, hi) = bootstrap_gamma(&cell.records, 200, 0.9, 1).unwrap();
    assert!(lo <= gamma && gamma <= hi, "{lo} {gamma} {hi}");
    assert!(lo < hi);
    assert_eq!(bootstrap_gamma(&cell.records, 200, 0.9, 1), Some((lo, hi)));
    assert_eq!(bootstrap_gamma(&[], 200, 0.9, 1), None);
}

#[test]
fn summary_json_has_the_documented_fields() {
    let cfg = small("L = 3");
    let cells = run_sweep(&cfg);
    let mut buf = Vec::new();
    write_summary_json(&mut buf, &cells, cfg.ci_level).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
    let cell = &v.as_array().unwrap()[0];
    for key in [
        "L",
        "p",
        "trials",
        "cycles",
        "gamma_eff",
        "ci_low",
        "ci_high",
        "ci_level",
        "fit_status",
        "residual",
        "final_failure_fraction",
        "error",
    ] {
        assert!(cell.get(key).is_some(), "missing {key}");
    }
    assert_eq!(cell["L"], 3);
    assert_eq!(cell["cycles"], 5);
}

#[test]
fn snapshots_have_the_doubled_grid_shape() {
    for (l, boundary, side) in [
        (3, Boundary::Toric, 6),
        (3, Boundary::Planar, 5),
        (5, Boundary::Planar, 9),
    ] {
        let geom = LatticeGeometry::new(l, boundary).unwrap();
        let n = geom.edge_count();
        let mut signs = vec![1i8; geom.check_count(CheckKind::Vertex)];
        signs[0] = -1;
        let spins: Vec<i8> = (0..n).map(|e| if e % 3 == 0 { -1 } else { 1 }).collect();
        let (w, h, px) = spin_image(&geom, CheckKind::Vertex, &signs, &spins);
        assert_eq!((w, h, px.len()), (side, side, side * side));
        assert_eq!(px.iter().filter(|&&p| p == PIXEL_DEFECT).count(), 1);

        let mut pgm = Vec::new();
        write_pgm(&mut pgm, w, h, &px).unwrap();
        let text = String::from_utf8(pgm).unwrap();
        assert!(text.starts_with(&format!("P2\n{side} {side}\n255\n")));
        assert_eq!(text.lines().count(), 3 + side);

        let mut csv = Vec::new();
        write_spin_csv(&mut csv, &geom, &spins).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), n + 1);
    }
    let geom = LatticeGeometry::new(4, Boundary::Toric).unwrap();
    assert_eq!(edge_position(&geom, 5), (Orientation::Horizontal, 1, 1));
    assert_eq!(edge_position(&geom, 16 + 7), (Orientation::Vertical, 1, 3));
}
