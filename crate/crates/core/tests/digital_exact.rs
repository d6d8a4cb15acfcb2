//! Exact transition matrices of the Trotterised cooler on the 2x2 torus.
//!
//! The 8 edge spins give 256 states, so one step `e^{tau L_P} e^{tau L_F}`
//! is built exactly from the public channel probabilities and its stationary
//! law solved by Gaussian elimination.

use mftp_core::cooler::{exact_gibbs, state_index, Rpgm};
use mftp_core::digital::{
    field_flip_probability, field_pump_step, plaquette_outcomes, plaquette_pump_step, trotter_cool, AncillaState,
    DigitalCoolingParams, RateMode,
};
use mftp_core::frame::{compute_syndrome, PauliFrame};
use mftp_core::{Boundary, CheckKind, LatticeGeometry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KIND: CheckKind = CheckKind::Vertex;

fn state_of(index: usize, signs: &[i8]) -> AncillaState {
    AncillaState {
        u: (0..8).map(|e| if index >> e & 1 == 1 { -1 } else { 1 }).collect(),
        s: signs.to_vec(),
    }
}

/// Distribution after one Trotter step (plaquette channel in raster order,
/// then field channel edge by edge).
fn step_distribution(dist: &[f64], geom: &LatticeGeometry, signs: &[i8], params: &DigitalCoolingParams) -> Vec<f64> {
    let mut cur = dist.to_vec();
    for check in 0..geom.check_count(KIND) {
        let mut next = vec![0.0; 256];
        for (x, &px) in cur.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let out = plaquette_outcomes(&state_of(x, signs), geom, KIND, check, params);
            let mut stay = 1.0;
            for (&edge, &prob) in out.edges.iter().zip(&out.probs).take(out.len) {
                next[x ^ 1 << edge] += px * prob;
                stay -= prob;
            }
            next[x] += px * stay;
        }
        cur = next;
    }
    for edge in 0..8 {
        let mut next = vec![0.0; 256];
        for (x, &px) in cur.iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let q = field_flip_probability(&state_of(x, signs), geom, KIND, edge, params);
            next[x ^ 1 << edge] += px * q;
            next[x] += px * (1.0 - q);
        }
        cur = next;
    }
    cur
}

/// Stationary law of the one-step chain: solve `pi (P - I) = 0`, `sum pi = 1`.
fn stationary(geom: &LatticeGeometry, signs: &[i8], params: &DigitalCoolingParams) -> Vec<f64> {
    let n = 256;
    // rows of P: image of each basis vector
    let p: Vec<Vec<f64>> = (0..n)
        .map(|x| {
            let mut e = vec![0.0; n];
            e[x] = 1.0;
            step_distribution(&e, geom, signs, params)
        })
        .collect();
    // A pi = b with A = (P^T - I), last row replaced by normalisation
    let mut a = vec![vec![0.0; n + 1]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().take(n).enumerate() {
            *v = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for v in a[n - 1].iter_mut() {
        *v = 1.0;
    }
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        a.swap(col, piv);
        let d = a[col][col];
        assert!(d.abs() > 1e-14, "singular system");
        for v in a[col].iter_mut() {
            *v /= d;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && row[col] != 0.0 {
                let f = row[col];
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    a.iter().map(|row| row[n]).collect()
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / 2.0
}

fn two_defects(geom: &LatticeGeometry, edge: usize) -> Vec<i8> {
    let mut f = PauliFrame::for_geometry(geom);
    f.z_errors.toggle(edge);
    compute_syndrome(&f, geom).unwrap().b
}

fn down_density(dist: &[f64]) -> f64 {
    dist.iter()
        .enumerate()
        .map(|(x, p)| p * x.count_ones() as f64 / 8.0)
        .sum()
}

#[test]
fn detailed_balance_chain_is_exactly_gibbs_for_any_tau() {
    let geom = LatticeGeometry::new(2, Boundary::Toric).unwrap();
    for signs in [vec![1i8; 4], two_defects(&geom, 2)] {
        let model = Rpgm::new(&geom, KIND, &signs, 1.0, 1.0).unwrap();
        for &(beta, tau) in &[(0.5, 0.5), (1.0, 0.25), (0.8, 0.05)] {
            let params = DigitalCoolingParams::thermal(beta, 1.0, 1.0, 1.0, tau, 1, RateMode::DetailedBalance).unwrap();
            let pi = stationary(&geom, &signs, &params);
            let gibbs = exact_gibbs(&model, beta).unwrap();
            let d = tv(&pi, &gibbs);
            assert!(d < 1e-9, "beta {beta} tau {tau}: tv {d}");
        }
    }
}

#[test]
fn detailed_balance_samples_match_gibbs() {
    let geom = LatticeGeometry::new(2, Boundary::Toric).unwrap();
    let signs = two_defects(&geom, 5);
    let model = Rpgm::new(&geom, KIND, &signs, 1.0, 1.0).unwrap();
    let beta = 0.5;
    let params = DigitalCoolingParams::thermal(beta, 1.0, 1.0, 1.0, 0.5, 1, RateMode::DetailedBalance).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut state = AncillaState::prepare(&geom, &signs);
    for _ in 0..200 {
        plaquette_pump_step(&mut state, &geom, KIND, &params, &mut rng);
        field_pump_step(&mut state, &geom, KIND, &params, &mut rng);
    }
    let samples = 200_000;
    let mut hist = vec![0.0; 256];
    for _ in 0..samples {
        plaquette_pump_step(&mut state, &geom, KIND, &params, &mut rng);
        field_pump_step(&mut state, &geom, KIND, &params, &mut rng);
        hist[state_index(&state.u)] += 1.0 / samples as f64;
    }
    let d = tv(&hist, &exact_gibbs(&model, beta).unwrap());
    assert!(d < 0.03, "tv {d}");
}

#[test]
fn paper_ratio_trotter_error_is_linear_in_tau() {
    // The stationary law of the product of channels differs from the tau -> 0
    // limit at first order, so successive halvings shrink the change by ~2.
    let geom = LatticeGeometry::new(2, Boundary::Toric).unwrap();
    let signs = two_defects(&geom, 1);
    let observable = |tau: f64| {
        let params = DigitalCoolingParams::thermal(0.7, 1.0, 1.0, 1.0, tau, 1, RateMode::PaperRatio).unwrap();
        down_density(&stationary(&geom, &signs, &params))
    };
    let taus = [0.2, 0.1, 0.05, 0.025];
    let values: Vec<f64> = taus.iter().map(|&t| observable(t)).collect();
    let diffs: Vec<f64> = values.windows(2).map(|w| w[0] - w[1]).collect();
    assert!(diffs[0].abs() > 1e-6, "no tau dependence: {values:?}");
    for w in diffs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((1.6..2.4).contains(&ratio), "halving ratio {ratio}, values {values:?}");
    }
}

#[test]
fn trotter_cool_equals_spliced_manual_steps() {
    let geom = LatticeGeometry::new(4, Boundary::Toric).unwrap();
    let signs = two_defects(&geom, 9);
    let params = DigitalCoolingParams::thermal(1.2, 1.0, 1.0, 1.0, 0.5, 60, RateMode::DetailedBalance).unwrap();
    let whole = trotter_cool(&signs, &params, &geom, KIND, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut state = AncillaState::prepare(&geom, &signs);
    for _ in 0..30 {
        plaquette_pump_step(&mut state, &geom, KIND, &params, &mut rng);
        field_pump_step(&mut state, &geom, KIND, &params, &mut rng);
    }
    // the remaining steps only see the current state and the RNG stream
    for _ in 30..60 {
        plaquette_pump_step(&mut state, &geom, KIND, &params, &mut rng);
        field_pump_step(&mut state, &geom, KIND, &params, &mut rng);
    }
    assert_eq!(whole.u, state.u);
    let zero = DigitalCoolingParams { m: 0, ..params };
    let up = trotter_cool(&signs, &zero, &geom, KIND, &mut rng).unwrap();
    assert_eq!(up.down_count(), 0);
}
