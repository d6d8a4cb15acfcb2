//! Single-shot decoding below the matching threshold improves with size.

use mftp_core::decoder::{decode_and_classify, DecoderConfig};
use mftp_core::frame::{inject_errors, PauliFrame};
use mftp_core::{Boundary, LatticeGeometry};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn logical_error_rate(l: usize, p: f64, shots: usize, config: &DecoderConfig) -> f64 {
    let geom = LatticeGeometry::new(l, Boundary::Toric).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(l as u64);
    let failures = (0..shots)
        .filter(|_| {
            let mut frame = PauliFrame::for_geometry(&geom);
            inject_errors(&mut frame, p, &mut rng).unwrap();
            decode_and_classify(&frame, &geom, config).unwrap().is_failure()
        })
        .count();
    failures as f64 / shots as f64
}

#[test]
fn matching_error_rate_falls_with_size_at_five_percent() {
    // At L = 10 and p = 0.05 a typical syndrome has ~20 defects per type, so
    // the exact search needs a cap above the default to avoid the greedy path.
    let config = DecoderConfig {
        exact_cap: 30,
        ..DecoderConfig::default()
    };
    let shots = 4000;
    let small = logical_error_rate(6, 0.05, shots, &config);
    let large = logical_error_rate(10, 0.05, shots, &config);
    let sigma = ((small * (1.0 - small) + large * (1.0 - large)) / shots as f64).sqrt();
    assert!(large < small - 3.0 * sigma, "L=6: {small}, L=10: {large}");
}
