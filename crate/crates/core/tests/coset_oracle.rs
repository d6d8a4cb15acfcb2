//! The reference decoder against exhaustive coset enumeration.
//!
//! For one error type, every correction with the right syndrome is
//! `E + S + logical combination`, with `S` in the stabilizer group. Walking
//! the whole group (Gray code over independent generators) gives the minimum
//! weight reached with each value of the tracked logical flip. A
//! minimum-weight decoder must return a flip that attains the global minimum,
//! and when only one flip does, it must return exactly that one.

use mftp_core::decoder::{decode_and_classify, DecoderConfig};
use mftp_core::frame::{LogicalClass, PauliFrame};
use mftp_core::{Boundary, CheckKind, LatticeGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mask(bits: &mftp_core::bits::BitField) -> u64 {
    assert!(bits.len() <= 64);
    bits.words().first().copied().unwrap_or(0)
}

fn edge_mask(indices: impl IntoIterator<Item = usize>) -> u64 {
    indices.into_iter().fold(0, |m, e| m | 1 << e)
}

/// Rank of a set of GF(2) vectors, keeping an independent subset.
fn independent(vectors: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    let mut keep = Vec::new();
    for &v in vectors {
        let mut r = v;
        for &b in &basis {
            r = r.min(r ^ b);
        }
        if r != 0 {
            basis.push(r);
            basis.sort_unstable_by(|a, b| b.cmp(a));
            keep.push(v);
        }
    }
    keep
}

struct Family {
    /// Independent stabilizers that leave this error type's syndrome unchanged.
    stabilizers: Vec<u64>,
    /// Independent logical operators of this error type.
    logicals: Vec<u64>,
    /// Support whose overlap parity is the tracked flip.
    detector: u64,
}

/// Z errors: face plaquettes are the stabilizer moves, the tracked flip is the
/// overlap with X-bar. X errors: vertex stars, overlap with Z-bar.
fn family(geom: &LatticeGeometry, z_errors: bool) -> Family {
    let l = geom.size();
    let (kind, detector) = if z_errors {
        (CheckKind::Face, mask(geom.x_logical()))
    } else {
        (CheckKind::Vertex, mask(geom.z_logical()))
    };
    let gens: Vec<u64> = (0..geom.check_count(kind))
        .map(|c| edge_mask(geom.check_edges(kind, c).iter().map(|&e| e as usize)))
        .collect();
    let h = |r: usize, c: usize| r * l + c;
    let v = |r: usize, c: usize| l * l + r * l + c;
    let logicals = match (geom.boundary(), z_errors) {
        // primal loops: a row of horizontal edges, a column of vertical edges
        (Boundary::Toric, true) => vec![edge_mask((0..l).map(|c| h(0, c))), edge_mask((0..l).map(|r| v(r, 0)))],
        // dual loops: a column of horizontal edges, a row of vertical edges
        (Boundary::Toric, false) => vec![edge_mask((0..l).map(|r| h(r, 0))), edge_mask((0..l).map(|c| v(0, c)))],
        (Boundary::Planar, true) => vec![edge_mask((0..l).map(|c| h(0, c)))],
        (Boundary::Planar, false) => vec![edge_mask((0..l).map(|r| h(r, 0)))],
    };
    Family {
        stabilizers: independent(&gens),
        logicals,
        detector,
    }
}

/// Minimum correction weight reached with tracked flip `false` / `true`.
fn coset_minima(error: u64, fam: &Family) -> [u32; 2] {
    let mut best = [u32::MAX; 2];
    let k = fam.stabilizers.len();
    for combo in 0..1u32 << fam.logicals.len() {
        let mut c = error;
        for (i, &lg) in fam.logicals.iter().enumerate() {
            if combo >> i & 1 == 1 {
                c ^= lg;
            }
        }
        // Gray-code walk over the stabilizer group
        for step in 0..1u64 << k {
            if step > 0 {
                c ^= fam.stabilizers[step.trailing_zeros() as usize];
            }
            let flip = ((c ^ error) & fam.detector).count_ones() & 1;
            let w = c.count_ones();
            let slot = &mut best[flip as usize];
            *slot = (*slot).min(w);
        }
    }
    best
}

/// Flips attaining the minimum weight.
fn optimal_flips(error: u64, fam: &Family) -> Vec<bool> {
    let m = coset_minima(error, fam);
    let lo = m[0].min(m[1]);
    [false, true].into_iter().filter(|&f| m[f as usize] == lo).collect()
}

fn frame_from_masks(geom: &LatticeGeometry, x: u64, z: u64) -> PauliFrame {
    let mut f = PauliFrame::for_geometry(geom);
    for e in 0..geom.edge_count() {
        if x >> e & 1 == 1 {
            f.x_errors.set(e, true);
        }
        if z >> e & 1 == 1 {
            f.z_errors.set(e, true);
        }
    }
    f
}

fn check_frame(geom: &LatticeGeometry, x: u64, z: u64, fams: &(Family, Family), unique_seen: &mut usize) {
    let class = decode_and_classify(&frame_from_masks(geom, x, z), geom, &DecoderConfig::default()).unwrap();
    let (x_flip, z_flip) = class.flips();
    let z_opts = optimal_flips(z, &fams.0);
    let x_opts = optimal_flips(x, &fams.1);
    assert!(
        z_opts.contains(&z_flip),
        "z={z:#x}: decoder {z_flip}, optimal {z_opts:?}"
    );
    assert!(
        x_opts.contains(&x_flip),
        "x={x:#x}: decoder {x_flip}, optimal {x_opts:?}"
    );
    if z_opts.len() == 1 && x_opts.len() == 1 {
        *unique_seen += 1;
        assert_eq!(class, LogicalClass::from_flips(x_opts[0], z_opts[0]));
    }
}

fn random_mask<R: Rng>(edges: usize, weight: usize, rng: &mut R) -> u64 {
    let mut m = 0u64;
    while (m.count_ones() as usize) < weight {
        m |= 1 << rng.gen_range(0..edges);
    }
    m
}

#[test]
fn two_error_patterns_match_coset_enumeration() {
    for (l, boundary) in [
        (3, Boundary::Toric),
        (4, Boundary::Toric),
        (3, Boundary::Planar),
        (4, Boundary::Planar),
    ] {
        let geom = LatticeGeometry::new(l, boundary).unwrap();
        let fams = (family(&geom, true), family(&geom, false));
        let mut rng = ChaCha8Rng::seed_from_u64(l as u64 * 31 + boundary as u64);
        let mut unique = 0;
        for _ in 0..60 {
            let n = geom.edge_count();
            check_frame(
                &geom,
                random_mask(n, 2, &mut rng),
                random_mask(n, 2, &mut rng),
                &fams,
                &mut unique,
            );
        }
        assert!(unique > 15, "L={l} {boundary:?}: only {unique} unambiguous instances");
    }
}

#[test]
fn heavier_patterns_match_coset_enumeration() {
    let geom = LatticeGeometry::new(4, Boundary::Toric).unwrap();
    let fams = (family(&geom, true), family(&geom, false));
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut unique = 0;
    let mut nontrivial = 0;
    for _ in 0..80 {
        let (wx, wz) = (rng.gen_range(0..=5), rng.gen_range(0..=5));
        let x = random_mask(32, wx, &mut rng);
        let z = random_mask(32, wz, &mut rng);
        check_frame(&geom, x, z, &fams, &mut unique);
        let class = decode_and_classify(&frame_from_masks(&geom, x, z), &geom, &DecoderConfig::default()).unwrap();
        nontrivial += class.is_failure() as usize;
    }
    assert!(unique > 20);
    assert!(nontrivial > 0, "heavy patterns should sometimes fail");
}

#[test]
fn colinear_half_length_chains_at_l4() {
    // ceil(L/2) = 2 errors along a logical row: both cosets tie at weight 2,
    // so any answer the enumeration allows is acceptable; 3 errors must fail.
    let geom = LatticeGeometry::new(4, Boundary::Toric).unwrap();
    let fams = (family(&geom, true), family(&geom, false));
    let mut unique = 0;
    for start in 0..4 {
        let two = edge_mask([start, (start + 1) % 4]);
        check_frame(&geom, 0, two, &fams, &mut unique);
        check_frame(&geom, two, 0, &fams, &mut unique);
        assert_eq!(optimal_flips(two, &fams.0).len(), 2);
        let three = edge_mask([start, (start + 1) % 4, (start + 2) % 4]);
        let class = decode_and_classify(&frame_from_masks(&geom, 0, three), &geom, &DecoderConfig::default()).unwrap();
        assert_eq!(
            class,
            LogicalClass::Z,
            "three-quarters of the Z loop completes to Z-bar"
        );
        assert_eq!(optimal_flips(three, &fams.0), vec![true]);
    }
}

#[test]
fn oracle_sanity() {
    let geom = LatticeGeometry::new(3, Boundary::Toric).unwrap();
    let fam = family(&geom, true);
    // 9 faces with one relation
    assert_eq!(fam.stabilizers.len(), 8);
    assert_eq!(coset_minima(0, &fam)[0], 0);
    // a full logical loop: weight 0 correction flips it back
    let lz = fam.logicals[0];
    assert_eq!(optimal_flips(lz, &fam), vec![true]);
    let planar = LatticeGeometry::new(3, Boundary::Planar).unwrap();
    assert_eq!(family(&planar, true).stabilizers.len(), planar.face_count());
}
