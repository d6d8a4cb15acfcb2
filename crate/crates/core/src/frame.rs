//! Pauli-frame bookkeeping: accumulated X/Z errors, syndromes and the logical
//! class of a residual.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::bits::BitField;
use crate::decoder::{decode_and_classify, DecoderConfig};
use crate::error::{Error, Result};
use crate::lattice::{CheckKind, LatticeGeometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliKind {
    X,
    Z,
}

impl PauliKind {
    /// The check family that detects this error type.
    pub fn detected_by(self) -> CheckKind {
        match self {
            PauliKind::X => CheckKind::Face,
            PauliKind::Z => CheckKind::Vertex,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    pub x_errors: BitField,
    pub z_errors: BitField,
}

impl PauliFrame {
    pub fn new(edge_count: usize) -> Self {
        Self {
            x_errors: BitField::zeros(edge_count),
            z_errors: BitField::zeros(edge_count),
        }
    }

    pub fn for_geometry(geom: &LatticeGeometry) -> Self {
        Self::new(geom.edge_count())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.x_errors.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.x_errors.is_empty()
    }

    pub fn errors(&self, kind: PauliKind) -> &BitField {
        match kind {
            PauliKind::X => &self.x_errors,
            PauliKind::Z => &self.z_errors,
        }
    }

    pub fn errors_mut(&mut self, kind: PauliKind) -> &mut BitField {
        match kind {
            PauliKind::X => &mut self.x_errors,
            PauliKind::Z => &mut self.z_errors,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.x_errors.is_zero() && self.z_errors.is_zero()
    }

    /// Debug dump `x:<hex>;z:<hex>`, each field in [`BitField::to_hex`] layout.
    pub fn to_hex(&self) -> String {
        let mut s = String::from("x:");
        s.push_str(&self.x_errors.to_hex());
        s.push_str(";z:");
        s.push_str(&self.z_errors.to_hex());
        s
    }

    pub fn from_hex(edge_count: usize, s: &str) -> Result<Self> {
        let (x, z) = s
            .strip_prefix("x:")
            .and_then(|rest| rest.split_once(";z:"))
            .ok_or(Error::Parse("expected x:<hex>;z:<hex>"))?;
        Ok(Self {
            x_errors: BitField::from_hex(edge_count, x)?,
            z_errors: BitField::from_hex(edge_count, z)?,
        })
    }

    fn check_len(&self, geom: &LatticeGeometry) -> Result<()> {
        if self.len() != geom.edge_count() {
            return Err(Error::SizeMismatch {
                expected: geom.edge_count(),
                actual: self.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Debug for PauliFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Stabilizer eigenvalues: `b` per vertex (Z errors), `a` per face (X errors).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeField {
    pub b: Vec<i8>,
    pub a: Vec<i8>,
}

impl SyndromeField {
    pub fn trivial(geom: &LatticeGeometry) -> Self {
        Self {
            b: alloc::vec![1; geom.vertex_count()],
            a: alloc::vec![1; geom.face_count()],
        }
    }

    pub fn signs(&self, kind: CheckKind) -> &[i8] {
        match kind {
            CheckKind::Vertex => &self.b,
            CheckKind::Face => &self.a,
        }
    }

    /// Indices with eigenvalue -1.
    pub fn defects(&self, kind: CheckKind) -> Vec<usize> {
        defects_of(self.signs(kind))
    }

    pub fn is_trivial(&self) -> bool {
        self.b.iter().chain(&self.a).all(|&s| s == 1)
    }

    /// Elementwise product of eigenvalues.
    pub fn product(&self, other: &SyndromeField) -> SyndromeField {
        SyndromeField {
            b: self.b.iter().zip(&other.b).map(|(x, y)| x * y).collect(),
            a: self.a.iter().zip(&other.a).map(|(x, y)| x * y).collect(),
        }
    }
}

pub(crate) fn defects_of(signs: &[i8]) -> Vec<usize> {
    signs
        .iter()
        .enumerate()
        .filter_map(|(i, &s)| (s < 0).then_some(i))
        .collect()
}

/// Logical Pauli acting on the tracked logical qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum LogicalClass {
    #[default]
    I,
    X,
    Z,
    Y,
}

impl LogicalClass {
    pub fn from_flips(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => LogicalClass::I,
            (true, false) => LogicalClass::X,
            (false, true) => LogicalClass::Z,
            (true, true) => LogicalClass::Y,
        }
    }

    pub fn flips(self) -> (bool, bool) {
        match self {
            LogicalClass::I => (false, false),
            LogicalClass::X => (true, false),
            LogicalClass::Z => (false, true),
            LogicalClass::Y => (true, true),
        }
    }

    /// Group product (Klein four-group, phases dropped).
    pub fn compose(self, other: LogicalClass) -> LogicalClass {
        let (x1, z1) = self.flips();
        let (x2, z2) = other.flips();
        LogicalClass::from_flips(x1 ^ x2, z1 ^ z2)
    }

    pub fn is_failure(self) -> bool {
        self != LogicalClass::I
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LogicalClass::I => "I",
            LogicalClass::X => "X",
            LogicalClass::Z => "Z",
            LogicalClass::Y => "Y",
        }
    }
}

impl fmt::Display for LogicalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LogicalClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" => Ok(LogicalClass::I),
            "X" => Ok(LogicalClass::X),
            "Z" => Ok(LogicalClass::Z),
            "Y" => Ok(LogicalClass::Y),
            _ => Err(Error::Parse("logical class must be one of I, X, Z, Y")),
        }
    }
}

/// Flips every x-bit and every z-bit independently with probability `p`.
pub fn inject_errors<R: Rng + ?Sized>(frame: &mut PauliFrame, p: f64, rng: &mut R) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    if p == 0.0 {
        return Ok(());
    }
    for field in [&mut frame.x_errors, &mut frame.z_errors] {
        for i in 0..field.len() {
            if rng.gen::<f64>() < p {
                field.toggle(i);
            }
        }
    }
    Ok(())
}

/// Parities of one error field against one check family.
pub fn syndrome_of(errors: &BitField, geom: &LatticeGeometry, kind: CheckKind) -> Vec<i8> {
    (0..geom.check_count(kind))
        .map(|s| {
            let odd = geom
                .check_edges(kind, s)
                .iter()
                .filter(|&&e| errors.get(e as usize))
                .count()
                & 1;
            if odd == 1 {
                -1
            } else {
                1
            }
        })
        .collect()
}

pub fn compute_syndrome(frame: &PauliFrame, geom: &LatticeGeometry) -> Result<SyndromeField> {
    frame.check_len(geom)?;
    Ok(SyndromeField {
        b: syndrome_of(&frame.z_errors, geom, CheckKind::Vertex),
        a: syndrome_of(&frame.x_errors, geom, CheckKind::Face),
    })
}

/// XORs `correction` into the X or Z field (the Pauli-frame effect of the
/// transversal feedback gates).
pub fn apply_correction(frame: &mut PauliFrame, correction: &BitField, kind: PauliKind) -> Result<()> {
    frame.errors_mut(kind).xor_assign(correction)
}

/// Multiplies a stabilizer into the frame: a vertex star `B_v = prod X`
/// into the X field, a face plaquette `A_f = prod Z` into the Z field.
pub fn apply_stabilizer(frame: &mut PauliFrame, geom: &LatticeGeometry, site: usize, kind: CheckKind) -> Result<()> {
    frame.check_len(geom)?;
    let mask = geom.check_mask(kind, site)?;
    match kind {
        CheckKind::Vertex => frame.x_errors.xor_assign(&mask),
        CheckKind::Face => frame.z_errors.xor_assign(&mask),
    }
}

/// Logical class of a (possibly noisy) frame after reference decoding.
pub fn homology_class(frame: &PauliFrame, geom: &LatticeGeometry, decoder: &DecoderConfig) -> Result<LogicalClass> {
    frame.check_len(geom)?;
    decode_and_classify(frame, geom, decoder)
}

/// Logical class of a frame that already has trivial syndrome.
pub fn residual_class(frame: &PauliFrame, geom: &LatticeGeometry) -> LogicalClass {
    // Z residual anticommutes with X-bar, X residual with Z-bar.
    let z_flip = frame.z_errors.overlap_parity(geom.x_logical());
    let x_flip = frame.x_errors.overlap_parity(geom.z_logical());
    LogicalClass::from_flips(x_flip, z_flip)
}
