//! Reference minimum-weight matching decoder.
//!
//! Defects are paired by exact branch-and-bound over pairings (planar patches
//! also allow a defect to pair with the open boundary). Above a configurable
//! defect count the decoder falls back to greedy nearest-pair matching and
//! flags it. Paths are routed row-then-column so corrections are
//! deterministic.

use alloc::vec;
use alloc::vec::Vec;

use crate::bits::BitField;
use crate::error::{Error, Result};
use crate::frame::{residual_class, syndrome_of, LogicalClass, PauliFrame, PauliKind};
use crate::lattice::{CheckKind, LatticeGeometry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum MatchingMode {
    /// Branch-and-bound up to `exact_cap` defects, greedy above it.
    #[default]
    Exact,
    /// Always greedy nearest-pair.
    Greedy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DecoderConfig {
    pub mode: MatchingMode,
    pub exact_cap: usize,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            mode: MatchingMode::Exact,
            exact_cap: 16,
        }
    }
}

/// Partner of a defect in a matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Partner {
    Defect(usize),
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    /// Pairs as indices into the defect list; `(i, Boundary)` for boundary matches.
    pub pairs: Vec<(usize, Partner)>,
    pub weight: usize,
    /// True when the greedy fallback was used instead of the exact search.
    pub greedy: bool,
    pub correction: BitField,
}

struct CostTable {
    n: usize,
    pair: Vec<usize>,
    boundary: Option<Vec<usize>>,
}

impl CostTable {
    fn new(defects: &[usize], geom: &LatticeGeometry, kind: CheckKind) -> Self {
        let n = defects.len();
        let mut pair = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                pair[i * n + j] = geom.distance_unchecked(kind, defects[i], defects[j]);
            }
        }
        let boundary = (!geom.is_toric()).then(|| {
            defects
                .iter()
                .map(|&d| geom.boundary_distance(kind, d).expect("planar"))
                .collect()
        });
        Self { n, pair, boundary }
    }

    #[inline]
    fn d(&self, i: usize, j: usize) -> usize {
        self.pair[i * self.n + j]
    }

    #[inline]
    fn b(&self, i: usize) -> Option<usize> {
        self.boundary.as_ref().map(|b| b[i])
    }
}

/// Greedy: repeatedly take the globally cheapest available pair or
/// boundary match (ties by lowest indices).
fn greedy_pairs(costs: &CostTable) -> (Vec<(usize, Partner)>, usize) {
    let n = costs.n;
    let mut used = vec![false; n];
    let mut pairs = Vec::with_capacity(n / 2 + 1);
    let mut total = 0;
    loop {
        let mut best: Option<(usize, usize, Partner)> = None;
        for i in 0..n {
            if used[i] {
                continue;
            }
            if let Some(b) = costs.b(i) {
                if best.is_none_or(|(w, _, _)| b < w) {
                    best = Some((b, i, Partner::Boundary));
                }
            }
            for j in i + 1..n {
                if used[j] {
                    continue;
                }
                let w = costs.d(i, j);
                if best.is_none_or(|(bw, _, _)| w < bw) {
                    best = Some((w, i, Partner::Defect(j)));
                }
            }
        }
        match best {
            None => break,
            Some((w, i, partner)) => {
                used[i] = true;
                if let Partner::Defect(j) = partner {
                    used[j] = true;
                }
                total += w;
                pairs.push((i, partner));
            }
        }
    }
    (pairs, total)
}

struct Search<'a> {
    costs: &'a CostTable,
    /// Half of the cheapest way each defect can be absorbed, doubled to stay integral.
    floor2: Vec<usize>,
    used: Vec<bool>,
    stack: Vec<(usize, Partner)>,
    best_weight: usize,
    best: Vec<(usize, Partner)>,
}

impl Search<'_> {
    fn lower_bound2(&self) -> usize {
        self.floor2
            .iter()
            .zip(&self.used)
            .filter(|(_, &u)| !u)
            .map(|(&f, _)| f)
            .sum()
    }

    fn recurse(&mut self, weight: usize) {
        let Some(i) = self.used.iter().position(|&u| !u) else {
            if weight < self.best_weight {
                self.best_weight = weight;
                self.best = self.stack.clone();
            }
            return;
        };
        // lower bound in doubled units
        if 2 * weight + self.lower_bound2() >= 2 * self.best_weight {
            return;
        }
        self.used[i] = true;
        let mut options: Vec<(usize, Partner)> = Vec::with_capacity(self.costs.n);
        if let Some(b) = self.costs.b(i) {
            options.push((b, Partner::Boundary));
        }
        for j in i + 1..self.costs.n {
            if !self.used[j] {
                options.push((self.costs.d(i, j), Partner::Defect(j)));
            }
        }
        options.sort_by_key(|&(w, p)| {
            (
                w,
                match p {
                    Partner::Defect(j) => j,
                    Partner::Boundary => usize::MAX,
                },
            )
        });
        for (w, partner) in options {
            if weight + w >= self.best_weight {
                break;
            }
            if let Partner::Defect(j) = partner {
                self.used[j] = true;
            }
            self.stack.push((i, partner));
            self.recurse(weight + w);
            self.stack.pop();
            if let Partner::Defect(j) = partner {
                self.used[j] = false;
            }
        }
        self.used[i] = false;
    }
}

fn exact_pairs(costs: &CostTable) -> (Vec<(usize, Partner)>, usize) {
    let (greedy, greedy_weight) = greedy_pairs(costs);
    let n = costs.n;
    let floor2 = (0..n)
        .map(|i| {
            let pair_min = (0..n).filter(|&j| j != i).map(|j| costs.d(i, j)).min();
            match (pair_min, costs.b(i)) {
                (Some(p), Some(b)) => p.min(2 * b),
                (Some(p), None) => p,
                (None, Some(b)) => 2 * b,
                (None, None) => 0,
            }
        })
        .collect();
    let mut search = Search {
        costs,
        floor2,
        used: vec![false; n],
        stack: Vec::with_capacity(n),
        // +1 lets the search confirm an optimum equal to the greedy weight
        best_weight: greedy_weight + 1,
        best: greedy,
    };
    search.recurse(0);
    (search.best, search.best_weight)
}

/// Minimum-weight matching of `defects` (check indices of one kind) and the
/// union of the routed shortest paths.
pub fn min_weight_matching(
    defects: &[usize],
    geom: &LatticeGeometry,
    kind: CheckKind,
    config: &DecoderConfig,
) -> Result<Matching> {
    let count = geom.check_count(kind);
    if let Some(&bad) = defects.iter().find(|&&d| d >= count) {
        return Err(Error::IndexOutOfRange {
            what: crate::lattice::check_name(kind),
            index: bad,
            count,
        });
    }
    if geom.is_toric() && defects.len() % 2 == 1 {
        return Err(Error::OddDefectCount(defects.len()));
    }
    let costs = CostTable::new(defects, geom, kind);
    let greedy = config.mode == MatchingMode::Greedy || defects.len() > config.exact_cap;
    let (pairs, weight) = if greedy {
        greedy_pairs(&costs)
    } else {
        exact_pairs(&costs)
    };
    let mut correction = BitField::zeros(geom.edge_count());
    for &(i, partner) in &pairs {
        match partner {
            Partner::Defect(j) => geom.route_path(kind, defects[i], defects[j], &mut correction),
            Partner::Boundary => geom.route_to_boundary(kind, defects[i], &mut correction),
        }
    }
    Ok(Matching {
        pairs,
        weight,
        greedy,
        correction,
    })
}

/// Decodes one error type in place and returns the correction used.
pub fn decode_errors(
    errors: &BitField,
    geom: &LatticeGeometry,
    kind: PauliKind,
    config: &DecoderConfig,
) -> Result<Matching> {
    let check = kind.detected_by();
    let syn = syndrome_of(errors, geom, check);
    let defects = crate::frame::defects_of(&syn);
    min_weight_matching(&defects, geom, check, config)
}

/// Syndrome -> matching -> correction -> logical class. The corrected frame
/// must have trivial syndrome; anything else is reported as
/// [`Error::CorrectionFailed`].
pub fn decode_and_classify(frame: &PauliFrame, geom: &LatticeGeometry, config: &DecoderConfig) -> Result<LogicalClass> {
    let mut residual = frame.clone();
    for kind in [PauliKind::Z, PauliKind::X] {
        let m = decode_errors(residual.errors(kind), geom, kind, config)?;
        residual.errors_mut(kind).xor_assign(&m.correction)?;
        let after = syndrome_of(residual.errors(kind), geom, kind.detected_by());
        if after.iter().any(|&s| s < 0) {
            return Err(Error::CorrectionFailed);
        }
    }
    Ok(residual_class(&residual, geom))
}
