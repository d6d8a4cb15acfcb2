//! Digitalised cooling: the joint dissipative evolution is split into short
//! steps of length `tau`, alternating a plaquette-pumping channel and a
//! single-spin field channel, `[e^{tau L_P} e^{tau L_F}]^m`.
//!
//! Every jump operator involved (the plaquette lowering operator, `sigma+-`,
//! the CNOT conjugation `U` and the random-CNOT parity flip `F`) is a product
//! of bit flips and Z-diagonal projectors, so starting from a computational
//! basis state the channels act as a classical Markov chain on bits. That
//! chain is simulated here exactly. A jump with rate `gamma` fires with
//! probability `2 gamma tau` per step (the `2 L rho L^dagger` normalisation).

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::cooler::SpinConfiguration;
use crate::error::{Error, Result};
use crate::lattice::{CheckKind, LatticeGeometry};
use crate::math;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum RateMode {
    /// Decay/excitation ratio `e^{-2 beta g} / (1 + e^{-2 beta g})` with the
    /// nominal gap `g = J` (plaquette) or `g = h` (field).
    PaperRatio,
    /// Excitation/decay ratio `e^{-2 beta g}` with `g = |dE| / 2` of the flip
    /// actually performed, so each channel leaves the Gibbs state of the full
    /// Hamiltonian invariant.
    #[default]
    DetailedBalance,
}

/// `(gamma_minus, gamma_plus)` for an inverse temperature and gap. The larger
/// of the two equals `base_rate`.
pub fn rate_pair(beta: f64, gap: f64, mode: RateMode, base_rate: f64) -> Result<(f64, f64)> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter("beta must be nonnegative"));
    }
    if !(gap > 0.0) || !gap.is_finite() {
        return Err(Error::InvalidParameter("gap must be positive"));
    }
    if !(base_rate >= 0.0) {
        return Err(Error::InvalidParameter("rates must be nonnegative"));
    }
    let boltz = math::exp(-2.0 * beta * gap);
    Ok(match mode {
        RateMode::PaperRatio => (base_rate * boltz / (1.0 + boltz), base_rate),
        RateMode::DetailedBalance => (base_rate, base_rate * boltz),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DigitalCoolingParams {
    pub tau: f64,
    pub m: usize,
    pub gamma_minus: f64,
    pub gamma_plus: f64,
    pub gammap_minus: f64,
    pub gammap_plus: f64,
    pub rate_mode: RateMode,
    /// Environment inverse temperature; used per flip in `DetailedBalance` mode.
    pub beta: f64,
    pub j: f64,
    pub h: f64,
}

impl DigitalCoolingParams {
    /// Rates from an environment temperature. In `PaperRatio` mode the
    /// plaquette pair uses gap `J` and the field pair gap `h`.
    pub fn thermal(beta: f64, j: f64, h: f64, base_rate: f64, tau: f64, m: usize, mode: RateMode) -> Result<Self> {
        let (gamma_minus, gamma_plus) = rate_pair(beta, j, mode, base_rate)?;
        let (gammap_minus, gammap_plus) = rate_pair(beta, h, mode, base_rate)?;
        let p = Self {
            tau,
            m,
            gamma_minus,
            gamma_plus,
            gammap_minus,
            gammap_plus,
            rate_mode: mode,
            beta,
            j,
            h,
        };
        p.validate()?;
        Ok(p)
    }

    /// Total cooling time `m * tau`.
    pub fn cooling_time(&self) -> f64 {
        self.m as f64 * self.tau
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau >= 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter("tau must be finite and nonnegative"));
        }
        let rates = [self.gamma_minus, self.gamma_plus, self.gammap_minus, self.gammap_plus];
        if rates.iter().any(|&r| !(r >= 0.0)) {
            return Err(Error::InvalidParameter("rates must be nonnegative"));
        }
        if rates.iter().any(|&r| 2.0 * r * self.tau > 1.0) {
            return Err(Error::InvalidParameter("2 * rate * tau must not exceed 1"));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::InvalidParameter("beta must be nonnegative"));
        }
        Ok(())
    }
}

/// Classical ancillas: edge spins `u` (A') and syndrome copies `s` (B').
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AncillaState {
    pub u: Vec<i8>,
    pub s: Vec<i8>,
}

impl AncillaState {
    /// All-up edge spins with the syndrome copied onto the check spins.
    pub fn prepare(geom: &LatticeGeometry, signs: &[i8]) -> Self {
        Self {
            u: vec![1; geom.edge_count()],
            s: signs.to_vec(),
        }
    }

    /// `s_c * prod_{i in E_c} u_i`.
    #[inline]
    pub fn parity(&self, geom: &LatticeGeometry, kind: CheckKind, check: usize) -> i8 {
        geom.check_edges(kind, check)
            .iter()
            .fold(self.s[check], |acc, &e| acc * self.u[e as usize])
    }

    /// Full-Hamiltonian energy change of flipping `u_edge`, with `s` as signs.
    pub fn flip_delta(&self, geom: &LatticeGeometry, kind: CheckKind, edge: usize, j: f64, h: f64) -> f64 {
        let coupling: i32 = geom
            .edge_checks(kind, edge)
            .iter()
            .map(|&c| self.parity(geom, kind, c as usize) as i32)
            .sum();
        2.0 * (j * coupling as f64 + h * self.u[edge] as f64)
    }
}

/// Up to four flip outcomes of one plaquette channel and their probabilities.
#[derive(Clone, Copy, Debug, Default)]
pub struct Outcomes {
    pub edges: [u32; 4],
    pub probs: [f64; 4],
    pub len: usize,
}

impl Outcomes {
    pub fn total(&self) -> f64 {
        self.probs[..self.len].iter().sum()
    }

    fn sample(&self, r: f64) -> Option<usize> {
        let mut acc = 0.0;
        for k in 0..self.len {
            acc += self.probs[k];
            if r < acc {
                return Some(self.edges[k] as usize);
            }
        }
        None
    }
}

fn thermal_rate(base: f64, beta: f64, delta_e: f64) -> f64 {
    if delta_e <= 0.0 {
        base
    } else {
        base * math::exp(-beta * delta_e)
    }
}

/// Detailed-balance flip probabilities `2 * rate * tau`, tabulated by the
/// local class of the edge: the sum of its adjacent check parities (-2..=2)
/// and its own spin. Saves one `exp` per proposed flip.
struct FlipTable {
    plaquette: [f64; 10],
    field: [f64; 10],
}

impl FlipTable {
    fn new(params: &DigitalCoolingParams) -> Self {
        let mut t = Self {
            plaquette: [0.0; 10],
            field: [0.0; 10],
        };
        if params.rate_mode == RateMode::DetailedBalance {
            for coupling in -2i32..=2 {
                for u in [-1i8, 1] {
                    let de = 2.0 * (params.j * coupling as f64 + params.h * u as f64);
                    let k = Self::index(coupling, u);
                    t.plaquette[k] = thermal_rate(params.gamma_minus, params.beta, de);
                    t.field[k] = thermal_rate(params.gammap_minus, params.beta, de);
                }
            }
        }
        t
    }

    #[inline]
    fn index(coupling: i32, u: i8) -> usize {
        (coupling + 2) as usize * 2 + (u > 0) as usize
    }

    #[inline]
    fn class(state: &AncillaState, parity: &[i8], geom: &LatticeGeometry, kind: CheckKind, edge: usize) -> usize {
        let coupling: i32 = geom
            .edge_checks(kind, edge)
            .iter()
            .map(|&c| parity[c as usize] as i32)
            .sum();
        Self::index(coupling, state.u[edge])
    }
}

/// Check parities of `state`, kept in step with its spins by [`flip_edge`].
fn parities(state: &AncillaState, geom: &LatticeGeometry, kind: CheckKind) -> Vec<i8> {
    (0..state.s.len()).map(|c| state.parity(geom, kind, c)).collect()
}

#[inline]
fn flip_edge(state: &mut AncillaState, parity: &mut [i8], geom: &LatticeGeometry, kind: CheckKind, edge: usize) {
    state.u[edge] = -state.u[edge];
    for &c in geom.edge_checks(kind, edge) {
        parity[c as usize] = -parity[c as usize];
    }
}

/// Flip distribution of the plaquette channel at one check.
pub fn plaquette_outcomes(
    state: &AncillaState,
    geom: &LatticeGeometry,
    kind: CheckKind,
    check: usize,
    params: &DigitalCoolingParams,
) -> Outcomes {
    let parity = parities(state, geom, kind);
    plaquette_outcomes_with(state, &parity, geom, kind, check, params, &FlipTable::new(params))
}

fn plaquette_outcomes_with(
    state: &AncillaState,
    parity: &[i8],
    geom: &LatticeGeometry,
    kind: CheckKind,
    check: usize,
    params: &DigitalCoolingParams,
    table: &FlipTable,
) -> Outcomes {
    let edges = geom.check_edges(kind, check);
    let k = edges.len() as f64;
    let mut out = Outcomes {
        len: edges.len(),
        ..Default::default()
    };
    let excited = parity[check] < 0;
    for (slot, &e) in edges.iter().enumerate() {
        out.edges[slot] = e;
        let rate = match params.rate_mode {
            RateMode::PaperRatio => {
                if excited {
                    params.gamma_minus
                } else {
                    params.gamma_plus
                }
            }
            RateMode::DetailedBalance => table.plaquette[FlipTable::class(state, parity, geom, kind, e as usize)],
        };
        out.probs[slot] = 2.0 * rate * params.tau / k;
    }
    out
}

/// Flip probability of the field channel on one edge.
pub fn field_flip_probability(
    state: &AncillaState,
    geom: &LatticeGeometry,
    kind: CheckKind,
    edge: usize,
    params: &DigitalCoolingParams,
) -> f64 {
    let parity = parities(state, geom, kind);
    field_flip_probability_with(state, &parity, geom, kind, edge, params, &FlipTable::new(params))
}

fn field_flip_probability_with(
    state: &AncillaState,
    parity: &[i8],
    geom: &LatticeGeometry,
    kind: CheckKind,
    edge: usize,
    params: &DigitalCoolingParams,
    table: &FlipTable,
) -> f64 {
    let rate = match params.rate_mode {
        RateMode::PaperRatio => {
            if state.u[edge] < 0 {
                params.gammap_minus
            } else {
                params.gammap_plus
            }
        }
        RateMode::DetailedBalance => table.field[FlipTable::class(state, parity, geom, kind, edge)],
    };
    2.0 * rate * params.tau
}

/// One `e^{tau L_P}` step: checks in raster order, each possibly flipping one
/// uniformly chosen edge of its star.
pub fn plaquette_pump_step<R: Rng + ?Sized>(
    state: &mut AncillaState,
    geom: &LatticeGeometry,
    kind: CheckKind,
    params: &DigitalCoolingParams,
    rng: &mut R,
) {
    let mut parity = parities(state, geom, kind);
    plaquette_step_with(state, &mut parity, geom, kind, params, &FlipTable::new(params), rng);
}

fn plaquette_step_with<R: Rng + ?Sized>(
    state: &mut AncillaState,
    parity: &mut [i8],
    geom: &LatticeGeometry,
    kind: CheckKind,
    params: &DigitalCoolingParams,
    table: &FlipTable,
    rng: &mut R,
) {
    if params.tau == 0.0 {
        return;
    }
    for c in 0..state.s.len() {
        let out = plaquette_outcomes_with(state, parity, geom, kind, c, params, table);
        if let Some(e) = out.sample(rng.gen::<f64>()) {
            flip_edge(state, parity, geom, kind, e);
        }
    }
}

/// One `e^{tau L_F}` step: every edge independently relaxes up or is excited down.
pub fn field_pump_step<R: Rng + ?Sized>(
    state: &mut AncillaState,
    geom: &LatticeGeometry,
    kind: CheckKind,
    params: &DigitalCoolingParams,
    rng: &mut R,
) {
    let mut parity = parities(state, geom, kind);
    field_step_with(state, &mut parity, geom, kind, params, &FlipTable::new(params), rng);
}

fn field_step_with<R: Rng + ?Sized>(
    state: &mut AncillaState,
    parity: &mut [i8],
    geom: &LatticeGeometry,
    kind: CheckKind,
    params: &DigitalCoolingParams,
    table: &FlipTable,
    rng: &mut R,
) {
    if params.tau == 0.0 {
        return;
    }
    for e in 0..state.u.len() {
        let q = field_flip_probability_with(state, parity, geom, kind, e, params, table);
        if rng.gen::<f64>() < q {
            flip_edge(state, parity, geom, kind, e);
        }
    }
}

/// Copies the syndrome onto B', then applies `m` Trotter steps (plaquette then
/// field) and returns the edge spins.
pub fn trotter_cool<R: Rng + ?Sized>(
    signs: &[i8],
    params: &DigitalCoolingParams,
    geom: &LatticeGeometry,
    kind: CheckKind,
    rng: &mut R,
) -> Result<SpinConfiguration> {
    params.validate()?;
    let expected = geom.check_count(kind);
    if signs.len() != expected {
        return Err(Error::SizeMismatch {
            expected,
            actual: signs.len(),
        });
    }
    let table = FlipTable::new(params);
    let mut state = AncillaState::prepare(geom, signs);
    let mut parity = parities(&state, geom, kind);
    for _ in 0..params.m {
        plaquette_step_with(&mut state, &mut parity, geom, kind, params, &table, rng);
        field_step_with(&mut state, &mut parity, geom, kind, params, &table, rng);
    }
    Ok(SpinConfiguration { u: state.u })
}

// ---------------------------------------------------------------------------
// Stabilizer-pumping identities on a single plaquette.
//
// Five qubits: edge spins on bits 0..4, the B' vertex spin on bit 4. A basis
// index has bit q set when qubit q is |1> (Z = -1).

const PLAQ_EDGES: usize = 4;
const VERTEX_BIT: usize = 4;
const DIM: usize = 1 << (PLAQ_EDGES + 1);

type Mat = [[f64; DIM]; DIM];

fn identity() -> Mat {
    let mut m = [[0.0; DIM]; DIM];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[0.0; DIM]; DIM];
    for i in 0..DIM {
        for k in 0..DIM {
            if a[i][k] != 0.0 {
                for j in 0..DIM {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    out
}

fn permutation(f: impl Fn(usize) -> usize) -> Mat {
    // column x maps to row f(x)
    let mut m = [[0.0; DIM]; DIM];
    for x in 0..DIM {
        m[f(x)][x] = 1.0;
    }
    m
}

fn diagonal(f: impl Fn(usize) -> f64) -> Mat {
    let mut m = [[0.0; DIM]; DIM];
    for (x, row) in m.iter_mut().enumerate() {
        row[x] = f(x);
    }
    m
}

fn pauli_x(q: usize) -> Mat {
    permutation(|x| x ^ (1 << q))
}

fn cnot(control: usize, target: usize) -> Mat {
    permutation(move |x| if x >> control & 1 == 1 { x ^ (1 << target) } else { x })
}

fn z_sign(x: usize, qubits: impl Iterator<Item = usize>) -> f64 {
    if qubits.map(|q| x >> q & 1).sum::<usize>() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Outcome of [`verify_pumping_identity`]: the first basis state (as an index
/// with edge spins on bits 0..4 and the vertex spin on bit 4) where an
/// identity fails, if any.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PumpingCheck {
    pub holds: bool,
    pub counterexample: Option<usize>,
}

fn first_column_mismatch(a: &Mat, b: &Mat) -> Option<usize> {
    (0..DIM).find(|&x| (0..DIM).any(|y| a[y][x] != b[y][x]))
}

/// Checks on the 32-dimensional single-plaquette space that
/// `U X_v (I - Z_v prod Z_i)/2 U = X_v (I - Z_v)/2 = sigma-_v` with
/// `U = prod_i CNOT(i -> v)`, and that the random-CNOT parity flip turns the
/// `xi` jump into the plaquette lowering jump on the edge spins.
pub fn verify_pumping_identity() -> PumpingCheck {
    verify_pumping_identity_with([true; PLAQ_EDGES])
}

/// Same check with only the CNOTs selected by `cnots` present in `U`.
pub fn verify_pumping_identity_with(cnots: [bool; PLAQ_EDGES]) -> PumpingCheck {
    let u = (0..PLAQ_EDGES)
        .filter(|&i| cnots[i])
        .fold(identity(), |acc, i| matmul(&cnot(i, VERTEX_BIT), &acc));
    let xv = pauli_x(VERTEX_BIT);
    let plaquette_projector = diagonal(|x| (1.0 - z_sign(x, 0..=VERTEX_BIT)) / 2.0);
    let vertex_projector = diagonal(|x| (1.0 - z_sign(x, core::iter::once(VERTEX_BIT))) / 2.0);

    let lhs = matmul(&matmul(&u, &matmul(&xv, &plaquette_projector)), &u);
    let rhs = matmul(&xv, &vertex_projector);
    // sigma- = |0><1| on the vertex spin
    let mut sigma_minus = [[0.0; DIM]; DIM];
    for x in (0..DIM).filter(|x| x >> VERTEX_BIT & 1 == 1) {
        sigma_minus[x ^ (1 << VERTEX_BIT)][x] = 1.0;
    }
    if let Some(x) = first_column_mismatch(&lhs, &rhs).or_else(|| first_column_mismatch(&rhs, &sigma_minus)) {
        return PumpingCheck {
            holds: false,
            counterexample: Some(x),
        };
    }
    if let Some(x) = parity_flip_mismatch(&cnots) {
        return PumpingCheck {
            holds: false,
            counterexample: Some(x),
        };
    }
    PumpingCheck {
        holds: true,
        counterexample: None,
    }
}

/// Edge-spin distribution after the eta jump channel from a copy-consistent
/// state (`s = b`): flip one of the four edges uniformly iff the plaquette is
/// excited.
fn eta_distribution(b: usize, edges: usize) -> [f64; 1 << PLAQ_EDGES] {
    let mut out = [0.0; 1 << PLAQ_EDGES];
    let excited = (b + edges.count_ones() as usize) % 2 == 1;
    if excited {
        for i in 0..PLAQ_EDGES {
            out[edges ^ (1 << i)] += 0.25;
        }
    } else {
        out[edges] = 1.0;
    }
    out
}

/// Edge-spin distribution through `U`, the `sigma-` jump on B', `U` again,
/// CNOT(B -> B') and the random CNOT(B' -> edge) channel.
fn pumped_distribution(cnots: &[bool; PLAQ_EDGES], b: usize, edges: usize) -> [f64; 1 << PLAQ_EDGES] {
    let apply_u = |s: usize, e: usize| -> usize {
        (0..PLAQ_EDGES)
            .filter(|&i| cnots[i])
            .fold(s, |acc, i| acc ^ (e >> i & 1))
    };
    let mut s = b;
    s = apply_u(s, edges);
    if s == 1 {
        s = 0; // sigma- jump
    }
    s = apply_u(s, edges);
    s ^= b; // CNOT from B reveals whether B' was flipped
    let mut out = [0.0; 1 << PLAQ_EDGES];
    for i in 0..PLAQ_EDGES {
        let target = if s == 1 { edges ^ (1 << i) } else { edges };
        out[target] += 0.25;
    }
    out
}

fn parity_flip_mismatch(cnots: &[bool; PLAQ_EDGES]) -> Option<usize> {
    for b in 0..2 {
        for edges in 0..1 << PLAQ_EDGES {
            if eta_distribution(b, edges) != pumped_distribution(cnots, b, edges) {
                return Some(edges | b << VERTEX_BIT);
            }
        }
    }
    None
}

/// Distribution over edge spins produced by the random CNOT channel with the
/// control set: each outcome differs from `edges` in exactly one bit.
pub fn random_cnot_outcomes(edges: usize) -> [(usize, f64); PLAQ_EDGES] {
    core::array::from_fn(|i| (edges ^ (1 << i), 0.25))
}
