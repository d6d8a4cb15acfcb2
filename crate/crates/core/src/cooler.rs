//! Metropolis cooling of the random-plaquette gauge model
//!
//! ```text
//! H(u; s) = -J * sum_c s_c * prod_{i in E_c} u_i  -  h * sum_i u_i
//! ```
//!
//! over classical spins `u_i = +-1` on edges, with the check signs `s_c` set
//! by the syndrome. The `c` range over vertex stars when correcting Z errors
//! and over face plaquettes when correcting X errors. The equilibrium spin
//! configuration, read as "down spin = apply a Pauli", is the feedback.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::bits::BitField;
use crate::error::{Error, Result};
use crate::lattice::{CheckKind, LatticeGeometry};
use crate::math;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SpinConfiguration {
    pub u: Vec<i8>,
}

impl SpinConfiguration {
    pub fn all_up(n: usize) -> Self {
        Self { u: vec![1; n] }
    }

    /// Spins from an edge mask: bit set means spin down.
    pub fn from_mask(mask: &BitField) -> Self {
        Self {
            u: (0..mask.len()).map(|i| if mask.get(i) { -1 } else { 1 }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn down_count(&self) -> usize {
        self.u.iter().filter(|&&s| s < 0).count()
    }

    pub fn down_fraction(&self) -> f64 {
        self.down_count() as f64 / self.u.len() as f64
    }
}

/// Feedback correction: bit `i` set iff `u_i = -1`.
pub fn correction_from_spins(spins: &SpinConfiguration) -> BitField {
    let mut out = BitField::zeros(spins.len());
    for (i, &s) in spins.u.iter().enumerate() {
        if s < 0 {
            out.set(i, true);
        }
    }
    out
}

/// How the plaquette coupling `J` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum CouplingMode {
    /// Use `CoolingParams::j` as given.
    FixedJ,
    /// `4J / (2h) = alpha * ln L`.
    #[default]
    LogScaledJ,
    /// `J = h * L`, the large-coupling limit where `r_cor` grows linearly in `L`.
    LargeJ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SweepOrder {
    #[default]
    Raster,
    /// `N` proposals at uniformly drawn edges per sweep.
    Random,
    /// Rejection-free simulation of `Random`: runs of rejected proposals are
    /// skipped by drawing their geometric length, and the accepted edge is
    /// drawn with probability proportional to its acceptance. Same Markov
    /// chain as `Random` sampled at whole sweeps, with cost proportional to
    /// accepted flips, which is what makes low-temperature stages cheap.
    NFold,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stage {
    pub beta: f64,
    pub sweeps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoolingParams {
    pub j: f64,
    pub h: f64,
    pub alpha: f64,
    pub beta_target: f64,
    pub schedule: Vec<Stage>,
    pub mode: CouplingMode,
    pub order: SweepOrder,
}

pub const DEFAULT_STAGES: usize = 8;
pub const DEFAULT_SWEEPS: usize = 2000;
/// Starting point `beta * h` of the default annealing ladder.
pub const LADDER_START_BETA_H: f64 = 0.1;

impl CoolingParams {
    /// Default operating point: `h`, log-scaled `J` with `alpha`, annealed on
    /// the geometric ladder to the Nishimori temperature of `p`.
    pub fn nishimori(p: f64, h: f64, alpha: f64, sweeps: usize) -> Result<Self> {
        let beta_target = nishimori_beta(p, h)?;
        Ok(Self {
            j: h,
            h,
            alpha,
            beta_target,
            schedule: geometric_schedule(LADDER_START_BETA_H / h, beta_target, DEFAULT_STAGES, sweeps)?,
            mode: CouplingMode::LogScaledJ,
            order: SweepOrder::Raster,
        })
    }

    /// Fixed `J`, `h`, annealed on the default ladder to `beta_target`.
    pub fn fixed(j: f64, h: f64, beta_target: f64, sweeps: usize) -> Result<Self> {
        Ok(Self {
            j,
            h,
            alpha: 0.0,
            beta_target,
            schedule: geometric_schedule(LADDER_START_BETA_H / h, beta_target, DEFAULT_STAGES, sweeps)?,
            mode: CouplingMode::FixedJ,
            order: SweepOrder::Raster,
        })
    }

    /// Plaquette coupling used on a lattice of linear size `l`.
    pub fn coupling(&self, l: usize) -> f64 {
        match self.mode {
            CouplingMode::FixedJ => self.j,
            CouplingMode::LogScaledJ => self.alpha * self.h * math::ln(l as f64) / 2.0,
            CouplingMode::LargeJ => self.h * l as f64,
        }
    }

    /// `r_cor = 4J / (2h)` on a lattice of size `l`.
    pub fn correlation_length(&self, l: usize) -> f64 {
        2.0 * self.coupling(l) / self.h
    }

    pub fn total_sweeps(&self) -> usize {
        self.schedule.iter().map(|s| s.sweeps).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.schedule.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if !(self.h > 0.0) {
            return Err(Error::InvalidParameter("h must be positive"));
        }
        if self.mode == CouplingMode::FixedJ && !(self.j > 0.0) {
            return Err(Error::InvalidParameter("J must be positive"));
        }
        if self.mode == CouplingMode::LogScaledJ && !(self.alpha > 0.0) {
            return Err(Error::InvalidParameter("alpha must be positive"));
        }
        let mut prev = 0.0;
        for s in &self.schedule {
            if !(s.beta >= prev) || !s.beta.is_finite() {
                return Err(Error::InvalidParameter(
                    "schedule betas must be finite, nonnegative and nondecreasing",
                ));
            }
            prev = s.beta;
        }
        Ok(())
    }
}

/// Geometric ladder of `stages` inverse temperatures from `beta_start` to
/// `beta_target` with equal sweeps per stage (the remainder goes to the last
/// stage). If `beta_target <= beta_start` the whole budget runs at the target.
pub fn geometric_schedule(beta_start: f64, beta_target: f64, stages: usize, sweeps: usize) -> Result<Vec<Stage>> {
    if stages == 0 || sweeps == 0 {
        return Err(Error::EmptySchedule);
    }
    if !(beta_target >= 0.0) || !beta_target.is_finite() || !(beta_start > 0.0) {
        return Err(Error::InvalidParameter("schedule betas must be finite and positive"));
    }
    if beta_target <= beta_start || stages == 1 {
        return Ok(vec![Stage {
            beta: beta_target,
            sweeps,
        }]);
    }
    let per = (sweeps / stages).max(1);
    let ratio = math::powf(beta_target / beta_start, 1.0 / (stages - 1) as f64);
    let mut out: Vec<Stage> = (0..stages)
        .map(|k| Stage {
            beta: beta_start * math::powi(ratio, k as i32),
            sweeps: per,
        })
        .collect();
    let last = out.last_mut().expect("stages > 0");
    last.beta = beta_target;
    last.sweeps += sweeps.saturating_sub(per * stages);
    Ok(out)
}

/// Parses `beta:sweeps,beta:sweeps,...`.
pub fn parse_schedule(s: &str) -> Result<Vec<Stage>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (b, n) = part
            .split_once(':')
            .ok_or(Error::Parse("schedule stage must be beta:sweeps"))?;
        let beta: f64 = b.trim().parse().map_err(|_| Error::Parse("bad schedule beta"))?;
        let sweeps: usize = n.trim().parse().map_err(|_| Error::Parse("bad schedule sweep count"))?;
        out.push(Stage { beta, sweeps });
    }
    if out.is_empty() {
        return Err(Error::EmptySchedule);
    }
    Ok(out)
}

/// Inverse temperature on the Nishimori line, `e^{-2 beta h} = p / (1 - p)`.
pub fn nishimori_beta(p: f64, h: f64) -> Result<f64> {
    if !(p > 0.0 && p < 0.5) {
        return Err(Error::InvalidProbability(p));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("h must be positive"));
    }
    Ok(-math::ln(p / (1.0 - p)) / (2.0 * h))
}

/// One RPGM instance: geometry, check family, check signs and couplings.
#[derive(Clone, Copy, Debug)]
pub struct Rpgm<'a> {
    pub geom: &'a LatticeGeometry,
    pub kind: CheckKind,
    pub signs: &'a [i8],
    pub j: f64,
    pub h: f64,
}

impl<'a> Rpgm<'a> {
    pub fn new(geom: &'a LatticeGeometry, kind: CheckKind, signs: &'a [i8], j: f64, h: f64) -> Result<Self> {
        let expected = geom.check_count(kind);
        if signs.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: signs.len(),
            });
        }
        Ok(Self {
            geom,
            kind,
            signs,
            j,
            h,
        })
    }

    fn check_spins(&self, u: &SpinConfiguration) -> Result<()> {
        if u.len() != self.geom.edge_count() {
            return Err(Error::SizeMismatch {
                expected: self.geom.edge_count(),
                actual: u.len(),
            });
        }
        Ok(())
    }

    /// `s_c * prod_{i in E_c} u_i` for every check.
    pub fn plaquette_values(&self, u: &[i8]) -> Vec<i8> {
        (0..self.signs.len())
            .map(|c| {
                self.geom
                    .check_edges(self.kind, c)
                    .iter()
                    .fold(self.signs[c], |acc, &e| acc * u[e as usize])
            })
            .collect()
    }

    pub fn energy(&self, u: &SpinConfiguration) -> Result<f64> {
        self.check_spins(u)?;
        Ok(self.energy_unchecked(&u.u))
    }

    pub(crate) fn energy_unchecked(&self, u: &[i8]) -> f64 {
        let plaq: i64 = self.plaquette_values(u).iter().map(|&w| w as i64).sum();
        let field: i64 = u.iter().map(|&s| s as i64).sum();
        -self.j * plaq as f64 - self.h * field as f64
    }

    /// Energy change of flipping `u_edge`:
    /// `2 u_e (J sum_{c ni e} s_c prod_{j in E_c \ e} u_j + h)`.
    pub fn local_field_delta(&self, u: &SpinConfiguration, edge: usize) -> Result<f64> {
        self.check_spins(u)?;
        if edge >= u.len() {
            return Err(Error::IndexOutOfRange {
                what: "edge",
                index: edge,
                count: u.len(),
            });
        }
        let ue = u.u[edge];
        let mut coupling = 0i32;
        for &c in self.geom.edge_checks(self.kind, edge) {
            let c = c as usize;
            let others = self
                .geom
                .check_edges(self.kind, c)
                .iter()
                .filter(|&&e| e as usize != edge)
                .fold(self.signs[c] as i32, |acc, &e| acc * u.u[e as usize] as i32);
            coupling += others;
        }
        Ok(2.0 * ue as f64 * (self.j * coupling as f64 + self.h))
    }
}

/// Counters from one sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SweepStats {
    pub proposals: usize,
    pub accepted: usize,
    /// Sum of accepted energy changes.
    pub energy_delta: f64,
}

/// Incremental Metropolis state: spins plus cached plaquette values.
#[derive(Clone, Debug)]
pub struct Sampler<'a> {
    model: Rpgm<'a>,
    u: Vec<i8>,
    plaq: Vec<i8>,
    order: SweepOrder,
}

impl<'a> Sampler<'a> {
    pub fn new(model: Rpgm<'a>, start: SpinConfiguration, order: SweepOrder) -> Result<Self> {
        model.check_spins(&start)?;
        let plaq = model.plaquette_values(&start.u);
        Ok(Self {
            model,
            u: start.u,
            plaq,
            order,
        })
    }

    pub fn spins(&self) -> &[i8] {
        &self.u
    }

    pub fn into_spins(self) -> SpinConfiguration {
        SpinConfiguration { u: self.u }
    }

    pub fn energy(&self) -> f64 {
        let plaq: i64 = self.plaq.iter().map(|&w| w as i64).sum();
        let field: i64 = self.u.iter().map(|&s| s as i64).sum();
        -self.model.j * plaq as f64 - self.model.h * field as f64
    }

    #[inline]
    fn coupling_sum(&self, edge: usize) -> i32 {
        self.model
            .geom
            .edge_checks(self.model.kind, edge)
            .iter()
            .map(|&c| self.plaq[c as usize] as i32)
            .sum()
    }

    /// `Delta E` of flipping `edge` from the cached plaquette values.
    #[inline]
    pub fn delta(&self, edge: usize) -> f64 {
        // s_c prod_{E_c \ e} u_j = plaq_c * u_e, so dE = 2 (J sum plaq_c + h u_e)
        2.0 * (self.model.j * self.coupling_sum(edge) as f64 + self.model.h * self.u[edge] as f64)
    }

    #[inline]
    pub fn flip(&mut self, edge: usize) {
        self.u[edge] = -self.u[edge];
        for &c in self.model.geom.edge_checks(self.model.kind, edge) {
            self.plaq[c as usize] = -self.plaq[c as usize];
        }
    }

    /// Acceptance table indexed by `[coupling_sum + 2][u_e == +1]`, since
    /// `dE = 2 (J s + h u)` with `s` in `-2..=2` and `u = +-1`.
    fn acceptance_table(&self, beta: f64) -> [[f64; 2]; 5] {
        let mut accept = [[1.0f64; 2]; 5];
        for (si, row) in accept.iter_mut().enumerate() {
            for (ui, p) in row.iter_mut().enumerate() {
                let s = si as f64 - 2.0;
                let u = if ui == 0 { -1.0 } else { 1.0 };
                let de = 2.0 * (self.model.j * s + self.model.h * u);
                *p = if de <= 0.0 { 1.0 } else { math::exp(-beta * de) };
            }
        }
        accept
    }

    #[inline]
    fn class_of(&self, edge: usize) -> usize {
        (self.coupling_sum(edge) + 2) as usize * 2 + (self.u[edge] > 0) as usize
    }

    /// `sweeps` sweeps at inverse temperature `beta`; rejection-free for
    /// [`SweepOrder::NFold`], plain repetition of [`Sampler::sweep`] otherwise.
    pub fn run<R: Rng + ?Sized>(&mut self, beta: f64, sweeps: usize, rng: &mut R) -> SweepStats {
        if self.order != SweepOrder::NFold {
            let mut total = SweepStats::default();
            for _ in 0..sweeps {
                let s = self.sweep(beta, rng);
                total.proposals += s.proposals;
                total.accepted += s.accepted;
                total.energy_delta += s.energy_delta;
            }
            return total;
        }
        let n = self.u.len();
        let table = self.acceptance_table(beta);
        let rate: [f64; 10] = core::array::from_fn(|k| table[k / 2][k % 2]);
        let mut members: [Vec<u32>; 10] = Default::default();
        let mut slot = vec![0u32; n];
        for e in 0..n {
            let k = self.class_of(e);
            slot[e] = members[k].len() as u32;
            members[k].push(e as u32);
        }
        let mut class = vec![0u8; n];
        for (k, list) in members.iter().enumerate() {
            for &e in list {
                class[e as usize] = k as u8;
            }
        }
        let budget = (sweeps * n) as u64;
        let mut used = 0u64;
        let mut stats = SweepStats {
            proposals: sweeps * n,
            ..Default::default()
        };
        let kind = self.model.kind;
        let geom = self.model.geom;
        while used < budget {
            let total: f64 = members.iter().zip(&rate).map(|(m, r)| m.len() as f64 * r).sum();
            let q = total / n as f64;
            // rejected proposals before the next acceptance ~ Geometric(q)
            let skip = if q >= 1.0 {
                0
            } else if q <= 0.0 {
                u64::MAX
            } else {
                let u: f64 = rng.gen();
                let x = math::floor(math::ln(1.0 - u) / math::ln_1p(-q));
                if x >= (budget - used) as f64 {
                    u64::MAX
                } else {
                    x as u64
                }
            };
            if skip >= budget - used {
                break;
            }
            used += skip + 1;
            let last_k = (0..10)
                .rev()
                .find(|&k| !members[k].is_empty() && rate[k] > 0.0)
                .expect("total rate is positive");
            let mut target = rng.gen::<f64>() * total;
            let mut k = 0;
            while k < last_k {
                let w = members[k].len() as f64 * rate[k];
                if target < w {
                    break;
                }
                target -= w;
                k += 1;
            }
            let edge = members[k][rng.gen_range(0..members[k].len())] as usize;
            stats.accepted += 1;
            stats.energy_delta += self.delta(edge);
            self.flip(edge);
            for &c in geom.edge_checks(kind, edge) {
                for &e in geom.check_edges(kind, c as usize) {
                    let e = e as usize;
                    let new_k = self.class_of(e);
                    let old_k = class[e] as usize;
                    if new_k == old_k {
                        continue;
                    }
                    let pos = slot[e] as usize;
                    let last = *members[old_k].last().expect("edge is a member");
                    members[old_k].swap_remove(pos);
                    if last as usize != e {
                        slot[last as usize] = pos as u32;
                    }
                    slot[e] = members[new_k].len() as u32;
                    members[new_k].push(e as u32);
                    class[e] = new_k as u8;
                }
            }
        }
        stats
    }

    /// One pass of single-spin Metropolis updates at inverse temperature `beta`.
    pub fn sweep<R: Rng + ?Sized>(&mut self, beta: f64, rng: &mut R) -> SweepStats {
        if self.order == SweepOrder::NFold {
            return self.run(beta, 1, rng);
        }
        let accept = self.acceptance_table(beta);
        let n = self.u.len();
        let mut stats = SweepStats {
            proposals: n,
            ..Default::default()
        };
        for k in 0..n {
            let edge = match self.order {
                SweepOrder::Raster => k,
                SweepOrder::Random | SweepOrder::NFold => rng.gen_range(0..n),
            };
            let s = self.coupling_sum(edge);
            let ui = (self.u[edge] > 0) as usize;
            let p = accept[(s + 2) as usize][ui];
            if p >= 1.0 || rng.gen::<f64>() < p {
                stats.accepted += 1;
                stats.energy_delta += 2.0 * (self.model.j * s as f64 + self.model.h * self.u[edge] as f64);
                self.flip(edge);
            }
        }
        stats
    }
}

/// Acceptance probability `min(1, e^{-beta dE})`.
pub fn metropolis_acceptance(beta: f64, delta_e: f64) -> f64 {
    if delta_e <= 0.0 {
        1.0
    } else {
        math::exp(-beta * delta_e)
    }
}

/// One Metropolis sweep over `u` in place.
pub fn metropolis_sweep<R: Rng + ?Sized>(
    u: &mut SpinConfiguration,
    model: &Rpgm<'_>,
    beta: f64,
    order: SweepOrder,
    rng: &mut R,
) -> Result<SweepStats> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidParameter("beta must be nonnegative"));
    }
    let mut sampler = Sampler::new(*model, core::mem::take(u), order)?;
    let stats = sampler.sweep(beta, rng);
    *u = sampler.into_spins();
    Ok(stats)
}

/// Anneals from all-up through every schedule stage and returns the final
/// configuration.
pub fn anneal<R: Rng + ?Sized>(
    signs: &[i8],
    params: &CoolingParams,
    geom: &LatticeGeometry,
    kind: CheckKind,
    rng: &mut R,
) -> Result<SpinConfiguration> {
    params.validate()?;
    let model = Rpgm::new(geom, kind, signs, params.coupling(geom.size()), params.h)?;
    let mut sampler = Sampler::new(model, SpinConfiguration::all_up(geom.edge_count()), params.order)?;
    for stage in &params.schedule {
        sampler.run(stage.beta, stage.sweeps, rng);
    }
    Ok(sampler.into_spins())
}

/// Largest lattice accepted by [`exact_gibbs`].
pub const EXACT_GIBBS_MAX_L: usize = 3;

/// Normalised Boltzmann weights over every spin state. State index bit `i`
/// set means `u_i = -1`.
pub fn exact_gibbs(model: &Rpgm<'_>, beta: f64) -> Result<Vec<f64>> {
    let l = model.geom.size();
    let n = model.geom.edge_count();
    if l > EXACT_GIBBS_MAX_L || n > 18 {
        return Err(Error::TooLargeForEnumeration(l));
    }
    let energies = energy_table(model);
    let e_min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = energies.iter().map(|&e| math::exp(-beta * (e - e_min))).collect();
    let z: f64 = w.iter().sum();
    for x in &mut w {
        *x /= z;
    }
    Ok(w)
}

/// Energy of every spin state of a small lattice, indexed as in [`exact_gibbs`].
pub fn energy_table(model: &Rpgm<'_>) -> Vec<f64> {
    let n = model.geom.edge_count();
    let mut u = vec![1i8; n];
    (0..1usize << n)
        .map(|state| {
            for (i, s) in u.iter_mut().enumerate() {
                *s = if state >> i & 1 == 1 { -1 } else { 1 };
            }
            model.energy_unchecked(&u)
        })
        .collect()
}

pub fn state_index(u: &[i8]) -> usize {
    u.iter()
        .enumerate()
        .fold(0, |acc, (i, &s)| if s < 0 { acc | 1 << i } else { acc })
}
