//! Uplink SIC metrics and quadratic-transform power allocation.
//!
//! Users are addressed by *flat position*: groups laid out one after the
//! other, each in SIC order (strongest first). [`EffectiveGains::users`] maps
//! a position back to the global user index.

mod allocate;
mod barrier;
mod metrics;
mod phase1;
mod surrogate;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::beamforming::HybridCombiner;
use crate::channel::ChannelSet;
use crate::clustering::Grouping;
use crate::error::{invalid, Result};
use crate::linalg::{dot, norm_sqr};
use crate::scalar::{lit, Real};

pub use allocate::{nqt_ee_allocate, qt_se_allocate, AllocOptions};
pub use barrier::{concave_subsolve, BarrierOptions, ConcaveObjective, KktResidual, Subsolution};
pub use metrics::{ee, max_violation, rates, se, sinr, sum_rate_nats, total_power};
pub use phase1::{phase1_feasible, Feasibility};
pub use surrogate::{auxiliary_update, n_update, QtEnergyObjective, QtSpectralObjective};

/// `d_g(q,v)` for every stream `g` and user position, plus per-stream noise.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveGains<T> {
    /// Global user index of each position.
    pub users: Vec<usize>,
    /// Positions of each group, SIC order.
    pub groups: Vec<Vec<usize>>,
    /// Group (stream) serving each position.
    pub stream: Vec<usize>,
    /// `d[g][k]`: gain of position `k` into stream `g`.
    pub d: Vec<Vec<T>>,
    /// `||F_RF f_g||^2 sigma^2` per stream.
    pub noise: Vec<T>,
    interferers: Vec<Vec<usize>>,
}

impl<T: Real> EffectiveGains<T> {
    /// Builds the gain table from explicit values. `group_sizes` fixes the
    /// flat layout; `d` is `G x K`.
    pub fn from_parts(users: Vec<usize>, group_sizes: &[usize], d: Vec<Vec<T>>, noise: Vec<T>) -> Result<Self> {
        let k: usize = group_sizes.iter().sum();
        let g = group_sizes.len();
        if users.len() != k || d.len() != g || noise.len() != g || d.iter().any(|row| row.len() != k) {
            return Err(invalid("gain table dimensions do not match the grouping"));
        }
        if group_sizes.contains(&0) {
            return Err(invalid("empty group in gain table"));
        }
        if d.iter().flatten().chain(&noise).any(|x| !(*x >= T::zero()) || !x.is_finite()) {
            return Err(invalid("gains and noise must be finite and nonnegative"));
        }
        let mut groups = Vec::with_capacity(g);
        let mut stream = Vec::with_capacity(k);
        let mut next = 0;
        for (gi, &size) in group_sizes.iter().enumerate() {
            groups.push((next..next + size).collect::<Vec<_>>());
            stream.extend(std::iter::repeat_n(gi, size));
            next += size;
        }
        let interferers = (0..k)
            .map(|pos| {
                let own = stream[pos];
                (0..k).filter(|&j| if stream[j] == own { j > pos } else { true }).collect()
            })
            .collect();
        Ok(Self { users, groups, stream, d, noise, interferers })
    }

    /// Gains seen through `combiner` for the ordered `grouping` (global ids
    /// into `channels`); group `g` is decoded on stream `g`.
    pub fn from_combiner(combiner: &HybridCombiner<T>, channels: &ChannelSet<T>, grouping: &Grouping, sigma2: T) -> Result<Self> {
        if combiner.streams() != grouping.len() {
            return Err(invalid("one stream per group required"));
        }
        let users: Vec<usize> = grouping.groups().iter().flatten().copied().collect();
        let sizes: Vec<usize> = grouping.groups().iter().map(Vec::len).collect();
        let mut d = Vec::with_capacity(grouping.len());
        let mut noise = Vec::with_capacity(grouping.len());
        for g in 0..grouping.len() {
            let w = combiner.stream_vector(g);
            d.push(users.iter().map(|&u| dot(&w, channels.h(u)).norm_sqr()).collect());
            noise.push(norm_sqr(&w) * sigma2);
        }
        Self::from_parts(users, &sizes, d, noise)
    }

    pub fn k(&self) -> usize {
        self.users.len()
    }

    /// Own-stream gain `d_g(g,u)` of position `k`.
    pub fn own(&self, k: usize) -> T {
        self.d[self.stream[k]][k]
    }

    /// Positions in `Omega` of position `k`: weaker users of its group and
    /// every user of the other groups.
    pub fn interferers(&self, k: usize) -> &[usize] {
        &self.interferers[k]
    }

    /// Interference plus noise seen by position `k`.
    pub fn interference_plus_noise(&self, k: usize, p: &[T]) -> T {
        let row = &self.d[self.stream[k]];
        self.interferers[k].iter().map(|&j| row[j] * p[j]).sum::<T>() + self.noise[self.stream[k]]
    }
}

/// Which constraint a row came from; `user` is the global user index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstraintKind {
    /// C1: `P <= P_max`.
    PowerCap { user: usize },
    /// `P >= 0`.
    Nonnegative { user: usize },
    /// C2: rate at least `R_min`.
    MinRate { user: usize },
    /// C3: SIC power gap at least `P_tol` above the weaker users.
    SicGap { user: usize },
}

impl ConstraintKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::PowerCap { .. } => "C1",
            Self::Nonnegative { .. } => "P>=0",
            Self::MinRate { .. } => "C2",
            Self::SicGap { .. } => "C3",
        }
    }

    pub fn user(&self) -> usize {
        match *self {
            Self::PowerCap { user } | Self::Nonnegative { user } | Self::MinRate { user } | Self::SicGap { user } => user,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityReport {
    /// Constraints tight at the phase-I optimum.
    pub violated: Vec<ConstraintKind>,
    /// Best achievable worst-case normalised slack (negative when infeasible).
    pub margin: f64,
}

impl InfeasibilityReport {
    pub fn names(&self, label: &str) -> bool {
        self.violated.iter().any(|c| c.label() == label)
    }
}

impl fmt::Display for InfeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violated.iter().map(|c| format!("{}(user {})", c.label(), c.user())).collect();
        write!(f, "margin {:.3e}; tight: {}", self.margin, parts.join(", "))
    }
}

/// Per-user bounds of the allocation problem, indexed by flat position.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem<T> {
    pub p_max: Vec<T>,
    pub r_min: Vec<T>,
    /// `None` drops C3 entirely.
    pub p_tol: Option<T>,
}

impl<T: Real> ConstraintSystem<T> {
    pub fn uniform(k: usize, p_max: T, r_min: T, p_tol: Option<T>) -> Self {
        Self { p_max: vec![p_max; k], r_min: vec![r_min; k], p_tol }
    }

    /// C1 only (plus nonnegativity).
    pub fn power_caps(p_max: Vec<T>) -> Self {
        let k = p_max.len();
        Self { p_max, r_min: vec![T::zero(); k], p_tol: None }
    }

    pub fn relaxed(&self) -> Self {
        Self::power_caps(self.p_max.clone())
    }

    /// Linear form `A P <= b` of C1, nonnegativity, C2 and C3.
    pub fn linear_rows(&self, gains: &EffectiveGains<T>) -> Result<LinearConstraints<T>> {
        let k = gains.k();
        if self.p_max.len() != k || self.r_min.len() != k {
            return Err(invalid("constraint vectors do not match the user count"));
        }
        let mut rows = LinearConstraints::new(k);
        for pos in 0..k {
            let user = gains.users[pos];
            rows.push_unit(pos, T::one(), self.p_max[pos], ConstraintKind::PowerCap { user });
            rows.push_unit(pos, -T::one(), T::zero(), ConstraintKind::Nonnegative { user });
        }
        for pos in 0..k {
            let r = self.r_min[pos];
            if r <= T::zero() {
                continue;
            }
            let gamma = lit::<T>(2.0).powf(r) - T::one();
            let g = gains.stream[pos];
            let mut a = vec![T::zero(); k];
            a[pos] = -gains.own(pos);
            for &j in gains.interferers(pos) {
                a[j] = gamma * gains.d[g][j];
            }
            rows.push(a, -gamma * gains.noise[g], ConstraintKind::MinRate { user: gains.users[pos] });
        }
        if let Some(tol) = self.p_tol {
            for (g, members) in gains.groups.iter().enumerate() {
                for (i, &pos) in members.iter().enumerate().take(members.len().saturating_sub(1)) {
                    let mut a = vec![T::zero(); k];
                    a[pos] = -gains.d[g][pos];
                    for &r in &members[i + 1..] {
                        a[r] = gains.d[g][r];
                    }
                    rows.push(a, -tol, ConstraintKind::SicGap { user: gains.users[pos] });
                }
            }
        }
        Ok(rows)
    }
}

/// Dense row-major `A x <= b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraints<T> {
    pub dim: usize,
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub kinds: Vec<ConstraintKind>,
}

impl<T: Real> LinearConstraints<T> {
    pub fn new(dim: usize) -> Self {
        Self { dim, a: Vec::new(), b: Vec::new(), kinds: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.a[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, a: Vec<T>, b: T, kind: ConstraintKind) {
        debug_assert_eq!(a.len(), self.dim);
        self.a.extend(a);
        self.b.push(b);
        self.kinds.push(kind);
    }

    fn push_unit(&mut self, pos: usize, coeff: T, b: T, kind: ConstraintKind) {
        let mut a = vec![T::zero(); self.dim];
        a[pos] = coeff;
        self.push(a, b, kind);
    }

    /// Slacks `b - A x`.
    pub fn slacks(&self, x: &[T]) -> Vec<T> {
        (0..self.len())
            .map(|i| self.b[i] - self.row(i).iter().zip(x).map(|(a, x)| *a * *x).sum::<T>())
            .collect()
    }

    pub fn strictly_feasible(&self, x: &[T], margin: T) -> bool {
        self.slacks(x).iter().all(|s| *s > margin)
    }
}

/// Result of one QT allocation run.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation<T> {
    /// Transmit power (mW) per flat position.
    pub powers: Vec<T>,
    /// Converged objective: sum of `ln(1 + SINR)` for SE, that over the
    /// consumed power for EE.
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

/// One row of the per-iteration objective trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    /// Surrogate value with freshly updated auxiliaries (nats).
    pub q: f64,
    /// SE (bits/s/Hz) or EE (bits/s/Hz/mW) at the iterate.
    pub metric: f64,
    pub max_violation: f64,
}
