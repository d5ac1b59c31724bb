//! End-to-end receiver design for one channel draw: integer stage (grouping
//! and analog beams, chosen by a [`Scheme`]) followed by the alternating
//! digital-combiner / power-allocation loop.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{self, KmeansOptions};
use crate::beamforming::{dir_agnes, sort_group_users, sort_group_users_hybrid, suc_agnes, zf_digital, zf_unnormalized, effective_channels, HybridCombiner};
use crate::channel::{ChannelSet, Codebook};
use crate::clustering::{Grouping, LinkageRule, LinkageSemantics};
use crate::error::{invalid, Error, Result};
use crate::linalg::{norm, CMatrix};
use crate::power::{self, AllocOptions, ConstraintSystem, EffectiveGains, PowerAllocation, TraceEntry};
use crate::scalar::{lit, Cpx, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    Se,
    Ee,
}

impl Objective {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Se => "se",
            Self::Ee => "ee",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "se" => Ok(Self::Se),
            "ee" => Ok(Self::Ee),
            other => Err(Error::Config(format!("unknown objective `{other}` (expected se or ee)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    DirAgnes,
    SucAgnes,
    Kmeans,
    GainDiff,
    FullyDigital,
    Oma,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [Self::FullyDigital, Self::SucAgnes, Self::DirAgnes, Self::Kmeans, Self::GainDiff, Self::Oma];

    pub fn name(&self) -> &'static str {
        match self {
            Self::DirAgnes => "dir-agnes",
            Self::SucAgnes => "suc-agnes",
            Self::Kmeans => "kmeans",
            Self::GainDiff => "gain-diff",
            Self::FullyDigital => "fully-digital",
            Self::Oma => "oma",
        }
    }

    pub fn is_noma(&self) -> bool {
        !matches!(self, Self::Oma)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

/// Everything downstream of the integer stage.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams<T> {
    pub p_max: T,
    pub r_min: T,
    /// `None` drops the SIC power-gap constraint.
    pub p_tol: Option<T>,
    pub sigma2: T,
    pub xi: T,
    pub p_c: T,
    /// Outer-iteration cap.
    pub t_max: usize,
    pub objective: Objective,
    pub alloc: AllocOptions,
}

impl<T: Real> SystemParams<T> {
    pub fn constraints(&self, k: usize) -> ConstraintSystem<T> {
        ConstraintSystem::uniform(k, self.p_max, self.r_min, self.p_tol)
    }
}

/// Receiver front end for the continuous stage.
#[derive(Debug, Clone, PartialEq)]
pub enum Frontend<T> {
    /// Analog combiner with one column per group.
    Hybrid(CMatrix<T>),
    /// Full-dimension digital combining (`F_RF = I`).
    FullyDigital,
}

/// Result of the alternating loop.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome<T> {
    /// Groups in SIC order after the last iteration.
    pub grouping: Grouping,
    pub combiner: HybridCombiner<T>,
    pub gains: EffectiveGains<T>,
    pub allocation: PowerAllocation<T>,
    pub se: T,
    pub ee: T,
    pub outer_iterations: usize,
    /// Some iteration fell back to the C1-only problem.
    pub infeasible: bool,
    /// QT trace per outer iteration.
    pub traces: Vec<Vec<TraceEntry>>,
}

impl<T: Real> StageOutcome<T> {
    /// Per-user rates (bits) indexed by global user, zero for users not served.
    pub fn user_rates(&self, k: usize) -> Vec<T> {
        let mut out = vec![T::zero(); k];
        for (pos, r) in power::rates(&self.gains, &self.allocation.powers).into_iter().enumerate() {
            out[self.gains.users[pos]] = r;
        }
        out
    }

    pub fn total_power(&self) -> T {
        power::total_power(&self.allocation.powers)
    }
}

/// ZF combiner for any front end; columns scaled so `||F_RF f_g|| = 1`.
pub fn zf_combiner<T: Real>(frontend: &Frontend<T>, n_bs: usize, strongest: &[&[Cpx<T>]], powers: &[T]) -> Result<HybridCombiner<T>> {
    match frontend {
        Frontend::Hybrid(f_rf) => Ok(HybridCombiner { f_rf: f_rf.clone(), f_bb: zf_digital(f_rf, strongest, powers)? }),
        Frontend::FullyDigital => {
            let eye = CMatrix::identity(n_bs);
            let mut f_bb = zf_unnormalized(&effective_channels(&eye, strongest, powers))?;
            for g in 0..f_bb.cols() {
                let s = T::one() / norm(f_bb.col(g));
                f_bb.col_mut(g).iter_mut().for_each(|x| *x = x.scale(s));
            }
            Ok(HybridCombiner { f_rf: eye, f_bb })
        }
    }
}

/// Alternates SIC ordering, ZF and power allocation for a fixed grouping and
/// front end. The first ordering uses analog gains, later ones the hybrid
/// gain through the previous combiner. Stops on a relative metric change
/// below `1e-6` or after `t_max` iterations.
pub fn continuous_stage<T: Real>(channels: &ChannelSet<T>, grouping: &Grouping, frontend: &Frontend<T>, params: &SystemParams<T>) -> Result<StageOutcome<T>> {
    if params.t_max == 0 {
        return Err(invalid("outer-iteration cap must be at least 1"));
    }
    let k_total = channels.k();
    let mut power_of = vec![params.p_max; k_total];
    let analog = match frontend {
        Frontend::Hybrid(f_rf) => f_rf.clone(),
        Frontend::FullyDigital => CMatrix::identity(channels.n_bs),
    };
    let mut ordered: Vec<Vec<usize>> = grouping.groups().iter().map(|g| sort_group_users(g, &analog, channels)).collect();
    let mut last: Option<StageOutcome<T>> = None;
    let mut traces = Vec::new();
    let mut infeasible = false;
    let mut previous_metric: Option<T> = None;
    for iteration in 1..=params.t_max {
        if let Some(prev) = &last {
            ordered = ordered
                .iter()
                .enumerate()
                .map(|(g, members)| sort_group_users_hybrid(members, &prev.combiner.stream_vector(g), channels))
                .collect();
        }
        let strongest: Vec<&[Cpx<T>]> = ordered.iter().map(|g| channels.h(g[0])).collect();
        let strongest_power: Vec<T> = ordered.iter().map(|g| power_of[g[0]]).collect();
        let combiner = zf_combiner(frontend, channels.n_bs, &strongest, &strongest_power)?;
        let sic = Grouping::from_subset(ordered.clone())?;
        let gains = EffectiveGains::from_combiner(&combiner, channels, &sic, params.sigma2)?;
        let p_init: Vec<T> = gains.users.iter().map(|&u| power_of[u]).collect();
        let system = params.constraints(gains.k());
        let allocation = match allocate(&gains, &system, &p_init, params) {
            Err(Error::Infeasible(_)) => {
                infeasible = true;
                allocate(&gains, &system.relaxed(), &p_init, params)?
            }
            other => other?,
        };
        for (pos, &u) in gains.users.iter().enumerate() {
            power_of[u] = allocation.powers[pos];
        }
        let se = power::se(&gains, &allocation.powers);
        let ee = power::ee(&gains, &allocation.powers, params.xi, params.p_c);
        traces.push(allocation.trace.clone());
        let metric = match params.objective {
            Objective::Se => se,
            Objective::Ee => ee,
        };
        last = Some(StageOutcome {
            grouping: sic,
            combiner,
            gains,
            allocation,
            se,
            ee,
            outer_iterations: iteration,
            infeasible,
            traces: Vec::new(),
        });
        if let Some(prev) = previous_metric {
            if (metric - prev).abs() < lit::<T>(1e-6) * metric.abs().max(T::min_positive_value()) {
                break;
            }
        }
        previous_metric = Some(metric);
    }
    let mut out = last.expect("at least one outer iteration");
    out.traces = traces;
    Ok(out)
}

fn allocate<T: Real>(gains: &EffectiveGains<T>, system: &ConstraintSystem<T>, p_init: &[T], params: &SystemParams<T>) -> Result<PowerAllocation<T>> {
    match params.objective {
        Objective::Se => power::qt_se_allocate(gains, system, p_init, &params.alloc),
        Objective::Ee => power::nqt_ee_allocate(gains, system, params.xi, params.p_c, p_init, &params.alloc),
    }
}

/// Integer-stage knobs shared by the schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOptions {
    pub rule: LinkageRule,
    pub semantics: LinkageSemantics,
    pub kmeans: KmeansOptions,
    /// Seed for the randomised K-means initialisation.
    pub seed: u64,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self { rule: LinkageRule::Complete, semantics: LinkageSemantics::SimilarityConsistent, kmeans: KmeansOptions::default(), seed: 0 }
    }
}

/// Scheme-level result on one draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome<T> {
    pub se: T,
    pub ee: T,
    /// Rate per global user (bits/s/Hz); sums to `se`.
    pub rates: Vec<T>,
    /// Final groups in SIC order (OMA: the time slots).
    pub groups: Vec<Vec<usize>>,
    /// Codebook index per group (empty for the fully digital receiver).
    pub beams: Vec<usize>,
    pub outer_iterations: usize,
    pub infeasible: bool,
    pub traces: Vec<Vec<TraceEntry>>,
}

impl<T: Real> SchemeOutcome<T> {
    pub(crate) fn from_stage(stage: StageOutcome<T>, k: usize, beams: Vec<usize>) -> Self {
        Self {
            se: stage.se,
            ee: stage.ee,
            rates: stage.user_rates(k),
            groups: stage.grouping.groups().to_vec(),
            beams,
            outer_iterations: stage.outer_iterations,
            infeasible: stage.infeasible,
            traces: stage.traces,
        }
    }
}

/// Runs one scheme end to end on `channels`.
pub fn run_scheme<T: Real>(
    scheme: Scheme,
    channels: &ChannelSet<T>,
    g: usize,
    codebook: &Codebook<T>,
    params: &SystemParams<T>,
    opts: &SchemeOptions,
) -> Result<SchemeOutcome<T>> {
    let k = channels.k();
    let selection = match scheme {
        Scheme::DirAgnes => dir_agnes(channels, g, codebook, opts.rule, opts.semantics)?,
        Scheme::SucAgnes => suc_agnes(channels, g, codebook, opts.rule, opts.semantics)?,
        Scheme::Kmeans => baselines::kmeans_selection(channels, g, codebook, &opts.kmeans, opts.seed)?,
        Scheme::GainDiff => baselines::gain_diff_selection(channels, g, codebook)?,
        Scheme::FullyDigital => {
            let selection = suc_agnes(channels, g, codebook, opts.rule, opts.semantics)?;
            let stage = baselines::fully_digital_evaluate(channels, &selection.grouping, params)?;
            return Ok(SchemeOutcome::from_stage(stage, k, Vec::new()));
        }
        Scheme::Oma => {
            let selection = suc_agnes(channels, g, codebook, opts.rule, opts.semantics)?;
            return baselines::oma_evaluate(channels, &selection.grouping, g, codebook, params);
        }
    };
    let stage = continuous_stage(channels, &selection.grouping, &Frontend::Hybrid(selection.beams.f_rf.clone()), params)?;
    // groups keep their analog column, so beams line up with the output order
    Ok(SchemeOutcome::from_stage(stage, k, selection.beams.indices))
}
