//! Exhaustive search over groupings and injective beam assignments at tiny
//! scale, used as ground truth for the heuristics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beamforming::{dir_agnes, suc_agnes, BeamAssignment, JointSelection};
use crate::channel::{dft_codebook, generate_channels, ChannelSet, Codebook};
use crate::clustering::{Grouping, LinkageRule, LinkageSemantics};
use crate::error::{invalid, Error, Result};
use crate::pipeline::{continuous_stage, Frontend, Objective, SystemParams};
use crate::scalar::{to_f64, Real};

pub const MAX_USERS: usize = 8;
pub const MAX_GROUPS: usize = 3;
pub const MAX_BEAMS: usize = 16;

fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(n: u128) -> u128 {
    (1..=n).product()
}

/// Surjections from `k` users onto `g` labelled groups, by inclusion-exclusion.
pub fn surjection_count(k: usize, g: usize) -> u128 {
    let (k, g) = (k as u32, g as u128);
    let mut total: i128 = 0;
    for i in 0..=g {
        let term = binomial(g, i) as i128 * ((g - i) as i128).pow(k);
        total += if i % 2 == 0 { term } else { -term };
    }
    total.max(0) as u128
}

/// Partitions of `k` users into exactly `g` unlabelled nonempty groups.
pub fn partition_count(k: usize, g: usize) -> u128 {
    if g == 0 {
        return u128::from(k == 0);
    }
    surjection_count(k, g) / factorial(g as u128)
}

/// Ordered choices of `g` distinct beams out of `n`.
pub fn assignment_count(n: usize, g: usize) -> u128 {
    binomial(n as u128, g as u128) * factorial(g as u128)
}

pub fn search_space_size(k: usize, g: usize, n: usize) -> u128 {
    partition_count(k, g).saturating_mul(assignment_count(n, g))
}

/// Every partition of `0..k` into exactly `g` blocks, via restricted growth
/// strings; blocks ordered by their smallest member.
pub fn set_partitions(k: usize, g: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    if g == 0 || g > k {
        return out;
    }
    let mut labels = vec![0usize; k];
    fn recurse(pos: usize, used: usize, labels: &mut [usize], g: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        let k = labels.len();
        if pos == k {
            if used == g {
                let mut blocks = vec![Vec::new(); g];
                for (u, &l) in labels.iter().enumerate() {
                    blocks[l].push(u);
                }
                out.push(blocks);
            }
            return;
        }
        // not enough users left to open the missing blocks
        if g - used > k - pos {
            return;
        }
        for l in 0..=used.min(g - 1) {
            labels[pos] = l;
            recurse(pos + 1, used.max(l + 1), labels, g, out);
        }
    }
    recurse(0, 0, &mut labels, g, &mut out);
    out
}

/// Every ordered tuple of `g` distinct indices below `n`, lexicographic.
pub fn injective_assignments(n: usize, g: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(g);
    let mut used = vec![false; n];
    fn recurse(n: usize, g: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == g {
            out.push(current.clone());
            return;
        }
        for b in 0..n {
            if !used[b] {
                used[b] = true;
                current.push(b);
                recurse(n, g, current, used, out);
                current.pop();
                used[b] = false;
            }
        }
    }
    recurse(n, g, &mut current, &mut used, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    pub grouping: Grouping,
    pub beams: Vec<usize>,
    pub score: T,
    /// Candidates visited (including ones the evaluator rejected).
    pub evaluated: u128,
}

/// Scores every (partition, beam tuple) with `evaluator`; `None` marks an
/// invalid candidate. Ties go to the first candidate in enumeration order.
pub fn exhaustive_search<T, F>(k: usize, g: usize, n_beam: usize, evaluator: F) -> Result<OracleResult<T>>
where
    T: Real,
    F: Fn(&[Vec<usize>], &[usize]) -> Option<T> + Sync,
{
    if k > MAX_USERS || g > MAX_GROUPS || n_beam > MAX_BEAMS {
        return Err(Error::SearchSpaceTooLarge { size: search_space_size(k, g, n_beam) });
    }
    if g == 0 || g > k || g > n_beam {
        return Err(invalid(format!("need 1 <= G <= min(K, N_beam), got G={g}, K={k}, N_beam={n_beam}")));
    }
    let partitions = set_partitions(k, g);
    let tuples = injective_assignments(n_beam, g);
    let per_partition: Vec<Option<(usize, T)>> = partitions
        .par_iter()
        .map(|groups| {
            let mut best: Option<(usize, T)> = None;
            for (t, beams) in tuples.iter().enumerate() {
                if let Some(score) = evaluator(groups, beams) {
                    if best.is_none_or(|(_, b)| score > b) {
                        best = Some((t, score));
                    }
                }
            }
            best
        })
        .collect();
    let mut best: Option<(usize, usize, T)> = None;
    for (p, cand) in per_partition.into_iter().enumerate() {
        if let Some((t, score)) = cand {
            if best.is_none_or(|(_, _, b)| score > b) {
                best = Some((p, t, score));
            }
        }
    }
    let evaluated = (partitions.len() * tuples.len()) as u128;
    let (p, t, score) = best.ok_or_else(|| Error::InvalidState("every candidate was rejected by the evaluator".into()))?;
    Ok(OracleResult { grouping: Grouping::new(partitions[p].clone(), k)?, beams: tuples[t].clone(), score, evaluated })
}

/// Single-pass (`T = 1`) SE evaluator shared by the oracle and the
/// heuristics it is compared against.
pub fn evaluate_candidate<T: Real>(channels: &ChannelSet<T>, codebook: &Codebook<T>, groups: &[Vec<usize>], beams: &[usize], params: &SystemParams<T>) -> Option<T> {
    let grouping = Grouping::new(groups.to_vec(), channels.k()).ok()?;
    let f_rf = BeamAssignment::from_indices(codebook, beams.to_vec()).f_rf;
    continuous_stage(channels, &grouping, &Frontend::Hybrid(f_rf), &evaluator_params(params)).ok().map(|s| s.se)
}

fn evaluator_params<T: Real>(params: &SystemParams<T>) -> SystemParams<T> {
    SystemParams { t_max: 1, objective: Objective::Se, ..params.clone() }
}

pub fn evaluate_selection<T: Real>(channels: &ChannelSet<T>, codebook: &Codebook<T>, selection: &JointSelection<T>, params: &SystemParams<T>) -> Option<T> {
    evaluate_candidate(channels, codebook, selection.grouping.groups(), &selection.beams.indices, params)
}

/// One row of an oracle-vs-heuristics comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub seed: u64,
    pub oracle: f64,
    pub suc: Option<f64>,
    pub dir: Option<f64>,
    /// `(oracle - suc) / oracle`.
    pub gap: Option<f64>,
}

/// Problem shape for [`oracle_compare`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonSetup {
    pub k: usize,
    pub g: usize,
    pub n_bs: usize,
    pub n_beam: usize,
    pub paths: usize,
    pub rule: LinkageRule,
    pub semantics: LinkageSemantics,
}

/// Oracle, SUC-AGNES and DIR-AGNES scores on the draw for `seed`.
pub fn oracle_compare(setup: &ComparisonSetup, seed: u64, params: &SystemParams<f64>) -> Result<ComparisonRow> {
    let channels = generate_channels::<f64>(setup.k, setup.n_bs, setup.paths, seed)?;
    let codebook = dft_codebook::<f64>(setup.n_bs, setup.n_beam)?;
    let best = exhaustive_search(setup.k, setup.g, setup.n_beam, |groups, beams| evaluate_candidate(&channels, &codebook, groups, beams, params))?;
    let suc = suc_agnes(&channels, setup.g, &codebook, setup.rule, setup.semantics)
        .ok()
        .and_then(|s| evaluate_selection(&channels, &codebook, &s, params));
    let dir = dir_agnes(&channels, setup.g, &codebook, setup.rule, setup.semantics)
        .ok()
        .and_then(|s| evaluate_selection(&channels, &codebook, &s, params));
    let oracle = to_f64(best.score);
    let gap = suc.map(|s| (oracle - s) / oracle);
    Ok(ComparisonRow { seed, oracle, suc, dir, gap })
}
