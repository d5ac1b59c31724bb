//! Comparison schemes: K-means and gain-difference grouping, the fully
//! digital receiver, and TDMA-style OMA.

use rand::seq::index::sample;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::beamforming::{direct_beam_assignment, suc_with, Grouper, JointSelection};
use crate::channel::{trial_seed, ChannelSet, Codebook};
use crate::clustering::Grouping;
use crate::error::{invalid, Result};
use crate::linalg::{dot, norm_sqr};
use crate::pipeline::{continuous_stage, Frontend, SchemeOutcome, StageOutcome, SystemParams};
use crate::scalar::{count, to_f64, Cpx, Real};

/// Stream tag mixed into the trial seed for K-means initialisation.
const KMEANS_STREAM: u64 = 0x6b6d_6561_6e73;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KmeansOptions {
    pub max_iterations: usize,
    pub restarts: usize,
}

impl Default for KmeansOptions {
    fn default() -> Self {
        Self { max_iterations: 50, restarts: 1 }
    }
}

fn correlation<T: Real>(a: &[Cpx<T>], b: &[Cpx<T>]) -> f64 {
    let na = to_f64(norm_sqr(a));
    let nb = to_f64(norm_sqr(b));
    if na <= 0.0 || nb <= 0.0 {
        return 0.0;
    }
    (to_f64(dot(a, b).norm()) / (na * nb).sqrt()).min(1.0)
}

/// Medoid K-means on channel correlation. Deterministic given its RNG.
#[derive(Debug, Clone)]
pub struct KmeansGrouper {
    rng: ChaCha20Rng,
    opts: KmeansOptions,
}

impl KmeansGrouper {
    pub fn new(seed: u64, opts: KmeansOptions) -> Self {
        Self { rng: ChaCha20Rng::seed_from_u64(trial_seed(seed, KMEANS_STREAM)), opts }
    }
}

/// Sum over users of the correlation with their cluster's medoid.
pub fn kmeans_score(corr: &[Vec<f64>], clusters: &[Vec<usize>], medoids: &[usize]) -> f64 {
    clusters.iter().zip(medoids).map(|(c, &m)| c.iter().map(|&u| corr[u][m]).sum::<f64>()).sum()
}

fn medoid(corr: &[Vec<f64>], members: &[usize]) -> usize {
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for &m in members {
        let s: f64 = members.iter().map(|&v| corr[m][v]).sum();
        if s > best.0 || (s == best.0 && m < best.1) {
            best = (s, m);
        }
    }
    best.1
}

/// Assignment/medoid-update iterations from `medoids` until stable.
fn lloyd(corr: &[Vec<f64>], mut medoids: Vec<usize>, max_iterations: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = corr.len();
    let g = medoids.len();
    let mut assign = vec![usize::MAX; n];
    let mut clusters = vec![Vec::new(); g];
    for _ in 0..max_iterations.max(1) {
        let mut next = vec![0usize; n];
        for u in 0..n {
            if let Some(c) = medoids.iter().position(|&m| m == u) {
                next[u] = c;
                continue;
            }
            let mut best = (f64::NEG_INFINITY, 0);
            for (c, &m) in medoids.iter().enumerate() {
                if corr[u][m] > best.0 {
                    best = (corr[u][m], c);
                }
            }
            next[u] = best.1;
        }
        clusters = vec![Vec::new(); g];
        for (u, &c) in next.iter().enumerate() {
            clusters[c].push(u);
        }
        // repair: an empty cluster takes the worst-fitting member of the largest one
        while let Some(empty) = clusters.iter().position(Vec::is_empty) {
            let largest = (0..g).max_by_key(|&c| (clusters[c].len(), std::cmp::Reverse(c))).expect("clusters");
            let m = medoids[largest];
            let (ix, &u) = clusters[largest]
                .iter()
                .enumerate()
                .filter(|(_, &u)| u != m)
                .min_by(|a, b| corr[*a.1][m].total_cmp(&corr[*b.1][m]).then(a.1.cmp(b.1)))
                .expect("largest cluster has a non-medoid member");
            clusters[largest].remove(ix);
            clusters[empty].push(u);
            next[u] = empty;
            medoids[empty] = u;
        }
        let new_medoids: Vec<usize> = clusters.iter().map(|c| medoid(corr, c)).collect();
        let stable = next == assign && new_medoids == medoids;
        assign = next;
        medoids = new_medoids;
        if stable {
            break;
        }
    }
    (clusters, medoids)
}

/// `sum_u max_c corr(u, m_c)` for a medoid set.
fn nearest_score(corr: &[Vec<f64>], medoids: &[usize]) -> f64 {
    (0..corr.len()).map(|u| medoids.iter().map(|&m| corr[u][m]).fold(f64::NEG_INFINITY, f64::max)).sum()
}

/// One K-means run from `init` medoids; returns clusters, medoids and score.
/// After the iterations settle, single medoid swaps that raise the score are
/// applied and the iterations resumed, so a start with two medoids in the
/// same cluster still recovers.
pub fn kmeans_run(corr: &[Vec<f64>], init: Vec<usize>, max_iterations: usize) -> (Vec<Vec<usize>>, Vec<usize>, f64) {
    let n = corr.len();
    let (mut clusters, mut medoids) = lloyd(corr, init, max_iterations);
    for _ in 0..max_iterations.max(1) {
        let current = nearest_score(corr, &medoids);
        let mut best: Option<(f64, Vec<usize>)> = None;
        for c in 0..medoids.len() {
            for u in (0..n).filter(|u| !medoids.contains(u)) {
                let mut trial = medoids.clone();
                trial[c] = u;
                let score = nearest_score(corr, &trial);
                if score > current + 1e-12 && best.as_ref().is_none_or(|(b, _)| score > *b) {
                    best = Some((score, trial));
                }
            }
        }
        let Some((_, trial)) = best else { break };
        (clusters, medoids) = lloyd(corr, trial, max_iterations);
    }
    let score = kmeans_score(corr, &clusters, &medoids);
    (clusters, medoids, score)
}

impl<T: Real> Grouper<T> for KmeansGrouper {
    fn group(&mut self, vectors: &[&[Cpx<T>]], n: usize) -> Result<Vec<Vec<usize>>> {
        let k = vectors.len();
        if n == 0 || n > k {
            return Err(invalid(format!("cannot form {n} clusters from {k} users")));
        }
        let corr: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { correlation(vectors[i], vectors[j]) }).collect()).collect();
        let mut best: Option<(Vec<Vec<usize>>, f64)> = None;
        for _ in 0..self.opts.restarts.max(1) {
            let init = sample(&mut self.rng, k, n).into_vec();
            let (clusters, _, score) = kmeans_run(&corr, init, self.opts.max_iterations);
            if best.as_ref().is_none_or(|(_, s)| score > *s) {
                best = Some((clusters, score));
            }
        }
        Ok(best.expect("at least one restart").0)
    }
}

/// K-means grouping of the raw channels.
pub fn kmeans_grouping<T: Real>(channels: &ChannelSet<T>, g: usize, seed: u64, opts: &KmeansOptions) -> Result<Grouping> {
    let groups = KmeansGrouper::new(seed, *opts).group(&channels.vectors(), g)?;
    Grouping::new(groups, channels.k())
}

/// Successive beam selection with K-means in place of AGNES.
pub fn kmeans_selection<T: Real>(channels: &ChannelSet<T>, g: usize, codebook: &Codebook<T>, opts: &KmeansOptions, seed: u64) -> Result<JointSelection<T>> {
    suc_with(channels, g, codebook, &mut KmeansGrouper::new(seed, *opts))
}

/// Sorts users by `||h||^2` (descending) and deals them round-robin, so
/// each group mixes strong and weak users. An approximation of the gain
/// difference scheme it stands in for.
pub fn gain_diff_grouping<T: Real>(channels: &ChannelSet<T>, g: usize) -> Result<Grouping> {
    let k = channels.k();
    if g == 0 || g > k {
        return Err(invalid(format!("group count {g} outside 1..={k}")));
    }
    let mut order: Vec<(f64, usize)> = (0..k).map(|u| (to_f64(norm_sqr(channels.h(u))), u)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut groups = vec![Vec::new(); g];
    for (r, (_, u)) in order.into_iter().enumerate() {
        groups[r % g].push(u);
    }
    Grouping::new(groups, k)
}

pub fn gain_diff_selection<T: Real>(channels: &ChannelSet<T>, g: usize, codebook: &Codebook<T>) -> Result<JointSelection<T>> {
    let grouping = gain_diff_grouping(channels, g)?;
    direct_beam_assignment(channels, grouping.into_groups(), codebook)
}

/// Same grouping, but ZF over the full array instead of analog beams.
pub fn fully_digital_evaluate<T: Real>(channels: &ChannelSet<T>, grouping: &Grouping, params: &SystemParams<T>) -> Result<StageOutcome<T>> {
    continuous_stage(channels, grouping, &Frontend::FullyDigital, params)
}

/// Packs users into `ceil(K/G)` slots of at most `G`: the groups are
/// interleaved (first member of every group, then second members, ...) and
/// the sequence is cut into consecutive slots.
pub fn oma_slots(grouping: &Grouping, g: usize) -> Vec<Vec<usize>> {
    let depth = grouping.groups().iter().map(Vec::len).max().unwrap_or(0);
    let mut sequence = Vec::with_capacity(grouping.user_count());
    for s in 0..depth {
        for members in grouping.groups() {
            if let Some(&u) = members.get(s) {
                sequence.push(u);
            }
        }
    }
    sequence.chunks(g.max(1)).map(<[usize]>::to_vec).collect()
}

/// TDMA reference: per slot every user gets its own beam and the slot is
/// solved without intra-group interference or the SIC gap constraint. SE
/// is averaged over slots; EE divides that by the slot-averaged consumption.
pub fn oma_evaluate<T: Real>(channels: &ChannelSet<T>, grouping: &Grouping, g: usize, codebook: &Codebook<T>, params: &SystemParams<T>) -> Result<SchemeOutcome<T>> {
    let k = channels.k();
    let slots = oma_slots(grouping, g);
    let per_slot = SystemParams { p_tol: None, ..params.clone() };
    let n_slots = count::<T>(slots.len());
    let mut se = T::zero();
    let mut power = T::zero();
    let mut rates = vec![T::zero(); k];
    let mut beams = Vec::new();
    let mut outer_iterations = 0;
    let mut infeasible = false;
    let mut traces = Vec::new();
    for slot in &slots {
        let singletons: Vec<Vec<usize>> = slot.iter().map(|&u| vec![u]).collect();
        let selection = direct_beam_assignment(channels, singletons, codebook)?;
        let stage = continuous_stage(channels, &selection.grouping, &Frontend::Hybrid(selection.beams.f_rf.clone()), &per_slot)?;
        for (u, r) in stage.user_rates(k).into_iter().enumerate() {
            rates[u] = rates[u] + r / n_slots;
        }
        se = se + stage.se;
        power = power + stage.total_power();
        beams.extend(selection.beams.indices);
        outer_iterations = outer_iterations.max(stage.outer_iterations);
        infeasible |= stage.infeasible;
        traces.extend(stage.traces);
    }
    let se = se / n_slots;
    let ee = se / (params.xi * power / n_slots + params.p_c);
    Ok(SchemeOutcome { se, ee, rates, groups: slots, beams, outer_iterations, infeasible, traces })
}
