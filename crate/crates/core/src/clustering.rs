//! Bottom-up (AGNES) hierarchical grouping over channel-correlation
//! similarity with Lance-Williams linkage updates.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::channel_correlation;
use crate::error::{invalid, Error, Result};
use crate::scalar::{count, lit, to_f64, Cpx, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix<T> {
    size: usize,
    entries: Vec<T>,
}

impl<T: Real> SimilarityMatrix<T> {
    /// Builds a matrix from row-major entries. Only the off-diagonal part is
    /// used; it must be symmetric.
    pub fn from_entries(size: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != size * size {
            return Err(invalid("similarity entries do not form a square matrix"));
        }
        for i in 0..size {
            for j in (i + 1)..size {
                let (a, b) = (entries[i * size + j], entries[j * size + i]);
                if (a - b).abs() > lit::<T>(1e-12) * (T::one() + a.abs()) {
                    return Err(invalid(format!("similarity not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { size, entries })
    }

    /// Pairwise channel correlations of the given vectors.
    pub fn from_channels<V: AsRef<[Cpx<T>]>>(vectors: &[V]) -> Result<Self> {
        let size = vectors.len();
        let mut entries = vec![T::one(); size * size];
        for i in 0..size {
            for j in (i + 1)..size {
                let c = channel_correlation(vectors[i].as_ref(), vectors[j].as_ref())?;
                entries[i * size + j] = c;
                entries[j * size + i] = c;
            }
        }
        Ok(Self { size, entries })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.size + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LinkageRule {
    Single,
    #[default]
    Complete,
    Average,
    Centroid,
    Ward,
}

impl LinkageRule {
    pub const ALL: [LinkageRule; 5] = [Self::Single, Self::Complete, Self::Average, Self::Centroid, Self::Ward];

    pub fn name(self) -> &'static str {
        match self {
            Self::Single => "single",
            Self::Complete => "complete",
            Self::Average => "average",
            Self::Centroid => "centroid",
            Self::Ward => "ward",
        }
    }
}

impl FromStr for LinkageRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown linkage rule {s:?}")))
    }
}

/// How the single/complete rules are read on a similarity (not a distance).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum LinkageSemantics {
    /// Coefficient table applied verbatim: complete keeps the larger similarity.
    PaperLiteral,
    /// Single/complete `gamma` signs swapped: complete keeps the smaller similarity.
    #[default]
    SimilarityConsistent,
}

impl LinkageSemantics {
    pub fn name(self) -> &'static str {
        match self {
            Self::PaperLiteral => "paper-literal",
            Self::SimilarityConsistent => "similarity-consistent",
        }
    }
}

impl FromStr for LinkageSemantics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-literal" => Ok(Self::PaperLiteral),
            "similarity-consistent" => Ok(Self::SimilarityConsistent),
            _ => Err(Error::Config(format!("unknown linkage semantics {s:?}"))),
        }
    }
}

/// Lance-Williams coefficients `(alpha_i, alpha_j, beta, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanceWilliams<T> {
    pub alpha_i: T,
    pub alpha_j: T,
    pub beta: T,
    pub gamma: T,
}

pub fn coefficients<T: Real>(
    rule: LinkageRule,
    semantics: LinkageSemantics,
    size_i: usize,
    size_j: usize,
    size_q: usize,
) -> LanceWilliams<T> {
    let (ni, nj, nq) = (count::<T>(size_i), count::<T>(size_j), count::<T>(size_q));
    let half = lit::<T>(0.5);
    let flip = match semantics {
        LinkageSemantics::PaperLiteral => T::one(),
        LinkageSemantics::SimilarityConsistent => -T::one(),
    };
    match rule {
        LinkageRule::Single => LanceWilliams { alpha_i: half, alpha_j: half, beta: T::zero(), gamma: -half * flip },
        LinkageRule::Complete => LanceWilliams { alpha_i: half, alpha_j: half, beta: T::zero(), gamma: half * flip },
        LinkageRule::Average => LanceWilliams {
            alpha_i: ni / (ni + nj),
            alpha_j: nj / (ni + nj),
            beta: T::zero(),
            gamma: T::zero(),
        },
        LinkageRule::Centroid => LanceWilliams {
            alpha_i: ni / (ni + nj),
            alpha_j: nj / (ni + nj),
            beta: -(ni * nj) / (ni + nj),
            gamma: T::zero(),
        },
        LinkageRule::Ward => {
            let total = ni + nj + nq;
            LanceWilliams {
                alpha_i: (ni + nq) / total,
                alpha_j: (nj + nq) / total,
                beta: -nq / total,
                gamma: T::zero(),
            }
        }
    }
}

/// Linkage between `S_i u S_j` and `S_q` from the pre-merge linkages.
#[allow(clippy::too_many_arguments)]
pub fn lance_williams_update<T: Real>(
    l_iq: T,
    l_jq: T,
    l_ij: T,
    size_i: usize,
    size_j: usize,
    size_q: usize,
    rule: LinkageRule,
    semantics: LinkageSemantics,
) -> T {
    let c = coefficients::<T>(rule, semantics, size_i, size_j, size_q);
    c.alpha_i * l_iq + c.alpha_j * l_jq + c.beta * l_ij + c.gamma * (l_iq - l_jq).abs()
}

/// Partition of users into nonempty, disjoint, ordered groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grouping {
    groups: Vec<Vec<usize>>,
}

impl Grouping {
    /// Validates that `groups` partitions `0..k` with no empty group.
    pub fn new(groups: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        let mut seen = vec![false; k];
        for g in &groups {
            if g.is_empty() {
                return Err(invalid("empty group"));
            }
            for &u in g {
                if u >= k || seen[u] {
                    return Err(invalid(format!("user {u} out of range or repeated")));
                }
                seen[u] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(invalid("grouping does not cover every user"));
        }
        Ok(Self { groups })
    }

    /// Accepts a partition of an arbitrary user subset (no coverage check).
    pub fn from_subset(groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut all: Vec<usize> = groups.iter().flatten().copied().collect();
        let n = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != n || groups.iter().any(Vec::is_empty) {
            return Err(invalid("groups overlap or are empty"));
        }
        Ok(Self { groups })
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn group(&self, g: usize) -> &[usize] {
        &self.groups[g]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn user_count(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn into_groups(self) -> Vec<Vec<usize>> {
        self.groups
    }

    /// Canonical form (members sorted, groups ordered by smallest member),
    /// for comparing partitions irrespective of order.
    pub fn canonical(&self) -> Vec<Vec<usize>> {
        let mut g: Vec<Vec<usize>> = self
            .groups
            .iter()
            .map(|g| {
                let mut g = g.clone();
                g.sort_unstable();
                g
            })
            .collect();
        g.sort();
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Merge<T> {
    pub step: usize,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub linkage: T,
}

/// Merge history of one AGNES run (diagnostic only).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dendrogram<T> {
    pub merges: Vec<Merge<T>>,
}

impl<T: Real> Dendrogram<T> {
    /// One line per merge: `step <n> a <ids> b <ids> linkage <value>`.
    pub fn export(&self) -> String {
        let ids = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut out = String::new();
        for m in &self.merges {
            let _ = writeln!(out, "step {} a {} b {} linkage {:.16e}", m.step, ids(&m.a), ids(&m.b), to_f64(m.linkage));
        }
        out
    }
}

/// Agglomerates `P` singletons into `target` groups, merging the pair with
/// the largest linkage at every step. Ties go to the lexicographically
/// smallest pair of group labels, where a group is labelled by its smallest
/// member.
pub fn agnes<T: Real>(
    similarity: &SimilarityMatrix<T>,
    target: usize,
    rule: LinkageRule,
    semantics: LinkageSemantics,
) -> Result<(Grouping, Dendrogram<T>)> {
    let p = similarity.size();
    if target == 0 || target > p {
        return Err(invalid(format!("cannot form {target} groups from {p} users")));
    }
    let mut members: Vec<Option<Vec<usize>>> = (0..p).map(|i| Some(vec![i])).collect();
    let mut link: Vec<T> = (0..p * p).map(|x| similarity.get(x / p, x % p)).collect();
    let mut dendrogram = Dendrogram::default();
    let mut active = p;
    let mut step = 0;
    while active > target {
        let mut best: Option<(usize, usize, T)> = None;
        for i in 0..p {
            if members[i].is_none() {
                continue;
            }
            for j in (i + 1)..p {
                if members[j].is_none() {
                    continue;
                }
                let v = link[i * p + j];
                if best.is_none_or(|(_, _, b)| v > b) {
                    best = Some((i, j, v));
                }
            }
        }
        let (i, j, value) = best.expect("at least two active groups");
        let size_i = members[i].as_ref().map_or(0, Vec::len);
        let size_j = members[j].as_ref().map_or(0, Vec::len);
        for q in 0..p {
            if q == i || q == j {
                continue;
            }
            if let Some(mq) = &members[q] {
                let v = lance_williams_update(link[i * p + q], link[j * p + q], value, size_i, size_j, mq.len(), rule, semantics);
                link[i * p + q] = v;
                link[q * p + i] = v;
            }
        }
        let b = members[j].take().unwrap_or_default();
        let a = members[i].as_mut().expect("active group");
        step += 1;
        dendrogram.merges.push(Merge { step, a: a.clone(), b: b.clone(), linkage: value });
        a.extend(b);
        a.sort_unstable();
        active -= 1;
    }
    let groups = members.into_iter().flatten().collect();
    Ok((Grouping::new(groups, p)?, dendrogram))
}

/// AGNES directly on channel vectors.
pub fn agnes_channels<T: Real, V: AsRef<[Cpx<T>]>>(
    vectors: &[V],
    target: usize,
    rule: LinkageRule,
    semantics: LinkageSemantics,
) -> Result<Grouping> {
    let sim = SimilarityMatrix::from_channels(vectors)?;
    Ok(agnes(&sim, target, rule, semantics)?.0)
}
