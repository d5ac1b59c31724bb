//! Phase-I feasibility search: maximise the worst normalised slack.

use crate::error::Result;
use crate::scalar::{lit, to_f64, Real};

use super::barrier::{concave_subsolve, BarrierOptions, ConcaveObjective};
use super::{EffectiveGains, InfeasibilityReport, LinearConstraints};

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<T> {
    /// A strictly feasible power vector near the centre of the region.
    Feasible(Vec<T>),
    Infeasible(InfeasibilityReport),
}

impl<T> Feasibility<T> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Feasible(_))
    }
}

/// Objective `t` over `(P, t)`.
struct LastCoordinate(usize);

impl<T: Real> ConcaveObjective<T> for LastCoordinate {
    fn dim(&self) -> usize {
        self.0
    }
    fn value(&self, x: &[T]) -> Option<T> {
        Some(x[self.0 - 1])
    }
    fn gradient(&self, _x: &[T], grad: &mut [T]) {
        grad.iter_mut().for_each(|v| *v = T::zero());
        grad[self.0 - 1] = T::one();
    }
    fn hessian(&self, x: &[T], grad: &mut [T], hess: &mut [T]) {
        self.gradient(x, grad);
        hess.iter_mut().for_each(|v| *v = T::zero());
    }
}

/// Decides whether `rows` (built for `gains`) admit a strictly feasible
/// point. `p_max` seeds the search at `P_max / 2`.
pub fn phase1_feasible<T: Real>(rows: &LinearConstraints<T>, p_max: &[T]) -> Result<Feasibility<T>> {
    let n = rows.dim;
    let m = rows.len();
    let mut lifted = LinearConstraints::new(n + 1);
    let mut scales = Vec::with_capacity(m);
    for i in 0..m {
        let a = rows.row(i);
        let norm = a.iter().map(|v| *v * *v).sum::<T>().sqrt().max(T::min_positive_value());
        scales.push(norm);
        let mut row: Vec<T> = a.iter().map(|v| *v / norm).collect();
        row.push(T::one());
        lifted.push(row, rows.b[i] / norm, rows.kinds[i]);
    }
    let p0: Vec<T> = p_max.iter().map(|p| *p * lit(0.5)).collect();
    let normalised = |p: &[T]| -> Vec<T> { rows.slacks(p).iter().zip(&scales).map(|(s, w)| *s / *w).collect() };
    let min_slack = normalised(&p0).into_iter().fold(T::infinity(), T::min);
    let mut x0 = p0;
    x0.push(min_slack - T::one());

    let opts = BarrierOptions { gap_tol: 1e-12, ..BarrierOptions::default() };
    let sol = concave_subsolve(&LastCoordinate(n + 1), &lifted, &x0, &opts)?;
    let p: Vec<T> = sol.x[..n].to_vec();
    let slack = normalised(&p);
    let t_star = slack.iter().copied().fold(T::infinity(), T::min);
    if t_star > lit(1e-9) {
        return Ok(Feasibility::Feasible(p));
    }
    let band = t_star + lit::<T>(1e-7) * (T::one() + t_star.abs());
    let violated = (0..m).filter(|&i| slack[i] <= band).map(|i| rows.kinds[i]).collect();
    Ok(Feasibility::Infeasible(InfeasibilityReport { violated, margin: to_f64(t_star) }))
}

/// Shortcut building the rows from a constraint system first.
pub(crate) fn phase1_for<T: Real>(gains: &EffectiveGains<T>, system: &super::ConstraintSystem<T>) -> Result<(LinearConstraints<T>, Feasibility<T>)> {
    let rows = system.linear_rows(gains)?;
    let verdict = phase1_feasible(&rows, &system.p_max)?;
    Ok((rows, verdict))
}
