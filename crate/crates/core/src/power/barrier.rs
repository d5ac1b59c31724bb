//! Log-barrier Newton method for `max f(x)` s.t. `A x <= b`, `f` concave.

use crate::error::{invalid, Error, Result};
use crate::linalg::cholesky_solve;
use crate::scalar::{lit, to_f64, Real};

use super::LinearConstraints;

/// Smooth concave objective on an open domain. `value` returns `None` off
/// the domain.
pub trait ConcaveObjective<T> {
    fn dim(&self) -> usize;
    fn value(&self, x: &[T]) -> Option<T>;
    fn gradient(&self, x: &[T], grad: &mut [T]);
    /// Writes the gradient and the row-major Hessian.
    fn hessian(&self, x: &[T], grad: &mut [T], hess: &mut [T]);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierOptions {
    /// Stop once `m * mu <= gap_tol * max(1, |f|)`.
    pub gap_tol: f64,
    /// Centering stops when half the squared Newton decrement drops below
    /// this (relative to `max(1, |phi|)`).
    pub newton_tol: f64,
    pub mu_factor: f64,
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-11, newton_tol: 1e-13, mu_factor: 10.0, max_newton: 3000 }
    }
}

/// First-order optimality measures at the returned point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResidual {
    /// `||grad f - A^T lambda||_inf / max(1, ||grad f||_inf)`.
    pub stationarity: f64,
    /// `max lambda_i s_i`.
    pub complementarity: f64,
    /// `max(0, A x - b)`.
    pub primal: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.complementarity).max(self.primal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Subsolution<T> {
    pub x: Vec<T>,
    pub value: T,
    pub kkt: KktResidual,
    pub newton_steps: usize,
}

struct Barrier<'a, T, F> {
    f: &'a F,
    rows: &'a LinearConstraints<T>,
}

impl<T: Real, F: ConcaveObjective<T>> Barrier<'_, T, F> {
    /// `-f - mu sum ln s`, `None` off the domain.
    fn phi(&self, x: &[T], mu: T) -> Option<T> {
        let fx = self.f.value(x)?;
        let mut log_sum = T::zero();
        for s in self.rows.slacks(x) {
            if !(s > T::zero()) {
                return None;
            }
            log_sum = log_sum + s.ln();
        }
        Some(-fx - mu * log_sum)
    }
}

/// Maximises `f` over `{x : A x <= b}` from a strictly feasible `x0`.
pub fn concave_subsolve<T: Real, F: ConcaveObjective<T>>(
    f: &F,
    rows: &LinearConstraints<T>,
    x0: &[T],
    opts: &BarrierOptions,
) -> Result<Subsolution<T>> {
    let n = f.dim();
    if x0.len() != n || rows.dim != n {
        return Err(invalid("starting point and constraints must match the objective dimension"));
    }
    if !rows.strictly_feasible(x0, T::zero()) || f.value(x0).is_none() {
        return Err(invalid("barrier method needs a strictly feasible start inside the domain"));
    }
    let m = rows.len();
    let barrier = Barrier { f, rows };
    let mut x = x0.to_vec();
    let f0 = f.value(&x).unwrap_or(T::zero());
    let log0: T = rows.slacks(&x).iter().map(|s| s.ln()).sum();
    let mut mu = lit::<T>(0.1) * f0.abs().max(T::one()) / log0.abs().max(T::one());
    let factor = lit::<T>(opts.mu_factor);
    // tolerances below the working precision cannot be met
    let eps = T::epsilon();
    let gap_tol = lit::<T>(opts.gap_tol).max(lit::<T>(100.0) * eps);
    let newton_tol = lit::<T>(opts.newton_tol).max(lit::<T>(10.0) * eps);
    let armijo = lit::<T>(1e-4);
    let half = lit::<T>(0.5);

    let mut grad = vec![T::zero(); n];
    let mut hess = vec![T::zero(); n * n];
    let mut steps = 0usize;
    let mut exhausted = false;

    loop {
        // centering
        loop {
            if steps >= opts.max_newton {
                exhausted = true;
                break;
            }
            let slacks = rows.slacks(&x);
            f.hessian(&x, &mut grad, &mut hess);
            let mut g: Vec<T> = grad.iter().map(|v| -*v).collect();
            let mut h: Vec<T> = hess.iter().map(|v| -*v).collect();
            for (i, s) in slacks.iter().enumerate() {
                let a = rows.row(i);
                let inv = T::one() / *s;
                for p in 0..n {
                    if a[p] == T::zero() {
                        continue;
                    }
                    g[p] = g[p] + mu * a[p] * inv;
                    for q in 0..n {
                        h[p * n + q] = h[p * n + q] + mu * a[p] * a[q] * inv * inv;
                    }
                }
            }
            let dx = newton_direction(&h, &g, n);
            let Some(dx) = dx else { break };
            let decrement: T = -g.iter().zip(&dx).map(|(a, b)| *a * *b).sum::<T>();
            let phi0 = match barrier.phi(&x, mu) {
                Some(v) => v,
                None => break,
            };
            if !(decrement > T::zero()) || half * decrement <= newton_tol * phi0.abs().max(T::one()) {
                break;
            }
            let mut t = T::one();
            for i in 0..m {
                let ad: T = rows.row(i).iter().zip(&dx).map(|(a, d)| *a * *d).sum();
                if ad > T::zero() {
                    t = t.min(lit::<T>(0.99) * slacks[i] / ad);
                }
            }
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<T> = x.iter().zip(&dx).map(|(a, d)| *a + t * *d).collect();
                if let Some(v) = barrier.phi(&trial, mu) {
                    if v <= phi0 - armijo * t * decrement {
                        x = trial;
                        accepted = true;
                        break;
                    }
                }
                t = t * half;
            }
            steps += 1;
            if !accepted {
                break;
            }
        }
        let fx = f.value(&x).unwrap_or(T::zero());
        if exhausted || count_gap(m, mu) <= gap_tol * fx.abs().max(T::one()) {
            break;
        }
        mu = mu / factor;
    }

    let value = f.value(&x).ok_or_else(|| Error::InvalidState("barrier iterate left the objective domain".into()))?;
    let kkt = kkt_residual(f, rows, &x, mu);
    if exhausted && kkt.max() > 1e-6f64.max(to_f64(eps).sqrt()) {
        return Err(Error::SolverNonConvergence { iterations: steps, kkt_residual: kkt.max() });
    }
    Ok(Subsolution { x, value, kkt, newton_steps: steps })
}

fn count_gap<T: Real>(m: usize, mu: T) -> T {
    crate::scalar::count::<T>(m.max(1)) * mu
}

/// Solves `H dx = -g`, adding a growing ridge when `H` is not numerically
/// positive definite.
fn newton_direction<T: Real>(h: &[T], g: &[T], n: usize) -> Option<Vec<T>> {
    let scale = (0..n).map(|i| h[i * n + i].abs()).fold(T::zero(), T::max).max(T::min_positive_value());
    let mut ridge = T::zero();
    for _ in 0..12 {
        let mut a = h.to_vec();
        for i in 0..n {
            a[i * n + i] = a[i * n + i] + ridge;
        }
        let mut b: Vec<T> = g.iter().map(|v| -*v).collect();
        if cholesky_solve(&mut a, &mut b, n) && b.iter().all(|v| v.is_finite()) {
            return Some(b);
        }
        ridge = if ridge == T::zero() { scale * T::epsilon() * lit(16.0) } else { ridge * lit(100.0) };
    }
    None
}

/// Multipliers estimated two ways: from the barrier (`mu / s_i`) and by
/// nonnegative least squares on the near-active rows. The better of the two
/// is reported.
pub(crate) fn kkt_residual<T: Real, F: ConcaveObjective<T>>(f: &F, rows: &LinearConstraints<T>, x: &[T], mu: T) -> KktResidual {
    let n = rows.dim;
    let mut grad = vec![T::zero(); n];
    f.gradient(x, &mut grad);
    let grad: Vec<f64> = grad.into_iter().map(to_f64).collect();
    let slacks: Vec<f64> = rows.slacks(x).into_iter().map(to_f64).collect();
    let a: Vec<Vec<f64>> = (0..rows.len()).map(|i| rows.row(i).iter().map(|v| to_f64(*v)).collect()).collect();
    let primal = slacks.iter().fold(0.0f64, |acc, s| acc.max(-s));
    let gnorm = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs())).max(1.0);
    let mu = to_f64(mu);

    let evaluate = |lambda: &[f64]| -> KktResidual {
        let mut r = grad.clone();
        for (i, l) in lambda.iter().enumerate() {
            for p in 0..n {
                r[p] -= l * a[i][p];
            }
        }
        let stationarity = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs())) / gnorm;
        let complementarity = lambda.iter().zip(&slacks).fold(0.0f64, |acc, (l, s)| acc.max((l * s.max(0.0)).abs()));
        KktResidual { stationarity, complementarity, primal }
    };

    let barrier_lambda: Vec<f64> = slacks.iter().map(|s| if *s > 0.0 { mu / s } else { 0.0 }).collect();
    let from_barrier = evaluate(&barrier_lambda);

    let b_scale: Vec<f64> = (0..rows.len()).map(|i| 1.0 + to_f64(rows.b[i]).abs()).collect();
    let mut active: Vec<usize> = (0..rows.len()).filter(|&i| slacks[i] <= 1e-6 * b_scale[i]).collect();
    let mut lambda = vec![0.0; rows.len()];
    loop {
        let sol = least_squares(&a, &grad, &active, n);
        match sol.iter().position(|v| *v < 0.0) {
            Some(drop) if !active.is_empty() => {
                active.remove(drop);
            }
            _ => {
                for (idx, &i) in active.iter().enumerate() {
                    lambda[i] = sol[idx];
                }
                break;
            }
        }
    }
    let from_active = evaluate(&lambda);
    if from_active.max() <= from_barrier.max() {
        from_active
    } else {
        from_barrier
    }
}

/// Least squares `min ||grad - sum_j l_j a_{set_j}||` via normal equations.
fn least_squares(a: &[Vec<f64>], grad: &[f64], set: &[usize], n: usize) -> Vec<f64> {
    let k = set.len();
    if k == 0 {
        return Vec::new();
    }
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for (p, &i) in set.iter().enumerate() {
        rhs[p] = (0..n).map(|c| a[i][c] * grad[c]).sum();
        for (q, &j) in set.iter().enumerate() {
            gram[p * k + q] = (0..n).map(|c| a[i][c] * a[j][c]).sum();
        }
    }
    let diag = (0..k).map(|i| gram[i * k + i]).fold(0.0f64, f64::max).max(1e-300);
    for i in 0..k {
        gram[i * k + i] += diag * 1e-13;
    }
    if cholesky_solve(&mut gram, &mut rhs, k) {
        rhs
    } else {
        vec![0.0; k]
    }
}
