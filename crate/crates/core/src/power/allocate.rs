//! Outer QT loops for SE and EE.

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

use super::barrier::{concave_subsolve, BarrierOptions, ConcaveObjective};
use super::metrics::{max_violation, sum_rate_nats, total_power};
use super::phase1::phase1_for;
use super::surrogate::{auxiliary_update, n_update, QtEnergyObjective, QtSpectralObjective};
use super::{ConstraintSystem, EffectiveGains, Feasibility, LinearConstraints, PowerAllocation, TraceEntry};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocOptions {
    /// Stop when the objective changes by at most this fraction.
    pub rel_tol: f64,
    pub max_iterations: usize,
    pub barrier: BarrierOptions,
}

impl Default for AllocOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-8, max_iterations: 500, barrier: BarrierOptions::default() }
    }
}

/// What the outer loop needs from either objective.
trait Outer<T: Real> {
    /// True objective (nats or nats per mW).
    fn objective(&self, gains: &EffectiveGains<T>, p: &[T]) -> T;
    /// Reported metric (bits units).
    fn metric(&self, gains: &EffectiveGains<T>, p: &[T]) -> T {
        self.objective(gains, p) / T::LN_2()
    }
    fn subsolve(&self, gains: &EffectiveGains<T>, rows: &LinearConstraints<T>, p: &[T], centre: &[T], opts: &BarrierOptions) -> Result<Vec<T>>;
}

struct Spectral;

struct Energy<T> {
    xi: T,
    p_c: T,
}

impl<T: Real> Energy<T> {
    fn consumed(&self, p: &[T]) -> T {
        self.xi * total_power(p) + self.p_c
    }
}

impl<T: Real> Outer<T> for Spectral {
    fn objective(&self, gains: &EffectiveGains<T>, p: &[T]) -> T {
        sum_rate_nats(gains, p)
    }

    fn subsolve(&self, gains: &EffectiveGains<T>, rows: &LinearConstraints<T>, p: &[T], centre: &[T], opts: &BarrierOptions) -> Result<Vec<T>> {
        let m = auxiliary_update(gains, p);
        let q = QtSpectralObjective::new(gains, &m);
        solve_from_blend(&q, rows, p, centre, opts)
    }
}

impl<T: Real> Outer<T> for Energy<T> {
    fn objective(&self, gains: &EffectiveGains<T>, p: &[T]) -> T {
        sum_rate_nats(gains, p) / self.consumed(p)
    }

    fn subsolve(&self, gains: &EffectiveGains<T>, rows: &LinearConstraints<T>, p: &[T], centre: &[T], opts: &BarrierOptions) -> Result<Vec<T>> {
        let w = auxiliary_update(gains, p);
        let n = n_update(sum_rate_nats(gains, p), self.consumed(p));
        let q = QtEnergyObjective::new(gains, &w, n, self.xi, self.p_c);
        solve_from_blend(&q, rows, p, centre, opts)
    }
}

/// Warm start `0.9 p + 0.1 P_c`, moved towards `p` until it lies in the
/// surrogate's domain.
fn solve_from_blend<T: Real, F: ConcaveObjective<T>>(f: &F, rows: &LinearConstraints<T>, p: &[T], centre: &[T], opts: &BarrierOptions) -> Result<Vec<T>> {
    let mut weight = lit::<T>(0.1);
    for _ in 0..30 {
        let x0: Vec<T> = p.iter().zip(centre).map(|(a, c)| (T::one() - weight) * *a + weight * *c).collect();
        if rows.strictly_feasible(&x0, T::zero()) && f.value(&x0).is_some() {
            return Ok(concave_subsolve(f, rows, &x0, opts)?.x);
        }
        weight = weight * lit(0.5);
    }
    if rows.strictly_feasible(p, T::zero()) && f.value(p).is_some() {
        return Ok(concave_subsolve(f, rows, p, opts)?.x);
    }
    Err(Error::InvalidState("no strictly feasible warm start for the surrogate".into()))
}

fn run<T: Real, O: Outer<T>>(outer: &O, gains: &EffectiveGains<T>, system: &ConstraintSystem<T>, p_init: &[T], opts: &AllocOptions) -> Result<PowerAllocation<T>> {
    let (rows, verdict) = phase1_for(gains, system)?;
    let centre = match verdict {
        Feasibility::Feasible(c) => c,
        Feasibility::Infeasible(report) => return Err(Error::Infeasible(report)),
    };
    let mut p = if p_init.len() == gains.k() && rows.strictly_feasible(p_init, T::zero()) {
        p_init.to_vec()
    } else {
        centre.clone()
    };
    let mut current = outer.objective(gains, &p);
    let entry = |iteration: usize, p: &[T], value: T| TraceEntry {
        iteration,
        q: to_f64(value),
        metric: to_f64(outer.metric(gains, p)),
        max_violation: to_f64(max_violation(&rows, p)),
    };
    let mut trace = vec![entry(0, &p, current)];
    let rel_tol = lit::<T>(opts.rel_tol).max(lit::<T>(10.0) * T::epsilon());
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iterations {
        iterations += 1;
        let candidate = outer.subsolve(gains, &rows, &p, &centre, &opts.barrier)?;
        let value = outer.objective(gains, &candidate);
        if !(value >= current) {
            // the surrogate step cannot improve the true objective any more
            trace.push(entry(iterations, &p, current));
            converged = true;
            break;
        }
        let delta = value - current;
        p = candidate;
        current = value;
        trace.push(entry(iterations, &p, current));
        if delta <= rel_tol * current.abs() {
            converged = true;
            break;
        }
    }
    Ok(PowerAllocation { powers: p, objective: current, iterations, converged, trace })
}

/// QT maximisation of the sum rate under `system`.
pub fn qt_se_allocate<T: Real>(gains: &EffectiveGains<T>, system: &ConstraintSystem<T>, p_init: &[T], opts: &AllocOptions) -> Result<PowerAllocation<T>> {
    run(&Spectral, gains, system, p_init, opts)
}

/// Nested QT maximisation of `sum rate / (xi sum P + P_C)`.
pub fn nqt_ee_allocate<T: Real>(
    gains: &EffectiveGains<T>,
    system: &ConstraintSystem<T>,
    xi: T,
    p_c: T,
    p_init: &[T],
    opts: &AllocOptions,
) -> Result<PowerAllocation<T>> {
    run(&Energy { xi, p_c }, gains, system, p_init, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::metrics::{ee, se};

    fn grid_best<F: Fn(&[f64]) -> Option<f64>>(dim: usize, hi: f64, step: f64, f: F) -> f64 {
        let steps = (hi / step).round() as usize;
        let mut best = f64::NEG_INFINITY;
        let mut idx = vec![0usize; dim];
        loop {
            let p: Vec<f64> = idx.iter().map(|i| *i as f64 * step).collect();
            if let Some(v) = f(&p) {
                best = best.max(v);
            }
            let mut d = 0;
            loop {
                if d == dim {
                    return best;
                }
                idx[d] += 1;
                if idx[d] <= steps {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    #[test]
    fn lone_user_transmits_at_cap() {
        let g = EffectiveGains::<f64>::from_parts(vec![0], &[1], vec![vec![2.0]], vec![0.5]).unwrap();
        let sys = ConstraintSystem::power_caps(vec![5.0]);
        let out = qt_se_allocate(&g, &sys, &[5.0], &AllocOptions::default()).unwrap();
        assert!((out.powers[0] - 5.0).abs() < 1e-6 * 5.0, "{:?}", out.powers);
        assert!((out.objective - (21.0f64).ln()).abs() < 1e-6);
    }

    #[test]
    fn trace_is_monotone_and_feasible() {
        let d = vec![vec![5.0, 2.0, 0.4], vec![0.3, 0.6, 4.0]];
        let g = EffectiveGains::<f64>::from_parts(vec![0, 1, 2], &[2, 1], d, vec![0.5, 0.7]).unwrap();
        let sys = ConstraintSystem::uniform(3, 2.0, 0.2, Some(0.01));
        let out = qt_se_allocate(&g, &sys, &[2.0; 3], &AllocOptions::default()).unwrap();
        assert!(out.converged);
        for w in out.trace.windows(2) {
            assert!(w[1].q >= w[0].q - 1e-12);
        }
        assert!(out.trace.iter().all(|t| t.max_violation <= 1e-9));
    }

    #[test]
    fn se_matches_grid_search() {
        let d = vec![vec![3.0, 1.2, 0.3], vec![0.2, 0.25, 2.5]];
        let g = EffectiveGains::<f64>::from_parts(vec![0, 1, 2], &[2, 1], d, vec![1.0, 1.0]).unwrap();
        let sys = ConstraintSystem::uniform(3, 2.0, 0.0, Some(0.01));
        let rows = sys.linear_rows(&g).unwrap();
        let best = grid_best(3, 2.0, 0.1, |p| rows.strictly_feasible(p, -1e-12).then(|| se(&g, p)));
        let out = qt_se_allocate(&g, &sys, &[2.0; 3], &AllocOptions::default()).unwrap();
        let got = se(&g, &out.powers);
        assert!(got >= best - 1e-6, "QT {got} vs grid {best}");
        assert!(got <= best + 0.05, "QT {got} implausibly above grid {best}");
    }

    #[test]
    fn ee_interior_optimum_matches_grid() {
        let g = EffectiveGains::<f64>::from_parts(vec![0, 1], &[2], vec![vec![2.0, 1.0]], vec![1.0]).unwrap();
        let sys = ConstraintSystem::uniform(2, 10.0, 0.0, None);
        let (xi, pc) = (1.0, 1.0);
        let best = grid_best(2, 10.0, 0.1, |p| Some(ee(&g, p, xi, pc)));
        let out = nqt_ee_allocate(&g, &sys, xi, pc, &[10.0; 2], &AllocOptions::default()).unwrap();
        let got = ee(&g, &out.powers, xi, pc);
        assert!(got >= best - 1e-9, "NQT {got} vs grid {best}");
        let total: f64 = out.powers.iter().sum();
        assert!(total > 0.1 && out.powers.iter().all(|p| *p < 9.9), "{:?}", out.powers);
    }

    #[test]
    fn infeasible_system_is_an_error() {
        let g = EffectiveGains::<f64>::from_parts(vec![0, 1], &[2], vec![vec![1.0, 1.0]], vec![1.0]).unwrap();
        let sys = ConstraintSystem::uniform(2, 1.0, 0.0, Some(10.0));
        match qt_se_allocate(&g, &sys, &[1.0, 1.0], &AllocOptions::default()) {
            Err(Error::Infeasible(r)) => assert!(r.names("C3")),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }
}
