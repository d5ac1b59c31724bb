//! Quadratic-transform surrogates of the SE and EE objectives.
//!
//! With auxiliaries `m` fixed, each SINR ratio is replaced by
//! `z_k = 1 + 2 m_k sqrt(d_k P_k) - m_k^2 (I_k(P) + n_k)`, which is concave in
//! `P`; the surrogates below are sums of `ln z_k` (and, for EE, a second
//! transform of the outer ratio). Natural logs throughout.

use crate::scalar::{lit, Real};

use super::barrier::ConcaveObjective;
use super::EffectiveGains;

/// Closed-form maximiser of the quadratic surrogate for fixed powers: both
/// `m` (SE) and `w` (EE) use it.
pub fn auxiliary_update<T: Real>(gains: &EffectiveGains<T>, p: &[T]) -> Vec<T> {
    (0..gains.k())
        .map(|k| (gains.own(k) * p[k]).sqrt() / gains.interference_plus_noise(k, p))
        .collect()
}

/// Outer-ratio auxiliary `sqrt(sum R) / (xi sum P + P_C)`.
pub fn n_update<T: Real>(sum_rate: T, consumed_power: T) -> T {
    sum_rate.max(T::zero()).sqrt() / consumed_power
}

/// `ln z_k` terms with their first and second derivatives.
#[derive(Debug, Clone)]
struct LogTerms<'a, T> {
    gains: &'a EffectiveGains<T>,
    aux: &'a [T],
}

impl<T: Real> LogTerms<'_, T> {
    fn z(&self, p: &[T], k: usize) -> T {
        let m = self.aux[k];
        T::one() + lit::<T>(2.0) * m * (self.gains.own(k) * p[k]).sqrt() - m * m * self.gains.interference_plus_noise(k, p)
    }

    /// `sum ln z_k`, or `None` outside the domain.
    fn value(&self, p: &[T]) -> Option<T> {
        if p.iter().any(|x| *x < T::zero()) {
            return None;
        }
        let mut total = T::zero();
        for k in 0..self.gains.k() {
            let z = self.z(p, k);
            if !(z > T::zero()) {
                return None;
            }
            total = total + z.ln();
        }
        Some(total)
    }

    /// Adds the gradient into `grad` and (if given) the Hessian into `hess`.
    fn accumulate(&self, p: &[T], grad: &mut [T], mut hess: Option<&mut [T]>) {
        let n = self.gains.k();
        let mut dz = vec![T::zero(); n];
        for k in 0..n {
            let m = self.aux[k];
            let z = self.z(p, k);
            let row = &self.gains.d[self.gains.stream[k]];
            dz.iter_mut().for_each(|x| *x = T::zero());
            let root = (self.gains.own(k)).sqrt();
            let pk = p[k].max(T::min_positive_value());
            dz[k] = m * root / pk.sqrt();
            for &j in self.gains.interferers(k) {
                dz[j] = -m * m * row[j];
            }
            for j in 0..n {
                grad[j] = grad[j] + dz[j] / z;
            }
            if let Some(h) = hess.as_deref_mut() {
                let curv = -lit::<T>(0.5) * m * root / (pk * pk.sqrt());
                h[k * n + k] = h[k * n + k] + curv / z;
                let z2 = z * z;
                for i in 0..n {
                    if dz[i] == T::zero() {
                        continue;
                    }
                    for j in 0..n {
                        h[i * n + j] = h[i * n + j] - dz[i] * dz[j] / z2;
                    }
                }
            }
        }
    }
}

/// `Q_SE(P, m) = sum_k ln z_k(P; m)`.
#[derive(Debug, Clone)]
pub struct QtSpectralObjective<'a, T> {
    terms: LogTerms<'a, T>,
}

impl<'a, T: Real> QtSpectralObjective<'a, T> {
    pub fn new(gains: &'a EffectiveGains<T>, m: &'a [T]) -> Self {
        Self { terms: LogTerms { gains, aux: m } }
    }
}

impl<T: Real> ConcaveObjective<T> for QtSpectralObjective<'_, T> {
    fn dim(&self) -> usize {
        self.terms.gains.k()
    }

    fn value(&self, p: &[T]) -> Option<T> {
        self.terms.value(p)
    }

    fn gradient(&self, p: &[T], grad: &mut [T]) {
        grad.iter_mut().for_each(|x| *x = T::zero());
        self.terms.accumulate(p, grad, None);
    }

    fn hessian(&self, p: &[T], grad: &mut [T], hess: &mut [T]) {
        grad.iter_mut().for_each(|x| *x = T::zero());
        hess.iter_mut().for_each(|x| *x = T::zero());
        self.terms.accumulate(p, grad, Some(hess));
    }
}

/// `Q_EE(P, n, w) = 2 n sqrt(sum_k ln z_k(P; w)) - n^2 (xi sum P + P_C)`.
#[derive(Debug, Clone)]
pub struct QtEnergyObjective<'a, T> {
    terms: LogTerms<'a, T>,
    n: T,
    xi: T,
    p_c: T,
}

impl<'a, T: Real> QtEnergyObjective<'a, T> {
    pub fn new(gains: &'a EffectiveGains<T>, w: &'a [T], n: T, xi: T, p_c: T) -> Self {
        Self { terms: LogTerms { gains, aux: w }, n, xi, p_c }
    }

    fn consumed(&self, p: &[T]) -> T {
        self.xi * p.iter().copied().sum::<T>() + self.p_c
    }
}

impl<T: Real> ConcaveObjective<T> for QtEnergyObjective<'_, T> {
    fn dim(&self) -> usize {
        self.terms.gains.k()
    }

    fn value(&self, p: &[T]) -> Option<T> {
        let s = self.terms.value(p)?;
        if !(s > T::zero()) {
            return None;
        }
        Some(lit::<T>(2.0) * self.n * s.sqrt() - self.n * self.n * self.consumed(p))
    }

    fn gradient(&self, p: &[T], grad: &mut [T]) {
        let dim = self.dim();
        let mut ds = vec![T::zero(); dim];
        self.terms.accumulate(p, &mut ds, None);
        let root = self.terms.value(p).unwrap_or(T::zero()).max(T::min_positive_value()).sqrt();
        for j in 0..dim {
            grad[j] = self.n * ds[j] / root - self.n * self.n * self.xi;
        }
    }

    fn hessian(&self, p: &[T], grad: &mut [T], hess: &mut [T]) {
        let dim = self.dim();
        let mut ds = vec![T::zero(); dim];
        let mut hs = vec![T::zero(); dim * dim];
        self.terms.accumulate(p, &mut ds, Some(&mut hs));
        let s = self.terms.value(p).unwrap_or(T::zero()).max(T::min_positive_value());
        let root = s.sqrt();
        for i in 0..dim {
            grad[i] = self.n * ds[i] / root - self.n * self.n * self.xi;
            for j in 0..dim {
                hess[i * dim + j] = self.n * (hs[i * dim + j] / root - ds[i] * ds[j] / (lit::<T>(2.0) * s * root));
            }
        }
    }
}
