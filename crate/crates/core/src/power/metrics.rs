use crate::scalar::Real;

use super::{EffectiveGains, LinearConstraints};

/// SINR of position `k` after SIC of the stronger users in its group.
pub fn sinr<T: Real>(gains: &EffectiveGains<T>, p: &[T], k: usize) -> T {
    gains.own(k) * p[k] / gains.interference_plus_noise(k, p)
}

/// Per-position rates `log2(1 + SINR)`.
pub fn rates<T: Real>(gains: &EffectiveGains<T>, p: &[T]) -> Vec<T> {
    (0..gains.k()).map(|k| sinr(gains, p, k).ln_1p() / T::LN_2()).collect()
}

/// `sum ln(1 + SINR)`.
pub fn sum_rate_nats<T: Real>(gains: &EffectiveGains<T>, p: &[T]) -> T {
    (0..gains.k()).map(|k| sinr(gains, p, k).ln_1p()).sum()
}

/// Spectral efficiency in bits/s/Hz.
pub fn se<T: Real>(gains: &EffectiveGains<T>, p: &[T]) -> T {
    sum_rate_nats(gains, p) / T::LN_2()
}

pub fn total_power<T: Real>(p: &[T]) -> T {
    p.iter().copied().sum()
}

/// Energy efficiency `SE / (xi sum P + P_C)` in bits/s/Hz per mW.
pub fn ee<T: Real>(gains: &EffectiveGains<T>, p: &[T], xi: T, p_c: T) -> T {
    se(gains, p) / (xi * total_power(p) + p_c)
}

/// Largest violation `max(0, A x - b)`.
pub fn max_violation<T: Real>(rows: &LinearConstraints<T>, x: &[T]) -> T {
    rows.slacks(x).into_iter().fold(T::zero(), |m, s| m.max(-s))
}
