//! Multipath mmWave uplink channels, ULA array responses, the DFT beam
//! codebook and the channel-correlation similarity.

use std::fmt::Write as _;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm};
use crate::scalar::{count, lit, to_f64, Cpx, Real};

/// Generator identity recorded in channel dumps. Bump the suffix whenever the
/// draw order changes.
pub const RNG_NAME: &str = "chacha20-user-stream-v1";

/// Unit-norm ULA response with half-wavelength spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayResponse<T> {
    pub entries: Vec<Cpx<T>>,
    /// Physical angle (radians) the response points to.
    pub angle: T,
}

impl<T: Real> ArrayResponse<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[Cpx<T>] {
        &self.entries
    }

    /// Response whose inter-element phase advance is `phase_step` radians.
    fn from_phase_step(n: usize, phase_step: T) -> Self {
        let amp = T::one() / count::<T>(n).sqrt();
        let entries = (0..n)
            .map(|j| Complex::from_polar(amp, count::<T>(j) * phase_step))
            .collect();
        // phase_step / pi wrapped to [-1, 1) is the direction cosine
        let two = lit::<T>(2.0);
        let mut u = phase_step / T::PI();
        u = u - two * ((u + T::one()) / two).floor();
        Self {
            entries,
            angle: u.max(-T::one()).min(T::one()).acos(),
        }
    }
}

/// `a(N, angle)`: entry `j` is `exp(i j pi cos(angle)) / sqrt(N)`.
pub fn array_response<T: Real>(n: usize, angle: T) -> Result<ArrayResponse<T>> {
    if n == 0 {
        return Err(invalid("array size must be at least 1"));
    }
    let mut a = ArrayResponse::from_phase_step(n, T::PI() * angle.cos());
    a.angle = angle;
    Ok(a)
}

/// One propagation path: complex gain and angle of arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path<T> {
    pub gain: Cpx<T>,
    pub aoa: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserChannel<T> {
    pub h: Vec<Cpx<T>>,
    /// Paths that generated `h`; empty for channels supplied directly.
    pub paths: Vec<Path<T>>,
}

impl<T: Real> UserChannel<T> {
    pub fn path_count(&self) -> usize {
        self.paths.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    pub n_bs: usize,
    pub seed: u64,
    pub users: Vec<UserChannel<T>>,
}

/// `sqrt(N / L) * sum_l alpha_l a(N, theta_l)`.
pub fn channel_from_paths<T: Real>(n_bs: usize, paths: &[Path<T>]) -> Result<Vec<Cpx<T>>> {
    if paths.is_empty() {
        return Err(invalid("a channel needs at least one path"));
    }
    let scale = (count::<T>(n_bs) / count::<T>(paths.len())).sqrt();
    let mut h = vec![Complex::new(T::zero(), T::zero()); n_bs];
    for p in paths {
        let a = array_response(n_bs, p.aoa)?;
        for (hj, aj) in h.iter_mut().zip(&a.entries) {
            *hj = *hj + p.gain * aj * scale;
        }
    }
    Ok(h)
}

impl<T: Real> ChannelSet<T> {
    pub fn k(&self) -> usize {
        self.users.len()
    }

    pub fn h(&self, user: usize) -> &[Cpx<T>] {
        &self.users[user].h
    }

    pub fn vectors(&self) -> Vec<&[Cpx<T>]> {
        self.users.iter().map(|u| u.h.as_slice()).collect()
    }

    /// Builds a set from explicit per-user paths.
    pub fn from_paths(n_bs: usize, seed: u64, paths: Vec<Vec<Path<T>>>) -> Result<Self> {
        if n_bs == 0 {
            return Err(invalid("N_BS must be at least 1"));
        }
        let users = paths
            .into_iter()
            .map(|p| Ok(UserChannel { h: channel_from_paths(n_bs, &p)?, paths: p }))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { n_bs, seed, users })
    }

    /// Wraps channel vectors that were not produced by the path model.
    pub fn from_vectors(vectors: Vec<Vec<Cpx<T>>>) -> Result<Self> {
        let n_bs = vectors.first().map(Vec::len).unwrap_or(0);
        if n_bs == 0 || vectors.iter().any(|v| v.len() != n_bs) {
            return Err(invalid("channel vectors must be nonempty and of equal length"));
        }
        Ok(Self {
            n_bs,
            seed: 0,
            users: vectors.into_iter().map(|h| UserChannel { h, paths: Vec::new() }).collect(),
        })
    }

    /// Recomputes each user's channel from its stored paths.
    pub fn reconstruct(&self) -> Result<Vec<Vec<Cpx<T>>>> {
        self.users
            .iter()
            .map(|u| channel_from_paths(self.n_bs, &u.paths))
            .collect()
    }

    /// Restricts the set to the listed users, in that order.
    pub fn subset(&self, users: &[usize]) -> Self {
        Self {
            n_bs: self.n_bs,
            seed: self.seed,
            users: users.iter().map(|&u| self.users[u].clone()).collect(),
        }
    }

    /// Text dump: one `user` line per user followed by its `path` lines, all
    /// floats at 17 significant digits.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# noma-hbf channel dump v1");
        let _ = writeln!(out, "rng {RNG_NAME}");
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "n_bs {}", self.n_bs);
        for (k, u) in self.users.iter().enumerate() {
            let _ = writeln!(out, "user {k} paths {}", u.paths.len());
            for p in &u.paths {
                let _ = writeln!(
                    out,
                    "path {:.16e} {:.16e} {:.16e}",
                    to_f64(p.gain.re),
                    to_f64(p.gain.im),
                    to_f64(p.aoa)
                );
            }
        }
        out
    }
}

impl ChannelSet<f64> {
    /// Parses [`ChannelSet::dump`] output and rebuilds the channel vectors.
    pub fn parse_dump(text: &str) -> Result<Self> {
        let bad = |line: &str| Error::InvalidArgument(format!("malformed channel dump line: {line:?}"));
        let mut seed = 0u64;
        let mut n_bs = 0usize;
        let mut paths: Vec<Vec<Path<f64>>> = Vec::new();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            match it.next() {
                Some("rng") => {
                    if it.next() != Some(RNG_NAME) {
                        return Err(bad(line));
                    }
                }
                Some("seed") => seed = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(line))?,
                Some("n_bs") => n_bs = it.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad(line))?,
                Some("user") => paths.push(Vec::new()),
                Some("path") => {
                    let vals: Vec<f64> = it.map(|s| s.parse::<f64>()).collect::<std::result::Result<_, _>>().map_err(|_| bad(line))?;
                    if vals.len() != 3 {
                        return Err(bad(line));
                    }
                    paths
                        .last_mut()
                        .ok_or_else(|| bad(line))?
                        .push(Path { gain: Complex::new(vals[0], vals[1]), aoa: vals[2] });
                }
                _ => return Err(bad(line)),
            }
        }
        Self::from_paths(n_bs, seed, paths)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of Monte Carlo trial `trial` under base seed `base`.
pub fn trial_seed(base: u64, trial: u64) -> u64 {
    splitmix64(base ^ splitmix64(trial))
}

/// Generator for one user's draws: the seed keys the cipher, the user index
/// selects the stream, so user `k` is reproducible independently of `K`.
pub fn user_rng(seed: u64, user: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(user as u64);
    rng
}

/// Draws `K` users with `L` paths each: gains `CN(0, 1)`, AoAs uniform on
/// `[-pi/2, pi/2]`.
pub fn generate_channels<T: Real>(k: usize, n_bs: usize, l: usize, seed: u64) -> Result<ChannelSet<T>> {
    if k == 0 || n_bs == 0 || l == 0 {
        return Err(invalid("K, N_BS and L must all be at least 1"));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let paths = (0..k)
        .map(|user| {
            let mut rng = user_rng(seed, user);
            (0..l)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let aoa: f64 = rng.random_range(-half_pi..=half_pi);
                    let s = std::f64::consts::FRAC_1_SQRT_2;
                    Path {
                        gain: Complex::new(lit(re * s), lit(im * s)),
                        aoa: lit(aoa),
                    }
                })
                .collect()
        })
        .collect();
    ChannelSet::from_paths(n_bs, seed, paths)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<T> {
    pub beams: Vec<ArrayResponse<T>>,
    /// Inter-element phase advance of each beam, `2 pi i / N_beam`.
    pub phase_steps: Vec<T>,
}

impl<T: Real> Codebook<T> {
    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn n_bs(&self) -> usize {
        self.beams.first().map(ArrayResponse::len).unwrap_or(0)
    }

    pub fn beam(&self, i: usize) -> &[Cpx<T>] {
        &self.beams[i].entries
    }
}

/// Uniform DFT codebook: beam `i` (0-based) advances phase by
/// `2 pi i / N_beam` per element, which makes a square codebook the unitary
/// DFT matrix.
pub fn dft_codebook<T: Real>(n_bs: usize, n_beam: usize) -> Result<Codebook<T>> {
    if n_bs == 0 || n_beam == 0 {
        return Err(invalid("N_BS and N_beam must be at least 1"));
    }
    let two_pi = lit::<T>(2.0) * T::PI();
    let phase_steps: Vec<T> = (0..n_beam)
        .map(|i| two_pi * count::<T>(i) / count::<T>(n_beam))
        .collect();
    let beams = phase_steps
        .iter()
        .map(|&p| ArrayResponse::from_phase_step(n_bs, p))
        .collect();
    Ok(Codebook { beams, phase_steps })
}

/// `|h_k^H h_l| / (||h_k|| ||h_l||)`.
pub fn channel_correlation<T: Real>(hk: &[Cpx<T>], hl: &[Cpx<T>]) -> Result<T> {
    if hk.len() != hl.len() {
        return Err(invalid("channel vectors differ in length"));
    }
    let nk = norm(hk);
    let nl = norm(hl);
    if nk == T::zero() || nl == T::zero() {
        return Err(invalid("zero-norm channel vector"));
    }
    Ok((dot(hk, hl).norm() / (nk * nl)).min(T::one()))
}
