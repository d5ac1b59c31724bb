//! Uplink mmWave MIMO-NOMA with a hybrid analog/digital receiver: channel
//! generation, user grouping, analog beam selection, zero-forcing digital
//! combining, QT-based power allocation, baselines, an exhaustive oracle and
//! a Monte Carlo harness.
//!
//! Every numeric routine is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which the harness uses.
//!
//! ```
//! use noma_hbf::channel::{dft_codebook, generate_channels};
//! use noma_hbf::harness::SimConfig;
//! use noma_hbf::pipeline::{run_scheme, Scheme, SchemeOptions};
//!
//! let cfg = SimConfig { k: 6, g: 3, n_bs: 16, n_beam: 16, ..SimConfig::default() };
//! let channels = generate_channels::<f64>(cfg.k, cfg.n_bs, cfg.l, 7)?;
//! let codebook = dft_codebook::<f64>(cfg.n_bs, cfg.n_beam)?;
//! let out = run_scheme(Scheme::SucAgnes, &channels, cfg.g, &codebook, &cfg.system_params(), &SchemeOptions::default())?;
//! assert_eq!(out.groups.len(), 3);
//! assert!(out.se > 0.0);
//! # Ok::<(), noma_hbf::Error>(())
//! ```

pub mod baselines;
pub mod beamforming;
pub mod channel;
pub mod clustering;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod oracle;
pub mod pipeline;
pub mod power;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cpx, Real};

pub type ChannelSetF64 = channel::ChannelSet<f64>;
pub type CodebookF64 = channel::Codebook<f64>;
pub type EffectiveGainsF64 = power::EffectiveGains<f64>;
pub type ConstraintSystemF64 = power::ConstraintSystem<f64>;
pub type PowerAllocationF64 = power::PowerAllocation<f64>;
pub type JointSelectionF64 = beamforming::JointSelection<f64>;
pub type ChannelSetF32 = channel::ChannelSet<f32>;
pub type CodebookF32 = channel::Codebook<f32>;
