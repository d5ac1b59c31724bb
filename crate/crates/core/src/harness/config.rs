//! Simulation configuration, presets and config-file loading.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::{LinkageRule, LinkageSemantics};
use crate::error::{Error, Result};
use crate::pipeline::{Objective, Scheme, SystemParams};
use crate::power::AllocOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    Snr,
    G,
    K,
    PTol,
    PMax,
}

impl SweepVar {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Snr => "snr",
            Self::G => "g",
            Self::K => "k",
            Self::PTol => "p_tol",
            Self::PMax => "p_max",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVar {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "snr" => Ok(Self::Snr),
            "g" => Ok(Self::G),
            "k" => Ok(Self::K),
            "p_tol" => Ok(Self::PTol),
            "p_max" => Ok(Self::PMax),
            other => Err(Error::Config(format!("unknown sweep variable `{other}`"))),
        }
    }
}

/// One simulation campaign. Powers in mW, SNR in dB, rates in bits/s/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub k: usize,
    pub g: usize,
    pub n_bs: usize,
    pub n_beam: usize,
    /// Propagation paths per user.
    pub l: usize,
    pub snr_db: f64,
    pub p_max: f64,
    pub p_tol: f64,
    pub r_min: f64,
    pub xi: f64,
    pub p_c: f64,
    /// Outer-iteration cap of the digital/power loop.
    pub t_max: usize,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub objective: Objective,
    pub linkage: LinkageRule,
    /// When non-empty, every AGNES-based scheme runs once per listed rule.
    pub linkages: Vec<LinkageRule>,
    pub semantics: LinkageSemantics,
    /// Power (mW) the SNR is referenced to; defaults to `p_max`.
    pub noise_reference: Option<f64>,
    pub sweep_var: Option<SweepVar>,
    pub sweep_values: Vec<f64>,
    pub kmeans_restarts: usize,
    pub kmeans_max_iterations: usize,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
    /// Emit the averaged QT convergence trace instead of a sweep table.
    pub trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            k: 9,
            g: 4,
            n_bs: 64,
            n_beam: 64,
            l: 6,
            snr_db: 10.0,
            p_max: 24.0,
            p_tol: 2.0,
            r_min: 0.01,
            xi: 1.0 / 0.38,
            p_c: 100.0,
            t_max: 20,
            trials: 300,
            seed: 1,
            schemes: Scheme::ALL.to_vec(),
            objective: Objective::Se,
            linkage: LinkageRule::Complete,
            linkages: Vec::new(),
            semantics: LinkageSemantics::SimilarityConsistent,
            noise_reference: None,
            sweep_var: None,
            sweep_values: Vec::new(),
            kmeans_restarts: 1,
            kmeans_max_iterations: 50,
            workers: None,
            trace: false,
        }
    }
}

pub const PRESETS: [&str; 7] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig10"];

impl SimConfig {
    /// Named experiment mirroring one of the published figures.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self::default();
        let snr_axis = vec![0.0, 5.0, 10.0, 15.0, 20.0];
        let cfg = match name {
            "fig3" => Self {
                k: 7,
                g: 4,
                schemes: vec![Scheme::DirAgnes],
                linkages: LinkageRule::ALL.to_vec(),
                sweep_var: Some(SweepVar::Snr),
                sweep_values: snr_axis,
                ..base
            },
            "fig4" => Self { k: 9, sweep_var: Some(SweepVar::Snr), sweep_values: snr_axis, ..base },
            "fig5" => Self { k: 12, p_tol: 1.0, sweep_var: Some(SweepVar::G), sweep_values: vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], ..base },
            "fig6" => Self { sweep_var: Some(SweepVar::K), sweep_values: vec![5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0], ..base },
            "fig7" => Self {
                k: 7,
                snr_db: 3.0,
                p_max: 20.0,
                sweep_var: Some(SweepVar::PTol),
                sweep_values: vec![0.5, 1.0, 2.0, 4.0],
                ..base
            },
            "fig8" => Self {
                k: 9,
                snr_db: 5.0,
                p_tol: 0.5,
                objective: Objective::Ee,
                sweep_var: Some(SweepVar::PMax),
                sweep_values: (1..=10).map(|i| 4.0 * i as f64).collect(),
                ..base
            },
            "fig10" => Self { k: 9, schemes: vec![Scheme::SucAgnes], trace: true, ..base },
            other => return Err(Error::Config(format!("unknown preset `{other}` (known: {})", PRESETS.join(", ")))),
        };
        Ok(cfg)
    }

    /// Parses a flat TOML table; absent keys keep their defaults.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k == 0 || self.n_bs == 0 || self.n_beam == 0 || self.l == 0 {
            return bad("k, n_bs, n_beam and l must be positive".into());
        }
        if self.g == 0 || self.g > self.k.min(self.n_beam) {
            return bad(format!("g = {} must lie in 1..=min(k, n_beam) = {}", self.g, self.k.min(self.n_beam)));
        }
        if self.trials == 0 || self.t_max == 0 {
            return bad("trials and t_max must be at least 1".into());
        }
        if !(self.p_max > 0.0) || !(self.p_tol >= 0.0) || !(self.r_min >= 0.0) || !(self.xi > 0.0) || !(self.p_c >= 0.0) {
            return bad("powers must be positive (p_tol, r_min, p_c nonnegative)".into());
        }
        if !self.snr_db.is_finite() || self.noise_reference.is_some_and(|r| !(r > 0.0)) {
            return bad("snr_db must be finite and noise_reference positive".into());
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme required".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        if self.sweep_var.is_some() && self.sweep_values.is_empty() {
            return bad("sweep_values must be nonempty when sweep_var is set".into());
        }
        if let Some(var) = self.sweep_var {
            for &v in &self.sweep_values {
                self.at(var, v)?.validate()?;
            }
        }
        Ok(())
    }

    /// Sweep point with `var = value`; P_max sweeps keep the noise power of
    /// the base configuration.
    pub fn at(&self, var: SweepVar, value: f64) -> Result<Self> {
        let mut c = Self { sweep_var: None, sweep_values: Vec::new(), ..self.clone() };
        let count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!("sweep value {v} is not a positive integer")))
            }
        };
        match var {
            SweepVar::Snr => c.snr_db = value,
            SweepVar::G => c.g = count(value)?,
            SweepVar::K => c.k = count(value)?,
            SweepVar::PTol => c.p_tol = value,
            SweepVar::PMax => {
                c.noise_reference = Some(self.noise_reference.unwrap_or(self.p_max));
                c.p_max = value;
            }
        }
        Ok(c)
    }

    /// Sweep points as `(value, config)`; without a sweep, the SNR point.
    pub fn points(&self) -> Result<(SweepVar, Vec<(f64, SimConfig)>)> {
        match self.sweep_var {
            Some(var) => Ok((var, self.sweep_values.iter().map(|&v| self.at(var, v).map(|c| (v, c))).collect::<Result<_>>()?)),
            None => Ok((SweepVar::Snr, vec![(self.snr_db, Self { sweep_values: Vec::new(), ..self.clone() })])),
        }
    }

    /// `sigma^2 = P_ref / SNR`.
    pub fn sigma2(&self) -> f64 {
        self.noise_reference.unwrap_or(self.p_max) / 10f64.powf(self.snr_db / 10.0)
    }

    pub fn system_params(&self) -> SystemParams<f64> {
        SystemParams {
            p_max: self.p_max,
            r_min: self.r_min,
            p_tol: Some(self.p_tol),
            sigma2: self.sigma2(),
            xi: self.xi,
            p_c: self.p_c,
            t_max: self.t_max,
            objective: self.objective,
            alloc: AllocOptions::default(),
        }
    }

    /// Linkage rules to run (the single `linkage` unless `linkages` is set).
    pub fn linkage_rules(&self) -> Vec<LinkageRule> {
        if self.linkages.is_empty() {
            vec![self.linkage]
        } else {
            self.linkages.clone()
        }
    }
}
