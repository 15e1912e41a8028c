//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interface_dynamics::Mode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    #[default]
    Rk4,
    Picard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Flat interface, constant traces.
    #[default]
    Flat,
    /// Single Fourier mode on the interface.
    Mode,
    /// Smooth profile with slowly decaying spectrum, `1/(a + cos x1)`.
    Broad,
    /// Fields read from a snapshot.
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Seed {
    /// `θ = 0`.
    #[default]
    Rest,
    /// `θ = λ f` with the fastest-growing (or positive-frequency) root of
    /// the flat spectrum.
    Eigenmode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Initial {
    pub family: Family,
    pub offset: f64,
    pub amplitude: f64,
    pub wavevector: [i64; 2],
    /// Parameter `a > 1` of the broad profile.
    pub breadth: f64,
    pub seed: Seed,
    /// Tangential velocity traces at rest state, per side.
    pub u_plus: [f64; 2],
    pub u_minus: [f64; 2],
    /// Tangential rows `F_1j`, `F_2j` of the deformation, per side.
    pub deformation_plus: [[f64; 3]; 2],
    pub deformation_minus: [[f64; 3]; 2],
    /// Amplitude of a smooth vortical perturbation of `u`.
    pub vortex_amplitude: f64,
    /// Same for the first deformation column.
    pub deformation_vortex_amplitude: f64,
    pub path: Option<PathBuf>,
}

impl Default for Initial {
    fn default() -> Self {
        Self {
            family: Family::Flat,
            offset: 0.0,
            amplitude: 0.0,
            wavevector: [1, 0],
            breadth: 1.5,
            seed: Seed::Rest,
            u_plus: [0.0; 2],
            u_minus: [0.0; 2],
            deformation_plus: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            deformation_minus: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vortex_amplitude: 0.0,
            deformation_vortex_amplitude: 0.0,
            path: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Accepted violation of the initial-data constraints.
    pub initial: f64,
    pub picard: f64,
    pub picard_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            initial: 1e-6,
            picard: 1e-10,
            picard_max_iter: 30,
        }
    }
}

/// Thresholds standing in for the continuation criteria.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Monitors {
    /// `max |f|`; defaults to `1 − c0` when absent.
    pub max_interface: Option<f64>,
    pub max_velocity: f64,
    pub max_deformation: f64,
    /// `‖f‖_{H^{s+1/2}}`.
    pub max_sobolev: f64,
    /// Stop when `Λ < c0` (ignored in instability studies).
    pub enforce_lambda: bool,
    pub max_constraint: f64,
}

impl Default for Monitors {
    fn default() -> Self {
        Self {
            max_interface: None,
            max_velocity: 1e3,
            max_deformation: 1e3,
            max_sobolev: 1e4,
            enforce_lambda: true,
            max_constraint: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub dt: f64,
    pub t_end: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub c0: f64,
    pub s: u32,
    pub mode: Mode,
    pub cfl: f64,
    pub stepper: Stepper,
    pub instability_study: bool,
    /// Accepted for compatibility; evaluation is always serial.
    pub serial: bool,
    pub output_dir: PathBuf,
    /// Steps between CSV rows.
    pub sample_every: usize,
    /// Steps between snapshots (0 = final only).
    pub checkpoint_every: usize,
    /// Compute the momentum residual at checkpoints.
    pub residual_at_checkpoints: bool,
    pub tolerances: Tolerances,
    pub monitors: Monitors,
    pub initial: Initial,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            d: 1,
            n: 32,
            m: 16,
            dt: 1e-3,
            t_end: 0.1,
            rho_plus: 1.0,
            rho_minus: 1.0,
            c0: 0.05,
            s: 3,
            mode: Mode::TwoFluid,
            cfl: 0.5,
            stepper: Stepper::Rk4,
            instability_study: false,
            serial: true,
            output_dir: PathBuf::from("out"),
            sample_every: 10,
            checkpoint_every: 0,
            residual_at_checkpoints: false,
            tolerances: Tolerances::default(),
            monitors: Monitors::default(),
            initial: Initial::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        if let Some(p) = cfg.initial.path.as_mut() {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(1..=2).contains(&self.d) {
            return bad(format!("d must be 1 or 2, got {}", self.d));
        }
        if self.n < 8 || !self.n.is_multiple_of(2) {
            return bad(format!("n must be even and at least 8, got {}", self.n));
        }
        if self.m < 8 {
            return bad(format!("m must be at least 8, got {}", self.m));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return bad("dt must be positive and t_end nonnegative".into());
        }
        if !(self.c0 > 0.0 && self.c0 < 1.0) {
            return bad(format!("c0 must lie in (0, 1), got {}", self.c0));
        }
        if self.s < 3 {
            return bad(format!("s must be at least 3, got {}", self.s));
        }
        if !(self.rho_minus > 0.0) {
            return bad("rho_minus must be positive".into());
        }
        match self.mode {
            Mode::OneFluid if self.rho_plus != 0.0 => bad("one_fluid mode requires rho_plus = 0".into()),
            Mode::TwoFluid if !(self.rho_plus > 0.0) => bad("two_fluid mode requires rho_plus > 0".into()),
            _ => Ok(()),
        }?;
        if self.initial.family == Family::File && self.initial.path.is_none() {
            return bad("initial.family = \"file\" needs initial.path".into());
        }
        if self.initial.family == Family::Broad && !(self.initial.breadth > 1.0) {
            return bad("initial.breadth must exceed 1".into());
        }
        Ok(())
    }

    pub fn rho(&self) -> [f64; 2] {
        [self.rho_plus, self.rho_minus]
    }

    pub fn interface_limit(&self) -> f64 {
        self.monitors.max_interface.unwrap_or(1.0 - self.c0)
    }
}
