//! Run configuration. Every table rejects unknown keys.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Rates,
    Angular,
    Bragg,
    Predict1d,
    Predict3d,
    Ensemble,
    Sweep,
    Validate,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Rates => "rates",
            Experiment::Angular => "angular",
            Experiment::Bragg => "bragg",
            Experiment::Predict1d => "predict1d",
            Experiment::Predict3d => "predict3d",
            Experiment::Ensemble => "ensemble",
            Experiment::Sweep => "sweep",
            Experiment::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub geometry: Option<Geometry>,
    pub physics: Option<Physics>,
    pub grid: Option<GridBlock>,
    pub ensemble: Option<EnsembleBlock>,
    pub sweep: Option<SweepBlock>,
    pub compare: Option<Tolerance>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Geometry {
    Chain {
        n: usize,
    },
    Cubic {
        n: usize,
    },
    /// Trapped-ion crystal rescaled to mean spacing `d₀`.
    IonChain {
        n: usize,
    },
    /// Frozen Gaussian cloud drawn with the run seed.
    Cloud {
        n: usize,
        kl_l: f64,
    },
    /// Whitespace-separated `k_L x, k_L y, k_L z`, one atom per line. Relative
    /// paths are taken from the config file's directory.
    Positions {
        path: PathBuf,
    },
}

impl Geometry {
    pub fn is_lattice(&self) -> bool {
        matches!(self, Geometry::Chain { .. } | Geometry::Cubic { .. })
    }

    pub fn needs_spacing(&self) -> bool {
        matches!(
            self,
            Geometry::Chain { .. } | Geometry::Cubic { .. } | Geometry::IonChain { .. }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ModeIndex {
    Chain(i64),
    Lattice([i64; 3]),
}

impl ModeIndex {
    pub fn as_array(self) -> [i64; 3] {
        match self {
            ModeIndex::Chain(n) => [0, 0, n],
            ModeIndex::Lattice(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub lambda_over_d: Option<f64>,
    #[serde(default = "default_k_dir")]
    pub k_dir: [f64; 3],
    /// Plane-wave mode index; the uniform spin wave when absent.
    pub mode: Option<ModeIndex>,
    /// Single-atom rate in s⁻¹.
    pub gamma_bar: Option<f64>,
    /// Sample size in meters.
    pub length: Option<f64>,
    /// Laser angular frequency in rad/s.
    pub omega_l: Option<f64>,
}

fn default_k_dir() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub n_theta: usize,
    pub n_phi: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleBlock {
    pub n: Option<usize>,
    pub kl_l: f64,
    /// Alternative to `n`: the atom number is chosen to give this `χ_en`.
    pub chi_en: Option<f64>,
    pub photons: Option<usize>,
    /// Monte-Carlo samples of frozen clouds; none when absent.
    pub samples: Option<usize>,
}

impl EnsembleBlock {
    pub fn atom_count(&self) -> Result<usize, CliError> {
        match (self.n, self.chi_en) {
            (Some(n), None) => Ok(n),
            (None, Some(chi)) if chi >= 0.0 && chi.is_finite() => {
                Ok((2.0 * chi * self.kl_l * self.kl_l).round() as usize + 1)
            }
            (None, Some(_)) => Err(CliError::Config(
                "ensemble.chi_en must be finite and nonnegative".into(),
            )),
            _ => Err(CliError::Config(
                "ensemble needs exactly one of n and chi_en".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    LambdaOverD,
    N,
    KlL,
    ChiEn,
}

impl Parameter {
    pub fn as_str(self) -> &'static str {
        match self {
            Parameter::LambdaOverD => "lambda_over_d",
            Parameter::N => "n",
            Parameter::KlL => "kl_l",
            Parameter::ChiEn => "chi_en",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `Γ₀/Γ̄` of the uniform state.
    Rate0,
    /// Forward Bragg probability `p₀^[0]`.
    P0,
    Escape,
    Purity,
    Fwhm,
    Epsilon,
    Chi,
}

impl Observable {
    pub fn as_str(self) -> &'static str {
        match self {
            Observable::Rate0 => "rate0",
            Observable::P0 => "p0",
            Observable::Escape => "escape",
            Observable::Purity => "purity",
            Observable::Fwhm => "fwhm",
            Observable::Epsilon => "epsilon",
            Observable::Chi => "chi",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: Parameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub observables: Vec<Observable>,
    pub axes: Vec<Axis>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    #[serde(default = "default_abs")]
    pub abs: f64,
    #[serde(default = "default_rel")]
    pub rel: f64,
}

fn default_abs() -> f64 {
    1e-12
}

fn default_rel() -> f64 {
    1e-9
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: default_abs(),
            rel: default_rel(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::Config("config is not UTF-8".into()))?;
        let mut cfg = Self::parse(text)?;
        if let Some(Geometry::Positions { path: p }) = &mut cfg.geometry {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok((cfg, bytes))
    }

    fn require<'a, T>(&self, block: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
        block.as_ref().ok_or_else(|| {
            CliError::Config(format!(
                "experiment {} needs a [{name}] block",
                self.experiment.as_str()
            ))
        })
    }

    pub fn geometry(&self) -> Result<&Geometry, CliError> {
        self.require(&self.geometry, "geometry")
    }

    pub fn ensemble(&self) -> Result<&EnsembleBlock, CliError> {
        self.require(&self.ensemble, "ensemble")
    }

    pub fn physics(&self) -> Option<&Physics> {
        self.physics.as_ref()
    }

    pub fn lambda_over_d(&self) -> Result<f64, CliError> {
        self.physics
            .as_ref()
            .and_then(|p| p.lambda_over_d)
            .ok_or_else(|| CliError::Config("this geometry needs physics.lambda_over_d".into()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        use Experiment::*;
        match self.experiment {
            Rates | Angular | Validate => {
                let g = self.geometry()?;
                if g.needs_spacing() {
                    self.lambda_over_d()?;
                }
            }
            Bragg | Predict1d | Predict3d => {
                let g = self.geometry()?;
                let ok = match (self.experiment, g) {
                    (Predict1d, Geometry::Chain { .. }) | (Predict3d, Geometry::Cubic { .. }) => {
                        true
                    }
                    (Bragg, g) => g.is_lattice(),
                    _ => false,
                };
                if !ok {
                    return Err(CliError::Config(format!(
                        "experiment {} does not apply to this geometry",
                        self.experiment.as_str()
                    )));
                }
                self.lambda_over_d()?;
            }
            Ensemble => {
                self.ensemble()?.atom_count()?;
            }
            Sweep => self.validate_sweep()?,
        }
        if self.experiment == Validate {
            let p = self
                .physics()
                .ok_or_else(|| CliError::Config("validate needs a [physics] block".into()))?;
            if p.gamma_bar.is_none() || p.length.is_none() {
                return Err(CliError::Config(
                    "validate needs physics.gamma_bar and physics.length".into(),
                ));
            }
        }
        if let Some(g) = &self.grid {
            if g.n_theta == 0 || g.n_phi == 0 {
                return Err(CliError::Config("grid resolutions must be positive".into()));
            }
        }
        if let Some(t) = &self.compare {
            if !(t.abs >= 0.0 && t.rel >= 0.0) {
                return Err(CliError::Config(
                    "compare tolerances must be nonnegative".into(),
                ));
            }
        }
        Ok(())
    }

    fn validate_sweep(&self) -> Result<(), CliError> {
        let sweep = self.require(&self.sweep, "sweep")?;
        if sweep.axes.is_empty() || sweep.axes.len() > 2 {
            return Err(CliError::Config("a sweep takes one or two axes".into()));
        }
        if sweep.observables.is_empty() {
            return Err(CliError::Config(
                "a sweep needs at least one observable".into(),
            ));
        }
        for (i, a) in sweep.axes.iter().enumerate() {
            if a.values.is_empty() {
                return Err(CliError::Config(format!(
                    "sweep axis {} has an empty range",
                    a.name.as_str()
                )));
            }
            if a.values.iter().any(|v| !v.is_finite()) {
                return Err(CliError::Config(format!(
                    "sweep axis {} has a non-finite value",
                    a.name.as_str()
                )));
            }
            if sweep.axes[..i].iter().any(|b| b.name == a.name) {
                return Err(CliError::Config(format!(
                    "sweep axis {} appears twice",
                    a.name.as_str()
                )));
            }
        }
        let lattice_domain = self.geometry.is_some();
        if lattice_domain == self.ensemble.is_some() {
            return Err(CliError::Config(
                "a sweep needs exactly one of [geometry] and [ensemble]".into(),
            ));
        }
        for a in &sweep.axes {
            let ok = match a.name {
                Parameter::LambdaOverD => lattice_domain,
                Parameter::N => true,
                Parameter::KlL => {
                    !lattice_domain || matches!(self.geometry, Some(Geometry::Cloud { .. }))
                }
                Parameter::ChiEn => !lattice_domain,
            };
            if !ok {
                return Err(CliError::Config(format!(
                    "sweep axis {} does not apply to this geometry",
                    a.name.as_str()
                )));
            }
            if a.name == Parameter::N && a.values.iter().any(|v| v.fract() != 0.0 || *v < 1.0) {
                return Err(CliError::Config(
                    "sweep axis n takes positive integers".into(),
                ));
            }
        }
        if lattice_domain {
            let g = self.geometry()?;
            let swept_ratio = sweep.axes.iter().any(|a| a.name == Parameter::LambdaOverD);
            if g.needs_spacing() && !swept_ratio {
                self.lambda_over_d()?;
            }
            for o in &sweep.observables {
                let ok = match o {
                    Observable::Rate0 | Observable::Fwhm => true,
                    Observable::P0 | Observable::Escape | Observable::Chi => g.is_lattice(),
                    Observable::Purity | Observable::Epsilon => false,
                };
                if !ok {
                    return Err(CliError::Config(format!(
                        "observable {} does not apply to this geometry",
                        o.as_str()
                    )));
                }
            }
        } else {
            let e = self.ensemble()?;
            let swept_chi = sweep.axes.iter().any(|a| a.name == Parameter::ChiEn);
            let swept_n = sweep.axes.iter().any(|a| a.name == Parameter::N);
            if swept_chi && swept_n {
                return Err(CliError::Config("n and chi_en cannot both be swept".into()));
            }
            if !swept_chi && !swept_n {
                e.atom_count()?;
            }
            if let Some(o) = sweep
                .observables
                .iter()
                .find(|o| matches!(o, Observable::P0))
            {
                return Err(CliError::Config(format!(
                    "observable {} needs a lattice",
                    o.as_str()
                )));
            }
        }
        Ok(())
    }
}
