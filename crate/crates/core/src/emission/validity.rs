use crate::coupling::SPEED_OF_LIGHT;
use crate::error::{Error, Result};
use crate::modes::ModeDecomposition;
use crate::scalar::Real;

/// Largest allowed ratio of light-crossing time to emission time, and of
/// collective shift to laser frequency.
pub const VALIDITY_THRESHOLD: f64 = 1e-2;

/// Whether photons leave the sample before the atoms have decayed.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    /// `ρ_n = Γ_n L / c` for every mode.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
    /// `max |Δ_n| / ω_L` when the laser frequency is known.
    pub shift_ratio: Option<f64>,
    pub valid: bool,
}

/// `gamma_bar` in s⁻¹, `length` in meters, `omega_l` in rad/s.
pub fn propagation_validity<T: Real>(
    d: &ModeDecomposition<T>,
    gamma_bar: f64,
    length: f64,
    omega_l: Option<f64>,
) -> Result<ValidityReport> {
    if !(gamma_bar > 0.0 && gamma_bar.is_finite()) || !(length > 0.0 && length.is_finite()) {
        return Err(Error::InvalidInput(
            "Γ̄ and L must be positive and finite".into(),
        ));
    }
    if omega_l.is_some_and(|w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidInput(
            "laser frequency must be positive and finite".into(),
        ));
    }
    let values = d
        .eigenvalues
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("validity check needs eigenvalues".into()))?;
    let ratios: Vec<f64> = values
        .iter()
        .map(|j| 2.0 * j.re.as_f64() * gamma_bar * length / SPEED_OF_LIGHT)
        .collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let shift_ratio = omega_l.map(|w| {
        values
            .iter()
            .map(|j| j.im.as_f64().abs() * gamma_bar / w)
            .fold(0.0, f64::max)
    });
    let valid =
        max_ratio <= VALIDITY_THRESHOLD && shift_ratio.is_none_or(|s| s <= VALIDITY_THRESHOLD);
    Ok(ValidityReport {
        ratios,
        max_ratio,
        shift_ratio,
        valid,
    })
}
