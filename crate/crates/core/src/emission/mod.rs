//! Angular photon distributions and everything derived from them: collective
//! rates by normalization, Bragg decompositions, closed-form predictors,
//! photon-mode amplitudes, beam widths and the propagation check.

mod bragg;
mod exact;
mod photon_mode;
mod planewave;
mod predict;
mod validity;
mod width;

pub use bragg::{
    bragg_decompose, bragg_decompose_on, default_grid as lattice_grid, write_bragg_csv,
    BraggDecomposition, BraggPeak, PeakDirection,
};
pub use exact::{angular_distribution_exact, SUBRADIANT_RATE};
pub use photon_mode::{photon_mode, PhotonMode, RadialGrid};
pub use planewave::{
    angular_distribution_planewave, gaussian3d_intensity, planewave_intensity,
    rate_from_normalization, PlaneWaveEmission,
};
pub use predict::{predict_1d, predict_3d, Prediction1D, Prediction3D};
pub use validity::{propagation_validity, ValidityReport, VALIDITY_THRESHOLD};
pub use width::beam_width;

use std::io::Write;

use crate::error::Result;
use crate::quadrature::AngularGrid;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    Exact,
    PlaneWave,
    Gaussian3d,
    EnsembleCoherent,
    EnsembleIncoherent,
}

impl DistributionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistributionKind::Exact => "exact",
            DistributionKind::PlaneWave => "planewave",
            DistributionKind::Gaussian3d => "gaussian3d",
            DistributionKind::EnsembleCoherent => "ensemble-coh",
            DistributionKind::EnsembleIncoherent => "ensemble-inc",
        }
    }
}

/// Photons per steradian sampled on a quadrature grid.
#[derive(Debug, Clone)]
pub struct AngularDistribution<T> {
    pub grid: AngularGrid<T>,
    pub values: Vec<T>,
    /// `∫ I dΩ` on the grid.
    pub total: T,
    pub kind: DistributionKind,
    /// Narrowest expected angular feature, when known; used for resolution
    /// warnings.
    pub feature_width: Option<T>,
}

impl<T: Real> AngularDistribution<T> {
    pub fn new(grid: AngularGrid<T>, values: Vec<T>, kind: DistributionKind) -> Self {
        let total = grid.integrate(&values);
        Self {
            grid,
            values,
            total,
            kind,
            feature_width: None,
        }
    }

    /// Copy rescaled to unit total.
    pub fn normalized(&self) -> Self {
        let s = T::one() / self.total;
        Self {
            values: self.values.iter().map(|&v| v * s).collect(),
            total: T::one(),
            ..self.clone()
        }
    }

    /// Probability carried by directions within `angle` of `axis`.
    pub fn fraction_within(&self, axis: crate::linalg::Vec3<T>, angle: T) -> T {
        let terms: Vec<T> = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(n, &v)| {
                if n.direction.angle_to(axis) < angle {
                    n.weight * v
                } else {
                    T::zero()
                }
            })
            .collect();
        crate::scalar::pairwise_sum(&terms) / self.total
    }

    /// Writes `theta,phi,weight,intensity` rows in node order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "theta,phi,weight,intensity")?;
        for (n, v) in self.grid.nodes().iter().zip(&self.values) {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                n.theta.as_f64(),
                n.phi.as_f64(),
                n.weight.as_f64(),
                v.as_f64()
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec3;

    #[test]
    fn fraction_and_normalization() {
        let grid = AngularGrid::<f64>::new(32, 8).unwrap();
        let values = grid.map(|n| if n.direction.z > 0.0 { 3.0 } else { 1.0 });
        let d = AngularDistribution::new(grid, values, DistributionKind::Exact);
        let f = d.fraction_within(Vec3::unit_z(), std::f64::consts::FRAC_PI_2);
        assert!((f - 0.75).abs() < 1e-12);
        assert!((d.normalized().total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_header() {
        let grid = AngularGrid::<f64>::new(2, 2).unwrap();
        let d = AngularDistribution::new(grid, vec![1.0; 4], DistributionKind::Exact);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("theta,phi,weight,intensity"));
        assert_eq!(text.lines().count(), 5);
    }
}
