//! Collective spontaneous emission from low-excitation atomic arrays and vapors.
//!
//! Lengths are dimensionless (multiplied by the laser wavenumber `k_L`) and
//! rates are in units of the single-atom rate `Γ̄`. Every numerical routine is
//! generic over the scalar type through [`Real`]; the `*64` aliases at the
//! crate root fix it to `f64`.

pub mod coupling;
pub mod csv;
pub mod eigen;
pub mod emission;
pub mod ensemble;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod modes;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use linalg::{CMatrix, Vec3};
pub use scalar::{Complex, Real};

pub type Complex64 = Complex<f64>;
pub type Vec3f64 = Vec3<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type AtomArray64 = geometry::AtomArray<f64>;
pub type LatticeSpec64 = geometry::LatticeSpec<f64>;
pub type CouplingMatrix64 = coupling::CouplingMatrix<f64>;
pub type ModeDecomposition64 = modes::ModeDecomposition<f64>;
pub type AngularGrid64 = quadrature::AngularGrid<f64>;
pub type AngularDistribution64 = emission::AngularDistribution<f64>;
pub type MixedPhotonState64 = ensemble::MixedPhotonState<f64>;
