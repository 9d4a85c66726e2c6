//! Coefficient matrix `J` of the collective master equation and the physical
//! single-atom rate.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::AtomArray;
use crate::linalg::{CMatrix, Vec3};
use crate::scalar::{sinc, Complex, Real};

/// Pairs closer than this (in units of `1/k_L`) are rejected.
pub const MIN_PAIR_DISTANCE: f64 = 1e-9;

pub const VACUUM_PERMITTIVITY: f64 = 8.8541878128e-12;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const REDUCED_PLANCK: f64 = 1.054571817e-34;

/// Laser and transition parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Rabi frequency `Ω_L` (rad/s).
    pub rabi: f64,
    /// Detuning `Δ` (rad/s).
    pub detuning: f64,
    /// Laser angular frequency `ω_L` (rad/s).
    pub omega_l: f64,
    /// Dipole matrix element `d` (C·m).
    pub dipole: f64,
    pub k_dir: Vec3<f64>,
}

/// Single-atom decay rate `Γ̄` in s⁻¹:
/// `(1/3π) (Ω_L/2Δ)² ω_L³ d² / (ε₀ ħ c³)`.
pub fn gamma_bar(p: &PhysicalParams) -> Result<f64> {
    if p.detuning == 0.0 {
        return Err(Error::InvalidInput(
            "far-detuned rate requires a nonzero detuning".into(),
        ));
    }
    if !(p.omega_l > 0.0) {
        return Err(Error::InvalidInput(
            "laser frequency must be positive".into(),
        ));
    }
    let values = [p.rabi, p.detuning, p.omega_l, p.dipole];
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(
            "physical parameters must be finite".into(),
        ));
    }
    let laser = (p.rabi / (2.0 * p.detuning)).powi(2);
    Ok(laser * p.omega_l.powi(3) * p.dipole.powi(2)
        / (3.0
            * std::f64::consts::PI
            * VACUUM_PERMITTIVITY
            * REDUCED_PLANCK
            * SPEED_OF_LIGHT.powi(3)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance<T> {
    Fixed { k_dir: Vec3<T> },
    Ensemble { kl_l: T },
}

/// `J_ij` in units of `Γ̄`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix<T> {
    pub entries: CMatrix<T>,
    pub provenance: Provenance<T>,
}

impl<T: Real> CouplingMatrix<T> {
    pub fn len(&self) -> usize {
        self.entries.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.rows() == 0
    }

    /// Writes `i,j,re,im` rows in row-major order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "i,j,re,im")?;
        let n = self.len();
        for i in 0..n {
            for j in 0..n {
                let z = self.entries[(i, j)];
                writeln!(out, "{i},{j},{:.16e},{:.16e}", z.re.as_f64(), z.im.as_f64())?;
            }
        }
        Ok(())
    }
}

/// Off-diagonal coupling for separation `r = r_i − r_j`.
#[inline]
pub(crate) fn pair_coupling<T: Real>(r: Vec3<T>, k_dir: Vec3<T>) -> Complex<T> {
    let x = r.norm();
    let half = T::lit(0.5);
    let kernel = Complex::new(sinc(x), -x.cos() / x);
    Complex::from_polar(half, -k_dir.dot(r)) * kernel
}

pub fn coupling_fixed<T: Real>(atoms: &AtomArray<T>, k_dir: Vec3<T>) -> Result<CouplingMatrix<T>> {
    let k_dir = k_dir
        .normalized()
        .ok_or_else(|| Error::InvalidInput("laser direction must be a nonzero vector".into()))?;
    if let Some((i, j, d)) = atoms.min_pair_distance() {
        if d < T::lit(MIN_PAIR_DISTANCE) {
            return Err(Error::CoincidentAtoms {
                i,
                j,
                distance: d.as_f64(),
            });
        }
    }
    let n = atoms.len();
    let pos = atoms.positions();
    let half = Complex::new(T::lit(0.5), T::zero());
    let rows: Vec<Vec<Complex<T>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        half
                    } else {
                        pair_coupling(pos[i] - pos[j], k_dir)
                    }
                })
                .collect()
        })
        .collect();
    let entries = CMatrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(CouplingMatrix {
        entries,
        provenance: Provenance::Fixed { k_dir },
    })
}

/// Off-diagonal coupling of the motion-averaged ensemble, `1/(4 (k_L L)²)`.
pub fn ensemble_off_diagonal<T: Real>(kl_l: T) -> T {
    T::one() / (T::lit(4.0) * kl_l * kl_l)
}

pub fn coupling_ensemble<T: Real>(n: usize, kl_l: T) -> Result<CouplingMatrix<T>> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "an ensemble needs at least one atom".into(),
        ));
    }
    if !(kl_l > T::zero() && kl_l.is_finite()) {
        return Err(Error::InvalidInput(
            "k_L L must be positive and finite".into(),
        ));
    }
    let beta = Complex::new(ensemble_off_diagonal(kl_l), T::zero());
    let half = Complex::new(T::lit(0.5), T::zero());
    let entries = CMatrix::from_fn(n, n, |i, j| if i == j { half } else { beta });
    Ok(CouplingMatrix {
        entries,
        provenance: Provenance::Ensemble { kl_l },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AtomArray, Source};
    use std::f64::consts::PI;

    fn pair(sep: Vec3<f64>) -> AtomArray<f64> {
        AtomArray::new(vec![Vec3::zero(), sep], Source::File).unwrap()
    }

    fn rb_d2() -> PhysicalParams {
        // reduced matrix element 3.584e-29 C·m weighted by (2J+1)/(2J'+1) = 1/2
        let dipole = 3.584e-29 / std::f64::consts::SQRT_2;
        PhysicalParams {
            rabi: 2.0,
            detuning: 1.0,
            omega_l: 2.0 * PI * 384.23e12,
            dipole,
            k_dir: Vec3::unit_z(),
        }
    }

    #[test]
    fn gamma_bar_scalings() {
        let p = rb_d2();
        let g = gamma_bar(&p).unwrap();
        // bare D2 line width of rubidium when the laser factor is one
        assert!((g / 3.81e7 - 1.0).abs() < 0.01, "{g}");
        let rel = |q: PhysicalParams| gamma_bar(&q).unwrap() / g;
        assert!((rel(PhysicalParams { rabi: 4.0, ..p }) - 4.0).abs() < 1e-12);
        assert!((rel(PhysicalParams { detuning: 2.0, ..p }) - 0.25).abs() < 1e-12);
        assert!(
            (rel(PhysicalParams {
                omega_l: 2.0 * p.omega_l,
                ..p
            }) - 8.0)
                .abs()
                < 1e-12
        );
        assert!(gamma_bar(&PhysicalParams { detuning: 0.0, ..p }).is_err());
    }

    #[test]
    fn single_atom() {
        let atoms = AtomArray::new(vec![Vec3::zero()], Source::File).unwrap();
        let j = coupling_fixed(&atoms, Vec3::unit_z()).unwrap();
        assert_eq!(j.entries[(0, 0)], Complex::new(0.5, 0.0));
    }

    #[test]
    fn perpendicular_pairs() {
        let j = coupling_fixed(&pair(Vec3::new(PI, 0.0, 0.0)), Vec3::unit_z()).unwrap();
        assert!((j.entries[(0, 1)] - Complex::new(0.0, 1.0 / (2.0 * PI))).norm() < 1e-16);
        let j = coupling_fixed(&pair(Vec3::new(0.0, PI / 2.0, 0.0)), Vec3::unit_z()).unwrap();
        assert!((j.entries[(0, 1)] - Complex::new(1.0 / PI, 0.0)).norm() < 1e-16);
    }

    #[test]
    fn coincident_atoms_are_rejected() {
        let err = coupling_fixed(&pair(Vec3::new(0.0, 0.0, 1e-12)), Vec3::unit_z()).unwrap_err();
        assert!(matches!(err, Error::CoincidentAtoms { i: 0, j: 1, .. }));
    }

    #[test]
    fn ensemble_matrix() {
        let j = coupling_ensemble(2, 10.0_f64).unwrap();
        assert!((j.entries[(0, 1)].re - 2.5e-3).abs() < 1e-18);
        assert_eq!(j.entries[(0, 1)].im, 0.0);
        assert_eq!(
            coupling_ensemble(1, 3.0).unwrap().entries[(0, 0)],
            Complex::new(0.5, 0.0)
        );
        assert!(ensemble_off_diagonal(1e8_f64) < 1e-16);
    }

    #[test]
    fn csv_dump() {
        let j = coupling_ensemble(2, 10.0).unwrap();
        let mut buf = Vec::new();
        j.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,j,re,im");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("0,1,2.5"));
    }
}
