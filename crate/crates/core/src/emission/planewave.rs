use log::warn;

use super::{AngularDistribution, DistributionKind};
use crate::error::{Error, Result};
use crate::geometry::LatticeSpec;
use crate::linalg::Vec3;
use crate::quadrature::AngularGrid;
use crate::scalar::{round_to_i64, Real};

/// `sin²(N x) / sin²(x)`, evaluated after reducing `x` modulo `π`.
pub(crate) fn lattice_factor<T: Real>(count: usize, x: T) -> T {
    let n = T::from_count(count);
    if count == 1 {
        return T::one();
    }
    let y = x - T::PI() * T::from_index(round_to_i64(x / T::PI()));
    if y.abs() < T::lit(1e-7) {
        let corr = (n * n - T::one()) * y * y / T::lit(3.0);
        return n * n * (T::one() - corr);
    }
    let r = (n * y).sin() / y.sin();
    r * r
}

/// Per-axis phase `x_α = (k_L d₀/2)(u − k̂ − K_n)·α̂`.
pub(crate) fn axis_phases<T: Real>(
    spec: &LatticeSpec<T>,
    u: Vec3<T>,
    k_dir: Vec3<T>,
    kn: Vec3<T>,
) -> [T; 3] {
    let q = u - k_dir - kn;
    let half = spec.spacing * T::lit(0.5);
    [
        half * q.dot(spec.axes[0]),
        half * q.dot(spec.axes[1]),
        half * q.dot(spec.axes[2]),
    ]
}

fn checked_direction<T: Real>(k_dir: Vec3<T>) -> Result<Vec3<T>> {
    k_dir
        .normalized()
        .ok_or_else(|| Error::InvalidInput("laser direction must be a nonzero vector".into()))
}

fn check_index<T: Real>(spec: &LatticeSpec<T>, n: [i64; 3]) -> Result<()> {
    spec.validate()?;
    for (a, &c) in spec.counts.iter().enumerate() {
        if !crate::geometry::lattice_index_range(c).contains(&n[a]) {
            return Err(Error::InvalidInput(format!(
                "mode index {n:?} outside the lattice range"
            )));
        }
    }
    Ok(())
}

/// Angular scale of the narrowest lattice peak, `2π / (k_L d₀ N_max)`.
fn peak_width<T: Real>(spec: &LatticeSpec<T>) -> T {
    T::TAU() / (spec.spacing * T::from_count(spec.max_count()))
}

/// Unnormalized plane-wave intensity
/// `(1/4π)(1/N) Π_α sin²(N_α x_α)/sin²(x_α)`; its integral is `Γ_n/Γ̄`.
pub fn planewave_intensity<T: Real>(
    spec: &LatticeSpec<T>,
    k_dir: Vec3<T>,
    n: [i64; 3],
    grid: &AngularGrid<T>,
) -> Result<AngularDistribution<T>> {
    check_index(spec, n)?;
    let k_dir = checked_direction(k_dir)?;
    let kn = crate::geometry::lattice_wavevector(spec, n);
    let pref = T::one() / (T::lit(4.0) * T::PI() * T::from_count(spec.num_atoms()));
    let values = grid.map(|node| {
        let x = axis_phases(spec, node.direction, k_dir, kn);
        (0..3).fold(pref, |acc, a| acc * lattice_factor(spec.counts[a], x[a]))
    });
    let mut dist = AngularDistribution::new(grid.clone(), values, DistributionKind::PlaneWave);
    dist.feature_width = Some(peak_width(spec));
    Ok(dist)
}

/// Same as [`planewave_intensity`] with every diffraction peak replaced by a
/// Gaussian of equal area, `√π N_α e^{-(x_α − mπ)² N_α²}`.
pub fn gaussian3d_intensity<T: Real>(
    spec: &LatticeSpec<T>,
    k_dir: Vec3<T>,
    n: [i64; 3],
    grid: &AngularGrid<T>,
) -> Result<AngularDistribution<T>> {
    check_index(spec, n)?;
    let k_dir = checked_direction(k_dir)?;
    let kn = crate::geometry::lattice_wavevector(spec, n);
    let pref = T::one() / (T::lit(4.0) * T::PI());
    let sqrt_pi = T::PI().sqrt();
    let values = grid.map(|node| {
        let x = axis_phases(spec, node.direction, k_dir, kn);
        (0..3).fold(pref, |acc, a| {
            let count = spec.counts[a];
            if count == 1 {
                return acc;
            }
            let nf = T::from_count(count);
            let m0 = round_to_i64(x[a] / T::PI());
            let peak_sum = (m0 - 1..=m0 + 1)
                .map(|m| {
                    let y = (x[a] - T::PI() * T::from_index(m)) * nf;
                    sqrt_pi * nf * (-y * y).exp()
                })
                .sum::<T>();
            acc * peak_sum
        })
    });
    let mut dist = AngularDistribution::new(grid.clone(), values, DistributionKind::Gaussian3d);
    dist.feature_width = Some(peak_width(spec));
    Ok(dist)
}

/// `Γ/Γ̄` as the solid-angle integral of an unnormalized plane-wave intensity.
pub fn rate_from_normalization<T: Real>(dist: &AngularDistribution<T>) -> T {
    if let Some(w) = dist.feature_width {
        if w < dist.grid.theta_spacing() * T::lit(5.0) {
            warn!(
                "peak width {:e} spans fewer than 5 polar nodes (spacing {:e})",
                w.as_f64(),
                dist.grid.theta_spacing().as_f64()
            );
        }
    }
    dist.total
}

/// Normalized plane-wave distribution together with the rate it implies.
#[derive(Debug, Clone)]
pub struct PlaneWaveEmission<T> {
    pub distribution: AngularDistribution<T>,
    pub rate: T,
}

pub fn angular_distribution_planewave<T: Real>(
    spec: &LatticeSpec<T>,
    k_dir: Vec3<T>,
    n: [i64; 3],
    grid: &AngularGrid<T>,
) -> Result<PlaneWaveEmission<T>> {
    let raw = planewave_intensity(spec, k_dir, n, grid)?;
    let rate = rate_from_normalization(&raw);
    if !(rate > T::zero()) {
        return Err(Error::InvalidInput(
            "plane-wave mode does not radiate on this grid".into(),
        ));
    }
    Ok(PlaneWaveEmission {
        distribution: raw.normalized(),
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn lattice_factor_limits() {
        assert_eq!(lattice_factor(1, 0.3_f64), 1.0);
        assert!((lattice_factor(7, 0.0_f64) - 49.0).abs() < 1e-12);
        assert!((lattice_factor(7, PI) - 49.0).abs() < 1e-9);
        assert!((lattice_factor(7, 3.0 * PI + 1e-9) - 49.0).abs() < 1e-6);
        let x = 0.37_f64;
        let direct = ((7.0 * x).sin() / x.sin()).powi(2);
        assert!((lattice_factor(7, x) - direct).abs() < 1e-12);
        assert!((lattice_factor(7, x + 2.0 * PI) - direct).abs() < 1e-9);
    }

    #[test]
    fn single_atom_rate_is_one() {
        let spec = LatticeSpec::chain(1, 1.0_f64);
        let grid = AngularGrid::new(8, 8).unwrap();
        let e = angular_distribution_planewave(&spec, Vec3::unit_z(), [0, 0, 0], &grid).unwrap();
        assert!((e.rate - 1.0).abs() < 1e-12);
        for v in &e.distribution.values {
            assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-12);
        }
    }

    #[test]
    fn chain_pattern_has_no_azimuthal_dependence() {
        let spec = LatticeSpec::chain(30, 2.0 * PI / 5.0);
        let grid = AngularGrid::new(40, 12).unwrap();
        let d = planewave_intensity(&spec, Vec3::unit_z(), [0, 0, 3], &grid).unwrap();
        for ring in 0..grid.n_theta() {
            let first = d.values[grid.index(ring, 0)];
            for k in 1..grid.n_phi() {
                assert_eq!(d.values[grid.index(ring, k)], first);
            }
        }
    }

    #[test]
    fn forward_chain_rate() {
        let spec = LatticeSpec::chain(100, 2.0 * PI / 5.0);
        let grid = AngularGrid::for_beam_width(Vec3::unit_z(), 0.05).unwrap();
        let e = angular_distribution_planewave(&spec, Vec3::unit_z(), [0, 0, 0], &grid).unwrap();
        assert!((e.rate - 1.25).abs() < 0.05 * 1.25, "{}", e.rate);
    }

    #[test]
    fn out_of_range_index() {
        let spec = LatticeSpec::chain(4, 1.0);
        let grid = AngularGrid::new(4, 4).unwrap();
        assert!(planewave_intensity(&spec, Vec3::unit_z(), [0, 0, 2], &grid).is_err());
        assert!(planewave_intensity(&spec, Vec3::unit_z(), [1, 0, 0], &grid).is_err());
    }
}
