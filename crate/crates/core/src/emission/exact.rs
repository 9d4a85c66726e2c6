use log::warn;
use rayon::prelude::*;

use super::{AngularDistribution, DistributionKind};
use crate::error::{Error, Result};
use crate::geometry::AtomArray;
use crate::linalg::Vec3;
use crate::modes::{ModeDecomposition, SpinWave};
use crate::quadrature::AngularGrid;
use crate::scalar::{Complex, Real};

/// Modes decaying slower than this (units of `Γ̄`) are left out of the kernel.
pub const SUBRADIANT_RATE: f64 = 1e-8;
/// Largest mode amplitude that may be dropped together with such a mode.
const NEGLIGIBLE_AMPLITUDE: f64 = 1e-6;

/// Exact photon distribution emitted by the single-excitation state `ψ`.
///
/// With `c = M⁻¹ψ` and `a_n(u) = c_n Σ_l e^{-i(u−k̂)·r_l} M_ln`,
/// `I(u) = (1/4π) Σ_{n,n'} a_n* a_n' / (J_n* + J_n')`, which is the time
/// integral of `|Σ_l e^{-i(u−k̂)·r_l} (e^{-Jt}ψ)_l|²/4π`.
pub fn angular_distribution_exact<T: Real>(
    d: &ModeDecomposition<T>,
    atoms: &AtomArray<T>,
    k_dir: Vec3<T>,
    psi: &SpinWave<T>,
    grid: &AngularGrid<T>,
) -> Result<AngularDistribution<T>> {
    let n = d.len();
    if atoms.len() != n || psi.len() != n {
        return Err(Error::InvalidInput(
            "atoms, modes and spin wave must have the same size".into(),
        ));
    }
    let values = d
        .eigenvalues
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("exact emission needs eigenvalues".into()))?;
    let k_dir = k_dir
        .normalized()
        .ok_or_else(|| Error::InvalidInput("laser direction must be a nonzero vector".into()))?;
    let c = d.m_inv.matvec(&psi.coefficients);

    let mut kept = Vec::with_capacity(n);
    for (mode, (&j, &cn)) in values.iter().zip(&c).enumerate() {
        let rate = j.re * T::lit(2.0);
        if rate < T::lit(SUBRADIANT_RATE) {
            if cn.norm() > T::lit(NEGLIGIBLE_AMPLITUDE) {
                return Err(Error::SubradiantSingularity {
                    mode,
                    rate: rate.as_f64(),
                    amplitude: cn.norm().as_f64(),
                });
            }
            warn!(
                "mode {mode} with rate {:e} left out of the emission kernel",
                rate.as_f64()
            );
            continue;
        }
        kept.push(mode);
    }
    let kernel: Vec<Vec<Complex<T>>> = kept
        .iter()
        .map(|&a| {
            kept.iter()
                .map(|&b| Complex::new(T::one(), T::zero()) / (values[a].conj() + values[b]))
                .collect()
        })
        .collect();
    let m_kept: Vec<Vec<Complex<T>>> = (0..n)
        .map(|l| kept.iter().map(|&col| d.m[(l, col)]).collect())
        .collect();
    let c_kept: Vec<Complex<T>> = kept.iter().map(|&col| c[col]).collect();
    let pos = atoms.positions();
    let inv4pi = T::one() / (T::lit(4.0) * T::PI());
    let zero = Complex::new(T::zero(), T::zero());

    let intensity: Vec<T> = grid
        .nodes()
        .par_iter()
        .map(|node| {
            let q = node.direction - k_dir;
            let mut s = vec![zero; kept.len()];
            for (l, r) in pos.iter().enumerate() {
                let phase = Complex::from_polar(T::one(), -q.dot(*r));
                for (acc, &m) in s.iter_mut().zip(&m_kept[l]) {
                    *acc += phase * m;
                }
            }
            let a: Vec<Complex<T>> = s.iter().zip(&c_kept).map(|(&s, &c)| s * c).collect();
            let mut total = zero;
            for (row, &an) in kernel.iter().zip(&a) {
                let inner = row.iter().zip(&a).fold(zero, |acc, (&k, &b)| acc + k * b);
                total += an.conj() * inner;
            }
            total.re * inv4pi
        })
        .collect();
    Ok(AngularDistribution::new(
        grid.clone(),
        intensity,
        DistributionKind::Exact,
    ))
}
