use rayon::prelude::*;

use super::{AngularDistribution, DistributionKind};
use crate::error::{Error, Result};
use crate::geometry::AtomArray;
use crate::linalg::Vec3;
use crate::modes::ModeDecomposition;
use crate::quadrature::AngularGrid;
use crate::scalar::{pairwise_sum, Complex, Real};

pub const RADIAL_POINTS: usize = 2001;
/// Half-span of the radial grid in units of the largest `Γ_n/2`.
pub const RADIAL_HALF_SPAN: f64 = 40.0;

/// Uniform grid of photon detunings `ω_k − ω_L` in units of `Γ̄`, with
/// trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid<T> {
    pub detunings: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> RadialGrid<T> {
    pub fn new(half_span: T, points: usize) -> Result<Self> {
        if points < 2 || !(half_span > T::zero() && half_span.is_finite()) {
            return Err(Error::InvalidInput(
                "radial grid needs two points and a positive span".into(),
            ));
        }
        let step = half_span * T::lit(2.0) / T::from_count(points - 1);
        let detunings = (0..points)
            .map(|i| -half_span + step * T::from_count(i))
            .collect();
        let mut weights = vec![step; points];
        weights[0] = step * T::lit(0.5);
        weights[points - 1] = step * T::lit(0.5);
        Ok(Self { detunings, weights })
    }

    /// `±40 max(Γ_n)/2` with 2001 points, widened to cover every shift.
    pub fn for_modes(d: &ModeDecomposition<T>) -> Result<Self> {
        let values = d
            .eigenvalues
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("radial grid needs eigenvalues".into()))?;
        let max_half_rate = values.iter().fold(T::zero(), |m, v| m.max(v.re));
        let max_shift = values.iter().fold(T::zero(), |m, v| m.max(v.im.abs()));
        Self::new(
            T::lit(RADIAL_HALF_SPAN) * max_half_rate + max_shift,
            RADIAL_POINTS,
        )
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    pub fn integrate(&self, values: &[T]) -> T {
        let terms: Vec<T> = self
            .weights
            .iter()
            .zip(values)
            .map(|(&w, &v)| w * v)
            .collect();
        pairwise_sum(&terms)
    }
}

/// Photon state emitted by mode `n`.
///
/// `|φ_{n}(δ, u)|² ∝ |S_n(u)|² / ((Re J_n)² + (δ − Im J_n)²)` factorizes, so
/// the radial and angular marginals are stored separately, each normalized.
#[derive(Debug, Clone)]
pub struct PhotonMode<T> {
    pub mode: usize,
    pub eigenvalue: Complex<T>,
    pub radial: RadialGrid<T>,
    /// Radial marginal, integrating to one on `radial`.
    pub spectrum: Vec<T>,
    /// Angular marginal, integrating to one.
    pub angular: AngularDistribution<T>,
}

impl<T: Real> PhotonMode<T> {
    /// Probability density at radial point `i` and angular node `j`.
    pub fn density(&self, i: usize, j: usize) -> T {
        self.spectrum[i] * self.angular.values[j]
    }

    /// Half width at half maximum of the radial marginal, by linear
    /// interpolation of the half-maximum crossings.
    pub fn radial_half_width(&self) -> Option<T> {
        let s = &self.spectrum;
        let x = &self.radial.detunings;
        let (peak, &max) = s
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp_real(b.1))?;
        let half = max * T::lit(0.5);
        let cross = |i: usize, j: usize| x[i] + (half - s[i]) * (x[j] - x[i]) / (s[j] - s[i]);
        let right = (peak..s.len() - 1)
            .find(|&i| s[i + 1] < half)
            .map(|i| cross(i, i + 1))?;
        let left = (1..=peak)
            .rev()
            .find(|&i| s[i - 1] < half)
            .map(|i| cross(i - 1, i))?;
        Some((right - left) * T::lit(0.5))
    }
}

pub fn photon_mode<T: Real>(
    d: &ModeDecomposition<T>,
    n: usize,
    atoms: &AtomArray<T>,
    k_dir: Vec3<T>,
    grid: &AngularGrid<T>,
) -> Result<PhotonMode<T>> {
    if atoms.len() != d.len() {
        return Err(Error::InvalidInput(
            "atoms and modes must have the same size".into(),
        ));
    }
    let j = d
        .eigenvalue(n)
        .ok_or_else(|| Error::InvalidInput(format!("mode {n} not available")))?;
    let rate = j.re * T::lit(2.0);
    if !(rate > T::zero()) {
        return Err(Error::NonDecayingMode {
            mode: n,
            rate: rate.as_f64(),
        });
    }
    let k_dir = k_dir
        .normalized()
        .ok_or_else(|| Error::InvalidInput("laser direction must be a nonzero vector".into()))?;
    let radial = RadialGrid::for_modes(d)?;
    let column = d.m.column(n);
    let pos = atoms.positions();
    let angular_values: Vec<T> = grid
        .nodes()
        .par_iter()
        .map(|node| {
            let q = node.direction - k_dir;
            let s = pos
                .iter()
                .zip(&column)
                .fold(Complex::new(T::zero(), T::zero()), |acc, (r, &m)| {
                    acc + Complex::from_polar(T::one(), -q.dot(*r)) * m
                });
            s.norm_sqr()
        })
        .collect();
    let angular = AngularDistribution::new(grid.clone(), angular_values, DistributionKind::Exact);
    if !(angular.total > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "mode {n} has no angular weight on this grid"
        )));
    }
    let angular = angular.normalized();
    let raw: Vec<T> = radial
        .detunings
        .iter()
        .map(|&delta| {
            let off = delta - j.im;
            T::one() / (j.re * j.re + off * off)
        })
        .collect();
    let norm = radial.integrate(&raw);
    let spectrum = raw.into_iter().map(|v| v / norm).collect();
    Ok(PhotonMode {
        mode: n,
        eigenvalue: j,
        radial,
        spectrum,
        angular,
    })
}
