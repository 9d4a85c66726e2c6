use super::{AtomArray, Source};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Largest lattice `build_lattice` will materialize.
pub const DEFAULT_MAX_ATOMS: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimensionality {
    One,
    Three,
}

/// Square lattice description. `spacing` is the dimensionless `k_L d₀`.
///
/// Axis `α` carries `counts[α]` sites along the unit vector `axes[α]`. A chain
/// keeps its sites on the third axis, which defaults to `ẑ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec<T> {
    pub dims: Dimensionality,
    pub counts: [usize; 3],
    pub spacing: T,
    pub axes: [Vec3<T>; 3],
}

impl<T: Real> LatticeSpec<T> {
    /// Chain of `n` sites along `ẑ`.
    pub fn chain(n: usize, spacing: T) -> Self {
        Self {
            dims: Dimensionality::One,
            counts: [1, 1, n],
            spacing,
            axes: default_axes(),
        }
    }

    /// Cube with `n` sites per axis.
    pub fn cubic(n: usize, spacing: T) -> Self {
        Self {
            dims: Dimensionality::Three,
            counts: [n, n, n],
            spacing,
            axes: default_axes(),
        }
    }

    /// Spacing from the ratio `λ/d₀`, using `k_L d₀ = 2π d₀/λ`.
    pub fn spacing_from_wavelength_ratio(lambda_over_d: T) -> T {
        T::TAU() / lambda_over_d
    }

    pub fn num_atoms(&self) -> usize {
        self.counts.iter().product()
    }

    /// Checked product of the counts.
    pub fn checked_num_atoms(&self) -> Option<usize> {
        self.counts
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
    }

    /// `λ/d₀ = 2π / (k_L d₀)`.
    pub fn wavelength_ratio(&self) -> T {
        T::TAU() / self.spacing
    }

    /// Largest count over the axes.
    pub fn max_count(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.counts.contains(&0) {
            return Err(Error::InvalidInput(
                "every lattice axis needs at least one site".into(),
            ));
        }
        if !(self.spacing > T::zero() && self.spacing.is_finite()) {
            return Err(Error::InvalidInput(
                "lattice spacing must be positive and finite".into(),
            ));
        }
        if self.dims == Dimensionality::One && (self.counts[0] > 1 || self.counts[1] > 1) {
            return Err(Error::InvalidInput(
                "a chain may only extend along its third axis".into(),
            ));
        }
        let tol = T::lit(1e-9);
        for (a, axis) in self.axes.iter().enumerate() {
            if (axis.norm() - T::one()).abs() > tol {
                return Err(Error::InvalidInput(format!(
                    "lattice axis {a} is not a unit vector"
                )));
            }
            for other in &self.axes[a + 1..] {
                if axis.dot(*other).abs() > tol {
                    return Err(Error::InvalidInput(
                        "lattice axes must be orthogonal".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Position of site `(i₀, i₁, i₂)`, centered on the origin.
    pub fn site(&self, idx: [usize; 3]) -> Vec3<T> {
        let half = T::lit(0.5);
        (0..3).fold(Vec3::zero(), |acc, a| {
            let offset = T::from_count(idx[a]) - T::from_count(self.counts[a] - 1) * half;
            acc + self.axes[a] * (offset * self.spacing)
        })
    }
}

fn default_axes<T: Real>() -> [Vec3<T>; 3] {
    [Vec3::unit_x(), Vec3::unit_y(), Vec3::unit_z()]
}

/// Iterates multi-indices in row-major order (last axis fastest).
pub(crate) fn multi_indices(counts: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
    (0..counts[0])
        .flat_map(move |a| (0..counts[1]).flat_map(move |b| (0..counts[2]).map(move |c| [a, b, c])))
}

pub fn build_lattice<T: Real>(spec: &LatticeSpec<T>) -> Result<AtomArray<T>> {
    build_lattice_with_limit(spec, DEFAULT_MAX_ATOMS)
}

pub fn build_lattice_with_limit<T: Real>(
    spec: &LatticeSpec<T>,
    max_atoms: usize,
) -> Result<AtomArray<T>> {
    spec.validate()?;
    let n = spec.checked_num_atoms().unwrap_or(usize::MAX);
    if n > max_atoms {
        return Err(Error::TooManyAtoms {
            requested: n,
            limit: max_atoms,
        });
    }
    let positions = multi_indices(spec.counts)
        .map(|idx| spec.site(idx))
        .collect();
    Ok(AtomArray::new(positions, Source::Lattice)?.with_lattice(*spec))
}

/// Periodic-boundary wavevectors of a lattice, in units of `k_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct WavevectorGrid<T> {
    pub indices: Vec<[i64; 3]>,
    pub vectors: Vec<Vec3<T>>,
}

impl<T: Real> WavevectorGrid<T> {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn position_of(&self, n: [i64; 3]) -> Option<usize> {
        self.indices.iter().position(|&m| m == n)
    }

    /// Compact text label: the chain index for chains, `a:b:c` otherwise.
    pub fn label(&self, i: usize, dims: Dimensionality) -> String {
        let n = self.indices[i];
        match dims {
            Dimensionality::One => n[2].to_string(),
            Dimensionality::Three => format!("{}:{}:{}", n[0], n[1], n[2]),
        }
    }
}

/// Index range along one axis: `-N/2 ..= N/2-1` for even `N`, symmetric for odd.
pub fn index_range(count: usize) -> std::ops::RangeInclusive<i64> {
    let n = count as i64;
    if n % 2 == 0 {
        -n / 2..=n / 2 - 1
    } else {
        -(n - 1) / 2..=(n - 1) / 2
    }
}

/// `K_n = (2π/d₀) Σ_α (n_α/N_α) α̂`.
pub fn wavevector<T: Real>(spec: &LatticeSpec<T>, n: [i64; 3]) -> Vec3<T> {
    let scale = T::TAU() / spec.spacing;
    (0..3).fold(Vec3::zero(), |acc, a| {
        acc + spec.axes[a] * (scale * T::from_index(n[a]) / T::from_count(spec.counts[a]))
    })
}

pub fn wavevector_grid<T: Real>(spec: &LatticeSpec<T>) -> Result<WavevectorGrid<T>> {
    spec.validate()?;
    let ranges: Vec<Vec<i64>> = spec
        .counts
        .iter()
        .map(|&c| index_range(c).collect())
        .collect();
    let mut indices = Vec::with_capacity(spec.num_atoms());
    for &a in &ranges[0] {
        for &b in &ranges[1] {
            for &c in &ranges[2] {
                indices.push([a, b, c]);
            }
        }
    }
    let vectors = indices.iter().map(|&n| wavevector(spec, n)).collect();
    Ok(WavevectorGrid { indices, vectors })
}
