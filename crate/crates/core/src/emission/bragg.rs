use std::collections::BTreeMap;
use std::io::Write;

use log::warn;
use rayon::prelude::*;

use super::planewave::{axis_phases, lattice_factor};
use crate::error::{Error, Result};
use crate::geometry::{lattice_index_range, lattice_wavevector, Dimensionality, LatticeSpec};
use crate::linalg::Vec3;
use crate::quadrature::AngularGrid;
use crate::scalar::{pairwise_sum, round_to_i64, sinc, Real};

/// Where the photons of a diffraction order go.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PeakDirection<T> {
    /// Single beam along a unit vector.
    Beam(Vec3<T>),
    /// Cone of half-angle `theta` about `axis` (chains).
    Cone { axis: Vec3<T>, theta: T },
}

impl<T: Real> PeakDirection<T> {
    /// A representative unit vector of the peak.
    pub fn representative(&self) -> Vec3<T> {
        match *self {
            PeakDirection::Beam(u) => u,
            PeakDirection::Cone { axis, theta } => {
                let (e1, _) = axis.orthonormal_frame();
                axis * theta.cos() + e1 * theta.sin()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BraggPeak<T> {
    pub m: [i64; 3],
    /// Energy-momentum conservation can be met by this order.
    pub exists: bool,
    pub direction: Option<PeakDirection<T>>,
    /// Share of the emitted photon found in this order.
    pub probability: T,
}

/// Diffraction orders of a plane-wave mode.
#[derive(Debug, Clone, PartialEq)]
pub struct BraggDecomposition<T> {
    /// Sorted by `m`.
    pub peaks: Vec<BraggPeak<T>>,
    /// `Γ_n/Γ̄` from the full lattice sum on the same grid.
    pub rate: T,
    /// Summed peak terms over the lattice-sum rate; one when the peaks are
    /// well separated.
    pub coverage: T,
}

impl<T: Real> BraggDecomposition<T> {
    pub fn peak(&self, m: [i64; 3]) -> Option<&BraggPeak<T>> {
        self.peaks.iter().find(|p| p.m == m)
    }

    pub fn total_probability(&self) -> T {
        let p: Vec<T> = self.peaks.iter().map(|p| p.probability).collect();
        pairwise_sum(&p)
    }
}

/// Single diffraction peak shape `N sinc²(N y)` on `|y| < π/2`.
fn peak_shape<T: Real>(count: usize, y: T) -> T {
    if y.abs() >= T::FRAC_PI_2() {
        return T::zero();
    }
    let n = T::from_count(count);
    let s = sinc(n * y);
    n * s * s
}

pub(crate) fn order_range<T: Real>(
    spec: &LatticeSpec<T>,
    axis: usize,
) -> std::ops::RangeInclusive<i64> {
    if spec.counts[axis] == 1 {
        return 0..=0;
    }
    let reach = (spec.spacing / T::PI()).ceil().to_i64().unwrap_or(0) + 1;
    -reach..=reach
}

/// Existence and direction of order `m` from `t = k̂ + K_n + (2π/k_L d₀) Σ m_α α̂`.
pub(crate) fn order_geometry<T: Real>(
    spec: &LatticeSpec<T>,
    k_dir: Vec3<T>,
    kn: Vec3<T>,
    m: [i64; 3],
) -> (bool, Option<PeakDirection<T>>) {
    let scale = T::TAU() / spec.spacing;
    let t = (0..3).fold(k_dir + kn, |acc, a| {
        acc + spec.axes[a] * (scale * T::from_index(m[a]))
    });
    match spec.dims {
        Dimensionality::One => {
            let axis = spec.axes[2];
            let tz = t.dot(axis);
            let exists = tz.abs() <= T::one() + T::lit(1e-9);
            let dir = exists.then(|| PeakDirection::Cone {
                axis,
                theta: tz.max(-T::one()).min(T::one()).acos(),
            });
            (exists, dir)
        }
        Dimensionality::Three => {
            let tol = T::lit(2.0) / (spec.spacing * T::from_count(spec.max_count()));
            let norm = t.norm();
            let exists = (norm - T::one()).abs() <= tol;
            let dir = if exists {
                t.normalized().map(PeakDirection::Beam)
            } else {
                None
            };
            (exists, dir)
        }
    }
}

/// Default grid: chains use the chain axis as pole (the pattern only depends
/// on the polar angle), lattices use the laser direction.
pub fn default_grid<T: Real>(spec: &LatticeSpec<T>, k_dir: Vec3<T>) -> Result<AngularGrid<T>> {
    let width = T::TAU() / (spec.spacing * T::from_count(spec.max_count()));
    match spec.dims {
        Dimensionality::One => {
            let n_theta = (T::PI() * T::lit(10.0) / width)
                .ceil()
                .to_usize()
                .unwrap_or(usize::MAX)
                .max(64);
            AngularGrid::with_pole(spec.axes[2], n_theta, 4)
        }
        Dimensionality::Three => AngularGrid::for_beam_width(k_dir, width),
    }
}

pub fn bragg_decompose<T: Real>(
    spec: &LatticeSpec<T>,
    k_dir: Vec3<T>,
    n: [i64; 3],
) -> Result<BraggDecomposition<T>> {
    let grid = default_grid(spec, k_dir)?;
    bragg_decompose_on(spec, k_dir, n, &grid)
}

/// Splits the emission of plane-wave mode `n` into diffraction orders by
/// integrating each peak term over the sphere.
pub fn bragg_decompose_on<T: Real>(
    spec: &LatticeSpec<T>,
    k_dir: Vec3<T>,
    n: [i64; 3],
    grid: &AngularGrid<T>,
) -> Result<BraggDecomposition<T>> {
    spec.validate()?;
    for (a, &c) in spec.counts.iter().enumerate() {
        if !lattice_index_range(c).contains(&n[a]) {
            return Err(Error::InvalidInput(format!(
                "mode index {n:?} outside the lattice range"
            )));
        }
    }
    let k_dir = k_dir
        .normalized()
        .ok_or_else(|| Error::InvalidInput("laser direction must be a nonzero vector".into()))?;
    if spec.counts.iter().any(|&c| c > 1 && c < 10) {
        warn!("diffraction peaks of axes with fewer than 10 sites overlap; orders are approximate");
    }
    let kn = lattice_wavevector(spec, n);
    let inv = T::one() / (T::lit(4.0) * T::PI());
    let natoms = T::from_count(spec.num_atoms());

    // per node: diffraction order, peak term, full lattice sum
    let samples: Vec<([i64; 3], T, T)> = grid
        .nodes()
        .par_iter()
        .map(|node| {
            let x = axis_phases(spec, node.direction, k_dir, kn);
            let mut m = [0i64; 3];
            let mut term = node.weight * inv;
            let mut full = node.weight * inv / natoms;
            for a in 0..3 {
                let count = spec.counts[a];
                full *= lattice_factor(count, x[a]);
                if count == 1 {
                    continue;
                }
                m[a] = round_to_i64(x[a] / T::PI());
                term *= peak_shape(count, x[a] - T::PI() * T::from_index(m[a]));
            }
            (m, term, full)
        })
        .collect();

    let mut buckets: BTreeMap<[i64; 3], Vec<T>> = BTreeMap::new();
    for &(m, term, _) in &samples {
        buckets.entry(m).or_default().push(term);
    }
    let sums: BTreeMap<[i64; 3], T> = buckets
        .into_iter()
        .map(|(m, v)| (m, pairwise_sum(&v)))
        .collect();
    let full: Vec<T> = samples.iter().map(|s| s.2).collect();
    let rate = pairwise_sum(&full);
    let peak_total = pairwise_sum(&sums.values().copied().collect::<Vec<_>>());

    let mut orders: Vec<[i64; 3]> = Vec::new();
    for a in order_range(spec, 0) {
        for b in order_range(spec, 1) {
            for c in order_range(spec, 2) {
                orders.push([a, b, c]);
            }
        }
    }
    for m in sums.keys() {
        if !orders.contains(m) {
            orders.push(*m);
        }
    }
    orders.sort_unstable();

    let peaks = orders
        .into_iter()
        .filter_map(|m| {
            let p = sums.get(&m).copied().unwrap_or(T::zero());
            let (exists, direction) = order_geometry(spec, k_dir, kn, m);
            let probability = if peak_total > T::zero() {
                p / peak_total
            } else {
                T::zero()
            };
            (exists || p > T::zero()).then_some(BraggPeak {
                m,
                exists,
                direction,
                probability,
            })
        })
        .collect();
    Ok(BraggDecomposition {
        peaks,
        rate,
        coverage: peak_total / rate,
    })
}

/// Writes `m1,m2,m3,exists,ux,uy,uz,p`. Cones are represented by one of their
/// generators; orders that cannot radiate print `nan` directions.
pub fn write_bragg_csv<T: Real, W: Write>(peaks: &[BraggPeak<T>], mut out: W) -> Result<()> {
    writeln!(out, "m1,m2,m3,exists,ux,uy,uz,p")?;
    for p in peaks {
        let u = p.direction.map(|d| d.representative());
        let c = |f: fn(&Vec3<T>) -> T| u.map_or(f64::NAN, |u| f(&u).as_f64());
        writeln!(
            out,
            "{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            p.m[0],
            p.m[1],
            p.m[2],
            u8::from(p.exists),
            c(|u| u.x),
            c(|u| u.y),
            c(|u| u.z),
            p.probability.as_f64()
        )?;
    }
    Ok(())
}
