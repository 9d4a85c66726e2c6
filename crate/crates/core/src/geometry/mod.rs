//! Atom position sets: regular lattices, ion-crystal equilibria, Gaussian
//! vapor samples and plain-text position files.

mod io;
mod ion_chain;
mod lattice;
mod sampling;

pub use io::{read_positions, write_positions};
pub use ion_chain::{solve_ion_chain_equilibrium, IonChain};
pub use lattice::{
    build_lattice, build_lattice_with_limit, index_range as lattice_index_range,
    wavevector as lattice_wavevector, wavevector_grid, Dimensionality, LatticeSpec, WavevectorGrid,
    DEFAULT_MAX_ATOMS,
};
pub use sampling::{
    sample_ensemble_positions, sample_ensemble_positions_stream, EnsembleSpec, RNG_ALGORITHM,
};

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Where a set of positions came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Lattice,
    IonChain,
    SampledEnsemble,
    File,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Lattice => "lattice",
            Source::IonChain => "ion-chain",
            Source::SampledEnsemble => "sampled-ensemble",
            Source::File => "file",
        }
    }
}

/// Positions of `N` atoms in units of `1/k_L`.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomArray<T> {
    positions: Vec<Vec3<T>>,
    source: Source,
    lattice: Option<LatticeSpec<T>>,
}

impl<T: Real> AtomArray<T> {
    /// Wraps arbitrary positions. Rejects empty or non-finite input.
    pub fn new(positions: Vec<Vec3<T>>, source: Source) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidInput(
                "an atom array needs at least one atom".into(),
            ));
        }
        if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "position of atom {i} is not finite"
            )));
        }
        Ok(Self {
            positions,
            source,
            lattice: None,
        })
    }

    pub(crate) fn with_lattice(mut self, spec: LatticeSpec<T>) -> Self {
        self.lattice = Some(spec);
        self
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Vec3<T>] {
        &self.positions
    }

    pub fn source(&self) -> Source {
        self.source
    }

    /// The lattice this array was built from, if any.
    pub fn lattice(&self) -> Option<&LatticeSpec<T>> {
        self.lattice.as_ref()
    }

    /// Smallest pairwise distance and the pair attaining it; `None` for one atom.
    pub fn min_pair_distance(&self) -> Option<(usize, usize, T)> {
        let mut best: Option<(usize, usize, T)> = None;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d = (self.positions[i] - self.positions[j]).norm();
                if best.is_none_or(|b| d < b.2) {
                    best = Some((i, j, d));
                }
            }
        }
        best
    }
}
