use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use super::{AtomArray, Source};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Generator used for every random draw, recorded in output metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20 (rand_chacha 0.9), seed_from_u64, one stream per sample";

/// Gaussian cloud with density `exp(-(r/L)²)/(π^{3/2} L³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpec<T> {
    pub n: usize,
    /// Dimensionless size `k_L L`.
    pub kl_l: T,
    pub seed: u64,
}

impl<T: Real> EnsembleSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput(
                "an ensemble needs at least one atom".into(),
            ));
        }
        if !(self.kl_l > T::zero() && self.kl_l.is_finite()) {
            return Err(Error::InvalidInput(
                "k_L L must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

pub fn sample_ensemble_positions<T: Real>(spec: &EnsembleSpec<T>) -> Result<AtomArray<T>> {
    sample_ensemble_positions_stream(spec, 0)
}

/// Draws from stream `stream` of the seeded generator, so independent samples
/// can be produced in any order.
pub fn sample_ensemble_positions_stream<T: Real>(
    spec: &EnsembleSpec<T>,
    stream: u64,
) -> Result<AtomArray<T>> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    // each Cartesian component has variance L²/2
    let sigma = spec.kl_l.as_f64() / std::f64::consts::SQRT_2;
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let positions = (0..spec.n)
        .map(|_| {
            let mut c = [T::zero(); 3];
            for x in &mut c {
                *x = T::lit(normal.sample(&mut rng));
            }
            Vec3::from_array(c)
        })
        .collect();
    AtomArray::new(positions, Source::SampledEnsemble)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_positions() {
        let spec = EnsembleSpec {
            n: 50,
            kl_l: 10.0,
            seed: 42,
        };
        assert_eq!(
            sample_ensemble_positions(&spec).unwrap(),
            sample_ensemble_positions(&spec).unwrap()
        );
        let other = EnsembleSpec { seed: 43, ..spec };
        assert_ne!(
            sample_ensemble_positions(&spec).unwrap(),
            sample_ensemble_positions(&other).unwrap()
        );
    }

    #[test]
    fn streams_differ() {
        let spec = EnsembleSpec {
            n: 5,
            kl_l: 1.0,
            seed: 7,
        };
        let a = sample_ensemble_positions_stream(&spec, 1).unwrap();
        let b = sample_ensemble_positions_stream(&spec, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn moments_match_the_density() {
        let spec = EnsembleSpec {
            n: 10_000,
            kl_l: 10.0,
            seed: 1,
        };
        let atoms = sample_ensemble_positions(&spec).unwrap();
        let n = atoms.len() as f64;
        let var = 50.0;
        for axis in 0..3 {
            let xs: Vec<f64> = atoms
                .positions()
                .iter()
                .map(|p| p.to_array()[axis])
                .collect();
            let mean = xs.iter().sum::<f64>() / n;
            let v = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!(
                mean.abs() < 3.0 * (var / n).sqrt(),
                "axis {axis} mean {mean}"
            );
            assert!((v / var - 1.0).abs() < 0.05, "axis {axis} variance {v}");
        }
    }

    #[test]
    fn single_atom() {
        let atoms = sample_ensemble_positions(&EnsembleSpec {
            n: 1,
            kl_l: 3.0,
            seed: 0,
        })
        .unwrap();
        assert_eq!(atoms.len(), 1);
        assert!(atoms.positions()[0].is_finite());
    }

    #[test]
    fn invalid_spec() {
        assert!(sample_ensemble_positions(&EnsembleSpec {
            n: 0,
            kl_l: 3.0,
            seed: 0
        })
        .is_err());
        assert!(sample_ensemble_positions(&EnsembleSpec {
            n: 2,
            kl_l: 0.0,
            seed: 0
        })
        .is_err());
    }
}
