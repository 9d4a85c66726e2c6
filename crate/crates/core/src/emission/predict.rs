use super::bragg::{order_geometry, order_range};
use crate::error::{Error, Result};
use crate::geometry::{lattice_index_range, lattice_wavevector, Dimensionality, LatticeSpec};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Closed-form chain prediction for one plane-wave mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction1D<T> {
    pub n: i64,
    /// `Γ_n/Γ̄`.
    pub rate: T,
    /// `λ/2d₀`.
    pub chi: T,
    pub superradiant: bool,
    /// Forward beam width `1/√(k_L d₀ N)`.
    pub beam_width: T,
    /// Probability of forward emission for the `n = 0` mode, `1/(1 + 2 int(2d₀/λ))`.
    pub forward_probability: T,
}

fn heaviside<T: Real>(x: T) -> T {
    if x.abs() <= T::lit(1e-12) {
        T::lit(0.5)
    } else if x > T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

/// Integer part toward zero, snapping values within roundoff of an integer.
fn int_part<T: Real>(x: T) -> T {
    let r = x.round();
    if (x - r).abs() <= T::lit(1e-9) {
        r
    } else {
        x.trunc()
    }
}

fn check_mode<T: Real>(spec: &LatticeSpec<T>, n: [i64; 3]) -> Result<()> {
    spec.validate()?;
    for (a, &c) in spec.counts.iter().enumerate() {
        if !lattice_index_range(c).contains(&n[a]) {
            return Err(Error::InvalidInput(format!(
                "mode index {n:?} outside the lattice range"
            )));
        }
    }
    Ok(())
}

/// Rates of a chain driven along its axis:
/// `Γ_n/Γ̄ = χ [θ(−n/N) θ(2d₀/λ + n/N) + int(2d₀/λ + n/N)]` with `θ(0) = 1/2`.
pub fn predict_1d<T: Real>(spec: &LatticeSpec<T>, n: i64) -> Result<Prediction1D<T>> {
    if spec.dims != Dimensionality::One {
        return Err(Error::InvalidInput(
            "chain prediction needs a one-dimensional lattice".into(),
        ));
    }
    check_mode(spec, [0, 0, n])?;
    let count = T::from_count(spec.counts[2]);
    let chi = T::PI() / spec.spacing;
    let ratio = T::one() / chi; // 2d₀/λ
    let frac = T::from_index(n) / count;
    let shifted = ratio + frac;
    let rate = chi * (heaviside(-frac) * heaviside(shifted) + int_part(shifted));
    Ok(Prediction1D {
        n,
        rate,
        chi,
        superradiant: rate > T::lit(0.5),
        beam_width: T::one() / (spec.spacing * count).sqrt(),
        forward_probability: T::one() / (T::one() + T::lit(2.0) * int_part(ratio)),
    })
}

/// Closed-form prediction for a cubic lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction3D<T> {
    pub n: [i64; 3],
    pub rate: T,
    /// `N_x (λ/2d₀)²/√π`.
    pub chi: T,
    pub superradiant: bool,
    /// Order that satisfies energy-momentum conservation.
    pub m_c: Option<[i64; 3]>,
    pub direction: Option<Vec3<T>>,
    /// `1/(k_L d₀ N_x)`.
    pub beam_width: T,
    /// Probability of emission out of the forward beam.
    pub escape: Option<T>,
}

/// Returns `None` for modes about which nothing is predicted, which are those
/// with `n ≠ 0` when `λ ≤ 2d₀`.
pub fn predict_3d<T: Real>(
    spec: &LatticeSpec<T>,
    k_dir: Vec3<T>,
    n: [i64; 3],
) -> Result<Option<Prediction3D<T>>> {
    if spec.dims != Dimensionality::Three {
        return Err(Error::InvalidInput(
            "lattice prediction needs a three-dimensional lattice".into(),
        ));
    }
    check_mode(spec, n)?;
    let k_dir = k_dir
        .normalized()
        .ok_or_else(|| Error::InvalidInput("laser direction must be a nonzero vector".into()))?;
    let nx = T::from_count(spec.max_count());
    let half_ratio = T::PI() / spec.spacing; // λ/2d₀
    let chi = nx * half_ratio * half_ratio / T::PI().sqrt();
    let beam_width = T::one() / (spec.spacing * nx);

    if half_ratio > T::one() {
        let kn = lattice_wavevector(spec, n);
        let mut best: Option<([i64; 3], Vec3<T>, T)> = None;
        for a in order_range(spec, 0) {
            for b in order_range(spec, 1) {
                for c in order_range(spec, 2) {
                    let m = [a, b, c];
                    if let (true, Some(dir)) = order_geometry(spec, k_dir, kn, m) {
                        let u = dir.representative();
                        let scale = T::TAU() / spec.spacing;
                        let t = (0..3).fold(k_dir + kn, |acc, i| {
                            acc + spec.axes[i] * (scale * T::from_index(m[i]))
                        });
                        let miss = (t.norm() - T::one()).abs();
                        if best.is_none_or(|(_, _, d)| miss < d) {
                            best = Some((m, u, miss));
                        }
                    }
                }
            }
        }
        let (m_c, direction) = match best {
            Some((m, u, _)) => (Some(m), Some(u)),
            None => (None, None),
        };
        let superradiant = m_c.is_some();
        return Ok(Some(Prediction3D {
            n,
            rate: if superradiant { chi } else { T::zero() },
            chi,
            superradiant,
            m_c,
            direction,
            beam_width,
            escape: superradiant.then(T::zero),
        }));
    }
    if n != [0, 0, 0] {
        return Ok(None);
    }
    Ok(Some(Prediction3D {
        n,
        rate: T::one() + chi,
        chi,
        superradiant: true,
        m_c: Some([0, 0, 0]),
        direction: Some(k_dir),
        beam_width,
        escape: Some(T::one() / (T::one() + chi)),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, lambda_over_d: f64) -> LatticeSpec<f64> {
        LatticeSpec::chain(
            n,
            LatticeSpec::<f64>::spacing_from_wavelength_ratio(lambda_over_d),
        )
    }

    #[test]
    fn forward_mode_of_a_sparse_chain() {
        let p = predict_1d(&chain(20, 5.0), 0).unwrap();
        assert!((p.chi - 2.5).abs() < 1e-12);
        assert!((p.rate - 1.25).abs() < 1e-12);
        assert!(p.superradiant);
        assert_eq!(p.forward_probability, 1.0);
    }

    #[test]
    fn positive_index_is_dark() {
        let p = predict_1d(&chain(20, 5.0), 4).unwrap();
        assert_eq!(p.rate, 0.0);
        assert!(!p.superradiant);
    }

    #[test]
    fn rates_sum_to_atom_number() {
        let spec = chain(20, 5.0);
        let total: f64 = lattice_index_range(20)
            .map(|n| predict_1d(&spec, n).unwrap().rate)
            .sum();
        assert!((total - 20.0).abs() < 1e-12, "{total}");
    }

    #[test]
    fn dense_chain_forward_probability() {
        assert!((predict_1d(&chain(100, 1.0), 0).unwrap().forward_probability - 0.2).abs() < 1e-12);
        assert!((predict_1d(&chain(100, 0.8), 0).unwrap().forward_probability - 0.2).abs() < 1e-12);
    }

    #[test]
    fn wide_spacing_recovers_single_atom_rate() {
        let p = predict_1d(&chain(100, 0.01), 0).unwrap();
        assert!((p.rate - 1.0).abs() < 0.01, "{}", p.rate);
    }

    #[test]
    fn cubic_directional_regime() {
        let spec = LatticeSpec::cubic(10, LatticeSpec::<f64>::spacing_from_wavelength_ratio(2.5));
        let p = predict_3d(&spec, Vec3::unit_z(), [0, 0, 0])
            .unwrap()
            .unwrap();
        assert!(p.superradiant);
        assert_eq!(p.m_c, Some([0, 0, 0]));
        assert!((p.chi - 10.0 * 1.5625 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((p.rate - p.chi).abs() < 1e-12);
        assert!((p.beam_width - 1.0 / (spec.spacing * 10.0)).abs() < 1e-15);
        assert!((p.direction.unwrap() - Vec3::unit_z()).norm() < 1e-12);
    }

    #[test]
    fn far_subwavelength_forces_forward_order() {
        let spec = LatticeSpec::cubic(6, LatticeSpec::<f64>::spacing_from_wavelength_ratio(5.0));
        for a in lattice_index_range(6) {
            for c in lattice_index_range(6) {
                let p = predict_3d(&spec, Vec3::unit_z(), [a, 0, c])
                    .unwrap()
                    .unwrap();
                if p.superradiant {
                    assert_eq!(p.m_c, Some([0, 0, 0]));
                } else {
                    assert_eq!(p.rate, 0.0);
                }
            }
        }
    }

    #[test]
    fn dense_lattice_forward_mode() {
        let spec = LatticeSpec::cubic(8, LatticeSpec::<f64>::spacing_from_wavelength_ratio(0.4));
        let p = predict_3d(&spec, Vec3::unit_z(), [0, 0, 0])
            .unwrap()
            .unwrap();
        assert!((p.rate - 1.0 - p.chi).abs() < 1e-12);
        assert!((p.escape.unwrap() - 1.0 / (1.0 + p.chi)).abs() < 1e-12);
        assert!(predict_3d(&spec, Vec3::unit_z(), [1, 0, 0])
            .unwrap()
            .is_none());
    }

    #[test]
    fn wrong_dimensionality_is_rejected() {
        assert!(predict_1d(&LatticeSpec::cubic(4, 1.0), 0).is_err());
        assert!(predict_3d(&chain(4, 2.0), Vec3::unit_z(), [0, 0, 0]).is_err());
    }
}
