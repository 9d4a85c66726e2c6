//! Atomic vapors: motion-averaged observables of a Gaussian cloud and
//! Monte-Carlo averages over frozen configurations.
//!
//! Photon states are described on the unit sphere of emission directions.
//! The radial (frequency) factor is the same Lorentzian for both parts of the
//! density matrix and integrates out.

use log::warn;
use rayon::prelude::*;

use crate::coupling::coupling_fixed;
use crate::csv::KeyValueReport;
use crate::emission::{AngularDistribution, DistributionKind};
use crate::error::{Error, Result};
use crate::geometry::{sample_ensemble_positions_stream, AtomArray, EnsembleSpec};
use crate::linalg::Vec3;
use crate::quadrature::AngularGrid;
use crate::scalar::{pairwise_sum, Real};

/// Entries allowed in a materialized kernel.
pub const KERNEL_GUARD: usize = 200_000_000;
/// Largest `M/N` treated as low excitation.
pub const MULTIPHOTON_RATIO_LIMIT: f64 = 0.1;

fn check_cloud<T: Real>(n: usize, kl_l: T) -> Result<()> {
    EnsembleSpec { n, kl_l, seed: 0 }.validate()
}

/// `χ_en = (N − 1)/(2 (k_L L)²)`.
pub fn optical_thickness<T: Real>(n: usize, kl_l: T) -> Result<T> {
    check_cloud(n, kl_l)?;
    Ok(T::from_count(n - 1) / (T::lit(2.0) * kl_l * kl_l))
}

/// Eigenvalues of the motion-averaged coupling `(1/2 − β) I + β 𝟙𝟙ᵀ` from its
/// rank-one structure: the symmetric mode `1/2 + (N − 1)β` and the
/// `(N − 1)`-fold value `1/2 − β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSpectrum<T> {
    pub symmetric: T,
    pub degenerate: T,
    pub multiplicity: usize,
}

pub fn ensemble_spectrum<T: Real>(n: usize, kl_l: T) -> Result<EnsembleSpectrum<T>> {
    check_cloud(n, kl_l)?;
    let beta = crate::coupling::ensemble_off_diagonal(kl_l);
    let half = T::lit(0.5);
    Ok(EnsembleSpectrum {
        symmetric: half + T::from_count(n - 1) * beta,
        degenerate: half - beta,
        multiplicity: n - 1,
    })
}

/// Default grid for a cloud of size `k_L L`: about `2π k_L L` polar rings,
/// pole along the laser.
pub fn ensemble_grid<T: Real>(kl_l: T, k_dir: Vec3<T>) -> Result<AngularGrid<T>> {
    if !(kl_l > T::zero() && kl_l.is_finite()) {
        return Err(Error::InvalidInput(
            "k_L L must be positive and finite".into(),
        ));
    }
    let n_theta = (T::TAU() * kl_l)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX)
        .max(crate::quadrature::MIN_THETA_NODES);
    AngularGrid::with_pole(k_dir, n_theta, 2 * n_theta)
}

/// Photon state `ρ = (1 − ε)|φ̄₀⟩⟨φ̄₀| + ε ρ̄` emitted by the symmetric spin wave
/// of a cloud in the fast-motion regime.
#[derive(Debug, Clone)]
pub struct MixedPhotonState<T> {
    pub n: usize,
    pub kl_l: T,
    pub chi: T,
    /// Incoherent weight `1/(1 + χ_en)`.
    pub epsilon: T,
    /// `J₀/Γ̄ = (χ_en + 1)/2`.
    pub j0: T,
    /// Grid whose pole is the laser direction.
    pub grid: AngularGrid<T>,
    /// Real coherent amplitude `φ̄₀` per polar ring, normalized on `grid`.
    pub coherent_rings: Vec<T>,
}

/// `e^{−(k_L L)² |u − k̂|²/4}` with `|u − k̂|² = 2(1 − cos θ)`.
fn coherent_profile<T: Real>(a: T, cos_theta: T) -> T {
    (-a * (T::one() - cos_theta) * T::lit(0.5)).exp()
}

pub fn mixed_photon_state<T: Real>(
    n: usize,
    kl_l: T,
    grid: &AngularGrid<T>,
) -> Result<MixedPhotonState<T>> {
    let chi = optical_thickness(n, kl_l)?;
    let epsilon = T::one() / (T::one() + chi);
    if grid.theta_spacing() * kl_l > T::lit(0.5) * (T::one() + T::lit(1e-9)) {
        warn!(
            "angular grid spacing {:e} does not resolve the lobe width 1/k_L L = {:e}",
            grid.theta_spacing().as_f64(),
            (T::one() / kl_l).as_f64()
        );
    }
    let a = kl_l * kl_l;
    let raw: Vec<T> = grid
        .cos_theta()
        .iter()
        .map(|&c| coherent_profile(a, c))
        .collect();
    let dphi = T::TAU() / T::from_count(grid.n_phi());
    let norm2: Vec<T> = raw
        .iter()
        .zip(grid.ring_weights())
        .map(|(&p, &w)| p * p * w * dphi * T::from_count(grid.n_phi()))
        .collect();
    let norm = pairwise_sum(&norm2).sqrt();
    let coherent_rings = raw.into_iter().map(|p| p / norm).collect();
    Ok(MixedPhotonState {
        n,
        kl_l,
        chi,
        epsilon,
        j0: (chi + T::one()) * T::lit(0.5),
        grid: grid.clone(),
        coherent_rings,
    })
}

impl<T: Real> MixedPhotonState<T> {
    pub fn k_dir(&self) -> Vec3<T> {
        self.grid.pole()
    }

    /// `ρ̄(u, u') = e^{−(k_L L)² |u − u'|²/4} / 4π`.
    pub fn incoherent_kernel(&self, u: Vec3<T>, v: Vec3<T>) -> T {
        let d = u - v;
        let a = self.kl_l * self.kl_l;
        (-a * d.dot(d) * T::lit(0.25)).exp() / (T::lit(4.0) * T::PI())
    }

    /// Common header of ensemble reports.
    pub fn report(&self, seed: Option<u64>) -> KeyValueReport {
        let mut r = KeyValueReport::new();
        r.push("N", self.n)
            .push_num("kL_L", self.kl_l)
            .push_num("chi_en", self.chi)
            .push_num("epsilon", self.epsilon);
        match seed {
            Some(s) => r.push("seed", s),
            None => r.push("seed", "none"),
        };
        r
    }
}

/// Coherent and incoherent parts of the angular distribution.
#[derive(Debug, Clone)]
pub struct EnsembleAngular<T> {
    /// `(1 − ε)|φ̄₀(u)|²`.
    pub coherent: AngularDistribution<T>,
    /// `ε/4π`.
    pub incoherent: AngularDistribution<T>,
    /// Probability of emission out of the forward lobe, `ε`.
    pub escape: T,
}

/// Evaluates the state on `grid`; the coherent lobe is renormalized there so
/// its total is exactly `1 − ε`.
pub fn ensemble_angular<T: Real>(
    state: &MixedPhotonState<T>,
    grid: &AngularGrid<T>,
) -> Result<EnsembleAngular<T>> {
    let a = state.kl_l * state.kl_l;
    let k_dir = state.k_dir();
    let raw = grid.map(|node| {
        let p = coherent_profile(a, node.direction.dot(k_dir));
        p * p
    });
    let total = grid.integrate(&raw);
    if !(total > T::zero()) {
        return Err(Error::InvalidInput(
            "coherent lobe vanishes on this grid".into(),
        ));
    }
    let scale = (T::one() - state.epsilon) / total;
    let mut coherent = AngularDistribution::new(
        grid.clone(),
        raw.into_iter().map(|v| v * scale).collect(),
        DistributionKind::EnsembleCoherent,
    );
    coherent.feature_width = Some(T::one() / state.kl_l);
    let flat = state.epsilon / (T::lit(4.0) * T::PI());
    let incoherent = AngularDistribution::new(
        grid.clone(),
        vec![flat; grid.len()],
        DistributionKind::EnsembleIncoherent,
    );
    Ok(EnsembleAngular {
        coherent,
        incoherent,
        escape: state.epsilon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurityReport<T> {
    /// `(1 − ε)²`.
    pub formula: T,
    /// `Tr ρ²` on the grid.
    pub numeric: T,
    /// `1/(2 (k_L L)²)`.
    pub incoherent_trace_formula: T,
    /// `Tr ρ̄²` on the grid.
    pub incoherent_trace: T,
    /// `⟨φ̄₀|ρ̄|φ̄₀⟩` on the grid.
    pub cross_term: T,
    /// Cauchy–Schwarz bound `√Tr ρ̄²` on the cross term.
    pub cross_bound: T,
    /// Relative change of `Tr ρ²` when both grid resolutions are doubled.
    pub grid_change: T,
}

/// `(Tr ρ̄², ⟨φ̄₀|ρ̄|φ̄₀⟩)` on the state's grid. Both only depend on ring pairs
/// and the azimuth difference, which reduces the double sum over nodes to
/// `n_θ² n_φ` kernel evaluations.
fn ring_pair_sums<T: Real>(state: &MixedPhotonState<T>) -> (T, T) {
    let grid = &state.grid;
    let n_phi = grid.n_phi();
    let dphi = T::TAU() / T::from_count(n_phi);
    let cos_t = grid.cos_theta();
    let sin_t: Vec<T> = cos_t
        .iter()
        .map(|&c| (T::one() - c * c).max(T::zero()).sqrt())
        .collect();
    let w: Vec<T> = grid.ring_weights().iter().map(|&w| w * dphi).collect();
    let cos_dphi: Vec<T> = (0..n_phi)
        .map(|k| (dphi * T::from_count(k)).cos())
        .collect();
    let a = state.kl_l * state.kl_l;
    let inv4pi = T::one() / (T::lit(4.0) * T::PI());
    let phi0 = &state.coherent_rings;
    let nf = T::from_count(n_phi);

    let per_ring: Vec<(T, T)> = (0..grid.n_theta())
        .into_par_iter()
        .map(|i| {
            let mut sq = Vec::with_capacity(i + 1);
            let mut cross = Vec::with_capacity(i + 1);
            for j in 0..=i {
                let base = cos_t[i] * cos_t[j];
                let ss = sin_t[i] * sin_t[j];
                let (g2, g): (Vec<T>, Vec<T>) = cos_dphi
                    .iter()
                    .map(|&cd| {
                        // |u − u'|² = 2 − 2 u·u'
                        let dist2 = T::lit(2.0) * (T::one() - base - ss * cd);
                        let g = (-a * dist2 * T::lit(0.25)).exp() * inv4pi;
                        (g * g, g)
                    })
                    .unzip();
                let mult = if i == j { T::one() } else { T::lit(2.0) };
                let pair = w[i] * w[j] * nf * mult;
                sq.push(pair * pairwise_sum(&g2));
                cross.push(pair * phi0[i] * phi0[j] * pairwise_sum(&g));
            }
            (pairwise_sum(&sq), pairwise_sum(&cross))
        })
        .collect();
    let sq: Vec<T> = per_ring.iter().map(|p| p.0).collect();
    let cross: Vec<T> = per_ring.iter().map(|p| p.1).collect();
    (pairwise_sum(&sq), pairwise_sum(&cross))
}

fn purity_terms<T: Real>(state: &MixedPhotonState<T>) -> (T, T, T) {
    let (t_inc, c) = ring_pair_sums(state);
    let e = state.epsilon;
    let one = T::one() - e;
    (
        one * one + e * e * t_inc + T::lit(2.0) * e * one * c,
        t_inc,
        c,
    )
}

pub fn purity<T: Real>(state: &MixedPhotonState<T>) -> Result<PurityReport<T>> {
    let (numeric, incoherent_trace, cross_term) = purity_terms(state);
    let finer = mixed_photon_state(state.n, state.kl_l, &state.grid.refined(2)?)?;
    let (numeric_fine, _, _) = purity_terms(&finer);
    let grid_change = (numeric_fine - numeric).abs() / numeric_fine;
    if grid_change > T::lit(0.02) {
        warn!(
            "purity changed by {:.3}% under grid doubling",
            grid_change.as_f64() * 100.0
        );
    }
    let one = T::one() - state.epsilon;
    Ok(PurityReport {
        formula: one * one,
        numeric,
        incoherent_trace_formula: T::one() / (T::lit(2.0) * state.kl_l * state.kl_l),
        incoherent_trace,
        cross_term,
        cross_bound: incoherent_trace.sqrt(),
        grid_change,
    })
}

/// `ρ̄` between every pair of grid nodes, row-major, scaled by the square
/// roots of the node weights so that matrix traces equal grid integrals.
pub fn incoherent_kernel_matrix<T: Real>(state: &MixedPhotonState<T>) -> Result<Vec<T>> {
    let nodes = state.grid.nodes();
    let n = nodes.len();
    let requested = n.saturating_mul(n);
    if requested > KERNEL_GUARD {
        return Err(Error::ResourceGuard {
            resource: "incoherent kernel",
            requested,
            limit: KERNEL_GUARD,
        });
    }
    let out: Vec<Vec<T>> = nodes
        .par_iter()
        .map(|p| {
            nodes
                .iter()
                .map(|q| {
                    (p.weight * q.weight).sqrt() * state.incoherent_kernel(p.direction, q.direction)
                })
                .collect()
        })
        .collect();
    Ok(out.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiphotonReport<T> {
    pub photons: usize,
    pub epsilon: T,
    /// Weight of the pure `M`-photon component, `(1 − ε)^M`.
    pub pure_weight: T,
    /// Lower bound on the purity, `(1 − ε)^{2M}`.
    pub purity_bound: T,
}

pub fn multiphoton_report<T: Real>(
    photons: usize,
    n_atoms: usize,
    chi: T,
) -> Result<MultiphotonReport<T>> {
    if photons == 0 || n_atoms == 0 {
        return Err(Error::InvalidInput(
            "photon and atom numbers must be positive".into(),
        ));
    }
    if !(chi >= T::zero() && chi.is_finite()) {
        return Err(Error::InvalidInput(
            "optical thickness must be nonnegative and finite".into(),
        ));
    }
    if photons as f64 / n_atoms as f64 > MULTIPHOTON_RATIO_LIMIT {
        warn!("{photons} photons from {n_atoms} atoms is outside the low-excitation limit");
    }
    let epsilon = T::one() / (T::one() + chi);
    multiphoton_from_epsilon(photons, epsilon)
}

pub fn multiphoton_from_epsilon<T: Real>(
    photons: usize,
    epsilon: T,
) -> Result<MultiphotonReport<T>> {
    if !(epsilon >= T::zero() && epsilon <= T::one()) {
        return Err(Error::InvalidInput(
            "incoherent weight must lie in [0, 1]".into(),
        ));
    }
    let m = i32::try_from(photons)
        .map_err(|_| Error::InvalidInput("photon number too large".into()))?;
    let pure_weight = (T::one() - epsilon).powi(m);
    Ok(MultiphotonReport {
        photons,
        epsilon,
        pure_weight,
        purity_bound: pure_weight * pure_weight,
    })
}

/// Monte-Carlo average over frozen configurations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate<T> {
    pub mean: T,
    /// Standard error of the mean; `None` with fewer than two samples.
    pub std_error: Option<T>,
    pub used: usize,
    pub failures: usize,
}

/// Averages `observable` over `samples` independent clouds. Sample `i` is
/// drawn from stream `i` of the generator seeded with `spec.seed`, so the
/// result does not depend on the thread count. Samples whose evaluation fails
/// are skipped and counted.
pub fn slow_motion_average<T, F>(
    spec: &EnsembleSpec<T>,
    samples: usize,
    observable: F,
) -> Result<MonteCarloEstimate<T>>
where
    T: Real,
    F: Fn(&AtomArray<T>) -> Result<T> + Sync,
{
    spec.validate()?;
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample is needed".into()));
    }
    let results: Vec<Result<T>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            sample_ensemble_positions_stream(spec, i as u64).and_then(|atoms| observable(&atoms))
        })
        .collect();
    let mut values = Vec::with_capacity(samples);
    let mut failures = 0;
    for r in results {
        match r {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(_) => failures += 1,
            Err(e) => {
                log::debug!("sample skipped: {e}");
                failures += 1;
            }
        }
    }
    if failures > 0 {
        warn!("{failures} of {samples} samples failed and were skipped");
    }
    if values.is_empty() {
        return Err(Error::InvalidInput("every sample failed".into()));
    }
    let used = values.len();
    let mean = pairwise_sum(&values) / T::from_count(used);
    let std_error = (used > 1).then(|| {
        let dev: Vec<T> = values.iter().map(|&v| (v - mean) * (v - mean)).collect();
        (pairwise_sum(&dev) / T::from_count(used - 1) / T::from_count(used)).sqrt()
    });
    Ok(MonteCarloEstimate {
        mean,
        std_error,
        used,
        failures,
    })
}

/// `Re(ψ₀† J ψ₀)` for the uniform spin wave, the frozen-configuration
/// counterpart of the ensemble coupling `J₀`.
pub fn symmetric_mode_coupling<T: Real>(atoms: &AtomArray<T>, k_dir: Vec3<T>) -> Result<T> {
    let j = coupling_fixed(atoms, k_dir)?;
    let n = atoms.len();
    let re: Vec<T> = j.entries.as_slice().iter().map(|z| z.re).collect();
    Ok(pairwise_sum(&re) / T::from_count(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::coupling_ensemble;
    use crate::modes::diagonalize;

    #[test]
    fn optical_thickness_values() {
        assert!((optical_thickness(201, 10.0_f64).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(optical_thickness(1, 3.0_f64).unwrap(), 0.0);
        assert!((optical_thickness(50001, 50.0_f64).unwrap() - 10.0).abs() < 1e-12);
        assert!(optical_thickness(0, 1.0_f64).is_err());
        assert!(optical_thickness(5, 0.0_f64).is_err());
    }

    #[test]
    fn incoherent_weight() {
        let grid = ensemble_grid(10.0_f64, Vec3::unit_z()).unwrap();
        let s = mixed_photon_state(201, 10.0, &grid).unwrap();
        assert!((s.epsilon - 0.5).abs() < 1e-15);
        let single = mixed_photon_state(1, 10.0, &grid).unwrap();
        assert_eq!(single.epsilon, 1.0);
    }

    #[test]
    fn angular_split_sums_to_one() {
        let grid = ensemble_grid(20.0_f64, Vec3::new(0.0, 1.0, 1.0)).unwrap();
        let s = mixed_photon_state(8001, 20.0, &grid).unwrap();
        let ang = ensemble_angular(&s, &grid).unwrap();
        assert!((ang.coherent.total + ang.incoherent.total - 1.0).abs() < 1e-10);
        assert!((ang.escape + ang.coherent.total - 1.0).abs() < 1e-12);
        assert!((ang.escape - 1.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_amplitude_is_normalized() {
        let grid = ensemble_grid(5.0_f64, Vec3::unit_z()).unwrap();
        let s = mixed_photon_state(100, 5.0, &grid).unwrap();
        let values: Vec<f64> = (0..grid.len())
            .map(|i| s.coherent_rings[i / grid.n_phi()].powi(2))
            .collect();
        assert!((grid.integrate(&values) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn incoherent_trace_small_cloud() {
        let kl = 4.0_f64;
        let grid = ensemble_grid(kl, Vec3::unit_z()).unwrap();
        let s = mixed_photon_state(1, kl, &grid).unwrap();
        let (t_inc, _) = ring_pair_sums(&s);
        let a = kl * kl;
        let exact = (1.0 - (-2.0 * a).exp()) / (2.0 * a);
        assert!((t_inc - exact).abs() < 1e-3 * exact, "{t_inc} vs {exact}");
    }

    #[test]
    fn purity_bounds() {
        let kl = 6.0_f64;
        let grid = ensemble_grid(kl, Vec3::unit_z()).unwrap();
        let s = mixed_photon_state(361, kl, &grid).unwrap();
        let p = purity(&s).unwrap();
        assert!(p.numeric >= p.formula - 1e-12);
        assert!(p.numeric <= 1.0);
        assert!(p.cross_term <= p.cross_bound + 1e-12);
        assert!(p.grid_change < 0.02);
    }

    #[test]
    fn kernel_matrix_trace_and_guard() {
        let grid = AngularGrid::new(6, 12).unwrap();
        let s = mixed_photon_state(3, 1.0_f64, &grid).unwrap();
        let k = incoherent_kernel_matrix(&s).unwrap();
        let n = grid.len();
        let trace: f64 = (0..n).map(|i| k[i * n + i]).sum();
        assert!((trace - 1.0).abs() < 1e-12);
        let big = AngularGrid::new(200, 400).unwrap();
        let s = mixed_photon_state(3, 1.0_f64, &big).unwrap();
        assert!(matches!(
            incoherent_kernel_matrix(&s),
            Err(Error::ResourceGuard { .. })
        ));
    }

    #[test]
    fn multiphoton_values() {
        let r = multiphoton_from_epsilon(3, 0.1_f64).unwrap();
        assert!((r.pure_weight - 0.729).abs() < 1e-12);
        assert!((r.purity_bound - 0.531441).abs() < 1e-12);
        let r = multiphoton_from_epsilon(5, 0.0_f64).unwrap();
        assert_eq!((r.pure_weight, r.purity_bound), (1.0, 1.0));
        let one = multiphoton_report(1, 1000, 9.0_f64).unwrap();
        assert!((one.pure_weight - 0.9).abs() < 1e-12);
    }

    #[test]
    fn constant_observable() {
        let spec = EnsembleSpec {
            n: 3,
            kl_l: 2.0_f64,
            seed: 7,
        };
        let est = slow_motion_average(&spec, 50, |_| Ok(0.25)).unwrap();
        assert_eq!(est.mean, 0.25);
        assert_eq!(est.std_error, Some(0.0));
        let one = slow_motion_average(&spec, 1, |a| Ok(a.positions()[0].x)).unwrap();
        assert_eq!(one.used, 1);
        assert_eq!(one.std_error, None);
    }

    #[test]
    fn failures_are_counted() {
        let spec = EnsembleSpec {
            n: 2,
            kl_l: 2.0_f64,
            seed: 1,
        };
        let est = slow_motion_average(&spec, 20, |a| {
            if a.positions()[0].x > 0.0 {
                Err(Error::Singular)
            } else {
                Ok(1.0)
            }
        })
        .unwrap();
        assert_eq!(est.used + est.failures, 20);
        assert!(est.failures > 0);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let spec = EnsembleSpec {
            n: 2,
            kl_l: 3.0_f64,
            seed: 42,
        };
        let f = |a: &AtomArray<f64>| symmetric_mode_coupling(a, Vec3::unit_z());
        let a = slow_motion_average(&spec, 64, f).unwrap();
        let b = slow_motion_average(&spec, 64, f).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rank_one_spectrum() {
        let s = ensemble_spectrum(201, 10.0_f64).unwrap();
        assert!((s.symmetric - 1.0).abs() < 1e-15);
        assert!((s.degenerate - (1.0 - 1.0 / 200.0) / 2.0).abs() < 1e-15);
        assert_eq!(s.multiplicity, 200);
    }

    #[test]
    fn ensemble_eigenvalue_matches_thickness() {
        let (n, kl) = (30, 2.0_f64);
        let d = diagonalize(&coupling_ensemble(n, kl).unwrap()).unwrap();
        let chi = optical_thickness(n, kl).unwrap();
        let top = d.eigenvalues.unwrap()[0];
        assert!((top.re - (chi + 1.0) / 2.0).abs() < 1e-12);
    }
}
