mod common;

use proptest::prelude::*;

use radiant::coupling::{coupling_ensemble, coupling_fixed};
use radiant::emission::{
    angular_distribution_exact, angular_distribution_planewave, bragg_decompose, predict_1d,
};
use radiant::ensemble::{multiphoton_from_epsilon, slow_motion_average, symmetric_mode_coupling};
use radiant::geometry::{
    build_lattice, lattice_index_range as index_range, solve_ion_chain_equilibrium, EnsembleSpec,
    LatticeSpec,
};
use radiant::modes::{diagonalize, sum_rule_report, SpinWave};
use radiant::quadrature::AngularGrid;
use radiant::{CMatrix, Complex64, Vec3f64};

fn unit(theta: f64, phi: f64) -> Vec3f64 {
    Vec3f64::new(
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    )
}

fn chain(n: usize, lambda_over_d: f64) -> LatticeSpec<f64> {
    LatticeSpec::chain(
        n,
        LatticeSpec::<f64>::spacing_from_wavelength_ratio(lambda_over_d),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coupling_diagonal_and_reciprocity(seed in any::<u64>(), n in 2usize..16, theta in 0.0..3.1f64, phi in 0.0..std::f64::consts::TAU) {
        let mut rng = common::rng(seed);
        let atoms = common::random_chain(&mut rng, n, 0.2, 4.0);
        let k = unit(theta, phi);
        let j = coupling_fixed(&atoms, k).unwrap().entries;
        let pos = atoms.positions();
        for a in 0..n {
            prop_assert_eq!(j[(a, a)], Complex64::new(0.5, 0.0));
            for b in 0..n {
                // stripping the laser phase leaves a symmetric kernel
                let lhs = j[(a, b)] * Complex64::from_polar(1.0, k.dot(pos[a] - pos[b]));
                let rhs = j[(b, a)] * Complex64::from_polar(1.0, k.dot(pos[b] - pos[a]));
                prop_assert!((lhs - rhs).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sum_rules_hold(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = common::rng(seed);
        let atoms = common::random_chain(&mut rng, n, 0.3, 3.0);
        let d = diagonalize(&coupling_fixed(&atoms, common::random_unit(&mut rng)).unwrap()).unwrap();
        let r = sum_rule_report(&d).unwrap();
        prop_assert!(r.rate_residual < 1e-9 && r.shift_residual < 1e-9, "{:?}", r);
    }

    #[test]
    fn decomposition_reconstructs_coupling(seed in any::<u64>(), n in 1usize..24) {
        let mut rng = common::rng(seed);
        let atoms = common::random_chain(&mut rng, n, 0.3, 3.0);
        let j = coupling_fixed(&atoms, common::random_unit(&mut rng)).unwrap();
        let d = diagonalize(&j).unwrap();
        let values = d.eigenvalues.clone().unwrap();
        let diag = CMatrix::from_fn(n, n, |a, b| if a == b { values[a] } else { Complex64::new(0.0, 0.0) });
        let back = d.m.matmul(&diag).matmul(&d.m_inv);
        prop_assert!(back.max_abs_diff(&j.entries) < 1e-9 * d.condition.max(1.0));
        let eye = d.m.matmul(&d.m_inv);
        prop_assert!(eye.max_abs_diff(&CMatrix::identity(n)) < 1e-9 * d.condition.max(1.0));
    }

    #[test]
    fn grid_weights_cover_the_sphere(n_theta in 1usize..200, n_phi in 1usize..64, theta in 0.0..3.1f64, phi in 0.0..std::f64::consts::TAU) {
        let g = AngularGrid::<f64>::with_pole(unit(theta, phi), n_theta, n_phi).unwrap();
        prop_assert!((g.total_weight() - 4.0 * std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn exact_emission_is_normalized(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = common::rng(seed);
        let atoms = common::random_chain(&mut rng, n, 0.5, 2.5);
        let k = common::random_unit(&mut rng);
        let d = diagonalize(&coupling_fixed(&atoms, k).unwrap()).unwrap();
        prop_assume!(d.rates().unwrap().iter().all(|&g| g > 1e-6));
        let psi = SpinWave::new(common::random_state(&mut rng, n)).unwrap();
        let grid = AngularGrid::new(48, 96).unwrap();
        let dist = angular_distribution_exact(&d, &atoms, k, &psi, &grid).unwrap();
        prop_assert!((dist.total - 1.0).abs() < 1e-6, "total {}", dist.total);
        prop_assert!(dist.values.iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn chain_emission_is_azimuthally_symmetric(n in 2usize..40, ratio in 0.5..6.0f64, mode in -20i64..20) {
        let spec = chain(n, ratio);
        let idx = mode.clamp(*index_range(n).start(), *index_range(n).end());
        let grid = AngularGrid::new(24, 12).unwrap();
        let e = angular_distribution_planewave(&spec, Vec3f64::unit_z(), [0, 0, idx], &grid).unwrap();
        for ring in 0..grid.n_theta() {
            let first = e.distribution.values[grid.index(ring, 0)];
            for k in 1..grid.n_phi() {
                let v = e.distribution.values[grid.index(ring, k)];
                prop_assert!((v - first).abs() <= 1e-9 * first.abs().max(1e-12));
            }
        }
    }

    #[test]
    fn bragg_probabilities_form_a_distribution(n in 10usize..60, ratio in 0.6..6.0f64, mode in -5i64..5) {
        let spec = chain(n, ratio);
        let b = bragg_decompose(&spec, Vec3f64::unit_z(), [0, 0, mode]).unwrap();
        prop_assert!(b.peaks.iter().all(|p| p.probability >= 0.0));
        prop_assert!((b.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn predicted_chain_rates_sum_to_n(n in 2usize..200, ratio in 0.3..20.0f64) {
        let spec = chain(n, ratio);
        let total: f64 = index_range(n).map(|m| predict_1d(&spec, m).unwrap().rate).sum();
        let chi = predict_1d(&spec, 0).unwrap().chi;
        prop_assert!((total - n as f64).abs() <= chi + 1e-9, "{total} vs {n}, χ {chi}");
    }

    #[test]
    fn multiphoton_bound_below_weight(m in 1usize..20, eps in 0.0..=1.0f64) {
        let r = multiphoton_from_epsilon(m, eps).unwrap();
        prop_assert!(r.purity_bound <= r.pure_weight + 1e-15);
        prop_assert!((r.pure_weight - (1.0 - eps).powi(m as i32)).abs() < 1e-14);
    }

    #[test]
    fn ensemble_spectrum_has_two_levels(n in 2usize..40, kl in 1.0..30.0f64) {
        let d = diagonalize(&coupling_ensemble(n, kl).unwrap()).unwrap();
        let beta = 1.0 / (4.0 * kl * kl);
        let v = d.eigenvalues.unwrap();
        prop_assert!((v[0].re - (0.5 + (n as f64 - 1.0) * beta)).abs() < 1e-12);
        prop_assert!(v[1..].iter().all(|z| (z.re - (0.5 - beta)).abs() < 1e-12 && z.im.abs() < 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn ion_chain_is_mirror_symmetric(n in 2usize..25) {
        let c = solve_ion_chain_equilibrium::<f64>(n).unwrap();
        for i in 0..n {
            prop_assert!((c.positions[i] + c.positions[n - 1 - i]).abs() < 1e-9);
        }
        prop_assert!(c.residual <= 1e-10);
    }

    #[test]
    fn slow_motion_average_ignores_thread_count(seed in any::<u64>(), n in 2usize..8) {
        let spec = EnsembleSpec { n, kl_l: 4.0, seed };
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| slow_motion_average(&spec, 64, |a| symmetric_mode_coupling(a, Vec3f64::unit_z())).unwrap())
        };
        let serial = run(1);
        let parallel = run(4);
        prop_assert_eq!(serial.mean.to_bits(), parallel.mean.to_bits());
        prop_assert_eq!(serial.std_error.map(f64::to_bits), parallel.std_error.map(f64::to_bits));
    }
}

#[test]
fn lattice_atoms_are_centered() {
    let spec = LatticeSpec::<f64>::cubic(5, 2.0);
    let atoms = build_lattice(&spec).unwrap();
    let c = atoms
        .positions()
        .iter()
        .fold(Vec3f64::zero(), |acc, &p| acc + p);
    assert!(c.norm() < 1e-12);
}
