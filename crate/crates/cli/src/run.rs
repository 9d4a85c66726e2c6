//! Single experiments: build the geometry, compute, write the artifacts.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;

use radiant::coupling::coupling_fixed;
use radiant::csv::{fmt_num, KeyValueReport};
use radiant::emission::{
    angular_distribution_exact, beam_width, bragg_decompose, lattice_grid, predict_1d, predict_3d,
    propagation_validity, write_bragg_csv, VALIDITY_THRESHOLD,
};
use radiant::ensemble::{
    ensemble_angular, ensemble_grid, mixed_photon_state, multiphoton_report, purity,
    slow_motion_average, symmetric_mode_coupling,
};
use radiant::geometry::{
    build_lattice, lattice_index_range, lattice_wavevector, read_positions,
    sample_ensemble_positions, solve_ion_chain_equilibrium, wavevector_grid, AtomArray,
    EnsembleSpec, LatticeSpec, RNG_ALGORITHM,
};
use radiant::modes::{diagonalize, label_modes, sum_rule_report, ModeDecomposition, SpinWave};
use radiant::quadrature::AngularGrid;
use radiant::Vec3f64;

use crate::config::{Experiment, Geometry, RunConfig};
use crate::error::CliError;
use crate::output::OutputDir;

type Result<T> = std::result::Result<T, CliError>;

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> radiant::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

pub fn k_dir(cfg: &RunConfig) -> Result<Vec3f64> {
    let k = cfg.physics().map_or([0.0, 0.0, 1.0], |p| p.k_dir);
    Vec3f64::from_array(k)
        .normalized()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::Config("physics.k_dir must be a nonzero finite vector".into()))
}

fn mode_index(cfg: &RunConfig) -> [i64; 3] {
    cfg.physics()
        .and_then(|p| p.mode)
        .map_or([0, 0, 0], |m| m.as_array())
}

pub fn lattice_spec(cfg: &RunConfig) -> Result<Option<LatticeSpec<f64>>> {
    let spec = match cfg.geometry()? {
        Geometry::Chain { n } => LatticeSpec::chain(
            *n,
            LatticeSpec::<f64>::spacing_from_wavelength_ratio(cfg.lambda_over_d()?),
        ),
        Geometry::Cubic { n } => LatticeSpec::cubic(
            *n,
            LatticeSpec::<f64>::spacing_from_wavelength_ratio(cfg.lambda_over_d()?),
        ),
        _ => return Ok(None),
    };
    spec.validate()?;
    Ok(Some(spec))
}

pub fn build_atoms(cfg: &RunConfig, seed: u64) -> Result<AtomArray<f64>> {
    Ok(match cfg.geometry()? {
        Geometry::Chain { .. } | Geometry::Cubic { .. } => {
            build_lattice(&lattice_spec(cfg)?.expect("lattice geometry"))?
        }
        Geometry::IonChain { n } => {
            let spacing = LatticeSpec::<f64>::spacing_from_wavelength_ratio(cfg.lambda_over_d()?);
            solve_ion_chain_equilibrium::<f64>(*n)?.to_atoms(spacing, Vec3f64::unit_z())?
        }
        Geometry::Cloud { n, kl_l } => sample_ensemble_positions(&EnsembleSpec {
            n: *n,
            kl_l: *kl_l,
            seed,
        })?,
        Geometry::Positions { path } => {
            let f = File::open(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            read_positions(BufReader::new(f))?
        }
    })
}

/// Explicit `[grid]` resolutions, otherwise a grid adapted to the geometry.
pub fn angular_grid(cfg: &RunConfig, k: Vec3f64) -> Result<AngularGrid<f64>> {
    let geometry = cfg.geometry()?;
    let on_axis = matches!(geometry, Geometry::Chain { .. } | Geometry::IonChain { .. });
    let pole = if on_axis { Vec3f64::unit_z() } else { k };
    if let Some(g) = &cfg.grid {
        return Ok(AngularGrid::with_pole(pole, g.n_theta, g.n_phi)?);
    }
    if let Some(spec) = lattice_spec(cfg)? {
        return Ok(lattice_grid(&spec, k)?);
    }
    if let Geometry::IonChain { n } = geometry {
        let spacing = LatticeSpec::<f64>::spacing_from_wavelength_ratio(cfg.lambda_over_d()?);
        let width = std::f64::consts::TAU / (spacing * *n as f64);
        let n_theta = ((10.0 * std::f64::consts::PI / width).ceil() as usize).max(64);
        return Ok(AngularGrid::with_pole(pole, n_theta, 4)?);
    }
    Ok(AngularGrid::with_pole(pole, 64, 128)?)
}

fn spin_wave(cfg: &RunConfig, atoms: &AtomArray<f64>) -> Result<SpinWave<f64>> {
    let mode = cfg.physics().and_then(|p| p.mode);
    match (mode, lattice_spec(cfg)?) {
        (None, _) => Ok(SpinWave::uniform(atoms.len())?),
        (Some(m), Some(spec)) => Ok(SpinWave::plane_wave(
            atoms,
            lattice_wavevector(&spec, m.as_array()),
        )?),
        (Some(_), None) => Err(CliError::Config(
            "physics.mode needs a chain or cubic geometry".into(),
        )),
    }
}

fn modes_of(atoms: &AtomArray<f64>, k: Vec3f64) -> Result<ModeDecomposition<f64>> {
    Ok(diagonalize(&coupling_fixed(atoms, k)?)?)
}

fn geometry_name(g: &Geometry) -> &'static str {
    match g {
        Geometry::Chain { .. } => "chain",
        Geometry::Cubic { .. } => "cubic",
        Geometry::IonChain { .. } => "ion_chain",
        Geometry::Cloud { .. } => "cloud",
        Geometry::Positions { .. } => "positions",
    }
}

fn rates(cfg: &RunConfig, seed: u64, out: &mut OutputDir) -> Result<String> {
    let atoms = build_atoms(cfg, seed)?;
    let k = k_dir(cfg)?;
    let d = modes_of(&atoms, k)?;
    let labels = match lattice_spec(cfg)? {
        Some(spec) => {
            let grid = wavevector_grid(&spec)?;
            let idx = label_modes(&d, &atoms, &grid)?;
            Some(
                idx.iter()
                    .map(|&i| grid.label(i, spec.dims))
                    .collect::<Vec<_>>(),
            )
        }
        None => None,
    };
    let table = csv_bytes(|b| d.write_mode_table(labels.as_deref(), b))?;
    out.write("modes.csv", &table)?;
    let s = sum_rule_report(&d)?;
    let mut r = KeyValueReport::new();
    r.push("geometry", geometry_name(cfg.geometry()?))
        .push("N", atoms.len())
        .push_num("sum_rate", s.sum_rates)
        .push_num("sum_shift", s.sum_shifts)
        .push_num("rate_residual", s.rate_residual)
        .push_num("shift_residual", s.shift_residual)
        .push_num("condition", d.condition)
        .push("seed", seed);
    out.write("summary.txt", &csv_bytes(|b| r.write(b))?)?;
    Ok("modes.csv".into())
}

fn angular(cfg: &RunConfig, seed: u64, out: &mut OutputDir) -> Result<String> {
    let atoms = build_atoms(cfg, seed)?;
    let k = k_dir(cfg)?;
    let d = modes_of(&atoms, k)?;
    let psi = spin_wave(cfg, &atoms)?;
    let grid = angular_grid(cfg, k)?;
    let dist = angular_distribution_exact(&d, &atoms, k, &psi, &grid)?;
    out.write("angular.csv", &csv_bytes(|b| dist.write_csv(b))?)?;
    let mut r = KeyValueReport::new();
    r.push("geometry", geometry_name(cfg.geometry()?))
        .push("N", atoms.len())
        .push("nodes", grid.len());
    r.push_num("total", dist.total);
    match beam_width(&dist) {
        Ok(w) => r.push_num("fwhm", w),
        Err(_) => r.push("fwhm", "none"),
    };
    r.push("seed", seed);
    out.write("summary.txt", &csv_bytes(|b| r.write(b))?)?;
    Ok("angular.csv".into())
}

fn bragg(cfg: &RunConfig, out: &mut OutputDir) -> Result<String> {
    let spec = lattice_spec(cfg)?.expect("validated lattice");
    let b = bragg_decompose(&spec, k_dir(cfg)?, mode_index(cfg))?;
    out.write("bragg.csv", &csv_bytes(|w| write_bragg_csv(&b.peaks, w))?)?;
    let mut r = KeyValueReport::new();
    r.push("N", spec.num_atoms())
        .push_num("rate", b.rate)
        .push_num("coverage", b.coverage)
        .push_num("total_probability", b.total_probability());
    out.write("summary.txt", &csv_bytes(|w| r.write(w))?)?;
    Ok("bragg.csv".into())
}

fn predict1d(cfg: &RunConfig, out: &mut OutputDir) -> Result<String> {
    let spec = lattice_spec(cfg)?.expect("validated chain");
    let mut text = String::from("n,rate,chi,superradiant,beam_width,forward_probability\n");
    let mut total = 0.0;
    for n in lattice_index_range(spec.counts[2]) {
        let p = predict_1d(&spec, n)?;
        total += p.rate;
        let _ = writeln!(
            text,
            "{n},{},{},{},{},{}",
            fmt_num(p.rate),
            fmt_num(p.chi),
            u8::from(p.superradiant),
            fmt_num(p.beam_width),
            fmt_num(p.forward_probability)
        );
    }
    let _ = writeln!(text, "# sum_rate={}", fmt_num(total));
    out.write("predict1d.csv", text.as_bytes())?;
    Ok("predict1d.csv".into())
}

fn predict3d(cfg: &RunConfig, out: &mut OutputDir) -> Result<String> {
    let spec = lattice_spec(cfg)?.expect("validated cube");
    let n = mode_index(cfg);
    let p = predict_3d(&spec, k_dir(cfg)?, n)?;
    let mut text = String::from(
        "n1,n2,n3,predicted,superradiant,rate,chi,m1,m2,m3,ux,uy,uz,beam_width,escape\n",
    );
    let nan = fmt_num(f64::NAN);
    let _ = write!(text, "{},{},{},", n[0], n[1], n[2]);
    match p {
        Some(p) => {
            let m = p.m_c.map_or_else(
                || vec![nan.clone(); 3],
                |m| m.iter().map(|x| x.to_string()).collect(),
            );
            let u = p.direction.map_or_else(
                || vec![nan.clone(); 3],
                |u| u.to_array().iter().map(|&x| fmt_num(x)).collect(),
            );
            let _ = writeln!(
                text,
                "1,{},{},{},{},{},{},{}",
                u8::from(p.superradiant),
                fmt_num(p.rate),
                fmt_num(p.chi),
                m.join(","),
                u.join(","),
                fmt_num(p.beam_width),
                p.escape.map_or_else(|| nan.clone(), fmt_num)
            );
        }
        None => {
            let _ = writeln!(text, "0,{}", vec![nan; 11].join(","));
        }
    }
    out.write("predict3d.csv", text.as_bytes())?;
    Ok("predict3d.csv".into())
}

fn ensemble(cfg: &RunConfig, seed: u64, out: &mut OutputDir) -> Result<String> {
    let e = cfg.ensemble()?;
    let n = e.atom_count()?;
    let k = k_dir(cfg)?;
    let grid = match &cfg.grid {
        Some(g) => AngularGrid::with_pole(k, g.n_theta, g.n_phi)?,
        None => ensemble_grid(e.kl_l, k)?,
    };
    let state = mixed_photon_state(n, e.kl_l, &grid)?;
    let ang = ensemble_angular(&state, &grid)?;
    let mut text = String::from("theta,phi,weight,coherent,incoherent\n");
    for ((node, &c), &i) in grid
        .nodes()
        .iter()
        .zip(&ang.coherent.values)
        .zip(&ang.incoherent.values)
    {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            fmt_num(node.theta),
            fmt_num(node.phi),
            fmt_num(node.weight),
            fmt_num(c),
            fmt_num(i)
        );
    }
    out.write("ensemble_angular.csv", text.as_bytes())?;

    let p = purity(&state)?;
    let mut r = state.report(Some(seed));
    r.push_num("escape", ang.escape)
        .push_num("coherent_weight", ang.coherent.total)
        .push_num("purity_formula", p.formula)
        .push_num("purity_numeric", p.numeric)
        .push_num("incoherent_trace_formula", p.incoherent_trace_formula)
        .push_num("incoherent_trace", p.incoherent_trace)
        .push_num("cross_term", p.cross_term)
        .push_num("cross_bound", p.cross_bound)
        .push_num("grid_change", p.grid_change);
    match beam_width(&ang.coherent) {
        Ok(w) => r.push_num("coherent_fwhm", w),
        Err(_) => r.push("coherent_fwhm", "none"),
    };
    if let Some(m) = e.photons {
        let mp = multiphoton_report(m, n, state.chi)?;
        r.push("photons", m)
            .push_num("pure_weight", mp.pure_weight)
            .push_num("purity_bound", mp.purity_bound);
    }
    if let Some(samples) = e.samples {
        let spec = EnsembleSpec {
            n,
            kl_l: e.kl_l,
            seed,
        };
        let est = slow_motion_average(&spec, samples, |atoms| symmetric_mode_coupling(atoms, k))?;
        r.push("samples", samples)
            .push_num("frozen_j0_mean", est.mean)
            .push(
                "frozen_j0_std_error",
                est.std_error.map_or_else(|| "none".to_string(), fmt_num),
            )
            .push("samples_failed", est.failures)
            .push("rng", RNG_ALGORITHM);
    }
    out.write("ensemble.txt", &csv_bytes(|b| r.write(b))?)?;
    Ok("ensemble_angular.csv".into())
}

fn validate(cfg: &RunConfig, seed: u64, out: &mut OutputDir) -> Result<String> {
    let p = cfg.physics().expect("validated physics");
    let atoms = build_atoms(cfg, seed)?;
    let d = modes_of(&atoms, k_dir(cfg)?)?;
    let v = propagation_validity(
        &d,
        p.gamma_bar.expect("validated"),
        p.length.expect("validated"),
        p.omega_l,
    )?;
    let rates = d.rates().expect("numeric modes carry eigenvalues");
    let mut text = String::from("mode,rate,ratio\n");
    for (i, (g, rho)) in rates.iter().zip(&v.ratios).enumerate() {
        let _ = writeln!(text, "{i},{},{}", fmt_num(*g), fmt_num(*rho));
    }
    out.write("validity.csv", text.as_bytes())?;
    let mut r = KeyValueReport::new();
    r.push("flag", if v.valid { "valid" } else { "invalid" })
        .push_num("max_ratio", v.max_ratio)
        .push(
            "shift_ratio",
            v.shift_ratio.map_or_else(|| "none".to_string(), fmt_num),
        )
        .push_num("threshold", VALIDITY_THRESHOLD)
        .push_num("gamma_bar", p.gamma_bar.expect("validated"))
        .push_num("length", p.length.expect("validated"));
    out.write("validity.txt", &csv_bytes(|b| r.write(b))?)?;
    Ok("validity.csv".into())
}

/// Runs the configured experiment and returns the name of its primary CSV.
pub fn run(cfg: &RunConfig, seed: u64, out: &mut OutputDir) -> Result<String> {
    match cfg.experiment {
        Experiment::Rates => rates(cfg, seed, out),
        Experiment::Angular => angular(cfg, seed, out),
        Experiment::Bragg => bragg(cfg, out),
        Experiment::Predict1d => predict1d(cfg, out),
        Experiment::Predict3d => predict3d(cfg, out),
        Experiment::Ensemble => ensemble(cfg, seed, out),
        Experiment::Validate => validate(cfg, seed, out),
        Experiment::Sweep => crate::sweep::sweep(cfg, seed, out),
    }
}
