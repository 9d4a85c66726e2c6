//! Parameter sweeps: one row per grid point, evaluated in parallel and
//! collated by index.

use std::fmt::Write as _;

use rayon::prelude::*;

use radiant::coupling::coupling_fixed;
use radiant::csv::fmt_num;
use radiant::emission::{
    angular_distribution_exact, angular_distribution_planewave, beam_width, bragg_decompose,
    lattice_grid, predict_1d, predict_3d,
};
use radiant::ensemble::{
    ensemble_angular, ensemble_grid, mixed_photon_state, purity, symmetric_mode_coupling,
};
use radiant::geometry::Dimensionality;
use radiant::modes::diagonalize;
use radiant::modes::SpinWave;
use radiant::quadrature::AngularGrid;

use crate::config::{Geometry, Observable, Parameter, RunConfig};
use crate::error::CliError;
use crate::output::OutputDir;
use crate::run::{angular_grid, build_atoms, k_dir, lattice_spec};

type Result<T> = std::result::Result<T, CliError>;

/// Grid points in lexicographic order of their index tuples.
pub fn grid_points(axes: &[(Parameter, Vec<f64>)]) -> Vec<Vec<(Parameter, f64)>> {
    let mut points = vec![Vec::new()];
    for (name, values) in axes {
        points = points
            .into_iter()
            .flat_map(|p: Vec<(Parameter, f64)>| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push((*name, v));
                    q
                })
            })
            .collect();
    }
    points
}

fn apply(cfg: &RunConfig, point: &[(Parameter, f64)]) -> RunConfig {
    let mut c = cfg.clone();
    for &(name, v) in point {
        match name {
            Parameter::LambdaOverD => {
                let p = c.physics.get_or_insert(crate::config::Physics {
                    lambda_over_d: None,
                    k_dir: [0.0, 0.0, 1.0],
                    mode: None,
                    gamma_bar: None,
                    length: None,
                    omega_l: None,
                });
                p.lambda_over_d = Some(v);
            }
            Parameter::N => {
                let count = v as usize;
                if let Some(g) = &mut c.geometry {
                    match g {
                        Geometry::Chain { n }
                        | Geometry::Cubic { n }
                        | Geometry::IonChain { n }
                        | Geometry::Cloud { n, .. } => *n = count,
                        Geometry::Positions { .. } => {}
                    }
                }
                if let Some(e) = &mut c.ensemble {
                    e.n = Some(count);
                    e.chi_en = None;
                }
            }
            Parameter::KlL => {
                if let Some(Geometry::Cloud { kl_l, .. }) = &mut c.geometry {
                    *kl_l = v;
                }
                if let Some(e) = &mut c.ensemble {
                    e.kl_l = v;
                }
            }
            Parameter::ChiEn => {
                if let Some(e) = &mut c.ensemble {
                    e.chi_en = Some(v);
                    e.n = None;
                }
            }
        }
    }
    c
}

fn lattice_point(cfg: &RunConfig, seed: u64, observables: &[Observable]) -> Result<Vec<f64>> {
    let k = k_dir(cfg)?;
    let mode = cfg
        .physics()
        .and_then(|p| p.mode)
        .map_or([0, 0, 0], |m| m.as_array());
    match lattice_spec(cfg)? {
        Some(spec) => {
            let needs_bragg = observables
                .iter()
                .any(|o| matches!(o, Observable::Rate0 | Observable::P0 | Observable::Escape));
            let b = if needs_bragg {
                Some(bragg_decompose(&spec, k, mode)?)
            } else {
                None
            };
            let p0 = || {
                b.as_ref()
                    .and_then(|b| b.peak([0, 0, 0]))
                    .map_or(0.0, |p| p.probability)
            };
            observables
                .iter()
                .map(|o| {
                    Ok(match o {
                        Observable::Rate0 => b.as_ref().expect("computed above").rate,
                        Observable::P0 => p0(),
                        Observable::Escape => 1.0 - p0(),
                        Observable::Chi => match spec.dims {
                            Dimensionality::One => predict_1d(&spec, mode[2])?.chi,
                            Dimensionality::Three => predict_3d(&spec, k, [0, 0, 0])?
                                .map(|p| p.chi)
                                .unwrap_or(f64::NAN),
                        },
                        Observable::Fwhm => {
                            let grid = lattice_grid(&spec, k)?;
                            beam_width(
                                &angular_distribution_planewave(&spec, k, mode, &grid)?
                                    .distribution,
                            )?
                        }
                        Observable::Purity | Observable::Epsilon => {
                            unreachable!("rejected by validation")
                        }
                    })
                })
                .collect()
        }
        None => {
            let atoms = build_atoms(cfg, seed)?;
            observables
                .iter()
                .map(|o| {
                    Ok(match o {
                        Observable::Rate0 => 2.0 * symmetric_mode_coupling(&atoms, k)?,
                        Observable::Fwhm => {
                            let d = diagonalize(&coupling_fixed(&atoms, k)?)?;
                            let grid = angular_grid(cfg, k)?;
                            let psi = SpinWave::uniform(atoms.len())?;
                            beam_width(&angular_distribution_exact(&d, &atoms, k, &psi, &grid)?)?
                        }
                        _ => unreachable!("rejected by validation"),
                    })
                })
                .collect()
        }
    }
}

fn ensemble_point(cfg: &RunConfig, observables: &[Observable]) -> Result<Vec<f64>> {
    let e = cfg.ensemble()?;
    let k = k_dir(cfg)?;
    let grid = match &cfg.grid {
        Some(g) => AngularGrid::with_pole(k, g.n_theta, g.n_phi)?,
        None => ensemble_grid(e.kl_l, k)?,
    };
    let state = mixed_photon_state(e.atom_count()?, e.kl_l, &grid)?;
    observables
        .iter()
        .map(|o| {
            Ok(match o {
                Observable::Rate0 => 1.0 + state.chi,
                Observable::Escape | Observable::Epsilon => state.epsilon,
                Observable::Chi => state.chi,
                Observable::Purity => purity(&state)?.numeric,
                Observable::Fwhm => beam_width(&ensemble_angular(&state, &grid)?.coherent)?,
                Observable::P0 => unreachable!("rejected by validation"),
            })
        })
        .collect()
}

fn evaluate(cfg: &RunConfig, seed: u64, observables: &[Observable]) -> Result<Vec<f64>> {
    if cfg.geometry.is_some() {
        lattice_point(cfg, seed, observables)
    } else {
        ensemble_point(cfg, observables)
    }
}

fn format_axis(name: Parameter, v: f64) -> String {
    if name == Parameter::N {
        format!("{}", v as usize)
    } else {
        fmt_num(v)
    }
}

pub fn sweep(cfg: &RunConfig, seed: u64, out: &mut OutputDir) -> Result<String> {
    let block = cfg.sweep.as_ref().expect("validated sweep");
    let axes: Vec<(Parameter, Vec<f64>)> = block
        .axes
        .iter()
        .map(|a| (a.name, a.values.clone()))
        .collect();
    let points = grid_points(&axes);
    log::info!("sweep over {} points", points.len());
    let results: Vec<Result<Vec<f64>>> = points
        .par_iter()
        .map(|p| apply(cfg, p))
        .map(|c| {
            c.validate()
                .and_then(|_| evaluate(&c, seed, &block.observables))
        })
        .collect();

    let mut text = String::new();
    let header: Vec<&str> = axes
        .iter()
        .map(|(n, _)| n.as_str())
        .chain(block.observables.iter().map(|o| o.as_str()))
        .chain(std::iter::once("error"))
        .collect();
    let _ = writeln!(text, "{}", header.join(","));
    let mut failed = 0;
    for (point, result) in points.iter().zip(results) {
        let mut cells: Vec<String> = point.iter().map(|&(n, v)| format_axis(n, v)).collect();
        match result {
            Ok(values) => {
                cells.extend(values.into_iter().map(fmt_num));
                cells.push(String::new());
            }
            Err(e) => {
                failed += 1;
                log::warn!("sweep point {point:?} failed: {e}");
                cells.extend(block.observables.iter().map(|_| fmt_num(f64::NAN)));
                cells.push(e.to_string().replace([',', '\n', '\r'], ";"));
            }
        }
        let _ = writeln!(text, "{}", cells.join(","));
    }
    if failed > 0 {
        log::warn!("{failed} of {} sweep points failed", points.len());
    }
    out.write("sweep.csv", text.as_bytes())?;
    Ok("sweep.csv".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_follow_axis_order() {
        let axes = vec![
            (Parameter::N, vec![2.0, 1.0]),
            (Parameter::KlL, vec![5.0, 3.0, 4.0]),
        ];
        let pts = grid_points(&axes);
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![(Parameter::N, 2.0), (Parameter::KlL, 5.0)]);
        assert_eq!(pts[1], vec![(Parameter::N, 2.0), (Parameter::KlL, 3.0)]);
        assert_eq!(pts[3], vec![(Parameter::N, 1.0), (Parameter::KlL, 5.0)]);
    }
}
