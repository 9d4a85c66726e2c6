//! Spin-wave eigenmodes of the coupling matrix.
//!
//! `J = M diag(J_n) M⁻¹`. The columns of `M` are the spin-wave modes; the
//! collective rate and shift of mode `n` are `Γ_n = 2 Re J_n` and
//! `Δ_n = 2 Im J_n` (units of `Γ̄`).

use std::io::Write;

use log::warn;

use crate::coupling::CouplingMatrix;
use crate::eigen::{eigen, normalize_with_phase};
use crate::error::{Error, Result};
use crate::geometry::{build_lattice, AtomArray, LatticeSpec, WavevectorGrid};
use crate::linalg::{CMatrix, Vec3};
use crate::scalar::{Complex, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionKind {
    AnalyticPlaneWave,
    Numeric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition<T> {
    /// Modes as columns.
    pub m: CMatrix<T>,
    pub m_inv: CMatrix<T>,
    /// `J_n`; absent for the analytic plane-wave basis until rates are supplied.
    pub eigenvalues: Option<Vec<Complex<T>>>,
    pub kind: DecompositionKind,
    /// 1-norm condition estimate of `M`.
    pub condition: T,
}

impl<T: Real> ModeDecomposition<T> {
    pub fn len(&self) -> usize {
        self.m.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.m.cols() == 0
    }

    pub fn eigenvalue(&self, n: usize) -> Option<Complex<T>> {
        self.eigenvalues.as_ref().and_then(|v| v.get(n).copied())
    }

    pub fn rates(&self) -> Option<Vec<T>> {
        self.eigenvalues
            .as_ref()
            .map(|v| v.iter().map(|z| z.re * T::lit(2.0)).collect())
    }

    pub fn shifts(&self) -> Option<Vec<T>> {
        self.eigenvalues
            .as_ref()
            .map(|v| v.iter().map(|z| z.im * T::lit(2.0)).collect())
    }

    /// Attaches eigenvalues obtained elsewhere, for instance predicted rates.
    pub fn with_eigenvalues(mut self, values: Vec<Complex<T>>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::InvalidInput(
                "one eigenvalue per mode is required".into(),
            ));
        }
        self.eigenvalues = Some(values);
        Ok(self)
    }

    /// `M diag(e^{-J_n t}) M⁻¹ v`.
    pub fn evolve(&self, v: &[Complex<T>], t: T) -> Result<Vec<Complex<T>>> {
        let values = self
            .eigenvalues
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("decomposition has no eigenvalues".into()))?;
        let c = self.m_inv.matvec(v);
        let scaled: Vec<Complex<T>> = c
            .iter()
            .zip(values)
            .map(|(&c, &j)| c * (-j * t).exp())
            .collect();
        Ok(self.m.matvec(&scaled))
    }

    /// Writes `n_label,re_J,im_J,rate,shift`, one row per mode in decomposition
    /// order, followed by a `#` footer with the rate and shift sums.
    pub fn write_mode_table<W: Write>(&self, labels: Option<&[String]>, mut out: W) -> Result<()> {
        let values = self
            .eigenvalues
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("decomposition has no eigenvalues".into()))?;
        writeln!(out, "n_label,re_J,im_J,rate,shift")?;
        for (n, z) in values.iter().enumerate() {
            let label = labels.map_or_else(|| n.to_string(), |l| l[n].clone());
            writeln!(
                out,
                "{label},{:.16e},{:.16e},{:.16e},{:.16e}",
                z.re.as_f64(),
                z.im.as_f64(),
                2.0 * z.re.as_f64(),
                2.0 * z.im.as_f64()
            )?;
        }
        let report = sum_rule_report(self)?;
        writeln!(
            out,
            "# sum_rate={:.16e} sum_shift={:.16e}",
            report.sum_rates.as_f64(),
            report.sum_shifts.as_f64()
        )?;
        Ok(())
    }
}

fn degeneracy_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e4))
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut r = i;
    while parent[r] != r {
        r = parent[r];
    }
    let mut i = i;
    while parent[i] != r {
        let next = parent[i];
        parent[i] = r;
        i = next;
    }
    r
}

/// Groups eigenvalues closer than the degeneracy tolerance.
fn clusters<T: Real>(values: &[Complex<T>]) -> Vec<Vec<usize>> {
    let n = values.len();
    let tol = degeneracy_tolerance::<T>();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            let scale = T::one().max(values[i].norm()).max(values[j].norm());
            if (values[i] - values[j]).norm() <= tol * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if root_slot[r] == usize::MAX {
            root_slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_slot[r]].push(i);
    }
    groups
}

/// Modified Gram–Schmidt on a set of columns.
fn orthonormalize<T: Real>(cols: &mut [Vec<Complex<T>>]) {
    for k in 0..cols.len() {
        for p in 0..k {
            let (done, rest) = cols.split_at_mut(k);
            let q = &done[p];
            let v = &mut rest[0];
            let dot = q
                .iter()
                .zip(v.iter())
                .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| {
                    acc + a.conj() * b
                });
            for (x, &y) in v.iter_mut().zip(q) {
                *x -= dot * y;
            }
        }
        normalize_with_phase(&mut cols[k]);
    }
}

pub fn diagonalize<T: Real>(j: &CouplingMatrix<T>) -> Result<ModeDecomposition<T>> {
    diagonalize_matrix(&j.entries)
}

/// Eigendecomposition with modes sorted by descending rate, then ascending
/// shift, then original index. Degenerate modes are orthonormalized.
pub fn diagonalize_matrix<T: Real>(j: &CMatrix<T>) -> Result<ModeDecomposition<T>> {
    let n = j.rows();
    if n == 0 || !j.is_square() {
        return Err(Error::InvalidInput(
            "coupling matrix must be square and nonempty".into(),
        ));
    }
    let e = eigen(j)?;
    let mut groups = clusters(&e.values);
    for g in &mut groups {
        g.sort_unstable();
    }
    // rates equal to within the degeneracy tolerance count as ties
    let quantum = degeneracy_tolerance::<T>();
    let rate_key = |g: &Vec<usize>| (e.values[g[0]].re / quantum).round();
    groups.sort_by(|a, b| {
        let (za, zb) = (e.values[a[0]], e.values[b[0]]);
        rate_key(b)
            .total_cmp_real(&rate_key(a))
            .then(za.im.total_cmp_real(&zb.im))
            .then(a[0].cmp(&b[0]))
    });

    let mut values = Vec::with_capacity(n);
    let mut m = CMatrix::zeros(n, n);
    let mut col = 0;
    for g in &groups {
        let mut vecs: Vec<Vec<Complex<T>>> = g.iter().map(|&i| e.vectors.column(i)).collect();
        if vecs.len() > 1 {
            orthonormalize(&mut vecs);
        }
        for (&i, v) in g.iter().zip(&vecs) {
            values.push(e.values[i]);
            m.set_column(col, v);
            col += 1;
        }
    }

    let m_inv = m.inverse()?;
    let condition = m.norm_one() * m_inv.norm_one();
    if T::one() / condition < T::lit(1e-6) {
        warn!("mode matrix is close to defective (condition estimate {condition:e})");
    }

    let tol = T::check_tolerance();
    let scale = T::one().max(j.max_abs());
    let nn = T::from_count(n);
    let mut residual = T::zero();
    let jm = j.matmul(&m);
    for c in 0..n {
        for r in 0..n {
            residual = residual.max((jm[(r, c)] - m[(r, c)] * values[c]).norm());
        }
    }
    if residual > tol * nn * scale {
        return Err(Error::Inaccurate {
            what: "eigenvector",
            residual: residual.as_f64(),
            tolerance: (tol * nn * scale).as_f64(),
        });
    }
    let inv_residual = m.matmul(&m_inv).max_abs_diff(&CMatrix::identity(n));
    let inv_tol = (tol * T::lit(0.1)).max(condition * T::epsilon() * nn);
    if inv_residual > inv_tol {
        return Err(Error::Inaccurate {
            what: "mode inverse",
            residual: inv_residual.as_f64(),
            tolerance: inv_tol.as_f64(),
        });
    }
    Ok(ModeDecomposition {
        m,
        m_inv,
        eigenvalues: Some(values),
        kind: DecompositionKind::Numeric,
        condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRuleReport<T> {
    pub sum_rates: T,
    pub sum_shifts: T,
    /// `|ΣΓ_n − N| / N`.
    pub rate_residual: T,
    /// `|ΣΔ_n| / N`.
    pub shift_residual: T,
}

pub fn sum_rule_report<T: Real>(d: &ModeDecomposition<T>) -> Result<SumRuleReport<T>> {
    let rates = d
        .rates()
        .ok_or_else(|| Error::InvalidInput("decomposition has no eigenvalues".into()))?;
    let shifts = d.shifts().expect("rates and shifts come together");
    let n = T::from_count(d.len());
    let sum_rates = crate::scalar::pairwise_sum(&rates);
    let sum_shifts = crate::scalar::pairwise_sum(&shifts);
    Ok(SumRuleReport {
        sum_rates,
        sum_shifts,
        rate_residual: (sum_rates - n).abs() / n,
        shift_residual: sum_shifts.abs() / n,
    })
}

/// Discrete Fourier modes `M_jn = e^{i K_n·r_j}/√N` of a lattice, in the order
/// of [`crate::geometry::wavevector_grid`].
pub fn planewave_decomposition<T: Real>(spec: &LatticeSpec<T>) -> Result<ModeDecomposition<T>> {
    let atoms = build_lattice(spec)?;
    let grid = crate::geometry::wavevector_grid(spec)?;
    let n = atoms.len();
    let norm = T::one() / T::from_count(n).sqrt();
    let pos = atoms.positions();
    let m = CMatrix::from_fn(n, n, |j, col| {
        Complex::from_polar(norm, grid.vectors[col].dot(pos[j]))
    });
    let m_inv = m.conj_transpose();
    Ok(ModeDecomposition {
        m,
        m_inv,
        eigenvalues: None,
        kind: DecompositionKind::AnalyticPlaneWave,
        condition: T::one(),
    })
}

/// Overlap of each mode with every plane wave; returns, per mode, the index
/// into `grid` of the largest Fourier component. Near-ties go to the smaller
/// `|n|`, then to the earlier grid entry.
pub fn label_modes<T: Real>(
    d: &ModeDecomposition<T>,
    atoms: &AtomArray<T>,
    grid: &WavevectorGrid<T>,
) -> Result<Vec<usize>> {
    let n = d.m.rows();
    if atoms.len() != n {
        return Err(Error::InvalidInput(
            "atom count differs from mode dimension".into(),
        ));
    }
    let pos = atoms.positions();
    let waves: Vec<Vec<Complex<T>>> = grid
        .vectors
        .iter()
        .map(|k| {
            pos.iter()
                .map(|r| Complex::from_polar(T::one(), -k.dot(*r)))
                .collect()
        })
        .collect();
    let norm2 = |idx: [i64; 3]| idx.iter().map(|&x| x * x).sum::<i64>();
    let tie = T::lit(1e-9);
    let labels = (0..d.len())
        .map(|mode| {
            let col = d.m.column(mode);
            let mut best = 0usize;
            let mut best_val = T::neg_infinity();
            for (g, w) in waves.iter().enumerate() {
                let ov = w
                    .iter()
                    .zip(&col)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| {
                        acc + a * b
                    })
                    .norm();
                let better = ov > best_val * (T::one() + tie)
                    || (ov >= best_val * (T::one() - tie)
                        && norm2(grid.indices[g]) < norm2(grid.indices[best]));
                if better {
                    best = g;
                    best_val = ov;
                }
            }
            best
        })
        .collect();
    Ok(labels)
}

/// Normalized single-excitation amplitudes over the atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinWave<T> {
    pub coefficients: Vec<Complex<T>>,
    /// Norm of the raw vector before normalization.
    pub normalization: T,
    pub mode: Option<usize>,
}

impl<T: Real> SpinWave<T> {
    pub fn new(raw: Vec<Complex<T>>) -> Result<Self> {
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if !(norm > T::zero() && norm.is_finite()) {
            return Err(Error::InvalidInput(
                "spin wave must have a finite nonzero norm".into(),
            ));
        }
        Ok(Self {
            coefficients: raw.into_iter().map(|z| z / norm).collect(),
            normalization: norm,
            mode: None,
        })
    }

    /// The completely symmetric state `Σ_j b_j⁺ |0⟩ / √N`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![Complex::new(T::one(), T::zero()); n])
    }

    /// `e^{i K·r_j}/√N`.
    pub fn plane_wave(atoms: &AtomArray<T>, k: Vec3<T>) -> Result<Self> {
        Self::new(
            atoms
                .positions()
                .iter()
                .map(|r| Complex::from_polar(T::one(), k.dot(*r)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

pub fn spinwave_state<T: Real>(d: &ModeDecomposition<T>, n: usize) -> Result<SpinWave<T>> {
    if n >= d.len() {
        return Err(Error::InvalidInput(format!(
            "mode {n} out of range for {} modes",
            d.len()
        )));
    }
    let mut s = SpinWave::new(d.m.column(n))?;
    s.mode = Some(n);
    Ok(s)
}

/// Coherent spin-wave state written by a Raman pulse of area `Ω_AB T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentPreparation<T> {
    pub alpha: T,
    pub mean_excitation: T,
    /// `|α|²/N ≤ 0.1`.
    pub low_excitation: bool,
}

pub const LOW_EXCITATION_THRESHOLD: f64 = 0.1;

pub fn prepare_coherent_spinwave<T: Real>(
    pulse_area: T,
    n_atoms: usize,
) -> Result<CoherentPreparation<T>> {
    if !(pulse_area >= T::zero() && pulse_area.is_finite()) {
        return Err(Error::InvalidInput(
            "pulse area must be finite and nonnegative".into(),
        ));
    }
    if n_atoms == 0 {
        return Err(Error::InvalidInput("need at least one atom".into()));
    }
    let alpha = pulse_area * T::lit(0.5);
    let mean = alpha * alpha;
    Ok(CoherentPreparation {
        alpha,
        mean_excitation: mean,
        low_excitation: mean / T::from_count(n_atoms) <= T::lit(LOW_EXCITATION_THRESHOLD),
    })
}
