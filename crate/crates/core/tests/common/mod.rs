//! Independent reference computations used as oracles. Nothing here goes
//! through the eigendecomposition or the spherical quadrature of the crate.

#![allow(dead_code)]

use radiant::geometry::{AtomArray, Source};
use radiant::{CMatrix, Complex64, Vec3f64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C = Complex64;

fn zero() -> C {
    C::new(0.0, 0.0)
}

fn mat_mul(a: &[C], b: &[C], n: usize) -> Vec<C> {
    let mut out = vec![zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// `e^{A}` by scaling and squaring of a degree-18 Taylor polynomial.
pub fn expm(a: &CMatrix<f64>) -> Vec<C> {
    let n = a.rows();
    let flat: Vec<C> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    let norm = (0..n)
        .map(|i| (0..n).map(|j| flat[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = 0.5_f64.powi(squarings as i32);
    let scaled: Vec<C> = flat.iter().map(|z| z * scale).collect();
    let mut result = vec![zero(); n * n];
    let mut term = vec![zero(); n * n];
    for i in 0..n {
        result[i * n + i] = C::new(1.0, 0.0);
        term[i * n + i] = C::new(1.0, 0.0);
    }
    for k in 1..=18 {
        term = mat_mul(&term, &scaled, n);
        let inv = 1.0 / k as f64;
        for t in &mut term {
            *t *= inv;
        }
        for (r, t) in result.iter_mut().zip(&term) {
            *r += t;
        }
    }
    for _ in 0..squarings {
        result = mat_mul(&result, &result, n);
    }
    result
}

pub fn apply(m: &[C], v: &[C]) -> Vec<C> {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).fold(zero(), |acc, j| acc + m[i * n + j] * v[j]))
        .collect()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<C>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].norm().total_cmp(&a[j * n + col].norm()))
            .unwrap();
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        assert!(d.norm() > 1e-300, "singular system");
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f == zero() {
                continue;
            }
            for k in col..n {
                let t = a[col * n + k];
                a[row * n + k] -= f * t;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = vec![zero(); n];
    for row in (0..n).rev() {
        let s = (row + 1..n).fold(b[row], |acc, k| acc - a[row * n + k] * x[k]);
        x[row] = s / a[row * n + row];
    }
    x
}

/// Time-integrated intensity `(1/4π) ∫₀^∞ |Σ_l e^{-i(u−k̂)·r_l} (e^{-Jt}ψ)_l|² dt`
/// through the Gramian `Y = ∫ e^{-Jt}ψψ†e^{-J†t} dt`, which solves
/// `J Y + Y J† = ψψ†`.
pub struct GramianIntensity {
    positions: Vec<Vec3f64>,
    k_dir: Vec3f64,
    gram: Vec<C>,
}

impl GramianIntensity {
    pub fn new(j: &CMatrix<f64>, atoms: &AtomArray<f64>, k_dir: Vec3f64, psi: &[C]) -> Self {
        let n = psi.len();
        let nn = n * n;
        // vec(J Y + Y J†) with row-major vec: (J ⊗ I + I ⊗ conj(J)) vec Y
        let mut big = vec![zero(); nn * nn];
        for a in 0..n {
            for b in 0..n {
                let row = a * n + b;
                for c in 0..n {
                    big[row * nn + c * n + b] += j[(a, c)];
                    big[row * nn + a * n + c] += j[(b, c)].conj();
                }
            }
        }
        let rhs: Vec<C> = (0..nn).map(|k| psi[k / n] * psi[k % n].conj()).collect();
        let gram = solve(big, rhs);
        Self {
            positions: atoms.positions().to_vec(),
            k_dir: k_dir.normalized().unwrap(),
            gram,
        }
    }

    pub fn at(&self, u: Vec3f64) -> f64 {
        let n = self.positions.len();
        let q = u - self.k_dir;
        let s: Vec<C> = self
            .positions
            .iter()
            .map(|r| C::from_polar(1.0, -q.dot(*r)))
            .collect();
        let mut total = zero();
        for a in 0..n {
            for b in 0..n {
                total += s[a] * self.gram[a * n + b] * s[b].conj();
            }
        }
        total.re / (4.0 * std::f64::consts::PI)
    }
}

/// Uniform midpoint rule in `(θ, φ)` about the z axis, weights `sin θ dθ dφ`.
pub fn riemann_integral(n_theta: usize, n_phi: usize, f: impl Fn(Vec3f64) -> f64 + Sync) -> f64 {
    use rayon::prelude::*;
    let dt = std::f64::consts::PI / n_theta as f64;
    let dp = 2.0 * std::f64::consts::PI / n_phi as f64;
    let rings: Vec<f64> = (0..n_theta)
        .into_par_iter()
        .map(|i| {
            let t = (i as f64 + 0.5) * dt;
            let (st, ct) = t.sin_cos();
            let s: f64 = (0..n_phi)
                .map(|k| {
                    let p = (k as f64 + 0.5) * dp;
                    f(Vec3f64::new(st * p.cos(), st * p.sin(), ct))
                })
                .sum();
            s * st * dt * dp
        })
        .collect();
    rings.iter().sum()
}

/// Chain along z with random gaps in `[min_gap, max_gap]` and a small random
/// transverse offset per atom.
pub fn random_chain(rng: &mut ChaCha8Rng, n: usize, min_gap: f64, max_gap: f64) -> AtomArray<f64> {
    let mut z = 0.0;
    let positions = (0..n)
        .map(|_| {
            z += rng.random_range(min_gap..max_gap);
            Vec3f64::new(
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
                z,
            )
        })
        .collect();
    AtomArray::new(positions, Source::File).unwrap()
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Vec3f64 {
    loop {
        let v = Vec3f64::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let r = v.norm();
        if r > 0.1 && r <= 1.0 {
            return v * (1.0 / r);
        }
    }
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    let v: Vec<C> = (0..n)
        .map(|_| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
