//! Dense eigendecomposition of general complex matrices.
//!
//! The pipeline is the classical one: diagonal balancing, Householder
//! reduction to upper Hessenberg form, single-shift complex QR iteration to a
//! Schur form `A = Z T Z^H`, then eigenvectors of the triangular factor by
//! back substitution, mapped back through `Z` and the balancing scale.

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cabs1, Complex, Real};

/// Eigenvalues and unit-norm right eigenvectors (matrix columns), in the
/// order they deflated from the Schur form.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<Complex<T>>,
    pub vectors: CMatrix<T>,
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

pub fn eigen<T: Real>(a: &CMatrix<T>) -> Result<Eigen<T>> {
    if !a.is_square() {
        return Err(Error::InvalidInput(
            "eigendecomposition of a non-square matrix".into(),
        ));
    }
    if !a.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = a.rows();
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let mut h = a.clone();
    let scale = balance(&mut h);
    let mut z = hessenberg(&mut h);
    schur(&mut h, &mut z)?;
    let values: Vec<Complex<T>> = (0..n).map(|i| h[(i, i)]).collect();
    let x = triangular_eigenvectors(&h);
    let mut vectors = z.matmul(&x);
    for i in 0..n {
        for j in 0..n {
            vectors[(i, j)] *= scale[i];
        }
    }
    for j in 0..n {
        let mut col = vectors.column(j);
        normalize_with_phase(&mut col);
        vectors.set_column(j, &col);
    }
    Ok(Eigen { values, vectors })
}

/// Scales `v` to unit 2-norm and rotates its phase so the first component of
/// largest modulus is real and positive.
pub(crate) fn normalize_with_phase<T: Real>(v: &mut [Complex<T>]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    if norm == T::zero() {
        return;
    }
    let tol = T::lit(1e-9);
    let big = v.iter().fold(T::zero(), |m, z| m.max(z.norm()));
    let pivot = v
        .iter()
        .find(|z| z.norm() >= big * (T::one() - tol))
        .copied()
        .unwrap_or(v[0]);
    let phase = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z = *z * phase / norm;
    }
}

/// Parlett–Reinsch balancing by powers of two. Overwrites `a` with
/// `D^{-1} A D` and returns the diagonal of `D`.
fn balance<T: Real>(a: &mut CMatrix<T>) -> Vec<T> {
    let n = a.rows();
    let radix = T::lit(2.0);
    let sqrdx = radix * radix;
    let mut scale = vec![T::one(); n];
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c = T::zero();
            let mut r = T::zero();
            for j in 0..n {
                if j != i {
                    c += cabs1(a[(j, i)]);
                    r += cabs1(a[(i, j)]);
                }
            }
            if c == T::zero() || r == T::zero() {
                continue;
            }
            let s = c + r;
            let mut f = T::one();
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < T::lit(0.95) * s {
                converged = false;
                let g = T::one() / f;
                scale[i] *= f;
                for j in 0..n {
                    a[(i, j)] *= g;
                    a[(j, i)] *= f;
                }
            }
        }
        if converged {
            return scale;
        }
    }
}

/// Householder reduction to upper Hessenberg form. Returns the accumulated
/// unitary `Q` with `A = Q H Q^H`.
fn hessenberg<T: Real>(h: &mut CMatrix<T>) -> CMatrix<T> {
    let n = h.rows();
    let mut q = CMatrix::identity(n);
    let zero = Complex::new(T::zero(), T::zero());
    let two = T::lit(2.0);
    for k in 0..n.saturating_sub(2) {
        let tail_norm = (k + 2..n).map(|i| h[(i, k)].norm_sqr()).sum::<T>();
        if tail_norm == T::zero() {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let norm_x = (tail_norm + x0.norm_sqr()).sqrt();
        let phase = if x0.norm() > T::zero() {
            x0 / x0.norm()
        } else {
            Complex::new(T::one(), T::zero())
        };
        let alpha = -phase * norm_x;
        let mut v = vec![zero; n];
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = h[(i, k)];
        }
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- P H, P = I - 2 v v^H
        for j in k..n {
            let s = (k + 1..n).fold(zero, |acc, i| acc + v[i].conj() * h[(i, j)]);
            for i in k + 1..n {
                h[(i, j)] -= v[i] * s * two;
            }
        }
        // H <- H P, Q <- Q P
        for m in [&mut *h, &mut q] {
            for i in 0..n {
                let s = (k + 1..n).fold(zero, |acc, j| acc + m[(i, j)] * v[j]);
                for j in k + 1..n {
                    m[(i, j)] -= s * v[j].conj() * two;
                }
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = zero;
        }
    }
    q
}

/// Plane rotation `[c s; -conj(s) c]` that zeroes `b` in `(a, b)`.
fn givens<T: Real>(a: Complex<T>, b: Complex<T>) -> (T, Complex<T>) {
    let na = a.norm();
    let nb = b.norm();
    if nb == T::zero() {
        return (T::one(), Complex::new(T::zero(), T::zero()));
    }
    if na == T::zero() {
        return (T::zero(), Complex::new(T::one(), T::zero()));
    }
    let r = na.hypot(nb);
    let c = na / r;
    let s = (a / na) * b.conj() / r;
    (c, s)
}

/// Shifted QR iteration on an upper Hessenberg matrix. On return `h` holds the
/// upper triangular Schur factor and `z` the accumulated Schur vectors.
fn schur<T: Real>(h: &mut CMatrix<T>, z: &mut CMatrix<T>) -> Result<()> {
    let n = h.rows();
    let eps = T::epsilon();
    let zero = Complex::new(T::zero(), T::zero());
    let anorm = h.max_abs().max(T::min_positive_value());
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let budget = MAX_SWEEPS_PER_EIGENVALUE * n.max(1);
    let mut rotations: Vec<(T, Complex<T>)> = Vec::with_capacity(n);

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = cabs1(h[(l - 1, l - 1)]) + cabs1(h[(l, l)]);
            if s == T::zero() {
                s = anorm;
            }
            if cabs1(h[(l, l - 1)]) <= eps * s {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE || total > budget {
            return Err(Error::NoConvergence {
                what: "complex QR iteration",
                iterations: total,
            });
        }

        let mu = if iter.is_multiple_of(10) {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex::new(cabs1(h[(hi, hi - 1)]) * T::lit(1.5), T::zero())
        } else {
            let a = h[(hi - 1, hi - 1)];
            let b = h[(hi - 1, hi)];
            let c = h[(hi, hi - 1)];
            let d = h[(hi, hi)];
            let half = T::lit(0.5);
            let tr = (a + d) * half;
            let diff = (a - d) * half;
            let disc = (diff * diff + b * c).sqrt();
            let (m1, m2) = (tr + disc, tr - disc);
            if (m1 - d).norm() <= (m2 - d).norm() {
                m1
            } else {
                m2
            }
        };

        for k in l..=hi {
            h[(k, k)] -= mu;
        }
        rotations.clear();
        for k in l..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = zero;
            rotations.push((c, s));
        }
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let k = l + offset;
            for i in 0..=(k + 1) {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * c + q * s.conj();
                h[(i, k + 1)] = -p * s + q * c;
            }
            for i in 0..n {
                let p = z[(i, k)];
                let q = z[(i, k + 1)];
                z[(i, k)] = p * c + q * s.conj();
                z[(i, k + 1)] = -p * s + q * c;
            }
        }
        for k in l..=hi {
            h[(k, k)] += mu;
        }
    }
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = zero;
        }
    }
    Ok(())
}

/// Right eigenvectors of an upper triangular matrix, one per column, with a
/// unit entry on the diagonal position. Near-equal diagonal entries are kept
/// apart by a small floor on the pivot.
fn triangular_eigenvectors<T: Real>(t: &CMatrix<T>) -> CMatrix<T> {
    let n = t.rows();
    let eps = T::epsilon();
    let smlnum = T::min_positive_value() * T::from_count(n) / eps;
    let zero = Complex::new(T::zero(), T::zero());
    let tnorm = t.max_abs();
    let degenerate = T::lit(1e-10).max(eps * T::lit(1e4));
    let mut x = CMatrix::zeros(n, n);
    let mut col = vec![zero; n];
    for k in 0..n {
        col.iter_mut().for_each(|c| *c = zero);
        col[k] = Complex::new(T::one(), T::zero());
        let lambda = t[(k, k)];
        let smin = (eps * cabs1(lambda)).max(smlnum);
        let mut xmax = T::one();
        for i in (0..k).rev() {
            let s = (i + 1..=k).fold(zero, |acc, j| acc + t[(i, j)] * col[j]);
            let mut d = t[(i, i)] - lambda;
            // a repeated eigenvalue whose row is already satisfied to roundoff
            // leaves x_i free; zero keeps the vector inside the Schur block
            if cabs1(d) < degenerate * T::one().max(cabs1(lambda))
                && cabs1(s) <= T::from_count(n) * eps * tnorm * xmax
            {
                col[i] = zero;
                continue;
            }
            if cabs1(d) < smin {
                d = Complex::new(smin, T::zero());
            }
            col[i] = -s / d;
            xmax = xmax.max(cabs1(col[i]));
        }
        x.set_column(k, &col);
    }
    x
}
