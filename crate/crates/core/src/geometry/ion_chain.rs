use super::{AtomArray, Source};
use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

const MAX_ITERATIONS: usize = 200;
const FORCE_TOLERANCE: f64 = 1e-10;

/// Equilibrium of a linear Coulomb crystal in a harmonic trap, in units where
/// the trap and charge constants are one.
#[derive(Debug, Clone, PartialEq)]
pub struct IonChain<T> {
    /// Sorted dimensionless positions.
    pub positions: Vec<T>,
    /// Largest residual force component at the returned configuration.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> IonChain<T> {
    pub fn mean_spacing(&self) -> T {
        let n = self.positions.len();
        if n < 2 {
            return T::zero();
        }
        (self.positions[n - 1] - self.positions[0]) / T::from_count(n - 1)
    }

    /// Places the chain on `axis`, scaled so that the mean spacing is
    /// `mean_spacing` (in units of `1/k_L`).
    pub fn to_atoms(&self, mean_spacing: T, axis: Vec3<T>) -> Result<AtomArray<T>> {
        let axis = axis
            .normalized()
            .ok_or_else(|| Error::InvalidInput("ion chain axis must be a nonzero vector".into()))?;
        if !(mean_spacing > T::zero() && mean_spacing.is_finite()) {
            return Err(Error::InvalidInput(
                "mean spacing must be positive and finite".into(),
            ));
        }
        let scale = mean_spacing / self.mean_spacing();
        AtomArray::new(
            self.positions.iter().map(|&u| axis * (u * scale)).collect(),
            Source::IonChain,
        )
    }
}

fn gradient<T: Real>(u: &[T]) -> Vec<T> {
    let n = u.len();
    (0..n)
        .map(|i| {
            let mut g = u[i];
            for j in 0..n {
                if j != i {
                    let d = u[i] - u[j];
                    g -= d.signum() / (d * d);
                }
            }
            g
        })
        .collect()
}

fn energy<T: Real>(u: &[T]) -> T {
    let mut e = u.iter().map(|&x| x * x).sum::<T>() * T::lit(0.5);
    for i in 0..u.len() {
        for j in i + 1..u.len() {
            e += T::one() / (u[i] - u[j]).abs();
        }
    }
    e
}

fn hessian<T: Real>(u: &[T]) -> Vec<T> {
    let n = u.len();
    let mut h = vec![T::zero(); n * n];
    for i in 0..n {
        h[i * n + i] = T::one();
        for j in 0..n {
            if j != i {
                let c = T::lit(2.0) / (u[i] - u[j]).abs().powi(3);
                h[i * n + i] += c;
                h[i * n + j] = -c;
            }
        }
    }
    h
}

/// Lower-triangular Cholesky factor in place. Fails on a non-positive pivot.
pub(crate) fn cholesky<T: Real>(a: &mut [T], n: usize) -> Result<()> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > T::zero()) {
            return Err(Error::InvalidInput(
                "matrix is not positive definite".into(),
            ));
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    Ok(())
}

fn cholesky_solve<T: Real>(l: &[T], n: usize, b: &mut [T]) {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Minimizes `V = Σ u²/2 + Σ_{i<j} 1/|u_i − u_j|` by damped Newton iteration.
pub fn solve_ion_chain_equilibrium<T: Real>(n: usize) -> Result<IonChain<T>> {
    if n < 2 {
        return Err(Error::InvalidInput(
            "an ion chain needs at least two ions".into(),
        ));
    }
    // empirical length scale of the chain
    let spacing = T::lit(2.018) / T::from_count(n).powf(T::lit(0.559));
    let mid = T::from_count(n - 1) * T::lit(0.5);
    let mut u: Vec<T> = (0..n).map(|i| (T::from_count(i) - mid) * spacing).collect();
    let tol = T::lit(FORCE_TOLERANCE).max(T::epsilon() * T::lit(1e3));

    for iter in 0..MAX_ITERATIONS {
        let g = gradient(&u);
        let res = max_abs(&g);
        if res <= tol {
            let mut h = hessian(&u);
            cholesky(&mut h, n)?;
            return Ok(IonChain {
                positions: u,
                residual: res,
                iterations: iter,
            });
        }
        let mut h = hessian(&u);
        cholesky(&mut h, n)?;
        let mut step: Vec<T> = g.iter().map(|&x| -x).collect();
        cholesky_solve(&h, n, &mut step);

        let e0 = energy(&u);
        let mut t = T::one();
        loop {
            let trial: Vec<T> = u.iter().zip(&step).map(|(&a, &s)| a + s * t).collect();
            let ordered = trial.windows(2).all(|w| w[0] < w[1]);
            // near the minimum the energy change drops below roundoff, so a
            // smaller force also counts as progress
            if ordered && (energy(&trial) <= e0 || max_abs(&gradient(&trial)) < res) {
                u = trial;
                break;
            }
            t *= T::lit(0.5);
            if t < T::lit(1e-12) {
                // energy differences are below resolution; accept the full step
                u = u.iter().zip(&step).map(|(&a, &s)| a + s).collect();
                break;
            }
        }
    }
    Err(Error::NoConvergence {
        what: "ion chain Newton iteration",
        iterations: MAX_ITERATIONS,
    })
}
