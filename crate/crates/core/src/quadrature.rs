//! Product quadrature on the unit sphere: Gauss–Legendre in `cos θ` times the
//! trapezoid rule in `φ`, about an arbitrary pole.

use log::{debug, warn};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::{pairwise_sum, Real};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes in descending order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // P_n(z) and P_{n-1}(z) by the three-term recurrence
            let (mut p, mut p_prev) = (1.0, 0.0);
            for k in 1..=n {
                let kf = k as f64;
                let next = ((2.0 * kf - 1.0) * z * p - (kf - 1.0) * p_prev) / kf;
                p_prev = p;
                p = next;
            }
            dp = nf * (z * p - p_prev) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularNode<T> {
    /// Polar angle from the grid pole.
    pub theta: T,
    /// Azimuth about the pole, measured from the first frame vector.
    pub phi: T,
    pub weight: T,
    pub direction: Vec3<T>,
}

/// Spherical product grid. Nodes are stored ring by ring (θ ascending), with
/// `φ_k = 2πk/n_φ` inside each ring.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid<T> {
    pole: Vec3<T>,
    frame: (Vec3<T>, Vec3<T>),
    n_theta: usize,
    n_phi: usize,
    cos_theta: Vec<T>,
    ring_weights: Vec<T>,
    nodes: Vec<AngularNode<T>>,
}

pub const MIN_THETA_NODES: usize = 16;

impl<T: Real> AngularGrid<T> {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self> {
        Self::with_pole(Vec3::unit_z(), n_theta, n_phi)
    }

    pub fn with_pole(pole: Vec3<T>, n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta == 0 || n_phi == 0 {
            return Err(Error::InvalidInput(
                "angular grid needs at least one node per direction".into(),
            ));
        }
        let pole = pole
            .normalized()
            .ok_or_else(|| Error::InvalidInput("grid pole must be a nonzero vector".into()))?;
        let (e1, e2) = pole.orthonormal_frame();
        let (x, w) = gauss_legendre(n_theta);
        let dphi = T::TAU() / T::from_count(n_phi);
        let cos_theta: Vec<T> = x.iter().map(|&c| T::lit(c)).collect();
        let ring_weights: Vec<T> = w.iter().map(|&c| T::lit(c)).collect();
        let mut nodes = Vec::with_capacity(n_theta * n_phi);
        for (&ct, &wt) in cos_theta.iter().zip(&ring_weights) {
            let st = (T::one() - ct * ct).max(T::zero()).sqrt();
            let theta = st.atan2(ct);
            for k in 0..n_phi {
                let phi = dphi * T::from_count(k);
                let (sp, cp) = phi.sin_cos();
                let direction = e1 * (st * cp) + e2 * (st * sp) + pole * ct;
                nodes.push(AngularNode {
                    theta,
                    phi,
                    weight: wt * dphi,
                    direction,
                });
            }
        }
        Ok(Self {
            pole,
            frame: (e1, e2),
            n_theta,
            n_phi,
            cos_theta,
            ring_weights,
            nodes,
        })
    }

    /// Grid on which a beam of angular width `width` spans at least ten
    /// polar nodes.
    pub fn for_beam_width(pole: Vec3<T>, width: T) -> Result<Self> {
        if !(width > T::zero() && width.is_finite()) {
            return Err(Error::InvalidInput(
                "beam width must be positive and finite".into(),
            ));
        }
        let n_theta = (T::PI() * T::lit(10.0) / width)
            .ceil()
            .to_usize()
            .unwrap_or(usize::MAX)
            .max(MIN_THETA_NODES);
        Self::with_pole(pole, n_theta, 2 * n_theta)
    }

    /// Same pole, resolution multiplied by `factor` in both angles.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Self::with_pole(self.pole, self.n_theta * factor, self.n_phi * factor)
    }

    pub fn pole(&self) -> Vec3<T> {
        self.pole
    }

    pub fn frame(&self) -> (Vec3<T>, Vec3<T>) {
        self.frame
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[AngularNode<T>] {
        &self.nodes
    }

    /// `cos θ` of each ring.
    pub fn cos_theta(&self) -> &[T] {
        &self.cos_theta
    }

    /// Gauss–Legendre weight of each ring; they sum to 2.
    pub fn ring_weights(&self) -> &[T] {
        &self.ring_weights
    }

    pub fn index(&self, ring: usize, k: usize) -> usize {
        ring * self.n_phi + k
    }

    pub fn total_weight(&self) -> T {
        let w: Vec<T> = self.nodes.iter().map(|n| n.weight).collect();
        pairwise_sum(&w)
    }

    /// Quadrature of nodal values.
    pub fn integrate(&self, values: &[T]) -> T {
        assert_eq!(values.len(), self.nodes.len());
        let terms: Vec<T> = self
            .nodes
            .iter()
            .zip(values)
            .map(|(n, &v)| n.weight * v)
            .collect();
        pairwise_sum(&terms)
    }

    /// Evaluates `f` at every node in parallel; the result is in node order.
    pub fn map<F>(&self, f: F) -> Vec<T>
    where
        F: Fn(&AngularNode<T>) -> T + Sync + Send,
    {
        self.nodes.par_iter().map(f).collect()
    }

    /// Polar grid spacing near the equator, `π/n_θ`.
    pub fn theta_spacing(&self) -> T {
        T::PI() / T::from_count(self.n_theta)
    }
}

/// Result of [`integrate_adaptive`].
#[derive(Debug, Clone)]
pub struct Adaptive<T> {
    pub grid: AngularGrid<T>,
    pub values: Vec<T>,
    pub total: T,
    pub converged: bool,
}

/// Doubles the grid until the integral changes by less than `tol` (relative
/// to `max(1, |total|)`), or until the node count would exceed `max_nodes`.
pub fn integrate_adaptive<T, F>(
    start: AngularGrid<T>,
    tol: T,
    max_nodes: usize,
    mut f: F,
) -> Result<Adaptive<T>>
where
    T: Real,
    F: FnMut(&AngularGrid<T>) -> Result<Vec<T>>,
{
    let mut grid = start;
    let mut values = f(&grid)?;
    let mut total = grid.integrate(&values);
    loop {
        if grid.len() * 4 > max_nodes {
            warn!(
                "angular quadrature stopped at {} nodes before reaching tolerance",
                grid.len()
            );
            return Ok(Adaptive {
                grid,
                values,
                total,
                converged: false,
            });
        }
        let finer = grid.refined(2)?;
        let v = f(&finer)?;
        let t = finer.integrate(&v);
        let change = (t - total).abs();
        debug!(
            "angular quadrature {} -> {} nodes, change {:e}",
            grid.len(),
            finer.len(),
            change.as_f64()
        );
        grid = finer;
        values = v;
        let done = change < tol * T::one().max(t.abs());
        total = t;
        if done {
            return Ok(Adaptive {
                grid,
                values,
                total,
                converged: true,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let (x, w) = gauss_legendre(n);
            let sum: f64 = w.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n={n}");
            for k in 0..(2 * n) {
                let exact = if k % 2 == 1 {
                    0.0
                } else {
                    2.0 / (k as f64 + 1.0)
                };
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((q - exact).abs() < 1e-13, "n={n} k={k}");
            }
            assert!(x.windows(2).all(|p| p[0] > p[1]));
        }
    }

    #[test]
    fn weights_sum_to_four_pi() {
        for pole in [Vec3::unit_z(), Vec3::new(1.0, 2.0, -0.5)] {
            let g = AngularGrid::<f64>::with_pole(pole, 20, 7).unwrap();
            assert!((g.total_weight() - 4.0 * std::f64::consts::PI).abs() < 1e-10);
            for n in g.nodes() {
                assert!((n.direction.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spherical_harmonics_integrate_exactly() {
        let g = AngularGrid::<f64>::with_pole(Vec3::new(0.3, -0.2, 0.9), 12, 24).unwrap();
        let xy = g.map(|n| n.direction.x * n.direction.y);
        assert!(g.integrate(&xy).abs() < 1e-13);
        let z2 = g.map(|n| n.direction.z * n.direction.z);
        assert!((g.integrate(&z2) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn beam_width_sets_resolution() {
        let g = AngularGrid::<f64>::for_beam_width(Vec3::unit_z(), 0.1).unwrap();
        assert!(g.n_theta() as f64 >= 10.0 * std::f64::consts::PI / 0.1);
        assert_eq!(g.n_phi(), 2 * g.n_theta());
        assert!(AngularGrid::<f64>::for_beam_width(Vec3::unit_z(), 0.0).is_err());
    }

    #[test]
    fn adaptive_doubling_converges() {
        let start = AngularGrid::<f64>::new(4, 8).unwrap();
        let res = integrate_adaptive(start, 1e-6, 1 << 22, |g| {
            Ok(g.map(|n| (-40.0 * (1.0 - n.direction.z)).exp()))
        })
        .unwrap();
        let exact = 2.0 * std::f64::consts::PI * (1.0 - (-80.0f64).exp()) / 40.0;
        assert!(res.converged);
        assert!((res.total - exact).abs() < 1e-6);
    }
}
