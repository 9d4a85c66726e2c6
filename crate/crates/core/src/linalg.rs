//! Minimal dense linear algebra: 3-vectors and complex square matrices.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{cabs1, Complex, Real};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn unit_y() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self * (T::one() / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Angle between two directions, robust near 0 and π.
    pub fn angle_to(self, o: Self) -> T {
        self.cross(o).norm().atan2(self.dot(o))
    }

    /// Two unit vectors completing `self` (assumed unit) to a right-handed frame.
    pub fn orthonormal_frame(self) -> (Self, Self) {
        let helper = if self.x.abs() < T::lit(0.9) {
            Self::unit_x()
        } else {
            Self::unit_y()
        };
        let e1 = (helper - self * self.dot(helper))
            .normalized()
            .expect("helper axis is never parallel");
        let e2 = self.cross(e1);
        (e1, e2)
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Complex<T>,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[Complex<T>]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other[(k, j)];
                    out[(i, j)] += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| {
                        acc + a * b
                    })
            })
            .collect()
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
            acc + self[(i, i)]
        })
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (&a, &b)| m.max((a - b).norm()))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// Induced 1-norm (maximum column sum).
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Inverse by LU factorization with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::InvalidInput("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = self.max_abs().max(T::min_positive_value());
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, cabs1(lu[(i, k)])))
                    .fold(
                        (k, T::zero()),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pivot <= T::epsilon() * T::from_count(n) * scale * T::lit(1e-4) {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let inv_pivot = Complex::new(T::one(), T::zero()) / lu[(k, k)];
            for i in k + 1..n {
                let factor = lu[(i, k)] * inv_pivot;
                lu[(i, k)] = factor;
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= factor * u;
                }
            }
        }
        let mut inv = Self::zeros(n, n);
        let mut col = vec![Complex::new(T::zero(), T::zero()); n];
        for j in 0..n {
            for (i, c) in col.iter_mut().enumerate() {
                *c = if perm[i] == j {
                    Complex::new(T::one(), T::zero())
                } else {
                    Complex::new(T::zero(), T::zero())
                };
            }
            for i in 0..n {
                let mut s = col[i];
                for k in 0..i {
                    s -= lu[(i, k)] * col[k];
                }
                col[i] = s;
            }
            for i in (0..n).rev() {
                let mut s = col[i];
                for k in i + 1..n {
                    s -= lu[(i, k)] * col[k];
                }
                col[i] = s / lu[(i, i)];
            }
            inv.set_column(j, &col);
        }
        Ok(inv)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn inverse_of_small_complex_matrix() {
        let a = CMatrix::from_fn(3, 3, |i, j| {
            c(
                (i * 3 + j) as f64 + if i == j { 4.0 } else { 0.0 },
                (i as f64) - (j as f64) * 0.5,
            )
        });
        let inv = a.inverse().unwrap();
        let prod = a.matmul(&inv);
        assert!(prod.max_abs_diff(&CMatrix::identity(3)) < 1e-13);
    }

    #[test]
    fn inverse_needs_pivoting() {
        let a = CMatrix::from_fn(2, 2, |i, j| if i == j { c(0.0, 0.0) } else { c(1.0, 1.0) });
        let inv = a.inverse().unwrap();
        assert!(a.matmul(&inv).max_abs_diff(&CMatrix::identity(2)) < 1e-15);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = CMatrix::from_fn(2, 2, |_, _| c(1.0, 0.0));
        assert!(matches!(a.inverse(), Err(Error::Singular)));
    }

    #[test]
    fn frame_is_orthonormal() {
        for axis in [Vec3::unit_z(), Vec3::new(0.6, 0.0, 0.8), Vec3::unit_x()] {
            let (e1, e2) = axis.orthonormal_frame();
            assert!((e1.norm() - 1.0_f64).abs() < 1e-15);
            assert!(
                e1.dot(axis).abs() < 1e-15
                    && e2.dot(axis).abs() < 1e-15
                    && e1.dot(e2).abs() < 1e-15
            );
            assert!((e1.cross(e2) - axis).norm() < 1e-15);
        }
    }

    #[test]
    fn angle_between_opposite_vectors_is_pi() {
        let a: Vec3<f64> = Vec3::unit_z();
        assert!((a.angle_to(-a) - std::f64::consts::PI).abs() < 1e-15);
        assert_eq!(a.angle_to(a), 0.0);
    }
}
