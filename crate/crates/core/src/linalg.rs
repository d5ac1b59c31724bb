//! Small dense complex linear algebra: the pieces the combiner design needs
//! and nothing more. Matrices are column-major.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{lit, Cpx, Real};

/// `a^H b`.
pub fn dot<T: Real>(a: &[Cpx<T>], b: &[Cpx<T>]) -> Cpx<T> {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Complex::zero(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm_sqr<T: Real>(a: &[Cpx<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn norm<T: Real>(a: &[Cpx<T>]) -> T {
    norm_sqr(a).sqrt()
}

pub fn scale<T: Real>(a: &[Cpx<T>], s: Cpx<T>) -> Vec<Cpx<T>> {
    a.iter().map(|x| x * s).collect()
}

/// `a - (b^H a) b` for unit-norm `b`.
pub fn remove_component<T: Real>(a: &mut [Cpx<T>], unit: &[Cpx<T>]) {
    let c = dot(unit, a);
    for (x, u) in a.iter_mut().zip(unit) {
        *x = *x - u * c;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cpx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Builds a matrix whose columns are the given equal-length vectors.
    pub fn from_columns<V: AsRef<[Cpx<T>]>>(rows: usize, columns: &[V]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            let c = c.as_ref();
            assert_eq!(c.len(), rows, "column length mismatch");
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[Cpx<T>] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [Cpx<T>] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Cpx<T>]> {
        self.data.chunks(self.rows.max(1)).take(self.cols)
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[Cpx<T>]) -> Vec<Cpx<T>> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![Complex::zero(); self.rows];
        for (j, xj) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.col(j)) {
                *o = *o + a * xj;
            }
        }
        out
    }

    /// `A^H x`.
    pub fn adjoint_mul_vec(&self, x: &[Cpx<T>]) -> Vec<Cpx<T>> {
        assert_eq!(x.len(), self.rows);
        self.columns().map(|c| dot(c, x)).collect()
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let cols: Vec<Vec<Cpx<T>>> = other.columns().map(|c| self.mul_vec(c)).collect();
        Self::from_columns(self.rows, &cols)
    }

    /// `A^H B`.
    pub fn adjoint_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let cols: Vec<Vec<Cpx<T>>> = other.columns().map(|c| self.adjoint_mul_vec(c)).collect();
        Self::from_columns(self.cols, &cols)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Gauss-Jordan inverse with partial pivoting. `None` when a pivot vanishes.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .fold((k, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag <= T::zero() || !pmag.is_finite() {
                return None;
            }
            if p != k {
                a.swap_rows(p, k);
                inv.swap_rows(p, k);
            }
            let piv = a[(k, k)].inv();
            for j in 0..n {
                a[(k, j)] = a[(k, j)] * piv;
                inv[(k, j)] = inv[(k, j)] * piv;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let akj = a[(k, j)];
                    let ikj = inv[(k, j)];
                    a[(i, j)] = a[(i, j)] - f * akj;
                    inv[(i, j)] = inv[(i, j)] - f * ikj;
                }
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(j * self.rows + a, j * self.rows + b);
        }
    }

    /// Singular values in descending order (one-sided Jacobi).
    pub fn singular_values(&self) -> Vec<T> {
        let mut cols: Vec<Vec<Cpx<T>>> = self.columns().map(|c| c.to_vec()).collect();
        let n = cols.len();
        let eps = T::epsilon();
        for _sweep in 0..60 {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let alpha = norm_sqr(&cols[p]);
                    let beta = norm_sqr(&cols[q]);
                    let gamma = dot(&cols[p], &cols[q]);
                    let g = gamma.norm();
                    if g <= eps * (alpha * beta).sqrt() || g == T::zero() {
                        continue;
                    }
                    rotated = true;
                    // rotate against e^{-i phi} a_q so the coupling is real
                    let phase = (gamma / g).conj();
                    let zeta = (beta - alpha) / (lit::<T>(2.0) * g);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = c * t;
                    for i in 0..cols[p].len() {
                        let ap = cols[p][i];
                        let aq = cols[q][i] * phase;
                        cols[p][i] = ap * c - aq * s;
                        cols[q][i] = ap * s + aq * c;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<T> = cols.iter().map(|c| norm(c)).collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        sv
    }

    /// 2-norm condition number; infinite for rank-deficient input.
    pub fn condition_number(&self) -> T {
        let sv = self.singular_values();
        match (sv.first(), sv.last()) {
            (Some(&max), Some(&min)) if min > T::zero() => max / min,
            _ => T::infinity(),
        }
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Cpx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cpx<T> {
        &self.data[j * self.rows + i]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cpx<T> {
        &mut self.data[j * self.rows + i]
    }
}

/// Solves the symmetric positive definite system `a x = b` in place by
/// Cholesky factorisation (`a` is row-major `n x n`). Returns `false` if `a`
/// is not numerically positive definite.
pub fn cholesky_solve<T: Real>(a: &mut [T], b: &mut [T], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d = d - a[j * n + k] * a[j * n + k];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s = s - a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s = s - a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s = s - a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}
