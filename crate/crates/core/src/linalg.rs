//! Dense vector and small symmetric-matrix helpers.
//!
//! Vectors are plain `Vec<T>` / `&[T]`; matrices are row-major square buffers
//! wrapped in [`SymMatrix`]. Dimensions in this crate are small (tens at most),
//! so nothing here tries to be cache-clever.

use crate::scalar::Real;

#[inline]
pub fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[inline]
pub fn norm_sq<T: Real>(a: &[T]) -> T {
    dot(a, a)
}

#[inline]
pub fn norm<T: Real>(a: &[T]) -> T {
    norm_sq(a).sqrt()
}

pub fn dist_sq<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
}

#[inline]
pub fn dist<T: Real>(a: &[T], b: &[T]) -> T {
    dist_sq(a, b).sqrt()
}

pub fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

pub fn scale<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}

/// `y += alpha * x`
#[inline]
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

pub fn basis<T: Real>(dim: usize, axis: usize) -> Vec<T> {
    let mut e = vec![T::zero(); dim];
    e[axis] = T::one();
    e
}

/// Arithmetic mean of equally sized rows. Returns `None` on an empty input.
pub fn mean_rows<T: Real>(rows: &[Vec<T>]) -> Option<Vec<T>> {
    let first = rows.first()?;
    let mut acc = vec![T::zero(); first.len()];
    for r in rows {
        axpy(T::one(), r, &mut acc);
    }
    let n = T::count(rows.len());
    Some(acc.into_iter().map(|v| v / n).collect())
}

/// Weighted mean; weights need not be normalised but must have positive sum.
pub fn weighted_mean<T: Real>(rows: &[Vec<T>], weights: &[T]) -> Vec<T> {
    let dim = rows.first().map_or(0, Vec::len);
    let total: T = weights.iter().copied().sum();
    let mut acc = vec![T::zero(); dim];
    for (r, &w) in rows.iter().zip(weights) {
        axpy(w, r, &mut acc);
    }
    acc.into_iter().map(|v| v / total).collect()
}

/// Square symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds from nested rows. Returns `None` when the rows are not square.
    pub fn from_rows(rows: &[Vec<T>]) -> Option<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return None;
        }
        Some(Self {
            dim,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data
            .chunks(self.dim.max(1))
            .map(<[T]>::to_vec)
            .collect()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.dim + j] = v;
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        (0..self.dim)
            .map(|i| dot(&self.data[i * self.dim..(i + 1) * self.dim], v))
            .collect()
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Weighted covariance of `rows` around `center`, normalised by the weight sum.
    pub fn weighted_covariance(rows: &[Vec<T>], weights: &[T], center: &[T]) -> Self {
        let dim = center.len();
        let mut m = Self::zeros(dim);
        let total: T = weights.iter().copied().sum();
        for (r, &w) in rows.iter().zip(weights) {
            if w == T::zero() {
                continue;
            }
            let c = sub(r, center);
            for i in 0..dim {
                for j in i..dim {
                    let v = m.get(i, j) + w * c[i] * c[j];
                    m.set(i, j, v);
                }
            }
        }
        for i in 0..dim {
            for j in i..dim {
                let v = m.get(i, j) / total;
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    /// Eigenvalues by cyclic Jacobi rotations, ascending.
    pub fn eigenvalues(&self) -> Vec<T> {
        let n = self.dim;
        let mut a = self.clone();
        let tol = T::epsilon() * T::lit(1e-2);
        for _sweep in 0..100 {
            let mut off = T::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off + a.get(i, j) * a.get(i, j);
                }
            }
            let scale = a.data.iter().fold(T::zero(), |s, &v| s + v * v);
            if off <= tol * scale || off == T::zero() {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a.get(p, q);
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a.get(q, q) - a.get(p, p)) / (T::lit(2.0) * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..n {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut ev: Vec<T> = (0..n).map(|i| a.get(i, i)).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    /// Lower-triangular factor `F` with `F F^T = self` for a PSD matrix.
    ///
    /// Pivots at or below `tol` are treated as zero, which keeps the factor
    /// usable for singular covariances.
    pub fn psd_cholesky(&self, tol: T) -> Vec<Vec<T>> {
        let n = self.dim;
        let mut f = vec![vec![T::zero(); n]; n];
        for j in 0..n {
            let mut d = self.get(j, j);
            for k in 0..j {
                d = d - f[j][k] * f[j][k];
            }
            if d <= tol {
                continue;
            }
            let root = d.sqrt();
            f[j][j] = root;
            for i in (j + 1)..n {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s = s - f[i][k] * f[j][k];
                }
                f[i][j] = s / root;
            }
        }
        f
    }

    /// Leading eigenpair by power iteration.
    ///
    /// The start vector mixes the axis of the largest diagonal entry with a
    /// small all-ones component so it is never orthogonal to the dominant
    /// direction for generic inputs.
    pub fn top_eigenpair(&self, steps: usize) -> (T, Vec<T>) {
        let n = self.dim;
        if n == 0 {
            return (T::zero(), Vec::new());
        }
        let axis = (0..n)
            .max_by(|&i, &j| {
                self.get(i, i)
                    .partial_cmp(&self.get(j, j))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(0);
        let mut v = vec![T::lit(0.1) / T::count(n).sqrt(); n];
        v[axis] = v[axis] + T::one();
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x = *x / nv);
        for _ in 0..steps {
            let w = self.mul_vec(&v);
            let nw = norm(&w);
            if nw == T::zero() {
                return (T::zero(), v);
            }
            v = w.into_iter().map(|x| x / nw).collect();
        }
        let lambda = dot(&v, &self.mul_vec(&v));
        (lambda, v)
    }
}
