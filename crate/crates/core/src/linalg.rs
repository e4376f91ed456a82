//! Small dense symmetric eigenproblems and the singular-value helpers built
//! on them. Sizes here are a handful of rows, so cyclic Jacobi is plenty.

use crate::scalar::Scalar;

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.at(i, j));
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a == S::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.at(i, j) + a * other.at(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// `MᵀM`.
    pub fn gram(&self) -> Self {
        self.transpose().mul(self)
    }

    pub fn frobenius(&self) -> S {
        self.data.iter().map(|&v| v * v).sum::<S>().sqrt()
    }
}

/// Eigen-decomposition of a symmetric matrix: eigenvalues in descending order
/// and the matching eigenvectors as columns.
pub fn sym_eigen<S: Scalar>(a: &Mat<S>) -> (Vec<S>, Mat<S>) {
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        v.set(i, i, S::one());
    }
    let two = S::of(2.0);
    for _sweep in 0..100 {
        let mut off = S::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + m.at(i, j) * m.at(i, j);
            }
        }
        let scale: S = m.data.iter().map(|&x| x * x).sum();
        if off <= S::epsilon() * S::epsilon() * scale || off == S::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.at(p, q);
                if apq == S::zero() {
                    continue;
                }
                let theta = (m.at(q, q) - m.at(p, p)) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + S::one()).sqrt());
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m.at(k, p);
                    let akq = m.at(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.at(p, k);
                    let aqk = m.at(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.at(k, p);
                    let vkq = v.at(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.at(j, j).partial_cmp(&m.at(i, i)).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| m.at(i, i)).collect();
    let mut vecs = Mat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        for k in 0..n {
            vecs.set(k, col, v.at(k, i));
        }
    }
    (values, vecs)
}

/// Largest singular value.
pub fn spectral_norm<S: Scalar>(a: &Mat<S>) -> S {
    if a.rows == 0 || a.cols == 0 {
        return S::zero();
    }
    let g = if a.cols <= a.rows { a.gram() } else { a.transpose().gram() };
    let (vals, _) = sym_eigen(&g);
    vals[0].max(S::zero()).sqrt()
}

/// Top singular triplet `(σ, u, v)` with `A v = σ u`.
pub fn top_singular<S: Scalar>(a: &Mat<S>) -> (S, Vec<S>, Vec<S>) {
    let (vals, vecs) = sym_eigen(&a.gram());
    let sigma = vals[0].max(S::zero()).sqrt();
    let v: Vec<S> = (0..a.cols).map(|k| vecs.at(k, 0)).collect();
    let mut u: Vec<S> = (0..a.rows)
        .map(|i| (0..a.cols).map(|j| a.at(i, j) * v[j]).sum())
        .collect();
    let nu = u.iter().map(|&x| x * x).sum::<S>().sqrt();
    if nu > S::zero() {
        u.iter_mut().for_each(|x| *x = *x / nu);
    } else {
        u = vec![S::zero(); a.rows];
        u[0] = S::one();
    }
    (sigma, u, v)
}

/// Sum of singular values together with the polar factor `Q = A (AᵀA)^{+1/2}`,
/// the maximizer of `⟨Q, A⟩` over the operator-norm unit ball.
pub fn nuclear_with_polar<S: Scalar>(a: &Mat<S>) -> (S, Mat<S>) {
    let (vals, vecs) = sym_eigen(&a.gram());
    let top = vals.first().copied().unwrap_or(S::zero()).max(S::zero());
    let cutoff = top * S::epsilon() * S::of(1e4);
    let mut nuclear = S::zero();
    // (AᵀA)^{+1/2} = Σ λ^{-1/2} v vᵀ over the numerically nonzero spectrum.
    let mut inv_sqrt = Mat::zeros(a.cols, a.cols);
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= cutoff || lam <= S::zero() {
            continue;
        }
        let s = lam.sqrt();
        nuclear = nuclear + s;
        for i in 0..a.cols {
            for j in 0..a.cols {
                let w = inv_sqrt.at(i, j) + vecs.at(i, k) * vecs.at(j, k) / s;
                inv_sqrt.set(i, j, w);
            }
        }
    }
    (nuclear, a.mul(&inv_sqrt))
}
