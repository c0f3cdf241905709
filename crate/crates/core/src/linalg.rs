//! Small dense symmetric eigensolvers.

use crate::scalar::Scalar;

/// Eigenpairs of a symmetric matrix, eigenvalues in non-increasing order.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    /// Row-major `n x n`; column `j` is the eigenvector for `values[j]`.
    pub vectors: Vec<T>,
    pub n: usize,
    pub sweeps: usize,
}

impl<T: Scalar> SymmetricEigen<T> {
    pub fn vector(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self.vectors[i * self.n + j]).collect()
    }
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition of a symmetric row-major `n x n` matrix.
///
/// Rotations sweep the strict upper triangle in row order until the
/// off-diagonal mass is negligible relative to the matrix norm. The
/// sequence of operations depends only on the input, so results are
/// bit-reproducible. Ties between equal eigenvalues keep the lower
/// diagonal position first.
pub fn jacobi_eigen<T: Scalar>(matrix: &[T], n: usize) -> SymmetricEigen<T> {
    assert_eq!(matrix.len(), n * n, "matrix must be n x n");
    let mut a = matrix.to_vec();
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let total: T = a.iter().map(|&x| x * x).sum();
    let tol = T::epsilon() * T::epsilon() * total;
    let two = T::lit(2.0);

    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        let off: T = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        if off <= tol || off == T::zero() {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (two * apq);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = T::zero();
                a[q * n + p] = T::zero();
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .expect("finite eigenvalues")
            .then(i.cmp(&j))
    });
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + new_col] = v[r * n + old_col];
        }
    }
    SymmetricEigen {
        values,
        vectors,
        n,
        sweeps,
    }
}

/// Closed-form eigendecomposition of `[[a, b], [b, c]]`.
///
/// Returns `(major, minor, angle)` where `angle` is the direction of the
/// major eigenvector folded into `[0, pi)`. An isotropic matrix reports
/// angle 0.
pub fn symmetric_eigen_2x2<T: Scalar>(a: T, b: T, c: T) -> (T, T, T) {
    let two = T::lit(2.0);
    let mean = (a + c) / two;
    let half_diff = (a - c) / two;
    let radius = half_diff.hypot(b);
    let mut angle = (two * b).atan2(a - c) / two;
    if angle < T::zero() {
        angle += T::PI();
    }
    if angle >= T::PI() {
        angle -= T::PI();
    }
    (mean + radius, mean - radius, angle)
}
