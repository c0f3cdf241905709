//! Two-dimensional PCA layout of researcher embeddings.
//!
//! Columns are scaled to unit L2 norm, centered across researchers, and the
//! top two principal directions are recovered exactly from the
//! researcher x researcher Gram matrix (researchers are far fewer than
//! terms). Reported eigenvalues use the 1/(N-1) sample-variance convention.
//!
//! Sign convention: in each component the entry of largest magnitude is
//! positive, ties going to the lowest term index.

use thiserror::Error;

use crate::embed::TfidfModel;
use crate::linalg::jacobi_eigen;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PcaError {
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcaModel<T> {
    /// Per-term mean of the normalized columns that took part in the fit.
    pub mean: Vec<T>,
    pub components: [Vec<T>; 2],
    pub eigenvalues: [T; 2],
    pub explained_variance_ratio: [T; 2],
    pub total_variance: T,
    /// Researchers left out of the fit (zero embeddings by default).
    pub excluded: Vec<bool>,
}

impl<T: Scalar> PcaModel<T> {
    pub fn explained_variance(&self) -> [T; 2] {
        self.explained_variance_ratio
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapLayout<T> {
    pub coords: Vec<[T; 2]>,
}

impl<T: Scalar> MapLayout<T> {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn xs(&self) -> impl Iterator<Item = T> + '_ {
        self.coords.iter().map(|c| c[0])
    }

    pub fn ys(&self) -> impl Iterator<Item = T> + '_ {
        self.coords.iter().map(|c| c[1])
    }
}

pub fn explained_variance<T: Scalar>(model: &PcaModel<T>) -> [T; 2] {
    model.explained_variance()
}

/// Fits on every researcher with a nonzero embedding.
pub fn fit_pca<T: Scalar>(model: &TfidfModel<T>) -> Result<(PcaModel<T>, MapLayout<T>), PcaError> {
    let exclude: Vec<bool> = model.columns().iter().map(|c| c.is_zero()).collect();
    fit_pca_excluding(model, &exclude)
}

/// Fits on the researchers not marked in `exclude`. Zero embeddings are
/// always excluded. Excluded researchers are placed at the layout centroid,
/// which is the origin after centering.
pub fn fit_pca_excluding<T: Scalar>(
    model: &TfidfModel<T>,
    exclude: &[bool],
) -> Result<(PcaModel<T>, MapLayout<T>), PcaError> {
    assert_eq!(exclude.len(), model.n_docs(), "one flag per researcher");
    let excluded: Vec<bool> = model
        .columns()
        .iter()
        .zip(exclude)
        .map(|(c, &x)| x || c.is_zero())
        .collect();
    let n_terms = model.n_terms();
    let usable: Vec<Vec<T>> = model
        .columns()
        .iter()
        .zip(&excluded)
        .filter(|(_, &x)| !x)
        .map(|(c, _)| c.normalized().to_dense(n_terms))
        .collect();
    if usable.len() < 2 {
        return Err(PcaError::DegenerateInput(format!(
            "{} researcher(s) with nonzero embeddings, need at least 2",
            usable.len()
        )));
    }
    let (mut fit, usable_coords) = pca_from_columns(&usable)?;
    let mut coords = Vec::with_capacity(excluded.len());
    let mut it = usable_coords.into_iter();
    for &x in &excluded {
        coords.push(if x {
            [T::zero(), T::zero()]
        } else {
            it.next().expect("one coordinate per usable column")
        });
    }
    fit.excluded = excluded;
    Ok((fit, MapLayout { coords }))
}

/// PCA of dense columns exactly as given (no normalization).
///
/// Returns the model and one coordinate pair per column. `excluded` on the
/// returned model is all false.
pub fn pca_from_columns<T: Scalar>(
    columns: &[Vec<T>],
) -> Result<(PcaModel<T>, Vec<[T; 2]>), PcaError> {
    let n = columns.len();
    if n < 2 {
        return Err(PcaError::DegenerateInput(format!(
            "{n} column(s), need at least 2"
        )));
    }
    let dim = columns[0].len();
    assert!(
        columns.iter().all(|c| c.len() == dim),
        "columns must share a length"
    );
    if dim < 2 {
        return Err(PcaError::DegenerateInput(format!(
            "{dim} term(s), need at least 2 for a planar layout"
        )));
    }

    let count = T::from_count(n as u64);
    let mut mean = vec![T::zero(); dim];
    for col in columns {
        for (m, &x) in mean.iter_mut().zip(col) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= count;
    }
    let centered: Vec<Vec<T>> = columns
        .iter()
        .map(|c| c.iter().zip(&mean).map(|(&x, &m)| x - m).collect())
        .collect();

    let mut gram = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let d = dot(&centered[i], &centered[j]);
            gram[i * n + j] = d;
            gram[j * n + i] = d;
        }
    }
    let trace: T = (0..n).map(|i| gram[i * n + i]).sum();
    let eig = jacobi_eigen(&gram, n);
    let noise = T::from_count(n as u64) * T::epsilon() * trace;

    let mut components: Vec<Vec<T>> = Vec::with_capacity(2);
    let mut gram_values = [T::zero(); 2];
    let mut degenerate = [false; 2];
    for k in 0..2 {
        let lambda = eig
            .values
            .get(k)
            .copied()
            .unwrap_or_else(T::zero)
            .max(T::zero());
        let direction = if lambda > noise {
            let weights = eig.vector(k);
            let mut u = vec![T::zero(); dim];
            for (col, &w) in centered.iter().zip(&weights) {
                for (ui, &x) in u.iter_mut().zip(col) {
                    *ui += w * x;
                }
            }
            let norm = dot(&u, &u).sqrt();
            u.iter_mut().for_each(|x| *x /= norm);
            gram_values[k] = lambda;
            u
        } else {
            degenerate[k] = true;
            orthonormal_complement(&components, dim)
        };
        components.push(fix_sign(direction));
    }

    let coords: Vec<[T; 2]> = centered
        .iter()
        .map(|c| {
            let mut p = [T::zero(); 2];
            for k in 0..2 {
                if !degenerate[k] {
                    p[k] = dot(c, &components[k]);
                }
            }
            p
        })
        .collect();

    let dof = T::from_count(n as u64 - 1);
    let ratio = |v: T| {
        if trace > T::zero() {
            v / trace
        } else {
            T::zero()
        }
    };
    let second = components.pop().expect("two components");
    let first = components.pop().expect("two components");
    Ok((
        PcaModel {
            mean,
            components: [first, second],
            eigenvalues: [gram_values[0] / dof, gram_values[1] / dof],
            explained_variance_ratio: [ratio(gram_values[0]), ratio(gram_values[1])],
            total_variance: trace / dof,
            excluded: vec![false; n],
        },
        coords,
    ))
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Lowest-index basis vector with a substantial residual after projecting
/// out `previous`, orthonormalized.
fn orthonormal_complement<T: Scalar>(previous: &[Vec<T>], dim: usize) -> Vec<T> {
    let half = T::lit(0.5);
    for t in 0..dim {
        let mut r = vec![T::zero(); dim];
        r[t] = T::one();
        for u in previous {
            let proj = u[t];
            for (ri, &ui) in r.iter_mut().zip(u) {
                *ri -= proj * ui;
            }
        }
        let sq = dot(&r, &r);
        if sq > half {
            let norm = sq.sqrt();
            r.iter_mut().for_each(|x| *x /= norm);
            return r;
        }
    }
    unreachable!("a unit vector leaves residual mass > 1/2 on some axis when dim >= 2")
}

fn fix_sign<T: Scalar>(mut u: Vec<T>) -> Vec<T> {
    let mut best = 0;
    for (i, x) in u.iter().enumerate() {
        if x.abs() > u[best].abs() {
            best = i;
        }
    }
    if u[best] < T::zero() {
        u.iter_mut().for_each(|x| *x = -*x);
    }
    u
}
