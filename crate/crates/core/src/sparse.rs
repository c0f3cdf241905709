use crate::scalar::Scalar;

/// Sparse vector with strictly increasing indices and no stored zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector<T> {
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> Default for SparseVector<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Scalar> SparseVector<T> {
    pub fn zero() -> Self {
        SparseVector {
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from `(index, value)` pairs sorted by index. Zero values are skipped.
    ///
    /// # Panics
    /// If indices are not strictly increasing.
    pub fn from_sorted(entries: impl IntoIterator<Item = (usize, T)>) -> Self {
        let mut v = Self::zero();
        for (i, x) in entries {
            if let Some(&last) = v.indices.last() {
                assert!(i > last, "sparse indices must be strictly increasing");
            }
            if x != T::zero() {
                v.indices.push(i);
                v.values.push(x);
            }
        }
        v
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.indices
            .iter()
            .copied()
            .zip(self.values.iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_zero(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, index: usize) -> T {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => T::zero(),
        }
    }

    pub fn norm(&self) -> T {
        self.values.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector<T>) -> T {
        let (mut i, mut j) = (0, 0);
        let mut acc = T::zero();
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[i] * other.values[j];
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Unit-L2 copy; the zero vector stays zero.
    pub fn normalized(&self) -> SparseVector<T> {
        let n = self.norm();
        if n == T::zero() {
            return self.clone();
        }
        SparseVector {
            indices: self.indices.clone(),
            values: self.values.iter().map(|&x| x / n).collect(),
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<T> {
        let mut out = vec![T::zero(); len];
        for (i, x) in self.iter() {
            out[i] = x;
        }
        out
    }

    /// Re-indexes entries through `map`, which must be strictly increasing.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> SparseVector<T> {
        SparseVector::from_sorted(self.iter().map(|(i, x)| (map(i), x)))
    }
}
