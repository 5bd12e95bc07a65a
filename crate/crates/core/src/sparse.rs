//! Compressed sparse row operators with complex entries.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{czero, Real, C};

/// Sparse square operator. Entries are stored row-sorted with duplicates
/// merged, which makes the CSR arrays a sorted triplet list.
#[derive(Debug, Clone)]
pub struct SparseOperator<T: Real> {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C<T>>,
    hermitian: bool,
}

const PARALLEL_ROWS: usize = 8192;

impl<T: Real> SparseOperator<T> {
    /// Builds from unsorted triplets; duplicate `(row, col)` entries are summed.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C<T>)>, hermitian: bool) -> Result<Self> {
        if let Some(bad) = triplets.iter().find(|t| t.0 >= dim || t.1 >= dim) {
            return Err(Error::Mismatch(format!(
                "entry ({}, {}) outside dimension {dim}",
                bad.0, bad.1
            )));
        }
        triplets.par_sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                let tail = vals.last_mut().expect("nonempty");
                *tail += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(Self {
            dim,
            row_ptr,
            cols,
            vals,
            hermitian,
        })
    }

    pub fn diagonal(values: Vec<C<T>>) -> Self {
        let dim = values.len();
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: values,
            hermitian: false,
        }
        .with_hermitian_flag_from_diagonal()
    }

    fn with_hermitian_flag_from_diagonal(mut self) -> Self {
        self.hermitian = self.vals.iter().all(|v| v.im == T::zero());
        self
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Sorted `(row, col, value)` triplets.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C<T>)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C<T>)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C<T> {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        match self.cols[lo..hi].binary_search(&c) {
            Ok(k) => self.vals[lo + k],
            Err(_) => czero(),
        }
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[C<T>], y: &mut [C<T>]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let row = |(r, out): (usize, &mut C<T>)| {
            let mut acc = czero::<T>();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        };
        if self.dim >= PARALLEL_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, out)| row((r, out)));
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }

    pub fn apply(&self, x: &[C<T>]) -> Vec<C<T>> {
        let mut y = vec![czero(); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// Largest `|A_ij - conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> T {
        self.triplets()
            .fold(T::zero(), |m, (r, c, v)| m.max((v - self.get(c, r).conj()).norm()))
    }

    /// Largest `|[A, D]_ij|` for a diagonal `D`.
    pub fn commutator_with_diagonal(&self, diag: &[T]) -> T {
        self.triplets()
            .fold(T::zero(), |m, (r, c, v)| m.max((v * (diag[c] - diag[r])).norm()))
    }

    /// Gershgorin interval enclosing the spectrum of a Hermitian operator.
    pub fn spectral_bounds(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for r in 0..self.dim {
            let mut center = T::zero();
            let mut radius = T::zero();
            for (c, v) in self.row(r) {
                if c == r {
                    center = v.re;
                } else {
                    radius += v.norm();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        if self.dim == 0 {
            (T::zero(), T::zero())
        } else {
            (lo, hi)
        }
    }

    /// `alpha * self + beta * identity`.
    pub fn affine(&self, alpha: T, beta: T) -> Self {
        let mut trips: Vec<(usize, usize, C<T>)> = self.triplets().map(|(r, c, v)| (r, c, v * alpha)).collect();
        trips.extend((0..self.dim).map(|i| (i, i, C::new(beta, T::zero()))));
        let mut out = Self::from_triplets(self.dim, trips, self.hermitian).expect("same dimension");
        out.hermitian = self.hermitian;
        out
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<C<T>> {
        let mut d = vec![czero(); self.dim * self.dim];
        for (r, c, v) in self.triplets() {
            d[r * self.dim + c] = v;
        }
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn duplicates_merge_and_sort() {
        let op = SparseOperator::<f64>::from_triplets(
            3,
            vec![
                (2, 0, cplx(1.0, 0.0)),
                (0, 1, cplx(0.5, 0.0)),
                (2, 0, cplx(2.0, 1.0)),
                (0, 0, cplx(-1.0, 0.0)),
            ],
            false,
        )
        .unwrap();
        let t: Vec<_> = op.triplets().collect();
        assert_eq!(t.len(), 3);
        assert_eq!((t[0].0, t[0].1), (0, 0));
        assert_eq!((t[1].0, t[1].1), (0, 1));
        assert_eq!(t[2].2, cplx(3.0, 1.0));
    }

    #[test]
    fn out_of_range_entry_rejected() {
        assert!(SparseOperator::<f64>::from_triplets(2, vec![(2, 0, cplx(1.0, 0.0))], false).is_err());
    }

    #[test]
    fn matvec_matches_dense() {
        let op = SparseOperator::<f64>::from_triplets(
            2,
            vec![(0, 0, cplx(1.0, 0.0)), (0, 1, cplx(0.0, 2.0)), (1, 0, cplx(0.0, -2.0))],
            true,
        )
        .unwrap();
        let y = op.apply(&[cplx(1.0, 0.0), cplx(0.0, 1.0)]);
        assert_eq!(y[0], cplx(-1.0, 0.0));
        assert_eq!(y[1], cplx(0.0, -2.0));
        assert_eq!(op.hermiticity_error(), 0.0);
    }
}
