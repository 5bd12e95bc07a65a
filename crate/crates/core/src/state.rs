use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::scalar::{czero, Real, C};
use crate::sparse::SparseOperator;

/// Complex amplitudes over a [`crate::model::SectorBasis`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct StateVector<T: Real> {
    pub amplitudes: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            amplitudes: vec![czero(); dim],
        }
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut s = Self::zeros(dim);
        s.amplitudes[index] = C::new(T::one(), T::zero());
        s
    }

    pub fn from_amplitudes(amplitudes: Vec<C<T>>) -> Self {
        Self { amplitudes }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |a, v| a + v.norm_sqr())
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Scales to unit norm and returns the norm before scaling.
    pub fn normalize(&mut self) -> T {
        let n = self.norm();
        if n > T::zero() {
            let inv = T::one() / n;
            for v in self.amplitudes.iter_mut() {
                *v *= inv;
            }
        }
        n
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C<T> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(czero(), |a, (x, y)| a + x.conj() * y)
    }

    /// `|<self|other>|^2` for normalised states.
    pub fn fidelity(&self, other: &Self) -> T {
        self.inner(other).norm_sqr()
    }

    pub fn expectation(&self, op: &SparseOperator<T>) -> C<T> {
        let hv = op.apply(&self.amplitudes);
        self.amplitudes
            .iter()
            .zip(&hv)
            .fold(czero(), |a, (x, y)| a + x.conj() * y)
    }

    pub fn scale(&mut self, s: C<T>) {
        for v in self.amplitudes.iter_mut() {
            *v *= s;
        }
    }

    pub fn axpy(&mut self, a: C<T>, x: &Self) {
        for (y, x) in self.amplitudes.iter_mut().zip(&x.amplitudes) {
            *y += a * x;
        }
    }

    pub fn distance(&self, other: &Self) -> T {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(T::zero(), |a, (x, y)| a + (x - y).norm_sqr())
            .sqrt()
    }
}

impl<T: Real> Index<usize> for StateVector<T> {
    type Output = C<T>;
    fn index(&self, i: usize) -> &C<T> {
        &self.amplitudes[i]
    }
}

impl<T: Real> IndexMut<usize> for StateVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut C<T> {
        &mut self.amplitudes[i]
    }
}
