//! Restarted Hermitian Lanczos for the lowest eigenpair of a sparse operator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::tridiagonal::symmetric_tridiagonal_eigen;
use crate::scalar::{czero, Real, C};
use crate::sparse::SparseOperator;

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Krylov vectors kept per cycle.
    pub krylov_dim: usize,
    /// Total operator applications allowed.
    pub max_iterations: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            krylov_dim: 48,
            max_iterations: 20_000,
            tol: 1e-9,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair<T: Real> {
    pub value: T,
    pub vector: Vec<C<T>>,
    /// `‖Av − λv‖`.
    pub residual: T,
    pub iterations: usize,
}

pub(crate) fn dot<T: Real>(a: &[C<T>], b: &[C<T>]) -> C<T> {
    a.iter().zip(b).fold(czero(), |s, (x, y)| s + x.conj() * y)
}

pub(crate) fn norm<T: Real>(a: &[C<T>]) -> T {
    a.iter().fold(T::zero(), |s, x| s + x.norm_sqr()).sqrt()
}

pub(crate) fn axpy<T: Real>(y: &mut [C<T>], a: C<T>, x: &[C<T>]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub(crate) fn scale<T: Real>(y: &mut [C<T>], s: T) {
    for v in y.iter_mut() {
        *v *= s;
    }
}

/// Random unit start vector, reproducible from `seed`.
pub fn random_start<T: Real>(dim: usize, seed: u64) -> Vec<C<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<C<T>> = (0..dim)
        .map(|_| C::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0))))
        .collect();
    let n = norm(&v);
    scale(&mut v, T::one() / n);
    v
}

/// Lowest eigenpair of a Hermitian operator.
pub fn lowest_eigenpair<T: Real>(op: &SparseOperator<T>, opts: &LanczosOptions) -> Result<Eigenpair<T>> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::Precondition("empty operator".into()));
    }
    if !op.is_hermitian() {
        return Err(Error::Precondition("Lanczos needs a Hermitian operator".into()));
    }
    let tol = T::tol(opts.tol);
    let mut v = random_start::<T>(n, opts.seed);
    let mut used = 0usize;
    let mut w = vec![czero::<T>(); n];
    let mut last_residual = T::infinity();
    let scale_ref = {
        let (lo, hi) = op.spectral_bounds();
        lo.abs().max(hi.abs()).max(T::one())
    };
    while used < opts.max_iterations {
        let m = opts.krylov_dim.min(n).max(1);
        let mut basis: Vec<Vec<C<T>>> = Vec::with_capacity(m);
        let mut alpha: Vec<T> = Vec::with_capacity(m);
        let mut beta: Vec<T> = Vec::with_capacity(m);
        basis.push(v.clone());
        for j in 0..m {
            op.apply_into(&basis[j], &mut w);
            used += 1;
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            // Full reorthogonalization, twice for stability.
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    axpy(&mut w, -c, q);
                }
            }
            let b = norm(&w);
            if j + 1 == m || b <= T::epsilon() * scale_ref {
                beta.push(b);
                break;
            }
            beta.push(b);
            let mut next = w.clone();
            scale(&mut next, T::one() / b);
            basis.push(next);
        }
        let k = alpha.len();
        let eig = symmetric_tridiagonal_eigen(&alpha, &beta[..k.saturating_sub(1)])?;
        let mut ritz = vec![czero::<T>(); n];
        for (j, q) in basis.iter().take(k).enumerate() {
            axpy(&mut ritz, C::new(eig.component(j, 0), T::zero()), q);
        }
        let rn = norm(&ritz);
        scale(&mut ritz, T::one() / rn);
        op.apply_into(&ritz, &mut w);
        used += 1;
        let lambda = dot(&ritz, &w).re;
        axpy(&mut w, C::new(-lambda, T::zero()), &ritz);
        let residual = norm(&w);
        last_residual = residual;
        if residual < tol {
            return Ok(Eigenpair {
                value: lambda,
                vector: ritz,
                residual,
                iterations: used,
            });
        }
        if k < m && beta[k - 1] <= T::epsilon() * scale_ref {
            // Invariant subspace found but residual still large: perturb.
            let extra = random_start::<T>(n, opts.seed.wrapping_add(used as u64));
            axpy(&mut ritz, C::new(T::lit(1e-3), T::zero()), &extra);
            let rn = norm(&ritz);
            scale(&mut ritz, T::one() / rn);
        }
        v = ritz;
    }
    Err(Error::NoConvergence {
        iterations: used,
        residual: last_residual.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn finds_lowest_of_chain() {
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, cplx(0.1 * i as f64, 0.0)));
            if i + 1 < n {
                t.push((i, i + 1, cplx(-1.0, 0.0)));
                t.push((i + 1, i, cplx(-1.0, 0.0)));
            }
        }
        let op = SparseOperator::from_triplets(n, t, true).unwrap();
        let r = lowest_eigenpair(&op, &LanczosOptions::default()).unwrap();
        let dense = op.to_dense();
        let diag: Vec<f64> = (0..n).map(|i| dense[i * n + i].re).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| dense[i * n + i + 1].re).collect();
        let exact = symmetric_tridiagonal_eigen(&diag, &off).unwrap().values[0];
        assert!((r.value - exact).abs() < 1e-10);
        assert!(r.residual < 1e-9);
    }

    #[test]
    fn seeded_start_is_reproducible() {
        let a = random_start::<f64>(10, 7);
        let b = random_start::<f64>(10, 7);
        assert_eq!(a, b);
        assert!((norm(&a) - 1.0).abs() < 1e-14);
    }
}
