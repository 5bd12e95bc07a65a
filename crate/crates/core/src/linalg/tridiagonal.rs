use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigen-decomposition of a real symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagonalEigen<T> {
    /// Ascending eigenvalues.
    pub values: Vec<T>,
    /// Row-major `n x n`; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<T>,
    pub n: usize,
}

impl<T: Real> TridiagonalEigen<T> {
    #[inline]
    pub fn component(&self, row: usize, col: usize) -> T {
        self.vectors[row * self.n + col]
    }
}

/// Implicit QL with Wilkinson shifts. `off[i]` couples rows `i` and `i + 1`.
pub fn symmetric_tridiagonal_eigen<T: Real>(diag: &[T], off: &[T]) -> Result<TridiagonalEigen<T>> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagonalEigen {
            values: vec![],
            vectors: vec![],
            n,
        });
    }
    if off.len() + 1 < n {
        return Err(Error::Mismatch("off-diagonal too short".into()));
    }
    let mut d = diag.to_vec();
    let mut e = vec![T::zero(); n];
    e[..n - 1].copy_from_slice(&off[..n - 1]);
    let mut z = vec![T::zero(); n * n];
    for i in 0..n {
        z[i * n + i] = T::one();
    }
    let two = T::lit(2.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 100 {
                return Err(Error::NoConvergence {
                    iterations: iter,
                    residual: e[l].abs().as_f64(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (two * e[l]);
            let mut r = g.hypot(T::one());
            let sr = if g >= T::zero() { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sr);
            let (mut s, mut c, mut p) = (T::one(), T::one(), T::zero());
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] -= p;
                    e[m] = T::zero();
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + two * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zf = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * zf;
                    z[k * n + i] = c * z[k * n + i] - s * zf;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&j| d[j]).collect();
    let mut vectors = vec![T::zero(); n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + new_col] = z[row * n + old_col];
        }
    }
    Ok(TridiagonalEigen { values, vectors, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_chain_spectrum() {
        // -2cos(pi j/(n+1)) for the open chain with unit hopping.
        let n = 12;
        let diag = vec![0.0f64; n];
        let off = vec![-1.0f64; n - 1];
        let eig = symmetric_tridiagonal_eigen(&diag, &off).unwrap();
        for (j, v) in eig.values.iter().enumerate() {
            let exact = -2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
        }
        // A v = lambda v column by column.
        for j in 0..n {
            for r in 0..n {
                let mut av = diag[r] * eig.component(r, j);
                if r > 0 {
                    av += off[r - 1] * eig.component(r - 1, j);
                }
                if r + 1 < n {
                    av += off[r] * eig.component(r + 1, j);
                }
                assert!((av - eig.values[j] * eig.component(r, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn one_by_one() {
        let eig = symmetric_tridiagonal_eigen(&[3.0f64], &[]).unwrap();
        assert_eq!(eig.values, vec![3.0]);
    }
}
