use crate::error::{Error, Result};
use crate::scalar::{cone, czero, Real, C};

/// Small dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T: Real> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        Self::from_fn(self.rows, rhs.cols, |r, c| {
            (0..self.cols).fold(czero(), |acc, k| acc + self[(r, k)] * rhs[(k, c)])
        })
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| *v * s).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(-cone::<T>()))
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    fn lu(&self) -> Option<(Vec<C<T>>, Vec<usize>, bool)> {
        let n = self.rows;
        let mut a = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for k in 0..n {
            let (p, best) = (k..n).fold((k, T::zero()), |acc, r| {
                let v = a[r * n + k].norm();
                if v > acc.1 {
                    (r, v)
                } else {
                    acc
                }
            });
            if best == T::zero() {
                return None;
            }
            if p != k {
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                odd = !odd;
            }
            let pivot = a[k * n + k];
            for r in k + 1..n {
                let f = a[r * n + k] / pivot;
                a[r * n + k] = f;
                for c in k + 1..n {
                    let v = a[k * n + c];
                    a[r * n + c] -= f * v;
                }
            }
        }
        Some((a, perm, odd))
    }

    pub fn determinant(&self) -> C<T> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        match self.lu() {
            None => czero(),
            Some((a, _, odd)) => {
                let d = (0..n).fold(cone::<T>(), |acc, i| acc * a[i * n + i]);
                if odd {
                    -d
                } else {
                    d
                }
            }
        }
    }

    /// Solves `self * X = rhs`.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        let n = self.rows;
        let (a, perm, _) = self
            .lu()
            .ok_or_else(|| Error::Precondition("singular matrix".into()))?;
        let mut x = Self::zeros(n, rhs.cols);
        for col in 0..rhs.cols {
            let mut y: Vec<C<T>> = (0..n).map(|i| rhs[(perm[i], col)]).collect();
            for i in 0..n {
                for k in 0..i {
                    let v = a[i * n + k] * y[k];
                    y[i] -= v;
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let v = a[i * n + k] * y[k];
                    y[i] -= v;
                }
                y[i] /= a[i * n + i];
            }
            for i in 0..n {
                x[(i, col)] = y[i];
            }
        }
        Ok(x)
    }

    /// Least-squares solution of `A x ≈ b` for a tall matrix by Householder
    /// QR. Also returns the residual norm.
    pub fn least_squares(&self, b: &[C<T>]) -> Result<(Vec<C<T>>, T)> {
        let (m, n) = (self.rows, self.cols);
        if b.len() != m || m < n {
            return Err(Error::Precondition(format!(
                "least squares needs a tall system, got {m}x{n} with {} right-hand entries",
                b.len()
            )));
        }
        let mut a = self.data.clone();
        let mut y = b.to_vec();
        let scale = a.iter().fold(T::zero(), |s, v| s.max(v.norm()));
        for j in 0..n {
            let norm = (j..m).fold(T::zero(), |s, i| s + a[i * n + j].norm_sqr()).sqrt();
            if norm <= T::epsilon() * scale * T::lit(16.0) {
                return Err(Error::Precondition("rank-deficient least-squares system".into()));
            }
            let head = a[j * n + j];
            let phase = if head.norm() == T::zero() { cone() } else { head / head.norm() };
            let alpha = -phase * norm;
            let mut v: Vec<C<T>> = (j..m).map(|i| a[i * n + j]).collect();
            v[0] -= alpha;
            let vn = v.iter().fold(T::zero(), |s, x| s + x.norm_sqr());
            if vn == T::zero() {
                continue;
            }
            for c in j..n {
                let dot = (j..m).fold(czero::<T>(), |s, i| s + v[i - j].conj() * a[i * n + c]);
                let f = dot * (T::lit(2.0) / vn);
                for i in j..m {
                    let d = v[i - j] * f;
                    a[i * n + c] -= d;
                }
            }
            let dot = (j..m).fold(czero::<T>(), |s, i| s + v[i - j].conj() * y[i]);
            let f = dot * (T::lit(2.0) / vn);
            for i in j..m {
                let d = v[i - j] * f;
                y[i] -= d;
            }
        }
        let mut x = vec![czero::<T>(); n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= a[i * n + k] * x[k];
            }
            x[i] = s / a[i * n + i];
        }
        let residual = (n..m).fold(T::zero(), |s, i| s + y[i].norm_sqr()).sqrt();
        Ok((x, residual))
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    /// Adjugate by cofactors; well defined for singular matrices too.
    pub fn adjugate(&self) -> Self {
        let n = self.rows;
        if n == 1 {
            return Self::identity(1);
        }
        Self::from_fn(n, n, |r, c| {
            // adj[r][c] = (-1)^{r+c} det(minor with row c and column r removed)
            let minor = Self::from_fn(n - 1, n - 1, |i, j| {
                let ii = if i >= c { i + 1 } else { i };
                let jj = if j >= r { j + 1 } else { j };
                self[(ii, jj)]
            });
            let d = minor.determinant();
            if (r + c) % 2 == 0 {
                d
            } else {
                -d
            }
        })
    }

    /// Coefficients `c[0..=n]` (monic, `c[n] = 1`) of `det(z I - A)` by the
    /// Faddeev–LeVerrier recursion.
    pub fn characteristic_polynomial(&self) -> Vec<C<T>> {
        let n = self.rows;
        let mut coeffs = vec![czero(); n + 1];
        coeffs[n] = cone();
        let mut m = Self::zeros(n, n);
        for k in 1..=n {
            let mut next = self.matmul(&m);
            for i in 0..n {
                next[(i, i)] += coeffs[n - k + 1];
            }
            m = next;
            let am = self.matmul(&m);
            coeffs[n - k] = -am.trace() / T::from_usize_lossy(k);
        }
        coeffs
    }

    /// Eigenvalues from the roots of the characteristic polynomial, each
    /// polished by Newton steps on `det(z - A)`.
    pub fn eigenvalues(&self) -> Result<Vec<C<T>>> {
        let poly = self.characteristic_polynomial();
        let mut roots = polynomial_roots(&poly)?;
        for z in roots.iter_mut() {
            for _ in 0..4 {
                let shifted = Self::from_fn(self.rows, self.cols, |r, c| {
                    if r == c {
                        *z - self[(r, c)]
                    } else {
                        -self[(r, c)]
                    }
                });
                let d = shifted.determinant();
                if d.norm() == T::zero() {
                    break;
                }
                // d/dz det(z - A) = tr(adj(z - A))
                let dd = shifted.adjugate().trace();
                if dd.norm() == T::zero() {
                    break;
                }
                let step = d / dd;
                *z -= step;
                if step.norm() <= T::epsilon() * z.norm().max(T::one()) {
                    break;
                }
            }
        }
        Ok(roots)
    }
}

impl<T: Real> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    fn index(&self, (r, c): (usize, usize)) -> &C<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T: Real> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C<T> {
        &mut self.data[r * self.cols + c]
    }
}

fn eval_poly<T: Real>(c: &[C<T>], z: C<T>) -> (C<T>, C<T>) {
    let mut p = czero::<T>();
    let mut dp = czero::<T>();
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + *a;
    }
    (p, dp)
}

/// Roots of `Σ c[k] z^k` by Aberth–Ehrlich iteration.
pub fn polynomial_roots<T: Real>(coeffs: &[C<T>]) -> Result<Vec<C<T>>> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && c.last().map(|v| v.norm() == T::zero()).unwrap_or(false) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Ok(vec![]);
    }
    let lead = c[n];
    for v in c.iter_mut() {
        *v /= lead;
    }
    // Cauchy bound for the initial circle.
    let radius = T::one() + c[..n].iter().fold(T::zero(), |m, v| m.max(v.norm()));
    let mut z: Vec<C<T>> = (0..n)
        .map(|k| {
            let ang = T::lit(2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4);
            C::new(ang.cos(), ang.sin()) * (radius * T::lit(0.5))
        })
        .collect();
    for _ in 0..500 {
        let mut max_step = T::zero();
        for i in 0..n {
            let (p, dp) = eval_poly(&c, z[i]);
            if p.norm() == T::zero() {
                continue;
            }
            let ratio = p / dp;
            let repulsion = (0..n)
                .filter(|&j| j != i)
                .fold(czero::<T>(), |acc, j| acc + cone::<T>() / (z[i] - z[j]));
            let step = ratio / (cone::<T>() - ratio * repulsion);
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(T::one()));
        }
        if max_step <= T::epsilon() * T::lit(4.0) {
            return Ok(z);
        }
    }
    // Best effort: return the current iterate if residuals are tiny.
    let worst = z
        .iter()
        .fold(T::zero(), |m, zi| m.max(eval_poly(&c, *zi).0.norm()));
    if worst <= T::tol(1e-10) * radius.powi(n as i32) {
        Ok(z)
    } else {
        Err(Error::NoConvergence {
            iterations: 500,
            residual: worst.as_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn least_squares_recovers_exact_fit() {
        let a = CMatrix::from_fn(6, 3, |r, c| cplx((r as f64 + 1.0).powi(c as i32), 0.1 * (r * c) as f64));
        let x = [cplx(1.0, -0.5), cplx(0.25, 0.0), cplx(-0.1, 0.3)];
        let b: Vec<_> = (0..6).map(|r| (0..3).fold(cplx(0.0, 0.0), |s, c| s + a[(r, c)] * x[c])).collect();
        let (got, res) = a.least_squares(&b).unwrap();
        assert!(res < 1e-12);
        for (g, w) in got.iter().zip(&x) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_and_adjugate_agree() {
        let a = CMatrix::from_fn(3, 3, |r, c| cplx((r * 3 + c) as f64 * 0.3 + if r == c { 3.0 } else { 1.0 }, (r as f64 - c as f64) * 0.7));
        let inv = a.inverse().unwrap();
        let adj = a.adjugate().scale(cone::<f64>() / a.determinant());
        assert!(inv.sub(&adj).max_abs() < 1e-12);
        assert!(a.matmul(&inv).sub(&CMatrix::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let mut a = CMatrix::<f64>::zeros(3, 3);
        a[(0, 0)] = cplx(1.0, -0.5);
        a[(1, 1)] = cplx(2.0, -0.1);
        a[(2, 2)] = cplx(-1.0, 0.0);
        a[(0, 2)] = cplx(0.3, 0.3);
        let mut ev = a.eigenvalues().unwrap();
        ev.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        assert!((ev[0] - cplx(-1.0, 0.0)).norm() < 1e-12);
        assert!((ev[1] - cplx(1.0, -0.5)).norm() < 1e-12);
        assert!((ev[2] - cplx(2.0, -0.1)).norm() < 1e-12);
    }
}
