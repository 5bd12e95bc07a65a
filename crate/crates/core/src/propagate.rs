//! Time stepping `|ψ(t + dt)⟩ = e^{−iH dt}|ψ(t)⟩` for sparse Hermitian `H`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::bessel::bessel_j_sequence;
use crate::linalg::lanczos::{axpy, dot, norm, scale};
use crate::linalg::tridiagonal::symmetric_tridiagonal_eigen;
use crate::scalar::{czero, expi, Real, C};
use crate::sparse::SparseOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Chebyshev expansion of the propagator over the Gershgorin interval.
    Chebyshev,
    /// Lanczos projection with the exponential of the small tridiagonal.
    KrylovExp,
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct Step<T: Real> {
    pub state: Vec<C<T>>,
    /// A-posteriori bound on the truncation error of the step.
    pub error: T,
    pub matvecs: usize,
}

/// Chebyshev propagator bound to one operator.
pub struct Chebyshev<'a, T: Real> {
    op: &'a SparseOperator<T>,
    center: T,
    half_width: T,
}

impl<'a, T: Real> Chebyshev<'a, T> {
    pub fn new(op: &'a SparseOperator<T>) -> Self {
        let (lo, hi) = op.spectral_bounds();
        let center = (lo + hi) * T::lit(0.5);
        // Small margin so the scaled spectrum is strictly inside [-1, 1].
        let half_width = ((hi - lo) * T::lit(0.5)).max(T::lit(1e-12)) * T::lit(1.01);
        Self { op, center, half_width }
    }

    /// Largest `a·dt` for which a single expansion is used.
    const MAX_ARGUMENT: f64 = 40.0;

    pub fn step(&self, psi: &[C<T>], dt: T, tol: T) -> Result<Step<T>> {
        let n = psi.len();
        let x = self.half_width * dt;
        if x.abs() > T::lit(Self::MAX_ARGUMENT * 4.0) {
            return Err(Error::StepBudget(format!(
                "Chebyshev argument {x} too large; use a shorter step"
            )));
        }
        let order_cap = (x.abs().as_f64() * 1.5) as usize + 60;
        let j = bessel_j_sequence(x, order_cap);
        // Truncate once the remaining coefficients are negligible.
        let mut order = order_cap;
        for k in (x.abs().as_f64() as usize)..order_cap {
            let tail = j[k..].iter().fold(T::zero(), |a, v| a + v.abs()) * T::lit(2.0);
            if tail < tol {
                order = k;
                break;
            }
        }
        let tail_error = j[order.min(order_cap)..].iter().fold(T::zero(), |a, v| a + v.abs()) * T::lit(2.0);
        if tail_error > tol {
            return Err(Error::StepBudget(format!(
                "Chebyshev tail {tail_error} exceeds tolerance {tol}"
            )));
        }
        let inv_a = T::one() / self.half_width;
        let shift = self.center;
        // Scaled operator applied as (H − b)/a.
        let apply_scaled = |v: &[C<T>], out: &mut [C<T>]| {
            self.op.apply_into(v, out);
            for (o, vi) in out.iter_mut().zip(v) {
                *o = (*o - *vi * shift) * inv_a;
            }
        };
        let mut t_prev = psi.to_vec();
        let mut t_cur = vec![czero::<T>(); n];
        let mut acc: Vec<C<T>> = psi.iter().map(|v| *v * j[0]).collect();
        let mut matvecs = 0;
        if order >= 1 {
            apply_scaled(&t_prev, &mut t_cur);
            matvecs += 1;
            let coef = C::new(T::zero(), -T::one()) * (j[1] * T::lit(2.0));
            axpy(&mut acc, coef, &t_cur);
        }
        let mut tmp = vec![czero::<T>(); n];
        let mut phase = C::new(T::zero(), -T::one());
        for k in 2..order {
            apply_scaled(&t_cur, &mut tmp);
            matvecs += 1;
            for i in 0..n {
                tmp[i] = tmp[i] * T::lit(2.0) - t_prev[i];
            }
            std::mem::swap(&mut t_prev, &mut t_cur);
            std::mem::swap(&mut t_cur, &mut tmp);
            phase *= C::new(T::zero(), -T::one());
            let coef = phase * (j[k] * T::lit(2.0));
            axpy(&mut acc, coef, &t_cur);
        }
        let global = expi(-shift * dt);
        for v in acc.iter_mut() {
            *v *= global;
        }
        Ok(Step {
            state: acc,
            error: tail_error,
            matvecs,
        })
    }

    /// A step length that keeps each expansion at a moderate order.
    pub fn natural_step(&self) -> T {
        T::lit(Self::MAX_ARGUMENT) / self.half_width
    }
}

/// Krylov (Lanczos) exponential step.
pub fn krylov_step<T: Real>(op: &SparseOperator<T>, psi: &[C<T>], dt: T, krylov_dim: usize, tol: T) -> Result<Step<T>> {
    let n = psi.len();
    let beta0 = norm(psi);
    if beta0 == T::zero() {
        return Ok(Step {
            state: psi.to_vec(),
            error: T::zero(),
            matvecs: 0,
        });
    }
    let m = krylov_dim.min(n).max(1);
    let mut basis: Vec<Vec<C<T>>> = Vec::with_capacity(m + 1);
    let mut v0 = psi.to_vec();
    scale(&mut v0, T::one() / beta0);
    basis.push(v0);
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<T> = Vec::with_capacity(m);
    let mut w = vec![czero::<T>(); n];
    let mut matvecs = 0;
    let mut breakdown = false;
    for j in 0..m {
        op.apply_into(&basis[j], &mut w);
        matvecs += 1;
        alpha.push(dot(&basis[j], &w).re);
        for q in &basis {
            let c = dot(q, &w);
            axpy(&mut w, -c, q);
        }
        for q in &basis {
            let c = dot(q, &w);
            axpy(&mut w, -c, q);
        }
        let b = norm(&w);
        beta.push(b);
        if b <= T::epsilon() * T::lit(64.0) {
            breakdown = true;
            break;
        }
        if j + 1 < m {
            let mut next = w.clone();
            scale(&mut next, T::one() / b);
            basis.push(next);
        }
    }
    let k = alpha.len();
    let eig = symmetric_tridiagonal_eigen(&alpha, &beta[..k - 1])?;
    // c = exp(−i T dt) e_1 in the Krylov basis.
    let mut coeffs = vec![czero::<T>(); k];
    for (p, &lam) in eig.values.iter().enumerate() {
        let weight = expi(-lam * dt) * eig.component(0, p);
        for (r, c) in coeffs.iter_mut().enumerate() {
            *c += weight * eig.component(r, p);
        }
    }
    let error = if breakdown {
        T::zero()
    } else {
        beta[k - 1] * coeffs[k - 1].norm() * beta0
    };
    if error > tol {
        return Err(Error::StepBudget(format!(
            "Krylov residual {error} exceeds tolerance {tol} for dt = {dt}"
        )));
    }
    let mut out = vec![czero::<T>(); n];
    for (c, q) in coeffs.iter().zip(&basis) {
        axpy(&mut out, *c * beta0, q);
    }
    Ok(Step {
        state: out,
        error,
        matvecs,
    })
}

/// Propagates by `total` with steps no longer than the method prefers,
/// splitting further when the per-step error estimate exceeds `tol`.
pub fn propagate<T: Real>(
    op: &SparseOperator<T>,
    psi: &[C<T>],
    total: T,
    method: Method,
    tol: T,
) -> Result<Step<T>> {
    let mut state = psi.to_vec();
    let mut err = T::zero();
    let mut matvecs = 0;
    if total == T::zero() {
        return Ok(Step { state, error: err, matvecs });
    }
    match method {
        Method::Chebyshev => {
            let cheb = Chebyshev::new(op);
            let nat = cheb.natural_step();
            let steps = (total.abs() / nat).ceil().to_usize().unwrap_or(1).max(1);
            let dt = total / T::from_usize_lossy(steps);
            for _ in 0..steps {
                let s = cheb.step(&state, dt, tol)?;
                err += s.error;
                matvecs += s.matvecs;
                state = s.state;
            }
        }
        Method::KrylovExp => {
            let mut remaining = total;
            let sign = if total < T::zero() { -T::one() } else { T::one() };
            let (lo, hi) = op.spectral_bounds();
            let width = (hi - lo).max(T::lit(1e-12));
            let mut dt = (T::lit(12.0) / width).min(total.abs());
            let mut halvings = 0;
            while remaining.abs() > T::epsilon() * total.abs() {
                let h = dt.min(remaining.abs()) * sign;
                match krylov_step(op, &state, h, 30, tol) {
                    Ok(s) => {
                        err += s.error;
                        matvecs += s.matvecs;
                        state = s.state;
                        remaining -= h;
                        halvings = 0;
                    }
                    Err(Error::StepBudget(_)) if halvings < 30 => {
                        dt *= T::lit(0.5);
                        halvings += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(Step { state, error: err, matvecs })
}
