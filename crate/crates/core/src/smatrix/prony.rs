//! Sums of complex exponentials fitted to uniformly sampled data
//! (linear prediction with least squares, then polynomial rooting).

use crate::error::{Error, Result};
use crate::linalg::dense::polynomial_roots;
use crate::linalg::CMatrix;
use crate::scalar::{cone, czero, Real, C};

/// `amplitude · e^{(−rate + i frequency)(l − l₀)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential<T: Real> {
    pub rate: T,
    pub frequency: T,
    pub amplitude: C<T>,
}

/// Fits the smallest number of exponentials (up to `max_order`) whose
/// linear-prediction residual falls below `tol` relative to the data.
/// Components with amplitude below `floor · max|y|` are dropped.
pub fn fit_exponentials<T: Real>(y: &[C<T>], dt: T, max_order: usize, tol: T, floor: T) -> Result<Vec<Exponential<T>>> {
    let n = y.len();
    let ymax = y.iter().fold(T::zero(), |m, v| m.max(v.norm()));
    if ymax == T::zero() {
        return Ok(Vec::new());
    }
    for order in 1..=max_order {
        if n < 3 * order + 1 {
            break;
        }
        let rows = n - order;
        let a = CMatrix::from_fn(rows, order, |r, c| y[r + c]);
        let b: Vec<C<T>> = (0..rows).map(|r| -y[r + order]).collect();
        let bn = b.iter().fold(T::zero(), |s, v| s + v.norm_sqr()).sqrt();
        let (coef, residual) = match a.least_squares(&b) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if residual > tol * bn.max(ymax) {
            continue;
        }
        let mut poly = coef.clone();
        poly.push(cone());
        let roots = polynomial_roots(&poly)?;
        let v = CMatrix::from_fn(n, roots.len(), |r, c| roots[c].powi(r as i32));
        let (amps, _) = v.least_squares(y)?;
        let mut out: Vec<Exponential<T>> = roots
            .iter()
            .zip(&amps)
            .filter(|(_, c)| c.norm() > floor * ymax)
            .map(|(z, c)| Exponential {
                rate: -z.norm().ln() / dt,
                frequency: z.arg() / dt,
                amplitude: *c,
            })
            .collect();
        out.sort_by(|p, q| p.rate.partial_cmp(&q.rate).unwrap_or(std::cmp::Ordering::Equal));
        return Ok(out);
    }
    Err(Error::Fit(format!(
        "no exponential model with at most {max_order} terms reproduces the samples"
    )))
}

/// Evaluates a fitted model at offset `s` from the first sample.
pub fn evaluate<T: Real>(model: &[Exponential<T>], s: T) -> C<T> {
    model.iter().fold(czero(), |acc, e| {
        acc + e.amplitude * C::new(-e.rate * s, e.frequency * s).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn recovers_three_rates() {
        let comps = [(0.05, 1.3, cplx(1.0, 0.2)), (0.2, -0.4, cplx(0.5, -0.1)), (0.5, 0.8, cplx(-0.3, 0.4))];
        let dt = 0.5f64;
        let y: Vec<_> = (0..200)
            .map(|j| {
                let s = j as f64 * dt;
                comps.iter().fold(cplx(0.0, 0.0), |a, (r, w, c)| a + c * cplx(-r * s, w * s).exp())
            })
            .collect();
        let fit = fit_exponentials(&y, dt, 8, 1e-10, 1e-8).unwrap();
        assert_eq!(fit.len(), 3);
        for (e, (r, w, c)) in fit.iter().zip(comps) {
            assert!((e.rate - r).abs() < 1e-8);
            assert!((e.frequency - w).abs() < 1e-8);
            assert!((e.amplitude - c).norm() < 1e-8);
        }
        assert!((evaluate(&fit, 3.0) - y[6]).norm() < 1e-10);
    }
}
