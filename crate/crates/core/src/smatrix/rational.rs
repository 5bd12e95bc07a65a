//! Rational functions with simple poles and their Fourier-type integrals
//! over the real line, closed in the half-plane where the exponential decays.

use crate::error::{Error, Result};
use crate::scalar::{ci, czero, Real, C};

/// One simple pole `r / (k − z)`. `causal` marks a pole sitting at
/// `z + i0⁺`: `z` is real and the pole counts as lying above the axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole<T: Real> {
    pub at: C<T>,
    pub residue: C<T>,
    pub causal: bool,
}

/// `c + Σ_j r_j / (k − z_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSum<T: Real> {
    pub constant: C<T>,
    pub poles: Vec<Pole<T>>,
}

impl<T: Real> PoleSum<T> {
    pub fn constant(c: C<T>) -> Self {
        Self {
            constant: c,
            poles: Vec::new(),
        }
    }

    pub fn simple(at: C<T>, residue: C<T>) -> Self {
        Self {
            constant: czero(),
            poles: vec![Pole {
                at,
                residue,
                causal: false,
            }],
        }
    }

    /// `1 / (q − k + i0⁺)`.
    pub fn causal(q: T) -> Self {
        Self {
            constant: czero(),
            poles: vec![Pole {
                at: C::new(q, T::zero()),
                residue: C::new(-T::one(), T::zero()),
                causal: true,
            }],
        }
    }

    pub fn eval(&self, k: C<T>) -> C<T> {
        self.poles
            .iter()
            .fold(self.constant, |acc, p| acc + p.residue / (k - p.at))
    }

    /// `f(a − k)` as a function of `k`.
    pub fn reflected(&self, a: C<T>) -> Self {
        Self {
            constant: self.constant,
            poles: self
                .poles
                .iter()
                .map(|p| Pole {
                    at: a - p.at,
                    residue: -p.residue,
                    causal: p.causal,
                })
                .collect(),
        }
    }

    /// `f(k + a)` as a function of `k`.
    pub fn shifted(&self, a: C<T>) -> Self {
        Self {
            constant: self.constant,
            poles: self
                .poles
                .iter()
                .map(|p| Pole {
                    at: p.at - a,
                    residue: p.residue,
                    causal: p.causal,
                })
                .collect(),
        }
    }

    pub fn scaled(mut self, s: C<T>) -> Self {
        self.constant *= s;
        for p in &mut self.poles {
            p.residue *= s;
        }
        self
    }
}

/// One residue contribution to `∫ dk F(k) e^{i s k l}`: `coefficient · e^{i frequency l}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidueTerm<T: Real> {
    pub coefficient: C<T>,
    pub frequency: C<T>,
    /// Comes from a causal `i0⁺` pole, so it does not decay with `l`.
    pub causal: bool,
}

/// Direction of the exponential `e^{± i k l}` in the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    /// `e^{+ikl}`: close in the upper half-plane.
    Upper,
    /// `e^{−ikl}`: close in the lower half-plane.
    Lower,
}

/// Residues of `∫_ℝ dk Π_f F_f(k) e^{± i k l}` for `l > 0`.
///
/// The product must fall off at least as `1/k²`. Poles are required to be
/// simple and distinct across factors; a non-causal pole within `axis_tol`
/// of the real axis is rejected.
pub fn residue_integral<T: Real>(factors: &[PoleSum<T>], closure: Closure, axis_tol: T) -> Result<Vec<ResidueTerm<T>>> {
    let all: Vec<(usize, usize, Pole<T>)> = factors
        .iter()
        .enumerate()
        .flat_map(|(f, s)| s.poles.iter().enumerate().map(move |(j, p)| (f, j, *p)))
        .filter(|(_, _, p)| p.residue != czero())
        .collect();
    for (i, (fa, _, a)) in all.iter().enumerate() {
        if !a.causal && a.at.im.abs() < axis_tol {
            return Err(Error::PoleOnContour {
                pole: format!("{}", a.at),
                distance: a.at.im.abs().as_f64(),
            });
        }
        for (fb, _, b) in &all[i + 1..] {
            if fa != fb && (a.at - b.at).norm() < axis_tol && a.causal == b.causal {
                return Err(Error::Precondition(format!(
                    "poles at {} and {} coincide; only simple poles are supported",
                    a.at, b.at
                )));
            }
        }
    }
    let two_pi_i = ci::<T>() * T::lit(2.0) * T::PI();
    let mut out = Vec::new();
    for (f, _, p) in &all {
        let above = p.causal || p.at.im > T::zero();
        let (take, sign, s) = match closure {
            Closure::Upper => (above, two_pi_i, T::one()),
            Closure::Lower => (!above, -two_pi_i, -T::one()),
        };
        if !take {
            continue;
        }
        let mut value = p.residue;
        for (g, other) in factors.iter().enumerate() {
            if g != *f {
                value *= other.eval(p.at);
            }
        }
        out.push(ResidueTerm {
            coefficient: sign * value,
            frequency: p.at * s,
            causal: p.causal,
        });
    }
    Ok(out)
}

/// Sums residue terms at separation `l`.
pub fn sum_terms<T: Real>(terms: &[ResidueTerm<T>], l: T) -> C<T> {
    terms
        .iter()
        .fold(czero(), |acc, t| acc + t.coefficient * (ci::<T>() * t.frequency * l).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_line, QuadOptions};
    use crate::scalar::cplx;

    #[test]
    fn lorentzian_pair_matches_quadrature() {
        let a = PoleSum::simple(cplx(0.3, -0.2), cplx(1.0, 0.5));
        let b = PoleSum::simple(cplx(-0.1, 0.4), cplx(0.7, 0.0)).reflected(cplx(0.2, 0.0));
        let c = PoleSum::simple(cplx(1.1, -0.6), cplx(0.0, 1.0));
        let l = 3.0f64;
        for closure in [Closure::Upper, Closure::Lower] {
            let s = if closure == Closure::Upper { 1.0 } else { -1.0 };
            let exact = sum_terms(&residue_integral(&[a.clone(), b.clone(), c.clone()], closure, 1e-9).unwrap(), l);
            let q = integrate_line(
                |k: f64| a.eval(cplx(k, 0.0)) * b.eval(cplx(k, 0.0)) * c.eval(cplx(k, 0.0)) * cplx(0.0, s * k * l).exp(),
                0.0,
                4.0,
                &QuadOptions::default().with_abs_tol(1e-10).with_panels(32),
            )
            .unwrap();
            assert!((exact - q.value).norm() < 1e-8, "{closure:?}: {exact} vs {}", q.value);
        }
    }

    #[test]
    fn rejects_pole_on_axis() {
        let a = PoleSum::simple(cplx(0.3, 1e-12), cplx(1.0, 0.0));
        let b = PoleSum::simple(cplx(0.0, -1.0), cplx(1.0, 0.0));
        assert!(matches!(
            residue_integral(&[a, b], Closure::Upper, 1e-9),
            Err(Error::PoleOnContour { .. })
        ));
    }

    #[test]
    fn causal_pole_is_above_the_axis() {
        // ∫ dk e^{ikl} / ((q − k + i0)(k + i)) = −2πi e^{iql} / (q + i)
        let q = 0.4f64;
        let l = 2.0;
        let f = [PoleSum::causal(q), PoleSum::simple(cplx(0.0, -1.0), cplx(1.0, 0.0))];
        let up = sum_terms(&residue_integral(&f, Closure::Upper, 1e-9).unwrap(), l);
        let want = cplx(0.0, -2.0 * std::f64::consts::PI) * cplx(0.0, q * l).exp() / cplx(q, 1.0);
        assert!((up - want).norm() < 1e-12);
        let down = residue_integral(&f, Closure::Lower, 1e-9).unwrap();
        assert!(down.iter().all(|t| !t.causal));
    }
}
