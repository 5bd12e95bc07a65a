//! Free-field packet commutators and light-cone distances.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, integrate_real_line, QuadOptions};
use crate::scalar::{expi, Real, C};
use crate::wavepacket::{wrap_momentum, Dispersion, Envelope, EnvelopeKind};

/// Two spacetime points and the maximal signal speed `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SpacetimePair<T: Real> {
    pub x1: T,
    pub t1: T,
    pub x2: T,
    pub t2: T,
    pub c: T,
}

impl<T: Real> SpacetimePair<T> {
    pub fn new(x1: T, t1: T, x2: T, t2: T, c: T) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(invalid("c", "must be positive"));
        }
        Ok(Self { x1, t1, x2, t2, c })
    }

    pub fn dx(&self) -> T {
        self.x1 - self.x2
    }

    pub fn dt(&self) -> T {
        self.t1 - self.t2
    }

    pub fn translated(&self, dx: T, dt: T) -> Self {
        Self {
            x1: self.x1 + dx,
            x2: self.x2 + dx,
            t1: self.t1 + dt,
            t2: self.t2 + dt,
            c: self.c,
        }
    }
}

/// `|x₁ − x₂| − c|t₁ − t₂|`; positive outside the light cone.
pub fn cone_distance<T: Real>(p: &SpacetimePair<T>) -> T {
    p.dx().abs() - p.c * p.dt().abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CommutatorResult<T: Real> {
    pub value: C<T>,
    pub cone_distance: T,
    /// Closed-form magnitude when one exists (Gaussian envelopes, linear band).
    pub bound: Option<T>,
    pub error: T,
}

#[derive(Debug, Clone, Copy)]
pub struct CommutatorOptions<T> {
    pub abs_tol: T,
    pub max_panels: usize,
}

impl<T: Real> Default for CommutatorOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::tol(1e-10),
            max_panels: 200_000,
        }
    }
}

/// `I = ∫ e^{ik(x̄−ȳ) − iω_k(t−t′)} φ₁(k) φ₂(k)* dk`.
pub fn free_commutator<T: Real>(
    env1: &Envelope<T>,
    env2: &Envelope<T>,
    p: &SpacetimePair<T>,
    disp: &Dispersion<T>,
) -> Result<CommutatorResult<T>> {
    free_commutator_with(env1, env2, p, disp, &CommutatorOptions::default())
}

pub fn free_commutator_with<T: Real>(
    env1: &Envelope<T>,
    env2: &Envelope<T>,
    p: &SpacetimePair<T>,
    disp: &Dispersion<T>,
    opts: &CommutatorOptions<T>,
) -> Result<CommutatorResult<T>> {
    env1.validate()?;
    env2.validate()?;
    let dx = p.dx();
    let dt = p.dt();
    let periodic = disp.domain().is_some();
    let phi = |env: &Envelope<T>, k: T| {
        if periodic {
            env.at_offset(wrap_momentum(k - env.k_bar))
        } else {
            env.value(k)
        }
    };
    let integrand = |k: T| expi(k * dx - disp.omega(k) * dt) * phi(env1, k) * phi(env2, k).conj();
    // Largest local wavenumber of the phase, used to size the first panels.
    let freq = dx.abs() + disp.max_speed() * dt.abs();
    let both_gaussian = env1.kind == EnvelopeKind::Gaussian && env2.kind == EnvelopeKind::Gaussian;
    let quad = |a: T, b: T| -> QuadOptions<T> {
        let waves = ((b - a) * freq / T::TAU()).to_usize().unwrap_or(0);
        QuadOptions {
            abs_tol: opts.abs_tol,
            rel_tol: T::tol(1e-13),
            initial_panels: (4 * waves + 16).min(opts.max_panels / 2),
            max_panels: opts.max_panels,
        }
    };
    let est = match disp.domain() {
        Some((a, b)) => {
            let o = quad(a, b);
            integrate(integrand, a, b, &o)?
        }
        None if both_gaussian => {
            let reach = T::lit(14.0);
            let lo = (env1.k_bar - reach * env1.sigma).min(env2.k_bar - reach * env2.sigma);
            let hi = (env1.k_bar + reach * env1.sigma).max(env2.k_bar + reach * env2.sigma);
            // The kink of |k| at 0 must sit on a panel edge.
            if lo < T::zero() && hi > T::zero() {
                let left = integrate(integrand, lo, T::zero(), &quad(lo, T::zero()))?;
                let right = integrate(integrand, T::zero(), hi, &quad(T::zero(), hi))?;
                crate::quadrature::Estimate {
                    value: left.value + right.value,
                    error: left.error + right.error,
                }
            } else {
                integrate(integrand, lo, hi, &quad(lo, hi))?
            }
        }
        None => {
            let center = (env1.k_bar + env2.k_bar) * T::lit(0.5);
            let scale = env1.sigma.max(env2.sigma).max((env1.k_bar - env2.k_bar).abs());
            let mut o = quad(-T::one(), T::one());
            o.initial_panels = o.initial_panels.max(64);
            integrate_real_line(integrand, center, scale, &o)?
        }
    };
    let bound = match disp {
        Dispersion::Linear { c } if both_gaussian && env1.sigma == env2.sigma => {
            let k_minus = (env1.k_bar - env2.k_bar) * T::lit(0.5);
            Some(gaussian_linear_magnitude(k_minus, dx - *c * dt, env1.sigma))
        }
        _ => None,
    };
    Ok(CommutatorResult {
        value: est.value,
        cone_distance: cone_distance(p),
        bound,
        error: est.error,
    })
}

/// Exact `|I|` for two Gaussian envelopes of width `σ` (the `exp[−q²/4σ²]`
/// amplitude convention) on a linear band, with `k₋ = (k̄ − p̄)/2` and
/// `d = (x̄ − ȳ) − c(t − t′)`. Valid when both packets live at `k > 0`.
pub fn gaussian_linear_magnitude<T: Real>(k_minus: T, d: T, sigma: T) -> T {
    let s2 = sigma * sigma;
    (-(k_minus * k_minus) / (T::lit(2.0) * s2) - s2 * d * d / T::lit(2.0)).exp()
}

/// `exp[−k₋²/s² − d²s²/4]`, the same magnitude written in terms of the
/// width `s` of an envelope with amplitude `exp[−q²/2s²]`, i.e. `s = √2 σ`.
pub fn gaussian_linear_magnitude_wide<T: Real>(k_minus: T, d: T, s: T) -> T {
    let s2 = s * s;
    (-(k_minus * k_minus) / s2 - d * d * s2 / T::lit(4.0)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", bound = "")]
pub enum DecayModel<T: Real> {
    /// `A d^{-n}`
    PowerLaw { exponent: T, prefactor: T },
    /// `A e^{-rate d}`
    Exponential { rate: T, prefactor: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DecayFit<T: Real> {
    pub model: DecayModel<T>,
    /// Coefficient of determination of the chosen model in log space.
    pub goodness: T,
    pub power_law: DecayModel<T>,
    pub exponential: DecayModel<T>,
    pub rss_power_law: T,
    pub rss_exponential: T,
}

impl<T: Real> DecayFit<T> {
    pub fn exponent(&self) -> Option<T> {
        match self.model {
            DecayModel::PowerLaw { exponent, .. } => Some(exponent),
            _ => None,
        }
    }

    pub fn rate(&self) -> Option<T> {
        match self.model {
            DecayModel::Exponential { rate, .. } => Some(rate),
            _ => None,
        }
    }

    pub fn power_law_exponent(&self) -> T {
        match self.power_law {
            DecayModel::PowerLaw { exponent, .. } => exponent,
            DecayModel::Exponential { .. } => unreachable!(),
        }
    }

    pub fn exponential_rate(&self) -> T {
        match self.exponential {
            DecayModel::Exponential { rate, .. } => rate,
            DecayModel::PowerLaw { .. } => unreachable!(),
        }
    }
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, rss, r²)`.
pub(crate) fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> (T, T, T, T) {
    let n = T::from_usize_lossy(xs.len());
    let mx = xs.iter().fold(T::zero(), |a, &v| a + v) / n;
    let my = ys.iter().fold(T::zero(), |a, &v| a + v) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss = xs
        .iter()
        .zip(ys)
        .fold(T::zero(), |acc, (&x, &y)| acc + (y - a - b * x).powi(2));
    let r2 = if syy > T::zero() { T::one() - rss / syy } else { T::one() };
    (a, b, rss, r2)
}

/// Fits `|f(d)|` samples with a power law (log–log) and an exponential
/// (log–linear) and keeps the one with the smaller residual.
pub fn decay_fit<T: Real>(samples: &[(T, T)]) -> Result<DecayFit<T>> {
    if samples.len() < 8 {
        return Err(Error::Fit(format!("need at least 8 samples, got {}", samples.len())));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Fit("distances must be strictly increasing".into()));
        }
    }
    if samples.iter().any(|&(_, m)| !(m > T::zero()) || !m.is_finite()) {
        return Err(Error::Fit("magnitudes must be positive and finite".into()));
    }
    let ys: Vec<T> = samples.iter().map(|&(_, m)| m.ln()).collect();
    let ds: Vec<T> = samples.iter().map(|&(d, _)| d).collect();
    let (ea, eb, erss, er2) = linear_fit(&ds, &ys);
    let exponential = DecayModel::Exponential {
        rate: -eb,
        prefactor: ea.exp(),
    };
    let (power_law, prss, pr2) = if samples[0].0 > T::zero() {
        let ls: Vec<T> = ds.iter().map(|d| d.ln()).collect();
        let (pa, pb, prss, pr2) = linear_fit(&ls, &ys);
        (
            DecayModel::PowerLaw {
                exponent: -pb,
                prefactor: pa.exp(),
            },
            prss,
            pr2,
        )
    } else {
        (
            DecayModel::PowerLaw {
                exponent: T::nan(),
                prefactor: T::nan(),
            },
            T::infinity(),
            T::neg_infinity(),
        )
    };
    let (model, goodness) = if prss < erss {
        (power_law, pr2)
    } else {
        (exponential, er2)
    };
    Ok(DecayFit {
        model,
        goodness,
        power_law,
        exponential,
        rss_power_law: prss,
        rss_exponential: erss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_distance_examples() {
        let p = SpacetimePair::new(3.0, 1.0, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(cone_distance(&p), 1.0);
        let p = SpacetimePair::new(3.0, 1.5, 0.0, 0.0, 2.0).unwrap();
        assert_eq!(cone_distance(&p), 0.0);
        let p = SpacetimePair::new(1.0, 1.0, 1.0, 1.0, 2.0).unwrap();
        assert_eq!(cone_distance(&p), 0.0);
    }

    #[test]
    fn identical_packets_commute_to_one() {
        let e = Envelope::gaussian(2.0f64, 0.3).unwrap();
        let p = SpacetimePair::new(0.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        let r = free_commutator(&e, &e, &p, &Dispersion::linear(1.0)).unwrap();
        assert!((r.value.norm() - 1.0).abs() < 1e-10);
        let l = Envelope::lorentzian(2.0f64, 0.3).unwrap();
        let r = free_commutator(&l, &l, &p, &Dispersion::linear(1.0)).unwrap();
        assert!((r.value.norm() - 1.0).abs() < 1e-8, "{:?}", r);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let e1 = Envelope::gaussian(3.2f64, 0.25).unwrap();
        let e2 = Envelope::gaussian(2.8, 0.25).unwrap();
        let p = SpacetimePair::new(12.0, 3.0, -1.0, 0.5, 1.0).unwrap();
        let r = free_commutator(&e1, &e2, &p, &Dispersion::linear(1.0)).unwrap();
        assert!((r.value.norm() - r.bound.unwrap()).abs() < 1e-10);
        let wide = gaussian_linear_magnitude_wide(0.2, 10.5, 0.25 * 2f64.sqrt());
        assert!((wide - r.bound.unwrap()).abs() < 1e-15);
    }

    #[test]
    fn power_law_synthetic() {
        let s: Vec<(f64, f64)> = (1..=12).map(|i| (i as f64 * 2.0, (i as f64 * 2.0).powi(-3))).collect();
        let f = decay_fit(&s).unwrap();
        assert!((f.exponent().unwrap() - 3.0).abs() < 0.05);
    }

    #[test]
    fn exponential_synthetic() {
        let s: Vec<(f64, f64)> = (1..=12).map(|i| (i as f64 * 3.0, (-0.2 * i as f64 * 3.0).exp())).collect();
        let f = decay_fit(&s).unwrap();
        assert!((f.rate().unwrap() - 0.2).abs() < 0.01);
        assert!(f.goodness > 0.999);
    }

    #[test]
    fn fit_rejects_bad_samples() {
        let mut s: Vec<(f64, f64)> = (1..=10).map(|i| (i as f64, 1.0 / i as f64)).collect();
        s[3].1 = 0.0;
        assert!(decay_fit(&s).is_err());
        assert!(decay_fit(&s[..5]).is_err());
    }
}
