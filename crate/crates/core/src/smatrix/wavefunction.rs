//! Two-photon output wavefunction for two packets separated by `l`,
//! its fluorescent (correlated) part, and the decay of fluorescence with `l`.
//!
//! Input: `Φ(k₁, k₂) = φ₁(k₁) φ₂(k₂) e^{i k₂ l}`, i.e. the second photon
//! trails the first by `l`. Output amplitude
//! `ψ_μ(p₁, p₂) = ⟨p₁ p₂; Ω_μ| S |Ψ_in⟩`, with `S = S⁰ + iT` and
//! `T = C δ(p₁ + p₂ + E_μ − k₁ − k₂ − E_ν)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{causal_integral, integrate_line, QuadOptions};
use crate::scalar::{ci, czero, Real, C};
use crate::wavepacket::{Envelope, EnvelopeKind};

use super::prony::{fit_exponentials, Exponential};
use super::rational::{residue_integral, sum_terms, Closure, PoleSum, ResidueTerm};
use super::tmatrix::TMatrix;

/// One separable pole term of the interacting kernel for channel `ν → μ`:
/// `C̃_{μν}(p₁, p₂; k₁, k₂) = residue / ((p₁ − pole)(p₂ − pole)(k₁ − pole)(k₂ − pole))`
/// on the shell `k₁ + k₂ = p₁ + p₂ + E_μ − E_ν`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct KernelPole<T: Real> {
    pub mu: usize,
    pub nu: usize,
    pub residue: C<T>,
    pub pole: C<T>,
}

/// User-supplied on-shell kernel `C̃` as a list of simple poles.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct KernelC<T: Real> {
    #[serde(default)]
    pub terms: Vec<KernelPole<T>>,
}

impl<T: Real> KernelC<T> {
    pub fn none() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn validate(&self, levels: usize) -> Result<()> {
        for t in &self.terms {
            if t.mu >= levels || t.nu >= levels {
                return Err(invalid("kernel.terms", format!("channel ({}, {}) outside {levels} ground states", t.mu, t.nu)));
            }
            if !(t.pole.im < T::zero()) {
                return Err(invalid("kernel.terms.pole", "poles must lie in the lower half-plane"));
            }
        }
        Ok(())
    }

    /// `|γ^C|` for the channel.
    pub fn rates(&self, mu: usize, nu: usize) -> Vec<T> {
        self.terms
            .iter()
            .filter(|t| t.mu == mu && t.nu == nu)
            .map(|t| t.pole.im.abs())
            .collect()
    }

    fn value(&self, mu: usize, nu: usize, p: [T; 2], total: T, k: T) -> C<T> {
        self.terms
            .iter()
            .filter(|t| t.mu == mu && t.nu == nu)
            .fold(czero(), |acc, t| {
                let kc = C::new(k, T::zero());
                let den = (kc - t.pole) * (C::new(total, T::zero()) - kc - t.pole);
                acc + t.residue * Self::outgoing(t, p) / den
            })
    }

    fn outgoing(t: &KernelPole<T>, p: [T; 2]) -> C<T> {
        let one = C::new(T::one(), T::zero());
        one / ((C::new(p[0], T::zero()) - t.pole) * (C::new(p[1], T::zero()) - t.pole))
    }
}

/// Two incoming packets; the second trails the first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct PacketPair<T: Real> {
    pub first: Envelope<T>,
    pub second: Envelope<T>,
}

impl<T: Real> PacketPair<T> {
    pub fn lorentzian(k1: T, k2: T, sigma: T) -> Result<Self> {
        Ok(Self {
            first: Envelope::lorentzian(k1, sigma)?,
            second: Envelope::lorentzian(k2, sigma)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.first.validate()?;
        self.second.validate()
    }

    fn pole_factor(e: &Envelope<T>) -> Result<PoleSum<T>> {
        if e.kind != EnvelopeKind::Lorentzian {
            return Err(Error::Precondition(
                "residue evaluation needs Lorentzian envelopes; use the quadrature path".into(),
            ));
        }
        let norm = (e.sigma / T::PI()).sqrt();
        Ok(PoleSum::simple(C::new(e.k_bar, -e.sigma), C::new(norm, T::zero())))
    }

    /// Input amplitude `Φ(k₁, k₂)`.
    pub fn input(&self, k1: T, k2: T, l: T) -> C<T> {
        self.first.value(k1) * self.second.value(k2) * C::new(T::zero(), k2 * l).exp()
    }
}

/// Exponential series `Σ c_j e^{i ω_j l}` of `ψ_μ(p₁, p₂)`, valid for `l > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSeries<T: Real> {
    pub p: [T; 2],
    pub terms: Vec<ResidueTerm<T>>,
}

impl<T: Real> AmplitudeSeries<T> {
    pub fn total(&self, l: T) -> C<T> {
        sum_terms(&self.terms, l)
    }

    /// Non-decaying part from the `i0⁺` poles: the chronologically ordered
    /// product of one-photon events.
    pub fn elastic(&self, l: T) -> C<T> {
        self.terms
            .iter()
            .filter(|t| t.causal)
            .fold(czero(), |acc, t| acc + t.coefficient * (ci::<T>() * t.frequency * l).exp())
    }

    /// Everything else, which decays with `l`.
    pub fn correlated(&self, l: T) -> C<T> {
        self.total(l) - self.elastic(l)
    }
}

/// Which parts of `S` to include.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    S0,
    Full,
}

/// Residue closure of the output amplitude at `(p₁, p₂)`. Terms with
/// `e^{i(P−k)l}` close below, terms with `e^{ikl}` close above.
pub fn amplitude_series<T: Real>(
    tm: &TMatrix<T>,
    kernel: &KernelC<T>,
    pair: &PacketPair<T>,
    part: Part,
    mu: usize,
    nu: usize,
    p: [T; 2],
) -> Result<AmplitudeSeries<T>> {
    let spec = &tm.spec;
    let e = &spec.ground;
    let total = p[0] + p[1] + e[mu] - e[nu];
    let tc = C::new(total, T::zero());
    let phi1 = PacketPair::pole_factor(&pair.first)?;
    let phi2 = PacketPair::pole_factor(&pair.second)?;
    let axis = T::tol(1e-9);
    let pref = ci::<T>() / (T::lit(2.0) * T::PI());
    let mut terms = Vec::new();
    let mut push = |raw: Vec<ResidueTerm<T>>, scale: C<T>, shift: T| {
        for r in raw {
            terms.push(ResidueTerm {
                coefficient: r.coefficient * scale,
                frequency: r.frequency + C::new(shift, T::zero()),
                causal: r.causal,
            });
        }
    };
    for lambda in 0..spec.m {
        let t_late = tm.factor(mu, lambda);
        let t_early = tm.factor(lambda, nu).reflected(tc);
        for pm in p {
            let q = pm + e[mu] - e[lambda];
            // Photon 1 carries k: wrong chronological order, decays.
            let a = [t_late.clone(), t_early.clone(), PoleSum::causal(q), phi1.clone(), phi2.reflected(tc)];
            push(residue_integral(&a, Closure::Lower, axis)?, pref, total);
            // Photon 2 carries k.
            let b = [t_late.clone(), t_early.clone(), PoleSum::causal(q), phi1.reflected(tc), phi2.clone()];
            push(residue_integral(&b, Closure::Upper, axis)?, pref, T::zero());
        }
    }
    if part == Part::Full {
        for kp in kernel.terms.iter().filter(|t| t.mu == mu && t.nu == nu) {
            let f = [
                PoleSum::simple(kp.pole, kp.residue * KernelC::outgoing(kp, p)),
                PoleSum::simple(kp.pole, C::new(T::one(), T::zero())).reflected(tc),
                phi1.clone(),
                phi2.reflected(tc),
            ];
            push(residue_integral(&f, Closure::Lower, axis)?, ci(), total);
        }
    }
    Ok(AmplitudeSeries { p, terms })
}

/// The same amplitude by direct quadrature over the real line, with
/// `1/(q − k + i0⁺)` split into principal value and `−iπδ`. Works for any
/// envelope kind.
pub fn amplitude_quadrature<T: Real>(
    tm: &TMatrix<T>,
    kernel: &KernelC<T>,
    pair: &PacketPair<T>,
    part: Part,
    mu: usize,
    nu: usize,
    p: [T; 2],
    l: T,
    opts: &QuadOptions<T>,
) -> Result<C<T>> {
    let spec = &tm.spec;
    let e = &spec.ground;
    let total = p[0] + p[1] + e[mu] - e[nu];
    let pref = ci::<T>() / (T::lit(2.0) * T::PI());
    let width = pair.first.sigma.max(pair.second.sigma);
    let t = |a: usize, b: usize, k: T| tm.eval(a, b, C::new(k, T::zero()));
    let mut acc = czero::<T>();
    for lambda in 0..spec.m {
        for pm in p {
            let q = pm + e[mu] - e[lambda];
            let fa = |k: T| {
                t(mu, lambda, k) * t(lambda, nu, total - k) * pair.input(k, total - k, l)
            };
            let fb = |k: T| {
                t(mu, lambda, k) * t(lambda, nu, total - k) * pair.input(total - k, k, l)
            };
            acc += pref * causal_integral(fa, q, width, opts)?.value;
            acc += pref * causal_integral(fb, q, width, opts)?.value;
        }
    }
    if part == Part::Full && !kernel.terms.is_empty() {
        let f = |k: T| kernel.value(mu, nu, p, total, k) * pair.input(k, total - k, l);
        acc += ci::<T>() * integrate_line(f, pair.first.k_bar, width, opts)?.value;
    }
    Ok(acc)
}

/// Residue and quadrature values on a set of output momenta.
#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct OutputPoint<T: Real> {
    pub p1: T,
    pub p2: T,
    pub residue: C<T>,
    pub quadrature: C<T>,
    pub elastic: C<T>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct OutputWavefunction<T: Real> {
    pub l: T,
    pub mu: usize,
    pub nu: usize,
    pub points: Vec<OutputPoint<T>>,
    pub max_difference: T,
}

/// Evaluates the output amplitude both ways on `grid`.
pub fn output_wavefunction<T: Real>(
    tm: &TMatrix<T>,
    kernel: &KernelC<T>,
    pair: &PacketPair<T>,
    l: T,
    mu: usize,
    nu: usize,
    grid: &[(T, T)],
    opts: &QuadOptions<T>,
) -> Result<OutputWavefunction<T>> {
    if !(l > T::zero()) {
        return Err(invalid("l", "separation must be positive"));
    }
    pair.validate()?;
    kernel.validate(tm.channels())?;
    let mut points = Vec::with_capacity(grid.len());
    let mut worst = T::zero();
    for &(p1, p2) in grid {
        let s = amplitude_series(tm, kernel, pair, Part::Full, mu, nu, [p1, p2])?;
        let r = s.total(l);
        let q = amplitude_quadrature(tm, kernel, pair, Part::Full, mu, nu, [p1, p2], l, opts)?;
        worst = worst.max((r - q).norm());
        points.push(OutputPoint {
            p1,
            p2,
            residue: r,
            quadrature: q,
            elastic: s.elastic(l),
        });
    }
    Ok(OutputWavefunction {
        l,
        mu,
        nu,
        points,
        max_difference: worst,
    })
}

/// Tensor-product grid on the plane with `p = c + s·u/(1 − u²)` per axis.
#[derive(Debug, Clone)]
pub struct MomentumGrid<T: Real> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> MomentumGrid<T> {
    pub fn new(center: T, scale: T, n: usize) -> Self {
        let (u, w) = crate::quadrature::gauss_legendre::<T>(n);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (ui, wi) in u.iter().zip(&w) {
            let d = T::one() - *ui * *ui;
            nodes.push(center + scale * *ui / d);
            weights.push(*wi * scale * (T::one() + *ui * *ui) / (d * d));
        }
        Self { nodes, weights }
    }
}

/// Fluorescence `F(l) = ½ Σ_μ ∫∫ |ψ_μ − ψ_μ^{elastic}|² dp₁ dp₂` for each `l`.
pub fn fluorescence_curve<T: Real>(
    tm: &TMatrix<T>,
    kernel: &KernelC<T>,
    pair: &PacketPair<T>,
    nu: usize,
    ls: &[T],
    grid: &MomentumGrid<T>,
) -> Result<Vec<T>> {
    let mut f = vec![T::zero(); ls.len()];
    for mu in 0..tm.channels() {
        for (i, p1) in grid.nodes.iter().enumerate() {
            for (j, p2) in grid.nodes.iter().enumerate() {
                let s = amplitude_series(tm, kernel, pair, Part::Full, mu, nu, [*p1, *p2])?;
                let w = grid.weights[i] * grid.weights[j] * T::lit(0.5);
                for (fl, l) in f.iter_mut().zip(ls) {
                    *fl += w * s.correlated(*l).norm_sqr();
                }
            }
        }
    }
    Ok(f)
}

/// A candidate decay rate and where it comes from.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(bound = "")]
pub struct ExpectedRate<T: Real> {
    pub source: String,
    pub rate: T,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct RateMatch<T: Real> {
    pub fitted: T,
    pub source: String,
    pub expected: T,
    pub relative_error: T,
}

#[derive(Debug, Clone, Serialize)]
#[serde(bound = "")]
pub struct DecayReport<T: Real> {
    pub ls: Vec<T>,
    pub fluorescence: Vec<T>,
    /// Distinct decay rates of the correlated amplitude.
    pub fitted: Vec<T>,
    pub expected: Vec<ExpectedRate<T>>,
    pub matches: Vec<RateMatch<T>>,
    /// Every fitted rate lies within 5% of an expected one.
    pub all_matched: bool,
}

/// Relative tolerance for matching a fitted rate to a pole.
pub const RATE_MATCH: f64 = 0.05;

/// Fits the decay of the correlated amplitude against `l` and assigns the
/// rates to `{σ, |γ^t_n|, |γ^C_n|}`.
///
/// The amplitude is sampled at a few output momenta around the packet
/// centers; rates found at any probe are pooled and merged within 1%.
/// `ls` must be uniform and cover at least two decades of the slowest
/// expected decay.
pub fn decay_rates<T: Real>(
    tm: &TMatrix<T>,
    kernel: &KernelC<T>,
    pair: &PacketPair<T>,
    mu: usize,
    nu: usize,
    ls: &[T],
    grid: &MomentumGrid<T>,
) -> Result<DecayReport<T>> {
    pair.validate()?;
    kernel.validate(tm.channels())?;
    if ls.len() < 16 {
        return Err(Error::Precondition("need at least 16 separations".into()));
    }
    let dl = ls[1] - ls[0];
    if !(dl > T::zero()) || ls.windows(2).any(|w| ((w[1] - w[0]) - dl).abs() > T::tol(1e-9) * dl.max(T::one())) {
        return Err(Error::Precondition("separations must be uniformly spaced and increasing".into()));
    }
    if !(ls[0] > T::zero()) {
        return Err(invalid("l", "separations must be positive"));
    }
    let mut expected = vec![ExpectedRate {
        source: "packet width σ".into(),
        rate: pair.first.sigma,
    }];
    if pair.second.sigma != pair.first.sigma {
        expected.push(ExpectedRate {
            source: "second packet width σ".into(),
            rate: pair.second.sigma,
        });
    }
    for (n, g) in tm.gammas().iter().enumerate() {
        expected.push(ExpectedRate {
            source: format!("one-photon pole γ^t_{n}"),
            rate: g.abs(),
        });
    }
    for (n, g) in kernel.rates(mu, nu).iter().enumerate() {
        expected.push(ExpectedRate {
            source: format!("kernel pole γ^C_{n}"),
            rate: *g,
        });
    }
    for (i, a) in expected.iter().enumerate() {
        for b in &expected[i + 1..] {
            if (a.rate - b.rate).abs() <= T::lit(0.01) * a.rate.max(b.rate) && a.rate != b.rate {
                return Err(Error::Fit(format!(
                    "expected rates {} ({}) and {} ({}) are within 1% and cannot be separated",
                    a.rate, a.source, b.rate, b.source
                )));
            }
        }
    }
    expected.dedup_by(|a, b| a.rate == b.rate);
    let slowest = expected.iter().fold(T::infinity(), |m, e| m.min(e.rate));
    let span = ls[ls.len() - 1] - ls[0];
    if span * slowest < T::lit(100.0f64.ln()) {
        return Err(Error::Precondition(format!(
            "separations span {span}, less than two decades of the slowest rate {slowest}"
        )));
    }
    let (k1, k2) = (pair.first.k_bar, pair.second.k_bar);
    let s = pair.first.sigma.max(pair.second.sigma);
    let shift = tm.spec.channel_shift(mu, nu);
    let probes = [
        [k1 + shift, k2],
        [k1 + shift + s, k2 - s],
        [k2 + shift - T::lit(2.0) * s, k1 + T::lit(3.0) * s],
    ];
    let mut pooled: Vec<Exponential<T>> = Vec::new();
    for p in probes {
        let series = amplitude_series(tm, kernel, pair, Part::Full, mu, nu, p)?;
        let y: Vec<C<T>> = ls.iter().map(|l| series.correlated(*l)).collect();
        let fit = fit_exponentials(&y, dl, 16, T::tol(1e-9), T::tol(1e-9))?;
        pooled.extend(fit);
    }
    let mut fitted: Vec<T> = Vec::new();
    pooled.sort_by(|a, b| a.rate.partial_cmp(&b.rate).unwrap_or(std::cmp::Ordering::Equal));
    for e in pooled {
        if !(e.rate > T::zero()) {
            continue;
        }
        if let Some(last) = fitted.last() {
            if (e.rate - *last).abs() <= T::lit(0.01) * e.rate {
                continue;
            }
        }
        fitted.push(e.rate);
    }
    let mut matches = Vec::new();
    let mut all_matched = !fitted.is_empty();
    for f in &fitted {
        let best = expected
            .iter()
            .map(|e| (e, (*f - e.rate).abs() / e.rate))
            .fold(None, |best: Option<(&ExpectedRate<T>, T)>, c| match best {
                Some(b) if b.1 <= c.1 => Some(b),
                _ => Some(c),
            })
            .expect("non-empty expected set");
        if best.1 > T::lit(RATE_MATCH) {
            all_matched = false;
        }
        matches.push(RateMatch {
            fitted: *f,
            source: best.0.source.clone(),
            expected: best.0.rate,
            relative_error: best.1,
        });
    }
    let fluorescence = fluorescence_curve(tm, kernel, pair, nu, ls, grid)?;
    Ok(DecayReport {
        ls: ls.to_vec(),
        fluorescence,
        fitted,
        expected,
        matches,
        all_matched,
    })
}
