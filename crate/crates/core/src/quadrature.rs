//! Adaptive Gauss–Kronrod and fixed Gauss–Legendre quadrature for complex
//! integrands over real intervals.

use crate::error::{Error, Result};
use crate::scalar::{czero, Real, C};

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Integration controls.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    /// Number of equal panels the interval is split into before refinement.
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            abs_tol: T::tol(1e-12),
            rel_tol: T::tol(1e-12),
            initial_panels: 8,
            max_panels: 20_000,
        }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn with_abs_tol(mut self, tol: T) -> Self {
        self.abs_tol = tol;
        self
    }

    pub fn with_panels(mut self, panels: usize) -> Self {
        self.initial_panels = panels.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Estimate<T: Real> {
    pub value: C<T>,
    pub error: T,
}

fn kronrod_panel<T: Real, F: FnMut(T) -> C<T>>(f: &mut F, a: T, b: T) -> (C<T>, T) {
    let half = (b - a) * T::lit(0.5);
    let mid = (a + b) * T::lit(0.5);
    let fc = f(mid);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let s = f(mid - dx) + f(mid + dx);
        kron += s * T::lit(WGK[j]);
        if j % 2 == 1 {
            gauss += s * T::lit(WG[j / 2]);
        }
    }
    let kron = kron * half;
    let gauss = gauss * half;
    (kron, (kron - gauss).norm())
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// The interval is first cut into `initial_panels` pieces so that oscillatory
/// integrands start from wavelength-scale panels; the panel with the largest
/// error estimate is bisected until the total error meets the tolerance.
pub fn integrate<T: Real, F: FnMut(T) -> C<T>>(
    mut f: F,
    a: T,
    b: T,
    opts: &QuadOptions<T>,
) -> Result<Estimate<T>> {
    if a == b {
        return Ok(Estimate {
            value: czero(),
            error: T::zero(),
        });
    }
    let n0 = opts.initial_panels.max(1);
    let width = (b - a) / T::from_usize_lossy(n0);
    let mut panels: Vec<(T, T, C<T>, T)> = Vec::with_capacity(n0 * 2);
    for i in 0..n0 {
        let lo = a + width * T::from_usize_lossy(i);
        let hi = if i + 1 == n0 { b } else { lo + width };
        let (v, e) = kronrod_panel(&mut f, lo, hi);
        panels.push((lo, hi, v, e));
    }
    loop {
        let total: C<T> = panels.iter().fold(czero(), |acc, p| acc + p.2);
        let err: T = panels.iter().fold(T::zero(), |acc, p| acc + p.3);
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= target {
            return Ok(Estimate {
                value: total,
                error: err,
            });
        }
        if panels.len() >= opts.max_panels {
            return Err(Error::Quadrature {
                tol: target.as_f64(),
                estimate: err.as_f64(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0usize, T::neg_infinity()), |best, (i, p)| {
                if p.3 > best.1 {
                    (i, p.3)
                } else {
                    best
                }
            });
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = (lo + hi) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature {
                tol: target.as_f64(),
                estimate: err.as_f64(),
            });
        }
        let (v1, e1) = kronrod_panel(&mut f, lo, mid);
        let (v2, e2) = kronrod_panel(&mut f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// Integrates over the whole real line with the substitution
/// `k = center + scale * u / (1 - u^2)`, `u in (-1, 1)`.
pub fn integrate_real_line<T: Real, F: FnMut(T) -> C<T>>(
    mut f: F,
    center: T,
    scale: T,
    opts: &QuadOptions<T>,
) -> Result<Estimate<T>> {
    let one = T::one();
    let g = move |u: T| {
        let d = one - u * u;
        if d <= T::zero() {
            return czero();
        }
        let k = center + scale * u / d;
        let jac = scale * (one + u * u) / (d * d);
        let v = f(k);
        if v.re.is_finite() && v.im.is_finite() {
            v * jac
        } else {
            czero()
        }
    };
    integrate(g, -one, one, opts)
}

/// `∫_ℝ f` as a window `[c − w, c + w]` plus the tails mapped by
/// `k = c ± w/s`. Suited to oscillatory integrands decaying at least as
/// `1/k³`, where the mapped tail integrand vanishes at `s = 0`.
pub fn integrate_line<T: Real, F: Fn(T) -> C<T>>(f: F, center: T, half_width: T, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    let w = half_width;
    let f = &f;
    let mid = integrate(f, center - w, center + w, opts)?;
    let tail = |sign: T| {
        move |s: T| {
            if s <= T::zero() {
                return czero();
            }
            let v = f(center + sign * w / s) * (w / (s * s));
            if v.re.is_finite() && v.im.is_finite() {
                v
            } else {
                czero()
            }
        }
    };
    let r = integrate(tail(T::one()), T::zero(), T::one(), opts)?;
    let l = integrate(tail(-T::one()), T::zero(), T::one(), opts)?;
    Ok(Estimate {
        value: mid.value + r.value + l.value,
        error: mid.error + r.error + l.error,
    })
}

/// Principal value `P ∫_ℝ f(k) / (k − q) dk`.
///
/// The window `[q − w, q + w]` is handled by subtracting `f(q)` (its
/// principal value vanishes there); the tails use `k = q ± w / s`.
pub fn principal_value<T: Real, F: Fn(T) -> C<T>>(f: F, q: T, half_width: T, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    let w = half_width;
    let f = &f;
    let fq = f(q);
    let inner = |k: T| (f(k) - fq) / (k - q);
    let a = integrate(inner, q - w, q, opts)?;
    let b = integrate(inner, q, q + w, opts)?;
    // Left tail: k − q = −w/s flips the sign of the kernel.
    let tail = |sign: T| {
        move |s: T| {
            if s <= T::zero() {
                return czero();
            }
            let v = f(q + sign * w / s) * sign / s;
            if v.re.is_finite() && v.im.is_finite() {
                v
            } else {
                czero()
            }
        }
    };
    let r = integrate(tail(T::one()), T::zero(), T::one(), opts)?;
    let l = integrate(tail(-T::one()), T::zero(), T::one(), opts)?;
    Ok(Estimate {
        value: a.value + b.value + r.value + l.value,
        error: a.error + b.error + r.error + l.error,
    })
}

/// `∫_ℝ f(k) / (q − k + i0⁺) dk = −P ∫ f/(k − q) − iπ f(q)`.
pub fn causal_integral<T: Real, F: Fn(T) -> C<T>>(f: F, q: T, half_width: T, opts: &QuadOptions<T>) -> Result<Estimate<T>> {
    let fq = f(q);
    let pv = principal_value(&f, q, half_width, opts)?;
    Ok(Estimate {
        value: -pv.value - C::new(T::zero(), T::PI()) * fq,
        error: pv.error,
    })
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut x = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Newton iteration from the Chebyshev-like initial guess, in f64.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            dp = nf * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = T::lit(-z);
        x[n - 1 - i] = T::lit(z);
        w[i] = T::lit(wi);
        w[n - 1 - i] = T::lit(wi);
    }
    (x, w)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` panels of
/// `order` points each.
pub fn composite_rule<T: Real>(a: T, b: T, panels: usize, order: usize) -> (Vec<T>, Vec<T>) {
    let (gx, gw) = gauss_legendre::<T>(order);
    let h = (b - a) / T::from_usize_lossy(panels);
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + h * T::from_usize_lossy(p);
        let mid = lo + h * T::lit(0.5);
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(mid + *x * h * T::lit(0.5));
            ws.push(*w * h * T::lit(0.5));
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::creal;

    #[test]
    fn principal_value_of_lorentzian() {
        // P ∫ 1/((k − q)(k² + 1)) dk = −π q / (q² + 1)
        let q = 0.6f64;
        let pv = principal_value(|k: f64| creal(1.0 / (k * k + 1.0)), q, 1.0, &QuadOptions::default()).unwrap();
        let want = -std::f64::consts::PI * q / (q * q + 1.0);
        assert!((pv.value.re - want).abs() < 1e-10, "{} vs {want}", pv.value.re);
        let c = causal_integral(|k: f64| creal(1.0 / (k * k + 1.0)), q, 1.0, &QuadOptions::default()).unwrap();
        assert!((c.value.im + std::f64::consts::PI / (q * q + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre::<f64>(10);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((s - 2.0 / 19.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_gaussian_matches_closed_form() {
        // ∫ e^{ikd} e^{-k^2} dk = sqrt(pi) e^{-d^2/4}
        let d = 7.5;
        let est = integrate(
            |k: f64| creal((-k * k).exp()) * crate::scalar::expi(k * d),
            -12.0,
            12.0,
            &QuadOptions::default().with_panels(32),
        )
        .unwrap();
        let exact = std::f64::consts::PI.sqrt() * (-d * d / 4.0).exp();
        assert!((est.value.re - exact).abs() < 1e-12);
        assert!(est.value.im.abs() < 1e-12);
    }

    #[test]
    fn real_line_lorentzian() {
        // ∫ 1/(k^2 + 1) dk = pi
        let est = integrate_real_line(
            |k: f64| creal(1.0 / (k * k + 1.0)),
            0.0,
            1.0,
            &QuadOptions::default(),
        )
        .unwrap();
        assert!((est.value.re - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn runs_in_single_precision() {
        let est = integrate(|k: f32| creal(k * k), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((est.value.re - 1.0 / 3.0).abs() < 1e-5);
    }
}
