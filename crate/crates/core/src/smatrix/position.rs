//! Position-space one- and two-photon `S⁰` kernels.

use serde::Serialize;

use crate::scalar::{ci, czero, expi, Real, C};

use super::tmatrix::TMatrix;

/// `(1/√2π) ∫ dy e^{−iqy} θ(∓(y − y₀))` for real `q ≠ 0`, with the
/// regulator `η ≥ 0` in place of `0⁺`. `before = true` selects
/// `θ(y₀ − y)`.
pub fn step_transform<T: Real>(q: T, y0: T, before: bool, eta: T) -> C<T> {
    let norm = T::one() / (T::lit(2.0) * T::PI()).sqrt();
    let sign = if before { T::one() } else { -T::one() };
    let phase = expi(-q * y0);
    ci::<T>() * sign * norm * phase / C::new(q, sign * eta)
}

/// `θ(s)` with `θ(0) = 1/2`.
pub fn heaviside<T: Real>(s: T) -> T {
    if s > T::zero() {
        T::one()
    } else if s < T::zero() {
        T::zero()
    } else {
        T::lit(0.5)
    }
}

/// One-photon position kernel
/// `(S_yx)_{μν} = e^{i(E_ν − E_μ) y} [δ_{μν} δ(y − x) + K_{μν}(y − x)]`,
/// with the retarded part `K(s) = −i Σ_n R_n e^{i(z_n − E_ν)s} θ(−s)`.
#[derive(Debug, Clone, Copy)]
pub struct PositionKernel<'a, T: Real> {
    pub tmatrix: &'a TMatrix<T>,
}

impl<'a, T: Real> PositionKernel<'a, T> {
    pub fn new(tmatrix: &'a TMatrix<T>) -> Self {
        Self { tmatrix }
    }

    pub fn phase(&self, mu: usize, nu: usize, y: T) -> C<T> {
        expi(self.tmatrix.spec.channel_shift(mu, nu) * y)
    }

    /// Coefficient of `δ(y − x)`.
    pub fn local(&self, mu: usize, nu: usize, y: T) -> C<T> {
        if mu == nu {
            self.phase(mu, nu, y)
        } else {
            czero()
        }
    }

    /// Regular part at `(y, x)`, phase included.
    pub fn regular(&self, mu: usize, nu: usize, y: T, x: T) -> C<T> {
        let s = y - x;
        let h = heaviside(-s);
        if h == T::zero() {
            return czero();
        }
        let e = self.tmatrix.spec.ground[nu];
        let k: C<T> = self
            .tmatrix
            .poles
            .iter()
            .zip(&self.tmatrix.residues)
            .fold(czero(), |acc, (z, r)| acc + r[(mu, nu)] * (ci::<T>() * (*z - e) * s).exp());
        -ci::<T>() * k * h * self.phase(mu, nu, y)
    }
}

/// `coefficient · Π δ(y_a − x_b)` over the listed `(a, b)` pairs.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct DeltaTerm<T: Real> {
    pub coefficient: C<T>,
    pub deltas: Vec<(usize, usize)>,
}

/// Two-photon position-space `S⁰` at one point, as a sum of smooth
/// coefficients times delta factors.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "")]
pub struct PositionS0<T: Real> {
    pub terms: Vec<DeltaTerm<T>>,
}

impl<T: Real> PositionS0<T> {
    fn add(&mut self, coefficient: C<T>, mut deltas: Vec<(usize, usize)>) {
        if coefficient == czero() {
            return;
        }
        deltas.sort_unstable();
        if let Some(t) = self.terms.iter_mut().find(|t| t.deltas == deltas) {
            t.coefficient += coefficient;
        } else {
            self.terms.push(DeltaTerm { coefficient, deltas });
        }
    }

    /// Coefficient of the given delta set (empty set = fully regular part).
    pub fn coefficient(&self, deltas: &[(usize, usize)]) -> C<T> {
        let mut key = deltas.to_vec();
        key.sort_unstable();
        self.terms
            .iter()
            .find(|t| t.deltas == key)
            .map(|t| t.coefficient)
            .unwrap_or_else(czero)
    }
}

/// Two-photon `S⁰` kernel in position space for the transition `ν → μ`:
///
/// `Σ_λ Σ_{n,m} (S_{y_n x_m})_{μλ} (S_{y_n' x_m'})_{λν} θ(y_n' − y_n)`.
///
/// The photon scattered first (channel `ν → λ`) leaves ahead, at the larger
/// output coordinate.
pub fn s0_position<T: Real>(tm: &TMatrix<T>, y: [T; 2], x: [T; 2], mu: usize, nu: usize) -> PositionS0<T> {
    s0_position_with(tm, y, x, mu, nu, true)
}

fn s0_position_with<T: Real>(tm: &TMatrix<T>, y: [T; 2], x: [T; 2], mu: usize, nu: usize, ordered: bool) -> PositionS0<T> {
    let k = PositionKernel::new(tm);
    let mut out = PositionS0 { terms: Vec::new() };
    for lambda in 0..tm.channels() {
        for n in 0..2 {
            let np = 1 - n;
            let order = if ordered { heaviside(y[np] - y[n]) } else { T::lit(0.5) };
            if order == T::zero() {
                continue;
            }
            for m in 0..2 {
                let mp = 1 - m;
                let (ya, xa, yb, xb) = (y[n], x[m], y[np], x[mp]);
                let la = k.local(mu, lambda, ya);
                let ra = k.regular(mu, lambda, ya, xa);
                let lb = k.local(lambda, nu, yb);
                let rb = k.regular(lambda, nu, yb, xb);
                let w = C::new(order, T::zero());
                out.add(w * la * lb, vec![(n, m), (np, mp)]);
                out.add(w * la * rb, vec![(n, m)]);
                out.add(w * ra * lb, vec![(np, mp)]);
                out.add(w * ra * rb, vec![]);
            }
        }
    }
    out
}

/// Symmetrized product of one-photon kernels, `S_{y₁x₁}S_{y₂x₂} + S_{y₁x₂}S_{y₂x₁}`,
/// for a single ground state.
pub fn product_position<T: Real>(tm: &TMatrix<T>, y: [T; 2], x: [T; 2]) -> PositionS0<T> {
    let k = PositionKernel::new(tm);
    let mut out = PositionS0 { terms: Vec::new() };
    for m in 0..2 {
        let mp = 1 - m;
        let (l1, r1) = (k.local(0, 0, y[0]), k.regular(0, 0, y[0], x[m]));
        let (l2, r2) = (k.local(0, 0, y[1]), k.regular(0, 0, y[1], x[mp]));
        out.add(l1 * l2, vec![(0, m), (1, mp)]);
        out.add(l1 * r2, vec![(0, m)]);
        out.add(r1 * l2, vec![(1, mp)]);
        out.add(r1 * r2, vec![]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadOptions};
    use crate::scalar::cplx;
    use crate::smatrix::spec::ScattererSpec;

    #[test]
    fn step_transform_against_regulated_quadrature() {
        let eta = 0.05f64;
        let (q, y0) = (0.7, 1.3);
        let opts = QuadOptions::default().with_abs_tol(1e-11).with_panels(64);
        let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        // θ(y₀ − y) e^{η(y − y₀)} regulates the lower end.
        let before = integrate(
            |u: f64| {
                let y = y0 - u;
                cplx(0.0, -q * y).exp() * (-eta * u).exp() * norm
            },
            0.0,
            800.0,
            &opts,
        )
        .unwrap();
        let after = integrate(
            |u: f64| {
                let y = y0 + u;
                cplx(0.0, -q * y).exp() * (-eta * u).exp() * norm
            },
            0.0,
            800.0,
            &opts,
        )
        .unwrap();
        assert!((before.value - step_transform(q, y0, true, eta)).norm() < 1e-9);
        assert!((after.value - step_transform(q, y0, false, eta)).norm() < 1e-9);
    }

    #[test]
    fn regular_kernel_is_retarded_and_matches_two_level_form() {
        let gamma = 0.3f64;
        let tm = TMatrix::new(&ScattererSpec::two_level(1.0, gamma)).unwrap();
        let k = PositionKernel::new(&tm);
        assert_eq!(k.regular(0, 0, 1.0, 0.5), czero());
        let s = -2.0;
        let want = -gamma * cplx(0.0, s).exp() * (gamma * s / 2.0).exp();
        assert!((k.regular(0, 0, s, 0.0) - want).norm() < 1e-13);
    }

    #[test]
    fn single_ground_state_drops_the_ordering() {
        let tm = TMatrix::new(&ScattererSpec::two_level(0.8, 0.4)).unwrap();
        for (y, x) in [([0.3, -1.2], [1.0, 0.7]), ([-2.0, -0.5], [0.1, -0.4])] {
            let a = s0_position(&tm, y, x, 0, 0);
            let b = product_position(&tm, y, x);
            for t in &b.terms {
                assert!((a.coefficient(&t.deltas) - t.coefficient).norm() < 1e-13);
            }
            assert_eq!(a.terms.len(), b.terms.len());
        }
    }

    #[test]
    fn lambda_atom_ordering_matters() {
        let y = [-1.0, -2.0];
        let x = [0.5, -0.5];
        let tm = TMatrix::new(&ScattererSpec::<f64>::lambda(0.3, 1.0, 0.25, 0.2)).unwrap();
        let a = s0_position(&tm, y, x, 1, 0).coefficient(&[]);
        let b = s0_position_with(&tm, y, x, 1, 0, false).coefficient(&[]);
        assert!((a - b).norm() > 1e-3 * a.norm().max(b.norm()));
        // Bose symmetry in the outputs survives the ordering.
        let c = s0_position(&tm, [y[1], y[0]], x, 1, 0).coefficient(&[]);
        assert!((a - c).norm() < 1e-14);
        let tm1 = TMatrix::new(&ScattererSpec::two_level(1.0, 0.3)).unwrap();
        let a1 = s0_position(&tm1, y, x, 0, 0).coefficient(&[]);
        let b1 = s0_position_with(&tm1, y, x, 0, 0, false).coefficient(&[]);
        assert!((a1 - b1).norm() < 1e-14);
    }

    #[test]
    fn free_line_is_pure_delta() {
        let tm = TMatrix::new(&ScattererSpec::<f64>::lambda(0.3, 1.0, 0.2, 0.1).decoupled()).unwrap();
        let s = s0_position(&tm, [0.2, -0.7], [0.4, 1.1], 0, 0);
        assert!(s.terms.iter().all(|t| t.deltas.len() == 2));
        assert!((s.coefficient(&[(0, 0), (1, 1)]) - 1.0).norm() < 1e-15);
        assert!((s.coefficient(&[(0, 1), (1, 0)]) - 1.0).norm() < 1e-15);
    }
}
