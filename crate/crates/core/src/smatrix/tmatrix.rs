use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{ci, cone, czero, Real, C};

use super::rational::{Pole, PoleSum};
use super::spec::ScattererSpec;

/// One-photon channel amplitudes `t_{μν}(k)`, so that
/// `(S_pk)_{μν} = t_{μν}(k) δ(p + E_μ − k − E_ν)`.
///
/// Built from the single-excitation Lippmann–Schwinger solution
/// `t(k) = 1 − 2πi g† M(E)⁻¹ g`, `M(E) = E − Ẽ + iπ g g†`, `E = k + E_ν`.
/// The poles of `M⁻¹` are the eigenvalues `z_n` of `Ẽ − iπ g g†`; in terms
/// of the incident momentum of channel `ν` they sit at `k = z_n − E_ν`.
#[derive(Debug, Clone)]
pub struct TMatrix<T: Real> {
    pub spec: ScattererSpec<T>,
    /// Complex energies `z_n`.
    pub poles: Vec<C<T>>,
    /// `R_n` with `t(k) = 1 + Σ_n R_n / (k + E_ν − z_n)` column by column.
    pub residues: Vec<CMatrix<T>>,
}

/// Poles whose residue matrix is below this norm are decoupled (dark)
/// levels and dropped.
const DARK: f64 = 1e-13;

impl<T: Real> TMatrix<T> {
    pub fn new(spec: &ScattererSpec<T>) -> Result<Self> {
        spec.validate()?;
        let g = spec.coupling();
        let ggd = g.matmul(&g.adjoint());
        let ipi = ci::<T>() * T::PI();
        let a = CMatrix::from_fn(spec.m_prime, spec.m_prime, |r, c| {
            let d = if r == c { C::new(spec.excited[r], T::zero()) } else { czero() };
            d - ggd[(r, c)] * ipi
        });
        let z = a.eigenvalues()?;
        let scale = z.iter().fold(T::one(), |m, v| m.max(v.norm()));
        let mut poles = Vec::new();
        let mut residues = Vec::new();
        for (n, zn) in z.iter().enumerate() {
            let mut dp = cone::<T>();
            for (m, zm) in z.iter().enumerate() {
                if m != n {
                    dp *= *zn - *zm;
                }
            }
            let shifted = CMatrix::from_fn(a.rows, a.cols, |r, c| {
                if r == c {
                    *zn - a[(r, c)]
                } else {
                    -a[(r, c)]
                }
            });
            let adj = shifted.adjugate();
            let r = g.adjoint().matmul(&adj).matmul(&g).scale(-ci::<T>() * T::lit(2.0) * T::PI());
            if r.max_abs() <= T::tol(DARK) * scale {
                continue;
            }
            if dp.norm() <= T::tol(1e-10) * scale.powi(z.len() as i32 - 1) {
                return Err(Error::Precondition(format!(
                    "degenerate one-photon poles near {zn}; only simple poles are supported"
                )));
            }
            if zn.im.abs() <= T::tol(1e-12) * scale {
                return Err(Error::SingularPropagator { energy: zn.re.as_f64() });
            }
            poles.push(*zn);
            residues.push(r.scale(cone::<T>() / dp));
        }
        Ok(Self {
            spec: spec.clone(),
            poles,
            residues,
        })
    }

    pub fn channels(&self) -> usize {
        self.spec.m
    }

    /// Imaginary parts `γ^t_n` of the poles (all negative).
    pub fn gammas(&self) -> Vec<T> {
        self.poles.iter().map(|z| z.im).collect()
    }

    /// Direct evaluation by solving `M(E) X = g` at a real momentum.
    pub fn matrix(&self, k: T) -> Result<CMatrix<T>> {
        let s = &self.spec;
        let g = s.coupling();
        let ggd = g.matmul(&g.adjoint());
        let mut out = CMatrix::zeros(s.m, s.m);
        for nu in 0..s.m {
            let e = k + s.ground[nu];
            let m = CMatrix::from_fn(s.m_prime, s.m_prime, |r, c| {
                let d = if r == c { C::new(e - s.excited[r], T::zero()) } else { czero() };
                d + ggd[(r, c)] * ci::<T>() * T::PI()
            });
            let rhs = CMatrix::from_fn(s.m_prime, 1, |r, _| g[(r, nu)]);
            let x = m.solve(&rhs).map_err(|_| Error::SingularPropagator { energy: e.as_f64() })?;
            let gx = g.adjoint().matmul(&x);
            for mu in 0..s.m {
                let d = if mu == nu { cone::<T>() } else { czero() };
                out[(mu, nu)] = d - gx[(mu, 0)] * ci::<T>() * T::lit(2.0) * T::PI();
            }
        }
        Ok(out)
    }

    /// Pole-form value at a complex momentum.
    pub fn eval(&self, mu: usize, nu: usize, k: C<T>) -> C<T> {
        self.factor(mu, nu).eval(k)
    }

    /// `t_{μν}(k)` as a pole sum in `k`.
    pub fn factor(&self, mu: usize, nu: usize) -> PoleSum<T> {
        let e = self.spec.ground[nu];
        PoleSum {
            constant: if mu == nu { cone() } else { czero() },
            poles: self
                .poles
                .iter()
                .zip(&self.residues)
                .map(|(z, r)| Pole {
                    at: *z - e,
                    residue: r[(mu, nu)],
                    causal: false,
                })
                .collect(),
        }
    }

    /// `max_ν | Σ_μ |t_{μν}(k)|² − 1 |`.
    pub fn unitarity_error(&self, k: T) -> Result<T> {
        let t = self.matrix(k)?;
        let mut worst = T::zero();
        for nu in 0..self.spec.m {
            let s = (0..self.spec.m).fold(T::zero(), |a, mu| a + t[(mu, nu)].norm_sqr());
            worst = worst.max((s - T::one()).abs());
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    #[test]
    fn two_level_closed_form() {
        let (delta, gamma) = (1.0f64, 0.2);
        let tm = TMatrix::new(&ScattererSpec::two_level(delta, gamma)).unwrap();
        for k in [0.3, 0.9, 1.0, 1.4] {
            let t = tm.matrix(k).unwrap()[(0, 0)];
            let want = cplx(k - delta, -gamma / 2.0) / cplx(k - delta, gamma / 2.0);
            assert!((t - want).norm() < 1e-13);
            assert!((tm.eval(0, 0, cplx(k, 0.0)) - want).norm() < 1e-13);
        }
        assert!((tm.matrix(delta).unwrap()[(0, 0)] + 1.0).norm() < 1e-13);
        assert!((tm.gammas()[0] + gamma / 2.0).abs() < 1e-13);
    }

    #[test]
    fn decoupled_line_is_transparent() {
        let spec = ScattererSpec::<f64>::lambda(0.3, 1.0, 0.2, 0.1).decoupled();
        let tm = TMatrix::new(&spec).unwrap();
        assert!(tm.poles.is_empty());
        let t = tm.matrix(0.5).unwrap();
        assert!(t.sub(&CMatrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn pole_form_matches_direct_solve() {
        let spec: ScattererSpec<f64> = ScattererSpec::new(
            vec![0.0, 0.25],
            vec![1.0, 1.3],
            vec![
                vec![cplx(0.2, 0.0), cplx(0.1, 0.05)],
                vec![cplx(0.07, 0.0), cplx(0.15, 0.0)],
            ],
        )
        .unwrap();
        let tm = TMatrix::new(&spec).unwrap();
        assert_eq!(tm.poles.len(), 2);
        assert!(tm.gammas().iter().all(|g| *g < 0.0));
        for k in [-0.4, 0.5, 1.1, 2.0] {
            let direct = tm.matrix(k).unwrap();
            for mu in 0..2 {
                for nu in 0..2 {
                    assert!((direct[(mu, nu)] - tm.eval(mu, nu, cplx(k, 0.0))).norm() < 1e-12);
                }
            }
            assert!(tm.unitarity_error(k).unwrap() < 1e-12);
        }
    }
}
