use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::scalar::{Real, C};

/// Scatterer with `M` ground states and `M′` decaying states on a chiral
/// line with `ω = k` (units with `c = 1`).
///
/// `H_int = Σ g[J][ν] (|J⟩⟨Ω_ν| a₀ + h.c.)` with `a₀ = ∫ dk a_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct ScattererSpec<T: Real> {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "M_prime")]
    pub m_prime: usize,
    /// Ground energies `E_ν`.
    #[serde(rename = "E")]
    pub ground: Vec<T>,
    /// Excited energies `Ẽ_J`.
    #[serde(rename = "E_tilde")]
    pub excited: Vec<T>,
    /// `g[J][ν]`, rows are excited states.
    #[serde(serialize_with = "ser_coupling", deserialize_with = "de_coupling")]
    pub g: Vec<Vec<C<T>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, bound = "")]
enum Entry<T: Real> {
    Real(T),
    Complex([T; 2]),
}

fn ser_coupling<T: Real, S: Serializer>(g: &[Vec<C<T>>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<Entry<T>>> = g
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| {
                    if v.im == T::zero() {
                        Entry::Real(v.re)
                    } else {
                        Entry::Complex([v.re, v.im])
                    }
                })
                .collect()
        })
        .collect();
    rows.serialize(s)
}

fn de_coupling<'de, T: Real, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<C<T>>>, D::Error> {
    let rows: Vec<Vec<Entry<T>>> = Vec::deserialize(d)?;
    Ok(rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|e| match e {
                    Entry::Real(x) => C::new(x, T::zero()),
                    Entry::Complex([re, im]) => C::new(re, im),
                })
                .collect()
        })
        .collect())
}

impl<T: Real> ScattererSpec<T> {
    pub fn new(ground: Vec<T>, excited: Vec<T>, g: Vec<Vec<C<T>>>) -> Result<Self> {
        let s = Self {
            m: ground.len(),
            m_prime: excited.len(),
            ground,
            excited,
            g,
        };
        s.validate()?;
        Ok(s)
    }

    /// Two-level chiral atom with splitting `delta` and decay rate
    /// `Γ = 2π|g|²`.
    pub fn two_level(delta: T, gamma: T) -> Self {
        let g = (gamma / (T::lit(2.0) * T::PI())).sqrt();
        Self::new(vec![T::zero()], vec![delta], vec![vec![C::new(g, T::zero())]]).expect("valid two-level spec")
    }

    /// Λ system: two ground states sharing one excited level.
    pub fn lambda(e1: T, e_excited: T, g0: T, g1: T) -> Self {
        Self::new(
            vec![T::zero(), e1],
            vec![e_excited],
            vec![vec![C::new(g0, T::zero()), C::new(g1, T::zero())]],
        )
        .expect("valid lambda spec")
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(invalid("M", "need at least one ground state"));
        }
        if self.m_prime < 1 {
            return Err(invalid("M_prime", "need at least one excited state"));
        }
        if self.ground.len() != self.m {
            return Err(invalid("E", format!("expected {} entries, got {}", self.m, self.ground.len())));
        }
        if self.excited.len() != self.m_prime {
            return Err(invalid(
                "E_tilde",
                format!("expected {} entries, got {}", self.m_prime, self.excited.len()),
            ));
        }
        if self.ground.iter().chain(&self.excited).any(|e| !e.is_finite()) {
            return Err(invalid("E", "energies must be finite"));
        }
        if self.g.len() != self.m_prime || self.g.iter().any(|row| row.len() != self.m) {
            return Err(invalid("g", format!("must be an {}x{} matrix (rows = excited states)", self.m_prime, self.m)));
        }
        if self.g.iter().flatten().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(invalid("g", "entries must be finite"));
        }
        Ok(())
    }

    /// Coupling as an `M′ × M` matrix.
    pub fn coupling(&self) -> CMatrix<T> {
        CMatrix::from_fn(self.m_prime, self.m, |j, nu| self.g[j][nu])
    }

    /// Spectator line: all couplings zero.
    pub fn decoupled(&self) -> Self {
        Self {
            g: vec![vec![C::new(T::zero(), T::zero()); self.m]; self.m_prime],
            ..self.clone()
        }
    }

    /// Momentum shift of the outgoing photon for the channel `ν → μ`:
    /// `p = k + E_ν − E_μ`.
    pub fn channel_shift(&self, mu: usize, nu: usize) -> T {
        self.ground[nu] - self.ground[mu]
    }
}
