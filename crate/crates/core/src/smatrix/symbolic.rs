//! Exact bookkeeping of the distribution-valued two-photon `S⁰` in momentum
//! space: overall energy delta times pole, principal-value and delta terms.
//!
//! Coefficients are rationals times `i^a π^b`, so the unique-ground-state
//! reduction is checked without any floating-point arithmetic.

use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Momentum variables in fixed order.
pub const VARS: [&str; 4] = ["p1", "p2", "k1", "k2"];
pub const P1: usize = 0;
pub const P2: usize = 1;
pub const K1: usize = 2;
pub const K2: usize = 3;

/// Integer combination of the momenta and the ground energies `E_λ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LinearForm {
    pub vars: [i64; 4],
    pub energies: Vec<i64>,
}

impl LinearForm {
    pub fn zero(levels: usize) -> Self {
        Self {
            vars: [0; 4],
            energies: vec![0; levels],
        }
    }

    pub fn var(mut self, v: usize, c: i64) -> Self {
        self.vars[v] += c;
        self
    }

    pub fn energy(mut self, level: usize, c: i64) -> Self {
        self.energies[level] += c;
        self
    }

    fn axpy(&self, a: i64, other: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..4 {
            out.vars[i] += a * other.vars[i];
        }
        for (e, o) in out.energies.iter_mut().zip(&other.energies) {
            *e += a * o;
        }
        out
    }

    fn neg(&self) -> Self {
        self.axpy(-2, self)
    }

    fn leading(&self) -> i64 {
        self.vars
            .iter()
            .chain(&self.energies)
            .copied()
            .find(|c| *c != 0)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.leading() == 0
    }

    /// Eliminates `p2` using `overall = 0` (its `p2` coefficient is 1).
    fn reduce(&self, overall: &Self) -> Self {
        self.axpy(-self.vars[P2], overall)
    }

    pub fn eval(&self, momenta: [f64; 4], energies: &[f64]) -> f64 {
        self.vars.iter().zip(momenta).map(|(c, v)| *c as f64 * v).sum::<f64>()
            + self.energies.iter().zip(energies).map(|(c, e)| *c as f64 * e).sum::<f64>()
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let names: Vec<String> = VARS
            .iter()
            .map(|s| s.to_string())
            .chain((0..self.energies.len()).map(|l| format!("E{l}")))
            .collect();
        for (c, name) in self.vars.iter().chain(&self.energies).zip(&names) {
            if *c == 0 {
                continue;
            }
            let sign = if *c < 0 { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            if mag != 1 {
                write!(f, "{mag}")?;
            }
            write!(f, "{name}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// `ratio · i^i_power · π^pi_power`, with `i_power ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Coefficient {
    #[serde(serialize_with = "ser_ratio")]
    pub ratio: Rational64,
    pub i_power: u8,
    pub pi_power: i32,
}

fn ser_ratio<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl Coefficient {
    pub fn new(ratio: Rational64, i_power: u8, pi_power: i32) -> Self {
        let mut c = Self {
            ratio,
            i_power: 0,
            pi_power,
        };
        for _ in 0..(i_power % 4) {
            c = c.times_i();
        }
        c
    }

    pub fn one() -> Self {
        Self::new(Rational64::one(), 0, 0)
    }

    fn times_i(mut self) -> Self {
        if self.i_power == 1 {
            self.ratio = -self.ratio;
            self.i_power = 0;
        } else {
            self.i_power = 1;
        }
        self
    }

    pub fn mul(self, o: Self) -> Self {
        let mut c = Self {
            ratio: self.ratio * o.ratio,
            i_power: self.i_power,
            pi_power: self.pi_power + o.pi_power,
        };
        if o.i_power == 1 {
            c = c.times_i();
        }
        c
    }

    pub fn neg(mut self) -> Self {
        self.ratio = -self.ratio;
        self
    }

    pub fn value(&self) -> num_complex::Complex64 {
        let r = *self.ratio.numer() as f64 / *self.ratio.denom() as f64 * std::f64::consts::PI.powi(self.pi_power);
        if self.i_power == 1 {
            num_complex::Complex64::new(0.0, r)
        } else {
            num_complex::Complex64::new(r, 0.0)
        }
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.ratio)?;
        if self.i_power == 1 {
            write!(f, "·i")?;
        }
        match self.pi_power {
            0 => Ok(()),
            1 => write!(f, "·π"),
            p => write!(f, "·π^{p}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Factor {
    /// `t_{μν}(k_var)`.
    T { mu: usize, nu: usize, var: usize },
    /// `1 / (f + i0⁺)`.
    Causal(LinearForm),
    /// `P(1/f)`.
    PrincipalValue(LinearForm),
    /// `δ(f)`.
    Delta(LinearForm),
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::T { mu, nu, var } => write!(f, "t{mu}{nu}({})", VARS[*var]),
            Factor::Causal(l) => write!(f, "1/({l} + i0)"),
            Factor::PrincipalValue(l) => write!(f, "P[1/({l})]"),
            Factor::Delta(l) => write!(f, "δ({l})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Term {
    pub coefficient: Coefficient,
    pub factors: Vec<Factor>,
}

/// `δ(overall) · Σ terms`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Amplitude {
    pub levels: usize,
    pub mu: usize,
    pub nu: usize,
    pub overall: LinearForm,
    pub terms: Vec<Term>,
}

fn other(v: usize) -> usize {
    if v == K1 {
        K2
    } else {
        K1
    }
}

/// `(S⁰_{p₁p₂k₁k₂})_{μν} = (i/2π) Σ_{n,m} Σ_λ t_{μλ}(k_n) t_{λν}(k_n') / (p_m + E_μ − k_n − E_λ + i0⁺)
/// · δ(p₁ + p₂ + E_μ − k₁ − k₂ − E_ν)`.
pub fn s0_momentum(levels: usize, mu: usize, nu: usize) -> Result<Amplitude> {
    if mu >= levels || nu >= levels {
        return Err(Error::Precondition(format!(
            "channel ({mu}, {nu}) outside {levels} ground states"
        )));
    }
    let overall = LinearForm::zero(levels)
        .var(P1, 1)
        .var(P2, 1)
        .var(K1, -1)
        .var(K2, -1)
        .energy(mu, 1)
        .energy(nu, -1);
    let pref = Coefficient::new(Rational64::new(1, 2), 1, -1);
    let mut terms = Vec::new();
    for kn in [K1, K2] {
        for pm in [P1, P2] {
            for lambda in 0..levels {
                let den = LinearForm::zero(levels)
                    .var(pm, 1)
                    .energy(mu, 1)
                    .var(kn, -1)
                    .energy(lambda, -1);
                terms.push(Term {
                    coefficient: pref,
                    factors: vec![
                        Factor::T { mu, nu: lambda, var: kn },
                        Factor::T {
                            mu: lambda,
                            nu,
                            var: other(kn),
                        },
                        Factor::Causal(den),
                    ],
                });
            }
        }
    }
    Ok(Amplitude {
        levels,
        mu,
        nu,
        overall,
        terms,
    })
}

impl Amplitude {
    /// Builds `Σ coefficient · Π factors` where each term carries exactly
    /// two deltas whose arguments sum to the overall form; the pair is
    /// stored as `δ(overall) · δ(first)`.
    pub fn from_delta_products(levels: usize, mu: usize, nu: usize, products: Vec<Term>) -> Result<Self> {
        let base = s0_momentum(levels, mu, nu)?;
        let mut terms = Vec::new();
        for t in products {
            let deltas: Vec<&LinearForm> = t
                .factors
                .iter()
                .filter_map(|f| if let Factor::Delta(l) = f { Some(l) } else { None })
                .collect();
            if deltas.len() != 2 || deltas[0].axpy(1, deltas[1]) != base.overall {
                return Err(Error::Precondition(
                    "each product must carry two deltas that add up to the overall energy delta".into(),
                ));
            }
            let keep = deltas[0].clone();
            let mut factors: Vec<Factor> = t
                .factors
                .into_iter()
                .filter(|f| !matches!(f, Factor::Delta(_)))
                .collect();
            factors.push(Factor::Delta(keep));
            terms.push(Term {
                coefficient: t.coefficient,
                factors,
            });
        }
        Ok(Self {
            terms,
            ..base
        }
        .canonical())
    }

    /// Splits every `1/(f + i0⁺)` as `−iπ δ(f) + P(1/f)`.
    pub fn sokhotski(&self) -> Self {
        let mut terms = Vec::new();
        for t in &self.terms {
            let mut partial = vec![Term {
                coefficient: t.coefficient,
                factors: Vec::new(),
            }];
            for f in &t.factors {
                match f {
                    Factor::Causal(l) => {
                        let mut next = Vec::with_capacity(partial.len() * 2);
                        for p in &partial {
                            let mut a = p.clone();
                            a.coefficient = a.coefficient.mul(Coefficient::new(Rational64::from(-1), 1, 1));
                            a.factors.push(Factor::Delta(l.clone()));
                            let mut b = p.clone();
                            b.factors.push(Factor::PrincipalValue(l.clone()));
                            next.push(a);
                            next.push(b);
                        }
                        partial = next;
                    }
                    other => {
                        for p in &mut partial {
                            p.factors.push(other.clone());
                        }
                    }
                }
            }
            terms.extend(partial);
        }
        Self {
            terms,
            ..self.clone()
        }
        .canonical()
    }

    /// Reduces arguments modulo the overall delta, fixes the sign freedom of
    /// `δ` (even) and `P` (odd), and collects identical terms.
    pub fn canonical(&self) -> Self {
        let mut collected: Vec<Term> = Vec::new();
        for t in &self.terms {
            let mut coefficient = t.coefficient;
            let mut factors = Vec::with_capacity(t.factors.len());
            for f in &t.factors {
                let g = match f {
                    Factor::T { .. } => f.clone(),
                    Factor::Causal(l) => Factor::Causal(l.reduce(&self.overall)),
                    Factor::Delta(l) => {
                        let r = l.reduce(&self.overall);
                        Factor::Delta(if r.leading() < 0 { r.neg() } else { r })
                    }
                    Factor::PrincipalValue(l) => {
                        let r = l.reduce(&self.overall);
                        if r.leading() < 0 {
                            coefficient = coefficient.neg();
                            Factor::PrincipalValue(r.neg())
                        } else {
                            Factor::PrincipalValue(r)
                        }
                    }
                };
                factors.push(g);
            }
            factors.sort();
            match collected.iter_mut().find(|c| {
                c.factors == factors
                    && c.coefficient.i_power == coefficient.i_power
                    && c.coefficient.pi_power == coefficient.pi_power
            }) {
                Some(c) => c.coefficient.ratio += coefficient.ratio,
                None => collected.push(Term { coefficient, factors }),
            }
        }
        collected.retain(|t| !t.coefficient.ratio.is_zero());
        collected.sort_by(|a, b| a.factors.cmp(&b.factors).then(a.coefficient.cmp(&b.coefficient)));
        Self {
            terms: collected,
            ..self.clone()
        }
    }

    /// Any remaining singular factor that is not a delta.
    pub fn has_poles(&self) -> bool {
        self.terms
            .iter()
            .flat_map(|t| &t.factors)
            .any(|f| matches!(f, Factor::Causal(_) | Factor::PrincipalValue(_)))
    }

    /// Equality after canonicalization.
    pub fn equivalent(&self, other: &Self) -> bool {
        self.overall == other.overall && self.canonical().terms == other.canonical().terms
    }
}

/// With a single ground state, `S⁰` collapses to the momentum-conserving
/// product `t(k₁)t(k₂)[δ(p₁ − k₁)δ(p₂ − k₂) + δ(p₁ − k₂)δ(p₂ − k₁)]`.
/// Returns the reduced amplitude; errors if `M > 1`.
pub fn reduce_unique_ground(amp: &Amplitude) -> Result<Amplitude> {
    if amp.levels != 1 {
        return Err(Error::Precondition(format!(
            "the delta-product reduction needs a unique ground state, got M = {}",
            amp.levels
        )));
    }
    let r = amp.sokhotski();
    if r.has_poles() {
        return Err(Error::Precondition(format!(
            "principal-value terms survived the reduction:\n{r}"
        )));
    }
    Ok(r)
}

/// The product form written directly.
pub fn delta_product_form() -> Amplitude {
    let f = |a: usize, b: usize| LinearForm::zero(1).var(a, 1).var(b, -1);
    let ts = vec![Factor::T { mu: 0, nu: 0, var: K1 }, Factor::T { mu: 0, nu: 0, var: K2 }];
    let products = vec![
        Term {
            coefficient: Coefficient::one(),
            factors: [ts.clone(), vec![Factor::Delta(f(P1, K1)), Factor::Delta(f(P2, K2))]].concat(),
        },
        Term {
            coefficient: Coefficient::one(),
            factors: [ts, vec![Factor::Delta(f(P1, K2)), Factor::Delta(f(P2, K1))]].concat(),
        },
    ];
    Amplitude::from_delta_products(1, 0, 0, products).expect("well-formed product")
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "δ({}) × [", self.overall)?;
        for t in &self.terms {
            write!(f, "  {}", t.coefficient)?;
            for x in &t.factors {
                write!(f, " {x}")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
