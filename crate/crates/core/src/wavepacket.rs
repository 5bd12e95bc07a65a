//! Photon wave packets: envelopes, dispersion relations and the lattice
//! creation operator `ψ†_{k̄x̄} = Σ_k e^{-ikx̄} φ_k̄(k) a_k†`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{self, SectorBasis};
use crate::scalar::{cplx, expi, Real, C};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvelopeKind {
    Gaussian,
    Lorentzian,
}

/// Momentum-space envelope `φ_k̄(k)`, normalized so `∫|φ|² dk = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct Envelope<T: Real> {
    pub kind: EnvelopeKind,
    pub k_bar: T,
    pub sigma: T,
}

impl<T: Real> Envelope<T> {
    pub fn new(kind: EnvelopeKind, k_bar: T, sigma: T) -> Result<Self> {
        let env = Self { kind, k_bar, sigma };
        env.validate()?;
        Ok(env)
    }

    pub fn gaussian(k_bar: T, sigma: T) -> Result<Self> {
        Self::new(EnvelopeKind::Gaussian, k_bar, sigma)
    }

    pub fn lorentzian(k_bar: T, sigma: T) -> Result<Self> {
        Self::new(EnvelopeKind::Lorentzian, k_bar, sigma)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > T::zero()) || !self.sigma.is_finite() {
            return Err(invalid("sigma", "must be positive and finite"));
        }
        if !self.k_bar.is_finite() {
            return Err(invalid("k_bar", "must be finite"));
        }
        Ok(())
    }

    /// `φ(k)` as a function of the offset `q = k − k̄`.
    pub fn at_offset(&self, q: T) -> C<T> {
        let s = self.sigma;
        match self.kind {
            EnvelopeKind::Gaussian => {
                let norm = (T::TAU()).powf(T::lit(-0.25)) / s.sqrt();
                cplx(norm * (-(q * q) / (T::lit(4.0) * s * s)).exp(), T::zero())
            }
            EnvelopeKind::Lorentzian => {
                let norm = (s / T::PI()).sqrt();
                cplx(norm, T::zero()) / cplx(q, s)
            }
        }
    }

    pub fn value(&self, k: T) -> C<T> {
        self.at_offset(k - self.k_bar)
    }
}

pub fn envelope_value<T: Real>(env: &Envelope<T>, k: T) -> C<T> {
    env.value(k)
}

/// Single-photon dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields, bound = "")]
pub enum Dispersion<T: Real> {
    /// `ω_k = c|k|` on the real line.
    Linear { c: T },
    /// `ω_k = ε − 2J cos k` on `(−π, π]`.
    Cosine {
        epsilon: T,
        #[serde(rename = "J")]
        hopping: T,
    },
}

impl<T: Real> Dispersion<T> {
    pub fn cosine(epsilon: T, hopping: T) -> Self {
        Dispersion::Cosine { epsilon, hopping }
    }

    pub fn linear(c: T) -> Self {
        Dispersion::Linear { c }
    }

    pub fn of_lattice(spec: &model::LatticeSpec<T>) -> Self {
        Self::cosine(spec.epsilon, spec.hopping)
    }

    pub fn omega(&self, k: T) -> T {
        match *self {
            Dispersion::Linear { c } => c * k.abs(),
            Dispersion::Cosine { epsilon, hopping } => epsilon - T::lit(2.0) * hopping * k.cos(),
        }
    }

    pub fn group_velocity(&self, k: T) -> T {
        match *self {
            Dispersion::Linear { c } => {
                if k < T::zero() {
                    -c
                } else {
                    c
                }
            }
            Dispersion::Cosine { hopping, .. } => T::lit(2.0) * hopping * k.sin(),
        }
    }

    pub fn max_speed(&self) -> T {
        match *self {
            Dispersion::Linear { c } => c.abs(),
            Dispersion::Cosine { hopping, .. } => T::lit(2.0) * hopping.abs(),
        }
    }

    /// Momentum interval, `None` meaning the whole real line.
    pub fn domain(&self) -> Option<(T, T)> {
        match self {
            Dispersion::Linear { .. } => None,
            Dispersion::Cosine { .. } => Some((-T::PI(), T::PI())),
        }
    }

    /// Band edges for the cosine band.
    pub fn band(&self) -> Option<(T, T)> {
        match *self {
            Dispersion::Linear { .. } => None,
            Dispersion::Cosine { epsilon, hopping } => {
                let w = T::lit(2.0) * hopping.abs();
                Some((epsilon - w, epsilon + w))
            }
        }
    }
}

pub fn group_velocity<T: Real>(disp: &Dispersion<T>, k: T) -> T {
    disp.group_velocity(k)
}

pub fn max_speed<T: Real>(disp: &Dispersion<T>) -> T {
    disp.max_speed()
}

/// A localized packet: envelope plus the position `x_bar` it is centered on
/// at time `t0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct PacketSpec<T: Real> {
    pub kind: EnvelopeKind,
    pub k_bar: T,
    pub sigma: T,
    pub x_bar: T,
    #[serde(default)]
    pub t0: T,
}

impl<T: Real> PacketSpec<T> {
    pub fn gaussian(k_bar: T, sigma: T, x_bar: T) -> Self {
        Self {
            kind: EnvelopeKind::Gaussian,
            k_bar,
            sigma,
            x_bar,
            t0: T::zero(),
        }
    }

    pub fn lorentzian(k_bar: T, sigma: T, x_bar: T) -> Self {
        Self {
            kind: EnvelopeKind::Lorentzian,
            ..Self::gaussian(k_bar, sigma, x_bar)
        }
    }

    pub fn envelope(&self) -> Result<Envelope<T>> {
        Envelope::new(self.kind, self.k_bar, self.sigma)
    }

    pub fn shifted(&self, dx: T) -> Self {
        Self {
            x_bar: self.x_bar + dx,
            ..*self
        }
    }
}

/// Localization requirement for packets placed on a finite lattice.
#[derive(Debug, Clone, Copy)]
pub struct SupportRule {
    /// Required clearance in units of `1/σ`.
    pub widths: f64,
    /// Also require clearance from the scatterer at site 0.
    pub from_scatterer: bool,
}

impl Default for SupportRule {
    fn default() -> Self {
        Self {
            widths: 5.0,
            from_scatterer: true,
        }
    }
}

impl SupportRule {
    pub fn input() -> Self {
        Self::default()
    }

    pub fn anywhere() -> Self {
        Self {
            widths: 5.0,
            from_scatterer: false,
        }
    }

    pub fn with_widths(mut self, widths: f64) -> Self {
        self.widths = widths;
        self
    }

    pub fn check<T: Real>(&self, packet: &PacketSpec<T>, sites: usize) -> Result<()> {
        let margin = T::lit(self.widths) / packet.sigma;
        let h = T::from_usize_lossy((sites - 1) / 2);
        let x = packet.x_bar;
        if x - margin < -h || x + margin > h {
            return Err(Error::Support(format!(
                "packet at x = {x} needs {margin:.1} sites of clearance inside [-{h}, {h}]"
            )));
        }
        if self.from_scatterer && x.abs() < margin {
            return Err(Error::Support(format!(
                "packet at x = {x} lies within {margin:.1} sites of the scatterer"
            )));
        }
        Ok(())
    }
}

/// Wraps `q` into `(−π, π]`.
pub fn wrap_momentum<T: Real>(q: T) -> T {
    let tau = T::TAU();
    let mut r = q - tau * ((q + T::PI()) / tau).floor();
    if r <= -T::PI() {
        r += tau;
    }
    r
}

/// Momentum-space coefficients `c_n` of `ψ† = Σ_n c_n a_{k_n}†` on the lattice
/// momenta `k_n = 2πn/L`, including the `sqrt(2π/L)` measure.
pub fn momentum_coefficients<T: Real>(packet: &PacketSpec<T>, disp: &Dispersion<T>, sites: usize) -> Result<Vec<C<T>>> {
    let env = packet.envelope()?;
    let l = T::from_usize_lossy(sites);
    let measure = (T::TAU() / l).sqrt();
    let h = ((sites - 1) / 2) as i64;
    Ok((-h..=h)
        .map(|n| {
            let k = T::TAU() * T::lit(n as f64) / l;
            let q = wrap_momentum(k - env.k_bar);
            // Right-moving modes e^{ik(x - x̄) - iω_k (t - t0)}: centered on x̄
            // at t = t0 with a_k† = L^{-1/2} Σ_x e^{ikx} a_x†.
            let phase = -k * packet.x_bar + disp.omega(k) * packet.t0;
            env.at_offset(q) * expi(phase) * measure
        })
        .collect())
}

/// Site amplitudes `f_x` of `ψ† = Σ_x f_x a_x†`, indexed by array position,
/// using `a_k† = L^{-1/2} Σ_x e^{ikx} a_x†`.
pub fn position_profile<T: Real>(packet: &PacketSpec<T>, disp: &Dispersion<T>, sites: usize) -> Result<Vec<C<T>>> {
    let ck = momentum_coefficients(packet, disp, sites)?;
    let l = T::from_usize_lossy(sites);
    let h = ((sites - 1) / 2) as i64;
    let inv = T::one() / l.sqrt();
    let ks: Vec<T> = (-h..=h).map(|n| T::TAU() * T::lit(n as f64) / l).collect();
    Ok((-h..=h)
        .map(|x| {
            let xf = T::lit(x as f64);
            ks.iter()
                .zip(&ck)
                .fold(C::new(T::zero(), T::zero()), |acc, (&k, &c)| acc + c * expi(k * xf))
                * inv
        })
        .collect())
}

/// Profile rescaled to unit norm.
pub fn normalized_profile<T: Real>(packet: &PacketSpec<T>, disp: &Dispersion<T>, sites: usize) -> Result<Vec<C<T>>> {
    let mut f = position_profile(packet, disp, sites)?;
    let n = f.iter().fold(T::zero(), |a, v| a + v.norm_sqr()).sqrt();
    if n > T::zero() {
        for v in &mut f {
            *v /= n;
        }
    }
    Ok(f)
}

/// `ψ†_{k̄x̄}|ground⟩`, normalized.
pub fn make_packet_state<T: Real>(
    spec: &PacketSpec<T>,
    disp: &Dispersion<T>,
    basis: &SectorBasis,
    ground: &StateVector<T>,
) -> Result<StateVector<T>> {
    make_packet_state_with(spec, disp, basis, ground, SupportRule::input())
}

pub fn make_packet_state_with<T: Real>(
    spec: &PacketSpec<T>,
    disp: &Dispersion<T>,
    basis: &SectorBasis,
    ground: &StateVector<T>,
    rule: SupportRule,
) -> Result<StateVector<T>> {
    check_ground(basis, ground)?;
    rule.check(spec, basis.sites())?;
    let f = position_profile(spec, disp, basis.sites())?;
    let mut out = model::apply_creation(basis, &f, ground);
    if out.normalize() == T::zero() {
        return Err(Error::Precondition("packet state vanishes in the truncated basis".into()));
    }
    Ok(out)
}

/// `ψ₁†ψ₂†|ground⟩`, normalized.
pub fn make_two_packet_state<T: Real>(
    first: &PacketSpec<T>,
    second: &PacketSpec<T>,
    disp: &Dispersion<T>,
    basis: &SectorBasis,
    ground: &StateVector<T>,
    rule: SupportRule,
) -> Result<StateVector<T>> {
    check_ground(basis, ground)?;
    rule.check(first, basis.sites())?;
    rule.check(second, basis.sites())?;
    let f1 = position_profile(first, disp, basis.sites())?;
    let f2 = position_profile(second, disp, basis.sites())?;
    let inner = model::apply_creation(basis, &f2, ground);
    let mut out = model::apply_creation(basis, &f1, &inner);
    if out.normalize() == T::zero() {
        return Err(Error::Precondition(
            "two-packet state vanishes in the truncated basis (n_max too small?)".into(),
        ));
    }
    Ok(out)
}

fn check_ground<T: Real>(basis: &SectorBasis, ground: &StateVector<T>) -> Result<()> {
    if ground.dim() != basis.dim() {
        return Err(Error::Mismatch(format!(
            "state of dimension {} over a basis of dimension {}",
            ground.dim(),
            basis.dim()
        )));
    }
    let n = ground.norm();
    if (n - T::one()).abs() > T::tol(1e-8) {
        return Err(Error::Precondition(format!("ground state not normalized (norm {n})")));
    }
    Ok(())
}

/// Centroid and RMS width of a site density indexed by array position.
pub fn density_moments<T: Real>(density: &[T], half_width: i64) -> (T, T) {
    let total = density.iter().fold(T::zero(), |a, &v| a + v);
    let mean = density
        .iter()
        .enumerate()
        .fold(T::zero(), |a, (p, &v)| a + v * T::lit((p as i64 - half_width) as f64))
        / total;
    let var = density.iter().enumerate().fold(T::zero(), |a, (p, &v)| {
        let d = T::lit((p as i64 - half_width) as f64) - mean;
        a + v * d * d
    }) / total;
    (mean, var.sqrt())
}
