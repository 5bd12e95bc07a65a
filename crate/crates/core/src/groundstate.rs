//! Minimum-energy state of the lattice model, its photon cloud, and the
//! correlator bounds it has to satisfy.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::causality::linear_fit;
use crate::error::{Error, Result};
use crate::linalg::lanczos::{lowest_eigenpair, LanczosOptions};
use crate::model::{self, LatticeSpec, SectorBasis};
use crate::scalar::{czero, expi, Real, C};
use crate::sparse::SparseOperator;
use crate::state::StateVector;
use crate::wavepacket::{position_profile, Dispersion, PacketSpec, SupportRule};

#[derive(Debug, Clone)]
pub struct GroundState<T: Real> {
    pub energy: T,
    pub state: StateVector<T>,
    pub residual: T,
    pub iterations: usize,
}

pub fn ground_state<T: Real>(h: &SparseOperator<T>) -> Result<GroundState<T>> {
    ground_state_with(h, &LanczosOptions::default())
}

pub fn ground_state_with<T: Real>(h: &SparseOperator<T>, opts: &LanczosOptions) -> Result<GroundState<T>> {
    let pair = lowest_eigenpair(h, opts)?;
    let mut state = StateVector::from_amplitudes(pair.vector);
    fix_phase(&mut state);
    Ok(GroundState {
        energy: pair.value,
        state,
        residual: pair.residual,
        iterations: pair.iterations,
    })
}

/// Rotates the global phase so the largest amplitude is real and positive.
pub fn fix_phase<T: Real>(state: &mut StateVector<T>) {
    let big = state
        .amplitudes
        .iter()
        .copied()
        .fold(czero::<T>(), |m, v| if v.norm() > m.norm() { v } else { m });
    if big.norm() > T::zero() {
        state.scale(big.conj() / big.norm());
    }
}

/// Ground state directly from a lattice spec.
pub fn solve_lattice<T: Real>(spec: &LatticeSpec<T>, seed: u64) -> Result<(SectorBasis, SparseOperator<T>, GroundState<T>)> {
    let basis = SectorBasis::build(spec)?;
    let h = model::build_hamiltonian(spec, &basis)?;
    let opts = LanczosOptions {
        seed,
        ..Default::default()
    };
    let gs = ground_state_with(&h, &opts)?;
    Ok((basis, h, gs))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CloudProfile<T: Real> {
    /// Site coordinates `x`, ascending.
    pub sites: Vec<i64>,
    /// `⟨a_x†a_x⟩` for each entry of `sites`.
    pub density: Vec<T>,
    pub qubit_excitation: T,
    pub total_number: T,
    /// Localization length of `n_x ∝ e^{−|x|/ξ}`.
    pub xi: T,
    pub fit_r2: T,
    /// Sites used by the tail fit.
    pub fit_range: (i64, i64),
}

impl<T: Real> CloudProfile<T> {
    pub fn at(&self, x: i64) -> T {
        let h = (self.sites.len() as i64 - 1) / 2;
        self.density[(x + h) as usize]
    }

    /// Largest `|n_x − n_{−x}|`.
    pub fn asymmetry(&self) -> T {
        let n = self.density.len();
        (0..n).fold(T::zero(), |m, i| m.max((self.density[i] - self.density[n - 1 - i]).abs()))
    }

    pub fn peak_site(&self) -> i64 {
        let (i, _) = self
            .density
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |b, (i, &v)| if v > b.1 { (i, v) } else { b });
        self.sites[i]
    }
}

pub fn cloud_profile<T: Real>(gs: &StateVector<T>, basis: &SectorBasis) -> Result<CloudProfile<T>> {
    if gs.dim() != basis.dim() {
        return Err(Error::Mismatch("state and basis dimensions differ".into()));
    }
    let density = model::site_densities(basis, gs);
    let h = basis.half_width();
    let sites: Vec<i64> = (-h..=h).collect();
    let qubit_excitation = gs.expectation(&model::qubit_population(basis)).re;
    let total_number = density.iter().fold(T::zero(), |a, &v| a + v) + qubit_excitation;
    let floor = T::lit(1e-12);
    // Symmetrized tail from x = 2 to the last resolvable site, keeping clear
    // of the outer third of the chain.
    let sym = |x: i64| (density[(x + h) as usize] + density[(h - x) as usize]) * T::lit(0.5);
    let x_hi = (2 * h) / 3;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for x in 2..=x_hi.max(2) {
        if x > h {
            break;
        }
        let v = sym(x);
        if v <= floor {
            break;
        }
        xs.push(T::lit(x as f64));
        ys.push(v.ln());
    }
    if xs.len() < 3 {
        return Err(Error::Fit(format!(
            "photon cloud is below 1e-12 beyond x = {}",
            2 + xs.len()
        )));
    }
    let (_, slope, _, r2) = linear_fit(&xs, &ys);
    if !(slope < T::zero()) {
        return Err(Error::Fit("cloud tail is not decaying".into()));
    }
    Ok(CloudProfile {
        fit_range: (2, 1 + xs.len() as i64),
        sites,
        density,
        qubit_excitation,
        total_number,
        xi: -T::one() / slope,
        fit_r2: r2,
    })
}

/// One-body density matrix `ρ[x][y] = ⟨a_x†a_y⟩`, row-major over array positions.
pub fn correlation_matrix<T: Real>(gs: &StateVector<T>, basis: &SectorBasis) -> Vec<C<T>> {
    let l = basis.sites();
    let mut rho = vec![czero::<T>(); l * l];
    for i in 0..basis.dim() {
        let a = gs[i];
        if a == czero() {
            continue;
        }
        for (y, _) in basis.config(i).runs() {
            let Some((j, f1)) = basis.lower(i, y) else { continue };
            for x in 0..l {
                if let Some((ip, f2)) = basis.raise(j, x) {
                    rho[x * l + y] += gs[ip].conj() * a * T::lit(f1 * f2);
                }
            }
        }
    }
    rho
}

/// Momentum correlator `C[m][n] = ⟨a_{k_m}†a_{k_n}⟩` on the lattice momenta,
/// `k_m = 2π(m − h)/L`, obtained from `ρ` by two FFT passes.
pub fn momentum_correlator<T: Real>(rho: &[C<T>], sites: usize) -> Vec<C<T>> {
    let l = sites;
    let h = (l - 1) / 2;
    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(l);
    let lt = T::from_usize_lossy(l);
    let k_of = |m: usize| T::TAU() * T::lit(m as f64 - h as f64) / lt;
    // FFT output index for momentum label m (frequency m − h mod L).
    let slot = |m: usize| (m + l - h) % l;
    // Pass 1: B[x][n] = Σ_y ρ[x][y] e^{−i k_n y}, y = pos − h.
    let mut b = vec![czero::<T>(); l * l];
    let mut buf = vec![czero::<T>(); l];
    for x in 0..l {
        buf.copy_from_slice(&rho[x * l..(x + 1) * l]);
        fft.process(&mut buf);
        for n in 0..l {
            b[x * l + n] = buf[slot(n)] * expi(k_of(n) * T::from_usize_lossy(h));
        }
    }
    // Pass 2: C[m][n] = L^{-1} Σ_x e^{+i k_m x} B[x][n].
    let mut c = vec![czero::<T>(); l * l];
    for n in 0..l {
        for x in 0..l {
            buf[x] = b[x * l + n].conj();
        }
        fft.process(&mut buf);
        for m in 0..l {
            let v = (buf[slot(m)] * expi(k_of(m) * T::from_usize_lossy(h))).conj();
            c[m * l + n] = v / lt;
        }
    }
    c
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Lemma1Report<T: Real> {
    /// `⟨GG†⟩` with `G = σˣ`, evaluated in the truncated basis.
    pub gg: T,
    /// Largest `|C_kp| − bound_kp` over all pairs (negative when satisfied).
    pub max_violation: T,
    /// Largest `|C_kp| / bound_kp` over pairs with a non-zero bound.
    pub max_ratio: T,
    pub min_diagonal: T,
    pub violations: usize,
    pub tolerance: T,
}

impl<T: Real> Lemma1Report<T> {
    pub fn holds(&self) -> bool {
        self.violations == 0 && self.min_diagonal >= -T::tol(1e-12)
    }
}

/// `|⟨a_k†a_p⟩| ≤ sqrt|g_k g_p / (ω_k ω_p)| ⟨GG†⟩` with `g_k = g/√L`.
pub fn check_lemma1_bound<T: Real>(gs: &StateVector<T>, basis: &SectorBasis, spec: &LatticeSpec<T>) -> Result<Lemma1Report<T>> {
    basis.check_matches(spec)?;
    let ks = spec.momenta();
    let omegas: Vec<T> = ks.iter().map(|&k| spec.band_energy(k)).collect();
    if let Some(w) = omegas.iter().find(|w| !(**w > T::zero())) {
        return Err(Error::Precondition(format!("band energy {w} is not positive")));
    }
    let l = spec.sites;
    let rho = correlation_matrix(gs, basis);
    let c = momentum_correlator(&rho, l);
    let gg = model::apply_sigma_x(basis, gs).norm_sqr();
    let gk = spec.g.abs() / T::from_usize_lossy(l).sqrt();
    let tolerance = T::tol(1e-9);
    let mut max_violation = T::neg_infinity();
    let mut max_ratio = T::zero();
    let mut violations = 0;
    let mut min_diagonal = T::infinity();
    for m in 0..l {
        min_diagonal = min_diagonal.min(c[m * l + m].re);
        for n in 0..l {
            let bound = gk / (omegas[m] * omegas[n]).sqrt() * gg;
            let lhs = c[m * l + n].norm();
            let excess = lhs - bound;
            max_violation = max_violation.max(excess);
            if bound > T::zero() {
                max_ratio = max_ratio.max(lhs / bound);
            }
            if excess > tolerance {
                violations += 1;
            }
        }
    }
    Ok(Lemma1Report {
        gg,
        max_violation,
        max_ratio,
        min_diagonal,
        violations,
        tolerance,
    })
}

/// `⟨χ|H − E₀|χ⟩` for `χ = a_k Ω₀`, for every lattice momentum.
pub fn variational_gaps<T: Real>(
    gs: &StateVector<T>,
    energy: T,
    h: &SparseOperator<T>,
    basis: &SectorBasis,
) -> Vec<(T, T)> {
    let l = basis.sites();
    let hw = basis.half_width();
    let lt = T::from_usize_lossy(l);
    let inv = T::one() / lt.sqrt();
    (-hw..=hw)
        .map(|n| {
            let k = T::TAU() * T::lit(n as f64) / lt;
            // a_k = Σ_x conj(f_x) a_x with f_x = L^{-1/2} e^{ikx}.
            let f: Vec<C<T>> = (-hw..=hw).map(|x| expi(k * T::lit(x as f64)) * inv).collect();
            let chi = model::apply_annihilation(basis, &f, gs);
            let val = chi.expectation(h).re - energy * chi.norm_sqr();
            (k, val)
        })
        .collect()
}

/// `⟨Ω₀|ψ†ψ|Ω₀⟩` for copies of `packet` centered at each `x̄`.
pub fn packet_vacuum_test<T: Real>(
    gs: &StateVector<T>,
    basis: &SectorBasis,
    spec: &LatticeSpec<T>,
    packet: &PacketSpec<T>,
    x_bars: &[T],
    rule: SupportRule,
) -> Result<Vec<(T, T)>> {
    basis.check_matches(spec)?;
    let rho = correlation_matrix(gs, basis);
    let disp = Dispersion::of_lattice(spec);
    let l = spec.sites;
    x_bars
        .iter()
        .map(|&x| {
            let p = PacketSpec { x_bar: x, ..*packet };
            rule.check(&p, l)?;
            let f = position_profile(&p, &disp, l)?;
            let mut acc = czero::<T>();
            for a in 0..l {
                for b in 0..l {
                    acc += f[a] * f[b].conj() * rho[a * l + b];
                }
            }
            Ok((x, acc.re))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sites: usize, g: f64, rwa: bool, n_max: usize) -> LatticeSpec<f64> {
        LatticeSpec {
            sites,
            epsilon: 1.0,
            hopping: 1.0 / std::f64::consts::PI,
            delta: 1.0,
            g,
            rwa,
            n_max,
        }
    }

    #[test]
    fn decoupled_ground_state_is_vacuum() {
        let (basis, _, gs) = solve_lattice(&spec(11, 0.0, false, 2), 1).unwrap();
        assert!(gs.energy.abs() < 1e-10);
        assert!((gs.state[basis.vacuum_index()].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rwa_ground_state_is_vacuum() {
        let (basis, _, gs) = solve_lattice(&spec(11, 0.5, true, 2), 1).unwrap();
        assert!(gs.energy.abs() < 1e-10);
        assert!(1.0 - gs.state[basis.vacuum_index()].norm_sqr() < 1e-10);
    }

    #[test]
    fn momentum_correlator_matches_direct_sum() {
        let s = spec(9, 0.4, false, 2);
        let (basis, _, gs) = solve_lattice(&s, 3).unwrap();
        let rho = correlation_matrix(&gs.state, &basis);
        let c = momentum_correlator(&rho, 9);
        let ks = s.momenta();
        let h = 4i64;
        for m in [0usize, 3, 8] {
            for n in [1usize, 4, 7] {
                let mut direct = czero::<f64>();
                for x in -h..=h {
                    for y in -h..=h {
                        let ph = ks[m] * x as f64 - ks[n] * y as f64;
                        direct += expi(ph) * rho[((x + h) * 9 + y + h) as usize] / 9.0;
                    }
                }
                assert!((direct - c[m * 9 + n]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn rabi_cloud_is_localized_and_symmetric() {
        let (basis, _, gs) = solve_lattice(&spec(21, 0.3, false, 3), 5).unwrap();
        assert!(gs.energy < 0.0);
        let cloud = cloud_profile(&gs.state, &basis).unwrap();
        assert!(cloud.asymmetry() < 1e-8);
        assert_eq!(cloud.peak_site(), 0);
        assert!(cloud.fit_r2 > 0.98, "r2 {}", cloud.fit_r2);
    }

    #[test]
    fn cloud_fit_fails_without_coupling() {
        let (basis, _, gs) = solve_lattice(&spec(11, 0.0, false, 2), 1).unwrap();
        assert!(cloud_profile(&gs.state, &basis).is_err());
    }
}
