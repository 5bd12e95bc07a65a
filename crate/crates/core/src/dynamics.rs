//! Scattering runs on the lattice: time evolution of packet states, output
//! photon fields, fluorescence, and cluster-decomposition checks.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::groundstate::{ground_state_with, GroundState};
use crate::linalg::lanczos::LanczosOptions;
use crate::linalg::tridiagonal::symmetric_tridiagonal_eigen;
use crate::model::{self, LatticeSpec, SectorBasis};
use crate::propagate::{propagate, Method};
use crate::scalar::{czero, expi, Real, C};
use crate::sparse::SparseOperator;
use crate::state::StateVector;
use crate::wavepacket::{
    make_packet_state_with, make_two_packet_state, position_profile, Dispersion, PacketSpec, SupportRule,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct EvolutionPlan<T: Real> {
    pub t_plus: T,
    pub dt_report: T,
    pub method: Method,
    /// Per-step truncation tolerance.
    pub tol: T,
}

impl<T: Real> EvolutionPlan<T> {
    pub fn new(t_plus: T, dt_report: T) -> Self {
        Self {
            t_plus,
            dt_report,
            method: Method::Chebyshev,
            tol: T::tol(1e-13),
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_plus >= T::zero()) || !self.t_plus.is_finite() {
            return Err(invalid("t_plus", "must be finite and non-negative"));
        }
        if !(self.dt_report > T::zero()) {
            return Err(invalid("dt_report", "must be positive"));
        }
        if !(self.tol > T::zero()) {
            return Err(invalid("tol", "must be positive"));
        }
        Ok(())
    }

    /// Report times `0, dt, 2dt, ..., t_plus` (the last interval may be short).
    pub fn report_times(&self) -> Vec<T> {
        let mut out = vec![T::zero()];
        let mut t = T::zero();
        while t + self.dt_report < self.t_plus * (T::one() - T::epsilon() * T::lit(16.0)) {
            t += self.dt_report;
            out.push(t);
        }
        if self.t_plus > T::zero() {
            out.push(self.t_plus);
        }
        out
    }

    /// Fails if a packet could approach a boundary closer than `widths/σ`
    /// during the run, assuming free motion at the maximal group speed and
    /// at most one reflection at the scatterer.
    pub fn check_reach(&self, packets: &[PacketSpec<T>], disp: &Dispersion<T>, sites: usize, widths: f64) -> Result<()> {
        let h = T::from_usize_lossy((sites - 1) / 2);
        let c = disp.max_speed();
        for p in packets {
            let travel = c * self.t_plus;
            let toward = p.x_bar * disp.group_velocity(p.k_bar) < T::zero();
            let reach = if toward {
                p.x_bar.abs().max(travel - p.x_bar.abs())
            } else {
                p.x_bar.abs() + travel
            };
            let margin = T::lit(widths) / p.sigma;
            if reach + margin > h {
                return Err(Error::Support(format!(
                    "packet from x = {} can reach |x| = {reach:.1} (+{margin:.1} clearance) within t = {}; lattice half-width is {h}",
                    p.x_bar, self.t_plus
                )));
            }
        }
        Ok(())
    }
}

/// Rejects states that put photon weight on the outermost sites.
#[derive(Debug, Clone)]
pub struct BoundaryGuard<T: Real> {
    weights: Vec<T>,
    pub threshold: T,
}

impl<T: Real> BoundaryGuard<T> {
    pub fn new(basis: &SectorBasis, edge_sites: usize, threshold: T) -> Self {
        let l = basis.sites();
        let weights = basis
            .states()
            .iter()
            .map(|c| {
                let n = c
                    .photons
                    .iter()
                    .filter(|&&p| (p as usize) < edge_sites || (p as usize) + edge_sites >= l)
                    .count();
                T::from_usize_lossy(n)
            })
            .collect();
        Self { weights, threshold }
    }

    pub fn weight(&self, state: &StateVector<T>) -> T {
        state
            .amplitudes
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |a, (v, &w)| a + v.norm_sqr() * w)
    }

    pub fn check(&self, time: T, state: &StateVector<T>) -> Result<()> {
        let w = self.weight(state);
        if w > self.threshold {
            return Err(Error::BoundaryContact {
                time: time.as_f64(),
                weight: w.as_f64(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct EvolutionStats<T: Real> {
    pub step_error: T,
    pub matvecs: usize,
    pub norm_drift: T,
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub states: Vec<StateVector<T>>,
    pub stats: EvolutionStats<T>,
}

/// Evolves `state` and keeps a snapshot at every report time.
pub fn evolve<T: Real>(state: &StateVector<T>, h: &SparseOperator<T>, plan: &EvolutionPlan<T>) -> Result<Trajectory<T>> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let (_, stats) = evolve_with(state, h, plan, None, |t, s| {
        times.push(t);
        states.push(s.clone());
        Ok(())
    })?;
    Ok(Trajectory { times, states, stats })
}

/// Evolves `state`, calling `observe` at each report time (including 0).
pub fn evolve_with<T: Real, F>(
    state: &StateVector<T>,
    h: &SparseOperator<T>,
    plan: &EvolutionPlan<T>,
    guard: Option<&BoundaryGuard<T>>,
    mut observe: F,
) -> Result<(StateVector<T>, EvolutionStats<T>)>
where
    F: FnMut(T, &StateVector<T>) -> Result<()>,
{
    plan.validate()?;
    if state.dim() != h.dim() {
        return Err(Error::Mismatch("state and Hamiltonian dimensions differ".into()));
    }
    let n0 = state.norm();
    if (n0 - T::one()).abs() > T::tol(1e-8) {
        return Err(Error::Precondition(format!("input state not normalized (norm {n0})")));
    }
    let times = plan.report_times();
    let mut cur = state.clone();
    let mut stats = EvolutionStats::default();
    if let Some(g) = guard {
        g.check(T::zero(), &cur)?;
    }
    observe(T::zero(), &cur)?;
    for w in times.windows(2) {
        let dt = w[1] - w[0];
        let step = propagate(h, &cur.amplitudes, dt, plan.method, plan.tol)?;
        stats.step_error += step.error;
        stats.matvecs += step.matvecs;
        cur = StateVector::from_amplitudes(step.state);
        if let Some(g) = guard {
            g.check(w[1], &cur)?;
        }
        observe(w[1], &cur)?;
    }
    if stats.step_error > plan.tol * T::from_usize_lossy(times.len().max(1)) * T::lit(10.0) {
        return Err(Error::StepBudget(format!("accumulated error {}", stats.step_error)));
    }
    stats.norm_drift = (cur.norm() - n0).abs();
    Ok((cur, stats))
}

/// `U₀(t) = e^{−i h₀ t}` of one photon on the open chain without scatterer.
pub fn free_propagator<T: Real>(spec: &LatticeSpec<T>, t: T) -> Result<Vec<C<T>>> {
    let l = spec.sites;
    let diag = vec![spec.epsilon; l];
    let off = vec![-spec.hopping; l - 1];
    let eig = symmetric_tridiagonal_eigen(&diag, &off)?;
    let mut u = vec![czero::<T>(); l * l];
    for p in 0..l {
        let ph = expi(-eig.values[p] * t);
        for r in 0..l {
            let a = eig.component(r, p);
            if a == T::zero() {
                continue;
            }
            for c in 0..l {
                u[r * l + c] += ph * (a * eig.component(c, p));
            }
        }
    }
    Ok(u)
}

/// Applies the single-photon free propagator to a site profile.
pub fn free_evolve_profile<T: Real>(spec: &LatticeSpec<T>, profile: &[C<T>], t: T) -> Result<Vec<C<T>>> {
    let u = free_propagator(spec, t)?;
    let l = spec.sites;
    Ok((0..l)
        .map(|r| (0..l).fold(czero(), |a, c| a + u[r * l + c] * profile[c]))
        .collect())
}

fn centered_fft<T: Real>(data: &mut [C<T>], l: usize, planner: &mut FftPlanner<T>) -> Vec<C<T>> {
    // Σ_x e^{−ik_n x} data[x], momenta k_n = 2π(n − h)/L, x = pos − h.
    let h = (l - 1) / 2;
    let fft = planner.plan_fft_forward(l);
    fft.process(data);
    let lt = T::from_usize_lossy(l);
    (0..l)
        .map(|n| {
            let k = T::TAU() * T::lit(n as f64 - h as f64) / lt;
            data[(n + l - h) % l] * expi(k * T::from_usize_lossy(h))
        })
        .collect()
}

/// `φ(x) = ⟨Ω₀|a_x|Ψ⟩` and its momentum transform.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OnePhotonField<T: Real> {
    pub sites: usize,
    pub momenta: Vec<T>,
    pub position: Vec<C<T>>,
    pub momentum: Vec<C<T>>,
}

impl<T: Real> OnePhotonField<T> {
    pub fn weight(&self) -> T {
        self.position.iter().fold(T::zero(), |a, v| a + v.norm_sqr())
    }
}

pub fn one_photon_field<T: Real>(basis: &SectorBasis, ground: &StateVector<T>, state: &StateVector<T>) -> OnePhotonField<T> {
    let l = basis.sites();
    let mut pos = vec![czero::<T>(); l];
    for i in 0..basis.dim() {
        let a = state[i];
        if a == czero() {
            continue;
        }
        for (x, _) in basis.config(i).runs() {
            if let Some((j, f)) = basis.lower(i, x) {
                pos[x] += ground[j].conj() * a * T::lit(f);
            }
        }
    }
    let mut planner = FftPlanner::new();
    let mut buf = pos.clone();
    let inv = T::one() / T::from_usize_lossy(l).sqrt();
    let momentum = centered_fft(&mut buf, l, &mut planner).into_iter().map(|v| v * inv).collect();
    OnePhotonField {
        sites: l,
        momenta: lattice_momenta(l),
        position: pos,
        momentum,
    }
}

fn lattice_momenta<T: Real>(l: usize) -> Vec<T> {
    let h = ((l - 1) / 2) as i64;
    let lt = T::from_usize_lossy(l);
    (-h..=h).map(|n| T::TAU() * T::lit(n as f64) / lt).collect()
}

/// `φ(x₁, x₂) = ⟨Ω₀|a_{x₁}a_{x₂}|Ψ⟩` on the site grid and its transform
/// `φ(p₁, p₂)` on the lattice momenta, both row-major `L × L`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TwoPhotonField<T: Real> {
    pub sites: usize,
    pub momenta: Vec<T>,
    pub position: Vec<C<T>>,
    pub momentum: Vec<C<T>>,
}

impl<T: Real> TwoPhotonField<T> {
    pub fn at_momentum(&self, m: usize, n: usize) -> C<T> {
        self.momentum[m * self.sites + n]
    }

    pub fn at_sites(&self, x1: i64, x2: i64) -> C<T> {
        let h = ((self.sites - 1) / 2) as i64;
        self.position[((x1 + h) as usize) * self.sites + (x2 + h) as usize]
    }

    /// Largest `|φ(p₁,p₂) − φ(p₂,p₁)|` over both grids.
    pub fn symmetry_error(&self) -> T {
        let l = self.sites;
        let mut m = T::zero();
        for a in 0..l {
            for b in 0..l {
                m = m.max((self.position[a * l + b] - self.position[b * l + a]).norm());
                m = m.max((self.momentum[a * l + b] - self.momentum[b * l + a]).norm());
            }
        }
        m
    }

    pub fn weight(&self) -> T {
        self.position.iter().fold(T::zero(), |a, v| a + v.norm_sqr())
    }

    /// Zero-distance correlation restricted to sites `x` with `region(x)`:
    /// `g = P_R Σ_R |φ(x,x)|² / Σ_R ρ_R(x)²`, where `ρ_R` is the marginal of
    /// `|φ|²` inside the region and `P_R` its total. Equals 1 for any
    /// product `φ(x,y) = f(x) f(y)`.
    pub fn zero_distance_correlation(&self, region: impl Fn(i64) -> bool) -> Option<T> {
        let l = self.sites;
        let h = ((l - 1) / 2) as i64;
        let inside: Vec<usize> = (0..l).filter(|&p| region(p as i64 - h)).collect();
        let mut total = T::zero();
        let mut diag = T::zero();
        let mut marg_sq = T::zero();
        for &a in &inside {
            let mut row = T::zero();
            for &b in &inside {
                row += self.position[a * l + b].norm_sqr();
            }
            total += row;
            marg_sq += row * row;
            diag += self.position[a * l + a].norm_sqr();
        }
        if marg_sq > T::zero() {
            Some(total * diag / marg_sq)
        } else {
            None
        }
    }
}

pub fn two_photon_field<T: Real>(basis: &SectorBasis, ground: &StateVector<T>, state: &StateVector<T>) -> TwoPhotonField<T> {
    let l = basis.sites();
    let mut pos = vec![czero::<T>(); l * l];
    for i in 0..basis.dim() {
        let a = state[i];
        if a == czero() {
            continue;
        }
        for (y, _) in basis.config(i).runs() {
            let Some((j, f1)) = basis.lower(i, y) else { continue };
            for (x, _) in basis.config(j).runs() {
                if let Some((k, f2)) = basis.lower(j, x) {
                    pos[x * l + y] += ground[k].conj() * a * T::lit(f1 * f2);
                }
            }
        }
    }
    // φ(p₁,p₂) = L^{-1} Σ e^{−ip₁x₁ − ip₂x₂} φ(x₁,x₂).
    let mut planner = FftPlanner::new();
    let mut tmp = vec![czero::<T>(); l * l];
    let mut buf = vec![czero::<T>(); l];
    for x in 0..l {
        buf.copy_from_slice(&pos[x * l..(x + 1) * l]);
        let row = centered_fft(&mut buf, l, &mut planner);
        tmp[x * l..(x + 1) * l].copy_from_slice(&row);
    }
    let mut mom = vec![czero::<T>(); l * l];
    let inv = T::one() / T::from_usize_lossy(l);
    for n in 0..l {
        for x in 0..l {
            buf[x] = tmp[x * l + n];
        }
        let col = centered_fft(&mut buf, l, &mut planner);
        for m in 0..l {
            mom[m * l + n] = col[m] * inv;
        }
    }
    TwoPhotonField {
        sites: l,
        momenta: lattice_momenta(l),
        position: pos,
        momentum: mom,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FluorescenceWindow<T: Real> {
    pub omega_bar: T,
    pub sigma_omega: T,
}

impl<T: Real> FluorescenceWindow<T> {
    pub fn new(omega_bar: T, sigma_omega: T) -> Result<Self> {
        if !(sigma_omega > T::zero()) {
            return Err(invalid("sigma_omega", "must be positive"));
        }
        Ok(Self { omega_bar, sigma_omega })
    }

    /// Window centered on `ω(k̄)` with `σ_ω = factor · |v_g(k̄)| · σ`.
    pub fn from_packet(packet: &PacketSpec<T>, disp: &Dispersion<T>, factor: T) -> Result<Self> {
        let w = Self::new(
            disp.omega(packet.k_bar),
            factor * disp.group_velocity(packet.k_bar).abs() * packet.sigma,
        )?;
        if let Some((lo, hi)) = disp.band() {
            if w.omega_bar - w.sigma_omega < lo || w.omega_bar + w.sigma_omega > hi {
                return Err(Error::Precondition("fluorescence window leaves the band".into()));
            }
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Fluorescence<T: Real> {
    pub value: T,
    pub shell_weight: T,
    pub fluorescent_weight: T,
    pub shell_points: usize,
}

/// Fraction of the two-photon weight in the energy shell
/// `|ω₁ + ω₂ − 2ω̄| ≤ 2σ_ω` carried by pairs with both energies outside
/// `(ω̄ − σ_ω, ω̄ + σ_ω)`.
pub fn fluorescence<T: Real>(field: &TwoPhotonField<T>, win: &FluorescenceWindow<T>, disp: &Dispersion<T>) -> Result<T> {
    fluorescence_detail(field, win, disp).map(|f| f.value)
}

pub fn fluorescence_detail<T: Real>(
    field: &TwoPhotonField<T>,
    win: &FluorescenceWindow<T>,
    disp: &Dispersion<T>,
) -> Result<Fluorescence<T>> {
    let w: Vec<T> = field.momenta.iter().map(|&k| disp.omega(k)).collect();
    let l = field.sites;
    let two = T::lit(2.0);
    let mut shell = T::zero();
    let mut fl = T::zero();
    let mut points = 0;
    for a in 0..l {
        for b in 0..l {
            if (w[a] + w[b] - two * win.omega_bar).abs() > two * win.sigma_omega {
                continue;
            }
            points += 1;
            let v = field.momentum[a * l + b].norm_sqr();
            shell += v;
            let outside = |e: T| (e - win.omega_bar).abs() >= win.sigma_omega;
            if outside(w[a]) && outside(w[b]) {
                fl += v;
            }
        }
    }
    if points == 0 || !(shell > T::zero()) {
        return Err(Error::EmptyWindow);
    }
    Ok(Fluorescence {
        value: fl / shell,
        shell_weight: shell,
        fluorescent_weight: fl,
        shell_points: points,
    })
}

/// Controls shared by every run on one lattice.
#[derive(Debug, Clone, Copy)]
pub struct ScatterOptions {
    pub lanczos: LanczosOptions,
    pub support: SupportRule,
    pub edge_sites: usize,
    pub edge_threshold: f64,
}

impl Default for ScatterOptions {
    fn default() -> Self {
        Self {
            lanczos: LanczosOptions::default(),
            support: SupportRule::input(),
            edge_sites: 3,
            edge_threshold: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Diagnostics<T: Real> {
    pub times: Vec<T>,
    /// `⟨N̂⟩(t) − ⟨N̂⟩_ground`.
    pub n_fly: Vec<T>,
    pub norm: Vec<T>,
    pub energy: Vec<T>,
    pub ground_energy: T,
    pub ground_number: T,
    pub stats: EvolutionStats<T>,
}

impl<T: Real> Diagnostics<T> {
    pub fn energy_drift(&self) -> T {
        let e0 = self.energy[0];
        self.energy
            .iter()
            .fold(T::zero(), |m, &e| m.max((e - e0).abs()))
            / e0.abs().max(T::one())
    }

    pub fn norm_drift(&self) -> T {
        self.norm.iter().fold(T::zero(), |m, &n| m.max((n - T::one()).abs()))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FlyingNumberReport<T: Real> {
    pub initial: T,
    pub r#final: T,
    pub change: T,
    pub max_excursion: T,
}

/// `|N_fly(t₋) − N_fly(t₊)|` from a finished run.
pub fn flying_number_conservation<T: Real>(diag: &Diagnostics<T>) -> FlyingNumberReport<T> {
    let first = diag.n_fly.first().copied().unwrap_or_else(T::zero);
    let last = diag.n_fly.last().copied().unwrap_or_else(T::zero);
    let max_excursion = diag.n_fly.iter().fold(T::zero(), |m, &v| m.max((v - first).abs()));
    FlyingNumberReport {
        initial: first,
        r#final: last,
        change: (last - first).abs(),
        max_excursion,
    }
}

#[derive(Debug, Clone)]
pub enum OutputField<T: Real> {
    One(OnePhotonField<T>),
    Two(TwoPhotonField<T>),
}

#[derive(Debug, Clone)]
pub struct ScatterResult<T: Real> {
    pub input: StateVector<T>,
    pub output: StateVector<T>,
    pub field: OutputField<T>,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Real> ScatterResult<T> {
    pub fn two_photon(&self) -> Option<&TwoPhotonField<T>> {
        match &self.field {
            OutputField::Two(f) => Some(f),
            OutputField::One(_) => None,
        }
    }

    pub fn one_photon(&self) -> Option<&OnePhotonField<T>> {
        match &self.field {
            OutputField::One(f) => Some(f),
            OutputField::Two(_) => None,
        }
    }
}

/// Lattice, Hamiltonian and ground state, computed once and reused by runs.
pub struct ScatterContext<T: Real> {
    pub spec: LatticeSpec<T>,
    pub basis: SectorBasis,
    pub hamiltonian: SparseOperator<T>,
    pub ground: GroundState<T>,
    pub options: ScatterOptions,
    number: Vec<T>,
    guard: BoundaryGuard<T>,
}

impl<T: Real> ScatterContext<T> {
    pub fn new(spec: &LatticeSpec<T>, options: ScatterOptions) -> Result<Self> {
        let basis = SectorBasis::build(spec)?;
        let hamiltonian = model::build_hamiltonian(spec, &basis)?;
        let ground = ground_state_with(&hamiltonian, &options.lanczos)?;
        let number = model::number_diagonal(&basis);
        let guard = BoundaryGuard::new(&basis, options.edge_sites, T::lit(options.edge_threshold));
        Ok(Self {
            spec: *spec,
            basis,
            hamiltonian,
            ground,
            options,
            number,
            guard,
        })
    }

    pub fn dispersion(&self) -> Dispersion<T> {
        Dispersion::of_lattice(&self.spec)
    }

    pub fn ground_number(&self) -> T {
        self.expect_number(&self.ground.state)
    }

    fn expect_number(&self, s: &StateVector<T>) -> T {
        s.amplitudes
            .iter()
            .zip(&self.number)
            .fold(T::zero(), |a, (v, &n)| a + v.norm_sqr() * n)
    }

    /// Normalized input state for one or two packets over the ground state.
    pub fn input_state(&self, packets: &[PacketSpec<T>]) -> Result<StateVector<T>> {
        let disp = self.dispersion();
        match packets {
            [p] => make_packet_state_with(p, &disp, &self.basis, &self.ground.state, self.options.support),
            [p, q] => make_two_packet_state(p, q, &disp, &self.basis, &self.ground.state, self.options.support),
            _ => Err(invalid("packets", "expected one or two packets")),
        }
    }

    pub fn run(&self, packets: &[PacketSpec<T>], plan: &EvolutionPlan<T>) -> Result<ScatterResult<T>> {
        plan.check_reach(packets, &self.dispersion(), self.spec.sites, self.options.support.widths)?;
        let input = self.input_state(packets)?;
        self.run_state(input, packets.len(), plan)
    }

    /// Evolves a prepared state and extracts the `photons`-photon field.
    pub fn run_state(&self, input: StateVector<T>, photons: usize, plan: &EvolutionPlan<T>) -> Result<ScatterResult<T>> {
        let ground_number = self.ground_number();
        let mut times = Vec::new();
        let mut n_fly = Vec::new();
        let mut norm = Vec::new();
        let mut energy = Vec::new();
        let (output, stats) = evolve_with(&input, &self.hamiltonian, plan, Some(&self.guard), |t, s| {
            times.push(t);
            n_fly.push(self.expect_number(s) - ground_number);
            norm.push(s.norm());
            energy.push(s.expectation(&self.hamiltonian).re);
            Ok(())
        })?;
        let field = if photons == 1 {
            OutputField::One(one_photon_field(&self.basis, &self.ground.state, &output))
        } else {
            OutputField::Two(two_photon_field(&self.basis, &self.ground.state, &output))
        };
        Ok(ScatterResult {
            input,
            output,
            field,
            diagnostics: Diagnostics {
                times,
                n_fly,
                norm,
                energy,
                ground_energy: self.ground.energy,
                ground_number,
                stats,
            },
        })
    }
}

pub fn scatter_run<T: Real>(
    spec: &LatticeSpec<T>,
    packets: &[PacketSpec<T>],
    plan: &EvolutionPlan<T>,
    options: ScatterOptions,
) -> Result<ScatterResult<T>> {
    ScatterContext::new(spec, options)?.run(packets, plan)
}

/// Setup of a two-packet experiment as a function of the separation `l`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct PairGeometry<T: Real> {
    /// Template for the leading packet (its `x_bar` is the front position).
    pub front: PacketSpec<T>,
    /// Center momentum of the trailing packet.
    pub k_bar_back: T,
    /// Distance the slower packet must clear past the scatterer at `t₊`.
    pub exit_distance: T,
}

impl<T: Real> PairGeometry<T> {
    pub fn packets(&self, l: T) -> [PacketSpec<T>; 2] {
        let back = PacketSpec {
            k_bar: self.k_bar_back,
            x_bar: self.front.x_bar - l,
            ..self.front
        };
        [self.front, back]
    }

    /// `t₊` for a separation `l`: the trailing packet travels from its start
    /// past the scatterer by `exit_distance`.
    pub fn t_plus(&self, l: T, disp: &Dispersion<T>) -> T {
        let v = disp
            .group_velocity(self.front.k_bar)
            .abs()
            .min(disp.group_velocity(self.k_bar_back).abs());
        (self.front.x_bar.abs() + l + self.exit_distance) / v
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FluorescencePoint<T: Real> {
    pub l: T,
    pub f: T,
    pub shell_weight: T,
    pub n_fly_change: T,
}

/// Fluorescence for each separation in `ls`.
pub fn fluorescence_scan<T: Real>(
    ctx: &ScatterContext<T>,
    geometry: &PairGeometry<T>,
    ls: &[T],
    width_factor: T,
    method: Method,
) -> Result<Vec<FluorescencePoint<T>>> {
    let disp = ctx.dispersion();
    let win = FluorescenceWindow::from_packet(&geometry.front, &disp, width_factor)?;
    ls.iter()
        .map(|&l| {
            let plan = EvolutionPlan {
                method,
                ..EvolutionPlan::new(geometry.t_plus(l, &disp), T::lit(5.0))
            };
            let r = ctx.run(&geometry.packets(l), &plan)?;
            let field = r.two_photon().expect("two packets");
            let f = fluorescence_detail(field, &win, &disp)?;
            Ok(FluorescencePoint {
                l,
                f: f.value,
                shell_weight: f.shell_weight,
                n_fly_change: flying_number_conservation(&r.diagnostics).change,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ClusterRow<T: Real> {
    pub l: T,
    pub a12: C<T>,
    pub a1: C<T>,
    pub a2: C<T>,
    /// `|A₁₂ − A₁A₂| / (|A₁||A₂|)`.
    pub deviation: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ClusterReport<T: Real> {
    pub rows: Vec<ClusterRow<T>>,
}

impl<T: Real> ClusterReport<T> {
    pub fn last_deviation(&self) -> Option<T> {
        self.rows.last().map(|r| r.deviation)
    }
}

/// Two-photon amplitude onto the product of the one-photon outputs,
/// compared with the product of the one-photon amplitudes.
///
/// Each packet is first scattered alone; its normalized output photon
/// profile `u_i` defines the output mode, and `A_i = e^{iE₀t}⟨Ω₀|b_i|Ψ_i(t)⟩`
/// with `b_i = Σ_x u_i(x)* a_x`. The two-photon amplitude is
/// `A₁₂ = e^{iE₀t}⟨Ω₀|b₁b₂|Ψ₁₂(t)⟩`.
pub fn cluster_check<T: Real>(
    ctx: &ScatterContext<T>,
    geometry: &PairGeometry<T>,
    ls: &[T],
    method: Method,
) -> Result<ClusterReport<T>> {
    let l_max = ls.iter().copied().fold(T::zero(), T::max);
    let t_plus = geometry.t_plus(l_max, &ctx.dispersion());
    let rows = ls
        .iter()
        .map(|&l| cluster_row(ctx, geometry, l, t_plus, method))
        .collect::<Result<_>>()?;
    Ok(ClusterReport { rows })
}

/// One separation of [`cluster_check`], evolved to a given `t₊`.
pub fn cluster_row<T: Real>(
    ctx: &ScatterContext<T>,
    geometry: &PairGeometry<T>,
    l: T,
    t_plus: T,
    method: Method,
) -> Result<ClusterRow<T>> {
    let disp = ctx.dispersion();
    let plan = EvolutionPlan {
        method,
        ..EvolutionPlan::new(t_plus, t_plus)
    };
    let ph = expi(ctx.ground.energy * t_plus);
    let [p1, p2] = geometry.packets(l);
    plan.check_reach(&[p1, p2], &disp, ctx.spec.sites, ctx.options.support.widths)?;
    let single = |p: &PacketSpec<T>| -> Result<(Vec<C<T>>, C<T>)> {
        let r = ctx.run(std::slice::from_ref(p), &plan)?;
        let f = r.one_photon().expect("one packet").position.clone();
        let n = f.iter().fold(T::zero(), |a, v| a + v.norm_sqr()).sqrt();
        let u: Vec<C<T>> = f.iter().map(|v| *v / n).collect();
        Ok((u, C::new(n, T::zero()) * ph))
    };
    let (u1, a1) = single(&p1)?;
    let (u2, a2) = single(&p2)?;
    let r = ctx.run(&[p1, p2], &plan)?;
    let field = r.two_photon().expect("two packets");
    let lsz = field.sites;
    let mut acc = czero::<T>();
    for x in 0..lsz {
        for y in 0..lsz {
            acc += u1[x].conj() * u2[y].conj() * field.position[x * lsz + y];
        }
    }
    let a12 = acc * ph;
    let deviation = (a12 - a1 * a2).norm() / (a1.norm() * a2.norm());
    Ok(ClusterRow { l, a12, a1, a2, deviation })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FreeEvolutionReport<T: Real> {
    pub infidelity: T,
    /// Smallest `|x̄| − c t` over the run, minus the packet clearance.
    pub cone_clearance: T,
}

/// Compares `U(t) ψ†Ω₀` with `ψ_free(t)† Ω₀` for a packet that stays
/// outside the light cone of the scatterer.
pub fn free_evolution_check<T: Real>(
    ctx: &ScatterContext<T>,
    packet: &PacketSpec<T>,
    t: T,
    method: Method,
) -> Result<FreeEvolutionReport<T>> {
    let disp = ctx.dispersion();
    let clearance = packet.x_bar.abs() - disp.max_speed() * t - T::lit(ctx.options.support.widths) / packet.sigma;
    if !(clearance > T::zero()) {
        return Err(Error::Support(format!(
            "packet at x = {} enters the scatterer light cone before t = {t}",
            packet.x_bar
        )));
    }
    let plan = EvolutionPlan {
        method,
        ..EvolutionPlan::new(t, t)
    };
    plan.check_reach(std::slice::from_ref(packet), &disp, ctx.spec.sites, ctx.options.support.widths)?;
    let input = ctx.input_state(std::slice::from_ref(packet))?;
    let (full, _) = evolve_with(&input, &ctx.hamiltonian, &plan, Some(&ctx.guard), |_, _| Ok(()))?;
    let f = position_profile(packet, &disp, ctx.spec.sites)?;
    let f_t = free_evolve_profile(&ctx.spec, &f, t)?;
    let mut free = model::apply_creation(&ctx.basis, &f_t, &ctx.ground.state);
    free.normalize();
    let infidelity = T::one() - full.fidelity(&free);
    Ok(FreeEvolutionReport {
        infidelity: infidelity.max(T::zero()),
        cone_clearance: clearance,
    })
}

/// Whether the summed density of two packets has two maxima separated by a
/// dip of at least half the smaller peak.
pub fn packets_resolvable<T: Real>(a: &PacketSpec<T>, b: &PacketSpec<T>, disp: &Dispersion<T>, sites: usize) -> Result<bool> {
    let fa = position_profile(a, disp, sites)?;
    let fb = position_profile(b, disp, sites)?;
    let dens: Vec<T> = fa.iter().zip(&fb).map(|(x, y)| x.norm_sqr() + y.norm_sqr()).collect();
    let h = ((sites - 1) / 2) as i64;
    let pa = (a.x_bar.round().to_i64().unwrap_or(0) + h).clamp(0, sites as i64 - 1) as usize;
    let pb = (b.x_bar.round().to_i64().unwrap_or(0) + h).clamp(0, sites as i64 - 1) as usize;
    let (lo, hi) = (pa.min(pb), pa.max(pb));
    if hi - lo < 2 {
        return Ok(false);
    }
    let peak = |c: usize| {
        let r = 2usize;
        (c.saturating_sub(r)..=(c + r).min(sites - 1)).fold(T::zero(), |m, i| m.max(dens[i]))
    };
    let dip = (lo..=hi).fold(T::infinity(), |m, i| m.min(dens[i]));
    let smaller = peak(lo).min(peak(hi));
    Ok(dip <= smaller * T::lit(0.5))
}

/// Smallest integer separation at which two copies of `packet` are resolvable.
pub fn critical_separation<T: Real>(packet: &PacketSpec<T>, disp: &Dispersion<T>, sites: usize) -> Result<Option<usize>> {
    let h = (sites - 1) / 2;
    for l in 1..h {
        let b = packet.shifted(-T::from_usize_lossy(l));
        if b.x_bar < -T::from_usize_lossy(h) {
            break;
        }
        if packets_resolvable(packet, &b, disp, sites)? {
            return Ok(Some(l));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(sites: usize, g: f64, rwa: bool, n_max: usize) -> LatticeSpec<f64> {
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
    fn report_times_cover_interval() {
        let p = EvolutionPlan::<f64>::new(1.0, 0.3);
        let t = p.report_times();
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 1.0);
    }

    #[test]
    fn free_propagator_is_unitary() {
        let s = lattice(15, 0.0, true, 1);
        let u = free_propagator(&s, 2.5).unwrap();
        for r in 0..15 {
            for c in 0..15 {
                let v: C<f64> = (0..15).fold(czero(), |a, k| a + u[k * 15 + r].conj() * u[k * 15 + c]);
                let e = if r == c { 1.0 } else { 0.0 };
                assert!((v.re - e).abs() < 1e-12 && v.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decoupled_run_matches_free_propagation() {
        let s = lattice(61, 0.0, true, 2);
        let opts = ScatterOptions {
            support: SupportRule::input().with_widths(3.0),
            ..Default::default()
        };
        let ctx = ScatterContext::new(&s, opts).unwrap();
        let p = PacketSpec::gaussian(std::f64::consts::FRAC_PI_2, 0.4, -15.0);
        let plan = EvolutionPlan::new(10.0, 5.0);
        let r = ctx.run(&[p], &plan).unwrap();
        let f = position_profile(&p, &ctx.dispersion(), 61).unwrap();
        let n = f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let ft = free_evolve_profile(&s, &f, 10.0).unwrap();
        let out = r.one_photon().unwrap();
        let diff: f64 = out
            .position
            .iter()
            .zip(&ft)
            .map(|(a, b)| (a - b / n).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-9, "diff {diff}");
        let rep = flying_number_conservation(&r.diagnostics);
        assert!(rep.change < 1e-10);
    }

    #[test]
    fn boundary_guard_trips() {
        let s = lattice(21, 0.0, true, 1);
        let basis = SectorBasis::build(&s).unwrap();
        let guard = BoundaryGuard::new(&basis, 2, 1e-6);
        let cfg = crate::model::Config {
            qubit: false,
            photons: vec![0],
        };
        let st = StateVector::basis_state(basis.dim(), basis.index_of(&cfg).unwrap());
        assert!(matches!(guard.check(1.0, &st), Err(Error::BoundaryContact { .. })));
    }

    #[test]
    fn resolvability_threshold_exists() {
        let p = PacketSpec::gaussian(1.0, 0.2, 0.0);
        let l = critical_separation(&p, &Dispersion::cosine(1.0, 0.3), 201).unwrap().unwrap();
        assert!(l > 3 && l < 30, "l_c {l}");
    }

    #[test]
    fn product_field_has_unit_correlation() {
        let l = 11;
        let f: Vec<f64> = (0..l).map(|i| (-(i as f64 - 5.0).powi(2) / 4.0).exp()).collect();
        let pos: Vec<C<f64>> = (0..l * l).map(|k| C::new(f[k / l] * f[k % l], 0.0)).collect();
        let field = TwoPhotonField {
            sites: l,
            momenta: lattice_momenta(l),
            momentum: pos.clone(),
            position: pos,
        };
        let g = field.zero_distance_correlation(|x| x < 3).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
    }
}
