//! Cavity-array waveguide with a two-level scatterer at the central site,
//! truncated to a maximum total excitation number.
//!
//! `H = Δ σ⁺σ⁻ + ε Σ_x a_x†a_x − J Σ_x (a_x†a_{x+1} + h.c.) + g (σ⁻ + σ⁺)(a_0 + a_0†)`
//!
//! With `rwa = true` the coupling keeps only `g (σ⁺a_0 + σ⁻a_0†)`. Terms that
//! would leave the truncated sector are dropped (projected truncation).

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::{czero, Real, C};
use crate::sparse::SparseOperator;
use crate::state::StateVector;

/// Lattice and scatterer parameters. JSON keys match the Hamiltonian symbols.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "")]
pub struct LatticeSpec<T: Real> {
    /// Number of cavities; odd, scatterer at the central site.
    #[serde(rename = "L")]
    pub sites: usize,
    pub epsilon: T,
    #[serde(rename = "J")]
    pub hopping: T,
    #[serde(rename = "Delta")]
    pub delta: T,
    pub g: T,
    pub rwa: bool,
    pub n_max: usize,
}

impl<T: Real> LatticeSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.sites < 3 || self.sites.is_multiple_of(2) {
            return Err(invalid("L", format!("must be odd and >= 3, got {}", self.sites)));
        }
        if !(self.hopping > T::zero()) || !self.hopping.is_finite() {
            return Err(invalid("J", "must be positive and finite"));
        }
        if self.n_max < 1 {
            return Err(invalid("n_max", "must be >= 1"));
        }
        for (name, v) in [("epsilon", self.epsilon), ("Delta", self.delta), ("g", self.g)] {
            if !v.is_finite() {
                return Err(invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Same lattice with the scatterer decoupled.
    pub fn decoupled(&self) -> Self {
        Self { g: T::zero(), ..*self }
    }

    #[inline]
    pub fn half_width(&self) -> i64 {
        ((self.sites - 1) / 2) as i64
    }

    /// Lattice momenta `2πn/L`, `n = -(L-1)/2 ..= (L-1)/2`.
    pub fn momenta(&self) -> Vec<T> {
        let l = T::from_usize_lossy(self.sites);
        let h = self.half_width();
        (-h..=h)
            .map(|n| T::lit(2.0 * std::f64::consts::PI * n as f64) / l)
            .collect()
    }

    /// Band energy `ε − 2J cos k`.
    pub fn band_energy(&self, k: T) -> T {
        self.epsilon - T::lit(2.0) * self.hopping * k.cos()
    }
}

/// Occupation configuration: qubit bit plus the sorted list of photon site
/// positions (array positions `0..L`, repeated for multiple occupancy).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Config {
    pub qubit: bool,
    pub photons: Vec<u16>,
}

impl Config {
    pub fn excitations(&self) -> usize {
        self.photons.len() + self.qubit as usize
    }

    pub fn occupation(&self, pos: usize) -> usize {
        let p = pos as u16;
        let lo = self.photons.partition_point(|&s| s < p);
        let hi = self.photons.partition_point(|&s| s <= p);
        hi - lo
    }

    fn with_added(&self, pos: usize) -> Config {
        let p = pos as u16;
        let mut photons = self.photons.clone();
        let at = photons.partition_point(|&s| s <= p);
        photons.insert(at, p);
        Config {
            qubit: self.qubit,
            photons,
        }
    }

    fn with_removed(&self, pos: usize) -> Option<Config> {
        let p = pos as u16;
        let at = self.photons.iter().position(|&s| s == p)?;
        let mut photons = self.photons.clone();
        photons.remove(at);
        Some(Config {
            qubit: self.qubit,
            photons,
        })
    }

    /// Distinct occupied positions with their counts.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for &s in &self.photons {
            match out.last_mut() {
                Some((p, n)) if *p == s as usize => *n += 1,
                _ => out.push((s as usize, 1)),
            }
        }
        out
    }
}

/// Lexicographic order on `(qubit bit, n_0, n_1, ..., n_{L-1})`.
fn occupation_order(a: &Config, b: &Config) -> Ordering {
    match a.qubit.cmp(&b.qubit) {
        Ordering::Equal => {}
        o => return o,
    }
    for (x, y) in a.photons.iter().zip(&b.photons) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            // `a` has an extra photon on the earlier site.
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    a.photons.len().cmp(&b.photons.len())
}

#[derive(Debug, Clone, Copy)]
pub struct BasisOptions {
    pub max_dimension: usize,
}

impl Default for BasisOptions {
    fn default() -> Self {
        Self {
            max_dimension: 12_000_000,
        }
    }
}

/// All configurations with total excitation number `<= n_max`.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    sites: usize,
    n_max: usize,
    states: Vec<Config>,
    index: HashMap<Config, usize>,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).ok()
}

/// Number of configurations of `photons` bosons on `sites` sites.
fn multiset_count(sites: usize, photons: usize) -> Option<usize> {
    binomial(sites + photons - 1, photons)
}

impl SectorBasis {
    pub fn dimension_for(sites: usize, n_max: usize) -> Option<usize> {
        let mut total = 0usize;
        for n in 0..=n_max {
            total = total.checked_add(multiset_count(sites, n)?)?;
            if n < n_max {
                total = total.checked_add(multiset_count(sites, n)?)?;
            }
        }
        Some(total)
    }

    pub fn build<T: Real>(spec: &LatticeSpec<T>) -> Result<Self> {
        Self::build_with(spec, BasisOptions::default())
    }

    pub fn build_with<T: Real>(spec: &LatticeSpec<T>, opts: BasisOptions) -> Result<Self> {
        spec.validate()?;
        if spec.sites > u16::MAX as usize {
            return Err(invalid("L", "too many sites"));
        }
        let dim = Self::dimension_for(spec.sites, spec.n_max).unwrap_or(usize::MAX);
        if dim > opts.max_dimension {
            return Err(Error::BasisOverflow {
                requested: dim,
                cap: opts.max_dimension,
            });
        }
        let mut states = Vec::with_capacity(dim);
        for qubit in [false, true] {
            let budget = spec.n_max - qubit as usize;
            if qubit && spec.n_max == 0 {
                continue;
            }
            for n in 0..=budget {
                enumerate_multisets(spec.sites, n, &mut |ph: &[u16]| {
                    states.push(Config {
                        qubit,
                        photons: ph.to_vec(),
                    })
                });
            }
        }
        states.sort_by(occupation_order);
        let index = states.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Ok(Self {
            sites: spec.sites,
            n_max: spec.n_max,
            states,
            index,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.sites
    }

    #[inline]
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn half_width(&self) -> i64 {
        ((self.sites - 1) / 2) as i64
    }

    pub fn states(&self) -> &[Config] {
        &self.states
    }

    pub fn config(&self, i: usize) -> &Config {
        &self.states[i]
    }

    pub fn index_of(&self, c: &Config) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn vacuum_index(&self) -> usize {
        0
    }

    /// Array position of the site with coordinate `x` (scatterer at 0).
    pub fn position(&self, x: i64) -> Result<usize> {
        let h = self.half_width();
        if x < -h || x > h {
            return Err(Error::SiteOutOfRange { site: x, min: -h, max: h });
        }
        Ok((x + h) as usize)
    }

    pub fn coordinate(&self, pos: usize) -> i64 {
        pos as i64 - self.half_width()
    }

    pub fn center(&self) -> usize {
        (self.sites - 1) / 2
    }

    pub fn check_matches<T: Real>(&self, spec: &LatticeSpec<T>) -> Result<()> {
        if self.sites != spec.sites || self.n_max != spec.n_max {
            return Err(Error::Mismatch(format!(
                "basis built for L={}, n_max={} used with L={}, n_max={}",
                self.sites, self.n_max, spec.sites, spec.n_max
            )));
        }
        Ok(())
    }

    /// `a_pos† |c⟩ = factor |c'⟩`, or `None` if `c'` leaves the sector.
    pub fn raise(&self, i: usize, pos: usize) -> Option<(usize, f64)> {
        let c = &self.states[i];
        if c.excitations() >= self.n_max {
            return None;
        }
        let n = c.occupation(pos);
        let target = c.with_added(pos);
        self.index_of(&target).map(|j| (j, ((n + 1) as f64).sqrt()))
    }

    /// `a_pos |c⟩ = factor |c'⟩`, or `None` if the site is empty.
    pub fn lower(&self, i: usize, pos: usize) -> Option<(usize, f64)> {
        let c = &self.states[i];
        let n = c.occupation(pos);
        if n == 0 {
            return None;
        }
        let target = c.with_removed(pos)?;
        self.index_of(&target).map(|j| (j, (n as f64).sqrt()))
    }

    /// Index of `c` with the qubit bit flipped, if inside the sector.
    pub fn flip_qubit(&self, i: usize) -> Option<usize> {
        let c = &self.states[i];
        let target = Config {
            qubit: !c.qubit,
            photons: c.photons.clone(),
        };
        if target.excitations() > self.n_max {
            return None;
        }
        self.index_of(&target)
    }
}

fn enumerate_multisets(sites: usize, n: usize, emit: &mut impl FnMut(&[u16])) {
    fn rec(start: usize, sites: usize, left: usize, buf: &mut Vec<u16>, emit: &mut impl FnMut(&[u16])) {
        if left == 0 {
            emit(buf);
            return;
        }
        for s in start..sites {
            buf.push(s as u16);
            rec(s, sites, left - 1, buf, emit);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(n);
    rec(0, sites, n, &mut buf, emit);
}

pub fn build_basis<T: Real>(spec: &LatticeSpec<T>) -> Result<SectorBasis> {
    SectorBasis::build(spec)
}

/// Sparse Hamiltonian of the truncated lattice model.
pub fn build_hamiltonian<T: Real>(spec: &LatticeSpec<T>, basis: &SectorBasis) -> Result<SparseOperator<T>> {
    spec.validate()?;
    basis.check_matches(spec)?;
    let center = basis.center();
    let sites = basis.sites();
    let mut trips: Vec<(usize, usize, C<T>)> = Vec::with_capacity(basis.dim() * 8);
    let re = |v: T| C::new(v, T::zero());
    for col in 0..basis.dim() {
        let c = basis.config(col);
        let diag = spec.epsilon * T::from_usize_lossy(c.photons.len())
            + if c.qubit { spec.delta } else { T::zero() };
        if diag != T::zero() {
            trips.push((col, col, re(diag)));
        }
        // -J a_{x±1}† a_x : move one photon from each occupied run.
        for (pos, _) in c.runs() {
            if let Some((mid, f1)) = basis.lower(col, pos) {
                for dest in [pos.wrapping_sub(1), pos + 1] {
                    if dest >= sites {
                        continue;
                    }
                    if let Some((row, f2)) = basis.raise(mid, dest) {
                        trips.push((row, col, re(-spec.hopping * T::lit(f1 * f2))));
                    }
                }
            }
        }
        if spec.g != T::zero() {
            // The qubit always flips; rotating terms move the photon the
            // opposite way, counter-rotating terms the same way.
            let rotating_adds = c.qubit;
            let mut terms = vec![rotating_adds];
            if !spec.rwa {
                terms.push(!rotating_adds);
            }
            for add in terms {
                if let Some((row, f)) = basis.coupled_target(col, center, add) {
                    trips.push((row, col, re(spec.g * T::lit(f))));
                }
            }
        }
    }
    SparseOperator::from_triplets(basis.dim(), trips, true)
}

impl SectorBasis {
    /// `σˣ a_pos† |c⟩` (`add`) or `σˣ a_pos |c⟩`, restricted to the sector.
    pub fn coupled_target(&self, i: usize, pos: usize, add: bool) -> Option<(usize, f64)> {
        let c = &self.states[i];
        let n = c.occupation(pos);
        let (moved, f) = if add {
            (c.with_added(pos), ((n + 1) as f64).sqrt())
        } else {
            (c.with_removed(pos)?, (n as f64).sqrt())
        };
        let target = Config {
            qubit: !c.qubit,
            photons: moved.photons,
        };
        if target.excitations() > self.n_max {
            return None;
        }
        self.index_of(&target).map(|j| (j, f))
    }
}

/// `N̂ = Σ_x a_x†a_x + σ⁺σ⁻`, diagonal.
pub fn number_operator<T: Real>(basis: &SectorBasis) -> SparseOperator<T> {
    SparseOperator::diagonal(
        basis
            .states()
            .iter()
            .map(|c| C::new(T::from_usize_lossy(c.excitations()), T::zero()))
            .collect(),
    )
}

pub fn number_diagonal<T: Real>(basis: &SectorBasis) -> Vec<T> {
    basis
        .states()
        .iter()
        .map(|c| T::from_usize_lossy(c.excitations()))
        .collect()
}

/// `a_x†a_x` at site coordinate `x`.
pub fn position_density<T: Real>(basis: &SectorBasis, x: i64) -> Result<SparseOperator<T>> {
    let pos = basis.position(x)?;
    Ok(SparseOperator::diagonal(
        basis
            .states()
            .iter()
            .map(|c| C::new(T::from_usize_lossy(c.occupation(pos)), T::zero()))
            .collect(),
    ))
}

/// `σ⁺σ⁻`, diagonal.
pub fn qubit_population<T: Real>(basis: &SectorBasis) -> SparseOperator<T> {
    SparseOperator::diagonal(
        basis
            .states()
            .iter()
            .map(|c| C::new(if c.qubit { T::one() } else { T::zero() }, T::zero()))
            .collect(),
    )
}

/// Photon number per site for a state, indexed by array position.
pub fn site_densities<T: Real>(basis: &SectorBasis, state: &StateVector<T>) -> Vec<T> {
    let mut dens = vec![T::zero(); basis.sites()];
    for (i, c) in basis.states().iter().enumerate() {
        let w = state[i].norm_sqr();
        if w == T::zero() {
            continue;
        }
        for &p in &c.photons {
            dens[p as usize] += w;
        }
    }
    dens
}

/// Applies `Σ_pos f[pos] a_pos†` (projected onto the sector).
pub fn apply_creation<T: Real>(basis: &SectorBasis, profile: &[C<T>], state: &StateVector<T>) -> StateVector<T> {
    let mut out = StateVector::zeros(basis.dim());
    let cutoff = profile.iter().fold(T::zero(), |m, v| m.max(v.norm())) * T::epsilon() * T::lit(1e-3);
    let active: Vec<usize> = (0..profile.len()).filter(|&p| profile[p].norm() > cutoff).collect();
    for i in 0..basis.dim() {
        let a = state[i];
        if a == czero() {
            continue;
        }
        for &pos in &active {
            if let Some((j, f)) = basis.raise(i, pos) {
                out[j] += profile[pos] * a * T::lit(f);
            }
        }
    }
    out
}

/// Applies `Σ_pos conj(f[pos]) a_pos`, the adjoint of [`apply_creation`].
pub fn apply_annihilation<T: Real>(basis: &SectorBasis, profile: &[C<T>], state: &StateVector<T>) -> StateVector<T> {
    let mut out = StateVector::zeros(basis.dim());
    for i in 0..basis.dim() {
        let a = state[i];
        if a == czero() {
            continue;
        }
        for (pos, _) in basis.config(i).runs() {
            if let Some((j, f)) = basis.lower(i, pos) {
                out[j] += profile[pos].conj() * a * T::lit(f);
            }
        }
    }
    out
}

/// `a_pos |ψ⟩`.
pub fn apply_site_annihilation<T: Real>(basis: &SectorBasis, pos: usize, state: &StateVector<T>) -> StateVector<T> {
    let mut out = StateVector::zeros(basis.dim());
    for i in 0..basis.dim() {
        let a = state[i];
        if a == czero() {
            continue;
        }
        if let Some((j, f)) = basis.lower(i, pos) {
            out[j] += a * T::lit(f);
        }
    }
    out
}

/// `σˣ |ψ⟩` projected onto the sector.
pub fn apply_sigma_x<T: Real>(basis: &SectorBasis, state: &StateVector<T>) -> StateVector<T> {
    let mut out = StateVector::zeros(basis.dim());
    for i in 0..basis.dim() {
        if let Some(j) = basis.flip_qubit(i) {
            out[j] += state[i];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(sites: usize, rwa: bool, n_max: usize) -> LatticeSpec<f64> {
        LatticeSpec {
            sites,
            epsilon: 1.0,
            hopping: 0.25,
            delta: 1.2,
            g: 0.4,
            rwa,
            n_max,
        }
    }

    #[test]
    fn sector_dimensions() {
        // n_max = 2 on 5 sites: 1 + 5 + 15 photon states, 1 + 5 with the qubit up.
        let b = SectorBasis::build(&spec(5, true, 2)).unwrap();
        assert_eq!(b.dim(), 27);
        assert_eq!(SectorBasis::dimension_for(5, 2), Some(27));
        assert_eq!(SectorBasis::dimension_for(41, 3), Some(14147));
        assert!(b.states().iter().all(|c| c.excitations() <= 2));
        assert_eq!(b.config(b.vacuum_index()).excitations(), 0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(spec(4, true, 1).validate().is_err());
        assert!(LatticeSpec { hopping: 0.0, ..spec(5, true, 1) }.validate().is_err());
        assert!(spec(5, true, 0).validate().is_err());
        let cap = BasisOptions { max_dimension: 10 };
        assert!(matches!(
            SectorBasis::build_with(&spec(5, true, 2), cap),
            Err(Error::BasisOverflow { requested: 27, cap: 10 })
        ));
    }

    #[test]
    fn ladder_factors() {
        let b = SectorBasis::build(&spec(3, true, 2)).unwrap();
        let one = b.index_of(&Config { qubit: false, photons: vec![1] }).unwrap();
        let (two, f) = b.raise(one, 1).unwrap();
        assert_eq!(b.config(two).photons, vec![1, 1]);
        assert!((f - 2f64.sqrt()).abs() < 1e-15);
        assert!(b.raise(two, 0).is_none());
        let (back, f) = b.lower(two, 1).unwrap();
        assert_eq!(back, one);
        assert!((f - 2f64.sqrt()).abs() < 1e-15);
        assert!(b.lower(one, 0).is_none());
    }

    #[test]
    fn coordinates_center_on_scatterer() {
        let b = SectorBasis::build(&spec(7, true, 1)).unwrap();
        assert_eq!(b.position(0).unwrap(), 3);
        assert_eq!(b.coordinate(0), -3);
        assert!(matches!(b.position(4), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn single_excitation_matrix() {
        let s = spec(3, true, 1);
        let b = SectorBasis::build(&s).unwrap();
        let h = build_hamiltonian(&s, &b).unwrap();
        let at = |q: bool, p: &[u16]| b.index_of(&Config { qubit: q, photons: p.to_vec() }).unwrap();
        let (x0, x1, x2, e) = (at(false, &[0]), at(false, &[1]), at(false, &[2]), at(true, &[]));
        assert_eq!(h.get(x0, x0).re, 1.0);
        assert_eq!(h.get(e, e).re, 1.2);
        assert_eq!(h.get(x0, x1).re, -0.25);
        assert_eq!(h.get(x0, x2).re, 0.0);
        assert_eq!(h.get(e, x1).re, 0.4);
        assert_eq!(h.get(e, x0).re, 0.0);
    }

    #[test]
    fn counter_rotating_terms_connect_vacuum() {
        let b = SectorBasis::build(&spec(3, false, 2)).unwrap();
        let h = build_hamiltonian(&spec(3, false, 2), &b).unwrap();
        let up = b.index_of(&Config { qubit: true, photons: vec![1] }).unwrap();
        assert_eq!(h.get(up, b.vacuum_index()).re, 0.4);
        let rwa = build_hamiltonian(&spec(3, true, 2), &b).unwrap();
        assert_eq!(rwa.get(up, b.vacuum_index()).re, 0.0);
    }

    #[test]
    fn densities_of_a_basis_state() {
        let b = SectorBasis::build(&spec(5, true, 2)).unwrap();
        let i = b.index_of(&Config { qubit: false, photons: vec![1, 1] }).unwrap();
        let s = StateVector::<f64>::basis_state(b.dim(), i);
        let n = site_densities(&b, &s);
        assert_eq!(n, vec![0.0, 2.0, 0.0, 0.0, 0.0]);
    }
}
