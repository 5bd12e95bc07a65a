//! Brute-force references for the chiral continuum model.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C;
use wqed::smatrix::{PacketPair, TMatrix};

/// Transmission of a two-level emitter measured by evolving a packet
/// through a discretized chiral band `k ∈ [Δ − w, Δ + w]`.
///
/// Returns `(k, t_measured)` wherever the packet weight is appreciable.
pub fn two_level_transmission(delta: f64, gamma: f64, sigma: f64, w: f64, modes: usize, time: f64) -> Vec<(f64, C)> {
    let dk = 2.0 * w / (modes - 1) as f64;
    let ks: Vec<f64> = (0..modes).map(|j| delta - w + j as f64 * dk).collect();
    let g = (gamma / (2.0 * std::f64::consts::PI)).sqrt() * dk.sqrt();
    let n = modes + 1;
    let mut h = DMatrix::<f64>::zeros(n, n);
    for (j, k) in ks.iter().enumerate() {
        h[(j, j)] = *k;
        h[(j, modes)] = g;
        h[(modes, j)] = g;
    }
    h[(modes, modes)] = delta;
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let envelope = |k: f64| {
        let q = k - delta;
        (2.0 * std::f64::consts::PI).powf(-0.25) / sigma.sqrt() * (-(q * q) / (4.0 * sigma * sigma)).exp()
    };
    // Start half a period before the emitter in the interaction picture.
    let mut c_in = vec![C::new(0.0, 0.0); n];
    for (j, k) in ks.iter().enumerate() {
        c_in[j] = envelope(*k) * dk.sqrt() * C::from_polar(1.0, k * time / 2.0);
    }
    let mut coeff = vec![C::new(0.0, 0.0); n];
    for (a, c) in coeff.iter_mut().enumerate() {
        let mut s = C::new(0.0, 0.0);
        for b in 0..n {
            s += v[(b, a)] * c_in[b];
        }
        *c = s * C::from_polar(1.0, -eig.eigenvalues[a] * time);
    }
    let peak = envelope(delta);
    let mut out = Vec::new();
    for (j, k) in ks.iter().enumerate() {
        let phi = envelope(*k);
        if phi < 0.05 * peak {
            continue;
        }
        let mut s = C::new(0.0, 0.0);
        for (a, c) in coeff.iter().enumerate() {
            s += v[(j, a)] * c;
        }
        let free = C::from_polar(1.0, k * time / 2.0);
        out.push((*k, s * free / (phi * dk.sqrt())));
    }
    out
}

/// One photon after a single event `ν → λ`, on a uniform position grid:
/// `u(y) = (2π)^{-1/2} ∫ dp e^{ipy} t_{λν}(k) φ(k)`, `k = p + E_λ − E_ν`.
pub struct PositionGrid {
    pub y0: f64,
    pub dy: f64,
    pub n: usize,
}

impl PositionGrid {
    pub fn y(&self, i: usize) -> f64 {
        self.y0 + i as f64 * self.dy
    }
}

pub fn scattered_photon(
    grid: &PositionGrid,
    shift: f64,
    t: impl Fn(f64) -> C,
    phi: impl Fn(f64) -> C,
    k_center: f64,
    k_half: f64,
    k_nodes: usize,
) -> Vec<C> {
    let dk = 2.0 * k_half / (k_nodes - 1) as f64;
    let samples: Vec<(f64, C)> = (0..k_nodes)
        .map(|j| {
            let k = k_center - k_half + j as f64 * dk;
            let w = if j == 0 || j == k_nodes - 1 { 0.5 } else { 1.0 };
            (k - shift, t(k) * phi(k) * w * dk)
        })
        .collect();
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    (0..grid.n)
        .map(|i| {
            let y = grid.y(i);
            samples.iter().fold(C::new(0.0, 0.0), |acc, (p, a)| acc + a * C::from_polar(1.0, p * y)) * norm
        })
        .collect()
}

/// `(2π)^{-1} ∫∫ dy_a dy_b e^{−i(p_a y_a + p_b y_b)} ahead(y_a) behind(y_b) θ(y_a − y_b)`
/// by a cumulative trapezoid rule.
pub fn ordered_transform(grid: &PositionGrid, ahead: &[C], behind: &[C], pa: f64, pb: f64) -> C {
    let mut inner = C::new(0.0, 0.0);
    let mut prev = C::new(0.0, 0.0);
    let mut acc = C::new(0.0, 0.0);
    for i in 0..grid.n {
        let y = grid.y(i);
        let b = behind[i] * C::from_polar(1.0, -pb * y);
        if i > 0 {
            inner += (prev + b) * (0.5 * grid.dy);
        }
        let w = if i == 0 || i == grid.n - 1 { 0.5 } else { 1.0 };
        acc += ahead[i] * C::from_polar(1.0, -pa * y) * inner * (w * grid.dy);
        prev = b;
    }
    acc / (2.0 * std::f64::consts::PI)
}

/// Output amplitude `ψ_μ(p)` of two packets, the second trailing by `l`,
/// from position-space products of once-scattered photons with the photon
/// that scattered first placed ahead.
pub fn position_space_amplitude(tm: &TMatrix<f64>, pair: &PacketPair<f64>, l: f64, mu: usize, nu: usize, points: &[[f64; 2]]) -> Vec<C> {
    let e = tm.spec.ground.clone();
    let sigma = pair.first.sigma.max(pair.second.sigma);
    let grid = PositionGrid { y0: -l - 130.0, dy: 0.025, n: ((l + 180.0) / 0.025) as usize + 1 };
    let photon = |first: bool, from: usize, to: usize| {
        let env = if first { pair.first } else { pair.second };
        let delay = if first { 0.0 } else { l };
        scattered_photon(
            &grid,
            e[to] - e[from],
            |k| tm.eval(to, from, C::new(k, 0.0)),
            |k| env.value(k) * C::from_polar(1.0, k * delay),
            env.k_bar,
            10.0 * sigma,
            201,
        )
    };
    // Per intermediate λ: photon 1 and 2 after ν → λ, then after λ → μ.
    let photons: Vec<[Vec<C>; 4]> = (0..tm.channels())
        .map(|lambda| [photon(true, nu, lambda), photon(false, nu, lambda), photon(true, lambda, mu), photon(false, lambda, mu)])
        .collect();
    points
        .iter()
        .map(|p| {
            let mut acc = C::new(0.0, 0.0);
            for u in &photons {
                for (a, b) in [(0, 3), (1, 2)] {
                    acc += ordered_transform(&grid, &u[a], &u[b], p[0], p[1]);
                    acc += ordered_transform(&grid, &u[a], &u[b], p[1], p[0]);
                }
            }
            acc
        })
        .collect()
}
