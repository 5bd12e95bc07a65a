//! Dense references for the lattice model, built from occupation vectors
//! without any of the library's basis machinery.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C;
use wqed::model::{Config, LatticeSpec};

pub struct DenseModel {
    /// `(qubit, n_0, ..., n_{L−1})` for each basis vector.
    pub occupations: Vec<(bool, Vec<usize>)>,
    pub h: DMatrix<f64>,
}

fn enumerate(sites: usize, budget: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..sites {
        let mut next = Vec::new();
        for v in &out {
            let used: usize = v.iter().sum();
            for n in 0..=budget - used {
                let mut w = v.clone();
                w.push(n);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

impl DenseModel {
    pub fn new(spec: &LatticeSpec<f64>) -> Self {
        let l = spec.sites;
        let mut occupations = Vec::new();
        for q in [false, true] {
            if q && spec.n_max == 0 {
                continue;
            }
            for v in enumerate(l, spec.n_max - q as usize) {
                occupations.push((q, v));
            }
        }
        let index = |q: bool, v: &[usize]| occupations.iter().position(|(a, b)| *a == q && b == v);
        let dim = occupations.len();
        let mut h = DMatrix::zeros(dim, dim);
        let c = (l - 1) / 2;
        for (col, (q, v)) in occupations.iter().enumerate() {
            let photons: usize = v.iter().sum();
            h[(col, col)] += spec.epsilon * photons as f64 + if *q { spec.delta } else { 0.0 };
            for x in 0..l {
                if v[x] == 0 {
                    continue;
                }
                for y in [x.wrapping_sub(1), x + 1] {
                    if y >= l {
                        continue;
                    }
                    let mut w = v.clone();
                    let amp = (w[x] as f64).sqrt();
                    w[x] -= 1;
                    w[y] += 1;
                    let amp = amp * (w[y] as f64).sqrt();
                    let row = index(*q, &w).unwrap();
                    h[(row, col)] += -spec.hopping * amp;
                }
            }
            // σ⁻a_c† and σ⁺a_c, then σ⁺a_c† and σ⁻a_c beyond the RWA.
            let mut moves = vec![(true, true), (false, false)];
            if !spec.rwa {
                moves.push((false, true));
                moves.push((true, false));
            }
            for (needs_qubit, add) in moves {
                if needs_qubit != *q {
                    continue;
                }
                let mut w = v.clone();
                let amp = if add {
                    w[c] += 1;
                    (w[c] as f64).sqrt()
                } else {
                    if w[c] == 0 {
                        continue;
                    }
                    let a = (w[c] as f64).sqrt();
                    w[c] -= 1;
                    a
                };
                let photons_after: usize = w.iter().sum();
                if photons_after + (!*q) as usize > spec.n_max {
                    continue;
                }
                if let Some(row) = index(!*q, &w) {
                    h[(row, col)] += spec.g * amp;
                }
            }
        }
        Self { occupations, h }
    }

    pub fn dim(&self) -> usize {
        self.occupations.len()
    }

    /// The library configuration of basis vector `i`.
    pub fn config(&self, i: usize) -> Config {
        let (q, v) = &self.occupations[i];
        let photons = v.iter().enumerate().flat_map(|(x, &n)| std::iter::repeat_n(x as u16, n)).collect();
        Config { qubit: *q, photons }
    }

    pub fn eigen(&self) -> SymmetricEigen<f64, nalgebra::Dyn> {
        SymmetricEigen::new(self.h.clone())
    }
}

/// `e^{−iHt} ψ` from the eigendecomposition.
pub fn evolve(eig: &SymmetricEigen<f64, nalgebra::Dyn>, psi: &[C], t: f64) -> Vec<C> {
    let v = &eig.eigenvectors;
    let n = psi.len();
    let mut coeff = DVector::<C>::zeros(n);
    for a in 0..n {
        let mut s = C::new(0.0, 0.0);
        for b in 0..n {
            s += v[(b, a)] * psi[b];
        }
        coeff[a] = s * C::from_polar(1.0, -eig.eigenvalues[a] * t);
    }
    (0..n)
        .map(|b| (0..n).fold(C::new(0.0, 0.0), |acc, a| acc + v[(b, a)] * coeff[a]))
        .collect()
}

/// Largest discrepancies between the library and the dense reference.
#[derive(Debug, Clone, Copy)]
pub struct OracleReport {
    pub hamiltonian: f64,
    pub ground_energy: f64,
    pub ground_amplitudes: f64,
    pub evolution_chebyshev: f64,
    pub evolution_krylov: f64,
}

pub fn compare_with_dense(spec: &LatticeSpec<f64>) -> OracleReport {
    use wqed::groundstate::ground_state;
    use wqed::model::{build_hamiltonian, SectorBasis};
    use wqed::propagate::{propagate, Method};

    let basis = SectorBasis::build(spec).unwrap();
    let h = build_hamiltonian(spec, &basis).unwrap();
    let dense = DenseModel::new(spec);
    assert_eq!(basis.dim(), dense.dim(), "{spec:?}");
    let n = dense.dim();
    let perm: Vec<usize> = (0..n).map(|i| basis.index_of(&dense.config(i)).expect("same sector")).collect();

    let mut hamiltonian: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            hamiltonian = hamiltonian.max((h.get(perm[r], perm[c]) - C::new(dense.h[(r, c)], 0.0)).norm());
        }
    }

    let eig = dense.eigen();
    let (imin, emin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, &e)| if e < b.1 { (i, e) } else { b });
    let gs = ground_state(&h).unwrap();
    let overlap: C = (0..n).map(|i| gs.state.amplitudes[perm[i]].conj() * eig.eigenvectors[(i, imin)]).sum();
    let phase = overlap / overlap.norm();
    let ground_amplitudes = (0..n)
        .map(|i| (gs.state.amplitudes[perm[i]] * phase - eig.eigenvectors[(i, imin)]).norm_sqr())
        .sum::<f64>()
        .sqrt();

    let mut psi: Vec<C> = (0..n).map(|i| C::new((1.0 + i as f64).sin(), (0.5 * i as f64).cos())).collect();
    let norm = psi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|v| *v /= norm);
    let mut sparse_in = vec![C::new(0.0, 0.0); n];
    for i in 0..n {
        sparse_in[perm[i]] = psi[i];
    }
    let t = 7.5;
    let want = evolve(&eig, &psi, t);
    let evo = |method| {
        let got = propagate(&h, &sparse_in, t, method, 1e-12).unwrap().state;
        (0..n).map(|i| (got[perm[i]] - want[i]).norm_sqr()).sum::<f64>().sqrt()
    };
    OracleReport {
        hamiltonian,
        ground_energy: (gs.energy - emin).abs(),
        ground_amplitudes,
        evolution_chebyshev: evo(Method::Chebyshev),
        evolution_krylov: evo(Method::KrylovExp),
    }
}

/// Every lattice with `L ≤ 9`, `n_max ≤ 2` used by the oracle checks.
pub fn small_lattices() -> Vec<LatticeSpec<f64>> {
    let mut out = Vec::new();
    for sites in [3, 5, 7, 9] {
        for n_max in [1, 2] {
            for (g, rwa) in [(0.3, true), (0.3, false), (0.8, false)] {
                out.push(LatticeSpec {
                    sites,
                    epsilon: 1.0,
                    hopping: 1.0 / std::f64::consts::PI,
                    delta: 1.0,
                    g,
                    rwa,
                    n_max,
                });
            }
        }
    }
    out
}
