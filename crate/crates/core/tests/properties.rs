use num_complex::Complex64 as C;
use proptest::prelude::*;
use wqed::model::{build_hamiltonian, number_operator, LatticeSpec, SectorBasis};
use wqed::propagate::{propagate, Method};
use wqed::quadrature::{integrate_line, QuadOptions};
use wqed::smatrix::{amplitude_series, KernelC, PacketPair, Part, ScattererSpec, TMatrix};
use wqed::wavepacket::{Envelope, EnvelopeKind};

fn lattice() -> impl Strategy<Value = LatticeSpec<f64>> {
    (1usize..5, 1usize..3, -1.0..1.0f64, any::<bool>(), 0.5..1.5f64).prop_map(|(h, n_max, g, rwa, delta)| LatticeSpec {
        sites: 2 * h + 1,
        epsilon: 1.0,
        hopping: 1.0 / std::f64::consts::PI,
        delta,
        g,
        rwa,
        n_max,
    })
}

fn scatterer() -> impl Strategy<Value = ScattererSpec<f64>> {
    (1usize..4, 1usize..3).prop_flat_map(|(m, mp)| {
        (
            prop::collection::vec(0.0..0.5f64, m),
            prop::collection::vec(0.5..1.5f64, mp),
            prop::collection::vec((-0.4..0.4f64, -0.4..0.4f64), m * mp),
        )
            .prop_map(move |(mut e, et, g)| {
                e[0] = 0.0;
                let rows = (0..mp)
                    .map(|j| (0..m).map(|n| C::new(g[j * m + n].0, g[j * m + n].1)).collect())
                    .collect();
                ScattererSpec::new(e, et, rows).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_hermitian(spec in lattice()) {
        let basis = SectorBasis::build(&spec).unwrap();
        let h = build_hamiltonian(&spec, &basis).unwrap();
        prop_assert!(h.is_hermitian());
    }

    #[test]
    fn rwa_conserves_excitations(spec in lattice()) {
        let spec = LatticeSpec { rwa: true, ..spec };
        let basis = SectorBasis::build(&spec).unwrap();
        let h = build_hamiltonian(&spec, &basis).unwrap();
        let n = number_operator::<f64>(&basis);
        for c in 0..basis.dim() {
            for r in 0..basis.dim() {
                let v = h.get(r, c);
                if v.norm() > 0.0 {
                    prop_assert_eq!(n.get(r, r), n.get(c, c));
                }
            }
        }
    }

    #[test]
    fn propagation_is_unitary(spec in lattice(), t in 0.1..20.0f64) {
        let basis = SectorBasis::build(&spec).unwrap();
        let h = build_hamiltonian(&spec, &basis).unwrap();
        let d = basis.dim();
        let psi: Vec<C> = (0..d).map(|i| C::new(1.0 / (d as f64).sqrt(), 0.0) * C::from_polar(1.0, i as f64)).collect();
        for m in [Method::Chebyshev, Method::KrylovExp] {
            let out = propagate(&h, &psi, t, m, 1e-12).unwrap().state;
            let norm: f64 = out.iter().map(|v| v.norm_sqr()).sum();
            prop_assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn forward_then_backward_is_identity(spec in lattice(), t in 0.1..10.0f64) {
        let basis = SectorBasis::build(&spec).unwrap();
        let h = build_hamiltonian(&spec, &basis).unwrap();
        let mut psi = vec![C::new(0.0, 0.0); basis.dim()];
        psi[basis.dim() - 1] = C::new(1.0, 0.0);
        let fwd = propagate(&h, &psi, t, Method::Chebyshev, 1e-12).unwrap().state;
        let back = propagate(&h, &fwd, -t, Method::KrylovExp, 1e-12).unwrap().state;
        let err: f64 = back.iter().zip(&psi).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(err < 1e-9);
    }

    #[test]
    fn envelopes_are_normalized(k in -2.0..2.0f64, sigma in 0.05..1.0f64, lorentz in any::<bool>()) {
        let kind = if lorentz { EnvelopeKind::Lorentzian } else { EnvelopeKind::Gaussian };
        let env = Envelope::new(kind, k, sigma).unwrap();
        let opts = QuadOptions::default().with_abs_tol(1e-11);
        let n = integrate_line(|q| C::new(env.value(q).norm_sqr(), 0.0), k, 4.0 * sigma, &opts).unwrap().value;
        prop_assert!((n.re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn one_photon_scattering_is_unitary(spec in scatterer(), k in -2.0..3.0f64) {
        if let Ok(tm) = TMatrix::new(&spec) {
            prop_assert!(tm.unitarity_error(k).unwrap() < 1e-10);
            prop_assert!(tm.poles.iter().all(|z| z.im < 0.0));
        }
    }

    #[test]
    fn output_amplitude_is_bose_symmetric(p1 in 0.5..1.5f64, p2 in 0.5..1.5f64, l in 0.1..20.0f64) {
        let tm = TMatrix::new(&ScattererSpec::lambda(0.3, 1.0, 0.2, 0.15)).unwrap();
        let pair = PacketPair::lorentzian(1.0, 0.9, 0.05).unwrap();
        for mu in 0..2 {
            let a = amplitude_series(&tm, &KernelC::none(), &pair, Part::S0, mu, 0, [p1, p2]).unwrap().total(l);
            let b = amplitude_series(&tm, &KernelC::none(), &pair, Part::S0, mu, 0, [p2, p1]).unwrap().total(l);
            prop_assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }
}
