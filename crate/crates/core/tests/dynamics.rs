//! Lattice scattering runs checked against their own asymptotics.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C;
use wqed::dynamics::{EvolutionPlan, ScatterContext, ScatterOptions};
use wqed::groundstate::solve_lattice;
use wqed::model::LatticeSpec;
use wqed::wavepacket::{PacketSpec, SupportRule};

fn context(g: f64, rwa: bool, n_max: usize) -> ScatterContext<f64> {
    let spec = LatticeSpec {
        sites: 401,
        epsilon: 1.0,
        hopping: 1.0 / PI,
        delta: 1.0,
        g,
        rwa,
        n_max,
    };
    let options = ScatterOptions {
        support: SupportRule::input().with_widths(4.0),
        ..Default::default()
    };
    ScatterContext::new(&spec, options).unwrap()
}

/// Interaction-picture momentum amplitudes `e^{i(E+ω_k)t}⟨Ω₀|a_k|Ψ(t)⟩`.
///
/// A far photon rides on the ground state of the sector with one
/// excitation fewer, so `E` is that energy rather than `E₀`.
fn settled_amplitudes(ctx: &ScatterContext<f64>, packet: &PacketSpec<f64>, t: f64) -> Vec<C> {
    // With no excitation left the background is the bare vacuum.
    let energy = match ctx.spec.n_max {
        1 => 0.0,
        n => solve_lattice(&LatticeSpec { n_max: n - 1, ..ctx.spec }, 1).unwrap().2.energy,
    };
    let r = ctx.run(std::slice::from_ref(packet), &EvolutionPlan::new(t, t)).unwrap();
    let f = r.one_photon().unwrap();
    let disp = ctx.dispersion();
    f.momenta
        .iter()
        .zip(&f.momentum)
        .map(|(&k, v)| v * C::from_polar(1.0, (energy + disp.omega(k)) * t))
        .collect()
}

#[test]
fn output_amplitudes_are_settled_at_t_plus() {
    // The packet peak passes the scatterer near t = 63; by t = 150 the
    // qubit amplitude has decayed to about e^{-12}, and at t = 300 the
    // photon is still clear of the edges.
    let packet = PacketSpec::gaussian(FRAC_PI_2, 0.2, -40.0);
    for ctx in [context(0.3, true, 1), context(0.3, false, 2)] {
        let a = settled_amplitudes(&ctx, &packet, 150.0);
        let b = settled_amplitudes(&ctx, &packet, 300.0);
        let scale = a.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let change = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale;
        assert!(change < 1e-4, "rwa = {}: relative change {change:e}", ctx.spec.rwa);
    }
}
