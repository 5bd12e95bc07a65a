//! Continuum model: a scatterer with `M` ground and `M′` excited states on a
//! chiral line with linear dispersion.
//!
//! One-photon amplitudes come from the single-excitation Lippmann–Schwinger
//! solution; two-photon `S⁰` is assembled from them with the ordering of
//! arrivals kept explicit, both in position space and as an exact
//! distribution in momentum space.

pub mod position;
pub mod prony;
pub mod rational;
pub mod spec;
pub mod symbolic;
pub mod tmatrix;
pub mod wavefunction;

pub use position::{s0_position, step_transform, PositionKernel, PositionS0};
pub use spec::ScattererSpec;
pub use symbolic::{reduce_unique_ground, s0_momentum, Amplitude};
pub use tmatrix::TMatrix;
pub use wavefunction::{
    amplitude_quadrature, amplitude_series, decay_rates, fluorescence_curve, output_wavefunction, DecayReport,
    KernelC, KernelPole, MomentumGrid, OutputWavefunction, PacketPair, Part,
};
