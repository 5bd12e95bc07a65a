//! Few-photon scattering in waveguide QED.
//!
//! Lattice side: a cavity array with a two-level scatterer, truncated to a
//! fixed number of excitations, with ground-state, dynamics and light-cone
//! tools. Continuum side: closed-form one- and two-photon S-matrix of a
//! chiral multi-level scatterer, evaluated with exact delta bookkeeping.
//!
//! Numerical code is generic over [`Real`]; the aliases below fix `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causality;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod groundstate;
pub mod linalg;
pub mod model;
pub mod propagate;
pub mod quadrature;
pub mod scalar;
pub mod smatrix;
pub mod sparse;
pub mod state;
pub mod wavepacket;

pub use error::{Error, Result};
pub use scalar::{Real, C};

pub type Complex64 = num_complex::Complex<f64>;
pub type Lattice = model::LatticeSpec<f64>;
pub type Operator = sparse::SparseOperator<f64>;
pub type State = state::StateVector<f64>;
pub type Packet = wavepacket::PacketSpec<f64>;
pub type Envelope = wavepacket::Envelope<f64>;
pub type Dispersion = wavepacket::Dispersion<f64>;
