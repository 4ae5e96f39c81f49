//! Reduced-order modeling of geometrically nonlinear structural dynamics.
//!
//! The pipeline implemented here:
//!
//! 1. [`dynsys`] — polynomial dynamical systems (mass/damping/stiffness plus
//!    quadratic and cubic internal-force tensors), with a Duffing resonator
//!    and a clamped-clamped von Kármán beam as concrete builders.
//! 2. [`hb`] — periodic solutions by harmonic balance with alternating
//!    frequency/time evaluation of the nonlinear terms, pseudo-arclength
//!    continuation of frequency-response branches, and a time-marching
//!    cross-check.
//! 3. [`pod`] — snapshot matrices, proper orthogonal decomposition, and
//!    Galerkin projection onto the POD subspace (exact for polynomial
//!    forces).
//! 4. [`nn`] — a small dense/convolutional network engine with reverse-mode
//!    gradients and Adam.
//! 5. [`dlrom`] — the autoencoder + feedforward latent-dynamics surrogate
//!    trained on reduced snapshots, plus the phase-to-frequency map used to
//!    reassemble frequency-response curves.
//! 6. [`io`] — the binary and CSV artifact formats shared with the CLI.
//!
//! The whole numerical core is generic over the [`Real`] scalar; the aliases
//! below pin the `f64` instantiation used by the CLI and the file formats.

// pub mod dlrom;
pub mod dynsys;
// pub mod hb;
// pub mod io;
// pub mod nn;
// pub mod pod;
pub mod scalar;

pub use scalar::Real;

/// `f64` instantiations of the core types.
pub type PolySystem64 = dynsys::PolySystem<f64>;
pub type MaterialGeometry64 = dynsys::MaterialGeometry<f64>;
// pub type FourierOrbit64 = hb::FourierOrbit<f64>;
// pub type ContinuationConfig64 = hb::ContinuationConfig<f64>;
// pub type SnapshotSet64 = pod::SnapshotSet<f64>;
// pub type PodBasis64 = pod::PodBasis<f64>;
// pub type ReducedPolySystem64 = pod::ReducedPolySystem<f64>;
// pub type Tensor64 = nn::Tensor<f64>;
// pub type Network64 = nn::Network<f64>;
// pub type DlromModel64 = dlrom::DlromModel<f64>;
// pub type PhaseMapModel64 = dlrom::PhaseMapModel<f64>;
// pub type TrainConfig64 = dlrom::TrainConfig<f64>;
