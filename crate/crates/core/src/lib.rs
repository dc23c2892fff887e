//! Giant atoms coupled at two sites each to a coupled-resonator waveguide.
//!
//! - [`model`]: exact resonant coefficients `A_ij` from connection geometry,
//!   topology classification and exhaustive geometry search.
//! - [`lattice`]: exact single-excitation propagation of atoms plus a lossy
//!   open chain, the reference for every Markovian prediction.
//! - [`lindblad`]: one- and two-atom master equations, closed-form
//!   populations, Bell fidelity and the effective non-Hermitian spectrum.
//!
//! Frequencies are in units of the hopping `ξ` unless stated otherwise.

pub mod integrate;
pub mod lattice;
pub mod lindblad;
pub mod model;
