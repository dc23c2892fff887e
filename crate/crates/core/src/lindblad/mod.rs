//! Reduced master equations for one and two giant atoms, closed-form
//! dynamics, fidelity and the spectrum of the effective Hamiltonian.

pub mod closed_form;
mod density;
mod liouvillian;
mod pt;

pub use closed_form::{
    fidelity_linear_estimate, markov_pe, p1_closed, p2_closed, transmission_closed,
};
pub use density::{bell_fidelity, bell_target, DensityMatrix, EE, EG, GE, GG};
pub use liouvillian::{
    build_liouvillian, evolve_density, evolve_density_checked, one_excited, single_atom_evolve,
    single_atom_liouvillian, Liouvillian, TwoAtomRates,
};
pub use pt::{pt_eigenfrequencies, PtPhase, PtSpectrum};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LindbladError {
    #[error("density matrix must be 2×2 or 4×4 matching the generator, got dimension {0}")]
    Dimension(usize),
    #[error("decay rate Re(A) = {0} is negative")]
    NegativeDecay(f64),
    #[error("rates must be finite")]
    NonFiniteRate,
    #[error("intrinsic rates must be non-negative")]
    NegativeRate,
    #[error("dissipation matrix [[{gamma11}, {gamma12}], [{gamma12}, {gamma22}]] is not positive semidefinite")]
    IndefiniteDissipation {
        gamma11: f64,
        gamma22: f64,
        gamma12: f64,
    },
    #[error("step dt = {0} must be positive")]
    BadStep(f64),
    #[error("time grid must be ascending and non-negative")]
    BadGrid,
    #[error("density matrix lost positivity at t = {time}: eigenvalue {min_eig:e}")]
    PositivityViolation { time: f64, min_eig: f64 },
    #[error("halved-step check deviates by {deviation:e} (tolerance {tolerance:e})")]
    AccuracyCheck { deviation: f64, tolerance: f64 },
}
