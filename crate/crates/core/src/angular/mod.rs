//! Angular-momentum algebra: half-integer quantum numbers, Wigner 3j/6j symbols
//! and hyperfine dipole amplitudes.

mod dipole;
mod halfint;
mod wigner;

pub use dipole::{
    dipole_amplitude, reduced_hyperfine, relative_line_strength, DipoleAmplitude, Manifold,
    Polarization, Sublevel, WIGNER_CONVENTION,
};
pub use halfint::HalfInt;
pub use wigner::{wigner3j, wigner6j};
