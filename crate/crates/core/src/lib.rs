//! Perfect state transfer in circulant waveguide networks.
//!
//! The crate models a ring of `N` evanescently or uniformly coupled waveguides
//! and provides exact Fourier-mode spectra and propagators, single-photon and
//! cat-state transport, Gaussian (TMSV) covariance evolution, and synthesis of
//! the uniform PST coupling profile from auxiliary modes.


pub mod cli;
pub mod coupling_synthesis;
pub mod error;
pub mod fock_transport;
pub mod gaussian_transport;
pub mod lattice;
pub mod propagation;
pub mod scan;
pub mod spectral;

pub use error::{PstError, Result};
pub use lattice::{coupling_matrix, CouplingProfile, NetworkSpec, ProfileKind};
pub use propagation::{check_pst, propagator, PstReport, Propagator};
pub use spectral::{dispersion, Spectrum};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Largest entry modulus of a complex matrix.
pub(crate) fn max_norm(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, c| acc.max(c.norm()))
}
