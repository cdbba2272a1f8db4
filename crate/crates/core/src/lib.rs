//! Dissipative wave-packet dynamics under the Caldirola-Kanai Hamiltonian
//! `H = (P²/2m) e^{-γt} + V(X) e^{γt}`.
//!
//! Three independent layers describe the same physics and cross-check one
//! another:
//!
//! * [`closed_form`]: exact laws for free, linear and harmonic potentials.
//! * [`gaussian_ode`]: RK4 integration of the Gaussian-ansatz parameters.
//! * [`grid_solver`]: split-step Fourier propagation of the full wave function.
//!
//! [`bohm`] builds trajectory ensembles on top of any of them and
//! [`observables`] extracts moments, energies and currents.

pub mod bohm;
pub mod closed_form;
pub mod error;
pub mod gaussian_ode;
pub mod grid_solver;
pub mod observables;
pub mod setup;
pub mod table;

pub use error::{Error, Result};
pub use gaussian_ode::GaussianParams;
pub use grid_solver::{GridConfig, GridWavefunction};
pub use setup::{classify_regime, potential_eval, DampingRegime, PhysicalSetup, PotentialSpec};
