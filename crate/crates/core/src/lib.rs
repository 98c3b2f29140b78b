//! Pseudo-spectral simulation library for a family of nonlocal evolution
//! equations of the form `u_t + A([u]) u = g([u])`, where the nonlocality
//! enters through the inverse Helmholtz operator `(1 - d^2/dx^2)^{-1}`.
//!
//! The crate ships six concrete models (the b-equation family including
//! Camassa-Holm and Degasperis-Procesi, Fornberg-Whitham, the potential
//! Camassa-Holm equation, the pi-Camassa-Holm system, a generalized
//! Boussinesq system, and the modified Euler-Poisson system), the conserved
//! functionals attached to each, a classical RK4 integrator with drift
//! auditing and blow-up reporting, and the Lagrangian characteristics
//! machinery for transport diagnostics. A batch CLI (`nlwave`) drives
//! config-file experiments and writes CSV output.

pub mod config;
pub mod error;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod initial;
pub mod invariants;
pub mod lagrangian;
pub mod model;
pub mod output;
pub mod spectral;
pub mod stepper;

pub use error::{Error, Result};
pub use field::Field;
pub use grid::{Grid, GridKind};
pub use model::{ModelSpec, Nonlinearity, State};
pub use stepper::{integrate, integrate_with, rk4_step, Outcome, StepControl, StepSize, Trajectory};
