//! Extended trial-equation solutions of the (1+2)-dimensional nonlinear
//! Schrödinger equation with dual power-law nonlinearity
//! `i q_t + ½(q_xx + q_yy) + (|q|^{2m} + k|q|^{4m}) q = 0`.
//!
//! The pipeline is [`params::derive_coefficients`] →
//! [`quartic::build_quartic`] / [`quartic::find_roots`] /
//! [`quartic::classify_roots`] → [`families::construct_solution`], with
//! [`verify`] checking the result against the reduced ODE and the PDE.

pub mod cli;
pub mod error;
pub mod families;
pub mod grid;
pub mod params;
pub mod quartic;
pub mod special;
pub mod verify;

pub use error::{Error, Result, Violation};
pub use families::{
    construct_raw, construct_solution, degenerate_limits, BranchSign, ConstructOptions, Family, FamilyConstants,
    FamilyInputs, SolutionDescriptor, TurningRoot,
};
pub use grid::Grid;
pub use params::{derive_coefficients, validate, DerivedCoefficients, ProblemParams};
pub use quartic::{build_quartic, classify_roots, find_roots, QuarticPoly, RootClassification, RootPattern};
pub use verify::{ode_identity_residual, ode_shoot_compare, pde_residual, ResidualReport};
