//! Generalized Israel-Stewart hydrodynamics with bulk viscosity, written as a
//! six-field hyperbolic relaxation system `∂_α F^α(U) = Q(U)` on Minkowski
//! space with metric `diag(-1, 1, 1, 1)`.
//!
//! The crate is split along the physics:
//!
//! * [`thermo`]: the entropy function `s(ε, ν, C)`, derived thermodynamic
//!   quantities and the hyperbolicity conditions on the equation of state.
//! * [`state`]: primitive and conserved field coordinates and the inversion
//!   between them.
//! * [`fluxes`]: fluxes `F^α`, relaxation source `Q`, entropy flux `S^α`.
//! * [`godunov`]: main field `ψ`, potentials `X^α`, contracted Hessians and
//!   characteristic speeds.
//! * [`shock`]: Rankine-Hugoniot loci, Lax classification and entropy
//!   production across discontinuities.
//! * [`solver`]: a 1D finite-volume scheme with a Strang-split stiff source.

pub mod error;
pub mod fluxes;
pub mod godunov;
pub mod linalg;
pub mod sampling;
pub mod shock;
pub mod solver;
pub mod state;
pub mod thermo;

pub use error::{Error, Result};
pub use fluxes::{ConstantRelaxation, RelaxationCoefficient};
pub use godunov::MainField;
pub use state::{ConsState, PrimState};
pub use thermo::{DerivedQuantities, Eos, IdealGas, MisEos};

/// Crate version, echoed into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
