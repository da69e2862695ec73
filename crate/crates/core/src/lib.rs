//! Mimetic spectral-element time integrators.
//!
//! The trajectory of `dy/dt = h(y)` on each time step is a degree-`p`
//! polynomial on Gauss-Lobatto-Legendre nodes (a primal 0-form); its time
//! derivative lives on the Gauss-Legendre dual nodes. Choosing how the
//! Hodge-⋆ pairs the two grids gives two integrators:
//!
//! * [`Method::Mci`] (canonical Hodge): collocation at the Gauss nodes. It is
//!   an implicit Runge-Kutta method identical to Gauss collocation, hence
//!   symplectic and of order `2p`.
//! * [`Method::Mgi`] (Galerkin Hodge): `L²` projection of the vector field
//!   onto the dual basis. It conserves the energy of Hamiltonian systems up
//!   to the accuracy of the right-hand-side quadrature.
//!
//! ```
//! use geodesy::{integrate, problems, IntegrateOptions, Method};
//!
//! let circle = problems::make_circle();
//! let traj = integrate(&circle.system, Method::Mci, &circle.initial_state,
//!                      0.0, 10.0, 1.0, &IntegrateOptions::with_order(2)).unwrap();
//! assert!(traj.max_invariant_error("R").unwrap() < 1e-12);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod integrators;
pub mod linalg;
pub mod mimetic;
pub mod problems;
pub mod spectral;

pub use error::{Error, Result};
pub use integrators::{
    butcher_tableau_mci, gauss_collocation_tableau, integrate, mci_step, mgi_step, ButcherTableau,
    ElementSolution, IntegrateOptions, Method, NewtonConfig, OdeSystem, Trajectory,
};
pub use mimetic::{Cochain, CochainKind, ElementGrid, IncidenceMatrix};
pub use problems::{problem_by_name, ProblemSpec};
pub use spectral::{gauss_rule, gll_rule, EdgeBasis, NodalBasis, QuadratureFamily, QuadratureRule};
