//! Analysis toolkit for a five-component within-host HIV infection model with
//! a latent reservoir, CTL immune response with saturated proliferation and
//! immune impairment, and three discrete delays.
//!
//! The state tracks uninfected cells `x`, latently infected cells `p`,
//! productively infected cells `y`, free virions `v`, and CTL cells `z`.
//! Two delays (`tau1`, `tau2`) model intracellular latency and viral
//! replication; the third (`tau3`) delays the CTL proliferation response.
//!
//! Modules:
//! - [`model`]: parameters, state, validation, the delayed right-hand side,
//!   and the explicit invariant region bounds.
//! - [`equilibria`]: reproduction numbers (closed form and next-generation
//!   spectral oracle) and the three equilibria.
//! - [`dde_sim`]: fixed-step method-of-steps RK4 integrator with cubic
//!   Hermite dense output, long-term behavior classification, and a
//!   bisection scan for the oscillation onset delay.
//! - [`charstab`]: characteristic quasi-polynomial machinery — Jacobian
//!   delay blocks, determinant evaluation, right-half-plane root counting,
//!   the closed-form coefficients at the immune-activated equilibrium, the
//!   crossing-frequency quintic, the delay ladder, and the critical delay.
//! - [`hopf`]: center-manifold normal form at the critical delay —
//!   eigenvectors, g-coefficients, C1(0), and the direction / stability /
//!   period quantities.
//! - [`scenario`]: named parameter presets with literature annotations.

pub mod charstab;
pub mod dde_sim;
pub mod equilibria;
pub mod hopf;
pub mod model;
pub mod scenario;

pub use model::{OmegaBounds, Parameters, State, StateDerivative};
