//! Triple momentum (TM) method, its high-resolution ODE model, and two ways of
//! certifying exponential convergence rates: a Lyapunov function with an
//! explicit rate formula, and an IQC/LMI feasibility search.
//!
//! The crate is organised bottom-up:
//!
//! * [`cost`]: cost-function oracles for strongly convex, smooth problems,
//!   a small zoo of test costs, and checkers for the class inequalities.
//! * [`params`]: closed-form parameter algebra (κ, ρ, the TM tuple, μ).
//! * [`discrete`]: TM, Nesterov and gradient-descent iterations.
//! * [`ode`]: continuous-time models integrated with fixed-step RK4.
//! * [`rates`]: Lyapunov function, rate formulas and trajectory-level decay checks.
//! * [`iqc`]: LTI embedding, sector IQC, LMI assembly and rate bisection.
//! * [`harness`]: experiment configuration, presets and CSV emission used by the
//!   `tm-ode` binary.
//!
//! Everything numerical is generic over [`Real`] where extended precision is
//! useful: the discrete iterations and ODE integration run in `f64` or in
//! double-double ([`DoubleDouble`]) arithmetic, which matters once errors fall
//! below `1e-30`.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cost;
pub mod discrete;
mod error;
pub mod harness;
pub mod iqc;
pub mod linalg;
pub mod ode;
pub mod params;
pub mod rates;
mod real;
pub mod trajectory;

pub use error::{Error, Result};
pub use real::{DoubleDouble, Real};

pub use cost::{paper_example_cost, quadratic_cost, CostFunction, Objective};
pub use params::{mu_from_alpha_beta, mu_from_kappa, tm_parameters, TMParameters};
pub use trajectory::{Algorithm, Mode, Sample, Trajectory};
