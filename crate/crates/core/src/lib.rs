//! Numerical lab for inertial dynamics with asymptotic vanishing damping and
//! Hessian-driven damping, the matching IGAHD scheme, and the Lyapunov
//! machinery behind their convergence rates.

pub mod analysis;
pub mod dynamics;
pub mod experiment;
pub mod error;
pub mod lyapunov;
pub mod objectives;
pub mod ode;
pub mod schemes;
pub mod vecops;

pub use error::{Error, Result};
