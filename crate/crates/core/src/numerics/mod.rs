//! Small numerical kernels shared by the solver modules.

pub mod ode;
pub mod quadrature;
pub mod roots;

pub use ode::{integrate, integrate_dense, Integrator, OdeOptions};
