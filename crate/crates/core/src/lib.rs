//! Direct quadrature solvers for the first-kind Volterra convolution equation
//! with a truncated heat-conduction kernel, and the numerical studies built on
//! them: kernel characteristics, convergence tables, and noise/step-size
//! scaling experiments.
//!
//! The equation is
//!
//! ```text
//! (A phi)(t) = integral_0^t K_N(t - s) phi(s) ds = y(t),   0 <= t <= T,
//! K_N(tau)   = pi^2 sum_{p=1..N} (-1)^{p+1} p^2 exp(-pi^2 p^2 tau).
//! ```
//!
//! Collocating at the nodes of a uniform mesh turns the operator into a lower
//! triangular system solved by forward substitution. No explicit penalty term
//! is used: for noisy data the mesh spacing itself acts as the regularization
//! parameter, and [`experiment::fibonacci_optimize_h`] locates the spacing
//! that minimizes the reconstruction error.

pub mod experiment;
pub mod forward;
pub mod kernel;
pub mod solver;

mod sum;

pub use experiment::{
    ConvergenceReport, ConvergenceRow, EstimatedOrders, ExperimentError, OptimizationResult,
    PerturbationPattern, PerturbationSpec,
};
pub use forward::{BenchmarkFunction, GridFunction, Location, Mesh, QuadratureError};
pub use kernel::{KernelError, KernelRoot, KernelSpec};
pub use solver::{Scheme, SolveError, SolveResult};
