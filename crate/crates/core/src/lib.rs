//! Logistic-regression solvers whose learning rates scale inversely with the
//! current loss.
//!
//! The logistic loss gets locally smoother as it decreases: the Hessian
//! quadratic form is bounded by a multiple of `f(x)` itself. The solvers here
//! exploit that by growing the step size as the loss falls, which turns the
//! usual `poly(1/T)` decay into linear convergence on linearly separable
//! data.
//!
//! Three solver families share one instance representation:
//!
//! * [`coordinate::greedy_cd`] — greedy coordinate descent with ζ-masked
//!   selection and step size `1/(2M² f(x))`, the sparse-friendly form.
//! * [`coordinate::fully_corrective_cd`] — adds one coordinate at a time and
//!   re-minimizes over the support after every addition.
//! * [`gradient::solve_gd`] — full-gradient descent with
//!   `η_t = min{1/(2μ f(x^t)), 1/(γ ||∇f(x^t)||₂)}`, plus fixed-step and
//!   increasing-step baselines for comparison.
//!
//! ```
//! use loglin::data::{generate_separable, SyntheticSpec};
//! use loglin::gradient::{default_constants, solve_gd, StepPolicy};
//! use loglin::model::{ConstantsMode, SolverConfig};
//!
//! let (instance, _) = generate_separable(&SyntheticSpec::new(100, 5, 0.1, 7)).unwrap();
//! let constants = default_constants(&instance, ConstantsMode::Empirical);
//! let config = SolverConfig::new(1.0, 500);
//! let result = solve_gd(
//!     &instance,
//!     &vec![0.0; instance.features()],
//!     &StepPolicy::Variable(constants),
//!     &config,
//! )
//! .unwrap();
//! assert!(result.trace.last().unwrap().loss < result.trace[0].loss);
//! ```

pub mod cli;
pub mod coordinate;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod gradient;
pub mod loss;
pub mod matrix;
pub mod model;
pub mod stable;

pub use error::{Error, Result};
pub use model::{
    ClassificationInstance, ConstantsMode, IterateRecord, LambdaPolicy, SmoothnessConstants,
    SolveResult, SolverConfig, Termination,
};
