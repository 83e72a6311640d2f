//! Anchored extragradient solvers for smooth structured minimax problems,
//! with potential-function and rate certificates.
//!
//! ```
//! use feg_core::{problems::make_bilinear, solvers::run_feg, Point};
//!
//! let problem = make_bilinear(1.0).unwrap();
//! let trace = run_feg(&problem, &Point::new(vec![1.0, 0.0]).unwrap(), 100).unwrap();
//! assert!(trace.final_grad_norm_sq() <= 4.0 / 100.0f64.powi(2));
//! ```

pub mod analysis;
mod error;
pub mod exec;
mod linalg;
mod operator;
mod point;
pub mod problems;
pub mod solvers;
pub mod stochastic;

pub use error::{Error, Result};
pub use exec::Execution;
pub use operator::{evaluate_operator, OperatorHandle, ProblemSpec, SaddleOperator, SOLUTION_TOL, STATIONARY_TOL};
pub use point::{vector_combine, Point};
