//! Gilbert graphs on Poisson and binomial point processes in convex windows.
//!
//! The crate samples point processes, builds the graph connecting points at
//! distance at most `δ`, evaluates the length-power functionals
//! `L^(α) = Σ_edges ‖x − y‖^α`, and compares Monte Carlo output with exact
//! moment formulas, limit laws and deviation bounds.
//!
//! ```
//! use gilbert::geometry::ConvexWindow;
//! use gilbert::theory::moments::expectation_exact;
//!
//! let w: ConvexWindow = "box:1x1".parse().unwrap();
//! let mean = expectation_exact(&w, 100.0, 0.05, 0.0).unwrap();
//! assert!((mean - 37.619).abs() < 1e-3);
//! ```

// Negated comparisons such as `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod point_process;
pub mod quadrature;
pub mod rng;
pub mod theory;

pub use error::{GilbertError, Result};
pub use geometry::ConvexWindow;
