//! Inverse linear optimization for feasible regions.
//!
//! Given a cost vector `c` and points known to be feasible for a linear
//! program `min c'x s.t. Ax ≥ b, Gx ≥ h`, infer rows `(A, b)` so that every
//! point stays feasible and the best observed point becomes optimal.
//!
//! ```
//! use feasregion::imputation::{impute, LossSpec, ProblemInstance};
//! use feasregion::polyhedra::{Normalization, Polyhedron};
//!
//! let points = vec![vec![2.0, 2.0], vec![1.0, 1.0], vec![1.0, 2.0], vec![2.0, 1.0]];
//! let p = ProblemInstance::new(vec![-1.0, -1.0], points, Polyhedron::empty(2), 4, Normalization::SumProxy)?;
//! let region = impute(&p, &LossSpec::Adjacency)?;
//! assert!(region.verification.all_ok());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod cli;
pub mod diet;
pub mod forward;
pub mod imputation;
pub mod polyhedra;
pub mod solver;
