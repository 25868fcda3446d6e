//! Sparse max-margin linear classifiers for neural firing-rate decoding.
//!
//! Given firing rates over time-bins labeled rest (`-1`) or imagined
//! movement (`+1`), the crate fits hyperplane classifiers
//! `sign(x . w - gamma)` and reads the responsible channels off the fitted
//! weights:
//!
//! * [`psvm`] — the closed-form proximal SVM baseline;
//! * [`sparse`] — an iteratively reweighted solver adding `l_p` weight
//!   sparsity, a positive-part hinge data term, and class-bias weighting;
//! * [`regselect`] — Morozov discrepancy and balancing-principle rules for
//!   the regularization parameter;
//! * [`evaluate`] — force series and outlier-robust performance measures;
//! * [`heatmap`] — mapping weights onto the physical 10x10 electrode grid;
//! * [`data`] — CSV ingestion, cue schedules, synthetic data and the
//!   augmented system matrix shared by the solvers;
//! * [`benchmark`] — the pinned synthetic instance used by the acceptance
//!   suite.
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use sparsemargin::data::Dataset;
//! use sparsemargin::psvm::solve_psvm;
//!
//! let dataset = Dataset::new(
//!     DMatrix::from_row_slice(2, 1, &[2.0, -2.0]),
//!     DVector::from_vec(vec![1.0, -1.0]),
//!     None,
//! ).unwrap();
//! let plane = solve_psvm(&dataset, 1.0).unwrap();
//! assert!((plane.w[0] - 4.0 / 9.0).abs() < 1e-12);
//! ```

pub mod benchmark;
pub mod data;
pub mod error;
pub mod evaluate;
pub mod heatmap;
pub mod psvm;
pub mod regselect;
pub mod sparse;

pub use data::{CueSchedule, Dataset, Interval, SyntheticSpec};
pub use error::{Error, Result};
pub use psvm::Hyperplane;
pub use sparse::{GammaMode, SolveReport, SolverConfig, WarmStart};
