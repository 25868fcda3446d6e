//! Runs every code block in `book/` as a doctest.
//!
//! mdBook cannot execute its own snippets under `cargo test`, so each
//! chapter is included here as a module doc comment and `cargo test --doc`
//! picks the ```rust fences up. One module per chapter keeps failures
//! attributable to their source file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/getting-started.md")]
pub mod getting_started {}

#[doc = include_str!("../../../book/src/data-model.md")]
pub mod data_model {}

#[doc = include_str!("../../../book/src/proximal-svm.md")]
pub mod proximal_svm {}

#[doc = include_str!("../../../book/src/sparse-classifier.md")]
pub mod sparse_classifier {}

#[doc = include_str!("../../../book/src/parameter-selection.md")]
pub mod parameter_selection {}

#[doc = include_str!("../../../book/src/performance-measures.md")]
pub mod performance_measures {}

#[doc = include_str!("../../../book/src/heatmaps.md")]
pub mod heatmaps {}

#[doc = include_str!("../../../book/src/cli-reference.md")]
pub mod cli_reference {}
