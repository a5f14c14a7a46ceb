// SPDX-License-Identifier: Apache-2.0

//! Visualization pipeline for JIT compiler IR graph families.
//!
//! The IRs of an original program and its variants are merged into one
//! annotated graph ([`diff_merge`]), simplified ([`graph_simplify`]), turned
//! into a hypergraph whose hyperedges are optimization phases
//! ([`hypergraph`]), ranked by how many foreign-IR nodes each phase holds
//! ([`analysis`]) and laid out as a metro map ([`layout`]).
//!
//! Ratios in reports are generic over [`Scalar`]; the aliases at the crate
//! root fix them to exact rationals, with `F64` variants for floating point.

pub mod analysis;
pub mod diff_merge;
pub mod graph_simplify;
pub mod hypergraph;
pub mod ingest;
pub mod ir_model;
pub mod layout;
pub mod pipeline;
pub mod scalar;
pub mod synth;

pub use num_rational::Ratio;
pub use scalar::Scalar;

/// Exact rational used for suspicion ratios by default.
pub type Exact = Ratio<u64>;

pub type SuspicionReport = analysis::SuspicionReport<Exact>;
pub type SuspicionReportF64 = analysis::SuspicionReport<f64>;
pub type SuspicionReportF32 = analysis::SuspicionReport<f32>;
pub type SuspicionRecord = analysis::SuspicionRecord<Exact>;
pub type MetroMap = layout::MetroMap<Exact>;
pub type MetroMapF64 = layout::MetroMap<f64>;
pub type PipelineOutput = pipeline::PipelineOutput<Exact>;
pub type PipelineOutputF64 = pipeline::PipelineOutput<f64>;
