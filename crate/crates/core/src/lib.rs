// `!(x > 0.0)` style guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bmds;
pub mod distances;
pub mod embed;
pub mod error;
pub mod imagegen;
pub mod ingest;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod refine;
pub mod synth;

pub use error::{Error, ErrorCategory, Result};
