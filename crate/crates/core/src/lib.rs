//! Strategic agents facing a linear classifier over features linked by a
//! weighted causal graph.
//!
//! An agent falls short of a positive decision by `α`. It invests effort `e`
//! in features, and that effort spreads along the graph. The contribution
//! matrix `C` sums every directed path, so the score gain is `(Ch)ᵀe`. The
//! crate answers four questions:
//!
//! * what the agent does when it knows `h` and the graph ([`complete_info`]);
//! * whether a classifier steers effort towards the features the principal
//!   wants improved ([`design_audit`]);
//! * what the agent does when it only holds a Gaussian belief and wants to
//!   pass with probability `1 − δ` ([`incomplete_info`]);
//! * how all of this plays out on a cardiovascular-risk graph ([`case_study`]).
//!
//! [`cli`] exposes the same operations as the `stratcls` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agent_model;
pub mod case_study;
pub mod causal_graph;
pub mod cli;
pub mod complete_info;
pub mod design_audit;
pub mod error;
pub mod format;
pub mod incomplete_info;
pub mod numerics;

pub use error::{Error, Result};
