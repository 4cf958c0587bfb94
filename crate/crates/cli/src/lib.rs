//! Experiment runner for the `restricted-approx` library: TOML configs in,
//! CSV or JSON report rows out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
