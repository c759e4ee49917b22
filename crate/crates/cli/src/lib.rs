//! Command-line and HTTP front ends for `ttc-core`.
//!
//! Both front ends go through [`pipeline`], so a request to the service and
//! the matching CLI invocation produce the same bytes.

pub mod pipeline;
pub mod service;
