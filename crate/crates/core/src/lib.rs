//! Precoding-based network alignment for three unicast sessions.
//!
//! The crate decides whether alignment is feasible on a given DAG, builds
//! the precoding matrices when it is, and runs the scheme end to end over
//! GF(2^m). An exact polynomial engine ([`oracle`]) serves as ground truth
//! for the randomized checks on small graphs.

pub mod families;
pub mod feasibility;
pub mod field;
pub mod linalg;
pub mod netgraph;
pub mod oracle;
pub mod precode;
pub mod samples;
pub mod simulate;
pub mod transfer;
