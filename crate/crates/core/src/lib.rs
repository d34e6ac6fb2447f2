//! Simulated-world narrative QA toolkit.
//!
//! Five bundled worlds (meetings, homework, software projects, an academic
//! department, shopping) are simulated as dynamic knowledge bases. Each
//! story renders the simulation as a first-person narrative whose entity
//! mentions carry gold KB ids and token spans, interleaves compositional
//! questions whose answers are computed from the KB, and ships with a
//! scoring harness plus a feature-based logistic-regression baseline.

pub mod dataset;
pub mod eval;
pub mod kb;
pub mod question;
pub mod realize;
pub mod sexpr;
pub mod story;
pub mod world;
