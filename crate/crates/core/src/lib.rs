//! Rule-based evidential reasoning for full-text retrieval.
//!
//! Queries are hierarchies of weighted rules compiled into a backward
//! inference graph, then evaluated against documents under an interchangeable
//! uncertainty calculus (scalar, interval or linguistic).

pub mod calculus;
pub mod corpus;
pub mod graph;
pub mod interval;
pub mod linguistic;
pub mod rules;
pub mod scalar;
pub mod truth;

pub use calculus::{lookup_calculus, registry, Calculus, CalculusId, Op};
pub use truth::{Family, FuzzyValue, Interval, TruthValue, GRID};
