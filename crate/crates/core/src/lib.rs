//! Maxmin E*k*-SAT reconfiguration toolkit.
//!
//! The crate is organised around the problem instance (an E*k*-CNF formula plus two
//! satisfying endpoint assignments) and the quantities defined on it:
//!
//! * [`formula`]: instances, assignments, reconfiguration sequences and their exact values,
//!   plus the line-oriented instance file format.
//! * [`approx`]: the random-assignment rounding scheme, exact clause survival probabilities,
//!   the derandomized approximation algorithm and its closed-form guarantees.
//! * [`exact`]: exact maxmin optima on small instances via bottleneck search over the hypercube.
//! * [`reductions`]: gap-preserving gadget compilers with completeness witnesses.
//! * [`verifier`]: finite weighted-atom verifier models with exact acceptance probabilities
//!   and CNF emission.
//! * [`generator`]: seeded planted instance generation.
//!
//! Every probability and value is an exact [`Rational`].

pub mod approx;
pub mod error;
pub mod exact;
pub mod formula;
pub mod generator;
pub mod rational;
pub mod reductions;
pub mod report;
pub mod verifier;

pub use error::{Error, ParseError, Result};
pub use formula::{
    check_sequence, diff_vars, irredundant_sequences, parse_formula, parse_instance, seq_value,
    serialize_instance, value, Assignment, Clause, Formula, Instance, Literal, ReconfSequence,
    SequenceReport,
};
pub use rational::Rational;
