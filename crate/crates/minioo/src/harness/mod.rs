//! Behavioral test machinery built on top of the interpreter: contract
//! suites with a substitution verdict, exhaustive differential search
//! over small collection inputs, the bag/integer isomorphism oracle, and
//! dynamic probing of the mutation analysis. Everything here is
//! deterministic — enumeration orders are fixed, so reports and witnesses
//! are reproducible run to run.

pub mod diff;
pub mod iso;
pub mod multiset;
pub mod probe;
pub mod snapshot;
pub mod suite;
