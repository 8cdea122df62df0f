//! Structure-aware Boolean reasoning: a SAT solver that proves literals
//! redundant in clause vicinities and closes clusters by induction, a
//! partial quantifier elimination engine built on D-sequents, and the
//! applications built on top of it (SAT by PQE, interpolation,
//! equivalence checking, property generation, reachability diameter).

pub mod apps;
pub mod bcp;
pub mod circuits;
pub mod cnf;
pub mod batch;
pub mod dimacs;
pub mod fuzz;
pub mod oracle;
pub mod pqe;
pub mod sasat;

pub use cnf::{Clause, ClauseId, CnfError, CnfProblem, Lit, Origin, PartialAssignment, Var, VarRole};
