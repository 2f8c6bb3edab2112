//! A self-delimiting reference machine with conditional input and the
//! budgeted complexity and universal-mass surrogates built on it.
//!
//! A program is read left to right and parsed into a block terminated by
//! `END`. It halts on input `p` only if the parse consumed exactly the bits
//! of `p` and execution finished within the step budget. Since reading is
//! sequential and deterministic, no proper extension of a halting program can
//! halt, so the halting set for any fixed condition is prefix-free.

pub mod isa;
mod search;
mod vm;

pub use isa::{
    assemble, disassemble, literal_program, parse, Count, Environment, Opcode, ParseFault, Stmt,
    ISA_VERSION, LIST_LITERAL_OVERHEAD,
};
pub use search::{
    approx_k, dyadic, enumerate_halting, incompressible_points, is_incompressible,
    is_incompressible_in, universal_mass, ComplexityEstimate, EstimateKind, HaltingProgram,
    MassForm, ProgramIndex, UniversalMass, MAX_ENUMERABLE_LENGTH,
};
pub use vm::{run, Budget, Machine, RunOutcome, RunStatus};
