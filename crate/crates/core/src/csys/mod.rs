//! Rank-1 constraint systems with region accounting, plus the proof backends.

mod backend;
mod lc;
mod system;

pub use backend::{
    decode_elements, encode_elements, extract_witness, prove, sim_prove, verify, BackendKind, Proof,
    ProofBackendKey,
};
pub use lc::{Lc, LinearCombination, Variable, Visibility};
pub use system::{Assignment, Constraint, ConstraintSystem, Mode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CsError {
    #[error("variable {0:?} was never allocated")]
    UnallocatedVariable(Variable),
    #[error("assignment length {got} does not match {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("constraint {index} violated in region {region:?}")]
    Violation { index: usize, region: String },
    #[error("witness does not satisfy constraint {index} ({region})")]
    UnsatisfiedWitness { index: usize, region: String },
    #[error("system was synthesized without storing constraints")]
    NoConstraints,
    #[error("malformed proof")]
    BadProof,
    #[error("operation requires the simulation backend")]
    BackendMismatch,
    #[error("{what} out of range")]
    LengthOutOfRange { what: &'static str },
}
