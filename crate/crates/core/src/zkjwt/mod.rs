//! The zkLogin circuit: public-input layout, synthesis and witness filling.

mod circuit;
mod config;

pub use circuit::{
    build_ckt, check_full, fill_witness, fill_witness_unchecked, nonce_field, nonce_string, vk_elements, witness_layout,
    ClaimHint, PublicInputs, WitnessBundle, WitnessLayout,
};
pub use config::{CircuitConfig, StidClaim, NONCE_LEN};

use crate::csys::CsError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ZkJwtError {
    #[error("invalid circuit config: {0}")]
    ConfigInvalid(String),
    #[error("malformed token: {0}")]
    JwtMalformed(String),
    #[error("claim missing: {0}")]
    ClaimMissing(String),
    #[error("hint mismatch: {0}")]
    HintMismatch(String),
    #[error("claim {claim} is {len} bytes, limit {max}")]
    ClaimTooLong { claim: String, len: usize, max: usize },
    #[error("invalid public input: {0}")]
    PublicInputInvalid(&'static str),
    #[error(transparent)]
    Cs(CsError),
}
