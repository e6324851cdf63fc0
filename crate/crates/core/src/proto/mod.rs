//! Protocol layer: addresses and salts, the tag-based signature over the
//! zkLogin circuit, and the generic commit-and-prove construction.

mod derive;
mod gtws;
mod tws;
mod wire;

pub use derive::{address_bytes, derive_address, derive_salt, message_digest, message_fe, SaltSeed};
pub use gtws::{commit, toy_commit, Gtws, GtwsSignature, GTWS_RSA_BITS, GTWS_T_MAX};
pub use tws::{get_witness, random_fe, Providers, Session, Tag, UserContext, VerifyError, Witness, ZkLogin};
pub use wire::ZkLoginSignature;

use crate::csys::CsError;
use crate::jwtkit::{JwtError, RegistryError};
use crate::zkjwt::ZkJwtError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtoError {
    #[error("{0} longer than the circuit allows")]
    StringTooLong(&'static str),
    #[error("unknown issuer {0:?}")]
    UnknownIssuer(String),
    #[error("derived address does not match")]
    AddressMismatch,
    #[error("predicate does not hold: {0}")]
    PredicateFalse(String),
    #[error("proof backend failed: {0}")]
    BackendFailure(String),
    #[error("malformed signature: {0}")]
    Malformed(String),
    #[error(transparent)]
    Jwt(#[from] JwtError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Circuit(#[from] ZkJwtError),
}

impl From<CsError> for ProtoError {
    fn from(e: CsError) -> Self {
        ProtoError::BackendFailure(e.to_string())
    }
}
