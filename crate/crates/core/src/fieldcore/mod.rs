//! Prime-field and 2048-bit integer arithmetic.

mod bigint;
mod field;
pub mod sponge;

pub use bigint::{
    big_modexp_65537, big_modmul, divrem_limbs, mul_divrem, mul_limbs, BigUint2048, LIMBS,
};
pub use field::{Fe, MODULUS, MODULUS_DEC};

/// Alias used in public signatures.
pub type FieldElement = Fe;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("encoding is not a canonical field element")]
    NonCanonical,
    #[error("malformed field element encoding")]
    BadEncoding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum BigIntError {
    #[error("modulus must be odd and greater than one")]
    ModulusInvalid,
    #[error("value does not fit in 2048 bits")]
    Overflow,
}
