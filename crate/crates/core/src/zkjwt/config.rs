use serde::{Deserialize, Serialize};

use super::ZkJwtError;
use crate::gadgets::json::ClaimSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StidClaim {
    Sub,
    Email,
}

impl StidClaim {
    pub fn name(self) -> &'static str {
        match self {
            StidClaim::Sub => "sub",
            StidClaim::Email => "email",
        }
    }
}

/// Sizes and options fixing the circuit shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitConfig {
    /// Maximum length of `header_b64.payload_b64`.
    pub l_max: usize,
    /// Maximum decoded payload length.
    pub max_payload: usize,
    /// Maximum `header_b64` length.
    pub header_max: usize,
    pub stid_claim: StidClaim,
    pub stid_max: usize,
    pub aud_max: usize,
    pub iss_max: usize,
    pub nonce_max: usize,
    /// Maximum ephemeral key lifetime in epochs.
    pub delta: u64,
    pub rsa_bits: usize,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            l_max: 1600,
            max_payload: 1200,
            header_max: 248,
            stid_claim: StidClaim::Sub,
            stid_max: 64,
            aud_max: 64,
            iss_max: 32,
            nonce_max: 44,
            delta: 2,
            rsa_bits: 2048,
        }
    }
}

pub const NONCE_LEN: usize = 27;

impl CircuitConfig {
    /// A small profile (short tokens, RSA-1024) for high-volume simulations.
    pub fn compact() -> Self {
        Self {
            l_max: 320,
            max_payload: 180,
            header_max: 96,
            stid_claim: StidClaim::Sub,
            stid_max: 32,
            aud_max: 32,
            iss_max: 32,
            nonce_max: 32,
            delta: 2,
            rsa_bits: 1024,
        }
    }

    pub fn rsa_limbs(&self) -> usize {
        self.rsa_bits / 64
    }

    /// Base64 characters of payload fed to the decoder.
    pub fn payload_chars(&self) -> usize {
        4 * self.max_payload.div_ceil(3)
    }

    /// Bits needed for the payload offset `header_len + 1`.
    pub fn shift_bits(&self) -> usize {
        (usize::BITS - (self.header_max + 1).leading_zeros()) as usize
    }

    pub fn claim_specs(&self) -> Vec<ClaimSpec> {
        let mut v = vec![
            ClaimSpec::string(self.stid_claim.name(), self.stid_max),
            ClaimSpec::string("aud", self.aud_max),
            ClaimSpec::string("iss", self.iss_max),
            ClaimSpec::string("nonce", self.nonce_max),
        ];
        if self.stid_claim == StidClaim::Email {
            v.push(ClaimSpec::boolean("email_verified"));
        }
        v
    }

    pub fn num_public(&self) -> usize {
        self.rsa_limbs() + self.iss_max.div_ceil(31) + 1 + 1 + 1 + 2 + self.header_max.div_ceil(31) + 1
    }

    pub fn validate(&self) -> Result<(), ZkJwtError> {
        let bad = |m: &str| Err(ZkJwtError::ConfigInvalid(m.to_string()));
        if !matches!(self.rsa_bits, 1024 | 2048) {
            return bad("rsa_bits must be 1024 or 2048");
        }
        if self.l_max == 0 || self.max_payload == 0 || self.header_max == 0 {
            return bad("lengths must be positive");
        }
        if self.header_max + 1 >= self.l_max {
            return bad("header_max must leave room for a payload");
        }
        if self.shift_bits() > 12 {
            return bad("header_max too large");
        }
        if self.nonce_max < NONCE_LEN {
            return bad("nonce_max below the nonce length");
        }
        if self.delta == 0 {
            return bad("delta must be at least 1");
        }
        for spec in self.claim_specs() {
            if spec.max_value == 0 || spec.window() > self.max_payload {
                return bad("claim windows must fit inside max_payload");
            }
        }
        Ok(())
    }
}
