use crate::fieldcore::sponge::{self, domain};
use crate::fieldcore::Fe;
use crate::zkjwt::CircuitConfig;

use super::ProtoError;

/// zkaddr = H(stid, aud, iss, salt) over packed strings. The strings are the
/// claim values exactly as they appear between the quotes in the token.
pub fn derive_address(cfg: &CircuitConfig, stid: &str, aud: &str, iss: &str, salt: Fe) -> Result<Fe, ProtoError> {
    let too_long = |what: &'static str| ProtoError::StringTooLong(what);
    let mut inputs = sponge::pack_bytes(stid.as_bytes(), cfg.stid_max).ok_or(too_long("stid"))?;
    inputs.extend(sponge::pack_bytes(aud.as_bytes(), cfg.aud_max).ok_or(too_long("aud"))?);
    inputs.extend(sponge::pack_bytes(iss.as_bytes(), cfg.iss_max).ok_or(too_long("iss"))?);
    inputs.push(salt);
    Ok(sponge::hash(&inputs, domain::ADDRESS))
}

/// 32-byte little-endian address encoding.
pub fn address_bytes(zkaddr: Fe) -> [u8; 32] {
    zkaddr.to_le_bytes()
}

/// Master secret of the salt service.
#[derive(Clone)]
pub struct SaltSeed {
    k_seed: [u8; 32],
}

impl std::fmt::Debug for SaltSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SaltSeed(..)")
    }
}

impl SaltSeed {
    pub fn new(k_seed: [u8; 32]) -> Self {
        Self { k_seed }
    }

    pub fn random(rng: &mut impl rand::RngCore) -> Self {
        let mut k = [0u8; 32];
        rng.fill_bytes(&mut k);
        Self { k_seed: k }
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let v = hex::decode(s.trim()).ok()?;
        Some(Self { k_seed: v.try_into().ok()? })
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.k_seed)
    }
}

/// Count-prefixed packing so that concatenated variable-length strings parse uniquely.
fn push_string(out: &mut Vec<Fe>, s: &str) {
    let packed = sponge::pack_bytes(s.as_bytes(), s.len().max(1)).expect("sized to fit");
    out.push(Fe::from_u64(packed.len() as u64));
    out.extend(packed);
}

/// salt = F(k_seed, sub ∥ aud ∥ iss ∥ counter), a keyed sponge.
pub fn derive_salt(seed: &SaltSeed, sub: &str, aud: &str, iss: &str, counter: u64) -> Fe {
    let mut inputs = vec![
        Fe::from_be_bytes_mod_order(&seed.k_seed[..16]),
        Fe::from_be_bytes_mod_order(&seed.k_seed[16..]),
    ];
    push_string(&mut inputs, sub);
    push_string(&mut inputs, aud);
    push_string(&mut inputs, iss);
    inputs.push(Fe::from_u64(counter));
    sponge::hash(&inputs, domain::SALT)
}

/// Sponge hash of an arbitrary-length message.
pub fn message_fe(msg: &[u8]) -> Fe {
    let packed = sponge::pack_bytes(msg, msg.len().max(1)).expect("sized to fit");
    sponge::hash(&packed, domain::MESSAGE)
}

/// Pre-hash signed by the ephemeral key.
pub fn message_digest(msg: &[u8]) -> [u8; 32] {
    message_fe(msg).to_le_bytes()
}
