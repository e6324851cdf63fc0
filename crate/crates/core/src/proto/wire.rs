use crate::csys::Proof;
use crate::jwtkit::{b64url_decode, b64url_encode};

use super::ProtoError;

/// (vk_u, T_max, σ_u, header, π). `header_b64` is the provider's JWT header,
/// which is a public input of the proof.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZkLoginSignature {
    pub vk_u: [u8; 32],
    pub t_max: u64,
    pub sigma_u: [u8; 64],
    pub header_b64: String,
    pub pi: Proof,
}

fn put(out: &mut Vec<u8>, field: &[u8]) {
    out.extend_from_slice(&(field.len() as u32).to_le_bytes());
    out.extend_from_slice(field);
}

fn take<'a>(buf: &mut &'a [u8]) -> Result<&'a [u8], ProtoError> {
    let bad = || ProtoError::Malformed("truncated field".into());
    if buf.len() < 4 {
        return Err(bad());
    }
    let n = u32::from_le_bytes(buf[..4].try_into().unwrap()) as usize;
    let rest = &buf[4..];
    if rest.len() < n {
        return Err(bad());
    }
    let (field, rest) = rest.split_at(n);
    *buf = rest;
    Ok(field)
}

impl ZkLoginSignature {
    /// Length-prefixed fields (u32 LE): vk_u, T_max (8 bytes LE), σ_u, header, π.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(128 + self.header_b64.len() + self.pi.len());
        put(&mut out, &self.vk_u);
        put(&mut out, &self.t_max.to_le_bytes());
        put(&mut out, &self.sigma_u);
        put(&mut out, self.header_b64.as_bytes());
        put(&mut out, self.pi.as_bytes());
        out
    }

    pub fn from_bytes(mut buf: &[u8]) -> Result<Self, ProtoError> {
        let bad = |m: &str| ProtoError::Malformed(m.to_string());
        let vk_u = take(&mut buf)?.try_into().map_err(|_| bad("vk_u length"))?;
        let t_max = u64::from_le_bytes(take(&mut buf)?.try_into().map_err(|_| bad("T_max length"))?);
        let sigma_u = take(&mut buf)?.try_into().map_err(|_| bad("sigma_u length"))?;
        let header_b64 = String::from_utf8(take(&mut buf)?.to_vec()).map_err(|_| bad("header encoding"))?;
        let pi = Proof::from_bytes(take(&mut buf)?.to_vec()).map_err(|e| bad(&e.to_string()))?;
        if !buf.is_empty() {
            return Err(bad("trailing bytes"));
        }
        Ok(Self { vk_u, t_max, sigma_u, header_b64, pi })
    }

    pub fn to_base64(&self) -> String {
        b64url_encode(&self.to_bytes())
    }

    pub fn from_base64(s: &str) -> Result<Self, ProtoError> {
        let bytes = b64url_decode(s.trim()).map_err(|e| ProtoError::Malformed(e.to_string()))?;
        Self::from_bytes(&bytes)
    }
}
