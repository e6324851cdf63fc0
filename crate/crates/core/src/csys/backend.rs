//! Proof backends: a transparent one that ships the witness, and a
//! designated-verifier MAC backend whose key doubles as the simulation trapdoor.

use hmac::{Hmac, Mac};
use rand::RngCore;
use sha2::Sha256;

use super::system::{Assignment, ConstraintSystem};
use super::CsError;
use crate::fieldcore::Fe;

const TAG_TRANSPARENT: u8 = 0x01;
const TAG_SIMULATION: u8 = 0x02;
const MAC_DOMAIN: &[u8] = b"zklogin/sim-proof/v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Transparent,
    Simulation,
}

impl std::str::FromStr for BackendKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "transparent" => Ok(Self::Transparent),
            "simulation" => Ok(Self::Simulation),
            other => Err(format!("unknown backend {other:?}")),
        }
    }
}

impl std::fmt::Display for BackendKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Transparent => "transparent",
            Self::Simulation => "simulation",
        })
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct ProofBackendKey {
    pub kind: BackendKind,
    mac_key: [u8; 32],
}

impl std::fmt::Debug for ProofBackendKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProofBackendKey").field("kind", &self.kind).finish_non_exhaustive()
    }
}

impl ProofBackendKey {
    pub fn transparent() -> Self {
        Self { kind: BackendKind::Transparent, mac_key: [0; 32] }
    }

    pub fn simulation(mac_key: [u8; 32]) -> Self {
        Self { kind: BackendKind::Simulation, mac_key }
    }

    pub fn generate(kind: BackendKind, rng: &mut impl RngCore) -> Self {
        match kind {
            BackendKind::Transparent => Self::transparent(),
            BackendKind::Simulation => {
                let mut k = [0u8; 32];
                rng.fill_bytes(&mut k);
                Self::simulation(k)
            }
        }
    }

    /// The simulation trapdoor (identical to the MAC key).
    pub fn trapdoor(&self) -> Option<[u8; 32]> {
        (self.kind == BackendKind::Simulation).then_some(self.mac_key)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Proof {
    bytes: Vec<u8>,
}

impl std::fmt::Debug for Proof {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Proof({} bytes, tag {:#04x})", self.bytes.len(), self.bytes.first().unwrap_or(&0))
    }
}

impl Proof {
    pub fn from_bytes(bytes: Vec<u8>) -> Result<Self, CsError> {
        match bytes.first() {
            Some(&TAG_TRANSPARENT) | Some(&TAG_SIMULATION) => Ok(Self { bytes }),
            _ => Err(CsError::BadProof),
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn kind(&self) -> BackendKind {
        if self.bytes[0] == TAG_TRANSPARENT {
            BackendKind::Transparent
        } else {
            BackendKind::Simulation
        }
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }
}

/// Per element: one length byte, then that many little-endian bytes with
/// trailing zeros trimmed.
pub fn encode_elements(values: &[Fe], out: &mut Vec<u8>) {
    for v in values {
        let b = v.to_le_bytes();
        let n = b.iter().rposition(|&x| x != 0).map_or(0, |i| i + 1);
        out.push(n as u8);
        out.extend_from_slice(&b[..n]);
    }
}

pub fn decode_elements(mut bytes: &[u8], count: usize) -> Result<Vec<Fe>, CsError> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (&n, rest) = bytes.split_first().ok_or(CsError::BadProof)?;
        let n = n as usize;
        if n > 32 || rest.len() < n || (n > 0 && rest[n - 1] == 0) {
            return Err(CsError::BadProof);
        }
        let mut buf = [0u8; 32];
        buf[..n].copy_from_slice(&rest[..n]);
        out.push(Fe::from_le_bytes(&buf).map_err(|_| CsError::BadProof)?);
        bytes = &rest[n..];
    }
    if !bytes.is_empty() {
        return Err(CsError::BadProof);
    }
    Ok(out)
}

fn mac(key: &[u8; 32], system: &ConstraintSystem, public: &[Fe]) -> [u8; 32] {
    let mut m = <Hmac<Sha256> as Mac>::new_from_slice(key).expect("hmac accepts any key length");
    m.update(MAC_DOMAIN);
    m.update(&system.digest());
    m.update(&(public.len() as u32).to_le_bytes());
    for p in public {
        m.update(&p.to_le_bytes());
    }
    m.finalize().into_bytes().into()
}

pub fn prove(key: &ProofBackendKey, system: &ConstraintSystem, z: &Assignment) -> Result<Proof, CsError> {
    match system.satisfied(z) {
        Ok(()) => {}
        Err(CsError::Violation { index, region }) => {
            return Err(CsError::UnsatisfiedWitness { index, region })
        }
        Err(e) => return Err(e),
    }
    let mut bytes = Vec::new();
    match key.kind {
        BackendKind::Transparent => {
            bytes.push(TAG_TRANSPARENT);
            encode_elements(&z.witness, &mut bytes);
        }
        BackendKind::Simulation => {
            bytes.push(TAG_SIMULATION);
            bytes.extend_from_slice(&mac(&key.mac_key, system, &z.public));
        }
    }
    Ok(Proof { bytes })
}

/// Emits an accepting simulation proof from the trapdoor alone. Harness use only.
pub fn sim_prove(key: &ProofBackendKey, system: &ConstraintSystem, public: &[Fe]) -> Result<Proof, CsError> {
    if key.kind != BackendKind::Simulation {
        return Err(CsError::BackendMismatch);
    }
    let mut bytes = vec![TAG_SIMULATION];
    bytes.extend_from_slice(&mac(&key.mac_key, system, public));
    Ok(Proof { bytes })
}

/// Recovers the witness carried by a transparent proof.
pub fn extract_witness(system: &ConstraintSystem, proof: &Proof) -> Result<Vec<Fe>, CsError> {
    if proof.bytes.first() != Some(&TAG_TRANSPARENT) {
        return Err(CsError::BadProof);
    }
    decode_elements(&proof.bytes[1..], system.num_witness())
}

pub fn verify(key: &ProofBackendKey, system: &ConstraintSystem, public: &[Fe], proof: &Proof) -> bool {
    if public.len() != system.num_public() {
        return false;
    }
    match (key.kind, proof.bytes.first()) {
        (BackendKind::Transparent, Some(&TAG_TRANSPARENT)) => {
            let Ok(witness) = extract_witness(system, proof) else {
                return false;
            };
            let z = Assignment { public: public.to_vec(), witness };
            system.satisfied(&z).is_ok()
        }
        (BackendKind::Simulation, Some(&TAG_SIMULATION)) => {
            if proof.bytes.len() != 33 {
                return false;
            }
            let mut m = <Hmac<Sha256> as Mac>::new_from_slice(&key.mac_key).expect("hmac key");
            m.update(MAC_DOMAIN);
            m.update(&system.digest());
            m.update(&(public.len() as u32).to_le_bytes());
            for p in public {
                m.update(&p.to_le_bytes());
            }
            m.verify_slice(&proof.bytes[1..]).is_ok()
        }
        _ => false,
    }
}
