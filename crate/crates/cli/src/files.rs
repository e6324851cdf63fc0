//! On-disk formats: provider keys, wallets and proofs, all JSON.

use std::collections::BTreeMap;
use std::path::Path;

use ed25519_dalek::SigningKey;
use num_bigint::BigUint;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use zklogin_core::fieldcore::Fe;
use zklogin_core::jwtkit::{MockProvider, RsaPrivateKey};
use zklogin_core::zkjwt::nonce_string;

use crate::CliError;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match path {
        Some(p) => std::fs::write(p, text + "\n").map_err(|e| CliError::Failure(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

pub fn fe_from_hex(what: &str, s: &str) -> Result<Fe, CliError> {
    Fe::from_hex(s).map_err(|e| CliError::Usage(format!("{what}: {e}")))
}

pub fn bytes32(what: &str, s: &str) -> Result<[u8; 32], CliError> {
    let v = hex::decode(s).map_err(|e| CliError::Usage(format!("{what}: {e}")))?;
    v.try_into().map_err(|_| CliError::Usage(format!("{what}: expected 32 bytes")))
}

/// A provider signing key and where it is published.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderFile {
    pub iss: String,
    pub kid: String,
    /// Epoch at which the key was published.
    pub epoch: u64,
    pub n: String,
    pub d: String,
    pub p: String,
    pub q: String,
}

impl ProviderFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        read_json(path)
    }

    pub fn from_provider(op: &MockProvider, epoch: u64) -> Self {
        let (n, d, p, q) = op.key.components();
        let h = |x: &BigUint| x.to_str_radix(16);
        Self { iss: op.iss.clone(), kid: op.kid.clone(), epoch, n: h(n), d: h(d), p: h(p), q: h(q) }
    }

    pub fn provider(&self) -> Result<MockProvider, CliError> {
        let big = |name: &str, s: &str| {
            BigUint::parse_bytes(s.as_bytes(), 16).ok_or_else(|| CliError::Usage(format!("provider {name}: bad hex")))
        };
        let key = RsaPrivateKey::from_components(big("n", &self.n)?, big("d", &self.d)?, big("p", &self.p)?, big("q", &self.q)?)
            .ok_or_else(|| CliError::Usage("provider key components are inconsistent".into()))?;
        Ok(MockProvider::with_key(&self.iss, self.kid.clone(), key))
    }
}

/// Ephemeral key, nonce randomness and expiry.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WalletFile {
    pub sk_u: String,
    pub vk_u: String,
    pub r: String,
    pub t_max: u64,
    pub nonce: String,
}

impl WalletFile {
    pub fn new(sk: &SigningKey, r: Fe, t_max: u64) -> Self {
        let vk = sk.verifying_key().to_bytes();
        Self {
            sk_u: hex::encode(sk.to_bytes()),
            vk_u: hex::encode(vk),
            r: r.to_hex(),
            t_max,
            nonce: nonce_string(&vk, t_max, r),
        }
    }

    pub fn signing_key(&self) -> Result<SigningKey, CliError> {
        Ok(SigningKey::from_bytes(&bytes32("sk_u", &self.sk_u)?))
    }

    pub fn r(&self) -> Result<Fe, CliError> {
        fe_from_hex("r", &self.r)
    }
}

/// What the prover returns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofFile {
    /// Base64url proof bytes.
    pub proof: String,
    /// Hex field elements in circuit order.
    pub public_inputs: Vec<String>,
    /// Constraints per top-level circuit region.
    pub region_stats: BTreeMap<String, usize>,
}
