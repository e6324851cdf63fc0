use std::collections::BTreeMap;
use std::sync::RwLock;

use rand::RngCore;
use sha2::{Digest, Sha256};

use super::b64::b64url_encode;
use super::jwt::{jwt_issue, ClaimSet, IssueOptions, Jwt, JwtError};
use super::rsakey::{RsaPrivateKey, RsaPublicKey};

pub const DEFAULT_JWK_WINDOW: u64 = 2;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown kid {0:?}")]
    UnknownKid(String),
    #[error("key {kid:?} published at epoch {published} is stale at epoch {now}")]
    StaleKey { kid: String, published: u64, now: u64 },
    #[error("unknown issuer {0:?}")]
    UnknownIssuer(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Jwk {
    pub kid: String,
    pub iss: String,
    pub public: RsaPublicKey,
    pub published_epoch: u64,
}

impl Jwk {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kty": "RSA",
            "n": b64url_encode(&self.public.n.to_bytes_be()),
            "e": "AQAB",
            "kid": self.kid,
        })
    }
}

/// Published provider keys. A key is current at epoch `t` iff it was
/// (re)published at an epoch ≥ t − window.
#[derive(Debug)]
pub struct JwkRegistry {
    window: u64,
    keys: RwLock<BTreeMap<String, Jwk>>,
}

impl Default for JwkRegistry {
    fn default() -> Self {
        Self::new(DEFAULT_JWK_WINDOW)
    }
}

impl JwkRegistry {
    pub fn new(window: u64) -> Self {
        Self { window, keys: RwLock::new(BTreeMap::new()) }
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    /// Adds or refreshes a key. The kid ↔ key mapping is one-to-one: a kid
    /// already bound to a different key is left untouched and `false` returned.
    pub fn publish(&self, iss: &str, kid: &str, public: &RsaPublicKey, epoch: u64) -> bool {
        let mut keys = self.keys.write().expect("registry lock");
        match keys.get_mut(kid) {
            Some(k) if k.public != *public || k.iss != iss => false,
            Some(k) => {
                k.published_epoch = k.published_epoch.max(epoch);
                true
            }
            None => {
                keys.insert(
                    kid.to_string(),
                    Jwk { kid: kid.to_string(), iss: iss.to_string(), public: public.clone(), published_epoch: epoch },
                );
                true
            }
        }
    }

    pub fn lookup(&self, kid: &str, t_cur: u64) -> Result<Jwk, RegistryError> {
        let keys = self.keys.read().expect("registry lock");
        let k = keys.get(kid).ok_or_else(|| RegistryError::UnknownKid(kid.to_string()))?;
        if k.published_epoch + self.window < t_cur {
            return Err(RegistryError::StaleKey { kid: kid.to_string(), published: k.published_epoch, now: t_cur });
        }
        Ok(k.clone())
    }

    /// Keys of `iss` current at `t_cur`.
    pub fn current(&self, iss: &str, t_cur: u64) -> Vec<Jwk> {
        let keys = self.keys.read().expect("registry lock");
        keys.values()
            .filter(|k| k.iss == iss && k.published_epoch + self.window >= t_cur)
            .cloned()
            .collect()
    }

    pub fn issuers(&self) -> Vec<String> {
        let keys = self.keys.read().expect("registry lock");
        let mut v: Vec<String> = keys.values().map(|k| k.iss.clone()).collect();
        v.sort();
        v.dedup();
        v
    }
}

pub fn random_kid(rng: &mut impl RngCore) -> String {
    let mut b = [0u8; 8];
    rng.fill_bytes(&mut b);
    hex::encode(b)
}

/// An OpenID provider with one active signing key.
#[derive(Clone, Debug)]
pub struct MockProvider {
    pub iss: String,
    pub kid: String,
    pub key: RsaPrivateKey,
    pub bits: u64,
    /// Namespace `sub` by audience, as providers issuing pairwise identifiers do.
    pub pairwise: bool,
    pub options: IssueOptions,
}

impl MockProvider {
    pub fn new(iss: &str, bits: u64, rng: &mut impl RngCore) -> Self {
        let key = RsaPrivateKey::generate(bits, rng);
        Self::with_key(iss, random_kid(rng), key)
    }

    pub fn with_key(iss: &str, kid: String, key: RsaPrivateKey) -> Self {
        let bits = key.public.bits();
        Self { iss: iss.to_string(), kid, key, bits, pairwise: false, options: IssueOptions::default() }
    }

    pub fn public(&self) -> &RsaPublicKey {
        &self.key.public
    }

    pub fn publish(&self, registry: &JwkRegistry, epoch: u64) {
        registry.publish(&self.iss, &self.kid, &self.key.public, epoch);
    }

    /// Replaces the signing key with a fresh one under a new kid and publishes it.
    pub fn rotate(&mut self, registry: &JwkRegistry, epoch: u64, rng: &mut impl RngCore) -> String {
        self.key = RsaPrivateKey::generate(self.bits, rng);
        loop {
            let kid = random_kid(rng);
            if kid != self.kid {
                self.kid = kid;
                break;
            }
        }
        self.publish(registry, epoch);
        self.kid.clone()
    }

    pub fn subject_for(&self, sub: &str, aud: &str) -> String {
        if self.pairwise {
            let h = Sha256::digest(format!("{sub}\u{0}{aud}").as_bytes());
            hex::encode(&h[..12])
        } else {
            sub.to_string()
        }
    }

    /// An ID token with the mandatory claims, in a fixed order, plus `extra`.
    pub fn issue(&self, sub: &str, aud: &str, nonce: &str, extra: &ClaimSet) -> Result<Jwt, JwtError> {
        let mut claims = ClaimSet::new()
            .with("iss", self.iss.as_str())
            .with("aud", aud)
            .with("sub", self.subject_for(sub, aud))
            .with("nonce", nonce);
        for (k, v) in extra.iter() {
            claims.set(k, v.clone());
        }
        self.issue_claims(&claims)
    }

    pub fn issue_claims(&self, claims: &ClaimSet) -> Result<Jwt, JwtError> {
        jwt_issue(&self.key, &self.kid, claims, &self.options)
    }
}
