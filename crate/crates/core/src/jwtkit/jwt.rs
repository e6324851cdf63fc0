use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::b64::{b64url_decode, b64url_encode};
use super::rsakey::{RsaPrivateKey, RsaPublicKey};

pub const MANDATORY_CLAIMS: [&str; 4] = ["sub", "aud", "iss", "nonce"];
pub const DEFAULT_L_MAX: usize = 1600;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JwtError {
    #[error("mandatory claim {0:?} missing")]
    MissingMandatoryClaim(String),
    #[error("signed part is {len} bytes, limit {max}")]
    TokenTooLong { len: usize, max: usize },
    #[error("malformed token: {0}")]
    Malformed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ClaimValue {
    String(String),
    Bool(bool),
    Number(i64),
    /// Anything else found in a parsed payload (objects, arrays, floats).
    Json(serde_json::Value),
}

impl ClaimValue {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            ClaimValue::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            ClaimValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn to_json(&self) -> String {
        match self {
            ClaimValue::String(s) => serde_json::to_string(s).expect("string serializes"),
            ClaimValue::Bool(b) => b.to_string(),
            ClaimValue::Number(n) => n.to_string(),
            ClaimValue::Json(v) => v.to_string(),
        }
    }

    pub(crate) fn from_json(v: serde_json::Value) -> Self {
        match v {
            serde_json::Value::String(s) => ClaimValue::String(s),
            serde_json::Value::Bool(b) => ClaimValue::Bool(b),
            serde_json::Value::Number(ref n) if n.is_i64() => ClaimValue::Number(n.as_i64().unwrap()),
            other => ClaimValue::Json(other),
        }
    }
}

impl From<&str> for ClaimValue {
    fn from(s: &str) -> Self {
        ClaimValue::String(s.to_string())
    }
}

impl From<String> for ClaimValue {
    fn from(s: String) -> Self {
        ClaimValue::String(s)
    }
}

impl From<bool> for ClaimValue {
    fn from(b: bool) -> Self {
        ClaimValue::Bool(b)
    }
}

impl From<i64> for ClaimValue {
    fn from(n: i64) -> Self {
        ClaimValue::Number(n)
    }
}

/// Claims in insertion order. Setting an existing name replaces it in place.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ClaimSet {
    entries: Vec<(String, ClaimValue)>,
}

impl ClaimSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<ClaimValue>) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: impl Into<ClaimValue>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _)| k == name) {
            Some(e) => e.1 = value,
            None => self.entries.push((name.to_string(), value)),
        }
    }

    pub fn get(&self, name: &str) -> Option<&ClaimValue> {
        self.entries.iter().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    pub fn get_str(&self, name: &str) -> Option<&str> {
        self.get(name).and_then(ClaimValue::as_str)
    }

    pub fn remove(&mut self, name: &str) -> Option<ClaimValue> {
        let pos = self.entries.iter().position(|(k, _)| k == name)?;
        Some(self.entries.remove(pos).1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ClaimValue)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn shuffle(&mut self, rng: &mut impl Rng) {
        use rand::seq::SliceRandom;
        self.entries.shuffle(rng);
    }

    /// Parses a JSON object payload. Later duplicates overwrite earlier ones.
    pub fn from_payload(payload: &[u8]) -> Result<Self, JwtError> {
        let v: serde_json::Value =
            serde_json::from_slice(payload).map_err(|e| JwtError::Malformed(e.to_string()))?;
        let serde_json::Value::Object(map) = v else {
            return Err(JwtError::Malformed("payload is not an object".into()));
        };
        let mut set = ClaimSet::new();
        for (k, v) in map {
            set.set(&k, ClaimValue::from_json(v));
        }
        Ok(set)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JwtHeader {
    pub alg: String,
    pub kid: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub typ: Option<String>,
}

/// How the payload JSON is laid out.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PayloadStyle {
    #[default]
    Compact,
    /// Up to two whitespace characters around every colon, before every
    /// delimiter and before every key, chosen by the seed.
    Spaced(u64),
}

#[derive(Clone, Copy, Debug)]
pub struct IssueOptions {
    pub style: PayloadStyle,
    /// Limit on `header_b64.payload_b64`.
    pub l_max: usize,
}

impl Default for IssueOptions {
    fn default() -> Self {
        Self { style: PayloadStyle::Compact, l_max: DEFAULT_L_MAX }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Jwt {
    pub header_b64: String,
    pub payload_b64: String,
    pub sig_b64: String,
    pub header: JwtHeader,
    /// Decoded payload bytes.
    pub payload: Vec<u8>,
    pub claims: ClaimSet,
}

impl Jwt {
    pub fn parse(token: &str) -> Result<Self, JwtError> {
        let mut parts = token.split('.');
        let (Some(h), Some(p), Some(s), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
            return Err(JwtError::Malformed("expected three segments".into()));
        };
        let bad = |what: &str, e: &dyn std::fmt::Display| JwtError::Malformed(format!("{what}: {e}"));
        let header_bytes = b64url_decode(h).map_err(|e| bad("header", &e))?;
        let header: JwtHeader = serde_json::from_slice(&header_bytes).map_err(|e| bad("header", &e))?;
        let payload = b64url_decode(p).map_err(|e| bad("payload", &e))?;
        b64url_decode(s).map_err(|e| bad("signature", &e))?;
        let claims = ClaimSet::from_payload(&payload)?;
        Ok(Jwt {
            header_b64: h.to_string(),
            payload_b64: p.to_string(),
            sig_b64: s.to_string(),
            header,
            payload,
            claims,
        })
    }

    pub fn to_compact(&self) -> String {
        format!("{}.{}.{}", self.header_b64, self.payload_b64, self.sig_b64)
    }

    /// `header_b64.payload_b64`, the bytes covered by the signature.
    pub fn signing_input(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(self.header_b64.len() + 1 + self.payload_b64.len());
        v.extend_from_slice(self.header_b64.as_bytes());
        v.push(b'.');
        v.extend_from_slice(self.payload_b64.as_bytes());
        v
    }

    pub fn signature(&self) -> Vec<u8> {
        b64url_decode(&self.sig_b64).unwrap_or_default()
    }
}

impl std::fmt::Display for Jwt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_compact())
    }
}

fn ws_run(rng: &mut ChaCha20Rng) -> String {
    const WS: [char; 4] = [' ', '\t', '\n', '\r'];
    let n = rng.gen_range(0..=2);
    (0..n).map(|_| WS[rng.gen_range(0..4)]).collect()
}

pub fn serialize_claims(claims: &ClaimSet, style: PayloadStyle) -> Vec<u8> {
    let mut rng = match style {
        PayloadStyle::Compact => None,
        PayloadStyle::Spaced(seed) => Some(ChaCha20Rng::seed_from_u64(seed)),
    };
    let mut ws = || rng.as_mut().map(ws_run).unwrap_or_default();
    let mut out = String::from("{");
    let n = claims.len();
    for (idx, (k, v)) in claims.iter().enumerate() {
        out.push_str(&ws());
        out.push_str(&serde_json::to_string(k).expect("string serializes"));
        out.push_str(&ws());
        out.push(':');
        out.push_str(&ws());
        out.push_str(&v.to_json());
        out.push_str(&ws());
        if idx + 1 < n {
            out.push(',');
        }
    }
    out.push('}');
    out.into_bytes()
}

fn header_for(kid: &str) -> (JwtHeader, String) {
    let header = JwtHeader { alg: "RS256".into(), kid: kid.to_string(), typ: Some("JWT".into()) };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let b64 = b64url_encode(&json);
    (header, b64)
}

/// Signs an arbitrary payload. No claim checks beyond being a JSON object.
pub fn jwt_issue_raw(sk: &RsaPrivateKey, kid: &str, payload: &[u8], l_max: usize) -> Result<Jwt, JwtError> {
    let claims = ClaimSet::from_payload(payload)?;
    let (header, header_b64) = header_for(kid);
    let payload_b64 = b64url_encode(payload);
    let signed_len = header_b64.len() + 1 + payload_b64.len();
    if signed_len > l_max {
        return Err(JwtError::TokenTooLong { len: signed_len, max: l_max });
    }
    let mut jwt = Jwt {
        header_b64,
        payload_b64,
        sig_b64: String::new(),
        header,
        payload: payload.to_vec(),
        claims,
    };
    jwt.sig_b64 = b64url_encode(&sk.sign(&jwt.signing_input()));
    Ok(jwt)
}

pub fn jwt_issue(sk: &RsaPrivateKey, kid: &str, claims: &ClaimSet, opts: &IssueOptions) -> Result<Jwt, JwtError> {
    for name in MANDATORY_CLAIMS {
        if claims.get(name).is_none() {
            return Err(JwtError::MissingMandatoryClaim(name.to_string()));
        }
    }
    let payload = serialize_claims(claims, opts.style);
    jwt_issue_raw(sk, kid, &payload, opts.l_max)
}

pub fn jwt_verify(pk: &RsaPublicKey, jwt: &Jwt) -> bool {
    if jwt.header.alg != "RS256" {
        return false;
    }
    match b64url_decode(&jwt.sig_b64) {
        Ok(sig) => pk.verify(&jwt.signing_input(), &sig),
        Err(_) => false,
    }
}
