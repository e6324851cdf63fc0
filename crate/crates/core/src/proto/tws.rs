use std::collections::{BTreeMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use super::derive::{derive_address, message_digest};
use super::wire::ZkLoginSignature;
use super::ProtoError;
use crate::csys::{self, ConstraintSystem, Proof, ProofBackendKey};
use crate::fieldcore::Fe;
use crate::jwtkit::{
    b64url_decode, claim_get, jwt_verify, ClaimSet, JwkRegistry, Jwt, JwtHeader, MockProvider, RegistryError,
    RsaPublicKey,
};
use crate::zkjwt::{
    build_ckt, fill_witness, nonce_string, CircuitConfig, ClaimHint, PublicInputs, StidClaim, WitnessBundle,
};

/// (pk_OP, iss, zkaddr, T). The provider key travels with its kid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tag {
    pub kid: String,
    pub pk: RsaPublicKey,
    pub iss: String,
    pub zkaddr: Fe,
    pub t_max: u64,
}

#[derive(Clone)]
pub struct Witness {
    pub jwt: Jwt,
    pub salt: Fe,
    pub r: Fe,
    pub sk_u: SigningKey,
}

impl std::fmt::Debug for Witness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Witness").field("vk_u", &hex::encode(self.vk_u())).finish_non_exhaustive()
    }
}

impl Witness {
    pub fn vk_u(&self) -> [u8; 32] {
        self.sk_u.verifying_key().to_bytes()
    }
}

/// What the wallet knows about its user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UserContext {
    /// Value of the stable-identifier claim (`sub` or `email`).
    pub stid: String,
    pub aud: String,
    pub salt: Fe,
}

/// Mock providers by issuer.
#[derive(Clone, Debug, Default)]
pub struct Providers {
    map: BTreeMap<String, MockProvider>,
}

impl Providers {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, op: MockProvider) {
        self.map.insert(op.iss.clone(), op);
    }

    pub fn get(&self, iss: &str) -> Option<&MockProvider> {
        self.map.get(iss)
    }

    pub fn get_mut(&mut self, iss: &str) -> Option<&mut MockProvider> {
        self.map.get_mut(iss)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MockProvider> {
        self.map.values()
    }
}

/// A logged-in ephemeral key: tag plus witness.
#[derive(Clone, Debug)]
pub struct Session {
    pub tag: Tag,
    pub witness: Witness,
}

pub fn random_fe(rng: &mut impl RngCore) -> Fe {
    let mut b = [0u8; 64];
    rng.fill_bytes(&mut b);
    Fe::from_le_bytes_mod_order(&b)
}

/// Creates an ephemeral key pair expiring at `t_exp`, has the provider sign a
/// token committing to it, and returns the tag and witness.
pub fn get_witness<R: RngCore + CryptoRng>(
    cfg: &CircuitConfig,
    providers: &Providers,
    iss: &str,
    zkaddr: Fe,
    t_exp: u64,
    ctx: &UserContext,
    rng: &mut R,
) -> Result<Session, ProtoError> {
    let op = providers.get(iss).ok_or_else(|| ProtoError::UnknownIssuer(iss.to_string()))?;
    if derive_address(cfg, &ctx.stid, &ctx.aud, iss, ctx.salt)? != zkaddr {
        return Err(ProtoError::AddressMismatch);
    }
    let sk_u = SigningKey::generate(rng);
    let r = random_fe(rng);
    let nonce = nonce_string(&sk_u.verifying_key().to_bytes(), t_exp, r);
    let mut extra = ClaimSet::new();
    let sub = match cfg.stid_claim {
        StidClaim::Sub => ctx.stid.clone(),
        StidClaim::Email => {
            extra.set("email", ctx.stid.as_str());
            extra.set("email_verified", true);
            hex::encode(&Sha256::digest(ctx.stid.as_bytes())[..8])
        }
    };
    let jwt = op.issue(&sub, &ctx.aud, &nonce, &extra)?;
    // a pairwise provider may have rewritten the identifier
    let stid = claim_get(&jwt, cfg.stid_claim.name()).map_err(|e| ProtoError::PredicateFalse(e.to_string()))?;
    if stid.raw != ctx.stid.as_bytes() {
        return Err(ProtoError::AddressMismatch);
    }
    let tag = Tag { kid: op.kid.clone(), pk: op.public().clone(), iss: iss.to_string(), zkaddr, t_max: t_exp };
    Ok(Session { tag, witness: Witness { jwt, salt: ctx.salt, r, sk_u } })
}

/// Why a signature was rejected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("expired: T_max {t_max} < T_cur {t_cur}")]
    Expired { t_max: u64, t_cur: u64 },
    #[error("lifetime too long: T_max {t_max} ≥ T_cur {t_cur} + δ")]
    LifetimeTooLong { t_max: u64, t_cur: u64 },
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error(transparent)]
    Jwk(#[from] RegistryError),
    #[error("key belongs to another issuer")]
    IssuerMismatch,
    #[error("T_max differs from the tag")]
    TagMismatch,
    #[error("bad public input: {0}")]
    PublicInput(String),
    #[error("ephemeral signature invalid")]
    EphemeralSignature,
    #[error("proof rejected")]
    Proof,
}

const DEFAULT_CACHE_SLOTS: usize = 4;

/// The signer/verifier pair over one circuit and one proof backend.
pub struct ZkLogin {
    cfg: CircuitConfig,
    circuit: Arc<ConstraintSystem>,
    backend: ProofBackendKey,
    cache: Mutex<VecDeque<([u8; 32], Proof)>>,
    cache_slots: usize,
    proofs: AtomicU64,
}

impl std::fmt::Debug for ZkLogin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ZkLogin").field("backend", &self.backend.kind).finish_non_exhaustive()
    }
}

impl ZkLogin {
    pub fn new(cfg: CircuitConfig, backend: ProofBackendKey) -> Result<Self, ProtoError> {
        let circuit = Arc::new(build_ckt(&cfg)?);
        Ok(Self::with_circuit(cfg, circuit, backend))
    }

    /// Reuses an already built circuit, which must come from `cfg`.
    pub fn with_circuit(cfg: CircuitConfig, circuit: Arc<ConstraintSystem>, backend: ProofBackendKey) -> Self {
        Self {
            cfg,
            circuit,
            backend,
            cache: Mutex::new(VecDeque::new()),
            cache_slots: DEFAULT_CACHE_SLOTS,
            proofs: AtomicU64::new(0),
        }
    }

    /// Number of distinct statements whose proofs are kept.
    pub fn set_cache_slots(&mut self, n: usize) {
        self.cache_slots = n.max(1);
    }

    pub fn cfg(&self) -> &CircuitConfig {
        &self.cfg
    }

    pub fn circuit(&self) -> &Arc<ConstraintSystem> {
        &self.circuit
    }

    pub fn backend(&self) -> &ProofBackendKey {
        &self.backend
    }

    /// Number of proofs generated, cache hits excluded.
    pub fn proofs_generated(&self) -> u64 {
        self.proofs.load(Ordering::Relaxed)
    }

    pub fn public_inputs(&self, tag: &Tag, vk_u: [u8; 32], header_b64: &str) -> PublicInputs {
        PublicInputs::new(&tag.pk, &self.cfg, &tag.iss, tag.zkaddr, tag.t_max, vk_u, header_b64)
    }

    /// Checks P(tag, w) out of circuit and returns the parsing hints.
    pub fn check_predicate(&self, tag: &Tag, w: &Witness) -> Result<WitnessBundle, ProtoError> {
        self.check_statement(tag, w.vk_u(), &w.jwt, w.salt, w.r)
    }

    /// As [`Self::check_predicate`], for a prover that holds vk_u but not sk_u.
    pub fn check_statement(&self, tag: &Tag, vk_u: [u8; 32], jwt: &Jwt, salt: Fe, r: Fe) -> Result<WitnessBundle, ProtoError> {
        let no = |m: String| ProtoError::PredicateFalse(m);
        if !jwt_verify(&tag.pk, jwt) {
            return Err(no("token signature".into()));
        }
        if jwt.header.kid != tag.kid {
            return Err(no("token kid".into()));
        }
        let raw = |name: &str| claim_get(jwt, name).map(|s| s.raw).map_err(|e| no(e.to_string()));
        let iss = raw("iss")?;
        if iss != tag.iss.as_bytes() {
            return Err(no("iss".into()));
        }
        let text = |b: Vec<u8>| String::from_utf8(b).map_err(|_| no("claim encoding".into()));
        let stid = text(raw(self.cfg.stid_claim.name())?)?;
        let aud = text(raw("aud")?)?;
        if derive_address(&self.cfg, &stid, &aud, &tag.iss, salt)? != tag.zkaddr {
            return Err(no("address".into()));
        }
        if raw("nonce")? != nonce_string(&vk_u, tag.t_max, r).as_bytes() {
            return Err(no("nonce".into()));
        }
        WitnessBundle::new(&self.cfg, jwt.clone(), salt, r).map_err(|e| no(e.to_string()))
    }

    fn cache_key(&self, public: &[Fe]) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.backend.kind.to_string().as_bytes());
        for x in public {
            h.update(x.to_le_bytes());
        }
        h.finalize().into()
    }

    /// π for (tag, w), reused while the public statement is unchanged.
    pub fn prove(&self, tag: &Tag, w: &Witness) -> Result<Proof, ProtoError> {
        self.prove_statement(tag, w.vk_u(), &w.jwt, w.salt, w.r, None)
    }

    /// Proof for a statement bound to `vk_u`. Caller-supplied hints replace the computed ones.
    pub fn prove_statement(
        &self,
        tag: &Tag,
        vk_u: [u8; 32],
        jwt: &Jwt,
        salt: Fe,
        r: Fe,
        hints: Option<Vec<ClaimHint>>,
    ) -> Result<Proof, ProtoError> {
        let public = self.public_inputs(tag, vk_u, &jwt.header_b64);
        let elements = public.to_elements(&self.cfg).map_err(|e| ProtoError::PredicateFalse(e.to_string()))?;
        let key = self.cache_key(&elements);
        if let Some((_, p)) = self.cache.lock().expect("cache lock").iter().find(|(k, _)| *k == key) {
            return Ok(p.clone());
        }
        let mut bundle = self.check_statement(tag, vk_u, jwt, salt, r)?;
        if let Some(h) = hints {
            if h.len() != bundle.hints.len() {
                return Err(ProtoError::Malformed(format!("expected {} hints", bundle.hints.len())));
            }
            bundle.hints = h;
        }
        let z = fill_witness(&self.cfg, &bundle, &public).map_err(|e| ProtoError::PredicateFalse(e.to_string()))?;
        let proof = csys::prove(&self.backend, &self.circuit, &z).map_err(|e| match e {
            csys::CsError::UnsatisfiedWitness { .. } => ProtoError::PredicateFalse(e.to_string()),
            e => ProtoError::BackendFailure(e.to_string()),
        })?;
        self.proofs.fetch_add(1, Ordering::Relaxed);
        let mut cache = self.cache.lock().expect("cache lock");
        if cache.len() >= self.cache_slots {
            cache.pop_front();
        }
        cache.push_back((key, proof.clone()));
        Ok(proof)
    }

    pub fn tws_sign(&self, tag: &Tag, w: &Witness, msg: &[u8]) -> Result<ZkLoginSignature, ProtoError> {
        let pi = self.prove(tag, w)?;
        let sigma_u = w.sk_u.sign(&message_digest(msg)).to_bytes();
        Ok(ZkLoginSignature { vk_u: w.vk_u(), t_max: tag.t_max, sigma_u, header_b64: w.jwt.header_b64.clone(), pi })
    }

    pub fn tws_check(&self, tag: &Tag, msg: &[u8], sig: &ZkLoginSignature) -> Result<(), VerifyError> {
        if sig.t_max != tag.t_max {
            return Err(VerifyError::TagMismatch);
        }
        let header = parse_header(&sig.header_b64)?;
        if header.alg != "RS256" || header.kid != tag.kid {
            return Err(VerifyError::BadHeader("alg or kid".into()));
        }
        let vk = VerifyingKey::from_bytes(&sig.vk_u).map_err(|_| VerifyError::EphemeralSignature)?;
        vk.verify(&message_digest(msg), &Signature::from_bytes(&sig.sigma_u))
            .map_err(|_| VerifyError::EphemeralSignature)?;
        let public = self
            .public_inputs(tag, sig.vk_u, &sig.header_b64)
            .to_elements(&self.cfg)
            .map_err(|e| VerifyError::PublicInput(e.to_string()))?;
        if !csys::verify(&self.backend, &self.circuit, &public, &sig.pi) {
            return Err(VerifyError::Proof);
        }
        Ok(())
    }

    pub fn tws_verify(&self, tag: &Tag, msg: &[u8], sig: &ZkLoginSignature) -> bool {
        self.tws_check(tag, msg, sig).is_ok()
    }

    pub fn zklogin_sign(&self, session: &Session, msg: &[u8]) -> Result<ZkLoginSignature, ProtoError> {
        self.tws_sign(&session.tag, &session.witness, msg)
    }

    /// Freshness (T_cur ≤ T_max < T_cur + δ), key currency, then the tag check.
    pub fn zklogin_check(
        &self,
        registry: &JwkRegistry,
        zkaddr: Fe,
        iss: &str,
        msg: &[u8],
        sig: &ZkLoginSignature,
        t_cur: u64,
    ) -> Result<(), VerifyError> {
        if sig.t_max < t_cur {
            return Err(VerifyError::Expired { t_max: sig.t_max, t_cur });
        }
        if sig.t_max >= t_cur.saturating_add(self.cfg.delta) {
            return Err(VerifyError::LifetimeTooLong { t_max: sig.t_max, t_cur });
        }
        let header = parse_header(&sig.header_b64)?;
        let jwk = registry.lookup(&header.kid, t_cur)?;
        if jwk.iss != iss {
            return Err(VerifyError::IssuerMismatch);
        }
        let tag = Tag { kid: jwk.kid, pk: jwk.public, iss: iss.to_string(), zkaddr, t_max: sig.t_max };
        self.tws_check(&tag, msg, sig)
    }

    pub fn zklogin_verify(
        &self,
        registry: &JwkRegistry,
        zkaddr: Fe,
        iss: &str,
        msg: &[u8],
        sig: &ZkLoginSignature,
        t_cur: u64,
    ) -> bool {
        self.zklogin_check(registry, zkaddr, iss, msg, sig, t_cur).is_ok()
    }
}

fn parse_header(header_b64: &str) -> Result<JwtHeader, VerifyError> {
    let bytes = b64url_decode(header_b64).map_err(|e| VerifyError::BadHeader(e.to_string()))?;
    serde_json::from_slice(&bytes).map_err(|e| VerifyError::BadHeader(e.to_string()))
}
