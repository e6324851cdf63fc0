//! Executable security games and the attack corpus.
//!
//! Adversaries here are scripted strategies. A zero win count shows the
//! checks they target are wired in; it is not evidence of security.

mod attacks;
mod games;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use ed25519_dalek::Signer;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub use attacks::{run_attack, run_attacks, AttackCase};
pub use games::{run_tws_games, run_unlinkability, run_zklogin_security, Distinguisher, Strategy};

use crate::csys::{sim_prove, BackendKind, ConstraintSystem, ProofBackendKey};
use crate::fieldcore::Fe;
use crate::jwtkit::{JwkRegistry, JwtError, MockProvider};
use crate::proto::{
    derive_address, derive_salt, get_witness, message_digest, ProtoError, Providers, SaltSeed, Session, UserContext,
    VerifyError, ZkLogin, ZkLoginSignature,
};
use crate::zkjwt::{build_ckt, CircuitConfig, ZkJwtError};

pub const REPORT_NOTICE: &str =
    "scripted adversaries validate mechanism only: zero wins against these strategies is not a security proof";

pub const DEFAULT_ISS: &str = "https://accounts.op.test";
pub const DEFAULT_AUD: &str = "wallet.example";
pub const DEFAULT_EPOCH: u64 = 10;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("game is degenerate: {0}")]
    GameDegenerate(String),
    #[error("unknown name {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Proto(#[from] ProtoError),
    #[error(transparent)]
    Circuit(#[from] ZkJwtError),
    #[error(transparent)]
    Jwt(#[from] JwtError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    pub name: String,
    pub verdict: String,
    pub region: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub game: String,
    pub trials: u64,
    pub wins: u64,
    pub advantage: f64,
    pub cases: Vec<CaseResult>,
}

impl Report {
    pub fn win_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.wins as f64 / self.trials as f64
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Common knobs for every game.
#[derive(Clone, Debug)]
pub struct GameParams {
    pub cfg: CircuitConfig,
    pub backend: BackendKind,
    pub trials: u64,
    pub seed: u64,
}

impl GameParams {
    pub fn compact(backend: BackendKind, trials: u64, seed: u64) -> Self {
        Self { cfg: CircuitConfig::compact(), backend, trials, seed }
    }
}

/// Built circuits, shared per configuration within the process.
pub fn circuit_for(cfg: &CircuitConfig) -> Result<Arc<ConstraintSystem>, ZkJwtError> {
    static CACHE: Mutex<Vec<(CircuitConfig, Arc<ConstraintSystem>)>> = Mutex::new(Vec::new());
    let mut cache = CACHE.lock().expect("circuit cache");
    if let Some((_, c)) = cache.iter().find(|(k, _)| k == cfg) {
        return Ok(c.clone());
    }
    let c = Arc::new(build_ckt(cfg)?);
    cache.push((cfg.clone(), c.clone()));
    Ok(c)
}

pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha20Rng {
    let mut s = [0u8; 32];
    s[..8].copy_from_slice(&seed.to_le_bytes());
    s[8..16].copy_from_slice(&trial.to_le_bytes());
    s[16..].copy_from_slice(b"zklogin/trial/v1");
    ChaCha20Rng::from_seed(s)
}

/// A registered user: what the wallet knows plus the resulting address.
#[derive(Clone, Debug)]
pub struct User {
    pub ctx: UserContext,
    pub iss: String,
    pub zkaddr: Fe,
}

/// Providers, key registry, salt service and signer/verifier in one place.
pub struct Arena {
    pub zk: ZkLogin,
    pub providers: Providers,
    pub registry: JwkRegistry,
    pub salt_seed: SaltSeed,
    pub epoch: u64,
    pub rng: ChaCha20Rng,
    pool: HashMap<(Fe, u64), Vec<Session>>,
}

impl Arena {
    pub fn new(cfg: &CircuitConfig, backend: BackendKind, seed: u64) -> Result<Self, HarnessError> {
        let mut rng = trial_rng(seed, u64::MAX);
        let key = ProofBackendKey::generate(backend, &mut rng);
        let mut zk = ZkLogin::with_circuit(cfg.clone(), circuit_for(cfg)?, key);
        zk.set_cache_slots(16);
        let salt_seed = SaltSeed::random(&mut rng);
        let mut a = Self {
            zk,
            providers: Providers::new(),
            registry: JwkRegistry::default(),
            salt_seed,
            epoch: DEFAULT_EPOCH,
            rng,
            pool: HashMap::new(),
        };
        a.add_provider(DEFAULT_ISS);
        Ok(a)
    }

    pub fn cfg(&self) -> &CircuitConfig {
        self.zk.cfg()
    }

    /// A provider whose key is published at the current epoch.
    pub fn add_provider(&mut self, iss: &str) {
        let op = MockProvider::new(iss, self.cfg().rsa_bits as u64, &mut self.rng);
        op.publish(&self.registry, self.epoch);
        self.providers.insert(op);
    }

    pub fn user(&mut self, iss: &str, stid: &str, aud: &str) -> Result<User, HarnessError> {
        let salt = derive_salt(&self.salt_seed, stid, aud, iss, 0);
        let zkaddr = derive_address(self.cfg(), stid, aud, iss, salt)?;
        Ok(User { ctx: UserContext { stid: stid.to_string(), aud: aud.to_string(), salt }, iss: iss.to_string(), zkaddr })
    }

    pub fn random_user(&mut self) -> Result<User, HarnessError> {
        let stid = format!("{}", self.rng.gen_range(10_000_000u64..100_000_000_000));
        self.user(DEFAULT_ISS, &stid, DEFAULT_AUD)
    }

    pub fn login(&mut self, user: &User, t_exp: u64) -> Result<Session, HarnessError> {
        let cfg = self.cfg().clone();
        Ok(get_witness(&cfg, &self.providers, &user.iss, user.zkaddr, t_exp, &user.ctx, &mut self.rng)?)
    }

    /// Honest signature. On the simulation backend the proof of a true
    /// statement is a deterministic function of the public inputs, so after
    /// checking the predicate the trapdoor produces the identical bytes
    /// without running the circuit.
    pub fn sign(&self, s: &Session, msg: &[u8]) -> Result<ZkLoginSignature, HarnessError> {
        if self.zk.backend().kind != BackendKind::Simulation {
            return Ok(self.zk.zklogin_sign(s, msg)?);
        }
        let w = &s.witness;
        self.zk.check_predicate(&s.tag, w)?;
        let public = self.zk.public_inputs(&s.tag, w.vk_u(), &w.jwt.header_b64).to_elements(self.cfg())?;
        let pi = sim_prove(self.zk.backend(), self.zk.circuit(), &public).map_err(ProtoError::from)?;
        Ok(ZkLoginSignature {
            vk_u: w.vk_u(),
            t_max: s.tag.t_max,
            sigma_u: w.sk_u.sign(&message_digest(msg)).to_bytes(),
            header_b64: w.jwt.header_b64.clone(),
            pi,
        })
    }

    /// A session for one trial: fresh when proofs are cheap (simulation),
    /// otherwise drawn from a per-user pool of `POOL` sessions.
    pub fn trial_session(&mut self, user: &User, t_max: u64, trial: u64) -> Result<Session, HarnessError> {
        if self.zk.backend().kind == BackendKind::Simulation {
            return self.login(user, t_max);
        }
        let key = (user.zkaddr, t_max);
        let slot = (trial % POOL as u64) as usize;
        let existing = self.pool.get(&key).and_then(|v| v.get(slot)).cloned();
        if let Some(s) = existing {
            return Ok(s);
        }
        let s = self.login(user, t_max)?;
        self.pool.entry(key).or_default().push(s.clone());
        Ok(s)
    }
}

/// Sessions kept per user when proofs are expensive.
pub const POOL: usize = 4;

/// Short label for where a verifier stopped.
pub fn verify_region(e: &VerifyError) -> &'static str {
    match e {
        VerifyError::Expired { .. } | VerifyError::LifetimeTooLong { .. } => "freshness",
        VerifyError::BadHeader(_) => "header",
        VerifyError::Jwk(_) | VerifyError::IssuerMismatch => "jwk",
        VerifyError::TagMismatch => "tag",
        VerifyError::PublicInput(_) => "public_input",
        VerifyError::EphemeralSignature => "ephemeral_signature",
        VerifyError::Proof => "proof",
    }
}
