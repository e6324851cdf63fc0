//! Salt and prover services.
//!
//! The prover runs one job at a time; requests beyond the queue get 429.
//! Identical requests are answered from a small response cache.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use zklogin_core::jwtkit::{JwkRegistry, Jwt};
use zklogin_core::proto::{derive_salt, ProtoError, SaltSeed, ZkLogin};
use zklogin_core::zkjwt::ClaimHint;

use crate::config::Config;
use crate::files::{bytes32, fe_from_hex, ProofFile};
use crate::{identity, proof_file, tag_for, CliError};

pub const CACHE_HEADER: &str = "x-zklogin-cache";

fn error(status: StatusCode, msg: impl std::fmt::Display) -> Response {
    (status, Json(json!({ "error": msg.to_string() }))).into_response()
}

fn cli_error(e: CliError) -> Response {
    match e {
        CliError::Auth(m) => error(StatusCode::UNAUTHORIZED, m),
        CliError::Usage(m) => error(StatusCode::BAD_REQUEST, m),
        CliError::Failure(m) => error(StatusCode::INTERNAL_SERVER_ERROR, m),
    }
}

async fn healthz() -> &'static str {
    "ok"
}

pub async fn serve(router: Router, bind: &str) -> Result<(), CliError> {
    let listener =
        tokio::net::TcpListener::bind(bind).await.map_err(|e| CliError::Failure(format!("bind {bind}: {e}")))?;
    eprintln!("listening on {}", listener.local_addr().map(|a| a.to_string()).unwrap_or_default());
    axum::serve(listener, router).await.map_err(|e| CliError::Failure(e.to_string()))
}

#[derive(Clone)]
pub struct SaltState {
    registry: Arc<JwkRegistry>,
    seed: Arc<SaltSeed>,
    cfg: zklogin_core::zkjwt::CircuitConfig,
    epoch: u64,
}

impl SaltState {
    pub fn new(cfg: &Config) -> Result<Self, CliError> {
        Ok(Self {
            registry: Arc::new(cfg.registry()?),
            seed: Arc::new(cfg.salt_seed()?),
            cfg: cfg.circuit(),
            epoch: cfg.epoch,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SaltRequest {
    pub jwt: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SaltResponse {
    pub salt: String,
}

pub fn salt_router(state: SaltState) -> Router {
    Router::new().route("/salt", post(salt)).route("/healthz", get(healthz)).with_state(state)
}

/// The salt for a token signed under a current key of its issuer.
async fn salt(State(s): State<SaltState>, body: Result<Json<SaltRequest>, JsonRejection>) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.body_text()),
    };
    let jwt = match Jwt::parse(&req.jwt) {
        Ok(j) => j,
        Err(e) => return error(StatusCode::UNAUTHORIZED, e),
    };
    let jwk = match s.registry.lookup(&jwt.header.kid, s.epoch) {
        Ok(k) => k,
        Err(e) => return error(StatusCode::UNAUTHORIZED, e),
    };
    if !zklogin_core::jwtkit::jwt_verify(&jwk.public, &jwt) {
        return error(StatusCode::UNAUTHORIZED, "signature does not verify");
    }
    let (stid, aud, iss) = match identity(&s.cfg, &jwt) {
        Ok(c) => c,
        Err(e) => return cli_error(e),
    };
    if iss != jwk.iss {
        return error(StatusCode::UNAUTHORIZED, "issuer does not own the signing key");
    }
    Json(SaltResponse { salt: derive_salt(&s.seed, &stid, &aud, &iss, 0).to_hex() }).into_response()
}

#[derive(Clone)]
pub struct ProverState {
    zk: Arc<ZkLogin>,
    registry: Arc<JwkRegistry>,
    epoch: u64,
    queue: usize,
    cache_slots: usize,
    /// Requests admitted: the running job plus those waiting.
    pending: Arc<AtomicUsize>,
    job: Arc<tokio::sync::Mutex<()>>,
    cache: Arc<Mutex<VecDeque<([u8; 32], ProofFile)>>>,
    jobs: Arc<AtomicU64>,
}

impl ProverState {
    pub fn new(cfg: &Config) -> Result<Self, CliError> {
        Ok(Self::with_parts(cfg.zklogin()?, cfg.registry()?, cfg.epoch, cfg.serve.queue, cfg.serve.cache))
    }

    pub fn with_parts(zk: ZkLogin, registry: JwkRegistry, epoch: u64, queue: usize, cache_slots: usize) -> Self {
        Self {
            zk: Arc::new(zk),
            registry: Arc::new(registry),
            epoch,
            queue,
            cache_slots: cache_slots.max(1),
            pending: Arc::new(AtomicUsize::new(0)),
            job: Arc::new(tokio::sync::Mutex::new(())),
            cache: Arc::new(Mutex::new(VecDeque::new())),
            jobs: Arc::new(AtomicU64::new(0)),
        }
    }

    /// Proving jobs run so far (cache hits excluded).
    pub fn jobs_run(&self) -> u64 {
        self.jobs.load(Ordering::Relaxed)
    }

    fn cached(&self, key: &[u8; 32]) -> Option<ProofFile> {
        self.cache.lock().expect("cache lock").iter().find(|(k, _)| k == key).map(|(_, v)| v.clone())
    }

    fn remember(&self, key: [u8; 32], value: ProofFile) {
        let mut c = self.cache.lock().expect("cache lock");
        if c.len() >= self.cache_slots {
            c.pop_front();
        }
        c.push_back((key, value));
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProveRequest {
    pub jwt: String,
    /// Hex field element.
    pub salt: String,
    /// Hex field element.
    pub r: String,
    /// Hex Ed25519 public key.
    pub vk_u: String,
    #[serde(rename = "T_max", alias = "t_max")]
    pub t_max: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hints: Option<Vec<ClaimHint>>,
}

pub fn prover_router(state: ProverState) -> Router {
    Router::new().route("/prove", post(prove)).route("/healthz", get(healthz)).with_state(state)
}

struct Admitted(Arc<AtomicUsize>);

impl Drop for Admitted {
    fn drop(&mut self) {
        self.0.fetch_sub(1, Ordering::SeqCst);
    }
}

fn with_cache_header(mut r: Response, hit: bool) -> Response {
    r.headers_mut().insert(CACHE_HEADER, if hit { "hit" } else { "miss" }.parse().expect("header value"));
    r
}

async fn prove(State(s): State<ProverState>, body: Result<Json<ProveRequest>, JsonRejection>) -> Response {
    let Json(req) = match body {
        Ok(b) => b,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.body_text()),
    };
    let parsed = (|| Ok::<_, CliError>((fe_from_hex("salt", &req.salt)?, fe_from_hex("r", &req.r)?, bytes32("vk_u", &req.vk_u)?)))();
    let (salt, r, vk_u) = match parsed {
        Ok(v) => v,
        Err(e) => return cli_error(e),
    };
    let jwt = match Jwt::parse(&req.jwt) {
        Ok(j) => j,
        Err(e) => return error(StatusCode::UNAUTHORIZED, e),
    };
    let tag = match tag_for(&s.zk, &s.registry, s.epoch, &jwt, salt, req.t_max) {
        Ok(t) => t,
        Err(e) => return cli_error(e),
    };

    let key: [u8; 32] = Sha256::digest(serde_json::to_vec(&req).expect("serializable")).into();
    if let Some(hit) = s.cached(&key) {
        return with_cache_header(Json(hit).into_response(), true);
    }
    if s.pending.fetch_add(1, Ordering::SeqCst) > s.queue {
        s.pending.fetch_sub(1, Ordering::SeqCst);
        return error(StatusCode::TOO_MANY_REQUESTS, "prover queue is full");
    }
    let _admitted = Admitted(s.pending.clone());
    let _job = s.job.lock().await;
    if let Some(hit) = s.cached(&key) {
        return with_cache_header(Json(hit).into_response(), true);
    }

    let worker = s.clone();
    let hints = req.hints.clone();
    let done = tokio::task::spawn_blocking(move || {
        worker.jobs.fetch_add(1, Ordering::Relaxed);
        let pi = worker.zk.prove_statement(&tag, vk_u, &jwt, salt, r, hints)?;
        proof_file(&worker.zk, &tag, vk_u, &jwt.header_b64, &pi).map_err(|e| ProtoError::BackendFailure(e.to_string()))
    })
    .await;
    match done {
        Ok(Ok(file)) => {
            s.remember(key, file.clone());
            with_cache_header(Json(file).into_response(), false)
        }
        Ok(Err(e @ (ProtoError::PredicateFalse(_) | ProtoError::Malformed(_) | ProtoError::Circuit(_)))) => {
            error(StatusCode::BAD_REQUEST, e)
        }
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e),
    }
}
