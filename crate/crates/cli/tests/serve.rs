use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use ed25519_dalek::SigningKey;
use http_body_util::BodyExt;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};
use tower::ServiceExt;

use zklogin_cli::config::{Config, Profile};
use zklogin_cli::files::ProviderFile;
use zklogin_cli::serve::{prover_router, salt_router, ProverState, SaltState, CACHE_HEADER};
use zklogin_core::csys::BackendKind;
use zklogin_core::fieldcore::Fe;
use zklogin_core::jwtkit::MockProvider;
use zklogin_core::proto::{derive_address, derive_salt, random_fe};
use zklogin_core::zkjwt::{nonce_string, CircuitConfig};

const ISS: &str = "https://op.test";
const SEED_HEX: &str = "5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a5a";

struct Env {
    _dir: tempfile::TempDir,
    cfg: Config,
    op: MockProvider,
}

fn env(backend: BackendKind) -> Env {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let op = MockProvider::new(ISS, CircuitConfig::compact().rsa_bits as u64, &mut rng);
    let path = dir.path().join("op.json");
    std::fs::write(&path, serde_json::to_string(&ProviderFile::from_provider(&op, 10)).unwrap()).unwrap();
    let cfg = Config {
        profile: Profile::Compact,
        backend,
        salt_seed: Some(SEED_HEX.into()),
        providers: vec![path],
        ..Config::default()
    };
    Env { _dir: dir, cfg, op }
}

async fn call(router: &Router, method: &str, uri: &str, body: Option<String>) -> (StatusCode, Option<String>, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    if body.is_some() {
        req = req.header("content-type", "application/json");
    }
    let req = req.body(body.map(Body::from).unwrap_or_else(Body::empty)).unwrap();
    let resp = router.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let cache = resp.headers().get(CACHE_HEADER).map(|v| v.to_str().unwrap().to_string());
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let v = serde_json::from_slice(&bytes).unwrap_or_else(|_| Value::String(String::from_utf8_lossy(&bytes).into()));
    (status, cache, v)
}

struct Login {
    jwt: String,
    salt: Fe,
    r: Fe,
    vk: [u8; 32],
    t_max: u64,
}

fn login(e: &Env, sub: &str, seed: u64) -> Login {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sk = SigningKey::generate(&mut rng);
    let vk = sk.verifying_key().to_bytes();
    let r = random_fe(&mut rng);
    let t_max = e.cfg.epoch + 1;
    let jwt = e.op.issue(sub, "app.example", &nonce_string(&vk, t_max, r), &Default::default()).unwrap();
    let salt = derive_salt(&e.cfg.salt_seed().unwrap(), sub, "app.example", ISS, 0);
    Login { jwt: jwt.to_compact(), salt, r, vk, t_max }
}

fn prove_body(l: &Login) -> String {
    json!({
        "jwt": l.jwt,
        "salt": l.salt.to_hex(),
        "r": l.r.to_hex(),
        "vk_u": hex::encode(l.vk),
        "T_max": l.t_max,
    })
    .to_string()
}

#[tokio::test]
async fn healthz_on_both_services() {
    let e = env(BackendKind::Simulation);
    let salt = salt_router(SaltState::new(&e.cfg).unwrap());
    let prover = prover_router(ProverState::new(&e.cfg).unwrap());
    for r in [&salt, &prover] {
        let (s, _, body) = call(r, "GET", "/healthz", None).await;
        assert_eq!(s, StatusCode::OK);
        assert_eq!(body, Value::String("ok".into()));
    }
}

#[tokio::test]
async fn salt_service() {
    let e = env(BackendKind::Simulation);
    let router = salt_router(SaltState::new(&e.cfg).unwrap());
    let l = login(&e, "4242", 2);

    let (s, _, body) = call(&router, "POST", "/salt", Some(json!({ "jwt": l.jwt }).to_string())).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body, json!({ "salt": l.salt.to_hex() }));
    assert!(!body.to_string().contains(SEED_HEX));

    // tampered payload, unknown kid, garbage
    let parts: Vec<&str> = l.jwt.split('.').collect();
    let other = login(&e, "4243", 3).jwt;
    let forged = format!("{}.{}.{}", parts[0], other.split('.').nth(1).unwrap(), parts[2]);
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let stranger = MockProvider::new(ISS, 1024, &mut rng).issue("4242", "app.example", "n", &Default::default()).unwrap();
    for bad in [forged, stranger.to_compact(), "not.a.jwt".to_string()] {
        let (s, _, _) = call(&router, "POST", "/salt", Some(json!({ "jwt": bad }).to_string())).await;
        assert_eq!(s, StatusCode::UNAUTHORIZED);
    }

    for schema in [json!({}), json!({ "jwt": 5 }), json!({ "jwt": l.jwt, "extra": 1 })] {
        let (s, _, _) = call(&router, "POST", "/salt", Some(schema.to_string())).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{schema}");
    }
    let (s, _, _) = call(&router, "POST", "/salt", Some("{".into())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn salt_service_rejects_stale_keys() {
    let mut e = env(BackendKind::Simulation);
    e.cfg.epoch = 10 + e.cfg.jwk_window + 1;
    let router = salt_router(SaltState::new(&e.cfg).unwrap());
    let l = login(&e, "4242", 2);
    let (s, _, _) = call(&router, "POST", "/salt", Some(json!({ "jwt": l.jwt }).to_string())).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
}

#[tokio::test]
async fn prover_returns_proof_and_deduplicates() {
    let e = env(BackendKind::Simulation);
    let state = ProverState::new(&e.cfg).unwrap();
    let router = prover_router(state.clone());
    let l = login(&e, "777", 4);

    let (s, cache, body) = call(&router, "POST", "/prove", Some(prove_body(&l))).await;
    assert_eq!(s, StatusCode::OK, "{body}");
    assert_eq!(cache.as_deref(), Some("miss"));
    let keys: Vec<&str> = body.as_object().unwrap().keys().map(|k| k.as_str()).collect();
    assert_eq!(keys, ["proof", "public_inputs", "region_stats"]);
    let cfg = CircuitConfig::compact();
    assert_eq!(body["public_inputs"].as_array().unwrap().len(), cfg.num_public());
    let zkaddr = derive_address(&cfg, "777", "app.example", ISS, l.salt).unwrap();
    assert!(body["public_inputs"].as_array().unwrap().contains(&Value::String(zkaddr.to_hex())));
    assert!(body["region_stats"]["sha256"].as_u64().unwrap() > 0);

    let (s, cache, again) = call(&router, "POST", "/prove", Some(prove_body(&l))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(cache.as_deref(), Some("hit"));
    assert_eq!(again, body);
    assert_eq!(state.jobs_run(), 1);
}

#[tokio::test]
async fn prover_status_codes() {
    let e = env(BackendKind::Simulation);
    let router = prover_router(ProverState::new(&e.cfg).unwrap());
    let l = login(&e, "778", 5);
    let good: Value = serde_json::from_str(&prove_body(&l)).unwrap();

    let mut bad_jwt = good.clone();
    bad_jwt["jwt"] = json!("x.y.z");
    let (s, _, _) = call(&router, "POST", "/prove", Some(bad_jwt.to_string())).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);

    let mut missing = good.clone();
    missing.as_object_mut().unwrap().remove("T_max");
    let mut bad_hex = good.clone();
    bad_hex["salt"] = json!("zz");
    let mut short_vk = good.clone();
    short_vk["vk_u"] = json!("abcd");
    let mut bad_hints = good.clone();
    bad_hints["hints"] = json!([{ "i": 1, "l": 2, "j": 3 }]);
    for body in [missing, bad_hex, short_vk, bad_hints] {
        let (s, _, resp) = call(&router, "POST", "/prove", Some(body.to_string())).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{body} -> {resp}");
    }

    // nonce is for a different ephemeral key
    let mut foreign = good.clone();
    foreign["vk_u"] = json!(hex::encode([7u8; 32]));
    let (s, _, resp) = call(&router, "POST", "/prove", Some(foreign.to_string())).await;
    assert_eq!(s, StatusCode::BAD_REQUEST, "{resp}");
    assert!(resp["error"].as_str().unwrap().contains("nonce"), "{resp}");
}

#[tokio::test]
async fn prover_queue_limit() {
    let e = env(BackendKind::Transparent);
    let zk = e.cfg.zklogin().unwrap();
    let registry = e.cfg.registry().unwrap();
    let state = ProverState::with_parts(zk, registry, e.cfg.epoch, 0, 8);
    let router = prover_router(state.clone());
    let l = login(&e, "779", 6);
    let tasks: Vec<_> = (0..3)
        .map(|_| {
            let (router, body) = (router.clone(), prove_body(&l));
            tokio::spawn(async move { call(&router, "POST", "/prove", Some(body)).await.0 })
        })
        .collect();
    let mut codes = Vec::new();
    for t in tasks {
        codes.push(t.await.unwrap());
    }
    codes.sort();
    assert_eq!(codes, [StatusCode::OK, StatusCode::TOO_MANY_REQUESTS, StatusCode::TOO_MANY_REQUESTS]);
    assert_eq!(state.jobs_run(), 1);

    // served from the cache once the job has finished
    let (s, cache, _) = call(&router, "POST", "/prove", Some(prove_body(&l))).await;
    assert_eq!((s, cache.as_deref()), (StatusCode::OK, Some("hit")));
}
