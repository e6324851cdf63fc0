use num_bigint::BigUint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rsa::traits::{PrivateKeyParts, PublicKeyParts};
use rsa::Pkcs1v15Sign;
use sha2::{Digest, Sha256};

use zklogin_core::jwtkit::*;

const ISS: &str = "https://op.test";

fn to_dig(x: &BigUint) -> rsa::BigUint {
    rsa::BigUint::from_bytes_be(&x.to_bytes_be())
}

fn from_dig(x: &rsa::BigUint) -> BigUint {
    BigUint::from_bytes_be(&x.to_bytes_be())
}

fn op(seed: u64) -> MockProvider {
    MockProvider::new(ISS, 768, &mut ChaCha20Rng::seed_from_u64(seed))
}

#[test]
fn rs256_interoperates_with_rsa_crate() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for bits in [768u64, 1024] {
        let ours = RsaPrivateKey::generate(bits, &mut rng);
        assert_eq!(ours.public.bits(), bits);
        let (n, d, p, q) = ours.components();
        let theirs =
            rsa::RsaPrivateKey::from_components(to_dig(n), rsa::BigUint::from(65537u32), to_dig(d), vec![to_dig(p), to_dig(q)])
                .unwrap();
        theirs.validate().unwrap();
        for len in [0usize, 1, 55, 200] {
            let msg: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
            let digest = Sha256::digest(&msg);
            let sig = ours.sign(&msg);
            theirs.to_public_key().verify(Pkcs1v15Sign::new::<Sha256>(), &digest, &sig).unwrap();
            assert_eq!(theirs.sign(Pkcs1v15Sign::new::<Sha256>(), &digest).unwrap(), sig);
            assert!(ours.public.verify(&msg, &sig));
            let mut bad = sig.clone();
            let at = rng.gen_range(0..bad.len());
            bad[at] ^= 1;
            assert!(!ours.public.verify(&msg, &bad));
            assert!(!ours.public.verify(b"other", &sig));
            // aliases of the signature modulo n are not signatures
            let alias = BigUint::from_bytes_be(&sig) + n;
            assert!(!ours.public.verify(&msg, &alias.to_bytes_be()));
        }
    }

    let theirs = rsa::RsaPrivateKey::new(&mut rng, 1024).unwrap();
    let primes = theirs.primes();
    let ours = RsaPrivateKey::from_components(
        from_dig(theirs.n()),
        from_dig(theirs.d()),
        from_dig(&primes[0]),
        from_dig(&primes[1]),
    )
    .unwrap();
    let digest = Sha256::digest(b"hello");
    assert_eq!(ours.sign(b"hello"), theirs.sign(Pkcs1v15Sign::new::<Sha256>(), &digest).unwrap());
    assert!(RsaPrivateKey::from_components(from_dig(theirs.n()) + 2u32, from_dig(theirs.d()), from_dig(&primes[0]), from_dig(&primes[1])).is_none());
}

#[test]
fn primality() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let m127 = (BigUint::from(1u32) << 127) - 1u32;
    assert!(rsakey::is_probable_prime(&m127, 20, &mut rng));
    assert!(!rsakey::is_probable_prime(&(&m127 * 3u32), 20, &mut rng));
    // Carmichael number
    assert!(!rsakey::is_probable_prime(&BigUint::from(561u32), 20, &mut rng));
    assert!(rsakey::is_probable_prime(&BigUint::from(65537u32), 20, &mut rng));
}

#[test]
fn token_round_trip_and_verification() {
    let op = op(3);
    let jwt = op.issue("12345", "app", "abc", &ClaimSet::new().with("email_verified", true).with("iat", 17i64)).unwrap();
    let parsed = Jwt::parse(&jwt.to_compact()).unwrap();
    assert_eq!(parsed, jwt);
    assert!(jwt_verify(op.public(), &parsed));
    assert_eq!(parsed.header.alg, "RS256");
    assert_eq!(parsed.header.kid, op.kid);
    assert_eq!(parsed.claims.get_str("sub"), Some("12345"));
    assert_eq!(parsed.claims.get("iat"), Some(&ClaimValue::Number(17)));
    let v: serde_json::Value = serde_json::from_slice(&parsed.payload).unwrap();
    assert_eq!(v["email_verified"], true);

    let other = op.issue("12346", "app", "abc", &ClaimSet::new()).unwrap();
    let spliced = Jwt::parse(&format!("{}.{}.{}", jwt.header_b64, other.payload_b64, jwt.sig_b64)).unwrap();
    assert!(!jwt_verify(op.public(), &spliced));
    assert!(!jwt_verify(self::op(4).public(), &jwt));

    let mut none = jwt.clone();
    none.header.alg = "none".into();
    assert!(!jwt_verify(op.public(), &none));

    for bad in ["a.b", "a.b.c.d", "!!.e30.AA", &format!("{}.e30.A", jwt.header_b64), &format!("{}.WzFd.AA", jwt.header_b64)] {
        assert!(matches!(Jwt::parse(bad), Err(JwtError::Malformed(_))), "{bad}");
    }
}

#[test]
fn issuance_limits() {
    let op = op(3);
    let missing = ClaimSet::new().with("sub", "1").with("aud", "a").with("iss", ISS);
    assert_eq!(op.issue_claims(&missing), Err(JwtError::MissingMandatoryClaim("nonce".into())));
    let long = ClaimSet::new().with("pad", "x".repeat(2000));
    assert!(matches!(op.issue("1", "a", "n", &long), Err(JwtError::TokenTooLong { max: DEFAULT_L_MAX, .. })));
    let raw = jwt_issue_raw(&op.key, &op.kid, br#"{"sub":"1","sub":"2"}"#, DEFAULT_L_MAX).unwrap();
    assert_eq!(raw.claims.get_str("sub"), Some("2"));
    assert!(jwt_issue_raw(&op.key, &op.kid, b"[1]", DEFAULT_L_MAX).is_err());
}

#[test]
fn spaced_payloads_parse_identically() {
    let claims = ClaimSet::new().with("iss", ISS).with("sub", "9").with("aud", "a").with("nonce", "n").with("ok", false);
    let compact: serde_json::Value = serde_json::from_slice(&serialize_claims(&claims, PayloadStyle::Compact)).unwrap();
    for seed in 0..50 {
        let spaced = serialize_claims(&claims, PayloadStyle::Spaced(seed));
        assert_eq!(serde_json::from_slice::<serde_json::Value>(&spaced).unwrap(), compact);
        let span = claim_get_payload(&spaced, "sub").unwrap();
        assert_eq!(span.value, ClaimValue::String("9".into()));
        assert_eq!(&spaced[span.i..span.i + 5], b"\"sub\"");
        assert!(matches!(spaced[span.i + span.l - 1], b',' | b'}'));
        assert_eq!(spaced[span.i + span.j], b':');
        assert_eq!(&spaced[span.i + span.value_start..span.i + span.value_start + span.value_len], b"\"9\"");
    }
}

#[test]
fn claim_lookup_errors() {
    let get = |p: &str, n: &str| claim_get_payload(p.as_bytes(), n);
    assert_eq!(get(r#"{"a":1}"#, "sub"), Err(ClaimError::ClaimAbsent("sub".into())));
    assert_eq!(get(r#"{"a":{"sub":"x"}}"#, "sub"), Err(ClaimError::ClaimNested("sub".into())));
    assert_eq!(get(r#"{"sub":"x","sub":"y"}"#, "sub"), Err(ClaimError::DuplicateClaim("sub".into())));
    assert!(matches!(get(r#"{"sub":"#, "sub"), Err(ClaimError::Malformed(_))));
    assert!(matches!(get("[]", "sub"), Err(ClaimError::Malformed(_))));

    // a string value that spells out a key is not a key
    let p = r#"{"aud":"\"sub\":\"evil\"","sub":"good"}"#;
    let s = get(p, "sub").unwrap();
    assert_eq!(s.value.as_str(), Some("good"));
    assert_eq!(s.i, p.find(r#","sub""#).unwrap() + 1);

    let s = get(r#"{"sub":"a\"b","x":1}"#, "sub").unwrap();
    assert_eq!(s.raw, br#"a\"b"#);
    assert_eq!(s.value.as_str(), Some("a\"b"));
    let s = get(r#"{"x":1,"n":-42}"#, "n").unwrap();
    assert_eq!((s.value, s.raw), (ClaimValue::Number(-42), b"-42".to_vec()));
}

#[test]
fn registry_window_and_kid_binding() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let reg = JwkRegistry::new(2);
    let mut a = op(6);
    let b = MockProvider::new("https://other.test", 768, &mut rng);
    a.publish(&reg, 10);
    b.publish(&reg, 11);
    assert_eq!(reg.issuers(), vec!["https://op.test".to_string(), "https://other.test".to_string()]);
    assert_eq!(reg.lookup(&a.kid, 12).unwrap().iss, ISS);
    assert!(matches!(reg.lookup(&a.kid, 13), Err(RegistryError::StaleKey { published: 10, now: 13, .. })));
    assert!(matches!(reg.lookup("nope", 10), Err(RegistryError::UnknownKid(_))));
    assert_eq!(reg.current(ISS, 12).len(), 1);
    assert!(reg.current(ISS, 13).is_empty());

    assert!(!reg.publish(ISS, &a.kid, b.public(), 12));
    assert!(!reg.publish("https://other.test", &a.kid, a.public(), 12));
    assert!(reg.publish(ISS, &a.kid, a.public(), 12));
    assert_eq!(reg.lookup(&a.kid, 14).unwrap().published_epoch, 12);
    assert!(reg.publish(ISS, &a.kid, a.public(), 5));
    assert_eq!(reg.lookup(&a.kid, 14).unwrap().published_epoch, 12);

    let old = a.kid.clone();
    let new = a.rotate(&reg, 13, &mut rng);
    assert_ne!(old, new);
    assert_eq!(reg.current(ISS, 14).len(), 2);
    assert_eq!(reg.current(ISS, 15).len(), 1);
    let jwt = a.issue("1", "app", "n", &ClaimSet::new()).unwrap();
    assert_eq!(jwt.header.kid, new);
    assert!(jwt_verify(&reg.lookup(&new, 15).unwrap().public, &jwt));

    let jwk = reg.lookup(&new, 15).unwrap().to_json();
    assert_eq!(jwk["e"], "AQAB");
    assert_eq!(BigUint::from_bytes_be(&b64url_decode(jwk["n"].as_str().unwrap()).unwrap()), a.public().n);
}

#[test]
fn pairwise_subjects() {
    let mut p = op(7);
    assert_eq!(p.subject_for("alice", "x"), "alice");
    p.pairwise = true;
    assert_ne!(p.subject_for("alice", "x"), p.subject_for("alice", "y"));
    assert_eq!(p.subject_for("alice", "x"), p.subject_for("alice", "x"));
    assert_eq!(p.issue("alice", "x", "n", &ClaimSet::new()).unwrap().claims.get_str("sub"), Some(p.subject_for("alice", "x").as_str()));
}

fn json_value() -> impl Strategy<Value = serde_json::Value> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(serde_json::Value::from),
        any::<i32>().prop_map(serde_json::Value::from),
        "[ -~]{0,12}".prop_map(serde_json::Value::from),
        Just(serde_json::Value::Null),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 0..3).prop_map(serde_json::Value::from),
            proptest::collection::btree_map("[a-z\"]{1,4}", inner, 0..3)
                .prop_map(|m| serde_json::Value::Object(m.into_iter().collect())),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn b64url_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..200)) {
        let s = b64url_encode(&bytes);
        prop_assert!(s.bytes().all(|c| c.is_ascii_alphanumeric() || c == b'-' || c == b'_'));
        prop_assert_eq!(b64url_decode(&s).unwrap(), bytes);
    }

    #[test]
    fn claim_span_matches_serde(
        members in proptest::collection::btree_map("[a-z\"]{1,5}", json_value(), 1..6),
        ws in proptest::collection::vec(prop_oneof![Just(""), Just(" "), Just("\n\t")], 24),
    ) {
        let mut payload = String::from("{");
        for (n, (k, v)) in members.iter().enumerate() {
            let w = |i: usize| ws[(4 * n + i) % ws.len()];
            if n > 0 {
                payload.push(',');
            }
            payload.push_str(&format!("{}{}{}:{}{}{}", w(0), serde_json::to_string(k).unwrap(), w(1), w(2), v, w(3)));
        }
        payload.push('}');
        for (k, v) in &members {
            let span = claim_get_payload(payload.as_bytes(), k).unwrap();
            let token = &payload.as_bytes()[span.i + span.value_start..span.i + span.value_start + span.value_len];
            prop_assert_eq!(&serde_json::from_slice::<serde_json::Value>(token).unwrap(), v);
            let key = serde_json::to_string(k).unwrap();
            prop_assert_eq!(&payload.as_bytes()[span.i..span.i + key.len()], key.as_bytes());
            let delim = payload.as_bytes()[span.i + span.l - 1];
            prop_assert!(delim == b',' || delim == b'}', "delimiter {}", delim);
        }
    }
}
