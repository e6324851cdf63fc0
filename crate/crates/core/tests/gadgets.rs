use base64::Engine;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use zklogin_core::csys::{ConstraintSystem, CsError, Lc, Mode};
use zklogin_core::fieldcore::{sponge, Fe};
use zklogin_core::gadgets::basic::{to_bits_canonical, ByteVar};
use zklogin_core::gadgets::json::{g_json_claim, g_top_level, ClaimSpec, ValueKind};
use zklogin_core::gadgets::sha256::alloc_message;
use zklogin_core::gadgets::{g_base64url_decode, g_sha256, g_slice_naive, g_slice_packed, g_sponge_hash, BigNatVar};

fn full() -> ConstraintSystem {
    ConstraintSystem::new(Mode::Full)
}

fn sha_in_circuit(data: &[u8], max_len: usize) -> ([u8; 32], ConstraintSystem) {
    let mut cs = full();
    let msg = alloc_message(&mut cs, data, max_len).unwrap();
    let len = cs.alloc_witness(Fe::from_u64(data.len() as u64));
    let d = g_sha256(&mut cs, &msg, &len.into()).unwrap();
    (d.bytes(), cs)
}

#[test]
fn sha256_known_vectors() {
    for data in [&b""[..], b"abc", b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq"] {
        let (d, cs) = sha_in_circuit(data, 64);
        assert_eq!(d[..], Sha256::digest(data)[..]);
        cs.check_self().unwrap();
    }
}

#[test]
fn sha256_block_boundaries() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for len in [0usize, 1, 54, 55, 56, 57, 63, 64, 65, 119, 120, 127, 128] {
        let data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let (d, cs) = sha_in_circuit(&data, 128);
        assert_eq!(d[..], Sha256::digest(&data)[..], "len {len}");
        cs.check_self().unwrap();
    }
}

#[test]
fn sha256_byte_past_length_must_be_zero() {
    let mut cs = full();
    let mut data = b"hello".to_vec();
    data.push(b'x');
    let msg = alloc_message(&mut cs, &data, 32).unwrap();
    let len = cs.alloc_witness(Fe::from_u64(5));
    cs.region("sha256", |cs| g_sha256(cs, &msg, &len.into())).unwrap();
    match cs.check_self() {
        Err(CsError::Violation { region, .. }) => assert!(region.starts_with("sha256"), "{region}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sha256_mutated_witness_is_caught_in_region() {
    let mut cs = full();
    let msg = alloc_message(&mut cs, b"abc", 16).unwrap();
    let len = cs.alloc_witness(Fe::from_u64(3));
    cs.region("sha256", |cs| g_sha256(cs, &msg, &len.into())).unwrap();
    let mut z = cs.assignment();
    let k = z.witness.len() / 2;
    z.witness[k] += Fe::ONE;
    match cs.satisfied(&z) {
        Err(CsError::Violation { region, .. }) => assert!(region.starts_with("sha256")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn base64_rfc_vectors() {
    for (enc, dec) in [("", ""), ("Zg", "f"), ("Zm8", "fo"), ("Zm9v", "foo"), ("Zm9vYg", "foob"), ("Zm9vYmE", "fooba"), ("Zm9vYmFy", "foobar")] {
        let mut cs = full();
        let mut chars: Vec<ByteVar> = enc.bytes().map(|b| ByteVar::alloc(&mut cs, b, 8).unwrap()).collect();
        while !chars.len().is_multiple_of(4) {
            chars.push(ByteVar::constant(0));
        }
        let out = g_base64url_decode(&mut cs, &chars).unwrap();
        let bytes: Vec<u8> = out.iter().map(|b| b.val).collect();
        assert_eq!(&bytes[..dec.len()], dec.as_bytes());
        assert!(bytes[dec.len()..].iter().all(|&b| b == 0));
        cs.check_self().unwrap();
    }
}

#[test]
fn base64_illegal_character_violates() {
    for bad in [b'!', b'+', b'/', b'=', b'.', 0x7f] {
        let mut cs = full();
        let chars: Vec<ByteVar> = [b'Z', bad, b'9', b'v'].iter().map(|&b| ByteVar::alloc(&mut cs, b, 8).unwrap()).collect();
        g_base64url_decode(&mut cs, &chars).unwrap();
        assert!(cs.check_self().is_err(), "accepted {bad:#x}");
    }
}

#[test]
fn base64_matches_reference_on_random_inputs() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    for _ in 0..200 {
        let len = rng.gen_range(0..40);
        let data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
        let enc = base64::engine::general_purpose::URL_SAFE_NO_PAD.encode(&data);
        let mut cs = full();
        let mut chars: Vec<ByteVar> = enc.bytes().map(|b| ByteVar::alloc(&mut cs, b, 8).unwrap()).collect();
        while !chars.len().is_multiple_of(4) {
            chars.push(ByteVar::constant(0));
        }
        let out = g_base64url_decode(&mut cs, &chars).unwrap();
        let bytes: Vec<u8> = out.iter().map(|b| b.val).collect();
        assert_eq!(&bytes[..data.len()], &data[..]);
        cs.check_self().unwrap();
    }
}

#[test]
fn base64_cost_per_character_in_budget() {
    let mut cs = ConstraintSystem::new(Mode::Setup);
    let chars: Vec<ByteVar> = (0..400).map(|_| ByteVar::from_var(cs.alloc_witness(Fe::ZERO), 0)).collect();
    g_base64url_decode(&mut cs, &chars).unwrap();
    let per = cs.num_constraints() as f64 / 400.0;
    assert!((40.0..=100.0).contains(&per), "{per}");
}

fn slice_both(s: &[u8], i: usize, m: usize) -> (Vec<u8>, Vec<u8>, bool, bool) {
    let run = |packed: bool| {
        let mut cs = full();
        let sv: Vec<ByteVar> = s.iter().map(|&b| ByteVar::alloc(&mut cs, b, 8).unwrap()).collect();
        let iv = cs.alloc_witness(Fe::from_u64(i as u64));
        let out = if packed {
            g_slice_packed(&mut cs, &sv, &iv.into(), m).unwrap()
        } else {
            g_slice_naive(&mut cs, &sv, &iv.into(), m).unwrap()
        };
        let vals: Vec<u8> = out.iter().map(|b| cs.eval(&b.value).low_u64() as u8).collect();
        (vals, cs.check_self().is_ok())
    };
    let (a, oka) = run(false);
    let (b, okb) = run(true);
    (a, b, oka, okb)
}

#[test]
fn slice_packed_matches_naive_exhaustively_small() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let s: Vec<u8> = (0..64).map(|_| rng.gen()).collect();
    for n in [1usize, 17, 33, 64] {
        for m in 1..=n {
            for i in 0..=(n - m) {
                let (a, b, oka, okb) = slice_both(&s[..n], i, m);
                assert!(oka && okb, "n={n} m={m} i={i}");
                assert_eq!(a, &s[i..i + m]);
                assert_eq!(b, &s[i..i + m], "n={n} m={m} i={i}");
            }
        }
    }
}

#[test]
fn slice_rejects_out_of_range_offset() {
    let s: Vec<u8> = (0..48).collect();
    for i in [40usize, 47, 60] {
        let (_, _, oka, okb) = slice_both(&s, i, 10);
        assert!(!oka && !okb, "i={i}");
    }
}

#[test]
fn slice_small_example() {
    let payload = br#"{"sub":"123","iss":"google.com","aud":"4074087"}"#;
    let (a, b, oka, okb) = slice_both(payload, 1, 12);
    assert!(oka && okb);
    assert_eq!(a, br#""sub":"123","#);
    assert_eq!(b, br#""sub":"123","#);
}

fn slice_cost(n: usize, m: usize, packed: bool) -> usize {
    let mut cs = ConstraintSystem::new(Mode::Setup);
    let s: Vec<ByteVar> = (0..n).map(|_| ByteVar::from_var(cs.alloc_witness(Fe::ZERO), 0)).collect();
    let i = cs.alloc_witness(Fe::ZERO);
    let before = cs.num_constraints();
    if packed {
        g_slice_packed(&mut cs, &s, &i.into(), m).unwrap();
    } else {
        g_slice_naive(&mut cs, &s, &i.into(), m).unwrap();
    }
    cs.num_constraints() - before
}

#[test]
fn slice_packed_is_cheaper() {
    let naive = slice_cost(1600, 100, false);
    let packed = slice_cost(1600, 100, true);
    assert!(packed * 3 < naive, "packed {packed} naive {naive}");
}

#[test]
fn sponge_matches_native() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for arity in [0usize, 1, 2, 3, 4, 7, 12] {
        let inputs: Vec<Fe> = (0..arity).map(|_| Fe::from_le_bytes_mod_order(&rng.gen::<[u8; 32]>())).collect();
        let mut cs = full();
        let vars: Vec<Lc> = inputs.iter().map(|x| cs.alloc_witness(*x).into()).collect();
        let out = g_sponge_hash(&mut cs, &vars, sponge::domain::ADDRESS).unwrap();
        assert_eq!(cs.eval(&out), sponge::hash(&inputs, sponge::domain::ADDRESS));
        cs.check_self().unwrap();
    }
}

#[test]
fn canonical_bits_reject_aliases() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let x = Fe::from_le_bytes_mod_order(&rng.gen::<[u8; 32]>());
    let mut cs = full();
    let v = cs.alloc_witness(x);
    let bits = to_bits_canonical(&mut cs, &v.into()).unwrap();
    cs.check_self().unwrap();
    for (i, b) in bits.iter().enumerate() {
        assert_eq!(b.value(), x.bit(i));
    }
    // x = 0 has the alias p, which fits in 254 bits; force it
    let mut cs = full();
    let v = cs.alloc_witness(Fe::ZERO);
    let bits = to_bits_canonical(&mut cs, &v.into()).unwrap();
    let mut z = cs.assignment();
    let p = zklogin_core::fieldcore::MODULUS;
    // overwrite the 254 bit witnesses (allocated right after v) with p's bits
    for i in 0..254 {
        let bit = (p[i / 64] >> (i % 64)) & 1;
        let idx = match bits[i] {
            zklogin_core::gadgets::Bit::Is(var, _) => var.index(),
            _ => unreachable!(),
        };
        z.witness[idx] = Fe::from_u64(bit);
    }
    assert!(cs.satisfied(&z).is_err());
}

fn claim_check(payload: &[u8], spec: &ClaimSpec, i: usize, l: usize, j: usize) -> (Result<(), CsError>, Vec<u8>) {
    let mut cs = full();
    let s: Vec<ByteVar> = payload.iter().map(|&b| ByteVar::alloc(&mut cs, b, 8).unwrap()).collect();
    let iv = cs.alloc_witness(Fe::from_u64(i as u64));
    let lv = cs.alloc_witness(Fe::from_u64(l as u64));
    let jv = cs.alloc_witness(Fe::from_u64(j as u64));
    let claim = cs
        .region("parse", |cs| {
            let c = g_json_claim(cs, &s, spec, &iv.into(), &lv.into(), &jv.into())?;
            cs.region("top_level", |cs| g_top_level(cs, &s, &iv.into()))?;
            Ok::<_, CsError>(c)
        })
        .unwrap();
    let len = cs.eval(&claim.value_len).to_u64().unwrap_or(0) as usize;
    let value = claim.value_bytes()[..len.min(claim.value.len())].to_vec();
    (cs.check_self(), value)
}

#[test]
fn json_claim_basic_span() {
    let payload = br#"{"sub":"123","iss":"google.com","aud":"4074087"}"#;
    let (r, v) = claim_check(payload, &ClaimSpec::string("sub", 16), 1, 12, 5);
    r.unwrap();
    assert_eq!(v, b"123");
    let (r, v) = claim_check(payload, &ClaimSpec::string("aud", 16), 32, 16, 5);
    r.unwrap();
    assert_eq!(v, b"4074087");
}

#[test]
fn json_claim_boolean() {
    let payload = br#"{"email":"a@b.c","email_verified":true,"x":1}"#;
    let i = 17;
    let (r, v) = claim_check(payload, &ClaimSpec::boolean("email_verified"), i, 22, 16);
    r.unwrap();
    assert_eq!(v, b"true");
    let payload = br#"{"email_verified":false}"#;
    let (r, v) = claim_check(payload, &ClaimSpec::boolean("email_verified"), 1, 23, 16);
    r.unwrap();
    assert_eq!(v, b"false");
    assert_eq!(ClaimSpec::boolean("x").kind, ValueKind::Boolean);
}

#[test]
fn json_claim_whitespace_tolerated() {
    let payload = b"{\"sub\" :  \"12\"\t,\"a\":1}";
    // key at 1, colon at offset 6, delimiter at index 15
    let (r, v) = claim_check(payload, &ClaimSpec::string("sub", 8), 1, 15, 6);
    r.unwrap();
    assert_eq!(v, b"12");
}

#[test]
fn json_claim_over_extension_rejected() {
    let payload = br#"{"sub":"1320606","aud":"mywallet","iss":"x"}"#;
    let honest_l = br#""sub":"1320606","#.len();
    claim_check(payload, &ClaimSpec::string("sub", 40), 1, honest_l, 5).0.unwrap();
    let extended = br#""sub":"1320606","aud":"mywallet","#.len();
    match claim_check(payload, &ClaimSpec::string("sub", 40), 1, extended, 5).0 {
        Err(CsError::Violation { region, .. }) => assert_eq!(region, "parse/string"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn json_claim_escaped_quote_in_value_accepted() {
    let payload = br#"{"name":"a\"b","sub":"1"}"#;
    let (r, v) = claim_check(payload, &ClaimSpec::string("name", 16), 1, 14, 6);
    r.unwrap();
    assert_eq!(v, br#"a\"b"#);
}

#[test]
fn json_top_level_rejects_nested() {
    let payload = br#"{"a":{"sub":"9"},"sub":"1"}"#;
    let (r, _) = claim_check(payload, &ClaimSpec::string("sub", 8), 6, 10, 5);
    match r {
        Err(CsError::Violation { region, .. }) => assert_eq!(region, "parse/top_level"),
        other => panic!("{other:?}"),
    }
    claim_check(payload, &ClaimSpec::string("sub", 8), 17, 10, 5).0.unwrap();
}

#[test]
fn json_claim_escaped_quote_key_attack() {
    // the key "\"sub" contains the bytes "sub" after an escaped quote
    let payload = br#"{"sub":"383","\"sub":"382","aud":"x"}"#;
    let fake = 15; // points at the escaped quote character
    assert_eq!(&payload[fake..fake + 5], br#""sub""#);
    let (r, v) = claim_check(payload, &ClaimSpec::string("sub", 8), fake, 12, 5);
    assert_eq!(v, b"382");
    match r {
        Err(CsError::Violation { region, .. }) => assert_eq!(region, "parse/top_level"),
        other => panic!("{other:?}"),
    }
}

fn limbs_of(x: &num_bigint::BigUint, k: usize) -> Vec<u64> {
    let mut v = x.to_u64_digits();
    v.resize(k, 0);
    v
}

fn modmul_circuit(a: &num_bigint::BigUint, b: &num_bigint::BigUint, m: &num_bigint::BigUint, k: usize) -> (num_bigint::BigUint, bool) {
    use zklogin_core::gadgets::rsa::modmul;
    let mut cs = full();
    let (av, bv, mv) = (
        BigNatVar::alloc(&mut cs, &limbs_of(a, k)).unwrap(),
        BigNatVar::alloc(&mut cs, &limbs_of(b, k)).unwrap(),
        BigNatVar::alloc(&mut cs, &limbs_of(m, k)).unwrap(),
    );
    let r = modmul(&mut cs, &av, &bv, &mv).unwrap();
    (r.value().to_biguint(), cs.check_self().is_ok())
}

#[test]
fn modmul_matches_bigint() {
    let mut rng = ChaCha20Rng::seed_from_u64(21);
    for k in [2usize, 4, 16] {
        for _ in 0..10 {
            let rand_big = |rng: &mut ChaCha20Rng| {
                num_bigint::BigUint::from_bytes_le(&(0..8 * k).map(|_| rng.gen()).collect::<Vec<u8>>())
            };
            let m = rand_big(&mut rng) | num_bigint::BigUint::from(1u32) << (64 * k - 1) | num_bigint::BigUint::from(1u32);
            let (a, b) = (rand_big(&mut rng) % &m, rand_big(&mut rng) % &m);
            let (r, ok) = modmul_circuit(&a, &b, &m, k);
            assert!(ok);
            assert_eq!(r, (&a * &b) % &m);
        }
    }
}

#[test]
fn less_than_check_is_exact() {
    use zklogin_core::gadgets::rsa::enforce_less_than;
    let mut rng = ChaCha20Rng::seed_from_u64(22);
    let k = 4;
    for _ in 0..40 {
        let m = num_bigint::BigUint::from_bytes_le(&(0..8 * k).map(|_| rng.gen()).collect::<Vec<u8>>())
            | num_bigint::BigUint::from(1u32) << (64 * k - 1);
        let near = |d: i64| if d >= 0 { &m + d as u64 } else { &m - (-d) as u64 };
        let small: num_bigint::BigUint = num_bigint::BigUint::from_bytes_le(&(0..8 * k).map(|_| rng.gen()).collect::<Vec<u8>>()) % &m;
        for a in [near(-1), near(0), near(1), small.clone(), num_bigint::BigUint::from(0u32), &m + &small] {
            if a.bits() > 64 * k as u64 {
                continue;
            }
            let mut cs = full();
            let av = BigNatVar::alloc(&mut cs, &limbs_of(&a, k)).unwrap();
            let mv = BigNatVar::alloc(&mut cs, &limbs_of(&m, k)).unwrap();
            cs.region("lt", |cs| enforce_less_than(cs, &av, &mv)).unwrap();
            assert_eq!(cs.check_self().is_ok(), a < m, "{a} vs {m}");
        }
    }
}
