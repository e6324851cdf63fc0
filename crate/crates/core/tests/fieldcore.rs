use num_bigint::BigUint;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use zklogin_core::fieldcore::{
    big_modexp_65537, big_modmul, divrem_limbs, mul_limbs, sponge, BigUint2048, Fe, FieldError, MODULUS_DEC,
};

const BN254_R: &str = "21888242871839275222246405745257275088548364400416034343698204186575808495617";

fn p() -> BigUint {
    BN254_R.parse().unwrap()
}

fn big(x: Fe) -> BigUint {
    BigUint::from_bytes_le(&x.to_le_bytes())
}

fn fe(x: &BigUint) -> Fe {
    let mut b = (x % p()).to_bytes_le();
    b.resize(32, 0);
    Fe::from_le_bytes(&b.try_into().unwrap()).unwrap()
}

fn arb_fe() -> impl Strategy<Value = BigUint> {
    prop_oneof![
        any::<[u8; 40]>().prop_map(|b| BigUint::from_bytes_le(&b) % p()),
        (0u64..8).prop_map(BigUint::from),
        (1u64..8).prop_map(|k| p() - k),
    ]
}

#[test]
fn modulus_is_bn254_scalar_field() {
    assert_eq!(MODULUS_DEC, BN254_R);
    assert_eq!(big(-Fe::ONE) + 1u32, p());
}

#[test]
fn random_operations_match_bigint() {
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let p = p();
    let mut ops = 0;
    for _ in 0..2500 {
        let a = BigUint::from_bytes_le(&rng.gen::<[u8; 32]>()) % &p;
        let b = BigUint::from_bytes_le(&rng.gen::<[u8; 32]>()) % &p;
        let (fa, fb) = (fe(&a), fe(&b));
        assert_eq!(big(fa + fb), (&a + &b) % &p);
        assert_eq!(big(fa - fb), (&a + &p - &b) % &p);
        assert_eq!(big(fa * fb), (&a * &b) % &p);
        assert_eq!(big(fa.square()), (&a * &a) % &p);
        ops += 4;
    }
    assert!(ops >= 10_000);
}

#[test]
fn inverse_and_pow() {
    assert_eq!(Fe::ZERO.inverse(), Err(FieldError::InverseOfZero));
    assert_eq!(Fe::ZERO.inverse_or_zero(), Fe::ZERO);
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let p = p();
    for _ in 0..200 {
        let a = BigUint::from_bytes_le(&rng.gen::<[u8; 32]>()) % &p;
        if a.is_zero() {
            continue;
        }
        let inv = fe(&a).inverse().unwrap();
        assert_eq!(big(inv), a.modpow(&(&p - 2u32), &p));
        let e: u64 = rng.gen();
        assert_eq!(big(fe(&a).pow_u64(e)), a.modpow(&BigUint::from(e), &p));
    }
}

#[test]
fn encodings() {
    let mut bytes = p().to_bytes_le();
    bytes.resize(32, 0);
    let arr: [u8; 32] = bytes.try_into().unwrap();
    assert_eq!(Fe::from_le_bytes(&arr), Err(FieldError::NonCanonical));
    assert_eq!(Fe::from_le_bytes_mod_order(&arr), Fe::ZERO);
    assert_eq!(Fe::from_hex("00"), Err(FieldError::BadEncoding));
    assert_eq!(Fe::from_hex(&"zz".repeat(32)), Err(FieldError::BadEncoding));
    assert_eq!(Fe::from_i64(-5) + Fe::from_u64(5), Fe::ZERO);
    assert_eq!(Fe::from_u64(1234).to_u64(), Some(1234));
    assert_eq!((-Fe::ONE).to_u64(), None);
    let v = serde_json::to_value(Fe::from_u64(9)).unwrap();
    assert_eq!(serde_json::from_value::<Fe>(v).unwrap(), Fe::from_u64(9));
}

#[test]
fn bigint_matches_num_bigint() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for _ in 0..300 {
        let la = rng.gen_range(1..=32);
        let lb = rng.gen_range(1..=32);
        let a: Vec<u64> = (0..la).map(|_| rng.gen()).collect();
        let mut b: Vec<u64> = (0..lb).map(|_| rng.gen()).collect();
        if rng.gen_bool(0.3) {
            b.truncate(1);
        }
        if b.iter().all(|&x| x == 0) {
            b[0] = 1;
        }
        let to_big = |v: &[u64]| BigUint::from_slice(&v.iter().flat_map(|x| [*x as u32, (x >> 32) as u32]).collect::<Vec<_>>());
        let (ba, bb) = (to_big(&a), to_big(&b));
        assert_eq!(to_big(&mul_limbs(&a, &b)), &ba * &bb);
        let (q, r) = divrem_limbs(&a, &b);
        assert_eq!(to_big(&q), &ba / &bb);
        assert_eq!(to_big(&r), &ba % &bb);
        assert_eq!(r.len(), b.len());
    }
}

#[test]
fn modexp_matches_num_bigint() {
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    for bits in [64usize, 512, 1024, 2048] {
        for _ in 0..10 {
            let mut m = BigUint::from_bytes_le(&(0..bits / 8).map(|_| rng.gen()).collect::<Vec<u8>>());
            m |= BigUint::one() | (BigUint::one() << (bits - 1));
            let x = BigUint::from_bytes_le(&(0..bits / 8).map(|_| rng.gen()).collect::<Vec<u8>>());
            let y = BigUint::from_bytes_le(&(0..bits / 8).map(|_| rng.gen()).collect::<Vec<u8>>()) % &m;
            let bm = BigUint2048::from_biguint(&m).unwrap();
            let bx = BigUint2048::from_biguint(&x).unwrap();
            let by = BigUint2048::from_biguint(&y).unwrap();
            assert_eq!(big_modexp_65537(&bx, &bm).unwrap().to_biguint(), x.modpow(&BigUint::from(65537u32), &m));
            assert_eq!(big_modmul(&bx, &by, &bm).unwrap().to_biguint(), (&x * &y) % &m);
        }
    }
    assert!(big_modmul(&BigUint2048::one(), &BigUint2048::one(), &BigUint2048::from_u64(10)).is_err());
    assert!(BigUint2048::from_biguint(&(BigUint::one() << 2048)).is_err());
}

#[test]
fn bigint_byte_round_trip_and_order() {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    for _ in 0..100 {
        let a: Vec<u8> = (0..rng.gen_range(0..=256)).map(|_| rng.gen()).collect();
        let b: Vec<u8> = (0..rng.gen_range(0..=256)).map(|_| rng.gen()).collect();
        let (x, y) = (BigUint2048::from_be_bytes(&a).unwrap(), BigUint2048::from_be_bytes(&b).unwrap());
        assert_eq!(x.to_biguint(), BigUint::from_bytes_be(&a));
        assert_eq!(x.cmp(&y), BigUint::from_bytes_be(&a).cmp(&BigUint::from_bytes_be(&b)));
        assert_eq!(x.bits() as u64, BigUint::from_bytes_be(&a).bits());
        assert_eq!(BigUint2048::from_be_bytes(&x.to_be_bytes_len(256)).unwrap(), x);
    }
    assert!(BigUint2048::from_be_bytes(&[1u8; 257]).is_err());
}

#[test]
fn sponge_domains_and_lengths_separate() {
    let xs = [Fe::from_u64(1), Fe::from_u64(2), Fe::from_u64(3)];
    let h = sponge::hash(&xs, sponge::domain::ADDRESS);
    assert_eq!(h, sponge::hash(&xs, sponge::domain::ADDRESS));
    assert_ne!(h, sponge::hash(&xs, sponge::domain::NONCE));
    assert_ne!(sponge::hash(&xs[..2], 1), sponge::hash(&[xs[0], xs[1], Fe::ZERO], 1));
    assert_ne!(sponge::hash(&[], 1), sponge::hash(&[Fe::ZERO], 1));
    assert_eq!(sponge::capacity_init(3, 5), Fe::from_u128((3u128 << 64) | 5));
}

#[test]
fn pack_bytes_layout() {
    assert!(sponge::pack_bytes(&[0; 32], 31).is_none());
    let packed = sponge::pack_bytes(b"ab", 62).unwrap();
    assert_eq!(packed.len(), 3);
    let mut chunk = [0u8; 31];
    chunk[..2].copy_from_slice(b"ab");
    assert_eq!(big(packed[0]), BigUint::from_bytes_be(&chunk));
    assert_eq!(packed[1], Fe::ZERO);
    assert_eq!(packed[2], Fe::from_u64(2));
    // trailing zero bytes change the length element
    assert_ne!(sponge::pack_bytes(b"ab\0", 62).unwrap(), packed);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn field_axioms(a in arb_fe(), b in arb_fe(), c in arb_fe()) {
        let (x, y, z) = (fe(&a), fe(&b), fe(&c));
        prop_assert_eq!(x + y, y + x);
        prop_assert_eq!(x * y, y * x);
        prop_assert_eq!((x + y) * z, x * z + y * z);
        prop_assert_eq!((x * y) * z, x * (y * z));
        prop_assert_eq!(x - x, Fe::ZERO);
        prop_assert_eq!(x + (-x), Fe::ZERO);
        prop_assert_eq!(x.double(), x + x);
        prop_assert_eq!(big(x * y), (&a * &b) % p());
        if !x.is_zero() {
            prop_assert_eq!(x * x.inverse().unwrap(), Fe::ONE);
        }
    }

    #[test]
    fn byte_encodings_round_trip(a in arb_fe(), extra in proptest::collection::vec(any::<u8>(), 0..80)) {
        let x = fe(&a);
        prop_assert_eq!(Fe::from_le_bytes(&x.to_le_bytes()).unwrap(), x);
        prop_assert_eq!(Fe::from_hex(&x.to_hex()).unwrap(), x);
        prop_assert_eq!(Fe::from_be_bytes_mod_order(&x.to_be_bytes()), x);
        prop_assert_eq!(big(Fe::from_le_bytes_mod_order(&extra)), BigUint::from_bytes_le(&extra) % p());
        for i in 0..254 {
            prop_assert_eq!(x.bit(i), a.bit(i as u64));
        }
    }
}
