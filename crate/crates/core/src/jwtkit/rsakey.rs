//! RSA keys for the mock provider: generation, PKCS#1 v1.5 / SHA-256 signing and verification.

use std::sync::OnceLock;

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::RngCore;
use sha2::{Digest, Sha256};

use crate::fieldcore::BigUint2048;
use crate::gadgets::rsa::pkcs1_em;

pub const E: u64 = 65537;
const MR_ROUNDS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RsaPublicKey {
    pub n: BigUint,
}

#[derive(Clone)]
pub struct RsaPrivateKey {
    pub public: RsaPublicKey,
    d: BigUint,
    p: BigUint,
    q: BigUint,
    dp: BigUint,
    dq: BigUint,
    qinv: BigUint,
}

impl std::fmt::Debug for RsaPrivateKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RsaPrivateKey").field("bits", &self.public.bits()).finish_non_exhaustive()
    }
}

fn small_primes() -> &'static [u32] {
    static P: OnceLock<Vec<u32>> = OnceLock::new();
    P.get_or_init(|| {
        let n = 4096usize;
        let mut sieve = vec![true; n];
        let mut out = Vec::new();
        for i in 2..n {
            if sieve[i] {
                out.push(i as u32);
                let mut k = i * i;
                while k < n {
                    sieve[k] = false;
                    k += i;
                }
            }
        }
        out
    })
}

pub fn is_probable_prime(n: &BigUint, rounds: usize, rng: &mut impl RngCore) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in small_primes() {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gen_prime(bits: u64, rng: &mut impl RngCore) -> BigUint {
    let e = BigUint::from(E);
    loop {
        let mut c = rng.gen_biguint(bits);
        c.set_bit(bits - 1, true);
        c.set_bit(bits - 2, true);
        c.set_bit(0, true);
        if !(&c - 1u32).gcd(&e).is_one() {
            continue;
        }
        // one cheap round first, the full count only for survivors
        if is_probable_prime(&c, 1, rng) && is_probable_prime(&c, MR_ROUNDS, rng) {
            return c;
        }
    }
}

impl RsaPublicKey {
    pub fn bits(&self) -> u64 {
        self.n.bits()
    }

    /// Modulus length in bytes.
    pub fn size(&self) -> usize {
        self.n.bits().div_ceil(8) as usize
    }

    pub fn modulus(&self) -> BigUint2048 {
        BigUint2048::from_biguint(&self.n).expect("modulus fits in 2048 bits")
    }

    /// Little-endian 64-bit limbs, `k` of them.
    pub fn limbs(&self, k: usize) -> Vec<u64> {
        let mut v = self.n.to_u64_digits();
        v.resize(k, 0);
        v
    }

    /// Checks an RS256 signature over `msg`.
    pub fn verify(&self, msg: &[u8], sig: &[u8]) -> bool {
        let k = self.size();
        if sig.len() != k || k < 62 {
            return false;
        }
        let s = BigUint::from_bytes_be(sig);
        if s >= self.n {
            return false;
        }
        let m = s.modpow(&BigUint::from(E), &self.n);
        let digest: [u8; 32] = Sha256::digest(msg).into();
        let em = BigUint::from_bytes_be(&pkcs1_em(&digest, k));
        m == em
    }
}

impl RsaPrivateKey {
    pub fn generate(bits: u64, rng: &mut impl RngCore) -> Self {
        assert!(bits >= 512 && bits.is_multiple_of(2) && bits <= 2048, "unsupported RSA size");
        loop {
            let p = gen_prime(bits / 2, rng);
            let q = gen_prime(bits / 2, rng);
            if p == q {
                continue;
            }
            let n = &p * &q;
            if n.bits() != bits {
                continue;
            }
            let (p, q) = if p > q { (p, q) } else { (q, p) };
            let phi = (&p - 1u32) * (&q - 1u32);
            let e = BigUint::from(E);
            let Some(d) = e.modinv(&phi) else { continue };
            let dp = &d % (&p - 1u32);
            let dq = &d % (&q - 1u32);
            let Some(qinv) = q.modinv(&p) else { continue };
            return RsaPrivateKey { public: RsaPublicKey { n }, d, p, q, dp, dq, qinv };
        }
    }

    pub fn from_components(n: BigUint, d: BigUint, p: BigUint, q: BigUint) -> Option<Self> {
        if &p * &q != n {
            return None;
        }
        let dp = &d % (&p - 1u32);
        let dq = &d % (&q - 1u32);
        let qinv = q.modinv(&p)?;
        Some(RsaPrivateKey { public: RsaPublicKey { n }, d, p, q, dp, dq, qinv })
    }

    pub fn components(&self) -> (&BigUint, &BigUint, &BigUint, &BigUint) {
        (&self.public.n, &self.d, &self.p, &self.q)
    }

    /// RS256 signature, CRT.
    pub fn sign(&self, msg: &[u8]) -> Vec<u8> {
        let k = self.public.size();
        let digest: [u8; 32] = Sha256::digest(msg).into();
        let m = BigUint::from_bytes_be(&pkcs1_em(&digest, k));
        let m1 = m.modpow(&self.dp, &self.p);
        let m2 = m.modpow(&self.dq, &self.q);
        let diff = if m1 >= m2 { m1 - &m2 } else { &self.p - ((m2.clone() - m1) % &self.p) };
        let h = (&self.qinv * diff) % &self.p;
        let s = m2 + h * &self.q;
        let bytes = s.to_bytes_be();
        let mut out = vec![0u8; k - bytes.len()];
        out.extend_from_slice(&bytes);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn sign_verify_roundtrip() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let key = RsaPrivateKey::generate(1024, &mut rng);
        assert_eq!(key.public.bits(), 1024);
        let sig = key.sign(b"hello");
        assert!(key.public.verify(b"hello", &sig));
        assert!(!key.public.verify(b"hellp", &sig));
        let mut bad = sig.clone();
        bad[10] ^= 1;
        assert!(!key.public.verify(b"hello", &bad));
    }

    #[test]
    fn crt_matches_plain_exponent() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let key = RsaPrivateKey::generate(768, &mut rng);
        let sig = BigUint::from_bytes_be(&key.sign(b"x"));
        let digest: [u8; 32] = Sha256::digest(b"x").into();
        let em = BigUint::from_bytes_be(&pkcs1_em(&digest, key.public.size()));
        assert_eq!(sig, em.modpow(&key.d, &key.public.n));
    }

    #[test]
    fn primality() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        assert!(is_probable_prime(&BigUint::from(65537u32), 20, &mut rng));
        assert!(!is_probable_prime(&BigUint::from(561u32), 20, &mut rng));
        // 2^127 − 1
        let m127 = (BigUint::one() << 127) - 1u32;
        assert!(is_probable_prime(&m127, 20, &mut rng));
        assert!(!is_probable_prime(&(&m127 * &m127), 20, &mut rng));
    }
}
