use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use super::FieldError;

/// BN254 scalar field modulus, little-endian limbs.
pub const MODULUS: [u64; 4] = [
    0x43e1f593f0000001,
    0x2833e84879b97091,
    0xb85045b68181585d,
    0x30644e72e131a029,
];

/// Decimal form of the modulus.
pub const MODULUS_DEC: &str =
    "21888242871839275222246405745257275088548364400416034343698204186575808495617";

const INV: u64 = 0xc2e1f593efffffff;

// 2^256 mod p
const R: [u64; 4] = [
    0xac96341c4ffffffb,
    0x36fc76959f60cd29,
    0x666ea36f7879462e,
    0x0e0a77c19a07df2f,
];

// 2^512 mod p
const R2: [u64; 4] = [
    0x1bb8e645ae216da7,
    0x53fe3ab1e35c59e3,
    0x8c49833d53bb8085,
    0x0216d0b17f4e44a5,
];

/// An element of the BN254 scalar field, kept in Montgomery form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Fe([u64; 4]);

#[inline(always)]
fn mac(a: u64, b: u64, c: u64, carry: u64) -> (u64, u64) {
    let t = (a as u128) + (b as u128) * (c as u128) + (carry as u128);
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn adc(a: u64, b: u64, carry: u64) -> (u64, u64) {
    let t = (a as u128) + (b as u128) + (carry as u128);
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn sbb(a: u64, b: u64, borrow: u64) -> (u64, u64) {
    let t = (a as u128).wrapping_sub((b as u128) + ((borrow >> 63) as u128));
    (t as u64, (t >> 64) as u64)
}

#[inline(always)]
fn geq_modulus(a: &[u64; 4]) -> bool {
    for i in (0..4).rev() {
        if a[i] != MODULUS[i] {
            return a[i] > MODULUS[i];
        }
    }
    true
}

#[inline(always)]
fn sub_modulus(a: &[u64; 4]) -> [u64; 4] {
    let (r0, b) = sbb(a[0], MODULUS[0], 0);
    let (r1, b) = sbb(a[1], MODULUS[1], b);
    let (r2, b) = sbb(a[2], MODULUS[2], b);
    let (r3, _) = sbb(a[3], MODULUS[3], b);
    [r0, r1, r2, r3]
}

#[inline(always)]
fn mont_mul(a: &[u64; 4], b: &[u64; 4]) -> [u64; 4] {
    let mut t = [0u64; 6];
    for i in 0..4 {
        let mut c = 0u64;
        for j in 0..4 {
            let (lo, hi) = mac(t[j], a[j], b[i], c);
            t[j] = lo;
            c = hi;
        }
        let (s, c2) = adc(t[4], c, 0);
        t[4] = s;
        t[5] = c2;

        let m = t[0].wrapping_mul(INV);
        let (_, mut c) = mac(t[0], m, MODULUS[0], 0);
        for j in 1..4 {
            let (lo, hi) = mac(t[j], m, MODULUS[j], c);
            t[j - 1] = lo;
            c = hi;
        }
        let (s, c2) = adc(t[4], c, 0);
        t[3] = s;
        t[4] = t[5] + c2;
    }
    let r = [t[0], t[1], t[2], t[3]];
    if t[4] != 0 || geq_modulus(&r) {
        sub_modulus(&r)
    } else {
        r
    }
}

impl Fe {
    pub const ZERO: Fe = Fe([0; 4]);
    pub const ONE: Fe = Fe(R);

    pub fn zero() -> Self {
        Self::ZERO
    }

    pub fn one() -> Self {
        Self::ONE
    }

    fn from_canonical_limbs(limbs: [u64; 4]) -> Self {
        Fe(mont_mul(&limbs, &R2))
    }

    /// Canonical little-endian limbs of the integer value.
    pub fn to_canonical_limbs(&self) -> [u64; 4] {
        mont_mul(&self.0, &[1, 0, 0, 0])
    }

    pub fn from_u64(v: u64) -> Self {
        Self::from_canonical_limbs([v, 0, 0, 0])
    }

    pub fn from_u128(v: u128) -> Self {
        Self::from_canonical_limbs([v as u64, (v >> 64) as u64, 0, 0])
    }

    pub fn from_i64(v: i64) -> Self {
        if v < 0 {
            -Self::from_u64(v.unsigned_abs())
        } else {
            Self::from_u64(v as u64)
        }
    }

    pub fn from_bool(b: bool) -> Self {
        if b {
            Self::ONE
        } else {
            Self::ZERO
        }
    }

    /// Strict decoding of 32 little-endian bytes; values ≥ p are rejected.
    pub fn from_le_bytes(bytes: &[u8; 32]) -> Result<Self, FieldError> {
        let mut limbs = [0u64; 4];
        for (i, chunk) in bytes.chunks_exact(8).enumerate() {
            limbs[i] = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        if geq_modulus(&limbs) {
            return Err(FieldError::NonCanonical);
        }
        Ok(Self::from_canonical_limbs(limbs))
    }

    /// Interprets arbitrary little-endian bytes as an integer and reduces it mod p.
    pub fn from_le_bytes_mod_order(bytes: &[u8]) -> Self {
        let base = Self::from_u128(1u128 << 64).square();
        let mut acc = Self::ZERO;
        let chunks: Vec<&[u8]> = bytes.chunks(16).collect();
        for chunk in chunks.into_iter().rev() {
            let mut buf = [0u8; 16];
            buf[..chunk.len()].copy_from_slice(chunk);
            acc = acc * base + Self::from_u128(u128::from_le_bytes(buf));
        }
        acc
    }

    /// Big-endian counterpart of [`Fe::from_le_bytes_mod_order`].
    pub fn from_be_bytes_mod_order(bytes: &[u8]) -> Self {
        let mut rev = bytes.to_vec();
        rev.reverse();
        Self::from_le_bytes_mod_order(&rev)
    }

    pub fn to_le_bytes(&self) -> [u8; 32] {
        let limbs = self.to_canonical_limbs();
        let mut out = [0u8; 32];
        for (i, l) in limbs.iter().enumerate() {
            out[8 * i..8 * i + 8].copy_from_slice(&l.to_le_bytes());
        }
        out
    }

    pub fn to_be_bytes(&self) -> [u8; 32] {
        let mut b = self.to_le_bytes();
        b.reverse();
        b
    }

    /// Returns the value if it fits in a u64.
    pub fn to_u64(&self) -> Option<u64> {
        let l = self.to_canonical_limbs();
        if l[1] == 0 && l[2] == 0 && l[3] == 0 {
            Some(l[0])
        } else {
            None
        }
    }

    /// Low 64 bits of the canonical value.
    pub fn low_u64(&self) -> u64 {
        self.to_canonical_limbs()[0]
    }

    /// Bit `i` (little-endian) of the canonical value.
    pub fn bit(&self, i: usize) -> bool {
        let l = self.to_canonical_limbs();
        i < 256 && (l[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn is_one(&self) -> bool {
        self.0 == R
    }

    pub fn double(&self) -> Self {
        *self + *self
    }

    pub fn square(&self) -> Self {
        Fe(mont_mul(&self.0, &self.0))
    }

    pub fn pow(&self, exp: &[u64]) -> Self {
        let mut acc = Self::ONE;
        for limb in exp.iter().rev() {
            for i in (0..64).rev() {
                acc = acc.square();
                if (limb >> i) & 1 == 1 {
                    acc *= *self;
                }
            }
        }
        acc
    }

    pub fn pow_u64(&self, exp: u64) -> Self {
        self.pow(&[exp])
    }

    pub fn inverse(&self) -> Result<Self, FieldError> {
        if self.is_zero() {
            return Err(FieldError::InverseOfZero);
        }
        let mut e = MODULUS;
        e[0] -= 2;
        Ok(self.pow(&e))
    }

    /// Inverse, or zero for zero. Handy for witness generation.
    pub fn inverse_or_zero(&self) -> Self {
        self.inverse().unwrap_or(Self::ZERO)
    }

    pub fn to_biguint(&self) -> num_bigint::BigUint {
        num_bigint::BigUint::from_bytes_le(&self.to_le_bytes())
    }

    pub fn from_biguint(v: &num_bigint::BigUint) -> Self {
        Self::from_le_bytes_mod_order(&v.to_bytes_le())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_le_bytes())
    }

    pub fn from_hex(s: &str) -> Result<Self, FieldError> {
        let bytes = hex::decode(s).map_err(|_| FieldError::BadEncoding)?;
        let arr: [u8; 32] = bytes.try_into().map_err(|_| FieldError::BadEncoding)?;
        Self::from_le_bytes(&arr)
    }
}

impl fmt::Debug for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_u64() {
            Some(v) => write!(f, "Fe({v})"),
            None => {
                let neg = -*self;
                match neg.to_u64() {
                    Some(v) => write!(f, "Fe(-{v})"),
                    None => write!(f, "Fe(0x{})", hex::encode(self.to_be_bytes())),
                }
            }
        }
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_biguint())
    }
}

impl Add for Fe {
    type Output = Fe;
    #[inline(always)]
    fn add(self, rhs: Fe) -> Fe {
        let a = &self.0;
        let b = &rhs.0;
        let (r0, c) = adc(a[0], b[0], 0);
        let (r1, c) = adc(a[1], b[1], c);
        let (r2, c) = adc(a[2], b[2], c);
        let (r3, _) = adc(a[3], b[3], c);
        let r = [r0, r1, r2, r3];
        if geq_modulus(&r) {
            Fe(sub_modulus(&r))
        } else {
            Fe(r)
        }
    }
}

impl Sub for Fe {
    type Output = Fe;
    #[inline(always)]
    fn sub(self, rhs: Fe) -> Fe {
        let a = &self.0;
        let b = &rhs.0;
        let (r0, br) = sbb(a[0], b[0], 0);
        let (r1, br) = sbb(a[1], b[1], br);
        let (r2, br) = sbb(a[2], b[2], br);
        let (r3, br) = sbb(a[3], b[3], br);
        if br != 0 {
            let (s0, c) = adc(r0, MODULUS[0], 0);
            let (s1, c) = adc(r1, MODULUS[1], c);
            let (s2, c) = adc(r2, MODULUS[2], c);
            let (s3, _) = adc(r3, MODULUS[3], c);
            Fe([s0, s1, s2, s3])
        } else {
            Fe([r0, r1, r2, r3])
        }
    }
}

impl Neg for Fe {
    type Output = Fe;
    fn neg(self) -> Fe {
        Fe::ZERO - self
    }
}

impl Mul for Fe {
    type Output = Fe;
    #[inline(always)]
    fn mul(self, rhs: Fe) -> Fe {
        Fe(mont_mul(&self.0, &rhs.0))
    }
}

impl AddAssign for Fe {
    fn add_assign(&mut self, rhs: Fe) {
        *self = *self + rhs;
    }
}

impl SubAssign for Fe {
    fn sub_assign(&mut self, rhs: Fe) {
        *self = *self - rhs;
    }
}

impl MulAssign for Fe {
    fn mul_assign(&mut self, rhs: Fe) {
        *self = *self * rhs;
    }
}

impl From<u64> for Fe {
    fn from(v: u64) -> Self {
        Fe::from_u64(v)
    }
}

impl From<bool> for Fe {
    fn from(b: bool) -> Self {
        Fe::from_bool(b)
    }
}

impl std::iter::Sum for Fe {
    fn sum<I: Iterator<Item = Fe>>(iter: I) -> Fe {
        iter.fold(Fe::ZERO, |a, b| a + b)
    }
}

/// Serialized as the 32-byte little-endian encoding in hex.
impl serde::Serialize for Fe {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> serde::Deserialize<'de> for Fe {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = <std::borrow::Cow<'de, str>>::deserialize(d)?;
        Fe::from_hex(&s).map_err(serde::de::Error::custom)
    }
}
