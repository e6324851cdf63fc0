use std::cmp::Ordering;
use std::fmt;

use super::BigIntError;

pub const LIMBS: usize = 32;

/// Unsigned integer below 2^2048 stored as 32 little-endian 64-bit limbs.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BigUint2048 {
    limbs: [u64; LIMBS],
}

impl Default for BigUint2048 {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for BigUint2048 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let be = self.to_be_bytes();
        let first = be.iter().position(|&b| b != 0).unwrap_or(255);
        write!(f, "BigUint2048(0x{})", hex::encode(&be[first..]))
    }
}

impl BigUint2048 {
    pub const ZERO: BigUint2048 = BigUint2048 { limbs: [0; LIMBS] };

    pub fn one() -> Self {
        Self::from_u64(1)
    }

    pub fn from_u64(v: u64) -> Self {
        let mut limbs = [0; LIMBS];
        limbs[0] = v;
        Self { limbs }
    }

    pub fn from_limbs(limbs: [u64; LIMBS]) -> Self {
        Self { limbs }
    }

    /// Builds from a shorter limb slice; fails if it does not fit.
    pub fn from_limb_slice(limbs: &[u64]) -> Result<Self, BigIntError> {
        let mut out = [0u64; LIMBS];
        for (i, &l) in limbs.iter().enumerate() {
            if i >= LIMBS {
                if l != 0 {
                    return Err(BigIntError::Overflow);
                }
            } else {
                out[i] = l;
            }
        }
        Ok(Self { limbs: out })
    }

    pub fn limbs(&self) -> &[u64; LIMBS] {
        &self.limbs
    }

    pub fn from_be_bytes(bytes: &[u8]) -> Result<Self, BigIntError> {
        let first = bytes.iter().position(|&b| b != 0).unwrap_or(bytes.len());
        let bytes = &bytes[first..];
        if bytes.len() > 8 * LIMBS {
            return Err(BigIntError::Overflow);
        }
        let mut limbs = [0u64; LIMBS];
        for (i, b) in bytes.iter().rev().enumerate() {
            limbs[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        Ok(Self { limbs })
    }

    pub fn from_le_bytes(bytes: &[u8]) -> Result<Self, BigIntError> {
        let mut be = bytes.to_vec();
        be.reverse();
        Self::from_be_bytes(&be)
    }

    pub fn to_be_bytes(&self) -> [u8; 8 * LIMBS] {
        let mut out = [0u8; 8 * LIMBS];
        for (i, l) in self.limbs.iter().enumerate() {
            let start = 8 * LIMBS - 8 * (i + 1);
            out[start..start + 8].copy_from_slice(&l.to_be_bytes());
        }
        out
    }

    pub fn to_le_bytes(&self) -> [u8; 8 * LIMBS] {
        let mut b = self.to_be_bytes();
        b.reverse();
        b
    }

    /// Big-endian bytes padded to `len` (the RSA octet-string form).
    pub fn to_be_bytes_len(&self, len: usize) -> Vec<u8> {
        let full = self.to_be_bytes();
        if len >= full.len() {
            let mut v = vec![0u8; len - full.len()];
            v.extend_from_slice(&full);
            v
        } else {
            full[full.len() - len..].to_vec()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.limbs.iter().all(|&l| l == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.limbs[0] & 1 == 1
    }

    pub fn bits(&self) -> usize {
        for i in (0..LIMBS).rev() {
            if self.limbs[i] != 0 {
                return 64 * i + 64 - self.limbs[i].leading_zeros() as usize;
            }
        }
        0
    }

    pub fn to_biguint(&self) -> num_bigint::BigUint {
        num_bigint::BigUint::from_bytes_le(&self.to_le_bytes())
    }

    pub fn from_biguint(v: &num_bigint::BigUint) -> Result<Self, BigIntError> {
        Self::from_le_bytes(&v.to_bytes_le())
    }
}

impl PartialOrd for BigUint2048 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigUint2048 {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..LIMBS).rev() {
            match self.limbs[i].cmp(&other.limbs[i]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

fn significant(v: &[u64]) -> usize {
    v.iter().rposition(|&x| x != 0).map_or(0, |i| i + 1)
}

/// Schoolbook product of two limb slices.
pub fn mul_limbs(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len()];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        let mut carry = 0u128;
        for (j, &bj) in b.iter().enumerate() {
            let t = (ai as u128) * (bj as u128) + out[i + j] as u128 + carry;
            out[i + j] = t as u64;
            carry = t >> 64;
        }
        let mut k = i + b.len();
        while carry != 0 {
            let t = out[k] as u128 + carry;
            out[k] = t as u64;
            carry = t >> 64;
            k += 1;
        }
    }
    out
}

/// Long division (Knuth algorithm D). Returns (quotient, remainder); the
/// remainder has `v.len()` limbs. Panics on a zero divisor.
pub fn divrem_limbs(u: &[u64], v: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let n = significant(v);
    assert!(n > 0, "division by zero");
    let ulen = significant(u);
    let mut rem = vec![0u64; v.len()];
    if ulen < n {
        rem[..ulen].copy_from_slice(&u[..ulen]);
        return (vec![0], rem);
    }
    if n == 1 {
        let d = v[0] as u128;
        let mut q = vec![0u64; ulen];
        let mut r = 0u128;
        for i in (0..ulen).rev() {
            let cur = (r << 64) | u[i] as u128;
            q[i] = (cur / d) as u64;
            r = cur % d;
        }
        rem[0] = r as u64;
        return (q, rem);
    }

    let s = v[n - 1].leading_zeros();
    let shl = |x: &[u64], out_len: usize| -> Vec<u64> {
        let mut out = vec![0u64; out_len];
        for i in 0..x.len() {
            out[i] |= x[i] << s;
            if s > 0 && i + 1 < out_len {
                out[i + 1] |= x[i] >> (64 - s);
            }
        }
        out
    };
    let vn = shl(&v[..n], n);
    let mut un = shl(&u[..ulen], ulen + 1);
    let mut q = vec![0u64; ulen - n + 1];
    let b = 1u128 << 64;

    for j in (0..=ulen - n).rev() {
        let num = ((un[j + n] as u128) << 64) | un[j + n - 1] as u128;
        let mut qhat = num / vn[n - 1] as u128;
        let mut rhat = num % vn[n - 1] as u128;
        while qhat >= b || qhat * vn[n - 2] as u128 > ((rhat << 64) | un[j + n - 2] as u128) {
            qhat -= 1;
            rhat += vn[n - 1] as u128;
            if rhat >= b {
                break;
            }
        }

        let mut borrow: i128 = 0;
        let mut carry: u128 = 0;
        for i in 0..n {
            let p = qhat * vn[i] as u128 + carry;
            carry = p >> 64;
            let t = un[i + j] as i128 - (p as u64) as i128 + borrow;
            un[i + j] = t as u64;
            borrow = t >> 64;
        }
        let t = un[j + n] as i128 - carry as i128 + borrow;
        un[j + n] = t as u64;

        if t < 0 {
            qhat -= 1;
            let mut c = 0u128;
            for i in 0..n {
                let s2 = un[i + j] as u128 + vn[i] as u128 + c;
                un[i + j] = s2 as u64;
                c = s2 >> 64;
            }
            un[j + n] = un[j + n].wrapping_add(c as u64);
        }
        q[j] = qhat as u64;
    }

    for i in 0..n {
        let lo = un[i] >> s;
        let hi = if s > 0 { un[i + 1] << (64 - s) } else { 0 };
        rem[i] = lo | hi;
    }
    (q, rem)
}

fn check_modulus(m: &BigUint2048) -> Result<(), BigIntError> {
    if !m.is_odd() || m.bits() < 2 {
        return Err(BigIntError::ModulusInvalid);
    }
    Ok(())
}

/// Quotient and remainder of a·b by m, as used by the in-circuit modmul witness.
pub fn mul_divrem(
    a: &BigUint2048,
    b: &BigUint2048,
    m: &BigUint2048,
) -> Result<(Vec<u64>, BigUint2048), BigIntError> {
    if m.is_zero() {
        return Err(BigIntError::ModulusInvalid);
    }
    let prod = mul_limbs(&a.limbs, &b.limbs);
    let (q, r) = divrem_limbs(&prod, &m.limbs);
    Ok((q, BigUint2048::from_limb_slice(&r)?))
}

pub fn big_modmul(
    a: &BigUint2048,
    b: &BigUint2048,
    m: &BigUint2048,
) -> Result<BigUint2048, BigIntError> {
    check_modulus(m)?;
    Ok(mul_divrem(a, b, m)?.1)
}

/// base^65537 mod m with the fixed 16-squarings-then-multiply schedule.
pub fn big_modexp_65537(base: &BigUint2048, m: &BigUint2048) -> Result<BigUint2048, BigIntError> {
    check_modulus(m)?;
    let b = mul_divrem(base, &BigUint2048::one(), m)?.1;
    let mut x = b;
    for _ in 0..16 {
        x = big_modmul(&x, &x, m)?;
    }
    big_modmul(&x, &b, m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_division() {
        let (q, r) = divrem_limbs(&[7, 0], &[2, 0]);
        assert_eq!(q[0], 3);
        assert_eq!(r[0], 1);
    }

    #[test]
    fn modulus_checks() {
        let even = BigUint2048::from_u64(10);
        assert_eq!(
            big_modmul(&BigUint2048::one(), &BigUint2048::one(), &even),
            Err(BigIntError::ModulusInvalid)
        );
        assert_eq!(
            big_modexp_65537(&BigUint2048::one(), &BigUint2048::one()),
            Err(BigIntError::ModulusInvalid)
        );
    }
}
