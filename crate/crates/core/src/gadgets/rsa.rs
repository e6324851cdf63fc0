//! Big-integer limb arithmetic and RS256 (PKCS#1 v1.5, SHA-256) verification.
//!
//! A modular product a·b = q·m + r is checked by (1) evaluating the limb
//! polynomials at 2k−1 points, which pins the coefficient vectors of a·b and
//! q·m exactly, then (2) a signed carry chain over the coefficients.

use std::sync::OnceLock;

use super::basic::{enforce_boolean, range_check, GResult};
use super::sha256::Digest256;
use crate::csys::{ConstraintSystem, Lc, Variable};
use crate::fieldcore::{mul_divrem, BigUint2048, Fe};

pub const LIMB_BITS: usize = 64;
const CARRY_OFFSET_BITS: usize = 70;
const CARRY_RANGE_BITS: usize = 71;

/// SHA-256 DigestInfo prefix.
pub const DIGEST_INFO: [u8; 19] = [
    0x30, 0x31, 0x30, 0x0d, 0x06, 0x09, 0x60, 0x86, 0x48, 0x01, 0x65, 0x03, 0x04, 0x02, 0x01, 0x05,
    0x00, 0x04, 0x20,
];

/// A big natural number as 64-bit limbs (little-endian).
#[derive(Clone, Debug)]
pub struct BigNatVar {
    pub limbs: Vec<Lc>,
    pub values: Vec<u64>,
}

impl BigNatVar {
    pub fn value(&self) -> BigUint2048 {
        BigUint2048::from_limb_slice(&self.values).unwrap_or_default()
    }

    pub fn num_limbs(&self) -> usize {
        self.limbs.len()
    }

    /// Wraps already-allocated limb variables (e.g. public modulus limbs).
    pub fn from_vars(vars: &[Variable], values: &[u64]) -> Self {
        BigNatVar { limbs: vars.iter().map(|v| Lc::from(*v)).collect(), values: values.to_vec() }
    }

    /// Allocates witness limbs, each range-checked to 64 bits.
    pub fn alloc(cs: &mut ConstraintSystem, values: &[u64]) -> GResult<Self> {
        let mut limbs = Vec::with_capacity(values.len());
        for &v in values {
            let var = cs.alloc_witness(Fe::from_u64(v));
            range_check(cs, &var.into(), LIMB_BITS)?;
            limbs.push(var.into());
        }
        Ok(BigNatVar { limbs, values: values.to_vec() })
    }
}

fn inv_2_64() -> Fe {
    static V: OnceLock<Fe> = OnceLock::new();
    *V.get_or_init(|| Fe::from_u128(1u128 << 64).inverse().unwrap())
}

fn point_powers(x: u64, n: usize) -> Vec<Fe> {
    let xf = Fe::from_u64(x);
    let mut out = Vec::with_capacity(n);
    let mut p = Fe::ONE;
    for _ in 0..n {
        out.push(p);
        p *= xf;
    }
    out
}

fn eval_at(limbs: &[Lc], pows: &[Fe]) -> Lc {
    let mut lc = Lc::zero();
    for (l, p) in limbs.iter().zip(pows) {
        lc.add_scaled(l, *p);
    }
    lc
}

/// Allocates coefficient variables of the product polynomial x·y and pins them
/// with 2k−1 evaluation constraints.
fn product_coeffs(cs: &mut ConstraintSystem, x: &[Lc], y: &[Lc]) -> GResult<Vec<Lc>> {
    let n = x.len() + y.len() - 1;
    let xv: Vec<Fe> = x.iter().map(|l| cs.eval(l)).collect();
    let yv: Vec<Fe> = y.iter().map(|l| cs.eval(l)).collect();
    let mut coeffs = Vec::with_capacity(n);
    for t in 0..n {
        let mut acc = Fe::ZERO;
        for i in 0..x.len() {
            if t >= i && t - i < y.len() {
                acc += xv[i] * yv[t - i];
            }
        }
        coeffs.push(Lc::from(cs.alloc_witness(acc)));
    }
    for pt in 0..n as u64 {
        let pows = point_powers(pt, n);
        cs.enforce(eval_at(x, &pows), eval_at(y, &pows), eval_at(&coeffs, &pows))?;
    }
    Ok(coeffs)
}

/// r = a·b mod m. `r` and the quotient are range-checked limb-wise; r is not
/// forced below m, which the final comparison against a value < m makes moot.
pub fn modmul(cs: &mut ConstraintSystem, a: &BigNatVar, b: &BigNatVar, m: &BigNatVar) -> GResult<BigNatVar> {
    let k = m.num_limbs();
    let (mut qv, mut rv) = (vec![0u64; k], vec![0u64; k]);
    let mv = m.value();
    if !mv.is_zero() {
        if let Ok((q, r)) = mul_divrem(&a.value(), &b.value(), &mv) {
            for i in 0..k {
                qv[i] = q.get(i).copied().unwrap_or(0);
                rv[i] = r.limbs()[i];
            }
        }
    }
    let q = BigNatVar::alloc(cs, &qv)?;
    let r = BigNatVar::alloc(cs, &rv)?;

    let p = product_coeffs(cs, &a.limbs, &b.limbs)?;
    let qm = product_coeffs(cs, &q.limbs, &m.limbs)?;

    // p_t − qm_t − r_t + c_{t−1} = 2^64·c_t ; last carry is zero
    let n = p.len();
    let two64 = Fe::from_u128(1u128 << 64);
    let offset = Fe::from_u128(1u128 << CARRY_OFFSET_BITS);
    let mut prev: Option<Lc> = None;
    let mut prev_val = Fe::ZERO;
    for t in 0..n {
        let mut d = p[t].clone() - &qm[t];
        if t < k {
            d = d - &r.limbs[t];
        }
        if let Some(c) = &prev {
            d = d + c;
        }
        let dv = cs.eval(&p[t]) - cs.eval(&qm[t]) - if t < k { cs.eval(&r.limbs[t]) } else { Fe::ZERO } + prev_val;
        if t + 1 == n {
            cs.enforce_zero(d)?;
        } else {
            let cv = dv * inv_2_64();
            let c = cs.alloc_witness(cv);
            cs.enforce_equal(d, Lc::term(c, two64))?;
            range_check(cs, &(Lc::from(c) + offset), CARRY_RANGE_BITS)?;
            prev = Some(c.into());
            prev_val = cv;
        }
    }
    Ok(r)
}

/// Enforces a < m: the limbs of m − 1 − a, with a borrow chain ending in zero.
pub fn enforce_less_than(cs: &mut ConstraintSystem, a: &BigNatVar, m: &BigNatVar) -> GResult<()> {
    let k = m.num_limbs();
    let two64 = Fe::from_u128(1u128 << 64);
    let mut borrow: Option<Variable> = None;
    let mut borrow_val = 0u64;
    for l in 0..k {
        let sub = a.values.get(l).copied().unwrap_or(0) as u128 + borrow_val as u128 + (l == 0) as u128;
        let (d, out) = match (m.values[l] as u128).checked_sub(sub) {
            Some(d) => (d as u64, 0u64),
            None => (((1u128 << 64) + m.values[l] as u128 - sub) as u64, 1),
        };
        let dv = cs.alloc_witness(Fe::from_u64(d));
        range_check(cs, &dv.into(), LIMB_BITS)?;
        let mut lhs = m.limbs[l].clone() - &a.limbs[l] - Lc::constant_u64((l == 0) as u64);
        if let Some(b) = borrow {
            lhs = lhs - Lc::from(b);
        }
        let mut rhs = Lc::from(dv);
        if l + 1 < k {
            let b = cs.alloc_witness(Fe::from_u64(out));
            enforce_boolean(cs, b)?;
            rhs = rhs - Lc::term(b, two64);
            borrow = Some(b);
        }
        cs.enforce_equal(lhs, rhs)?;
        borrow_val = out;
    }
    Ok(())
}

pub fn modexp_65537(cs: &mut ConstraintSystem, base: &BigNatVar, m: &BigNatVar) -> GResult<BigNatVar> {
    let mut x = base.clone();
    for _ in 0..16 {
        x = cs.region("modmul", |cs| modmul(cs, &x, &x, m))?;
    }
    cs.region("modmul", |cs| modmul(cs, &x, base, m))
}

/// PKCS#1 v1.5 encoded message for a SHA-256 digest at the given modulus byte length.
pub fn pkcs1_em(digest: &[u8; 32], k_bytes: usize) -> Vec<u8> {
    let mut em = vec![0x00, 0x01];
    em.extend(std::iter::repeat_n(0xff, k_bytes - 3 - DIGEST_INFO.len() - 32));
    em.push(0x00);
    em.extend_from_slice(&DIGEST_INFO);
    em.extend_from_slice(digest);
    em
}

/// Enforces sig < modulus and sig^65537 mod modulus = EM(digest). `sig` limbs must be range-checked.
pub fn g_rs256_verify(
    cs: &mut ConstraintSystem,
    sig: &BigNatVar,
    modulus: &BigNatVar,
    digest: &Digest256,
) -> GResult<()> {
    let k = modulus.num_limbs();
    cs.region("sig_range", |cs| enforce_less_than(cs, sig, modulus))?;
    let result = modexp_65537(cs, sig, modulus)?;
    cs.region("padding", |cs| -> GResult<()> {
        let zero_digest = [0u8; 32];
        let em_const = pkcs1_em(&zero_digest, 8 * k);
        for l in 0..k {
            let expected = if l < 4 {
                // limb l = word(7−2l) + 2^32·word(6−2l)
                let lo = digest.words[7 - 2 * l].lc();
                let hi = digest.words[6 - 2 * l].lc();
                lo + hi.scale(Fe::from_u128(1u128 << 32))
            } else {
                let start = 8 * k - 8 * (l + 1);
                let mut b = [0u8; 8];
                b.copy_from_slice(&em_const[start..start + 8]);
                Lc::constant_u64(u64::from_be_bytes(b))
            };
            cs.enforce_equal(result.limbs[l].clone(), expected)?;
        }
        Ok(())
    })
}
