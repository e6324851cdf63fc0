//! Bit-level SHA-256 with variable message length.

use super::basic::{mul, Bit, ByteVar, GResult, OneHot};
use crate::csys::{ConstraintSystem, CsError, Lc};
use crate::fieldcore::Fe;

const K: [u32; 64] = [
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4, 0xab1c5ed5,
    0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe, 0x9bdc06a7, 0xc19bf174,
    0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f, 0x4a7484aa, 0x5cb0a9dc, 0x76f988da,
    0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7, 0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967,
    0x27b70a85, 0x2e1b2138, 0x4d2c6dfc, 0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85,
    0xa2bfe8a1, 0xa81a664b, 0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070,
    0x19a4c116, 0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7, 0xc67178f2,
];

const IV: [u32; 8] = [
    0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a, 0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19,
];

/// 32 bits, least significant first.
#[derive(Clone, Debug)]
pub struct UInt32 {
    pub bits: Vec<Bit>,
}

impl UInt32 {
    pub fn constant(v: u32) -> Self {
        UInt32 { bits: (0..32).map(|i| Bit::Constant((v >> i) & 1 == 1)).collect() }
    }

    pub fn value(&self) -> u32 {
        self.bits.iter().enumerate().fold(0, |acc, (i, b)| acc | ((b.value() as u32) << i))
    }

    pub fn lc(&self) -> Lc {
        super::basic::bits_to_lc(&self.bits)
    }

    pub fn rotr(&self, n: usize) -> Self {
        UInt32 { bits: (0..32).map(|i| self.bits[(i + n) % 32]).collect() }
    }

    pub fn shr(&self, n: usize) -> Self {
        UInt32 {
            bits: (0..32).map(|i| if i + n < 32 { self.bits[i + n] } else { Bit::Constant(false) }).collect(),
        }
    }

    fn xor3(cs: &mut ConstraintSystem, a: &Self, b: &Self, c: &Self) -> GResult<Self> {
        let mut bits = Vec::with_capacity(32);
        for i in 0..32 {
            let t = Bit::xor(cs, a.bits[i], b.bits[i])?;
            bits.push(Bit::xor(cs, t, c.bits[i])?);
        }
        Ok(UInt32 { bits })
    }

    fn ch(cs: &mut ConstraintSystem, e: &Self, f: &Self, g: &Self) -> GResult<Self> {
        let mut bits = Vec::with_capacity(32);
        for i in 0..32 {
            let (eb, fb, gb) = (e.bits[i], f.bits[i], g.bits[i]);
            let val = if eb.value() { fb.value() } else { gb.value() };
            let out = cs.alloc_witness(Fe::from_bool(val));
            // e·(f − g) = out − g
            cs.enforce(eb.lc(), fb.lc() - &gb.lc(), Lc::from(out) - &gb.lc())?;
            bits.push(Bit::Is(out, val));
        }
        Ok(UInt32 { bits })
    }

    fn maj(cs: &mut ConstraintSystem, a: &Self, b: &Self, c: &Self) -> GResult<Self> {
        let mut bits = Vec::with_capacity(32);
        for i in 0..32 {
            let (ab, bb, cb) = (a.bits[i], b.bits[i], c.bits[i]);
            let bc = Bit::and(cs, bb, cb)?;
            let val = (ab.value() & bb.value()) ^ (ab.value() & cb.value()) ^ (bb.value() & cb.value());
            let out = cs.alloc_witness(Fe::from_bool(val));
            // a·(b + c − 2bc) = out − bc
            cs.enforce(
                ab.lc(),
                bb.lc() + &cb.lc() - &bc.lc().scale(Fe::from_u64(2)),
                Lc::from(out) - &bc.lc(),
            )?;
            bits.push(Bit::Is(out, val));
        }
        Ok(UInt32 { bits })
    }

    /// Sum modulo 2^32 of several words plus a constant.
    fn addmany(cs: &mut ConstraintSystem, operands: &[&UInt32], constant: u32) -> GResult<Self> {
        let mut lhs = Lc::constant_u64(constant as u64);
        let mut total: u64 = constant as u64;
        let mut max: u64 = constant as u64;
        for op in operands {
            lhs = lhs + op.lc();
            total += op.value() as u64;
            max += u32::MAX as u64;
        }
        let width = 64 - max.leading_zeros() as usize;
        let mut rhs = Lc::zero();
        let mut bits = Vec::with_capacity(32);
        let mut pow = Fe::ONE;
        for i in 0..width {
            let b = Bit::alloc(cs, (total >> i) & 1 == 1)?;
            rhs.add_scaled(&b.lc(), pow);
            pow = pow.double();
            if i < 32 {
                bits.push(b);
            }
        }
        cs.enforce_equal(lhs, rhs)?;
        Ok(UInt32 { bits })
    }
}

fn compress(cs: &mut ConstraintSystem, state: &[UInt32], block: &[Bit]) -> GResult<Vec<UInt32>> {
    let mut w: Vec<UInt32> = Vec::with_capacity(64);
    for t in 0..16 {
        // word t = bytes 4t..4t+3, big-endian; block bits are per-byte LSB first
        let mut bits = Vec::with_capacity(32);
        for i in 0..32 {
            let byte = 4 * t + 3 - i / 8;
            bits.push(block[8 * byte + i % 8]);
        }
        w.push(UInt32 { bits });
    }
    for t in 16..64 {
        let s0 = UInt32::xor3(cs, &w[t - 15].rotr(7), &w[t - 15].rotr(18), &w[t - 15].shr(3))?;
        let s1 = UInt32::xor3(cs, &w[t - 2].rotr(17), &w[t - 2].rotr(19), &w[t - 2].shr(10))?;
        let wt = UInt32::addmany(cs, &[&w[t - 16], &s0, &w[t - 7], &s1], 0)?;
        w.push(wt);
    }

    let mut a = state[0].clone();
    let mut b = state[1].clone();
    let mut c = state[2].clone();
    let mut d = state[3].clone();
    let mut e = state[4].clone();
    let mut f = state[5].clone();
    let mut g = state[6].clone();
    let mut h = state[7].clone();

    for t in 0..64 {
        let s1 = UInt32::xor3(cs, &e.rotr(6), &e.rotr(11), &e.rotr(25))?;
        let ch = UInt32::ch(cs, &e, &f, &g)?;
        let s0 = UInt32::xor3(cs, &a.rotr(2), &a.rotr(13), &a.rotr(22))?;
        let maj = UInt32::maj(cs, &a, &b, &c)?;
        let new_e = UInt32::addmany(cs, &[&d, &h, &s1, &ch, &w[t]], K[t])?;
        let new_a = UInt32::addmany(cs, &[&h, &s1, &ch, &w[t], &s0, &maj], K[t])?;
        h = g;
        g = f;
        f = e;
        e = new_e;
        d = c;
        c = b;
        b = a;
        a = new_a;
    }

    let fresh = [a, b, c, d, e, f, g, h];
    let mut out = Vec::with_capacity(8);
    for i in 0..8 {
        let sv = &state[i];
        if sv.bits.iter().all(|b| matches!(b, Bit::Constant(_))) {
            out.push(UInt32::addmany(cs, &[&fresh[i]], sv.value())?);
        } else {
            out.push(UInt32::addmany(cs, &[sv, &fresh[i]], 0)?);
        }
    }
    Ok(out)
}

/// Fixed-length SHA-256 over whole padded blocks (no variable length).
pub fn sha256_blocks(cs: &mut ConstraintSystem, padded: &[Bit]) -> GResult<Vec<UInt32>> {
    assert_eq!(padded.len() % 512, 0);
    let mut state: Vec<UInt32> = IV.iter().map(|&v| UInt32::constant(v)).collect();
    for block in padded.chunks(512) {
        state = compress(cs, &state, block)?;
    }
    Ok(state)
}

pub fn blocks_for(max_len: usize) -> usize {
    (max_len + 9).div_ceil(64)
}

/// 256-bit digest as 8 big-endian words.
#[derive(Clone, Debug)]
pub struct Digest256 {
    pub words: Vec<UInt32>,
}

impl Digest256 {
    pub fn bytes(&self) -> [u8; 32] {
        let mut out = [0u8; 32];
        for (i, w) in self.words.iter().enumerate() {
            out[4 * i..4 * i + 4].copy_from_slice(&w.value().to_be_bytes());
        }
        out
    }
}

/// SHA-256 of `msg[0..len]` where `len` is a witness variable at most `msg.len()`.
///
/// Message bytes must carry bits. Bytes at positions ≥ len are forced to zero.
/// Every block is compressed; the digest at the terminal block is selected by
/// a one-hot block index.
pub fn g_sha256(cs: &mut ConstraintSystem, msg: &[ByteVar], len: &Lc) -> GResult<Digest256> {
    let max_len = msg.len();
    let nblocks = blocks_for(max_len);
    let len_val = cs.eval(len).to_u64().map(|v| v as usize).filter(|&v| v <= max_len);
    if cs.mode() != crate::csys::Mode::Setup && len_val.is_none() {
        return Err(CsError::LengthOutOfRange { what: "sha256 message length" });
    }

    let (eq, blocksel, lbits) = cs.region("padding", |cs| -> GResult<_> {
        // eq[k] = [k = len] for k in 0..=max_len
        let eq = OneHot::alloc(cs, len_val, max_len + 1)?;
        cs.enforce_equal(eq.index_lc(), len.clone())?;
        // ge[k] = [len ≤ k]; msg[k] must vanish there
        let mut ge = Lc::zero();
        for (k, byte) in msg.iter().enumerate() {
            ge.push(eq.slots[k], Fe::ONE);
            if byte.is_constant() {
                continue;
            }
            let gev = cs.alloc_witness(cs.eval(&ge));
            cs.enforce_equal(ge.clone(), gev.into())?;
            ge = gev.into();
            cs.enforce(ge.clone(), byte.value.clone(), Lc::zero())?;
        }
        // terminal block b = (len + 8) / 64
        let mut blocksel = Vec::with_capacity(nblocks);
        for b in 0..nblocks {
            let mut lc = Lc::zero();
            for k in 0..=max_len {
                if (k + 8) / 64 == b {
                    lc.push(eq.slots[k], Fe::ONE);
                }
            }
            let v = cs.alloc_witness(cs.eval(&lc));
            cs.enforce_equal(lc, v.into())?;
            blocksel.push(v);
        }
        let bitlen = Lc::from(len.clone()).scale(Fe::from_u64(8));
        let lbits = super::basic::to_bits(cs, &bitlen, 64 - ((8 * max_len) as u64).leading_zeros() as usize)?;
        Ok((eq, blocksel, lbits))
    })?;

    let padded = cs.region("padding", |cs| -> GResult<Vec<Bit>> {
        let total = nblocks * 64;
        let mut bits: Vec<Bit> = Vec::with_capacity(total * 8);
        for k in 0..total {
            let byte_bits: Vec<Bit> = match msg.get(k) {
                Some(b) => b.bits.clone().expect("sha256 input bytes need bits"),
                None => vec![Bit::Constant(false); 8],
            };
            let mut out_bits = byte_bits.clone();
            // 0x80 marker at position len
            if k <= max_len {
                let marker = eq.slots[k];
                match byte_bits[7] {
                    Bit::Constant(false) => {
                        out_bits[7] = Bit::assume(marker, cs.value(marker).is_one());
                    }
                    other => {
                        let val = other.value() | cs.value(marker).is_one();
                        let v = cs.alloc_witness(Fe::from_bool(val));
                        cs.enforce_equal(other.lc() + marker, v.into())?;
                        out_bits[7] = Bit::assume(v, val);
                    }
                }
            }
            // big-endian 64-bit length in the last 8 bytes of the terminal block
            let pos_in_block = k % 64;
            if pos_in_block >= 56 {
                let block = k / 64;
                let byte_index = 63 - pos_in_block; // 0 = least significant length byte
                for i in 0..8 {
                    let li = 8 * byte_index + i;
                    if li >= lbits.len() {
                        continue;
                    }
                    let sel = blocksel[block];
                    let prodv = cs.value(sel).is_one() && lbits[li].value();
                    let base = out_bits[i];
                    let val = base.value() | prodv;
                    let v = cs.alloc_witness(Fe::from_bool(val));
                    // sel·lbit = v − base
                    cs.enforce(sel.into(), lbits[li].lc(), Lc::from(v) - &base.lc())?;
                    out_bits[i] = Bit::assume(v, val);
                }
            }
            bits.extend(out_bits);
        }
        Ok(bits)
    })?;

    let mut states = Vec::with_capacity(nblocks);
    let mut state: Vec<UInt32> = IV.iter().map(|&v| UInt32::constant(v)).collect();
    cs.region("compress", |cs| -> GResult<()> {
        for block in padded.chunks(512) {
            state = compress(cs, &state, block)?;
            states.push(state.clone());
        }
        Ok(())
    })?;

    cs.region("select", |cs| -> GResult<Digest256> {
        let mut words = Vec::with_capacity(8);
        for w in 0..8 {
            let mut acc = Lc::zero();
            for (b, st) in states.iter().enumerate() {
                let p = mul(cs, &blocksel[b].into(), &st[w].lc())?;
                acc.push(p, Fe::ONE);
            }
            let bits = super::basic::to_bits(cs, &acc, 32)?;
            words.push(UInt32 { bits });
        }
        Ok(Digest256 { words })
    })
}

/// Convenience: allocates `data` zero-padded to `max_len` and hashes it.
pub fn alloc_message(cs: &mut ConstraintSystem, data: &[u8], max_len: usize) -> GResult<Vec<ByteVar>> {
    (0..max_len).map(|k| ByteVar::alloc(cs, data.get(k).copied().unwrap_or(0), 8)).collect()
}
