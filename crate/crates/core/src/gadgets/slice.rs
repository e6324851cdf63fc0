//! Extracting S[i..i+m] for a witness offset i.

use super::basic::{barrel_shift, materialize, to_bits, Bit, ByteVar, GResult, OneHot};
use crate::csys::{ConstraintSystem, Lc};
use crate::fieldcore::Fe;

pub const WORD_BYTES: usize = 16;

fn offset_value(cs: &ConstraintSystem, i: &Lc) -> Option<usize> {
    cs.eval(i).to_u64().map(|v| v as usize)
}

/// One selector per candidate offset, m dot products over the whole input.
pub fn g_slice_naive(cs: &mut ConstraintSystem, s: &[ByteVar], i: &Lc, m: usize) -> GResult<Vec<ByteVar>> {
    let n = s.len();
    assert!(m <= n, "slice longer than input");
    let positions = n - m + 1;
    let iv = offset_value(cs, i).filter(|&v| v < positions);
    let sel = OneHot::alloc(cs, iv, positions)?;
    cs.enforce_equal(sel.index_lc(), i.clone())?;
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let items: Vec<Lc> = (0..positions).map(|k| s[k + j].value.clone()).collect();
        let lc = sel.select(cs, &items)?;
        let v = materialize(cs, &lc)?;
        let val = cs.value(v).low_u64() as u8;
        out.push(ByteVar::from_var(v, val));
    }
    Ok(out)
}

/// Packs 16 consecutive bytes big-endian into one element.
fn pack_word(bytes: &[Lc]) -> Lc {
    let mut lc = Lc::zero();
    let mut pow = Fe::ONE;
    let base = Fe::from_u64(256);
    for b in bytes.iter().rev() {
        lc.add_scaled(b, pow);
        pow *= base;
    }
    lc
}

/// Same contract as [`g_slice_naive`], selecting whole 16-byte words first and
/// then aligning for i mod 16.
pub fn g_slice_packed(cs: &mut ConstraintSystem, s: &[ByteVar], i: &Lc, m: usize) -> GResult<Vec<ByteVar>> {
    let n = s.len();
    assert!(m <= n, "slice longer than input");
    let k_words = m.div_ceil(WORD_BYTES) + 1;
    let q_count = (n - m) / WORD_BYTES + 1;
    let total_words = q_count - 1 + k_words;

    let mut words: Vec<Lc> = Vec::with_capacity(total_words);
    for w in 0..total_words {
        let bytes: Vec<Lc> = (0..WORD_BYTES)
            .map(|t| s.get(WORD_BYTES * w + t).map_or(Lc::zero(), |b| b.value.clone()))
            .collect();
        let packed = pack_word(&bytes);
        if packed.is_constant() {
            words.push(packed);
        } else {
            words.push(materialize(cs, &packed)?.into());
        }
    }

    let iv = offset_value(cs, i);
    let qv = iv.map(|v| v / WORD_BYTES).filter(|&q| q < q_count);
    let rv = iv.map_or(0, |v| v % WORD_BYTES);
    let q = OneHot::alloc(cs, qv, q_count)?;
    let r_bits = {
        let mut bits = Vec::with_capacity(4);
        for b in 0..4 {
            bits.push(Bit::alloc(cs, (rv >> b) & 1 == 1)?);
        }
        bits
    };
    let r_lc = super::basic::bits_to_lc(&r_bits);
    cs.enforce_equal(q.index_lc().scale(Fe::from_u64(WORD_BYTES as u64)) + r_lc, i.clone())?;
    // i + m ≤ n
    let slack = Lc::constant_u64((n - m) as u64) - i;
    let slack_bits = (usize::BITS - (n - m).leading_zeros()) as usize;
    to_bits(cs, &slack, slack_bits.max(1))?;

    let mut unpacked: Vec<Lc> = Vec::with_capacity(k_words * WORD_BYTES);
    for kk in 0..k_words {
        let items: Vec<Lc> = (0..q_count).map(|w| words[w + kk].clone()).collect();
        let sel = q.select(cs, &items)?;
        let sv = cs.eval(&sel).to_le_bytes();
        let mut bytes = Vec::with_capacity(WORD_BYTES);
        for t in 0..WORD_BYTES {
            // big-endian: byte t of the word is little-endian byte 15 − t
            bytes.push(ByteVar::alloc(cs, sv[WORD_BYTES - 1 - t], 8)?);
        }
        let values: Vec<Lc> = bytes.iter().map(|b| b.value.clone()).collect();
        cs.enforce_equal(pack_word(&values), sel)?;
        unpacked.extend(values);
    }

    let shifted = barrel_shift(cs, &unpacked, &r_bits, m)?;
    Ok(shifted
        .into_iter()
        .map(|lc| {
            let val = cs.eval(&lc).low_u64() as u8;
            ByteVar::from_lc(lc, val)
        })
        .collect())
}
