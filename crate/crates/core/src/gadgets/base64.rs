//! Base64url decoding by per-character one-hot alphabet membership.

use super::basic::{enforce_boolean, materialize, ByteVar, GResult};
use crate::csys::{ConstraintSystem, Lc, Variable};
use crate::fieldcore::Fe;

pub const ALPHABET: &[u8; 64] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";

pub fn sextet(c: u8) -> Option<u8> {
    ALPHABET.iter().position(|&a| a == c).map(|p| p as u8)
}

/// Membership indicators for one character.
pub struct DecodedChar {
    /// e[k] = [char = ALPHABET[k]]
    pub indicators: Vec<Variable>,
    /// Set when the character is the zero byte used as end-of-input filler.
    pub pad: Option<Variable>,
    pub val: u8,
}

impl DecodedChar {
    /// The 6-bit value Σ k·e_k.
    pub fn value_lc(&self) -> Lc {
        self.weighted(|k| k as u64)
    }

    /// Σ f(k)·e_k for an arbitrary per-symbol weight.
    pub fn weighted(&self, f: impl Fn(usize) -> u64) -> Lc {
        let mut lc = Lc::zero();
        for (k, v) in self.indicators.iter().enumerate() {
            let w = f(k);
            if w != 0 {
                lc.push(*v, Fe::from_u64(w));
            }
        }
        lc
    }
}

/// Constrains `c` to the Base64url alphabet (or to 0 when `allow_pad`).
/// 64 (+1) booleanity constraints, Σ = 1, and the character equation.
pub fn decode_char(cs: &mut ConstraintSystem, c: &ByteVar, allow_pad: bool) -> GResult<DecodedChar> {
    let cv = c.val;
    let idx = sextet(cv);
    let mut indicators = Vec::with_capacity(64);
    let mut sum = Lc::zero();
    let mut chr = Lc::zero();
    for (k, &a) in ALPHABET.iter().enumerate() {
        let v = cs.alloc_witness(Fe::from_bool(idx == Some(k as u8)));
        enforce_boolean(cs, v)?;
        sum.push(v, Fe::ONE);
        chr.push(v, Fe::from_u64(a as u64));
        indicators.push(v);
    }
    let pad = if allow_pad {
        let v = cs.alloc_witness(Fe::from_bool(cv == 0));
        enforce_boolean(cs, v)?;
        sum.push(v, Fe::ONE);
        Some(v)
    } else {
        None
    };
    cs.enforce_equal(sum, Lc::one())?;
    cs.enforce_equal(chr, c.value.clone())?;
    Ok(DecodedChar { indicators, pad, val: idx.unwrap_or(0) })
}

/// Decodes groups of four characters into three bytes. Zero bytes are accepted
/// as trailing filler and decode to zero bits.
pub fn g_base64url_decode(cs: &mut ConstraintSystem, chars: &[ByteVar]) -> GResult<Vec<ByteVar>> {
    let mut decoded = Vec::with_capacity(chars.len());
    for c in chars {
        decoded.push(decode_char(cs, c, true)?);
    }
    let mut out = Vec::with_capacity(chars.len() / 4 * 3 + 3);
    for group in decoded.chunks(4) {
        let get = |i: usize| group.get(i);
        // byte0 = v0<<2 | v1>>4 ; byte1 = (v1&15)<<4 | v2>>2 ; byte2 = (v2&3)<<6 | v3
        let parts: [Vec<(usize, Box<dyn Fn(usize) -> u64>)>; 3] = [
            vec![(0, Box::new(|k| (k as u64) << 2)), (1, Box::new(|k| (k as u64) >> 4))],
            vec![(1, Box::new(|k| ((k as u64) & 15) << 4)), (2, Box::new(|k| (k as u64) >> 2))],
            vec![(2, Box::new(|k| ((k as u64) & 3) << 6)), (3, Box::new(|k| k as u64))],
        ];
        let needed = match group.len() {
            1 => 1,
            2 => 1,
            3 => 2,
            _ => 3,
        };
        for part in parts.iter().take(needed) {
            let mut lc = Lc::zero();
            for (ci, f) in part {
                if let Some(d) = get(*ci) {
                    lc = lc + d.weighted(f);
                }
            }
            let v = materialize(cs, &lc)?;
            let val = cs.value(v).low_u64() as u8;
            out.push(ByteVar::from_var(v, val));
        }
    }
    Ok(out)
}
