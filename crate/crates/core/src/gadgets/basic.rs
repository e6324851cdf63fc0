use std::sync::OnceLock;

use crate::csys::{ConstraintSystem, CsError, Lc, Variable};
use crate::fieldcore::Fe;

pub type GResult<T> = Result<T, CsError>;

/// A boolean in the circuit: a constant, a variable, or the negation of one.
#[derive(Clone, Copy, Debug)]
pub enum Bit {
    Constant(bool),
    Is(Variable, bool),
    Not(Variable, bool),
}

impl Bit {
    pub fn value(&self) -> bool {
        match *self {
            Bit::Constant(b) => b,
            Bit::Is(_, b) => b,
            Bit::Not(_, b) => !b,
        }
    }

    pub fn lc(&self) -> Lc {
        match *self {
            Bit::Constant(b) => Lc::constant(Fe::from_bool(b)),
            Bit::Is(v, _) => Lc::from(v),
            Bit::Not(v, _) => Lc::one() - v,
        }
    }

    pub fn not(self) -> Bit {
        match self {
            Bit::Constant(b) => Bit::Constant(!b),
            Bit::Is(v, b) => Bit::Not(v, b),
            Bit::Not(v, b) => Bit::Is(v, b),
        }
    }

    pub fn alloc(cs: &mut ConstraintSystem, value: bool) -> GResult<Bit> {
        let v = cs.alloc_witness(Fe::from_bool(value));
        enforce_boolean(cs, v)?;
        Ok(Bit::Is(v, value))
    }

    /// Wraps a variable whose booleanity is already guaranteed elsewhere.
    pub fn assume(v: Variable, value: bool) -> Bit {
        Bit::Is(v, value)
    }

    pub fn xor(cs: &mut ConstraintSystem, a: Bit, b: Bit) -> GResult<Bit> {
        match (a, b) {
            (Bit::Constant(x), other) | (other, Bit::Constant(x)) => {
                Ok(if x { other.not() } else { other })
            }
            _ => {
                let val = a.value() ^ b.value();
                let c = cs.alloc_witness(Fe::from_bool(val));
                // 2a·b = a + b − c
                cs.enforce(a.lc().scale(Fe::from_u64(2)), b.lc(), a.lc() + b.lc() - c)?;
                Ok(Bit::Is(c, val))
            }
        }
    }

    pub fn and(cs: &mut ConstraintSystem, a: Bit, b: Bit) -> GResult<Bit> {
        match (a, b) {
            (Bit::Constant(x), other) | (other, Bit::Constant(x)) => {
                Ok(if x { other } else { Bit::Constant(false) })
            }
            _ => {
                let val = a.value() & b.value();
                let c = cs.alloc_witness(Fe::from_bool(val));
                cs.enforce(a.lc(), b.lc(), c.into())?;
                Ok(Bit::Is(c, val))
            }
        }
    }
}

pub fn enforce_boolean(cs: &mut ConstraintSystem, v: Variable) -> GResult<()> {
    cs.enforce(v.into(), Lc::one() - v, Lc::zero())
}

/// Allocates the product of two linear combinations.
pub fn mul(cs: &mut ConstraintSystem, a: &Lc, b: &Lc) -> GResult<Variable> {
    let val = cs.eval(a) * cs.eval(b);
    let out = cs.alloc_witness(val);
    cs.enforce(a.clone(), b.clone(), out.into())?;
    Ok(out)
}

/// Materializes a linear combination as a fresh variable.
pub fn materialize(cs: &mut ConstraintSystem, a: &Lc) -> GResult<Variable> {
    let out = cs.alloc_witness(cs.eval(a));
    cs.enforce_equal(a.clone(), out.into())?;
    Ok(out)
}

/// Inverse of small integers (and their negations) comes up constantly when
/// computing is-zero witnesses on byte differences.
fn small_inverse(x: Fe) -> Fe {
    const N: u64 = 1 << 10;
    static TABLE: OnceLock<Vec<Fe>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![Fe::ZERO; N as usize];
        for (i, e) in t.iter_mut().enumerate().skip(1) {
            *e = Fe::from_u64(i as u64).inverse().unwrap();
        }
        t
    });
    if let Some(v) = x.to_u64() {
        if v < N {
            return table[v as usize];
        }
    }
    if let Some(v) = (-x).to_u64() {
        if v < N {
            return -table[v as usize];
        }
    }
    x.inverse_or_zero()
}

/// Returns a boolean variable equal to [x = 0]. Two constraints.
pub fn is_zero(cs: &mut ConstraintSystem, x: &Lc) -> GResult<Variable> {
    let xv = cs.eval(x);
    let eq = xv.is_zero();
    let inv = cs.alloc_witness(small_inverse(xv));
    let e = cs.alloc_witness(Fe::from_bool(eq));
    cs.enforce(x.clone(), inv.into(), Lc::one() - e)?;
    cs.enforce(x.clone(), e.into(), Lc::zero())?;
    Ok(e)
}

pub fn is_equal_const(cs: &mut ConstraintSystem, x: &Lc, k: u64) -> GResult<Variable> {
    is_zero(cs, &(x.clone() - Fe::from_u64(k)))
}

/// Decomposes `x` into `n` little-endian bits and enforces the recomposition.
/// Uses the low `n` bits of the current value, so an out-of-range value
/// violates the recomposition constraint.
pub fn to_bits(cs: &mut ConstraintSystem, x: &Lc, n: usize) -> GResult<Vec<Bit>> {
    let val = cs.eval(x);
    let mut bits = Vec::with_capacity(n);
    let mut acc = Lc::zero();
    let mut pow = Fe::ONE;
    for i in 0..n {
        let b = Bit::alloc(cs, val.bit(i))?;
        acc.add_scaled(&b.lc(), pow);
        pow = pow.double();
        bits.push(b);
    }
    cs.enforce_equal(acc, x.clone())?;
    Ok(bits)
}

/// Enforces 0 ≤ x < 2^n.
pub fn range_check(cs: &mut ConstraintSystem, x: &Lc, n: usize) -> GResult<Vec<Bit>> {
    to_bits(cs, x, n)
}

pub fn bits_to_lc(bits: &[Bit]) -> Lc {
    let mut acc = Lc::zero();
    let mut pow = Fe::ONE;
    for b in bits {
        acc.add_scaled(&b.lc(), pow);
        pow = pow.double();
    }
    acc
}

/// One-hot vector selecting `index` among `len` slots: booleanity on every
/// slot and Σ = 1. An out-of-range index yields an all-zero vector, which
/// violates the sum constraint.
pub struct OneHot {
    pub slots: Vec<Variable>,
}

impl OneHot {
    pub fn alloc(cs: &mut ConstraintSystem, index: Option<usize>, len: usize) -> GResult<OneHot> {
        let mut slots = Vec::with_capacity(len);
        let mut sum = Lc::zero();
        for k in 0..len {
            let v = cs.alloc_witness(Fe::from_bool(index == Some(k)));
            enforce_boolean(cs, v)?;
            sum.push(v, Fe::ONE);
            slots.push(v);
        }
        cs.enforce_equal(sum, Lc::one())?;
        Ok(OneHot { slots })
    }

    /// Σ k·slot_k
    pub fn index_lc(&self) -> Lc {
        let mut lc = Lc::zero();
        for (k, v) in self.slots.iter().enumerate() {
            if k > 0 {
                lc.push(*v, Fe::from_u64(k as u64));
            }
        }
        lc
    }

    /// Σ_{k' ≥ k} slot_k'  (i.e. [index ≥ k])
    pub fn at_least(&self, k: usize) -> Lc {
        let mut lc = Lc::zero();
        for v in self.slots.iter().skip(k) {
            lc.push(*v, Fe::ONE);
        }
        lc
    }

    /// Σ_{k' < k} slot_k'  (i.e. [index < k])
    pub fn below(&self, k: usize) -> Lc {
        let mut lc = Lc::zero();
        for v in self.slots.iter().take(k) {
            lc.push(*v, Fe::ONE);
        }
        lc
    }

    /// Σ_k slot_k · items[k], one product constraint per slot.
    pub fn select(&self, cs: &mut ConstraintSystem, items: &[Lc]) -> GResult<Lc> {
        let mut out = Lc::zero();
        for (v, item) in self.slots.iter().zip(items) {
            if item.is_constant() {
                out.add_scaled(&Lc::from(*v), item.constant);
            } else {
                let p = mul(cs, &Lc::from(*v), item)?;
                out.push(p, Fe::ONE);
            }
        }
        Ok(out)
    }

    pub fn value(&self, cs: &ConstraintSystem) -> Option<usize> {
        self.slots.iter().position(|v| cs.value(*v).is_one())
    }
}

/// A byte in the circuit: its value as a linear combination, optionally with bits.
#[derive(Clone, Debug)]
pub struct ByteVar {
    pub value: Lc,
    pub bits: Option<Vec<Bit>>,
    pub val: u8,
}

impl ByteVar {
    pub fn constant(b: u8) -> Self {
        ByteVar {
            value: Lc::constant_u64(b as u64),
            bits: Some((0..8).map(|i| Bit::Constant((b >> i) & 1 == 1)).collect()),
            val: b,
        }
    }

    /// Allocates a byte with `width` booleanity-constrained bits (8 for a full byte,
    /// 7 for ASCII-only input).
    pub fn alloc(cs: &mut ConstraintSystem, b: u8, width: usize) -> GResult<Self> {
        let mut bits = Vec::with_capacity(8);
        for i in 0..width {
            bits.push(Bit::alloc(cs, (b >> i) & 1 == 1)?);
        }
        for _ in width..8 {
            bits.push(Bit::Constant(false));
        }
        let value = bits_to_lc(&bits);
        let val = if width < 8 { b & ((1u16 << width) - 1) as u8 } else { b };
        Ok(ByteVar { value, bits: Some(bits), val })
    }

    /// A byte held in a single variable with no range check of its own.
    pub fn from_var(v: Variable, val: u8) -> Self {
        ByteVar { value: v.into(), bits: None, val }
    }

    pub fn from_lc(value: Lc, val: u8) -> Self {
        ByteVar { value, bits: None, val }
    }

    pub fn is_constant(&self) -> bool {
        self.value.is_constant()
    }
}

/// Witness value of a byte-valued linear combination, truncated to 8 bits.
pub fn byte_value(cs: &ConstraintSystem, lc: &Lc) -> u8 {
    cs.eval(lc).low_u64() as u8
}

/// Allocates the variable `x + s·(y − x)` (a two-way mux on a boolean `s`).
pub fn mux(cs: &mut ConstraintSystem, s: &Lc, x: &Lc, y: &Lc) -> GResult<Lc> {
    if x == y {
        return Ok(x.clone());
    }
    let sv = cs.eval(s);
    let xv = cs.eval(x);
    let yv = cs.eval(y);
    let out = cs.alloc_witness(xv + sv * (yv - xv));
    cs.enforce(s.clone(), y.clone() - x, Lc::from(out) - x)?;
    Ok(out.into())
}

/// Shifts `items` left by a bit-decomposed amount: out[t] = items[t + shift],
/// zero past the end. One mux per element per stage.
pub fn barrel_shift(
    cs: &mut ConstraintSystem,
    items: &[Lc],
    shift_bits: &[Bit],
    out_len: usize,
) -> GResult<Vec<Lc>> {
    let total: usize = (1usize << shift_bits.len()) - 1;
    let mut cur: Vec<Lc> = items.to_vec();
    let mut remaining = total;
    for (s, bit) in shift_bits.iter().enumerate() {
        let step = 1usize << s;
        remaining -= step;
        let len = (out_len + remaining).min(cur.len());
        let mut next = Vec::with_capacity(len);
        let zero = Lc::zero();
        for t in 0..len {
            let y = cur.get(t + step).unwrap_or(&zero);
            next.push(mux(cs, &bit.lc(), &cur[t], y)?);
        }
        cur = next;
    }
    cur.resize(out_len, Lc::zero());
    Ok(cur)
}

/// (c − 9)(c − 10)(c − 13)(c − 32) vanishes exactly on JSON whitespace bytes.
/// Enforces `flag · ws(c) = 0`. Four constraints.
pub fn enforce_ws_if(cs: &mut ConstraintSystem, flag: &Lc, c: &Lc) -> GResult<()> {
    let t1 = mul(cs, &(c.clone() - Fe::from_u64(9)), &(c.clone() - Fe::from_u64(10)))?;
    let t2 = mul(cs, &(c.clone() - Fe::from_u64(13)), &(c.clone() - Fe::from_u64(32)))?;
    let t3 = mul(cs, flag, &t1.into())?;
    cs.enforce(t3.into(), t2.into(), Lc::zero())
}

pub fn is_json_ws(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\n' | b'\r')
}

/// 254-bit decomposition of a field element with the integer forced below the
/// modulus, so the bits are unique. Little-endian.
pub fn to_bits_canonical(cs: &mut ConstraintSystem, x: &Lc) -> GResult<Vec<Bit>> {
    let bits = to_bits(cs, x, 254)?;
    let limit = {
        let mut m = crate::fieldcore::MODULUS;
        m[0] -= 1;
        m
    };
    // walk from the top bit while the prefix equals that of p − 1
    let mut eq = Bit::Constant(true);
    for i in (0..254).rev() {
        let c = (limit[i / 64] >> (i % 64)) & 1 == 1;
        if c {
            eq = Bit::and(cs, eq, bits[i])?;
        } else {
            cs.enforce(eq.lc(), bits[i].lc(), Lc::zero())?;
        }
    }
    Ok(bits)
}

/// Packs up to `max` bytes 31 per element (big-endian) plus a length, as
/// `sponge::pack_bytes` does out of circuit. Linear.
pub fn pack_lc(bytes: &[ByteVar], len: &Lc, max: usize) -> Vec<Lc> {
    let n = max.div_ceil(31);
    let mut out = Vec::with_capacity(n + 1);
    let base = Fe::from_u64(256);
    for e in 0..n {
        let mut lc = Lc::zero();
        let mut pow = Fe::ONE;
        for t in (0..31).rev() {
            if let Some(b) = bytes.get(31 * e + t) {
                if 31 * e + t < max {
                    lc.add_scaled(&b.value, pow);
                }
            }
            pow *= base;
        }
        out.push(lc);
    }
    out.push(len.clone());
    out
}
