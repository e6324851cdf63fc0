//! Selective JSON claim extraction over a decoded payload.

use super::basic::{enforce_ws_if, is_equal_const, is_json_ws, is_zero, mul, Bit, ByteVar, GResult, OneHot};
use super::slice::g_slice_packed;
use crate::csys::{ConstraintSystem, Lc, Variable};
use crate::fieldcore::Fe;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    String,
    Boolean,
}

/// What the circuit extracts for one claim.
#[derive(Clone, Debug)]
pub struct ClaimSpec {
    pub name: String,
    /// Maximum content length (string: bytes between the quotes).
    pub max_value: usize,
    pub kind: ValueKind,
}

impl ClaimSpec {
    pub fn string(name: &str, max_value: usize) -> Self {
        Self { name: name.to_string(), max_value, kind: ValueKind::String }
    }

    pub fn boolean(name: &str) -> Self {
        Self { name: name.to_string(), max_value: 5, kind: ValueKind::Boolean }
    }

    /// `"name"` including quotes.
    pub fn key_literal(&self) -> Vec<u8> {
        let mut k = vec![b'"'];
        k.extend_from_slice(self.name.as_bytes());
        k.push(b'"');
        k
    }

    /// Bytes of the quoted value token (or the literal) at most.
    pub fn max_token(&self) -> usize {
        match self.kind {
            ValueKind::String => self.max_value + 2,
            ValueKind::Boolean => 5,
        }
    }

    /// Window length: key, ≤2 ws, ':', ≤2 ws, value token, ≤2 ws, delimiter.
    pub fn window(&self) -> usize {
        self.key_literal().len() + 2 + 1 + 2 + self.max_token() + 2 + 1
    }
}

#[derive(Clone, Debug)]
pub struct JsonClaim {
    pub key: Vec<ByteVar>,
    /// Content bytes (string contents without quotes, or the literal), zero past `value_len`.
    pub value: Vec<ByteVar>,
    pub value_len: Lc,
    pub kind: ValueKind,
    pub bool_value: Option<Bit>,
}

impl JsonClaim {
    pub fn value_bytes(&self) -> Vec<u8> {
        self.value.iter().map(|b| b.val).collect()
    }
}

/// Per-position structural state: flag[k] = in_string[k] + 2·depth[k], both
/// taken just before character k.
pub struct JsonScan {
    pub flags: Vec<Lc>,
}

pub fn json_scan(cs: &mut ConstraintSystem, s: &[ByteVar]) -> GResult<JsonScan> {
    let mut flags = Vec::with_capacity(s.len());
    let mut inside: Lc = Lc::zero();
    let mut esc: Lc = Lc::zero();
    let mut depth: Lc = Lc::zero();
    for c in s {
        flags.push(inside.clone() + depth.clone().scale(Fe::from_u64(2)));
        let cv = &c.value;
        let is_q = is_equal_const(cs, cv, b'"' as u64)?;
        let is_bs = is_equal_const(cs, cv, b'\\' as u64)?;
        let open_p = mul(cs, &(cv.clone() - Fe::from_u64(b'{' as u64)), &(cv.clone() - Fe::from_u64(b'[' as u64)))?;
        let is_open = is_zero(cs, &open_p.into())?;
        let close_p = mul(cs, &(cv.clone() - Fe::from_u64(b'}' as u64)), &(cv.clone() - Fe::from_u64(b']' as u64)))?;
        let is_close = is_zero(cs, &close_p.into())?;

        // unescaped quote toggles the string state
        let t = mul(cs, &is_q.into(), &(Lc::one() - &esc))?;
        let iv = cs.eval(&inside);
        let tv = cs.value(t);
        let next_inside = cs.alloc_witness(iv + tv - (iv * tv).double());
        cs.enforce(inside.clone(), Lc::term(t, Fe::from_u64(2)), inside.clone() + t - next_inside)?;

        let next_esc = mul(cs, &is_bs.into(), &(Lc::one() - &esc))?;

        let dv = cs.eval(&depth);
        let delta = cs.value(is_open) - cs.value(is_close);
        let next_depth = cs.alloc_witness(dv + (Fe::ONE - iv) * delta);
        cs.enforce(
            Lc::one() - &inside,
            Lc::from(is_open) - is_close,
            Lc::from(next_depth) - &depth,
        )?;

        inside = next_inside.into();
        esc = next_esc.into();
        depth = next_depth.into();
    }
    Ok(JsonScan { flags })
}

/// Enforces that `pos` is outside any string and at object depth 1.
pub fn g_top_level_with(cs: &mut ConstraintSystem, scan: &JsonScan, pos: &Lc) -> GResult<()> {
    let n = scan.flags.len();
    let pv = cs.eval(pos).to_u64().map(|v| v as usize).filter(|&v| v < n);
    let sel = OneHot::alloc(cs, pv, n)?;
    cs.enforce_equal(sel.index_lc(), pos.clone())?;
    let picked = sel.select(cs, &scan.flags)?;
    cs.enforce_equal(picked, Lc::constant_u64(2))
}

pub fn g_top_level(cs: &mut ConstraintSystem, s: &[ByteVar], pos: &Lc) -> GResult<()> {
    let scan = json_scan(cs, s)?;
    g_top_level_with(cs, &scan, pos)
}

fn ws_run(bytes: &[u8], from: usize, max: usize) -> usize {
    let mut k = 0;
    while k < max && bytes.get(from + k).copied().is_some_and(is_json_ws) {
        k += 1;
    }
    k
}

/// Checks one `"key": value` member starting at offset `i` with colon at `i + j`
/// and delimiter at `i + l − 1`.
pub fn g_json_claim(
    cs: &mut ConstraintSystem,
    s: &[ByteVar],
    spec: &ClaimSpec,
    i: &Lc,
    l: &Lc,
    j: &Lc,
) -> GResult<JsonClaim> {
    let key = spec.key_literal();
    let klen = key.len();
    let m = spec.window();
    let tok_max = spec.max_token();
    let val_len = tok_max + 3;

    let window = cs.region("slice", |cs| {
        let mut ext: Vec<ByteVar> = s.to_vec();
        ext.extend((0..m).map(|_| ByteVar::constant(0)));
        g_slice_packed(cs, &ext, i, m)
    })?;
    let wv: Vec<u8> = window.iter().map(|b| b.val).collect();

    cs.region("key", |cs| -> GResult<()> {
        for (t, &k) in key.iter().enumerate() {
            cs.enforce_equal(window[t].value.clone(), Lc::constant_u64(k as u64))?;
        }
        Ok(())
    })?;

    // colon offset jo = j − klen ∈ {0,1,2}; value offset voff ∈ {0..4}
    let jv = cs.eval(j).to_u64().map(|v| v as usize);
    let jo_val = jv.and_then(|v| v.checked_sub(klen)).filter(|&v| v <= 2);
    let voff_val = jo_val.map(|jo| jo + ws_run(&wv, klen + jo + 1, 2));

    let (jsel, vsel) = cs.region("colon", |cs| -> GResult<(OneHot, OneHot)> {
        let jsel = OneHot::alloc(cs, jo_val, 3)?;
        cs.enforce_equal(jsel.index_lc() + Fe::from_u64(klen as u64), j.clone())?;
        let colon_items: Vec<Lc> = (0..3).map(|x| window[klen + x].value.clone()).collect();
        let colon = jsel.select(cs, &colon_items)?;
        cs.enforce_equal(colon, Lc::constant_u64(b':' as u64))?;
        for x in 0..2 {
            enforce_ws_if(cs, &jsel.at_least(x + 1), &window[klen + x].value)?;
        }
        let vsel = OneHot::alloc(cs, voff_val, 5)?;
        // voff − jo ∈ {0,1,2}
        let d = vsel.index_lc() - &jsel.index_lc();
        let d1 = mul(cs, &d, &(d.clone() - Fe::ONE))?;
        cs.enforce(d1.into(), d - Fe::from_u64(2), Lc::zero())?;
        for y in 0..4 {
            let after_colon = jsel.below(y + 1);
            let before_value = vsel.at_least(y + 1);
            let flag = mul(cs, &after_colon, &before_value)?;
            enforce_ws_if(cs, &flag.into(), &window[klen + 1 + y].value)?;
        }
        Ok((jsel, vsel))
    })?;
    let _ = jsel;

    let val: Vec<Lc> = cs.region("value", |cs| -> GResult<Vec<Lc>> {
        let mut out = Vec::with_capacity(val_len);
        for t in 0..val_len {
            let items: Vec<Lc> = (0..5).map(|x| window[klen + 1 + x + t].value.clone()).collect();
            out.push(vsel.select(cs, &items)?);
        }
        Ok(out)
    })?;
    let vv: Vec<u8> = val.iter().map(|lc| cs.eval(lc).low_u64() as u8).collect();

    // delimiter position in value coordinates; token length and trailing ws
    let lv = cs.eval(l).to_u64().map(|v| v as usize);
    let dpos_val = match (lv, voff_val) {
        (Some(lv), Some(voff)) => lv.checked_sub(klen + 2 + voff).filter(|&d| d < val_len),
        _ => None,
    };
    let tws_val = dpos_val.map(|d| {
        let mut k = 0;
        while k < 2 && d > k && is_json_ws(vv[d - 1 - k]) {
            k += 1;
        }
        k
    });
    let vlen_val = match (dpos_val, tws_val) {
        (Some(d), Some(t)) => Some(d - t),
        _ => None,
    };

    let (esel, dsel) = cs.region("delimiter", |cs| -> GResult<(OneHot, OneHot)> {
        let esel = OneHot::alloc(cs, vlen_val.and_then(|v| v.checked_sub(1)).filter(|&e| e < tok_max), tok_max)?;
        let dsel = OneHot::alloc(cs, dpos_val, val_len)?;
        // tws = dpos − vlen ∈ {0,1,2}
        let tws = dsel.index_lc() - &esel.index_lc() - Fe::ONE;
        let t1 = mul(cs, &tws, &(tws.clone() - Fe::ONE))?;
        cs.enforce(t1.into(), tws - Fe::from_u64(2), Lc::zero())?;
        let delim = dsel.select(cs, &val)?;
        cs.enforce(
            delim.clone() - Fe::from_u64(b',' as u64),
            delim - Fe::from_u64(b'}' as u64),
            Lc::zero(),
        )?;
        for (t, v) in val.iter().enumerate().take(val_len - 1).skip(1) {
            let past_value = esel.below(t);
            let before_delim = dsel.at_least(t + 1);
            let flag = mul(cs, &past_value, &before_delim)?;
            enforce_ws_if(cs, &flag.into(), v)?;
        }
        // l = klen + 1 + voff + dpos + 1
        cs.enforce_equal(
            vsel.index_lc() + &dsel.index_lc() + Fe::from_u64(klen as u64 + 2),
            l.clone(),
        )?;
        Ok((esel, dsel))
    })?;
    let _ = dsel;

    match spec.kind {
        ValueKind::String => cs.region("string", |cs| {
            cs.enforce_zero(Lc::from(esel.slots[0]))?;
            cs.enforce_equal(val[0].clone(), Lc::constant_u64(b'"' as u64))?;
            let closing = esel.select(cs, &val)?;
            cs.enforce_equal(closing, Lc::constant_u64(b'"' as u64))?;
            // esc[t]: character t is escaped by an unescaped backslash at t−1
            let mut esc: Vec<Lc> = vec![Lc::zero(); tok_max];
            for t in 1..tok_max {
                let interior = esel.at_least(t + 1);
                let is_q = is_equal_const(cs, &val[t], b'"' as u64)?;
                let u = mul(cs, &interior, &is_q.into())?;
                cs.enforce(u.into(), Lc::one() - &esc[t], Lc::zero())?;
                cs.enforce(esel.slots[t].into(), esc[t].clone(), Lc::zero())?;
                if t + 1 < tok_max {
                    let is_bs = is_equal_const(cs, &val[t], b'\\' as u64)?;
                    esc[t + 1] = mul(cs, &is_bs.into(), &(Lc::one() - &esc[t]))?.into();
                }
            }
            let mut content = Vec::with_capacity(spec.max_value);
            for t in 0..spec.max_value {
                let keep = esel.at_least(t + 2);
                let v = mul(cs, &val[t + 1], &keep)?;
                content.push(ByteVar::from_var(v, cs.value(v).low_u64() as u8));
            }
            Ok(JsonClaim {
                key: key.iter().map(|&b| ByteVar::constant(b)).collect(),
                value: content,
                value_len: esel.index_lc() - Fe::ONE,
                kind: ValueKind::String,
                bool_value: None,
            })
        }),
        ValueKind::Boolean => cs.region("boolean", |cs| {
            let b = Bit::alloc(cs, vv.first() == Some(&b't'))?;
            let (tr, fa) = (b"true", b"false");
            for t in 0..4 {
                let expect = Lc::constant_u64(fa[t] as u64)
                    + &b.lc().scale(Fe::from_u64(tr[t] as u64) - Fe::from_u64(fa[t] as u64));
                cs.enforce_equal(val[t].clone(), expect)?;
            }
            cs.enforce(b.not().lc(), val[4].clone() - Fe::from_u64(b'e' as u64), Lc::zero())?;
            // vlen = 5 − b, so E index = 4 − b
            cs.enforce_equal(esel.index_lc(), Lc::constant_u64(4) - &b.lc())?;
            let mut content = Vec::with_capacity(5);
            for t in 0..5 {
                let keep = esel.at_least(t);
                let v = mul(cs, &val[t], &keep)?;
                content.push(ByteVar::from_var(v, cs.value(v).low_u64() as u8));
            }
            Ok(JsonClaim {
                key: key.iter().map(|&b| ByteVar::constant(b)).collect(),
                value: content,
                value_len: esel.index_lc() + Fe::ONE,
                kind: ValueKind::Boolean,
                bool_value: Some(b),
            })
        }),
    }
}

/// Variables allocated for one claim's hints.
#[derive(Clone, Copy, Debug)]
pub struct ClaimHintVars {
    pub i: Variable,
    pub l: Variable,
    pub j: Variable,
}
