//! The sponge permutation over linear-combination state. Three constraints per S-box.

use super::basic::{mul, GResult};
use crate::csys::{ConstraintSystem, Lc};
use crate::fieldcore::sponge::{capacity_init, is_full_round, params, RATE, WIDTH};

fn sbox(cs: &mut ConstraintSystem, x: &Lc) -> GResult<Lc> {
    let x2 = mul(cs, x, x)?;
    let x4 = mul(cs, &x2.into(), &x2.into())?;
    Ok(mul(cs, &x4.into(), x)?.into())
}

pub fn permute(cs: &mut ConstraintSystem, state: &mut [Lc; WIDTH]) -> GResult<()> {
    let p = params();
    for (r, rc) in p.round_constants.iter().enumerate() {
        for i in 0..WIDTH {
            state[i] = state[i].clone() + rc[i];
        }
        if is_full_round(r) {
            for s in state.iter_mut() {
                *s = sbox(cs, s)?;
            }
        } else {
            state[0] = sbox(cs, &state[0])?;
        }
        let old = state.clone();
        for i in 0..WIDTH {
            let mut lc = Lc::zero();
            for j in 0..WIDTH {
                lc.add_scaled(&old[j], p.mds[i][j]);
            }
            state[i] = lc.normalized();
        }
    }
    Ok(())
}

/// In-circuit counterpart of [`crate::fieldcore::sponge::hash`].
pub fn g_sponge_hash(cs: &mut ConstraintSystem, inputs: &[Lc], domain: u64) -> GResult<Lc> {
    let mut state = [Lc::constant(capacity_init(domain, inputs.len())), Lc::zero(), Lc::zero()];
    if inputs.is_empty() {
        permute(cs, &mut state)?;
    }
    for chunk in inputs.chunks(RATE) {
        for (k, x) in chunk.iter().enumerate() {
            state[1 + k] = state[1 + k].clone() + x;
        }
        permute(cs, &mut state)?;
    }
    let [_, out, _] = state;
    Ok(out)
}
