//! Poseidon-style sponge over the scalar field: width 3 (rate 2, capacity 1),
//! x^5 S-box, 8 full and 57 partial rounds, Cauchy MDS matrix.
//!
//! Round constants come from ChaCha20 seeded with SHA-256("zklogin-sponge-v1/constants").
//! Each constant is 32 bytes with the top two bits cleared, rejected while ≥ p.

use std::sync::OnceLock;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::Fe;

pub const WIDTH: usize = 3;
pub const RATE: usize = 2;
pub const FULL_ROUNDS: usize = 8;
pub const PARTIAL_ROUNDS: usize = 57;
pub const CONSTANTS_SEED: &str = "zklogin-sponge-v1/constants";

/// Domain tags used across the crate.
pub mod domain {
    pub const ADDRESS: u64 = 1;
    pub const NONCE: u64 = 2;
    pub const SALT: u64 = 3;
    pub const MESSAGE: u64 = 4;
    pub const COMMIT: u64 = 5;
    pub const SYSTEM_DIGEST: u64 = 6;
    pub const TOY_COMMIT: u64 = 7;
}

pub struct SpongeParams {
    pub round_constants: Vec<[Fe; WIDTH]>,
    pub mds: [[Fe; WIDTH]; WIDTH],
}

pub fn params() -> &'static SpongeParams {
    static P: OnceLock<SpongeParams> = OnceLock::new();
    P.get_or_init(|| {
        let seed: [u8; 32] = Sha256::digest(CONSTANTS_SEED.as_bytes()).into();
        let mut rng = ChaCha20Rng::from_seed(seed);
        let mut sample = || loop {
            let mut b = [0u8; 32];
            rng.fill_bytes(&mut b);
            b[31] &= 0x3f;
            if let Ok(f) = Fe::from_le_bytes(&b) {
                return f;
            }
        };
        let rounds = FULL_ROUNDS + PARTIAL_ROUNDS;
        let round_constants = (0..rounds).map(|_| [sample(), sample(), sample()]).collect();
        let mut mds = [[Fe::ZERO; WIDTH]; WIDTH];
        for (i, row) in mds.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                // x_i = i, y_j = WIDTH + j
                *cell = Fe::from_u64((i + WIDTH + j) as u64).inverse().unwrap();
            }
        }
        SpongeParams { round_constants, mds }
    })
}

#[inline]
fn sbox(x: Fe) -> Fe {
    let x2 = x.square();
    x2.square() * x
}

pub fn is_full_round(r: usize) -> bool {
    !(FULL_ROUNDS / 2..FULL_ROUNDS / 2 + PARTIAL_ROUNDS).contains(&r)
}

pub fn permute(state: &mut [Fe; WIDTH]) {
    let p = params();
    for (r, rc) in p.round_constants.iter().enumerate() {
        for i in 0..WIDTH {
            state[i] += rc[i];
        }
        if is_full_round(r) {
            for s in state.iter_mut() {
                *s = sbox(*s);
            }
        } else {
            state[0] = sbox(state[0]);
        }
        let old = *state;
        for i in 0..WIDTH {
            state[i] = (0..WIDTH).map(|j| p.mds[i][j] * old[j]).sum();
        }
    }
}

/// Initial capacity element: domain·2^64 + number of inputs.
pub fn capacity_init(domain: u64, len: usize) -> Fe {
    Fe::from_u128(((domain as u128) << 64) | len as u128)
}

pub fn hash(inputs: &[Fe], domain: u64) -> Fe {
    let mut state = [capacity_init(domain, inputs.len()), Fe::ZERO, Fe::ZERO];
    if inputs.is_empty() {
        permute(&mut state);
    }
    for chunk in inputs.chunks(RATE) {
        for (k, x) in chunk.iter().enumerate() {
            state[1 + k] += *x;
        }
        permute(&mut state);
    }
    state[1]
}

/// Packs bytes 31 per element (big-endian inside each element), zero-padded to
/// `ceil(max/31)` elements, followed by a length element.
pub fn pack_bytes(bytes: &[u8], max: usize) -> Option<Vec<Fe>> {
    if bytes.len() > max {
        return None;
    }
    let n = max.div_ceil(31);
    let mut out = Vec::with_capacity(n + 1);
    for e in 0..n {
        let mut chunk = [0u8; 31];
        for (t, c) in chunk.iter_mut().enumerate() {
            if let Some(b) = bytes.get(31 * e + t) {
                *c = *b;
            }
        }
        out.push(Fe::from_be_bytes_mod_order(&chunk));
    }
    out.push(Fe::from_u64(bytes.len() as u64));
    Some(out)
}
