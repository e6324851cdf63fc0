//! Generic tag-based signature from any signature scheme Σ: the signer
//! commits to (t, M, w) and proves in zero knowledge that the opening
//! contains a valid Σ-signature w on t. Σ here is RS256 with a small key.

use rand::RngCore;

use super::derive::message_fe;
use super::tws::random_fe;
use super::ProtoError;
use crate::csys::{self, ConstraintSystem, Mode, Proof, ProofBackendKey, Variable};
use crate::fieldcore::sponge::{self, domain};
use crate::fieldcore::Fe;
use crate::gadgets::basic::{pack_lc, GResult};
use crate::gadgets::sha256::alloc_message;
use crate::gadgets::{g_rs256_verify, g_sha256, g_sponge_hash, BigNatVar};
use crate::jwtkit::RsaPublicKey;

/// Longest tag t (one SHA-256 block).
pub const GTWS_T_MAX: usize = 55;
pub const GTWS_RSA_BITS: usize = 1024;
const K: usize = GTWS_RSA_BITS / 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GtwsSignature {
    pub c: Fe,
    pub pi: Proof,
}

fn sig_limbs(w: &[u8]) -> Option<Vec<u64>> {
    if w.len() > 8 * K {
        return None;
    }
    let mut le: Vec<u8> = w.iter().rev().copied().collect();
    le.resize(8 * K, 0);
    Some(le.chunks(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect())
}

/// c = Com(t, M, w; r).
pub fn commit(t: &[u8], msg: &[u8], w: &[u8], r: Fe) -> Option<Fe> {
    let mut inputs = sponge::pack_bytes(t, GTWS_T_MAX)?;
    inputs.push(message_fe(msg));
    inputs.extend(sig_limbs(w)?.into_iter().map(Fe::from_u64));
    inputs.push(r);
    Some(sponge::hash(&inputs, domain::COMMIT))
}

/// The same commitment shape on an 8-bit message space, small enough to
/// check binding exhaustively.
pub fn toy_commit(x: u8, r: u8) -> Fe {
    sponge::hash(&[Fe::from_u64(x as u64), Fe::from_u64(r as u64)], domain::TOY_COMMIT)
}

struct Values {
    public: Vec<Fe>,
    t: Vec<u8>,
    sig: Vec<u64>,
    r: Fe,
}

fn num_public() -> usize {
    K + GTWS_T_MAX.div_ceil(31) + 1 + 2
}

fn synthesize(cs: &mut ConstraintSystem, v: &Values) -> GResult<()> {
    let pubs: Vec<Variable> = v.public.iter().map(|x| cs.alloc_public(*x)).collect();
    let (modulus_vars, rest) = pubs.split_at(K);
    let t_n = GTWS_T_MAX.div_ceil(31) + 1;
    let (t_vars, rest) = rest.split_at(t_n);
    let (m, c) = (rest[0], rest[1]);

    let (t_pack, digest) = cs.region("sha256", |cs| -> GResult<_> {
        let t = alloc_message(cs, &v.t, GTWS_T_MAX)?;
        let len = cs.alloc_witness(Fe::from_u64(v.t.len() as u64));
        let d = g_sha256(cs, &t, &len.into())?;
        let packed = pack_lc(&t, &len.into(), GTWS_T_MAX);
        for (lc, var) in packed.iter().zip(t_vars) {
            cs.enforce_equal(lc.clone(), (*var).into())?;
        }
        Ok((packed, d))
    })?;
    let sig = cs.region("rsa", |cs| -> GResult<BigNatVar> {
        let sig = BigNatVar::alloc(cs, &v.sig)?;
        let modulus =
            BigNatVar::from_vars(modulus_vars, &v.public[..K].iter().map(|f| f.low_u64()).collect::<Vec<_>>());
        g_rs256_verify(cs, &sig, &modulus, &digest)?;
        Ok(sig)
    })?;
    cs.region("commit", |cs| -> GResult<()> {
        let mut inputs = t_pack;
        inputs.push(m.into());
        inputs.extend(sig.limbs.iter().cloned());
        inputs.push(cs.alloc_witness(v.r).into());
        let h = g_sponge_hash(cs, &inputs, domain::COMMIT)?;
        cs.enforce_equal(h, c.into())
    })
}

pub struct Gtws {
    circuit: ConstraintSystem,
    backend: ProofBackendKey,
}

impl Gtws {
    pub fn new(backend: ProofBackendKey) -> Result<Self, ProtoError> {
        let mut cs = ConstraintSystem::new(Mode::Setup);
        let dummy = Values { public: vec![Fe::ZERO; num_public()], t: Vec::new(), sig: vec![0; K], r: Fe::ZERO };
        synthesize(&mut cs, &dummy)?;
        cs.finish_setup();
        Ok(Self { circuit: cs, backend })
    }

    pub fn circuit(&self) -> &ConstraintSystem {
        &self.circuit
    }

    fn public(t: &[u8], pk: &RsaPublicKey, msg: &[u8], c: Fe) -> Option<Vec<Fe>> {
        if pk.bits() as usize > GTWS_RSA_BITS {
            return None;
        }
        let mut v: Vec<Fe> = pk.limbs(K).into_iter().map(Fe::from_u64).collect();
        v.extend(sponge::pack_bytes(t, GTWS_T_MAX)?);
        v.push(message_fe(msg));
        v.push(c);
        Some(v)
    }

    pub fn sign(
        &self,
        t: &[u8],
        pk: &RsaPublicKey,
        w: &[u8],
        msg: &[u8],
        rng: &mut impl RngCore,
    ) -> Result<GtwsSignature, ProtoError> {
        if t.len() > GTWS_T_MAX {
            return Err(ProtoError::StringTooLong("t"));
        }
        if !pk.verify(t, w) {
            return Err(ProtoError::PredicateFalse("signature on t".into()));
        }
        let r = random_fe(rng);
        let c = commit(t, msg, w, r).ok_or_else(|| ProtoError::PredicateFalse("signature size".into()))?;
        let public = Self::public(t, pk, msg, c).ok_or(ProtoError::StringTooLong("modulus"))?;
        let values = Values { public, t: t.to_vec(), sig: sig_limbs(w).expect("checked by commit"), r };
        let mut cs = ConstraintSystem::new(Mode::Prove);
        synthesize(&mut cs, &values)?;
        let pi = csys::prove(&self.backend, &self.circuit, &cs.into_assignment())?;
        Ok(GtwsSignature { c, pi })
    }

    pub fn verify(&self, t: &[u8], pk: &RsaPublicKey, msg: &[u8], sig: &GtwsSignature) -> bool {
        match Self::public(t, pk, msg, sig.c) {
            Some(public) => csys::verify(&self.backend, &self.circuit, &public, &sig.pi),
            None => false,
        }
    }
}
