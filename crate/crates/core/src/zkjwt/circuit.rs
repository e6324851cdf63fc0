use serde::{Deserialize, Serialize};

use super::config::{CircuitConfig, NONCE_LEN};
use super::ZkJwtError;
use crate::csys::{Assignment, ConstraintSystem, CsError, Lc, Mode, Variable};
use crate::fieldcore::sponge::{self, domain};
use crate::fieldcore::Fe;
use crate::gadgets::base64::decode_char;
use crate::gadgets::basic::{
    barrel_shift, materialize, mul, pack_lc, to_bits, to_bits_canonical, Bit, ByteVar, GResult, OneHot,
};
use crate::gadgets::json::{g_json_claim, g_top_level_with, json_scan, ClaimSpec, JsonClaim};
use crate::gadgets::{g_base64url_decode, g_rs256_verify, g_sha256, g_sponge_hash, BigNatVar};
use crate::jwtkit::{b64url_encode, claim_get_payload, Jwt, RsaPublicKey};

/// The statement: everything the verifier sees.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicInputs {
    /// Provider modulus, little-endian 64-bit limbs.
    pub modulus: Vec<u64>,
    pub iss: String,
    pub zkaddr: Fe,
    pub t_max: u64,
    pub vk_u: [u8; 32],
    pub header_b64: String,
}

impl PublicInputs {
    pub fn new(pk: &RsaPublicKey, cfg: &CircuitConfig, iss: &str, zkaddr: Fe, t_max: u64, vk_u: [u8; 32], header_b64: &str) -> Self {
        Self {
            modulus: pk.limbs(cfg.rsa_limbs()),
            iss: iss.to_string(),
            zkaddr,
            t_max,
            vk_u,
            header_b64: header_b64.to_string(),
        }
    }

    /// Flat public vector in allocation order.
    pub fn to_elements(&self, cfg: &CircuitConfig) -> Result<Vec<Fe>, ZkJwtError> {
        if self.modulus.len() != cfg.rsa_limbs() {
            return Err(ZkJwtError::PublicInputInvalid("modulus limb count"));
        }
        let iss = sponge::pack_bytes(self.iss.as_bytes(), cfg.iss_max)
            .ok_or(ZkJwtError::PublicInputInvalid("iss too long"))?;
        let header = sponge::pack_bytes(self.header_b64.as_bytes(), cfg.header_max)
            .ok_or(ZkJwtError::PublicInputInvalid("header too long"))?;
        let mut v: Vec<Fe> = self.modulus.iter().map(|&l| Fe::from_u64(l)).collect();
        v.extend(iss);
        v.push(self.zkaddr);
        v.push(Fe::from_u64(self.t_max));
        v.extend(vk_elements(&self.vk_u));
        v.extend(header);
        Ok(v)
    }
}

/// Two 16-byte big-endian halves.
pub fn vk_elements(vk: &[u8; 32]) -> [Fe; 2] {
    [Fe::from_be_bytes_mod_order(&vk[..16]), Fe::from_be_bytes_mod_order(&vk[16..])]
}

pub fn nonce_field(vk_u: &[u8; 32], t_max: u64, r: Fe) -> Fe {
    let [a, b] = vk_elements(vk_u);
    sponge::hash(&[a, b, Fe::from_u64(t_max), r], domain::NONCE)
}

/// Base64url of the top 20 big-endian bytes of the nonce hash; 27 characters.
pub fn nonce_string(vk_u: &[u8; 32], t_max: u64, r: Fe) -> String {
    let h = nonce_field(vk_u, t_max, r).to_be_bytes();
    b64url_encode(&h[..20])
}

/// Offsets (i, l, j) of one claim in the decoded payload.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimHint {
    pub i: usize,
    pub l: usize,
    pub j: usize,
}

/// The secret side: token, salt, nonce randomness and parsing hints.
#[derive(Clone, Debug)]
pub struct WitnessBundle {
    pub jwt: Jwt,
    pub salt: Fe,
    pub r: Fe,
    /// One per entry of [`CircuitConfig::claim_specs`], same order.
    pub hints: Vec<ClaimHint>,
}

impl WitnessBundle {
    /// Computes hints with the claim oracle.
    pub fn new(cfg: &CircuitConfig, jwt: Jwt, salt: Fe, r: Fe) -> Result<Self, ZkJwtError> {
        let mut hints = Vec::new();
        for spec in cfg.claim_specs() {
            let span = claim_get_payload(&jwt.payload, &spec.name)
                .map_err(|e| ZkJwtError::ClaimMissing(e.to_string()))?;
            hints.push(ClaimHint { i: span.i, l: span.l, j: span.j });
        }
        Ok(Self { jwt, salt, r, hints })
    }
}

/// Concrete values driving one synthesis pass. All zero during setup.
struct Values {
    public: Vec<Fe>,
    msg: Vec<u8>,
    msg_len: usize,
    header_len: usize,
    sig: Vec<u64>,
    salt: Fe,
    r: Fe,
    hints: Vec<ClaimHint>,
}

impl Values {
    fn dummy(cfg: &CircuitConfig) -> Self {
        Values {
            public: vec![Fe::ZERO; cfg.num_public()],
            msg: vec![0; cfg.l_max],
            msg_len: 0,
            header_len: 0,
            sig: vec![0; cfg.rsa_limbs()],
            salt: Fe::ZERO,
            r: Fe::ZERO,
            hints: vec![ClaimHint::default(); cfg.claim_specs().len()],
        }
    }
}

fn synthesize(cs: &mut ConstraintSystem, cfg: &CircuitConfig, v: &Values) -> GResult<WitnessLayout> {
    let k = cfg.rsa_limbs();
    let iss_n = cfg.iss_max.div_ceil(31) + 1;
    let hdr_n = cfg.header_max.div_ceil(31) + 1;

    // public inputs
    let pubs: Vec<Variable> = v.public.iter().map(|x| cs.alloc_public(*x)).collect();
    let (modulus_vars, rest) = pubs.split_at(k);
    let (iss_vars, rest) = rest.split_at(iss_n);
    let zkaddr = rest[0];
    let t_max = rest[1];
    let vk = [rest[2], rest[3]];
    let header_vars = &rest[4..4 + hdr_n];

    // SHA-256 over header_b64 '.' payload_b64; inputs are ASCII so 7 bits each
    let (msg, digest) = cs.region("sha256", |cs| -> GResult<_> {
        let msg: Vec<ByteVar> =
            (0..cfg.l_max).map(|t| ByteVar::alloc(cs, v.msg[t], 7)).collect::<GResult<_>>()?;
        let len = cs.alloc_witness(Fe::from_u64(v.msg_len as u64));
        let d = g_sha256(cs, &msg, &len.into())?;
        Ok((msg, d))
    })?;

    // the header is public: its bytes, its length, and the '.' that ends it
    let header_len = cs.region("header", |cs| -> GResult<Lc> {
        let hmax = cfg.header_max;
        let hl = (v.header_len <= hmax).then_some(v.header_len);
        let sel = OneHot::alloc(cs, hl, hmax + 1)?;
        let mut masked = Vec::with_capacity(hmax);
        for (t, b) in msg.iter().enumerate().take(hmax) {
            let keep = sel.at_least(t + 1);
            let m = mul(cs, &b.value, &keep)?;
            masked.push(ByteVar::from_var(m, cs.value(m).low_u64() as u8));
        }
        let packed = pack_lc(&masked, &sel.index_lc(), hmax);
        for (lc, var) in packed.into_iter().zip(header_vars) {
            cs.enforce_equal(lc, (*var).into())?;
        }
        let items: Vec<Lc> = msg.iter().take(hmax + 1).map(|b| b.value.clone()).collect();
        let dot = sel.select(cs, &items)?;
        cs.enforce_equal(dot, Lc::constant_u64(b'.' as u64))?;
        Ok(sel.index_lc())
    })?;

    cs.region("rsa", |cs| -> GResult<()> {
        let sig = BigNatVar::alloc(cs, &v.sig)?;
        let modulus = BigNatVar::from_vars(modulus_vars, &v.public[..k].iter().map(|f| f.low_u64()).collect::<Vec<_>>());
        g_rs256_verify(cs, &sig, &modulus, &digest)
    })?;

    // align the payload segment and decode it
    let payload = cs.region("base64", |cs| -> GResult<Vec<ByteVar>> {
        let shift = to_bits(cs, &(header_len.clone() + Fe::ONE), cfg.shift_bits())?;
        let chars: Vec<Lc> = msg.iter().map(|b| b.value.clone()).collect();
        let shifted = barrel_shift(cs, &chars, &shift, cfg.payload_chars())?;
        let chars: Vec<ByteVar> = shifted
            .into_iter()
            .map(|lc| {
                let val = cs.eval(&lc).low_u64() as u8;
                ByteVar::from_lc(lc, val)
            })
            .collect();
        g_base64url_decode(cs, &chars)
    })?;

    let claims = cs.region("parse", |cs| -> GResult<Vec<JsonClaim>> {
        cs.enforce_equal(payload[0].value.clone(), Lc::constant_u64(b'{' as u64))?;
        let scan = cs.region("scan", |cs| json_scan(cs, &payload))?;
        let mut out = Vec::new();
        for (spec, hint) in cfg.claim_specs().iter().zip(&v.hints) {
            let c = cs.region(&spec.name, |cs| -> GResult<JsonClaim> {
                let i = cs.alloc_witness(Fe::from_u64(hint.i as u64));
                let l = cs.alloc_witness(Fe::from_u64(hint.l as u64));
                let j = cs.alloc_witness(Fe::from_u64(hint.j as u64));
                let c = g_json_claim(cs, &payload, spec, &i.into(), &l.into(), &j.into())?;
                cs.region("top_level", |cs| g_top_level_with(cs, &scan, &i.into()))?;
                if let Some(b) = c.bool_value {
                    cs.enforce_equal(b.lc(), Lc::one())?;
                }
                Ok(c)
            })?;
            out.push(c);
        }
        Ok(out)
    })?;
    let specs = cfg.claim_specs();
    let claim = |name: &str| -> &JsonClaim {
        let idx = specs.iter().position(|s| s.name == name).expect("claim configured");
        &claims[idx]
    };
    let spec_of = |name: &str| -> &ClaimSpec { specs.iter().find(|s| s.name == name).expect("claim configured") };
    let stid_name = cfg.stid_claim.name();

    let iss_pack = cs.region("iss", |cs| -> GResult<Vec<Lc>> {
        let c = claim("iss");
        let packed = pack_lc(&c.value, &c.value_len, spec_of("iss").max_value);
        for (lc, var) in packed.iter().zip(iss_vars) {
            cs.enforce_equal(lc.clone(), (*var).into())?;
        }
        Ok(packed)
    })?;

    let r_var = cs.region("nonce", |cs| -> GResult<Variable> {
        let r = cs.alloc_witness(v.r);
        let h = g_sponge_hash(cs, &[vk[0].into(), vk[1].into(), t_max.into(), r.into()], domain::NONCE)?;
        let h = materialize(cs, &h)?;
        let bits = to_bits_canonical(cs, &h.into())?;
        let bit = |i: usize| -> Bit { bits.get(i).copied().unwrap_or(Bit::Constant(false)) };
        let c = claim("nonce");
        cs.enforce_equal(c.value_len.clone(), Lc::constant_u64(NONCE_LEN as u64))?;
        for t in 0..NONCE_LEN {
            let d = decode_char(cs, &c.value[t], false)?;
            // char t carries bits 255 − 6t down to 250 − 6t of the big-endian value
            let mut expect = Lc::zero();
            for u in 0..6 {
                let pos = 255 - 6 * t as isize - u as isize;
                if pos < 96 {
                    continue;
                }
                expect.add_scaled(&bit(pos as usize).lc(), Fe::from_u64(1 << (5 - u)));
            }
            cs.enforce_equal(d.value_lc(), expect)?;
        }
        Ok(r)
    })?;

    let salt_var = cs.region("addr", |cs| -> GResult<Variable> {
        let stid = claim(stid_name);
        let aud = claim("aud");
        let mut inputs = pack_lc(&stid.value, &stid.value_len, spec_of(stid_name).max_value);
        inputs.extend(pack_lc(&aud.value, &aud.value_len, spec_of("aud").max_value));
        inputs.extend(iss_pack);
        let salt = cs.alloc_witness(v.salt);
        inputs.push(salt.into());
        let h = g_sponge_hash(cs, &inputs, domain::ADDRESS)?;
        cs.enforce_equal(h, zkaddr.into())?;
        Ok(salt)
    })?;
    Ok(WitnessLayout { salt: salt_var.index(), r: r_var.index() })
}

/// Positions of selected secrets inside the witness vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessLayout {
    pub salt: usize,
    pub r: usize,
}

pub fn witness_layout(cfg: &CircuitConfig) -> Result<WitnessLayout, ZkJwtError> {
    cfg.validate()?;
    let mut cs = ConstraintSystem::new(Mode::Prove);
    Ok(synthesize(&mut cs, cfg, &Values::dummy(cfg))?)
}

pub fn build_ckt(cfg: &CircuitConfig) -> Result<ConstraintSystem, ZkJwtError> {
    cfg.validate()?;
    let mut cs = ConstraintSystem::new(Mode::Setup);
    synthesize(&mut cs, cfg, &Values::dummy(cfg))?;
    cs.finish_setup();
    Ok(cs)
}

fn values_for(cfg: &CircuitConfig, bundle: &WitnessBundle, public: &PublicInputs) -> Result<Values, ZkJwtError> {
    let signed = bundle.jwt.signing_input();
    if signed.len() > cfg.l_max {
        return Err(ZkJwtError::JwtMalformed(format!("signed part {} > {}", signed.len(), cfg.l_max)));
    }
    if !signed.is_ascii() {
        return Err(ZkJwtError::JwtMalformed("non-ASCII token".into()));
    }
    let sig = bundle.jwt.signature();
    let k = cfg.rsa_limbs();
    if sig.len() > 8 * k {
        return Err(ZkJwtError::JwtMalformed("signature longer than modulus".into()));
    }
    let mut sig_le: Vec<u8> = sig.iter().rev().copied().collect();
    sig_le.resize(8 * k, 0);
    let sig_limbs = sig_le.chunks(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
    if bundle.hints.len() != cfg.claim_specs().len() {
        return Err(ZkJwtError::HintMismatch("hint count".into()));
    }
    let mut msg = signed.clone();
    msg.resize(cfg.l_max, 0);
    Ok(Values {
        public: public.to_elements(cfg)?,
        msg,
        msg_len: signed.len(),
        header_len: bundle.jwt.header_b64.len(),
        sig: sig_limbs,
        salt: bundle.salt,
        r: bundle.r,
        hints: bundle.hints.clone(),
    })
}

fn check_bundle(cfg: &CircuitConfig, bundle: &WitnessBundle, public: &PublicInputs) -> Result<(), ZkJwtError> {
    let jwt = &bundle.jwt;
    if jwt.header_b64.len() > cfg.header_max {
        return Err(ZkJwtError::JwtMalformed("header too long".into()));
    }
    if jwt.header_b64 != public.header_b64 {
        return Err(ZkJwtError::HintMismatch("header differs from public header".into()));
    }
    if jwt.payload.len() > cfg.max_payload || jwt.payload_b64.len() > cfg.payload_chars() {
        return Err(ZkJwtError::JwtMalformed("payload too long".into()));
    }
    for (spec, hint) in cfg.claim_specs().iter().zip(&bundle.hints) {
        let span = claim_get_payload(&jwt.payload, &spec.name).map_err(|e| ZkJwtError::ClaimMissing(e.to_string()))?;
        if (span.i, span.l, span.j) != (hint.i, hint.l, hint.j) {
            return Err(ZkJwtError::HintMismatch(format!("span of {}", spec.name)));
        }
        let klen = spec.key_literal().len();
        let ws_before = span.j - (klen);
        let ws_after = span.value_start - span.j - 1;
        let ws_trail = span.l - 1 - span.value_start - span.value_len;
        if ws_before > 2 || ws_after > 2 || ws_trail > 2 {
            return Err(ZkJwtError::HintMismatch(format!("whitespace around {}", spec.name)));
        }
        if span.raw.len() > spec.max_value {
            return Err(ZkJwtError::ClaimTooLong { claim: spec.name.clone(), len: span.raw.len(), max: spec.max_value });
        }
        let kind_ok = match spec.kind {
            crate::gadgets::ValueKind::String => span.value.as_str().is_some(),
            crate::gadgets::ValueKind::Boolean => span.value.as_bool() == Some(true),
        };
        if !kind_ok {
            return Err(ZkJwtError::HintMismatch(format!("value kind of {}", spec.name)));
        }
    }
    Ok(())
}

/// Full witness for an honest bundle.
pub fn fill_witness(cfg: &CircuitConfig, bundle: &WitnessBundle, public: &PublicInputs) -> Result<Assignment, ZkJwtError> {
    check_bundle(cfg, bundle, public)?;
    fill_witness_unchecked(cfg, bundle, public)
}

/// Witness computation without the consistency checks, for probing the
/// circuit with dishonest hints.
pub fn fill_witness_unchecked(
    cfg: &CircuitConfig,
    bundle: &WitnessBundle,
    public: &PublicInputs,
) -> Result<Assignment, ZkJwtError> {
    cfg.validate()?;
    let values = values_for(cfg, bundle, public)?;
    let mut cs = ConstraintSystem::new(Mode::Prove);
    match synthesize(&mut cs, cfg, &values) {
        Ok(_) => Ok(cs.into_assignment()),
        Err(e) => Err(ZkJwtError::Cs(e)),
    }
}

/// Synthesizes with constraints kept and reports the first violation, if any.
pub fn check_full(cfg: &CircuitConfig, bundle: &WitnessBundle, public: &PublicInputs) -> Result<(), ZkJwtError> {
    let values = values_for(cfg, bundle, public)?;
    let mut cs = ConstraintSystem::new(Mode::Full);
    synthesize(&mut cs, cfg, &values)?;
    cs.check_self().map_err(ZkJwtError::Cs)
}

impl From<CsError> for ZkJwtError {
    fn from(e: CsError) -> Self {
        ZkJwtError::Cs(e)
    }
}
