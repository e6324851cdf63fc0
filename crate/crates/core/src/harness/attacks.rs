use std::collections::{BTreeMap, BTreeSet};

use ed25519_dalek::SigningKey;
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::{trial_rng, verify_region, Arena, CaseResult, GameParams, HarnessError, Report, User};
use crate::csys::CsError;
use crate::jwtkit::{claim_get, jwt_issue_raw, ClaimSet, JwkRegistry, Jwt};
use crate::proto::{derive_address, random_fe, Session};
use crate::zkjwt::{fill_witness_unchecked, nonce_string, ClaimHint, PublicInputs, WitnessBundle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackCase {
    /// Stretch the identifier span over the following member.
    OverExtendSlice,
    /// Point the identifier hint at `"sub"` inside the key `"\"sub"`.
    EscapedQuoteKey,
    /// Use a signature after T_max.
    ExpiredEphemeral,
    /// Request T_max = T_cur + δ.
    LongExpiry,
    /// Token signed under a key no longer published.
    StaleJwk,
    /// Prove a stolen token for the attacker's own ephemeral key.
    NonceForeignKey,
    /// Use a token issued for one audience to claim the address of another.
    AudSwap,
    /// Move one user's ephemeral signature into another user's signature.
    SigmaUTransplant,
}

impl AttackCase {
    pub const ALL: [AttackCase; 8] = [
        AttackCase::OverExtendSlice,
        AttackCase::EscapedQuoteKey,
        AttackCase::ExpiredEphemeral,
        AttackCase::LongExpiry,
        AttackCase::StaleJwk,
        AttackCase::NonceForeignKey,
        AttackCase::AudSwap,
        AttackCase::SigmaUTransplant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackCase::OverExtendSlice => "over_extend_slice",
            AttackCase::EscapedQuoteKey => "escaped_quote_key",
            AttackCase::ExpiredEphemeral => "expired_ephemeral",
            AttackCase::LongExpiry => "long_expiry",
            AttackCase::StaleJwk => "stale_jwk",
            AttackCase::NonceForeignKey => "nonce_foreign_key",
            AttackCase::AudSwap => "aud_swap",
            AttackCase::SigmaUTransplant => "sigma_u_transplant",
        }
    }

    /// Where the rejection should come from. Circuit regions are paths.
    pub fn expected_region(self, stid_claim: &str) -> String {
        match self {
            AttackCase::OverExtendSlice => format!("parse/{stid_claim}/string"),
            AttackCase::EscapedQuoteKey => format!("parse/{stid_claim}/top_level"),
            AttackCase::ExpiredEphemeral | AttackCase::LongExpiry => "freshness".into(),
            AttackCase::StaleJwk => "jwk".into(),
            AttackCase::NonceForeignKey => "nonce".into(),
            AttackCase::AudSwap => "addr".into(),
            AttackCase::SigmaUTransplant => "ephemeral_signature".into(),
        }
    }
}

impl std::str::FromStr for AttackCase {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        AttackCase::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| HarnessError::Unknown(s.to_string()))
    }
}

/// Sessions created on demand and shared by the cases of one seed.
struct Scene<'a> {
    arena: &'a mut Arena,
    sessions: BTreeMap<&'static str, (User, Session)>,
}

impl Scene<'_> {
    fn session(&mut self, key: &'static str, t_max: u64) -> Result<(User, Session), HarnessError> {
        if let Some(s) = self.sessions.get(key) {
            return Ok(s.clone());
        }
        let user = self.arena.random_user()?;
        let s = self.arena.login(&user, t_max)?;
        self.sessions.insert(key, (user.clone(), s.clone()));
        Ok((user, s))
    }
}

/// Runs the circuit on a (possibly dishonest) assignment; Err carries the first violated region.
fn circuit_outcome(arena: &Arena, bundle: &WitnessBundle, public: &PublicInputs) -> Result<(), String> {
    let cfg = arena.cfg();
    let z = fill_witness_unchecked(cfg, bundle, public).map_err(|e| format!("witness: {e}"))?;
    match arena.zk.circuit().satisfied(&z) {
        Ok(()) => Ok(()),
        Err(CsError::Violation { region, .. }) => Err(region),
        Err(e) => Err(format!("witness: {e}")),
    }
}

fn short_id(rng: &mut ChaCha20Rng) -> String {
    rng.gen_range(100_000u32..1_000_000).to_string()
}

fn hints_for(arena: &Arena, jwt: &Jwt) -> Option<Vec<ClaimHint>> {
    arena
        .cfg()
        .claim_specs()
        .iter()
        .map(|s| claim_get(jwt, &s.name).ok().map(|c| ClaimHint { i: c.i, l: c.l, j: c.j }))
        .collect()
}

fn attack(scene: &mut Scene<'_>, case: AttackCase, rng: &mut ChaCha20Rng) -> Result<Result<(), String>, HarnessError> {
    let e = scene.arena.epoch;
    let delta = scene.arena.cfg().delta;
    let cfg = scene.arena.cfg().clone();
    let stid_name = cfg.stid_claim.name();
    let iss = super::DEFAULT_ISS;
    let aud = super::DEFAULT_AUD;
    let msg: Vec<u8> = (0..24).map(|_| rng.gen()).collect();
    let sk_a = SigningKey::generate(rng);
    let vk_a = sk_a.verifying_key().to_bytes();
    let r = random_fe(rng);
    let salt = random_fe(rng);
    let op = scene.arena.providers.get(iss).expect("default provider").clone();

    Ok(match case {
        AttackCase::OverExtendSlice => {
            let sub = short_id(rng);
            let nonce = nonce_string(&vk_a, e + 1, r);
            let claims = ClaimSet::new().with("iss", iss).with("nonce", nonce).with(stid_name, sub).with("aud", aud);
            let jwt = op.issue_claims(&claims)?;
            let mut hints = hints_for(scene.arena, &jwt).expect("claims present");
            let idx = cfg.claim_specs().iter().position(|s| s.name == stid_name).expect("stid spec");
            // through the closing brace: the value becomes  <sub>","aud":"<aud>
            hints[idx].l = jwt.payload.len() - hints[idx].i;
            let span = &jwt.payload[hints[idx].i..];
            let fake = String::from_utf8_lossy(&span[hints[idx].j + 2..span.len() - 2]).into_owned();
            let zkaddr = derive_address(&cfg, &fake, aud, iss, salt).unwrap_or(salt);
            let public = PublicInputs::new(op.public(), &cfg, iss, zkaddr, e + 1, vk_a, &jwt.header_b64);
            circuit_outcome(scene.arena, &WitnessBundle { jwt, salt, r, hints }, &public)
        }
        AttackCase::EscapedQuoteKey => {
            let real = short_id(rng);
            let fake = loop {
                let f = short_id(rng);
                if f != real {
                    break f;
                }
            };
            let nonce = nonce_string(&vk_a, e + 1, r);
            let payload = format!(
                r#"{{"iss":"{iss}","aud":"{aud}","{stid_name}":"{real}","\"{stid_name}":"{fake}","nonce":"{nonce}"}}"#
            );
            let jwt = jwt_issue_raw(&op.key, &op.kid, payload.as_bytes(), cfg.l_max)?;
            let mut hints = hints_for(scene.arena, &jwt).expect("claims present");
            let idx = cfg.claim_specs().iter().position(|s| s.name == stid_name).expect("stid spec");
            let needle = format!(r#""{stid_name}":"{fake}","#);
            let at = payload.find(&needle).expect("crafted member");
            hints[idx] = ClaimHint { i: at, l: needle.len(), j: stid_name.len() + 2 };
            let zkaddr = derive_address(&cfg, &fake, aud, iss, salt)?;
            let public = PublicInputs::new(op.public(), &cfg, iss, zkaddr, e + 1, vk_a, &jwt.header_b64);
            circuit_outcome(scene.arena, &WitnessBundle { jwt, salt, r, hints }, &public)
        }
        AttackCase::NonceForeignKey => {
            let (victim, s) = scene.session("victim", e + 1)?;
            let w = &s.witness;
            let public = PublicInputs::new(&s.tag.pk, &cfg, iss, victim.zkaddr, e + 1, vk_a, &w.jwt.header_b64);
            let bundle = WitnessBundle::new(&cfg, w.jwt.clone(), w.salt, w.r)?;
            circuit_outcome(scene.arena, &bundle, &public)
        }
        AttackCase::AudSwap => {
            let (user, s) = scene.session("victim", e + 1)?;
            let w = &s.witness;
            let zkaddr = derive_address(&cfg, &user.ctx.stid, "other.example", iss, w.salt)?;
            let public = PublicInputs::new(&s.tag.pk, &cfg, iss, zkaddr, e + 1, w.vk_u(), &w.jwt.header_b64);
            let bundle = WitnessBundle::new(&cfg, w.jwt.clone(), w.salt, w.r)?;
            circuit_outcome(scene.arena, &bundle, &public)
        }
        AttackCase::ExpiredEphemeral => {
            let (user, s) = scene.session("victim", e + 1)?;
            let sig = scene.arena.zk.zklogin_sign(&s, &msg)?;
            let a = &scene.arena;
            a.zk.zklogin_check(&a.registry, user.zkaddr, iss, &msg, &sig, e + 2).map_err(|x| verify_region(&x).into())
        }
        AttackCase::LongExpiry => {
            let (user, s) = scene.session("long", e + delta)?;
            let sig = scene.arena.zk.zklogin_sign(&s, &msg)?;
            let a = &scene.arena;
            a.zk.zklogin_check(&a.registry, user.zkaddr, iss, &msg, &sig, e).map_err(|x| verify_region(&x).into())
        }
        AttackCase::StaleJwk => {
            let (user, s) = scene.session("victim", e + 1)?;
            let sig = scene.arena.zk.zklogin_sign(&s, &msg)?;
            let stale = JwkRegistry::new(scene.arena.registry.window());
            op.publish(&stale, e - scene.arena.registry.window() - 1);
            scene.arena.zk.zklogin_check(&stale, user.zkaddr, iss, &msg, &sig, e).map_err(|x| verify_region(&x).into())
        }
        AttackCase::SigmaUTransplant => {
            let (_, sa) = scene.session("victim", e + 1)?;
            let (ub, sb) = scene.session("other", e + 1)?;
            let from_a = scene.arena.zk.zklogin_sign(&sa, &msg)?;
            let mut forged = scene.arena.zk.zklogin_sign(&sb, &msg)?;
            forged.sigma_u = from_a.sigma_u;
            let a = &scene.arena;
            a.zk.zklogin_check(&a.registry, ub.zkaddr, iss, &msg, &forged, e).map_err(|x| verify_region(&x).into())
        }
    })
}

/// One attack on a fresh scene. The verdict is "rejected" or "accepted".
pub fn run_attack(arena: &mut Arena, case: AttackCase, rng: &mut ChaCha20Rng) -> Result<CaseResult, HarnessError> {
    let mut scene = Scene { arena, sessions: BTreeMap::new() };
    let outcome = attack(&mut scene, case, rng)?;
    Ok(match outcome {
        Ok(()) => CaseResult { name: case.name().into(), verdict: "accepted".into(), region: None },
        Err(region) => CaseResult { name: case.name().into(), verdict: "rejected".into(), region: Some(region) },
    })
}

/// Every case once per seed. Regions seen across seeds are joined by `|`.
pub fn run_attacks(p: &GameParams, cases: &[AttackCase], seeds: u64) -> Result<Report, HarnessError> {
    let mut accepted: BTreeMap<AttackCase, u64> = BTreeMap::new();
    let mut regions: BTreeMap<AttackCase, BTreeSet<String>> = BTreeMap::new();
    for s in 0..seeds {
        let seed = p.seed.wrapping_add(s);
        let mut arena = Arena::new(&p.cfg, p.backend, seed)?;
        let mut scene = Scene { arena: &mut arena, sessions: BTreeMap::new() };
        for &case in cases {
            let mut rng = trial_rng(seed, case as u64);
            match attack(&mut scene, case, &mut rng)? {
                Ok(()) => *accepted.entry(case).or_default() += 1,
                Err(region) => {
                    regions.entry(case).or_default().insert(region);
                }
            }
        }
    }
    let trials = seeds * cases.len() as u64;
    let wins: u64 = accepted.values().sum();
    let results = cases
        .iter()
        .map(|c| {
            let n = accepted.get(c).copied().unwrap_or(0);
            CaseResult {
                name: c.name().into(),
                verdict: if n == 0 { "rejected".into() } else { format!("accepted {n}/{seeds}") },
                region: regions.get(c).map(|r| r.iter().cloned().collect::<Vec<_>>().join("|")),
            }
        })
        .collect();
    Ok(Report {
        game: "attacks".into(),
        trials,
        wins,
        advantage: if trials == 0 { 0.0 } else { wins as f64 / trials as f64 },
        cases: results,
    })
}
