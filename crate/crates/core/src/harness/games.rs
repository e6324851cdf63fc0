use std::collections::BTreeMap;

use ed25519_dalek::{Signer, SigningKey};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{trial_rng, verify_region, Arena, CaseResult, GameParams, HarnessError, Report, User, DEFAULT_AUD};
use crate::csys::extract_witness;
use crate::fieldcore::Fe;
use crate::proto::{derive_address, message_digest, random_fe, Tag, Witness, ZkLoginSignature};
use crate::zkjwt::witness_layout;

/// Users per game.
const USERS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Ephemeral key and token leak after expiry; sign fresh messages with them.
    ExpiredWitnessReplay,
    /// Full compromise of one user; sign for another user's address.
    CrossAddressReuse,
    /// Observe a signature and graft ephemeral signatures onto its proof.
    SigmaTransplant,
    /// Control: replay an observed signature on its own message before expiry.
    HonestReplayBeforeExpiry,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::ExpiredWitnessReplay,
        Strategy::CrossAddressReuse,
        Strategy::SigmaTransplant,
        Strategy::HonestReplayBeforeExpiry,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::ExpiredWitnessReplay => "expired_witness_replay",
            Strategy::CrossAddressReuse => "cross_address_reuse",
            Strategy::SigmaTransplant => "sigma_transplant",
            Strategy::HonestReplayBeforeExpiry => "honest_replay_before_expiry",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Strategy::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| HarnessError::Unknown(s.to_string()))
    }
}

#[derive(Default)]
struct Tally {
    accepted: u64,
    rejected: u64,
    regions: BTreeMap<&'static str, u64>,
    control: bool,
}

impl Tally {
    fn record(&mut self, outcome: Result<(), &'static str>) {
        match outcome {
            Ok(()) => self.accepted += 1,
            Err(r) => {
                self.rejected += 1;
                *self.regions.entry(r).or_default() += 1;
            }
        }
    }

    fn case(&self, name: &str) -> CaseResult {
        let verdict = match (self.accepted, self.control) {
            (0, _) => "rejected".to_string(),
            (n, true) => format!("accepted {n}/{} (queried message, not a win)", n + self.rejected),
            (n, false) => format!("accepted {n}/{}", n + self.rejected),
        };
        let region = self.regions.iter().max_by_key(|(_, n)| **n).map(|(r, _)| r.to_string());
        CaseResult { name: name.to_string(), verdict, region }
    }
}

fn random_msg(rng: &mut ChaCha20Rng) -> Vec<u8> {
    let n = rng.gen_range(1..48);
    (0..n).map(|_| rng.gen()).collect()
}

fn fresh_msg(rng: &mut ChaCha20Rng, avoid: &[u8]) -> Vec<u8> {
    loop {
        let m = random_msg(rng);
        if m != avoid {
            return m;
        }
    }
}

fn with_sigma(sig: &ZkLoginSignature, sk: &SigningKey, msg: &[u8]) -> ZkLoginSignature {
    let mut s = sig.clone();
    s.vk_u = sk.verifying_key().to_bytes();
    s.sigma_u = sk.sign(&message_digest(msg)).to_bytes();
    s
}

fn users(arena: &mut Arena) -> Result<Vec<User>, HarnessError> {
    (0..USERS).map(|_| arena.random_user()).collect()
}

struct Attempt {
    name: &'static str,
    /// Signature offered for `msg`, or the stage that refused to produce one.
    sig: Result<ZkLoginSignature, &'static str>,
    msg: Vec<u8>,
    zkaddr: Fe,
    t_cur: u64,
}

/// Forgery game against zkLogin verification. A win is an accepted signature
/// on a message the honest signer never signed for that address.
pub fn run_zklogin_security(p: &GameParams, strategy: Strategy) -> Result<Report, HarnessError> {
    let mut arena = Arena::new(&p.cfg, p.backend, p.seed)?;
    let e = arena.epoch;
    let t_max = e + 1;
    let users = users(&mut arena)?;
    let mut tallies: BTreeMap<&'static str, Tally> = BTreeMap::new();
    let mut wins = 0;

    for trial in 0..p.trials {
        let mut rng = trial_rng(p.seed, trial);
        let u = rng.gen_range(0..USERS);
        let user = &users[u];
        let session = &arena.trial_session(user, t_max, trial)?;
        let m_q = random_msg(&mut rng);
        let sig_q = arena.sign(session, &m_q)?;
        let m_star = fresh_msg(&mut rng, &m_q);
        let mut attempts = Vec::new();
        match strategy {
            Strategy::ExpiredWitnessReplay => {
                let t_cur = t_max + 1;
                let sk = &session.witness.sk_u;
                let replay = with_sigma(&sig_q, sk, &m_star);
                let mut restamp = replay.clone();
                restamp.t_max = t_cur;
                let mut tag = session.tag.clone();
                tag.t_max = t_cur;
                let reprove = arena.zk.tws_sign(&tag, &session.witness, &m_star).map_err(|_| "prover");
                for (name, sig) in
                    [("replay_expired_key", Ok(replay)), ("restamp_t_max", Ok(restamp)), ("reprove_new_expiry", reprove)]
                {
                    attempts.push(Attempt { name, sig, msg: m_star.clone(), zkaddr: user.zkaddr, t_cur });
                }
            }
            Strategy::CrossAddressReuse => {
                let v = (u + rng.gen_range(1..USERS)) % USERS;
                let target = &users[v];
                let own = with_sigma(&sig_q, &session.witness.sk_u, &m_star);
                let mut tag = session.tag.clone();
                tag.zkaddr = target.zkaddr;
                let reprove = arena.zk.tws_sign(&tag, &session.witness, &m_star).map_err(|_| "prover");
                let guessed = Witness { salt: random_fe(&mut rng), ..session.witness.clone() };
                let guess = arena.zk.tws_sign(&tag, &guessed, &m_star).map_err(|_| "prover");
                for (name, sig) in [("relabel_address", Ok(own)), ("reprove_for_target", reprove), ("guess_salt", guess)] {
                    attempts.push(Attempt { name, sig, msg: m_star.clone(), zkaddr: target.zkaddr, t_cur: e });
                }
            }
            Strategy::SigmaTransplant => {
                let sk_e = SigningKey::generate(&mut rng);
                let own = with_sigma(&sig_q, &sk_e, &m_star);
                let mut foreign = own.clone();
                foreign.vk_u = sig_q.vk_u;
                let moved = sig_q.clone();
                for (name, sig) in [
                    ("own_key_with_victim_proof", own),
                    ("victim_key_foreign_sigma", foreign),
                    ("sigma_from_other_message", moved),
                ] {
                    attempts.push(Attempt { name, sig: Ok(sig), msg: m_star.clone(), zkaddr: user.zkaddr, t_cur: e });
                }
            }
            Strategy::HonestReplayBeforeExpiry => {
                tallies.entry("replay_queried").or_default().control = true;
                attempts.push(Attempt {
                    name: "replay_queried",
                    sig: Ok(sig_q.clone()),
                    msg: m_q.clone(),
                    zkaddr: user.zkaddr,
                    t_cur: e,
                });
            }
        }
        let mut won = false;
        for a in attempts {
            let outcome = a.sig.and_then(|sig| {
                arena
                    .zk
                    .zklogin_check(&arena.registry, a.zkaddr, &user.iss, &a.msg, &sig, a.t_cur)
                    .map_err(|e| verify_region(&e))
            });
            let queried = a.msg == m_q && a.zkaddr == user.zkaddr;
            won |= outcome.is_ok() && !queried;
            tallies.entry(a.name).or_default().record(outcome);
        }
        wins += won as u64;
    }

    let cases = tallies.iter().map(|(n, t)| t.case(n)).collect();
    let rate = if p.trials == 0 { 0.0 } else { wins as f64 / p.trials as f64 };
    Ok(Report { game: format!("zklogin_security/{}", strategy.name()), trials: p.trials, wins, advantage: rate, cases })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distinguisher {
    /// Pulls the salt out of a witness-carrying proof and recomputes both addresses.
    SaltReader,
    /// Low bit of a hash of the proof bytes.
    ProofParity,
    /// Tries small salts against both identities.
    SaltDictionary,
}

impl Distinguisher {
    pub const ALL: [Distinguisher; 3] =
        [Distinguisher::SaltReader, Distinguisher::ProofParity, Distinguisher::SaltDictionary];

    pub fn name(self) -> &'static str {
        match self {
            Distinguisher::SaltReader => "salt_reader",
            Distinguisher::ProofParity => "proof_parity",
            Distinguisher::SaltDictionary => "salt_dictionary",
        }
    }
}

const DICTIONARY: u64 = 16;

/// The challenger picks b, user b signs a fresh message, and the adversary,
/// who knows both identifiers but neither salt, guesses b. Advantage is
/// |Pr[guess = b] − 1/2|, maximized over the distinguishers.
pub fn run_unlinkability(p: &GameParams, identities: [(&str, &str); 2]) -> Result<Report, HarnessError> {
    if identities[0].1 != identities[1].1 {
        return Err(HarnessError::GameDegenerate("iss differs between the two identities".into()));
    }
    if identities[0].0 == identities[1].0 {
        return Err(HarnessError::GameDegenerate("identical identities".into()));
    }
    let iss = identities[0].1;
    let mut arena = Arena::new(&p.cfg, p.backend, p.seed)?;
    if arena.providers.get(iss).is_none() {
        arena.add_provider(iss);
    }
    let layout = witness_layout(&p.cfg)?;
    let t_max = arena.epoch + 1;
    let users = [
        arena.user(iss, identities[0].0, DEFAULT_AUD)?,
        arena.user(iss, identities[1].0, DEFAULT_AUD)?,
    ];

    let cfg = p.cfg.clone();
    let addr = |stid: &str, salt: Fe| derive_address(&cfg, stid, DEFAULT_AUD, iss, salt).ok();
    let match_salt = |salt: Fe, zkaddr: Fe| (0..2).find(|&i| addr(identities[i].0, salt) == Some(zkaddr));
    let mut wins = [0u64; 3];

    for trial in 0..p.trials {
        let mut rng = trial_rng(p.seed, trial);
        let b = rng.gen_range(0..2usize);
        let s = arena.trial_session(&users[b], t_max, trial)?;
        let msg = random_msg(&mut rng);
        let sig = arena.sign(&s, &msg)?;
        let zkaddr = users[b].zkaddr;
        for (d, w) in Distinguisher::ALL.iter().zip(wins.iter_mut()) {
            let coin = rng.gen_range(0..2usize);
            let guess = match d {
                Distinguisher::SaltReader => extract_witness(arena.zk.circuit(), &sig.pi)
                    .ok()
                    .and_then(|wit| wit.get(layout.salt).copied())
                    .and_then(|salt| match_salt(salt, zkaddr))
                    .unwrap_or(coin),
                Distinguisher::ProofParity => (Sha256::digest(sig.pi.as_bytes())[0] & 1) as usize,
                Distinguisher::SaltDictionary => {
                    (0..DICTIONARY).find_map(|s| match_salt(Fe::from_u64(s), zkaddr)).unwrap_or(coin)
                }
            };
            *w += (guess == b) as u64;
        }
    }

    let adv = |w: u64| if p.trials == 0 { 0.0 } else { (w as f64 / p.trials as f64 - 0.5).abs() };
    let best = (0..3).max_by(|&i, &j| adv(wins[i]).total_cmp(&adv(wins[j]))).unwrap_or(0);
    let cases = Distinguisher::ALL
        .iter()
        .zip(wins)
        .map(|(d, w)| CaseResult {
            name: d.name().to_string(),
            verdict: format!("correct {w}/{} advantage {:.4}", p.trials, adv(w)),
            region: None,
        })
        .collect();
    Ok(Report {
        game: format!("unlinkability/{}", p.backend),
        trials: p.trials,
        wins: wins[best],
        advantage: adv(wins[best]),
        cases,
    })
}

/// Tag-level games: unforgeability under a fixed tag, and witness hiding
/// (recovering the salt from observed signatures).
pub fn run_tws_games(p: &GameParams) -> Result<Vec<Report>, HarnessError> {
    let mut arena = Arena::new(&p.cfg, p.backend, p.seed)?;
    let t_max = arena.epoch + 1;
    let users = users(&mut arena)?;
    let layout = witness_layout(&p.cfg)?;
    let mut forge: BTreeMap<&'static str, Tally> = BTreeMap::new();
    let mut hide: BTreeMap<&'static str, Tally> = BTreeMap::new();
    let (mut forge_wins, mut hide_wins) = (0, 0);

    for trial in 0..p.trials {
        let mut rng = trial_rng(p.seed, trial);
        let user = &users[rng.gen_range(0..USERS)];
        let session = arena.trial_session(user, t_max, trial)?;
        let tag: &Tag = &session.tag;
        let queried: Vec<Vec<u8>> = (0..3).map(|_| random_msg(&mut rng)).collect();
        let sigs = queried.iter().map(|m| arena.sign(&session, m)).collect::<Result<Vec<_>, _>>()?;
        let m_star = loop {
            let m = random_msg(&mut rng);
            if !queried.contains(&m) {
                break m;
            }
        };

        let sk_e = SigningKey::generate(&mut rng);
        let mut other_tag = tag.clone();
        other_tag.t_max += 1;
        let attempts: [(&'static str, &Tag, ZkLoginSignature); 3] = [
            ("maul_message", tag, sigs[0].clone()),
            ("own_key_with_proof", tag, with_sigma(&sigs[0], &sk_e, &m_star)),
            ("shift_tag", &other_tag, sigs[1].clone()),
        ];
        let mut won = false;
        for (name, t, sig) in attempts {
            let msg = if name == "shift_tag" { &queried[1] } else { &m_star };
            let outcome = arena.zk.tws_check(t, msg, &sig).map_err(|e| verify_region(&e));
            won |= outcome.is_ok();
            forge.entry(name).or_default().record(outcome);
        }
        forge_wins += won as u64;

        let extracted = sigs.iter().find_map(|s| {
            extract_witness(arena.zk.circuit(), &s.pi).ok().and_then(|w| w.get(layout.salt).copied())
        });
        let recovers = |salt: Fe| {
            derive_address(&p.cfg, &user.ctx.stid, &user.ctx.aud, &user.iss, salt).ok() == Some(user.zkaddr)
        };
        let mut won = false;
        for (name, guess) in [("read_proof", extracted), ("random_salt", Some(random_fe(&mut rng)))] {
            let outcome = match guess {
                Some(s) if recovers(s) => Ok(()),
                Some(_) => Err("wrong_salt"),
                None => Err("no_witness_in_proof"),
            };
            won |= outcome.is_ok();
            hide.entry(name).or_default().record(outcome);
        }
        hide_wins += won as u64;
    }

    let rate = |w: u64| if p.trials == 0 { 0.0 } else { w as f64 / p.trials as f64 };
    Ok(vec![
        Report {
            game: "tws_unforgeability".into(),
            trials: p.trials,
            wins: forge_wins,
            advantage: rate(forge_wins),
            cases: forge.iter().map(|(n, t)| t.case(n)).collect(),
        },
        Report {
            game: format!("tws_witness_hiding/{}", p.backend),
            trials: p.trials,
            wins: hide_wins,
            advantage: rate(hide_wins),
            cases: hide.iter().map(|(n, t)| t.case(n)).collect(),
        },
    ])
}
