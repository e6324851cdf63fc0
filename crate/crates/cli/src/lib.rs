//! The `zklogin` command: mock provider, wallet, salt service, prover and
//! the attack and game harness.

pub mod config;
pub mod files;
pub mod serve;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ed25519_dalek::{Signer, SigningKey};
use serde_json::json;

use zklogin_core::csys::{BackendKind, Proof};
use zklogin_core::fieldcore::Fe;
use zklogin_core::harness::{
    run_attacks, run_tws_games, run_unlinkability, run_zklogin_security, verify_region, AttackCase, GameParams,
    Report, Strategy, DEFAULT_ISS, REPORT_NOTICE,
};
use zklogin_core::jwtkit::{b64url_decode, b64url_encode, claim_get, jwt_verify, ClaimSet, JwkRegistry, Jwt};
use zklogin_core::proto::{derive_address, derive_salt, message_digest, random_fe, Tag, Witness, ZkLogin, ZkLoginSignature};
use zklogin_core::zkjwt::CircuitConfig;

use config::Config;
use files::{bytes32, fe_from_hex, read_json, write_json, ProofFile, ProviderFile, WalletFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments, files or configuration. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The token does not check out against the configured keys.
    #[error("bad token: {0}")]
    Auth(String),
    /// A verification or operation failed. Exit code 1.
    #[error("{0}")]
    Failure(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Auth(_) | CliError::Failure(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "zklogin", version, about = "zkLogin wallet, provider, salt and prover tooling")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Current epoch (T_cur).
    #[arg(long, global = true)]
    pub epoch: Option<u64>,
    /// Proof backend: transparent or simulation.
    #[arg(long, global = true)]
    pub backend: Option<BackendKind>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mock OpenID provider.
    Op {
        #[command(subcommand)]
        cmd: OpCmd,
    },
    /// Ephemeral keys, addresses, signing and verification.
    Wallet {
        #[command(subcommand)]
        cmd: WalletCmd,
    },
    /// Salt derivation.
    Salt {
        #[command(subcommand)]
        cmd: SaltCmd,
    },
    /// Circuit construction and statistics.
    Circuit {
        #[command(subcommand)]
        cmd: CircuitCmd,
    },
    /// Prove a token for a wallet's ephemeral key.
    Prove(ProveArgs),
    /// Attack corpus.
    Attack {
        #[command(subcommand)]
        cmd: AttackCmd,
    },
    /// Security games.
    Game {
        #[command(subcommand)]
        cmd: GameCmd,
    },
    /// HTTP services.
    Serve {
        #[command(subcommand)]
        cmd: ServeCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum OpCmd {
    /// New provider key, published at the current epoch.
    Keygen {
        #[arg(long)]
        iss: String,
        /// Modulus size; defaults to the circuit profile's.
        #[arg(long)]
        bits: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Issue an ID token.
    Issue {
        /// Provider key file.
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        sub: String,
        #[arg(long)]
        aud: String,
        #[arg(long)]
        nonce: String,
        /// Adds `email` and `email_verified: true`.
        #[arg(long)]
        email: Option<String>,
        /// Extra string claim, `name=value`. Repeatable.
        #[arg(long = "claim")]
        claims: Vec<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum WalletCmd {
    /// Fresh ephemeral key pair and nonce randomness.
    Init {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Expiry epoch; defaults to the current epoch plus one.
        #[arg(long)]
        t_max: Option<u64>,
    },
    /// zkLogin address for a token (or explicit claims) and salt.
    Address {
        #[arg(long)]
        jwt: Option<String>,
        #[arg(long)]
        stid: Option<String>,
        #[arg(long)]
        aud: Option<String>,
        #[arg(long)]
        iss: Option<String>,
        #[arg(long)]
        salt: String,
    },
    /// Sign a message; proves first unless a proof file is given.
    Sign {
        #[arg(long)]
        wallet: PathBuf,
        #[arg(long)]
        jwt: String,
        #[arg(long)]
        salt: String,
        #[arg(long)]
        msg: String,
        #[arg(long)]
        proof: Option<PathBuf>,
    },
    /// Verify a signature. Exit code 1 when it does not verify.
    Verify {
        /// Address, hex.
        #[arg(long)]
        addr: String,
        #[arg(long)]
        iss: String,
        #[arg(long)]
        msg: String,
        /// Base64url signature, or @file.
        #[arg(long)]
        sig: String,
        /// Defaults to --epoch.
        #[arg(long)]
        t_cur: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SaltCmd {
    /// Salt for a token, or for explicit claims.
    Derive {
        #[arg(long)]
        jwt: Option<String>,
        #[arg(long)]
        stid: Option<String>,
        #[arg(long)]
        aud: Option<String>,
        #[arg(long)]
        iss: Option<String>,
        #[arg(long, default_value_t = 0)]
        counter: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum CircuitCmd {
    /// Build the circuit and report its size.
    Build,
    /// Constraint counts per region.
    Stats,
}

#[derive(Debug, Args)]
pub struct ProveArgs {
    #[arg(long)]
    pub wallet: PathBuf,
    #[arg(long)]
    pub jwt: String,
    #[arg(long)]
    pub salt: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AttackCmd {
    /// Run one case, or `all`. Exit code 1 if any attempt is accepted.
    Run {
        case: String,
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum GameCmd {
    /// Run a game: a forger strategy name, `unlinkability`,
    /// `tws_unforgeability` or `tws_witness_hiding`.
    Run {
        name: String,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
}

#[derive(Debug, Subcommand)]
pub enum ServeCmd {
    /// POST /salt
    Salt {
        #[arg(long)]
        bind: Option<String>,
    },
    /// POST /prove
    Prover {
        #[arg(long)]
        bind: Option<String>,
    },
}

impl Cli {
    /// Config file values, overridden by the global flags.
    pub fn settings(&self) -> Result<Config, CliError> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        if let Some(e) = self.epoch {
            cfg.epoch = e;
        }
        if let Some(b) = self.backend {
            cfg.backend = b;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

/// Literal argument, or file contents for `@path`.
fn text_arg(s: &str) -> Result<String, CliError> {
    match s.strip_prefix('@') {
        Some(p) => std::fs::read_to_string(p)
            .map(|t| t.trim_end().to_string())
            .map_err(|e| CliError::Usage(format!("{p}: {e}"))),
        None => Ok(s.to_string()),
    }
}

fn parse_jwt(s: &str) -> Result<Jwt, CliError> {
    Jwt::parse(&text_arg(s)?).map_err(|e| CliError::Usage(format!("token: {e}")))
}

/// Claims (stable id, aud, iss) as the circuit reads them.
pub fn identity(cfg: &CircuitConfig, jwt: &Jwt) -> Result<(String, String, String), CliError> {
    let get = |name: &str| {
        claim_get(jwt, name)
            .ok()
            .and_then(|c| String::from_utf8(c.raw).ok())
            .ok_or_else(|| CliError::Auth(format!("claim {name} missing or not a string")))
    };
    Ok((get(cfg.stid_claim.name())?, get("aud")?, get("iss")?))
}

/// Checks the token against the registry at `epoch` and builds the tag it proves.
pub fn tag_for(
    zk: &ZkLogin,
    registry: &JwkRegistry,
    epoch: u64,
    jwt: &Jwt,
    salt: Fe,
    t_max: u64,
) -> Result<Tag, CliError> {
    let jwk = registry.lookup(&jwt.header.kid, epoch).map_err(|e| CliError::Auth(e.to_string()))?;
    if !jwt_verify(&jwk.public, jwt) {
        return Err(CliError::Auth("signature does not verify".into()));
    }
    let (stid, aud, iss) = identity(zk.cfg(), jwt)?;
    if iss != jwk.iss {
        return Err(CliError::Auth(format!("key {} belongs to {}", jwk.kid, jwk.iss)));
    }
    let zkaddr = derive_address(zk.cfg(), &stid, &aud, &iss, salt).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(Tag { kid: jwk.kid, pk: jwk.public, iss, zkaddr, t_max })
}

pub fn proof_file(zk: &ZkLogin, tag: &Tag, vk_u: [u8; 32], header_b64: &str, pi: &Proof) -> Result<ProofFile, CliError> {
    let public =
        zk.public_inputs(tag, vk_u, header_b64).to_elements(zk.cfg()).map_err(|e| CliError::Failure(e.to_string()))?;
    Ok(ProofFile {
        proof: b64url_encode(pi.as_bytes()),
        public_inputs: public.iter().map(|x| x.to_hex()).collect(),
        region_stats: zk.circuit().top_level_stats(),
    })
}

fn print_report(r: &Report) {
    println!("# {REPORT_NOTICE}");
    println!("{}", r.to_json());
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.settings()?;
    match cli.cmd {
        Command::Op { cmd } => op(&cfg, cmd),
        Command::Wallet { cmd } => wallet(&cfg, cmd),
        Command::Salt { cmd: SaltCmd::Derive { jwt, stid, aud, iss, counter } } => {
            let (stid, aud, iss) = claims_or_args(&cfg, jwt, stid, aud, iss)?;
            println!("{}", derive_salt(&cfg.salt_seed()?, &stid, &aud, &iss, counter).to_hex());
            Ok(())
        }
        Command::Circuit { cmd } => circuit(&cfg, cmd),
        Command::Prove(a) => {
            let (zk, registry) = (cfg.zklogin()?, cfg.registry()?);
            let w: WalletFile = read_json(&a.wallet)?;
            let jwt = parse_jwt(&a.jwt)?;
            let salt = fe_from_hex("salt", &a.salt)?;
            let tag = tag_for(&zk, &registry, cfg.epoch, &jwt, salt, w.t_max)?;
            let vk_u = bytes32("vk_u", &w.vk_u)?;
            let pi = zk
                .prove_statement(&tag, vk_u, &jwt, salt, w.r()?, None)
                .map_err(|e| CliError::Failure(e.to_string()))?;
            write_json(a.out.as_deref(), &proof_file(&zk, &tag, vk_u, &jwt.header_b64, &pi)?)
        }
        Command::Attack { cmd: AttackCmd::Run { case, seeds } } => {
            let cases = if case == "all" {
                AttackCase::ALL.to_vec()
            } else {
                vec![case.parse::<AttackCase>().map_err(|e| CliError::Usage(e.to_string()))?]
            };
            let p = GameParams { cfg: cfg.circuit(), backend: cfg.backend, trials: 0, seed: cfg.seed };
            let r = run_attacks(&p, &cases, seeds).map_err(|e| CliError::Failure(e.to_string()))?;
            print_report(&r);
            if r.wins > 0 {
                return Err(CliError::Failure(format!("{} attack attempts accepted", r.wins)));
            }
            Ok(())
        }
        Command::Game { cmd: GameCmd::Run { name, trials } } => game(&cfg, &name, trials),
        Command::Serve { cmd } => {
            let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Failure(e.to_string()))?;
            let (router, bind) = match cmd {
                ServeCmd::Salt { bind } => (serve::salt_router(serve::SaltState::new(&cfg)?), bind),
                ServeCmd::Prover { bind } => (serve::prover_router(serve::ProverState::new(&cfg)?), bind),
            };
            let bind = bind.unwrap_or(cfg.serve.bind.clone());
            rt.block_on(serve::serve(router, &bind))
        }
    }
}

fn claims_or_args(
    cfg: &Config,
    jwt: Option<String>,
    stid: Option<String>,
    aud: Option<String>,
    iss: Option<String>,
) -> Result<(String, String, String), CliError> {
    match (jwt, stid, aud, iss) {
        (Some(t), None, None, None) => identity(&cfg.circuit(), &parse_jwt(&t)?),
        (None, Some(s), Some(a), Some(i)) => Ok((s, a, i)),
        _ => Err(CliError::Usage("give either --jwt or all of --stid, --aud, --iss".into())),
    }
}

fn op(cfg: &Config, cmd: OpCmd) -> Result<(), CliError> {
    match cmd {
        OpCmd::Keygen { iss, bits, out } => {
            let bits = bits.unwrap_or(cfg.circuit().rsa_bits as u64);
            if !(512..=4096).contains(&bits) || bits % 64 != 0 {
                return Err(CliError::Usage("--bits must be a multiple of 64 in 512..=4096".into()));
            }
            let op = zklogin_core::jwtkit::MockProvider::new(&iss, bits, &mut cfg.rng(&format!("op/{iss}")));
            write_json(out.as_deref(), &ProviderFile::from_provider(&op, cfg.epoch))
        }
        OpCmd::Issue { op, sub, aud, nonce, email, claims } => {
            let provider = ProviderFile::load(&op)?.provider()?;
            let mut extra = ClaimSet::new();
            if let Some(e) = email {
                extra.set("email", e.as_str());
                extra.set("email_verified", true);
            }
            for c in claims {
                let (k, v) = c.split_once('=').ok_or_else(|| CliError::Usage(format!("--claim {c:?}: want name=value")))?;
                extra.set(k, v);
            }
            let jwt = provider.issue(&sub, &aud, &nonce, &extra).map_err(|e| CliError::Failure(e.to_string()))?;
            println!("{}", jwt.to_compact());
            Ok(())
        }
    }
}

fn wallet(cfg: &Config, cmd: WalletCmd) -> Result<(), CliError> {
    match cmd {
        WalletCmd::Init { out, t_max } => {
            let mut rng = cfg.rng("wallet");
            let sk = SigningKey::generate(&mut rng);
            let r = random_fe(&mut rng);
            write_json(out.as_deref(), &WalletFile::new(&sk, r, t_max.unwrap_or(cfg.epoch + 1)))
        }
        WalletCmd::Address { jwt, stid, aud, iss, salt } => {
            let (stid, aud, iss) = claims_or_args(cfg, jwt, stid, aud, iss)?;
            let salt = fe_from_hex("salt", &salt)?;
            let addr = derive_address(&cfg.circuit(), &stid, &aud, &iss, salt).map_err(|e| CliError::Usage(e.to_string()))?;
            println!("{}", addr.to_hex());
            Ok(())
        }
        WalletCmd::Sign { wallet, jwt, salt, msg, proof } => {
            let (zk, registry) = (cfg.zklogin()?, cfg.registry()?);
            let w: WalletFile = read_json(&wallet)?;
            let jwt = parse_jwt(&jwt)?;
            let salt = fe_from_hex("salt", &salt)?;
            let msg = text_arg(&msg)?;
            let tag = tag_for(&zk, &registry, cfg.epoch, &jwt, salt, w.t_max)?;
            let sk_u = w.signing_key()?;
            let sig = match proof {
                Some(p) => {
                    let f: ProofFile = read_json(&p)?;
                    let bytes = b64url_decode(&f.proof).map_err(|e| CliError::Usage(format!("proof: {e}")))?;
                    ZkLoginSignature {
                        vk_u: sk_u.verifying_key().to_bytes(),
                        t_max: w.t_max,
                        sigma_u: sk_u.sign(&message_digest(msg.as_bytes())).to_bytes(),
                        header_b64: jwt.header_b64.clone(),
                        pi: Proof::from_bytes(bytes).map_err(|e| CliError::Usage(format!("proof: {e}")))?,
                    }
                }
                None => {
                    let witness = Witness { jwt, salt, r: w.r()?, sk_u };
                    zk.tws_sign(&tag, &witness, msg.as_bytes()).map_err(|e| CliError::Failure(e.to_string()))?
                }
            };
            println!("{}", sig.to_base64());
            Ok(())
        }
        WalletCmd::Verify { addr, iss, msg, sig, t_cur } => {
            let (zk, registry) = (cfg.zklogin()?, cfg.registry()?);
            let zkaddr = fe_from_hex("addr", &addr)?;
            let sig = ZkLoginSignature::from_base64(&text_arg(&sig)?).map_err(|e| CliError::Usage(format!("sig: {e}")))?;
            let msg = text_arg(&msg)?;
            match zk.zklogin_check(&registry, zkaddr, &iss, msg.as_bytes(), &sig, t_cur.unwrap_or(cfg.epoch)) {
                Ok(()) => {
                    println!("valid");
                    Ok(())
                }
                Err(e) => Err(CliError::Failure(format!("invalid ({}): {e}", verify_region(&e)))),
            }
        }
    }
}

fn circuit(cfg: &Config, cmd: CircuitCmd) -> Result<(), CliError> {
    let t = Instant::now();
    let c = cfg.circuit();
    let cs = zklogin_core::harness::circuit_for(&c).map_err(|e| CliError::Failure(e.to_string()))?;
    let secs = t.elapsed().as_secs_f64();
    let total = cs.num_constraints();
    let out = match cmd {
        CircuitCmd::Build => json!({
            "profile": format!("{:?}", cfg.profile).to_lowercase(),
            "constraints": total,
            "public_inputs": cs.num_public(),
            "witnesses": cs.num_witness(),
            "digest": hex::encode(cs.digest()),
            "seconds": secs,
        }),
        CircuitCmd::Stats => {
            let regions = cs.top_level_stats();
            let shares: serde_json::Map<String, serde_json::Value> =
                regions.iter().map(|(k, v)| (k.clone(), json!(*v as f64 / total as f64))).collect();
            json!({ "total": total, "regions": regions, "shares": shares })
        }
    };
    write_json(None::<&Path>, &out)
}

fn game(cfg: &Config, name: &str, trials: u64) -> Result<(), CliError> {
    let p = GameParams { cfg: cfg.circuit(), backend: cfg.backend, trials, seed: cfg.seed };
    let fail = |e: zklogin_core::harness::HarnessError| CliError::Failure(e.to_string());
    let report = match name {
        "unlinkability" => run_unlinkability(&p, [("1001", DEFAULT_ISS), ("1002", DEFAULT_ISS)]).map_err(fail)?,
        "tws_unforgeability" | "tws_witness_hiding" => {
            let reports = run_tws_games(&p).map_err(fail)?;
            reports.into_iter().find(|r| r.game.starts_with(name)).expect("both tws games reported")
        }
        other => {
            let s: Strategy = other.parse().map_err(|_| CliError::Usage(format!("unknown game {other:?}")))?;
            let r = run_zklogin_security(&p, s).map_err(fail)?;
            print_report(&r);
            if r.wins > 0 {
                return Err(CliError::Failure(format!("forger won {} of {} trials", r.wins, r.trials)));
            }
            return Ok(());
        }
    };
    print_report(&report);
    if report.game == "tws_unforgeability" && report.wins > 0 {
        return Err(CliError::Failure(format!("forger won {} of {} trials", report.wins, report.trials)));
    }
    Ok(())
}
