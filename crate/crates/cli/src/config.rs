use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use zklogin_core::csys::{BackendKind, ProofBackendKey};
use zklogin_core::harness::{circuit_for, DEFAULT_EPOCH};
use zklogin_core::jwtkit::{JwkRegistry, DEFAULT_JWK_WINDOW};
use zklogin_core::proto::{SaltSeed, ZkLogin};
use zklogin_core::zkjwt::CircuitConfig;

use crate::files::ProviderFile;
use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Default,
    Compact,
}

impl Profile {
    pub fn circuit(self) -> CircuitConfig {
        match self {
            Profile::Default => CircuitConfig::default(),
            Profile::Compact => CircuitConfig::compact(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServeConfig {
    pub bind: String,
    /// Prove requests allowed to wait behind the running one.
    pub queue: usize,
    /// Responses kept for identical prove requests.
    pub cache: usize,
}

impl Default for ServeConfig {
    fn default() -> Self {
        Self { bind: "127.0.0.1:8080".into(), queue: 4, cache: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub epoch: u64,
    pub backend: BackendKind,
    /// Seeds the simulation key and any randomness the command needs.
    pub seed: u64,
    pub profile: Profile,
    pub jwk_window: u64,
    /// Hex k_seed of the salt service.
    pub salt_seed: Option<String>,
    /// Provider key files, resolved relative to the config file.
    pub providers: Vec<PathBuf>,
    pub serve: ServeConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            epoch: DEFAULT_EPOCH,
            backend: BackendKind::Transparent,
            seed: 0,
            profile: Profile::Default,
            jwk_window: DEFAULT_JWK_WINDOW,
            salt_seed: None,
            providers: Vec::new(),
            serve: ServeConfig::default(),
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let mut cfg: Config = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in &mut cfg.providers {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn circuit(&self) -> CircuitConfig {
        self.profile.circuit()
    }

    pub fn rng(&self, purpose: &str) -> ChaCha20Rng {
        let mut h = Sha256::new();
        h.update(purpose.as_bytes());
        h.update(self.seed.to_le_bytes());
        ChaCha20Rng::from_seed(h.finalize().into())
    }

    pub fn backend_key(&self) -> ProofBackendKey {
        ProofBackendKey::generate(self.backend, &mut self.rng("backend"))
    }

    pub fn salt_seed(&self) -> Result<SaltSeed, CliError> {
        match &self.salt_seed {
            Some(h) => SaltSeed::from_hex(h).ok_or_else(|| CliError::Usage("salt_seed must be 64 hex digits".into())),
            None => Ok(SaltSeed::random(&mut self.rng("salt"))),
        }
    }

    pub fn providers(&self) -> Result<Vec<ProviderFile>, CliError> {
        self.providers.iter().map(|p| ProviderFile::load(p)).collect()
    }

    /// Keys of every configured provider, each at its publication epoch.
    pub fn registry(&self) -> Result<JwkRegistry, CliError> {
        let reg = JwkRegistry::new(self.jwk_window);
        for p in self.providers()? {
            let op = p.provider()?;
            op.publish(&reg, p.epoch);
        }
        Ok(reg)
    }

    pub fn zklogin(&self) -> Result<ZkLogin, CliError> {
        let cfg = self.circuit();
        let circuit = circuit_for(&cfg).map_err(|e| CliError::Failure(e.to_string()))?;
        Ok(ZkLogin::with_circuit(cfg, circuit, self.backend_key()))
    }
}
