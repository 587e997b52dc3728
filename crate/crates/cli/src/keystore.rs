//! One JSON file per key. Secrets are sealed with ChaCha20-Poly1305 under a
//! key stretched from the passphrase with PBKDF2-HMAC-SHA256, or stored in
//! the clear when the operator opts out with `--insecure`.

use std::fs;
use std::path::PathBuf;

use chacha20poly1305::aead::{Aead, KeyInit, Payload};
use chacha20poly1305::{ChaCha20Poly1305, Nonce};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use vaultchain_core::{AccountKind, Address, KeyPair, PublicKey, SecretKey, SignatureScheme};

use crate::error::CliError;
use crate::home::write_atomic;

const PBKDF2_ROUNDS: u32 = 200_000;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "encoding", rename_all = "kebab-case")]
enum StoredSecret {
    Plaintext {
        secret: SecretKey,
    },
    Pbkdf2Chacha20poly1305 {
        rounds: u32,
        salt: String,
        nonce: String,
        ciphertext: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeyFile {
    pub name: String,
    pub scheme: SignatureScheme,
    pub public: PublicKey,
    pub standard: Address,
    pub vault: Address,
    secret: StoredSecret,
}

impl KeyFile {
    pub fn is_encrypted(&self) -> bool {
        !matches!(self.secret, StoredSecret::Plaintext { .. })
    }

    pub fn address(&self, kind: AccountKind) -> Address {
        match kind {
            AccountKind::Standard => self.standard,
            AccountKind::Vault => self.vault,
        }
    }
}

pub enum Protection<'a> {
    Passphrase(&'a str),
    Plaintext,
}

pub struct KeyStore {
    dir: PathBuf,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 64
        && name
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

fn seal_key(passphrase: &str, salt: &[u8]) -> ChaCha20Poly1305 {
    let key = pbkdf2::pbkdf2_hmac_array::<pbkdf2::sha2::Sha256, 32>(
        passphrase.as_bytes(),
        salt,
        PBKDF2_ROUNDS,
    );
    ChaCha20Poly1305::new_from_slice(&key).expect("32-byte key")
}

impl KeyStore {
    pub fn new(dir: PathBuf) -> Self {
        KeyStore { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{name}.json"))
    }

    pub fn create(
        &self,
        name: &str,
        pair: &KeyPair,
        protection: Protection<'_>,
    ) -> Result<KeyFile, CliError> {
        if !valid_name(name) {
            return Err(CliError::usage(format!(
                "key name {name:?} must be 1-64 letters, digits, '-' or '_'"
            )));
        }
        let path = self.path(name);
        if path.exists() {
            return Err(CliError::usage(format!("key {name:?} already exists")));
        }
        let secret = match protection {
            Protection::Plaintext => StoredSecret::Plaintext {
                secret: pair.secret().clone(),
            },
            Protection::Passphrase(pass) => {
                let mut salt = [0u8; 16];
                let mut nonce = [0u8; 12];
                let mut rng = rand::rng();
                rng.fill_bytes(&mut salt);
                rng.fill_bytes(&mut nonce);
                let ciphertext = seal_key(pass, &salt)
                    .encrypt(
                        &Nonce::from(nonce),
                        Payload {
                            msg: pair.secret().as_bytes(),
                            aad: pair.public().as_bytes(),
                        },
                    )
                    .map_err(|_| CliError::usage("key encryption failed"))?;
                StoredSecret::Pbkdf2Chacha20poly1305 {
                    rounds: PBKDF2_ROUNDS,
                    salt: hex::encode(salt),
                    nonce: hex::encode(nonce),
                    ciphertext: hex::encode(ciphertext),
                }
            }
        };
        let file = KeyFile {
            name: name.to_owned(),
            scheme: pair.scheme(),
            public: *pair.public(),
            standard: Address::derive(pair.public(), AccountKind::Standard),
            vault: Address::derive(pair.public(), AccountKind::Vault),
            secret,
        };
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let json = serde_json::to_string_pretty(&file).expect("key file serializes");
        write_atomic(&path, json.as_bytes())?;
        Ok(file)
    }

    pub fn get(&self, name: &str) -> Result<KeyFile, CliError> {
        if !valid_name(name) {
            return Err(CliError::usage(format!("no key named {name:?}")));
        }
        let path = self.path(name);
        let text = fs::read_to_string(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                CliError::usage(format!("no key named {name:?}"))
            } else {
                CliError::io(&path, e)
            }
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Integrity(format!("{}: {e}", path.display())))
    }

    pub fn list(&self) -> Result<Vec<KeyFile>, CliError> {
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(CliError::io(&self.dir, e)),
        };
        let mut names = Vec::new();
        for entry in entries {
            let entry = entry.map_err(|e| CliError::io(&self.dir, e))?;
            let path = entry.path();
            if path.extension().is_some_and(|x| x == "json") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    names.push(stem.to_owned());
                }
            }
        }
        names.sort();
        names.iter().map(|n| self.get(n)).collect()
    }

    /// The key whose standard or vault address is `addr`.
    pub fn find_by_address(&self, addr: &Address) -> Result<Option<KeyFile>, CliError> {
        Ok(self
            .list()?
            .into_iter()
            .find(|k| k.standard == *addr || k.vault == *addr))
    }

    pub fn unlock(&self, file: &KeyFile, passphrase: Option<&str>) -> Result<KeyPair, CliError> {
        let secret = match &file.secret {
            StoredSecret::Plaintext { secret } => secret.clone(),
            StoredSecret::Pbkdf2Chacha20poly1305 {
                rounds,
                salt,
                nonce,
                ciphertext,
            } => {
                let pass = passphrase.ok_or_else(|| {
                    CliError::usage(format!(
                        "key {:?} is encrypted; pass --passphrase or set VAULTCHAIN_PASSPHRASE",
                        file.name
                    ))
                })?;
                let corrupt =
                    || CliError::Integrity(format!("key file {:?} is corrupt", file.name));
                if *rounds != PBKDF2_ROUNDS {
                    return Err(corrupt());
                }
                let salt = hex::decode(salt).map_err(|_| corrupt())?;
                let nonce: [u8; 12] = hex::decode(nonce)
                    .ok()
                    .and_then(|n| n.try_into().ok())
                    .ok_or_else(corrupt)?;
                let ciphertext = hex::decode(ciphertext).map_err(|_| corrupt())?;
                let plain = seal_key(pass, &salt)
                    .decrypt(
                        &Nonce::from(nonce),
                        Payload {
                            msg: &ciphertext,
                            aad: file.public.as_bytes(),
                        },
                    )
                    .map_err(|_| {
                        CliError::usage(format!("wrong passphrase for key {:?}", file.name))
                    })?;
                SecretKey::from_slice(&plain).map_err(|_| corrupt())?
            }
        };
        let pair = KeyPair::from_secret(file.scheme, secret);
        if pair.public() != &file.public {
            return Err(CliError::Integrity(format!(
                "key file {:?}: secret does not match public key",
                file.name
            )));
        }
        Ok(pair)
    }
}
