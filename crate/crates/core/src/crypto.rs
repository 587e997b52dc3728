//! Keys and signatures.
//!
//! Two schemes sit behind [`SignatureScheme`]: Ed25519 for real use, and a
//! null scheme whose signatures anyone holding the public key can produce.
//! The null scheme exists so exhaustive tests can sign millions of
//! transactions cheaply; never configure it for a chain that matters.

use std::fmt;
use std::str::FromStr;

use ed25519_dalek::{Signer, SigningKey, VerifyingKey};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const PUBLIC_KEY_LEN: usize = 32;
pub const SECRET_KEY_LEN: usize = 32;
pub const SIGNATURE_LEN: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KeyError {
    #[error("malformed public key: expected {PUBLIC_KEY_LEN} bytes of hex")]
    MalformedPublicKey,
    #[error("malformed signature: expected {SIGNATURE_LEN} bytes of hex")]
    MalformedSignature,
    #[error("malformed secret key: expected {SECRET_KEY_LEN} bytes of hex")]
    MalformedSecretKey,
    #[error("unknown signature scheme {0:?}")]
    UnknownScheme(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignatureScheme {
    #[default]
    Ed25519,
    Null,
}

impl SignatureScheme {
    pub fn public_key(self, secret: &SecretKey) -> PublicKey {
        match self {
            SignatureScheme::Ed25519 => {
                let sk = SigningKey::from_bytes(&secret.0);
                PublicKey(sk.verifying_key().to_bytes())
            }
            SignatureScheme::Null => {
                let mut h = Sha256::new();
                h.update(b"null-scheme-public");
                h.update(secret.0);
                PublicKey(h.finalize().into())
            }
        }
    }

    pub fn sign(self, secret: &SecretKey, msg: &[u8]) -> Signature {
        match self {
            SignatureScheme::Ed25519 => {
                let sk = SigningKey::from_bytes(&secret.0);
                Signature(sk.sign(msg).to_bytes())
            }
            SignatureScheme::Null => null_signature(&self.public_key(secret), msg),
        }
    }

    pub fn verify(self, public: &PublicKey, msg: &[u8], sig: &Signature) -> bool {
        match self {
            SignatureScheme::Ed25519 => {
                let Ok(vk) = VerifyingKey::from_bytes(&public.0) else {
                    return false;
                };
                let sig = ed25519_dalek::Signature::from_bytes(&sig.0);
                vk.verify_strict(msg, &sig).is_ok()
            }
            SignatureScheme::Null => null_signature(public, msg) == *sig,
        }
    }
}

fn null_signature(public: &PublicKey, msg: &[u8]) -> Signature {
    let mut h = Sha256::new();
    h.update(public.0);
    h.update(msg);
    let mut out = [0u8; SIGNATURE_LEN];
    out[..32].copy_from_slice(&h.finalize());
    Signature(out)
}

impl fmt::Display for SignatureScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignatureScheme::Ed25519 => "ed25519",
            SignatureScheme::Null => "null",
        })
    }
}

impl FromStr for SignatureScheme {
    type Err = KeyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ed25519" => Ok(SignatureScheme::Ed25519),
            "null" => Ok(SignatureScheme::Null),
            other => Err(KeyError::UnknownScheme(other.to_owned())),
        }
    }
}

macro_rules! hex_bytes {
    ($name:ident, $len:expr, $err:expr) => {
        impl $name {
            pub const fn from_bytes(bytes: [u8; $len]) -> Self {
                $name(bytes)
            }

            pub fn from_slice(bytes: &[u8]) -> Result<Self, KeyError> {
                <[u8; $len]>::try_from(bytes).map($name).map_err(|_| $err)
            }

            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&hex::encode(self.0))
            }
        }

        impl FromStr for $name {
            type Err = KeyError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let mut out = [0u8; $len];
                hex::decode_to_slice(s, &mut out).map_err(|_| $err)?;
                Ok($name(out))
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PublicKey([u8; PUBLIC_KEY_LEN]);
hex_bytes!(PublicKey, PUBLIC_KEY_LEN, KeyError::MalformedPublicKey);

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PublicKey({self})")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature([u8; SIGNATURE_LEN]);
hex_bytes!(Signature, SIGNATURE_LEN, KeyError::MalformedSignature);

impl Signature {
    /// Placeholder carried by unsigned issuance records.
    pub const EMPTY: Signature = Signature([0u8; SIGNATURE_LEN]);
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({self})")
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey([u8; SECRET_KEY_LEN]);
hex_bytes!(SecretKey, SECRET_KEY_LEN, KeyError::MalformedSecretKey);

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey(..)")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    scheme: SignatureScheme,
    secret: SecretKey,
    public: PublicKey,
}

impl KeyPair {
    pub fn from_secret(scheme: SignatureScheme, secret: SecretKey) -> Self {
        let public = scheme.public_key(&secret);
        KeyPair {
            scheme,
            secret,
            public,
        }
    }

    /// Deterministic key from a 32-byte seed.
    pub fn from_seed(scheme: SignatureScheme, seed: [u8; SECRET_KEY_LEN]) -> Self {
        Self::from_secret(scheme, SecretKey(seed))
    }

    pub fn generate<R: rand::RngCore + rand::CryptoRng>(
        scheme: SignatureScheme,
        rng: &mut R,
    ) -> Self {
        let mut seed = [0u8; SECRET_KEY_LEN];
        rng.fill_bytes(&mut seed);
        Self::from_seed(scheme, seed)
    }

    pub fn scheme(&self) -> SignatureScheme {
        self.scheme
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn secret(&self) -> &SecretKey {
        &self.secret
    }

    pub fn sign(&self, msg: &[u8]) -> Signature {
        self.scheme.sign(&self.secret, msg)
    }
}
