use std::fmt;

use ed25519_dalek::{Signer, SigningKey, Verifier, VerifyingKey};
use hmac::{Hmac, Mac};
use serde::{Deserialize, Serialize};
use sha2::Sha256;

use crate::error::{Error, Result};

pub const MAC_TAG_LEN: usize = 32;
pub const SIG_TAG_LEN: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyMode {
    Mac,
    Signature,
}

impl KeyMode {
    pub fn tag_len(self) -> usize {
        match self {
            KeyMode::Mac => MAC_TAG_LEN,
            KeyMode::Signature => SIG_TAG_LEN,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            KeyMode::Mac => 0,
            KeyMode::Signature => 1,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(KeyMode::Mac),
            1 => Ok(KeyMode::Signature),
            c => Err(Error::Malformed(format!("unknown key mode {c}"))),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mac" => Ok(KeyMode::Mac),
            "sig" | "signature" => Ok(KeyMode::Signature),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

#[derive(Clone)]
enum Inner {
    /// HMAC-SHA-256; the same secret signs and verifies.
    Mac(Vec<u8>),
    /// Ed25519; the signing half may be absent on the verifying machine.
    Signature {
        signing: Option<Box<SigningKey>>,
        verifying: VerifyingKey,
    },
}

/// Keys for tagging region digests.
#[derive(Clone)]
pub struct KeyMaterial(Inner);

impl fmt::Debug for KeyMaterial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Inner::Mac(_) => f.write_str("KeyMaterial::Mac(..)"),
            Inner::Signature { signing, .. } => f
                .debug_struct("KeyMaterial::Signature")
                .field("can_sign", &signing.is_some())
                .finish(),
        }
    }
}

impl KeyMaterial {
    pub fn mac(secret: impl Into<Vec<u8>>) -> Result<Self> {
        let secret = secret.into();
        if secret.is_empty() {
            return Err(Error::InvalidKey("empty MAC key".into()));
        }
        Ok(Self(Inner::Mac(secret)))
    }

    pub fn signature_from_seed(seed: [u8; 32]) -> Self {
        let signing = SigningKey::from_bytes(&seed);
        let verifying = signing.verifying_key();
        Self(Inner::Signature {
            signing: Some(Box::new(signing)),
            verifying,
        })
    }

    /// Verification-only Ed25519 material.
    pub fn verifying(public: [u8; 32]) -> Result<Self> {
        let verifying =
            VerifyingKey::from_bytes(&public).map_err(|e| Error::InvalidKey(e.to_string()))?;
        Ok(Self(Inner::Signature {
            signing: None,
            verifying,
        }))
    }

    pub fn mode(&self) -> KeyMode {
        match self.0 {
            Inner::Mac(_) => KeyMode::Mac,
            Inner::Signature { .. } => KeyMode::Signature,
        }
    }

    pub fn can_sign(&self) -> bool {
        match &self.0 {
            Inner::Mac(_) => true,
            Inner::Signature { signing, .. } => signing.is_some(),
        }
    }

    /// Public key bytes in signature mode; `None` for MAC keys, which are
    /// never written out.
    pub fn public_bytes(&self) -> Option<[u8; 32]> {
        match &self.0 {
            Inner::Mac(_) => None,
            Inner::Signature { verifying, .. } => Some(verifying.to_bytes()),
        }
    }

    /// Drops the signing half, if any.
    pub fn verification_only(&self) -> Self {
        match &self.0 {
            Inner::Mac(k) => Self(Inner::Mac(k.clone())),
            Inner::Signature { verifying, .. } => Self(Inner::Signature {
                signing: None,
                verifying: *verifying,
            }),
        }
    }

    pub(crate) fn tag(&self, digest: &[u8; 32]) -> Result<Vec<u8>> {
        match &self.0 {
            Inner::Mac(k) => {
                let mut mac = mac_for(k);
                mac.update(digest);
                Ok(mac.finalize().into_bytes().to_vec())
            }
            Inner::Signature { signing, .. } => {
                let signing = signing.as_ref().ok_or(Error::MissingSigningKey)?;
                Ok(signing.sign(digest).to_bytes().to_vec())
            }
        }
    }

    pub(crate) fn check(&self, digest: &[u8; 32], tag: &[u8]) -> bool {
        match &self.0 {
            Inner::Mac(k) => {
                let mut mac = mac_for(k);
                mac.update(digest);
                mac.verify_slice(tag).is_ok()
            }
            Inner::Signature { verifying, .. } => {
                let Ok(bytes) = <[u8; SIG_TAG_LEN]>::try_from(tag) else {
                    return false;
                };
                let sig = ed25519_dalek::Signature::from_bytes(&bytes);
                verifying.verify(digest, &sig).is_ok()
            }
        }
    }
}

fn mac_for(key: &[u8]) -> Hmac<Sha256> {
    // HMAC accepts keys of any length
    <Hmac<Sha256> as Mac>::new_from_slice(key).expect("hmac key")
}
