//! Region digests: canonical serialization, tagging, verification, and the
//! cost meter every check reports into.

mod descriptor;
mod key;
mod meter;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use descriptor::{canonical_bytes, CellList, RegionDescriptor};
pub use key::{KeyMaterial, KeyMode, MAC_TAG_LEN, SIG_TAG_LEN};
pub use meter::CostMeter;

use crate::error::Result;
use crate::grid::Grid;

/// A descriptor plus the tag authenticating the hash of its content.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedDigest {
    pub descriptor: RegionDescriptor,
    pub tag: Vec<u8>,
}

impl SignedDigest {
    pub fn cell_count(&self) -> u64 {
        self.descriptor.cell_count()
    }
}

/// SHA-256 over [`canonical_bytes`].
pub fn content_hash(grid: &Grid, descriptor: &RegionDescriptor) -> Result<[u8; 32]> {
    Ok(Sha256::digest(canonical_bytes(grid, descriptor)?).into())
}

pub fn sign_region(
    key: &KeyMaterial,
    grid: &Grid,
    descriptor: &RegionDescriptor,
) -> Result<SignedDigest> {
    let hash = content_hash(grid, descriptor)?;
    Ok(SignedDigest {
        descriptor: descriptor.clone(),
        tag: key.tag(&hash)?,
    })
}

/// True iff the cells covered by `digest` still hash to the signed value.
/// Charges one verification and the region's cell count to `meter`.
pub fn verify_region(
    key: &KeyMaterial,
    grid: &Grid,
    digest: &SignedDigest,
    meter: &mut CostMeter,
) -> Result<bool> {
    let hash = content_hash(grid, &digest.descriptor)?;
    meter.record_verification(digest.cell_count());
    Ok(key.check(&hash, &digest.tag))
}
