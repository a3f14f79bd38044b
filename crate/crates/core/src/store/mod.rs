//! Signed-hash stores. Each variant is a fixed layout of region descriptors
//! (a pure function of the grid side) plus one tag per descriptor.

mod adaptive;
mod boundary;
mod line;
mod quad;
mod sieve;
mod sift;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use adaptive::{AdaptiveShape, AdaptiveTree, NodeId};
pub use boundary::{BoundaryStore, MedianLine};
pub use line::{CellLine, DyadicLineTree, LineAxis, LineTree};
pub use quad::QuadStore;
pub use sieve::LayerSieveStore;
pub use sift::SiftStore;

pub(crate) use line::dyadic_interval;

use crate::auth::{sign_region, KeyMaterial, KeyMode, RegionDescriptor, SignedDigest};
use crate::error::{Error, Result};
use crate::grid::{read_exact_or, CellCoord, Grid};
use crate::par::{self, Exec};

pub const STORE_MAGIC: [u8; 4] = *b"HST1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoreVariant {
    Quad,
    Boundary,
    Sift,
    Sieve,
    Adaptive,
}

impl StoreVariant {
    pub const ALL: [StoreVariant; 5] = [
        StoreVariant::Quad,
        StoreVariant::Boundary,
        StoreVariant::Sift,
        StoreVariant::Sieve,
        StoreVariant::Adaptive,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Self::ALL
            .get(code as usize)
            .copied()
            .ok_or_else(|| Error::Malformed(format!("unknown store variant {code}")))
    }

    pub fn name(self) -> &'static str {
        match self {
            StoreVariant::Quad => "quad",
            StoreVariant::Boundary => "boundary",
            StoreVariant::Sift => "sift",
            StoreVariant::Sieve => "sieve",
            StoreVariant::Adaptive => "adaptive",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }

    /// Descriptor layout in file order for a grid of side `m`.
    pub fn layout(self, m: u32) -> Result<Vec<RegionDescriptor>> {
        Ok(match self {
            StoreVariant::Quad => quad::layout(m),
            StoreVariant::Boundary => boundary::layout(m),
            StoreVariant::Sift => sift::layout(m),
            StoreVariant::Sieve => sieve::layout(m),
            StoreVariant::Adaptive => adaptive::layout(m)?,
        })
    }
}

/// An aligned square block of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Square {
    pub row0: u32,
    pub col0: u32,
    pub side: u32,
}

impl Square {
    pub fn whole(m: u32) -> Self {
        Self {
            row0: 0,
            col0: 0,
            side: m,
        }
    }

    /// Quadrant `q` in row-major order: 0=TL, 1=TR, 2=BL, 3=BR.
    pub fn quadrant(&self, q: usize) -> Square {
        let half = self.side / 2;
        Square {
            row0: self.row0 + half * (q as u32 / 2),
            col0: self.col0 + half * (q as u32 % 2),
            side: half,
        }
    }

    pub fn descriptor(&self) -> RegionDescriptor {
        RegionDescriptor::rect(self.row0, self.col0, self.side, self.side)
    }

    pub fn top_left(&self) -> CellCoord {
        CellCoord::new(self.row0, self.col0)
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        (self.row0..self.row0 + self.side).contains(&c.row)
            && (self.col0..self.col0 + self.side).contains(&c.col)
    }

    /// Depth below the whole grid of side `m`.
    pub fn depth(&self, m: u32) -> u32 {
        (m / self.side).trailing_zeros()
    }

    /// Block coordinates at this square's depth.
    pub fn block(&self) -> (u32, u32) {
        (self.row0 / self.side, self.col0 / self.side)
    }
}

/// Everything a store variant shares: grid shape, mode, and the tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigestSet {
    m: u32,
    cell_size: u32,
    mode: KeyMode,
    public: Option<[u8; 32]>,
    digests: Vec<SignedDigest>,
}

impl DigestSet {
    fn build(grid: &Grid, key: &KeyMaterial, layout: Vec<RegionDescriptor>, exec: Exec) -> Result<Self> {
        if !key.can_sign() {
            return Err(Error::MissingSigningKey);
        }
        let digests = par::try_map(exec, &layout, |d| sign_region(key, grid, d))?;
        Ok(Self {
            m: grid.side(),
            cell_size: grid.cell_size(),
            mode: key.mode(),
            public: key.public_bytes(),
            digests,
        })
    }

    pub fn side(&self) -> u32 {
        self.m
    }

    pub fn cell_size(&self) -> u32 {
        self.cell_size
    }

    pub fn mode(&self) -> KeyMode {
        self.mode
    }

    /// Ed25519 verification key carried by signature-mode stores.
    pub fn public_key(&self) -> Option<[u8; 32]> {
        self.public
    }

    pub fn digests(&self) -> &[SignedDigest] {
        &self.digests
    }

    pub fn len(&self) -> usize {
        self.digests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digests.is_empty()
    }

    pub(crate) fn get(&self, i: usize) -> &SignedDigest {
        &self.digests[i]
    }

    /// The grid must have the shape this store was built for.
    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.side() != self.m || grid.cell_size() != self.cell_size {
            return Err(Error::StoreMismatch(format!(
                "store is {m}x{m} with {cs}-byte cells, grid is {gm}x{gm} with {gcs}-byte cells",
                m = self.m,
                cs = self.cell_size,
                gm = grid.side(),
                gcs = grid.cell_size()
            )));
        }
        Ok(())
    }

    /// The key must be of this store's mode (and, for signatures, the
    /// same public key).
    pub fn check_key(&self, key: &KeyMaterial) -> Result<()> {
        if key.mode() != self.mode {
            return Err(Error::KeyModeMismatch);
        }
        if self.mode == KeyMode::Signature && key.public_bytes() != self.public {
            return Err(Error::KeyModeMismatch);
        }
        Ok(())
    }

    fn write<W: Write>(&self, variant: StoreVariant, mut sink: W) -> Result<u64> {
        let mut buf = Vec::with_capacity(24 + self.digests.len() * 64);
        buf.extend_from_slice(&STORE_MAGIC);
        buf.push(variant.code());
        buf.push(self.mode.code());
        buf.extend_from_slice(&self.m.to_le_bytes());
        buf.extend_from_slice(&self.cell_size.to_le_bytes());
        buf.extend_from_slice(&(self.digests.len() as u64).to_le_bytes());
        for d in &self.digests {
            d.descriptor.encode(&mut buf);
            buf.extend_from_slice(&d.tag);
        }
        if let Some(public) = self.public {
            buf.extend_from_slice(&public);
        }
        sink.write_all(&buf)?;
        Ok(buf.len() as u64)
    }

    fn read<R: Read>(mut src: R) -> Result<(StoreVariant, Self)> {
        let mut magic = [0u8; 4];
        read_exact_or(&mut src, &mut magic, "store header")?;
        if magic != STORE_MAGIC {
            return Err(Error::BadMagic {
                expected: STORE_MAGIC,
                found: magic,
            });
        }
        let mut head = [0u8; 18];
        read_exact_or(&mut src, &mut head, "store header")?;
        let variant = StoreVariant::from_code(head[0])?;
        let mode = KeyMode::from_code(head[1])?;
        let m = u32::from_le_bytes(head[2..6].try_into().unwrap());
        let cell_size = u32::from_le_bytes(head[6..10].try_into().unwrap());
        let count = u64::from_le_bytes(head[10..18].try_into().unwrap());
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::SideNotPowerOfTwo(m));
        }
        if cell_size == 0 {
            return Err(Error::ZeroCellSize);
        }
        let layout = variant.layout(m)?;
        if count != layout.len() as u64 {
            return Err(Error::Malformed(format!(
                "{} store for m={m} has {} digests, header says {count}",
                variant.name(),
                layout.len()
            )));
        }
        let tag_len = mode.tag_len();
        let mut digests = Vec::with_capacity(layout.len());
        for (i, want) in layout.into_iter().enumerate() {
            let descriptor = RegionDescriptor::decode(&mut src)?;
            if descriptor != want {
                return Err(Error::Malformed(format!(
                    "record {i}: descriptor {descriptor:?} out of canonical order"
                )));
            }
            let mut tag = vec![0u8; tag_len];
            read_exact_or(&mut src, &mut tag, "store tag")?;
            digests.push(SignedDigest { descriptor, tag });
        }
        let public = match mode {
            KeyMode::Mac => None,
            KeyMode::Signature => {
                let mut pk = [0u8; 32];
                read_exact_or(&mut src, &mut pk, "verification key")?;
                Some(pk)
            }
        };
        let mut rest = [0u8; 1];
        if src.read(&mut rest)? != 0 {
            return Err(Error::Malformed("trailing bytes after store".into()));
        }
        Ok((
            variant,
            Self {
                m,
                cell_size,
                mode,
                public,
                digests,
            },
        ))
    }
}

/// Shared surface of the store variants.
pub trait HashStore: Sized {
    const VARIANT: StoreVariant;

    fn digest_set(&self) -> &DigestSet;

    fn from_digest_set(set: DigestSet) -> Result<Self>;

    /// Total number of stored digests.
    fn store_size(&self) -> u64 {
        self.digest_set().len() as u64
    }

    fn save<W: Write>(&self, sink: W) -> Result<u64> {
        self.digest_set().write(Self::VARIANT, sink)
    }

    fn load<R: Read>(src: R) -> Result<Self> {
        let (variant, set) = DigestSet::read(src)?;
        if variant != Self::VARIANT {
            return Err(Error::VariantMismatch {
                expected: Self::VARIANT.name(),
                found: variant.name(),
            });
        }
        Self::from_digest_set(set)
    }
}

/// A store of any variant, as read from disk.
#[derive(Clone, Debug)]
pub enum AnyStore {
    Quad(QuadStore),
    Boundary(BoundaryStore),
    Sift(SiftStore),
    Sieve(LayerSieveStore),
    Adaptive(AdaptiveTree),
}

impl AnyStore {
    pub fn build(variant: StoreVariant, grid: &Grid, key: &KeyMaterial, exec: Exec) -> Result<Self> {
        Ok(match variant {
            StoreVariant::Quad => AnyStore::Quad(QuadStore::build_with(grid, key, exec)?),
            StoreVariant::Boundary => AnyStore::Boundary(BoundaryStore::build_with(grid, key, exec)?),
            StoreVariant::Sift => AnyStore::Sift(SiftStore::build_with(grid, key, exec)?),
            StoreVariant::Sieve => AnyStore::Sieve(LayerSieveStore::build_with(grid, key, exec)?),
            StoreVariant::Adaptive => AnyStore::Adaptive(AdaptiveTree::build_with(grid, key, exec)?),
        })
    }

    pub fn load<R: Read>(src: R) -> Result<Self> {
        let (variant, set) = DigestSet::read(src)?;
        Ok(match variant {
            StoreVariant::Quad => AnyStore::Quad(QuadStore::from_digest_set(set)?),
            StoreVariant::Boundary => AnyStore::Boundary(BoundaryStore::from_digest_set(set)?),
            StoreVariant::Sift => AnyStore::Sift(SiftStore::from_digest_set(set)?),
            StoreVariant::Sieve => AnyStore::Sieve(LayerSieveStore::from_digest_set(set)?),
            StoreVariant::Adaptive => AnyStore::Adaptive(AdaptiveTree::from_digest_set(set)?),
        })
    }

    pub fn variant(&self) -> StoreVariant {
        match self {
            AnyStore::Quad(_) => StoreVariant::Quad,
            AnyStore::Boundary(_) => StoreVariant::Boundary,
            AnyStore::Sift(_) => StoreVariant::Sift,
            AnyStore::Sieve(_) => StoreVariant::Sieve,
            AnyStore::Adaptive(_) => StoreVariant::Adaptive,
        }
    }

    pub fn digest_set(&self) -> &DigestSet {
        match self {
            AnyStore::Quad(s) => s.digest_set(),
            AnyStore::Boundary(s) => s.digest_set(),
            AnyStore::Sift(s) => s.digest_set(),
            AnyStore::Sieve(s) => s.digest_set(),
            AnyStore::Adaptive(s) => s.digest_set(),
        }
    }

    pub fn store_size(&self) -> u64 {
        self.digest_set().len() as u64
    }

    pub fn save<W: Write>(&self, sink: W) -> Result<u64> {
        self.digest_set().write(self.variant(), sink)
    }
}

/// Shared constructor: validate the layout length and wrap.
fn checked_set(variant: StoreVariant, set: DigestSet) -> Result<DigestSet> {
    let want = variant.layout(set.m)?;
    if want.len() != set.digests.len()
        || want.iter().zip(&set.digests).any(|(w, d)| *w != d.descriptor)
    {
        return Err(Error::Malformed(format!(
            "digest set does not match the {} layout",
            variant.name()
        )));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrants_tile_parent() {
        let s = Square::whole(8);
        let qs: Vec<_> = (0..4).map(|q| s.quadrant(q)).collect();
        assert_eq!(qs[0], Square { row0: 0, col0: 0, side: 4 });
        assert_eq!(qs[1], Square { row0: 0, col0: 4, side: 4 });
        assert_eq!(qs[2], Square { row0: 4, col0: 0, side: 4 });
        assert_eq!(qs[3], Square { row0: 4, col0: 4, side: 4 });
        assert_eq!(qs[3].quadrant(1).depth(8), 2);
        assert_eq!(qs[3].quadrant(1).block(), (2, 3));
    }

    #[test]
    fn variant_codes_round_trip() {
        for v in StoreVariant::ALL {
            assert_eq!(StoreVariant::from_code(v.code()).unwrap(), v);
            assert_eq!(StoreVariant::parse(v.name()).unwrap(), v);
        }
        assert!(StoreVariant::from_code(5).is_err());
    }
}
