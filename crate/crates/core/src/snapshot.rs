//! Binary weight-matrix snapshots, so a benchmark can reuse a stored network.
//!
//! Layout: header `{magic "GBNN", version u32, χ u32, l u32}` followed by
//! the rows of the strict upper triangle. Row `a` holds the bits for columns
//! `a+1 .. n`, packed into little-endian 64-bit words, each row starting on
//! a fresh word. Activity and thresholds are volatile state and are not
//! stored; a loaded network comes back idle.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::network::{Network, NetworkShape};

const MAGIC: &[u8; 4] = b"GBNN";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a network snapshot (bad magic)")]
    BadMagic,
    #[error("unsupported snapshot version {0}")]
    UnsupportedVersion(u32),
    #[error("snapshot carries an invalid shape: chi={chi}, ell={ell}")]
    InvalidShape { chi: u32, ell: u32 },
    #[error("snapshot sets an intra-cluster or padding bit")]
    CorruptBits,
}

fn row_words(n: usize, row: usize) -> usize {
    (n - row - 1).div_ceil(64)
}

impl Network {
    /// Serializes the shape and weight matrix.
    pub fn write_snapshot<W: Write>(&self, mut writer: W) -> io::Result<()> {
        writer.write_all(MAGIC)?;
        writer.write_all(&VERSION.to_le_bytes())?;
        writer.write_all(&(self.shape().clusters() as u32).to_le_bytes())?;
        writer.write_all(&(self.shape().cluster_size() as u32).to_le_bytes())?;
        let n = self.shape().fanal_count();
        for a in 0..n {
            let mut words = vec![0u64; row_words(n, a)];
            for (offset, b) in (a + 1..n).enumerate() {
                if self.edge_flat(a, b) {
                    words[offset / 64] |= 1 << (offset % 64);
                }
            }
            for w in words {
                writer.write_all(&w.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a snapshot back into an idle network.
    pub fn read_snapshot<R: Read>(mut reader: R) -> Result<Network, SnapshotError> {
        let mut magic = [0u8; 4];
        reader.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let version = read_u32(&mut reader)?;
        if version != VERSION {
            return Err(SnapshotError::UnsupportedVersion(version));
        }
        let chi = read_u32(&mut reader)?;
        let ell = read_u32(&mut reader)?;
        let shape = NetworkShape::new(chi as usize, ell as usize)
            .map_err(|_| SnapshotError::InvalidShape { chi, ell })?;
        let mut net = Network::new(shape);
        let n = shape.fanal_count();
        let ell = shape.cluster_size();
        for a in 0..n {
            for w in 0..row_words(n, a) {
                let mut buf = [0u8; 8];
                reader.read_exact(&mut buf)?;
                let mut word = u64::from_le_bytes(buf);
                while word != 0 {
                    let offset = w * 64 + word.trailing_zeros() as usize;
                    word &= word - 1;
                    let b = a + 1 + offset;
                    if b >= n || a / ell == b / ell {
                        return Err(SnapshotError::CorruptBits);
                    }
                    net.set_edge_flat(a, b);
                }
            }
        }
        Ok(net)
    }
}

fn read_u32<R: Read>(reader: &mut R) -> io::Result<u32> {
    let mut buf = [0u8; 4];
    reader.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}
