//! Complex channel tensor H[rx, tx, n, k] for one band and one realization.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DMatrixView};

use crate::config::BandId;
use crate::error::{Error, Result};
use crate::C64;

/// Magic bytes opening a tensor dump.
pub const DUMP_MAGIC: [u8; 8] = *b"MMLKCT01";

/// Channel tensor with dims `(m_rx, m_tx, n_subcarriers, n_symbols)`.
///
/// Internally each `(n, k)` slice is stored as a contiguous column-major
/// `m_rx × m_tx` matrix so that [`ChannelTensor::matrix`] is a free view.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTensor {
    pub band: BandId,
    m_rx: usize,
    m_tx: usize,
    n_subcarriers: usize,
    n_symbols: usize,
    data: Vec<C64>,
}

impl ChannelTensor {
    pub fn zeros(band: BandId, m_rx: usize, m_tx: usize, n_subcarriers: usize, n_symbols: usize) -> Self {
        ChannelTensor {
            band,
            m_rx,
            m_tx,
            n_subcarriers,
            n_symbols,
            data: vec![C64::new(0.0, 0.0); m_rx * m_tx * n_subcarriers * n_symbols],
        }
    }

    /// Builds a tensor from a function of 0-based `(rx, tx, n, k)`.
    pub fn from_fn(
        band: BandId,
        dims: (usize, usize, usize, usize),
        mut f: impl FnMut(usize, usize, usize, usize) -> C64,
    ) -> Self {
        let (m_rx, m_tx, n_sub, n_sym) = dims;
        let mut t = Self::zeros(band, m_rx, m_tx, n_sub, n_sym);
        for k in 0..n_sym {
            for n in 0..n_sub {
                for tx in 0..m_tx {
                    for rx in 0..m_rx {
                        *t.get_mut(rx, tx, n, k) = f(rx, tx, n, k);
                    }
                }
            }
        }
        t
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.m_rx, self.m_tx, self.n_subcarriers, self.n_symbols)
    }

    pub fn m_rx(&self) -> usize {
        self.m_rx
    }

    pub fn m_tx(&self) -> usize {
        self.m_tx
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    #[inline]
    fn offset(&self, rx: usize, tx: usize, n: usize, k: usize) -> usize {
        debug_assert!(rx < self.m_rx && tx < self.m_tx && n < self.n_subcarriers && k < self.n_symbols);
        ((k * self.n_subcarriers + n) * self.m_tx + tx) * self.m_rx + rx
    }

    #[inline]
    pub fn get(&self, rx: usize, tx: usize, n: usize, k: usize) -> C64 {
        self.data[self.offset(rx, tx, n, k)]
    }

    #[inline]
    pub fn get_mut(&mut self, rx: usize, tx: usize, n: usize, k: usize) -> &mut C64 {
        let o = self.offset(rx, tx, n, k);
        &mut self.data[o]
    }

    /// Column-major slice of H[n, k] (0-based symbol index).
    pub fn slice(&self, n: usize, k: usize) -> &[C64] {
        let len = self.m_rx * self.m_tx;
        let start = (k * self.n_subcarriers + n) * len;
        &self.data[start..start + len]
    }

    pub fn slice_mut(&mut self, n: usize, k: usize) -> &mut [C64] {
        let len = self.m_rx * self.m_tx;
        let start = (k * self.n_subcarriers + n) * len;
        &mut self.data[start..start + len]
    }

    /// H[n, k] as an `m_rx × m_tx` matrix view (0-based symbol index).
    pub fn matrix(&self, n: usize, k: usize) -> DMatrixView<'_, C64> {
        DMatrixView::from_slice(self.slice(n, k), self.m_rx, self.m_tx)
    }

    pub fn matrix_owned(&self, n: usize, k: usize) -> DMatrix<C64> {
        self.matrix(n, k).into_owned()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Writes the binary dump: 32-byte header then little-endian complex64
    /// (`f32` re, `f32` im) in `[rx, tx, n, k]` row-major order.
    ///
    /// Header: magic (8 bytes), `m_rx`, `m_tx`, `n`, `k` as `u32`, band tag
    /// as `u32`, four reserved zero bytes.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = [0u8; 32];
        header[..8].copy_from_slice(&DUMP_MAGIC);
        for (i, d) in [self.m_rx, self.m_tx, self.n_subcarriers, self.n_symbols]
            .into_iter()
            .enumerate()
        {
            let d = u32::try_from(d).map_err(|_| Error::Shape(format!("dimension {d} exceeds u32")))?;
            header[8 + 4 * i..12 + 4 * i].copy_from_slice(&d.to_le_bytes());
        }
        header[24..28].copy_from_slice(&(self.band.tag() as u32).to_le_bytes());
        w.write_all(&header)?;
        let mut buf = Vec::with_capacity(self.data.len() * 8);
        for rx in 0..self.m_rx {
            for tx in 0..self.m_tx {
                for n in 0..self.n_subcarriers {
                    for k in 0..self.n_symbols {
                        let c = self.get(rx, tx, n, k);
                        buf.extend_from_slice(&(c.re as f32).to_le_bytes());
                        buf.extend_from_slice(&(c.im as f32).to_le_bytes());
                    }
                }
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 32];
        r.read_exact(&mut header)?;
        if header[..8] != DUMP_MAGIC {
            return Err(Error::Parse("not a channel tensor dump (bad magic)".into()));
        }
        let field = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap()) as usize;
        let (m_rx, m_tx, n_sub, n_sym) = (field(8), field(12), field(16), field(20));
        let band = match field(24) {
            1 => BandId::Sub6,
            2 => BandId::MmWave,
            t => return Err(Error::Parse(format!("unknown band tag {t}"))),
        };
        let mut t = Self::zeros(band, m_rx, m_tx, n_sub, n_sym);
        let mut buf = vec![0u8; m_rx * m_tx * n_sub * n_sym * 8];
        r.read_exact(&mut buf)?;
        let mut chunks = buf.chunks_exact(8);
        for rx in 0..m_rx {
            for tx in 0..m_tx {
                for n in 0..n_sub {
                    for k in 0..n_sym {
                        let c = chunks.next().expect("buffer sized from header");
                        let re = f32::from_le_bytes(c[..4].try_into().unwrap());
                        let im = f32::from_le_bytes(c[4..].try_into().unwrap());
                        *t.get_mut(rx, tx, n, k) = C64::new(re as f64, im as f64);
                    }
                }
            }
        }
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_view_matches_get() {
        let t = ChannelTensor::from_fn(BandId::MmWave, (2, 3, 4, 2), |r, tx, n, k| {
            C64::new((r + 10 * tx) as f64, (n + 100 * k) as f64)
        });
        let m = t.matrix(3, 1);
        for r in 0..2 {
            for tx in 0..3 {
                assert_eq!(m[(r, tx)], t.get(r, tx, 3, 1));
            }
        }
    }

    #[test]
    fn dump_layout_is_row_major_rx_tx_n_k() {
        let t = ChannelTensor::from_fn(BandId::Sub6, (2, 2, 3, 2), |r, tx, n, k| {
            C64::new((((r * 2 + tx) * 3 + n) * 2 + k) as f64, -1.0)
        });
        let mut bytes = Vec::new();
        t.write_dump(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 32 + 24 * 8);
        assert_eq!(&bytes[..8], b"MMLKCT01");
        for i in 0..24 {
            let off = 32 + 8 * i;
            let re = f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
            assert_eq!(re, i as f32);
        }
        let back = ChannelTensor::read_dump(&bytes[..]).unwrap();
        assert_eq!(back, t);
    }
}
