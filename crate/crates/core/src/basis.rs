//! Fixed-magnetization computational bases.
//!
//! Configurations are `u32` bit patterns with site 0 in the least
//! significant bit; a set bit is an up spin. States are stored in
//! increasing integer order and ranked through the combinatorial number
//! system, so lookup needs no hash table.

use crate::error::{Error, Result};

pub const MAX_SITES: usize = 30;
pub const DEFAULT_DIMENSION_CAP: u64 = 20_000_000;

const fn binomial_table() -> [[u64; MAX_SITES + 2]; MAX_SITES + 2] {
    let mut t = [[0u64; MAX_SITES + 2]; MAX_SITES + 2];
    let mut n = 0;
    while n < MAX_SITES + 2 {
        t[n][0] = 1;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
            k += 1;
        }
        n += 1;
    }
    t
}

static BINOMIAL: [[u64; MAX_SITES + 2]; MAX_SITES + 2] = binomial_table();

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n || n > MAX_SITES + 1 {
        0
    } else {
        BINOMIAL[n][k]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    n: usize,
    n_up: usize,
    states: Vec<u32>,
}

pub fn enumerate_sector(n: usize, n_up: usize) -> Result<SectorBasis> {
    enumerate_sector_with_cap(n, n_up, DEFAULT_DIMENSION_CAP)
}

pub fn enumerate_sector_with_cap(n: usize, n_up: usize, cap: u64) -> Result<SectorBasis> {
    if n > MAX_SITES {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("at most {MAX_SITES} spins fit a sector basis, got {n}"),
        });
    }
    if n_up > n {
        return Err(Error::InvalidParameter {
            name: "n_up",
            reason: format!("n_up = {n_up} exceeds n = {n}"),
        });
    }
    let dim = binomial(n, n_up);
    if dim > cap {
        return Err(Error::DimensionOverflow { dim, cap });
    }
    let mut states = Vec::with_capacity(dim as usize);
    if n_up == 0 {
        states.push(0);
    } else {
        let limit = 1u64 << n;
        let mut v: u64 = (1u64 << n_up) - 1;
        while v < limit {
            states.push(v as u32);
            // Gosper's hack: next integer with the same popcount.
            let c = v & v.wrapping_neg();
            let r = v + c;
            v = (((r ^ v) >> 2) / c) | r;
        }
    }
    debug_assert_eq!(states.len() as u64, dim);
    Ok(SectorBasis { n, n_up, states })
}

impl SectorBasis {
    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn n_up(&self) -> usize {
        self.n_up
    }

    /// Twice the total `S^z`, `2 n_up - N`, which is always an integer.
    pub fn twice_magnetization(&self) -> i64 {
        2 * self.n_up as i64 - self.n as i64
    }

    /// Total `S^z` of the sector.
    pub fn magnetization(&self) -> f64 {
        self.twice_magnetization() as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    #[inline]
    pub fn state(&self, index: usize) -> u32 {
        self.states[index]
    }

    /// Ordinal of a configuration, or `None` if it lies outside the sector.
    #[inline]
    pub fn index_of(&self, config: u32) -> Option<usize> {
        if config.count_ones() as usize != self.n_up || (self.n < 32 && config >> self.n != 0) {
            return None;
        }
        Some(rank(config))
    }
}

/// Colexicographic rank of a configuration among those of equal popcount.
#[inline]
pub fn rank(config: u32) -> usize {
    let mut bits = config;
    let mut k = 0;
    let mut r = 0u64;
    while bits != 0 {
        let pos = bits.trailing_zeros() as usize;
        k += 1;
        r += BINOMIAL[pos][k];
        bits &= bits - 1;
    }
    r as usize
}
