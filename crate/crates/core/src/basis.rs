//! Fixed particle-number sectors of L hard-core boson sites.
//!
//! Configurations are bit strings with bit j the occupation of site j.
//! States are ranked with the combinatorial number system, which orders
//! them exactly like their integer values.

use crate::error::{Error, Result};
use crate::params::MAX_SITES;

#[derive(Clone, Debug)]
pub struct BasisSector {
    sites: usize,
    particles: usize,
    states: Vec<u32>,
    // binom[n][k] for n <= L, k <= N + 1
    binom: Vec<Vec<u64>>,
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

pub fn build_sector(sites: usize, particles: usize) -> Result<BasisSector> {
    BasisSector::new(sites, particles)
}

impl BasisSector {
    pub fn new(sites: usize, particles: usize) -> Result<Self> {
        if sites > MAX_SITES {
            return Err(Error::InvalidParams(format!("L = {sites} exceeds {MAX_SITES}")));
        }
        if particles > sites {
            return Err(Error::InvalidParams(format!("N = {particles} exceeds L = {sites}")));
        }
        let mut binom = vec![vec![0u64; particles + 2]; sites + 1];
        for n in 0..=sites {
            binom[n][0] = 1;
            for k in 1..(particles + 2) {
                binom[n][k] = if n == 0 { 0 } else { binom[n - 1][k - 1] + binom[n - 1][k] };
            }
        }
        let dim = binom[sites][particles] as usize;
        let mut states = Vec::with_capacity(dim);
        if particles == 0 {
            states.push(0);
        } else {
            // Gosper's hack walks the configurations in increasing order
            let mut s: u64 = (1u64 << particles) - 1;
            let limit = 1u64 << sites;
            while s < limit {
                states.push(s as u32);
                let c = s & s.wrapping_neg();
                let r = s + c;
                s = (((r ^ s) >> 2) / c) | r;
            }
        }
        debug_assert_eq!(states.len(), dim);
        Ok(BasisSector { sites, particles, states, binom })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    #[inline]
    pub fn unrank(&self, index: usize) -> u32 {
        self.states[index]
    }

    /// Rank without validation; the caller guarantees popcount = N.
    #[inline]
    pub fn rank_unchecked(&self, config: u32) -> usize {
        let mut bits = config;
        let mut k = 1;
        let mut idx = 0u64;
        while bits != 0 {
            let p = bits.trailing_zeros() as usize;
            idx += self.binom[p][k];
            k += 1;
            bits &= bits - 1;
        }
        idx as usize
    }

    pub fn rank(&self, config: u64) -> Result<usize> {
        let found = config.count_ones();
        if found as usize != self.particles || (self.sites < 64 && config >> self.sites != 0) {
            return Err(Error::WrongParticleNumber { config, found, expected: self.particles });
        }
        Ok(self.rank_unchecked(config as u32))
    }

    #[inline]
    pub fn occupied(config: u32, site: usize) -> bool {
        config >> site & 1 == 1
    }
}
