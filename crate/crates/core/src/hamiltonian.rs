//! Zig-zag ladder Hamiltonian in a fixed particle-number sector.
//!
//! Every hop `b†_t b_j` carries an amplitude `-J (base + Σ_k c_k (1 - n_k))`
//! whose phases follow the parity of the source site `j`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::BasisSector;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::sparse::{Palette, SparseOperator, C64};

/// ω = e^{2πi/3}
pub fn omega() -> C64 {
    Complex64::new(-0.5, 3f64.sqrt() / 2.0)
}

fn omega_pow(p: i32) -> C64 {
    match p.rem_euclid(3) {
        0 => C64::new(1.0, 0.0),
        1 => omega(),
        _ => omega().conj(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HopTerm {
    pub source: usize,
    pub target: usize,
    pub range: usize,
    /// Constant part of the amplitude, already multiplied by -J.
    pub base: C64,
    /// Sites k with the coefficient of (1 - n_k), already multiplied by -J.
    pub conditions: Vec<(usize, C64)>,
}

impl HopTerm {
    pub fn amplitude(&self, config: u32) -> C64 {
        let mut a = self.base;
        for &(k, c) in &self.conditions {
            if config >> k & 1 == 0 {
                a += c;
            }
        }
        a
    }

    /// Sites strictly between source and target along the chain order.
    pub fn string_sites(&self) -> std::ops::Range<usize> {
        self.source.min(self.target) + 1..self.source.max(self.target)
    }
}

#[derive(Clone, Debug)]
pub struct TermTable {
    pub params: ModelParams,
    pub hops: Vec<HopTerm>,
    /// -2 g η J
    pub diagonal_coefficient: f64,
    /// In-range neighbours {j±1, j±2} entering the density term of site j.
    pub diagonal_neighbours: Vec<Vec<usize>>,
}

impl TermTable {
    pub fn new(params: &ModelParams) -> Result<Self> {
        Self::with_ranges(params, &[1, 2, 3, 4])
    }

    /// Table restricted to the listed hop ranges.
    pub fn with_ranges(params: &ModelParams, ranges: &[usize]) -> Result<Self> {
        params.validate()?;
        let p = *params;
        let mj = -p.hopping;
        let two_g = 2.0 * p.g;
        let mut hops = Vec::new();
        for j in 0..p.sites {
            let s: i32 = if j % 2 == 0 { 1 } else { -1 };
            let ji = j as isize;
            for &d in ranges {
                let Some(target) = p.site(ji + d as isize) else { continue };
                let (base, pieces): (f64, Vec<(isize, C64)>) = match d {
                    1 => (1.0, vec![(ji - 1, omega_pow(-s)), (ji + 2, omega_pow(s))]),
                    2 => (1.0, vec![(ji + 1, omega_pow(2 * s))]),
                    3 => (0.0, vec![(ji + 1, omega_pow(-s)), (ji + 2, omega_pow(s))]),
                    4 => (0.0, vec![(ji + 2, C64::new(1.0, 0.0))]),
                    _ => return Err(Error::InvalidParams(format!("hop range {d} not in 1..=4"))),
                };
                let conditions: Vec<(usize, C64)> = pieces
                    .into_iter()
                    .filter_map(|(k, w)| p.site(k).map(|k| (k, w * two_g * mj)))
                    .filter(|&(_, c)| c != C64::new(0.0, 0.0))
                    .collect();
                if base == 0.0 && conditions.is_empty() {
                    continue;
                }
                hops.push(HopTerm { source: j, target, range: d, base: C64::new(base * mj, 0.0), conditions });
            }
        }
        let diagonal_neighbours = (0..p.sites)
            .map(|j| {
                [-2isize, -1, 1, 2].iter().filter_map(|&o| p.site(j as isize + o)).collect()
            })
            .collect();
        Ok(TermTable {
            params: p,
            hops,
            diagonal_coefficient: -2.0 * p.g * p.eta * p.hopping,
            diagonal_neighbours,
        })
    }

    /// Number of (occupied j, empty neighbour) pairs in the density term.
    pub fn diagonal_count(&self, config: u32) -> u32 {
        let mut count = 0;
        for (j, nb) in self.diagonal_neighbours.iter().enumerate() {
            if config >> j & 1 == 1 {
                count += nb.iter().filter(|&&k| config >> k & 1 == 0).count() as u32;
            }
        }
        count
    }

    pub fn diagonal(&self, config: u32) -> f64 {
        self.diagonal_coefficient * self.diagonal_count(config) as f64
    }
}

/// A hop term with its amplitude table indexed by the occupations of its
/// conditioning sites, pre-interned in a palette.
struct CompiledHop {
    source: usize,
    target: usize,
    cond_sites: Vec<usize>,
    forward: Vec<Option<u16>>,
    backward: Vec<Option<u16>>,
}

pub(crate) fn zero_cutoff(params: &ModelParams) -> f64 {
    1e-14 * params.hopping * (1.0 + params.g)
}

fn compile(table: &TermTable, palette: &mut Palette) -> Vec<CompiledHop> {
    let cut = zero_cutoff(&table.params);
    table
        .hops
        .iter()
        .map(|h| {
            let cond_sites: Vec<usize> = h.conditions.iter().map(|c| c.0).collect();
            let n = 1usize << cond_sites.len();
            let mut forward = Vec::with_capacity(n);
            let mut backward = Vec::with_capacity(n);
            for bits in 0..n {
                let mut cfg = 0u32;
                for (i, &k) in cond_sites.iter().enumerate() {
                    if bits >> i & 1 == 1 {
                        cfg |= 1 << k;
                    }
                }
                let a = h.amplitude(cfg);
                if a.norm() <= cut {
                    forward.push(None);
                    backward.push(None);
                } else {
                    forward.push(Some(palette.intern(a)));
                    backward.push(Some(palette.intern(a.conj())));
                }
            }
            CompiledHop { source: h.source, target: h.target, cond_sites, forward, backward }
        })
        .collect()
}

fn check_sector(params: &ModelParams, sector: &BasisSector) -> Result<()> {
    params.validate()?;
    if params.sites != sector.sites() || params.particles != sector.particles() {
        return Err(Error::InvalidParams(format!(
            "sector (L={}, N={}) does not match params (L={}, N={})",
            sector.sites(),
            sector.particles(),
            params.sites,
            params.particles
        )));
    }
    Ok(())
}

const CHUNK: usize = 2048;

/// Assemble an operator from a term table. `sign` returns the extra factor
/// (+1 or -1) for moving a particle from `from` to `to` in the row state.
pub(crate) fn assemble<F>(table: &TermTable, sector: &BasisSector, sign: F) -> SparseOperator
where
    F: Fn(u32, usize, usize) -> bool + Sync,
{
    let mut palette = Palette::default();
    let hops = compile(table, &mut palette);
    let max_count = 4 * table.params.sites;
    let cut = zero_cutoff(&table.params);
    let diag_idx: Vec<Option<u16>> = (0..=max_count)
        .map(|c| {
            let v = table.diagonal_coefficient * c as f64;
            (v.abs() > cut).then(|| palette.intern(C64::new(v, 0.0)))
        })
        .collect();
    // negated entries for sign flips
    let neg: Vec<u16> = (0..palette.values().len())
        .map(|i| {
            let v = palette.values()[i];
            palette.intern(-v)
        })
        .collect();

    let states = sector.states();
    let chunks: Vec<(Vec<u32>, Vec<u16>, Vec<u32>)> = states
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut cols = Vec::with_capacity(chunk.len() * 16);
            let mut vals = Vec::with_capacity(chunk.len() * 16);
            let mut lens = Vec::with_capacity(chunk.len());
            for &s in chunk {
                let start = cols.len();
                if let Some(i) = diag_idx[table.diagonal_count(s) as usize] {
                    cols.push(sector.rank_unchecked(s) as u32);
                    vals.push(i);
                }
                for h in &hops {
                    let nj = s >> h.source & 1;
                    let nt = s >> h.target & 1;
                    if nj == nt {
                        continue;
                    }
                    let mut bits = 0usize;
                    for (i, &k) in h.cond_sites.iter().enumerate() {
                        bits |= ((s >> k & 1) as usize) << i;
                    }
                    // row s, column s': H[s, s'] = A for s' -> s moving source -> target
                    let (entry, from, to) = if nt == 1 {
                        (h.forward[bits], h.source, h.target)
                    } else {
                        (h.backward[bits], h.target, h.source)
                    };
                    if let Some(v) = entry {
                        let col = s ^ (1 << h.source) ^ (1 << h.target);
                        let v = if sign(col, from, to) { v } else { neg[v as usize] };
                        cols.push(sector.rank_unchecked(col) as u32);
                        vals.push(v);
                    }
                }
                lens.push((cols.len() - start) as u32);
            }
            (cols, vals, lens)
        })
        .collect();

    let nnz: usize = chunks.iter().map(|c| c.0.len()).sum();
    let mut row_ptr = Vec::with_capacity(states.len() + 1);
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    row_ptr.push(0u64);
    for (c, v, lens) in chunks {
        let mut acc = *row_ptr.last().unwrap();
        for l in lens {
            acc += l as u64;
            row_ptr.push(acc);
        }
        cols.extend_from_slice(&c);
        vals.extend_from_slice(&v);
    }
    SparseOperator::from_parts(sector.dim(), row_ptr, cols, vals, palette.values().to_vec(), true)
        .expect("assembled operator is well formed")
}

pub fn build_boson(params: &ModelParams, sector: &BasisSector) -> Result<SparseOperator> {
    check_sector(params, sector)?;
    Ok(assemble(&TermTable::new(params)?, sector, |_, _, _| true))
}

/// Boson Hamiltonian keeping only the listed hop ranges.
pub fn build_boson_ranges(params: &ModelParams, sector: &BasisSector, ranges: &[usize]) -> Result<SparseOperator> {
    check_sector(params, sector)?;
    Ok(assemble(&TermTable::with_ranges(params, ranges)?, sector, |_, _, _| true))
}

pub fn build_from_table(table: &TermTable, sector: &BasisSector) -> Result<SparseOperator> {
    check_sector(&table.params, sector)?;
    Ok(assemble(table, sector, |_, _, _| true))
}
