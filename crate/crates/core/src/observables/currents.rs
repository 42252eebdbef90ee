//! Bond currents and the continuity equation.
//!
//! For a hop term T = A b†_t b_s the current it carries from s to t is
//! 2 Im⟨T⟩, which is exactly its contribution to ⟨i[H, n_t]⟩.

use serde::{Deserialize, Serialize};

use super::check_len;
use crate::basis::BasisSector;
use crate::error::{Error, Result};
use crate::hamiltonian::{HopTerm, TermTable};
use crate::params::ModelParams;
use crate::sparse::{SparseOperator, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurrentConvention {
    /// Current carried by the Hamiltonian's own range-1/range-2 terms.
    Hamiltonian,
    /// The printed bond formulas, whose g-dependent parts are half as large.
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BondCurrent {
    pub source: usize,
    pub target: usize,
    pub range: usize,
    pub value: f64,
}

/// ⟨b†_k (c0 + Σ w (1 - n_m)) b_l⟩
fn conditioned_corr(sector: &BasisSector, psi: &[C64], k: usize, l: usize, c0: C64, cond: &[(usize, C64)]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (i, &s) in sector.states().iter().enumerate() {
        if s >> l & 1 == 1 && s >> k & 1 == 0 {
            let mut a = c0;
            for &(m, w) in cond {
                if s >> m & 1 == 0 {
                    a += w;
                }
            }
            if a != C64::new(0.0, 0.0) {
                let t = s ^ (1 << l) ^ (1 << k);
                acc += psi[sector.rank_unchecked(t)].conj() * a * psi[i];
            }
        }
    }
    acc
}

fn term_expectation(sector: &BasisSector, psi: &[C64], h: &HopTerm) -> C64 {
    conditioned_corr(sector, psi, h.target, h.source, h.base, &h.conditions)
}

pub fn bond_currents(table: &TermTable, sector: &BasisSector, psi: &[C64]) -> Result<Vec<BondCurrent>> {
    check_len(sector, psi)?;
    Ok(table
        .hops
        .iter()
        .map(|h| BondCurrent {
            source: h.source,
            target: h.target,
            range: h.range,
            value: 2.0 * term_expectation(sector, psi, h).im,
        })
        .collect())
}

/// Net current from `source` to `target` carried by terms of the given range.
pub fn bond_current(table: &TermTable, sector: &BasisSector, psi: &[C64], source: usize, target: usize, range: usize) -> Result<f64> {
    check_len(sector, psi)?;
    let mut total = 0.0;
    for h in table.hops.iter().filter(|h| h.range == range) {
        if h.source == source && h.target == target {
            total += 2.0 * term_expectation(sector, psi, h).im;
        } else if h.source == target && h.target == source {
            total -= 2.0 * term_expectation(sector, psi, h).im;
        }
    }
    Ok(total)
}

fn bond_target(params: &ModelParams, j: usize, d: usize) -> Result<usize> {
    if j >= params.sites {
        return Err(Error::OutOfRange(format!("site {j} outside 0..{}", params.sites)));
    }
    params
        .site(j as isize + d as isize)
        .ok_or_else(|| Error::OutOfRange(format!("bond {j}->{} leaves the open chain", j + d)))
}

fn parity_sign(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Intra-chain current I_{j→j+2}.
pub fn current_nnn(table: &TermTable, sector: &BasisSector, psi: &[C64], j: usize, convention: CurrentConvention) -> Result<f64> {
    check_len(sector, psi)?;
    let p = &table.params;
    let t = bond_target(p, j, 2)?;
    match convention {
        CurrentConvention::Hamiltonian => bond_current(table, sector, psi, j, t, 2),
        CurrentConvention::Printed => {
            let jj = p.hopping;
            let one = C64::new(1.0, 0.0);
            let direct = conditioned_corr(sector, psi, j, t, one, &[]);
            let mid = p.site(j as isize + 1).expect("j+1 lies between two valid sites");
            let c = conditioned_corr(sector, psi, j, t, C64::new(0.0, 0.0), &[(mid, one)]);
            Ok(2.0 * jj * direct.im - jj * p.g * c.im + parity_sign(j) * 3f64.sqrt() * jj * p.g * c.re)
        }
    }
}

/// Inter-chain current I_{j→j+1}.
pub fn current_nn(table: &TermTable, sector: &BasisSector, psi: &[C64], j: usize, convention: CurrentConvention) -> Result<f64> {
    check_len(sector, psi)?;
    let p = &table.params;
    let t = bond_target(p, j, 1)?;
    match convention {
        CurrentConvention::Hamiltonian => bond_current(table, sector, psi, j, t, 1),
        CurrentConvention::Printed => {
            let jj = p.hopping;
            let one = C64::new(1.0, 0.0);
            let zero = C64::new(0.0, 0.0);
            let left = p.site(j as isize - 1);
            let right = p.site(j as isize + 2);
            let direct = conditioned_corr(sector, psi, j, t, one, &[]);
            // 2 - n_{j+2} - n_{j-1} and n_{j+2} - n_{j-1} written through (1 - n) factors
            let both: Vec<(usize, C64)> = [left, right].iter().flatten().map(|&k| (k, one)).collect();
            let mut diff = Vec::new();
            if let Some(k) = left {
                diff.push((k, one));
            }
            if let Some(k) = right {
                diff.push((k, -one));
            }
            let a = conditioned_corr(sector, psi, j, t, zero, &both);
            let b = conditioned_corr(sector, psi, j, t, zero, &diff);
            Ok(2.0 * jj * direct.im - jj * p.g * a.im + parity_sign(j) * 3f64.sqrt() * jj * p.g * b.re)
        }
    }
}

/// ⟨i[H, n_j]⟩ for every site, straight from the matrix elements.
pub fn commutator_density(op: &SparseOperator, sector: &BasisSector, psi: &[C64]) -> Result<Vec<f64>> {
    check_len(sector, psi)?;
    if op.dim() != sector.dim() {
        return Err(Error::DimensionMismatch { expected: sector.dim(), found: op.dim() });
    }
    let states = sector.states();
    let mut out = vec![0.0; sector.sites()];
    for (r, &sr) in states.iter().enumerate() {
        let left = psi[r].conj();
        for (c, h) in op.row(r) {
            let sc = states[c];
            let mut diff = sr ^ sc;
            if diff == 0 {
                continue;
            }
            // i conj(ψ_r) H_rc ψ_c (n_j(c) - n_j(r)), real part
            let z = (left * h * psi[c] * C64::new(0.0, 1.0)).re;
            while diff != 0 {
                let j = diff.trailing_zeros() as usize;
                out[j] += if sc >> j & 1 == 1 { z } else { -z };
                diff &= diff - 1;
            }
        }
    }
    Ok(out)
}

/// Σ incoming - outgoing bond currents per site.
pub fn divergence_from_bonds(bonds: &[BondCurrent], sites: usize) -> Vec<f64> {
    let mut d = vec![0.0; sites];
    for b in bonds {
        d[b.target] += b.value;
        d[b.source] -= b.value;
    }
    d
}
