//! Ground-state observables: fidelity, densities, correlations, bond
//! currents, plaquette fluxes and the flux order parameter.

pub mod currents;
pub mod flux;
pub mod report;

use serde::{Deserialize, Serialize};

use crate::basis::BasisSector;
use crate::error::{Error, Result};
use crate::params::Boundary;
use crate::sparse::C64;

pub use currents::{
    bond_current, bond_currents, commutator_density, current_nn, current_nnn, divergence_from_bonds,
    BondCurrent, CurrentConvention,
};
pub use flux::{chi_order, link_phase, plaquette_flux, plaquette_flux_operator, theta_phase_sum};
pub use report::{ObservableReport, ObservableSelection};

fn check_len(sector: &BasisSector, psi: &[C64]) -> Result<()> {
    if psi.len() != sector.dim() {
        return Err(Error::DimensionMismatch { expected: sector.dim(), found: psi.len() });
    }
    Ok(())
}

/// (2/N)(1 - |⟨A|B⟩|)/δλ²
pub fn fidelity(a: &[C64], b: &[C64], dl: f64, particles: usize) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    if !(dl > 0.0) {
        return Err(Error::InvalidParams(format!("fidelity step must be positive, got {dl}")));
    }
    if particles == 0 {
        return Err(Error::InvalidParams("fidelity needs N > 0".into()));
    }
    let overlap: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let f = 2.0 / particles as f64 * (1.0 - overlap.norm()) / (dl * dl);
    // |⟨A|B⟩| can exceed 1 by rounding
    Ok(f.max(0.0))
}

pub fn density(sector: &BasisSector, psi: &[C64]) -> Result<Vec<f64>> {
    check_len(sector, psi)?;
    let mut n = vec![0.0; sector.sites()];
    for (&s, a) in sector.states().iter().zip(psi) {
        let w = a.norm_sqr();
        let mut bits = s;
        while bits != 0 {
            n[bits.trailing_zeros() as usize] += w;
            bits &= bits - 1;
        }
    }
    Ok(n)
}

/// ⟨n_i n_j⟩ for all pairs.
pub fn density_density(sector: &BasisSector, psi: &[C64]) -> Result<Vec<Vec<f64>>> {
    check_len(sector, psi)?;
    let l = sector.sites();
    let mut nn = vec![vec![0.0; l]; l];
    let mut occ = Vec::with_capacity(l);
    for (&s, a) in sector.states().iter().zip(psi) {
        let w = a.norm_sqr();
        occ.clear();
        occ.extend((0..l).filter(|&k| s >> k & 1 == 1));
        for &i in &occ {
            for &j in &occ {
                nn[i][j] += w;
            }
        }
    }
    Ok(nn)
}

/// ⟨b†_k b_l⟩
pub fn corr1(sector: &BasisSector, psi: &[C64], k: usize, l: usize) -> Result<C64> {
    check_len(sector, psi)?;
    let sites = sector.sites();
    if k >= sites || l >= sites {
        return Err(Error::OutOfRange(format!("sites ({k}, {l}) outside 0..{sites}")));
    }
    if k == l {
        return Ok(C64::new(density(sector, psi)?[k], 0.0));
    }
    let mut acc = C64::new(0.0, 0.0);
    for (i, &s) in sector.states().iter().enumerate() {
        if s >> l & 1 == 1 && s >> k & 1 == 0 {
            let t = s ^ (1 << l) ^ (1 << k);
            acc += psi[sector.rank_unchecked(t)].conj() * psi[i];
        }
    }
    Ok(acc)
}

pub fn corr1_matrix(sector: &BasisSector, psi: &[C64]) -> Result<Vec<Vec<C64>>> {
    let l = sector.sites();
    let mut m = vec![vec![C64::new(0.0, 0.0); l]; l];
    let n = density(sector, psi)?;
    for k in 0..l {
        m[k][k] = C64::new(n[k], 0.0);
        for j in k + 1..l {
            let z = corr1(sector, psi, k, j)?;
            m[k][j] = z;
            m[j][k] = z.conj();
        }
    }
    Ok(m)
}

/// Two-site spin-1/2 correlations ⟨S^a_k S^b_l⟩ (k ≠ l) for the in-plane components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinPair {
    pub xx: f64,
    pub yy: f64,
    pub xy: f64,
    pub yx: f64,
}

impl SpinPair {
    /// With b† = S⁺ only the number-conserving parts survive:
    /// Re⟨b†_k b_l⟩ = xx + yy, Im⟨b†_k b_l⟩ = yx - xy.
    pub fn from_corr1(z: C64) -> Self {
        SpinPair { xx: z.re / 2.0, yy: z.re / 2.0, xy: -z.im / 2.0, yx: z.im / 2.0 }
    }
}

/// Connected density correlation versus distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct G2 {
    pub values: Vec<f64>,
    /// "site0" for periodic chains, "averaged" for open ones.
    pub reference: String,
}

/// g⁽²⁾ of the equal-weight mixture of `states` (a single state gives the pure value).
pub fn g2_mixture(sector: &BasisSector, states: &[&[C64]], boundary: Boundary) -> Result<G2> {
    if states.is_empty() {
        return Err(Error::InvalidParams("no states given".into()));
    }
    let l = sector.sites();
    let w = 1.0 / states.len() as f64;
    let mut n = vec![0.0; l];
    let mut nn = vec![vec![0.0; l]; l];
    for psi in states {
        let ni = density(sector, psi)?;
        let nni = density_density(sector, psi)?;
        for i in 0..l {
            n[i] += w * ni[i];
            for j in 0..l {
                nn[i][j] += w * nni[i][j];
            }
        }
    }
    let conn = |i: usize, j: usize| nn[i][j] - n[i] * n[j];
    Ok(match boundary {
        Boundary::Pbc => G2 { values: (0..l).map(|j| conn(0, j)).collect(), reference: "site0".into() },
        Boundary::Obc => G2 {
            values: (0..l)
                .map(|d| {
                    let refs = l - d;
                    (0..refs).map(|i| conn(i, i + d)).sum::<f64>() / refs as f64
                })
                .collect(),
            reference: "averaged".into(),
        },
    })
}

pub fn g2(sector: &BasisSector, psi: &[C64], boundary: Boundary) -> Result<G2> {
    g2_mixture(sector, &[psi], boundary)
}
