//! Link phases, plaquette fluxes and the staggered flux order parameter.

use std::f64::consts::PI;

use super::check_len;
use crate::basis::BasisSector;
use crate::error::{Error, Result};
use crate::params::{Boundary, ModelParams};
use crate::sparse::C64;

fn n(config: u32, params: &ModelParams, j: isize) -> Option<f64> {
    params.site(j).map(|k| (config >> k & 1) as f64)
}

/// Quantum part of the flux through the rhombus j, j+1, j+2, j+3:
/// Φ_j = -(π/3)(n_{j+2} + n_{j+1} - n_{j-1} - n_{j+4}).
pub fn plaquette_flux_operator(config: u32, j: usize, params: &ModelParams) -> Option<f64> {
    let j = j as isize;
    let s = n(config, params, j + 2)? + n(config, params, j + 1)? - n(config, params, j - 1)? - n(config, params, j + 4)?;
    Some(-PI / 3.0 * s)
}

/// Peierls phase φ_{j+d,j} of the link operator U_{j+d,j}, for d = 1, 2, 3.
pub fn link_phase(config: u32, j: usize, d: usize, params: &ModelParams) -> Option<f64> {
    let s = if j % 2 == 0 { 1.0 } else { -1.0 };
    let ji = j as isize;
    match d {
        1 => Some(PI + s * PI / 3.0 * (n(config, params, ji + 2)? - n(config, params, ji - 1)?)),
        2 => Some(-s * 2.0 * PI / 3.0),
        3 => Some(PI + s * PI / 3.0 * (n(config, params, ji + 2)? - n(config, params, ji + 1)?)),
        _ => None,
    }
}

/// Θ_j = ±(φ_{j+2,j} + φ_{j+3,j+2} - φ_{j+3,j+1} - φ_{j+1,j}), sign by the parity of j.
pub fn theta_phase_sum(config: u32, j: usize, params: &ModelParams) -> Option<f64> {
    let at = |k: usize| params.site(k as isize).map(|_| k % params.sites);
    let s = if j % 2 == 0 { 1.0 } else { -1.0 };
    let sum = link_phase(config, j, 2, params)? + link_phase(config, at(j + 2)?, 1, params)?
        - link_phase(config, at(j + 1)?, 2, params)?
        - link_phase(config, j, 1, params)?;
    Some(s * sum)
}

fn plaquette_range(params: &ModelParams) -> std::ops::Range<usize> {
    match params.boundary {
        Boundary::Pbc => 0..params.sites,
        Boundary::Obc => 1..params.sites.saturating_sub(4),
    }
}

/// ⟨Φ_j⟩ and ⟨Φ_j²⟩ - ⟨Φ_j⟩².
pub fn plaquette_flux(sector: &BasisSector, psi: &[C64], params: &ModelParams, j: usize) -> Result<(f64, f64)> {
    check_len(sector, psi)?;
    if !plaquette_range(params).contains(&j) {
        return Err(Error::OutOfRange(format!("plaquette {j} touches a missing site")));
    }
    let (mut m1, mut m2) = (0.0, 0.0);
    for (&s, a) in sector.states().iter().zip(psi) {
        let w = a.norm_sqr();
        let f = plaquette_flux_operator(s, j, params).expect("range checked");
        m1 += w * f;
        m2 += w * f * f;
    }
    Ok((m1, m2 - m1 * m1))
}

/// All valid plaquettes with their mean flux and variance.
pub fn all_fluxes(sector: &BasisSector, psi: &[C64], params: &ModelParams) -> Result<Vec<(usize, f64, f64)>> {
    plaquette_range(params)
        .map(|j| plaquette_flux(sector, psi, params, j).map(|(m, v)| (j, m, v)))
        .collect()
}

/// Even plaquettes j entering χ: j and j+1 interior, first and last valid plaquette excluded.
pub fn chi_plaquettes(sites: usize) -> Vec<usize> {
    if sites < 9 {
        return Vec::new();
    }
    let (lo, hi) = (2, sites - 6);
    (lo..=hi).filter(|j| j % 2 == 0 && j + 1 <= hi).collect()
}

/// χ from per-plaquette mean fluxes; `flux(j)` must cover every plaquette used.
pub fn chi_from_fluxes<F: Fn(usize) -> Option<f64>>(sites: usize, flux: F) -> Result<f64> {
    let js = chi_plaquettes(sites);
    if js.is_empty() {
        return Err(Error::InvalidParams(format!("L = {sites} has no interior plaquette pair")));
    }
    let mut sum = 0.0;
    for j in js {
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let a = flux(j).ok_or_else(|| Error::InvalidParams(format!("missing flux for plaquette {j}")))?;
        let b = flux(j + 1).ok_or_else(|| Error::InvalidParams(format!("missing flux for plaquette {}", j + 1)))?;
        sum += sign * (a + b);
    }
    Ok((sum / sites as f64).abs())
}

pub fn chi_order(sector: &BasisSector, psi: &[C64], params: &ModelParams) -> Result<f64> {
    if params.boundary != Boundary::Obc {
        return Err(Error::UnsupportedBoundary("the flux order parameter is defined for open chains".into()));
    }
    let fluxes = all_fluxes(sector, psi, params)?;
    chi_from_fluxes(params.sites, |j| fluxes.iter().find(|f| f.0 == j).map(|f| f.1))
}
