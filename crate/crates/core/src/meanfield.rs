//! Quadratic mean-field model at uniform half filling.
//!
//! Replacing every occupation in the fermion form by its average 1/2 kills
//! the direct range-2 hop and the range-3/4 hops (their string factors
//! average to zero) and leaves, per two-site cell,
//!
//! h(k) = -J [[2g cos(k - 4π/3), (1-g)(1+e^{-ik})],
//!            [(1-g)(1+e^{ik}),  2g cos(k + 4π/3)]]
//!
//! plus the constant -2ηgJ per particle, which is tracked separately.

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::fermion::fermion_terms;
use crate::params::{Boundary, ModelParams};
use crate::sparse::C64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochModel {
    pub g: f64,
    #[serde(rename = "J")]
    pub hopping: f64,
    pub eta: f64,
}

impl BlochModel {
    pub fn new(g: f64) -> Self {
        BlochModel { g, hopping: 1.0, eta: 0.0 }
    }

    pub fn matrix(&self, k: f64) -> Matrix2<C64> {
        let j = self.hopping;
        let off = C64::new(1.0 + k.cos(), -k.sin()) * (1.0 - self.g);
        Matrix2::new(
            C64::new(2.0 * self.g * (k - 4.0 * PI / 3.0).cos(), 0.0),
            off,
            off.conj(),
            C64::new(2.0 * self.g * (k + 4.0 * PI / 3.0).cos(), 0.0),
        ) * C64::new(-j, 0.0)
    }

    /// -2ηgJ, left out of the band energies.
    pub fn offset(&self) -> f64 {
        -2.0 * self.eta * self.g * self.hopping
    }

    /// (E₋(k), E₊(k)) in closed form.
    pub fn energies(&self, k: f64) -> (f64, f64) {
        let (g, j) = (self.g, self.hopping);
        let mean = g * j * k.cos();
        let s = k.sin();
        let rad = j * (3.0 * g * g * s * s + 2.0 * (1.0 - g) * (1.0 - g) * (1.0 + k.cos())).max(0.0).sqrt();
        (mean - rad, mean + rad)
    }
}

pub fn bands(model: &BlochModel, ks: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(k) = ks.iter().find(|k| !(k.abs() <= PI + 1e-12)) {
        return Err(Error::OutOfRange(format!("momentum {k} outside [-π, π]")));
    }
    Ok(ks.iter().map(|&k| model.energies(k)).unzip())
}

pub fn k_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| -PI + 2.0 * PI * i as f64 / n as f64).collect()
}

/// Energy below which the given fraction of (k, band) states lies.
pub fn fermi_level(model: &BlochModel, filling: f64, nk: usize) -> Result<f64> {
    if !(filling > 0.0 && filling < 1.0) {
        return Err(Error::InvalidParams(format!("filling {filling} outside (0, 1)")));
    }
    let mut levels: Vec<f64> = k_grid(nk)
        .into_iter()
        .flat_map(|k| {
            let (a, b) = model.energies(k);
            [a, b]
        })
        .collect();
    levels.sort_by(f64::total_cmp);
    let target = filling * levels.len() as f64;
    let (mut lo, mut hi) = (levels[0] - 1.0, levels[levels.len() - 1] + 1.0);
    let count = |e: f64| levels.partition_point(|&x| x < e) as f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // centre of the gap between the last filled and first empty level
    let n = target.round() as usize;
    if n > 0 && n < levels.len() {
        return Ok(0.5 * (levels[n - 1] + levels[n]));
    }
    Ok(0.5 * (lo + hi))
}

/// Four branches at q ∈ [-π/2, π/2] of the doubled (four-site) cell, ascending.
pub fn folded_energies(model: &BlochModel, q: f64) -> [f64; 4] {
    let (a, b) = model.energies(q);
    let (c, d) = model.energies(q + PI);
    let mut e = [a, b, c, d];
    e.sort_by(f64::total_cmp);
    e
}

/// Does E₋(k) - E₋(k+π) change sign strictly inside (0, π/2) on an n-point grid?
pub fn has_folded_crossing(model: &BlochModel, n: usize) -> bool {
    let diff = |k: f64| model.energies(k).0 - model.energies(k + PI).0;
    let ks: Vec<f64> = (1..n).map(|i| 0.5 * PI * i as f64 / n as f64).collect();
    ks.windows(2).any(|w| diff(w[0]).signum() != diff(w[1]).signum() && diff(w[0]) != 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingResult {
    pub found: bool,
    pub g_star: Option<f64>,
}

/// Smallest g in [g_lo, g_hi] where the two lowest folded branches cross.
pub fn folded_crossing(g_lo: f64, g_hi: f64, hopping: f64) -> CrossingResult {
    const GRID: usize = 4096;
    const SCAN: usize = 400;
    let crosses = |g: f64| has_folded_crossing(&BlochModel { g, hopping, eta: 0.0 }, GRID);
    if crosses(g_lo) {
        return CrossingResult { found: true, g_star: Some(g_lo) };
    }
    let mut prev = g_lo;
    for i in 1..=SCAN {
        let g = g_lo + (g_hi - g_lo) * i as f64 / SCAN as f64;
        if crosses(g) {
            let (mut lo, mut hi) = (prev, g);
            while hi - lo > 1e-5 {
                let mid = 0.5 * (lo + hi);
                if crosses(mid) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return CrossingResult { found: true, g_star: Some(0.5 * (lo + hi)) };
        }
        prev = g;
    }
    CrossingResult { found: false, g_star: None }
}

/// Single-particle matrix on a periodic ring of `sites` sites, obtained by
/// averaging each fermion hop coefficient over all occupations of the sites
/// it depends on (each occupied with probability 1/2).
pub fn realspace_matrix(g: f64, hopping: f64, sites: usize) -> Result<DMatrix<C64>> {
    realspace_chain(g, hopping, sites, Boundary::Pbc)
}

/// Same averaging on a ring or an open chain.
pub fn realspace_chain(g: f64, hopping: f64, sites: usize, boundary: Boundary) -> Result<DMatrix<C64>> {
    if sites % 2 != 0 || sites < 4 {
        return Err(Error::InvalidParams(format!("chain of {sites} sites")));
    }
    // read bulk terms off an open chain long enough for every range
    let window = ModelParams { sites: 16, particles: 8, g, eta: 0.0, hopping, boundary: Boundary::Obc };
    let terms = fermion_terms(&window)?;
    let mut m = DMatrix::zeros(sites, sites);
    for parity in 0..2 {
        let src = 6 + parity;
        for t in terms.iter().filter(|t| t.hop.source == src) {
            let mut deps: Vec<usize> = t.hop.conditions.iter().map(|c| c.0).chain(t.string.iter().copied()).collect();
            deps.sort_unstable();
            deps.dedup();
            let mut avg = C64::new(0.0, 0.0);
            for bits in 0..1u32 << deps.len() {
                let mut cfg = 0u32;
                for (i, &k) in deps.iter().enumerate() {
                    if bits >> i & 1 == 1 {
                        cfg |= 1 << k;
                    }
                }
                avg += t.coefficient(cfg);
            }
            avg /= (1u32 << deps.len()) as f64;
            let d = t.hop.target - t.hop.source;
            for j in (parity..sites).step_by(2) {
                if boundary == Boundary::Obc && j + d >= sites {
                    continue;
                }
                let to = (j + d) % sites;
                m[(to, j)] += avg;
                m[(j, to)] += avg.conj();
            }
        }
    }
    Ok(m)
}

/// Site densities of the lowest `particles` single-particle levels.
pub fn filled_density(m: &DMatrix<C64>, particles: usize) -> Result<Vec<f64>> {
    let n = m.nrows();
    if particles > n {
        return Err(Error::InvalidParams(format!("{particles} particles on {n} sites")));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut dens = vec![0.0; n];
    for &c in &order[..particles] {
        for (i, d) in dens.iter_mut().enumerate() {
            *d += eig.eigenvectors[(i, c)].norm_sqr();
        }
    }
    Ok(dens)
}

pub fn write_bands_csv<W: Write>(w: W, model: &BlochModel, nk: usize) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["schema_version", "g", "J", "k", "E_minus", "E_plus"])?;
    let ks = k_grid(nk);
    let (lo, hi) = bands(model, &ks)?;
    for ((k, a), b) in ks.iter().zip(lo).zip(hi) {
        wr.write_record(&["1".to_string(), model.g.to_string(), model.hopping.to_string(), k.to_string(), a.to_string(), b.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_crossing_csv<W: Write>(w: W, rows: &[(f64, f64, CrossingResult)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["schema_version", "g_lo", "g_hi", "crossing_found", "g_star"])?;
    for (lo, hi, r) in rows {
        wr.write_record(&[
            "1".to_string(),
            lo.to_string(),
            hi.to_string(),
            r.found.to_string(),
            r.g_star.map(|g| g.to_string()).unwrap_or_default(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
