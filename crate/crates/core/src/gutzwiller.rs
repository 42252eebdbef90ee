//! Product-state (Gutzwiller) variational energies with a four-site unit cell.
//!
//! Site states are (a_j |0⟩ + b_j e^{iχ_j} |1⟩)/norm with
//!   j   : (1-ε), (1+ε), χ = θ-φ
//!   j+1 : (1+ε), (1-ε), χ = -(θ-φ)
//!   j+2 : (1+ε), (1-ε), χ = θ+φ
//!   j+3 : (1-ε), (1±ε), χ = -(θ+φ)
//! where the last weight is (1+ε) for the symmetric variant and (1-ε) for
//! the literal one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::hamiltonian::TermTable;
use crate::observables::flux::chi_from_fluxes;
use crate::optim::NelderMead;
use crate::params::{Boundary, ModelParams};
use crate::sparse::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Symmetric,
    Literal,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Variant::Symmetric),
            "literal" => Ok(Variant::Literal),
            other => Err(Error::Config(format!("unknown Gutzwiller variant '{other}'"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Symmetric => "symmetric",
            Variant::Literal => "literal",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GutzwillerConfig {
    pub epsilon: f64,
    pub theta: f64,
    pub phi: f64,
    #[serde(rename = "L")]
    pub sites: usize,
    pub variant: Variant,
}

/// Normalized single-site state a|0⟩ + b|1⟩.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SiteState {
    pub a: f64,
    pub b: C64,
}

impl SiteState {
    pub fn density(&self) -> f64 {
        self.b.norm_sqr()
    }
    /// ⟨b†⟩
    pub fn create(&self) -> C64 {
        self.b.conj() * self.a
    }
    /// ⟨b⟩
    pub fn annihilate(&self) -> C64 {
        self.b * self.a
    }
}

pub fn build_state(cfg: &GutzwillerConfig) -> Result<Vec<SiteState>> {
    if !(cfg.epsilon.abs() < 1.0) {
        return Err(Error::InvalidParams(format!("|epsilon| = {} must be below 1", cfg.epsilon.abs())));
    }
    if cfg.sites == 0 || cfg.sites % 4 != 0 {
        return Err(Error::InvalidParams(format!("L = {} is not a multiple of 4", cfg.sites)));
    }
    let (e, t, p) = (cfg.epsilon, cfg.theta, cfg.phi);
    let last = match cfg.variant {
        Variant::Symmetric => 1.0 + e,
        Variant::Literal => 1.0 - e,
    };
    let cell = [
        (1.0 - e, 1.0 + e, t - p),
        (1.0 + e, 1.0 - e, -(t - p)),
        (1.0 + e, 1.0 - e, t + p),
        (1.0 - e, last, -(t + p)),
    ];
    Ok((0..cfg.sites)
        .map(|j| {
            let (a, b, chi) = cell[j % 4];
            let norm = (a * a + b * b).sqrt();
            SiteState { a: a / norm, b: C64::from_polar(b / norm, chi) }
        })
        .collect())
}

/// Factorized ⟨ψ|H|ψ⟩ over the whole ring.
pub fn energy_of_state(states: &[SiteState], params: &ModelParams) -> Result<f64> {
    if params.boundary != Boundary::Pbc {
        return Err(Error::UnsupportedBoundary("Gutzwiller energies tile a periodic ring".into()));
    }
    if states.len() != params.sites {
        return Err(Error::DimensionMismatch { expected: params.sites, found: states.len() });
    }
    // the term table validates L; the particle number plays no role here
    let table = TermTable::new(&params.with_particles(params.sites / 2))?;
    let mut e = 0.0;
    for h in &table.hops {
        let mut amp = h.base;
        for &(k, c) in &h.conditions {
            amp += c * (1.0 - states[k].density());
        }
        let t = amp * states[h.target].create() * states[h.source].annihilate();
        e += 2.0 * t.re;
    }
    for (j, nb) in table.diagonal_neighbours.iter().enumerate() {
        let empty: f64 = nb.iter().map(|&k| 1.0 - states[k].density()).sum();
        e += table.diagonal_coefficient * states[j].density() * empty;
    }
    Ok(e)
}

pub fn energy(cfg: &GutzwillerConfig, params: &ModelParams) -> Result<f64> {
    if cfg.sites != params.sites {
        return Err(Error::InvalidParams("config and model disagree on L".into()));
    }
    energy_of_state(&build_state(cfg)?, params)
}

/// Flux order parameter of the product state, with densities in place of ⟨n⟩.
pub fn chi_of_state(states: &[SiteState]) -> Result<f64> {
    let l = states.len() as isize;
    let n = |j: isize| states[j.rem_euclid(l) as usize].density();
    chi_from_fluxes(states.len(), |j| {
        let j = j as isize;
        Some(-PI / 3.0 * (n(j + 2) + n(j + 1) - n(j - 1) - n(j + 4)))
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartOutcome {
    pub config: GutzwillerConfig,
    pub energy: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best: GutzwillerConfig,
    pub energy: f64,
    /// Distinct minima (energy within 1e-8 of the best, parameters distinct).
    pub minima: Vec<RestartOutcome>,
    pub restarts: Vec<RestartOutcome>,
}

fn wrap(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

const EPS_BOX: f64 = 0.9;

pub fn optimize(params: &ModelParams, variant: Variant, restarts: usize, seed: u64) -> Result<OptimizeResult> {
    optimize_with(params, variant, restarts, seed, None)
}

/// As `optimize`; `fixed_theta` pins θ and searches (ε, φ) only.
pub fn optimize_with(
    params: &ModelParams,
    variant: Variant,
    restarts: usize,
    seed: u64,
    fixed_theta: Option<f64>,
) -> Result<OptimizeResult> {
    if restarts == 0 {
        return Err(Error::InvalidParams("at least one restart is needed".into()));
    }
    let base = GutzwillerConfig { epsilon: 0.0, theta: 0.0, phi: 0.0, sites: params.sites, variant };
    energy(&base, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<[f64; 3]> = (0..restarts)
        .map(|_| [rng.gen_range(-EPS_BOX..EPS_BOX), rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)])
        .collect();
    let nm = NelderMead { f_tol: 1e-10, x_tol: 1e-8, initial_step: 0.2, ..Default::default() };
    let outcomes: Vec<RestartOutcome> = starts
        .par_iter()
        .map(|s| {
            let cfg_of = |x: &[f64]| match fixed_theta {
                Some(t) => GutzwillerConfig { epsilon: x[0], theta: t, phi: x[1], ..base },
                None => GutzwillerConfig { epsilon: x[0], theta: x[1], phi: x[2], ..base },
            };
            let objective = |x: &[f64]| {
                if x[0].abs() >= EPS_BOX {
                    return f64::INFINITY;
                }
                energy(&cfg_of(x), params).unwrap_or(f64::INFINITY)
            };
            let x0: Vec<f64> = match fixed_theta {
                Some(_) => vec![s[0], s[2]],
                None => s.to_vec(),
            };
            let m = nm.minimize(objective, &x0);
            let mut cfg = cfg_of(&m.x);
            cfg.theta = wrap(cfg.theta);
            cfg.phi = wrap(cfg.phi);
            RestartOutcome { config: cfg, energy: m.value, converged: m.converged }
        })
        .collect();
    let best = outcomes
        .iter()
        .min_by(|a, b| a.energy.total_cmp(&b.energy))
        .cloned()
        .expect("restarts > 0");
    let mut minima: Vec<RestartOutcome> = Vec::new();
    for o in outcomes.iter().filter(|o| o.energy - best.energy < 1e-8) {
        let same = |m: &RestartOutcome| {
            (m.config.epsilon - o.config.epsilon).abs() < 1e-4
                && wrap(m.config.theta - o.config.theta).abs() < 1e-4
                && wrap(m.config.phi - o.config.phi).abs() < 1e-4
        };
        if !minima.iter().any(same) {
            minima.push(o.clone());
        }
    }
    Ok(OptimizeResult { best: best.config, energy: best.energy, minima, restarts: outcomes })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub g: f64,
    pub eta: f64,
    pub variant: Variant,
    pub epsilon: f64,
    pub theta: f64,
    pub phi: f64,
    pub energy: f64,
    pub chi: f64,
}

/// Optimum |ε| along a g grid, with θ and φ re-optimized at every point.
pub fn epsilon_scan(params: &ModelParams, gs: &[f64], variant: Variant, restarts: usize, seed: u64) -> Result<Vec<ScanRow>> {
    gs.iter()
        .map(|&g| {
            let p = ModelParams { g, ..*params };
            let r = optimize(&p, variant, restarts, seed)?;
            let chi = chi_of_state(&build_state(&r.best)?)?;
            Ok(ScanRow {
                g,
                eta: p.eta,
                variant,
                epsilon: r.best.epsilon.abs(),
                theta: r.best.theta,
                phi: r.best.phi,
                energy: r.energy,
                chi,
            })
        })
        .collect()
}

/// ∂²E/∂ε² at ε = 0, with θ and φ optimized on the ε = 0 manifold.
pub fn curvature_at_zero(params: &ModelParams, variant: Variant, restarts: usize, seed: u64) -> Result<f64> {
    let base = GutzwillerConfig { epsilon: 0.0, theta: 0.0, phi: 0.0, sites: params.sites, variant };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nm = NelderMead::default();
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for _ in 0..restarts.max(1) {
        let x0 = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
        let m = nm.minimize(|x| energy(&GutzwillerConfig { theta: x[0], phi: x[1], ..base }, params).unwrap_or(f64::INFINITY), &x0);
        if m.value < best.0 {
            best = (m.value, m.x[0], m.x[1]);
        }
    }
    let h = 1e-4;
    let at = |e: f64| energy(&GutzwillerConfig { epsilon: e, theta: best.1, phi: best.2, ..base }, params);
    Ok((at(h)? - 2.0 * at(0.0)? + at(-h)?) / (h * h))
}

/// E(ε, φ) on a grid at fixed θ.
pub fn contour(params: &ModelParams, variant: Variant, theta: f64, eps: &[f64], phis: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
    let mut out = Vec::with_capacity(eps.len() * phis.len());
    for &e in eps {
        for &p in phis {
            let cfg = GutzwillerConfig { epsilon: e, theta, phi: p, sites: params.sites, variant };
            out.push((e, p, energy(&cfg, params)?));
        }
    }
    Ok(out)
}

pub fn write_scan_csv<W: Write>(w: W, rows: &[ScanRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_contour_csv<W: Write>(w: W, theta: f64, grid: &[(f64, f64, f64)]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["theta", "epsilon", "phi", "energy"])?;
    for (e, p, v) in grid {
        wr.write_record(&[theta.to_string(), e.to_string(), p.to_string(), v.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}
