//! Dipole-dipole coupling of three-level atoms, second-order elimination of
//! the detuned level, and the resulting hard-core boson triangle.
//!
//! Units: e = ξ = 1 and 1/(4πε₀) = 1, so J = 1/(18 R³).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dipole::{Level, LevelAssignment};
use crate::eigensolver::dense_from_matrix;
use crate::error::{Error, Result};
use crate::sparse::C64;

const LEVELS: usize = 3;
const ATOMS: usize = 3;
const DIM: usize = 27;

/// Three atoms with 1→2 along angle α and 2→3 along -α, both of length R.
/// The triangle is equilateral for α = π/3.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleSetup {
    #[serde(rename = "R")]
    pub r: f64,
    pub alpha: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub omega: f64,
}

impl TriangleSetup {
    pub fn equilateral(delta: f64) -> Self {
        TriangleSetup { r: 1.0, alpha: std::f64::consts::FRAC_PI_3, delta, omega: 1e7 }
    }

    pub fn positions(&self) -> [[f64; 2]; 3] {
        let (c, s) = (self.alpha.cos(), self.alpha.sin());
        let p2 = [self.r * c, self.r * s];
        [[0.0, 0.0], p2, [p2[0] + self.r * c, p2[1] - self.r * s]]
    }

    /// Energy scale of a direct flip-flop over distance R.
    pub fn hopping(&self) -> f64 {
        1.0 / (18.0 * self.r.powi(3))
    }

    /// g = 27J / 2Δ
    pub fn g(&self) -> f64 {
        27.0 * self.hopping() / (2.0 * self.delta)
    }

    fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) || !self.r.is_finite() || !self.alpha.is_finite() || !self.omega.is_finite() {
            return Err(Error::InvalidParams("triangle geometry must be finite with R > 0".into()));
        }
        if self.delta == 0.0 || !self.delta.is_finite() {
            return Err(Error::InvalidParams("detuning must be finite and nonzero".into()));
        }
        Ok(())
    }
}

/// 9×9 dipole-dipole operator on atoms at `ri`, `rj`, indexed 3·a_i + a_j.
pub fn pair_interaction(levels: &LevelAssignment, ri: [f64; 2], rj: [f64; 2]) -> Result<DMatrix<C64>> {
    let (dx, dy) = (rj[0] - ri[0], rj[1] - ri[1]);
    let dist = dx.hypot(dy);
    if !(dist > 1e-12) {
        return Err(Error::InvalidParams("coincident atoms".into()));
    }
    let phi = dy.atan2(dx);
    let d = levels.dipole_matrices()?;
    let (dm, dz, dp) = (&d[0], &d[1], &d[2]);
    let pre = 1.0 / dist.powi(3);
    let up = C64::from_polar(-1.5, -2.0 * phi);
    let down = C64::from_polar(-1.5, 2.0 * phi);
    let mut v = DMatrix::<C64>::zeros(LEVELS * LEVELS, LEVELS * LEVELS);
    for a in 0..LEVELS {
        for b in 0..LEVELS {
            for c in 0..LEVELS {
                for e in 0..LEVELS {
                    let x = C64::from(dz[a][c] * dz[b][e] + 0.5 * (dp[a][c] * dm[b][e] + dm[a][c] * dp[b][e]))
                        + up * (dp[a][c] * dp[b][e])
                        + down * (dm[a][c] * dm[b][e]);
                    v[(3 * a + b, 3 * c + e)] = x * pre;
                }
            }
        }
    }
    Ok(v)
}

fn digits(index: usize) -> [usize; ATOMS] {
    [index / 9, (index / 3) % 3, index % 3]
}

fn index_of(levels: [usize; ATOMS]) -> usize {
    9 * levels[0] + 3 * levels[1] + levels[2]
}

/// Sum of pair interactions over the three pairs, each pair counted once.
pub fn interaction(setup: &TriangleSetup, levels: &LevelAssignment) -> Result<DMatrix<C64>> {
    setup.validate()?;
    let pos = setup.positions();
    let mut h = DMatrix::<C64>::zeros(DIM, DIM);
    for i in 0..ATOMS {
        for j in i + 1..ATOMS {
            let v = pair_interaction(levels, pos[i], pos[j])?;
            for row in 0..DIM {
                let rd = digits(row);
                for col in 0..DIM {
                    let cd = digits(col);
                    if (0..ATOMS).any(|k| k != i && k != j && rd[k] != cd[k]) {
                        continue;
                    }
                    h[(row, col)] += v[(3 * rd[i] + rd[j], 3 * cd[i] + cd[j])];
                }
            }
        }
    }
    Ok(h)
}

/// Full 27-level Hamiltonian with on-site energies ω (|1⟩) and ω+Δ (|+⟩).
pub fn full_hamiltonian(setup: &TriangleSetup, levels: &LevelAssignment) -> Result<DMatrix<C64>> {
    let mut h = interaction(setup, levels)?;
    for s in 0..DIM {
        let e: f64 = digits(s)
            .iter()
            .map(|&l| match l {
                1 => setup.omega,
                2 => setup.omega + setup.delta,
                _ => 0.0,
            })
            .sum();
        h[(s, s)] += e;
    }
    Ok(h)
}

/// Configurations of `n` excitations as bitmasks, ascending.
pub fn sector_configs(n: u32) -> Vec<usize> {
    (0..1usize << ATOMS).filter(|c| c.count_ones() == n).collect()
}

fn config_state(config: usize) -> usize {
    index_of([config & 1, config >> 1 & 1, config >> 2 & 1])
}

/// Second-order effective Hamiltonian in the n-excitation sector, with
/// intermediates holding one atom in |+⟩ and the excitation count fixed.
pub fn eliminate_sector(setup: &TriangleSetup, levels: &LevelAssignment, n: u32) -> Result<DMatrix<C64>> {
    let v = interaction(setup, levels)?;
    let p: Vec<usize> = sector_configs(n).into_iter().map(config_state).collect();
    let q: Vec<usize> = (0..DIM)
        .filter(|&s| {
            let d = digits(s);
            d.iter().filter(|&&l| l == 2).count() == 1 && d.iter().filter(|&&l| l != 0).count() == n as usize
        })
        .collect();
    let mut h = DMatrix::<C64>::zeros(p.len(), p.len());
    for (a, &sa) in p.iter().enumerate() {
        for (b, &sb) in p.iter().enumerate() {
            let virt: C64 = q.iter().map(|&m| v[(sa, m)] * v[(m, sb)]).sum();
            h[(a, b)] = v[(sa, sb)] - virt / setup.delta;
        }
    }
    Ok(h)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModel {
    /// J from ⟨010|V₁₂|100⟩ = -J.
    pub hopping: f64,
    pub g: f64,
    /// h[i][j][k] = h_{i→j→k}
    pub indirect: Vec<Vec<Vec<C64>>>,
    pub u: Vec<C64>,
    pub direct: Vec<Vec<C64>>,
    /// Rows and columns label the excited atom.
    pub matrix: Vec<Vec<C64>>,
}

impl EffectiveModel {
    pub fn h(&self, i: usize, j: usize, k: usize) -> C64 {
        self.indirect[i][j][k]
    }
    pub fn to_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_fn(ATOMS, ATOMS, |r, c| self.matrix[r][c])
    }
}

fn excited_at(site: usize, level: Level) -> usize {
    let mut l = [0; ATOMS];
    l[site] = level.index();
    index_of(l)
}

pub fn adiabatic_eliminate(setup: &TriangleSetup, levels: &LevelAssignment) -> Result<EffectiveModel> {
    let v = interaction(setup, levels)?;
    let one = |s: usize| excited_at(s, Level::Excited);
    let plus = |s: usize| excited_at(s, Level::Detuned);
    let mut indirect = vec![vec![vec![C64::new(0.0, 0.0); ATOMS]; ATOMS]; ATOMS];
    for i in 0..ATOMS {
        for j in 0..ATOMS {
            if j == i {
                continue;
            }
            for k in 0..ATOMS {
                if k != j {
                    indirect[i][j][k] = v[(one(k), plus(j))] * v[(plus(j), one(i))];
                }
            }
        }
    }
    let u: Vec<C64> = (0..ATOMS).map(|i| (0..ATOMS).filter(|&j| j != i).map(|j| indirect[i][j][i]).sum()).collect();
    let direct: Vec<Vec<C64>> = (0..ATOMS)
        .map(|k| (0..ATOMS).map(|i| if i == k { C64::new(0.0, 0.0) } else { v[(one(k), one(i))] }).collect())
        .collect();
    let matrix = (0..ATOMS)
        .map(|k| {
            (0..ATOMS)
                .map(|i| {
                    let second = if i == k {
                        u[i]
                    } else {
                        (0..ATOMS).filter(|&j| j != i && j != k).map(|j| indirect[i][j][k]).sum()
                    };
                    direct[k][i] - second / setup.delta
                })
                .collect()
        })
        .collect();
    let pos = setup.positions();
    let v12 = pair_interaction(levels, pos[0], pos[1])?;
    // ⟨0,1|V|1,0⟩ in the two-atom basis
    let hopping = -v12[(Level::Excited.index(), 3 * Level::Excited.index())].re;
    Ok(EffectiveModel { hopping, g: 27.0 * hopping / (2.0 * setup.delta), indirect, u, direct, matrix })
}

/// How the 27-level reference treats couplings that change the number of
/// excited atoms (|1⟩ or |+⟩).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactMode {
    /// Keep them; their shifts are suppressed by 1/ω.
    Full,
    /// Drop them (the ω → ∞ limit).
    RotatingFrame,
}

fn excitations(state: usize) -> usize {
    digits(state).iter().filter(|&&l| l != 0).count()
}

/// Single-excitation levels of the 27-level model, relative to ω.
pub fn exact_single_excitation(setup: &TriangleSetup, levels: &LevelAssignment, mode: ExactMode) -> Result<Vec<f64>> {
    let h = full_hamiltonian(setup, levels)?;
    let mut near: Vec<f64> = match mode {
        ExactMode::Full => dense_from_matrix(h)?.energies.iter().map(|e| e - setup.omega).collect(),
        ExactMode::RotatingFrame => {
            // the one-excitation block decouples once the other couplings are gone
            let block: Vec<usize> = (0..DIM).filter(|&s| excitations(s) == 1).collect();
            let m = DMatrix::from_fn(block.len(), block.len(), |r, c| {
                let shift = if r == c { setup.omega } else { 0.0 };
                h[(block[r], block[c])] - shift
            });
            dense_from_matrix(m)?.energies
        }
    };
    near.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    near.truncate(ATOMS);
    near.sort_by(f64::total_cmp);
    Ok(near)
}

fn hermitian_eigenvalues(m: DMatrix<C64>) -> Result<Vec<f64>> {
    Ok(dense_from_matrix(m)?.energies)
}

/// Largest eigenvalue deviation between the effective and exact models.
pub fn elimination_error(setup: &TriangleSetup, levels: &LevelAssignment, mode: ExactMode) -> Result<f64> {
    let eff = hermitian_eigenvalues(adiabatic_eliminate(setup, levels)?.to_matrix())?;
    let exact = exact_single_excitation(setup, levels, mode)?;
    Ok(eff.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorPoint {
    pub delta: f64,
    pub error: f64,
}

pub fn elimination_scan(setup: &TriangleSetup, levels: &LevelAssignment, deltas: &[f64], mode: ExactMode) -> Result<Vec<ErrorPoint>> {
    deltas
        .iter()
        .map(|&delta| {
            let s = TriangleSetup { delta, ..*setup };
            Ok(ErrorPoint { delta, error: elimination_error(&s, levels, mode)? })
        })
        .collect()
}

/// Least-squares slope of log(error) against log(Δ).
pub fn loglog_slope(points: &[ErrorPoint]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|p| !(p.error > 0.0) || !(p.delta > 0.0)) {
        return Err(Error::InvalidParams("need two or more points with positive Δ and error".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.delta.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.error.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Hard-core boson triangle on bitmask configurations (bit i = atom i).
pub fn triangle_model(setup: &TriangleSetup, g: f64) -> Result<DMatrix<C64>> {
    setup.validate()?;
    let j_hop = setup.hopping();
    let size = 1usize << ATOMS;
    let mut h = DMatrix::<C64>::zeros(size, size);
    let n = |c: usize, s: usize| (c >> s & 1) as f64;
    for c in 0..size {
        for i in 0..ATOMS {
            for j in 0..ATOMS {
                if i == j {
                    continue;
                }
                h[(c, c)] += -2.0 * g * j_hop * n(c, i) * (1.0 - n(c, j));
                if n(c, j) == 0.0 || n(c, i) == 1.0 {
                    continue;
                }
                let target = c ^ (1 << i) ^ (1 << j);
                let k = 3 - i - j;
                let amp = -j_hop
                    - 2.0 * g * j_hop * (1.0 - n(c, k)) * C64::from_polar(1.0, -4.0 * levi_civita(i, j, k) * setup.alpha);
                h[(target, c)] += amp;
            }
        }
    }
    Ok(h)
}

/// Block of an 8×8 triangle operator on the n-excitation configurations.
pub fn sector_block(h: &DMatrix<C64>, n: u32) -> DMatrix<C64> {
    let cs = sector_configs(n);
    DMatrix::from_fn(cs.len(), cs.len(), |r, c| h[(cs[r], cs[c])])
}
