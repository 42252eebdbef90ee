#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use zigzag_core::basis::{build_sector, BasisSector};
use zigzag_core::gutzwiller::SiteState;
use zigzag_core::hamiltonian::build_boson;
use zigzag_core::{Boundary, ModelParams};

/// ⟨ψ|H|ψ⟩ with ψ expanded over every particle-number sector.
pub fn fock_expectation(states: &[SiteState], p: &ModelParams) -> f64 {
    let l = states.len();
    let mut total = 0.0;
    for n in 0..=l {
        let sector = build_sector(l, n).unwrap();
        let psi: Vec<C64> = sector
            .states()
            .iter()
            .map(|&c| {
                (0..l).fold(C64::new(1.0, 0.0), |acc, j| {
                    if c >> j & 1 == 1 {
                        acc * states[j].b
                    } else {
                        acc * states[j].a
                    }
                })
            })
            .collect();
        let op = build_boson(&p.with_particles(n), &sector).unwrap();
        total += op.expectation(&psi).unwrap().re;
    }
    total
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn phase(frac_of_turn: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * frac_of_turn)
}

/// Hamiltonian on all 2^L Fock states, written as products of dense
/// b, b† and n matrices term by term.
pub struct Fock {
    pub l: usize,
    pub b: Vec<DMatrix<C64>>,
    pub n: Vec<DMatrix<C64>>,
    pub one: DMatrix<C64>,
}

impl Fock {
    pub fn new(l: usize) -> Self {
        let dim = 1usize << l;
        let b = (0..l)
            .map(|j| {
                DMatrix::from_fn(dim, dim, |r, col| if col >> j & 1 == 1 && r == col ^ (1 << j) { c(1.0) } else { c(0.0) })
            })
            .collect();
        let n = (0..l)
            .map(|j| DMatrix::from_fn(dim, dim, |r, col| if r == col && col >> j & 1 == 1 { c(1.0) } else { c(0.0) }))
            .collect();
        Fock { l, b, n, one: DMatrix::identity(dim, dim) }
    }

    pub fn site(&self, j: isize, boundary: Boundary) -> Option<usize> {
        let l = self.l as isize;
        match boundary {
            Boundary::Pbc => Some(j.rem_euclid(l) as usize),
            Boundary::Obc => (0..l).contains(&j).then_some(j as usize),
        }
    }

    pub fn hole(&self, k: usize) -> DMatrix<C64> {
        &self.one - &self.n[k]
    }

    /// The hop b†_{j+d} A b_j, without its conjugate.
    pub fn hop_term(&self, p: &ModelParams, j: usize, d: usize) -> Option<DMatrix<C64>> {
        let s = if j % 2 == 0 { 1.0 } else { -1.0 };
        let at = |o: isize| self.site(j as isize + o, p.boundary);
        // (direct part, offsets of the conditioning sites with the weight of their (1 - n) factor)
        let (direct, cond): (f64, Vec<(isize, C64)>) = match d {
            1 => (1.0, vec![(-1, phase(-s / 3.0)), (2, phase(s / 3.0))]),
            2 => (1.0, vec![(1, phase(2.0 * s / 3.0))]),
            3 => (0.0, vec![(1, phase(-s / 3.0)), (2, phase(s / 3.0))]),
            4 => (0.0, vec![(2, c(1.0))]),
            _ => return None,
        };
        let t = at(d as isize)?;
        let mut a = &self.one * c(direct);
        for (o, w) in cond {
            if let Some(k) = at(o) {
                a += self.hole(k) * (w * 2.0 * p.g);
            }
        }
        Some(self.b[t].adjoint() * a * &self.b[j] * c(-p.hopping))
    }

    pub fn hamiltonian(&self, p: &ModelParams) -> DMatrix<C64> {
        let (g, eta, jj) = (p.g, p.eta, p.hopping);
        let dim = 1usize << self.l;
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for j in 0..self.l {
            let at = |o: isize| self.site(j as isize + o, p.boundary);
            for d in 1..=4 {
                if let Some(term) = self.hop_term(p, j, d) {
                    h += term.adjoint();
                    h += term;
                }
            }
            let mut empty = DMatrix::<C64>::zeros(dim, dim);
            for o in [-2, -1, 1, 2] {
                if let Some(k) = at(o) {
                    empty += self.hole(k);
                }
            }
            h += &self.n[j] * empty * c(-2.0 * g * eta * jj);
        }
        h
    }

    /// A sector vector written out on all 2^L Fock states.
    pub fn embed(&self, sector: &BasisSector, psi: &[C64]) -> DVector<C64> {
        let mut v = DVector::zeros(1 << self.l);
        for (&s, &a) in sector.states().iter().zip(psi) {
            v[s as usize] = a;
        }
        v
    }
}

pub fn expect(m: &DMatrix<C64>, v: &DVector<C64>) -> C64 {
    v.dotc(&(m * v))
}
