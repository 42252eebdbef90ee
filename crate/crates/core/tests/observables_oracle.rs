mod common;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zigzag_core::basis::{build_sector, BasisSector};
use zigzag_core::eigensolver::{dense_spectrum, lanczos_ground, LanczosOptions};
use zigzag_core::hamiltonian::{build_boson, build_boson_ranges, TermTable};
use zigzag_core::observables::currents::{
    bond_currents, commutator_density, current_nn, current_nnn, divergence_from_bonds, CurrentConvention,
};
use zigzag_core::observables::flux::{all_fluxes, chi_order, plaquette_flux, plaquette_flux_operator};
use zigzag_core::observables::{corr1, corr1_matrix, density, fidelity, g2, g2_mixture, SpinPair};
use zigzag_core::{Boundary, ModelParams};

use common::{expect, Fock};

const L8: usize = 8;

fn normalized_random(dim: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<C64> = (0..dim).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn product(sector: &BasisSector, config: u32) -> Vec<C64> {
    let mut v = vec![C64::new(0.0, 0.0); sector.dim()];
    v[sector.rank(config as u64).unwrap()] = C64::new(1.0, 0.0);
    v
}

/// Lowest eigenvector and gap; dense below a few thousand states.
fn ground(p: &ModelParams) -> (BasisSector, Vec<C64>, f64) {
    let s = build_sector(p.sites, p.particles).unwrap();
    let op = build_boson(p, &s).unwrap();
    let spec = if s.dim() <= 2000 {
        dense_spectrum(&op).unwrap()
    } else {
        let opts = LanczosOptions { tol: 1e-12, max_iter: 20000, ..Default::default() };
        lanczos_ground(&op, 2, 1, &opts).unwrap()
    };
    let gap = spec.energies[1] - spec.energies[0];
    (s, spec.vectors[0].clone(), gap)
}

fn params(sites: usize, g: f64, eta: f64, boundary: Boundary) -> ModelParams {
    ModelParams::new(sites, g, eta, boundary)
}

/// The printed bond formulas evaluated with Fock-space operators.
fn printed_nnn(f: &Fock, p: &ModelParams, v: &nalgebra::DVector<C64>, j: usize) -> f64 {
    let t = f.site(j as isize + 2, p.boundary).unwrap();
    let mid = f.site(j as isize + 1, p.boundary).unwrap();
    let s = if j % 2 == 0 { 1.0 } else { -1.0 };
    let plain = expect(&(f.b[j].adjoint() * &f.b[t]), v);
    let cond = expect(&(f.b[j].adjoint() * f.hole(mid) * &f.b[t]), v);
    let (jj, g) = (p.hopping, p.g);
    2.0 * jj * plain.im - jj * g * cond.im + s * 3f64.sqrt() * jj * g * cond.re
}

fn printed_nn(f: &Fock, p: &ModelParams, v: &nalgebra::DVector<C64>, j: usize) -> f64 {
    let t = f.site(j as isize + 1, p.boundary).unwrap();
    let s = if j % 2 == 0 { 1.0 } else { -1.0 };
    // a missing neighbour drops its (1 - n) channel, so it enters like n = 1
    let occ = |o: isize| f.site(j as isize + o, p.boundary).map_or(f.one.clone(), |k| f.n[k].clone());
    let (left, right) = (occ(-1), occ(2));
    let sum = &f.one * C64::new(2.0, 0.0) - &right - &left;
    let diff = &right - &left;
    let plain = expect(&(f.b[j].adjoint() * &f.b[t]), v);
    let a = expect(&(f.b[j].adjoint() * sum * &f.b[t]), v);
    let b = expect(&(f.b[j].adjoint() * diff * &f.b[t]), v);
    let (jj, g) = (p.hopping, p.g);
    2.0 * jj * plain.im - jj * g * a.im + s * 3f64.sqrt() * jj * g * b.re
}

#[test]
fn one_body_quantities_match_fock_operators() {
    let f = Fock::new(L8);
    let s = build_sector(L8, 4).unwrap();
    let psi = normalized_random(s.dim(), 1);
    let v = f.embed(&s, &psi);
    let n = density(&s, &psi).unwrap();
    for k in 0..L8 {
        assert!((n[k] - expect(&f.n[k], &v).re).abs() < 1e-13);
        for l in 0..L8 {
            let want = expect(&(f.b[k].adjoint() * &f.b[l]), &v);
            assert!((corr1(&s, &psi, k, l).unwrap() - want).norm() < 1e-13, "({k},{l})");
        }
    }
    // in-plane spin correlations with S⁺ = b†
    let half = C64::new(0.5, 0.0);
    let sx = |k: usize| (&f.b[k] + f.b[k].adjoint()) * half;
    let sy = |k: usize| (f.b[k].adjoint() - &f.b[k]) * C64::new(0.0, -0.5);
    let (k, l) = (2, 5);
    let sp = SpinPair::from_corr1(corr1(&s, &psi, k, l).unwrap());
    let ex = |a: DMatrix<C64>, b: DMatrix<C64>| expect(&(a * b), &v).re;
    assert!((sp.xx - ex(sx(k), sx(l))).abs() < 1e-13);
    assert!((sp.yy - ex(sy(k), sy(l))).abs() < 1e-13);
    assert!((sp.xy - ex(sx(k), sy(l))).abs() < 1e-13);
    assert!((sp.yx - ex(sy(k), sx(l))).abs() < 1e-13);
    // connected correlations
    for boundary in [Boundary::Pbc, Boundary::Obc] {
        let got = g2(&s, &psi, boundary).unwrap().values;
        let nn = |i: usize, j: usize| expect(&(&f.n[i] * &f.n[j]), &v).re - n[i] * n[j];
        for d in 0..L8 {
            let want = match boundary {
                Boundary::Pbc => nn(0, d),
                Boundary::Obc => (0..L8 - d).map(|i| nn(i, i + d)).sum::<f64>() / (L8 - d) as f64,
            };
            assert!((got[d] - want).abs() < 1e-13, "{boundary:?} d={d}");
        }
    }
}

#[test]
fn currents_match_fock_operators() {
    let f = Fock::new(L8);
    let s = build_sector(L8, 4).unwrap();
    for (boundary, g) in [(Boundary::Pbc, 0.7), (Boundary::Obc, 1.3)] {
        let p = params(L8, g, 1.5, boundary);
        let table = TermTable::new(&p).unwrap();
        let op = build_boson(&p, &s).unwrap();
        let psi = normalized_random(s.dim(), 2);
        let v = f.embed(&s, &psi);

        // each term b†_t A b_s carries 2 Im⟨term⟩ from s to t
        for b in bond_currents(&table, &s, &psi).unwrap() {
            let d = (b.target + L8 - b.source) % L8;
            let term = f.hop_term(&p, b.source, d).unwrap();
            assert!((b.value - 2.0 * expect(&term, &v).im).abs() < 1e-13);
        }

        let h = f.hamiltonian(&p);
        let comm = commutator_density(&op, &s, &psi).unwrap();
        for j in 0..L8 {
            let c = (&h * &f.n[j] - &f.n[j] * &h) * C64::new(0.0, 1.0);
            assert!((comm[j] - expect(&c, &v).re).abs() < 1e-12, "site {j}");
        }
        // continuity holds for any state once every range is included
        let div = divergence_from_bonds(&bond_currents(&table, &s, &psi).unwrap(), L8);
        for j in 0..L8 {
            assert!((div[j] - comm[j]).abs() < 1e-12);
        }
        assert!(comm.iter().sum::<f64>().abs() < 1e-12);
        assert!(comm.iter().any(|x| x.abs() > 1e-3));

        for j in 0..L8 {
            if p.site(j as isize + 2).is_some() {
                let got = current_nnn(&table, &s, &psi, j, CurrentConvention::Printed).unwrap();
                assert!((got - printed_nnn(&f, &p, &v, j)).abs() < 1e-13, "nnn {j}");
            }
            if p.site(j as isize + 1).is_some() {
                let got = current_nn(&table, &s, &psi, j, CurrentConvention::Printed).unwrap();
                assert!((got - printed_nn(&f, &p, &v, j)).abs() < 1e-13, "nn {j}");
            }
        }
    }
}

#[test]
fn printed_and_hamiltonian_currents_agree_at_zero_coupling() {
    let s = build_sector(L8, 4).unwrap();
    let p = params(L8, 0.0, 1.0, Boundary::Obc);
    let table = TermTable::new(&p).unwrap();
    let psi = normalized_random(s.dim(), 3);
    for j in 0..L8 - 2 {
        let a = current_nnn(&table, &s, &psi, j, CurrentConvention::Printed).unwrap();
        let b = current_nnn(&table, &s, &psi, j, CurrentConvention::Hamiltonian).unwrap();
        assert!((a - b).abs() < 1e-14);
        assert!(a.abs() > 1e-6);
    }
}

#[test]
fn truncated_hamiltonian_continuity_from_bond_currents() {
    let p = params(12, 0.8, 1.0, Boundary::Obc);
    let s = build_sector(12, 6).unwrap();
    let op = build_boson_ranges(&p, &s, &[1, 2]).unwrap();
    let table = TermTable::with_ranges(&p, &[1, 2]).unwrap();
    let spec = dense_spectrum(&op).unwrap();
    let psi = spec.ground();
    let comm = commutator_density(&op, &s, psi).unwrap();
    let cur = |f: fn(&TermTable, &BasisSector, &[C64], usize, CurrentConvention) -> zigzag_core::Result<f64>, j: isize| {
        if j < 0 {
            return 0.0;
        }
        f(&table, &s, psi, j as usize, CurrentConvention::Hamiltonian).unwrap_or(0.0)
    };
    for j in 0..12isize {
        let inflow = cur(current_nn, j - 1) + cur(current_nnn, j - 2) - cur(current_nn, j) - cur(current_nnn, j);
        assert!((inflow - comm[j as usize]).abs() < 1e-8, "site {j}: {inflow} vs {}", comm[j as usize]);
        assert!(comm[j as usize].abs() < 1e-8);
    }
    // a non-eigenstate has a nonzero divergence with the same reconstruction
    let x = normalized_random(s.dim(), 4);
    let div = divergence_from_bonds(&bond_currents(&table, &s, &x).unwrap(), 12);
    let comm = commutator_density(&op, &s, &x).unwrap();
    assert!(div.iter().zip(&comm).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn ground_state_sum_rules() {
    for p in [params(12, 0.45, 1.0, Boundary::Pbc), params(12, 2.0, 6.0, Boundary::Obc), params(11, 1.0, 0.5, Boundary::Obc).with_particles(4)] {
        let (s, psi, _) = ground(&p);
        let n = density(&s, &psi).unwrap();
        assert!((n.iter().sum::<f64>() - p.particles as f64).abs() < 1e-10);
        let m = corr1_matrix(&s, &psi).unwrap();
        for k in 0..p.sites {
            assert!((m[k][k].re - n[k]).abs() < 1e-12 && m[k][k].im == 0.0);
            for l in 0..p.sites {
                assert!((m[k][l] - m[l][k].conj()).norm() < 1e-12);
            }
        }
        let g = g2(&s, &psi, p.boundary).unwrap();
        assert!(g.values[0] <= 0.25 + 1e-12);
        let op = build_boson(&p, &s).unwrap();
        let comm = commutator_density(&op, &s, &psi).unwrap();
        assert!(comm.iter().all(|x| x.abs() < 1e-8), "{comm:?}");
        for (_, mean, var) in all_fluxes(&s, &psi, &p).unwrap() {
            assert!(mean.abs() <= 4.0 * PI / 3.0 + 1e-12);
            assert!(var >= -1e-12);
        }
    }
}

#[test]
fn zero_coupling_carries_no_current() {
    for boundary in [Boundary::Pbc, Boundary::Obc] {
        let p = params(12, 0.0, 1.0, boundary);
        let (s, psi, _) = ground(&p);
        let table = TermTable::new(&p).unwrap();
        for j in 0..10 {
            for conv in [CurrentConvention::Hamiltonian, CurrentConvention::Printed] {
                assert!(current_nn(&table, &s, &psi, j, conv).unwrap().abs() < 1e-12);
                assert!(current_nnn(&table, &s, &psi, j, conv).unwrap().abs() < 1e-12);
            }
        }
    }
}

#[test]
fn no_net_current_between_the_chains() {
    for g in [0.3, 0.45, 1.1] {
        let p = params(12, g, 1.0, Boundary::Pbc);
        let (s, psi, _) = ground(&p);
        let table = TermTable::new(&p).unwrap();
        // flow from chain A into chain B over every inter-chain term
        let net: f64 = bond_currents(&table, &s, &psi)
            .unwrap()
            .iter()
            .filter(|b| b.range % 2 == 1)
            .map(|b| if b.source % 2 == 0 { b.value } else { -b.value })
            .sum();
        assert!(net.abs() < 1e-10, "g={g}: {net}");
        for conv in [CurrentConvention::Hamiltonian, CurrentConvention::Printed] {
            let staggered: f64 = (0..12)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    sign * current_nn(&table, &s, &psi, j, conv).unwrap()
                })
                .sum::<f64>()
                / 12.0;
            assert!(staggered.abs() < 1e-10, "g={g} {conv:?}: {staggered}");
        }
    }
}

#[test]
fn periodic_observables_repeat_every_four_sites() {
    let p = params(12, 0.3, 1.0, Boundary::Pbc);
    let (s, psi, gap) = ground(&p);
    assert!(gap > 1e-3, "gap {gap}");
    let table = TermTable::new(&p).unwrap();
    let n = density(&s, &psi).unwrap();
    let nn: Vec<f64> = (0..12).map(|j| current_nn(&table, &s, &psi, j, CurrentConvention::Printed).unwrap()).collect();
    let nnn: Vec<f64> = (0..12).map(|j| current_nnn(&table, &s, &psi, j, CurrentConvention::Printed).unwrap()).collect();
    let flux: Vec<f64> = (0..12).map(|j| plaquette_flux(&s, &psi, &p, j).unwrap().0).collect();
    for j in 0..12 {
        let k = (j + 4) % 12;
        assert!((n[j] - n[k]).abs() < 1e-10);
        assert!((nn[j] - nn[k]).abs() < 1e-10);
        assert!((nnn[j] - nnn[k]).abs() < 1e-10);
        assert!((flux[j] - flux[k]).abs() < 1e-10);
    }
}

#[test]
fn fidelity_converges_in_step() {
    let base = params(12, 0.3, 1.0, Boundary::Pbc);
    let at = |g: f64| ground(&ModelParams { g, ..base }).1;
    let lam = 0.3;
    let f = |dl: f64| fidelity(&at(lam - dl / 2.0), &at(lam + dl / 2.0), dl, 6).unwrap();
    let (coarse, fine) = (f(1e-3), f(5e-4));
    assert!(coarse >= 0.0 && fine >= 0.0);
    assert!((coarse - fine).abs() < 0.05 * fine, "{coarse} vs {fine}");
    let v = at(lam);
    assert!(fidelity(&v, &v, 1e-3, 6).unwrap() < 1e-9);
    assert!(fidelity(&v, &v[1..], 1e-3, 6).is_err());
    assert!(fidelity(&v, &v, 0.0, 6).is_err());
}

#[test]
fn ordered_product_state_fluxes() {
    let p = params(12, 2.0, 10.0, Boundary::Pbc);
    let s = build_sector(12, 6).unwrap();
    // sites 1, 2, 5, 6, 9, 10 occupied
    let psi = product(&s, 0b0110_0110_0110);
    // the density form gives the pattern (2π/3, 0, -2π/3, 0) with an overall minus sign
    let want = [-2.0 * PI / 3.0, 0.0, 2.0 * PI / 3.0, 0.0];
    for j in 0..12 {
        let (mean, var) = plaquette_flux(&s, &psi, &p, j).unwrap();
        assert!((mean - want[j % 4]).abs() < 1e-14, "plaquette {j}: {mean}");
        assert!(var.abs() < 1e-14);
    }
}

#[test]
fn uniform_superposition_has_no_flux() {
    let p = params(12, 1.0, 1.0, Boundary::Pbc);
    let s = build_sector(12, 6).unwrap();
    let amp = C64::new(1.0 / (s.dim() as f64).sqrt(), 0.0);
    let psi = vec![amp; s.dim()];
    for j in 0..12 {
        assert!(plaquette_flux(&s, &psi, &p, j).unwrap().0.abs() < 1e-13);
    }
    let q = params(12, 1.0, 1.0, Boundary::Obc);
    assert!(chi_order(&s, &psi, &q).unwrap() < 1e-13);
}

#[test]
fn chi_of_the_ordered_open_chain() {
    let p = params(16, 2.0, 10.0, Boundary::Obc);
    let s = build_sector(16, 8).unwrap();
    let config = 0b0110_0110_0110_0110u32;
    let psi = product(&s, config);
    // plaquettes 2..10 are interior; each even pair (j, j+1) adds 2π/3
    // with its staggering sign, four pairs in all
    assert!((chi_order(&s, &psi, &p).unwrap() - 4.0 * (2.0 * PI / 3.0) / 16.0).abs() < 1e-14);
    for j in 1..=11 {
        let direct = -PI / 3.0
            * [j + 2, j + 1].iter().map(|&k| (config >> k & 1) as f64).sum::<f64>()
            + PI / 3.0 * [j - 1, j + 4].iter().map(|&k| (config >> k & 1) as f64).sum::<f64>();
        assert_eq!(plaquette_flux_operator(config, j, &p), Some(direct));
    }
    assert!(plaquette_flux(&s, &psi, &p, 0).is_err());
    assert!(plaquette_flux(&s, &psi, &p, 12).is_err());
}

#[test]
fn ordered_mixture_g2_has_period_four() {
    let s = build_sector(12, 6).unwrap();
    let base = 0b0011_0011_0011u32;
    let shifted: Vec<Vec<C64>> = (0..4).map(|k| product(&s, (base << k | base >> (12 - k)) & 0xfff)).collect();
    let refs: Vec<&[C64]> = shifted.iter().map(|v| v.as_slice()).collect();
    let mix = g2_mixture(&s, &refs, Boundary::Pbc).unwrap().values;
    let want = [0.25, 0.0, -0.25, 0.0];
    for j in 0..12 {
        assert!((mix[j] - want[j % 4]).abs() < 1e-15, "j={j}: {}", mix[j]);
    }
    // a single product state has no connected part
    assert!(g2(&s, &shifted[0], Boundary::Pbc).unwrap().values.iter().all(|x| x.abs() < 1e-15));
}

#[test]
fn first_order_correlations_across_the_phases() {
    let sites = 16;
    let bulk = 4..sites - 5;
    let weak = params(sites, 0.1, 1.0, Boundary::Obc);
    let (s, psi, _) = ground(&weak);
    for j in bulk.clone() {
        let inter = corr1(&s, &psi, j, j + 1).unwrap();
        let intra = corr1(&s, &psi, j, j + 2).unwrap();
        assert!(inter.re > 0.0 && intra.re > 0.0, "j={j}: {inter} {intra}");
        assert!(inter.im.abs() < 0.1 * inter.re && intra.im.abs() < 0.1 * intra.re, "j={j}: {inter} {intra}");
    }
    let strong = params(sites, 3.0, 1.0, Boundary::Obc);
    let (s, psi, _) = ground(&strong);
    for j in bulk {
        let inter = corr1(&s, &psi, j, j + 1).unwrap();
        assert!(inter.re < 0.0, "j={j}: {inter}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn commutator_sum_vanishes_off_eigenstates(seed in any::<u64>(), g in 0.0f64..3.0, eta in 0.0f64..5.0, pbc in any::<bool>()) {
        let b = if pbc { Boundary::Pbc } else { Boundary::Obc };
        let p = params(12, g, eta, b);
        let s = build_sector(12, 6).unwrap();
        let op = build_boson(&p, &s).unwrap();
        let x = normalized_random(s.dim(), seed);
        let comm = commutator_density(&op, &s, &x).unwrap();
        prop_assert!(comm.iter().sum::<f64>().abs() < 1e-12);
        let table = TermTable::new(&p).unwrap();
        let div = divergence_from_bonds(&bond_currents(&table, &s, &x).unwrap(), 12);
        for (a, c) in div.iter().zip(&comm) {
            prop_assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn density_and_flux_bounds(seed in any::<u64>(), n in 1usize..12) {
        let p = params(12, 1.0, 1.0, Boundary::Pbc).with_particles(n);
        let s = build_sector(12, n).unwrap();
        let x = normalized_random(s.dim(), seed);
        let d = density(&s, &x).unwrap();
        prop_assert!((d.iter().sum::<f64>() - n as f64).abs() < 1e-10);
        prop_assert!(d.iter().all(|&v| (-1e-15..=1.0 + 1e-15).contains(&v)));
        for (_, mean, var) in all_fluxes(&s, &x, &p).unwrap() {
            prop_assert!(mean.abs() <= 2.0 * PI / 3.0 * 2.0 + 1e-12);
            prop_assert!(var >= -1e-12);
        }
    }
}
