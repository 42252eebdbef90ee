use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use zigzag_core::meanfield::{
    bands, fermi_level, folded_crossing, folded_energies, k_grid, realspace_chain, realspace_matrix, BlochModel,
};
use zigzag_core::Boundary;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn decoupled_chain_bands() {
    let m = BlochModel::new(1.0);
    for k in k_grid(97) {
        let (lo, hi) = m.energies(k);
        let chains = sorted(vec![2.0 * (k + PI / 6.0).sin(), -2.0 * (k - PI / 6.0).sin()]);
        assert!((lo - chains[0]).abs() < 1e-12 && (hi - chains[1]).abs() < 1e-12, "k={k}");
    }
}

#[test]
fn real_space_ring_matches_bloch_bands() {
    for g in [0.2, 0.8, 1.4] {
        let ring = sorted(SymmetricEigen::new(realspace_matrix(g, 1.0, 256).unwrap()).eigenvalues.iter().copied().collect());
        let ks: Vec<f64> = (0..128).map(|i| -PI + 2.0 * PI * i as f64 / 128.0).collect();
        let (lo, hi) = bands(&BlochModel::new(g), &ks).unwrap();
        let bloch = sorted(lo.into_iter().chain(hi).collect());
        let err = ring.iter().zip(&bloch).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "g={g}: {err}");
    }
    assert!(realspace_chain(0.5, 1.0, 9, Boundary::Pbc).is_err());
    assert!(bands(&BlochModel::new(0.5), &[4.0]).is_err());
}

#[test]
fn fermi_level_limits() {
    let m = BlochModel::new(0.6);
    let min = k_grid(4096).iter().map(|&k| m.energies(k).0).fold(f64::INFINITY, f64::min);
    let ef = fermi_level(&m, 1e-4, 4096).unwrap();
    assert!((ef - min).abs() < 1e-3, "{ef} vs {min}");
    assert!(fermi_level(&m, 0.0, 64).is_err());
}

#[test]
fn low_momentum_states_empty_at_stronger_coupling() {
    let m = BlochModel::new(0.8);
    let ef = fermi_level(&m, 0.5, 2048).unwrap();
    let emptied = k_grid(2048).into_iter().filter(|k| k.abs() < PI / 2.0 && m.energies(*k).0 > ef).count();
    assert!(emptied > 0);
    // at weak coupling the whole lower band stays filled
    let w = BlochModel::new(0.2);
    let ef = fermi_level(&w, 0.5, 2048).unwrap();
    assert!(k_grid(2048).iter().all(|&k| w.energies(k).0 <= ef + 1e-12));
}

#[test]
fn bands_touch_at_the_zone_edge() {
    for i in 0..=40 {
        let g = 2.0 * i as f64 / 40.0;
        let m = BlochModel::new(g);
        let gap = k_grid(4096).into_iter().map(|k| {
            let (a, b) = m.energies(k);
            b - a
        });
        assert!(gap.fold(f64::INFINITY, f64::min) < 1e-9, "g={g}");
    }
}

#[test]
fn crossing_at_the_closed_form_coupling() {
    let c = folded_crossing(0.3, 0.45, 1.0);
    let g = c.g_star.expect("crossing inside the bracket");
    assert!((g - 0.366).abs() < 0.01);
    assert!((g - (3f64.sqrt() - 1.0) / 2.0).abs() < 1e-4, "{g}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bloch_matrix_properties(k in -PI..PI, g in 0.0f64..2.0) {
        let m = BlochModel::new(g);
        let h = m.matrix(k);
        prop_assert!((h - h.adjoint()).norm() < 1e-14);
        // the diagonal pair sums to 2gJ cos k
        prop_assert!((h.trace().re - 2.0 * g * k.cos()).abs() < 1e-12);
        let num = sorted(SymmetricEigen::new(h).eigenvalues.iter().copied().collect());
        let (lo, hi) = m.energies(k);
        prop_assert!((num[0] - lo).abs() < 1e-10 && (num[1] - hi).abs() < 1e-10);
    }

    #[test]
    fn folding_is_a_reindexing(q in -PI / 2.0..PI / 2.0, g in 0.0f64..2.0) {
        let m = BlochModel::new(g);
        let (a, b) = m.energies(q);
        let (c, d) = m.energies(q + PI);
        prop_assert_eq!(folded_energies(&m, q).to_vec(), sorted(vec![a, b, c, d]));
    }
}
