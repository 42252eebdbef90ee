mod common;

use proptest::prelude::*;
use common::fock_expectation;
use zigzag_core::gutzwiller::{self, GutzwillerConfig, Variant};
use zigzag_core::{Boundary, ModelParams};

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Symmetric), Just(Variant::Literal)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn factorized_energy_equals_fock_contraction(
        eps in -0.9f64..0.9, theta in -3.2f64..3.2, phi in -3.2f64..3.2,
        g in 0.0f64..1.6, eta in 0.0f64..2.0, v in variant(),
    ) {
        let p = ModelParams::new(8, g, eta, Boundary::Pbc);
        let c = GutzwillerConfig { epsilon: eps, theta, phi, sites: 8, variant: v };
        let s = gutzwiller::build_state(&c).unwrap();
        let fact = gutzwiller::energy(&c, &p).unwrap();
        let exact = fock_expectation(&s, &p);
        prop_assert!((fact - exact).abs() < 1e-10 * (1.0 + exact.abs()), "{fact} vs {exact}");
    }
}

#[test]
fn frozen_energies_on_sixteen_sites() {
    let p = ModelParams::new(16, 0.8, 0.6, Boundary::Pbc);
    let expected = [(Variant::Symmetric, -21.16694498924915), (Variant::Literal, -21.46522763188618)];
    for (v, e) in expected {
        let c = GutzwillerConfig { epsilon: 0.23, theta: 0.7, phi: -1.1, sites: 16, variant: v };
        assert!((gutzwiller::energy(&c, &p).unwrap() - e).abs() < 1e-11);
    }
}

#[test]
fn open_chains_are_rejected() {
    let p = ModelParams::new(16, 1.0, 0.0, Boundary::Obc);
    let c = GutzwillerConfig { epsilon: 0.1, theta: 0.0, phi: 0.0, sites: 16, variant: Variant::Symmetric };
    assert!(gutzwiller::energy(&c, &p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    // fluxes follow densities, which depend on ε alone
    #[test]
    fn chi_vanishes_iff_epsilon_vanishes(eps in -0.9f64..0.9, theta in -3.2f64..3.2, phi in -3.2f64..3.2) {
        let c = GutzwillerConfig { epsilon: eps, theta, phi, sites: 16, variant: Variant::Symmetric };
        let chi = gutzwiller::chi_of_state(&gutzwiller::build_state(&c).unwrap()).unwrap();
        if eps.abs() < 1e-12 {
            prop_assert!(chi.abs() < 1e-12);
        } else if eps.abs() > 1e-3 {
            prop_assert!(chi.abs() > 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    // H conserves particle number, so a common phase on every b drops out
    #[test]
    fn common_phase_on_occupied_amplitudes_drops_out(
        eps in -0.9f64..0.9, theta in -3.2f64..3.2, phi in -3.2f64..3.2, gamma in -3.2f64..3.2,
        g in 0.0f64..2.0, eta in 0.0f64..3.0,
    ) {
        let p = ModelParams::new(16, g, eta, Boundary::Pbc);
        let c = GutzwillerConfig { epsilon: eps, theta, phi, sites: 16, variant: Variant::Symmetric };
        let states = gutzwiller::build_state(&c).unwrap();
        let turned: Vec<_> = states
            .iter()
            .map(|s| gutzwiller::SiteState { a: s.a, b: s.b * num_complex::Complex64::from_polar(1.0, gamma) })
            .collect();
        let e0 = gutzwiller::energy_of_state(&states, &p).unwrap();
        let e1 = gutzwiller::energy_of_state(&turned, &p).unwrap();
        prop_assert!((e0 - e1).abs() < 1e-11 * (1.0 + e0.abs()));
    }
}
