//! Circuit-to-oscillator mappings checked against exact spectra and fixtures.

use kamiltonian::floquet::TruncatedHamiltonian;
use kamiltonian_core::system::*;

#[test]
fn measured_two_mode_device() {
    // Junction shared by a transmon-like mode at 6.843 GHz and a cavity at 5.261 GHz.
    let (e_j, w_a, w_c, lambda_c) = (32.33, 6.843, 5.261, 0.0073);
    let p_c = lambda_c * lambda_c * w_a / w_c;
    let m = two_mode_normal(e_j, w_a, w_c, 1.0 - p_c, p_c, 6).unwrap();
    assert!((m.lambda_c - lambda_c).abs() < 1e-12);
    assert!((m.lambda_a.abs() - 0.99996).abs() < 5e-5, "λ_a = {}", m.lambda_a);
    assert!((m.phi_zps - 0.33).abs() < 0.005, "φ_zps = {}", m.phi_zps);
    // g₄ = −ω_a φ²/12 (cosine expansion), odd ranks absent.
    let g4 = m.g.iter().find(|g| g.0 == 4).unwrap().1;
    assert!((g4 + w_a * m.phi_zps.powi(2) / 12.0).abs() < 1e-12);
    assert!(m.g.iter().filter(|g| g.0 % 2 == 1).all(|g| g.1 == 0.0));
    assert!(two_mode_normal(e_j, w_a, w_c, 0.5, 0.4, 6).is_err());
}

#[test]
fn uncoupled_modes_do_not_participate() {
    let (wa, wc, lc) = coupled_normal_modes(6.0, 5.0, 0.0);
    assert_eq!((wa, wc, lc), (6.0, 5.0, 0.0));
    let (wa, wc, lc) = coupled_normal_modes(6.0, 5.0, 0.02);
    assert!(wa > 6.0 && wc < 5.0 && lc > 0.0 && lc < 0.1);
}

#[test]
fn transmon_parameters_reproduce_the_exact_spectrum() {
    let (e_j, e_c) = (30.0, 0.15);
    let p = transmon_params(e_j, e_c, 6).unwrap();
    assert!((p.omega - 6.0).abs() < 1e-12);
    let (e, _) = TruncatedHamiltonian::transmon(e_j, e_c, 0.0, 40).static_eigen();
    // With g₄(a + a†)⁴/4 the first-order anharmonicity is 3g₄ = −E_C; the
    // exact value differs at relative order φ².
    assert!((p.g(4) + e_c / 3.0).abs() < 1e-12);
    let alpha = e[2] - 2.0 * e[1] + e[0];
    assert!((alpha - 3.0 * p.g(4)).abs() < 0.1 * e_c, "α = {alpha}");
}

#[test]
fn shunted_transmon_inversion_round_trips() {
    let (omega, g4) = (5.921788, -0.024564);
    for r in [0.5, 1.79, 3.0, 4.5] {
        let (e_j, e_c, e_l) = ist_from_omega_g4(omega, g4, r).unwrap();
        let p = ist_params(e_j, e_c, e_l, 4).unwrap();
        assert!((p.omega - omega).abs() < 1e-9);
        assert!((p.g(4) - g4).abs() < 1e-12);
        assert!((p.r - r).abs() < 1e-12);
    }
    assert!(ist_from_omega_g4(omega, 0.01, 1.0).is_err());
}

#[test]
fn duffing_mapping() {
    let (g3, g4, xi) = duffing_oscillator(0.2, -0.03, 1.56, 0.0);
    assert_eq!((g3, g4), (0.1, -0.015));
    assert!((xi.re - 1.0 / (1.0 - 1.56f64 * 1.56)).abs() < 1e-15);
    let (c3, c4) = duffing_rescale(2.0, 0.1, 0.3).unwrap();
    assert_eq!(duffing_unscale(2.0, c3, c4).unwrap(), (0.1, 0.3));
    assert!(drive_displacement(6.0, 6.0, 1.0, Coupling::Momentum).is_err());
}
