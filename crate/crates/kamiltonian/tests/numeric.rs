//! Numeric effective Hamiltonians: reduced matrices, slow-phase removal,
//! Rabi strengths and resonance landscapes.

use kamiltonian::floquet::CMat;
use kamiltonian::numeric::*;
use kamiltonian_core::effective::dressed_energy;
use kamiltonian_core::system::{transmon_params, Coupling, FramedSystem};
use kamiltonian_core::{NumericCtx, Sym};
use num_complex::Complex64 as C;

fn kerr_cat_ctx(xi: C) -> NumericCtx {
    let mut ctx = NumericCtx::new();
    ctx.set(Sym::G(3), 0.02).set(Sym::G(4), -0.001).set(Sym::Wd(0), 10.0).set(Sym::Delta(0), 0.003);
    ctx.set_c(Sym::Xi(0), xi);
    ctx
}

#[test]
fn reduced_matrix_of_the_kerr_cat() {
    let sys = FramedSystem::single(2, 1, &[3, 4], true);
    let xi = C::new(0.0, 0.5);
    let ctx = kerr_cat_ctx(xi);
    let h = numeric_k(&sys, &ctx, 1).unwrap();
    let r = reduce_subspace(&h, &[0, 2, 4], &ctx).unwrap();
    assert!(!r.has_slow_phases());
    // ⟨2|g₃ξ a†²|0⟩ = √2 g₃ξ and ⟨4|g₃ξ a†²|2⟩ = √12 g₃ξ.
    let c = 0.02 * xi;
    assert!((r.matrix[(1, 0)] - c * 2f64.sqrt()).norm() < 1e-15);
    assert!((r.matrix[(0, 1)] - c.conj() * 2f64.sqrt()).norm() < 1e-15);
    assert!((r.matrix[(2, 1)] - c * 12f64.sqrt()).norm() < 1e-15);
    assert_eq!(r.matrix[(2, 0)], C::new(0.0, 0.0));
    assert_eq!(r.warnings.len(), 1, "{:?}", r.warnings);
    for (k, &n) in [0u32, 2, 4].iter().enumerate() {
        assert!((r.matrix[(k, k)] - dressed_energy(&h, n)).norm() < 1e-15);
        assert!((r.matrix[(k, k)].re - n as f64 * 0.003).abs() < 1e-15);
    }
    assert!(reduce_subspace(&h, &[0, 2, 2], &ctx).is_err());
}

fn two_level(e0: f64, e1: f64, c: C, rate: f64) -> ReducedMatrix {
    let mut m = CMat::zeros(2, 2);
    m[(0, 0)] = C::new(e0, 0.0);
    m[(1, 1)] = C::new(e1, 0.0);
    m[(0, 1)] = c;
    m[(1, 0)] = c.conj();
    let mut r = ReducedMatrix::from_matrix(vec![0, 1], m);
    r.rates = vec![vec![0.0, rate], vec![-rate, 0.0]];
    r.provenance = vec![vec![vec![], vec!["c".into()]], vec![vec!["c*".into()], vec![]]];
    r
}

#[test]
fn staticizing_a_slow_phase_shifts_the_diagonal() {
    // M₀₁ e^{i r t}: in the frame V = diag(1, e^{−i r t}) the coupling is
    // static and the upper level moves by −r.
    let r = two_level(0.0, 0.5, C::new(0.1, 0.0), 0.2);
    assert!(r.has_slow_phases());
    assert!(pair_gap(&r, 0, 1).is_err());
    let s = staticize_slow(&r).unwrap();
    assert!(!s.has_slow_phases());
    assert!((s.matrix[(1, 1)].re - 0.3).abs() < 1e-15);
    // Direct two-level result: splitting √(Δ² + 4|c|²) with Δ = 0.3.
    let direct = (0.3f64 * 0.3 + 4.0 * 0.01).sqrt();
    assert!((pair_gap(&s, 0, 1).unwrap() - direct).abs() < 1e-14);
    let e = s.eigenvalues();
    assert!((e[1] - e[0] - direct).abs() < 1e-14);
}

#[test]
fn incommensurate_slow_phases_are_rejected() {
    let mut m = CMat::zeros(3, 3);
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        m[(i, j)] = C::new(0.1, 0.0);
        m[(j, i)] = C::new(0.1, 0.0);
    }
    let mut r = ReducedMatrix::from_matrix(vec![0, 1, 2], m);
    let rates = [[0.0, 0.1, 0.5], [-0.1, 0.0, 0.1], [-0.5, -0.1, 0.0]];
    r.rates = rates.iter().map(|row| row.to_vec()).collect();
    r.provenance = (0..3).map(|i| (0..3).map(|j| if i == j { vec![] } else { vec!["x".into()] }).collect()).collect();
    assert!(staticize_slow(&r).is_err());
    r.rates[0][2] = 0.2;
    r.rates[2][0] = -0.2;
    assert!(staticize_slow(&r).is_ok());
}

#[test]
fn rabi_strength_of_an_avoided_crossing() {
    let g = 0.013;
    let family = |x: f64| Ok(two_level(x, -x, C::new(0.0, g), 0.0));
    let (x, rabi) = rabi_strength(family, 0, 1, -0.3, 0.5, 9).unwrap();
    assert!(x.abs() < 1e-6, "minimum at {x}");
    assert!((rabi - g).abs() < 1e-12);
    // A bracket without the minimum is reported instead of guessed.
    assert!(rabi_strength(|x: f64| Ok(two_level(x, -x, C::new(g, 0.0), 0.0)), 0, 1, 0.1, 0.5, 5).is_err());
}

#[test]
fn five_three_resonance_line_of_the_transmon() {
    let osc = transmon_params(30.0, 0.15, 8).unwrap();
    let cfg = LandscapeConfig {
        omega_d: (0..6).map(|i| 8.6 + 0.2 * i as f64).collect(),
        xi2: vec![0.1, 0.3, 0.5],
        processes: vec![(2, 1), (5, 3)],
        order: None,
        floor: 0.0,
        start: 0,
        coupling: Coupling::Momentum,
    };
    let lines = resonance_landscape(&osc, &cfg).unwrap();
    // The odd (2:1) process is forbidden in a symmetric potential.
    assert_eq!(lines.len(), 1);
    let line = &lines[0];
    assert_eq!((line.q, line.p), (5, 3));
    assert_eq!(line.points.len(), 3);
    for w in line.points.windows(2) {
        // Negative Stark shifts pull the resonance down; the coupling grows as |ξ|³.
        assert!(w[1].omega_d < w[0].omega_d);
        assert!(w[1].rabi > w[0].rabi);
    }
    let (a, b) = (&line.points[0], &line.points[2]);
    let slope = (b.rabi / a.rabi).ln() / (b.xi2 / a.xi2).ln();
    assert!((slope - 1.5).abs() < 0.3, "log-slope {slope}");
    // Each point satisfies the resonance condition of its own effective Hamiltonian.
    for p in &line.points {
        let h = process_k(&osc, 5, 3, 6, p.omega_d, p.xi2, Coupling::Momentum).unwrap();
        let (mismatch, rabi) = resonance_condition(&h, 5, 0);
        assert!(mismatch.abs() < 1e-9, "mismatch {mismatch}");
        assert!((rabi - p.rabi).abs() < 1e-12);
    }
}
