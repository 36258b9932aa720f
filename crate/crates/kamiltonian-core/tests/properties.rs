//! Randomised algebraic properties of the phase-space algebra and the solvers.

use kamiltonian_core::freq::FrequencyVector;
use kamiltonian_core::poly::{husimi_bracket, integrate_wrt_conjugate, poisson_bracket, set_hbar};
use kamiltonian_core::qhb::{canonicity_check, qhb_solve};
use kamiltonian_core::rational::{q, GQ};
use kamiltonian_core::starpower::{iterated_star_power, star_power};
use kamiltonian_core::system::FramedSystem;
use kamiltonian_core::{engine, Coefficient, MonoKey, Sym, SymPoly, SymbolicCtx};
use proptest::prelude::*;

type Term = (u8, u8, u8, u8, u8, i8, i8, i8);

/// Random term: powers for two modes, ħ power, drive phase, complex integer weight.
fn term() -> impl Strategy<Value = Term> {
    (0u8..3, 0u8..3, 0u8..2, 0u8..2, 0u8..2, -2i8..3, -3i8..4, -3i8..4)
}

fn build(terms: &[Term], modes: usize) -> SymPoly {
    let mut p = SymPoly::zero(modes);
    for &(m0, n0, m1, n1, h, ph, re, im) in terms {
        let mut key = MonoKey::one();
        key.pw[0] = (m0, n0);
        if modes > 1 {
            key.pw[1] = (m1, n1);
        }
        key.hbar = h;
        key.phase = FrequencyVector::of(Sym::Wd(0), q(ph as i128, 1));
        let c = Coefficient::constant(GQ::new(q(re as i128, 1), q(im as i128, 1)));
        p.add_term(key, &c);
    }
    p
}

fn poly(modes: usize) -> impl Strategy<Value = SymPoly> {
    prop::collection::vec(term(), 1..5).prop_map(move |t| build(&t, modes))
}

fn classical_poly(modes: usize) -> impl Strategy<Value = SymPoly> {
    poly(modes).prop_map(|p| p.classical_limit())
}

fn small_gq() -> impl Strategy<Value = Coefficient> {
    (-3i128..4, -3i128..4).prop_map(|(a, b)| Coefficient::constant(GQ::new(q(a, 1), q(b, 1))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn star_product_is_associative(f in poly(2), g in poly(2), h in poly(2)) {
        let l = f.star(&g, false).star(&h, false);
        let r = f.star(&g.star(&h, false), false);
        prop_assert_eq!(l, r);
    }

    #[test]
    fn star_product_is_bilinear(f in poly(2), g in poly(2), h in poly(2)) {
        prop_assert_eq!(f.star(&g.add(&h), false), f.star(&g, false).add(&f.star(&h, false)));
    }

    #[test]
    fn closed_form_star_power(alpha in small_gq(), beta in small_gq(), m in 0u32..7) {
        let lin = SymPoly::var(1, 0).scale(&alpha).add(&SymPoly::var_conj(1, 0).scale(&beta));
        let closed = star_power(&alpha, &beta, m as i64).unwrap();
        prop_assert_eq!(&closed, &iterated_star_power(&lin, m, false));
        // ∂_{A*} L^m = m β L^{m−1}
        if m > 0 {
            let lower = star_power(&alpha, &beta, m as i64 - 1).unwrap();
            let rhs = lower.scale(&beta).scale_gq(&GQ::int(m as i128));
            prop_assert_eq!(closed.d_astar(0), rhs);
        }
    }

    #[test]
    fn bracket_reduces_to_poisson(f in classical_poly(2), g in classical_poly(2)) {
        let hb = husimi_bracket(&f, &g).unwrap();
        prop_assert_eq!(hb.classical_limit(), poisson_bracket(&f, &g));
    }

    #[test]
    fn bracket_is_antisymmetric(f in poly(1), g in poly(1)) {
        prop_assert_eq!(f.bracket(&g, false), g.bracket(&f, false).neg());
    }

    #[test]
    fn conjugate_integration_is_real(k in poly(1)) {
        // Static, real K from any polynomial; Γ = ∂_{A*}K must integrate back.
        let stat = k.filter(|key| key.phase.is_zero());
        let real = stat.add(&stat.conj());
        let gamma = real.d_astar(0);
        let back = integrate_wrt_conjugate(&[gamma.clone()]).unwrap();
        prop_assert!(back.sub(&back.conj()).near_zero());
        prop_assert_eq!(back.d_astar(0), gamma);
    }

    #[test]
    fn classical_limit_is_idempotent(f in poly(2)) {
        let c = f.classical_limit();
        prop_assert_eq!(c.classical_limit(), c);
    }
}

/// Dense complex matrices for the Fock-space rendering check.
type Mat = Vec<Vec<(f64, f64)>>;

fn render(p: &SymPoly, n: usize) -> Mat {
    let mut m = vec![vec![(0.0, 0.0); n]; n];
    let hp = set_hbar(p, &GQ::one());
    for (key, c) in hp.iter() {
        let v = c.as_constant().unwrap().to_c64();
        let (ms, ns) = key.pw[0];
        for i in 0..n as u32 {
            if let Some((j, w)) = kamiltonian_core::effective::fock_element(ms as u32, ns as u32, i) {
                if (j as usize) < n {
                    let e = &mut m[j as usize][i as usize];
                    e.0 += v.re * w;
                    e.1 += v.im * w;
                }
            }
        }
    }
    m
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut c = vec![vec![(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            let (ar, ai) = a[i][k];
            if ar == 0.0 && ai == 0.0 {
                continue;
            }
            for j in 0..n {
                let (br, bi) = b[k][j];
                c[i][j].0 += ar * br - ai * bi;
                c[i][j].1 += ar * bi + ai * br;
            }
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn star_commutator_matches_operator_commutator(f in poly(1), g in poly(1)) {
        // Phases are irrelevant for operator content; keep only static terms.
        let f = f.filter(|k| k.phase.is_zero() && k.degree() <= 4);
        let g = g.filter(|k| k.phase.is_zero() && k.degree() <= 4);
        const N: usize = 12;
        let lhs = render(&f.star(&g, false).sub(&g.star(&f, false)), N);
        let (fm, gm) = (render(&f, N), render(&g, N));
        let (fg, gf) = (matmul(&fm, &gm), matmul(&gm, &fm));
        // Truncation only corrupts states within the degree reach of the cutoff.
        for i in 0..N - 4 {
            for j in 0..N - 4 {
                let d = (lhs[i][j].0 - (fg[i][j].0 - gf[i][j].0), lhs[i][j].1 - (fg[i][j].1 - gf[i][j].1));
                prop_assert!(d.0.abs() < 1e-8 && d.1.abs() < 1e-8, "({i},{j}) off by {d:?}");
            }
        }
    }
}

#[test]
fn effective_hamiltonians_are_real() {
    for (sys, order) in [
        (FramedSystem::single(2, 1, &[3, 4, 5], true), 3),
        (FramedSystem::single(3, 2, &[3, 4], true), 3),
        (FramedSystem::generic(&[3, 4], true), 3),
    ] {
        let sol = engine::solve(&sys, &SymbolicCtx::quantum(), order).unwrap();
        let k = sol.k_total();
        assert!(k.sub(&k.conj()).near_zero());
        // Classical part is ħ-free; the rest is divisible by ħ.
        assert!(k.classical_limit().iter().all(|(key, _)| key.hbar == 0));
        assert!(k.sub(&k.classical_limit()).iter().all(|(key, _)| key.hbar >= 1));
    }
}

#[test]
fn symplectic_canonicity_at_second_order() {
    let sys = FramedSystem::single(2, 1, &[3, 4], true);
    let frames: Vec<FrequencyVector> = sys.modes.iter().map(|m| m.frame).collect();
    let st = qhb_solve::<Coefficient, _>(&sys, &SymbolicCtx::quantum(), 2).unwrap();
    let eta: Vec<Vec<SymPoly>> = (0..1).map(|k| (0..=2).map(|n| st.eta(k, n)).collect()).collect();
    assert!(canonicity_check(&eta, &frames, 2, false).is_empty());
    // Negative control: without the static part of η the map is not canonical.
    let mut broken = eta.clone();
    broken[0][2] = st.eta_rot[0][2].clone();
    assert!(!st.eta_sta[0][2].is_zero());
    assert!(!canonicity_check(&broken, &frames, 2, false).is_empty());
}

#[test]
fn first_order_canonicity_is_trivial() {
    let sys = FramedSystem::single(3, 2, &[3], true);
    let frames: Vec<FrequencyVector> = sys.modes.iter().map(|m| m.frame).collect();
    let st = qhb_solve::<Coefficient, _>(&sys, &SymbolicCtx::quantum(), 1).unwrap();
    let eta: Vec<Vec<SymPoly>> = vec![(0..=1).map(|n| st.eta(0, n)).collect()];
    assert!(canonicity_check(&eta, &frames, 1, false).is_empty());
    assert!(st.eta_sta[0][1].is_zero());
}

#[test]
fn two_mode_symplectic_canonicity() {
    let sys = FramedSystem {
        modes: vec![
            kamiltonian_core::system::ModeFrame { frame: FrequencyVector::unit(Sym::Wf(0)), detuned: false },
            kamiltonian_core::system::ModeFrame { frame: FrequencyVector::unit(Sym::Wf(1)), detuned: false },
        ],
        tones: 1,
        ranks: vec![4],
        participation: true,
        slow: vec![],
    };
    let frames: Vec<FrequencyVector> = sys.modes.iter().map(|m| m.frame).collect();
    let st = qhb_solve::<Coefficient, _>(&sys, &SymbolicCtx::quantum(), 2).unwrap();
    let eta: Vec<Vec<SymPoly>> = (0..2).map(|k| (0..=2).map(|n| st.eta(k, n)).collect()).collect();
    assert!(canonicity_check(&eta, &frames, 2, false).is_empty());
}
