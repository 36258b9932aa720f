//! Golden coefficients of the canonical effective Hamiltonian.

use kamiltonian_core::coeff::cmono;
use kamiltonian_core::effective::*;
use kamiltonian_core::engine;
use kamiltonian_core::freq::FrequencyVector;
use kamiltonian_core::rational::q;
use kamiltonian_core::system::FramedSystem;
use kamiltonian_core::{Coefficient, MonoKey, PhasePolynomial, Sym, SymbolicCtx};

const G3: Sym = Sym::G(3);
const G4: Sym = Sym::G(4);
const G5: Sym = Sym::G(5);
const WD: Sym = Sym::Wd(0);
const WF: Sym = Sym::Wf(0);
const D: Sym = Sym::Delta(0);
const R: Sym = Sym::Param(b'r');

fn c(n: i128, d: i128, p: &[(Sym, i32)]) -> Coefficient {
    cmono(n, d, p)
}

fn sum(cs: &[Coefficient]) -> Coefficient {
    cs.iter().fold(Coefficient::zero(), |a, b| a.add(b))
}

fn inv(f: FrequencyVector) -> Coefficient {
    Coefficient::one().div_freq(&f).unwrap()
}

fn model(sys: &FramedSystem, order: usize, classical: bool) -> EffectiveHamiltonian<Coefficient> {
    let sol = engine::solve(sys, &SymbolicCtx { classical }, order).unwrap();
    EffectiveHamiltonian::assemble(&sol.k_total(), sys).unwrap()
}

#[test]
fn kerr_cat_through_second_order() {
    let sys = FramedSystem::single(2, 1, &[3, 4], true);
    let h1 = model(&sys, 1, false);
    assert_eq!(h1.renorm_at(1, 0), c(1, 1, &[(D, 1)]));
    assert_eq!(omega_from(&h1.coupling_at(2, 0, 0), 1, 0), c(1, 1, &[(G3, 1)]));

    let h = model(&sys, 2, false);
    let delta = h.renorm_at(1, 0);
    assert_eq!(split_drive(&delta, 0)[&(0, 0)], c(1, 1, &[(D, 1)]));
    assert_eq!(stark_part(&delta, 1, 0), c(6, 1, &[(G4, 1)]).add(&c(-18, 1, &[(G3, 2), (WD, -1)])));
    let kerr = c(3, 2, &[(G4, 1)]).add(&c(-20, 3, &[(G3, 2), (WD, -1)]));
    assert_eq!(h.renorm_at(2, 0), kerr);
    // Lamb shift: twice the Kerr coefficient.
    assert_eq!(h.renorm_at(1, 1), kerr.scale(&q(2, 1).into()));
    assert!(h.residual.is_zero());
}

#[test]
fn three_legged_cat_third_order() {
    let sys = FramedSystem::single(3, 2, &[3, 4, 5], true);
    let h = model(&sys, 3, false);
    let omega = omega_from(&h.coupling_at(3, 0, 0), 2, 0);
    assert_eq!(
        omega,
        sum(&[c(2, 1, &[(G5, 1)]), c(-165, 8, &[(G3, 1), (G4, 1), (WD, -1)]), c(195, 4, &[(G3, 3), (WD, -2)])])
    );
    let stark = stark_part(&h.renorm_at(1, 0), 1, 0);
    assert_eq!(
        stark,
        sum(&[
            c(6, 1, &[(G4, 1)]),
            c(-180, 7, &[(G3, 2), (WD, -1)]),
            c(4482, 49, &[(D, 1), (G3, 2), (WD, -2)]),
        ])
    );
    let lamb = h.renorm_at(1, 1);
    assert_eq!(
        lamb,
        sum(&[c(3, 1, &[(G4, 1)]), c(-10, 1, &[(G3, 2), (WD, -1)]), c(15, 1, &[(D, 1), (G3, 2), (WD, -2)])])
    );
    let kerr = h.renorm_at(2, 0);
    assert_eq!(
        kerr,
        sum(&[c(3, 2, &[(G4, 1)]), c(-5, 1, &[(G3, 2), (WD, -1)]), c(15, 2, &[(D, 1), (G3, 2), (WD, -2)])])
    );
}

#[test]
fn delta_dependence_follows_frame_independence() {
    // ξ-free renormalisations of the undriven oscillator cannot depend on
    // the frame: −(10/3) g3²/(ω′ + δ) expanded around ω′ = 2ω_d/3.
    let sys = FramedSystem::single(3, 2, &[3], true);
    let h = model(&sys, 3, false);
    let kerr = h.renorm_at(2, 0);
    let expect = c(-10, 3, &[(G3, 2)]).mul(&inv(FrequencyVector::of(WD, q(2, 3))));
    let expect = expect.add(&c(10, 3, &[(G3, 2), (D, 1)]).mul(&inv(FrequencyVector::of(WD, q(2, 3)))).mul(&inv(
        FrequencyVector::of(WD, q(2, 3)),
    )));
    assert!(kerr.sem_eq(&expect));
}

#[test]
fn kerr_free_point() {
    let sys = FramedSystem::single(3, 2, &[3, 4, 5], true);
    let h = model(&sys, 3, false);
    let kerr = split_drive(&h.renorm_at(2, 0), 0).remove(&(0, 0)).unwrap();
    let at_resonance = kerr.collect(D).remove(&0).unwrap();
    // g4 = (10/3) g3²/ω_d  ⇔  g3/ω_d = √(3 g4 / 10 ω_d)
    let tuned = at_resonance.substitute(G4, &c(10, 3, &[(G3, 2), (WD, -1)])).unwrap();
    assert!(tuned.is_zero_semantic());
    assert!(!at_resonance.is_zero_semantic());
}

#[test]
fn transmon_five_three_coupling() {
    let sys = FramedSystem::single(5, 3, &[4, 6, 8], false);
    let omega: Coefficient = engine::leading_coupling(&sys, &SymbolicCtx::quantum(), 5, 3).unwrap();
    assert_eq!(
        omega,
        sum(&[
            c(7, 1, &[(Sym::G(8), 1)]),
            c(-1745, 18, &[(G4, 1), (Sym::G(6), 1), (WD, -1)]),
            c(21275, 72, &[(G4, 3), (WD, -2)]),
        ])
    );
}

/// IST ladder of nonlinearities at fixed `ω_o` and `g_4`:
/// `g_6 = 3(1+r) g_4²/(5ω_o)`, `g_8 = 6(1+r)² g_4³/(35ω_o²)`, with `ω_o = (p/q) ω_d`.
fn ist_substitute(c0: &Coefficient, ratio: (i128, i128)) -> Coefficient {
    let one_r = c(1, 1, &[]).add(&c(1, 1, &[(R, 1)]));
    let wo = inv(FrequencyVector::of(WD, q(ratio.1, ratio.0)));
    let g6 = one_r.mul(&c(3, 5, &[(G4, 2)])).mul(&wo);
    let g8 = one_r.mul(&one_r).mul(&c(6, 35, &[(G4, 3)])).mul(&wo).mul(&wo);
    c0.substitute(Sym::G(6), &g6).unwrap().substitute(Sym::G(8), &g8).unwrap()
}

fn roots(a: f64, b: f64, cc: f64) -> (f64, f64) {
    let s = (b * b - 4.0 * a * cc).sqrt();
    ((-b - s) / (2.0 * a), (-b + s) / (2.0 * a))
}

#[test]
fn ist_couplings_as_functions_of_shunt_ratio() {
    let ctx = SymbolicCtx::quantum();
    let o53: Coefficient =
        engine::leading_coupling(&FramedSystem::single(5, 3, &[4, 6, 8], false), &ctx, 5, 3).unwrap();
    let o53 = ist_substitute(&o53, (5, 3));
    let poly53 = sum(&[c(240, 72, &[(R, 2)]), c(-6500, 72, &[(R, 1)]), c(14535, 72, &[])]).mul(&c(1, 1, &[(G4, 3), (WD, -2)]));
    assert!(o53.sem_eq(&poly53));
    let (r1, r2) = roots(240.0, -6500.0, 14535.0);
    assert!((r1 - 2.46).abs() < 5e-3, "{r1}");
    assert!((r2 - 24.62).abs() < 5e-3, "{r2}");

    let o42: Coefficient = engine::leading_coupling(&FramedSystem::single(4, 2, &[4, 6], false), &ctx, 4, 2).unwrap();
    let o42 = ist_substitute(&o42, (4, 2));
    let poly42 = c(6, 2, &[(R, 1), (G4, 2), (WD, -1)]).add(&c(-27, 2, &[(G4, 2), (WD, -1)]));
    assert!(o42.sem_eq(&poly42));
}

#[test]
fn snail_stark_coefficient_and_sweet_spot() {
    let sys = FramedSystem::generic(&[3, 4], false);
    let h = model(&sys, 2, true);
    let stark = stark_part(&h.renorm_at(1, 0), 1, 0);
    let wd = FrequencyVector::unit(WD);
    let wf = FrequencyVector::unit(WF);
    let expect = sum(&[
        c(6, 1, &[(G4, 1)]),
        c(-4, 1, &[(G3, 2)]).mul(&inv(wf.scale(q(2, 1)) - wd)),
        c(-4, 1, &[(G3, 2)]).mul(&inv(wf.scale(q(2, 1)) + wd)),
        c(-8, 1, &[(G3, 2), (WF, -1)]),
    ]);
    assert!(stark.sem_eq(&expect));
    // Sweet spot: g3² = 6 g4 / (4/(2ω′−ω_d) + 4/(2ω′+ω_d) + 8/ω′).
    let (w, d) = (5.0f64, 7.3f64);
    let g4 = 0.01f64;
    let g3sq = 6.0 * g4 / (4.0 / (2.0 * w - d) + 4.0 / (2.0 * w + d) + 8.0 / w);
    let mut ctx = kamiltonian_core::NumericCtx::new();
    ctx.set(G4, g4).set(G3, g3sq.sqrt()).set(WD, d).set(WF, w);
    assert!(ctx.eval(&stark).unwrap().norm() < 1e-15);
    // Quantum K carries the same classical Stark part.
    let hq = model(&sys, 2, false);
    assert_eq!(stark_part(&hq.renorm_at(1, 0), 1, 0), stark);
}

#[test]
fn first_order_collapse_operators() {
    let sys = FramedSystem::generic(&[3], false);
    let groups = collapse_operators_order1(&sys, &SymbolicCtx::quantum()).unwrap();
    let wd = FrequencyVector::unit(WD);
    let wf = FrequencyVector::unit(WF);
    let freqs: Vec<FrequencyVector> = groups.iter().map(|g| g.freq).collect();
    assert_eq!(freqs.len(), 4);
    for f in [FrequencyVector::zero(), wf.scale(q(2, 1)), wd - wf, wd + wf] {
        assert!(freqs.contains(&f), "missing group {f}");
    }
    let get = |f: FrequencyVector| groups.iter().find(|g| g.freq == f).unwrap().op.clone();
    let xi = c(1, 1, &[(Sym::Xi(0), 1)]);
    let a = MonoKey::single(0, 1);
    let ac = MonoKey::single(1, 0);
    let mono = |k: MonoKey, v: Coefficient| PhasePolynomial::monomial(1, k, v);

    assert!(get(FrequencyVector::zero()).is_zero());
    assert_eq!(get(wf.scale(q(2, 1))), mono(MonoKey::single(0, 2), c(4, 3, &[(G3, 1), (WF, -1)])));
    let plus = xi.mul(&c(2, 1, &[(G3, 1)])).mul(&inv(wd).add(&inv(wd + wf.scale(q(2, 1)))));
    assert!(get(wd + wf).sub(&mono(a, plus)).iter().all(|(_, v)| v.is_zero_semantic()));
    let minus = xi.mul(&c(2, 1, &[(G3, 1)])).mul(&inv(wd - wf.scale(q(2, 1))).add(&inv(wd)));
    assert!(get(wd - wf).sub(&mono(ac, minus)).iter().all(|(_, v)| v.is_zero_semantic()));
}

#[test]
fn assembly_is_lossless_and_hermitian() {
    let sys = FramedSystem::single(3, 2, &[3, 4], true);
    let sol = engine::solve(&sys, &SymbolicCtx::quantum(), 2).unwrap();
    let k = sol.k_total();
    let h = EffectiveHamiltonian::assemble(&k, &sys).unwrap();
    assert_eq!(h.to_poly(), k);
    assert!(h.couplings.iter().all(|(key, _)| key.pw[0].0 > key.pw[0].1));
}

#[test]
fn slow_phases_are_couplings_and_the_rest_is_residual() {
    let sys = FramedSystem::single(2, 1, &[3], true).with_slow(&[q(1, 5)]);
    let wd = FrequencyVector::of(WD, q(1, 5));
    let mut k = PhasePolynomial::monomial(1, MonoKey::single(2, 0).with_phase(wd), c(1, 1, &[(G3, 1)]));
    k.add_assign(&k.conj());
    let h = EffectiveHamiltonian::assemble(&k, &sys).unwrap();
    assert_eq!(h.couplings.len(), 1);
    assert!(h.residual.is_zero());
    let plain = FramedSystem::single(2, 1, &[3], true);
    let h = EffectiveHamiltonian::assemble(&k, &plain).unwrap();
    assert_eq!(h.residual.len(), 2);
    assert!(h.couplings.is_zero());
}

#[test]
fn dressed_energies() {
    let sys = FramedSystem::single(2, 1, &[3, 4], true);
    let h = model(&sys, 2, false);
    assert!(dressed_energy(&h, 0).is_zero());
    assert_eq!(dressed_energy(&h, 1), h.renorm_total(1));
    let e3 = dressed_energy(&h, 3);
    let expect = h.renorm_total(1).scale(&q(3, 1).into()).add(&h.renorm_total(2).scale(&q(6, 1).into()));
    assert_eq!(e3, expect);
}
