//! The diagram engine and the direct harmonic-balance solver must agree
//! term by term, order by order.

use kamiltonian_core::engine;
use kamiltonian_core::freq::FrequencyVector;
use kamiltonian_core::qhb::qhb_solve;
use kamiltonian_core::system::{FramedSystem, ModeFrame};
use kamiltonian_core::*;

fn assert_same(sys: &FramedSystem, ctx: &SymbolicCtx, order: usize) {
    let o = qhb_solve::<Coefficient, _>(sys, ctx, order).unwrap();
    let e = engine::solve::<Coefficient, _>(sys, ctx, order).unwrap();
    for n in 1..=order {
        let d = o.k[n].sub(&e.k[n]);
        assert!(d.near_zero(), "K^({n}) differs: {d}");
        let d = o.s[n].sub(&e.s[n]);
        assert!(d.near_zero(), "S^({n}) differs: {d}");
        for k in 0..sys.n_modes() {
            let d = o.eta(k, n).sub(&e.eta(k, n));
            assert!(d.near_zero(), "η_{k}^({n}) differs: {d}");
        }
    }
    assert!(!e.k_total().is_zero());
}

#[test]
fn kerr_cat_through_third_order() {
    let sys = FramedSystem::single(2, 1, &[3, 4, 5], true);
    assert_same(&sys, &SymbolicCtx::quantum(), 3);
    assert_same(&sys, &SymbolicCtx { classical: true }, 3);
}

#[test]
fn three_legged_cat_through_third_order() {
    let sys = FramedSystem::single(3, 2, &[3, 4, 5], true);
    assert_same(&sys, &SymbolicCtx::quantum(), 3);
}

#[test]
fn generic_detuned_through_third_order() {
    let sys = FramedSystem::generic(&[3, 4, 5], true);
    assert_same(&sys, &SymbolicCtx::quantum(), 3);
}

fn two_mode(ranks: &[u8]) -> FramedSystem {
    FramedSystem {
        modes: (0..2)
            .map(|k| ModeFrame { frame: FrequencyVector::unit(Sym::Wf(k)), detuned: true })
            .collect(),
        tones: 1,
        ranks: ranks.to_vec(),
        participation: true,
        slow: Vec::new(),
    }
}

#[test]
fn two_modes_second_order() {
    assert_same(&two_mode(&[3, 4]), &SymbolicCtx::quantum(), 2);
}

#[test]
fn two_modes_quartic_fourth_order() {
    assert_same(&two_mode(&[4, 6]), &SymbolicCtx::quantum(), 4);
}
