//! Diagram enumeration, decoration, rooting and evaluation.

use kamiltonian_core::diagram::*;
use kamiltonian_core::engine::{dress_propagator, DressingContext};
use kamiltonian_core::freq::FrequencyVector;
use kamiltonian_core::system::FramedSystem;
use kamiltonian_core::coeff::cmono;
use kamiltonian_core::*;

fn qctx() -> SymbolicCtx {
    SymbolicCtx::quantum()
}

fn three_leg_spec() -> Vec<ExtLeg> {
    vec![
        ExtLeg::drive_in(0),
        ExtLeg::drive_in(0),
        ExtLeg::resonant_out(0),
        ExtLeg::resonant_out(0),
        ExtLeg::resonant_out(0),
    ]
}

/// Every rooting of every decorated diagram for a spec.
fn rooted_family(spec: &[ExtLeg], sys: &FramedSystem) -> Vec<RootedDiagram> {
    let mut out = Vec::new();
    for t in enumerate_unrooted_trees(spec.len()) {
        for d in decorate(&t, spec, sys) {
            out.extend(rootings(&d));
        }
    }
    out
}

fn small_specs() -> Vec<(FramedSystem, Vec<ExtLeg>)> {
    let kc = FramedSystem::single(2, 1, &[3, 4, 5], true);
    let tc = FramedSystem::single(3, 2, &[3, 4, 5], true);
    vec![
        (kc.clone(), vec![ExtLeg::drive_in(0), ExtLeg::resonant_out(0), ExtLeg::resonant_out(0)]),
        (
            kc.clone(),
            vec![ExtLeg::drive_in(0), ExtLeg::drive_out(0), ExtLeg::resonant_in(0), ExtLeg::resonant_out(0)],
        ),
        (
            kc,
            vec![
                ExtLeg::drive_in(0),
                ExtLeg::resonant_in(0),
                ExtLeg::resonant_out(0),
                ExtLeg::resonant_out(0),
                ExtLeg::resonant_out(0),
            ],
        ),
        (tc, three_leg_spec()),
    ]
}

#[test]
fn three_legged_cat_coupling_from_all_five_leaf_diagrams() {
    let sys = FramedSystem::single(3, 2, &[3, 4, 5], true);
    let counts: Vec<usize> =
        enumerate_unrooted_trees(5).iter().map(|t| decorate(t, &three_leg_spec(), &sys).len()).collect();
    assert_eq!(counts, vec![2, 20, 40]);
    let mut gamma = SymPoly::zero(1);
    for r in rooted_family(&three_leg_spec(), &sys) {
        gamma.add_assign(&evaluate_bare(&r, &sys, &qctx()).unwrap());
    }
    // Γ = ∂K/∂A* = 3 Ω ξ² A*².
    let omega = cmono(2, 1, &[(Sym::G(5), 1)])
        .add(&cmono(-165, 8, &[(Sym::G(3), 1), (Sym::G(4), 1), (Sym::Wd(0), -1)]))
        .add(&cmono(195, 4, &[(Sym::G(3), 3), (Sym::Wd(0), -2)]));
    let xi2 = Coefficient::sym_pow(Sym::Xi(0), 2);
    let expected = SymPoly::monomial(1, MonoKey::single(2, 0), omega.mul(&xi2).scale(&GQ::int(3)));
    assert!(gamma.sub(&expected).near_zero(), "{gamma}");
}

#[test]
fn cascaded_cubic_mixers() {
    // Root 3-mixer fed by A and by the inverted output of a 3-mixer on (A, A).
    let sys = FramedSystem::generic(&[3], false).undriven();
    let inner = Node::mixer(0, vec![Node::Leaf(Leg::Ac(0)), Node::Leaf(Leg::Ac(0))]).inverted();
    let d = RootedDiagram { root: Node::mixer(0, vec![Node::Leaf(Leg::A(0)), inner]) };
    let v = evaluate_bare::<Coefficient, _>(&d, &sys, &qctx()).unwrap();
    let a = SymPoly::var(1, 0);
    let ac = SymPoly::var_conj(1, 0);
    let w = FrequencyVector::unit(Sym::Wf(0));
    let c = cmono(1, 1, &[(Sym::G(3), 2), (Sym::Wf(0), -1)]);
    let expected = a.star(&ac, false).star(&ac, false).shift_phase(&(w + w)).scale(&c);
    assert!(v.sub(&expected).near_zero(), "{v}");
    // Expanded form: one classical term and two quantum bonds.
    assert_eq!(classical_part(&v).len(), 1);
    let mut h = MonoKey::single(1, 0);
    h.hbar = 1;
    h.phase = w + w;
    assert_eq!(quantum_part(&v).coeff(&h), c.scale(&GQ::int(2)));
}

#[test]
fn detuning_mixer_on_resonant_excitation() {
    let sys = FramedSystem::single(2, 1, &[3], true);
    let d = RootedDiagram { root: Node::Delta { mode: 0, inverted: false, child: Box::new(Node::Leaf(Leg::A(0))) } };
    let v = evaluate_bare::<Coefficient, _>(&d, &sys, &qctx()).unwrap();
    assert_eq!(v, SymPoly::var(1, 0).scale(&Coefficient::sym(Sym::Delta(0))));
}

#[test]
fn quartic_into_cubic_cascade() {
    // All diagrams where a 4-mixer and a 3-mixer share one off-resonant excitation.
    let sys = FramedSystem::single(3, 2, &[3, 4], true);
    let trees = enumerate_unrooted_trees(5);
    let mut k = SymPoly::zero(1);
    for d in decorate(&trees[1], &three_leg_spec(), &sys) {
        for r in rootings(&d) {
            k.add_assign(&evaluate_bare(&r, &sys, &qctx()).unwrap());
        }
    }
    // Γ from the [4,3] topology = 3 × (−165/8) g3 g4 ξ² A*² / ω_d.
    let c = cmono(-495, 8, &[(Sym::G(3), 1), (Sym::G(4), 1), (Sym::Xi(0), 2), (Sym::Wd(0), -1)]);
    assert_eq!(k, SymPoly::monomial(1, MonoKey::single(2, 0), c));
}

#[test]
fn orderings_sum_to_symmetry_factor_times_class() {
    for (sys, spec) in small_specs() {
        for r in rooted_family(&spec, &sys) {
            let ords = r.orderings();
            assert_eq!(ords.len() as u128, r.symmetry_factor(), "{}", r.code(true));
            let mut sum = SymPoly::zero(1);
            for o in &ords {
                sum.add_assign(&evaluate_bare(o, &sys, &qctx()).unwrap());
            }
            let class = evaluate_class::<Coefficient, _>(&r, &sys, &qctx()).unwrap();
            assert!(sum.sub(&class).near_zero(), "{}", r.code(true));
        }
    }
}

#[test]
fn conjugate_diagram_evaluates_to_conjugate() {
    for (sys, spec) in small_specs() {
        for t in enumerate_unrooted_trees(spec.len()) {
            for d in decorate(&t, &spec, &sys) {
                let c = d.conjugate(&sys);
                assert_eq!(c.conjugate(&sys).canon, d.canon);
                for r in rootings(&d) {
                    let v = evaluate_bare::<Coefficient, _>(&r, &sys, &qctx()).unwrap();
                    let vc = evaluate_bare::<Coefficient, _>(&r.conjugate(), &sys, &qctx()).unwrap();
                    assert!(vc.sub(&v.conj()).near_zero(), "{}", r.code(true));
                }
            }
        }
    }
}

#[test]
fn retained_diagrams_have_zero_net_frequency_and_no_resonant_edges() {
    for (sys, spec) in small_specs() {
        for t in enumerate_unrooted_trees(spec.len()) {
            for d in decorate(&t, &spec, &sys) {
                assert!(d.net.is_zero());
                for w in &d.edge_freq {
                    assert!(sys.modes.iter().all(|m| m.frame != *w), "resonant internal edge {w}");
                }
                for r in rootings(&d) {
                    assert!(r.net_phase(&sys).is_zero());
                    let v = evaluate_bare::<Coefficient, _>(&r, &sys, &qctx()).unwrap();
                    assert!(v.iter().all(|(k, _)| k.phase.is_zero()), "{v}");
                }
            }
        }
    }
}

#[test]
fn evaluated_order_matches_declared_order() {
    let sys = FramedSystem::single(2, 1, &[3, 4, 5, 6], true);
    let spec = vec![
        ExtLeg::drive_in(0),
        ExtLeg::drive_out(0),
        ExtLeg::resonant_in(0),
        ExtLeg::resonant_in(0),
        ExtLeg::resonant_out(0),
        ExtLeg::resonant_out(0),
    ];
    let mut seen = 0;
    for t in enumerate_unrooted_trees(6) {
        for d in decorate(&t, &spec, &sys) {
            assert_eq!(d.order, 4);
            for r in rootings(&d) {
                assert_eq!(r.order(), 4);
                let v = evaluate_bare::<Coefficient, _>(&r, &sys, &qctx()).unwrap();
                for (_, c) in v.iter() {
                    assert_eq!(c.order_range(), Some((4, 4)));
                }
                seen += 1;
            }
        }
    }
    assert!(seen > 100);
}

#[test]
fn detuning_cancels_on_a_single_resonant_input() {
    // (3:2) frame: the 3-mixer on (ξ, A) feeds an excitation at −5ω_d/3.
    let sys = FramedSystem::single(3, 2, &[3], true);
    let inner = RootedDiagram { root: Node::mixer(0, vec![Node::Leaf(Leg::Xi(0)), Node::Leaf(Leg::A(0))]) };
    let raw = evaluate_class::<Coefficient, _>(&inner, &sys, &qctx()).unwrap();
    let mut ctx = DressingContext::empty(1, 3);
    ctx.k.push(SymPoly::monomial(1, MonoKey::single(1, 1), Coefficient::sym(Sym::Delta(0))));
    let (eta, leak) = dress_propagator(&raw, 1, 0, &sys, &qctx(), &ctx).unwrap();
    assert!(leak.iter().all(|p| p.is_zero()));
    // δ D + i{{δ A*A, D}} = 0 for D ∝ A: no correction at any higher order.
    assert!(eta[2].is_zero() && eta[3].is_zero());
    let expected = propagate(&raw, &sys, &qctx()).unwrap();
    assert_eq!(eta[1], expected);
    // Bare value: 2 g3 ξ A / ω_d.
    let c = cmono(2, 1, &[(Sym::G(3), 1), (Sym::Xi(0), 1), (Sym::Wd(0), -1)]);
    let mut key = MonoKey::single(0, 1);
    key.phase = -FrequencyVector::unit(Sym::Wd(0));
    assert!(eta[1].sub(&SymPoly::monomial(1, key, c)).near_zero());
}

#[test]
fn bracket_insertion_in_a_dressed_propagator() {
    let sys = FramedSystem::generic(&[3, 4], false).undriven();
    let w = FrequencyVector::unit(Sym::Wf(0));
    // Raw cascaded cubic output g3²/ω′ e^{2iω′t} A*²A (classical part).
    let mut key = MonoKey::single(2, 1);
    key.phase = w + w;
    let raw = SymPoly::monomial(1, key, cmono(1, 1, &[(Sym::G(3), 2), (Sym::Wf(0), -1)]));
    let mut ctx = DressingContext::empty(1, 4);
    ctx.k.push(SymPoly::zero(1));
    ctx.k.push(SymPoly::monomial(1, MonoKey::single(2, 2), cmono(1, 2, &[(Sym::G(4), 1)])));
    let (eta, _) = dress_propagator(&raw, 2, 0, &sys, &qctx(), &ctx).unwrap();
    let c = cmono(1, 4, &[(Sym::G(3), 2), (Sym::G(4), 1), (Sym::Wf(0), -3)]);
    let mut k1 = MonoKey::single(3, 2);
    k1.phase = w + w;
    let mut k2 = MonoKey::single(2, 1);
    k2.phase = w + w;
    k2.hbar = 1;
    let expected = SymPoly::monomial(1, k1, c.clone()).add(&SymPoly::monomial(1, k2, c));
    assert!(eta[4].sub(&expected).near_zero(), "{}", eta[4]);
    assert!(eta[3].is_zero());
}

#[test]
fn empty_context_gives_bare_propagator() {
    let sys = FramedSystem::single(2, 1, &[3], false);
    let inner = RootedDiagram { root: Node::mixer(0, vec![Node::Leaf(Leg::A(0)), Node::Leaf(Leg::A(0))]) };
    let raw = evaluate_class::<Coefficient, _>(&inner, &sys, &qctx()).unwrap();
    let (eta, _) = dress_propagator(&raw, 1, 0, &sys, &qctx(), &DressingContext::empty(1, 3)).unwrap();
    assert_eq!(eta[1], propagate(&raw, &sys, &qctx()).unwrap());
    assert!(eta[2].is_zero() && eta[3].is_zero());
}
