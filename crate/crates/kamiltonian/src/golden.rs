//! Regression suite of exact effective-Hamiltonian coefficients.
//!
//! Every check runs the symbolic engine and compares a coefficient with a
//! frozen closed form by exact rational equality. The suite backs the
//! `selftest` command and is cheap (seconds in total).

use kamiltonian_core::coeff::cmono;
use kamiltonian_core::effective::{collapse_operators_order1, omega_from, split_drive, stark_part, EffectiveHamiltonian};
use kamiltonian_core::engine;
use kamiltonian_core::freq::FrequencyVector;
use kamiltonian_core::rational::q;
use kamiltonian_core::system::FramedSystem;
use kamiltonian_core::{Coefficient, MonoKey, PhasePolynomial, Sym, SymbolicCtx};

use crate::error::Result;

const G3: Sym = Sym::G(3);
const G4: Sym = Sym::G(4);
const G5: Sym = Sym::G(5);
const WD: Sym = Sym::Wd(0);
const WF: Sym = Sym::Wf(0);
const D: Sym = Sym::Delta(0);
const R: Sym = Sym::Param(b'r');

/// Outcome of one golden comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct GoldenCheck {
    /// Short identifier.
    pub name: &'static str,
    /// Whether the engine reproduces the frozen value exactly.
    pub passed: bool,
    /// Engine value (rendered) or the failing comparison.
    pub detail: String,
}

fn c(n: i128, d: i128, p: &[(Sym, i32)]) -> Coefficient {
    cmono(n, d, p)
}

fn sum(cs: &[Coefficient]) -> Coefficient {
    cs.iter().fold(Coefficient::zero(), |a, b| a.add(b))
}

fn inv(f: FrequencyVector) -> Result<Coefficient> {
    Ok(Coefficient::one().div_freq(&f)?)
}

fn model(sys: &FramedSystem, order: usize, classical: bool) -> Result<EffectiveHamiltonian<Coefficient>> {
    let sol = engine::solve(sys, &SymbolicCtx { classical }, order)?;
    Ok(EffectiveHamiltonian::assemble(&sol.k_total(), sys)?)
}

fn check(name: &'static str, got: &Coefficient, want: &Coefficient) -> GoldenCheck {
    let passed = got.sem_eq(want);
    let detail = if passed { got.to_string() } else { format!("got {got}, expected {want}") };
    GoldenCheck { name, passed, detail }
}

/// IST ladder at fixed `ω_o` and `g_4`, with `ω_o` replaced by the frame
/// `(p/q) ω_d`: `g_6 = 3(1+r) g_4²/(5ω_o)`, `g_8 = 6(1+r)² g_4³/(35ω_o²)`.
pub fn ist_substitute(c0: &Coefficient, q_: i128, p: i128) -> Result<Coefficient> {
    let one_r = c(1, 1, &[]).add(&c(1, 1, &[(R, 1)]));
    let wo = inv(FrequencyVector::of(WD, q(p, q_)))?;
    let g6 = one_r.mul(&c(3, 5, &[(G4, 2)])).mul(&wo);
    let g8 = one_r.mul(&one_r).mul(&c(6, 35, &[(G4, 3)])).mul(&wo).mul(&wo);
    Ok(c0.substitute(Sym::G(6), &g6)?.substitute(Sym::G(8), &g8)?)
}

fn kerr_cat(out: &mut Vec<GoldenCheck>) -> Result<()> {
    let sys = FramedSystem::single(2, 1, &[3, 4], true);
    let h1 = model(&sys, 1, false)?;
    out.push(check("kerr-cat detuning, order 1", &h1.renorm_at(1, 0), &c(1, 1, &[(D, 1)])));
    out.push(check("kerr-cat squeezing, order 1", &omega_from(&h1.coupling_at(2, 0, 0), 1, 0), &c(1, 1, &[(G3, 1)])));
    let h = model(&sys, 2, false)?;
    let delta = h.renorm_at(1, 0);
    let plain = split_drive(&delta, 0).remove(&(0, 0)).unwrap_or_else(Coefficient::zero);
    out.push(check("kerr-cat bare detuning, order 2", &plain, &c(1, 1, &[(D, 1)])));
    out.push(check(
        "kerr-cat Stark shift, order 2",
        &stark_part(&delta, 1, 0),
        &c(6, 1, &[(G4, 1)]).add(&c(-18, 1, &[(G3, 2), (WD, -1)])),
    ));
    let kerr = c(3, 2, &[(G4, 1)]).add(&c(-20, 3, &[(G3, 2), (WD, -1)]));
    out.push(check("kerr-cat Kerr, order 2", &h.renorm_at(2, 0), &kerr));
    out.push(check("kerr-cat Lamb shift, order 2", &h.renorm_at(1, 1), &kerr.scale(&q(2, 1).into())));
    Ok(())
}

fn three_legged_cat(out: &mut Vec<GoldenCheck>) -> Result<()> {
    let sys = FramedSystem::single(3, 2, &[3, 4, 5], true);
    let h = model(&sys, 3, false)?;
    out.push(check(
        "three-legged-cat coupling, order 3",
        &omega_from(&h.coupling_at(3, 0, 0), 2, 0),
        &sum(&[c(2, 1, &[(G5, 1)]), c(-165, 8, &[(G3, 1), (G4, 1), (WD, -1)]), c(195, 4, &[(G3, 3), (WD, -2)])]),
    ));
    out.push(check(
        "three-legged-cat Stark shift, order 3",
        &stark_part(&h.renorm_at(1, 0), 1, 0),
        &sum(&[c(6, 1, &[(G4, 1)]), c(-180, 7, &[(G3, 2), (WD, -1)]), c(4482, 49, &[(D, 1), (G3, 2), (WD, -2)])]),
    ));
    out.push(check(
        "three-legged-cat Lamb shift, order 3",
        &h.renorm_at(1, 1),
        &sum(&[c(3, 1, &[(G4, 1)]), c(-10, 1, &[(G3, 2), (WD, -1)]), c(15, 1, &[(D, 1), (G3, 2), (WD, -2)])]),
    ));
    out.push(check(
        "three-legged-cat Kerr, order 3",
        &h.renorm_at(2, 0),
        &sum(&[c(3, 2, &[(G4, 1)]), c(-5, 1, &[(G3, 2), (WD, -1)]), c(15, 2, &[(D, 1), (G3, 2), (WD, -2)])]),
    ));
    // Kerr-free point: g4 = (10/3) g3²/ω_d at δ = 0.
    let kerr = split_drive(&h.renorm_at(2, 0), 0).remove(&(0, 0)).unwrap_or_else(Coefficient::zero);
    let at_resonance = kerr.collect(D).remove(&0).unwrap_or_else(Coefficient::zero);
    let tuned = at_resonance.substitute(G4, &c(10, 3, &[(G3, 2), (WD, -1)]))?;
    out.push(GoldenCheck {
        name: "three-legged-cat Kerr-free point",
        passed: tuned.is_zero_semantic() && !at_resonance.is_zero_semantic(),
        detail: format!("Kerr at δ = 0: {at_resonance}"),
    });
    Ok(())
}

fn transmon_and_ist(out: &mut Vec<GoldenCheck>) -> Result<()> {
    let ctx = SymbolicCtx::quantum();
    let o53: Coefficient = engine::leading_coupling(&FramedSystem::single(5, 3, &[4, 6, 8], false), &ctx, 5, 3)?;
    out.push(check(
        "transmon (5:3) coupling, order 6",
        &o53,
        &sum(&[
            c(7, 1, &[(Sym::G(8), 1)]),
            c(-1745, 18, &[(G4, 1), (Sym::G(6), 1), (WD, -1)]),
            c(21275, 72, &[(G4, 3), (WD, -2)]),
        ]),
    ));
    let ist53 = ist_substitute(&o53, 5, 3)?;
    out.push(check(
        "inductively shunted (5:3) coupling",
        &ist53,
        &sum(&[c(240, 72, &[(R, 2)]), c(-6500, 72, &[(R, 1)]), c(14535, 72, &[])]).mul(&c(1, 1, &[(G4, 3), (WD, -2)])),
    ));
    let o42: Coefficient = engine::leading_coupling(&FramedSystem::single(4, 2, &[4, 6], false), &ctx, 4, 2)?;
    out.push(check(
        "inductively shunted (4:2) coupling",
        &ist_substitute(&o42, 4, 2)?,
        &c(6, 2, &[(R, 1), (G4, 2), (WD, -1)]).add(&c(-27, 2, &[(G4, 2), (WD, -1)])),
    ));
    Ok(())
}

fn snail_and_dissipators(out: &mut Vec<GoldenCheck>) -> Result<()> {
    let wd = FrequencyVector::unit(WD);
    let wf = FrequencyVector::unit(WF);
    let sys = FramedSystem::generic(&[3, 4], false);
    let h = model(&sys, 2, true)?;
    out.push(check(
        "generic-frame Stark shift, order 2",
        &stark_part(&h.renorm_at(1, 0), 1, 0),
        &sum(&[
            c(6, 1, &[(G4, 1)]),
            c(-4, 1, &[(G3, 2)]).mul(&inv(wf.scale(q(2, 1)) - wd)?),
            c(-4, 1, &[(G3, 2)]).mul(&inv(wf.scale(q(2, 1)) + wd)?),
            c(-8, 1, &[(G3, 2), (WF, -1)]),
        ]),
    ));

    let groups = collapse_operators_order1(&FramedSystem::generic(&[3], false), &SymbolicCtx::quantum())?;
    let get = |f: FrequencyVector| groups.iter().find(|g| g.freq == f).map(|g| g.op.clone());
    let xi = c(1, 1, &[(Sym::Xi(0), 1)]);
    let mono = |k: MonoKey, v: Coefficient| PhasePolynomial::monomial(1, k, v);
    let same = |a: Option<PhasePolynomial<Coefficient>>, b: PhasePolynomial<Coefficient>| {
        a.map(|a| a.sub(&b).iter().all(|(_, v)| v.is_zero_semantic())).unwrap_or(false)
    };
    let zero = PhasePolynomial::zero(1);
    let sq = mono(MonoKey::single(0, 2), c(4, 3, &[(G3, 1), (WF, -1)]));
    let plus = mono(MonoKey::single(0, 1), xi.mul(&c(2, 1, &[(G3, 1)])).mul(&inv(wd)?.add(&inv(wd + wf.scale(q(2, 1)))?)));
    let minus = mono(MonoKey::single(1, 0), xi.mul(&c(2, 1, &[(G3, 1)])).mul(&inv(wd - wf.scale(q(2, 1)))?.add(&inv(wd)?)));
    let passed = groups.len() == 4
        && same(get(FrequencyVector::zero()), zero)
        && same(get(wf.scale(q(2, 1))), sq)
        && same(get(wd + wf), plus)
        && same(get(wd - wf), minus);
    let detail = groups.iter().map(|g| format!("[{}] {}", g.freq, g.op)).collect::<Vec<_>>().join("; ");
    out.push(GoldenCheck { name: "first-order collapse operators", passed, detail });
    Ok(())
}

/// Runs every golden comparison.
pub fn golden_suite() -> Result<Vec<GoldenCheck>> {
    let mut out = Vec::new();
    kerr_cat(&mut out)?;
    three_legged_cat(&mut out)?;
    transmon_and_ist(&mut out)?;
    snail_and_dissipators(&mut out)?;
    Ok(out)
}
