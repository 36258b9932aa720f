//! Canonical form of the effective Hamiltonian and order-one collapse operators.
//!
//! A real `K` is regrouped into
//! `K = Σ K_n A*^n A^n + Σ (Ω ξ^p A*^{q+k} A^k + c.c.)`: diagonal
//! (number-conserving) terms are *renormalisations*, the rest are *couplings*
//! stored once through a representative of each conjugate pair. Terms that
//! oscillate at a phase outside the declared slow set are kept as a residual
//! instead of being dropped.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods are only visible when std is linked
use num_traits::Float;

use crate::coeff::Coefficient;
use crate::engine;
use crate::error::{CoreError, Result};
use crate::freq::FrequencyVector;
use crate::poly::{MonoKey, PhasePolynomial};
use crate::rational::{factorial, Q};
use crate::scalar::{Ctx, Scalar};
use crate::symbol::Sym;
use crate::system::FramedSystem;

/// Effective Hamiltonian in canonical form.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectiveHamiltonian<S> {
    /// Number of modes.
    pub modes: usize,
    /// Number-conserving static terms `A*^n A^n` (any `ħ` power).
    pub renorm: PhasePolynomial<S>,
    /// One representative per conjugate pair of coupling terms. The
    /// representative has more `A*` than `A` in the first mode where the
    /// powers differ (or, for balanced powers, a positive leading phase).
    pub couplings: PhasePolynomial<S>,
    /// Terms with a phase outside the static/slow set.
    pub residual: PhasePolynomial<S>,
}

/// Whether `key` is the representative of its conjugate pair.
fn is_representative(key: &MonoKey) -> bool {
    for (m, n) in key.pw.iter() {
        if m != n {
            return m > n;
        }
    }
    key.phase.leading().map(|c| c > Q::from_integer(0)).unwrap_or(true)
}

fn is_diagonal(key: &MonoKey) -> bool {
    key.phase.is_zero() && key.pw.iter().all(|(m, n)| m == n)
}

impl<S: Scalar> EffectiveHamiltonian<S> {
    /// Regroups `k` (static under `sys`, including declared slow phases).
    /// Fails if `k` is not real.
    pub fn assemble(k: &PhasePolynomial<S>, sys: &FramedSystem) -> Result<Self> {
        let modes = k.modes();
        let herm = k.sub(&k.conj());
        if !herm.near_zero() {
            return Err(CoreError::NonHermitian(format!("K − conj(K) = {herm:?}")));
        }
        let mut renorm = PhasePolynomial::zero(modes);
        let mut couplings = PhasePolynomial::zero(modes);
        let mut residual = PhasePolynomial::zero(modes);
        for (key, c) in k.iter() {
            if !sys.is_static(&key.phase) {
                residual.add_term(*key, c);
            } else if is_diagonal(key) {
                renorm.add_term(*key, c);
            } else if is_representative(key) {
                couplings.add_term(*key, c);
            }
        }
        Ok(EffectiveHamiltonian { modes, renorm, couplings, residual })
    }

    /// Whether no term is present.
    pub fn is_empty(&self) -> bool {
        self.renorm.is_zero() && self.couplings.is_zero() && self.residual.is_zero()
    }

    /// Reconstructs the full polynomial (lossless inverse of [`assemble`](Self::assemble)).
    pub fn to_poly(&self) -> PhasePolynomial<S> {
        let mut out = self.renorm.add(&self.couplings).add(&self.couplings.conj());
        out.add_assign(&self.residual);
        out
    }

    /// Coefficient of `ħ^h A*^n A^n` (single mode).
    pub fn renorm_at(&self, n: u8, h: u8) -> S {
        let mut key = MonoKey::single(n, n);
        key.hbar = h;
        self.renorm.coeff(&key)
    }

    /// `K_n = Σ_h ħ^h [ħ^h A*^n A^n]` at `ħ = 1` (single mode).
    pub fn renorm_total(&self, n: u8) -> S {
        let mut t = S::zero();
        for (key, c) in self.renorm.iter() {
            if key.pw[0] == (n, n) {
                t.add_assign(c);
            }
        }
        t
    }

    /// Coefficient of `ħ^h A*^{l+k} A^k` at static phase (single mode).
    pub fn coupling_at(&self, l: u8, k: u8, h: u8) -> S {
        let mut key = MonoKey::single(l + k, k);
        key.hbar = h;
        self.couplings.coeff(&key)
    }

    /// Ladder powers `l = m − n` present among the single-mode couplings.
    pub fn ladder_powers(&self) -> Vec<u8> {
        let mut v: Vec<u8> = self.couplings.iter().map(|(k, _)| k.pw[0].0 - k.pw[0].1).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Maps every coefficient (e.g. numeric substitution).
    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> EffectiveHamiltonian<T> {
        let conv = |p: &PhasePolynomial<S>| {
            let mut out = PhasePolynomial::zero(p.modes());
            for (k, c) in p.iter() {
                out.add_term(*k, &f(c));
            }
            out
        };
        EffectiveHamiltonian {
            modes: self.modes,
            renorm: conv(&self.renorm),
            couplings: conv(&self.couplings),
            residual: conv(&self.residual),
        }
    }
}

/// Splits an exact coefficient by drive power: `c = Σ_p ξ^p ξ*^{p'} c_{p,p'}`.
pub fn split_drive(c: &Coefficient, tone: u8) -> BTreeMap<(i32, i32), Coefficient> {
    let mut out = BTreeMap::new();
    for (p, rest) in c.collect(Sym::Xi(tone)) {
        for (pc, r) in rest.collect(Sym::XiC(tone)) {
            out.insert((p, pc), r);
        }
    }
    out
}

/// `Ω` of a coupling `Ω ξ^p A*^q`: the part of `c` proportional to `ξ^p`
/// (no `ξ*`), with the `ξ^p` removed.
pub fn omega_from(c: &Coefficient, p: i32, tone: u8) -> Coefficient {
    split_drive(c, tone).remove(&(p, 0)).unwrap_or_default()
}

/// Part of `c` proportional to `|ξ|^{2j}` with the drive factor removed.
pub fn stark_part(c: &Coefficient, j: i32, tone: u8) -> Coefficient {
    split_drive(c, tone).remove(&(j, j)).unwrap_or_default()
}

/// Dressed energy `E_i = Σ_{n≥1} K_n i!/(i−n)!` from single-mode
/// renormalisations evaluated at `ħ = 1`.
pub fn dressed_energy<S: Scalar>(h: &EffectiveHamiltonian<S>, i: u32) -> S {
    let mut e = S::zero();
    let mut seen: Vec<u8> = h.renorm.iter().map(|(k, _)| k.pw[0].0).collect();
    seen.dedup();
    for n in seen {
        if n == 0 || n as u32 > i {
            continue;
        }
        let w = falling_f(i, n as u32);
        e.add_assign(&h.renorm_total(n).scale(&crate::rational::GQ::real(Q::from_integer(w))));
    }
    e
}

fn falling_f(i: u32, n: u32) -> i128 {
    crate::rational::falling(i, n)
}

/// Fock matrix element of the normal-ordered monomial `a†^m a^n` on `|i⟩`:
/// returns `(j, ⟨j|a†^m a^n|i⟩)` with `j = i − n + m`, or `None` if it vanishes.
pub fn fock_element(m: u32, n: u32, i: u32) -> Option<(u32, f64)> {
    if n > i {
        return None;
    }
    let base = i - n;
    let j = base + m;
    // √(i!/(i−n)!) · √(j!/(i−n)!)
    let mut w = 1.0f64;
    for t in (base + 1)..=i {
        w *= (t as f64).sqrt();
    }
    for t in (base + 1)..=j {
        w *= (t as f64).sqrt();
    }
    Some((j, w))
}

/// `⟨i+q|a†^q|i⟩ = √((i+q)!/i!)`.
pub fn ladder_element(i: u32, q: u32) -> f64 {
    fock_element(q, 0, i).map(|(_, w)| w).unwrap_or(0.0)
}

/// Exact `i!/(i−n)!` as a rational (for symbolic energies).
pub fn energy_weight(i: u32, n: u32) -> Q {
    if n > i {
        return Q::from_integer(0);
    }
    Q::new(factorial(i), factorial(i - n))
}

/// One frequency group `C_{ω_j}` of the transformed collapse operator.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseGroup<S> {
    /// Bath frequency `ω_j ≥ 0`.
    pub freq: FrequencyVector,
    /// Operator (phase-free polynomial in `A`, `A*`).
    pub op: PhasePolynomial<S>,
}

/// Sign of `a ω_d + b ω′` over the whole region `ω_d > ω′ > 0`, if definite.
fn definite_sign(f: &FrequencyVector, frame: &FrequencyVector) -> Option<i8> {
    let zero = Q::from_integer(0);
    // Evaluate on the two extreme rays (ω_d, ω′) = (1, 0) and (1, 1).
    let eval = |wd_v: Q, wf_v: Q| -> Q {
        let mut t = zero;
        for (s, c) in f.entries() {
            let v = match s {
                Sym::Wd(0) => wd_v,
                Sym::Wf(0) => wf_v,
                _ => return Q::from_integer(i128::MAX / 4),
            };
            t += c * v;
        }
        t
    };
    if frame == &FrequencyVector::unit(Sym::Wf(0)) {
        let (r1, r2) = (eval(Q::from_integer(1), zero), eval(Q::from_integer(1), Q::from_integer(1)));
        if f.is_zero() {
            Some(0)
        } else if r1 >= zero && r2 >= zero {
            Some(1)
        } else if r1 <= zero && r2 <= zero {
            Some(-1)
        } else {
            None
        }
    } else {
        // Frame locked to the drive: every phase is a multiple of ω_d.
        let c = f.get(Sym::Wd(0));
        if f.entries().any(|(s, _)| s != Sym::Wd(0)) || frame.entries().any(|(s, _)| s != Sym::Wd(0)) {
            return None;
        }
        Some(if c > zero { 1 } else if c < zero { -1 } else { 0 })
    }
}

/// Order-one part of the transformed collapse operator
/// `C(t) = (A + η) e^{−iω′t} − (A + η)* e^{iω′t}` grouped as
/// `Σ_j C_{ω_j} e^{−iω_j t} + h.c.` with `ω_j ≥ 0`.
///
/// Single mode, single tone, with either an independent frame `ω′` (assumed
/// `ω_d > ω′ > 0`) or a frame locked to the drive with `ω′ < ω_d`. The
/// degenerate frame `ω_d = 2ω′` is rejected: there the groups merge with slow
/// terms and a slow-frame treatment is needed. Pure c-number parts (which do
/// not act on the oscillator) are dropped. The `ω_j = 0` group reports the
/// whole zero-frequency part of `C(t)`.
pub fn collapse_operators_order1<S: Scalar, C: Ctx<S>>(sys: &FramedSystem, ctx: &C) -> Result<Vec<CollapseGroup<S>>> {
    if sys.n_modes() != 1 || sys.tones != 1 {
        return Err(CoreError::InvalidInput("collapse operators need one mode and one tone".into()));
    }
    let frame = sys.modes[0].frame;
    let wd = FrequencyVector::unit(Sym::Wd(0));
    if frame.scale(Q::from_integer(2)) == wd {
        return Err(CoreError::InvalidInput(
            "degenerate frame ω_d = 2ω′: use a slow-evolving frame for these terms".into(),
        ));
    }
    if frame != FrequencyVector::unit(Sym::Wf(0)) {
        let r = frame.get(Sym::Wd(0));
        if r >= Q::from_integer(1) || r <= Q::from_integer(0) {
            return Err(CoreError::InvalidInput(format!("frame {frame} must satisfy 0 < ω′ < ω_d")));
        }
    }
    let sol = engine::solve(sys, ctx, 1)?;
    let eta = sol.eta(0, 1);
    // Total phase of η e^{−iω′t} is f − ω′; −η* e^{iω′t} has −f + ω′.
    let mut groups: BTreeMap<FrequencyVector, PhasePolynomial<S>> = BTreeMap::new();
    let mut push = |phase: FrequencyVector, key: MonoKey, c: S| -> Result<()> {
        if key.degree() == 0 {
            return Ok(());
        }
        let sign = definite_sign(&phase, &frame)
            .ok_or_else(|| CoreError::InvalidInput(format!("phase {phase} has no definite sign")))?;
        // Only e^{−iω_j t} components (total phase ≤ 0) define C_{ω_j}.
        if sign > 0 {
            return Ok(());
        }
        let mut k = key;
        k.phase = FrequencyVector::zero();
        groups.entry(-phase).or_insert_with(|| PhasePolynomial::zero(1)).add_term(k, &c);
        Ok(())
    };
    for (key, c) in eta.iter() {
        push(key.phase - frame, *key, c.clone())?;
    }
    for (key, c) in eta.conj().iter() {
        push(key.phase + frame, *key, c.neg())?;
    }
    let mut out: Vec<CollapseGroup<S>> = Vec::new();
    let mut has_zero = false;
    for (f, op) in groups {
        has_zero |= f.is_zero();
        out.push(CollapseGroup { freq: f, op: prune(op) });
    }
    if !has_zero {
        out.push(CollapseGroup { freq: FrequencyVector::zero(), op: PhasePolynomial::zero(1) });
    }
    out.sort_by(|a, b| a.freq.cmp(&b.freq));
    Ok(out)
}

fn prune<S: Scalar>(p: PhasePolynomial<S>) -> PhasePolynomial<S> {
    let mut out = PhasePolynomial::zero(p.modes());
    for (k, c) in p.iter() {
        if !c.near_zero() {
            out.add_term(*k, c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::cmono;
    use crate::scalar::SymbolicCtx;

    #[test]
    fn fock_elements() {
        assert_eq!(fock_element(1, 0, 0), Some((1, 1.0)));
        let (j, w) = fock_element(0, 2, 3).unwrap();
        assert_eq!(j, 1);
        assert!((w - 6f64.sqrt()).abs() < 1e-12);
        assert!(fock_element(0, 1, 0).is_none());
        assert!((ladder_element(0, 5) - 120f64.sqrt()).abs() < 1e-12);
        assert_eq!(energy_weight(5, 2), Q::from_integer(20));
    }

    #[test]
    fn kerr_cat_first_order_assembly() {
        let sys = FramedSystem::single(2, 1, &[3], true);
        let sol = engine::solve(&sys, &SymbolicCtx::quantum(), 1).unwrap();
        let h = EffectiveHamiltonian::assemble(&sol.k_total(), &sys).unwrap();
        assert_eq!(h.renorm_at(1, 0), cmono(1, 1, &[(Sym::Delta(0), 1)]));
        assert_eq!(omega_from(&h.coupling_at(2, 0, 0), 1, 0), cmono(1, 1, &[(Sym::G(3), 1)]));
        assert!(h.residual.is_zero());
        assert_eq!(h.to_poly(), sol.k_total());
        assert_eq!(h.ladder_powers(), alloc::vec![2]);
    }

    #[test]
    fn empty_input_gives_empty_model() {
        let sys = FramedSystem::single(2, 1, &[3], true);
        let h = EffectiveHamiltonian::<Coefficient>::assemble(&PhasePolynomial::zero(1), &sys).unwrap();
        assert!(h.is_empty());
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let sys = FramedSystem::single(2, 1, &[3], true);
        let k = PhasePolynomial::monomial(1, MonoKey::single(2, 0), cmono(1, 1, &[]));
        assert!(EffectiveHamiltonian::assemble(&k, &sys).is_err());
    }

    #[test]
    fn degenerate_collapse_frame_is_rejected() {
        let sys = FramedSystem::single(2, 1, &[3], true);
        assert!(collapse_operators_order1(&sys, &SymbolicCtx::quantum()).is_err());
    }
}
