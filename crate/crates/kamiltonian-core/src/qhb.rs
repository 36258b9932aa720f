//! Direct order-by-order quantum harmonic balance solver.
//!
//! This is the reference implementation against which the diagram engine is
//! checked. It works on whole polynomials: at each order it star-powers the
//! full mixing field `X`, splits the right-hand side of the equation of motion
//!
//! `∂K/∂A* + i ∂_t η = F(A + η) + i {{K, η}}`
//!
//! into static and rotating parts, integrates the rotating part in time and the
//! static part in `A*`, and fixes the static part of `η` in the canonical gauge
//! `a = e^{L_S} A` (`L_S f = {{S, f}}`, `S` real and purely rotating).

use alloc::format;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::freq::FrequencyVector;
use crate::graded::Graded;
use crate::poly::{integrate_wrt_conjugate, MonoKey, PhasePolynomial};
use crate::rational::{q, GQ};
use crate::scalar::{Ctx, Scalar};
use crate::symbol::Sym;
use crate::system::FramedSystem;

/// Solution of the harmonic balance problem up to some order.
#[derive(Clone, Debug)]
pub struct QhbState<S> {
    /// `K^(n)` (index = order, `K^(0) = 0`).
    pub k: Vec<PhasePolynomial<S>>,
    /// Rotating part of `η_k^(n)`: `eta_rot[mode][order]`.
    pub eta_rot: Vec<Vec<PhasePolynomial<S>>>,
    /// Static (and slow) part of `η_k^(n)`: `eta_sta[mode][order]`.
    pub eta_sta: Vec<Vec<PhasePolynomial<S>>>,
    /// Generator `S^(n)` of the canonical transformation.
    pub s: Vec<PhasePolynomial<S>>,
}

impl<S: Scalar> QhbState<S> {
    /// Highest solved order.
    pub fn order(&self) -> usize {
        self.k.len() - 1
    }

    /// Full `K = Σ_n K^(n)`.
    pub fn k_total(&self) -> PhasePolynomial<S> {
        let mut t = PhasePolynomial::zero(self.k[0].modes());
        for p in &self.k {
            t.add_assign(p);
        }
        t
    }

    /// Full `η_k^(n)` (rotating + static).
    pub fn eta(&self, mode: usize, n: usize) -> PhasePolynomial<S> {
        self.eta_rot[mode][n].add(&self.eta_sta[mode][n])
    }
}

/// Builds the order-0 mixing field `X^(0)` (resonant legs and drive legs).
pub fn mixing_field<S: Scalar, C: Ctx<S>>(sys: &FramedSystem, ctx: &C) -> PhasePolynomial<S> {
    let modes = sys.n_modes();
    let mut x = PhasePolynomial::zero(modes);
    for (k, m) in sys.modes.iter().enumerate() {
        let lam = lambda(sys, ctx, k);
        let a = PhasePolynomial::<S>::var(modes, k).shift_phase(&-m.frame).scale(&lam);
        x.add_assign(&a);
        x.add_assign(&a.conj());
    }
    for l in 0..sys.tones {
        let w = FrequencyVector::unit(Sym::Wd(l as u8));
        x.add_term(MonoKey::one().with_phase(-w), &ctx.sym(Sym::Xi(l as u8)));
        x.add_term(MonoKey::one().with_phase(w), &ctx.sym(Sym::XiC(l as u8)));
    }
    x
}

fn lambda<S: Scalar, C: Ctx<S>>(sys: &FramedSystem, ctx: &C, k: usize) -> S {
    if sys.participation {
        ctx.sym(Sym::Lambda(k as u8))
    } else {
        S::one()
    }
}

/// Dresses `η_k` into its contribution `λ_k (η_k e^{−iω_k′t} + c.c.)` to `X`.
fn eta_leg<S: Scalar, C: Ctx<S>>(sys: &FramedSystem, ctx: &C, k: usize, eta: &PhasePolynomial<S>) -> PhasePolynomial<S> {
    let lam = lambda(sys, ctx, k);
    let e = eta.shift_phase(&-sys.modes[k].frame);
    e.add(&e.conj()).scale(&lam)
}

/// Order-`n` part of the forcing `F_k(A + η)` given `η` through order `n − 1`.
pub fn forcing_at_order<S: Scalar, C: Ctx<S>>(
    sys: &FramedSystem,
    ctx: &C,
    eta: &[Vec<PhasePolynomial<S>>],
    n: usize,
) -> Vec<PhasePolynomial<S>> {
    let modes = sys.n_modes();
    let classical = ctx.classical();
    // Graded mixing field through order n − 1.
    let mut x = Graded::zero(modes, n.saturating_sub(1).max(0));
    x.parts[0] = mixing_field(sys, ctx);
    for i in 1..n {
        for k in 0..modes {
            x.parts[i].add_assign(&eta_leg(sys, ctx, k, &eta[k][i]));
        }
    }
    let max_rank = sys.max_rank() as usize;
    // powers[j] = X^j truncated at the grade needed for rank j + 1.
    let mut powers: Vec<Graded<S>> = Vec::new();
    let mut acc = x.clone();
    let mut needed = Vec::new();
    for j in 1..max_rank {
        // X^j feeds g_{j+1}, whose order is j − 1; the needed grade is n − (j − 1).
        let top = (n + 1).saturating_sub(j);
        if j > 1 {
            acc = acc.star(&x, top, classical);
        }
        needed.push(top);
        powers.push(acc.clone());
        if top == 0 {
            break;
        }
    }
    let mut out = Vec::with_capacity(modes);
    for k in 0..modes {
        let mut f = PhasePolynomial::zero(modes);
        if sys.modes[k].detuned {
            let a_prev = if n == 1 { PhasePolynomial::var(modes, k) } else { eta[k][n - 1].clone() };
            f.add_assign(&a_prev.scale(&ctx.sym(Sym::Delta(k as u8))));
        }
        let lam = lambda(sys, ctx, k);
        for &m in &sys.ranks {
            let m = m as usize;
            if m < 3 || m - 2 > n {
                continue;
            }
            let grade = n - (m - 2);
            let Some(p) = powers.get(m - 2) else { continue };
            let part = p.at(grade);
            if part.is_zero() {
                continue;
            }
            let g = ctx.sym(Sym::G(m as u8)).mul(&lam);
            f.add_assign(&part.shift_phase(&sys.modes[k].frame).scale(&g));
        }
        out.push(f);
    }
    out
}

/// Order-`n` part of `e^{L_S} A_k − A_k` given `S^(1..n−1)`.
pub fn lie_remainder<S: Scalar>(s: &[PhasePolynomial<S>], k: usize, n: usize, classical: bool) -> PhasePolynomial<S> {
    let modes = s[0].modes();
    let mut sg = Graded::zero(modes, n);
    for i in 1..n.min(s.len()) {
        sg.parts[i] = s[i].clone();
    }
    let mut term = Graded::zero(modes, n);
    term.parts[0] = PhasePolynomial::var(modes, k);
    let mut total = PhasePolynomial::zero(modes);
    for j in 1..=n {
        term = sg.bracket(&term, n, classical);
        let inv = GQ::real(q(1, j as i128));
        for p in term.parts.iter_mut() {
            *p = p.scale_gq(&inv);
        }
        total.add_assign(&term.at(n));
        if term.parts.iter().all(|p| p.is_zero()) {
            break;
        }
    }
    total
}

/// Solves the harmonic balance equations through `order`.
pub fn qhb_solve<S: Scalar, C: Ctx<S>>(sys: &FramedSystem, ctx: &C, order: usize) -> Result<QhbState<S>> {
    sys.validate()?;
    let modes = sys.n_modes();
    let classical = ctx.classical();
    let z = || PhasePolynomial::<S>::zero(modes);
    let mut st = QhbState {
        k: alloc::vec![z()],
        eta_rot: (0..modes).map(|_| alloc::vec![z()]).collect(),
        eta_sta: (0..modes).map(|_| alloc::vec![z()]).collect(),
        s: alloc::vec![z()],
    };
    let mut eta: Vec<Vec<PhasePolynomial<S>>> = (0..modes).map(|_| alloc::vec![z()]).collect();
    for n in 1..=order {
        let forcing = forcing_at_order(sys, ctx, &eta, n);
        let mut gammas = Vec::with_capacity(modes);
        let mut rots = Vec::with_capacity(modes);
        let mut stas = Vec::with_capacity(modes);
        let mut rem_rots = Vec::with_capacity(modes);
        for k in 0..modes {
            let mut rhs = forcing[k].clone();
            for i in 1..n {
                let br = st.k[i].bracket(&eta[k][n - i], classical);
                rhs.add_assign(&br.scale_gq(&GQ::i()));
            }
            let rem = lie_remainder(&st.s, k, n, classical);
            let (rem_sta, rem_rot) = rem.split(|f| sys.is_static(f));
            let (rhs_sta, rhs_rot) = rhs.split(|f| sys.is_static(f));
            // Static-set phases: η_f = R_f (canonical gauge), Γ_f = RHS_f + f·η_f.
            let mut gamma = rhs_sta;
            for f in rem_sta.phases() {
                if f.is_zero() {
                    continue;
                }
                let ef = rem_sta.filter(|key| key.phase == f);
                gamma.add_assign(&ef.scale(&ctx.freq(&f)));
            }
            // Rotating phases: η_f = −RHS_f / f.
            let mut rot = PhasePolynomial::zero(modes);
            for f in rhs_rot.phases() {
                let inv = ctx.inv_freq(&f)?;
                rot.add_assign(&rhs_rot.filter(|key| key.phase == f).scale(&inv.neg()));
            }
            gammas.push(gamma);
            rots.push(rot);
            stas.push(rem_sta);
            rem_rots.push(rem_rot);
        }
        let kn = integrate_wrt_conjugate(&gammas).map_err(|e| match e {
            CoreError::NotIntegrable(s) => CoreError::NotIntegrable(format!("order {n}: {s}")),
            other => other,
        })?;
        // i ∂S/∂A_k* = Rot η_k − Rot R_k.
        let s_grads: Vec<_> = (0..modes)
            .map(|k| rots[k].sub(&rem_rots[k]).scale_gq(&-GQ::i()))
            .collect();
        let sn = integrate_wrt_conjugate(&s_grads).map_err(|e| match e {
            CoreError::NotIntegrable(s) => CoreError::NotIntegrable(format!("generator at order {n}: {s}")),
            CoreError::NonHermitian(s) => CoreError::NonHermitian(format!("generator at order {n}: {s}")),
            other => other,
        })?;
        st.k.push(kn);
        st.s.push(sn);
        for k in 0..modes {
            eta[k].push(rots[k].add(&stas[k]));
            st.eta_rot[k].push(rots[k].clone());
            st.eta_sta[k].push(stas[k].clone());
        }
    }
    Ok(st)
}

/// Residual of the canonicity conditions `{{a_k, a_l*}} = {{A_k, A_l*}}`, `{{a_k, a_l}} = 0`.
///
/// Returns every non-vanishing term of the truncated residual (empty = canonical).
pub fn canonicity_check<S: Scalar>(
    eta: &[Vec<PhasePolynomial<S>>],
    frames: &[FrequencyVector],
    order: usize,
    classical: bool,
) -> Vec<(usize, usize, bool, PhasePolynomial<S>)> {
    let modes = eta.len();
    let _ = frames;
    let build = |k: usize| {
        let mut g = Graded::zero(modes, order);
        g.parts[0] = PhasePolynomial::var(modes, k);
        for n in 1..=order.min(eta[k].len() - 1) {
            g.parts[n] = eta[k][n].clone();
        }
        g
    };
    let conj = |g: &Graded<S>| Graded { parts: g.parts.iter().map(|p| p.conj()).collect() };
    let mut out = Vec::new();
    for k in 0..modes {
        for l in 0..modes {
            let ak = build(k);
            let al = build(l);
            let mixed = ak.bracket(&conj(&al), order, classical).total();
            let bare = PhasePolynomial::<S>::var(modes, k).bracket(&PhasePolynomial::var_conj(modes, l), classical);
            let r1 = mixed.sub(&bare);
            if !r1.near_zero() {
                out.push((k, l, true, r1));
            }
            let r2 = ak.bracket(&al, order, classical).total();
            if !r2.near_zero() {
                out.push((k, l, false, r2));
            }
        }
    }
    out
}
