//! Diagrammatic solver: order-by-order assembly of `K` and `η` from mixing
//! diagrams with dressed propagators and dressed resonant excitations.
//!
//! At order `n` every mixer of rank `m` receives `m − 1` legs. A leg is either
//! an external excitation (`A_j`, `A_j*`, `ξ_l`, `ξ_l*`, order 0) or an
//! off-resonant excitation of mode `j` already known at a lower order, split
//! by phase into *leg classes*. The engine enumerates unordered multisets of
//! leg classes whose orders add up to `n − (m − 2)`, evaluates each multiset
//! once as the sum over its distinct input orderings (a depth-first walk that
//! shares prefix products), and feeds the mixer output to every mode. The
//! two-wave `δ` mixer and the `i{{K, ·}}` insertions dress the propagators;
//! the static part of `η` comes from the dressed resonant excitation
//! `e^{L_S} A`, expanded over compositions of the order.
//!
//! The result is identical to [`qhb`](crate::qhb) by construction of the
//! equations, but shares no code with it beyond the polynomial algebra: the
//! oracle star-powers whole fields, the engine walks diagram classes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::freq::FrequencyVector;
use crate::poly::{integrate_wrt_conjugate, PhasePolynomial};
use crate::rational::{factorial, q, GQ};
use crate::scalar::{Ctx, Scalar};
use crate::symbol::Sym;
use crate::system::FramedSystem;

use crate::diagram::Leg;

/// Bookkeeping of one engine run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EngineStats {
    /// Leg classes created (external + off-resonant, conjugates included).
    pub leg_classes: usize,
    /// Unordered leg multisets evaluated (one per diagram class at a mixer).
    pub multisets: usize,
    /// Star products performed while summing over input orderings.
    pub products: usize,
    /// Nested-bracket terms of the dressed resonant excitation.
    pub resonant_terms: usize,
}

/// Output of [`solve`].
#[derive(Clone, Debug)]
pub struct EngineSolution<S> {
    /// `K^(n)` by order (`K^(0) = 0`).
    pub k: Vec<PhasePolynomial<S>>,
    /// Rotating part of `η` per mode and order.
    pub eta_rot: Vec<Vec<PhasePolynomial<S>>>,
    /// Static (canonical-gauge) part of `η` per mode and order.
    pub eta_sta: Vec<Vec<PhasePolynomial<S>>>,
    /// Bare mixer outputs per mode and order (all phases), before dressing.
    pub mixer_raw: Vec<Vec<PhasePolynomial<S>>>,
    /// Generator `S^(n)` of the canonical transformation.
    pub s: Vec<PhasePolynomial<S>>,
    /// Counters.
    pub stats: EngineStats,
}

impl<S: Scalar> EngineSolution<S> {
    /// Highest solved order.
    pub fn order(&self) -> usize {
        self.k.len() - 1
    }

    /// `K = Σ_n K^(n)`.
    pub fn k_total(&self) -> PhasePolynomial<S> {
        let mut t = PhasePolynomial::zero(self.k[0].modes());
        for p in &self.k {
            t.add_assign(p);
        }
        t
    }

    /// Full `η_k^(n)`.
    pub fn eta(&self, mode: usize, n: usize) -> PhasePolynomial<S> {
        self.eta_rot[mode][n].add(&self.eta_sta[mode][n])
    }

    /// Dressing context holding everything known through `order`.
    pub fn context(&self, order: usize) -> DressingContext<S> {
        DressingContext {
            k: self.k.iter().take(order + 1).cloned().collect(),
            target: order,
        }
    }
}

/// Known slow dynamics used to dress propagators.
#[derive(Clone, Debug)]
pub struct DressingContext<S> {
    /// `K^(i)` by order (index 0 unused).
    pub k: Vec<PhasePolynomial<S>>,
    /// Highest order to keep.
    pub target: usize,
}

impl<S: Scalar> DressingContext<S> {
    /// Context with no known `K` (bare propagators only, apart from `δ`).
    pub fn empty(modes: usize, target: usize) -> Self {
        DressingContext { k: alloc::vec![PhasePolynomial::zero(modes)], target }
    }
}

/// One leg class: a fixed-phase piece of an excitation entering a mixer.
#[derive(Clone, Debug)]
struct LegClass<S> {
    order: usize,
    value: PhasePolynomial<S>,
}

fn lambda<S: Scalar, C: Ctx<S>>(sys: &FramedSystem, ctx: &C, k: usize) -> S {
    if sys.participation {
        ctx.sym(Sym::Lambda(k as u8))
    } else {
        S::one()
    }
}

/// Off-resonant excitation of mode `mode` from a raw mixer output, with its
/// propagator dressed by `δ` insertions and `i{{K^(i), ·}}` insertions.
///
/// `raw` is the order-`order` raw output (phase = output phase, rotating).
/// The result is graded by order up to `ctx.target`: index `o` holds the
/// order-`o` part of the dressed `η`. Insertion `s` multiplies by one more
/// propagator; `δ` counts as order one and `K^(i)` as order `i`. Parts that
/// land on a static phase cannot be propagated and are returned separately
/// (they belong to `Γ`).
pub fn dress_propagator<S: Scalar, C: Ctx<S>>(
    raw: &PhasePolynomial<S>,
    order: usize,
    mode: usize,
    sys: &FramedSystem,
    ctx: &C,
    dctx: &DressingContext<S>,
) -> Result<(Vec<PhasePolynomial<S>>, Vec<PhasePolynomial<S>>)> {
    let modes = sys.n_modes();
    let top = dctx.target;
    let z = || PhasePolynomial::<S>::zero(modes);
    let mut eta: Vec<PhasePolynomial<S>> = (0..=top).map(|_| z()).collect();
    let mut leak: Vec<PhasePolynomial<S>> = (0..=top).map(|_| z()).collect();
    if order > top {
        return Ok((eta, leak));
    }
    // pending[o] = not-yet-propagated raw input at order o.
    let mut pending: Vec<PhasePolynomial<S>> = (0..=top).map(|_| z()).collect();
    pending[order] = raw.clone();
    let classical = ctx.classical();
    for o in order..=top {
        let r = core::mem::replace(&mut pending[o], z());
        if r.is_zero() {
            continue;
        }
        let (sta, rot) = r.split(|f| sys.is_static(f));
        leak[o].add_assign(&sta);
        let mut d = z();
        for f in rot.phases() {
            let inv = ctx.inv_freq(&f)?;
            d.add_assign(&rot.filter(|k| k.phase == f).scale(&inv.neg()));
        }
        if d.is_zero() {
            continue;
        }
        if sys.modes[mode].detuned && o < top {
            pending[o + 1].add_assign(&d.scale(&ctx.sym(Sym::Delta(mode as u8))));
        }
        for (i, ki) in dctx.k.iter().enumerate().skip(1) {
            if o + i > top || ki.is_zero() {
                continue;
            }
            pending[o + i].add_assign(&ki.bracket(&d, classical).scale_gq(&GQ::i()));
        }
        eta[o].add_assign(&d);
    }
    Ok((eta, leak))
}

/// Order-`n` part of the dressed resonant excitation `e^{L_S} A_mode − A_mode`
/// from the generators `s[1..n−1]`, summed over compositions of `n`:
/// `Σ_{i_1+…+i_j = n} (1/j!) {{S^(i_1), {{S^(i_2), … {{S^(i_j), A}}…}}}}`.
pub fn dress_resonant<S: Scalar>(s: &[PhasePolynomial<S>], mode: usize, n: usize, classical: bool) -> PhasePolynomial<S> {
    let mut memo = BTreeMap::new();
    let mut count = 0;
    dress_resonant_memo(s, mode, n, classical, &mut memo, &mut count)
}

type NestMemo<S> = BTreeMap<(usize, Vec<usize>), PhasePolynomial<S>>;

fn nested<S: Scalar>(
    s: &[PhasePolynomial<S>],
    mode: usize,
    comp: &[usize],
    classical: bool,
    memo: &mut NestMemo<S>,
    count: &mut usize,
) -> PhasePolynomial<S> {
    let modes = s[0].modes();
    if comp.is_empty() {
        return PhasePolynomial::var(modes, mode);
    }
    let key = (mode, comp.to_vec());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let inner = nested(s, mode, &comp[1..], classical, memo, count);
    let v = if inner.is_zero() || s[comp[0]].is_zero() {
        PhasePolynomial::zero(modes)
    } else {
        *count += 1;
        s[comp[0]].bracket(&inner, classical)
    };
    memo.insert(key, v.clone());
    v
}

fn compositions(n: usize, max_part: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return alloc::vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=max_part.min(n) {
        for mut rest in compositions(n - first, max_part) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn dress_resonant_memo<S: Scalar>(
    s: &[PhasePolynomial<S>],
    mode: usize,
    n: usize,
    classical: bool,
    memo: &mut NestMemo<S>,
    count: &mut usize,
) -> PhasePolynomial<S> {
    let modes = s[0].modes();
    let mut total = PhasePolynomial::zero(modes);
    if n < 2 {
        return total;
    }
    let max_part = (n - 1).min(s.len().saturating_sub(1));
    for comp in compositions(n, max_part) {
        let v = nested(s, mode, &comp, classical, memo, count);
        if v.is_zero() {
            continue;
        }
        total.add_assign(&v.scale_gq(&GQ::real(q(1, factorial(comp.len() as u32)))));
    }
    total
}

/// `K` from the static `Γ_k` of every mode (antiderivative in `A_k*`,
/// completed to a real function).
pub fn gamma_to_k<S: Scalar>(gammas: &[PhasePolynomial<S>]) -> Result<PhasePolynomial<S>> {
    integrate_wrt_conjugate(gammas)
}

struct Walker<'a, S> {
    classes: &'a [LegClass<S>],
    classical: bool,
    modes: usize,
    products: usize,
}

impl<S: Scalar> Walker<'_, S> {
    /// Sum of the star products over all distinct orderings of the multiset
    /// `counts` (class index → multiplicity), starting from `prefix`.
    fn ordered_sum(&mut self, prefix: &PhasePolynomial<S>, counts: &mut [(usize, usize)], left: usize, acc: &mut PhasePolynomial<S>) {
        if left == 0 {
            acc.add_assign(prefix);
            return;
        }
        for i in 0..counts.len() {
            if counts[i].1 == 0 {
                continue;
            }
            counts[i].1 -= 1;
            self.products += 1;
            let next = prefix.star(&self.classes[counts[i].0].value, self.classical);
            if !next.is_zero() {
                self.ordered_sum(&next, counts, left - 1, acc);
            }
            counts[i].1 += 1;
        }
    }

    /// Sum over orderings for a multiset given as a sorted index list.
    fn multiset_value(&mut self, ids: &[usize]) -> PhasePolynomial<S> {
        let mut counts: Vec<(usize, usize)> = Vec::new();
        for &c in ids {
            match counts.last_mut() {
                Some((last, n)) if *last == c => *n += 1,
                _ => counts.push((c, 1)),
            }
        }
        let one = PhasePolynomial::constant(self.modes, S::one());
        if self.classical {
            // Commutative products: one product times the multinomial count.
            let mut p = one;
            for &c in ids {
                self.products += 1;
                p = p.star(&self.classes[c].value, true);
            }
            let mut mult = factorial(ids.len() as u32);
            for (_, n) in &counts {
                mult /= factorial(*n as u32);
            }
            return p.scale_gq(&GQ::int(mult));
        }
        let mut acc = PhasePolynomial::zero(self.modes);
        self.ordered_sum(&one, &mut counts, ids.len(), &mut acc);
        acc
    }
}

/// Calls `visit` on every nondecreasing list of `len` class indices whose
/// orders sum to `total` (classes must be sorted by order).
fn for_each_multiset<S>(classes: &[LegClass<S>], len: usize, total: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec<S>(
        classes: &[LegClass<S>],
        start: usize,
        len: usize,
        total: usize,
        cur: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if len == 0 {
            if total == 0 {
                visit(cur);
            }
            return;
        }
        for c in start..classes.len() {
            let o = classes[c].order;
            // Later picks have order ≥ o.
            if o * len > total {
                break;
            }
            cur.push(c);
            rec(classes, c, len - 1, total - o, cur, visit);
            cur.pop();
        }
    }
    let mut cur = Vec::with_capacity(len);
    rec(classes, 0, len, total, &mut cur, visit);
}

/// Solves for `K` and `η` through `order` by diagram-class enumeration.
pub fn solve<S: Scalar, C: Ctx<S>>(sys: &FramedSystem, ctx: &C, order: usize) -> Result<EngineSolution<S>> {
    sys.validate()?;
    let modes = sys.n_modes();
    let classical = ctx.classical();
    let z = || PhasePolynomial::<S>::zero(modes);
    let mut sol = EngineSolution {
        k: alloc::vec![z()],
        eta_rot: (0..modes).map(|_| alloc::vec![z()]).collect(),
        eta_sta: (0..modes).map(|_| alloc::vec![z()]).collect(),
        mixer_raw: (0..modes).map(|_| alloc::vec![z()]).collect(),
        s: alloc::vec![z()],
        stats: EngineStats::default(),
    };
    // External excitations.
    let mut classes: Vec<LegClass<S>> = Vec::new();
    for k in 0..modes {
        for leg in [Leg::A(k as u8), Leg::Ac(k as u8)] {
            classes.push(LegClass { order: 0, value: leg.value(sys, ctx, true) });
        }
    }
    for l in 0..sys.tones {
        for leg in [Leg::Xi(l as u8), Leg::XiC(l as u8)] {
            classes.push(LegClass { order: 0, value: leg.value(sys, ctx, true) });
        }
    }
    let mut memo: NestMemo<S> = BTreeMap::new();
    for n in 1..=order {
        // Bare mixer outputs (identical for every receiving mode up to λ_k g_m e^{iω_k′t}).
        let mut per_rank: Vec<(u8, PhasePolynomial<S>)> = Vec::new();
        let mut walker = Walker { classes: &classes, classical, modes, products: 0 };
        let mut multisets = 0usize;
        for &m in &sys.ranks {
            let mu = m as usize;
            if mu - 2 > n {
                continue;
            }
            let mut y = z();
            for_each_multiset(&classes, mu - 1, n - (mu - 2), &mut |ids| {
                multisets += 1;
                y.add_assign(&walker.multiset_value(ids));
            });
            if !y.is_zero() {
                per_rank.push((m, y));
            }
        }
        sol.stats.multisets += multisets;
        sol.stats.products += walker.products;
        let mut gammas = Vec::with_capacity(modes);
        let mut rots = Vec::with_capacity(modes);
        let mut stas = Vec::with_capacity(modes);
        let mut rem_rots = Vec::with_capacity(modes);
        for k in 0..modes {
            let lam = lambda(sys, ctx, k);
            let frame = sys.modes[k].frame;
            let mut raw = z();
            for (m, y) in &per_rank {
                raw.add_assign(&y.shift_phase(&frame).scale(&ctx.sym(Sym::G(*m)).mul(&lam)));
            }
            let mut rhs = raw.clone();
            sol.mixer_raw[k].push(raw);
            // Two-wave δ mixer on the resonant excitation or a lower-order η.
            if sys.modes[k].detuned {
                let prev = if n == 1 { PhasePolynomial::var(modes, k) } else { sol.eta(k, n - 1) };
                rhs.add_assign(&prev.scale(&ctx.sym(Sym::Delta(k as u8))));
            }
            // Frequency dressing by the slow dynamics: i{{K^(i), η^(n−i)}}.
            for i in 1..n {
                let e = sol.eta(k, n - i);
                if e.is_zero() || sol.k[i].is_zero() {
                    continue;
                }
                rhs.add_assign(&sol.k[i].bracket(&e, classical).scale_gq(&GQ::i()));
            }
            let rem = dress_resonant_memo(&sol.s, k, n, classical, &mut memo, &mut sol.stats.resonant_terms);
            let (rem_sta, rem_rot) = rem.split(|f| sys.is_static(f));
            let (rhs_sta, rhs_rot) = rhs.split(|f| sys.is_static(f));
            let mut gamma = rhs_sta;
            for f in rem_sta.phases() {
                if !f.is_zero() {
                    gamma.add_assign(&rem_sta.filter(|key| key.phase == f).scale(&ctx.freq(&f)));
                }
            }
            let mut rot = z();
            for f in rhs_rot.phases() {
                let inv = ctx.inv_freq(&f)?;
                rot.add_assign(&rhs_rot.filter(|key| key.phase == f).scale(&inv.neg()));
            }
            gammas.push(gamma);
            rots.push(rot);
            stas.push(rem_sta);
            rem_rots.push(rem_rot);
        }
        let kn = gamma_to_k(&gammas).map_err(|e| match e {
            CoreError::NotIntegrable(s) => CoreError::NotIntegrable(format!("order {n}: {s}")),
            other => other,
        })?;
        let grads: Vec<_> = (0..modes).map(|k| rots[k].sub(&rem_rots[k]).scale_gq(&-GQ::i())).collect();
        let sn = integrate_wrt_conjugate(&grads).map_err(|e| match e {
            CoreError::NotIntegrable(s) | CoreError::NonHermitian(s) => {
                CoreError::NonHermitian(format!("generator at order {n}: {s}"))
            }
            other => other,
        })?;
        sol.k.push(kn);
        sol.s.push(sn);
        for k in 0..modes {
            let eta = rots[k].add(&stas[k]);
            // New leg classes: one per (mode, phase) of η^(n) and its conjugate.
            if n < order {
                let lam = lambda(sys, ctx, k);
                let leg = eta.shift_phase(&-sys.modes[k].frame).scale(&lam);
                for f in leg.phases() {
                    let v = leg.filter(|key| key.phase == f);
                    classes.push(LegClass { order: n, value: v.conj() });
                    classes.push(LegClass { order: n, value: v });
                }
            }
            sol.eta_rot[k].push(rots[k].clone());
            sol.eta_sta[k].push(stas[k].clone());
        }
        sol.stats.leg_classes = classes.len();
    }
    Ok(sol)
}

/// Leading-order coupling `Ω` of the term `Ω ξ^p A*^q + c.c.` of a single
/// mode driven by a single tone in the frame `ω′ = (p/q) ω_d`, computed by
/// targeted enumeration: only subdiagrams whose external content can end up
/// in `ξ^p A*^q` (or its conjugate, through an inverted output) are built.
///
/// The coupling appears first at order `q + p − 2`, where only bare mixing
/// trees contribute and every contraction is classical. Returns `Ω` without
/// the `ξ^p` factor. `ξ` must be kept as a symbol or set; its value is not used.
pub fn leading_coupling<S: Scalar, C: Ctx<S>>(sys: &FramedSystem, ctx: &C, qq: u8, pp: u8) -> Result<S> {
    if sys.n_modes() != 1 || sys.tones != 1 {
        return Err(CoreError::InvalidInput("targeted couplings need one mode and one tone".into()));
    }
    if qq == 0 || pp == 0 {
        return Err(CoreError::InvalidInput("coupling powers must be positive".into()));
    }
    let frame = sys.modes[0].frame;
    let wd = FrequencyVector::unit(Sym::Wd(0));
    let target_ok = frame.scale(q(qq as i128, 1)) == wd.scale(q(pp as i128, 1));
    if !target_ok {
        return Err(CoreError::InvalidInput(format!("frame {frame} is not resonant with a ({qq}:{pp}) process")));
    }
    // Content (a, a*, x, x*) of a subtree; X[c] is the coefficient of the leg
    // A^a A*^{a*} ξ^x ξ*^{x*} entering a mixer (ξ factors kept implicit).
    type Content = (u8, u8, u8, u8);
    let phase_of = |c: &Content| -> FrequencyVector {
        frame.scale(q(c.1 as i128 - c.0 as i128, 1)) + wd.scale(q(c.3 as i128 - c.2 as i128, 1))
    };
    let allowed = |c: &Content| -> bool {
        // F1: only A* and ξ (bounded by the target); F2: the conjugates.
        (c.0 == 0 && c.3 == 0 && c.1 <= qq && c.2 <= pp) || (c.1 == 0 && c.2 == 0 && c.0 <= qq && c.3 <= pp)
    };
    let add = |a: &Content, b: &Content| -> Content { (a.0 + b.0, a.1 + b.1, a.2 + b.2, a.3 + b.3) };
    let size = |c: &Content| (c.0 + c.1 + c.2 + c.3) as usize;
    let conj = |c: &Content| -> Content { (c.1, c.0, c.3, c.2) };
    let mut x: BTreeMap<Content, S> = BTreeMap::new();
    x.insert((0, 1, 0, 0), S::one());
    x.insert((1, 0, 0, 0), S::one());
    x.insert((0, 0, 1, 0), S::one());
    x.insert((0, 0, 0, 1), S::one());
    let total = qq as usize - 1 + pp as usize;
    let target: Content = (0, qq - 1, pp, 0);
    let mut result = S::zero();
    for s in 2..=total {
        // Star powers X^j restricted to allowed contents of size ≤ s (commutative).
        let mut powers: Vec<BTreeMap<Content, S>> = alloc::vec![x.clone()];
        let max_rank = sys.max_rank() as usize;
        for _ in 2..max_rank {
            let prev = powers.last().cloned().unwrap_or_default();
            let mut next: BTreeMap<Content, S> = BTreeMap::new();
            for (ca, va) in &prev {
                for (cb, vb) in &x {
                    let c = add(ca, cb);
                    if size(&c) > s || !allowed(&c) {
                        continue;
                    }
                    let v = va.mul(vb);
                    let e = next.entry(c).or_insert_with(S::zero);
                    e.add_assign(&v);
                }
            }
            powers.push(next);
        }
        let mut new_entries: Vec<(Content, S)> = Vec::new();
        for (j, pw) in powers.iter().enumerate().skip(1) {
            let m = j as u8 + 2;
            if !sys.ranks.contains(&m) {
                continue;
            }
            let g = ctx.sym(Sym::G(m));
            for (c, v) in pw {
                if size(c) != s {
                    continue;
                }
                new_entries.push((*c, v.mul(&g)));
            }
        }
        // Aggregate T(c) for contents of size s.
        let mut t: BTreeMap<Content, S> = BTreeMap::new();
        for (c, v) in new_entries {
            let e = t.entry(c).or_insert_with(S::zero);
            e.add_assign(&v);
        }
        for (c, v) in t {
            if c == target && s == total {
                result = v.clone();
                continue;
            }
            // Raw output phase (leg phase + frame); propagate if off-resonant.
            let f = phase_of(&c) + frame;
            if f.is_zero() {
                continue;
            }
            let eta = v.mul(&ctx.inv_freq(&f)?).neg();
            for (cc, val) in [(c, eta.clone()), (conj(&c), eta.conj())] {
                if !allowed(&cc) {
                    continue;
                }
                let e = x.entry(cc).or_insert_with(S::zero);
                e.add_assign(&val);
            }
        }
    }
    // Γ = ∂K/∂A* = q Ω ξ^p A*^{q−1}.
    Ok(result.scale(&GQ::real(q(1, qq as i128))))
}
