//! Normal-ordered phase-space polynomials and the Husimi star-product algebra.
//!
//! A [`PhasePolynomial`] is a finite sum of monomials
//! `c · ħ^h · Π_k A_k*^{m_k} A_k^{n_k} · e^{i f·t}` keyed by [`MonoKey`].
//! Products use the normal-ordering star product
//! `f ⋆ g = Σ_j ħ^j/j! ∂_A^j f ∂_{A*}^j g`, applied independently per mode.

use alloc::collections::btree_map::{self, BTreeMap};
use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods are only visible when std is linked
use num_traits::Float;

use crate::coeff::Coefficient;
use crate::error::{CoreError, Result};
use crate::freq::FrequencyVector;
use crate::rational::{binomial, factorial, falling, GQ};
use crate::scalar::{NumericCtx, Scalar};
use crate::symbol::MAX_MODES;

/// Monomial label: per-mode powers `(m_k, n_k)` of `(A_k*, A_k)`, phase, and `ħ` power.
///
/// The derived order is lexicographic on (mode powers with starred first,
/// phase, `ħ` power), which fixes the canonical serialisation order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MonoKey {
    /// `(m_k, n_k)` per mode.
    pub pw: [(u8, u8); MAX_MODES],
    /// Oscillation phase vector.
    pub phase: FrequencyVector,
    /// Power of `ħ`.
    pub hbar: u8,
}

impl MonoKey {
    /// The constant monomial `1`.
    pub fn one() -> Self {
        Self::default()
    }

    /// Key with given single-mode powers (mode 0).
    pub fn single(mstar: u8, n: u8) -> Self {
        let mut k = Self::default();
        k.pw[0] = (mstar, n);
        k
    }

    /// Same key with phase replaced.
    pub fn with_phase(mut self, f: FrequencyVector) -> Self {
        self.phase = f;
        self
    }

    /// Total degree in the phase-space variables.
    pub fn degree(&self) -> u32 {
        self.pw.iter().map(|(m, n)| (*m + *n) as u32).sum()
    }

    /// Key of the conjugate monomial.
    pub fn conj(&self) -> Self {
        let mut k = *self;
        for p in k.pw.iter_mut() {
            *p = (p.1, p.0);
        }
        k.phase = -k.phase;
        k
    }

    /// True when no mode carries any `A*` power.
    pub fn unstarred(&self) -> bool {
        self.pw.iter().all(|(m, _)| *m == 0)
    }

    /// True when no mode carries any `A` power.
    pub fn starred_only(&self) -> bool {
        self.pw.iter().all(|(_, n)| *n == 0)
    }
}

impl fmt::Debug for MonoKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.hbar > 0 {
            parts.push(if self.hbar == 1 { format!("hbar") } else { format!("hbar^{}", self.hbar) });
        }
        for (k, (m, n)) in self.pw.iter().enumerate() {
            let sfx = if k == 0 { format!("") } else { format!("{k}") };
            match *m {
                0 => {}
                1 => parts.push(format!("A{sfx}*")),
                m => parts.push(format!("A{sfx}*^{m}")),
            }
            match *n {
                0 => {}
                1 => parts.push(format!("A{sfx}")),
                n => parts.push(format!("A{sfx}^{n}")),
            }
        }
        if !self.phase.is_zero() {
            parts.push(format!("e^(i({})t)", self.phase));
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// Normal-ordered phase-space polynomial with coefficients in `S`.
#[derive(Clone, PartialEq)]
pub struct PhasePolynomial<S> {
    modes: u8,
    terms: BTreeMap<MonoKey, S>,
}

/// Symbolic polynomial.
pub type SymPoly = PhasePolynomial<Coefficient>;
/// Numeric polynomial.
pub type NumPoly = PhasePolynomial<Complex64>;

impl<S: Scalar> PhasePolynomial<S> {
    /// Zero polynomial over `modes` modes.
    pub fn zero(modes: usize) -> Self {
        assert!(modes >= 1 && modes <= MAX_MODES, "mode count out of range");
        PhasePolynomial { modes: modes as u8, terms: BTreeMap::new() }
    }

    /// Constant polynomial.
    pub fn constant(modes: usize, c: S) -> Self {
        Self::monomial(modes, MonoKey::one(), c)
    }

    /// `c · key`.
    pub fn monomial(modes: usize, key: MonoKey, c: S) -> Self {
        let mut p = Self::zero(modes);
        p.add_term(key, &c);
        p
    }

    /// The resonant variable `A_k` with its frame phase `−ω_k′`.
    pub fn a(modes: usize, k: usize, frame: FrequencyVector) -> Self {
        let mut key = MonoKey::one();
        key.pw[k].1 = 1;
        key.phase = -frame;
        Self::monomial(modes, key, S::one())
    }

    /// `A_k` without phase (rotating-frame variable).
    pub fn var(modes: usize, k: usize) -> Self {
        let mut key = MonoKey::one();
        key.pw[k].1 = 1;
        Self::monomial(modes, key, S::one())
    }

    /// `A_k*` without phase.
    pub fn var_conj(modes: usize, k: usize) -> Self {
        let mut key = MonoKey::one();
        key.pw[k].0 = 1;
        Self::monomial(modes, key, S::one())
    }

    /// Number of modes.
    pub fn modes(&self) -> usize {
        self.modes as usize
    }

    /// Number of stored monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Structural emptiness.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True if every coefficient is zero up to ring equality.
    pub fn near_zero(&self) -> bool {
        self.terms.values().all(Scalar::near_zero)
    }

    /// Iterator over monomials in canonical order.
    pub fn iter(&self) -> btree_map::Iter<'_, MonoKey, S> {
        self.terms.iter()
    }

    /// Coefficient of a monomial.
    pub fn get(&self, key: &MonoKey) -> Option<&S> {
        self.terms.get(key)
    }

    /// Coefficient of a monomial or zero.
    pub fn coeff(&self, key: &MonoKey) -> S {
        self.terms.get(key).cloned().unwrap_or_else(S::zero)
    }

    /// Adds `c · key` in place, dropping exact zeros.
    pub fn add_term(&mut self, key: MonoKey, c: &S) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_basis(&self, o: &Self) -> Result<()> {
        if self.modes != o.modes {
            return Err(CoreError::BasisMismatch(format!(
                "operands over {} and {} modes (mode A{} missing on one side)",
                self.modes,
                o.modes,
                self.modes.min(o.modes)
            )));
        }
        Ok(())
    }

    /// In-place sum (panics on basis mismatch; see [`PhasePolynomial::try_add`]).
    pub fn add_assign(&mut self, o: &Self) {
        assert_eq!(self.modes, o.modes, "basis mismatch");
        for (k, c) in &o.terms {
            self.add_term(*k, c);
        }
    }

    /// Checked sum.
    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check_basis(o)?;
        let mut r = self.clone();
        r.add_assign(o);
        Ok(r)
    }

    /// In-place difference.
    pub fn sub_assign(&mut self, o: &Self) {
        assert_eq!(self.modes, o.modes, "basis mismatch");
        for (k, c) in &o.terms {
            self.add_term(*k, &c.neg());
        }
    }

    /// Sum.
    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    /// Difference.
    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.sub_assign(o);
        r
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        self.map_coeffs(|c| c.neg())
    }

    /// Multiplication by a scalar.
    pub fn scale(&self, s: &S) -> Self {
        self.map_coeffs(|c| c.mul(s))
    }

    /// Multiplication by an exact number.
    pub fn scale_gq(&self, s: &GQ) -> Self {
        self.map_coeffs(|c| c.scale(s))
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&S) -> S) -> Self {
        let mut r = Self::zero(self.modes());
        for (k, c) in &self.terms {
            r.add_term(*k, &f(c));
        }
        r
    }

    /// Keeps monomials satisfying `pred`.
    pub fn filter(&self, pred: impl Fn(&MonoKey) -> bool) -> Self {
        PhasePolynomial {
            modes: self.modes,
            terms: self.terms.iter().filter(|(k, _)| pred(k)).map(|(k, c)| (*k, c.clone())).collect(),
        }
    }

    /// Multiplies by `e^{i f t}`.
    pub fn shift_phase(&self, f: &FrequencyVector) -> Self {
        PhasePolynomial {
            modes: self.modes,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| {
                    let mut k = *k;
                    k.phase = k.phase + *f;
                    (k, c.clone())
                })
                .collect(),
        }
    }

    /// Star product with an explicit classical switch (no basis check).
    pub fn star(&self, o: &Self, classical: bool) -> Self {
        let modes = self.modes();
        let mut out = Self::zero(modes);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                let prod = ca.mul(cb);
                if prod.is_zero() {
                    continue;
                }
                contract(ka, kb, modes, classical, 0, &mut |key, w| {
                    out.add_term(key, &prod.scale(&w));
                });
            }
        }
        out
    }

    /// Husimi bracket `{{f, g}} = (f⋆g − g⋆f)/(iħ)`, computed without forming `1/ħ`.
    pub fn bracket(&self, o: &Self, classical: bool) -> Self {
        let modes = self.modes();
        let mut out = Self::zero(modes);
        let minus_i = -GQ::i();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &o.terms {
                let prod = ca.mul(cb);
                if prod.is_zero() {
                    continue;
                }
                // f⋆g contributions with at least one contraction …
                contract(ka, kb, modes, classical, 1, &mut |mut key, w| {
                    key.hbar -= 1;
                    out.add_term(key, &prod.scale(&(&w * &minus_i)));
                });
                // … minus g⋆f contributions.
                contract(kb, ka, modes, classical, 1, &mut |mut key, w| {
                    key.hbar -= 1;
                    out.add_term(key, &prod.scale(&(&w * &GQ::i())));
                });
            }
        }
        out
    }

    /// `∂/∂A_k`.
    pub fn d_a(&self, k: usize) -> Self {
        let mut out = Self::zero(self.modes());
        for (key, c) in &self.terms {
            let n = key.pw[k].1;
            if n > 0 {
                let mut nk = *key;
                nk.pw[k].1 -= 1;
                out.add_term(nk, &c.scale(&GQ::int(n as i128)));
            }
        }
        out
    }

    /// `∂/∂A_k*`.
    pub fn d_astar(&self, k: usize) -> Self {
        let mut out = Self::zero(self.modes());
        for (key, c) in &self.terms {
            let m = key.pw[k].0;
            if m > 0 {
                let mut nk = *key;
                nk.pw[k].0 -= 1;
                out.add_term(nk, &c.scale(&GQ::int(m as i128)));
            }
        }
        out
    }

    /// Structural complex conjugation: swaps `A ↔ A*`, negates phases, conjugates coefficients.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero(self.modes());
        for (k, c) in &self.terms {
            out.add_term(k.conj(), &c.conj());
        }
        out
    }

    /// Splits into (static, rotating) parts; `is_static` decides per phase vector.
    pub fn split(&self, is_static: impl Fn(&FrequencyVector) -> bool) -> (Self, Self) {
        let mut sta = Self::zero(self.modes());
        let mut rot = Self::zero(self.modes());
        for (k, c) in &self.terms {
            if is_static(&k.phase) {
                sta.terms.insert(*k, c.clone());
            } else {
                rot.terms.insert(*k, c.clone());
            }
        }
        (sta, rot)
    }

    /// Sets `ħ = 0`.
    pub fn classical_limit(&self) -> Self {
        self.filter(|k| k.hbar == 0)
    }

    /// Distinct phase vectors present.
    pub fn phases(&self) -> Vec<FrequencyVector> {
        let mut v: Vec<_> = self.terms.keys().map(|k| k.phase).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Monomials with the given phase, phase reset to zero.
    pub fn at_phase(&self, f: &FrequencyVector) -> Self {
        PhasePolynomial {
            modes: self.modes,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.phase == *f)
                .map(|(k, c)| (k.with_phase(FrequencyVector::zero()), c.clone()))
                .collect(),
        }
    }

    /// Reinterprets over a larger mode basis.
    pub fn widen(&self, modes: usize) -> Self {
        assert!(modes >= self.modes() && modes <= MAX_MODES);
        PhasePolynomial { modes: modes as u8, terms: self.terms.clone() }
    }

    /// Maximum `A/A*` degree.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MonoKey::degree).max().unwrap_or(0)
    }
}

/// Enumerates the normal-ordering contractions of monomials `a ⋆ b`.
///
/// Calls `emit(key, weight)` for every contraction vector `j` with `|j| ≥ min_total`,
/// where `weight = Π_k C(n_a,j_k) C(m_b,j_k) j_k!`.
fn contract(
    a: &MonoKey,
    b: &MonoKey,
    modes: usize,
    classical: bool,
    min_total: u32,
    emit: &mut dyn FnMut(MonoKey, GQ),
) {
    let mut base = MonoKey::one();
    base.phase = a.phase + b.phase;
    base.hbar = a.hbar + b.hbar;
    let maxj: [u8; MAX_MODES] = core::array::from_fn(|k| {
        if k < modes {
            a.pw[k].1.min(b.pw[k].0)
        } else {
            0
        }
    });
    let max_total: u32 = if classical { 1 } else { u32::MAX };
    if min_total > 0 && maxj.iter().all(|&x| x == 0) {
        return;
    }
    let mut j = [0u8; MAX_MODES];
    loop {
        let total: u32 = j.iter().map(|&x| x as u32).sum();
        if total >= min_total && (total <= max_total) && (!classical || total <= min_total) {
            let mut key = base;
            let mut w: i128 = 1;
            for k in 0..modes {
                let (ma, na) = a.pw[k];
                let (mb, nb) = b.pw[k];
                let jk = j[k];
                key.pw[k] = (ma + mb - jk, na + nb - jk);
                w *= binomial(na as u32, jk as u32) * binomial(mb as u32, jk as u32) * factorial(jk as u32);
            }
            key.hbar += total as u8;
            emit(key, GQ::int(w));
        }
        // Odometer increment over j ∈ Π [0, maxj_k].
        let mut k = 0;
        loop {
            if k == modes {
                return;
            }
            if j[k] < maxj[k] {
                j[k] += 1;
                break;
            }
            j[k] = 0;
            k += 1;
        }
    }
}

impl<S: fmt::Debug> fmt::Debug for PhasePolynomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c:?})*{k:?}")?;
        }
        Ok(())
    }
}

impl fmt::Display for PhasePolynomial<Coefficient> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Star product with basis check.
pub fn star_product<S: Scalar>(f: &PhasePolynomial<S>, g: &PhasePolynomial<S>) -> Result<PhasePolynomial<S>> {
    f.check_basis(g)?;
    Ok(f.star(g, false))
}

/// Husimi bracket with basis check.
pub fn husimi_bracket<S: Scalar>(f: &PhasePolynomial<S>, g: &PhasePolynomial<S>) -> Result<PhasePolynomial<S>> {
    f.check_basis(g)?;
    Ok(f.bracket(g, false))
}

/// Classical Poisson bracket `(∂_A f ∂_{A*} g − ∂_A g ∂_{A*} f)/i`, summed over modes.
///
/// Implemented with plain commutative products (independent of [`contract`]).
pub fn poisson_bracket<S: Scalar>(f: &PhasePolynomial<S>, g: &PhasePolynomial<S>) -> PhasePolynomial<S> {
    let mut out = PhasePolynomial::zero(f.modes());
    for k in 0..f.modes() {
        let t1 = commutative_product(&f.d_a(k), &g.d_astar(k));
        let t2 = commutative_product(&g.d_a(k), &f.d_astar(k));
        out.add_assign(&t1.sub(&t2).scale_gq(&-GQ::i()));
    }
    out
}

/// Ordinary (commutative) product of phase-space polynomials.
pub fn commutative_product<S: Scalar>(f: &PhasePolynomial<S>, g: &PhasePolynomial<S>) -> PhasePolynomial<S> {
    let mut out = PhasePolynomial::zero(f.modes());
    for (ka, ca) in f.iter() {
        for (kb, cb) in g.iter() {
            let mut key = *ka;
            key.phase = ka.phase + kb.phase;
            key.hbar = ka.hbar + kb.hbar;
            for k in 0..MAX_MODES {
                key.pw[k] = (ka.pw[k].0 + kb.pw[k].0, ka.pw[k].1 + kb.pw[k].1);
            }
            out.add_term(key, &ca.mul(cb));
        }
    }
    out
}

/// Static/rotating split relative to a frame binding.
///
/// `bindings` substitutes frame symbols (e.g. `ω_o′ ↦ (p/q)ω_d`) before the
/// zero test, so phases that vanish only under the frame relation count as static.
pub fn split_static_rotating<S: Scalar>(
    f: &PhasePolynomial<S>,
    bindings: &[(crate::symbol::Sym, FrequencyVector)],
) -> (PhasePolynomial<S>, PhasePolynomial<S>) {
    let bound = |v: &FrequencyVector| bindings.iter().fold(*v, |acc, (s, img)| acc.substitute(*s, img));
    let mut sta = PhasePolynomial::zero(f.modes());
    let mut rot = PhasePolynomial::zero(f.modes());
    for (k, c) in f.iter() {
        let ph = bound(&k.phase);
        let key = k.with_phase(ph);
        if ph.is_zero() {
            sta.add_term(key, c);
        } else {
            rot.add_term(key, c);
        }
    }
    (sta, rot)
}

/// Antiderivative in the conjugate variables, completed to a real function.
///
/// `gammas[k]` is the static `Γ_k = ∂K/∂A_k*`. The result `K` satisfies
/// `∂K/∂A_k* = Γ_k` for every mode and `conj(K) = K`; constants are dropped.
pub fn integrate_wrt_conjugate<S: Scalar>(gammas: &[PhasePolynomial<S>]) -> Result<PhasePolynomial<S>> {
    let modes = gammas.first().map(|g| g.modes()).unwrap_or(1);
    let mut k_poly = PhasePolynomial::zero(modes);
    for (k, g) in gammas.iter().enumerate() {
        for (key, c) in g.iter() {
            let mut t = *key;
            t.pw[k].0 += 1;
            // Each K monomial is generated once, from the first mode carrying an A*.
            if (0..k).any(|j| t.pw[j].0 > 0) {
                continue;
            }
            let m = t.pw[k].0 as i128;
            k_poly.add_term(t, &c.scale(&GQ::real(crate::rational::q(1, m))));
        }
    }
    // Functions of A alone are invisible to ∂/∂A*; reality fixes them.
    let mut completion = PhasePolynomial::zero(modes);
    for (key, c) in k_poly.iter() {
        if key.starred_only() {
            completion.add_term(key.conj(), &c.conj());
        }
    }
    k_poly.add_assign(&completion);
    for (k, g) in gammas.iter().enumerate() {
        let resid = k_poly.d_astar(k).sub(g);
        if !resid.near_zero() {
            return Err(CoreError::NotIntegrable(format!("mode {k}: residual {resid:?}")));
        }
    }
    let herm = k_poly.sub(&k_poly.conj());
    if !herm.near_zero() {
        return Err(CoreError::NonHermitian(format!("K − conj(K) = {herm:?}")));
    }
    Ok(k_poly)
}

/// Numeric substitution; with `hbar = Some(h)` every `ħ^j` becomes `h^j`.
pub fn substitute_numeric(
    f: &SymPoly,
    ctx: &NumericCtx,
    hbar: Option<f64>,
) -> Result<NumPoly> {
    let mut out = NumPoly::zero(f.modes());
    for (k, c) in f.iter() {
        let v = ctx.eval(c)?;
        match hbar {
            Some(h) => {
                let mut key = *k;
                key.hbar = 0;
                out.add_term(key, &(v * h.powi(k.hbar as i32)));
            }
            None => out.add_term(*k, &v),
        }
    }
    Ok(out)
}

/// Collapses the `ħ` power into the coefficient (`ħ = h`).
pub fn set_hbar<S: Scalar>(f: &PhasePolynomial<S>, h: &GQ) -> PhasePolynomial<S> {
    let mut out = PhasePolynomial::zero(f.modes());
    for (k, c) in f.iter() {
        let mut key = *k;
        key.hbar = 0;
        let mut w = GQ::one();
        for _ in 0..k.hbar {
            w = &w * h;
        }
        out.add_term(key, &c.scale(&w));
    }
    out
}

/// Falling-factorial helper re-exported for matrix elements.
pub fn ladder_weight(n: u32, k: u32) -> i128 {
    falling(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::cmono;
    use crate::symbol::Sym;

    fn a() -> SymPoly {
        SymPoly::var(1, 0)
    }
    fn ac() -> SymPoly {
        SymPoly::var_conj(1, 0)
    }
    fn hb(c: i128) -> SymPoly {
        let mut k = MonoKey::one();
        k.hbar = 1;
        SymPoly::monomial(1, k, cmono(c, 1, &[]))
    }

    #[test]
    fn basic_products() {
        // A ⋆ A* = A*A + ħ
        let lhs = a().star(&ac(), false);
        let rhs = commutative_product(&ac(), &a()).add(&hb(1));
        assert_eq!(lhs, rhs);
        // A* ⋆ A = A*A
        assert_eq!(ac().star(&a(), false), commutative_product(&ac(), &a()));
    }

    #[test]
    fn bracket_follows_definition() {
        // {{A, A*}} = (ħ)/(iħ) = −i
        let br = a().bracket(&ac(), false);
        assert_eq!(br, SymPoly::constant(1, Coefficient::constant(-GQ::i())));
        // {{A*A, A}} = iA
        let n = commutative_product(&ac(), &a());
        assert_eq!(n.bracket(&a(), false), a().scale_gq(&GQ::i()));
        // {{A*², A²}} = 4iA*A + 2iħ
        let ac2 = ac().star(&ac(), false);
        let a2 = a().star(&a(), false);
        let expect = n.scale_gq(&GQ::int(4).mul_i()).add(&hb(2).scale_gq(&GQ::i()));
        assert_eq!(ac2.bracket(&a2, false), expect);
    }

    #[test]
    fn integrate_kerr_cat_gamma() {
        let xi = Coefficient::sym(Sym::Xi(0));
        let g = ac().scale(&xi.mul(&Coefficient::sym(Sym::G(3))).scale(&GQ::int(2)))
            .add(&a().scale(&Coefficient::sym(Sym::Delta(0))));
        let k = integrate_wrt_conjugate(&[g]).unwrap();
        let expect = ac().star(&ac(), false).scale(&cmono(1, 1, &[(Sym::G(3), 1), (Sym::Xi(0), 1)]))
            .add(&a().star(&a(), false).scale(&cmono(1, 1, &[(Sym::G(3), 1), (Sym::XiC(0), 1)])))
            .add(&commutative_product(&ac(), &a()).scale(&Coefficient::sym(Sym::Delta(0))));
        assert_eq!(k, expect);
    }

    #[test]
    fn basis_mismatch_is_reported() {
        let p1 = SymPoly::var(1, 0);
        let p2 = SymPoly::var(2, 1);
        let err = star_product(&p1, &p2).unwrap_err();
        assert!(matches!(err, CoreError::BasisMismatch(_)));
    }
}
