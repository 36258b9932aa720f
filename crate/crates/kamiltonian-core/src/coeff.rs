//! Exact symbolic coefficients.
//!
//! A [`Coefficient`] is a finite sum of terms
//! `c · Π s_i^{e_i} · Π_j F_j^{−k_j}` where `c` is a Gaussian rational, the
//! `s_i` are [`Sym`]s (frequency symbols may carry negative exponents) and the
//! `F_j` are propagator linear forms over at least two frequency symbols.
//! Forms are stored normalised (leading coefficient one) and are never
//! expanded: they only cancel against identical forms.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::error::CoreError;
use crate::freq::FrequencyVector;
use crate::rational::{fmt_q, Q, GQ};
use crate::symbol::Sym;

/// Sorted exponent list with no zero entries.
pub type Exps = Vec<(Sym, i32)>;

/// Adds two sorted exponent lists.
pub fn merge_exps(a: &[(Sym, i32)], b: &[(Sym, i32)]) -> Exps {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            core::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                let e = a[i].1 + b[j].1;
                if e != 0 {
                    out.push((a[i].0, e));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn merge_props(
    a: &[(FrequencyVector, u32)],
    b: &[(FrequencyVector, u32)],
) -> Vec<(FrequencyVector, u32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            core::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            core::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            core::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// One product of symbols and propagator factors (without numeric prefactor).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct Term {
    /// Symbol exponents, sorted, no zeros.
    pub params: Exps,
    /// Propagator forms with multiplicities, sorted; each form has support ≥ 2
    /// and leading coefficient one.
    pub props: Vec<(FrequencyVector, u32)>,
}

impl Term {
    /// Product of two terms.
    pub fn mul(&self, o: &Term) -> Term {
        Term {
            params: merge_exps(&self.params, &o.params),
            props: merge_props(&self.props, &o.props),
        }
    }

    /// Perturbative order of the term.
    pub fn order(&self) -> i64 {
        self.params.iter().map(|(s, e)| s.order() as i64 * *e as i64).sum()
    }

    /// Exponent of a symbol.
    pub fn exp(&self, s: Sym) -> i32 {
        self.params.iter().find(|(t, _)| *t == s).map(|(_, e)| *e).unwrap_or(0)
    }

    /// Complex conjugate (structural).
    pub fn conj(&self) -> Term {
        let mut params: Exps = self.params.iter().map(|(s, e)| (s.conj(), *e)).collect();
        params.sort();
        Term { params, props: self.props.clone() }
    }
}

/// Exact symbolic coefficient: a sum of [`Term`]s with Gaussian-rational weights.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coefficient {
    terms: BTreeMap<Term, GQ>,
}

impl Coefficient {
    /// Zero.
    pub fn zero() -> Self {
        Self::default()
    }

    /// Numeric constant.
    pub fn constant(c: GQ) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Term::default(), c);
        }
        Coefficient { terms }
    }

    /// Rational constant.
    pub fn rational(c: Q) -> Self {
        Self::constant(GQ::real(c))
    }

    /// One.
    pub fn one() -> Self {
        Self::constant(GQ::one())
    }

    /// A single symbol.
    pub fn sym(s: Sym) -> Self {
        Self::sym_pow(s, 1)
    }

    /// `s^e` (negative exponents only allowed for frequency symbols).
    pub fn sym_pow(s: Sym, e: i32) -> Self {
        if e == 0 {
            return Self::one();
        }
        Self::monomial(GQ::one(), alloc::vec![(s, e)])
    }

    /// `c · Π s^e` from an exponent list (need not be sorted).
    pub fn monomial(c: GQ, mut params: Exps) -> Self {
        params.sort();
        let mut merged: Exps = Vec::with_capacity(params.len());
        for (s, e) in params {
            match merged.last_mut() {
                Some((t, f)) if *t == s => *f += e,
                _ => merged.push((s, e)),
            }
        }
        merged.retain(|(_, e)| *e != 0);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Term { params: merged, props: Vec::new() }, c);
        }
        Coefficient { terms }
    }

    /// Builds a coefficient from raw terms, merging duplicates.
    pub fn from_terms(it: impl IntoIterator<Item = (Term, GQ)>) -> Self {
        let mut c = Self::zero();
        for (t, w) in it {
            c.add_term(t, &w);
        }
        c
    }

    /// Adds `w · t` in place.
    pub fn add_term(&mut self, t: Term, w: &GQ) {
        if w.is_zero() {
            return;
        }
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(t) {
            Entry::Vacant(v) => {
                v.insert(w.clone());
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += w;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Structural zero test (exact for coefficients without propagator forms).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterator over `(term, weight)` pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Term, &GQ)> {
        self.terms.iter()
    }

    /// Number of terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// True when there are no terms.
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Returns the numeric value when the coefficient is a pure constant.
    pub fn as_constant(&self) -> Option<GQ> {
        match self.terms.len() {
            0 => Some(GQ::zero()),
            1 => {
                let (t, w) = self.terms.iter().next().unwrap();
                (t.params.is_empty() && t.props.is_empty()).then(|| w.clone())
            }
            _ => None,
        }
    }

    /// In-place sum.
    pub fn add_assign(&mut self, o: &Coefficient) {
        for (t, w) in &o.terms {
            self.add_term(t.clone(), w);
        }
    }

    /// In-place difference.
    pub fn sub_assign(&mut self, o: &Coefficient) {
        for (t, w) in &o.terms {
            self.add_term(t.clone(), &-w);
        }
    }

    /// Sum.
    pub fn add(&self, o: &Coefficient) -> Coefficient {
        let mut c = self.clone();
        c.add_assign(o);
        c
    }

    /// Difference.
    pub fn sub(&self, o: &Coefficient) -> Coefficient {
        let mut c = self.clone();
        c.sub_assign(o);
        c
    }

    /// Negation.
    pub fn neg(&self) -> Coefficient {
        self.scale(&GQ::int(-1))
    }

    /// Product.
    pub fn mul(&self, o: &Coefficient) -> Coefficient {
        let mut out = Coefficient::zero();
        for (ta, wa) in &self.terms {
            for (tb, wb) in &o.terms {
                out.add_term(ta.mul(tb), &(wa * wb));
            }
        }
        out
    }

    /// Multiplication by an exact number.
    pub fn scale(&self, c: &GQ) -> Coefficient {
        if c.is_zero() {
            return Coefficient::zero();
        }
        Coefficient {
            terms: self.terms.iter().map(|(t, w)| (t.clone(), w * c)).collect(),
        }
    }

    /// Integer power.
    pub fn pow(&self, n: u32) -> Coefficient {
        let mut acc = Coefficient::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Complex conjugate: conjugates weights and swaps `ξ ↔ ξ*`.
    pub fn conj(&self) -> Coefficient {
        Coefficient::from_terms(self.terms.iter().map(|(t, w)| (t.conj(), w.conj())))
    }

    /// Division by the frequency linear form `f` (a propagator factor).
    ///
    /// Single-symbol forms become negative exponents; other forms are
    /// normalised to leading coefficient one and kept factored.
    pub fn div_freq(&self, f: &FrequencyVector) -> Result<Coefficient, CoreError> {
        let Some(lead) = f.leading() else {
            return Err(CoreError::VanishingDenominator(*f));
        };
        let scale = GQ::real(Q::one() / lead);
        let factor = if f.support() == 1 {
            let (s, _) = f.entries().next().unwrap();
            Term { params: alloc::vec![(s, -1)], props: Vec::new() }
        } else {
            Term { params: Vec::new(), props: alloc::vec![(f.scale(Q::one() / lead), 1)] }
        };
        Ok(Coefficient::from_terms(
            self.terms.iter().map(|(t, w)| (t.mul(&factor), w * &scale)),
        ))
    }

    /// Minimum and maximum perturbative order over the terms.
    pub fn order_range(&self) -> Option<(i64, i64)> {
        let mut it = self.terms.keys().map(Term::order);
        let first = it.next()?;
        Some(it.fold((first, first), |(lo, hi), o| (lo.min(o), hi.max(o))))
    }

    /// Keeps only terms of the given perturbative order.
    pub fn at_order(&self, n: i64) -> Coefficient {
        Coefficient {
            terms: self
                .terms
                .iter()
                .filter(|(t, _)| t.order() == n)
                .map(|(t, w)| (t.clone(), w.clone()))
                .collect(),
        }
    }

    /// True when `conj(self) == self` after expansion.
    pub fn is_real(&self) -> bool {
        self.sub(&self.conj()).is_zero_semantic()
    }

    /// Polynomial numerator obtained by clearing all propagator forms.
    ///
    /// Returned as a map from (possibly negative) exponent lists to weights.
    /// Two coefficients are equal iff the numerator of their difference is empty.
    pub fn cleared_numerator(&self) -> BTreeMap<Exps, GQ> {
        let mut lcd: BTreeMap<FrequencyVector, u32> = BTreeMap::new();
        for t in self.terms.keys() {
            for (f, k) in &t.props {
                let e = lcd.entry(*f).or_insert(0);
                *e = (*e).max(*k);
            }
        }
        let mut out: BTreeMap<Exps, GQ> = BTreeMap::new();
        for (t, w) in &self.terms {
            let mut poly: BTreeMap<Exps, GQ> = BTreeMap::new();
            poly.insert(t.params.clone(), w.clone());
            for (f, kmax) in &lcd {
                let have = t.props.iter().find(|(g, _)| g == f).map(|(_, k)| *k).unwrap_or(0);
                for _ in have..*kmax {
                    poly = mul_linear(&poly, f);
                }
            }
            for (e, w) in poly {
                let slot = out.entry(e).or_insert_with(GQ::zero);
                *slot += &w;
            }
        }
        out.retain(|_, w| !w.is_zero());
        out
    }

    /// Exact zero test that accounts for relations between propagator forms.
    pub fn is_zero_semantic(&self) -> bool {
        if self.terms.keys().all(|t| t.props.is_empty()) {
            return self.is_zero();
        }
        self.cleared_numerator().is_empty()
    }

    /// Exact equality up to rational-function identities.
    pub fn sem_eq(&self, o: &Coefficient) -> bool {
        self.sub(o).is_zero_semantic()
    }

    /// Numeric value under an assignment of every symbol.
    pub fn eval(&self, val: &dyn Fn(Sym) -> Option<Complex64>) -> Result<Complex64, CoreError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, w) in &self.terms {
            let mut x = w.to_c64();
            for (s, e) in &t.params {
                let v = val(*s).ok_or(CoreError::Unassigned(*s))?;
                if *e < 0 && v.norm() == 0.0 {
                    return Err(CoreError::VanishingDenominator(FrequencyVector::unit(*s)));
                }
                x *= v.powi(*e);
            }
            for (f, k) in &t.props {
                let mut fv = Complex64::new(0.0, 0.0);
                for (s, c) in f.entries() {
                    let v = val(s).ok_or(CoreError::Unassigned(s))?;
                    fv += v * crate::rational::q_to_f64(&c);
                }
                if fv.norm() <= 1e-14 * (1.0 + fv.norm()) {
                    return Err(CoreError::VanishingDenominator(*f));
                }
                x /= fv.powi(*k as i32);
            }
            acc += x;
        }
        Ok(acc)
    }

    /// Replaces every occurrence of `s` (non-negative powers only) by `image`.
    pub fn substitute(&self, s: Sym, image: &Coefficient) -> Result<Coefficient, CoreError> {
        let mut out = Coefficient::zero();
        for (t, w) in &self.terms {
            let e = t.exp(s);
            if e == 0 {
                out.add_term(t.clone(), w);
                continue;
            }
            if e < 0 {
                return Err(CoreError::Unsupported("substitution into a negative power"));
            }
            let rest = Term {
                params: t.params.iter().copied().filter(|(u, _)| *u != s).collect(),
                props: t.props.clone(),
            };
            let base = Coefficient::from_terms([(rest, w.clone())]);
            out.add_assign(&base.mul(&image.pow(e as u32)));
        }
        Ok(out)
    }

    /// Groups the coefficient by powers of `s`: `Σ_e s^e · c_e`.
    pub fn collect(&self, s: Sym) -> BTreeMap<i32, Coefficient> {
        let mut out: BTreeMap<i32, Coefficient> = BTreeMap::new();
        for (t, w) in &self.terms {
            let e = t.exp(s);
            let rest = Term {
                params: t.params.iter().copied().filter(|(u, _)| *u != s).collect(),
                props: t.props.clone(),
            };
            out.entry(e).or_default().add_term(rest, w);
        }
        out.retain(|_, c| !c.is_zero());
        out
    }

    /// Human-readable rendering, e.g. `2*g5 - 165/8*g3*g4/wd`.
    pub fn render(&self) -> String {
        alloc::format!("{self}")
    }
}

fn mul_linear(poly: &BTreeMap<Exps, GQ>, f: &FrequencyVector) -> BTreeMap<Exps, GQ> {
    let mut out: BTreeMap<Exps, GQ> = BTreeMap::new();
    for (e, w) in poly {
        for (s, c) in f.entries() {
            let key = merge_exps(e, &[(s, 1)]);
            let slot = out.entry(key).or_insert_with(GQ::zero);
            *slot += &w.scale(&c);
        }
    }
    out.retain(|_, w| !w.is_zero());
    out
}

fn fmt_term(f: &mut fmt::Formatter<'_>, t: &Term, w: &GQ, first: bool) -> fmt::Result {
    // Pull an overall sign out of real weights so sums read `a - b`.
    let (neg, mag) = if w.is_real() && w.re.is_negative() {
        (true, GQ::real(-w.re))
    } else {
        (false, w.clone())
    };
    if first {
        if neg {
            write!(f, "-")?;
        }
    } else {
        write!(f, "{}", if neg { " - " } else { " + " })?;
    }
    let nums: Vec<_> = t.params.iter().filter(|(_, e)| *e > 0).collect();
    let dens: Vec<_> = t.params.iter().filter(|(_, e)| *e < 0).collect();
    let mut wrote = false;
    if !mag.is_one() || nums.is_empty() {
        if mag.is_real() && !mag.re.denom().is_one() && !nums.is_empty() {
            write!(f, "{}", fmt_q(&mag.re))?;
        } else {
            write!(f, "{mag}")?;
        }
        wrote = true;
    }
    for (s, e) in nums {
        if wrote {
            write!(f, "*")?;
        }
        wrote = true;
        if *e == 1 {
            write!(f, "{s}")?;
        } else {
            write!(f, "{s}^{e}")?;
        }
    }
    let nden = dens.len() + t.props.len();
    if nden > 0 {
        write!(f, "/")?;
        if nden > 1 {
            write!(f, "(")?;
        }
        let mut firstd = true;
        for (s, e) in dens {
            if !firstd {
                write!(f, "*")?;
            }
            firstd = false;
            if *e == -1 {
                write!(f, "{s}")?;
            } else {
                write!(f, "{s}^{}", -e)?;
            }
        }
        for (form, k) in &t.props {
            if !firstd {
                write!(f, "*")?;
            }
            firstd = false;
            if *k == 1 {
                write!(f, "({form})")?;
            } else {
                write!(f, "({form})^{k}")?;
            }
        }
        if nden > 1 {
            write!(f, ")")?;
        }
    }
    Ok(())
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (t, w)) in self.terms.iter().enumerate() {
            fmt_term(f, t, w, i == 0)?;
        }
        Ok(())
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<GQ> for Coefficient {
    fn from(c: GQ) -> Self {
        Coefficient::constant(c)
    }
}

impl From<Sym> for Coefficient {
    fn from(s: Sym) -> Self {
        Coefficient::sym(s)
    }
}

/// Convenience: `n/d · Π s^e`.
pub fn cmono(n: i128, d: i128, params: &[(Sym, i32)]) -> Coefficient {
    Coefficient::monomial(GQ::real(Q::new(n, d)), params.to_vec())
}

/// True if the weight of every term is real.
pub fn has_real_weights(c: &Coefficient) -> bool {
    c.terms().all(|(_, w)| w.im.is_zero())
}

impl Coefficient {
    /// `1/(c·s)` convenience for building golden expressions.
    pub fn inv_sym(s: Sym) -> Coefficient {
        Coefficient::sym_pow(s, -1)
    }

    /// True when the coefficient equals one exactly.
    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }
}
