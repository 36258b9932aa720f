//! Coefficient rings and evaluation contexts.
//!
//! The algebra is generic over a [`Scalar`]: exact symbolic [`Coefficient`]s
//! for golden results, or `Complex64` for numeric high-order runs. A [`Ctx`]
//! supplies the value of every symbol and of every propagator in that ring.

use alloc::collections::BTreeMap;
use core::fmt::Debug;

use num_complex::Complex64;

use crate::coeff::Coefficient;
use crate::error::{CoreError, Result};
use crate::freq::FrequencyVector;
use crate::rational::GQ;
use crate::symbol::{Sym, MAX_FREQS};

/// Commutative ring with conjugation used for polynomial coefficients.
pub trait Scalar: Clone + PartialEq + Debug {
    /// Additive identity.
    fn zero() -> Self;
    /// Embedding of an exact number.
    fn from_gq(c: &GQ) -> Self;
    /// Exact (structural) zero test.
    fn is_zero(&self) -> bool;
    /// Zero test up to the ring's notion of equality (semantic / tolerance).
    fn near_zero(&self) -> bool;
    /// In-place addition.
    fn add_assign(&mut self, o: &Self);
    /// Product.
    fn mul(&self, o: &Self) -> Self;
    /// Multiplication by an exact number.
    fn scale(&self, c: &GQ) -> Self;
    /// Complex conjugation.
    fn conj(&self) -> Self;

    /// Multiplicative identity.
    fn one() -> Self {
        Self::from_gq(&GQ::one())
    }
    /// Negation.
    fn neg(&self) -> Self {
        self.scale(&GQ::int(-1))
    }
    /// In-place subtraction.
    fn sub_assign(&mut self, o: &Self) {
        self.add_assign(&o.neg());
    }
}

impl Scalar for Coefficient {
    fn zero() -> Self {
        Coefficient::zero()
    }
    fn from_gq(c: &GQ) -> Self {
        Coefficient::constant(c.clone())
    }
    fn is_zero(&self) -> bool {
        Coefficient::is_zero(self)
    }
    fn near_zero(&self) -> bool {
        self.is_zero_semantic()
    }
    fn add_assign(&mut self, o: &Self) {
        Coefficient::add_assign(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Coefficient::mul(self, o)
    }
    fn scale(&self, c: &GQ) -> Self {
        Coefficient::scale(self, c)
    }
    fn conj(&self) -> Self {
        Coefficient::conj(self)
    }
    fn neg(&self) -> Self {
        Coefficient::neg(self)
    }
}

/// Absolute tolerance used by numeric zero tests.
pub const NUMERIC_TOL: f64 = 1e-9;

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn from_gq(c: &GQ) -> Self {
        c.to_c64()
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn near_zero(&self) -> bool {
        self.norm() < NUMERIC_TOL
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: &GQ) -> Self {
        self * c.to_c64()
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Supplies symbol values and propagators in a given scalar ring.
pub trait Ctx<S: Scalar> {
    /// Value of a symbol.
    fn sym(&self, s: Sym) -> S;
    /// Propagator `1/f` for a non-zero frequency form.
    fn inv_freq(&self, f: &FrequencyVector) -> Result<S>;
    /// The frequency form `f` itself as a ring element.
    fn freq(&self, f: &FrequencyVector) -> S;
    /// When true, all `ħ`-carrying contractions are dropped.
    fn classical(&self) -> bool {
        false
    }
}

/// Exact symbolic context: symbols stay symbols.
#[derive(Clone, Copy, Debug, Default)]
pub struct SymbolicCtx {
    /// Drop `ħ` contributions (classical limit).
    pub classical: bool,
}

impl SymbolicCtx {
    /// Quantum (full `ħ`) symbolic context.
    pub fn quantum() -> Self {
        SymbolicCtx { classical: false }
    }
}

impl Ctx<Coefficient> for SymbolicCtx {
    fn sym(&self, s: Sym) -> Coefficient {
        Coefficient::sym(s)
    }
    fn inv_freq(&self, f: &FrequencyVector) -> Result<Coefficient> {
        Coefficient::one().div_freq(f)
    }
    fn freq(&self, f: &FrequencyVector) -> Coefficient {
        Coefficient::from_terms(f.entries().map(|(s, c)| {
            (crate::coeff::Term { params: alloc::vec![(s, 1)], props: alloc::vec::Vec::new() }, GQ::real(c))
        }))
    }
    fn classical(&self) -> bool {
        self.classical
    }
}

/// Numeric context: every symbol has a complex value.
#[derive(Clone, Debug, Default)]
pub struct NumericCtx {
    /// Values of non-frequency symbols.
    pub values: BTreeMap<Sym, Complex64>,
    /// Values of the frequency slots.
    pub freqs: [f64; MAX_FREQS],
    /// Drop `ħ` contributions (classical limit).
    pub classical: bool,
}

impl NumericCtx {
    /// Empty quantum context.
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns a real value to a symbol (frequency symbols go to their slot).
    pub fn set(&mut self, s: Sym, v: f64) -> &mut Self {
        self.set_c(s, Complex64::new(v, 0.0))
    }

    /// Assigns a complex value to a symbol; `ξ*` is kept consistent with `ξ`.
    pub fn set_c(&mut self, s: Sym, v: Complex64) -> &mut Self {
        if let Some(slot) = s.freq_slot() {
            self.freqs[slot] = v.re;
            return self;
        }
        match s {
            Sym::Xi(_) | Sym::XiC(_) => {
                self.values.insert(s, v);
                self.values.insert(s.conj(), v.conj());
            }
            _ => {
                self.values.insert(s, v);
            }
        }
        self
    }

    /// Value lookup usable by [`Coefficient::eval`].
    pub fn lookup(&self, s: Sym) -> Option<Complex64> {
        if let Some(slot) = s.freq_slot() {
            return Some(Complex64::new(self.freqs[slot], 0.0));
        }
        if let Some(v) = self.values.get(&s) {
            return Some(*v);
        }
        match s {
            // Unset participation ratios default to one (single-mode problems).
            Sym::Lambda(_) => Some(Complex64::new(1.0, 0.0)),
            _ => None,
        }
    }

    /// Evaluates an exact coefficient.
    pub fn eval(&self, c: &Coefficient) -> Result<Complex64> {
        c.eval(&|s| self.lookup(s))
    }
}

impl Ctx<Complex64> for NumericCtx {
    fn sym(&self, s: Sym) -> Complex64 {
        self.lookup(s).unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }
    fn inv_freq(&self, f: &FrequencyVector) -> Result<Complex64> {
        let v = f.eval(&self.freqs);
        let scale = self.freqs.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
        if v.abs() <= 1e-12 * scale {
            return Err(CoreError::VanishingDenominator(*f));
        }
        Ok(Complex64::new(1.0 / v, 0.0))
    }
    fn freq(&self, f: &FrequencyVector) -> Complex64 {
        Complex64::new(f.eval(&self.freqs), 0.0)
    }
    fn classical(&self) -> bool {
        self.classical
    }
}
