//! Exact frequency vectors over the fixed symbol basis.

use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use crate::rational::{fmt_q, q_to_f64, Q};
use crate::symbol::{Sym, MAX_FREQS};

/// Rational linear combination of the frequency symbols.
///
/// The zero vector labels static terms; a term carrying phase vector `f`
/// oscillates as `e^{i f·t}`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FrequencyVector(pub [Q; MAX_FREQS]);

impl FrequencyVector {
    /// The zero (static) vector.
    pub fn zero() -> Self {
        FrequencyVector([Q::zero(); MAX_FREQS])
    }

    /// `c · s` for a frequency symbol `s`.
    pub fn of(s: Sym, c: Q) -> Self {
        let mut v = Self::zero();
        let slot = s.freq_slot().expect("frequency symbol expected");
        v.0[slot] = c;
        v
    }

    /// Unit vector along frequency symbol `s`.
    pub fn unit(s: Sym) -> Self {
        Self::of(s, Q::one())
    }

    /// Exact zero test.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Coefficient of frequency symbol `s`.
    pub fn get(&self, s: Sym) -> Q {
        s.freq_slot().map(|i| self.0[i]).unwrap_or_else(Q::zero)
    }

    /// Non-zero entries as `(symbol, coefficient)` pairs in slot order.
    pub fn entries(&self) -> impl Iterator<Item = (Sym, Q)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (Sym::from_freq_slot(i), *c))
    }

    /// Number of non-zero entries.
    pub fn support(&self) -> usize {
        self.0.iter().filter(|c| !c.is_zero()).count()
    }

    /// Multiplication by a rational.
    pub fn scale(&self, c: Q) -> Self {
        let mut v = *self;
        for x in v.0.iter_mut() {
            *x *= c;
        }
        v
    }

    /// First non-zero coefficient (`None` for the zero vector).
    pub fn leading(&self) -> Option<Q> {
        self.0.iter().copied().find(|c| !c.is_zero())
    }

    /// Numeric value given a value for each frequency slot.
    pub fn eval(&self, slots: &[f64; MAX_FREQS]) -> f64 {
        self.0.iter().zip(slots).map(|(c, v)| q_to_f64(c) * v).sum()
    }

    /// Substitutes `s ↦ image` (used to bind a frame frequency to the drive).
    pub fn substitute(&self, s: Sym, image: &FrequencyVector) -> Self {
        let c = self.get(s);
        if c.is_zero() {
            return *self;
        }
        let mut v = *self;
        v.0[s.freq_slot().unwrap()] = Q::zero();
        v + image.scale(c)
    }
}

impl Add for FrequencyVector {
    type Output = Self;
    fn add(mut self, o: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(o.0.iter()) {
            *a += b;
        }
        self
    }
}

impl Sub for FrequencyVector {
    type Output = Self;
    fn sub(mut self, o: Self) -> Self {
        for (a, b) in self.0.iter_mut().zip(o.0.iter()) {
            *a -= b;
        }
        self
    }
}

impl Neg for FrequencyVector {
    type Output = Self;
    fn neg(mut self) -> Self {
        for a in self.0.iter_mut() {
            *a = -*a;
        }
        self
    }
}

impl Mul<Q> for FrequencyVector {
    type Output = Self;
    fn mul(self, c: Q) -> Self {
        self.scale(c)
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (s, c) in self.entries() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            if a.is_one() {
                write!(f, "{s}")?;
            } else {
                write!(f, "{}*{s}", fmt_q(&a))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use alloc::string::ToString;

    #[test]
    fn arithmetic_and_display() {
        let wd = FrequencyVector::unit(Sym::Wd(0));
        let wf = FrequencyVector::unit(Sym::Wf(0));
        let v = wd - wf.scale(q(2, 1));
        assert_eq!(v.to_string(), "wd - 2*wf");
        assert_eq!(v.support(), 2);
        let bound = v.substitute(Sym::Wf(0), &wd.scale(q(1, 2)));
        assert!(bound.is_zero());
    }
}
