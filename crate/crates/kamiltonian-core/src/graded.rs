//! Polynomials graded by perturbative order.
//!
//! `Graded` stores one [`PhasePolynomial`] per order (index = order). Products
//! are truncated at a caller-supplied maximum order, which keeps the
//! order-by-order solvers from ever materialising unneeded terms.

use alloc::vec::Vec;

use crate::poly::PhasePolynomial;
use crate::scalar::Scalar;

/// Graded polynomial: `parts[n]` holds the order-`n` component.
#[derive(Clone, Debug, PartialEq)]
pub struct Graded<S> {
    /// Components by order.
    pub parts: Vec<PhasePolynomial<S>>,
}

impl<S: Scalar> Graded<S> {
    /// Zero up to (and including) order `max`.
    pub fn zero(modes: usize, max: usize) -> Self {
        Graded { parts: (0..=max).map(|_| PhasePolynomial::zero(modes)).collect() }
    }

    /// Highest stored order.
    pub fn max_order(&self) -> usize {
        self.parts.len() - 1
    }

    /// Number of modes.
    pub fn modes(&self) -> usize {
        self.parts[0].modes()
    }

    /// Component at order `n` (zero beyond the stored range).
    pub fn at(&self, n: usize) -> PhasePolynomial<S> {
        self.parts.get(n).cloned().unwrap_or_else(|| PhasePolynomial::zero(self.modes()))
    }

    /// Truncated star product: orders above `max` are discarded.
    pub fn star(&self, o: &Self, max: usize, classical: bool) -> Self {
        let mut out = Self::zero(self.modes(), max);
        for (a, pa) in self.parts.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            for (b, pb) in o.parts.iter().enumerate() {
                if a + b > max || pb.is_zero() {
                    continue;
                }
                out.parts[a + b].add_assign(&pa.star(pb, classical));
            }
        }
        out
    }

    /// Truncated Husimi bracket.
    pub fn bracket(&self, o: &Self, max: usize, classical: bool) -> Self {
        let mut out = Self::zero(self.modes(), max);
        for (a, pa) in self.parts.iter().enumerate() {
            if pa.is_zero() {
                continue;
            }
            for (b, pb) in o.parts.iter().enumerate() {
                if a + b > max || pb.is_zero() {
                    continue;
                }
                out.parts[a + b].add_assign(&pa.bracket(pb, classical));
            }
        }
        out
    }

    /// In-place sum (extends storage when needed).
    pub fn add_assign(&mut self, o: &Self) {
        while self.parts.len() < o.parts.len() {
            self.parts.push(PhasePolynomial::zero(self.modes()));
        }
        for (n, p) in o.parts.iter().enumerate() {
            self.parts[n].add_assign(p);
        }
    }

    /// Sum of all components.
    pub fn total(&self) -> PhasePolynomial<S> {
        let mut t = PhasePolynomial::zero(self.modes());
        for p in &self.parts {
            t.add_assign(p);
        }
        t
    }
}
