//! Exact rational and Gaussian-rational numbers.
//!
//! Every symbolic coefficient in the crate carries a numeric prefactor of the
//! form `re + i·im` with exact rational parts. Fixed-width `i128` ratios are
//! used for speed; the workspace keeps overflow checks enabled so an overflow
//! aborts instead of silently wrapping.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number.
pub type Q = num_rational::Ratio<i128>;

/// Builds the rational `n/d`.
pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

/// Builds the integer rational `n`.
pub fn qi(n: i128) -> Q {
    Q::from_integer(n)
}

/// Converts a rational to the nearest `f64`.
pub fn q_to_f64(x: &Q) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

/// Binomial coefficient `C(n, k)` as an exact integer.
pub fn binomial(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

/// `n!` as an exact integer.
pub fn factorial(n: u32) -> i128 {
    (1..=n as i128).product::<i128>().max(1)
}

/// Falling factorial `n (n-1) … (n-k+1)`.
pub fn falling(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    ((n - k + 1) as i128..=n as i128).product::<i128>().max(1)
}

/// Greatest common divisor helper used for canonicalising linear forms.
pub fn gcd_i128(a: i128, b: i128) -> i128 {
    a.gcd(&b)
}

/// Gaussian rational `re + i·im`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GQ {
    /// Real part.
    pub re: Q,
    /// Imaginary part.
    pub im: Q,
}

impl GQ {
    /// Creates `re + i·im`.
    pub fn new(re: Q, im: Q) -> Self {
        GQ { re, im }
    }

    /// Real rational embedded as a Gaussian rational.
    pub fn real(re: Q) -> Self {
        GQ { re, im: Q::zero() }
    }

    /// Integer embedded as a Gaussian rational.
    pub fn int(n: i128) -> Self {
        GQ::real(qi(n))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GQ { re: Q::zero(), im: Q::one() }
    }

    /// Zero.
    pub fn zero() -> Self {
        GQ::default()
    }

    /// One.
    pub fn one() -> Self {
        GQ::int(1)
    }

    /// Exact zero test.
    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Exact one test.
    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        GQ { re: self.re, im: -self.im }
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Self {
        let n = self.re * self.re + self.im * self.im;
        assert!(!n.is_zero(), "inverse of zero Gaussian rational");
        GQ { re: self.re / n, im: -self.im / n }
    }

    /// Multiplication by the imaginary unit.
    pub fn mul_i(&self) -> Self {
        GQ { re: -self.im, im: self.re }
    }

    /// Scaling by a rational.
    pub fn scale(&self, s: &Q) -> Self {
        GQ { re: self.re * s, im: self.im * s }
    }

    /// Floating-point value.
    pub fn to_c64(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }

    /// True when the imaginary part vanishes.
    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Sign-normalised ordering helper (real part first).
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.re.cmp(&other.re).then(self.im.cmp(&other.im))
    }
}

impl Add for GQ {
    type Output = GQ;
    fn add(self, o: GQ) -> GQ {
        GQ { re: self.re + o.re, im: self.im + o.im }
    }
}

impl<'a> Add<&'a GQ> for &'a GQ {
    type Output = GQ;
    fn add(self, o: &GQ) -> GQ {
        GQ { re: self.re + o.re, im: self.im + o.im }
    }
}

impl AddAssign<&GQ> for GQ {
    fn add_assign(&mut self, o: &GQ) {
        self.re += o.re;
        self.im += o.im;
    }
}

impl SubAssign<&GQ> for GQ {
    fn sub_assign(&mut self, o: &GQ) {
        self.re -= o.re;
        self.im -= o.im;
    }
}

impl Sub for GQ {
    type Output = GQ;
    fn sub(self, o: GQ) -> GQ {
        GQ { re: self.re - o.re, im: self.im - o.im }
    }
}

impl<'a> Sub<&'a GQ> for &'a GQ {
    type Output = GQ;
    fn sub(self, o: &GQ) -> GQ {
        GQ { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for GQ {
    type Output = GQ;
    fn mul(self, o: GQ) -> GQ {
        &self * &o
    }
}

impl<'a> Mul<&'a GQ> for &'a GQ {
    type Output = GQ;
    fn mul(self, o: &GQ) -> GQ {
        if self.im.is_zero() && o.im.is_zero() {
            return GQ::real(self.re * o.re);
        }
        GQ {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

impl Div for GQ {
    type Output = GQ;
    fn div(self, o: GQ) -> GQ {
        &self * &o.inv()
    }
}

impl Neg for GQ {
    type Output = GQ;
    fn neg(self) -> GQ {
        GQ { re: -self.re, im: -self.im }
    }
}

impl<'a> Neg for &'a GQ {
    type Output = GQ;
    fn neg(self) -> GQ {
        GQ { re: -self.re, im: -self.im }
    }
}

impl From<Q> for GQ {
    fn from(q: Q) -> Self {
        GQ::real(q)
    }
}

/// Formats a rational as `n` or `n/d`.
pub fn fmt_q(x: &Q) -> alloc::string::String {
    use alloc::format;
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl fmt::Display for GQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", fmt_q(&self.re)),
            (true, false) => {
                if self.im.is_one() {
                    write!(f, "i")
                } else if (-self.im).is_one() {
                    write!(f, "-i")
                } else {
                    write!(f, "{}i", fmt_q(&self.im))
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                write!(f, "({}{}{}i)", fmt_q(&self.re), sign, fmt_q(&self.im.abs()))
            }
        }
    }
}

impl fmt::Debug for GQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl PartialOrd for GQ {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for GQ {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_key(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinatorics() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(factorial(0), 1);
        assert_eq!(factorial(6), 720);
        assert_eq!(falling(5, 2), 20);
        assert_eq!(falling(5, 0), 1);
        assert_eq!(falling(2, 3), 0);
    }

    #[test]
    fn gaussian_field_ops() {
        let a = GQ::new(q(1, 2), q(3, 4));
        let b = a.inv();
        assert!((&a * &b).is_one());
        assert_eq!(a.mul_i(), &a * &GQ::i());
        assert_eq!(a.conj().conj(), a);
    }
}
