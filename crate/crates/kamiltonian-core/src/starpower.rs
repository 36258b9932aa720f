//! Closed-form star powers of linear forms.
//!
//! For `L = αA + βA*` the normal-ordered symbol of the `m`-th operator power is
//! obtained from `e^{tL̂} = :e^{tL}: e^{t²αβħ/2}`:
//!
//! `(L)^m_⋆ = Σ_k m!/(k!(m−2k)!) (αβħ/2)^k L^{m−2k}`, with `L^{m−2k}` the ordinary power.

use crate::error::{CoreError, Result};
use crate::poly::{MonoKey, PhasePolynomial};
use crate::rational::{binomial, factorial, q, GQ};
use crate::scalar::Scalar;

/// `(α A_k + β A_k*)^m_⋆` over `modes` modes.
pub fn star_power_mode<S: Scalar>(alpha: &S, beta: &S, m: i64, k: usize, modes: usize) -> Result<PhasePolynomial<S>> {
    if m < 0 {
        return Err(CoreError::InvalidInput(alloc::format!("negative star power {m}")));
    }
    let m = m as u32;
    let mut out = PhasePolynomial::zero(modes);
    let ab = alpha.mul(beta);
    for kk in 0..=m / 2 {
        let rest = m - 2 * kk;
        // m! / (k! (m−2k)! 2^k)
        let pref = GQ::real(q(factorial(m), factorial(kk) * factorial(rest) * (1i128 << kk)));
        let abk = pow(&ab, kk);
        for j in 0..=rest {
            let c = abk
                .mul(&pow(beta, j))
                .mul(&pow(alpha, rest - j))
                .scale(&pref)
                .scale(&GQ::int(binomial(rest, j)));
            let mut key = MonoKey::one();
            key.pw[k] = (j as u8, (rest - j) as u8);
            key.hbar = kk as u8;
            out.add_term(key, &c);
        }
    }
    Ok(out)
}

/// Single-mode `(αA + βA*)^m_⋆`.
pub fn star_power<S: Scalar>(alpha: &S, beta: &S, m: i64) -> Result<PhasePolynomial<S>> {
    star_power_mode(alpha, beta, m, 0, 1)
}

fn pow<S: Scalar>(x: &S, n: u32) -> S {
    let mut acc = S::one();
    for _ in 0..n {
        acc = acc.mul(x);
    }
    acc
}

/// Iterated star power of an arbitrary polynomial (`m ≥ 0`).
pub fn iterated_star_power<S: Scalar>(f: &PhasePolynomial<S>, m: u32, classical: bool) -> PhasePolynomial<S> {
    let mut acc = PhasePolynomial::constant(f.modes(), S::one());
    for _ in 0..m {
        acc = acc.star(f, classical);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::Coefficient;
    use crate::poly::SymPoly;

    #[test]
    fn square_matches_documented_form() {
        let one = Coefficient::one();
        let p = star_power(&one, &one, 2).unwrap();
        let l = SymPoly::var(1, 0).add(&SymPoly::var_conj(1, 0));
        assert_eq!(p, iterated_star_power(&l, 2, false));
        let mut h = MonoKey::one();
        h.hbar = 1;
        assert_eq!(p.coeff(&h), Coefficient::one());
        assert_eq!(p.coeff(&MonoKey::single(1, 1)), Coefficient::rational(q(2, 1)));
    }

    #[test]
    fn negative_power_rejected() {
        let one = Coefficient::one();
        assert!(star_power(&one, &one, -1).is_err());
    }
}
