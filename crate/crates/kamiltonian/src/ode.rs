//! Dormand–Prince 5(4) integrator with embedded error control for small
//! autonomous or driven systems `y' = f(t, y)`.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Tolerances and limits of [`Dopri5`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    /// Relative tolerance.
    pub rtol: f64,
    /// Absolute tolerance.
    pub atol: f64,
    /// Abort when any component exceeds this magnitude.
    pub blowup: f64,
    /// Maximum accepted + rejected steps per call.
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-10, atol: 1e-12, blowup: 1e8, max_steps: 50_000_000 }
    }
}

/// Adaptive Dormand–Prince 5(4) stepper over `N`-component states.
pub struct Dopri5<F, const N: usize> {
    f: F,
    tol: Tolerance,
    h: f64,
    /// Steps accepted so far.
    pub accepted: usize,
    /// Steps rejected so far.
    pub rejected: usize,
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])], h: f64) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl<F: FnMut(f64, &[f64; N]) -> [f64; N], const N: usize> Dopri5<F, N> {
    /// New integrator for `y' = f(t, y)`.
    pub fn new(f: F, tol: Tolerance) -> Self {
        Dopri5 { f, tol, h: 0.0, accepted: 0, rejected: 0 }
    }

    /// Integrates from `(t0, y0)` to `t1` (either direction) and returns `y(t1)`.
    pub fn integrate(&mut self, t0: f64, y0: [f64; N], t1: f64) -> Result<[f64; N]> {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(y0);
        }
        let dir = span.signum();
        let mut t = t0;
        let mut y = y0;
        let mut k1 = (self.f)(t, &y);
        if self.h == 0.0 || self.h.abs() > span.abs() {
            self.h = 1e-3 * span.abs().max(1e-12);
        }
        let mut h = self.h.abs() * dir;
        let mut steps = 0usize;
        loop {
            if (t1 - t) * dir <= 0.0 {
                break;
            }
            let last = (t + h - t1) * dir >= 0.0;
            let hh = if last { t1 - t } else { h };
            steps += 1;
            if steps > self.tol.max_steps {
                return Err(Error::Numeric("ODE step budget exhausted; the trajectory may be stiff or divergent".into()));
            }
            let f = &mut self.f;
            let k2 = f(t + C2 * hh, &axpy(&y, &[(A21, &k1)], hh));
            let k3 = f(t + C3 * hh, &axpy(&y, &[(A31, &k1), (A32, &k2)], hh));
            let k4 = f(t + C4 * hh, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hh));
            let k5 = f(t + C5 * hh, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hh));
            let k6 = f(t + hh, &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hh));
            let y5 = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hh);
            let k7 = f(t + hh, &y5);
            let mut err = 0.0;
            for i in 0..N {
                let e = hh * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.tol.atol + self.tol.rtol * y[i].abs().max(y5[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / N as f64).sqrt();
            if !err.is_finite() {
                // Overflowing trial step: retry with a much smaller one.
                self.rejected += 1;
                h = hh * 0.1;
                if h.abs() <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Numeric("non-finite ODE state; trajectory diverged".into()));
                }
                continue;
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { t1 } else { t + hh };
                y = y5;
                k1 = k7;
                self.accepted += 1;
                if y.iter().any(|v| v.abs() > self.tol.blowup) {
                    return Err(Error::Numeric(format!("trajectory diverged near t = {t}")));
                }
                if !last {
                    h = hh * fac;
                    self.h = h;
                }
            } else {
                self.rejected += 1;
                h = hh * fac.min(1.0);
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_returns_after_one_period() {
        let mut ode = Dopri5::new(|_t, y: &[f64; 2]| [y[1], -y[0]], Tolerance::default());
        let y = ode.integrate(0.0, [1.0, 0.0], 2.0 * std::f64::consts::PI).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn backward_integration_inverts_forward() {
        let mut ode = Dopri5::new(|t: f64, y: &[f64; 1]| [t.cos() * y[0]], Tolerance::default());
        let y1 = ode.integrate(0.0, [1.0], 3.0).unwrap();
        assert!((y1[0] - 3f64.sin().exp()).abs() < 1e-9);
        let y0 = ode.integrate(3.0, y1, 0.0).unwrap();
        assert!((y0[0] - 1.0).abs() < 1e-9);
    }
}
