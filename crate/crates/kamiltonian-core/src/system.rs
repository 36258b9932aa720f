//! Preparation of framed systems from physical specifications.
//!
//! Physical constructors return plain numbers in a caller-chosen frequency unit
//! (GHz throughout the examples, i.e. `E/h` and `ω/2π`). The symbolic
//! [`FramedSystem`] only records *which* symbols are present and the frame
//! frequency of every mode; numeric values are attached through a
//! [`NumericCtx`](crate::scalar::NumericCtx).

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods are only visible when std is linked
use num_traits::Float;

use crate::error::{CoreError, Result};
use crate::freq::FrequencyVector;
use crate::rational::{factorial, q, Q};
use crate::scalar::NumericCtx;
use crate::symbol::{Sym, MAX_MODES, MAX_TONES};

/// How a drive tone couples to the oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    /// `f cos(ω_d t) q̂` (position).
    Position,
    /// `−iΩ_d (a − a†) cos(ω_d t)` (momentum / charge).
    Momentum,
}

/// Frame of one oscillator mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeFrame {
    /// Frame frequency `ω_k′` as a frequency vector.
    pub frame: FrequencyVector,
    /// Whether the detuning `δ_k` is kept as a symbol (order one).
    pub detuned: bool,
}

/// Symbolic description of the transformed (displaced, rotating) Hamiltonian.
///
/// The forcing on mode `k` is
/// `F_k = δ_k a_k + λ_k Σ_m g_m e^{iω_k′t} (X)^{m−1}_⋆` with
/// `X = Σ_j λ_j (a_j e^{−iω_j′t} + c.c.) + Σ_l (ξ_l e^{−iω_l t} + c.c.)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FramedSystem {
    /// Mode frames.
    pub modes: Vec<ModeFrame>,
    /// Number of drive tones (tone `l` has frequency symbol `Wd(l)`).
    pub tones: usize,
    /// Ranks `m` with a non-zero `g_m`.
    pub ranks: Vec<u8>,
    /// Whether participation factors `λ_k` appear (multi-mode problems).
    pub participation: bool,
    /// Phase vectors treated as static (slow-evolving frames).
    pub slow: Vec<FrequencyVector>,
}

impl FramedSystem {
    /// Single mode, single tone, frame `ω_o′ = (p/q) ω_d`.
    pub fn single(q_: i128, p: i128, ranks: &[u8], detuned: bool) -> Self {
        FramedSystem {
            modes: alloc::vec![ModeFrame {
                frame: FrequencyVector::of(Sym::Wd(0), q(p, q_)),
                detuned
            }],
            tones: 1,
            ranks: ranks.to_vec(),
            participation: false,
            slow: Vec::new(),
        }
    }

    /// Single mode with an independent frame frequency `ω_o′` (generic detuning).
    pub fn generic(ranks: &[u8], detuned: bool) -> Self {
        FramedSystem {
            modes: alloc::vec![ModeFrame { frame: FrequencyVector::unit(Sym::Wf(0)), detuned }],
            tones: 1,
            ranks: ranks.to_vec(),
            participation: false,
            slow: Vec::new(),
        }
    }

    /// Undriven variant (no tones).
    pub fn undriven(mut self) -> Self {
        self.tones = 0;
        self
    }

    /// Number of modes.
    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Highest nonlinear rank.
    pub fn max_rank(&self) -> u8 {
        self.ranks.iter().copied().max().unwrap_or(2)
    }

    /// Whether phase `f` is static (zero or declared slow).
    pub fn is_static(&self, f: &FrequencyVector) -> bool {
        f.is_zero() || self.slow.iter().any(|s| s == f)
    }

    /// Declares `±(q/p)`-type slow phases given as multiples of `ω_d`.
    pub fn with_slow(mut self, phases: &[Q]) -> Self {
        for c in phases {
            let v = FrequencyVector::of(Sym::Wd(0), *c);
            for w in [v, -v] {
                if !self.slow.contains(&w) && !w.is_zero() {
                    self.slow.push(w);
                }
            }
        }
        self
    }

    /// Validates the basis limits.
    pub fn validate(&self) -> Result<()> {
        if self.modes.is_empty() || self.modes.len() > MAX_MODES {
            return Err(CoreError::InvalidInput(alloc::format!("mode count {} out of range", self.modes.len())));
        }
        if self.tones > MAX_TONES {
            return Err(CoreError::InvalidInput(alloc::format!("tone count {} out of range", self.tones)));
        }
        if self.ranks.iter().any(|&m| m < 3) {
            return Err(CoreError::InvalidInput("nonlinear ranks must be ≥ 3".into()));
        }
        Ok(())
    }
}

/// Parameters of a single Josephson-type oscillator.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillatorParams {
    /// Small-oscillation frequency.
    pub omega: f64,
    /// Zero-point phase spread.
    pub phi_zps: f64,
    /// `(m, g_m)` for `3 ≤ m ≤ rank`, zero entries included.
    pub g: Vec<(u8, f64)>,
    /// Inductive shunt ratio `r = E_L/E_J` (zero for a transmon).
    pub r: f64,
}

impl OscillatorParams {
    /// `g_m` or zero.
    pub fn g(&self, m: u8) -> f64 {
        self.g.iter().find(|(k, _)| *k == m).map(|(_, v)| *v).unwrap_or(0.0)
    }

    /// Ranks with non-zero coefficients.
    pub fn ranks(&self) -> Vec<u8> {
        self.g.iter().filter(|(_, v)| *v != 0.0).map(|(m, _)| *m).collect()
    }

    /// Writes every `g_m` into a numeric context.
    pub fn assign(&self, ctx: &mut NumericCtx) {
        for (m, v) in &self.g {
            ctx.set(Sym::G(*m), *v);
        }
    }
}

fn cosine_coefficients(omega: f64, phi: f64, shunt: f64, rank: u8) -> Vec<(u8, f64)> {
    (3..=rank)
        .map(|m| {
            let v = if m % 2 == 1 {
                0.0
            } else {
                let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
                -sign * omega * phi.powi(m as i32 - 2) / (2.0 * factorial(m as u32 - 1) as f64 * shunt)
            };
            (m, v)
        })
        .collect()
}

/// Transmon: `ω_o = √(8E_J E_C)`, `φ_zps = (2E_C/E_J)^{1/4}`, even `g_m` only.
pub fn transmon_params(e_j: f64, e_c: f64, rank: u8) -> Result<OscillatorParams> {
    if !(e_j > 0.0 && e_c > 0.0) {
        return Err(CoreError::InvalidInput("E_J and E_C must be positive".into()));
    }
    let omega = (8.0 * e_j * e_c).sqrt();
    let phi = (2.0 * e_c / e_j).powf(0.25);
    Ok(OscillatorParams { omega, phi_zps: phi, g: cosine_coefficients(omega, phi, 1.0, rank), r: 0.0 })
}

/// Inductively shunted transmon with `r = E_L/E_J`.
pub fn ist_params(e_j: f64, e_c: f64, e_l: f64, rank: u8) -> Result<OscillatorParams> {
    if !(e_j > 0.0 && e_c > 0.0) || e_l < 0.0 {
        return Err(CoreError::InvalidInput("energies must be positive".into()));
    }
    let r = e_l / e_j;
    let omega = (8.0 * e_c * e_j * (1.0 + r)).sqrt();
    let phi = (2.0 * e_c / (e_j * (1.0 + r))).powf(0.25);
    Ok(OscillatorParams { omega, phi_zps: phi, g: cosine_coefficients(omega, phi, 1.0 + r, rank), r })
}

/// IST energies `(E_J, E_C, E_L)` reproducing a given `ω_o` and `g_4` at shunt ratio `r`.
///
/// Inverts `g_4 = −ω_o φ²/(12(1+r))` and `ω_o² = 8E_C E_J (1+r)` with
/// `φ⁴ = 2E_C/(E_J(1+r))`.
pub fn ist_from_omega_g4(omega: f64, g4: f64, r: f64) -> Result<(f64, f64, f64)> {
    if !(omega > 0.0 && g4 < 0.0 && r >= 0.0) {
        return Err(CoreError::InvalidInput("need ω_o > 0, g_4 < 0, r ≥ 0".into()));
    }
    let phi2 = -12.0 * (1.0 + r) * g4 / omega;
    // φ⁴ = 2E_C / (E_J(1+r)) and ω² = 8 E_C E_J (1+r)  ⇒  E_C = ω φ² / 4.
    let e_c = omega * phi2 / 4.0;
    let e_j = 2.0 * e_c / ((1.0 + r) * phi2 * phi2);
    Ok((e_j, e_c, r * e_j))
}

/// Drive displacement `ξ` from linear response.
pub fn drive_displacement(omega_o: f64, omega_d: f64, amp: f64, coupling: Coupling) -> Result<Complex64> {
    if omega_d == omega_o {
        return Err(CoreError::InvalidInput("drive resonant with the oscillator: divergent displacement".into()));
    }
    Ok(match coupling {
        Coupling::Position => Complex64::new(amp * omega_o / (omega_o * omega_o - omega_d * omega_d), 0.0),
        Coupling::Momentum => Complex64::new(0.0, amp * omega_d / (omega_d * omega_d - omega_o * omega_o)),
    })
}

/// Numeric data of a displaced rotating frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameNumbers {
    /// Drive displacement `ξ`.
    pub xi: Complex64,
    /// Detuning `δ = ω_o − (p/q) ω_d`.
    pub delta: f64,
    /// Frame frequency `(p/q) ω_d`.
    pub frame: f64,
}

/// Displaced frame `a → a e^{−i(p/q)ω_d t} + ξ e^{−iω_d t}` for a (q:p) study.
pub fn displaced_rotating_frame(
    omega_o: f64,
    omega_d: f64,
    amp: f64,
    coupling: Coupling,
    q_: u32,
    p: u32,
) -> Result<FrameNumbers> {
    if q_ == 0 {
        return Err(CoreError::InvalidInput("q must be positive".into()));
    }
    let xi = drive_displacement(omega_o, omega_d, amp, coupling)?;
    let frame = p as f64 * omega_d / q_ as f64;
    Ok(FrameNumbers { xi, delta: omega_o - frame, frame })
}

/// Two-mode (transmon + cavity) normal-mode data.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeParams {
    /// Participation amplitude of the transmon-like mode.
    pub lambda_a: f64,
    /// Participation amplitude of the cavity-like mode.
    pub lambda_c: f64,
    /// Zero-point phase spread `√(ω_a / 2E_J)`.
    pub phi_zps: f64,
    /// `(m, g_m)` with `g_m = (−1)^{1+m/2} ω_a φ^{m−2}/(2(m−1)!)`.
    pub g: Vec<(u8, f64)>,
}

/// Normal-mode participation `λ_i² = P_i ω_i/ω_a` for a junction shared by two modes.
pub fn two_mode_normal(e_j: f64, omega_a: f64, omega_c: f64, p_a: f64, p_c: f64, rank: u8) -> Result<TwoModeParams> {
    if (p_a + p_c - 1.0).abs() > 1e-6 {
        return Err(CoreError::InvalidInput("participations must sum to one".into()));
    }
    if !(e_j > 0.0 && omega_a > 0.0 && omega_c > 0.0) {
        return Err(CoreError::InvalidInput("energies must be positive".into()));
    }
    let phi = (omega_a / (2.0 * e_j)).sqrt();
    Ok(TwoModeParams {
        lambda_a: (p_a * omega_a / omega_a).sqrt(),
        lambda_c: (p_c * omega_c / omega_a).sqrt(),
        phi_zps: phi,
        g: cosine_coefficients(omega_a, phi, 1.0, rank),
    })
}

/// Normal modes of two capacitively coupled oscillators (capacitance-matrix route).
///
/// Given the inverse-capacitance-weighted frequencies `ω_1, ω_2` and a
/// dimensionless coupling `κ` (proportional to `C_g`), returns the normal-mode
/// frequencies and the amplitude `λ_c` with which the second normal mode
/// participates in the first (junction) coordinate. `κ = 0` decouples the modes.
pub fn coupled_normal_modes(w1: f64, w2: f64, kappa: f64) -> (f64, f64, f64) {
    // Dynamical matrix [[w1², κ w1 w2], [κ w1 w2, w2²]].
    let a = w1 * w1;
    let d = w2 * w2;
    let b = kappa * w1 * w2;
    let tr = a + d;
    let disc = ((a - d) * (a - d) + 4.0 * b * b).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    // Eigenvector of the mode closest to w2 (cavity-like), junction component.
    let (lc_eval, wa_eval) = if w2 >= w1 { (l1, l2) } else { (l2, l1) };
    let v = if b == 0.0 { (0.0, 1.0) } else { (b, lc_eval - a) };
    let n = (v.0 * v.0 + v.1 * v.1).sqrt();
    (wa_eval.sqrt(), lc_eval.sqrt(), (v.0 / n).abs())
}

/// Unit-amplitude rescaling of the Duffing coordinate: `c_3 = f c_3′`, `c_4 = f² c_4′`.
pub fn duffing_rescale(f: f64, c3p: f64, c4p: f64) -> Result<(f64, f64)> {
    if f == 0.0 {
        return Err(CoreError::InvalidInput("rescaling factor must be non-zero".into()));
    }
    Ok((f * c3p, f * f * c4p))
}

/// Inverse of [`duffing_rescale`].
pub fn duffing_unscale(f: f64, c3: f64, c4: f64) -> Result<(f64, f64)> {
    if f == 0.0 {
        return Err(CoreError::InvalidInput("rescaling factor must be non-zero".into()));
    }
    Ok((c3 / f, c4 / (f * f)))
}

/// Duffing (`x'' + γx' + x + c_3x² + c_4x³ = 2cos νt`) in oscillator variables.
///
/// With `x = a + a*` and `ω_o = 1` the nonlinear coefficients are
/// `g_3 = c_3/2` and `g_4 = c_4/2`, and the drive displacement is
/// `ξ = 1/(1 − ν² − iγν)`.
pub fn duffing_oscillator(c3: f64, c4: f64, nu: f64, gamma: f64) -> (f64, f64, Complex64) {
    let den = Complex64::new(1.0 - nu * nu, -gamma * nu);
    (c3 / 2.0, c4 / 2.0, Complex64::new(1.0, 0.0) / den)
}

/// Default nonlinearity truncation `q + p + 4` for a (q:p) study.
pub fn default_rank(q_: u32, p: u32) -> u8 {
    (q_ + p + 4).min(u8::MAX as u32) as u8
}

/// Rational `p/q` as an exact frame ratio.
pub fn frame_ratio(q_: u32, p: u32) -> Q {
    q(p as i128, q_ as i128)
}
