//! Parameter and frequency symbols.
//!
//! Symbols are small `Copy` tags. Frequency symbols (`Wd`, `Wf`) additionally
//! occupy a fixed slot in a [`FrequencyVector`](crate::freq::FrequencyVector):
//! drive tones first, then independent mode frame frequencies.

use core::fmt;

/// Maximum number of oscillator modes handled by one problem instance.
pub const MAX_MODES: usize = 3;
/// Maximum number of drive tones.
pub const MAX_TONES: usize = 2;
/// Number of frequency slots: one per tone plus one per independent mode frame.
pub const MAX_FREQS: usize = MAX_TONES + MAX_MODES;

/// A symbolic parameter.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sym {
    /// Nonlinear mixing coefficient `g_m` (rank `m ≥ 3`).
    G(u8),
    /// Detuning `δ_k = ω_k − ω_k′` of mode `k`.
    Delta(u8),
    /// Participation amplitude `λ_k` of mode `k` in the nonlinear element.
    Lambda(u8),
    /// Drive displacement `ξ_l` of tone `l`.
    Xi(u8),
    /// Conjugate drive displacement `ξ_l*`.
    XiC(u8),
    /// Drive frequency `ω_d` of tone `l`.
    Wd(u8),
    /// Independent frame frequency `ω_k′` of mode `k`.
    Wf(u8),
    /// Free real parameter identified by an ASCII letter (e.g. `r`).
    Param(u8),
}

impl Sym {
    /// Perturbative order carried by one power of the symbol.
    pub fn order(&self) -> u32 {
        match self {
            Sym::G(m) => (*m as u32).saturating_sub(2),
            Sym::Delta(_) => 1,
            _ => 0,
        }
    }

    /// Image under complex conjugation (all symbols are real except `ξ`).
    pub fn conj(&self) -> Sym {
        match *self {
            Sym::Xi(l) => Sym::XiC(l),
            Sym::XiC(l) => Sym::Xi(l),
            s => s,
        }
    }

    /// Whether the symbol is a frequency (may appear in propagators).
    pub fn is_freq(&self) -> bool {
        matches!(self, Sym::Wd(_) | Sym::Wf(_))
    }

    /// Frequency slot index for frequency symbols.
    pub fn freq_slot(&self) -> Option<usize> {
        match *self {
            Sym::Wd(l) if (l as usize) < MAX_TONES => Some(l as usize),
            Sym::Wf(k) if (k as usize) < MAX_MODES => Some(MAX_TONES + k as usize),
            _ => None,
        }
    }

    /// Inverse of [`Sym::freq_slot`].
    pub fn from_freq_slot(slot: usize) -> Sym {
        if slot < MAX_TONES {
            Sym::Wd(slot as u8)
        } else {
            Sym::Wf((slot - MAX_TONES) as u8)
        }
    }

    /// Parses the textual form produced by `Display`.
    pub fn parse(s: &str) -> Option<Sym> {
        fn idx(rest: &str) -> Option<u8> {
            if rest.is_empty() {
                Some(0)
            } else {
                rest.parse().ok()
            }
        }
        if let Some(rest) = s.strip_prefix("g") {
            return rest.parse().ok().map(Sym::G);
        }
        if let Some(rest) = s.strip_prefix("delta") {
            return idx(rest).map(Sym::Delta);
        }
        if let Some(rest) = s.strip_prefix("lambda") {
            return idx(rest).map(Sym::Lambda);
        }
        if let Some(rest) = s.strip_prefix("xic") {
            return idx(rest).map(Sym::XiC);
        }
        if let Some(rest) = s.strip_prefix("xi") {
            return idx(rest).map(Sym::Xi);
        }
        if let Some(rest) = s.strip_prefix("wd") {
            return idx(rest).map(Sym::Wd);
        }
        if let Some(rest) = s.strip_prefix("wf") {
            return idx(rest).map(Sym::Wf);
        }
        if s.len() == 1 && s.as_bytes()[0].is_ascii_alphabetic() {
            return Some(Sym::Param(s.as_bytes()[0]));
        }
        None
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Index 0 is elided so single-mode, single-tone output reads naturally.
        fn sfx(f: &mut fmt::Formatter<'_>, name: &str, i: u8) -> fmt::Result {
            if i == 0 {
                write!(f, "{name}")
            } else {
                write!(f, "{name}{i}")
            }
        }
        match *self {
            Sym::G(m) => write!(f, "g{m}"),
            Sym::Delta(k) => sfx(f, "delta", k),
            Sym::Lambda(k) => sfx(f, "lambda", k),
            Sym::Xi(l) => sfx(f, "xi", l),
            Sym::XiC(l) => sfx(f, "xic", l),
            Sym::Wd(l) => sfx(f, "wd", l),
            Sym::Wf(k) => sfx(f, "wf", k),
            Sym::Param(c) => write!(f, "{}", c as char),
        }
    }
}
