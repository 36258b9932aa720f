//! Run configuration: physical system, drive, frame and command options.
//!
//! A [`RunConfig`] is read from JSON, overridden by command-line flags,
//! validated before any computation and echoed (as compact JSON) into the
//! metadata header of every output file.

use std::path::Path;

use kamiltonian_core::freq::FrequencyVector;
use kamiltonian_core::rational::Q;
use kamiltonian_core::system::{self, Coupling, FramedSystem, ModeFrame, OscillatorParams};
use kamiltonian_core::Sym;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical system under study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    /// Purely symbolic single mode.
    Symbolic {
        /// Ranks `m ≥ 3` with a non-zero `g_m` (default: every rank up to
        /// `max(4, q + p)`, enough for the leading (q:p) coupling).
        #[serde(default)]
        ranks: Option<Vec<u8>>,
        /// Keep only even ranks (symmetric potential).
        #[serde(default)]
        even: bool,
    },
    /// Oscillator `ω a†a + Σ g_m (a + a†)^m / m` with explicit coefficients.
    Polynomial {
        /// Linear frequency.
        omega: f64,
        /// `[m, g_m]` pairs.
        g: Vec<(u8, f64)>,
    },
    /// Transmon (`E_J`, `E_C`, in the frequency unit of the run).
    Transmon {
        /// Josephson energy.
        e_j: f64,
        /// Charging energy.
        e_c: f64,
        /// Truncation rank of the cosine expansion (default `q + p + 4`).
        #[serde(default)]
        rank: Option<u8>,
    },
    /// Inductively shunted transmon.
    Ist {
        /// Josephson energy.
        e_j: f64,
        /// Charging energy.
        e_c: f64,
        /// Shunt inductive energy.
        e_l: f64,
        /// Truncation rank (default `q + p + 4`).
        #[serde(default)]
        rank: Option<u8>,
    },
    /// Dimensionless Duffing oscillator `x'' + γx' + x + c_3x² + c_4x³ = 2cos νt`.
    Duffing {
        /// Quadratic nonlinearity.
        c3: f64,
        /// Cubic nonlinearity.
        c4: f64,
    },
    /// Junction shared by a transmon-like and a cavity-like normal mode.
    TwoMode {
        /// Josephson energy.
        e_j: f64,
        /// Transmon-like mode frequency.
        omega_a: f64,
        /// Cavity-like mode frequency.
        omega_c: f64,
        /// Inductive participation of the transmon-like mode.
        p_a: f64,
        /// Inductive participation of the cavity-like mode.
        p_c: f64,
        /// Truncation rank (default 6).
        #[serde(default)]
        rank: Option<u8>,
    },
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig::Symbolic { ranks: None, even: false }
    }
}

/// How the drive couples to the oscillator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingConfig {
    /// Flux/position drive.
    Position,
    /// Charge/momentum drive.
    #[default]
    Momentum,
}

impl From<CouplingConfig> for Coupling {
    fn from(c: CouplingConfig) -> Self {
        match c {
            CouplingConfig::Position => Coupling::Position,
            CouplingConfig::Momentum => Coupling::Momentum,
        }
    }
}

/// Drive tone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    /// Number of tones (0 = undriven, 1 = single tone).
    #[serde(default = "one")]
    pub tones: usize,
    /// Drive frequency (`ν` for the Duffing oscillator).
    #[serde(default)]
    pub omega_d: Option<f64>,
    /// Drive strength `|ξ|²`.
    #[serde(default)]
    pub xi2: Option<f64>,
    /// Drive coupling.
    #[serde(default)]
    pub coupling: CouplingConfig,
    /// Damping rate (Duffing oscillator).
    #[serde(default)]
    pub gamma: f64,
}

fn one() -> usize {
    1
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig { tones: 1, omega_d: None, xi2: None, coupling: CouplingConfig::default(), gamma: 0.0 }
    }
}

/// Rotating frame `ω_o′ = (p/q) ω_d` of a (q:p) study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    /// Oscillator quanta of the process.
    #[serde(default = "two")]
    pub q: u32,
    /// Drive quanta of the process.
    #[serde(default = "one_u32")]
    pub p: u32,
    /// Use an independent frame frequency `ω′` instead of `(p/q) ω_d`.
    #[serde(default)]
    pub generic: bool,
    /// Keep the detuning `δ` as a perturbation.
    #[serde(default = "yes")]
    pub detuned: bool,
    /// Additional processes `"q:p"` whose phases are treated as static.
    #[serde(default)]
    pub slow: Vec<String>,
}

fn two() -> u32 {
    2
}

fn one_u32() -> u32 {
    1
}

fn yes() -> bool {
    true
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig { q: 2, p: 1, generic: false, detuned: true, slow: Vec::new() }
    }
}

/// Closed grid `start, …, stop` with `n` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// First value.
    pub start: f64,
    /// Last value.
    pub stop: f64,
    /// Number of points (`≥ 1`).
    pub n: usize,
}

impl Grid {
    /// Grid points.
    pub fn points(&self) -> Vec<f64> {
        if self.n <= 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.start + h * i as f64).collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.n == 0 || !self.start.is_finite() || !self.stop.is_finite() {
            return Err(Error::Input(format!("{what}: grid needs n ≥ 1 and finite bounds")));
        }
        Ok(())
    }
}

/// Options of the `landscape` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeOptions {
    /// Drive-frequency grid.
    pub omega_d: Grid,
    /// Drive-strength grid `|ξ|²`.
    pub xi2: Grid,
    /// Processes `"q:p"`.
    pub processes: Vec<String>,
    /// Rabi-strength floor.
    #[serde(default)]
    pub floor: f64,
    /// Lower state of the resonances.
    #[serde(default)]
    pub start: u32,
}

/// Phase-space distribution of an exported state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseSpaceConfig {
    /// Wigner function.
    Wigner,
    /// Husimi Q function.
    Husimi,
}

/// Export of one Floquet mode on a phase-space grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateExport {
    /// Export the Floquet mode connected to this bare state.
    pub state: usize,
    /// Drive strength `|ξ|²` of the export.
    pub xi2: f64,
    /// Half width of the square grid.
    pub half_width: f64,
    /// Points per axis.
    pub n: usize,
    /// Distribution.
    pub kind: PhaseSpaceConfig,
}

/// Drive-plane grid of an excitation map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatmapOptions {
    /// Drive frequencies.
    pub omega_d: Grid,
    /// Drive strengths `|ξ|²`.
    pub xi2: Grid,
}

/// Options of the `floquet` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FloquetOptions {
    /// Basis truncation (charge `±N_max` or Fock `0..N_max`).
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Static eigenstates kept in the propagation.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Propagator tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Scan in `|ξ|²` at the configured drive frequency.
    #[serde(default)]
    pub scan: Option<Grid>,
    /// Bare states tracked along the scan.
    #[serde(default = "default_states")]
    pub states: Vec<usize>,
    /// Locate the anticrossing of this pair of bare states along the scan.
    #[serde(default)]
    pub gap: Option<[usize; 2]>,
    /// Excitation-probability map.
    #[serde(default)]
    pub heatmap: Option<HeatmapOptions>,
    /// Phase-space export of one mode.
    #[serde(default)]
    pub export: Option<StateExport>,
}

fn default_n_max() -> usize {
    40
}

fn default_levels() -> usize {
    20
}

fn default_tol() -> f64 {
    1e-10
}

fn default_states() -> Vec<usize> {
    (0..6).collect()
}

impl Default for FloquetOptions {
    fn default() -> Self {
        FloquetOptions {
            n_max: default_n_max(),
            levels: default_levels(),
            tol: default_tol(),
            scan: None,
            states: default_states(),
            gap: None,
            heatmap: None,
            export: None,
        }
    }
}

/// Domain-diagram grid in scaled coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainOptions {
    /// Scaled detuning axis.
    pub delta: Grid,
    /// Scaled `g_4` axis.
    pub g4: Grid,
}

/// Basin-portrait grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasinOptions {
    /// Half width of the square `(Q, P)` window.
    pub half_width: f64,
    /// Points per axis.
    pub n: usize,
}

/// Options of the `duffing` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuffingOptions {
    /// Largest `|A|²` searched for steady states (default `1/|c_4|`).
    #[serde(default)]
    pub rho_max: Option<f64>,
    /// Cross-check every node against the periodic orbit of the full equation.
    #[serde(default)]
    pub ode_check: bool,
    /// Basin portrait of the slow flow.
    #[serde(default)]
    pub basins: Option<BasinOptions>,
    /// Domain diagram of the leading-order model.
    #[serde(default)]
    pub domain: Option<DomainOptions>,
}

/// Complete configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Physical system.
    #[serde(default)]
    pub system: SystemConfig,
    /// Drive.
    #[serde(default)]
    pub drive: DriveConfig,
    /// Frame.
    #[serde(default)]
    pub frame: FrameConfig,
    /// Perturbative order (default: first order carrying the frame's coupling).
    #[serde(default)]
    pub order: Option<usize>,
    /// Report this coupling `"q:p"` (effham).
    #[serde(default)]
    pub target_coupling: Option<String>,
    /// Quantum (`ħ` kept) or classical engine.
    #[serde(default)]
    pub classical: bool,
    /// Landscape options.
    #[serde(default)]
    pub landscape: Option<LandscapeOptions>,
    /// Floquet options.
    #[serde(default)]
    pub floquet: Option<FloquetOptions>,
    /// Duffing options.
    #[serde(default)]
    pub duffing: Option<DuffingOptions>,
    /// Output directory (default: current directory).
    #[serde(default)]
    pub out: Option<String>,
    /// Worker threads (default: all cores).
    #[serde(default)]
    pub jobs: Option<usize>,
    /// Seed of randomised checks.
    #[serde(default)]
    pub seed: u64,
    /// Value in hertz of the frequency unit used by the configuration
    /// (default 1e9: energies are `E/h` and frequencies `ω/2π` in GHz).
    #[serde(default = "giga")]
    pub unit_hz: f64,
}

fn giga() -> f64 {
    1e9
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SystemConfig::default(),
            drive: DriveConfig::default(),
            frame: FrameConfig::default(),
            order: None,
            target_coupling: None,
            classical: false,
            landscape: None,
            floquet: None,
            duffing: None,
            out: None,
            jobs: None,
            seed: 0,
            unit_hz: giga(),
        }
    }
}

/// Parses `"q:p"` with positive integers.
pub fn parse_process(s: &str) -> Result<(u32, u32)> {
    let bad = || Error::Input(format!("expected a process of the form q:p, got {s:?}"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let q_: u32 = a.trim().parse().map_err(|_| bad())?;
    let p: u32 = b.trim().parse().map_err(|_| bad())?;
    if q_ == 0 || p == 0 {
        return Err(bad());
    }
    Ok((q_, p))
}

fn positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("{what} must be positive and finite, got {x}")))
    }
}

impl RunConfig {
    /// Reads a JSON configuration.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Parses a JSON configuration.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Input(format!("configuration: {e}")))
    }

    /// Compact single-line JSON echo of the configuration.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).unwrap_or_default()
    }

    /// The (q:p) study `(q, p)`.
    pub fn process(&self) -> (u32, u32) {
        (self.frame.q, self.frame.p)
    }

    /// Checks every field that can be checked without computing.
    pub fn validate(&self) -> Result<()> {
        let (q_, p) = self.process();
        if q_ == 0 || p == 0 {
            return Err(Error::Input("frame q and p must be positive".into()));
        }
        for s in &self.frame.slow {
            parse_process(s)?;
        }
        if let Some(t) = &self.target_coupling {
            parse_process(t)?;
        }
        if self.drive.tones > 1 {
            return Err(Error::Input("at most one drive tone is supported by the command line".into()));
        }
        if let Some(w) = self.drive.omega_d {
            positive(w, "drive frequency")?;
        }
        if let Some(x) = self.drive.xi2 {
            if !(x.is_finite() && x >= 0.0) {
                return Err(Error::Input(format!("drive strength |ξ|² must be non-negative, got {x}")));
            }
        }
        if !(self.drive.gamma.is_finite() && self.drive.gamma >= 0.0) {
            return Err(Error::Input("damping must be non-negative".into()));
        }
        positive(self.unit_hz, "unit_hz")?;
        if self.jobs == Some(0) {
            return Err(Error::Input("jobs must be at least 1".into()));
        }
        match &self.system {
            SystemConfig::Symbolic { ranks, .. } => {
                if ranks.iter().flatten().any(|&m| m < 3) {
                    return Err(Error::Input("nonlinear ranks must be ≥ 3".into()));
                }
            }
            SystemConfig::Polynomial { omega, g } => {
                positive(*omega, "omega")?;
                if g.iter().any(|&(m, v)| m < 3 || !v.is_finite()) {
                    return Err(Error::Input("polynomial coefficients need ranks ≥ 3 and finite values".into()));
                }
            }
            SystemConfig::Transmon { e_j, e_c, .. } => {
                positive(*e_j, "E_J")?;
                positive(*e_c, "E_C")?;
            }
            SystemConfig::Ist { e_j, e_c, e_l, .. } => {
                positive(*e_j, "E_J")?;
                positive(*e_c, "E_C")?;
                positive(*e_l, "E_L")?;
            }
            SystemConfig::Duffing { c3, c4 } => {
                if !(c3.is_finite() && c4.is_finite()) {
                    return Err(Error::Input("Duffing coefficients must be finite".into()));
                }
            }
            SystemConfig::TwoMode { e_j, omega_a, omega_c, p_a, p_c, .. } => {
                positive(*e_j, "E_J")?;
                positive(*omega_a, "omega_a")?;
                positive(*omega_c, "omega_c")?;
                if (p_a + p_c - 1.0).abs() > 1e-6 {
                    return Err(Error::Input("participations must sum to one".into()));
                }
            }
        }
        if let Some(l) = &self.landscape {
            l.omega_d.validate("landscape omega_d")?;
            l.xi2.validate("landscape xi2")?;
            if l.processes.is_empty() {
                return Err(Error::Input("landscape needs at least one process".into()));
            }
            for s in &l.processes {
                parse_process(s)?;
            }
        }
        if let Some(f) = &self.floquet {
            if f.levels < 2 || f.n_max < 2 {
                return Err(Error::Input("floquet needs at least two levels".into()));
            }
            positive(f.tol, "floquet tolerance")?;
            if let Some(g) = &f.scan {
                g.validate("floquet scan")?;
            }
            if let Some(h) = &f.heatmap {
                h.omega_d.validate("heatmap omega_d")?;
                h.xi2.validate("heatmap xi2")?;
            }
            if f.states.iter().chain(f.gap.iter().flatten()).any(|&s| s >= f.levels) {
                return Err(Error::Input("tracked states must be below the number of levels".into()));
            }
            if let Some(e) = &f.export {
                if e.state >= f.levels || e.n == 0 {
                    return Err(Error::Input("state export needs a valid state and a non-empty grid".into()));
                }
                positive(e.half_width, "export half width")?;
            }
        }
        if let Some(d) = &self.duffing {
            if let Some(r) = d.rho_max {
                positive(r, "rho_max")?;
            }
            if let Some(dm) = &d.domain {
                dm.delta.validate("domain delta")?;
                dm.g4.validate("domain g4")?;
            }
            if let Some(b) = &d.basins {
                positive(b.half_width, "basin half width")?;
            }
        }
        Ok(())
    }

    /// Phases (in units of `ω_d`) of the declared slow processes: a term
    /// `A*^q` of a `(q:p)` process rotates at `q ω_o′ − p ω_d`.
    pub fn slow_phases(&self) -> Result<Vec<Q>> {
        let (q0, p0) = self.process();
        let mut out = Vec::new();
        for s in &self.frame.slow {
            let (q_, p) = parse_process(s)?;
            let phase = Q::new(q_ as i128 * p0 as i128, q0 as i128) - Q::from_integer(p as i128);
            if phase == Q::from_integer(0) {
                return Err(Error::Input(format!("process {s} is already static in the {q0}:{p0} frame")));
            }
            out.push(phase);
        }
        Ok(out)
    }

    /// Symbolic framed system for the configured frame, with `ranks`.
    pub fn framed_system(&self, ranks: &[u8]) -> Result<FramedSystem> {
        let (q_, p) = self.process();
        let mut sys = if let SystemConfig::TwoMode { .. } = self.system {
            // Two normal modes sharing the junction, each in its own frame.
            FramedSystem {
                modes: (0..2)
                    .map(|k| ModeFrame { frame: FrequencyVector::unit(Sym::Wf(k)), detuned: self.frame.detuned })
                    .collect(),
                tones: 1,
                ranks: ranks.to_vec(),
                participation: true,
                slow: Vec::new(),
            }
        } else if self.frame.generic {
            FramedSystem::generic(ranks, self.frame.detuned)
        } else {
            FramedSystem::single(q_ as i128, p as i128, ranks, self.frame.detuned)
        };
        if self.drive.tones == 0 {
            sys = sys.undriven();
        }
        let sys = sys.with_slow(&self.slow_phases()?);
        sys.validate()?;
        Ok(sys)
    }

    /// Numeric oscillator parameters, if the system is a numeric single mode.
    pub fn oscillator(&self) -> Result<Option<OscillatorParams>> {
        let (q_, p) = self.process();
        let rank = |r: &Option<u8>| r.unwrap_or_else(|| system::default_rank(q_, p));
        Ok(match &self.system {
            SystemConfig::Symbolic { .. } | SystemConfig::Duffing { .. } | SystemConfig::TwoMode { .. } => None,
            SystemConfig::Polynomial { omega, g } => Some(OscillatorParams {
                omega: *omega,
                phi_zps: 1.0,
                g: g.clone(),
                r: 0.0,
            }),
            SystemConfig::Transmon { e_j, e_c, rank: r } => Some(system::transmon_params(*e_j, *e_c, rank(r))?),
            SystemConfig::Ist { e_j, e_c, e_l, rank: r } => Some(system::ist_params(*e_j, *e_c, *e_l, rank(r))?),
        })
    }

    /// Nonlinear ranks of the configured system.
    pub fn ranks(&self) -> Result<Vec<u8>> {
        Ok(match &self.system {
            SystemConfig::Symbolic { ranks, even } => {
                let (q_, p) = self.process();
                let all = ranks.clone().unwrap_or_else(|| (3..=(q_ + p).clamp(4, 255) as u8).collect());
                all.into_iter().filter(|m| !even || m % 2 == 0).collect()
            }
            SystemConfig::Duffing { c3, c4 } => {
                [(3u8, *c3), (4u8, *c4)].iter().filter(|(_, v)| *v != 0.0).map(|(m, _)| *m).collect()
            }
            SystemConfig::TwoMode { rank, .. } => (3..=rank.unwrap_or(6)).filter(|m| m % 2 == 0).collect(),
            _ => self.oscillator()?.map(|o| o.ranks()).unwrap_or_default(),
        })
    }

    /// Validity warnings (escalated to exit code 4 by `--strict`).
    pub fn warnings(&self) -> Result<Vec<String>> {
        let mut w = Vec::new();
        let (q_, p) = self.process();
        let expanded = matches!(self.system, SystemConfig::Transmon { .. } | SystemConfig::Ist { .. });
        if let Some(osc) = self.oscillator()?.filter(|_| expanded) {
            let top = osc.g.iter().map(|(m, _)| *m).max().unwrap_or(0);
            if top < system::default_rank(q_, p) {
                w.push(format!(
                    "nonlinearity truncated at rank {top}, below the recommended {} for a ({q_}:{p}) study",
                    system::default_rank(q_, p)
                ));
            }
            if osc.g(4).abs() > 0.05 * osc.omega {
                w.push("quartic nonlinearity exceeds 5% of the oscillator frequency".into());
            }
        }
        if let SystemConfig::Transmon { e_j, e_c, .. } = &self.system {
            if e_j / e_c < 20.0 {
                w.push(format!("E_J/E_C = {:.1} is outside the transmon regime", e_j / e_c));
            }
        }
        if let Some(f) = &self.floquet {
            let basis = match self.system {
                SystemConfig::Transmon { .. } => 2 * f.n_max + 1,
                _ => f.n_max + 1,
            };
            if f.levels * 2 > basis {
                w.push(format!("{} propagated levels in a basis of {basis} states: raise n_max", f.levels));
            }
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(RunConfig::from_json(&c.echo()).unwrap(), c);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_json(r#"{"sytem": {}}"#).is_err());
    }

    #[test]
    fn slow_phase_of_a_process() {
        let c = RunConfig::from_json(r#"{"frame": {"q": 2, "p": 1, "slow": ["3:1"]}}"#).unwrap();
        assert_eq!(c.slow_phases().unwrap(), vec![Q::new(1, 2)]);
        let bad = RunConfig::from_json(r#"{"frame": {"q": 2, "p": 1, "slow": ["4:2"]}}"#).unwrap();
        assert!(bad.slow_phases().is_err());
    }

    #[test]
    fn process_parsing() {
        assert_eq!(parse_process("5:3").unwrap(), (5, 3));
        assert!(parse_process("5").is_err());
        assert!(parse_process("0:3").is_err());
    }
}
