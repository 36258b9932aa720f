//! Numeric effective Hamiltonians and what is read off them: reduced
//! matrices over a few Fock states, slow-frame staticisation, Rabi strengths
//! and resonance landscapes over a drive grid.
//!
//! All frequencies share one unit (GHz in the examples). A term of the
//! effective Hamiltonian carrying phase vector `f` oscillates as `e^{i f·t}`,
//! so a reduced-matrix entry is `M_ij e^{i r_ij t}` with a real rate `r_ij`.

use std::collections::BTreeMap;

use kamiltonian_core::effective::{dressed_energy, fock_element, EffectiveHamiltonian};
use kamiltonian_core::poly::set_hbar;
use kamiltonian_core::system::{drive_displacement, Coupling, FramedSystem, OscillatorParams};
use kamiltonian_core::{engine, NumericCtx, Sym, GQ};
use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::floquet::{golden_min, CMat};

type C = Complex64;

/// Numeric effective Hamiltonian through `order`, with `ħ` set to one.
pub fn numeric_k(sys: &FramedSystem, ctx: &NumericCtx, order: usize) -> Result<EffectiveHamiltonian<C>> {
    let sol = engine::solve::<C, _>(sys, ctx, order)?;
    let k = set_hbar(&sol.k_total(), &GQ::one());
    Ok(EffectiveHamiltonian::assemble(&k, sys)?)
}

/// Hermitian matrix of the effective Hamiltonian on a few Fock states.
#[derive(Clone, Debug)]
pub struct ReducedMatrix {
    /// Fock labels of the rows/columns.
    pub states: Vec<u32>,
    /// Amplitudes `M_ij` at `t = 0`.
    pub matrix: CMat,
    /// Oscillation rate of each entry (`M_ij(t) = M_ij e^{i r_ij t}`); zero when static.
    pub rates: Vec<Vec<f64>>,
    /// Which effective-Hamiltonian terms feed each entry.
    pub provenance: Vec<Vec<Vec<String>>>,
    /// Requested pairs without any computed coupling.
    pub warnings: Vec<String>,
}

impl ReducedMatrix {
    /// Plain static matrix with no provenance (e.g. a hand-built model).
    pub fn from_matrix(states: Vec<u32>, matrix: CMat) -> Self {
        let n = states.len();
        ReducedMatrix {
            states,
            matrix,
            rates: vec![vec![0.0; n]; n],
            provenance: vec![vec![Vec::new(); n]; n],
            warnings: Vec::new(),
        }
    }

    /// Whether any entry oscillates.
    pub fn has_slow_phases(&self) -> bool {
        self.rates.iter().flatten().any(|r| *r != 0.0)
    }

    /// Sorted eigenvalues (requires a static matrix).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut e: Vec<f64> = SymmetricEigen::new(self.matrix.clone()).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }
}

/// Builds `⟨i|K|j⟩` on `states`. Diagonal entries are the dressed energies;
/// couplings `Ω A*^{l+k} A^k` contribute `Ω ⟨i|a†^{l+k} a^k|j⟩`. The rate of an
/// entry is the numeric value of the term's phase under `ctx`.
pub fn reduce_subspace(h: &EffectiveHamiltonian<C>, states: &[u32], ctx: &NumericCtx) -> Result<ReducedMatrix> {
    if h.modes != 1 {
        return Err(Error::Input("reduced matrices are defined for single-mode Hamiltonians".into()));
    }
    let mut sorted = states.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != states.len() {
        return Err(Error::Input("duplicate state in the reduced subspace".into()));
    }
    let n = states.len();
    let index: BTreeMap<u32, usize> = states.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let mut m = CMat::zeros(n, n);
    let mut rates = vec![vec![0.0; n]; n];
    let mut prov = vec![vec![Vec::new(); n]; n];
    for (a, &i) in states.iter().enumerate() {
        m[(a, a)] = dressed_energy(h, i);
        let mut seen: Vec<u8> = h.renorm.iter().map(|(k, _)| k.pw[0].0).filter(|&n| n >= 1 && n as u32 <= i).collect();
        seen.dedup();
        prov[a][a] = seen.iter().map(|n| format!("K_{n}")).collect();
    }
    for (key, c) in h.couplings.iter() {
        let (mm, nn) = key.pw[0];
        let rate = key.phase.eval(&ctx.freqs);
        for (b, &j) in states.iter().enumerate() {
            let Some((i, w)) = fock_element(mm as u32, nn as u32, j) else { continue };
            let Some(&a) = index.get(&i) else { continue };
            if a == b {
                continue;
            }
            if !prov[a][b].is_empty() && rates[a][b] != rate {
                return Err(Error::Input(format!("entry ({i},{j}) mixes different slow phases")));
            }
            m[(a, b)] += c * w;
            m[(b, a)] += c.conj() * w;
            rates[a][b] = rate;
            rates[b][a] = -rate;
            let label = format!("{key:?}");
            prov[a][b].push(label.clone());
            prov[b][a].push(format!("conj({label})"));
        }
    }
    let mut warnings = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            if prov[a][b].is_empty() {
                warnings.push(format!("no computed coupling between |{}⟩ and |{}⟩; entry set to zero", states[a], states[b]));
            }
        }
    }
    Ok(ReducedMatrix { states: states.to_vec(), matrix: m, rates, provenance: prov, warnings })
}

/// Removes commensurate slow phases with the diagonal frame
/// `V = diag(e^{iθ_k t})`: if every entry rate satisfies `r_ij = θ_i − θ_j`,
/// then `V†MV + Θ` is static. Entries with inconsistent rates are rejected.
pub fn staticize_slow(r: &ReducedMatrix) -> Result<ReducedMatrix> {
    let n = r.states.len();
    let mut theta: Vec<Option<f64>> = vec![None; n];
    let scale = r.rates.iter().flatten().fold(1.0f64, |a, b| a.max(b.abs()));
    for root in 0..n {
        if theta[root].is_some() {
            continue;
        }
        theta[root] = Some(0.0);
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            let ti = theta[i].unwrap();
            for j in 0..n {
                if i == j || r.provenance[i][j].is_empty() {
                    continue;
                }
                let want = ti - r.rates[i][j];
                match theta[j] {
                    None => {
                        theta[j] = Some(want);
                        stack.push(j);
                    }
                    Some(tj) if (tj - want).abs() > 1e-12 * scale => {
                        return Err(Error::Input(format!(
                            "incommensurate slow phases around |{}⟩–|{}⟩: no static frame exists",
                            r.states[i], r.states[j]
                        )));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    // Gauge: the lowest state keeps its energy.
    let mut out = r.clone();
    for (k, t) in theta.iter().enumerate() {
        out.matrix[(k, k)] += C::new(t.unwrap(), 0.0);
    }
    out.rates = vec![vec![0.0; n]; n];
    Ok(out)
}

/// Splitting of the two eigenvalues whose eigenvectors carry the most weight
/// on the states at positions `a` and `b` of `r`.
pub fn pair_gap(r: &ReducedMatrix, a: usize, b: usize) -> Result<f64> {
    if r.has_slow_phases() {
        return Err(Error::Input("staticize the reduced matrix before extracting gaps".into()));
    }
    let n = r.states.len();
    if a >= n || b >= n || a == b {
        return Err(Error::Input("state pair outside the reduced subspace".into()));
    }
    let eig = SymmetricEigen::new(r.matrix.clone());
    let mut w: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            (v[a].norm_sqr() + v[b].norm_sqr(), eig.eigenvalues[k])
        })
        .collect();
    w.sort_by(|x, y| y.0.total_cmp(&x.0));
    Ok((w[0].1 - w[1].1).abs())
}

/// Rabi strength `Ω^R` = half the minimum splitting of the pair `(a, b)`
/// over a detuning parameter in `[lo, hi]`. A coarse scan of `samples`
/// points brackets the minimum, which golden section then refines to a
/// relative tolerance of `1e-6` of the bracket.
pub fn rabi_strength(
    family: impl Fn(f64) -> Result<ReducedMatrix>,
    a: usize,
    b: usize,
    lo: f64,
    hi: f64,
    samples: usize,
) -> Result<(f64, f64)> {
    let samples = samples.max(3);
    let xs: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
    let gaps = xs.iter().map(|&x| pair_gap(&family(x)?, a, b)).collect::<Result<Vec<f64>>>()?;
    let k = (0..samples).min_by(|&i, &j| gaps[i].total_cmp(&gaps[j])).unwrap();
    if k == 0 || k == samples - 1 {
        return Err(Error::Numeric(format!(
            "gap minimum at the scan edge ({}); move the bracket to enclose the resonance",
            xs[k]
        )));
    }
    let (x, g) = golden_min(xs[k - 1], xs[k + 1], 1e-6 * (hi - lo).abs(), |x| pair_gap(&family(x)?, a, b))?;
    Ok((x, 0.5 * g))
}

/// One sample of a resonance line.
#[derive(Clone, Debug, PartialEq)]
pub struct LinePoint {
    /// Drive frequency at which the resonance condition holds.
    pub omega_d: f64,
    /// Drive strength `|ξ|²`.
    pub xi2: f64,
    /// Rabi strength `|⟨i+q|K|i⟩|`.
    pub rabi: f64,
}

/// Locus of a (q:p) multiphoton resonance in the drive plane.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonanceLine {
    /// Oscillator quanta exchanged.
    pub q: u32,
    /// Drive photons exchanged.
    pub p: u32,
    /// Lower state `i` of the `i ↔ i+q` resonance.
    pub start: u32,
    /// Samples ordered by `|ξ|²`, then `ω_d`.
    pub points: Vec<LinePoint>,
}

/// Drive grid and processes for [`resonance_landscape`].
#[derive(Clone, Debug)]
pub struct LandscapeConfig {
    /// Drive-frequency grid (increasing).
    pub omega_d: Vec<f64>,
    /// Drive-strength grid `|ξ|²`.
    pub xi2: Vec<f64>,
    /// `(q, p)` processes.
    pub processes: Vec<(u32, u32)>,
    /// Engine order; `None` means `q + p − 2`, the first order carrying the coupling.
    pub order: Option<usize>,
    /// Lines are emitted only where the Rabi strength exceeds this floor.
    pub floor: f64,
    /// Lower state of the resonance.
    pub start: u32,
    /// How the drive couples (sets the phase of `ξ`).
    pub coupling: Coupling,
}

/// Numeric effective Hamiltonian of a (q:p) frame at one drive point.
pub fn process_k(osc: &OscillatorParams, q: u32, p: u32, order: usize, omega_d: f64, xi2: f64, coupling: Coupling) -> Result<EffectiveHamiltonian<C>> {
    let sys = FramedSystem::single(q as i128, p as i128, &osc.ranks(), true);
    let mut ctx = NumericCtx::new();
    osc.assign(&mut ctx);
    ctx.set(Sym::Wd(0), omega_d);
    ctx.set(Sym::Delta(0), osc.omega - p as f64 * omega_d / q as f64);
    let unit = drive_displacement(osc.omega, omega_d, 1.0, coupling)?;
    ctx.set_c(Sym::Xi(0), unit / unit.norm() * xi2.sqrt());
    numeric_k(&sys, &ctx, order)
}

/// Rotating-frame mismatch `E_{i+q} − E_i` of a (q:p) resonance and the
/// coupling element `|⟨i+q|K|i⟩|` at one drive point.
pub fn resonance_condition(h: &EffectiveHamiltonian<C>, q: u32, start: u32) -> (f64, f64) {
    let d = (dressed_energy(h, start + q) - dressed_energy(h, start)).re;
    let mut coupling = C::new(0.0, 0.0);
    for (key, c) in h.couplings.iter() {
        let (m, n) = key.pw[0];
        if key.phase.is_zero() && m - n == q as u8 {
            if let Some((_, w)) = fock_element(m as u32, n as u32, start) {
                coupling += c * w;
            }
        }
    }
    (d, coupling.norm())
}

/// Resonance lines `Ẽ_{i+q} − Ẽ_i = p ω_d` over a drive grid. For each
/// `|ξ|²` row the mismatch is sampled on the `ω_d` grid; every sign change
/// is refined by the Illinois variant of regula falsi. Rows run in
/// parallel; the output order is deterministic.
pub fn resonance_landscape(osc: &OscillatorParams, cfg: &LandscapeConfig) -> Result<Vec<ResonanceLine>> {
    if cfg.omega_d.len() < 2 {
        return Err(Error::Input("the drive-frequency grid needs at least two points".into()));
    }
    let even_only = osc.ranks().iter().all(|m| m % 2 == 0);
    let mut lines = Vec::new();
    for &(q, p) in &cfg.processes {
        if q == 0 || p == 0 {
            return Err(Error::Input(format!("invalid process ({q}:{p})")));
        }
        if even_only && (q + p) % 2 == 1 {
            // A parity-symmetric potential cannot mix an odd number of quanta.
            continue;
        }
        let order = cfg.order.unwrap_or((q + p - 2) as usize);
        let rows: Vec<Result<Vec<LinePoint>>> = cfg
            .xi2
            .par_iter()
            .map(|&xi2| {
                let eval = |w: f64| -> Result<(f64, f64)> {
                    Ok(resonance_condition(&process_k(osc, q, p, order, w, xi2, cfg.coupling)?, q, cfg.start))
                };
                let vals = cfg.omega_d.iter().map(|&w| eval(w)).collect::<Result<Vec<_>>>()?;
                let mut pts = Vec::new();
                for k in 0..vals.len() - 1 {
                    let (fa, fb) = (vals[k].0, vals[k + 1].0);
                    if fa == 0.0 || fa.signum() != fb.signum() {
                        let w = illinois(|w| Ok(eval(w)?.0), cfg.omega_d[k], cfg.omega_d[k + 1], fa, fb)?;
                        let rabi = eval(w)?.1;
                        if rabi > cfg.floor {
                            pts.push(LinePoint { omega_d: w, xi2, rabi });
                        }
                    }
                }
                Ok(pts)
            })
            .collect();
        let mut points = Vec::new();
        for r in rows {
            points.extend(r?);
        }
        if !points.is_empty() {
            lines.push(ResonanceLine { q, p, start: cfg.start, points });
        }
    }
    Ok(lines)
}

/// Root of `f` in `[a, b]` given the endpoint values (sign change required).
pub fn illinois(mut f: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<f64> {
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numeric("root is not bracketed".into()));
    }
    let tol = 1e-12 * a.abs().max(b.abs()).max(1e-300);
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() < tol {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < tol {
            return Ok(0.5 * (a + b));
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn illinois_finds_cubic_root() {
        let r = illinois(|x| Ok(x * x * x - 2.0), 0.0, 2.0, -2.0, 6.0).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-11);
    }

    #[test]
    fn fixed_two_level_coupling_is_recovered() {
        let omega = 0.37;
        let family = |x: f64| {
            let m = CMat::from_row_slice(2, 2, &[C::new(x, 0.0), C::new(omega, 0.0), C::new(omega, 0.0), C::new(-x, 0.0)]);
            Ok(ReducedMatrix::from_matrix(vec![0, 1], m))
        };
        let (x, r) = rabi_strength(family, 0, 1, -1.0, 1.3, 11).unwrap();
        assert!(x.abs() < 1e-5);
        assert!((r - omega).abs() < 1e-9);
    }
}
