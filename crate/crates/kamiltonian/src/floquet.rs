//! Exact Floquet numerics for periodically driven oscillators.
//!
//! Energies are in frequency units (GHz, i.e. `E/h`) and times in ns, so a
//! Hamiltonian `H` generates `e^{−2πi H t}`. A [`TruncatedHamiltonian`] is
//! `H(t) = H_0 + A cos(2π f_d t) V`; it can be built in the charge basis
//! (transmon, exact cosine) or the Fock basis (inductively shunted or
//! polynomial oscillators). Propagation first moves to the eigenbasis of
//! `H_0` and keeps the lowest `levels` states, then integrates one period with
//! a fourth-order commutator-free Magnus scheme whose step is refined until two
//! successive refinements agree to the requested tolerance.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;
/// Dense complex matrix.
pub type CMat = DMatrix<C>;

/// Basis used to build the static and drive matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// Charge states `n = −N_max..N_max`.
    Charge,
    /// Fock states `0..N_max` of the linearised oscillator.
    Fock,
}

/// `H(t) = h0 + amp cos(2π freq_d t) drive` in a truncated basis.
#[derive(Clone, Debug)]
pub struct TruncatedHamiltonian {
    /// Basis of the matrices.
    pub kind: BasisKind,
    /// Truncation parameter (`N_max`).
    pub n_max: usize,
    /// Static part (Hermitian).
    pub h0: CMat,
    /// Drive operator (Hermitian).
    pub drive: CMat,
    /// Drive frequency `f_d = ω_d/2π`.
    pub freq_d: f64,
    /// Drive amplitude multiplying `drive`.
    pub amp: f64,
}

fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

/// Annihilation operator truncated to `n` Fock states.
pub fn annihilation(n: usize) -> CMat {
    let mut a = zeros(n);
    for k in 1..n {
        a[(k - 1, k)] = C::new((k as f64).sqrt(), 0.0);
    }
    a
}

/// `f(M)` for a Hermitian `M` through its eigendecomposition.
pub fn hermitian_function(m: &CMat, f: impl Fn(f64) -> C) -> CMat {
    let eig = SymmetricEigen::new(m.clone());
    let v = &eig.eigenvectors;
    let d: Vec<C> = eig.eigenvalues.iter().map(|&x| f(x)).collect();
    let mut vd = v.clone();
    for (j, dj) in d.iter().enumerate() {
        vd.column_mut(j).scale_mut(1.0);
        for i in 0..vd.nrows() {
            vd[(i, j)] *= dj;
        }
    }
    vd * v.adjoint()
}

impl TruncatedHamiltonian {
    /// Transmon `4E_C(N − N_g)² − E_J cos φ` with drive operator `N`
    /// (amplitude `E_d`), charge states `−n_max..n_max`.
    pub fn transmon(e_j: f64, e_c: f64, n_g: f64, n_max: usize) -> Self {
        let dim = 2 * n_max + 1;
        let mut h0 = zeros(dim);
        let mut drive = zeros(dim);
        for k in 0..dim {
            let n = k as f64 - n_max as f64;
            h0[(k, k)] = C::new(4.0 * e_c * (n - n_g) * (n - n_g), 0.0);
            drive[(k, k)] = C::new(n, 0.0);
            if k + 1 < dim {
                h0[(k, k + 1)] = C::new(-0.5 * e_j, 0.0);
                h0[(k + 1, k)] = C::new(-0.5 * e_j, 0.0);
            }
        }
        TruncatedHamiltonian { kind: BasisKind::Charge, n_max, h0, drive, freq_d: 0.0, amp: 0.0 }
    }

    /// Inductively shunted transmon `4E_C N² − E_J cos φ + E_L φ²/2` in the
    /// Fock basis of its linear part, drive operator `N`.
    pub fn ist(e_j: f64, e_c: f64, e_l: f64, n_max: usize) -> Self {
        let dim = n_max + 1;
        let phi_zps = (2.0 * e_c / (e_j + e_l)).powf(0.25);
        let omega = (8.0 * e_c * (e_j + e_l)).sqrt();
        let a = annihilation(dim);
        let ad = a.adjoint();
        let phi = (&a + &ad) * C::new(phi_zps, 0.0);
        let n_op = (&a - &ad) * C::new(0.0, -1.0 / (2.0 * phi_zps));
        // Linear part exactly diagonal; the cosine minus its quadratic part
        // is evaluated as a matrix function of the truncated φ.
        let mut h0 = zeros(dim);
        for k in 0..dim {
            h0[(k, k)] = C::new(omega * (k as f64 + 0.5), 0.0);
        }
        let cos_rest = hermitian_function(&phi, |x| C::new(-e_j * (x.cos() - 1.0 + 0.5 * x * x), 0.0));
        h0 += cos_rest;
        TruncatedHamiltonian { kind: BasisKind::Fock, n_max, h0, drive: n_op, freq_d: 0.0, amp: 0.0 }
    }

    /// Polynomial oscillator `ω a†a + Σ_m g_m x^m/m` with `x = a + a†`, drive
    /// operator `−i(a − a†)` (momentum coupling, amplitude `Ω_d`) or `x`.
    pub fn polynomial(omega: f64, g: &[(u8, f64)], n_max: usize, momentum: bool) -> Self {
        let dim = n_max + 1;
        let a = annihilation(dim);
        let ad = a.adjoint();
        let x = &a + &ad;
        let mut h0 = &ad * &a * C::new(omega, 0.0);
        let mut xm = x.clone();
        for m in 2..=g.iter().map(|(m, _)| *m).max().unwrap_or(2) {
            xm = &xm * &x;
            if let Some((_, gm)) = g.iter().find(|(k, _)| *k == m) {
                h0 += &xm * C::new(gm / m as f64, 0.0);
            }
        }
        let drive = if momentum { (&a - &ad) * C::new(0.0, -1.0) } else { x };
        TruncatedHamiltonian { kind: BasisKind::Fock, n_max, h0, drive, freq_d: 0.0, amp: 0.0 }
    }

    /// Sets drive frequency and amplitude.
    pub fn with_drive(mut self, freq_d: f64, amp: f64) -> Self {
        self.freq_d = freq_d;
        self.amp = amp;
        self
    }

    /// Static spectrum (ascending) and eigenvectors.
    pub fn static_eigen(&self) -> (Vec<f64>, CMat) {
        let eig = SymmetricEigen::new(self.h0.clone());
        let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let mut vecs = zeros(self.h0.nrows());
        for (c, &i) in idx.iter().enumerate() {
            let mut col = eig.eigenvectors.column(i).into_owned();
            // Fix the gauge: largest component real positive.
            let (imax, _) = col.iter().enumerate().fold((0, 0.0), |b, (k, z)| if z.norm() > b.1 { (k, z.norm()) } else { b });
            let ph = col[imax] / col[imax].norm();
            col /= ph;
            vecs.set_column(c, &col);
        }
        (vals, vecs)
    }

    /// Restriction to the `levels` lowest eigenstates of `h0`.
    pub fn reduce(&self, levels: usize) -> ReducedProblem {
        let (vals, vecs) = self.static_eigen();
        let l = levels.min(vals.len());
        let basis = vecs.columns(0, l).into_owned();
        let e0 = vals[0];
        let mut h0 = zeros(l);
        for k in 0..l {
            h0[(k, k)] = C::new(vals[k] - e0, 0.0);
        }
        let v = basis.adjoint() * &self.drive * &basis;
        let v = (&v + v.adjoint()) * C::new(0.5, 0.0);
        ReducedProblem { energies: vals[..l].iter().map(|e| e - e0).collect(), h0, drive: v, freq_d: self.freq_d, amp: self.amp }
    }
}

/// Driven problem in the truncated eigenbasis of the static Hamiltonian.
#[derive(Clone, Debug)]
pub struct ReducedProblem {
    /// Static energies relative to the ground state.
    pub energies: Vec<f64>,
    /// Diagonal static Hamiltonian.
    pub h0: CMat,
    /// Drive operator in the eigenbasis.
    pub drive: CMat,
    /// Drive frequency.
    pub freq_d: f64,
    /// Drive amplitude.
    pub amp: f64,
}

/// Result of a one-period propagation.
#[derive(Clone, Debug)]
pub struct Propagation {
    /// `U(t0, t0 + T)`.
    pub u: CMat,
    /// `‖U†U − 1‖_max`.
    pub defect: f64,
    /// Magnus steps used.
    pub steps: usize,
    /// Estimated error (difference between the last two refinements).
    pub error: f64,
}

fn expm_herm(h: &CMat, tau: f64) -> CMat {
    hermitian_function(h, |x| C::from_polar(1.0, -2.0 * PI * x * tau))
}

fn unitarity_defect(u: &CMat) -> f64 {
    let p = u.adjoint() * u;
    let n = p.nrows();
    let mut m: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let want = if i == j { 1.0 } else { 0.0 };
            m = m.max((p[(i, j)] - C::new(want, 0.0)).norm());
        }
    }
    m
}

/// Fixed-step fourth-order commutator-free Magnus propagation over `[t0, t0+T]`.
pub fn propagate_fixed(p: &ReducedProblem, t0: f64, steps: usize) -> CMat {
    let n = p.h0.nrows();
    if p.freq_d == 0.0 {
        return CMat::identity(n, n);
    }
    let period = 1.0 / p.freq_d;
    let h = period / steps as f64;
    let s3 = 3f64.sqrt();
    let (c1, c2) = (0.5 - s3 / 6.0, 0.5 + s3 / 6.0);
    let (a1, a2) = ((3.0 - 2.0 * s3) / 12.0, (3.0 + 2.0 * s3) / 12.0);
    let w = 2.0 * PI * p.freq_d;
    let mut u = CMat::identity(n, n);
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let f1 = p.amp * (w * (t + c1 * h)).cos();
        let f2 = p.amp * (w * (t + c2 * h)).cos();
        // Each exponent is h·(H0/2 + s V) with s = α f1 + β f2.
        let e1 = &p.h0 * C::new(0.5, 0.0) + &p.drive * C::new(a1 * f1 + a2 * f2, 0.0);
        let e2 = &p.h0 * C::new(0.5, 0.0) + &p.drive * C::new(a2 * f1 + a1 * f2, 0.0);
        // Rightmost factor acts first.
        u = expm_herm(&e1, h) * expm_herm(&e2, h) * u;
    }
    u
}

/// One-period propagator with step refinement until successive results agree
/// within `tol` (max-norm). Fails if the unitarity defect exceeds `1e-8`.
pub fn propagate_period(p: &ReducedProblem, t0: f64, tol: f64) -> Result<Propagation> {
    let n = p.h0.nrows();
    if p.freq_d == 0.0 {
        return Ok(Propagation { u: CMat::identity(n, n), defect: 0.0, steps: 0, error: 0.0 });
    }
    // Initial step count from the spectral width per period.
    let width = p.energies.last().copied().unwrap_or(0.0) + p.amp.abs() * p.drive.norm();
    let mut steps = ((width / p.freq_d) * 2.0).ceil().max(8.0) as usize;
    let mut prev = propagate_fixed(p, t0, steps);
    for _ in 0..8 {
        steps *= 2;
        let next = propagate_fixed(p, t0, steps);
        let err = (&next - &prev).iter().fold(0.0f64, |m, z| m.max(z.norm())) / 15.0;
        prev = next;
        if err <= tol {
            let defect = unitarity_defect(&prev);
            if defect > 1e-8 {
                return Err(Error::Numeric(format!("unitarity defect {defect:.2e}; tighten the tolerance")));
            }
            return Ok(Propagation { u: prev, defect, steps, error: err });
        }
    }
    Err(Error::Numeric(format!("propagation did not reach tolerance {tol:e} with {steps} steps")))
}

/// Quasienergies (first Brillouin zone `(−f_d/2, f_d/2]`) and Floquet modes.
#[derive(Clone, Debug)]
pub struct FloquetResult {
    /// Quasienergies `ε_m` in frequency units.
    pub quasienergies: Vec<f64>,
    /// Floquet modes at `t0` (columns), in the reduced eigenbasis.
    pub modes: CMat,
    /// Unitarity defect of the propagator.
    pub defect: f64,
}

/// Diagonalises a one-period propagator: `U φ_m = e^{−2πi ε_m/f_d} φ_m`.
pub fn floquet_diagonalize(u: &CMat, freq_d: f64) -> FloquetResult {
    let defect = unitarity_defect(u);
    // U is normal, so its Schur vectors are eigenvectors.
    let (q, t) = Schur::new(u.clone()).unpack();
    let n = u.nrows();
    let mut quasi = Vec::with_capacity(n);
    for k in 0..n {
        let lam = t[(k, k)];
        quasi.push(-lam.arg() / (2.0 * PI) * freq_d);
    }
    FloquetResult { quasienergies: quasi, modes: q, defect }
}

/// Folds a frequency difference into `(−f_d/2, f_d/2]`.
pub fn fold(x: f64, freq_d: f64) -> f64 {
    let mut y = x % freq_d;
    if y > 0.5 * freq_d {
        y -= freq_d;
    }
    if y <= -0.5 * freq_d {
        y += freq_d;
    }
    y
}

/// Floquet analysis of one drive point.
pub fn floquet_point(h: &TruncatedHamiltonian, levels: usize, tol: f64) -> Result<(ReducedProblem, FloquetResult)> {
    let red = h.reduce(levels);
    let prop = propagate_period(&red, 0.0, tol)?;
    let mut fr = floquet_diagonalize(&prop.u, red.freq_d);
    fr.defect = prop.defect;
    Ok((red, fr))
}

/// Index of the Floquet mode with the largest overlap with basis state `k`.
pub fn mode_for_state(fr: &FloquetResult, k: usize) -> usize {
    (0..fr.modes.ncols())
        .max_by(|&i, &j| fr.modes[(k, i)].norm_sqr().partial_cmp(&fr.modes[(k, j)].norm_sqr()).unwrap())
        .unwrap_or(0)
}

/// Overlap `|⟨k|φ_m⟩|²`.
pub fn weight(fr: &FloquetResult, k: usize, m: usize) -> f64 {
    fr.modes[(k, m)].norm_sqr()
}

/// Column `m` of the Floquet modes as a vector.
pub fn mode_vector(fr: &FloquetResult, m: usize) -> DVector<C> {
    fr.modes.column(m).into_owned()
}

/// One tracked sample of a parameter scan.
#[derive(Clone, Debug)]
pub struct ScanSample {
    /// Scan parameter.
    pub x: f64,
    /// Indices of the tracked modes, in the order of the requested states.
    pub modes: Vec<usize>,
    /// Quasienergies of the tracked modes.
    pub quasienergies: Vec<f64>,
    /// Overlap of each tracked mode with its predecessor (or the bare state).
    pub overlaps: Vec<f64>,
    /// Tracking ambiguity: some overlap fell below one half.
    pub flagged: bool,
}

/// Location and size of an avoided crossing.
#[derive(Clone, Debug)]
pub struct AntiCrossing {
    /// Parameter value at the minimum separation.
    pub location: f64,
    /// Minimum separation of the two branches.
    pub gap: f64,
    /// The coarse tracked scan used to bracket the crossing.
    pub samples: Vec<ScanSample>,
}

/// Floquet analysis at one scan point; `build(x)` returns the reduced problem.
pub type Builder<'a> = dyn Fn(f64) -> Result<ReducedProblem> + 'a;

fn solve_point(build: &Builder<'_>, x: f64, tol: f64) -> Result<FloquetResult> {
    let red = build(x)?;
    let prop = propagate_period(&red, 0.0, tol)?;
    let mut fr = floquet_diagonalize(&prop.u, red.freq_d);
    fr.defect = prop.defect;
    Ok(fr)
}

fn best_overlap(fr: &FloquetResult, reference: &DVector<C>, exclude: &[usize]) -> (usize, f64) {
    let mut best = (0, -1.0);
    for m in 0..fr.modes.ncols() {
        if exclude.contains(&m) {
            continue;
        }
        let o = fr.modes.column(m).dotc(reference).norm_sqr();
        if o > best.1 {
            best = (m, o);
        }
    }
    best
}

/// Follows the Floquet modes connected to the bare `states` along the scan
/// `xs` (the first point should be weakly driven), choosing at each point the
/// mode of maximal overlap with the previous one.
pub fn track_scan(build: &Builder<'_>, xs: &[f64], states: &[usize], tol: f64) -> Result<(Vec<ScanSample>, Vec<FloquetResult>)> {
    let mut refs: Vec<DVector<C>> = Vec::new();
    let mut samples = Vec::with_capacity(xs.len());
    let mut results = Vec::with_capacity(xs.len());
    for &x in xs {
        let fr = solve_point(build, x, tol)?;
        if refs.is_empty() {
            let n = fr.modes.nrows();
            refs = states.iter().map(|&k| DVector::from_fn(n, |i, _| if i == k { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) })).collect();
        }
        let mut taken = Vec::new();
        let mut q = Vec::new();
        let mut ov = Vec::new();
        for r in refs.iter_mut() {
            let (m, o) = best_overlap(&fr, r, &taken);
            taken.push(m);
            q.push(fr.quasienergies[m]);
            ov.push(o);
            *r = mode_vector(&fr, m);
        }
        samples.push(ScanSample { x, modes: taken, quasienergies: q, flagged: ov.iter().any(|&o| o < 0.5), overlaps: ov });
        results.push(fr);
    }
    Ok((samples, results))
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_min(mut a: f64, mut b: f64, xtol: f64, mut f: impl FnMut(f64) -> Result<f64>) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > xtol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Avoided crossing between the modes connected to bare states `i` and `j`
/// along the scan `xs`. The crossing is bracketed by a sign change of the
/// folded separation of the tracked pair, then the branch separation is
/// minimised by golden section to `xtol`.
pub fn anticrossing_gap(build: &Builder<'_>, xs: &[f64], i: usize, j: usize, tol: f64, xtol: f64) -> Result<AntiCrossing> {
    let (samples, results) = track_scan(build, xs, &[i, j], tol)?;
    let fd = build(xs[0])?.freq_d;
    let sep = |s: &ScanSample| fold(s.quasienergies[1] - s.quasienergies[0], fd);
    let k = (0..samples.len().saturating_sub(1))
        .find(|&k| {
            let (a, b) = (sep(&samples[k]), sep(&samples[k + 1]));
            a.signum() != b.signum() && a.abs() < 0.25 * fd && b.abs() < 0.25 * fd
        })
        .ok_or_else(|| Error::Numeric("no avoided crossing inside the scan; widen the bracket".into()))?;
    // The tracked modes at the left end of the bracket label the two branches.
    let ra = mode_vector(&results[k], samples[k].modes[0]);
    let rb = mode_vector(&results[k], samples[k].modes[1]);
    let gap_at = |x: f64| -> Result<f64> {
        let fr = solve_point(build, x, tol)?;
        let (a, _) = best_overlap(&fr, &ra, &[]);
        let (b, _) = best_overlap(&fr, &rb, &[a]);
        Ok(fold(fr.quasienergies[b] - fr.quasienergies[a], fd).abs())
    };
    let (location, gap) = golden_min(samples[k].x, samples[k + 1].x, xtol, gap_at)?;
    Ok(AntiCrossing { location, gap, samples })
}

/// Avoided crossing between the Floquet mode continuing bare state `i` and a
/// partner mode with bare-state-`j` character, located without global
/// tracking. At every scan point the `i` mode is the one of largest weight on
/// `i`; every other mode is matched to the next scan point by overlap, and a
/// crossing candidate is a partner whose folded quasienergy relative to the
/// `i` mode changes sign. Among candidates the partner with the largest
/// weight on `j` is taken, and the splitting is minimised by golden section
/// to `xtol`. Returns `(location, gap)`.
pub fn hybridization_gap(build: &Builder<'_>, xs: &[f64], i: usize, j: usize, tol: f64, xtol: f64) -> Result<(f64, f64)> {
    let frs: Vec<FloquetResult> = xs.iter().map(|&x| solve_point(build, x, tol)).collect::<Result<_>>()?;
    let fd = build(xs[0])?.freq_d;
    let rel = |fr: &FloquetResult, a: usize, b: usize| fold(fr.quasienergies[b] - fr.quasienergies[a], fd);
    let mut best: Option<(usize, DVector<C>, DVector<C>, f64)> = None;
    for k in 0..frs.len().saturating_sub(1) {
        let (f0, f1) = (&frs[k], &frs[k + 1]);
        let (a0, a1) = (mode_for_state(f0, i), mode_for_state(f1, i));
        for b0 in (0..f0.modes.ncols()).filter(|&b| b != a0) {
            let v0 = mode_vector(f0, b0);
            let (b1, _) = best_overlap(f1, &v0, &[a1]);
            let (r0, r1) = (rel(f0, a0, b0), rel(f1, a1, b1));
            if r0.signum() != r1.signum() && r0.abs().max(r1.abs()) < 0.25 * fd {
                let score = weight(f0, j, b0) + weight(f1, j, b1);
                if best.as_ref().is_none_or(|b| score > b.3) {
                    best = Some((k, v0, mode_vector(f1, b1), score));
                }
            }
        }
    }
    let (k, v0, v1, _) = best.ok_or_else(|| Error::Numeric("no avoided crossing inside the scan; widen the bracket".into()))?;
    let split = |x: f64| -> Result<f64> {
        let fr = solve_point(build, x, tol)?;
        let a = mode_for_state(&fr, i);
        let b = (0..fr.modes.ncols())
            .filter(|&m| m != a)
            .max_by(|&p, &q| {
                let o = |m: usize| fr.modes.column(m).dotc(&v0).norm_sqr() + fr.modes.column(m).dotc(&v1).norm_sqr();
                o(p).total_cmp(&o(q))
            })
            .unwrap_or(a);
        Ok(rel(&fr, a, b).abs())
    };
    golden_min(xs[k], xs[k + 1], xtol, split)
}

/// Drive amplitude `E_d` (coefficient of `N`) giving displacement `|ξ|` for
/// a momentum-coupled oscillator of frequency `ω_o` and zero-point phase `φ_zps`:
/// `|ξ| = Ω_d ω_d/|ω_d² − ω_o²|` with `Ω_d = E_d/(2φ_zps)`.
pub fn charge_drive_amplitude(xi_abs: f64, omega_o: f64, omega_d: f64, phi_zps: f64) -> f64 {
    2.0 * phi_zps * xi_abs * (omega_d * omega_d - omega_o * omega_o).abs() / omega_d
}

/// Largest change of the (sorted, folded) quasienergies when the one-period
/// propagation starts at `T/2` instead of `0`. Quasienergies are independent of
/// the start time, so this measures numerical gauge dependence.
pub fn gauge_shift_defect(p: &ReducedProblem, tol: f64) -> Result<f64> {
    if p.freq_d == 0.0 {
        return Ok(0.0);
    }
    let a = floquet_diagonalize(&propagate_period(p, 0.0, tol)?.u, p.freq_d);
    let b = floquet_diagonalize(&propagate_period(p, 0.5 / p.freq_d, tol)?.u, p.freq_d);
    let mut worst: f64 = 0.0;
    for &e in &a.quasienergies {
        let d = b.quasienergies.iter().map(|&f| fold(e - f, p.freq_d).abs()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Settings of [`excitation_map`].
#[derive(Clone, Debug)]
pub struct ExcitationSettings {
    /// Maximum polynomial degree of the reference fit in `|ξ|`.
    pub degree: usize,
    /// Points with `P₀→` above this value are excluded from the fit.
    pub threshold: f64,
    /// Cells whose reference fit has an RMS residual (per mode vector) above
    /// this are invalid; `P₀→` errors scale as its square.
    pub max_residual: f64,
    /// Propagation tolerance.
    pub tol: f64,
}

impl Default for ExcitationSettings {
    fn default() -> Self {
        ExcitationSettings { degree: 4, threshold: 0.05, max_residual: 0.05, tol: 1e-9 }
    }
}

/// One cell of an excitation-probability map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExcitationCell {
    /// Drive frequency.
    pub freq_d: f64,
    /// `|ξ|²`.
    pub xi2: f64,
    /// `P₀→`, or `None` when the reference fit is not trustworthy.
    pub p0to: Option<f64>,
}

/// Floquet ground mode: largest overlap with the static ground state,
/// gauge-fixed so that this overlap is real and positive.
fn ground_mode(fr: &FloquetResult) -> DVector<C> {
    let m = mode_for_state(fr, 0);
    let mut v = mode_vector(fr, m);
    let c0 = v[0];
    if c0.norm() > 0.0 {
        v /= c0 / c0.norm();
    }
    v
}

/// Least-squares polynomial fit of complex vectors `ys` at points `xs`;
/// returns the coefficient vectors (per power) and the RMS residual.
fn fit_vectors(xs: &[f64], ys: &[&DVector<C>], degree: usize) -> (Vec<DVector<C>>, f64) {
    let n = xs.len();
    let deg = degree.min(n.saturating_sub(1));
    let dim = ys[0].len();
    let v = DMatrix::<C>::from_fn(n, deg + 1, |i, j| C::new(xs[i].powi(j as i32), 0.0));
    let svd = v.clone().svd(true, true);
    let rhs = DMatrix::<C>::from_fn(n, dim, |i, k| ys[i][k]);
    let coef = svd.solve(&rhs, 1e-13).unwrap_or_else(|_| DMatrix::zeros(deg + 1, dim));
    let resid = &v * &coef - &rhs;
    let rms = (resid.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64).sqrt();
    ((0..=deg).map(|j| coef.row(j).transpose()).collect(), rms)
}

fn eval_fit(coef: &[DVector<C>], x: f64) -> DVector<C> {
    let mut out = coef[0].clone() * C::new(0.0, 0.0);
    for (j, c) in coef.iter().enumerate() {
        out += c * C::new(x.powi(j as i32), 0.0);
    }
    out
}

/// Excitation probability `P₀→ = 1 − |⟨0^F|0_ref⟩|²` over a grid of drive
/// frequencies and strengths. `0^F` is the Floquet mode with the largest
/// overlap with the static ground state; `0_ref` is its smooth continuation,
/// obtained for each frequency by fitting the mode components with a
/// polynomial in `|ξ|`: an outward pass from weak drive (extrapolating the
/// fit) marks excited points, which are then left out of the fits; each point
/// is finally compared with the fit through its nearest accepted neighbours.
pub fn excitation_map(
    build: &(dyn Fn(f64, f64) -> Result<ReducedProblem> + Sync),
    freqs: &[f64],
    xi2s: &[f64],
    s: &ExcitationSettings,
) -> Result<Vec<ExcitationCell>> {
    use rayon::prelude::*;
    let mut order: Vec<usize> = (0..xi2s.len()).collect();
    order.sort_by(|&a, &b| xi2s[a].total_cmp(&xi2s[b]));
    let columns: Vec<Result<Vec<ExcitationCell>>> = freqs
        .par_iter()
        .map(|&fd| {
            let modes: Vec<DVector<C>> = order
                .iter()
                .map(|&i| {
                    let red = build(fd, xi2s[i])?;
                    let prop = propagate_period(&red, 0.0, s.tol)?;
                    Ok(ground_mode(&floquet_diagonalize(&prop.u, red.freq_d)))
                })
                .collect::<Result<_>>()?;
            // Mode components are odd or even in ξ, so fit in |ξ|.
            let xs: Vec<f64> = order.iter().map(|&i| xi2s[i].sqrt()).collect();
            let window = 2 * (s.degree + 1);
            // Reference at point k from the accepted points nearest to it.
            let reference = |k: usize, accepted: &[usize]| -> Option<(DVector<C>, f64)> {
                let mut near: Vec<usize> = accepted.iter().copied().filter(|&m| m != k).collect();
                if near.is_empty() {
                    return None;
                }
                near.sort_by(|&a, &b| (xs[a] - xs[k]).abs().total_cmp(&(xs[b] - xs[k]).abs()));
                near.truncate(window);
                let px: Vec<f64> = near.iter().map(|&m| xs[m]).collect();
                let py: Vec<&DVector<C>> = near.iter().map(|&m| &modes[m]).collect();
                let (coef, rms) = fit_vectors(&px, &py, s.degree);
                Some((eval_fit(&coef, xs[k]), rms))
            };
            let p_of = |k: usize, r: &DVector<C>| {
                let norm = r.norm();
                if norm > 0.0 {
                    (1.0 - modes[k].dotc(r).norm_sqr() / (norm * norm)).clamp(0.0, 1.0)
                } else {
                    1.0
                }
            };
            // Outward pass: classify points as off-resonant by extrapolation.
            let mut accepted: Vec<usize> = Vec::new();
            for k in 0..xs.len() {
                let p = reference(k, &accepted).map(|(r, _)| p_of(k, &r)).unwrap_or(0.0);
                if p <= s.threshold {
                    accepted.push(k);
                }
            }
            // Final pass: every point against the fit of its accepted neighbours.
            let mut cells = vec![ExcitationCell { freq_d: fd, xi2: 0.0, p0to: None }; xi2s.len()];
            for (k, &i) in order.iter().enumerate() {
                let p0to = if xs[k] == 0.0 {
                    // Undriven: the Floquet ground mode is the static ground state.
                    Some((1.0 - modes[k][0].norm_sqr()).clamp(0.0, 1.0))
                } else {
                    reference(k, &accepted).and_then(|(r, rms)| (rms <= s.max_residual).then(|| p_of(k, &r)))
                };
                cells[i] = ExcitationCell { freq_d: fd, xi2: xi2s[i], p0to };
            }
            Ok(cells)
        })
        .collect();
    let mut out = Vec::with_capacity(freqs.len() * xi2s.len());
    for c in columns {
        out.extend(c?);
    }
    Ok(out)
}

/// Phase-space representation exported by [`state_grid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseSpace {
    /// Wigner function (real, may be negative).
    Wigner,
    /// Husimi Q function (non-negative).
    Husimi,
}

/// Generalised Laguerre polynomials `L_k^{(a)}(x)` for `k = 0..=n`.
fn laguerre_all(n: usize, a: f64, x: f64) -> Vec<f64> {
    let mut l = vec![1.0; n + 1];
    if n >= 1 {
        l[1] = 1.0 + a - x;
    }
    for k in 1..n {
        let kf = k as f64;
        l[k + 1] = ((2.0 * kf + 1.0 + a - x) * l[k] - (kf + a) * l[k - 1]) / (kf + 1.0);
    }
    l
}

/// Wigner or Husimi function of a pure Fock-basis state on the grid
/// `α = x + iy`; `out[i][j]` belongs to `(xs[j], ys[i])`. Both are normalised
/// to unit integral over `d²α`.
pub fn state_grid(psi: &DVector<C>, xs: &[f64], ys: &[f64], kind: PhaseSpace) -> Vec<Vec<f64>> {
    let n = psi.len();
    let mut sqrt_fact = vec![1.0; n.max(1)];
    for k in 1..n {
        sqrt_fact[k] = sqrt_fact[k - 1] * (k as f64).sqrt();
    }
    ys.iter()
        .map(|&y| {
            xs.iter()
                .map(|&x| {
                    let alpha = C::new(x, y);
                    let r2 = alpha.norm_sqr();
                    match kind {
                        PhaseSpace::Husimi => {
                            let mut amp = C::new(0.0, 0.0);
                            let mut pw = C::new(1.0, 0.0);
                            for k in 0..n {
                                amp += pw / sqrt_fact[k] * psi[k];
                                pw *= alpha.conj();
                            }
                            (-r2).exp() * amp.norm_sqr() / PI
                        }
                        PhaseSpace::Wigner => {
                            let mut w = 0.0;
                            for d in 0..n {
                                let lag = laguerre_all(n - 1 - d, d as f64, 4.0 * r2);
                                let two_a = (2.0 * alpha).powu(d as u32);
                                for m in 0..n - d {
                                    let rho = psi[m] * psi[m + d].conj();
                                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                                    let t = rho * two_a * (sqrt_fact[m] / sqrt_fact[m + d]) * lag[m] * sign;
                                    w += if d == 0 { t.re } else { 2.0 * t.re };
                                }
                            }
                            2.0 / PI * (-2.0 * r2).exp() * w
                        }
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn static_problem_gives_exact_phases() {
        let h = TruncatedHamiltonian::polynomial(1.0, &[], 8, true).with_drive(0.37, 0.0);
        let red = h.reduce(6);
        let p = propagate_period(&red, 0.0, 1e-12).unwrap();
        let t = 1.0 / 0.37;
        for k in 0..6 {
            let want = C::from_polar(1.0, -2.0 * PI * k as f64 * t);
            assert!((p.u[(k, k)] - want).norm() < 1e-10);
        }
        let fr = floquet_diagonalize(&p.u, 0.37);
        let mut q: Vec<f64> = fr.quasienergies.iter().map(|e| fold(*e, 0.37)).collect();
        q.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut want: Vec<f64> = (0..6).map(|k| fold(k as f64, 0.37)).collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in q.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn magnus_scheme_is_fourth_order() {
        let h = TruncatedHamiltonian::polynomial(1.0, &[(4, -0.02)], 10, true).with_drive(1.7, 0.3);
        let red = h.reduce(8);
        let exact = propagate_fixed(&red, 0.0, 2048);
        let e1 = (&propagate_fixed(&red, 0.0, 32) - &exact).norm();
        let e2 = (&propagate_fixed(&red, 0.0, 64) - &exact).norm();
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio {ratio}");
    }

    #[test]
    fn transmon_spectrum() {
        let h = TruncatedHamiltonian::transmon(30.0, 0.15, 0.0, 40);
        let (e, _) = h.static_eigen();
        let f01 = e[1] - e[0];
        let alpha = e[2] - 2.0 * e[1] + e[0];
        assert!((f01 - 5.85).abs() < 0.01, "{f01}");
        assert!((alpha + 0.16).abs() < 0.01, "{alpha}");
    }
}
