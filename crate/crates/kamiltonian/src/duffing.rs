//! Classical ultra-subharmonic response of the driven Duffing oscillator
//! `x'' + γx' + x + c₃x² + c₄x³ = 2cos νt`.
//!
//! The classical (`ħ = 0`) effective Hamiltonian of a (q:p) frame gives the
//! slow dynamics `dA/dt = −i∂K/∂A* − (γ/2)A`. Its fixed points are found from
//! the modulus equation `(D(ρ)² + γ²/4) ρ = q²|Ω|²ρ^{q−1}` with
//! `D(ρ) = Σ n K_n ρ^{n−1}`, solved through a companion matrix and then
//! polished by Newton iteration on the unsquared equation. A direct ODE
//! integration of the oscillator (periodic orbits by shooting, spectra by
//! FFT) serves as the independent oracle.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use kamiltonian_core::effective::EffectiveHamiltonian;
use kamiltonian_core::poly::PhasePolynomial;
use kamiltonian_core::system::{duffing_oscillator, FramedSystem};
use kamiltonian_core::{engine, Coefficient, NumericCtx, Sym, SymbolicCtx, Q};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::numeric::numeric_k;
use crate::ode::{Dopri5, Tolerance};

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// Dimensionless Duffing oscillator studied in a (q:p) frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DuffingSpec {
    /// Quadratic nonlinearity.
    pub c3: f64,
    /// Cubic nonlinearity.
    pub c4: f64,
    /// Damping rate.
    pub gamma: f64,
    /// Drive frequency in units of the linear frequency.
    pub nu: f64,
    /// Oscillator quanta of the process.
    pub q: u32,
    /// Drive quanta of the process.
    pub p: u32,
}

impl DuffingSpec {
    /// Frame frequency `(p/q) ν`.
    pub fn frame(&self) -> f64 {
        self.p as f64 * self.nu / self.q as f64
    }

    /// Detuning `δ = 1 − (p/q) ν`.
    pub fn delta(&self) -> f64 {
        1.0 - self.frame()
    }

    /// Linear response `ξ = 1/(1 − ν² − iγν)`.
    pub fn xi(&self) -> C {
        duffing_oscillator(self.c3, self.c4, self.nu, self.gamma).2
    }

    /// Warnings about the perturbative ordering `γ ≪ 1`, `c₃² ∼ c₄ ≪ 1`.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.gamma >= 0.1 {
            w.push(format!("damping γ = {} is not small", self.gamma));
        }
        if self.c4.abs() >= 0.3 || self.c3 * self.c3 >= 0.3 {
            w.push("nonlinearity is not perturbative".to_string());
        }
        w
    }

    fn ranks(&self) -> Vec<u8> {
        let mut r = Vec::new();
        if self.c3 != 0.0 {
            r.push(3);
        }
        if self.c4 != 0.0 {
            r.push(4);
        }
        r
    }

    /// Framed system of the (q:p) study.
    pub fn system(&self) -> FramedSystem {
        FramedSystem::single(self.q as i128, self.p as i128, &self.ranks(), true)
    }

    /// Classical numeric context.
    pub fn ctx(&self) -> NumericCtx {
        let (g3, g4, xi) = duffing_oscillator(self.c3, self.c4, self.nu, self.gamma);
        let mut ctx = NumericCtx::new();
        ctx.classical = true;
        ctx.set(Sym::G(3), g3).set(Sym::G(4), g4).set(Sym::Wd(0), self.nu).set(Sym::Delta(0), self.delta());
        ctx.set_c(Sym::Xi(0), xi);
        ctx
    }

    /// `y' = f(t, y)` for `y = (x, x')`.
    pub fn rhs(&self) -> impl Fn(f64, &[f64; 2]) -> [f64; 2] + '_ {
        move |t, y| {
            let x = y[0];
            [y[1], -self.gamma * y[1] - x - self.c3 * x * x - self.c4 * x * x * x + 2.0 * (self.nu * t).cos()]
        }
    }
}

/// Classical effective Hamiltonian as an explicit real term list
/// `K = Σ c A*^m A^n` (conjugate pairs both present) plus damping.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalK {
    /// `(c, m, n)` terms.
    pub terms: Vec<(C, u8, u8)>,
    /// Ladder power of the process.
    pub q: u32,
    /// Damping rate.
    pub gamma: f64,
}

impl ClassicalK {
    /// From renormalisations `K_1, K_2, …` and couplings `Ω A*^{l+k} A^k` (`(l, k, Ω)`).
    pub fn from_coefficients(renorm: &[f64], couplings: &[(u8, u8, C)], q: u32, gamma: f64) -> Self {
        let mut terms: Vec<(C, u8, u8)> = renorm.iter().enumerate().map(|(i, &k)| (C::new(k, 0.0), i as u8 + 1, i as u8 + 1)).collect();
        for &(l, k, c) in couplings {
            terms.push((c, l + k, k));
            terms.push((c.conj(), k, l + k));
        }
        ClassicalK { terms, q, gamma }
    }

    /// Reads the static classical part of an assembled effective Hamiltonian.
    pub fn from_effective(h: &EffectiveHamiltonian<C>, q: u32, gamma: f64) -> Self {
        let mut terms = Vec::new();
        for (key, c) in h.renorm.iter() {
            let (m, n) = key.pw[0];
            if key.hbar == 0 && m > 0 {
                terms.push((*c, m, n));
            }
        }
        for (key, c) in h.couplings.iter() {
            let (m, n) = key.pw[0];
            if key.hbar == 0 && key.phase.is_zero() {
                terms.push((*c, m, n));
                terms.push((c.conj(), n, m));
            }
        }
        ClassicalK { terms, q, gamma }
    }

    /// `K_n` (coefficient of `ρ^n`).
    pub fn renorm(&self, n: u8) -> f64 {
        self.terms.iter().filter(|t| t.1 == n && t.2 == n).map(|t| t.0.re).sum()
    }

    /// Coefficient of `A*^{q}` (the leading coupling, drive factor included).
    pub fn leading_coupling(&self) -> C {
        self.terms.iter().filter(|t| t.1 as u32 == self.q && t.2 == 0).map(|t| t.0).sum()
    }

    /// Highest renormalisation power present.
    pub fn max_renorm(&self) -> u8 {
        self.terms.iter().filter(|t| t.1 == t.2).map(|t| t.1).max().unwrap_or(0)
    }

    /// `K(A)`.
    pub fn value(&self, a: C) -> f64 {
        self.terms.iter().map(|&(c, m, n)| c * a.conj().powu(m as u32) * a.powu(n as u32)).sum::<C>().re
    }

    /// `∂K/∂A*`.
    pub fn d_astar(&self, a: C) -> C {
        self.terms.iter().filter(|t| t.1 > 0).map(|&(c, m, n)| c * m as f64 * a.conj().powu(m as u32 - 1) * a.powu(n as u32)).sum()
    }

    /// Slow flow `dA/dt = −i∂K/∂A* − (γ/2)A`.
    pub fn flow(&self, a: C) -> C {
        -I * self.d_astar(a) - 0.5 * self.gamma * a
    }

    /// Wirtinger derivatives `(∂F/∂A, ∂F/∂A*)` of the flow.
    pub fn flow_jacobian(&self, a: C) -> (C, C) {
        let mut fa = C::new(-0.5 * self.gamma, 0.0);
        let mut fs = C::new(0.0, 0.0);
        for &(c, m, n) in &self.terms {
            let (m, n) = (m as u32, n as u32);
            if m >= 1 && n >= 1 {
                fa += -I * c * (m * n) as f64 * a.conj().powu(m - 1) * a.powu(n - 1);
            }
            if m >= 2 {
                fs += -I * c * (m * (m - 1)) as f64 * a.conj().powu(m - 2) * a.powu(n);
            }
        }
        (fa, fs)
    }

    /// `D(ρ) = Σ n K_n ρ^{n−1}` as polynomial coefficients.
    fn d_poly(&self) -> Vec<f64> {
        (1..=self.max_renorm()).map(|n| n as f64 * self.renorm(n)).collect()
    }

    /// `D(ρ)`.
    pub fn d_at(&self, rho: f64) -> f64 {
        self.d_poly().iter().rev().fold(0.0, |acc, c| acc * rho + c)
    }

    /// Same model without damping.
    pub fn undamped(&self) -> Self {
        ClassicalK { gamma: 0.0, ..self.clone() }
    }
}

/// Stability type of a fixed point of the slow flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum FixedPointKind {
    /// Attracting (both eigenvalues in the left half plane).
    Node,
    /// One attracting and one repelling direction.
    Saddle,
    /// Real parts vanish to working precision (undamped centres).
    Marginal,
}

/// Fixed point of the slow flow.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    /// Complex amplitude `A_s`.
    pub amplitude: C,
    /// `ρ = |A_s|²`.
    pub rho: f64,
    /// Stability type.
    pub kind: FixedPointKind,
    /// Eigenvalues of the real 2×2 Jacobian.
    pub eigenvalues: [C; 2],
    /// `|dA/dt|` at the point.
    pub residual: f64,
}

/// Classifies a fixed point from the real Jacobian of the slow flow.
pub fn classify_fixed_point(k: &ClassicalK, a: C) -> (FixedPointKind, [C; 2]) {
    let (fa, fs) = k.flow_jacobian(a);
    let u = fa + fs;
    let w = I * (fa - fs);
    let (j11, j12, j21, j22) = (u.re, w.re, u.im, w.im);
    let tr = j11 + j22;
    let det = j11 * j22 - j12 * j21;
    let disc = C::new(0.25 * tr * tr - det, 0.0).sqrt();
    let ev = [0.5 * tr + disc, 0.5 * tr - disc];
    let scale = fa.norm() + fs.norm() + k.gamma;
    let eps = 1e-12 * scale.max(1e-300);
    let kind = if det < -eps * scale {
        FixedPointKind::Saddle
    } else if ev.iter().all(|e| e.re < -eps) {
        FixedPointKind::Node
    } else {
        FixedPointKind::Marginal
    };
    (kind, ev)
}

/// Real roots of `Σ c_i x^i` via the eigenvalues of the companion matrix.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut c = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let deg = c.len() - 1;
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let mut m = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        m[(i, deg - 1)] = -c[i] / lead;
    }
    let mut out: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-7 * z.re.abs().max(1.0))
        .map(|z| z.re)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn poly_mul(a: &[C], b: &[C]) -> Vec<C> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[C], b: &[C], sb: f64) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += sb * y;
    }
    out
}

fn poly_conj(a: &[C]) -> Vec<C> {
    a.iter().map(|c| c.conj()).collect()
}

fn poly_eval(a: &[C], x: f64) -> C {
    a.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * x + c)
}

/// Coupling family `Σ_k c_k A*^{q+k} A^k` folded into the phase equation
/// `(D − iγ/2)ρ + r^q (G ū + H u) = 0` with `u = e^{iqθ}`:
/// `G(ρ) = Σ (q+k) c_k ρ^k`, `H(ρ) = Σ k c̄_k ρ^k`.
fn coupling_polys(k: &ClassicalK) -> (Vec<C>, Vec<C>) {
    let q = k.q as u8;
    let mut g = Vec::new();
    let mut h = Vec::new();
    for &(c, m, n) in &k.terms {
        if m >= n && m - n == q {
            let kk = n as usize;
            if g.len() <= kk {
                g.resize(kk + 1, C::new(0.0, 0.0));
                h.resize(kk + 1, C::new(0.0, 0.0));
            }
            g[kk] += (q as f64 + kk as f64) * c;
            h[kk] += kk as f64 * c.conj();
        }
    }
    (g, h)
}

/// Newton iteration on the unsquared slow flow.
fn newton_polish(k: &ClassicalK, mut a: C) -> Option<(C, f64)> {
    for _ in 0..60 {
        let f = k.flow(a);
        let (fa, fs) = k.flow_jacobian(a);
        let u = fa + fs;
        let w = I * (fa - fs);
        let (j11, j12, j21, j22) = (u.re, w.re, u.im, w.im);
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = (j22 * f.re - j12 * f.im) / det;
        let dy = (-j21 * f.re + j11 * f.im) / det;
        a -= C::new(dx, dy);
        if dx.hypot(dy) <= 1e-15 * a.norm().max(1e-300) {
            break;
        }
    }
    let r = k.flow(a).norm();
    r.is_finite().then_some((a, r))
}

/// Fixed points of the slow flow: the trivial state (when the origin is a
/// solution) and every polished non-trivial amplitude with
/// `0 < ρ ≤ rho_max`, expanded into its q-fold phase family.
pub fn steady_states(k: &ClassicalK, rho_max: f64) -> Result<Vec<SteadyState>> {
    let q = k.q as usize;
    if q == 0 {
        return Err(Error::Input("process ladder power must be positive".into()));
    }
    let mut out = Vec::new();
    let zero = C::new(0.0, 0.0);
    if k.flow(zero).norm() == 0.0 {
        let (kind, ev) = classify_fixed_point(k, zero);
        out.push(SteadyState { amplitude: zero, rho: 0.0, kind, eigenvalues: ev, residual: 0.0 });
    }
    let (g, h) = coupling_polys(k);
    if g.iter().all(|c| c.norm() == 0.0) {
        // Phase-symmetric model: non-trivial solutions form rings, not points.
        return Ok(out);
    }
    // Eliminating u between the phase equation and its conjugate gives
    // |X|² = ρ^{q−2} Y² with X = G(D + iγ/2) − (D − iγ/2)H̄, Y = |G|² − |H|²
    // (multiplied through by ρ for q = 1).
    let d: Vec<C> = k.d_poly().into_iter().map(|x| C::new(x, 0.0)).collect();
    let half = C::new(0.0, 0.5 * k.gamma);
    let dp = poly_add(&d, &[half], 1.0);
    let dm = poly_add(&d, &[half], -1.0);
    let x = poly_add(&poly_mul(&g, &dp), &poly_mul(&dm, &poly_conj(&h)), -1.0);
    let y = poly_add(&poly_mul(&g, &poly_conj(&g)), &poly_mul(&h, &poly_conj(&h)), -1.0);
    let xx = poly_mul(&x, &poly_conj(&x));
    let mut yy = poly_mul(&y, &y);
    let (lhs, rhs) = if q == 1 {
        (poly_mul(&xx, &[C::new(0.0, 0.0), C::new(1.0, 0.0)]), yy)
    } else {
        let mut shifted = vec![C::new(0.0, 0.0); q - 2];
        shifted.append(&mut yy);
        (xx, shifted)
    };
    let poly_c = poly_add(&lhs, &rhs, -1.0);
    let poly: Vec<f64> = poly_c.iter().map(|c| c.re).collect();
    let mut rhos: Vec<f64> = Vec::new();
    for mut rho in real_roots(&poly).into_iter().filter(|r| *r > 0.0 && *r <= rho_max) {
        // Polish the root of the squared equation before using it.
        for _ in 0..20 {
            let (v, dv) = poly.iter().rev().fold((0.0, 0.0), |(v, dv), c| (v * rho + c, dv * rho + v));
            if dv == 0.0 {
                break;
            }
            let step = v / dv;
            rho -= step;
            if step.abs() <= 1e-16 * rho.abs() {
                break;
            }
        }
        if !rhos.iter().any(|r| (r - rho).abs() <= 1e-9 * rho.max(1e-300)) {
            rhos.push(rho);
        }
    }
    for rho in rhos {
        let r = rho.sqrt();
        let dr = k.d_at(rho);
        let (gr, hr) = (poly_eval(&g, rho), poly_eval(&h, rho));
        let num = gr * C::new(dr, 0.5 * k.gamma) - C::new(dr, -0.5 * k.gamma) * hr.conj();
        let target = num / (hr.norm_sqr() - gr.norm_sqr());
        let base = target.arg();
        for j in 0..q {
            let theta = (base + 2.0 * PI * j as f64) / q as f64;
            let guess = C::from_polar(r, theta);
            let Some((a, res)) = newton_polish(k, guess) else { continue };
            if res > 1e-10 || (a - guess).norm() > 1e-3 * r.max(1e-3) {
                // The squared equation admits spurious roots; keep only those
                // that satisfy the original flow.
                continue;
            }
            if out.iter().any(|s: &SteadyState| (s.amplitude - a).norm() <= 1e-8 * r.max(1.0)) {
                continue;
            }
            let (kind, ev) = classify_fixed_point(k, a);
            out.push(SteadyState { amplitude: a, rho: a.norm_sqr(), kind, eigenvalues: ev, residual: res });
        }
    }
    Ok(out)
}

/// Counts `(nodes, saddles)`.
pub fn count_kinds(states: &[SteadyState]) -> (usize, usize) {
    let nodes = states.iter().filter(|s| s.kind == FixedPointKind::Node).count();
    let saddles = states.iter().filter(|s| s.kind == FixedPointKind::Saddle).count();
    (nodes, saddles)
}

/// Bifurcation domain of a parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Domain {
    /// No bifurcated solution: only the trivial (or single) response.
    Blue,
    /// One bifurcated family; the saddles have merged into the origin.
    Yellow,
    /// Two bifurcated families on opposite sides of the parabola vertex.
    Orange,
    /// Two bifurcated families on the same side of the vertex.
    Green,
    /// Anything else (e.g. outside the perturbative window).
    Other,
}

impl Domain {
    /// Lower-case name used in output files.
    pub fn name(&self) -> &'static str {
        match self {
            Domain::Blue => "blue",
            Domain::Yellow => "yellow",
            Domain::Orange => "orange",
            Domain::Green => "green",
            Domain::Other => "other",
        }
    }
}

/// Domain of a set of fixed points of `k`.
pub fn classify_domain(k: &ClassicalK, states: &[SteadyState]) -> Domain {
    let (nodes, saddles) = count_kinds(states);
    if k.q == 1 {
        return match (nodes, saddles) {
            (1, 0) => Domain::Blue,
            (2, 1) => Domain::Orange,
            _ => Domain::Other,
        };
    }
    let trivial = states.iter().find(|s| s.rho == 0.0).map(|s| s.kind);
    let mut rhos: Vec<f64> = Vec::new();
    for s in states.iter().filter(|s| s.rho > 0.0) {
        if !rhos.iter().any(|r| (r - s.rho).abs() <= 1e-7 * s.rho) {
            rhos.push(s.rho);
        }
    }
    match (rhos.len(), trivial) {
        (0, Some(FixedPointKind::Node)) => Domain::Blue,
        (1, Some(FixedPointKind::Saddle)) => Domain::Yellow,
        (2, Some(FixedPointKind::Node)) => {
            let s0 = k.d_at(rhos[0]).signum();
            let s1 = k.d_at(rhos[1]).signum();
            if s0 == s1 {
                Domain::Green
            } else {
                Domain::Orange
            }
        }
        _ => Domain::Other,
    }
}

/// Engine output for a Duffing study: numeric classical `K`, its term list and `η`.
#[derive(Clone, Debug)]
pub struct DuffingModel {
    /// Oscillator and frame.
    pub spec: DuffingSpec,
    /// Engine order.
    pub order: usize,
    /// Assembled numeric effective Hamiltonian.
    pub effective: EffectiveHamiltonian<C>,
    /// Term list with damping.
    pub k: ClassicalK,
    /// `η = Σ_n η^(n)` of the single mode.
    pub eta: PhasePolynomial<C>,
}

/// Classical effective Hamiltonian of a Duffing study through `order`.
pub fn classical_effective_k(spec: &DuffingSpec, order: usize) -> Result<DuffingModel> {
    let sys = spec.system();
    let ctx = spec.ctx();
    let sol = engine::solve::<C, _>(&sys, &ctx, order)?;
    let mut eta = PhasePolynomial::zero(1);
    for n in 1..=order {
        eta.add_assign(&sol.eta(0, n));
    }
    let effective = numeric_k(&sys, &ctx, order)?;
    let k = ClassicalK::from_effective(&effective, spec.q, spec.gamma);
    Ok(DuffingModel { spec: *spec, order, effective, k, eta })
}

/// Fourier component `c` of `x(t) = Σ_{w ≥ 0} (c_w e^{−iwt} + c.c.)`
/// (the zero-frequency entry holds the full static offset).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierComponent {
    /// Frequency in units of `ν`.
    pub freq_over_nu: f64,
    /// Complex amplitude.
    pub value: C,
}

/// Fourier components of `x = X + X*` with
/// `X = ξ e^{−iνt} + (A_s + η(A_s, t)) e^{−i(p/q)νt}` at a steady state.
pub fn reconstruct_fourier(model: &DuffingModel, a_s: C) -> Vec<FourierComponent> {
    let spec = &model.spec;
    let frame = Q::new(spec.p as i128, spec.q as i128);
    let mut x: BTreeMap<Q, C> = BTreeMap::new();
    *x.entry(Q::from_integer(1)).or_default() += spec.xi();
    *x.entry(frame).or_default() += a_s;
    for (key, c) in model.eta.iter() {
        let (m, n) = key.pw[0];
        let w = frame - key.phase.get(Sym::Wd(0));
        *x.entry(w).or_default() += c * a_s.conj().powu(m as u32) * a_s.powu(n as u32);
    }
    let mut out: BTreeMap<Q, C> = BTreeMap::new();
    for (w, v) in &x {
        if *w > Q::from_integer(0) {
            *out.entry(*w).or_default() += v;
        } else if *w < Q::from_integer(0) {
            *out.entry(-*w).or_default() += v.conj();
        } else {
            *out.entry(*w).or_default() += v + v.conj();
        }
    }
    out.into_iter()
        .map(|(w, v)| FourierComponent { freq_over_nu: *w.numer() as f64 / *w.denom() as f64, value: v })
        .collect()
}

/// Looks up the component at `freq_over_nu` (zero when absent).
pub fn component_at(cs: &[FourierComponent], freq_over_nu: f64) -> C {
    cs.iter().find(|c| (c.freq_over_nu - freq_over_nu).abs() < 1e-9).map(|c| c.value).unwrap_or_default()
}

/// Phase-space state `(x, x')` at `t = 0` of a Fourier series.
pub fn state_from_fourier(cs: &[FourierComponent], nu: f64) -> [f64; 2] {
    let mut x = 0.0;
    let mut v = 0.0;
    for c in cs {
        if c.freq_over_nu == 0.0 {
            x += c.value.re;
        } else {
            let w = c.freq_over_nu * nu;
            x += 2.0 * c.value.re;
            v += 2.0 * (-I * w * c.value).re;
        }
    }
    [x, v]
}

/// Sampled trajectory of the oscillator.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Sample times.
    pub times: Vec<f64>,
    /// `(x, x')` at each sample.
    pub states: Vec<[f64; 2]>,
}

/// Integrates the oscillator from `z0` at `t = 0`, sampling every `dt`
/// up to `horizon` (relative tolerance `1e-10`).
pub fn integrate_ode(spec: &DuffingSpec, z0: [f64; 2], horizon: f64, dt: f64) -> Result<Trajectory> {
    if !(dt > 0.0 && horizon >= 0.0) {
        return Err(Error::Input("sampling step must be positive".into()));
    }
    let mut ode = Dopri5::new(spec.rhs(), Tolerance::default());
    let n = (horizon / dt).round() as usize;
    let mut times = vec![0.0];
    let mut states = vec![z0];
    let mut z = z0;
    for k in 1..=n {
        let (t0, t1) = ((k - 1) as f64 * dt, k as f64 * dt);
        z = ode.integrate(t0, z, t1)?;
        times.push(t1);
        states.push(z);
    }
    Ok(Trajectory { times, states })
}

/// Map over `periods` drive periods `2π/ν`, starting at `t = 0`.
pub fn period_map(spec: &DuffingSpec, z: [f64; 2], periods: u32) -> Result<[f64; 2]> {
    let t = 2.0 * PI * periods as f64 / spec.nu;
    Dopri5::new(spec.rhs(), Tolerance::default()).integrate(0.0, z, t)
}

/// Stroboscopic fixed point of the `periods`-fold period map, by Newton
/// shooting from `guess` with a finite-difference Jacobian.
pub fn periodic_orbit(spec: &DuffingSpec, guess: [f64; 2], periods: u32) -> Result<[f64; 2]> {
    let mut z = guess;
    for _ in 0..30 {
        let f0 = period_map(spec, z, periods)?;
        let g = [f0[0] - z[0], f0[1] - z[1]];
        let scale = z[0].abs().max(z[1].abs()).max(1.0);
        if g[0].hypot(g[1]) <= 1e-11 * scale {
            return Ok(z);
        }
        let h = 1e-7 * scale;
        let mut jac = [[0.0; 2]; 2];
        for c in 0..2 {
            let mut zp = z;
            zp[c] += h;
            let fp = period_map(spec, zp, periods)?;
            for r in 0..2 {
                jac[r][c] = (fp[r] - zp[r] - g[r]) / h;
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::Numeric("singular shooting Jacobian".into()));
        }
        z[0] -= (jac[1][1] * g[0] - jac[0][1] * g[1]) / det;
        z[1] -= (-jac[1][0] * g[0] + jac[0][0] * g[1]) / det;
    }
    Err(Error::Numeric("shooting did not converge; start closer to the orbit".into()))
}

/// Smallest number of drive periods after which `z` returns to itself.
pub fn minimal_period(spec: &DuffingSpec, z: [f64; 2], max_periods: u32, tol: f64) -> Result<u32> {
    let mut ode = Dopri5::new(spec.rhs(), Tolerance::default());
    let tau = 2.0 * PI / spec.nu;
    let mut cur = z;
    for k in 1..=max_periods {
        cur = ode.integrate((k - 1) as f64 * tau, cur, k as f64 * tau)?;
        if (cur[0] - z[0]).hypot(cur[1] - z[1]) <= tol * z[0].hypot(z[1]).max(1.0) {
            return Ok(k);
        }
    }
    Err(Error::Numeric(format!("no return within {max_periods} periods")))
}

/// Fourier components (multiples of `ν/periods`) of the orbit through `z`
/// over `periods` drive periods, from `samples` equidistant points.
pub fn orbit_fourier(spec: &DuffingSpec, z: [f64; 2], periods: u32, samples: usize) -> Result<Vec<FourierComponent>> {
    let t_total = 2.0 * PI * periods as f64 / spec.nu;
    let traj = integrate_ode(spec, z, t_total, t_total / samples as f64)?;
    let mut buf: Vec<C> = traj.states[..samples].iter().map(|s| C::new(s[0], 0.0)).collect();
    // c_k = (1/N) Σ x_j e^{+2πi jk/N} multiplies e^{−i ω_k t}.
    FftPlanner::new().plan_fft_inverse(samples).process(&mut buf);
    Ok((0..samples / 2)
        .map(|k| FourierComponent { freq_over_nu: k as f64 / periods as f64, value: buf[k] / samples as f64 })
        .collect())
}

/// Basin of attraction sample in `(Q, P)` with `A = (Q + iP)/√2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasinPoint {
    /// Position.
    pub q: f64,
    /// Momentum.
    pub p: f64,
    /// Index into the node list, or `None` when the flow did not settle.
    pub basin: Option<usize>,
}

/// Assigns each point of an `n × n` grid on `[-L, L]²` to the node its damped
/// slow flow converges to.
pub fn basin_portrait(k: &ClassicalK, nodes: &[C], half_width: f64, n: usize) -> Result<Vec<BasinPoint>> {
    use rayon::prelude::*;
    if k.gamma <= 0.0 {
        return Err(Error::Input("basins need a positive damping rate".into()));
    }
    if n < 2 {
        return Err(Error::Input("basin grid needs at least two points per axis".into()));
    }
    let h = 2.0 * half_width / (n - 1) as f64;
    let scale = nodes.iter().map(|a| a.norm()).fold(0.0, f64::max).max(1e-3);
    let tol = 1e-2 * scale;
    let chunk = 2.0 / k.gamma;
    let rows: Vec<Vec<BasinPoint>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = -half_width + i as f64 * h;
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let q = -half_width + j as f64 * h;
                let mut ode = Dopri5::new(
                    |_t: f64, y: &[f64; 2]| {
                        let f = k.flow(C::new(y[0], y[1]));
                        [f.re, f.im]
                    },
                    Tolerance { rtol: 1e-8, atol: 1e-12 * scale, ..Tolerance::default() },
                );
                let mut y = [q / 2f64.sqrt(), p / 2f64.sqrt()];
                let mut basin = None;
                for c in 0..200 {
                    // Escaping trajectories leave the model's validity range: no basin.
                    let Ok(next) = ode.integrate(c as f64 * chunk, y, (c + 1) as f64 * chunk) else { break };
                    y = next;
                    let a = C::new(y[0], y[1]);
                    if let Some(idx) = nodes.iter().position(|nd| (nd - a).norm() < tol) {
                        basin = Some(idx);
                        break;
                    }
                }
                row.push(BasinPoint { q, p, basin });
            }
            row
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// One cell of a domain diagram.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainCell {
    /// `δ/γ^a`.
    pub delta_scaled: f64,
    /// `g₄/γ^b`.
    pub g4_scaled: f64,
    /// Stable fixed points (trivial included).
    pub nodes: usize,
    /// Saddle points (trivial included).
    pub saddles: usize,
    /// Domain label.
    pub domain: Domain,
}

/// Symbolic leading-order coefficients of a (q:p) Duffing frame.
#[derive(Clone, Debug)]
pub struct LeadingCoefficients {
    /// Process.
    pub q: u32,
    /// Process.
    pub p: u32,
    /// `K_1`, `K_2` as exact coefficients.
    pub renorm: [Coefficient; 2],
    /// Leading coupling (coefficient of `A*^q`).
    pub coupling: Coefficient,
}

/// Classical `K_1`, `K_2` and `Ω_{q,p}ξ^p` from the engine at the first order
/// carrying the coupling (at least second order, where `K_2` appears).
pub fn leading_coefficients(q: u32, p: u32, with_cubic: bool) -> Result<LeadingCoefficients> {
    let ranks: Vec<u8> = if with_cubic { vec![3, 4] } else { vec![4] };
    let sys = FramedSystem::single(q as i128, p as i128, &ranks, true);
    let order = ((q + p) as usize).saturating_sub(2).max(2);
    let sol = engine::solve::<Coefficient, _>(&sys, &SymbolicCtx { classical: true }, order)?;
    let h = EffectiveHamiltonian::assemble(&sol.k_total(), &sys)?;
    Ok(LeadingCoefficients { q, p, renorm: [h.renorm_total(1), h.renorm_total(2)], coupling: h.coupling_at(q as u8, 0, 0) })
}

/// How the cubic coefficient follows `g₄` across a domain diagram.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CubicRule {
    /// `g₃ = 0`.
    Zero,
    /// `g₃ = √|g₄|`.
    SqrtG4,
}

/// Settings of [`domain_diagram`].
#[derive(Clone, Debug)]
pub struct DomainSettings {
    /// Damping rate.
    pub gamma: f64,
    /// Drive displacement `|ξ|` (ignored for (1:1)).
    pub xi_abs: f64,
    /// Cubic coefficient rule.
    pub cubic: CubicRule,
    /// Powers `(a, b)` of the rescaling `δ/γ^a`, `g₄/γ^b`.
    pub scaling: (f64, f64),
}

impl DomainSettings {
    /// Rescaling that makes the leading-order diagram independent of `γ`.
    pub fn natural(q: u32, p: u32, gamma: f64) -> Self {
        let scaling = match (q, p) {
            (1, 1) => (1.0, 3.0),
            (2, 1) => (1.0, 2.0),
            (3, 1) => (1.0, 1.0),
            _ => (0.5, 0.5),
        };
        let cubic = if (q, p) == (2, 1) { CubicRule::SqrtG4 } else { CubicRule::Zero };
        DomainSettings { gamma, xi_abs: 1.0, cubic, scaling }
    }
}

/// Leading-order classical model at one `(δ, g₄)` point. For (1:1) the
/// drive is resonant and enters as a unit linear force `A* + A`.
pub fn leading_model(lc: Option<&LeadingCoefficients>, q: u32, p: u32, delta: f64, g4: f64, s: &DomainSettings) -> Result<ClassicalK> {
    if (q, p) == (1, 1) {
        return Ok(ClassicalK::from_coefficients(&[delta, 1.5 * g4], &[(1, 0, C::new(1.0, 0.0))], 1, s.gamma));
    }
    let lc = lc.ok_or_else(|| Error::Input("leading coefficients required".into()))?;
    let g3 = match s.cubic {
        CubicRule::Zero => 0.0,
        CubicRule::SqrtG4 => g4.abs().sqrt(),
    };
    let nu = q as f64 * (1.0 - delta) / p as f64;
    let mut ctx = NumericCtx::new();
    ctx.classical = true;
    ctx.set(Sym::G(3), g3).set(Sym::G(4), g4).set(Sym::Wd(0), nu).set(Sym::Delta(0), delta);
    ctx.set_c(Sym::Xi(0), C::new(s.xi_abs, 0.0));
    let k1 = ctx.eval(&lc.renorm[0])?.re;
    let k2 = ctx.eval(&lc.renorm[1])?.re;
    let om = ctx.eval(&lc.coupling)?;
    Ok(ClassicalK::from_coefficients(&[k1, k2], &[(q as u8, 0, om)], q, s.gamma))
}

/// Fixed-point census over a rescaled `(δ, g₄)` grid.
pub fn domain_diagram(q: u32, p: u32, deltas: &[f64], g4s: &[f64], s: &DomainSettings) -> Result<Vec<DomainCell>> {
    let lc = if (q, p) == (1, 1) { None } else { Some(leading_coefficients(q, p, s.cubic != CubicRule::Zero)?) };
    let mut out = Vec::with_capacity(deltas.len() * g4s.len());
    for &gs in g4s {
        for &ds in deltas {
            let delta = ds * s.gamma.powf(s.scaling.0);
            let g4 = gs * s.gamma.powf(s.scaling.1);
            let k = leading_model(lc.as_ref(), q, p, delta, g4, s)?;
            // Beyond ρ ~ 1/|g₄| the truncated model leaves its domain of validity.
            let states = steady_states(&k, 1.0 / g4.abs().max(1e-300))?;
            let (nodes, saddles) = count_kinds(&states);
            out.push(DomainCell { delta_scaled: ds, g4_scaled: gs, nodes, saddles, domain: classify_domain(&k, &states) });
        }
    }
    Ok(out)
}

/// Critical point of a metapotential.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CriticalKind {
    /// Local maximum (hill top).
    Maximum,
    /// Local minimum (valley bottom).
    Minimum,
    /// Saddle.
    Saddle,
}

/// Critical point in `(Q, P)` with `A = (Q + iP)/√2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalPoint {
    /// Position.
    pub q: f64,
    /// Momentum.
    pub p: f64,
    /// `K` at the point.
    pub value: f64,
    /// Type.
    pub kind: CriticalKind,
}

/// Well (hill or valley) of the metapotential.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Well {
    /// Extremum at its centre.
    pub center: CriticalPoint,
    /// Area enclosed by the separatrix (maximum action `A_max`).
    pub a_max: f64,
    /// Number of EBK orbits with action `(n + ½)2π ≤ A_max`.
    pub orbits: u32,
}

/// Metapotential on a square grid with its critical points and wells.
#[derive(Clone, Debug, PartialEq)]
pub struct Metapotential {
    /// Grid coordinates (both axes).
    pub axis: Vec<f64>,
    /// `values[i][j] = K(Q = axis[j], P = axis[i])`.
    pub values: Vec<Vec<f64>>,
    /// Critical points.
    pub critical: Vec<CriticalPoint>,
    /// Wells bounded by a saddle level.
    pub wells: Vec<Well>,
    /// Radii `ρ` of phase-symmetric rings of critical points.
    pub rings: Vec<f64>,
}

/// Metapotential of an undamped classical `K` on `[-L, L]²` with `n × n` points.
pub fn metapotential_ebk(k: &ClassicalK, half_width: f64, n: usize) -> Result<Metapotential> {
    if n < 16 {
        return Err(Error::Input("metapotential grid needs at least 16 points per axis".into()));
    }
    let k0 = k.undamped();
    let h = 2.0 * half_width / (n - 1) as f64;
    let axis: Vec<f64> = (0..n).map(|i| -half_width + i as f64 * h).collect();
    let amp = |q: f64, p: f64| C::new(q, p) / 2f64.sqrt();
    let values: Vec<Vec<f64>> = axis.iter().map(|&p| axis.iter().map(|&q| k0.value(amp(q, p))).collect()).collect();
    let mut critical = Vec::new();
    let mut rings = Vec::new();
    if k0.leading_coupling().norm() == 0.0 {
        rings = real_roots(&k0.d_poly()).into_iter().filter(|r| *r > 0.0).collect();
    }
    for s in steady_states(&k0, f64::INFINITY)? {
        let (q, p) = (s.amplitude.re * 2f64.sqrt(), s.amplitude.im * 2f64.sqrt());
        let kind = match s.kind {
            FixedPointKind::Saddle => CriticalKind::Saddle,
            _ => {
                // Curvature sign from a symmetric difference of K.
                let e = 1e-4 * half_width;
                let lap = k0.value(amp(q + e, p)) + k0.value(amp(q - e, p)) + k0.value(amp(q, p + e)) + k0.value(amp(q, p - e))
                    - 4.0 * k0.value(amp(q, p));
                if lap < 0.0 {
                    CriticalKind::Maximum
                } else {
                    CriticalKind::Minimum
                }
            }
        };
        critical.push(CriticalPoint { q, p, value: k0.value(s.amplitude), kind });
    }
    let mut wells = Vec::new();
    // Saddle levels with the curvature scale used to keep the flood fill
    // from leaking through the pinch point of the separatrix.
    let saddles: Vec<(f64, f64)> = critical
        .iter()
        .filter(|c| c.kind == CriticalKind::Saddle)
        .map(|c| {
            let e = h;
            let f = |dq: f64, dp: f64| k0.value(amp(c.q + dq, c.p + dp));
            let kqq = (f(e, 0.0) + f(-e, 0.0) - 2.0 * c.value) / (e * e);
            let kpp = (f(0.0, e) + f(0.0, -e) - 2.0 * c.value) / (e * e);
            let kqp = (f(e, e) - f(e, -e) - f(-e, e) + f(-e, -e)) / (4.0 * e * e);
            (c.value, 2.0 * h * h * (kqq.abs() + kpp.abs() + 2.0 * kqp.abs()))
        })
        .collect();
    for c in critical.iter().filter(|c| c.kind != CriticalKind::Saddle) {
        let pick = match c.kind {
            CriticalKind::Maximum => saddles.iter().copied().filter(|s| s.0 < c.value).max_by(|a, b| a.0.total_cmp(&b.0)),
            _ => saddles.iter().copied().filter(|s| s.0 > c.value).min_by(|a, b| a.0.total_cmp(&b.0)),
        };
        let Some((level, margin)) = pick else { continue };
        let above = c.kind == CriticalKind::Maximum;
        let thr = if above { level + margin } else { level - margin };
        let inside = |v: f64| if above { v > thr } else { v < thr };
        let j0 = ((c.q + half_width) / h).round() as isize;
        let i0 = ((c.p + half_width) / h).round() as isize;
        if i0 < 0 || j0 < 0 || i0 >= n as isize || j0 >= n as isize {
            return Err(Error::Input("critical point outside the grid; enlarge the window".into()));
        }
        let (i0, j0) = (i0 as usize, j0 as usize);
        if !inside(values[i0][j0]) {
            return Err(Error::Input("well narrower than the grid spacing; refine the grid".into()));
        }
        let mut seen = vec![vec![false; n]; n];
        let mut queue = VecDeque::from([(i0, j0)]);
        seen[i0][j0] = true;
        let mut count = 0usize;
        while let Some((i, j)) = queue.pop_front() {
            count += 1;
            if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                return Err(Error::Input("separatrix reaches the grid edge; enlarge the window".into()));
            }
            for (di, dj) in [(0isize, 1isize), (0, -1), (1, 0), (-1, 0)] {
                let (a, b) = ((i as isize + di) as usize, (j as isize + dj) as usize);
                if !seen[a][b] && inside(values[a][b]) {
                    seen[a][b] = true;
                    queue.push_back((a, b));
                }
            }
        }
        if count < 25 {
            return Err(Error::Input("separatrix not resolved on this grid; refine the grid".into()));
        }
        let a_max = count as f64 * h * h;
        let orbits = (a_max / (2.0 * PI) + 0.5).floor().max(0.0) as u32;
        wells.push(Well { center: *c, a_max, orbits });
    }
    Ok(Metapotential { axis, values, critical, wells, rings })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn companion_roots() {
        let r = real_roots(&[-6.0, 11.0, -6.0, 1.0]);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(real_roots(&[1.0, 0.0, 1.0]).is_empty());
    }

    #[test]
    fn uncoupled_model_has_only_the_trivial_state() {
        let k = ClassicalK::from_coefficients(&[0.3, -0.01], &[], 3, 1e-3);
        let s = steady_states(&k, 1e6).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].kind, FixedPointKind::Node);
    }

    #[test]
    fn undamped_centre_is_marginal() {
        let k = ClassicalK::from_coefficients(&[0.3, -0.01], &[(3, 0, C::new(1e-3, 0.0))], 3, 0.0);
        let (kind, _) = classify_fixed_point(&k, C::new(0.0, 0.0));
        assert_eq!(kind, FixedPointKind::Marginal);
    }
}
