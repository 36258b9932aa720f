//! Classical Duffing oscillator: fixed points of the slow flow, Fourier
//! reconstruction against direct integration, domain diagrams, basins and
//! the metapotential.

use std::f64::consts::PI;

use kamiltonian::duffing::*;
use num_complex::Complex64 as C;

/// Subharmonic (5:3) response of a softening oscillator inside the window
/// with two bifurcated families.
fn five_three() -> DuffingSpec {
    DuffingSpec { c3: 0.0, c4: -0.03, gamma: 1e-5, nu: 1.56, q: 5, p: 3 }
}

fn fixture() -> (DuffingModel, Vec<SteadyState>) {
    let spec = five_three();
    let model = classical_effective_k(&spec, 8).unwrap();
    let states = steady_states(&model.k, 1.0 / 0.015).unwrap();
    (model, states)
}

#[test]
fn five_three_fixed_points() {
    let (model, states) = fixture();
    assert_eq!(states.len(), 11);
    let trivial: Vec<_> = states.iter().filter(|s| s.rho == 0.0).collect();
    assert_eq!(trivial.len(), 1);
    assert_eq!(trivial[0].kind, FixedPointKind::Node);
    assert_eq!(count_kinds(&states), (6, 5));
    assert_eq!(classify_domain(&model.k, &states), Domain::Orange);
    for s in &states {
        assert!(s.residual < 1e-10, "residual {}", s.residual);
    }
}

#[test]
fn bifurcated_states_form_five_fold_families() {
    let (_, states) = fixture();
    for kind in [FixedPointKind::Node, FixedPointKind::Saddle] {
        let fam: Vec<&SteadyState> = states.iter().filter(|s| s.rho > 0.0 && s.kind == kind).collect();
        assert_eq!(fam.len(), 5);
        let rho = fam[0].rho;
        assert!(fam.iter().all(|s| (s.rho - rho).abs() < 1e-9 * rho));
        let mut phases: Vec<f64> = fam.iter().map(|s| (s.amplitude.arg() * 5.0).rem_euclid(2.0 * PI)).collect();
        phases.sort_by(f64::total_cmp);
        // A*⁵ is invariant under A → A e^{2πi/5}: five copies share 5·arg A.
        let spread = (phases[4] - phases[0]).min(2.0 * PI - (phases[4] - phases[0]));
        assert!(spread < 1e-6, "phases {phases:?}");
    }
}

#[test]
fn fourier_reconstruction_matches_the_ode_orbit() {
    let spec = five_three();
    let (model, states) = fixture();
    let mut checked = 0;
    for s in states.iter().filter(|s| s.kind == FixedPointKind::Node) {
        let cs = reconstruct_fourier(&model, s.amplitude);
        let guess = state_from_fourier(&cs, spec.nu);
        let z = periodic_orbit(&spec, guess, 5).unwrap();
        // The reconstructed initial condition is already close to the orbit.
        let dz = ((z[0] - guess[0]).powi(2) + (z[1] - guess[1]).powi(2)).sqrt();
        assert!(dz < 5e-3, "initial-condition error {dz}");
        let ode = orbit_fourier(&spec, z, 5, 2048).unwrap();
        for f in [0.6, 1.0] {
            let (o, r) = (component_at(&ode, f), component_at(&cs, f));
            if o.norm() < 1e-9 && r.norm() < 1e-9 {
                continue;
            }
            let rel = (o - r).norm() / o.norm();
            assert!(rel < 1e-3, "rho {} line {f}: {rel:.2e}", s.rho);
            checked += 1;
        }
    }
    assert_eq!(checked, 11);
}

#[test]
fn effective_model_is_classical() {
    let (model, _) = fixture();
    let h = &model.effective;
    assert!(h.renorm.iter().chain(h.couplings.iter()).all(|(k, _)| k.hbar == 0));
    // Leading coupling ∝ ξ³ A*⁵ and K₂ ≈ 3g₄/2 with g₄ = c₄/2.
    assert!(model.k.leading_coupling().norm() > 0.0);
    assert!((model.k.renorm(2) - 1.5 * (-0.015)).abs() < 2e-3);
}

/// Real Jacobian of the slow flow by central differences.
fn fd_jacobian(k: &ClassicalK, a: C) -> [[f64; 2]; 2] {
    let h = 1e-6;
    let mut j = [[0.0; 2]; 2];
    for (col, d) in [C::new(h, 0.0), C::new(0.0, h)].into_iter().enumerate() {
        let df = (k.flow(a + d) - k.flow(a - d)) / (2.0 * h);
        j[0][col] = df.re;
        j[1][col] = df.im;
    }
    j
}

#[test]
fn stability_matches_the_linearised_flow() {
    let (model, states) = fixture();
    for s in &states {
        let j = fd_jacobian(&model.k, s.amplitude);
        let tr = j[0][0] + j[1][1];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let (l0, l1) = (s.eigenvalues[0], s.eigenvalues[1]);
        let scale = l0.norm().max(l1.norm()).max(1e-12);
        assert!(((l0 + l1).re - tr).abs() < 1e-5 * scale + 1e-12);
        assert!(((l0 * l1).re - det).abs() < 1e-5 * scale * scale + 1e-16);
        let kind = if det < 0.0 { FixedPointKind::Saddle } else { FixedPointKind::Node };
        assert_eq!(s.kind, kind);
    }
}

#[test]
fn every_node_attracts_its_own_neighbourhood() {
    let (model, states) = fixture();
    let nodes: Vec<C> = states.iter().filter(|s| s.kind == FixedPointKind::Node).map(|s| s.amplitude).collect();
    let n = 9;
    let portrait = basin_portrait(&model.k, &nodes, 1.5, n).unwrap();
    assert_eq!(portrait.len(), n * n);
    // The centre of the portrait is the trivial state.
    let centre = &portrait[n * n / 2];
    assert_eq!((centre.q, centre.p), (0.0, 0.0));
    let trivial = nodes.iter().position(|a| a.norm() == 0.0).unwrap();
    assert_eq!(centre.basin, Some(trivial));
    let found: std::collections::BTreeSet<usize> = portrait.iter().filter_map(|b| b.basin).collect();
    assert!(found.len() >= 2, "basins {found:?}");
}

fn grid(lim: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| -lim + 2.0 * lim * i as f64 / (n - 1) as f64).collect()
}

fn domains(q: u32, p: u32, g4_lim: f64) -> std::collections::BTreeSet<Domain> {
    let s = DomainSettings::natural(q, p, 1e-5);
    domain_diagram(q, p, &grid(4.0, 17), &grid(g4_lim, 17), &s).unwrap().iter().map(|c| c.domain).collect()
}

#[test]
fn domain_taxonomy_per_process() {
    use Domain::*;
    assert_eq!(domains(1, 1, 4.0), [Blue, Orange].into());
    assert_eq!(domains(2, 1, 4.0), [Blue, Yellow, Orange].into());
    assert_eq!(domains(3, 1, 0.8), [Blue, Orange, Green].into());
    assert_eq!(domains(4, 2, 0.8), [Blue, Orange].into());
}

/// Area (in `Q, P`) of the hill of `K = Δρ + K₂ρ² + 2Ωρ cos 2θ` around
/// `θ = 0`, bounded by the level `k_s`: for each angle the hill occupies
/// `ρ ∈ [ρ₋, ρ₊]`, so the area is `∫ √(b² − 4|K₂| k_s)/|K₂| dθ` with
/// `dQ dP = dρ dθ`.
fn hill_area(delta: f64, k2: f64, om: f64, k_s: f64) -> f64 {
    let n = 200_000;
    let h = PI / n as f64;
    (0..n)
        .map(|i| {
            let th = -PI / 2.0 + (i as f64 + 0.5) * h;
            let b = delta + 2.0 * om * (2.0 * th).cos();
            let disc = b * b - 4.0 * k2.abs() * k_s;
            if disc > 0.0 && b > 0.0 {
                disc.sqrt() / k2.abs() * h
            } else {
                0.0
            }
        })
        .sum()
}

#[test]
fn metapotential_wells_and_ebk_orbits() {
    for (om, want_orbits) in [(0.09, 0), (0.36, 1), (1.96, 2)] {
        let k = ClassicalK::from_coefficients(&[3.0, -1.0], &[(2, 0, C::new(om, 0.0))], 2, 0.0);
        let m = metapotential_ebk(&k, 4.0, 801).unwrap();
        // Saddle level: at θ = π/2 for small Ω, the origin once Ω > Δ/2.
        let k_s = if 2.0 * om < 3.0 { (3.0 - 2.0 * om).powi(2) / 4.0 } else { 0.0 };
        let oracle = hill_area(3.0, -1.0, om, k_s);
        let hills: Vec<&Well> = m.wells.iter().filter(|w| w.center.kind == CriticalKind::Maximum).collect();
        assert_eq!(hills.len(), 2, "Ω = {om}");
        for w in hills {
            assert!((w.a_max - oracle).abs() < 0.01 * oracle, "Ω = {om}: {} vs {oracle}", w.a_max);
            assert_eq!(w.orbits, want_orbits, "Ω = {om}");
            assert_eq!(w.orbits, ((oracle / (2.0 * PI)) + 0.5).floor() as u32);
        }
    }
}
