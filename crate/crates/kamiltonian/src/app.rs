//! Command implementations behind the `kamiltonian` binary.
//!
//! Every command takes a validated [`RunConfig`], writes its artefacts into an
//! [`OutputDir`] and returns a [`Report`] with human-readable summary lines
//! and validity warnings. Outputs depend only on the configuration.

use std::path::PathBuf;

use kamiltonian_core::diagram::{decorate, enumerate_unrooted_trees, rootings, ExtLeg};
use kamiltonian_core::effective::{omega_from, EffectiveHamiltonian};
use kamiltonian_core::poly::MonoKey;
use kamiltonian_core::rational::q as rq;
use kamiltonian_core::system::{self, drive_displacement, Coupling, FramedSystem, OscillatorParams};
use kamiltonian_core::{engine, Coefficient, NumericCtx, PhasePolynomial, Scalar, Sym, SymPoly, SymbolicCtx};
use num_complex::Complex64;
use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{parse_process, PhaseSpaceConfig, RunConfig, SystemConfig};
use crate::duffing::{self, DomainSettings, DuffingSpec, FixedPointKind};
use crate::error::{Error, Result};
use crate::floquet::{self, BasisKind, ExcitationSettings, PhaseSpace, ReducedProblem, TruncatedHamiltonian};
use crate::golden::golden_suite;
use crate::io::{num, OutputDir};
use crate::numeric::{self, LandscapeConfig};

type C = Complex64;

/// Subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    /// Symbolic (and optionally numeric) effective Hamiltonian.
    Effham,
    /// Multiphoton resonance lines over a drive grid.
    Landscape,
    /// Floquet quasienergy scans, anticrossings and excitation maps.
    Floquet,
    /// Classical Duffing steady states, Fourier content, basins and domains.
    Duffing,
    /// Circuit-to-oscillator parameter preparation.
    Circuit,
    /// Golden-coefficient and algebraic self checks.
    Selftest,
}

impl Command {
    /// Command name (used in file names and messages).
    pub fn name(self) -> &'static str {
        match self {
            Command::Effham => "effham",
            Command::Landscape => "landscape",
            Command::Floquet => "floquet",
            Command::Duffing => "duffing",
            Command::Circuit => "circuit",
            Command::Selftest => "selftest",
        }
    }
}

/// Switches that are not part of the echoed configuration.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    /// Also write the enumerated diagrams of the target process (effham).
    pub dump_diagrams: bool,
}

/// What a command produced.
#[derive(Clone, Debug, Default)]
pub struct Report {
    /// Files written.
    pub files: Vec<PathBuf>,
    /// Summary lines for the terminal.
    pub summary: Vec<String>,
    /// Validity warnings (exit code 4 under `--strict`).
    pub warnings: Vec<String>,
}

/// Runs `cmd`. The configuration must already be validated.
pub fn run(cmd: Command, cfg: &RunConfig, opts: RunOptions) -> Result<Report> {
    let root = PathBuf::from(cfg.out.clone().unwrap_or_else(|| ".".into()));
    let mut out = OutputDir::create(&root, &cfg.echo())?;
    let mut report = Report { warnings: cfg.warnings()?, ..Report::default() };
    match cmd {
        Command::Effham => effham(cfg, opts, &mut out, &mut report)?,
        Command::Landscape => landscape(cfg, &mut out, &mut report)?,
        Command::Floquet => floquet_cmd(cfg, &mut out, &mut report)?,
        Command::Duffing => duffing_cmd(cfg, &mut out, &mut report)?,
        Command::Circuit => circuit(cfg, &mut out, &mut report)?,
        Command::Selftest => selftest(cfg, &mut out, &mut report)?,
    }
    report.files = out.written().to_vec();
    Ok(report)
}

fn cjson(z: C) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn term_json<S>(key: &MonoKey, c: &S, value: impl Fn(&S) -> Value) -> Value {
    let powers: Vec<Value> = key.pw.iter().map(|(m, n)| json!([m, n])).collect();
    json!({ "powers": powers, "hbar": key.hbar, "phase": key.phase.to_string(), "coefficient": value(c) })
}

fn poly_json<S: Scalar>(p: &PhasePolynomial<S>, modes: usize, value: impl Fn(&S) -> Value + Copy) -> Value {
    Value::Array(
        p.iter()
            .map(|(k, c)| {
                let mut t = term_json(k, c, value);
                if let Some(a) = t["powers"].as_array_mut() {
                    a.truncate(modes);
                }
                t
            })
            .collect(),
    )
}

fn default_order(q_: u32, p: u32) -> usize {
    ((q_ + p) as usize).saturating_sub(2).max(1)
}

fn need<T: Copy>(v: Option<T>, what: &str) -> Result<T> {
    v.ok_or_else(|| Error::Input(format!("this command needs {what}")))
}

/// Numeric context of a single-mode study at the configured drive point.
fn numeric_ctx(cfg: &RunConfig, osc: &OscillatorParams, sys: &FramedSystem) -> Result<NumericCtx> {
    let (q_, p) = cfg.process();
    let wd = need(cfg.drive.omega_d, "drive.omega_d")?;
    let xi2 = need(cfg.drive.xi2, "drive.xi2")?;
    let mut ctx = NumericCtx::new();
    ctx.classical = cfg.classical;
    osc.assign(&mut ctx);
    ctx.set(Sym::Wd(0), wd);
    if cfg.frame.generic {
        ctx.set(Sym::Wf(0), osc.omega).set(Sym::Delta(0), 0.0);
    } else {
        ctx.set(Sym::Delta(0), osc.omega - p as f64 * wd / q_ as f64);
    }
    if sys.tones > 0 {
        let unit = drive_displacement(osc.omega, wd, 1.0, cfg.drive.coupling.into())?;
        ctx.set_c(Sym::Xi(0), unit / unit.norm() * xi2.sqrt());
    }
    Ok(ctx)
}

fn effham(cfg: &RunConfig, opts: RunOptions, out: &mut OutputDir, report: &mut Report) -> Result<()> {
    let sys = cfg.framed_system(&cfg.ranks()?)?;
    let (q_, p) = cfg.process();
    let order = cfg.order.unwrap_or_else(|| default_order(q_, p));
    let ctx = SymbolicCtx { classical: cfg.classical };
    let sol = engine::solve::<Coefficient, _>(&sys, &ctx, order)?;
    let h = EffectiveHamiltonian::assemble(&sol.k_total(), &sys)?;
    let modes = sys.n_modes();
    let text = |c: &Coefficient| Value::String(c.to_string());
    let mut doc = json!({
        "order": order,
        "modes": modes,
        "classical": cfg.classical,
        "ranks": sys.ranks,
        "renormalizations": poly_json(&h.renorm, modes, text),
        "couplings": poly_json(&h.couplings, modes, text),
        "residual_terms": h.residual.len(),
    });
    report.summary.push(format!(
        "order {order}: {} renormalisations, {} couplings, {} rotating terms",
        h.renorm.len(),
        h.couplings.len(),
        h.residual.len()
    ));
    if let Some(t) = &cfg.target_coupling {
        let (tq, tp) = parse_process(t)?;
        if modes != 1 || sys.tones != 1 {
            return Err(Error::Input("a target coupling needs a driven single-mode system".into()));
        }
        let omega = omega_from(&h.coupling_at(tq as u8, 0, 0), tp as i32, 0);
        report.summary.push(format!("Omega_{tq},{tp} = {omega}"));
        doc["target"] = json!({ "q": tq, "p": tp, "omega": omega.to_string() });
    }
    if modes == 1 {
        if let (Some(osc), Some(_), Some(_)) = (cfg.oscillator()?, cfg.drive.omega_d, cfg.drive.xi2) {
            let nctx = numeric_ctx(cfg, &osc, &sys)?;
            let hn = numeric::numeric_k(&sys, &nctx, order)?;
            doc["numeric"] = json!({
                "renormalizations": poly_json(&hn.renorm, 1, |c: &C| cjson(*c)),
                "couplings": poly_json(&hn.couplings, 1, |c: &C| cjson(*c)),
            });
        }
    }
    out.json("effham.json", doc)?;
    if opts.dump_diagrams {
        let (tq, tp) = match &cfg.target_coupling {
            Some(t) => parse_process(t)?,
            None => (q_, p),
        };
        dump_diagrams(&sys, tq, tp, out, report)?;
    }
    Ok(())
}

fn dump_diagrams(sys: &FramedSystem, q_: u32, p: u32, out: &mut OutputDir, report: &mut Report) -> Result<()> {
    if sys.n_modes() != 1 || sys.tones != 1 || q_ + p > 8 {
        return Err(Error::Input("diagram dumps need a driven single mode and at most 8 external legs".into()));
    }
    let mut spec: Vec<ExtLeg> = (0..p).map(|_| ExtLeg::drive_in(0)).collect();
    spec.extend((0..q_).map(|_| ExtLeg::resonant_out(0)));
    let mut rows = Vec::new();
    for t in enumerate_unrooted_trees(spec.len()) {
        if !t.ranks().iter().all(|r| sys.ranks.contains(&(*r as u8))) {
            continue;
        }
        for d in decorate(&t, &spec, sys) {
            rows.push(vec![
                t.canonical(),
                d.canon.clone(),
                d.order.to_string(),
                d.multiplicity.to_string(),
                rootings(&d).len().to_string(),
            ]);
        }
    }
    report.summary.push(format!("{} diagrams for the ({q_}:{p}) process", rows.len()));
    out.csv("diagrams.csv", &["tree", "diagram", "order", "multiplicity", "rootings"], rows)?;
    Ok(())
}

fn landscape(cfg: &RunConfig, out: &mut OutputDir, report: &mut Report) -> Result<()> {
    let osc = cfg.oscillator()?.ok_or_else(|| Error::Input("landscape needs a numeric single-mode system".into()))?;
    let opts = cfg.landscape.as_ref().ok_or_else(|| Error::Input("landscape needs a `landscape` section".into()))?;
    let processes = opts.processes.iter().map(|s| parse_process(s)).collect::<Result<Vec<_>>>()?;
    let lc = LandscapeConfig {
        omega_d: opts.omega_d.points(),
        xi2: opts.xi2.points(),
        processes: processes.clone(),
        order: cfg.order,
        floor: opts.floor,
        start: opts.start,
        coupling: cfg.drive.coupling.into(),
    };
    let lines = numeric::resonance_landscape(&osc, &lc)?;
    let mut rows = Vec::new();
    for l in &lines {
        for pt in &l.points {
            rows.push(vec![l.q.to_string(), l.p.to_string(), num(pt.omega_d), num(pt.xi2), num(pt.rabi * cfg.unit_hz)]);
        }
    }
    report.summary.push(format!("{} resonance lines, {} points", lines.len(), rows.len()));
    out.csv("landscape.csv", &["q", "p", "omega_d", "xi2", "rabi_hz"], rows)?;

    if let (Some(wd), Some(xi2)) = (cfg.drive.omega_d, cfg.drive.xi2) {
        let mut docs = Vec::new();
        let even_only = osc.ranks().iter().all(|m| m % 2 == 0);
        for &(q_, p) in &processes {
            if even_only && (q_ + p) % 2 == 1 {
                continue;
            }
            let order = cfg.order.unwrap_or_else(|| default_order(q_, p));
            let h = numeric::process_k(&osc, q_, p, order, wd, xi2, cfg.drive.coupling.into())?;
            let sys = FramedSystem::single(q_ as i128, p as i128, &osc.ranks(), true);
            let mut ctx = numeric_ctx(cfg, &osc, &sys)?;
            ctx.set(Sym::Delta(0), osc.omega - p as f64 * wd / q_ as f64);
            let states = vec![opts.start, opts.start + q_];
            let r = numeric::reduce_subspace(&h, &states, &ctx)?;
            report.warnings.extend(r.warnings.iter().cloned());
            let n = states.len();
            let matrix: Vec<Vec<Value>> = (0..n).map(|i| (0..n).map(|j| cjson(r.matrix[(i, j)])).collect()).collect();
            docs.push(json!({
                "q": q_, "p": p, "order": order, "states": states,
                "matrix": matrix, "rates": r.rates, "provenance": r.provenance,
            }));
        }
        out.json("reduced.json", Value::Array(docs))?;
    }
    Ok(())
}

/// Static truncated Hamiltonian of the configured system and the factor
/// converting `|ξ|` into the amplitude of its drive operator.
fn truncated(cfg: &RunConfig, n_max: usize) -> Result<(TruncatedHamiltonian, f64)> {
    let osc = cfg.oscillator()?;
    let coupling: Coupling = cfg.drive.coupling.into();
    let wd = need(cfg.drive.omega_d, "drive.omega_d")?;
    let (th, omega, operator_scale) = match (&cfg.system, &osc) {
        (SystemConfig::Transmon { e_j, e_c, .. }, Some(o)) => {
            (TruncatedHamiltonian::transmon(*e_j, *e_c, 0.0, n_max), o.omega, 2.0 * o.phi_zps)
        }
        (SystemConfig::Ist { e_j, e_c, e_l, .. }, Some(o)) => {
            (TruncatedHamiltonian::ist(*e_j, *e_c, *e_l, n_max), o.omega, 2.0 * o.phi_zps)
        }
        (SystemConfig::Polynomial { .. }, Some(o)) => (
            TruncatedHamiltonian::polynomial(o.omega, &o.g, n_max, coupling == Coupling::Momentum),
            o.omega,
            1.0,
        ),
        _ => return Err(Error::Input("floquet needs a transmon, IST or polynomial system".into())),
    };
    if th.kind == BasisKind::Charge || matches!(cfg.system, SystemConfig::Ist { .. }) {
        if coupling != Coupling::Momentum {
            return Err(Error::Input("circuit systems are charge driven: use coupling = momentum".into()));
        }
    }
    let unit = drive_displacement(omega, wd, 1.0, coupling)?.norm();
    Ok((th.with_drive(wd, 0.0), operator_scale / unit))
}

fn floquet_cmd(cfg: &RunConfig, out: &mut OutputDir, report: &mut Report) -> Result<()> {
    let f = cfg.floquet.clone().unwrap_or_default();
    let wd = need(cfg.drive.omega_d, "drive.omega_d")?;
    let (th, per_xi) = truncated(cfg, f.n_max)?;
    let base = th.reduce(f.levels);
    let at = |xi2: f64| -> ReducedProblem {
        let mut r = base.clone();
        r.amp = per_xi * xi2.max(0.0).sqrt();
        r
    };
    let build = |xi2: f64| -> Result<ReducedProblem> { Ok(at(xi2)) };
    let mut did = false;

    if let Some(xi2) = cfg.drive.xi2 {
        did = true;
        let red = at(xi2);
        let prop = floquet::propagate_period(&red, 0.0, f.tol)?;
        let fr = floquet::floquet_diagonalize(&prop.u, wd);
        let gauge = floquet::gauge_shift_defect(&red, f.tol)?;
        let modes: Vec<Value> = f
            .states
            .iter()
            .map(|&k| {
                let m = floquet::mode_for_state(&fr, k);
                json!({ "state": k, "mode": m, "quasienergy_hz": fr.quasienergies[m] * cfg.unit_hz, "weight": floquet::weight(&fr, k, m) })
            })
            .collect();
        report.summary.push(format!("unitarity defect {:.2e}, gauge defect {:.2e}", prop.defect, gauge));
        out.json(
            "floquet_point.json",
            json!({ "xi2": xi2, "omega_d": wd, "unitarity_defect": prop.defect, "gauge_defect_hz": gauge * cfg.unit_hz, "modes": modes }),
        )?;
    }
    if let Some(grid) = &f.scan {
        did = true;
        let xs = grid.points();
        let (samples, _) = floquet::track_scan(&build, &xs, &f.states, f.tol)?;
        let mut rows = Vec::new();
        for s in &samples {
            if s.flagged {
                report.warnings.push(format!("ambiguous mode tracking at |xi|^2 = {}", s.x));
            }
            for (i, &k) in f.states.iter().enumerate() {
                rows.push(vec![num(wd), num(s.x), k.to_string(), num(s.quasienergies[i] * cfg.unit_hz), num(s.overlaps[i])]);
            }
        }
        out.csv("scan.csv", &["omega_d", "xi2", "state_index", "quasienergy_hz", "overlap"], rows)?;
        if let Some([i, j]) = f.gap {
            let (loc, gap) = floquet::hybridization_gap(&build, &xs, i, j, f.tol, 1e-6 * (grid.stop - grid.start).abs())?;
            report.summary.push(format!("({i},{j}) anticrossing at |xi|^2 = {loc:.6}, gap {:.6e} Hz", gap * cfg.unit_hz));
            out.json("gap.json", json!({ "states": [i, j], "xi2": loc, "gap_hz": gap * cfg.unit_hz }))?;
        }
    } else if f.gap.is_some() {
        return Err(Error::Input("floquet.gap needs floquet.scan".into()));
    }
    if let Some(hm) = &f.heatmap {
        did = true;
        let freqs = hm.omega_d.points();
        let xi2s = hm.xi2.points();
        let mut units = Vec::with_capacity(freqs.len());
        for &w in &freqs {
            let mut c = cfg.clone();
            c.drive.omega_d = Some(w);
            units.push((w, truncated(&c, f.n_max)?.1));
        }
        let build2 = |w: f64, xi2: f64| -> Result<ReducedProblem> {
            let per = units.iter().find(|(x, _)| *x == w).map(|(_, u)| *u).ok_or_else(|| Error::Input("frequency off grid".into()))?;
            let mut r = base.clone();
            r.freq_d = w;
            r.amp = per * xi2.max(0.0).sqrt();
            Ok(r)
        };
        let s = ExcitationSettings { tol: f.tol.max(1e-9), ..ExcitationSettings::default() };
        let cells = floquet::excitation_map(&build2, &freqs, &xi2s, &s)?;
        let invalid = cells.iter().filter(|c| c.p0to.is_none()).count();
        if invalid > 0 {
            report.warnings.push(format!("{invalid} heat-map cells without a trustworthy reference (left empty)"));
        }
        let rows = cells.iter().map(|c| vec![num(c.freq_d), num(c.xi2), c.p0to.map(num).unwrap_or_default()]);
        out.csv("heatmap.csv", &["omega_d", "xi2", "p0to"], rows)?;
    }
    if let Some(e) = &f.export {
        did = true;
        if th.kind != BasisKind::Fock {
            return Err(Error::Input("phase-space exports need a Fock-basis system (polynomial or IST)".into()));
        }
        let red = at(e.xi2);
        let prop = floquet::propagate_period(&red, 0.0, f.tol)?;
        let fr = floquet::floquet_diagonalize(&prop.u, wd);
        let m = floquet::mode_for_state(&fr, e.state);
        let (_, vecs) = th.static_eigen();
        let psi = vecs.columns(0, red.energies.len()) * floquet::mode_vector(&fr, m);
        let axis: Vec<f64> = (0..e.n)
            .map(|i| if e.n == 1 { 0.0 } else { -e.half_width + 2.0 * e.half_width * i as f64 / (e.n - 1) as f64 })
            .collect();
        let kind = match e.kind {
            PhaseSpaceConfig::Wigner => PhaseSpace::Wigner,
            PhaseSpaceConfig::Husimi => PhaseSpace::Husimi,
        };
        let grid = floquet::state_grid(&psi, &axis, &axis, kind);
        let mut rows = Vec::new();
        for (i, row) in grid.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                rows.push(vec![num(axis[j]), num(axis[i]), num(*v)]);
            }
        }
        out.csv("state.csv", &["x", "y", "value"], rows)?;
    }
    if !did {
        return Err(Error::Input("floquet: set drive.xi2 or one of floquet.scan, floquet.heatmap, floquet.export".into()));
    }
    Ok(())
}

fn kind_name(k: FixedPointKind) -> &'static str {
    match k {
        FixedPointKind::Node => "node",
        FixedPointKind::Saddle => "saddle",
        FixedPointKind::Marginal => "marginal",
    }
}

fn duffing_cmd(cfg: &RunConfig, out: &mut OutputDir, report: &mut Report) -> Result<()> {
    let (c3, c4) = match cfg.system {
        SystemConfig::Duffing { c3, c4 } => (c3, c4),
        _ => return Err(Error::Input("duffing needs a duffing system".into())),
    };
    let (q_, p) = cfg.process();
    let spec = DuffingSpec { c3, c4, gamma: cfg.drive.gamma, nu: need(cfg.drive.omega_d, "drive.omega_d (ν)")?, q: q_, p };
    report.warnings.extend(spec.warnings());
    let opts = cfg.duffing.clone().unwrap_or(crate::config::DuffingOptions {
        rho_max: None,
        ode_check: false,
        basins: None,
        domain: None,
    });
    let order = cfg.order.unwrap_or_else(|| default_order(q_, p).max(2));
    let model = duffing::classical_effective_k(&spec, order)?;
    let scale = if c4 != 0.0 { c4.abs() } else { (c3 * c3).max(1e-12) };
    let rho_max = opts.rho_max.unwrap_or(1.0 / scale);
    let states = duffing::steady_states(&model.k, rho_max)?;
    let domain = duffing::classify_domain(&model.k, &states);
    let (nodes, saddles) = duffing::count_kinds(&states);
    report.summary.push(format!("{} steady states ({nodes} nodes, {saddles} saddles), {} domain", states.len(), domain.name()));
    let sj: Vec<Value> = states
        .iter()
        .map(|s| {
            json!({
                "amplitude": cjson(s.amplitude), "rho": s.rho, "kind": kind_name(s.kind),
                "eigenvalues": [cjson(s.eigenvalues[0]), cjson(s.eigenvalues[1])], "residual": s.residual,
            })
        })
        .collect();
    out.json(
        "steady_states.json",
        json!({ "order": order, "delta": spec.delta(), "xi": cjson(spec.xi()), "domain": domain.name(), "states": sj }),
    )?;

    let mut rows = Vec::new();
    let mut ode_rows = Vec::new();
    for (i, s) in states.iter().enumerate() {
        let cs = duffing::reconstruct_fourier(&model, s.amplitude);
        for c in &cs {
            rows.push(vec![i.to_string(), num(c.freq_over_nu), num(c.value.re), num(c.value.im)]);
        }
        if opts.ode_check && s.kind == FixedPointKind::Node {
            let guess = duffing::state_from_fourier(&cs, spec.nu);
            let z = duffing::periodic_orbit(&spec, guess, q_)?;
            let ode = duffing::orbit_fourier(&spec, z, q_, 2048)?;
            // Deviation of the two principal lines: the subharmonic p/q and the drive.
            let mut worst: f64 = 0.0;
            for f in [p as f64 / q_ as f64, 1.0] {
                let (o, r) = (duffing::component_at(&ode, f), duffing::component_at(&cs, f));
                if o.norm() < 1e-9 && r.norm() < 1e-9 {
                    continue;
                }
                worst = worst.max((o - r).norm() / o.norm().max(1e-300));
            }
            report.summary.push(format!("state {i}: relative deviation of the principal Fourier lines from the ODE orbit {worst:.2e}"));
            for c in ode.iter().filter(|c| c.value.norm() > 1e-8) {
                ode_rows.push(vec![i.to_string(), num(c.freq_over_nu), num(c.value.re), num(c.value.im)]);
            }
        }
    }
    out.csv("fourier.csv", &["state", "freq_over_nu", "re", "im"], rows)?;
    if opts.ode_check {
        out.csv("ode_fourier.csv", &["state", "freq_over_nu", "re", "im"], ode_rows)?;
    }
    if let Some(b) = opts.basins {
        let nodes: Vec<C> = states.iter().filter(|s| s.kind == FixedPointKind::Node).map(|s| s.amplitude).collect();
        let pts = duffing::basin_portrait(&model.k, &nodes, b.half_width, b.n)?;
        let rows = pts.iter().map(|pt| vec![num(pt.q), num(pt.p), pt.basin.map(|k| k as i64).unwrap_or(-1).to_string()]);
        out.csv("basins.csv", &["Q", "P", "basin_id"], rows)?;
    }
    if let Some(d) = &opts.domain {
        let settings = DomainSettings::natural(q_, p, spec.gamma.max(1e-12));
        let cells = duffing::domain_diagram(q_, p, &d.delta.points(), &d.g4.points(), &settings)?;
        let rows = cells.iter().map(|c| {
            vec![num(c.delta_scaled), num(c.g4_scaled), c.nodes.to_string(), c.saddles.to_string(), c.domain.name().to_string()]
        });
        out.csv("domain.csv", &["delta_scaled", "g4_scaled", "nodes", "saddles", "domain"], rows)?;
    }
    Ok(())
}

fn circuit(cfg: &RunConfig, out: &mut OutputDir, report: &mut Report) -> Result<()> {
    let (q_, p) = cfg.process();
    let mut doc = match &cfg.system {
        SystemConfig::TwoMode { e_j, omega_a, omega_c, p_a, p_c, rank } => {
            let t = system::two_mode_normal(*e_j, *omega_a, *omega_c, *p_a, *p_c, rank.unwrap_or(6))?;
            json!({ "lambda_a": t.lambda_a, "lambda_c": t.lambda_c, "phi_zps": t.phi_zps,
                    "g": t.g.iter().map(|(m, v)| json!([m, v])).collect::<Vec<_>>() })
        }
        SystemConfig::Duffing { c3, c4 } => {
            let nu = need(cfg.drive.omega_d, "drive.omega_d (ν)")?;
            let (g3, g4, xi) = system::duffing_oscillator(*c3, *c4, nu, cfg.drive.gamma);
            json!({ "g3": g3, "g4": g4, "xi": cjson(xi), "delta": 1.0 - p as f64 * nu / q_ as f64 })
        }
        SystemConfig::Symbolic { .. } => return Err(Error::Input("circuit needs a physical system".into())),
        _ => {
            let o = cfg.oscillator()?.ok_or_else(|| Error::Input("circuit needs a physical system".into()))?;
            let mut d = json!({ "omega": o.omega, "phi_zps": o.phi_zps, "r": o.r,
                                "g": o.g.iter().map(|(m, v)| json!([m, v])).collect::<Vec<_>>() });
            if let (Some(wd), Some(xi2)) = (cfg.drive.omega_d, cfg.drive.xi2) {
                let coupling: Coupling = cfg.drive.coupling.into();
                let unit = drive_displacement(o.omega, wd, 1.0, coupling)?;
                let amp = xi2.sqrt() / unit.norm();
                let fr = system::displaced_rotating_frame(o.omega, wd, amp, coupling, q_, p)?;
                d["frame"] = json!({ "xi": cjson(fr.xi), "delta": fr.delta, "frame": fr.frame, "drive_amplitude": amp });
            }
            d
        }
    };
    doc["process"] = json!([q_, p]);
    report.summary.push(format!("prepared ({q_}:{p}) parameters"));
    out.json("circuit.json", doc)?;
    Ok(())
}

/// Random single-mode polynomial with small integer coefficients.
fn random_poly(rng: &mut ChaCha8Rng, terms: usize) -> SymPoly {
    let mut p = SymPoly::zero(1);
    for _ in 0..terms {
        let r = rng.next_u64();
        let m = (r % 4) as u8;
        let n = ((r >> 8) % 4) as u8;
        let c = ((r >> 16) % 7) as i128 - 3;
        p.add_term(MonoKey::single(m, n), &Coefficient::rational(rq(c, 1)));
    }
    p
}

fn selftest(cfg: &RunConfig, out: &mut OutputDir, report: &mut Report) -> Result<()> {
    let mut rows = Vec::new();
    let mut failed = 0;
    for c in golden_suite()? {
        if !c.passed {
            failed += 1;
        }
        report.summary.push(format!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name));
        rows.push(vec![c.name.to_string(), c.passed.to_string(), c.detail]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let trials = 32;
    let (mut assoc, mut poisson) = (0, 0);
    for _ in 0..trials {
        let (f, g, h) = (random_poly(&mut rng, 3), random_poly(&mut rng, 3), random_poly(&mut rng, 3));
        let left = f.star(&g, false).star(&h, false);
        let right = f.star(&g.star(&h, false), false);
        if left.sub(&right).is_zero() {
            assoc += 1;
        }
        let lim = f.bracket(&g, false).classical_limit();
        if lim.sub(&kamiltonian_core::poly::poisson_bracket(&f, &g)).is_zero() {
            poisson += 1;
        }
    }
    for (name, ok) in [("star associativity (random sweep)", assoc), ("classical limit of the bracket (random sweep)", poisson)] {
        let passed = ok == trials;
        if !passed {
            failed += 1;
        }
        report.summary.push(format!("{} {name}", if passed { "PASS" } else { "FAIL" }));
        rows.push(vec![name.to_string(), passed.to_string(), format!("{ok}/{trials} with seed {}", cfg.seed)]);
    }
    out.csv("selftest.csv", &["check", "passed", "detail"], rows)?;
    if failed > 0 {
        return Err(Error::Numeric(format!("{failed} self checks failed")));
    }
    Ok(())
}
