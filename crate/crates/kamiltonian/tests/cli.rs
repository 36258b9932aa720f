//! End-to-end runs of the command-line binary: outputs, determinism and exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_kamiltonian"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("terminated by a signal")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn terms<'a>(doc: &'a Value, section: &str) -> &'a Vec<Value> {
    doc["result"][section].as_array().unwrap_or_else(|| panic!("missing {section}"))
}

/// Coefficient string of the term with the given mode powers and ħ power.
fn coefficient(list: &[Value], powers: [u64; 2], hbar: u64) -> String {
    list.iter()
        .find(|t| t["powers"][0][0] == powers[0] && t["powers"][0][1] == powers[1] && t["hbar"] == hbar)
        .map(|t| t["coefficient"].as_str().unwrap().to_string())
        .unwrap_or_else(|| panic!("no term {powers:?} ħ^{hbar}"))
}

const KERR_CAT: &str = r#"{"system":{"kind":"symbolic","ranks":[3,4]},"frame":{"q":2,"p":1}}"#;

#[test]
fn effham_reports_the_kerr_cat_hamiltonian() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), KERR_CAT, &["effham", "--order", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&dir.path().join("out/effham.json"));
    let renorm = terms(&doc, "renormalizations");
    assert_eq!(coefficient(renorm, [1, 1], 0), "-18*g3^2*xi*xic/wd + 6*g4*xi*xic + delta");
    assert_eq!(coefficient(renorm, [2, 2], 0), "-20/3*g3^2/wd + 3/2*g4");
    let couplings = terms(&doc, "couplings");
    assert_eq!(coefficient(couplings, [2, 0], 0), "g3*xi");
    // The metadata header echoes the configuration.
    assert_eq!(doc["metadata"]["frame"]["q"], 2);
}

#[test]
fn undriven_first_order_is_just_the_detuning() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), r#"{"drive":{"tones":0},"system":{"kind":"symbolic","ranks":[3,4]}}"#, &["effham", "--order", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&dir.path().join("out/effham.json"));
    let renorm = terms(&doc, "renormalizations");
    assert_eq!(renorm.len(), 1);
    assert_eq!(coefficient(renorm, [1, 1], 0), "delta");
    assert!(terms(&doc, "couplings").is_empty());
}

#[test]
fn target_coupling_flag_sets_the_frame() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), r#"{"system":{"kind":"symbolic","ranks":[3,4,5]}}"#, &["effham", "--target-coupling", "3:2", "--order", "3"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&dir.path().join("out/effham.json"));
    assert_eq!(doc["metadata"]["frame"]["q"], 3);
    assert_eq!(doc["metadata"]["frame"]["p"], 2);
    let target = doc["result"]["target"]["omega"].as_str().unwrap();
    assert_eq!(target, "-165/8*g3*g4/wd + 195/4*g3^3/wd^2 + 2*g5");
}

#[test]
fn diagram_dump_lists_the_three_legged_cat_family() {
    let dir = TempDir::new().unwrap();
    let o = run(
        dir.path(),
        r#"{"system":{"kind":"symbolic","ranks":[3,4,5]}}"#,
        &["effham", "--target-coupling", "3:2", "--order", "3", "--dump-diagrams"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, header, rows) = kamiltonian::io::read_csv(&dir.path().join("out/diagrams.csv")).unwrap();
    assert_eq!(header, ["tree", "diagram", "order", "multiplicity", "rootings"]);
    assert_eq!(rows.len(), 62);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cfg = r#"{"system":{"kind":"duffing","c3":0.0,"c4":-0.03},"drive":{"omega_d":1.56,"gamma":1e-5},
                  "frame":{"q":5,"p":3},"order":6}"#;
    // Same output directory (the metadata echoes it), two runs.
    let dir = TempDir::new().unwrap();
    let files = ["steady_states.json", "fourier.csv", "effham.json"];
    let mut first = Vec::new();
    for pass in 0..2 {
        let o = run(dir.path(), cfg, &["duffing"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let o = run(dir.path(), KERR_CAT, &["effham", "--order", "2"]);
        assert_eq!(code(&o), 0);
        let bytes: Vec<Vec<u8>> = files.iter().map(|f| fs::read(dir.path().join("out").join(f)).unwrap()).collect();
        if pass == 0 {
            first = bytes;
        } else {
            for (f, (x, y)) in files.iter().zip(first.iter().zip(&bytes)) {
                assert_eq!(x, y, "{f} differs between runs");
            }
        }
    }
}

#[test]
fn duffing_command_finds_the_five_three_fixed_points() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"system":{"kind":"duffing","c3":0.0,"c4":-0.03},"drive":{"omega_d":1.56,"gamma":1e-5},
                  "frame":{"q":5,"p":3},"order":8,
                  "duffing":{"basins":{"half_width":1.5,"n":9},
                             "domain":{"delta":{"start":-4,"stop":4,"n":5},"g4":{"start":-0.8,"stop":0.8,"n":5}}}}"#;
    let o = run(dir.path(), cfg, &["duffing"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&dir.path().join("out/steady_states.json"));
    let states = doc["result"]["states"].as_array().unwrap();
    assert_eq!(states.len(), 11);
    assert_eq!(doc["result"]["domain"], "orange");
    let (_, _, basins) = kamiltonian::io::read_csv(&dir.path().join("out/basins.csv")).unwrap();
    assert_eq!(basins.len(), 81);
    let (_, header, domain) = kamiltonian::io::read_csv(&dir.path().join("out/domain.csv")).unwrap();
    assert_eq!(header[4], "domain");
    assert_eq!(domain.len(), 25);
}

#[test]
fn floquet_command_writes_point_scan_and_phase_space() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"system":{"kind":"polynomial","omega":1.0,"g":[[4,-0.002]]},"drive":{"omega_d":1.7,"xi2":0.1},
                  "frame":{"q":5,"p":3},
                  "floquet":{"n_max":30,"levels":14,"scan":{"start":0.0,"stop":0.3,"n":4},
                             "export":{"state":0,"xi2":0.1,"half_width":2.0,"n":5,"kind":"wigner"}}}"#;
    let o = run(dir.path(), cfg, &["floquet"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let point = json(&dir.path().join("out/floquet_point.json"));
    assert!(point["result"]["unitarity_defect"].as_f64().unwrap() < 1e-8);
    let (_, _, scan) = kamiltonian::io::read_csv(&dir.path().join("out/scan.csv")).unwrap();
    assert_eq!(scan.len(), 4 * 6);
    let (_, _, grid) = kamiltonian::io::read_csv(&dir.path().join("out/state.csv")).unwrap();
    assert_eq!(grid.len(), 25);
}

#[test]
fn selftest_passes() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), "{}", &["selftest", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    let (_, _, rows) = kamiltonian::io::read_csv(&dir.path().join("out/selftest.csv")).unwrap();
    assert!(rows.len() >= 18);
    assert!(rows.iter().all(|r| r[1] == "true"), "{rows:?}");
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), r#"{"bogus":1}"#, &["effham"])), 2);
    assert_eq!(code(&run(dir.path(), r#"{"system":{"kind":"transmon","e_j":-1,"e_c":0.2}}"#, &["circuit"])), 2);
    assert_eq!(code(&run(dir.path(), KERR_CAT, &["effham", "--target-coupling", "3-2"])), 2);
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = TempDir::new().unwrap();
    // Generic frame at ω_d = 2ω: a vanishing small denominator.
    let generic = r#"{"system":{"kind":"polynomial","omega":1.0,"g":[[3,0.01],[4,-0.002]]},
                      "drive":{"omega_d":2.0,"xi2":0.1},"frame":{"generic":true}}"#;
    assert_eq!(code(&run(dir.path(), generic, &["effham", "--order", "2"])), 3);
    // Unattainable integrator tolerance.
    let tol = r#"{"system":{"kind":"polynomial","omega":1.0,"g":[[4,-0.002]]},"drive":{"omega_d":1.7,"xi2":0.1},
                  "floquet":{"n_max":10,"levels":6,"tol":1e-300}}"#;
    assert_eq!(code(&run(dir.path(), tol, &["floquet"])), 3);
}

#[test]
fn strict_mode_turns_warnings_into_exit_four() {
    let dir = TempDir::new().unwrap();
    let truncated = r#"{"system":{"kind":"transmon","e_j":30,"e_c":0.15,"rank":4},"frame":{"q":5,"p":3}}"#;
    let o = run(dir.path(), truncated, &["circuit"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    assert_eq!(code(&run(dir.path(), truncated, &["circuit", "--strict"])), 4);
}
