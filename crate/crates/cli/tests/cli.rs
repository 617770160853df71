use std::fs;
use std::path::Path;
use std::process::Command;

use ris_swipt::montecarlo::CascadeModel;
use ris_swipt::precoding::Scheme;
use ris_swipt::scenario::Scenario;
use ris_swipt_cli::presets::run_preset;
use ris_swipt_cli::{run, ExperimentSpec, Mode, Overrides, ScenarioRef, Sweep};
use serde_json::json;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ris-swipt"))
}

fn write_spec(dir: &Path, name: &str, spec: &serde_json::Value) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(spec).unwrap()).unwrap();
    p
}

/// Data rows (no `#` lines, no header) split into fields.
fn rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    (header, lines.map(|l| l.split(',').map(str::to_string).collect()).collect())
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

fn sweep_spec(dir: &Path, variable: &str, values: Vec<serde_json::Value>, drops: usize) -> ExperimentSpec {
    ExperimentSpec {
        sweep: Some(Sweep { variable: variable.into(), values }),
        drops,
        output: dir.join("out.csv"),
        ..ExperimentSpec::default()
    }
}

#[test]
fn energy_grows_with_m() {
    let dir = tempfile::tempdir().unwrap();
    let spec = sweep_spec(dir.path(), "M", vec![json!(32), json!(64), json!(96), json!(128)], 20);
    let out = run(&spec).unwrap();
    assert_eq!(out.table.rows.len(), 8);
    let (h, r) = rows(&spec.output);
    assert_eq!(h[0], "M");
    for scheme in ["pzf", "ppzf"] {
        let e: Vec<f64> = r
            .iter()
            .filter(|row| row[col(&h, "scheme")] == scheme)
            .map(|row| row[col(&h, "mean_energy")].parse().unwrap())
            .collect();
        assert_eq!(e.len(), 4);
        assert!(e.windows(2).all(|w| w[1] > w[0]), "{scheme}: {e:?}");
    }
}

#[test]
fn shared_pilots_harvest_more() {
    let dir = tempfile::tempdir().unwrap();
    let k_e = Scenario::default().k_e;
    let spec = sweep_spec(dir.path(), "prf_E", vec![json!(0), json!(k_e - 1)], 20);
    run(&spec).unwrap();
    let (h, r) = rows(&spec.output);
    for scheme in ["pzf", "ppzf"] {
        let e: Vec<f64> = r
            .iter()
            .filter(|row| row[col(&h, "scheme")] == scheme)
            .map(|row| row[col(&h, "mean_energy")].parse().unwrap())
            .collect();
        assert!(e[1] > e[0], "{scheme}: orthogonal {} vs shared {}", e[0], e[1]);
    }
}

#[test]
fn empty_sweep_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let spec = sweep_spec(dir.path(), "N", Vec::new(), 1);
    run(&spec).unwrap();
    let text = fs::read_to_string(&spec.output).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body, vec!["N,scheme,mean_energy,min_energy,mean_se,iterations,status"]);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = sweep_spec(dir.path(), "K_E", vec![json!(2), json!(4)], 3);
    spec.mode = Mode::MonteCarlo;
    spec.trials = 1000;
    spec.scenario = ScenarioRef::Inline(Box::new(Scenario { m: 16, n: 4, k_i: 2, ..Scenario::default() }));
    run(&spec).unwrap();
    let first = fs::read(&spec.output).unwrap();
    let side = fs::read(dir.path().join("out.json")).unwrap();
    run(&spec).unwrap();
    assert_eq!(first, fs::read(&spec.output).unwrap());
    assert_eq!(side, fs::read(dir.path().join("out.json")).unwrap());
    spec.seed = 1;
    run(&spec).unwrap();
    assert_ne!(first, fs::read(&spec.output).unwrap());
}

#[test]
fn sidecar_holds_resolved_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    let spec = sweep_spec(dir.path(), "N", vec![json!(16), json!(36)], 1);
    run(&spec).unwrap();
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out.json")).unwrap()).unwrap();
    let points = side["points"].as_array().unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[1][1]["N"], 36);
    assert_eq!(side["spec"]["mode"], "closed_form");
    let text = fs::read_to_string(&spec.output).unwrap();
    assert!(text.starts_with("# ris-swipt mode=closed_form sweep=N\n"));
    assert!(text.contains("# config=out.json\n"));
}

#[test]
fn qos_sweep_accepts_scalars() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = sweep_spec(dir.path(), "qos", vec![json!(0.5), json!([0.5, 1.0, 1.0, 1.0, 1.0])], 1);
    spec.mode = Mode::Baseline;
    spec.scenario = ScenarioRef::Inline(Box::new(Scenario { m: 32, n: 16, ..Scenario::default() }));
    let out = run(&spec).unwrap();
    assert_eq!(out.table.rows[0][0], "0.5");
    assert_eq!(out.table.rows[4][0], "0.5;1.0;1.0;1.0;1.0");
}

#[test]
fn optimize_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = sweep_spec(dir.path(), "K_E", vec![json!(3)], 1);
    spec.mode = Mode::Optimize;
    spec.schemes = vec![Scheme::Ppzf];
    spec.scenario = ScenarioRef::Inline(Box::new(Scenario { m: 32, n: 9, k_i: 3, ..Scenario::default() }));
    let out = run(&spec).unwrap();
    let (h, r) = rows(&spec.output);
    let names: Vec<&str> = r.iter().map(|row| row[col(&h, "scheme")].as_str()).collect();
    assert_eq!(names, ["ppzf-dft-epa", "ppzf-dft-opa", "ppzf-opt"]);
    let min: Vec<f64> = r.iter().map(|row| row[col(&h, "min_energy")].parse().unwrap()).collect();
    assert!(min[2] >= min[1] && min[1] >= min[0], "{min:?}");
    assert!(!r[2][col(&h, "iterations")].is_empty());
    assert!(r.iter().all(|row| row[col(&h, "status")] == "ok"));
    let trace = out.trace.unwrap();
    assert!(!trace.rows.is_empty());
    assert!(dir.path().join("out_trace.csv").exists());
}

#[test]
fn preset_fig4_schema() {
    let dir = tempfile::tempdir().unwrap();
    let files = run_preset("fig4", dir.path(), &Overrides::default()).unwrap();
    assert!(files.iter().any(|f| f.ends_with("fig4.csv")));
    let (h, r) = rows(&dir.path().join("fig4.csv"));
    assert_eq!(&h[..3], ["M", "scheme", "mean_energy"]);
    assert!(h.contains(&"min_energy".to_string()));
    assert_eq!(r.len(), 4 * 3);
    assert!(dir.path().join("fig4.json").exists());
}

#[test]
fn unknown_preset_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_preset("fig9", dir.path(), &Overrides::default()).is_err());
    let st = bin().args(["preset", "fig9", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(st.code(), Some(3));
}

#[test]
fn bad_specs_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad_var = write_spec(dir.path(), "a.json", &json!({"sweep": {"variable": "nonsense", "values": [1]}}));
    let bad_json = dir.path().join("b.json");
    fs::write(&bad_json, "{ not json").unwrap();
    let bad_value = write_spec(dir.path(), "c.json", &json!({"sweep": {"variable": "N", "values": [15]}}));
    let no_drops = write_spec(dir.path(), "d.json", &json!({"drops": 0}));
    let unknown_field = write_spec(dir.path(), "e.json", &json!({"dropz": 2}));
    for p in [&bad_var, &bad_json, &bad_value, &no_drops, &unknown_field] {
        let out = bin().arg("run").arg(p).output().unwrap();
        assert_eq!(out.status.code(), Some(3), "{}: {}", p.display(), String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(bin().arg("run").arg(dir.path().join("missing.json")).status().unwrap().code(), Some(3));
    assert_eq!(bin().arg("frobnicate").status().unwrap().code(), Some(3));
}

#[test]
fn run_with_scenario_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let scen = Scenario { m: 16, n: 4, k_i: 2, k_e: 2, ..Scenario::default() };
    fs::write(dir.path().join("scen.json"), serde_json::to_string(&scen).unwrap()).unwrap();
    let spec = write_spec(
        dir.path(),
        "spec.json",
        &json!({"scenario": "scen.json", "mode": "monte_carlo", "trials": 1000, "output": "mc.csv"}),
    );
    let st = bin().args(["--seed", "5", "--trials", "2000", "--threads", "1", "run"]).arg(&spec).status().unwrap();
    assert_eq!(st.code(), Some(0));
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("mc.json")).unwrap()).unwrap();
    assert_eq!(side["spec"]["seed"], 5);
    assert_eq!(side["spec"]["trials"], 2000);
    assert_eq!(side["points"][0][1]["M"], 16);
    let text = fs::read_to_string(dir.path().join("mc.csv")).unwrap();
    assert!(text.contains("# seed=5 drops=1 trials=2000\n"));
}

/// The verification report decides the exit code: 0 when every check
/// passes, 2 otherwise.
#[test]
fn verify_exit_code_follows_report() {
    let dir = tempfile::tempdir().unwrap();
    for (model, name) in [(CascadeModel::Independent, "ind"), (CascadeModel::Shared, "shared")] {
        let spec = write_spec(
            dir.path(),
            &format!("{name}.json"),
            &json!({"trials": 4000, "rel_tol": 0.05, "model": model, "output": format!("{name}.csv")}),
        );
        let out = bin().arg("verify").arg(&spec).output().unwrap();
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(format!("{name}_report.json"))).unwrap()).unwrap();
        let checks = report["checks"].as_array().unwrap();
        let failed: Vec<&str> = checks.iter().filter(|c| c["pass"] == false).map(|c| c["name"].as_str().unwrap()).collect();
        assert_eq!(out.status.code(), Some(if failed.is_empty() { 0 } else { 2 }), "{name}: {failed:?}");
        // identities that hold whatever the cascade model
        for c in checks {
            let n = c["name"].as_str().unwrap();
            if n.contains("wishart") || n.contains("projector") || n.contains("quadratic") || n.contains("sinr") {
                assert_eq!(c["pass"], true, "{name}: {n}");
            }
        }
        // with independent cascades only the large-M form of the PPZF
        // cross-beam term can miss, and it overshoots (M/(M − τ_KI) at LoS)
        if model == CascadeModel::Independent {
            for c in checks.iter().filter(|c| c["pass"] == false) {
                let n = c["name"].as_str().unwrap();
                assert!(n.contains("ppzf energy"), "independent cascade: {n}");
                assert!(c["closed"].as_f64().unwrap() > c["empirical"].as_f64().unwrap(), "{n}");
            }
            assert!(checks.iter().filter(|c| c["name"].as_str().unwrap().contains("pzf energy") && !c["name"].as_str().unwrap().contains("ppzf")).all(|c| c["pass"] == true));
        }
    }
}
