//! Figure presets. Each preset is a list of experiment specs whose tables
//! share one column layout and are concatenated into `<dir>/<fig>.csv`.
//!
//! | preset | mode        | columns                                        |
//! |--------|-------------|------------------------------------------------|
//! | fig2   | closed_form | N, M, scheme, mean_energy, min_energy, ...     |
//! | fig3   | closed_form | prf_E, M, scheme, mean_energy, min_energy, ... |
//! | fig4   | optimize    | M, scheme, mean_energy, min_energy, ...        |
//! | fig5   | optimize    | K_E, N, scheme, mean_energy, min_energy, ...   |

use std::path::{Path, PathBuf};

use ris_swipt::precoding::Scheme;
use ris_swipt::scenario::Scenario;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{sibling, write_json, Table};
use crate::runner::compute;
use crate::spec::{ExperimentSpec, Mode, ScenarioRef, Sweep};
use crate::{CliError, Overrides};

pub const PRESETS: [&str; 4] = ["fig2", "fig3", "fig4", "fig5"];

/// One block of a preset: fixed columns plus the spec that fills them.
pub type Block = (Vec<(String, String)>, ExperimentSpec);

fn sweep(variable: &str, values: &[usize]) -> Option<Sweep> {
    Some(Sweep { variable: variable.into(), values: values.iter().map(|&v| json!(v)).collect() })
}

fn spec(scenario: Scenario, mode: Mode, sw: Option<Sweep>, drops: usize, schemes: Vec<Scheme>) -> ExperimentSpec {
    ExperimentSpec { scenario: ScenarioRef::Inline(Box::new(scenario)), sweep: sw, drops, mode, schemes, ..ExperimentSpec::default() }
}

pub fn blocks(name: &str) -> Result<Vec<Block>, CliError> {
    let both = vec![Scheme::Pzf, Scheme::Ppzf];
    let base = Scenario::default();
    let blocks = match name {
        // energy versus M for several RIS sizes
        "fig2" => [16usize, 64, 144]
            .iter()
            .map(|&n| {
                let s = Scenario { n, ..base.clone() };
                (vec![("N".into(), n.to_string())], spec(s, Mode::ClosedForm, sweep("M", &[32, 64, 96, 128, 160, 200]), 50, both.clone()))
            })
            .collect(),
        // shared against orthogonal EU pilots
        "fig3" => [0usize, base.k_e - 1]
            .iter()
            .map(|&prf| {
                let s = Scenario { prf_E: prf, ..base.clone() };
                (vec![("prf_E".into(), prf.to_string())], spec(s, Mode::ClosedForm, sweep("M", &[32, 64, 96, 128, 160, 200]), 50, both.clone()))
            })
            .collect(),
        // optimized against DFT baselines versus M
        "fig4" => {
            let s = Scenario { n: 16, ..base.clone() };
            vec![(Vec::new(), spec(s, Mode::Optimize, sweep("M", &[32, 64, 96, 128]), 3, vec![Scheme::Ppzf]))]
        }
        // optimized against DFT baselines versus N
        "fig5" => [5usize, 10]
            .iter()
            .map(|&k_e| {
                let s = Scenario { m: 64, k_e, ..base.clone() };
                (vec![("K_E".into(), k_e.to_string())], spec(s, Mode::Optimize, sweep("N", &[16, 36, 64]), 1, vec![Scheme::Ppzf]))
            })
            .collect(),
        other => {
            return Err(CliError::Config(format!("unknown preset {other:?}, expected one of {}", PRESETS.join(", "))))
        }
    };
    Ok(blocks)
}

#[derive(Serialize)]
struct PresetSidecar<'a> {
    preset: &'a str,
    blocks: Vec<Value>,
}

/// Runs a preset and writes `<dir>/<name>.csv` plus its sidecar (and trace
/// for the optimizer presets). Returns the written paths.
pub fn run_preset(name: &str, dir: &Path, ov: &Overrides) -> Result<Vec<PathBuf>, CliError> {
    let mut blocks = blocks(name)?;
    for (_, s) in &mut blocks {
        ov.apply(s);
    }
    let out = dir.join(format!("{name}.csv"));
    let mut table: Option<Table> = None;
    let mut trace: Option<Table> = None;
    for (fixed, s) in &blocks {
        let (t, tr, _) = compute(s, fixed)?;
        match &mut table {
            Some(acc) => acc.rows.extend(t.rows),
            None => table = Some(t),
        }
        if let Some(tr) = tr {
            match &mut trace {
                Some(acc) => acc.rows.extend(tr.rows),
                None => trace = Some(tr),
            }
        }
    }
    let sidecar = sibling(&out, ".json");
    let first = &blocks[0].1;
    let meta = vec![
        format!("ris-swipt preset={name} mode={}", first.mode.name()),
        format!("seed={} drops={} trials={}", first.seed, first.drops, first.trials),
        "energies in mJ (harvested DC energy per EU), mean_se in bit/s/Hz".into(),
        format!("config={name}.json"),
    ];
    let mut table = table.expect("every preset has a block");
    table.meta = meta.clone();
    table.write(&out)?;
    let mut files = vec![out.clone()];
    let json_blocks = blocks
        .iter()
        .map(|(fixed, s)| json!({ "fixed": fixed, "spec": s }))
        .collect();
    write_json(&sidecar, &PresetSidecar { preset: name, blocks: json_blocks })?;
    files.push(sidecar);
    if let Some(mut t) = trace {
        let path = sibling(&out, "_trace.csv");
        t.meta = meta;
        t.write(&path)?;
        files.push(path);
    }
    Ok(files)
}
