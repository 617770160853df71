//! Sweep execution for every mode.

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use ris_swipt::analysis::{closed_form_report, eh_nonlinear, se};
use ris_swipt::estimation::{build_pilot_plan, PilotPlan};
use ris_swipt::montecarlo::{
    collect_moments, energy_from_moments, lemma2_check, lemma3_check, sinr_from_moments, wishart_oracle, Check,
    OracleConfig, VerificationReport,
};
use ris_swipt::optimizer::baselines::{dft_epa, dft_opa, evaluate, Evaluation};
use ris_swipt::optimizer::{baseline_dft_phase, baseline_epa, bcd, OptProblem, TraceRow};
use ris_swipt::scenario::{sample_drop, Scenario, StatCsi};
use serde::Serialize;

use crate::output::{num, sibling, write_json, Table};
use crate::spec::{ExperimentSpec, Mode, SweepPoint};
use crate::CliError;

/// Result columns after the sweep columns.
pub const RESULT_COLUMNS: [&str; 6] = ["scheme", "mean_energy", "min_energy", "mean_se", "iterations", "status"];
pub const CHECK_COLUMNS: [&str; 7] = ["check", "closed", "empirical", "stderr", "rel_err", "rel_tol", "pass"];
pub const TRACE_COLUMNS: [&str; 9] =
    ["scheme", "drop", "iteration", "varrho", "min_energy", "sinr_residual", "budget_residual", "eta", "rank_gap"];

#[derive(Debug)]
pub struct RunOutcome {
    pub table: Table,
    pub trace: Option<Table>,
    pub report: Option<VerificationReport>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn verification_failed(&self) -> bool {
        self.report.as_ref().is_some_and(|r| !r.pass())
    }
}

/// One scheme/method on one drop.
#[derive(Clone, Debug)]
struct DropRow {
    scheme: String,
    mean_dc: f64,
    min_dc: f64,
    mean_se: f64,
    iterations: Option<usize>,
    feasible: bool,
    trace: Vec<TraceRow>,
}

impl DropRow {
    fn from_eval(scheme: String, ev: &Evaluation, iterations: Option<usize>, trace: Vec<TraceRow>) -> Self {
        Self {
            scheme,
            mean_dc: mean(&ev.dc),
            min_dc: ev.min_dc,
            mean_se: mean(&ev.se),
            iterations,
            feasible: true,
            trace,
        }
    }

    fn infeasible(scheme: String) -> Self {
        Self {
            scheme,
            mean_dc: f64::NAN,
            min_dc: f64::NAN,
            mean_se: f64::NAN,
            iterations: None,
            feasible: false,
            trace: Vec::new(),
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Drops are shared across sweep points: drop `d` always uses stream `d`.
fn drop_csi(s: &Scenario, seed: u64, d: usize) -> Result<StatCsi, CliError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(d as u64);
    Ok(sample_drop(s, &mut rng)?)
}

fn oracle_seed(seed: u64, point: usize, d: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ ((point as u64) << 32) ^ d as u64
}

fn plan_for(s: &Scenario) -> Result<PilotPlan, CliError> {
    Ok(build_pilot_plan(s.k_i, s.k_e, s.prf_I, s.prf_E)?)
}

fn closed_rows(spec: &ExperimentSpec, s: &Scenario, csi: &StatCsi) -> Result<Vec<DropRow>, CliError> {
    let plan = plan_for(s)?;
    let theta = baseline_dft_phase(s.n, 0);
    let rho = baseline_epa(s);
    spec.schemes
        .iter()
        .map(|&scheme| {
            let r = closed_form_report(scheme, s, csi, &plan, &theta, &rho)?;
            Ok(DropRow {
                scheme: scheme.name().into(),
                mean_dc: mean(&r.q_dc),
                min_dc: min(&r.q_dc),
                mean_se: mean(&r.se),
                iterations: None,
                feasible: true,
                trace: Vec::new(),
            })
        })
        .collect()
}

fn monte_carlo_rows(spec: &ExperimentSpec, s: &Scenario, csi: &StatCsi, seed: u64) -> Result<Vec<DropRow>, CliError> {
    let plan = plan_for(s)?;
    let theta = baseline_dft_phase(s.n, 0);
    let rho = baseline_epa(s);
    let cfg = OracleConfig { trials: spec.trials, rel_tol: spec.rel_tol, seed, model: spec.model };
    spec.schemes
        .iter()
        .map(|&scheme| {
            let b = collect_moments(scheme, s, csi, &plan, &theta, &cfg)?;
            let energy = energy_from_moments(&b, &rho, (s.tau_c - plan.tau) as f64 * s.sigma2);
            let dc = energy.iter().map(|e| eh_nonlinear(e.mean.max(0.0), &s.eh)).collect::<Result<Vec<_>, _>>()?;
            let se: Vec<f64> = sinr_from_moments(&b, &rho).iter().map(|g| se(g.mean, plan.tau, s.tau_c)).collect();
            Ok(DropRow {
                scheme: scheme.name().into(),
                mean_dc: mean(&dc),
                min_dc: min(&dc),
                mean_se: mean(&se),
                iterations: None,
                feasible: true,
                trace: Vec::new(),
            })
        })
        .collect()
}

fn optimizer_rows(spec: &ExperimentSpec, s: &Scenario, csi: &StatCsi, with_opt: bool) -> Result<Vec<DropRow>, CliError> {
    let plan = plan_for(s)?;
    let mut rows = Vec::new();
    for &scheme in &spec.schemes {
        let prob = OptProblem::new(scheme, s, csi, &plan)?;
        let name = scheme.name();
        let (_, _, epa) = dft_epa(&prob)?;
        rows.push(DropRow::from_eval(format!("{name}-dft-epa"), &epa, None, Vec::new()));
        match dft_opa(&prob) {
            Ok((_, _, opa)) => rows.push(DropRow::from_eval(format!("{name}-dft-opa"), &opa, None, Vec::new())),
            Err(ris_swipt::Error::Infeasible(_)) => rows.push(DropRow::infeasible(format!("{name}-dft-opa"))),
            Err(e) => return Err(e.into()),
        }
        if with_opt {
            match bcd(&prob, &spec.optimizer) {
                Ok(r) => {
                    let ev = evaluate(&prob, &r.theta, &r.rho)?;
                    rows.push(DropRow::from_eval(format!("{name}-opt"), &ev, Some(r.iterations), r.trace));
                }
                Err(ris_swipt::Error::Infeasible(_)) => rows.push(DropRow::infeasible(format!("{name}-opt"))),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(rows)
}

fn point_rows(spec: &ExperimentSpec, index: usize, p: &SweepPoint) -> Result<Vec<Vec<DropRow>>, CliError> {
    (0..spec.drops)
        .into_par_iter()
        .map(|d| {
            let csi = drop_csi(&p.scenario, spec.seed, d)?;
            match spec.mode {
                Mode::ClosedForm => closed_rows(spec, &p.scenario, &csi),
                Mode::MonteCarlo => monte_carlo_rows(spec, &p.scenario, &csi, oracle_seed(spec.seed, index, d)),
                Mode::Baseline => optimizer_rows(spec, &p.scenario, &csi, false),
                Mode::Optimize => optimizer_rows(spec, &p.scenario, &csi, true),
                Mode::Verify => unreachable!("verify has its own path"),
            }
        })
        .collect()
}

/// Averages each scheme over the drops where it was feasible.
fn aggregate(per_drop: &[Vec<DropRow>]) -> Vec<Vec<String>> {
    let Some(first) = per_drop.first() else { return Vec::new() };
    let n = per_drop.len();
    (0..first.len())
        .map(|j| {
            let ok: Vec<&DropRow> = per_drop.iter().map(|r| &r[j]).filter(|r| r.feasible).collect();
            let avg = |f: &dyn Fn(&DropRow) -> f64| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            let iters = if first[j].iterations.is_some() {
                num(avg(&|r| r.iterations.unwrap_or(0) as f64))
            } else {
                String::new()
            };
            let status = if ok.len() == n { "ok".to_string() } else { format!("infeasible {}/{n}", n - ok.len()) };
            vec![
                first[j].scheme.clone(),
                num(1e3 * avg(&|r| r.mean_dc)),
                num(1e3 * avg(&|r| r.min_dc)),
                num(avg(&|r| r.mean_se)),
                iters,
                status,
            ]
        })
        .collect()
}

fn meta(spec: &ExperimentSpec, sidecar: &str) -> Vec<String> {
    vec![
        format!("ris-swipt mode={} sweep={}", spec.mode.name(), spec.variable()),
        format!("seed={} drops={} trials={}", spec.seed, spec.drops, spec.trials),
        "energies in mJ (harvested DC energy per EU), mean_se in bit/s/Hz".into(),
        format!("config={sidecar}"),
    ]
}

/// Computes the tables without writing anything. `fixed` columns are
/// prepended to every row.
pub fn compute(
    spec: &ExperimentSpec,
    fixed: &[(String, String)],
) -> Result<(Table, Option<Table>, Option<VerificationReport>), CliError> {
    spec.validate()?;
    let points = spec.points()?;
    let mut head: Vec<&str> = fixed.iter().map(|(k, _)| k.as_str()).collect();
    head.push(spec.variable());
    let prefix = |label: &str| -> Vec<String> {
        let mut v: Vec<String> = fixed.iter().map(|(_, x)| x.clone()).collect();
        v.push(label.to_string());
        v
    };
    if spec.mode == Mode::Verify {
        let mut cols = head.clone();
        cols.extend(CHECK_COLUMNS);
        let mut table = Table::new(&cols);
        let report = verify(spec, &points)?;
        for (label, c) in &report {
            let mut row = prefix(label);
            row.extend([
                c.name.clone(),
                num(c.closed),
                num(c.empirical),
                num(c.stderr),
                num(c.rel_err()),
                num(c.rel_tol),
                c.pass.to_string(),
            ]);
            table.push(row);
        }
        let report = VerificationReport { checks: report.into_iter().map(|(_, c)| c).collect() };
        return Ok((table, None, Some(report)));
    }

    let mut cols = head.clone();
    cols.extend(RESULT_COLUMNS);
    let mut table = Table::new(&cols);
    let mut trace_cols = head;
    trace_cols.extend(TRACE_COLUMNS);
    let mut trace = Table::new(&trace_cols);
    for (i, p) in points.iter().enumerate() {
        let per_drop = point_rows(spec, i, p)?;
        for row in aggregate(&per_drop) {
            let mut r = prefix(&p.label);
            r.extend(row);
            table.push(r);
        }
        for (d, rows) in per_drop.iter().enumerate() {
            for r in rows {
                for t in &r.trace {
                    let mut row = prefix(&p.label);
                    row.extend([
                        r.scheme.clone(),
                        d.to_string(),
                        t.iteration.to_string(),
                        num(t.varrho),
                        num(1e3 * t.min_energy),
                        num(t.sinr_residual),
                        num(t.budget_residual),
                        num(t.eta),
                        num(t.rank_gap),
                    ]);
                    trace.push(row);
                }
            }
        }
    }
    let trace = (spec.mode == Mode::Optimize).then_some(trace);
    Ok((table, trace, None))
}

/// Closed forms against Monte Carlo at every point, drop and scheme, plus
/// the projector, Wishart and quadratic-form identities once per run.
fn verify(spec: &ExperimentSpec, points: &[SweepPoint]) -> Result<Vec<(String, Check)>, CliError> {
    let mut checks = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let s = &p.scenario;
        let plan = plan_for(s)?;
        let theta = baseline_dft_phase(s.n, 0);
        let rho = baseline_epa(s);
        let per_drop: Vec<Vec<Check>> = (0..spec.drops)
            .into_par_iter()
            .map(|d| -> Result<Vec<Check>, CliError> {
                let csi = drop_csi(s, spec.seed, d)?;
                let cfg = OracleConfig {
                    trials: spec.trials,
                    rel_tol: spec.rel_tol,
                    seed: oracle_seed(spec.seed, i, d),
                    model: spec.model,
                };
                let mut out = Vec::new();
                for &scheme in &spec.schemes {
                    let closed = closed_form_report(scheme, s, &csi, &plan, &theta, &rho)?;
                    let b = collect_moments(scheme, s, &csi, &plan, &theta, &cfg)?;
                    for (k, e) in sinr_from_moments(&b, &rho).into_iter().enumerate() {
                        let name = format!("drop{d} {} sinr[{k}]", scheme.name());
                        out.push(Check::new(name, closed.sinr[k], e, spec.rel_tol));
                    }
                    let energy = energy_from_moments(&b, &rho, (s.tau_c - plan.tau) as f64 * s.sigma2);
                    for (l, e) in energy.into_iter().enumerate() {
                        let name = format!("drop{d} {} energy[{l}]", scheme.name());
                        out.push(Check::new(name, closed.q_rf[l], e, spec.rel_tol));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_, _>>()?;
        checks.extend(per_drop.into_iter().flatten().map(|c| (p.label.clone(), c)));
    }

    let s = &points[0].scenario;
    let cfg = OracleConfig::new(spec.trials, spec.rel_tol, spec.seed);
    let tau_ki = s.tau_ki();
    let w = wishart_oracle(s.m, tau_ki.max(1), &cfg)?;
    let target = 1.0 / (s.m - tau_ki.max(1)) as f64;
    checks.push(("run".into(), Check::new(format!("wishart M={} tau={}", s.m, tau_ki.max(1)), target, w, spec.rel_tol)));
    let (diag, _) = lemma3_check(s.m, tau_ki, &cfg)?;
    let target = (s.m - tau_ki) as f64 / s.m as f64;
    checks.push(("run".into(), Check::new(format!("projector M={} tau={tau_ki}", s.m), target, diag, spec.rel_tol)));
    let (closed, est) = lemma2_check(16, &cfg)?;
    checks.push(("run".into(), Check::new("quadratic form M=16", closed, est, spec.rel_tol)));
    Ok(checks)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    spec: &'a ExperimentSpec,
    /// Fully resolved scenario at every sweep point.
    points: Vec<(&'a str, &'a Scenario)>,
    fixed: &'a [(String, String)],
}

/// Writes the table, its sidecar, and the trace or report next to `out`.
pub fn write_outputs(
    spec: &ExperimentSpec,
    fixed: &[(String, String)],
    out: &std::path::Path,
) -> Result<RunOutcome, CliError> {
    let (mut table, trace, report) = compute(spec, fixed)?;
    let sidecar = sibling(out, ".json");
    let sidecar_name = sidecar.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    table.meta = meta(spec, &sidecar_name);
    table.write(out)?;
    let points = spec.points()?;
    write_json(
        &sidecar,
        &Sidecar { spec, points: points.iter().map(|p| (p.label.as_str(), &p.scenario)).collect(), fixed },
    )?;
    let mut files = vec![out.to_path_buf(), sidecar];
    let trace = match trace {
        Some(mut t) => {
            let path = sibling(out, "_trace.csv");
            t.meta = meta(spec, &sidecar_name);
            t.write(&path)?;
            files.push(path);
            Some(t)
        }
        None => None,
    };
    if let Some(r) = &report {
        let path = sibling(out, "_report.json");
        write_json(&path, r)?;
        files.push(path);
    }
    Ok(RunOutcome { table, trace, report, files })
}

/// Runs a spec and writes its outputs to `spec.output`.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutcome, CliError> {
    write_outputs(spec, &[], &spec.output)
}
