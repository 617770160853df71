//! End-to-end acceptance checks. Each `criterion*` function runs one check at
//! full scale and reports a verdict plus diagnostic lines; the `acceptance`
//! test binary prints them.

use std::f64::consts::TAU;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use ris_swipt::analysis::{
    closed_form_report, lemma4_moment, lemma4_moment_projected, pilot_gain_ratio, q_pzf, q_pzf_rayleigh,
    q_pzf_rayleigh_orth, se, sinr, energy_coefficients, PowerAllocation,
};
use ris_swipt::channel::{xi_matrix, PhaseShift};
use ris_swipt::estimation::{build_pilot_plan, estimation_stats, PilotPlan};
use ris_swipt::montecarlo::{
    collect_moments, energy_from_moments, lemma3_check, lemma4_oracle, pilot_gain_oracle, sinr_from_moments,
    verdict, wishart_oracle, CascadeModel, Estimate, OracleConfig,
};
use ris_swipt::optimizer::baselines::{dft_epa, dft_opa, evaluate};
use ris_swipt::optimizer::phase::PhaseModel;
use ris_swipt::optimizer::{baseline_dft_phase, baseline_epa, bcd, phase_opt, BcdResult, OptConfig, OptProblem};
use ris_swipt::precoding::Scheme;
use ris_swipt::scenario::{sample_drop, Scenario, StatCsi};
use ris_swipt::{CVec, Result, C64};

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub pass: bool,
    pub detail: String,
    pub notes: Vec<String>,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!("criterion {:2}: {} {} ({})", self.id, if self.pass { "PASS" } else { "FAIL" }, self.title, self.detail)
    }
}

pub fn drop_for(s: &Scenario, seed: u64) -> Result<StatCsi> {
    sample_drop(s, &mut ChaCha12Rng::seed_from_u64(seed))
}

pub fn random_theta(n: usize, seed: u64) -> PhaseShift {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    PhaseShift::from_phases(&(0..n).map(|_| TAU * rng.random::<f64>()).collect::<Vec<_>>())
}

fn models() -> [CascadeModel; 2] {
    [CascadeModel::Shared, CascadeModel::Independent]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// SE estimate from a SINR estimate, stderr carried through the derivative.
fn se_estimate(x: Estimate, tau: usize, tau_c: usize) -> Estimate {
    let pre = 1.0 - tau as f64 / tau_c as f64;
    Estimate { mean: se(x.mean, tau, tau_c), stderr: pre * x.stderr / ((1.0 + x.mean) * std::f64::consts::LN_2) }
}

/// Worst relative error over a set of (closed, estimate) pairs and whether
/// every pair passes.
fn compare(pairs: &[(f64, Estimate)], tol: f64) -> (bool, f64, f64) {
    let ok = pairs.iter().all(|(c, e)| verdict(*c, *e, tol));
    let worst = pairs.iter().map(|(c, e)| rel(e.mean, *c)).fold(0.0, f64::max);
    let se = pairs.iter().map(|(c, e)| e.stderr / c.abs()).fold(0.0, f64::max);
    (ok, worst, se)
}

/// Per-IU SE, closed form against the Monte Carlo hardening bound.
pub fn criterion1() -> Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();
    let mut worst = 0.0f64;
    for prf_e in [0usize, 9] {
        for scheme in [Scheme::Pzf, Scheme::Ppzf] {
            let s = Scenario { m: 64, n: 36, k_i: 5, k_e: 10, prf_E: prf_e, ..Scenario::default() };
            let csi = drop_for(&s, 7)?;
            let plan = build_pilot_plan(s.k_i, s.k_e, s.prf_I, s.prf_E)?;
            let st = estimation_stats(&s, &csi, &plan);
            let theta = random_theta(s.n, 3);
            let rho = baseline_epa(&s);
            let closed = sinr(scheme, &s, &csi, &plan, &st, &rho);
            for model in models() {
                let cfg = OracleConfig { trials: 10_000, rel_tol: 0.02, seed: 11, model };
                let t0 = Instant::now();
                let batches = collect_moments(scheme, &s, &csi, &plan, &theta, &cfg)?;
                let secs = t0.elapsed().as_secs_f64();
                let pairs: Vec<_> = sinr_from_moments(&batches, &rho)
                    .into_iter()
                    .zip(&closed)
                    .map(|(e, &c)| (se(c, plan.tau, s.tau_c), se_estimate(e, plan.tau, s.tau_c)))
                    .collect();
                let (ok, w, sd) = compare(&pairs, 0.02);
                notes.push(format!(
                    "{} prf_E={prf_e} {model:?}: {} worst rel err {w:.4} (max rel stderr {sd:.4}), {secs:.1} s",
                    scheme.name(),
                    if ok { "ok" } else { "off" }
                ));
                if model == CascadeModel::Shared {
                    pass &= ok && secs <= 120.0;
                    worst = worst.max(w);
                }
            }
        }
    }
    Ok(Outcome {
        id: 1,
        title: "closed-form SE vs Monte Carlo",
        pass,
        detail: format!("worst rel err {worst:.4}, tol 0.02"),
        notes,
    })
}

/// Average received energy, closed form against Monte Carlo.
pub fn criterion2() -> Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();
    let mut worst = [0.0f64; 2];
    let cases = [(Scheme::Pzf, 32usize, 16usize, 100_000usize, 0.02), (Scheme::Ppzf, 64, 16, 30_000, 0.05)];
    for (i, (scheme, m, n, trials, tol)) in cases.into_iter().enumerate() {
        for prf_e in [0usize, 9] {
            let s = Scenario { m, n, prf_E: prf_e, ..Scenario::default() };
            let csi = drop_for(&s, 7)?;
            let plan = build_pilot_plan(s.k_i, s.k_e, s.prf_I, s.prf_E)?;
            let st = estimation_stats(&s, &csi, &plan);
            let theta = random_theta(n, 3);
            let rho = baseline_epa(&s);
            let closed = energy_coefficients(scheme, &s, &csi, &plan, &st, &xi_matrix(&theta, &csi)).energy(&rho);
            for model in models() {
                let cfg = OracleConfig { trials, rel_tol: tol, seed: 11, model };
                let batches = collect_moments(scheme, &s, &csi, &plan, &theta, &cfg)?;
                let est = energy_from_moments(&batches, &rho, (s.tau_c - plan.tau) as f64 * s.sigma2);
                let pairs: Vec<_> = closed.iter().copied().zip(est).collect();
                let (ok, w, sd) = compare(&pairs, tol);
                notes.push(format!(
                    "{} M={m} N={n} prf_E={prf_e} {model:?}: {} worst rel err {w:.4} (max rel stderr {sd:.4}), tol {tol}",
                    scheme.name(),
                    if ok { "ok" } else { "off" }
                ));
                if model == CascadeModel::Shared {
                    pass &= ok;
                    worst[i] = worst[i].max(w);
                }
            }
        }
    }
    Ok(Outcome {
        id: 2,
        title: "closed-form energy vs Monte Carlo",
        pass,
        detail: format!("PZF worst rel err {:.4} (tol 0.02), PPZF worst rel err {:.4} (tol 0.05)", worst[0], worst[1]),
        notes,
    })
}

fn random_power(rng: &mut ChaCha12Rng, k_i: usize, k_e: usize, budget: f64) -> PowerAllocation {
    let w: Vec<f64> = (0..k_i + k_e).map(|_| rng.random::<f64>() + 0.05).collect();
    let t: f64 = w.iter().sum();
    let r: Vec<f64> = w.iter().map(|x| budget * x / t).collect();
    PowerAllocation { rho_i: r[..k_i].to_vec(), rho_e: r[k_i..].to_vec() }
}

/// Rayleigh and orthogonal-pilot reductions of the PZF energy.
pub fn criterion3() -> Result<Outcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    let (mut w1, mut w2) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let side = rng.random_range(2..=10usize);
        let k_i = rng.random_range(1..=6usize);
        let k_e = rng.random_range(1..=10usize);
        let s = Scenario {
            m: rng.random_range(k_i + 2..=128),
            n: side * side,
            k_i,
            k_e,
            prf_E: rng.random_range(0..k_e),
            prf_I: rng.random_range(0..k_i),
            delta: 0.0,
            d_br: rng.random_range(5.0..30.0),
            r_E: rng.random_range(1.0..8.0),
            p: 10f64.powf(rng.random_range(-3.0..0.0)),
            p_bs: rng.random_range(1.0..20.0),
            sigma2: 10f64.powf(rng.random_range(-14.0..-10.0)),
            ..Scenario::default()
        };
        let csi = drop_for(&s, rng.random())?;
        let theta = random_theta(s.n, rng.random());
        let rho = random_power(&mut rng, k_i, k_e, s.rho_budget());
        let plan = build_pilot_plan(k_i, k_e, s.prf_I, s.prf_E)?;
        let st = estimation_stats(&s, &csi, &plan);
        let exact = q_pzf(&s, &csi, &plan, &st, &rho, &theta);
        let ray = q_pzf_rayleigh(&s, &csi, &plan, &rho);
        for (a, b) in exact.iter().zip(&ray) {
            w1 = w1.max(rel(*a, *b));
        }
        let orth = build_pilot_plan(k_i, k_e, s.prf_I, 0)?;
        let ray = q_pzf_rayleigh(&s, &csi, &orth, &rho);
        let special = q_pzf_rayleigh_orth(&s, &csi, &orth, &rho);
        for (a, b) in ray.iter().zip(&special) {
            w2 = w2.max(rel(*a, *b));
        }
    }
    Ok(Outcome {
        id: 3,
        title: "Rayleigh and orthogonal-pilot reductions",
        pass: w1 <= 1e-12 && w2 <= 1e-12,
        detail: format!("max rel diff {w1:.2e} (delta = 0) and {w2:.2e} (orthogonal), tol 1e-12 over 100 sets"),
        notes: Vec::new(),
    })
}

/// Projector mean, fourth moments of the estimates, Wishart inverse.
pub fn criterion4() -> Result<Outcome> {
    let mut notes = Vec::new();
    let (m, tau) = (16usize, 4usize);
    let (diag, off) = lemma3_check(m, tau, &OracleConfig::new(10_000, 0.02, 5))?;
    let target = (m - tau) as f64 / m as f64;
    let ok3 = verdict(target, diag, 0.02);
    notes.push(format!(
        "projector M={m} tau={tau}: diag {:.5} vs {target:.5}, rel err {:.2e}, max |off-diag| {off:.2e}",
        diag.mean,
        rel(diag.mean, target)
    ));

    let s = Scenario { m: 4, n: 4, k_i: 2, k_e: 3, prf_E: 2, delta: 2.0, ..Scenario::default() };
    let csi = drop_for(&s, 21)?;
    let plan = build_pilot_plan(s.k_i, s.k_e, s.prf_I, s.prf_E)?;
    let st = estimation_stats(&s, &csi, &plan);
    let theta = random_theta(s.n, 8);
    let xi = xi_matrix(&theta, &csi);
    let mut ok4 = true;
    for (l, t) in [(0usize, 1usize), (2, 0), (1, 1)] {
        let cfg = OracleConfig::new(1_000_000, 0.03, 40 + l as u64 * 3 + t as u64);
        let (plain, proj) = lemma4_oracle(&s, &csi, &st, &theta, l, t, plan.tau_ki, &cfg)?;
        let c_plain = lemma4_moment(s.m, &st, &csi.lambda, s.delta, &xi, l, t);
        let c_proj = lemma4_moment_projected(s.m, plan.tau_ki, &st, &csi.lambda, s.delta, &xi, l, t);
        let (a, b) = (verdict(c_plain, plain, 0.03), verdict(c_proj, proj, 0.03));
        ok4 &= a && b;
        notes.push(format!(
            "fourth moments ({l},{t}): plain rel err {:.4}, projected rel err {:.4}",
            rel(plain.mean, c_plain),
            rel(proj.mean, c_proj)
        ));
    }

    let w = wishart_oracle(8, 4, &OracleConfig::new(100_000, 0.01, 9))?;
    let okw = verdict(0.25, w, 0.01);
    notes.push(format!("Wishart (8, 4): {:.5} vs 0.25, rel err {:.4}", w.mean, rel(w.mean, 0.25)));
    Ok(Outcome {
        id: 4,
        title: "projector, fourth-moment and Wishart oracles",
        pass: ok3 && ok4 && okw,
        detail: format!("projector {}, fourth moments {}, Wishart {}", ok3, ok4, okw),
        notes,
    })
}

/// EU 0 shares its pilot with EUs 1..size in `shared`, all orthogonal in
/// `orth`; both use the same pilot length.
fn equal_length_plans(k_i: usize, size: usize) -> (PilotPlan, PilotPlan) {
    let base = |eu_pilot: Vec<usize>| {
        let share_e = eu_pilot.iter().map(|&p| (0..size).filter(|&j| eu_pilot[j] == p).collect()).collect();
        PilotPlan {
            tau: k_i + size,
            tau_ki: k_i,
            tau_ke: size,
            iu_pilot: (0..k_i).collect(),
            eu_pilot,
            share_i: (0..k_i).map(|k| vec![k]).collect(),
            share_e,
        }
    };
    (base(vec![0; size]), base((0..size).collect()))
}

/// Pilot-contamination gain of the energy self-terms.
pub fn criterion5() -> Result<Outcome> {
    let mut pass = true;
    let mut notes = Vec::new();
    let mut details = Vec::new();
    for size in [2usize, 5] {
        let s = Scenario { m: 64, n: 16, k_i: 2, k_e: size, delta: 0.0, ..Scenario::default() };
        let ris = s.ris_pos();
        // equal distance to the RIS so every EU in the group has the same λ
        let eu = (0..size)
            .map(|j| {
                let phi = std::f64::consts::PI * (1.0 + (j as f64 + 0.5) / size as f64);
                [ris[0] + 3.0 * phi.cos(), ris[1] + 3.0 * phi.sin(), 0.0]
            })
            .collect();
        let iu = vec![[50.0, 3.0, 0.0], [48.0, -4.0, 0.0]];
        let csi = StatCsi::from_positions(&s, iu, eu)?;
        let (shared, orth) = equal_length_plans(s.k_i, size);
        // pilot power with τpNλ = σ², where contamination matters
        let s = Scenario { p: s.sigma2 / (shared.tau * s.n) as f64 / csi.lambda[0], ..s };
        let rho = baseline_epa(&s);
        let theta = random_theta(s.n, 4);
        let pi = pilot_gain_ratio(size, shared.tau, s.p, s.n, csi.lambda[0], s.sigma2);
        pass &= pi > 1.0;
        for model in models() {
            let cfg = OracleConfig { trials: 40_000, rel_tol: 0.03, seed: 17 + size as u64, model };
            let est = pilot_gain_oracle(&s, &csi, &shared, &orth, &rho, &theta, &cfg)?;
            let ok = verdict(pi, est, 0.03);
            notes.push(format!(
                "|S|={size} {model:?}: Pi {pi:.5}, Monte Carlo {:.5} +- {:.5}, rel err {:.4} {}",
                est.mean,
                est.stderr,
                rel(est.mean, pi),
                if ok { "ok" } else { "off" }
            ));
            if model == CascadeModel::Shared {
                pass &= ok;
                details.push(format!("|S|={size}: Pi {pi:.4} vs {:.4}", est.mean));
            }
        }
    }
    Ok(Outcome { id: 5, title: "pilot-contamination gain ratio", pass, detail: details.join(", "), notes })
}

/// Best objective over the 16-level phase grid on N = 4.
fn grid_optimum(model: &PhaseModel) -> f64 {
    let ph: Vec<C64> = (0..16).map(|i| C64::from_polar(1.0, TAU * i as f64 / 16.0)).collect();
    let mut best = f64::NEG_INFINITY;
    for idx in 0..1usize << 16 {
        let th = CVec::from_fn(4, |n, _| ph[(idx >> (4 * n)) & 15]);
        best = best.max(model.min_objective(&th));
    }
    best
}

/// Phase design against an exhaustive grid on N = 4.
pub fn criterion6() -> Result<Outcome> {
    let cfg = OptConfig::default();
    let mut hits = 0;
    let mut multi_hits = 0;
    let mut worst_gap = 0.0f64;
    let mut notes = Vec::new();
    for seed in 0..20u64 {
        let s = Scenario { n: 4, ..Scenario::default() };
        let csi = drop_for(&s, seed)?;
        let plan = build_pilot_plan(s.k_i, s.k_e, s.prf_I, s.prf_E)?;
        let prob = OptProblem::new(Scheme::Pzf, &s, &csi, &plan)?;
        let model = PhaseModel::new(&prob, &baseline_epa(&s));
        let codebook: Vec<_> = (0..4).map(|i| baseline_dft_phase(4, i)).collect();
        let start = codebook
            .iter()
            .max_by(|a, b| model.min_objective(a.as_vec()).total_cmp(&model.min_objective(b.as_vec())))
            .expect("non-empty codebook");
        let r = phase_opt(&model, start, &cfg)?;
        let best = grid_optimum(&model);
        let shortfall = (best - r.objective) / best;
        let multi = codebook
            .iter()
            .map(|th| phase_opt(&model, th, &cfg).map(|r| r.objective))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
        if shortfall <= 0.03 {
            hits += 1;
        }
        if (best - multi) / best <= 0.03 {
            multi_hits += 1;
        }
        worst_gap = worst_gap.max(r.rank_gap);
        notes.push(format!(
            "seed {seed:2}: grid {best:.5e}, algorithm {:.5e} (shortfall {shortfall:+.4}), multi-start {:+.4}, rank gap {:.1e}",
            r.objective,
            (best - multi) / best,
            r.rank_gap
        ));
    }
    notes.push(format!("multi-start over the DFT codebook: {multi_hits}/20 within 3%"));
    let gap_tol = 1e-6 * 5.0;
    Ok(Outcome {
        id: 6,
        title: "phase design vs exhaustive grid (N = 4)",
        pass: hits >= 18 && worst_gap <= gap_tol,
        detail: format!("{hits}/20 within 3% (need 18), worst rank gap {worst_gap:.1e} (tol {gap_tol:.0e})"),
        notes,
    })
}

/// One BCD run with its baselines.
pub struct BcdRun {
    pub k_e: usize,
    pub seed: u64,
    pub result: BcdResult,
    pub epa: f64,
    pub opa: f64,
    pub opt: f64,
    pub sinr_residual: f64,
    pub budget_residual: f64,
    pub secs: f64,
}

/// 20 seeds for each K_E ∈ {5, 10} at M = N = 64 with PPZF.
pub fn bcd_runs() -> Result<Vec<BcdRun>> {
    let cfg = OptConfig::default();
    let mut runs = Vec::new();
    for k_e in [5usize, 10] {
        for seed in 0..20u64 {
            let s = Scenario { m: 64, n: 64, k_e, ..Scenario::default() };
            let csi = drop_for(&s, 100 + seed)?;
            let plan = build_pilot_plan(s.k_i, s.k_e, s.prf_I, s.prf_E)?;
            let prob = OptProblem::new(Scheme::Ppzf, &s, &csi, &plan)?;
            let t0 = Instant::now();
            let result = bcd(&prob, &cfg)?;
            let secs = t0.elapsed().as_secs_f64();
            let (_, _, epa) = dft_epa(&prob)?;
            let (_, _, opa) = dft_opa(&prob)?;
            let opt = evaluate(&prob, &result.theta, &result.rho)?;
            let (sinr_residual, budget_residual) = prob.residuals(&result.rho);
            runs.push(BcdRun {
                k_e,
                seed,
                result,
                epa: epa.min_dc,
                opa: opa.min_dc,
                opt: opt.min_dc,
                sinr_residual,
                budget_residual,
                secs,
            });
        }
    }
    Ok(runs)
}

/// Monotone ϱ and iteration counts of the three loops.
pub fn criterion7(runs: &[BcdRun]) -> Outcome {
    let mut pass = true;
    let (mut sca, mut inner, mut outer) = (0usize, 0usize, 0usize);
    let mut notes = Vec::new();
    for r in runs {
        let res = &r.result;
        let monotone = res.trace.windows(2).all(|w| w[1].varrho >= w[0].varrho);
        let s = res.sca_iterations.iter().copied().max().unwrap_or(0);
        let i = res.inner_iterations.iter().copied().max().unwrap_or(0);
        pass &= monotone && s <= 10 && i <= 25 && res.iterations <= 60;
        sca = sca.max(s);
        inner = inner.max(i);
        outer = outer.max(res.iterations);
        notes.push(format!(
            "K_E={:2} seed {:2}: {} BCD iterations, max SCA {s}, max inner {i}, monotone {monotone}, {:.1} s",
            r.k_e, r.seed, res.iterations, r.secs
        ));
    }
    Outcome {
        id: 7,
        title: "algorithm behaviour (N = 64)",
        pass,
        detail: format!("max SCA {sca} (<= 10), max inner {inner} (<= 25), max BCD {outer} (<= 60)"),
        notes,
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Opt ≥ DFT+OPA ≥ DFT+EPA on the minimum harvested DC energy.
pub fn criterion8(runs: &[BcdRun]) -> Outcome {
    // LP and closed-form round-off only
    let geq = |a: f64, b: f64| a >= b * (1.0 - 1e-9);
    let mut ordered = 0;
    let mut notes = Vec::new();
    let mut gains = Vec::new();
    let mut opa_gains = Vec::new();
    for r in runs {
        let ok = geq(r.opt, r.opa) && geq(r.opa, r.epa);
        if ok {
            ordered += 1;
        }
        gains.push((r.opt - r.epa) / r.epa);
        opa_gains.push((r.opt - r.opa) / r.opa);
        notes.push(format!(
            "K_E={:2} seed {:2}: min DC energy EPA {:.4e} J, OPA {:.4e} J, Opt {:.4e} J{}",
            r.k_e,
            r.seed,
            r.epa,
            r.opa,
            r.opt,
            if ok { "" } else { "  ORDER VIOLATED" }
        ));
    }
    let med = median(gains.clone());
    let med_opa = median(opa_gains);
    for k_e in [5usize, 10] {
        let g: Vec<f64> = runs.iter().zip(&gains).filter(|(r, _)| r.k_e == k_e).map(|(_, g)| *g).collect();
        notes.push(format!("K_E={k_e}: median improvement over DFT+EPA {:.1}%", 100.0 * median(g)));
    }
    notes.push(format!("median improvement over DFT+OPA {:.1}%", 100.0 * med_opa));
    notes.push("reported in the paper at larger scale: 132%, 92%, 67%, 82% (not asserted)".into());
    Outcome {
        id: 8,
        title: "baseline dominance (M = N = 64)",
        pass: ordered == runs.len() && med > 0.0 && med >= 0.30,
        detail: format!("ordering held on {ordered}/{}, median improvement over DFT+EPA {:.1}% (>= 30%)", runs.len(), 100.0 * med),
        notes,
    }
}

/// SINR targets and power budget at the optimized solutions.
pub fn criterion9(runs: &[BcdRun]) -> Outcome {
    let sinr = runs.iter().map(|r| r.sinr_residual).fold(0.0, f64::max);
    let budget = runs.iter().map(|r| r.budget_residual).fold(0.0, f64::max);
    Outcome {
        id: 9,
        title: "QoS and budget feasibility",
        pass: sinr <= 1e-8 && budget <= 1e-10,
        detail: format!("max SINR shortfall {sinr:.1e} (<= 1e-8), max budget excess {budget:.1e} (<= 1e-10)"),
        notes: Vec::new(),
    }
}

struct Point {
    energy: [f64; 2],
    se_ok: bool,
}

/// Drop-averaged mean harvested DC energy per EU for both schemes at EPA
/// and θ = DFT column 0, plus whether PPZF SE ≥ PZF SE for every IU and drop.
fn sweep_point(s: &Scenario, drops: u64) -> Result<Point> {
    let plan = build_pilot_plan(s.k_i, s.k_e, s.prf_I, s.prf_E)?;
    let theta = baseline_dft_phase(s.n, 0);
    let rho = baseline_epa(s);
    let mut energy = [0.0; 2];
    let mut se_ok = true;
    for d in 0..drops {
        let csi = drop_for(s, 5000 + d)?;
        let pzf = closed_form_report(Scheme::Pzf, s, &csi, &plan, &theta, &rho)?;
        let ppzf = closed_form_report(Scheme::Ppzf, s, &csi, &plan, &theta, &rho)?;
        for (i, r) in [&pzf, &ppzf].into_iter().enumerate() {
            energy[i] += r.q_dc.iter().sum::<f64>() / r.q_dc.len() as f64 / drops as f64;
        }
        se_ok &= ppzf.se.iter().zip(&pzf.se).all(|(a, b)| *a >= b * (1.0 - 1e-12));
    }
    Ok(Point { energy, se_ok })
}

/// Energy trends in M, N and PRF_E; PPZF SE ≥ PZF SE throughout.
pub fn criterion10() -> Result<Outcome> {
    let drops = 50;
    let base = Scenario::default();
    let sweeps: [(&str, Vec<(usize, Scenario)>); 3] = [
        ("M", [32usize, 64, 96, 128].iter().map(|&m| (m, Scenario { m, ..base.clone() })).collect()),
        ("N", [16usize, 36, 64, 100].iter().map(|&n| (n, Scenario { n, ..base.clone() })).collect()),
        ("PRF_E", (0..base.k_e).map(|p| (p, Scenario { prf_E: p, ..base.clone() })).collect()),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    let mut summary = Vec::new();
    for (name, points) in sweeps {
        let mut prev: Option<[f64; 2]> = None;
        let mut increasing = true;
        let mut se_ok = true;
        for (x, s) in &points {
            let p = sweep_point(s, drops)?;
            if let Some(q) = prev {
                increasing &= p.energy[0] > q[0] && p.energy[1] > q[1];
            }
            prev = Some(p.energy);
            se_ok &= p.se_ok;
            notes.push(format!(
                "{name}={x:3}: mean DC energy PZF {:.4} mJ, PPZF {:.4} mJ, PPZF SE >= PZF SE {}",
                p.energy[0] * 1e3,
                p.energy[1] * 1e3,
                p.se_ok
            ));
        }
        pass &= increasing && se_ok;
        summary.push(format!("{name}: increasing {increasing}, SE order {se_ok}"));
    }
    Ok(Outcome { id: 10, title: "trends over M, N and PRF_E (50 drops)", pass, detail: summary.join("; "), notes })
}
