//! Block coordinate descent over ρ and θ (Algorithm 3).

use serde::Serialize;

use super::baselines::{baseline_dft_phase, baseline_epa};
use super::phase::{phase_opt_from, Auxiliary, PhaseModel};
use super::power::{power_step_with, solve_power_lp};
use super::{OptConfig, OptProblem};
use crate::analysis::{omega, PowerAllocation};
use crate::channel::PhaseShift;
use crate::error::{Error, Result};
use crate::linalg::CMat;

/// Snapshot of the algorithm between blocks.
#[derive(Clone, Debug)]
pub struct OptState {
    pub theta: PhaseShift,
    pub rho: PowerAllocation,
    /// Current max-min DC objective ϱ (W).
    pub varrho: f64,
    pub eta: f64,
    pub aux: Option<Auxiliary>,
    pub q: Option<CMat>,
    pub bcd_iter: usize,
    pub sca_iters: usize,
    pub outer_iters: usize,
    pub inner_iters: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub varrho: f64,
    /// min_ℓ Q_ℓ from the exact closed form (J).
    pub min_energy: f64,
    pub sinr_residual: f64,
    pub budget_residual: f64,
    pub eta: f64,
    pub rank_gap: f64,
}

#[derive(Clone, Debug)]
pub struct BcdResult {
    pub theta: PhaseShift,
    pub rho: PowerAllocation,
    pub varrho: f64,
    pub min_energy: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
    /// SCA iterations of every power step.
    pub sca_iterations: Vec<usize>,
    /// Inner penalty iterations of every outer loop of every phase step.
    pub inner_iterations: Vec<usize>,
    /// Outer penalty loops of every phase step.
    pub outer_iterations: Vec<usize>,
    pub state: OptState,
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Starts at DFT column 0 with equal powers and alternates Algorithm 1 and
/// Algorithm 2; η carries over from one phase step to the next. A new θ is
/// kept only if the best power allocation for it does at least as well as
/// the current one, so ϱ never decreases.
pub fn bcd(prob: &OptProblem, cfg: &OptConfig) -> Result<BcdResult> {
    let s = prob.s;
    let mut theta = baseline_dft_phase(s.n, 0);
    let epa = baseline_epa(s);
    let ec0 = prob.energy(&theta);
    let e0 = ec0.scale * (min_of(&ec0.normalized(&epa)) + 1.0);
    let varrho0 = omega(e0, &s.eh);
    if !(varrho0 > 0.0 && varrho0 < s.eh.phi) {
        return Err(Error::Domain(format!("initial ϱ = {varrho0} outside (0, {})", s.eh.phi)));
    }

    let first = power_step_with(prob, &ec0, varrho0, cfg)?;
    let mut rho = first.rho.clone();
    let mut t = first.t;
    let mut varrho = first.varrho;
    let mut sca_iterations = vec![first.sca_iterations];
    let mut inner_iterations = Vec::new();
    let mut outer_iterations = Vec::new();
    let mut trace = vec![TraceRow {
        iteration: 0,
        varrho,
        min_energy: first.min_energy,
        sinr_residual: first.sinr_residual,
        budget_residual: first.budget_residual,
        eta: cfg.eta0,
        rank_gap: 0.0,
    }];
    let mut state = OptState {
        theta: theta.clone(),
        rho: rho.clone(),
        varrho,
        eta: cfg.eta0,
        aux: None,
        q: None,
        bcd_iter: 0,
        sca_iters: first.sca_iterations,
        outer_iters: 0,
        inner_iters: 0,
    };
    let mut converged = false;
    let mut iterations = 0;

    for i in 1..=cfg.max_bcd {
        iterations = i;
        let model = PhaseModel::new(prob, &rho);
        let ph = phase_opt_from(&model, &theta, state.eta, cfg)?;
        outer_iterations.push(ph.outer_iterations);
        inner_iterations.extend(&ph.inner_iterations);
        state.eta = ph.eta;
        state.aux = Some(ph.aux.clone());
        state.q = Some(ph.q.clone());
        state.outer_iters += ph.outer_iterations;
        state.inner_iters += ph.inner_iterations.iter().sum::<usize>();

        let ec = prob.energy(&ph.theta);
        let (_, t_new) = solve_power_lp(prob, &ec)?;
        if t_new < t {
            converged = true;
            break;
        }
        let step = power_step_with(prob, &ec, varrho, cfg)?;
        sca_iterations.push(step.sca_iterations);
        theta = ph.theta;
        rho = step.rho;
        t = step.t;
        let rel = (step.varrho - varrho).abs() / step.varrho;
        varrho = step.varrho.max(varrho);
        trace.push(TraceRow {
            iteration: i,
            varrho,
            min_energy: step.min_energy,
            sinr_residual: step.sinr_residual,
            budget_residual: step.budget_residual,
            eta: ph.eta,
            rank_gap: ph.rank_gap,
        });
        state.theta = theta.clone();
        state.rho = rho.clone();
        state.varrho = varrho;
        state.bcd_iter = i;
        state.sca_iters += step.sca_iterations;
        if rel <= cfg.epsilon {
            converged = true;
            break;
        }
    }

    let ec = prob.energy(&theta);
    let min_energy = ec.scale * (min_of(&ec.normalized(&rho)) + 1.0);
    Ok(BcdResult {
        theta,
        rho,
        varrho,
        min_energy,
        iterations,
        converged,
        trace,
        sca_iterations,
        inner_iterations,
        outer_iterations,
        state,
    })
}
