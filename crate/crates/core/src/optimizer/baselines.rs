//! Equal power allocation, DFT codebook phases, and a common evaluator for
//! comparing any (θ, ρ) pair with the exact closed forms.

use serde::Serialize;

use super::power::solve_power_lp;
use super::OptProblem;
use crate::analysis::{eh_nonlinear, se, PowerAllocation};
use crate::channel::PhaseShift;
use crate::error::Result;
use crate::scenario::Scenario;

/// ρ̃ split equally over all K_I + K_E users.
pub fn baseline_epa(s: &Scenario) -> PowerAllocation {
    let k = s.k_i + s.k_e;
    let each = if k > 0 { s.rho_budget() / k as f64 } else { 0.0 };
    PowerAllocation { rho_i: vec![each; s.k_i], rho_e: vec![each; s.k_e] }
}

/// Column `index` of the N-point DFT: θ_n = exp(−j2π·n·index/N).
pub fn baseline_dft_phase(n: usize, index: usize) -> PhaseShift {
    let phases: Vec<f64> = (0..n)
        .map(|i| -std::f64::consts::TAU * ((i * index) % n.max(1)) as f64 / n as f64)
        .collect();
    PhaseShift::from_phases(&phases)
}

#[derive(Clone, Debug, Serialize)]
pub struct Evaluation {
    /// Received RF energy per EU (J).
    pub energy: Vec<f64>,
    /// Harvested DC energy per EU (J), through the sigmoid model.
    pub dc: Vec<f64>,
    pub sinr: Vec<f64>,
    pub se: Vec<f64>,
    pub min_energy: f64,
    pub min_dc: f64,
}

pub fn evaluate(prob: &OptProblem, theta: &PhaseShift, rho: &PowerAllocation) -> Result<Evaluation> {
    let energy = prob.energy(theta).energy(rho);
    let dc = energy.iter().map(|&e| eh_nonlinear(e, &prob.s.eh)).collect::<Result<Vec<_>>>()?;
    let sinr = prob.sinr.sinr(rho);
    let se = sinr.iter().map(|&g| se(g, prob.plan.tau, prob.s.tau_c)).collect();
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Evaluation { min_energy: min(&energy), min_dc: min(&dc), energy, dc, sinr, se })
}

/// DFT column 0 with equal powers.
pub fn dft_epa(prob: &OptProblem) -> Result<(PhaseShift, PowerAllocation, Evaluation)> {
    let theta = baseline_dft_phase(prob.s.n, 0);
    let rho = baseline_epa(prob.s);
    let ev = evaluate(prob, &theta, &rho)?;
    Ok((theta, rho, ev))
}

/// DFT column 0 with the optimal power allocation for it.
pub fn dft_opa(prob: &OptProblem) -> Result<(PhaseShift, PowerAllocation, Evaluation)> {
    let theta = baseline_dft_phase(prob.s.n, 0);
    let (rho, _) = solve_power_lp(prob, &prob.energy(&theta))?;
    let ev = evaluate(prob, &theta, &rho)?;
    Ok((theta, rho, ev))
}
