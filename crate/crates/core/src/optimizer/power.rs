//! Power allocation at fixed θ (Algorithm 1).
//!
//! Every constraint is affine in ρ and g̃ is increasing in ϱ, so the ρ that
//! maximizes ϱ does not depend on the expansion point: one LP gives the
//! best min-EU energy, and the SCA loop only walks ϱ up to it.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use super::{g_tilde_inverse, OptConfig, OptProblem};
use crate::analysis::{EnergyCoefficients, PowerAllocation};
use crate::channel::PhaseShift;
use crate::error::{Error, Result};
use crate::optimizer::baselines::baseline_epa;

/// Relative margin put on every SINR target inside the LP.
const QOS_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct PowerStep {
    pub rho: PowerAllocation,
    /// ϱ after the last SCA iterate (W).
    pub varrho: f64,
    /// Every ϱ^(r), starting with the expansion point passed in.
    pub varrho_trace: Vec<f64>,
    /// min_ℓ of the normalized energy Q_ℓ/(σ²(τ_c − τ)) − 1.
    pub t: f64,
    /// min_ℓ Q_ℓ (J).
    pub min_energy: f64,
    pub sca_iterations: usize,
    pub sinr_residual: f64,
    pub budget_residual: f64,
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn sinr_ok(prob: &OptProblem, rho: &PowerAllocation) -> bool {
    prob.residuals(rho).0 <= 1e-9
}

/// IUs that miss their target even with the whole budget and no one else on.
fn lonely_infeasible(prob: &OptProblem) -> Vec<usize> {
    let budget = prob.s.rho_budget();
    let c = &prob.sinr;
    (0..prob.qos.len())
        .filter(|&k| c.signal[k] * budget / (c.iu[(k, k)] * budget + 1.0) < prob.qos[k])
        .collect()
}

/// max_ρ min_ℓ f_ℓ(ρ) s.t. SINR targets and Σρ ≤ ρ̃, as one LP. The result
/// always spends the whole budget: scaling ρ up raises every energy and
/// every SINR.
pub fn solve_power_lp(prob: &OptProblem, ec: &EnergyCoefficients) -> Result<(PowerAllocation, f64)> {
    let (k_i, k_e) = (prob.csi.k_i(), prob.csi.k_e());
    if k_e == 0 {
        return Err(Error::Config("power optimization needs at least one EU".into()));
    }
    let budget = prob.s.rho_budget();
    let epa = baseline_epa(prob.s);
    let t_ref = {
        let t = min_of(&ec.normalized(&epa));
        if t > 0.0 {
            t
        } else {
            1.0
        }
    };

    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let x: Vec<_> = (0..k_i + k_e).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
    let tv = lp.add_var(1.0, (0.0, f64::INFINITY));

    for l in 0..k_e {
        let mut row: Vec<_> = (0..k_i).map(|k| (x[k], ec.iu[l] * budget)).collect();
        row.extend((0..k_e).map(|t| (x[k_i + t], ec.eu[(l, t)] * budget)));
        let scale = row.iter().map(|(_, a)| a.abs()).fold(t_ref, f64::max);
        let mut row: Vec<_> = row.into_iter().map(|(v, a)| (v, a / scale)).collect();
        row.push((tv, -t_ref / scale));
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, 0.0);
    }
    let c = &prob.sinr;
    for k in 0..k_i {
        let g = prob.qos[k] * (1.0 + QOS_MARGIN);
        if g <= 0.0 {
            continue;
        }
        let mut row: Vec<_> = (0..k_i)
            .map(|t| {
                let own = if t == k { c.signal[k] } else { 0.0 };
                (x[t], (own - g * c.iu[(k, t)]) * budget)
            })
            .collect();
        row.extend((0..k_e).map(|t| (x[k_i + t], -g * c.eu[k] * budget)));
        let scale = row.iter().map(|(_, a)| a.abs()).fold(g, f64::max);
        let row: Vec<_> = row.into_iter().map(|(v, a)| (v, a / scale)).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Ge, g / scale);
    }
    let all: Vec<_> = x.iter().map(|&v| (v, 1.0)).collect();
    lp.add_constraint(all.as_slice(), ComparisonOp::Le, 1.0);

    let sol = match lp.solve() {
        Ok(s) => s,
        Err(minilp::Error::Infeasible) => {
            let bad = lonely_infeasible(prob);
            let msg = if bad.is_empty() {
                "SINR targets are jointly unattainable within the power budget".to_string()
            } else {
                format!("SINR targets of IUs {bad:?} exceed what the full budget can deliver")
            };
            return Err(Error::Infeasible(msg));
        }
        Err(e) => return Err(Error::Solver(format!("power LP: {e}"))),
    };

    let raw: Vec<f64> = x.iter().map(|&v| sol[v].max(0.0) * budget).collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Solver("power LP returned an all-zero allocation".into()));
    }
    let mut rho = PowerAllocation { rho_i: raw[..k_i].to_vec(), rho_e: raw[k_i..].to_vec() }.scaled(budget / total);
    let mut t = min_of(&ec.normalized(&rho));

    let t_epa = min_of(&ec.normalized(&epa));
    if sinr_ok(prob, &epa) && (t_epa > t || !sinr_ok(prob, &rho)) {
        rho = epa;
        t = t_epa;
    }
    Ok((rho, t))
}

/// Algorithm 1 at fixed θ, started from ϱ^(0) = `varrho_r`.
pub fn sca_power_step(prob: &OptProblem, theta: &PhaseShift, varrho_r: f64, cfg: &OptConfig) -> Result<PowerStep> {
    let ec = prob.energy(theta);
    power_step_with(prob, &ec, varrho_r, cfg)
}

pub fn power_step_with(prob: &OptProblem, ec: &EnergyCoefficients, varrho_r: f64, cfg: &OptConfig) -> Result<PowerStep> {
    let eh = &prob.s.eh;
    if !(varrho_r > 0.0 && varrho_r < eh.phi) {
        return Err(Error::Domain(format!("expansion point {varrho_r} outside (0, {})", eh.phi)));
    }
    let (rho, t) = solve_power_lp(prob, ec)?;
    let target = ec.scale * (t + 1.0);

    let mut trace = vec![varrho_r];
    let mut varrho = varrho_r;
    let mut iters = 0;
    while iters < cfg.max_sca {
        let next = g_tilde_inverse(target, varrho, eh)?.max(varrho);
        iters += 1;
        trace.push(next);
        let rel = (next - varrho).abs() / next;
        varrho = next;
        if rel < cfg.epsilon {
            break;
        }
    }
    let (sinr_residual, budget_residual) = prob.residuals(&rho);
    Ok(PowerStep {
        rho,
        varrho,
        varrho_trace: trace,
        t,
        min_energy: target,
        sca_iterations: iters,
        sinr_residual,
        budget_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::omega;
    use crate::estimation::build_pilot_plan;
    use crate::precoding::Scheme;
    use crate::scenario::{sample_drop, Scenario};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn setup(k_i: usize, k_e: usize, seed: u64) -> (Scenario, crate::scenario::StatCsi, crate::estimation::PilotPlan) {
        let s = Scenario { m: 16, n: 9, k_i, k_e, ..Scenario::default() };
        let csi = sample_drop(&s, &mut ChaCha12Rng::seed_from_u64(seed)).unwrap();
        let plan = build_pilot_plan(k_i, k_e, s.prf_I, s.prf_E).unwrap();
        (s, csi, plan)
    }

    #[test]
    fn feasible_and_budget_tight() {
        let (s, csi, plan) = setup(3, 4, 5);
        for scheme in [Scheme::Pzf, Scheme::Ppzf] {
            let prob = OptProblem::new(scheme, &s, &csi, &plan).unwrap();
            let theta = PhaseShift::ones(s.n);
            let ec = prob.energy(&theta);
            let v0 = omega(ec.scale * (min_of(&ec.normalized(&baseline_epa(&s))) + 1.0), &s.eh);
            let st = sca_power_step(&prob, &theta, v0, &OptConfig::default()).unwrap();
            assert!(st.sinr_residual <= 1e-8, "{}", st.sinr_residual);
            assert!((st.rho.total() - s.rho_budget()).abs() <= 1e-10 * s.rho_budget());
            assert!(st.varrho_trace.windows(2).all(|w| w[1] >= w[0]));
            assert!(st.sca_iterations <= 10);
            assert!(st.t >= min_of(&ec.normalized(&baseline_epa(&s))) * (1.0 - 1e-12));
            let tgt = omega(st.min_energy, &s.eh);
            assert!((st.varrho - tgt).abs() / tgt < 1e-4);
        }
    }

    #[test]
    fn single_eu_takes_all_residual_power() {
        let (mut s, csi, plan) = setup(2, 1, 9);
        let prob0 = OptProblem::new(Scheme::Pzf, &s, &csi, &plan).unwrap();
        // half of EPA's SINRs as targets, so they do not pin the solution
        s.qos = Some(prob0.qos.iter().map(|q| 0.5 * q).collect());
        let prob = OptProblem::new(Scheme::Pzf, &s, &csi, &plan).unwrap();
        let ec = prob.energy(&PhaseShift::ones(s.n));
        let (rho, t) = solve_power_lp(&prob, &ec).unwrap();
        assert!((rho.total() - s.rho_budget()).abs() <= 1e-10 * s.rho_budget());

        // grid oracle over (ρ_I1, ρ_I2) with the rest to the EU
        let b = s.rho_budget();
        let mut best = f64::NEG_INFINITY;
        let steps = 400;
        for i in 0..=steps {
            for j in 0..=(steps - i) {
                let r = PowerAllocation {
                    rho_i: vec![b * i as f64 / steps as f64, b * j as f64 / steps as f64],
                    rho_e: vec![b * (steps - i - j) as f64 / steps as f64],
                };
                if prob.residuals(&r).0 <= 0.0 {
                    best = best.max(ec.normalized(&r)[0]);
                }
            }
        }
        assert!(t >= best * (1.0 - 1e-9));
        assert!(t <= best * (1.0 + 0.02));
        // the IUs sit exactly on their targets, the EU gets the rest
        let sinr = prob.sinr.sinr(&rho);
        for k in 0..2 {
            if ec.iu[0] < ec.eu[(0, 0)] {
                assert!((sinr[k] - prob.qos[k]).abs() / prob.qos[k] < 1e-6);
            }
        }
    }

    #[test]
    fn impossible_target_is_named() {
        let (mut s, csi, plan) = setup(2, 2, 3);
        s.qos = Some(vec![1e12, 0.1]);
        let prob = OptProblem::new(Scheme::Pzf, &s, &csi, &plan).unwrap();
        let err = solve_power_lp(&prob, &prob.energy(&PhaseShift::ones(s.n))).unwrap_err();
        match err {
            Error::Infeasible(m) => assert!(m.contains("[0]"), "{m}"),
            e => panic!("{e:?}"),
        }
    }
}
