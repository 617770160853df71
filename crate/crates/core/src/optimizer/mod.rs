//! Max-min harvested-energy optimization: SCA power allocation, penalty SDP
//! phase design with the quadratic transform, and the outer block
//! coordinate descent, plus the DFT/EPA baselines.

pub mod baselines;
pub mod bcd;
pub mod phase;
pub mod power;
pub mod sdp;

use serde::{Deserialize, Serialize};

use crate::analysis::{energy_coefficients, sinr_coefficients, EnergyCoefficients, PowerAllocation, SinrCoefficients};
use crate::channel::{xi_matrix, PhaseShift};
use crate::error::{Error, Result};
use crate::estimation::{estimation_stats, EstimationStats, PilotPlan};
use crate::precoding::Scheme;
use crate::scenario::{EhModel, Scenario, StatCsi};

pub use baselines::{baseline_dft_phase, baseline_epa};
pub use bcd::{bcd, BcdResult, OptState, TraceRow};
pub use phase::{extract_theta, phase_opt, phase_opt_from, PhaseResult};
pub use power::{sca_power_step, PowerStep};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptConfig {
    /// Relative tolerance shared by every loop.
    pub epsilon: f64,
    pub eta0: f64,
    pub kappa1: f64,
    pub max_sca: usize,
    pub max_inner: usize,
    pub max_outer: usize,
    pub max_bcd: usize,
    /// Rank-gap tolerance per matrix dimension, ε₀ = rank_tol·(N+1).
    pub rank_tol: f64,
    pub sdp_tol: f64,
    pub lift: PhaseLift,
}

/// How each EU's quadratic enters the lifted SDP.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseLift {
    /// λ_max(W)·I in place of W, linearized around θ^(r).
    Majorized,
    /// W itself; the constraint is linear in Q either way.
    Exact,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-5,
            eta0: 1.0,
            kappa1: 0.5,
            max_sca: 10,
            max_inner: 25,
            max_outer: 60,
            max_bcd: 200,
            rank_tol: 1e-6,
            sdp_tol: 1e-8,
            lift: PhaseLift::Majorized,
        }
    }
}

/// Everything that stays fixed while ρ and θ move.
#[derive(Clone, Debug)]
pub struct OptProblem<'a> {
    pub scheme: Scheme,
    pub s: &'a Scenario,
    pub csi: &'a StatCsi,
    pub plan: &'a PilotPlan,
    pub st: EstimationStats,
    pub sinr: SinrCoefficients,
    /// Per-IU SINR targets (linear).
    pub qos: Vec<f64>,
}

impl<'a> OptProblem<'a> {
    /// Targets come from the scenario, or from the SINRs reached by equal
    /// power allocation when it sets none.
    pub fn new(scheme: Scheme, s: &'a Scenario, csi: &'a StatCsi, plan: &'a PilotPlan) -> Result<Self> {
        let st = estimation_stats(s, csi, plan);
        let sinr = sinr_coefficients(scheme, s.m, csi, plan, &st);
        let qos = match &s.qos {
            Some(q) if q.len() != csi.k_i() => {
                return Err(Error::Config(format!("{} SINR targets for {} IUs", q.len(), csi.k_i())))
            }
            Some(q) => q.clone(),
            None => sinr.sinr(&baseline_epa(s)),
        };
        Ok(Self { scheme, s, csi, plan, st, sinr, qos })
    }

    pub fn energy(&self, theta: &PhaseShift) -> EnergyCoefficients {
        energy_coefficients(self.scheme, self.s, self.csi, self.plan, &self.st, &xi_matrix(theta, self.csi))
    }

    /// σ²(τ_c − τ): the factor turning normalized energies into joules.
    pub fn scale(&self) -> f64 {
        (self.s.tau_c - self.plan.tau) as f64 * self.s.sigma2
    }

    /// Largest relative SINR shortfall and relative budget excess.
    pub fn residuals(&self, rho: &PowerAllocation) -> (f64, f64) {
        let sinr = self.sinr.sinr(rho);
        let short = sinr
            .iter()
            .zip(&self.qos)
            .map(|(s, q)| if *q > 0.0 { (q - s) / q } else { 0.0 })
            .fold(0.0, f64::max);
        let budget = self.s.rho_budget();
        (short, ((rho.total() - budget) / budget).max(0.0))
    }
}

/// g̃(ϱ; ϱ_r) = b − (ln((φ − ϱ)/ϱ_r) − (ϱ − ϱ_r)/ϱ_r)/a, an upper bound on
/// the logistic inverse that touches it at ϱ = ϱ_r.
pub fn g_tilde(varrho: f64, varrho_r: f64, eh: &EhModel) -> Result<f64> {
    for v in [varrho, varrho_r] {
        if !(v > 0.0 && v < eh.phi) {
            return Err(Error::Domain(format!("{v} outside (0, {})", eh.phi)));
        }
    }
    Ok(eh.b - (((eh.phi - varrho) / varrho_r).ln() - (varrho - varrho_r) / varrho_r) / eh.a)
}

/// The ϱ ∈ (0, φ) with g̃(ϱ; ϱ_r) = e. g̃ is increasing in ϱ; if even the
/// left end exceeds `e` the left end is returned.
pub fn g_tilde_inverse(e: f64, varrho_r: f64, eh: &EhModel) -> Result<f64> {
    let f = |x: f64| g_tilde(x, varrho_r, eh).map(|g| g - e);
    let (mut lo, mut hi) = (eh.phi * 1e-300_f64.max(f64::MIN_POSITIVE), eh.phi * (1.0 - 1e-16));
    if f(lo)? >= 0.0 {
        return Ok(lo);
    }
    if f(hi)? <= 0.0 {
        return Ok(hi);
    }
    // bisection in log space near zero, linear near φ
    for _ in 0..200 {
        let mid = if lo > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{eh_inverse, omega};

    #[test]
    fn g_tilde_touches_and_majorizes() {
        let eh = EhModel::default();
        for &r in &[1e-5, 1e-3, 0.01, 0.019] {
            assert!((g_tilde(r, r, &eh).unwrap() - eh_inverse(r, &eh).unwrap()).abs() < 1e-15);
            for i in 1..200 {
                let x = eh.phi * i as f64 / 200.0;
                assert!(g_tilde(x, r, &eh).unwrap() >= eh_inverse(x, &eh).unwrap() - 1e-15);
            }
        }
        assert!(g_tilde(0.0, 0.01, &eh).is_err());
        assert!(g_tilde(0.01, eh.phi, &eh).is_err());
    }

    #[test]
    fn g_tilde_inverse_round_trip() {
        let eh = EhModel::default();
        let e = 1e-4;
        let target = omega(e, &eh);
        let mut r = target * 0.5;
        for _ in 0..10 {
            let next = g_tilde_inverse(e, r, &eh).unwrap();
            assert!(next >= r * (1.0 - 1e-12));
            assert!(next <= target * (1.0 + 1e-12));
            r = next;
        }
        assert!((r - target).abs() / target < 1e-10);
    }
}
