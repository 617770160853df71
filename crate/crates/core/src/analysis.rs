//! Closed-form SINR/SE and average harvested energy, the sigmoidal EH model
//! and the pilot-contamination gain ratio.
//!
//! Powers enter as ρ = p/σ² (dimensionless); energies come out in joules
//! for a unit symbol duration.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::channel::{xi_matrix, PhaseShift};
use crate::error::{Error, Result};
use crate::estimation::{estimation_stats, EstimationStats, PilotPlan};
use crate::linalg::{CMat, C64};
use crate::precoding::Scheme;
use crate::scenario::{EhModel, Scenario, StatCsi};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub rho_i: Vec<f64>,
    pub rho_e: Vec<f64>,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.rho_i.iter().sum::<f64>() + self.rho_e.iter().sum::<f64>()
    }

    pub fn sum_i(&self) -> f64 {
        self.rho_i.iter().sum()
    }

    pub fn sum_e(&self) -> f64 {
        self.rho_e.iter().sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            rho_i: self.rho_i.iter().map(|r| r * c).collect(),
            rho_e: self.rho_e.iter().map(|r| r * c).collect(),
        }
    }

    pub fn validate(&self, k_i: usize, k_e: usize, budget: f64) -> Result<()> {
        if self.rho_i.len() != k_i || self.rho_e.len() != k_e {
            return Err(Error::Dimension(format!(
                "power vector has {}+{} entries, expected {k_i}+{k_e}",
                self.rho_i.len(),
                self.rho_e.len()
            )));
        }
        if self.rho_i.iter().chain(&self.rho_e).any(|r| !(*r >= 0.0)) {
            return Err(Error::Domain("powers must be non-negative".into()));
        }
        if self.total() > budget * (1.0 + 1e-10) {
            return Err(Error::Domain(format!("total power {} exceeds budget {budget}", self.total())));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub sinr: Vec<f64>,
    pub se: Vec<f64>,
    pub q_rf: Vec<f64>,
    pub q_dc: Vec<f64>,
}

/// SINR_k = signal_k·ρ_k / (Σ_t iu[k,t]·ρ_I,t + eu_k·Σ_ℓ ρ_E,ℓ + 1).
#[derive(Clone, Debug)]
pub struct SinrCoefficients {
    pub signal: Vec<f64>,
    pub iu: DMatrix<f64>,
    pub eu: Vec<f64>,
}

impl SinrCoefficients {
    pub fn sinr(&self, rho: &PowerAllocation) -> Vec<f64> {
        let se = rho.sum_e();
        (0..self.signal.len())
            .map(|k| {
                let den: f64 = (0..self.signal.len()).map(|t| self.iu[(k, t)] * rho.rho_i[t]).sum::<f64>()
                    + self.eu[k] * se
                    + 1.0;
                self.signal[k] * rho.rho_i[k] / den
            })
            .collect()
    }
}

pub fn sinr_coefficients(scheme: Scheme, m: usize, csi: &StatCsi, plan: &PilotPlan, st: &EstimationStats) -> SinrCoefficients {
    let k_i = plan.k_i();
    let dof = (m - plan.tau_ki) as f64;
    let signal = (0..k_i).map(|k| dof * st.gamma_h[k]).collect();
    let iu = DMatrix::from_fn(k_i, k_i, |k, t| {
        let leak = csi.beta_bi[k] - st.gamma_h[k];
        if t != k && plan.iu_pilot[t] == plan.iu_pilot[k] {
            leak + dof * st.gamma_h[k]
        } else {
            leak
        }
    });
    let eu = (0..k_i)
        .map(|k| match scheme {
            Scheme::Pzf => csi.beta_bi[k],
            Scheme::Ppzf => csi.beta_bi[k] - st.gamma_h[k],
        })
        .collect();
    SinrCoefficients { signal, iu, eu }
}

pub fn sinr_pzf(s: &Scenario, csi: &StatCsi, plan: &PilotPlan, st: &EstimationStats, rho: &PowerAllocation) -> Vec<f64> {
    sinr_coefficients(Scheme::Pzf, s.m, csi, plan, st).sinr(rho)
}

pub fn sinr_ppzf(s: &Scenario, csi: &StatCsi, plan: &PilotPlan, st: &EstimationStats, rho: &PowerAllocation) -> Vec<f64> {
    sinr_coefficients(Scheme::Ppzf, s.m, csi, plan, st).sinr(rho)
}

pub fn sinr(scheme: Scheme, s: &Scenario, csi: &StatCsi, plan: &PilotPlan, st: &EstimationStats, rho: &PowerAllocation) -> Vec<f64> {
    sinr_coefficients(scheme, s.m, csi, plan, st).sinr(rho)
}

/// (1 − τ/τ_c)·log2(1 + SINR).
pub fn se(sinr: f64, tau: usize, tau_c: usize) -> f64 {
    (1.0 - tau as f64 / tau_c as f64) * (1.0 + sinr).log2()
}

/// Hardening-bound SINR from the channel/precoder moments:
/// `mean_ds[k]` = E{h_k^H w_k}, `m2_iu[(k,t)]` = E{|h_k^H w_t|²},
/// `m2_eu[(k,ℓ)]` = E{|h_k^H w_E,ℓ|²}.
pub fn general_sinr(rho: &PowerAllocation, mean_ds: &[C64], m2_iu: &DMatrix<f64>, m2_eu: &DMatrix<f64>) -> Vec<f64> {
    (0..rho.rho_i.len())
        .map(|k| {
            let ds = rho.rho_i[k] * mean_ds[k].norm_sqr();
            let mut den = 1.0 - ds;
            for t in 0..rho.rho_i.len() {
                den += rho.rho_i[t] * m2_iu[(k, t)];
            }
            for l in 0..rho.rho_e.len() {
                den += rho.rho_e[l] * m2_eu[(k, l)];
            }
            ds / den
        })
        .collect()
}

/// E{|ĝ_ℓ^H ĝ_t|²} for same-pilot EUs, where the zero-mean parts satisfy
/// ĝ_t − μ_t = κ_{t,ℓ}(ĝ_ℓ − μ_ℓ) and ĝ_ℓ − μ_ℓ ~ CN(0, γ_ĝℓ I).
pub fn lemma4_moment(m: usize, st: &EstimationStats, lambda: &[f64], delta: f64, xi: &CMat, l: usize, t: usize) -> f64 {
    let m = m as f64;
    let g = st.gamma_g[l];
    let k = st.kappa(t, l);
    let ll = lambda[l];
    let lt = lambda[t];
    let x = xi[(l, t)];
    k * k * m * (m + 1.0) * g * g
        + m * g * lt * delta * xi[(t, t)].re
        + k * k * m * g * ll * delta * xi[(l, l)].re
        + 2.0 * k * m * m * g * (ll * lt).sqrt() * delta * x.re
        + m * m * ll * lt * delta * delta * x.norm_sqr()
}

/// E{|ĝ_ℓ^H B ĝ_t|²} with B a projector onto a uniformly random
/// (M − τ_KI)-dimensional subspace independent of the estimates.
#[allow(clippy::too_many_arguments)]
pub fn lemma4_moment_projected(
    m: usize,
    tau_ki: usize,
    st: &EstimationStats,
    lambda: &[f64],
    delta: f64,
    xi: &CMat,
    l: usize,
    t: usize,
) -> f64 {
    let mf = m as f64;
    let r = (m - tau_ki) as f64;
    let g = st.gamma_g[l];
    let k = st.kappa(t, l);
    let ll = lambda[l];
    let lt = lambda[t];
    let x = xi[(l, t)];
    // E|x^H B y|² = a_w |x^H y|² + b_w ‖x‖²‖y‖² for a uniformly rotated rank-r projector
    let (a_w, b_w) = if m > 1 {
        (r * (mf * r - 1.0) / (mf * (mf * mf - 1.0)), r * (mf - r) / (mf * (mf * mf - 1.0)))
    } else {
        (r, 0.0)
    };
    k * k * r * (r + 1.0) * g * g
        + r * g * lt * delta * xi[(t, t)].re
        + k * k * r * g * ll * delta * xi[(l, l)].re
        + 2.0 * k * r * r * g * (ll * lt).sqrt() * delta * x.re
        + mf * mf * ll * lt * delta * delta * (a_w * x.norm_sqr() + b_w * xi[(l, l)].re * xi[(t, t)].re)
}

/// α² of the MRT beam of EU t.
pub fn alpha2_mrt(m: usize, st: &EstimationStats, lambda: &[f64], delta: f64, xi: &CMat, t: usize) -> f64 {
    1.0 / (m as f64 * (st.gamma_g[t] + lambda[t] * delta * xi[(t, t)].re))
}

/// α² of the PMRT beam of EU t.
pub fn alpha2_pmrt(m: usize, tau_ki: usize, st: &EstimationStats, lambda: &[f64], delta: f64, xi: &CMat, t: usize) -> f64 {
    1.0 / ((m - tau_ki) as f64 * (st.gamma_g[t] + lambda[t] * delta * xi[(t, t)].re))
}

/// Ψ₁ for PZF: E{|g_ℓ^H w_E,t|²} for an EU t on a different pilot.
pub fn psi1_pzf(m: usize, st: &EstimationStats, lambda: &[f64], delta: f64, xi: &CMat, l: usize, t: usize, n: usize) -> f64 {
    let mf = m as f64;
    alpha2_mrt(m, st, lambda, delta, xi, t)
        * mf
        * lambda[l]
        * delta
        * (st.gamma_g[t] * xi[(l, l)].re + mf * lambda[t] * delta * xi[(l, t)].norm_sqr())
        + n as f64 * lambda[l]
}

/// Ψ₂ for PZF, i.e. E{|ĝ_ℓ^H ĝ_ℓ'|²} for ℓ' ∈ S_ℓ.
pub fn psi2_pzf(m: usize, st: &EstimationStats, lambda: &[f64], delta: f64, xi: &CMat, l: usize, lp: usize) -> f64 {
    lemma4_moment(m, st, lambda, delta, xi, l, lp)
}

/// Ψ₁ for PPZF in its large-M form (to be multiplied by α²_PMRT,t).
#[allow(clippy::too_many_arguments)]
pub fn psi1_ppzf(m: usize, tau_ki: usize, st: &EstimationStats, lambda: &[f64], delta: f64, xi: &CMat, l: usize, t: usize, n: usize) -> f64 {
    let r = (m - tau_ki) as f64;
    let nf = n as f64;
    let (xll, xtt) = (xi[(l, l)].re, xi[(t, t)].re);
    let gt = st.gamma_g[t];
    r * lambda[l]
        * (delta * (gt * xll + nf * lambda[t] * xtt) + m as f64 * lambda[t] * delta * delta * xtt * xll + nf * gt)
}

/// Ψ₂ for PPZF in its large-M form: the PZF fourth moment with the
/// projected dimension M − τ_KI in place of M.
pub fn psi2_ppzf(m: usize, tau_ki: usize, st: &EstimationStats, lambda: &[f64], delta: f64, xi: &CMat, l: usize, lp: usize) -> f64 {
    lemma4_moment(m - tau_ki, st, lambda, delta, xi, l, lp)
}

/// Q_ℓ = (τ_c − τ)·σ²·(iu_ℓ·Σρ_I + Σ_t eu[ℓ,t]·ρ_E,t + 1): the average
/// received RF energy is affine in the powers at fixed θ.
#[derive(Clone, Debug)]
pub struct EnergyCoefficients {
    pub iu: Vec<f64>,
    pub eu: DMatrix<f64>,
    /// (τ_c − τ)·σ².
    pub scale: f64,
}

impl EnergyCoefficients {
    /// Q_ℓ/(σ²(τ_c − τ)) − 1.
    pub fn normalized(&self, rho: &PowerAllocation) -> Vec<f64> {
        let si = rho.sum_i();
        (0..self.iu.len())
            .map(|l| self.iu[l] * si + (0..rho.rho_e.len()).map(|t| self.eu[(l, t)] * rho.rho_e[t]).sum::<f64>())
            .collect()
    }

    pub fn energy(&self, rho: &PowerAllocation) -> Vec<f64> {
        self.normalized(rho).into_iter().map(|f| self.scale * (f + 1.0)).collect()
    }
}

pub fn energy_coefficients(
    scheme: Scheme,
    s: &Scenario,
    csi: &StatCsi,
    plan: &PilotPlan,
    st: &EstimationStats,
    xi: &CMat,
) -> EnergyCoefficients {
    let (m, n, delta) = (s.m, csi.n(), s.delta);
    let lambda = &csi.lambda;
    let k_e = csi.k_e();
    let iu = (0..k_e).map(|l| lambda[l] * (n as f64 + delta * xi[(l, l)].re)).collect();
    let eu = DMatrix::from_fn(k_e, k_e, |l, t| {
        let shared = plan.eu_shares(l, t);
        let leak = n as f64 * lambda[l] - st.gamma_g[l];
        match (scheme, shared) {
            (Scheme::Pzf, false) => psi1_pzf(m, st, lambda, delta, xi, l, t, n),
            (Scheme::Pzf, true) => alpha2_mrt(m, st, lambda, delta, xi, t) * psi2_pzf(m, st, lambda, delta, xi, l, t) + leak,
            (Scheme::Ppzf, false) => {
                alpha2_pmrt(m, plan.tau_ki, st, lambda, delta, xi, t) * psi1_ppzf(m, plan.tau_ki, st, lambda, delta, xi, l, t, n)
            }
            (Scheme::Ppzf, true) => {
                alpha2_pmrt(m, plan.tau_ki, st, lambda, delta, xi, t) * psi2_ppzf(m, plan.tau_ki, st, lambda, delta, xi, l, t)
                    + leak
            }
        }
    });
    let scale = (s.tau_c - plan.tau) as f64 * s.sigma2;
    EnergyCoefficients { iu, eu, scale }
}

pub fn q_pzf(s: &Scenario, csi: &StatCsi, plan: &PilotPlan, st: &EstimationStats, rho: &PowerAllocation, theta: &PhaseShift) -> Vec<f64> {
    energy_coefficients(Scheme::Pzf, s, csi, plan, st, &xi_matrix(theta, csi)).energy(rho)
}

pub fn q_ppzf(s: &Scenario, csi: &StatCsi, plan: &PilotPlan, st: &EstimationStats, rho: &PowerAllocation, theta: &PhaseShift) -> Vec<f64> {
    energy_coefficients(Scheme::Ppzf, s, csi, plan, st, &xi_matrix(theta, csi)).energy(rho)
}

/// ξ_ℓ = √(τp)·c_gℓ evaluated with the Rayleigh gains N·β_RE,ℓ·β.
fn xi_rayleigh(s: &Scenario, csi: &StatCsi, tau: usize, l: usize, group: &[usize]) -> f64 {
    let tp = tau as f64 * s.p;
    let n = csi.n() as f64;
    let load: f64 = group.iter().map(|&j| n * csi.beta_re[j] * csi.beta_br).sum();
    tp * n * csi.beta_re[l] * csi.beta_br / (tp * load + s.sigma2)
}

/// Average RF energy with PZF over a Rayleigh BS–RIS channel.
pub fn q_pzf_rayleigh(s: &Scenario, csi: &StatCsi, plan: &PilotPlan, rho: &PowerAllocation) -> Vec<f64> {
    let n = csi.n() as f64;
    let total = rho.sum_i() + rho.sum_e();
    let scale = (s.tau_c - plan.tau) as f64 * s.sigma2;
    (0..csi.k_e())
        .map(|l| {
            let xi = xi_rayleigh(s, csi, plan.tau, l, &plan.share_e[l]);
            let shared: f64 = plan.share_e[l].iter().map(|&j| rho.rho_e[j]).sum();
            let g = n * csi.beta_re[l] * csi.beta_br;
            scale * (g * (total + s.m as f64 * xi * shared) + 1.0)
        })
        .collect()
}

/// The orthogonal-pilot special case of [`q_pzf_rayleigh`].
pub fn q_pzf_rayleigh_orth(s: &Scenario, csi: &StatCsi, plan: &PilotPlan, rho: &PowerAllocation) -> Vec<f64> {
    let n = csi.n() as f64;
    let total = rho.sum_i() + rho.sum_e();
    let scale = (s.tau_c - plan.tau) as f64 * s.sigma2;
    (0..csi.k_e())
        .map(|l| {
            let xi = xi_rayleigh(s, csi, plan.tau, l, &[l]);
            let g = n * csi.beta_re[l] * csi.beta_br;
            scale * (g * (total + s.m as f64 * xi * rho.rho_e[l]) + 1.0)
        })
        .collect()
}

/// Ω(e) = φ/(1 + exp(−a(e − b))).
pub fn omega(e: f64, m: &EhModel) -> f64 {
    m.phi / (1.0 + (-m.a * (e - m.b)).exp())
}

/// Φ(e) = (Ω(e) − φΛ)/(1 − Λ).
pub fn eh_nonlinear(e: f64, m: &EhModel) -> Result<f64> {
    if !(e >= 0.0) {
        return Err(Error::Domain(format!("EH input must be non-negative, got {e}")));
    }
    let lam = m.lambda_const();
    Ok((omega(e, m) - m.phi * lam) / (1.0 - lam))
}

/// g(Ω) = b − ln((φ − Ω)/Ω)/a, the input giving logistic output Ω.
pub fn eh_inverse(om: f64, m: &EhModel) -> Result<f64> {
    if !(om > 0.0 && om < m.phi) {
        return Err(Error::Domain(format!("EH output {om} outside (0, {})", m.phi)));
    }
    Ok(m.b - ((m.phi - om) / om).ln() / m.a)
}

/// Π = |S|(τpNλ + σ²)/(|S|τpNλ + σ²).
pub fn pilot_gain_ratio(s_size: usize, tau: usize, p: f64, n: usize, lambda_l: f64, sigma2: f64) -> f64 {
    let x = tau as f64 * p * n as f64 * lambda_l;
    let k = s_size as f64;
    k * (x + sigma2) / (k * x + sigma2)
}

pub fn closed_form_report(
    scheme: Scheme,
    s: &Scenario,
    csi: &StatCsi,
    plan: &PilotPlan,
    theta: &PhaseShift,
    rho: &PowerAllocation,
) -> Result<ClosedFormReport> {
    let st = estimation_stats(s, csi, plan);
    let sinr = sinr(scheme, s, csi, plan, &st, rho);
    let se = sinr.iter().map(|&x| se(x, plan.tau, s.tau_c)).collect();
    let q_rf = energy_coefficients(scheme, s, csi, plan, &st, &xi_matrix(theta, csi)).energy(rho);
    let q_dc = q_rf.iter().map(|&q| eh_nonlinear(q, &s.eh)).collect::<Result<Vec<_>>>()?;
    Ok(ClosedFormReport { sinr, se, q_rf, q_dc })
}
