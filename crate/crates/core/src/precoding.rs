//! PZF, MRT and PMRT precoders with statistical power normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{EstimationOutput, PilotPlan};
use crate::linalg::{gram_inverse, CMat, CVec, C64};

/// Information beams are always protective ZF; the energy beams are either
/// plain MRT (`Pzf`) or MRT projected away from the IU estimates (`Ppzf`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Pzf,
    Ppzf,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Pzf => "pzf",
            Scheme::Ppzf => "ppzf",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pzf" => Ok(Scheme::Pzf),
            "ppzf" => Ok(Scheme::Ppzf),
            other => Err(Error::Config(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PrecoderSet {
    pub w_i: CMat,
    pub w_e: CMat,
    pub scheme: Scheme,
    pub alpha_pzf: Vec<f64>,
    pub alpha_e: Vec<f64>,
    pub b: Option<CMat>,
}

/// Ĥ(Ĥ^H Ĥ)^{-1}, the pseudo-inverse columns.
pub fn zf_directions(h: &CMat) -> Result<CMat> {
    if h.ncols() >= h.nrows() && h.ncols() > 0 {
        return Err(Error::Dimension(format!("ZF needs more rows than columns, got {}x{}", h.nrows(), h.ncols())));
    }
    let ginv = gram_inverse(&(h.adjoint() * h))?;
    Ok(h * ginv)
}

/// w = α·Ĥ(Ĥ^H Ĥ)^{-1} e_k with α = √((M − τ_KI)·γ_ĥk).
pub fn pzf_precoder(h_hat_full_rank: &CMat, k: usize, gamma_h: f64) -> Result<(CVec, f64)> {
    let (m, tau_ki) = h_hat_full_rank.shape();
    if k >= tau_ki {
        return Err(Error::Dimension(format!("column {k} out of range for {tau_ki} pilots")));
    }
    let z = zf_directions(h_hat_full_rank)?;
    let alpha = ((m - tau_ki) as f64 * gamma_h).sqrt();
    Ok((z.column(k) * C64::new(alpha, 0.0), alpha))
}

/// w = α·ĝ_ℓ with α² = 1/(M(γ_ĝℓ + λ_ℓδΞ_{ℓ,ℓ})).
pub fn mrt_precoder(g_hat_l: &CVec, gamma_g_l: f64, lambda_l: f64, delta: f64, xi_ll: f64) -> (CVec, f64) {
    let m = g_hat_l.len() as f64;
    let alpha = 1.0 / (m * (gamma_g_l + lambda_l * delta * xi_ll)).sqrt();
    (g_hat_l * C64::new(alpha, 0.0), alpha)
}

/// B = I − Ĥ(Ĥ^H Ĥ)^{-1}Ĥ^H.
pub fn projector_b(h_hat_full_rank: &CMat) -> Result<CMat> {
    let m = h_hat_full_rank.nrows();
    if h_hat_full_rank.ncols() == 0 {
        return Ok(CMat::identity(m, m));
    }
    let z = zf_directions(h_hat_full_rank)?;
    Ok(CMat::identity(m, m) - z * h_hat_full_rank.adjoint())
}

/// w = α·Bĝ_ℓ with α² = 1/((M − τ_KI)(γ_ĝℓ + λ_ℓδΞ_{ℓ,ℓ})).
#[allow(clippy::too_many_arguments)]
pub fn pmrt_precoder(
    b: &CMat,
    g_hat_l: &CVec,
    gamma_g_l: f64,
    lambda_l: f64,
    delta: f64,
    xi_ll: f64,
    m: usize,
    tau_ki: usize,
) -> (CVec, f64) {
    let alpha = 1.0 / ((m - tau_ki) as f64 * (gamma_g_l + lambda_l * delta * xi_ll)).sqrt();
    (b * g_hat_l * C64::new(alpha, 0.0), alpha)
}

/// Builds every beam for one estimate set. `xi_diag[ℓ]` is Ξ_{ℓ,ℓ}(Θ).
///
/// The ZF beam of IU k is normalized against its own scaled estimate, i.e.
/// column i_k of Ĥ1 multiplied by c_hk, which is what makes
/// α² = (M − τ_KI)·γ_ĥk give unit average power.
pub fn build_precoders(
    scheme: Scheme,
    est: &EstimationOutput,
    plan: &PilotPlan,
    lambda: &[f64],
    delta: f64,
    xi_diag: &[f64],
) -> Result<PrecoderSet> {
    let m = est.g_hat.nrows().max(est.h_hat.nrows());
    let (k_i, k_e) = (plan.k_i(), plan.k_e());
    let st = &est.stats;
    let z = if plan.tau_ki > 0 { zf_directions(&est.h1_full)? } else { CMat::zeros(m, 0) };

    let mut w_i = CMat::zeros(m, k_i);
    let mut alpha_pzf = Vec::with_capacity(k_i);
    for k in 0..k_i {
        let alpha = ((m - plan.tau_ki) as f64 * st.gamma_h[k]).sqrt();
        w_i.set_column(k, &(z.column(plan.iu_column(k)) * C64::new(alpha / st.c_h[k], 0.0)));
        alpha_pzf.push(alpha);
    }

    let b = match scheme {
        Scheme::Pzf => None,
        Scheme::Ppzf => Some(if plan.tau_ki > 0 {
            CMat::identity(m, m) - &z * est.h1_full.adjoint()
        } else {
            CMat::identity(m, m)
        }),
    };
    let mut w_e = CMat::zeros(m, k_e);
    let mut alpha_e = Vec::with_capacity(k_e);
    for l in 0..k_e {
        let g = est.g_hat.column(l).into_owned();
        let (w, a) = match &b {
            None => mrt_precoder(&g, st.gamma_g[l], lambda[l], delta, xi_diag[l]),
            Some(b) => pmrt_precoder(b, &g, st.gamma_g[l], lambda[l], delta, xi_diag[l], m, plan.tau_ki),
        };
        w_e.set_column(l, &w);
        alpha_e.push(a);
    }
    Ok(PrecoderSet { w_i, w_e, scheme, alpha_pzf, alpha_e, b })
}
