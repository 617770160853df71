//! Pilot assignment with reuse, uplink pilot reception and MMSE estimation.

use rand::Rng;

use crate::channel::{los_mean, ChannelDraw, PhaseShift};
use crate::error::{Error, Result};
use crate::linalg::{cn_matrix, CMat, C64};
use crate::scenario::{Scenario, StatCsi};

/// Pilot indices are 0-based within each class. IU pilot `i` occupies column
/// `i` of the identity pilot book, EU pilot `e` column `tau_ki + e`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PilotPlan {
    pub tau: usize,
    pub tau_ki: usize,
    pub tau_ke: usize,
    pub iu_pilot: Vec<usize>,
    pub eu_pilot: Vec<usize>,
    /// P_k: IUs on the same pilot as IU k (k included).
    pub share_i: Vec<Vec<usize>>,
    /// S_ℓ: EUs on the same pilot as EU ℓ (ℓ included).
    pub share_e: Vec<Vec<usize>>,
}

impl PilotPlan {
    pub fn iu_column(&self, k: usize) -> usize {
        self.iu_pilot[k]
    }

    pub fn eu_column(&self, l: usize) -> usize {
        self.tau_ki + self.eu_pilot[l]
    }

    pub fn k_i(&self) -> usize {
        self.iu_pilot.len()
    }

    pub fn k_e(&self) -> usize {
        self.eu_pilot.len()
    }

    pub fn pilot_book(&self) -> CMat {
        CMat::identity(self.tau, self.tau)
    }

    /// True when EUs ℓ and t transmit the same pilot.
    pub fn eu_shares(&self, l: usize, t: usize) -> bool {
        self.eu_pilot[l] == self.eu_pilot[t]
    }
}

/// The first `prf + 1` users of each class share pilot 0; the rest get fresh
/// pilots.
pub fn build_pilot_plan(k_i: usize, k_e: usize, prf_i: usize, prf_e: usize) -> Result<PilotPlan> {
    let check = |k: usize, prf: usize, class: &str| {
        if (k == 0 && prf > 0) || (k > 0 && prf > k - 1) {
            Err(Error::Config(format!("reuse factor {prf} infeasible for {k} {class}s")))
        } else {
            Ok(())
        }
    };
    check(k_i, prf_i, "IU")?;
    check(k_e, prf_e, "EU")?;
    let assign = |k: usize, prf: usize| -> Vec<usize> { (0..k).map(|j| j.saturating_sub(prf)).collect() };
    let groups = |pilots: &[usize]| -> Vec<Vec<usize>> {
        pilots
            .iter()
            .map(|&p| (0..pilots.len()).filter(|&j| pilots[j] == p).collect())
            .collect()
    };
    let iu_pilot = assign(k_i, prf_i);
    let eu_pilot = assign(k_e, prf_e);
    let (tau_ki, tau_ke) = (k_i - prf_i, k_e - prf_e);
    let tau = tau_ki + tau_ke;
    if tau == 0 {
        return Err(Error::Config("no users, pilot length would be zero".into()));
    }
    Ok(PilotPlan {
        tau,
        tau_ki,
        tau_ke,
        share_i: groups(&iu_pilot),
        share_e: groups(&eu_pilot),
        iu_pilot,
        eu_pilot,
    })
}

/// The draw-independent estimator scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimationStats {
    pub c_g: Vec<f64>,
    pub c_h: Vec<f64>,
    /// Per-entry variance of the zero-mean part of ĝ_ℓ (W).
    pub gamma_g: Vec<f64>,
    /// Per-entry variance of ĥ_k (W).
    pub gamma_h: Vec<f64>,
    pub beta_re: Vec<f64>,
}

impl EstimationStats {
    /// κ_{ℓ,t} = β_RE,ℓ / β_RE,t.
    pub fn kappa(&self, l: usize, t: usize) -> f64 {
        self.beta_re[l] / self.beta_re[t]
    }
}

pub fn estimation_stats(s: &Scenario, csi: &StatCsi, plan: &PilotPlan) -> EstimationStats {
    let tp = plan.tau as f64 * s.p;
    let n = csi.n() as f64;
    let mut c_g = Vec::with_capacity(csi.k_e());
    let mut gamma_g = Vec::with_capacity(csi.k_e());
    for l in 0..csi.k_e() {
        let load: f64 = plan.share_e[l].iter().map(|&j| n * csi.lambda[j]).sum();
        let c = tp.sqrt() * n * csi.lambda[l] / (tp * load + s.sigma2);
        c_g.push(c);
        gamma_g.push(tp.sqrt() * n * csi.lambda[l] * c);
    }
    let mut c_h = Vec::with_capacity(csi.k_i());
    let mut gamma_h = Vec::with_capacity(csi.k_i());
    for k in 0..csi.k_i() {
        let load: f64 = plan.share_i[k].iter().map(|&j| csi.beta_bi[j]).sum();
        let c = tp.sqrt() * csi.beta_bi[k] / (tp * load + s.sigma2);
        c_h.push(c);
        gamma_h.push(tp.sqrt() * csi.beta_bi[k] * c);
    }
    EstimationStats { c_g, c_h, gamma_g, gamma_h, beta_re: csi.beta_re.clone() }
}

#[derive(Clone, Debug)]
pub struct EstimationOutput {
    pub g_hat: CMat,
    pub h_hat: CMat,
    /// Ĥ1 = Y_p Φ_I, one column per IU pilot.
    pub h1_full: CMat,
    pub stats: EstimationStats,
    /// (ℓ, t, κ_{ℓ,t}) for every ordered same-pilot EU pair with ℓ ≠ t.
    pub kappa_ratios: Vec<(usize, usize, f64)>,
}

/// Y_p = √(τp)·(Σ_ℓ g_ℓ φ̄_ℓ^H + Σ_k h_k φ_k^H) + noise.
pub fn receive_pilots<R: Rng + ?Sized>(draw: &ChannelDraw, plan: &PilotPlan, p: f64, sigma2: f64, rng: &mut R) -> CMat {
    let m = draw.h1.nrows().max(draw.g.nrows());
    let mut y = cn_matrix(m, plan.tau, rng) * C64::new(sigma2.sqrt(), 0.0);
    let amp = (plan.tau as f64 * p).sqrt();
    for k in 0..plan.k_i() {
        let mut col = y.column_mut(plan.iu_column(k));
        col.axpy(C64::new(amp, 0.0), &draw.h1.column(k), C64::new(1.0, 0.0));
    }
    for l in 0..plan.k_e() {
        let mut col = y.column_mut(plan.eu_column(l));
        col.axpy(C64::new(amp, 0.0), &draw.g.column(l), C64::new(1.0, 0.0));
    }
    y
}

/// MMSE estimates of every g_ℓ and h_k from the pilot observation.
pub fn mmse_estimate(yp: &CMat, plan: &PilotPlan, s: &Scenario, csi: &StatCsi, theta: &PhaseShift) -> Result<EstimationOutput> {
    if yp.ncols() != plan.tau || yp.nrows() != csi.m() {
        return Err(Error::Dimension(format!(
            "pilot observation is {}x{}, expected {}x{}",
            yp.nrows(),
            yp.ncols(),
            csi.m(),
            plan.tau
        )));
    }
    let stats = estimation_stats(s, csi, plan);
    let amp = (plan.tau as f64 * s.p).sqrt();
    let means: Vec<_> = (0..csi.k_e()).map(|l| los_mean(csi, s.delta, theta, l)).collect();

    let mut g_hat = CMat::zeros(csi.m(), csi.k_e());
    for l in 0..csi.k_e() {
        let mut centred = yp.column(plan.eu_column(l)).into_owned();
        for &j in &plan.share_e[l] {
            centred.axpy(C64::new(-amp, 0.0), &means[j], C64::new(1.0, 0.0));
        }
        g_hat.set_column(l, &(centred * C64::new(stats.c_g[l], 0.0) + &means[l]));
    }
    let mut h_hat = CMat::zeros(csi.m(), csi.k_i());
    for k in 0..csi.k_i() {
        h_hat.set_column(k, &(yp.column(plan.iu_column(k)) * C64::new(stats.c_h[k], 0.0)));
    }
    let h1_full = yp.columns(0, plan.tau_ki).into_owned();
    let mut kappa_ratios = Vec::new();
    for l in 0..csi.k_e() {
        for &t in &plan.share_e[l] {
            if t != l {
                kappa_ratios.push((l, t, stats.kappa(l, t)));
            }
        }
    }
    Ok(EstimationOutput { g_hat, h_hat, h1_full, stats, kappa_ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw;
    use crate::scenario::sample_drop;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn orthogonal_plan() {
        let p = build_pilot_plan(5, 10, 0, 0).unwrap();
        assert_eq!(p.tau, 15);
        assert!(p.share_i.iter().enumerate().all(|(k, s)| s == &vec![k]));
        assert!(p.share_e.iter().enumerate().all(|(l, s)| s == &vec![l]));
    }

    #[test]
    fn full_reuse_plan() {
        let p = build_pilot_plan(5, 10, 0, 9).unwrap();
        assert_eq!(p.tau, 5 + 1);
        assert!(p.share_e.iter().all(|s| s.len() == 10));
    }

    #[test]
    fn partial_reuse_plan() {
        let p = build_pilot_plan(5, 5, 0, 2).unwrap();
        assert_eq!(p.tau_ke, 3);
        assert_eq!(p.share_e[0], vec![0, 1, 2]);
        assert_eq!(p.share_e[3], vec![3]);
        assert!(build_pilot_plan(5, 5, 5, 0).is_err());
        assert!(build_pilot_plan(0, 3, 0, 2).is_ok());
    }

    #[test]
    fn noiseless_orthogonal_estimation_is_exact() {
        let s = Scenario { m: 8, n: 4, k_i: 2, k_e: 3, sigma2: 1e-40, ..Scenario::default() };
        let csi = sample_drop(&s, &mut ChaCha12Rng::seed_from_u64(5)).unwrap();
        let plan = build_pilot_plan(2, 3, 0, 0).unwrap();
        let theta = PhaseShift::from_phases(&[0.1, 0.2, 0.3, 0.4]);
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let d = draw(&csi, s.delta, &theta, &mut rng).unwrap();
        let y = receive_pilots(&d, &plan, s.p, s.sigma2, &mut rng);
        let est = mmse_estimate(&y, &plan, &s, &csi, &theta).unwrap();
        assert!((&est.g_hat - &d.g).norm() / d.g.norm() < 1e-9);
        assert!((&est.h_hat - &d.h1).norm() / d.h1.norm() < 1e-9);
        for l in 0..3 {
            let full = 4.0 * csi.lambda[l];
            assert!((est.stats.gamma_g[l] - full).abs() / full < 1e-9);
        }
    }

    #[test]
    fn shared_pilot_estimates_are_proportional() {
        let s = Scenario { m: 8, n: 4, k_i: 2, k_e: 3, prf_E: 2, ..Scenario::default() };
        let csi = sample_drop(&s, &mut ChaCha12Rng::seed_from_u64(8)).unwrap();
        let plan = build_pilot_plan(2, 3, 0, 2).unwrap();
        let theta = PhaseShift::ones(4);
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let d = draw(&csi, s.delta, &theta, &mut rng).unwrap();
        let y = receive_pilots(&d, &plan, s.p, s.sigma2, &mut rng);
        let est = mmse_estimate(&y, &plan, &s, &csi, &theta).unwrap();
        for &(l, t, kappa) in &est.kappa_ratios {
            let zl = est.g_hat.column(l) - los_mean(&csi, s.delta, &theta, l);
            let zt = est.g_hat.column(t) - los_mean(&csi, s.delta, &theta, t);
            assert!((&zl - zt * C64::new(kappa, 0.0)).norm() <= 1e-12 * zl.norm());
            let ratio = est.stats.gamma_g[l] / est.stats.gamma_g[t];
            assert!((ratio - kappa * kappa).abs() < 1e-12 * ratio);
        }
    }
}
