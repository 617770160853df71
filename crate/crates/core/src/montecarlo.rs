//! Empirical oracles for the closed forms.
//!
//! Every trial draws fresh fading, pilot noise, estimates and precoders from
//! its own ChaCha stream `(seed, trial)`, so results do not depend on the
//! thread count. Trials are grouped into a fixed number of batches; standard
//! errors of non-linear functionals come from a delete-one-batch jackknife.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{general_sinr, PowerAllocation};
use crate::channel::{self, los_mean, xi_matrix, ChannelDraw, PhaseShift};
use crate::error::{Error, Result};
use crate::estimation::{mmse_estimate, receive_pilots, EstimationStats, PilotPlan};
use crate::linalg::{cn, cn_matrix, cn_vector, CMat, CVec, C64};
use crate::precoding::{build_precoders, projector_b, Scheme};
use crate::scenario::{Scenario, StatCsi};

const BATCHES: usize = 50;

/// How the cascaded channels of different EUs are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CascadeModel {
    /// G = H2·diag(θ)·H3 with one BS–RIS matrix shared by all EUs.
    #[default]
    Shared,
    /// Each g_ℓ drawn from CN(μ_ℓ, Nλ_ℓ I) independently of the others.
    Independent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub trials: usize,
    pub rel_tol: f64,
    pub seed: u64,
    #[serde(default)]
    pub model: CascadeModel,
}

impl OracleConfig {
    pub fn new(trials: usize, rel_tol: f64, seed: u64) -> Self {
        Self { trials, rel_tol, seed, model: CascadeModel::Shared }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1000 {
            return Err(Error::Config(format!("at least 1000 trials required, got {}", self.trials)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 0.1) {
            return Err(Error::Config(format!("rel_tol {} outside (0, 0.1]", self.rel_tol)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

/// |closed − mean| ≤ max(rel_tol·|closed|, 3·stderr).
pub fn verdict(closed: f64, est: Estimate, rel_tol: f64) -> bool {
    (closed - est.mean).abs() <= (rel_tol * closed.abs()).max(3.0 * est.stderr)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub closed: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub rel_tol: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, closed: f64, est: Estimate, rel_tol: f64) -> Self {
        Self { name: name.into(), closed, empirical: est.mean, stderr: est.stderr, rel_tol, pass: verdict(closed, est, rel_tol) }
    }

    pub fn rel_err(&self) -> f64 {
        (self.empirical - self.closed).abs() / self.closed.abs()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }
}

/// Generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent trials in [`BATCHES`] groups and returns one
/// accumulator per group.
fn run_batches<A, F>(trials: usize, seed: u64, init: impl Fn() -> A + Sync, trial: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut A, &mut ChaCha12Rng) -> Result<()> + Sync,
{
    let batches = BATCHES.min(trials.max(1));
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let lo = b * trials / batches;
            let hi = (b + 1) * trials / batches;
            let mut acc = init();
            for t in lo..hi {
                let mut rng = trial_rng(seed, t as u64);
                trial(&mut acc, &mut rng)?;
            }
            Ok(acc)
        })
        .collect()
}

/// Mean of per-batch sums with the usual standard error.
fn mean_estimate(sums: &[(f64, f64, usize)]) -> Estimate {
    let (s, s2, n) = sums.iter().fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let n = n as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Estimate { mean, stderr: (var / n).sqrt() }
}

/// Delete-one-batch jackknife of a smooth functional of batch sums.
fn jackknife<A, F>(batches: &[A], merge: impl Fn(&[&A]) -> A, f: F) -> Estimate
where
    F: Fn(&A) -> f64,
{
    let all: Vec<&A> = batches.iter().collect();
    let mean = f(&merge(&all));
    let b = batches.len();
    if b < 2 {
        return Estimate { mean, stderr: f64::INFINITY };
    }
    let loo: Vec<f64> = (0..b)
        .map(|i| {
            let rest: Vec<&A> = batches.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, a)| a).collect();
            f(&merge(&rest))
        })
        .collect();
    let avg = loo.iter().sum::<f64>() / b as f64;
    let var = (b - 1) as f64 / b as f64 * loo.iter().map(|x| (x - avg).powi(2)).sum::<f64>();
    Estimate { mean, stderr: var.sqrt() }
}

/// Sums of every inner-product moment the closed forms use.
#[derive(Clone, Debug)]
pub struct Moments {
    pub count: usize,
    /// Σ h_k^H w_k.
    pub ds: Vec<C64>,
    /// Σ |h_k^H w_I,t|².
    pub iu_iu: DMatrix<f64>,
    /// Σ |h_k^H w_E,ℓ|².
    pub iu_eu: DMatrix<f64>,
    /// Σ |g_ℓ^H w_I,k|².
    pub eu_iu: DMatrix<f64>,
    /// Σ |g_ℓ^H w_E,t|².
    pub eu_eu: DMatrix<f64>,
    /// Σ ‖w_I,k‖² and Σ ‖w_E,ℓ‖².
    pub pow_i: Vec<f64>,
    pub pow_e: Vec<f64>,
}

impl Moments {
    fn zeros(k_i: usize, k_e: usize) -> Self {
        Self {
            count: 0,
            ds: vec![C64::new(0.0, 0.0); k_i],
            iu_iu: DMatrix::zeros(k_i, k_i),
            iu_eu: DMatrix::zeros(k_i, k_e),
            eu_iu: DMatrix::zeros(k_e, k_i),
            eu_eu: DMatrix::zeros(k_e, k_e),
            pow_i: vec![0.0; k_i],
            pow_e: vec![0.0; k_e],
        }
    }

    fn merge(parts: &[&Moments]) -> Moments {
        let mut out = parts[0].clone();
        for p in &parts[1..] {
            out.count += p.count;
            for (a, b) in out.ds.iter_mut().zip(&p.ds) {
                *a += b;
            }
            out.iu_iu += &p.iu_iu;
            out.iu_eu += &p.iu_eu;
            out.eu_iu += &p.eu_iu;
            out.eu_eu += &p.eu_eu;
            for (a, b) in out.pow_i.iter_mut().zip(&p.pow_i) {
                *a += b;
            }
            for (a, b) in out.pow_e.iter_mut().zip(&p.pow_e) {
                *a += b;
            }
        }
        out
    }

    fn mean_ds(&self) -> Vec<C64> {
        self.ds.iter().map(|z| z / self.count as f64).collect()
    }

    fn sinr(&self, rho: &PowerAllocation) -> Vec<f64> {
        let n = self.count as f64;
        general_sinr(rho, &self.mean_ds(), &(&self.iu_iu / n), &(&self.iu_eu / n))
    }

    /// Mean of E_ℓ = (τ_c − τ)(Σ p|g_ℓ^H w|² + σ²), in joules.
    fn energy(&self, rho: &PowerAllocation, scale: f64) -> Vec<f64> {
        let n = self.count as f64;
        (0..self.eu_eu.nrows())
            .map(|l| {
                let iu: f64 = (0..rho.rho_i.len()).map(|k| rho.rho_i[k] * self.eu_iu[(l, k)]).sum();
                let eu: f64 = (0..rho.rho_e.len()).map(|t| rho.rho_e[t] * self.eu_eu[(l, t)]).sum();
                scale * ((iu + eu) / n + 1.0)
            })
            .collect()
    }
}

/// One realization of the full chain: channels, pilots, estimates, beams.
pub struct TrialDraw {
    pub h1: CMat,
    pub g: CMat,
    pub w_i: CMat,
    pub w_e: CMat,
}

fn independent_cascade(csi: &StatCsi, delta: f64, theta: &PhaseShift, rng: &mut ChaCha12Rng) -> CMat {
    let mut g = CMat::zeros(csi.m(), csi.k_e());
    for l in 0..csi.k_e() {
        let nlos = cn_vector(csi.m(), rng) * C64::new((csi.n() as f64 * csi.lambda[l]).sqrt(), 0.0);
        g.set_column(l, &(los_mean(csi, delta, theta, l) + nlos));
    }
    g
}

pub struct ChainContext<'a> {
    pub scheme: Scheme,
    pub s: &'a Scenario,
    pub csi: &'a StatCsi,
    pub plan: &'a PilotPlan,
    pub theta: &'a PhaseShift,
    pub model: CascadeModel,
    xi_diag: Vec<f64>,
}

impl<'a> ChainContext<'a> {
    pub fn new(scheme: Scheme, s: &'a Scenario, csi: &'a StatCsi, plan: &'a PilotPlan, theta: &'a PhaseShift, model: CascadeModel) -> Self {
        let xi = xi_matrix(theta, csi);
        let xi_diag = (0..csi.k_e()).map(|l| xi[(l, l)].re).collect();
        Self { scheme, s, csi, plan, theta, model, xi_diag }
    }

    pub fn draw(&self, rng: &mut ChaCha12Rng) -> Result<TrialDraw> {
        let (h1, g) = match self.model {
            CascadeModel::Shared => {
                let d = channel::draw(self.csi, self.s.delta, self.theta, rng)?;
                (d.h1, d.g)
            }
            CascadeModel::Independent => {
                let h1 = channel::sample_h1(self.csi, rng);
                let g = independent_cascade(self.csi, self.s.delta, self.theta, rng);
                (h1, g)
            }
        };
        let d = ChannelDraw { h1, h2: CMat::zeros(0, 0), h3: CMat::zeros(0, 0), g };
        let y = receive_pilots(&d, self.plan, self.s.p, self.s.sigma2, rng);
        let est = mmse_estimate(&y, self.plan, self.s, self.csi, self.theta)?;
        let pre = build_precoders(self.scheme, &est, self.plan, &self.csi.lambda, self.s.delta, &self.xi_diag)?;
        Ok(TrialDraw { h1: d.h1, g: d.g, w_i: pre.w_i, w_e: pre.w_e })
    }
}

fn accumulate(acc: &mut Moments, d: &TrialDraw) {
    let hi = d.h1.adjoint() * &d.w_i;
    let he = d.h1.adjoint() * &d.w_e;
    let gi = d.g.adjoint() * &d.w_i;
    let ge = d.g.adjoint() * &d.w_e;
    acc.count += 1;
    for k in 0..acc.ds.len() {
        acc.ds[k] += hi[(k, k)];
        acc.pow_i[k] += d.w_i.column(k).norm_squared();
    }
    for l in 0..acc.pow_e.len() {
        acc.pow_e[l] += d.w_e.column(l).norm_squared();
    }
    acc.iu_iu += hi.map(|z| z.norm_sqr());
    acc.iu_eu += he.map(|z| z.norm_sqr());
    acc.eu_iu += gi.map(|z| z.norm_sqr());
    acc.eu_eu += ge.map(|z| z.norm_sqr());
}

/// Per-batch moment sums over `cfg.trials` independent chain draws.
pub fn collect_moments(
    scheme: Scheme,
    s: &Scenario,
    csi: &StatCsi,
    plan: &PilotPlan,
    theta: &PhaseShift,
    cfg: &OracleConfig,
) -> Result<Vec<Moments>> {
    let ctx = ChainContext::new(scheme, s, csi, plan, theta, cfg.model);
    run_batches(
        cfg.trials,
        cfg.seed,
        || Moments::zeros(csi.k_i(), csi.k_e()),
        |acc, rng| {
            let d = ctx.draw(rng)?;
            accumulate(acc, &d);
            Ok(())
        },
    )
}

/// Hardening-bound SINR per IU from sample moments.
#[allow(clippy::too_many_arguments)]
pub fn empirical_sinr(
    scheme: Scheme,
    s: &Scenario,
    csi: &StatCsi,
    plan: &PilotPlan,
    rho: &PowerAllocation,
    theta: &PhaseShift,
    cfg: &OracleConfig,
) -> Result<Vec<Estimate>> {
    let batches = collect_moments(scheme, s, csi, plan, theta, cfg)?;
    Ok(sinr_from_moments(&batches, rho))
}

pub fn sinr_from_moments(batches: &[Moments], rho: &PowerAllocation) -> Vec<Estimate> {
    (0..rho.rho_i.len())
        .map(|k| jackknife(batches, Moments::merge, |m| m.sinr(rho)[k]))
        .collect()
}

/// Sample mean of the per-EU received RF energy (J).
#[allow(clippy::too_many_arguments)]
pub fn empirical_energy(
    scheme: Scheme,
    s: &Scenario,
    csi: &StatCsi,
    plan: &PilotPlan,
    rho: &PowerAllocation,
    theta: &PhaseShift,
    cfg: &OracleConfig,
) -> Result<Vec<Estimate>> {
    let batches = collect_moments(scheme, s, csi, plan, theta, cfg)?;
    Ok(energy_from_moments(&batches, rho, (s.tau_c - plan.tau) as f64 * s.sigma2))
}

pub fn energy_from_moments(batches: &[Moments], rho: &PowerAllocation, scale: f64) -> Vec<Estimate> {
    let k_e = rho.rho_e.len();
    (0..k_e)
        .map(|l| jackknife(batches, Moments::merge, |m| m.energy(rho, scale)[l]))
        .collect()
}

/// Average beam powers E‖w‖², information beams first.
pub fn power_from_moments(batches: &[Moments]) -> Vec<Estimate> {
    let k_i = batches[0].pow_i.len();
    let k_e = batches[0].pow_e.len();
    (0..k_i + k_e)
        .map(|j| {
            jackknife(batches, Moments::merge, |m| {
                let v = if j < k_i { m.pow_i[j] } else { m.pow_e[j - k_i] };
                v / m.count as f64
            })
        })
        .collect()
}

/// Mean of E{|g_ℓ^H w_E,t|²} over the batches.
pub fn eu_gain_from_moments(batches: &[Moments], l: usize, t: usize) -> Estimate {
    jackknife(batches, Moments::merge, |m| m.eu_eu[(l, t)] / m.count as f64)
}

/// Sample means of |ĝ_ℓ^H ĝ_t|² and |ĝ_ℓ^H B ĝ_t|², with ĝ drawn directly
/// from the estimate distribution (shared zero-mean part scaled by κ) and B
/// built from an independent Gaussian Ĥ1 with τ_KI columns.
pub fn lemma4_oracle(
    s: &Scenario,
    csi: &StatCsi,
    st: &EstimationStats,
    theta: &PhaseShift,
    l: usize,
    t: usize,
    tau_ki: usize,
    cfg: &OracleConfig,
) -> Result<(Estimate, Estimate)> {
    let mu_l = los_mean(csi, s.delta, theta, l);
    let mu_t = los_mean(csi, s.delta, theta, t);
    let gamma = st.gamma_g[l];
    let kappa = st.kappa(t, l);
    let m = csi.m();
    let sums = run_batches(
        cfg.trials,
        cfg.seed,
        || [(0.0, 0.0, 0usize); 2],
        |acc, rng| {
            let a = cn_vector(m, rng) * C64::new(gamma.sqrt(), 0.0);
            let gl = &mu_l + &a;
            let gt = &mu_t + a * C64::new(kappa, 0.0);
            let x = gl.dotc(&gt).norm_sqr();
            let bgt = if tau_ki == 0 {
                gt.clone()
            } else {
                let h = cn_matrix(m, tau_ki, rng);
                projector_b(&h)? * &gt
            };
            let y = gl.dotc(&bgt).norm_sqr();
            for (slot, v) in acc.iter_mut().zip([x, y]) {
                slot.0 += v;
                slot.1 += v * v;
                slot.2 += 1;
            }
            Ok(())
        },
    )?;
    let plain: Vec<_> = sums.iter().map(|s| s[0]).collect();
    let proj: Vec<_> = sums.iter().map(|s| s[1]).collect();
    Ok((mean_estimate(&plain), mean_estimate(&proj)))
}

/// Sample mean of [(X^H X)^{-1}]_{00} for X with i.i.d. CN(0, 1) entries.
pub fn wishart_oracle(m: usize, tau_ki: usize, cfg: &OracleConfig) -> Result<Estimate> {
    if tau_ki == 0 {
        return Err(Error::Domain("Wishart identity needs at least one column".into()));
    }
    if m < tau_ki + 1 {
        return Err(Error::Domain(format!("M = {m} must exceed tau_KI = {tau_ki}")));
    }
    let sums = run_batches(
        cfg.trials,
        cfg.seed,
        || (0.0, 0.0, 0usize),
        |acc, rng| {
            let x = cn_matrix(m, tau_ki, rng);
            let gram = x.adjoint() * &x;
            let inv = gram.cholesky().ok_or(Error::Singular { cond: f64::INFINITY })?.inverse();
            let v = inv[(0, 0)].re;
            acc.0 += v;
            acc.1 += v * v;
            acc.2 += 1;
            Ok(())
        },
    )?;
    Ok(mean_estimate(&sums))
}

/// Concentration of x^H A x / M around tr(A)/M for A = I: returns the mean
/// absolute deviation per M and the fitted log-log slope.
pub fn lemma1_check(dims: &[usize], cfg: &OracleConfig) -> Result<(Vec<Estimate>, f64)> {
    let mut devs = Vec::with_capacity(dims.len());
    for &m in dims {
        let sums = run_batches(
            cfg.trials,
            cfg.seed ^ m as u64,
            || (0.0, 0.0, 0usize),
            |acc, rng| {
                let x = cn_vector(m, rng);
                let v = (x.norm_squared() / m as f64 - 1.0).abs();
                acc.0 += v;
                acc.1 += v * v;
                acc.2 += 1;
                Ok(())
            },
        )?;
        devs.push(mean_estimate(&sums));
    }
    let xs: Vec<f64> = dims.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = devs.iter().map(|e| e.mean.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    Ok((devs, slope))
}

/// E{x^H A x} = μ^H A μ + tr(AΣ) for x ~ CN(μ, Σ): returns (closed, estimate)
/// for a random Hermitian A, mean μ and covariance Σ = L L^H.
pub fn lemma2_check(m: usize, cfg: &OracleConfig) -> Result<(f64, Estimate)> {
    let mut rng = trial_rng(cfg.seed, u64::MAX);
    let r = cn_matrix(m, m, &mut rng);
    let a = (&r + r.adjoint()) * C64::new(0.5, 0.0) + CMat::identity(m, m) * C64::new(m as f64, 0.0);
    let mu = cn_vector(m, &mut rng);
    let l = cn_matrix(m, m, &mut rng) * C64::new(0.5, 0.0);
    let sigma = &l * l.adjoint();
    let closed = mu.dotc(&(&a * &mu)).re + (&a * &sigma).trace().re;
    let sums = run_batches(
        cfg.trials,
        cfg.seed,
        || (0.0, 0.0, 0usize),
        |acc, rng| {
            let x: CVec = &mu + &l * cn_vector(m, rng);
            let v = x.dotc(&(&a * &x)).re;
            acc.0 += v;
            acc.1 += v * v;
            acc.2 += 1;
            Ok(())
        },
    )?;
    Ok((closed, mean_estimate(&sums)))
}

/// Empirical E{B} for Ĥ1 with i.i.d. CN(0,1) entries: returns the mean
/// diagonal, its standard error, and the largest off-diagonal magnitude.
pub fn lemma3_check(m: usize, tau_ki: usize, cfg: &OracleConfig) -> Result<(Estimate, f64)> {
    let sums = run_batches(
        cfg.trials,
        cfg.seed,
        || (CMat::zeros(m, m), 0.0, 0.0, 0usize),
        |acc, rng| {
            let b = projector_b(&cn_matrix(m, tau_ki, rng))?;
            let d = (0..m).map(|i| b[(i, i)].re).sum::<f64>() / m as f64;
            acc.0 += &b;
            acc.1 += d;
            acc.2 += d * d;
            acc.3 += 1;
            Ok(())
        },
    )?;
    let n: usize = sums.iter().map(|s| s.3).sum();
    let mut total = CMat::zeros(m, m);
    for s in &sums {
        total += &s.0;
    }
    total /= C64::new(n as f64, 0.0);
    let diag = mean_estimate(&sums.iter().map(|s| (s.1, s.2, s.3)).collect::<Vec<_>>());
    let mut off = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                off = off.max(total[(i, j)].norm());
            }
        }
    }
    Ok((diag, off))
}

/// Per-entry empirical mean of a sampled matrix, used by moment checks.
pub fn sample_mean_matrix<F>(rows: usize, cols: usize, cfg: &OracleConfig, f: F) -> Result<CMat>
where
    F: Fn(&mut ChaCha12Rng) -> Result<CMat> + Sync,
{
    let sums = run_batches(
        cfg.trials,
        cfg.seed,
        || (CMat::zeros(rows, cols), 0usize),
        |acc, rng| {
            acc.0 += f(rng)?;
            acc.1 += 1;
            Ok(())
        },
    )?;
    let n: usize = sums.iter().map(|s| s.1).sum();
    let mut total = CMat::zeros(rows, cols);
    for s in sums {
        total += s.0;
    }
    Ok(total / C64::new(n as f64, 0.0))
}

/// Sample mean and standard error of a scalar statistic.
pub fn sample_mean<F>(cfg: &OracleConfig, f: F) -> Result<Estimate>
where
    F: Fn(&mut ChaCha12Rng) -> Result<f64> + Sync,
{
    let sums = run_batches(
        cfg.trials,
        cfg.seed,
        || (0.0, 0.0, 0usize),
        |acc, rng| {
            let v = f(rng)?;
            acc.0 += v;
            acc.1 += v * v;
            acc.2 += 1;
            Ok(())
        },
    )?;
    Ok(mean_estimate(&sums))
}

/// The pilot-contamination gain measured on the estimation chain.
///
/// EU 0 shares its pilot with EUs `1..s_size` in `shared`; `orth` gives every
/// EU its own pilot. Both plans must use the same pilot length. The
/// contamination-dependent part of the received energy of EU 0 is
/// Σ_{ℓ'∈S} p_ℓ'·(E|g_0^H w_ℓ'|² − Nλ_0), and the ratio of that quantity
/// between the two plans is returned with a delta-method standard error.
pub fn pilot_gain_oracle(
    s: &Scenario,
    csi: &StatCsi,
    shared: &PilotPlan,
    orth: &PilotPlan,
    rho: &PowerAllocation,
    theta: &PhaseShift,
    cfg: &OracleConfig,
) -> Result<Estimate> {
    if shared.tau != orth.tau {
        return Err(Error::Config("both pilot plans must have the same length".into()));
    }
    let leak = csi.n() as f64 * csi.lambda[0];
    let term = |plan: &PilotPlan, seed: u64| -> Result<Estimate> {
        let c = OracleConfig { seed, ..cfg.clone() };
        let batches = collect_moments(Scheme::Pzf, s, csi, plan, theta, &c)?;
        let group = plan.share_e[0].clone();
        Ok(jackknife(&batches, Moments::merge, |m| {
            group.iter().map(|&j| rho.rho_e[j] * (m.eu_eu[(0, j)] / m.count as f64 - leak)).sum()
        }))
    };
    let a = term(shared, cfg.seed)?;
    let b = term(orth, cfg.seed.wrapping_add(1))?;
    let r = a.mean / b.mean;
    let se = r.abs() * ((a.stderr / a.mean).powi(2) + (b.stderr / b.mean).powi(2)).sqrt();
    Ok(Estimate { mean: r, stderr: se })
}

/// Plain CN(0,1) sample, exposed for tests that build their own oracles.
pub fn standard_cn(rng: &mut ChaCha12Rng) -> C64 {
    cn(rng)
}
