//! Phase-shift design at fixed ρ (Algorithm 2): quadratic transform of the
//! ratio terms, a λ_max majorizer that makes every constraint linear on the
//! unit circle, and a rank-one-penalized SDP over Q = θ̄θ̄^H.
//!
//! The objective is the simplified per-EU energy
//! F_ℓ(θ) = f_ℓ,2(θ) + Nλ_ℓΣρ_I + ρ_E,ℓ(Nλ_ℓ − γ_ĝℓ) + 1, i.e. the
//! normalized energy Q_ℓ/(σ²(τ_c − τ)) with the product-of-path-loss
//! terms dropped. Maximizing min_ℓ F_ℓ is the same as maximizing ϱ, since
//! ℏ̃_ℓ is increasing in ϱ.

use nalgebra::DMatrix;

use super::sdp::{self, RankTwo, SdpProblem, SdpRow, SdpSettings, StartPoint};
use super::{OptConfig, OptProblem, PhaseLift};
use crate::analysis::PowerAllocation;
use crate::channel::{u_vectors, PhaseShift};
use crate::error::{Error, Result};
use crate::linalg::{eigh, lambda_max, CMat, CVec, C64};
use crate::precoding::Scheme;

/// Everything F_ℓ needs at fixed ρ.
#[derive(Clone, Debug)]
pub struct PhaseModel {
    pub n: usize,
    pub delta: f64,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub rho_e: Vec<f64>,
    pub sum_i: f64,
    /// M + 1 for MRT, M − τ_KI + 1 for projected MRT.
    pub mf: f64,
    /// Nλ_ℓΣρ_I + ρ_E,ℓ(Nλ_ℓ − γ_ĝℓ) + 1.
    pub offset: Vec<f64>,
    /// u_ℓ as columns.
    pub u: CMat,
}

impl PhaseModel {
    pub fn new(prob: &OptProblem, rho: &PowerAllocation) -> Self {
        let csi = prob.csi;
        let n = csi.n();
        let lambda = csi.lambda.clone();
        let gamma = prob.st.gamma_g.clone();
        let sum_i = rho.sum_i();
        let mf = match prob.scheme {
            Scheme::Pzf => prob.s.m as f64 + 1.0,
            Scheme::Ppzf => (prob.s.m - prob.plan.tau_ki) as f64 + 1.0,
        };
        let nf = n as f64;
        let offset = (0..csi.k_e())
            .map(|l| nf * lambda[l] * sum_i + rho.rho_e[l] * (nf * lambda[l] - gamma[l]) + 1.0)
            .collect();
        Self { n, delta: prob.s.delta, lambda, gamma, rho_e: rho.rho_e.clone(), sum_i, mf, offset, u: u_vectors(csi) }
    }

    pub fn k_e(&self) -> usize {
        self.lambda.len()
    }

    /// c_ℓ = θ^H u_ℓ.
    pub fn c(&self, theta: &CVec) -> Vec<C64> {
        (0..self.k_e()).map(|l| theta.dotc(&self.u.column(l))).collect()
    }

    /// λ_tδ|θ^H u_t|² + γ_t.
    fn denominators(&self, c: &[C64]) -> Vec<f64> {
        (0..self.k_e()).map(|t| self.lambda[t] * self.delta * c[t].norm_sqr() + self.gamma[t]).collect()
    }

    /// f_ℓ,2 for every EU.
    pub fn f2(&self, theta: &CVec) -> Vec<f64> {
        let c = self.c(theta);
        let d = self.denominators(&c);
        let nf = self.n as f64;
        (0..self.k_e())
            .map(|l| {
                let xi = c[l].norm_sqr();
                let (lam, g) = (self.lambda[l], self.gamma[l]);
                let cross: f64 = (0..self.k_e())
                    .filter(|&t| t != l)
                    .map(|t| self.rho_e[t] * lam * self.gamma[t] * (self.delta * xi + nf) / d[t])
                    .sum();
                let own = self.rho_e[l] * self.mf * g * (2.0 * lam * self.delta * xi + g) / d[l];
                cross + own + self.sum_i * lam * self.delta * xi
            })
            .collect()
    }

    /// F_ℓ = f_ℓ,2 + offset_ℓ.
    pub fn objective(&self, theta: &CVec) -> Vec<f64> {
        self.f2(theta).into_iter().zip(&self.offset).map(|(f, o)| f + o).collect()
    }

    pub fn min_objective(&self, theta: &CVec) -> f64 {
        self.objective(theta).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// √(ρ_tλ_ℓγ_tδ) for t ≠ ℓ and √(2ρ_ℓ·mf·γ_ℓλ_ℓδ) for t = ℓ: the factor
    /// multiplying θ^H u_ℓ in the numerator of each ratio.
    fn num_theta(&self, l: usize, t: usize) -> f64 {
        if t == l {
            (2.0 * self.rho_e[l] * self.mf * self.gamma[l] * self.lambda[l] * self.delta).sqrt()
        } else {
            (self.rho_e[t] * self.lambda[l] * self.gamma[t] * self.delta).sqrt()
        }
    }

    /// The θ-free part of each numerator: √(ρ_tλ_ℓγ_tN), or γ_ℓ√(ρ_ℓ·mf).
    fn num_const(&self, l: usize, t: usize) -> f64 {
        if t == l {
            self.gamma[l] * (self.rho_e[l] * self.mf).sqrt()
        } else {
            (self.rho_e[t] * self.lambda[l] * self.gamma[t] * self.n as f64).sqrt()
        }
    }
}

/// Quadratic-transform auxiliaries, entry (ℓ, t).
#[derive(Clone, Debug)]
pub struct Auxiliary {
    pub y: CMat,
    pub y_bar: DMatrix<f64>,
}

/// The maximizers of f_ℓ,3 over y at fixed θ.
pub fn quad_transform_update(model: &PhaseModel, theta: &CVec) -> Auxiliary {
    let k = model.k_e();
    let c = model.c(theta);
    let d = model.denominators(&c);
    let y = CMat::from_fn(k, k, |l, t| c[l] * (model.num_theta(l, t) / d[t]));
    let y_bar = DMatrix::from_fn(k, k, |l, t| model.num_const(l, t) / d[t]);
    Auxiliary { y, y_bar }
}

/// f_ℓ,3(θ, y) evaluated directly from its definition.
pub fn f3(model: &PhaseModel, aux: &Auxiliary, theta: &CVec, l: usize) -> f64 {
    let c = model.c(theta);
    let d = model.denominators(&c);
    let mut acc = model.sum_i * model.lambda[l] * model.delta * c[l].norm_sqr();
    for t in 0..model.k_e() {
        let (y, yb) = (aux.y[(l, t)], aux.y_bar[(l, t)]);
        acc += 2.0 * (y.conj() * c[l] * model.num_theta(l, t)).re + 2.0 * yb * model.num_const(l, t);
        acc -= (y.norm_sqr() + yb * yb) * d[t];
    }
    acc
}

/// f_ℓ,3 written as −θ^H Wθ + 2Re(θ^H v) + c₃ and its λ_max majorizer
/// f_ℓ,5 = −λ_max N + 2Re(θ^H b) + c₄ on the unit circle.
#[derive(Clone, Debug)]
pub struct Quadratic {
    pub w: CMat,
    pub v: CVec,
    pub c3: f64,
    pub lambda_max: f64,
    pub c4: f64,
    /// (M − W)θ^(r) + v.
    pub b: CVec,
}

impl Quadratic {
    pub fn f4(&self, theta: &CVec) -> f64 {
        -(theta.dotc(&(&self.w * theta))).re + 2.0 * theta.dotc(&self.v).re + self.c3
    }

    /// Exact majorizer, valid off the unit circle too.
    pub fn f5(&self, theta: &CVec) -> f64 {
        -self.lambda_max * theta.norm_squared() + 2.0 * theta.dotc(&self.b).re + self.c4
    }
}

pub fn assemble_quadratic(model: &PhaseModel, aux: &Auxiliary, theta_r: &CVec) -> Vec<Quadratic> {
    let (n, k) = (model.n, model.k_e());
    (0..k)
        .map(|l| {
            let mut w = CMat::zeros(n, n);
            for t in 0..k {
                let wt = model.lambda[t] * model.delta * (aux.y[(l, t)].norm_sqr() + aux.y_bar[(l, t)].powi(2));
                let ut = model.u.column(t);
                w.gerc(C64::new(wt, 0.0), &ut, &ut, C64::new(1.0, 0.0));
            }
            let ul = model.u.column(l);
            w.gerc(C64::new(-model.lambda[l] * model.delta * model.sum_i, 0.0), &ul, &ul, C64::new(1.0, 0.0));

            let coef: C64 = (0..k).map(|t| aux.y[(l, t)].conj() * model.num_theta(l, t)).sum();
            let v: CVec = ul * coef;
            let c3: f64 = (0..k)
                .map(|t| {
                    2.0 * aux.y_bar[(l, t)] * model.num_const(l, t)
                        - (aux.y[(l, t)].norm_sqr() + aux.y_bar[(l, t)].powi(2)) * model.gamma[t]
                })
                .sum();
            let lam = lambda_max(&w);
            let mw_theta: CVec = theta_r * C64::new(lam, 0.0) - &w * theta_r;
            let c4 = c3 - theta_r.dotc(&mw_theta).re;
            let b = mw_theta + &v;
            Quadratic { w, v, c3, lambda_max: lam, c4, b }
        })
        .collect()
}

/// Nuclear minus spectral norm of a PSD matrix.
pub fn rank_gap(q: &CMat) -> f64 {
    let (vals, _) = eigh(q);
    let n = vals.len();
    (vals.iter().map(|v| v.max(0.0)).sum::<f64>() - vals[n - 1]).max(0.0)
}

/// Leading eigenvector scaled so the last entry is 1, projected to unit
/// modulus, first N entries. A vanishing last entry falls back to the
/// global-phase-free projection of the first N entries.
pub fn extract_theta(q: &CMat) -> PhaseShift {
    let (_, vecs) = eigh(q);
    let n1 = q.nrows();
    let lead = vecs.column(n1 - 1);
    let last = lead[n1 - 1];
    let head: CVec = lead.rows(0, n1 - 1).into_owned();
    if last.norm() > 1e-12 * lead.norm() {
        PhaseShift::project(&(head / last))
    } else {
        PhaseShift::project(&head)
    }
}

/// θ̄ = [θ; 1].
pub fn lift(theta: &CVec) -> CVec {
    let n = theta.len();
    CVec::from_fn(n + 1, |i, _| if i < n { theta[i] } else { C64::new(1.0, 0.0) })
}

#[derive(Clone, Debug)]
pub struct SdpStep {
    pub q: CMat,
    /// Epigraph value: a lower bound on min_ℓ (f_ℓ,5 + offset_ℓ) at Q.
    pub s: f64,
    /// −σ + (tr Q − λ_max Q)/(ηn), in the solver's scaled units.
    pub penalized: f64,
    pub rank_gap: f64,
    pub sdp_iterations: usize,
}

/// One convexified penalty SDP around Q^(r):
/// min −s + (1/η)(tr Q − ⟨v v^H, Q⟩) s.t. s ≤ ⟨A_ℓ, Q⟩ + d_ℓ, diag Q = 1,
/// where v is the leading eigenvector of Q^(r). Rows are scaled by a bound
/// on |⟨A_ℓ, Q⟩|; the objective keeps its unscaled balance.
pub fn penalty_sdp_step(
    quads: &[Quadratic],
    offset: &[f64],
    q_prev: &CMat,
    s_ref: f64,
    eta: f64,
    lift_kind: PhaseLift,
    settings: &SdpSettings,
) -> Result<SdpStep> {
    if !(eta > 0.0) {
        return Err(Error::Domain(format!("penalty factor must be positive, got {eta}")));
    }
    let n1 = q_prev.nrows();
    let n = n1 - 1;
    let k = quads.len();
    let e = CVec::from_fn(n1, |i, _| if i == n { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
    let pad = |x: &CVec, f: f64| CVec::from_fn(n1, |i, _| if i < n { x[i] * f } else { C64::new(0.0, 0.0) });

    // per EU: rank-two terms of the lifted matrix, constant d_ℓ, and a bound
    // on |⟨A_ℓ, Q⟩| over diag Q = 1
    let mut parts: Vec<(Vec<(CVec, CVec)>, f64, f64)> = Vec::with_capacity(k);
    for (q, o) in quads.iter().zip(offset) {
        match lift_kind {
            PhaseLift::Majorized => {
                let nb = std::f64::consts::SQRT_2 * q.b.norm();
                let bound = if nb > 0.0 { nb } else { 1.0 } * (2.0 * n as f64).sqrt();
                parts.push((vec![(pad(&q.b, 1.0), e.clone())], q.c4 - q.lambda_max * n as f64 + o, bound));
            }
            PhaseLift::Exact => {
                let (vals, vecs) = eigh(&q.w);
                let big = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let mut terms: Vec<(CVec, CVec)> = vals
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.abs() > 1e-13 * big)
                    .map(|(i, &v)| {
                        let col: CVec = vecs.column(i).into_owned();
                        (pad(&col, -0.5 * v), pad(&col, 1.0))
                    })
                    .collect();
                terms.push((pad(&q.v, 1.0), e.clone()));
                let bound = (big * n as f64 + 2.0 * q.v.norm() * (n as f64).sqrt()).max(f64::MIN_POSITIVE);
                parts.push((terms, q.c3 + o, bound));
            }
        }
    }
    let d: Vec<f64> = parts.iter().map(|p| p.1).collect();
    let sc = parts.iter().map(|p| p.2).fold(0.0, f64::max);
    let s_lb = s_ref.min(d.iter().copied().fold(f64::INFINITY, f64::min)) - 2.0 * sc;

    let rows: Vec<SdpRow> = parts
        .into_iter()
        .enumerate()
        .map(|(l, (terms, dl, _))| SdpRow {
            a: terms.into_iter().map(|(u, v)| RankTwo { u: u / C64::new(sc, 0.0), v }).collect(),
            lp: vec![(0, -1.0), (1 + l, -1.0)],
            rhs: (s_lb - dl) / sc,
        })
        .collect();
    let (_, vecs) = eigh(q_prev);
    let v = vecs.column(n1 - 1).into_owned();
    // −s + (1/η)(tr Q − ⟨vv^H, Q⟩) with s = s_lb + sc·σ, divided by sc and
    // then by 1 + w so both weights stay in (0, 1] however small η gets
    let w = 1.0 / (eta * sc);
    let c = &v * v.adjoint() * C64::new(-w / (1.0 + w), 0.0);
    let mut c_lp = vec![0.0; 1 + k];
    c_lp[0] = -1.0 / (1.0 + w);
    let p = SdpProblem { c, diag_rhs: vec![1.0; n1], rows, c_lp };
    let sol = sdp::solve_from(&p, settings, Some(feasible_start(&p, &d, s_lb, sc)))?;

    // undo the tiny diagonal drift left by the interior-point method
    let mut q = sol.x;
    let dg: Vec<f64> = (0..n1).map(|i| q[(i, i)].re.max(1e-300).sqrt()).collect();
    for i in 0..n1 {
        for j in 0..n1 {
            q[(i, j)] /= dg[i] * dg[j];
        }
    }
    let q = (&q + q.adjoint()) * C64::new(0.5, 0.0);
    let sigma = sol.z[0];
    let gap = rank_gap(&q);
    Ok(SdpStep {
        s: s_lb + sc * sigma,
        penalized: -sigma + w * gap,
        rank_gap: gap,
        q,
        sdp_iterations: sol.iterations,
    })
}

/// Q = I, σ = ½ and the matching slacks on the primal side; row multipliers
/// 2/K and a diagonal shift that makes S positive definite on the dual side.
fn feasible_start(p: &SdpProblem, d: &[f64], s_lb: f64, sc: f64) -> StartPoint {
    let n1 = p.c.nrows();
    let k = p.rows.len();
    let sigma = 0.5;
    let mut z = vec![sigma];
    // ⟨A_ℓ, I⟩ + (d_ℓ − s_lb)/sc − σ
    z.extend(p.rows.iter().zip(d).map(|(r, dl)| {
        let tr: f64 = r.a.iter().map(|t| 2.0 * t.v.dotc(&t.u).re).sum();
        tr + (dl - s_lb) / sc - sigma
    }));
    let yr = 2.0 / k as f64;
    let mut rest = p.c.clone();
    for t in p.rows.iter().flat_map(|r| &r.a) {
        rest.gerc(C64::new(-yr, 0.0), &t.u, &t.v, C64::new(1.0, 0.0));
        rest.gerc(C64::new(-yr, 0.0), &t.v, &t.u, C64::new(1.0, 0.0));
    }
    let shift = (-eigh(&rest).0[0]).max(0.0) + 1.0;
    let mut y = vec![-shift; n1];
    y.extend(std::iter::repeat(yr).take(k));
    let s = rest + CMat::identity(n1, n1) * C64::new(shift, 0.0);
    let mut sl = vec![p.c_lp[0] + yr * k as f64];
    sl.extend(std::iter::repeat(yr).take(k));
    StartPoint { x: CMat::identity(n1, n1), z, y, s, sl }
}

#[derive(Clone, Debug)]
pub struct PhaseResult {
    pub theta: PhaseShift,
    /// min_ℓ F_ℓ at the returned θ.
    pub objective: f64,
    /// min_ℓ F_ℓ of the best θ after each outer loop (non-decreasing).
    pub history: Vec<f64>,
    pub inner_iterations: Vec<usize>,
    pub outer_iterations: usize,
    pub rank_gap: f64,
    pub eta: f64,
    pub q: CMat,
    pub aux: Auxiliary,
}

/// Algorithm 2 started at `theta0` with η = η₀.
pub fn phase_opt(model: &PhaseModel, theta0: &PhaseShift, cfg: &OptConfig) -> Result<PhaseResult> {
    phase_opt_from(model, theta0, cfg.eta0, cfg)
}

/// Algorithm 2 resuming from penalty factor `eta`.
pub fn phase_opt_from(model: &PhaseModel, theta0: &PhaseShift, eta: f64, cfg: &OptConfig) -> Result<PhaseResult> {
    let n1 = model.n + 1;
    let settings = SdpSettings { tol: cfg.sdp_tol, ..SdpSettings::default() };
    let mut theta_r = theta0.as_vec().clone();
    let mut best = theta0.clone();
    let mut best_obj = model.min_objective(&theta_r);
    let mut history = vec![best_obj];
    let mut inner_iterations = Vec::new();
    let mut eta = eta;
    let lifted = lift(&theta_r);
    let mut q = &lifted * lifted.adjoint();
    let mut gap = 0.0;
    let mut aux = quad_transform_update(model, &theta_r);
    let mut prev_obj = best_obj;

    for _outer in 0..cfg.max_outer {
        aux = quad_transform_update(model, &theta_r);
        let quads = assemble_quadratic(model, &aux, &theta_r);
        let s_ref = model.min_objective(&theta_r);
        let mut prev_pen = f64::INFINITY;
        let mut inner = 0;
        while inner < cfg.max_inner {
            let step = penalty_sdp_step(&quads, &model.offset, &q, s_ref, eta, cfg.lift, &settings)?;
            inner += 1;
            q = step.q;
            gap = step.rank_gap;
            let done = (step.penalized - prev_pen).abs() <= cfg.epsilon * step.penalized.abs().max(1.0);
            prev_pen = step.penalized;
            if done {
                break;
            }
        }
        inner_iterations.push(inner);

        let cand = extract_theta(&q);
        let obj = model.min_objective(cand.as_vec());
        if obj > best_obj {
            best_obj = obj;
            best = cand.clone();
        }
        history.push(best_obj);
        theta_r = cand.as_vec().clone();
        let rel = (obj - prev_obj).abs() / obj.abs().max(f64::MIN_POSITIVE);
        prev_obj = obj;
        if gap <= cfg.rank_tol * n1 as f64 && rel <= cfg.epsilon {
            break;
        }
        eta = (eta * cfg.kappa1).max(cfg.eta0 * 1e-12);
    }
    Ok(PhaseResult {
        theta: best,
        objective: best_obj,
        outer_iterations: inner_iterations.len(),
        history,
        inner_iterations,
        rank_gap: gap,
        eta,
        q,
        aux,
    })
}
