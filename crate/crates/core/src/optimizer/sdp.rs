//! Primal-dual interior-point solver for one Hermitian PSD block plus a
//! nonnegative orthant.
//!
//! Primal: min Re⟨C, X⟩ + c·z  s.t.  X_ii = d_i,  ⟨A_r, X⟩ + Σ_j B_rj z_j = b_r,
//! X ⪰ 0, z ≥ 0, where every A_r is a short sum of rank-two terms
//! u v^H + v u^H. The Schur complement is assembled from that structure, so
//! each iteration costs a handful of dense n×n products. HKM direction with Mehrotra
//! predictor-corrector.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, CMat, CVec, C64};

/// A = u v^H + v u^H.
#[derive(Clone, Debug)]
pub struct RankTwo {
    pub u: CVec,
    pub v: CVec,
}

#[derive(Clone, Debug)]
pub struct SdpRow {
    /// A_r as a sum of rank-two terms.
    pub a: Vec<RankTwo>,
    /// Coefficients on the orthant variables, (index, value).
    pub lp: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub c: CMat,
    pub diag_rhs: Vec<f64>,
    pub rows: Vec<SdpRow>,
    pub c_lp: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SdpSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SdpSettings {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 80 }
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub x: CMat,
    pub z: Vec<f64>,
    /// Multipliers of the diagonal constraints followed by the rows.
    pub y: Vec<f64>,
    pub s: CMat,
    pub iterations: usize,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub pinf: f64,
    pub dinf: f64,
}

struct Workspace<'a> {
    p: &'a SdpProblem,
    n: usize,
    m: usize,
}

impl Workspace<'_> {
    /// Re tr(A_i Y) for every constraint, diagonal ones first.
    fn a_re(&self, y: &CMat) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.m);
        out.extend((0..self.n).map(|i| y[(i, i)].re));
        for r in &self.p.rows {
            out.push(r.a.iter().map(|t| (t.v.dotc(&(y * &t.u)) + t.u.dotc(&(y * &t.v))).re).sum());
        }
        out
    }

    fn a_adj(&self, y: &[f64]) -> CMat {
        let mut out = CMat::zeros(self.n, self.n);
        for i in 0..self.n {
            out[(i, i)] = C64::new(y[i], 0.0);
        }
        for (k, r) in self.p.rows.iter().enumerate() {
            let w = C64::new(y[self.n + k], 0.0);
            for t in &r.a {
                out.gerc(w, &t.u, &t.v, C64::new(1.0, 0.0));
                out.gerc(w, &t.v, &t.u, C64::new(1.0, 0.0));
            }
        }
        out
    }

    fn b_mul(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (k, r) in self.p.rows.iter().enumerate() {
            out[self.n + k] = r.lp.iter().map(|&(j, c)| c * z[j]).sum();
        }
        out
    }

    fn b_adj(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.p.c_lp.len()];
        for (k, r) in self.p.rows.iter().enumerate() {
            for &(j, c) in &r.lp {
                out[j] += c * y[self.n + k];
            }
        }
        out
    }

    /// M_ij = Re tr(A_i X A_j H) + Σ_l B_il B_jl d_l.
    fn schur(&self, x: &CMat, h: &CMat, d: &[f64]) -> DMatrix<f64> {
        let (n, m) = (self.n, self.m);
        let mut s = DMatrix::zeros(m, m);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] = (x[(i, j)] * h[(j, i)]).re;
            }
        }
        let rows = &self.p.rows;
        // flattened terms with their row index
        let terms: Vec<(usize, &RankTwo)> =
            rows.iter().enumerate().flat_map(|(r, row)| row.a.iter().map(move |t| (r, t))).collect();
        let xu: Vec<CVec> = terms.iter().map(|(_, t)| x * &t.u).collect();
        let xv: Vec<CVec> = terms.iter().map(|(_, t)| x * &t.v).collect();
        let hu: Vec<CVec> = terms.iter().map(|(_, t)| h * &t.u).collect();
        let hv: Vec<CVec> = terms.iter().map(|(_, t)| h * &t.v).collect();
        let mut block = DMatrix::<f64>::zeros(rows.len(), rows.len());
        for (a, &(r, _)) in terms.iter().enumerate() {
            for i in 0..n {
                s[(i, n + r)] += (xu[a][i] * hv[a][i].conj() + xv[a][i] * hu[a][i].conj()).re;
            }
            for (b, &(q, tq)) in terms.iter().enumerate().skip(a) {
                let ta = terms[a].1;
                let (ur, vr) = (&ta.u, &ta.v);
                let (uq, vq) = (&tq.u, &tq.v);
                // (v_a^H X u_b)(v_b^H H u_a) + (v_a^H X v_b)(u_b^H H u_a)
                // + (u_a^H X u_b)(v_b^H H v_a) + (u_a^H X v_b)(u_b^H H v_a)
                let exact = (vr.dotc(&xu[b]) * vq.dotc(&hu[a])
                    + vr.dotc(&xv[b]) * uq.dotc(&hu[a])
                    + ur.dotc(&xu[b]) * vq.dotc(&hv[a])
                    + ur.dotc(&xv[b]) * uq.dotc(&hv[a]))
                .re;
                block[(r, q)] += exact;
                if b != a {
                    block[(q, r)] += exact;
                }
            }
        }
        for r in 0..rows.len() {
            for i in 0..n {
                s[(n + r, i)] = s[(i, n + r)];
            }
            for q in 0..rows.len() {
                s[(n + r, n + q)] = 0.5 * (block[(r, q)] + block[(q, r)]);
            }
            for &(j, c) in &rows[r].lp {
                for q in 0..rows.len() {
                    for &(j2, c2) in &rows[q].lp {
                        if j2 == j {
                            s[(n + r, n + q)] += c * c2 * d[j];
                        }
                    }
                }
            }
        }
        s
    }
}

fn dot_re(a: &CMat, b: &CMat) -> f64 {
    // Re tr(A B) for Hermitian A, B
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn hpd_inverse(a: &CMat) -> Option<CMat> {
    a.clone().cholesky().map(|c| c.inverse())
}

/// Largest α with X + α dX ⪰ 0 (infinite when dX ⪰ 0).
fn max_step_psd(x: &CMat, dx: &CMat) -> f64 {
    let Some(chol) = x.clone().cholesky() else { return 0.0 };
    let l = chol.l();
    let Some(a) = l.solve_lower_triangular(dx) else { return 0.0 };
    let Some(b) = l.solve_lower_triangular(&a.adjoint()) else { return 0.0 };
    let lmin = hermitian_part(&b).symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

fn max_step_orthant(z: &[f64], dz: &[f64]) -> f64 {
    z.iter()
        .zip(dz)
        .filter(|(_, d)| **d < 0.0)
        .map(|(z, d)| -z / d)
        .fold(f64::INFINITY, f64::min)
}

/// Interior starting point; `s` and `sl` must be positive definite/positive
/// and `x`, `z` likewise.
#[derive(Clone, Debug)]
pub struct StartPoint {
    pub x: CMat,
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    pub s: CMat,
    pub sl: Vec<f64>,
}

pub fn solve(p: &SdpProblem, settings: &SdpSettings) -> Result<SdpSolution> {
    solve_from(p, settings, None)
}

pub fn solve_from(p: &SdpProblem, settings: &SdpSettings, start: Option<StartPoint>) -> Result<SdpSolution> {
    let n = p.c.nrows();
    if p.diag_rhs.len() != n {
        return Err(Error::Dimension(format!("{} diagonal targets for a {n}x{n} block", p.diag_rhs.len())));
    }
    let nl = p.c_lp.len();
    let ws = Workspace { p, n, m: n + p.rows.len() };
    let b: Vec<f64> = p.diag_rhs.iter().cloned().chain(p.rows.iter().map(|r| r.rhs)).collect();
    let nb = norm(&b);
    let nc = p.c.norm() + norm(&p.c_lp);

    let (mut x, mut z, mut y, mut s, mut sl) = match start {
        Some(st) => {
            if st.x.nrows() != n || st.s.nrows() != n || st.z.len() != nl || st.sl.len() != nl || st.y.len() != ws.m {
                return Err(Error::Dimension("starting point does not match the problem".into()));
            }
            (st.x, st.z, st.y, st.s, st.sl)
        }
        None => (
            CMat::from_diagonal(&DVector::from_iterator(n, p.diag_rhs.iter().map(|d| C64::new(d.max(1.0), 0.0)))),
            vec![1.0; nl],
            vec![0.0; ws.m],
            CMat::identity(n, n),
            vec![1.0; nl],
        ),
    };
    let dim = (n + nl) as f64;

    let mut last = None;
    let mut best: Option<(f64, SdpSolution)> = None;
    let mut best_it = 0;
    for it in 0..settings.max_iter {
        let ax = ws.a_re(&x);
        let bz = ws.b_mul(&z);
        let rp: Vec<f64> = (0..ws.m).map(|i| b[i] - ax[i] - bz[i]).collect();
        let rd = &p.c - ws.a_adj(&y) - &s;
        let btl = ws.b_adj(&y);
        let rdl: Vec<f64> = (0..nl).map(|j| p.c_lp[j] - btl[j] - sl[j]).collect();
        let mu = (dot_re(&x, &s) + z.iter().zip(&sl).map(|(a, b)| a * b).sum::<f64>()) / dim;
        let pobj = dot_re(&p.c, &x) + p.c_lp.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
        let dobj: f64 = b.iter().zip(&y).map(|(a, b)| a * b).sum();
        let pinf = norm(&rp) / (1.0 + nb);
        let dinf = (rd.norm() + norm(&rdl)) / (1.0 + nc);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let gap_mu = mu * dim / (1.0 + pobj.abs() + dobj.abs());
        last = Some((pinf, dinf, gap, pobj, dobj));
        if pinf < settings.tol && dinf < settings.tol && gap.max(gap_mu) < settings.tol {
            return Ok(SdpSolution { x, z, y, s, iterations: it, primal_obj: pobj, dual_obj: dobj, pinf, dinf });
        }
        // near a degenerate optimum the Newton systems lose accuracy before
        // the tolerance is met; keep the best point and stop once it is
        // clearly behind us
        let err = pinf.max(dinf).max(gap);
        match &best {
            Some((e, _)) if err >= *e => {
                if err > 100.0 * *e || it >= best_it + 8 {
                    break;
                }
            }
            _ => {
                best = Some((err, SdpSolution { x: x.clone(), z: z.clone(), y: y.clone(), s: s.clone(), iterations: it, primal_obj: pobj, dual_obj: dobj, pinf, dinf }));
                best_it = it;
            }
        }

        let Some(h) = hpd_inverse(&s) else { break };
        let dl: Vec<f64> = (0..nl).map(|j| z[j] / sl[j]).collect();
        let mut schur = ws.schur(&x, &h, &dl);
        if !schur.iter().all(|v| v.is_finite()) {
            break;
        }
        let mut reg = 1e-13 * (0..ws.m).map(|i| schur[(i, i)].abs()).fold(1e-300, f64::max);
        let chol = loop {
            if let Some(c) = schur.clone().cholesky() {
                break Some(c);
            }
            if reg > 1e-3 * (0..ws.m).map(|i| schur[(i, i)].abs()).fold(1e-300, f64::max) {
                break None;
            }
            for i in 0..ws.m {
                schur[(i, i)] += reg;
            }
            reg *= 10.0;
        };
        let Some(chol) = chol else { break };
        let rd_small = rd.norm() <= 1e-15 * (1.0 + nc);
        let a_xrdh = if rd_small { vec![0.0; ws.m] } else { ws.a_re(&(&x * &rd * &h)) };

        // one Newton solve for a given T (matrix target) and t (orthant target)
        let direction = |t_mat: &CMat, t_lp: &[f64]| -> (CMat, Vec<f64>, Vec<f64>, CMat, Vec<f64>) {
            let at = ws.a_re(t_mat);
            let corr: Vec<f64> = (0..nl).map(|j| t_lp[j] - dl[j] * rdl[j]).collect();
            let bc = ws.b_mul(&corr);
            let rhs = DVector::from_iterator(ws.m, (0..ws.m).map(|i| rp[i] - at[i] + a_xrdh[i] - bc[i]));
            let dy = chol.solve(&rhs);
            let dyv: Vec<f64> = dy.iter().cloned().collect();
            let ds = &rd - ws.a_adj(&dyv);
            let bty = ws.b_adj(&dyv);
            let dsl: Vec<f64> = (0..nl).map(|j| rdl[j] - bty[j]).collect();
            let dx = hermitian_part(&(t_mat - &x * &ds * &h));
            let dz: Vec<f64> = (0..nl).map(|j| t_lp[j] - dl[j] * dsl[j]).collect();
            (dx, dz, dyv, ds, dsl)
        };

        let neg_x = -&x;
        let neg_z: Vec<f64> = z.iter().map(|v| -v).collect();
        let (dxa, dza, _, dsa, dsla) = direction(&neg_x, &neg_z);
        let ap = max_step_psd(&x, &dxa).min(max_step_orthant(&z, &dza)).min(1.0);
        let ad = max_step_psd(&s, &dsa).min(max_step_orthant(&sl, &dsla)).min(1.0);
        let mu_aff = (dot_re(&(&x + &dxa * C64::new(ap, 0.0)), &(&s + &dsa * C64::new(ad, 0.0)))
            + (0..nl).map(|j| (z[j] + ap * dza[j]) * (sl[j] + ad * dsla[j])).sum::<f64>())
            / dim;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let t_mat = &h * C64::new(sigma * mu, 0.0) - &x - hermitian_part(&(&dxa * &dsa * &h));
        let t_lp: Vec<f64> = (0..nl).map(|j| sigma * mu / sl[j] - z[j] - dza[j] * dsla[j] / sl[j]).collect();
        let (dx, dz, dy, ds, dsl) = direction(&t_mat, &t_lp);
        let gamma = 0.98;
        let ap = (gamma * max_step_psd(&x, &dx).min(max_step_orthant(&z, &dz))).min(1.0);
        let ad = (gamma * max_step_psd(&s, &ds).min(max_step_orthant(&sl, &dsl))).min(1.0);
        if ap <= 1e-14 && ad <= 1e-14 {
            break;
        }
        x += &dx * C64::new(ap, 0.0);
        x = hermitian_part(&x);
        s += &ds * C64::new(ad, 0.0);
        s = hermitian_part(&s);
        for j in 0..nl {
            z[j] += ap * dz[j];
            sl[j] += ad * dsl[j];
        }
        for i in 0..ws.m {
            y[i] += ad * dy[i];
        }
    }
    if let Some((e, sol)) = best {
        if e < 1e-6 {
            return Ok(sol);
        }
    }
    let (pinf, dinf, gap, _, _) = last.unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN));
    Err(Error::Solver(format!(
        "interior point stalled: primal infeasibility {pinf:.2e}, dual infeasibility {dinf:.2e}, gap {gap:.2e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn maxcut_style_two_by_two() {
        // min Re⟨C, X⟩ with C = [[0, 1], [1, 0]], diag X = 1 → X = [[1, -1], [-1, 1]], value -2
        let c = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let p = SdpProblem { c, diag_rhs: vec![1.0, 1.0], rows: vec![], c_lp: vec![] };
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert!((sol.primal_obj + 2.0).abs() < 1e-7, "{}", sol.primal_obj);
        assert!((sol.x[(0, 1)].re + 1.0).abs() < 1e-6);
    }

    #[test]
    fn complex_phase_is_recovered() {
        // max Re(e^{-jφ} X_01) with diag X = 1 → X_01 = e^{jφ}
        let phi = 0.7f64;
        let w = C64::from_polar(0.5, phi);
        let c = CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), -w, -w.conj(), C64::new(0.0, 0.0)]);
        let p = SdpProblem { c, diag_rhs: vec![1.0, 1.0], rows: vec![], c_lp: vec![] };
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert!((sol.x[(0, 1)] - C64::from_polar(1.0, phi)).norm() < 1e-6, "{}", sol.x[(0, 1)]);
    }

    #[test]
    fn rank_two_row_with_slack() {
        // min -t  s.t. 2Re(X_01) - t - w = 0, diag X = 1, t, w ≥ 0 → t = 2
        let n = 2;
        let row = SdpRow { a: vec![RankTwo { u: e(n, 1) * C64::new(0.5, 0.0), v: e(n, 0) * C64::new(2.0, 0.0) }], lp: vec![(0, -1.0), (1, -1.0)], rhs: 0.0 };
        let p = SdpProblem { c: CMat::zeros(n, n), diag_rhs: vec![1.0; n], rows: vec![row], c_lp: vec![-1.0, 0.0] };
        let sol = solve(&p, &SdpSettings::default()).unwrap();
        assert!((sol.z[0] - 2.0).abs() < 1e-6, "{:?}", sol.z);
        assert!(sol.pinf < 1e-8 && sol.dinf < 1e-8);
    }
}
