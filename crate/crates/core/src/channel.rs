//! Small-scale fading draws and the LoS kernels Ξ shared by the closed forms.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{cn_matrix, CMat, CVec, C64};
use crate::scenario::StatCsi;

const UNIT_MODULUS_TOL: f64 = 1e-9;

/// RIS reflection vector θ with unit-modulus entries.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseShift {
    theta: CVec,
}

impl PhaseShift {
    pub fn new(theta: CVec) -> Result<Self> {
        if let Some((n, z)) = theta.iter().enumerate().find(|(_, z)| (z.norm() - 1.0).abs() > UNIT_MODULUS_TOL) {
            return Err(Error::Domain(format!("theta[{n}] has modulus {}", z.norm())));
        }
        Ok(Self { theta })
    }

    pub fn ones(n: usize) -> Self {
        Self { theta: CVec::from_element(n, C64::new(1.0, 0.0)) }
    }

    pub fn from_phases(phases: &[f64]) -> Self {
        Self { theta: CVec::from_iterator(phases.len(), phases.iter().map(|&p| C64::from_polar(1.0, p))) }
    }

    /// Entry-wise projection onto the unit circle; zero entries map to 1.
    pub fn project(v: &CVec) -> Self {
        Self {
            theta: v.map(|z| {
                let r = z.norm();
                if r > 0.0 && r.is_finite() {
                    z / r
                } else {
                    C64::new(1.0, 0.0)
                }
            }),
        }
    }

    pub fn as_vec(&self) -> &CVec {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.theta.iter().map(|z| z.arg()).collect()
    }
}

/// One fading realization for a fixed θ.
#[derive(Clone, Debug)]
pub struct ChannelDraw {
    pub h1: CMat,
    pub h2: CMat,
    pub h3: CMat,
    pub g: CMat,
}

/// BS→IU Rayleigh channels, column k scaled by √β_BI,k.
pub fn sample_h1<R: Rng + ?Sized>(csi: &StatCsi, rng: &mut R) -> CMat {
    let mut h1 = cn_matrix(csi.m(), csi.k_i(), rng);
    for (k, b) in csi.beta_bi.iter().enumerate() {
        h1.column_mut(k).scale_mut(b.sqrt());
    }
    h1
}

/// Ricean BS→RIS channel √(β/(δ+1))·(√δ·a_M a_N^H + H̃2).
pub fn sample_h2<R: Rng + ?Sized>(csi: &StatCsi, delta: f64, rng: &mut R) -> CMat {
    let nlos = cn_matrix(csi.m(), csi.n(), rng);
    let los = &csi.a_m * csi.a_n.adjoint() * C64::new(delta.sqrt(), 0.0);
    (los + nlos) * C64::new((csi.beta_br / (delta + 1.0)).sqrt(), 0.0)
}

/// RIS→EU LoS channels √β_RE,ℓ·f̄_ℓ.
pub fn h3(csi: &StatCsi) -> CMat {
    let mut h = csi.f_bar.clone();
    for (l, b) in csi.beta_re.iter().enumerate() {
        h.column_mut(l).scale_mut(b.sqrt());
    }
    h
}

/// G = H2·diag(θ)·H3.
pub fn cascade(h2: &CMat, theta: &PhaseShift, h3: &CMat) -> Result<CMat> {
    let n = theta.len();
    if h2.ncols() != n || h3.nrows() != n {
        return Err(Error::Dimension(format!(
            "H2 is {}x{}, theta has {n} entries, H3 is {}x{}",
            h2.nrows(),
            h2.ncols(),
            h3.nrows(),
            h3.ncols()
        )));
    }
    let mut th3 = h3.clone();
    for (i, t) in theta.as_vec().iter().enumerate() {
        th3.row_mut(i).iter_mut().for_each(|z| *z *= t);
    }
    Ok(h2 * th3)
}

pub fn draw<R: Rng + ?Sized>(csi: &StatCsi, delta: f64, theta: &PhaseShift, rng: &mut R) -> Result<ChannelDraw> {
    let h1 = sample_h1(csi, rng);
    let h2 = sample_h2(csi, delta, rng);
    let h3 = h3(csi);
    let g = cascade(&h2, theta, &h3)?;
    Ok(ChannelDraw { h1, h2, h3, g })
}

/// s_ℓ = a_N^H Θ f̄_ℓ for every EU, so that Ξ_{ℓ,t} = conj(s_ℓ)·s_t.
pub fn los_response(theta: &PhaseShift, csi: &StatCsi) -> CVec {
    let th = theta.as_vec();
    CVec::from_fn(csi.k_e(), |l, _| {
        csi.a_n
            .iter()
            .zip(th.iter())
            .zip(csi.f_bar.column(l).iter())
            .map(|((a, t), f)| a.conj() * t * f)
            .sum()
    })
}

/// Ξ_{ℓ,t}(Θ) = (f̄_ℓ^H Θ^H a_N)(a_N^H Θ f̄_t).
pub fn xi_kernel(theta: &PhaseShift, csi: &StatCsi, l: usize, t: usize) -> C64 {
    let s = los_response(theta, csi);
    s[l].conj() * s[t]
}

/// All Ξ_{ℓ,t} at once, entry (ℓ, t).
pub fn xi_matrix(theta: &PhaseShift, csi: &StatCsi) -> CMat {
    let s = los_response(theta, csi);
    CMat::from_fn(s.len(), s.len(), |l, t| s[l].conj() * s[t])
}

/// u_ℓ = diag(f̄_ℓ^H)·a_N as columns, so that Ξ_{ℓ,ℓ} = |θ^H u_ℓ|².
pub fn u_vectors(csi: &StatCsi) -> CMat {
    CMat::from_fn(csi.n(), csi.k_e(), |n, l| csi.f_bar[(n, l)].conj() * csi.a_n[n])
}

/// Mean of g_ℓ: √(λ_ℓ δ)·a_M a_N^H Θ f̄_ℓ.
pub fn los_mean(csi: &StatCsi, delta: f64, theta: &PhaseShift, l: usize) -> CVec {
    let s = los_response(theta, csi)[l];
    &csi.a_m * (s * (csi.lambda[l] * delta).sqrt())
}
