//! Deployment description, user drops and statistical CSI.
//!
//! Geometry is planar: BS at the origin, RIS at `(0, d_BR, 0)`, energy users
//! in the half disc of radius `r_E` around the RIS on the BS side, and
//! information users in a disc of radius `r_I` around `iu_center`.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};

pub type Point = [f64; 3];

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Sigmoidal energy-harvesting circuit.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct EhModel {
    pub a: f64,
    pub b: f64,
    pub phi: f64,
}

impl Default for EhModel {
    fn default() -> Self {
        Self { a: 2400.0, b: 0.003, phi: 0.02 }
    }
}

impl EhModel {
    /// Λ = 1/(1 + exp(a·b)), the zero-input offset of the logistic curve.
    pub fn lambda_const(&self) -> f64 {
        1.0 / (1.0 + (self.a * self.b).exp())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.phi > 0.0) {
            return Err(Error::Config(format!("EH constants must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
#[allow(non_snake_case)]
pub struct Scenario {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K_I")]
    pub k_i: usize,
    #[serde(rename = "K_E")]
    pub k_e: usize,
    #[serde(rename = "d_BR")]
    pub d_br: f64,
    pub r_E: f64,
    pub r_I: f64,
    pub iu_center: Point,
    pub tau_c: usize,
    pub prf_I: usize,
    pub prf_E: usize,
    /// Uplink pilot power (W).
    pub p: f64,
    /// Downlink power budget (W).
    pub p_bs: f64,
    /// Noise power (W).
    pub sigma2: f64,
    pub delta: f64,
    #[serde(rename = "C0")]
    pub c0: f64,
    pub d0: f64,
    #[serde(rename = "kappa_BR")]
    pub kappa_br: f64,
    #[serde(rename = "kappa_BI")]
    pub kappa_bi: f64,
    #[serde(rename = "kappa_RE")]
    pub kappa_re: f64,
    pub eh: EhModel,
    /// Per-IU SINR targets (linear). `None` lets the optimizer use the
    /// SINRs reached by equal power allocation.
    pub qos: Option<Vec<f64>>,
    pub seed: u64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            m: 64,
            n: 64,
            k_i: 5,
            k_e: 10,
            d_br: 10.0,
            r_E: 5.0,
            r_I: 10.0,
            iu_center: [50.0, 0.0, 0.0],
            tau_c: 196,
            prf_I: 0,
            prf_E: 0,
            p: dbm_to_watt(25.0),
            p_bs: 10.0,
            sigma2: dbm_to_watt(-94.0),
            delta: db_to_linear(3.0),
            c0: 1e-3,
            d0: 1.0,
            kappa_br: 2.2,
            kappa_bi: 3.5,
            kappa_re: 2.8,
            eh: EhModel::default(),
            qos: None,
            seed: 0,
        }
    }
}

impl Scenario {
    pub fn tau_ki(&self) -> usize {
        self.k_i - self.prf_I.min(self.k_i)
    }

    pub fn tau_ke(&self) -> usize {
        self.k_e - self.prf_E.min(self.k_e)
    }

    pub fn tau(&self) -> usize {
        self.tau_ki() + self.tau_ke()
    }

    /// ρ̃ = p̃ / σ².
    pub fn rho_budget(&self) -> f64 {
        self.p_bs / self.sigma2
    }

    pub fn side(&self) -> usize {
        (self.n as f64).sqrt().round() as usize
    }

    pub fn bs_pos(&self) -> Point {
        [0.0, 0.0, 0.0]
    }

    pub fn ris_pos(&self) -> Point {
        [0.0, self.d_br, 0.0]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n == 0 || self.side() * self.side() != self.n {
            return bad(format!("N = {} is not a perfect square", self.n));
        }
        if self.k_i > 0 && self.prf_I > self.k_i - 1 || self.k_i == 0 && self.prf_I > 0 {
            return bad(format!("prf_I = {} out of range for K_I = {}", self.prf_I, self.k_i));
        }
        if self.k_e > 0 && self.prf_E > self.k_e - 1 || self.k_e == 0 && self.prf_E > 0 {
            return bad(format!("prf_E = {} out of range for K_E = {}", self.prf_E, self.k_e));
        }
        if self.m <= self.tau_ki() + 1 {
            return bad(format!("M = {} must exceed tau_KI + 1 = {}", self.m, self.tau_ki() + 1));
        }
        let tau = self.tau();
        if tau < 1 || tau >= self.tau_c {
            return bad(format!("pilot length {tau} must lie in [1, tau_c = {})", self.tau_c));
        }
        let positive = [
            ("d_BR", self.d_br),
            ("r_E", self.r_E),
            ("r_I", self.r_I),
            ("p", self.p),
            ("p_bs", self.p_bs),
            ("sigma2", self.sigma2),
            ("C0", self.c0),
            ("d0", self.d0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be non-negative, got {}", self.delta));
        }
        for (name, v) in [("kappa_BR", self.kappa_br), ("kappa_BI", self.kappa_bi), ("kappa_RE", self.kappa_re)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        self.eh.validate()?;
        if let Some(q) = &self.qos {
            if q.len() != self.k_i {
                return bad(format!("qos has {} entries, expected K_I = {}", q.len(), self.k_i));
            }
            if q.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
                return bad("qos targets must be non-negative".into());
            }
        }
        Ok(())
    }
}

/// Large-scale statistics and LoS geometry of one user drop.
#[derive(Clone, Debug)]
pub struct StatCsi {
    pub beta_bi: Vec<f64>,
    pub beta_re: Vec<f64>,
    pub beta_br: f64,
    pub lambda: Vec<f64>,
    pub a_m: CVec,
    pub a_n: CVec,
    /// Column ℓ is f̄_ℓ.
    pub f_bar: CMat,
    pub iu_pos: Vec<Point>,
    pub eu_pos: Vec<Point>,
}

impl StatCsi {
    pub fn m(&self) -> usize {
        self.a_m.len()
    }

    pub fn n(&self) -> usize {
        self.a_n.len()
    }

    pub fn k_i(&self) -> usize {
        self.beta_bi.len()
    }

    pub fn k_e(&self) -> usize {
        self.beta_re.len()
    }

    /// Builds the statistics for explicit user positions.
    pub fn from_positions(s: &Scenario, iu_pos: Vec<Point>, eu_pos: Vec<Point>) -> Result<Self> {
        s.validate()?;
        if iu_pos.len() != s.k_i || eu_pos.len() != s.k_e {
            return Err(Error::Dimension(format!(
                "got {} IU / {} EU positions for K_I = {}, K_E = {}",
                iu_pos.len(),
                eu_pos.len(),
                s.k_i,
                s.k_e
            )));
        }
        let bs = s.bs_pos();
        let ris = s.ris_pos();
        let beta_br = path_loss(dist(bs, ris), s.kappa_br, s.c0, s.d0)?;
        let beta_bi = iu_pos
            .iter()
            .map(|u| path_loss(dist(bs, *u), s.kappa_bi, s.c0, s.d0))
            .collect::<Result<Vec<_>>>()?;
        let beta_re = eu_pos
            .iter()
            .map(|u| path_loss(dist(ris, *u), s.kappa_re, s.c0, s.d0))
            .collect::<Result<Vec<_>>>()?;
        let lambda = beta_re.iter().map(|b| b * beta_br / (s.delta + 1.0)).collect();

        let (el, az) = angles(bs, ris);
        let a_m = ula(s.m, el, az);
        let (el, az) = angles(ris, bs);
        let a_n = uspa(s.n, el, az);
        let mut f_bar = CMat::zeros(s.n, s.k_e);
        for (l, u) in eu_pos.iter().enumerate() {
            let (el, az) = angles(ris, *u);
            f_bar.set_column(l, &uspa(s.n, el, az));
        }
        Ok(Self { beta_bi, beta_re, beta_br, lambda, a_m, a_n, f_bar, iu_pos, eu_pos })
    }
}

/// C0·(d/d0)^(−κ).
pub fn path_loss(d: f64, kappa: f64, c0: f64, d0: f64) -> Result<f64> {
    if !(d > 0.0) || !(d0 > 0.0) {
        return Err(Error::Domain(format!("path loss needs positive distances, got d = {d}, d0 = {d0}")));
    }
    Ok(c0 * (d / d0).powf(-kappa))
}

/// Draws IU and EU positions and derives the statistical CSI.
pub fn sample_drop<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Result<StatCsi> {
    s.validate()?;
    let iu_pos = (0..s.k_i)
        .map(|_| {
            let r = s.r_I * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            [s.iu_center[0] + r * phi.cos(), s.iu_center[1] + r * phi.sin(), s.iu_center[2]]
        })
        .collect();
    let ris = s.ris_pos();
    let eu_pos = (0..s.k_e)
        .map(|_| loop {
            let r = s.r_E * rng.random::<f64>().sqrt();
            // lower half plane relative to the RIS, i.e. towards the BS
            let phi = PI + PI * rng.random::<f64>();
            if r > 1e-9 {
                break [ris[0] + r * phi.cos(), ris[1] + r * phi.sin(), ris[2]];
            }
        })
        .collect();
    StatCsi::from_positions(s, iu_pos, eu_pos)
}

pub fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Polar angle from the z axis and azimuth of the direction `from → to`.
pub fn angles(from: Point, to: Point) -> (f64, f64) {
    let d = [to[0] - from[0], to[1] - from[1], to[2] - from[2]];
    let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let el = if r > 0.0 { (d[2] / r).clamp(-1.0, 1.0).acos() } else { 0.0 };
    (el, d[1].atan2(d[0]))
}

/// Half-wavelength ULA response.
pub fn ula(len: usize, el: f64, az: f64) -> CVec {
    let u = PI * el.sin() * az.cos();
    CVec::from_fn(len, |q, _| C64::from_polar(1.0, u * q as f64))
}

/// Half-wavelength square planar array response, index `qy·side + qx`.
pub fn uspa(len: usize, el: f64, az: f64) -> CVec {
    let side = (len as f64).sqrt().round() as usize;
    let ux = PI * el.sin() * az.cos();
    let uy = PI * el.sin() * az.sin();
    CVec::from_fn(len, |i, _| {
        let (qy, qx) = (i / side, i % side);
        C64::from_polar(1.0, ux * qx as f64 + uy * qy as f64)
    })
}
