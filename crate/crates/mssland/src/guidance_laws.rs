// SPDX-License-Identifier: Apache-2.0

//! ZEM/ZEV feedback, the terrain-avoidance divert term, sliding surfaces and
//! the sliding-mode terrain-avoidance law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lander_dynamics::LanderState;
use crate::Vec3;

/// Guidance law selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    /// Plain ZEM/ZEV optimal guidance.
    Ogl,
    /// ZEM/ZEV guidance plus the terrain divert term.
    Otalg,
    /// Terrain-avoidance guidance with the sliding-mode robustifying term.
    MssOtalg,
}

impl Law {
    pub const ALL: [Law; 3] = [Law::Ogl, Law::Otalg, Law::MssOtalg];

    pub fn name(self) -> &'static str {
        match self {
            Law::Ogl => "ogl",
            Law::Otalg => "otalg",
            Law::MssOtalg => "mss-otalg",
        }
    }
}

impl std::fmt::Display for Law {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ogl" => Ok(Law::Ogl),
            "otalg" => Ok(Law::Otalg),
            "mss-otalg" | "mss_otalg" | "mssotalg" => Ok(Law::MssOtalg),
            other => Err(Error::config("scenario.law", format!("unknown law `{other}`"))),
        }
    }
}

/// Gains and targets shared by the guidance laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceConfig {
    /// Per-axis divert-rate gains.
    pub l1: Vec3,
    pub l2: Vec3,
    pub l3: Vec3,
    /// Surface gain `Λ` linking position error into the second surface.
    pub lambda: f64,
    pub k1: f64,
    pub k2: f64,
    /// Disturbance bound used by the sliding parameter, m/s².
    pub a_p_max: f64,
    /// Boundary-layer width of the saturation function.
    pub eps_boundary: f64,
    /// Target position, m.
    pub r_f: Vec3,
    /// Target velocity, m/s.
    pub v_f: Vec3,
    /// Terminal time, s.
    pub t_f: f64,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        GuidanceConfig {
            l1: Vec3::repeat(1.0),
            l2: Vec3::repeat(9500.0),
            l3: Vec3::repeat(500.0),
            lambda: 2.0,
            k1: 0.8,
            k2: 0.2,
            a_p_max: 3.75,
            eps_boundary: 0.1,
            r_f: Vec3::zeros(),
            v_f: Vec3::zeros(),
            t_f: 100.0,
        }
    }
}

impl GuidanceConfig {
    /// Checks invariants. Returns a warning when `Λ` is outside `{2, 3}`.
    pub fn validate(&self) -> Result<Option<String>> {
        for (name, v) in [("l1", self.l1), ("l2", self.l2), ("l3", self.l3)] {
            if !v.iter().all(|x| *x > 0.0 && x.is_finite()) {
                return Err(Error::config(format!("guidance.{name}"), format!("every component of {name} must be > 0")));
            }
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::config("guidance.Lambda", "must be > 0"));
        }
        for (name, k) in [("k1", self.k1), ("k2", self.k2)] {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::config(format!("guidance.{name}"), "must be > 0"));
            }
        }
        if !(self.a_p_max >= 0.0 && self.a_p_max.is_finite()) {
            return Err(Error::config("guidance.a_p_max_mps2", "must be >= 0"));
        }
        if !(self.eps_boundary > 0.0 && self.eps_boundary.is_finite()) {
            return Err(Error::config("guidance.eps_boundary", "must be > 0"));
        }
        if !(self.t_f > 0.0 && self.t_f.is_finite()) {
            return Err(Error::config("guidance.t_f_s", "must be > 0"));
        }
        if !self.r_f.iter().chain(self.v_f.iter()).all(|x| x.is_finite()) {
            return Err(Error::config("guidance.r_f_m", "targets must be finite"));
        }
        if self.lambda != 2.0 && self.lambda != 3.0 {
            if self.lambda <= 1.0 {
                return Err(Error::config("guidance.Lambda", "must be > 1"));
            }
            return Ok(Some(format!(
                "guidance.Lambda = {} is outside {{2, 3}}; the reaching-law cancellation does not hold",
                self.lambda
            )));
        }
        Ok(None)
    }
}

/// Everything a guidance evaluation produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceOutput {
    pub law: Law,
    /// Ideal acceleration command before the actuator, m/s².
    pub a_cmd: Vec3,
    /// Zero-effort miss and velocity under gravity.
    pub zem: Vec3,
    pub zev: Vec3,
    /// The ZEM/ZEV term `(6/t_go²) ZEM − (2/t_go) ZEV` as it enters the
    /// command: gravity-inclusive for `Ogl`/`Otalg`, gravity-free for `MssOtalg`.
    pub ogl_term: Vec3,
    /// Divert rate, m/s⁴.
    pub p: Vec3,
    /// `p t_go² / 12`, m/s².
    pub divert_term: Vec3,
    pub s1: Vec3,
    pub s2: Vec3,
    /// Diagonal of the sliding parameter.
    pub phi: Vec3,
}

/// Zero-effort miss and velocity under constant gravity `g`.
pub fn zem_zev(s: &LanderState, cfg: &GuidanceConfig, g: &Vec3, t_go: f64) -> (Vec3, Vec3) {
    let zem = cfg.r_f - (s.r + s.v * t_go + g * (0.5 * t_go * t_go));
    let zev = cfg.v_f - (s.v + g * t_go);
    (zem, zev)
}

/// Optimal ZEM/ZEV feedback acceleration.
pub fn ogl_accel(zem: &Vec3, zev: &Vec3, t_go: f64) -> Vec3 {
    zem * (6.0 / (t_go * t_go)) - zev * (2.0 / t_go)
}

/// Component-wise divert rate for barrier distances `d`.
pub fn divert_rate(d: &Vec3, cfg: &GuidanceConfig) -> Vec3 {
    Vec3::from_fn(|i, _| {
        let q = d[i] * d[i] + cfg.l1[i];
        let psi = cfg.l2[i] / q;
        cfg.l2[i] * cfg.l3[i] * d[i] * (-psi).exp() / (q * q)
    })
}

/// Divert acceleration `p t_go² / 12`.
pub fn divert_term(p: &Vec3, t_go: f64) -> Vec3 {
    p * (t_go * t_go / 12.0)
}

/// ZEM/ZEV feedback plus the divert term.
pub fn otalg_accel(zem: &Vec3, zev: &Vec3, p: &Vec3, t_go: f64) -> Vec3 {
    ogl_accel(zem, zev, t_go) + divert_term(p, t_go)
}

/// Position-error surface `s1` and velocity surface `s2`.
pub fn sliding_surfaces(s: &LanderState, cfg: &GuidanceConfig, t_go: f64) -> (Vec3, Vec3) {
    let s1 = s.r - cfg.r_f;
    let s2 = (s.v - cfg.v_f) + s1 * (cfg.lambda / t_go);
    (s1, s2)
}

/// Closed-form `s1` under the virtual controller `ṡ1 = −(Λ/t_go) s1`:
/// `s1(0) (t_go/t_f)^Λ`.
pub fn s1_closed_form(s1_0: &Vec3, t_go: f64, t_f: f64, lambda: f64) -> Vec3 {
    s1_0 * (t_go / t_f).powf(lambda)
}

/// Sliding parameter `Φ_i = k1 |p_i| t_go² / 12 + k2 a_p_max`.
pub fn sliding_parameter(p: &Vec3, t_go: f64, cfg: &GuidanceConfig) -> Vec3 {
    p.map(|pi| cfg.k1 * pi.abs() * t_go * t_go / 12.0 + cfg.k2 * cfg.a_p_max)
}

/// Boundary-layer saturation: `x/eps` clipped to `[-1, 1]`.
pub fn sat(x: f64, eps: f64) -> f64 {
    (x / eps).clamp(-1.0, 1.0)
}

/// Signum with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Sliding-mode terrain-avoidance command.
///
/// The bracketed terrain-avoidance term uses the gravity-free ZEM/ZEV, so
/// gravity is cancelled once by the explicit `−g`:
/// `a_c = [ (6/t²) ZEM₀ − (2/t) ZEV₀ + p t²/12 ] − Φ sat(s2/ε) − g`.
pub fn mss_otalg_accel(s: &LanderState, d: &Vec3, cfg: &GuidanceConfig, g: &Vec3, t_go: f64) -> GuidanceOutput {
    let (zem, zev) = zem_zev(s, cfg, g, t_go);
    let (zem0, zev0) = zem_zev(s, cfg, &Vec3::zeros(), t_go);
    let p = divert_rate(d, cfg);
    let (s1, s2) = sliding_surfaces(s, cfg, t_go);
    let phi = sliding_parameter(&p, t_go, cfg);
    let switching = Vec3::from_fn(|i, _| phi[i] * sat(s2[i], cfg.eps_boundary));
    let ogl_term = ogl_accel(&zem0, &zev0, t_go);
    let a_cmd = ogl_term + divert_term(&p, t_go) - switching - g;
    GuidanceOutput {
        law: Law::MssOtalg,
        a_cmd,
        zem,
        zev,
        ogl_term,
        p,
        divert_term: divert_term(&p, t_go),
        s1,
        s2,
        phi,
    }
}

/// Evaluates `law` at state `s` with barrier distances `d`.
pub fn guidance(law: Law, s: &LanderState, d: &Vec3, cfg: &GuidanceConfig, g: &Vec3, t_go: f64) -> GuidanceOutput {
    if law == Law::MssOtalg {
        return mss_otalg_accel(s, d, cfg, g, t_go);
    }
    let (zem, zev) = zem_zev(s, cfg, g, t_go);
    let (s1, s2) = sliding_surfaces(s, cfg, t_go);
    let ogl_term = ogl_accel(&zem, &zev, t_go);
    let p = match law {
        Law::Ogl => Vec3::zeros(),
        _ => divert_rate(d, cfg),
    };
    let div = divert_term(&p, t_go);
    GuidanceOutput {
        law,
        a_cmd: ogl_term + div,
        zem,
        zev,
        ogl_term,
        p,
        divert_term: div,
        s1,
        s2,
        phi: Vec3::zeros(),
    }
}
