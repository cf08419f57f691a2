// SPDX-License-Identifier: Apache-2.0

//! Post-processing of trajectory logs: dominant divert events, Lyapunov
//! series and the practical fixed-time stability checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::guidance_laws::sign;
use crate::sim_harness::TrajectoryLog;

/// Axis label for events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["x", "y", "z"][self.index()]
    }
}

/// What opened a divert event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trigger {
    /// Divert term larger than the ZEM/ZEV term.
    Magnitude,
    /// Barrier-distance rate changed sign in the direction of the divert term.
    VelocitySign,
}

impl Trigger {
    pub fn name(self) -> &'static str {
        match self {
            Trigger::Magnitude => "magnitude",
            Trigger::VelocitySign => "velocity_sign",
        }
    }
}

/// One dominant divert manoeuvre on one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivertEvent {
    pub axis: Axis,
    pub t_begin: f64,
    /// `None` while still active at the end of the log.
    pub t_end: Option<f64>,
    pub trigger: Trigger,
}

/// Tuning of the event detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSettings {
    /// Relative hysteresis on the magnitude comparison.
    pub hysteresis_frac: f64,
    /// Dead-band on the distance rate before its sign counts, m/s.
    pub rate_dead_band: f64,
}

impl Default for EventSettings {
    fn default() -> Self {
        EventSettings {
            hysteresis_frac: 0.01,
            rate_dead_band: 1e-3,
        }
    }
}

/// Per-axis series consumed by the detector.
#[derive(Debug, Clone, Copy)]
pub struct DivertSeries<'a> {
    pub t: &'a [f64],
    /// Divert term `p t_go²/12`.
    pub divert: &'a [f64],
    /// ZEM/ZEV term `(6/t_go²) ZEM − (2/t_go) ZEV`.
    pub zem_zev: &'a [f64],
    /// Barrier distance.
    pub d: &'a [f64],
}

/// Detects events on one axis.
///
/// A magnitude event opens when `|divert| > (1 + h)|zem_zev|` and closes when
/// `|divert| < (1 − h)|zem_zev|`. Outside magnitude events, a change in the
/// sign of `ḋ` (first differences, dead-banded) opens a velocity-sign event
/// when the new sign agrees with the sign of the divert term; the next sign
/// change closes it. A magnitude event pre-empts an open velocity-sign event.
pub fn detect_axis_events(axis: Axis, s: &DivertSeries<'_>, cfg: &EventSettings) -> Vec<DivertEvent> {
    let n = s.t.len().min(s.divert.len()).min(s.zem_zev.len()).min(s.d.len());
    let mut events = Vec::new();
    let mut open: Option<DivertEvent> = None;
    let mut rate_sign = 0.0;
    for k in 0..n {
        let t = s.t[k];
        let div = s.divert[k].abs();
        let reference = s.zem_zev[k].abs();
        let mut new_rate_sign = rate_sign;
        if k > 0 {
            let dt = s.t[k] - s.t[k - 1];
            if dt > 0.0 {
                let rate = (s.d[k] - s.d[k - 1]) / dt;
                if rate.abs() > cfg.rate_dead_band {
                    new_rate_sign = sign(rate);
                }
            }
        }
        let flipped = rate_sign != 0.0 && new_rate_sign != rate_sign;
        rate_sign = new_rate_sign;

        match open {
            Some(ev) if ev.trigger == Trigger::Magnitude => {
                if div < (1.0 - cfg.hysteresis_frac) * reference {
                    events.push(DivertEvent { t_end: Some(t), ..ev });
                    open = None;
                }
            }
            _ => {
                let dominant = div > (1.0 + cfg.hysteresis_frac) * reference && div > 0.0;
                if dominant {
                    if let Some(ev) = open.take() {
                        events.push(DivertEvent { t_end: Some(t), ..ev });
                    }
                    open = Some(DivertEvent {
                        axis,
                        t_begin: t,
                        t_end: None,
                        trigger: Trigger::Magnitude,
                    });
                } else if flipped {
                    if let Some(ev) = open.take() {
                        events.push(DivertEvent { t_end: Some(t), ..ev });
                    } else if div > 0.0 && sign(s.divert[k]) == new_rate_sign {
                        open = Some(DivertEvent {
                            axis,
                            t_begin: t,
                            t_end: None,
                            trigger: Trigger::VelocitySign,
                        });
                    }
                }
            }
        }
    }
    events.extend(open);
    events
}

/// Detects events on all three axes of a log, ordered by axis then time.
pub fn detect_divert_events(log: &TrajectoryLog, cfg: &EventSettings) -> Vec<DivertEvent> {
    let t: Vec<f64> = log.samples.iter().map(|s| s.t).collect();
    Axis::ALL
        .iter()
        .flat_map(|&axis| {
            let i = axis.index();
            let divert: Vec<f64> = log.samples.iter().map(|s| s.divert_term[i]).collect();
            let zem_zev: Vec<f64> = log.samples.iter().map(|s| s.ogl_term[i]).collect();
            let d: Vec<f64> = log.samples.iter().map(|s| s.d[i]).collect();
            let series = DivertSeries {
                t: &t,
                divert: &divert,
                zem_zev: &zem_zev,
                d: &d,
            };
            detect_axis_events(axis, &series, cfg)
        })
        .collect()
}

/// `V1 = ½‖s1‖²` and `V2 = ½‖s2‖²` along a log.
pub fn lyapunov_series(log: &TrajectoryLog) -> (Vec<f64>, Vec<f64>) {
    log.samples
        .iter()
        .map(|s| (0.5 * s.s1.norm_squared(), 0.5 * s.s2.norm_squared()))
        .unzip()
}

/// Upper bound `L(p1, t_go)` on the sliding parameter.
pub fn pfts_upper(p1: f64, t_go: f64) -> f64 {
    rhs_feasibility(p1) * t_go * t_go / 12.0
}

/// Lower bound `M(p1, t_go, θ, t_f)` on the sliding parameter.
pub fn pfts_lower(p1: f64, t_go: f64, theta: f64, t_f: f64) -> f64 {
    1.0 / (12.0 / (rhs_feasibility(p1) * t_go * t_go) + t_f * theta / std::f64::consts::SQRT_2)
}

/// Settling-time bound for sliding parameter `phi`.
pub fn settling_bound(phi: f64, p1: f64, t_go: f64, theta: f64) -> f64 {
    2.0 / (std::f64::consts::SQRT_2 * phi * theta)
        - 2.0 * (1.0 + p1) / (2f64.powf((p1 + 1.0) / 2.0) * (p1 - 1.0) * theta) * 12.0 / (t_go * t_go)
}

/// `2^{p1/2}(p1 − 1)/(1 + p1)`, the right side of the feasibility condition.
pub fn rhs_feasibility(p1: f64) -> f64 {
    2f64.powf(p1 / 2.0) * (p1 - 1.0) / (1.0 + p1)
}

/// Left side `k1 p_max + 12 k2 a_p_max / t_go²` of the feasibility condition.
pub fn lhs_feasibility(k1: f64, k2: f64, p_max: f64, a_p_max: f64, t_go: f64) -> f64 {
    k1 * p_max + 12.0 * k2 * a_p_max / (t_go * t_go)
}

/// Parameters of the PFTS checker.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PftsSettings {
    pub theta: f64,
    /// Exclusive lower and inclusive upper end of the `p1` search.
    pub p1_range: (f64, f64),
    pub p1_points: usize,
    pub k1: f64,
    pub k2: f64,
    pub a_p_max: f64,
    pub p_max: f64,
    pub t_f: f64,
}

impl PftsSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::config("analysis.pfts_theta", "must lie in (0, 1]"));
        }
        let (lo, hi) = self.p1_range;
        if !(lo >= 1.0 && hi > lo && hi.is_finite()) || self.p1_points == 0 {
            return Err(Error::config("analysis.p1_range", "search range (lo, hi] must be non-empty with lo >= 1"));
        }
        if !(self.p_max >= 0.0) {
            return Err(Error::config("analysis.p_max", "must be >= 0"));
        }
        Ok(())
    }

    /// Log-spaced grid over `(lo, hi]`.
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi) = self.p1_range;
        let n = self.p1_points;
        let ratio = hi / lo;
        (1..=n).map(|k| lo * ratio.powf(k as f64 / n as f64)).collect()
    }
}

/// PFTS quantities at one time sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PftsSample {
    pub t: f64,
    pub t_go: f64,
    pub phi: f64,
    /// Smallest grid `p1` satisfying the feasibility condition.
    pub feasible_p1: Option<f64>,
    /// `L`, `M` and the settling bound at `feasible_p1` (NaN when none).
    pub upper: f64,
    pub lower: f64,
    pub settling_bound: f64,
    /// `M < Φ ≤ L` at `feasible_p1`.
    pub feasible: bool,
}

/// Per-sample PFTS report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PftsReport {
    pub samples: Vec<PftsSample>,
}

impl PftsReport {
    pub fn all_have_p1(&self) -> bool {
        self.samples.iter().all(|s| s.feasible_p1.is_some())
    }
}

/// Evaluates the PFTS bounds along a `(t, t_go, Φ)` series.
pub fn pfts_check(t: &[f64], t_go: &[f64], phi: &[f64], cfg: &PftsSettings) -> Result<PftsReport> {
    cfg.validate()?;
    let grid = cfg.grid();
    let samples = t
        .iter()
        .zip(t_go)
        .zip(phi)
        .map(|((&t, &tg), &phi)| {
            let lhs = lhs_feasibility(cfg.k1, cfg.k2, cfg.p_max, cfg.a_p_max, tg);
            let feasible_p1 = grid.iter().copied().find(|&p1| lhs <= rhs_feasibility(p1));
            let (upper, lower, settling) = match feasible_p1 {
                Some(p1) => (
                    pfts_upper(p1, tg),
                    pfts_lower(p1, tg, cfg.theta, cfg.t_f),
                    settling_bound(phi, p1, tg, cfg.theta),
                ),
                None => (f64::NAN, f64::NAN, f64::NAN),
            };
            PftsSample {
                t,
                t_go: tg,
                phi,
                feasible_p1,
                upper,
                lower,
                settling_bound: settling,
                feasible: lower < phi && phi <= upper,
            }
        })
        .collect();
    Ok(PftsReport { samples })
}
