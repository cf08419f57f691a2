// SPDX-License-Identifier: Apache-2.0

//! Three-degree-of-freedom point-mass lander: thrust saturation, actuator lag
//! and noise, the sinusoidal disturbance model and RK4 propagation.

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// Position, velocity, mass and time of the lander (ENU, landing-site origin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanderState {
    /// Position, m.
    pub r: Vec3,
    /// Velocity, m/s.
    pub v: Vec3,
    /// Mass, kg.
    pub m: f64,
    /// Time, s.
    pub t: f64,
}

impl LanderState {
    pub fn new(r: Vec3, v: Vec3, m: f64) -> Self {
        LanderState { r, v, m, t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(self.v.iter()).all(|x| x.is_finite()) && self.m.is_finite() && self.t.is_finite()
    }
}

/// Additive acceleration disturbance model.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Perturbation {
    #[default]
    None,
    /// `a_p = coeff · a_applied · sin(π t / period_s)`.
    Sinusoidal { coeff: f64, period_s: f64 },
}

impl Perturbation {
    /// The reference atmospheric disturbance, `0.3 a sin(π t / 3)`.
    pub fn reference() -> Self {
        Perturbation::Sinusoidal {
            coeff: 0.3,
            period_s: 3.0,
        }
    }
}

/// Planet, engine and disturbance parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    /// Gravity vector, m/s².
    pub g: Vec3,
    /// Standard gravity for the rocket equation, m/s².
    pub g_e: f64,
    pub perturbation: Perturbation,
    /// Half-width of the uniform multiplicative thrust noise.
    pub thrust_noise_frac: f64,
    /// Maximum thrust, N.
    pub t_max: f64,
    /// Specific impulse, s.
    pub isp: f64,
    /// First-order actuator time constant, s (0 disables the lag).
    pub actuator_tau: f64,
    /// Mass at which propagation reports fuel depletion, kg.
    pub dry_mass: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            g: Vec3::new(0.0, 0.0, -3.7114),
            g_e: 9.807,
            perturbation: Perturbation::None,
            thrust_noise_frac: 0.05,
            t_max: 31000.0,
            isp: 225.0,
            actuator_tau: 0.0556,
            dry_mass: 0.0,
        }
    }
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        if !self.g.iter().all(|x| x.is_finite()) {
            return Err(Error::config("environment.g_mps2", "must be finite"));
        }
        if !(self.g_e > 0.0 && self.g_e.is_finite()) {
            return Err(Error::config("environment.g_e_mps2", "must be > 0"));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::config("environment.T_max_N", "must be > 0"));
        }
        if !(self.isp > 0.0 && self.isp.is_finite()) {
            return Err(Error::config("environment.I_sp_s", "must be > 0"));
        }
        if !(self.actuator_tau >= 0.0 && self.actuator_tau.is_finite()) {
            return Err(Error::config("environment.actuator_tau_s", "must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.thrust_noise_frac) {
            return Err(Error::config("environment.thrust_noise_frac", "must lie in [0, 1)"));
        }
        if !(self.dry_mass >= 0.0 && self.dry_mass.is_finite()) {
            return Err(Error::config("environment.dry_mass_kg", "must be >= 0"));
        }
        if let Perturbation::Sinusoidal { coeff, period_s } = self.perturbation {
            if !coeff.is_finite() {
                return Err(Error::config("environment.perturbation.coeff", "must be finite"));
            }
            if !(period_s > 0.0 && period_s.is_finite()) {
                return Err(Error::config("environment.perturbation.period_s", "must be > 0"));
            }
        }
        Ok(())
    }
}

/// Actuator memory: the lag-filter state and the noisy acceleration it produces.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorState {
    /// Noise-free output of the first-order lag, m/s².
    pub a_lagged: Vec3,
    /// Acceleration actually applied to the vehicle, m/s².
    pub a_applied: Vec3,
}

/// Scales `a_cmd` down to the thrust ceiling `t_max / m`, keeping its direction.
pub fn thrust_saturate(a_cmd: &Vec3, m: f64, t_max: f64) -> Vec3 {
    let norm = a_cmd.norm();
    if norm * m <= t_max {
        *a_cmd
    } else {
        a_cmd * (t_max / (m * norm))
    }
}

/// Advances the lag one step towards `a_ideal` and applies per-axis noise.
///
/// The lag uses the exact exponential update. Noise multiplies each output
/// component by an independent factor drawn from `U[1 − f, 1 + f]`; the filter
/// state itself stays noise-free.
pub fn actuator_step<R: Rng + ?Sized>(
    act: &ActuatorState,
    a_ideal: &Vec3,
    tau: f64,
    dt: f64,
    noise_frac: f64,
    rng: &mut R,
) -> ActuatorState {
    let a_lagged = if tau > 0.0 {
        a_ideal + (act.a_lagged - a_ideal) * (-dt / tau).exp()
    } else {
        *a_ideal
    };
    let a_applied = if noise_frac > 0.0 {
        a_lagged.map(|c| c * (1.0 + rng.random_range(-noise_frac..=noise_frac)))
    } else {
        a_lagged
    };
    ActuatorState { a_lagged, a_applied }
}

/// Disturbance acceleration at time `t` for applied acceleration `a_c`.
pub fn atmospheric_perturbation(t: f64, a_c: &Vec3, env: &Environment) -> Vec3 {
    match env.perturbation {
        Perturbation::None => Vec3::zeros(),
        Perturbation::Sinusoidal { coeff, period_s } => {
            a_c * (coeff * (std::f64::consts::PI * t / period_s).sin())
        }
    }
}

/// One RK4 step of the point-mass equations with zero-order-hold inputs.
pub fn dynamics_step(s: &LanderState, a_applied: &Vec3, a_p: &Vec3, env: &Environment, dt: f64) -> Result<LanderState> {
    let accel = a_applied + env.g + a_p;
    let burn = a_applied.norm() / (env.isp * env.g_e);
    // Derivative of (r, v, m); acceleration is constant over the step.
    let f = |v: &Vec3, m: f64| (*v, accel, -burn * m);

    let (k1r, k1v, k1m) = f(&s.v, s.m);
    let (k2r, k2v, k2m) = f(&(s.v + k1v * (dt / 2.0)), s.m + k1m * dt / 2.0);
    let (k3r, k3v, k3m) = f(&(s.v + k2v * (dt / 2.0)), s.m + k2m * dt / 2.0);
    let (k4r, k4v, k4m) = f(&(s.v + k3v * dt), s.m + k3m * dt);

    let next = LanderState {
        r: s.r + (k1r + 2.0 * k2r + 2.0 * k3r + k4r) * (dt / 6.0),
        v: s.v + (k1v + 2.0 * k2v + 2.0 * k3v + k4v) * (dt / 6.0),
        m: s.m + (k1m + 2.0 * k2m + 2.0 * k3m + k4m) * (dt / 6.0),
        t: s.t + dt,
    };
    if !next.is_finite() {
        return Err(Error::NonFinite { t: next.t });
    }
    if next.m <= env.dry_mass {
        return Err(Error::FuelDepleted {
            t: next.t,
            mass: next.m,
            floor: env.dry_mass,
        });
    }
    Ok(next)
}
