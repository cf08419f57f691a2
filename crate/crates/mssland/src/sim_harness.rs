// SPDX-License-Identifier: Apache-2.0

//! Closed-loop simulation, Monte Carlo campaigns and campaign statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::guidance_laws::{guidance, GuidanceConfig, Law};
use crate::lander_dynamics::{
    actuator_step, atmospheric_perturbation, dynamics_step, thrust_saturate, ActuatorState, Environment, LanderState,
    Perturbation,
};
use crate::terrain_barriers::{
    barrier_distance, build_barriers, critical_distance, vertical_barrier, BarrierSet, StepTerrain, VerticalCase,
    VerticalRule,
};
use crate::Vec3;

/// Everything needed to fly one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub initial: LanderState,
    pub env: Environment,
    pub terrain: StepTerrain,
    /// Vertical barrier margin `δ`, m.
    pub delta: f64,
    pub vertical_rule: VerticalRule,
    pub guidance: GuidanceConfig,
    pub law: Law,
    /// Integration and guidance step, s.
    pub dt: f64,
    /// Seed of the thrust-noise stream.
    pub seed: u64,
    /// Altitude at or below which the run stops, m.
    pub termination_altitude: f64,
    /// Lower clamp on time-to-go inside guidance, s.
    pub t_go_floor: f64,
}

impl Scenario {
    /// Reference mission: the two-step pit, default gains and the nominal
    /// initial state `r0 = (1051.86, 562.15, 2459.07)`, `v0 = (−165, −26.91, 9.45)`.
    pub fn reference(law: Law) -> Self {
        let guidance = GuidanceConfig::default();
        let d_star = critical_distance(guidance.l1.x, guidance.l2.x).unwrap_or(79.58);
        Scenario {
            initial: LanderState::new(
                Vec3::new(1051.86, 562.15, 2459.07),
                Vec3::new(-165.0, -26.91, 9.45),
                1905.0,
            ),
            env: Environment::default(),
            terrain: StepTerrain::reference(),
            delta: round_to(1.2 * d_star, 1),
            vertical_rule: VerticalRule::default(),
            guidance,
            law,
            dt: 0.01,
            seed: 1,
            termination_altitude: 0.05,
            t_go_floor: 0.1,
        }
    }

    pub fn with_law(mut self, law: Law) -> Self {
        self.law = law;
        self
    }

    /// Switches the disturbance between none and the reference sinusoid.
    pub fn with_perturbation(mut self, on: bool) -> Self {
        self.env.perturbation = match (on, self.env.perturbation) {
            (false, _) => Perturbation::None,
            (true, p @ Perturbation::Sinusoidal { .. }) => p,
            (true, Perturbation::None) => Perturbation::reference(),
        };
        self
    }

    /// Validates the scenario and returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut warnings = Vec::new();
        if !self.initial.is_finite() {
            return Err(Error::config("initial", "initial state must be finite"));
        }
        if !(self.initial.m > 0.0) {
            return Err(Error::config("initial.m_kg", "must be > 0"));
        }
        self.env.validate()?;
        self.terrain.validate()?;
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::config("terrain.delta_m", "must be > 0"));
        }
        if let Some(w) = self.guidance.validate()? {
            warnings.push(w);
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || self.dt * 10.0 > self.guidance.t_f {
            return Err(Error::config("scenario.dt_s", "must satisfy 0 < dt << t_f"));
        }
        if !(self.termination_altitude.is_finite()) {
            return Err(Error::config("scenario.termination_altitude_m", "must be finite"));
        }
        if !(self.t_go_floor > 0.0 && self.t_go_floor.is_finite()) {
            return Err(Error::config("scenario.t_go_floor_s", "must be > 0"));
        }
        match t_f_min(&self.initial, &self.env) {
            Ok(tf) if tf.value > self.guidance.t_f => warnings.push(format!(
                "t_f = {} s is below the thrust-limited minimum {:.3} s",
                self.guidance.t_f, tf.value
            )),
            Ok(_) => {}
            Err(e) => warnings.push(e.to_string()),
        }
        Ok(warnings)
    }

    pub fn barriers(&self) -> Result<BarrierSet> {
        Ok(build_barriers(&self.terrain, self.delta)?.with_vertical_rule(self.vertical_rule))
    }
}

fn round_to(x: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (x * s).round() / s
}

/// One logged step: the state at `t` and everything computed from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSample {
    pub t: f64,
    pub r: Vec3,
    pub v: Vec3,
    pub m: f64,
    pub t_go: f64,
    /// Ideal guidance command before saturation, m/s².
    pub a_cmd: Vec3,
    /// Acceleration applied over the following step, m/s².
    pub a_applied: Vec3,
    pub a_p: Vec3,
    pub zem: Vec3,
    pub zev: Vec3,
    pub ogl_term: Vec3,
    pub p: Vec3,
    pub divert_term: Vec3,
    pub s1: Vec3,
    pub s2: Vec3,
    pub phi: Vec3,
    pub rho_z: f64,
    pub d: Vec3,
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Altitude,
    FinalTime,
}

/// Terminal errors and bookkeeping for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub law: Law,
    /// Final lateral misses, m.
    pub dx: f64,
    pub dy: f64,
    /// Final vertical speed error, m/s.
    pub dvz: f64,
    /// Fuel used, kg.
    pub dm: f64,
    pub flight_time: f64,
    pub termination: Termination,
    /// Logged states at or below the true terrain.
    pub terrain_penetrations: usize,
    /// Steps where the vertical barrier fell back to the landing-site value.
    pub fallback_steps: usize,
    pub final_state: LanderState,
}

/// Uniform-step time series of a run plus its summary.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub law: Law,
    pub dt: f64,
    pub samples: Vec<LogSample>,
    pub summary: RunSummary,
}

/// A run that stopped on a propagation error, with the samples logged so far.
#[derive(Debug)]
pub struct SimFailure {
    pub error: Error,
    pub samples: Vec<LogSample>,
}

impl std::fmt::Display for SimFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} logged steps", self.error, self.samples.len())
    }
}

impl std::error::Error for SimFailure {}

impl From<Error> for SimFailure {
    fn from(error: Error) -> Self {
        SimFailure {
            error,
            samples: Vec::new(),
        }
    }
}

struct Propagator<'a> {
    sc: &'a Scenario,
    barriers: BarrierSet,
    rng: ChaCha8Rng,
    act: ActuatorState,
}

impl Propagator<'_> {
    fn sample(&self, s: &LanderState, a_applied: Vec3, a_p: Vec3) -> (LogSample, VerticalCase) {
        let sc = self.sc;
        let t_go = (sc.guidance.t_f - s.t).max(sc.t_go_floor);
        let vb = vertical_barrier(&self.barriers, &s.r);
        let d = barrier_distance(&self.barriers, &s.r);
        let out = guidance(sc.law, s, &d, &sc.guidance, &sc.env.g, t_go);
        let sample = LogSample {
            t: s.t,
            r: s.r,
            v: s.v,
            m: s.m,
            t_go,
            a_cmd: out.a_cmd,
            a_applied,
            a_p,
            zem: out.zem,
            zev: out.zev,
            ogl_term: out.ogl_term,
            p: out.p,
            divert_term: out.divert_term,
            s1: out.s1,
            s2: out.s2,
            phi: out.phi,
            rho_z: vb.rho_z,
            d,
        };
        (sample, vb.case)
    }

    fn penetrates(&self, s: &LanderState) -> bool {
        let lateral = s.r.x.abs().max(s.r.y.abs());
        s.r.z <= self.sc.terrain.floor_height(lateral)
    }
}

fn propagate(sc: &Scenario, mut sink: impl FnMut(LogSample)) -> Result<RunSummary> {
    let mut prop = Propagator {
        sc,
        barriers: sc.barriers()?,
        rng: ChaCha8Rng::seed_from_u64(sc.seed),
        act: ActuatorState::default(),
    };
    let env = &sc.env;
    let t0 = sc.initial.t;
    let mut s = sc.initial;
    let mut penetrations = 0;
    let mut fallback_steps = 0;
    let mut step: u64 = 0;
    let termination = loop {
        let (mut sample, case) = prop.sample(&s, Vec3::zeros(), Vec3::zeros());
        let a_sat = thrust_saturate(&sample.a_cmd, s.m, env.t_max);
        prop.act = actuator_step(&prop.act, &a_sat, env.actuator_tau, sc.dt, env.thrust_noise_frac, &mut prop.rng);
        let a_p = atmospheric_perturbation(s.t, &prop.act.a_applied, env);
        sample.a_applied = prop.act.a_applied;
        sample.a_p = a_p;
        penetrations += usize::from(prop.penetrates(&s));
        fallback_steps += usize::from(case == VerticalCase::Fallback);
        sink(sample);

        let mut next = dynamics_step(&s, &prop.act.a_applied, &a_p, env, sc.dt)?;
        step += 1;
        next.t = t0 + step as f64 * sc.dt;
        s = next;
        if s.r.z <= sc.termination_altitude {
            break Termination::Altitude;
        }
        if s.t >= sc.guidance.t_f - 1e-9 * sc.dt {
            break Termination::FinalTime;
        }
    };
    let (last, case) = prop.sample(&s, prop.act.a_applied, atmospheric_perturbation(s.t, &prop.act.a_applied, env));
    penetrations += usize::from(prop.penetrates(&s));
    fallback_steps += usize::from(case == VerticalCase::Fallback);
    sink(last);
    Ok(RunSummary {
        law: sc.law,
        dx: s.r.x - sc.guidance.r_f.x,
        dy: s.r.y - sc.guidance.r_f.y,
        dvz: s.v.z - sc.guidance.v_f.z,
        dm: sc.initial.m - s.m,
        flight_time: s.t - t0,
        termination,
        terrain_penetrations: penetrations,
        fallback_steps,
        final_state: s,
    })
}

/// Flies `sc` and returns the full telemetry log.
pub fn run_simulation(sc: &Scenario) -> std::result::Result<TrajectoryLog, SimFailure> {
    let mut samples = Vec::with_capacity((sc.guidance.t_f / sc.dt).ceil() as usize + 2);
    match propagate(sc, |s| samples.push(s)) {
        Ok(summary) => Ok(TrajectoryLog {
            law: sc.law,
            dt: sc.dt,
            samples,
            summary,
        }),
        Err(error) => Err(SimFailure { error, samples }),
    }
}

/// Flies `sc` keeping only the terminal summary.
pub fn run_summary(sc: &Scenario) -> Result<RunSummary> {
    propagate(sc, |_| {})
}

/// Thrust-limited minimum flight time and the branch that set it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TfMin {
    pub value: f64,
    /// False when the square-root argument was negative and only the first
    /// branch was evaluated.
    pub second_branch_evaluated: bool,
}

/// Minimum feasible terminal time for a thrust-limited vertical descent.
///
/// `max{ −v_z/(a_max − g), (−v_z + √(v_z² − 2(a_max − g) r_z))/(a_max − g) }`
/// with `a_max = T_max/m(0)` and `g = ‖g‖`, floored at zero. A negative
/// square-root argument drops the second branch.
pub fn t_f_min(initial: &LanderState, env: &Environment) -> Result<TfMin> {
    let a_max = env.t_max / initial.m;
    let net = a_max - env.g.norm();
    if !(net > 0.0) {
        return Err(Error::Infeasible(format!(
            "thrust acceleration {a_max:.4} m/s^2 does not exceed gravity {:.4} m/s^2",
            env.g.norm()
        )));
    }
    let vz = initial.v.z;
    let first = -vz / net;
    let arg = vz * vz - 2.0 * net * initial.r.z;
    let (value, second_branch_evaluated) = if arg >= 0.0 {
        (first.max((-vz + arg.sqrt()) / net), true)
    } else {
        (first, false)
    };
    Ok(TfMin {
        value: value.max(0.0),
        second_branch_evaluated,
    })
}

/// Independent normal distributions for `(x, y, z, v_x, v_y, v_z, m)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDistribution {
    pub mean: [f64; 7],
    pub sd: [f64; 7],
}

impl Default for InitialDistribution {
    fn default() -> Self {
        InitialDistribution {
            mean: [0.0, 0.0, 2500.0, 0.0, 0.0, -80.0, 1905.0],
            sd: [2200.0, 2200.0, 400.0, 80.0, 80.0, 20.0, 0.0],
        }
    }
}

/// Monte Carlo campaign definition.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub n_runs: usize,
    pub distribution: InitialDistribution,
    /// Scenario supplying everything except the initial state and noise seed.
    pub base: Scenario,
    pub master_seed: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs < 2 {
            return Err(Error::config("montecarlo.n_runs", "must be >= 2"));
        }
        let d = &self.distribution;
        if !d.mean.iter().all(|x| x.is_finite()) {
            return Err(Error::config("montecarlo.mean", "must be finite"));
        }
        if !d.sd.iter().all(|x| *x >= 0.0 && x.is_finite()) {
            return Err(Error::config("montecarlo.sd", "standard deviations must be >= 0"));
        }
        if !(d.mean[6] > 0.0) {
            return Err(Error::config("montecarlo.mean", "mean mass must be > 0"));
        }
        self.base.validate().map(|_| ())
    }
}

/// One sampled initial condition with its noise seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunDraw {
    pub index: usize,
    pub initial: LanderState,
    pub noise_seed: u64,
}

/// Draws all initial conditions for a campaign. Draws with non-positive
/// altitude (or mass) are rejected and redrawn; the count is returned.
pub fn draw_initial_conditions(mc: &McConfig) -> (Vec<RunDraw>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(mc.master_seed);
    let dists: Vec<Normal<f64>> = (0..7)
        .map(|k| Normal::new(mc.distribution.mean[k], mc.distribution.sd[k]).expect("validated sd"))
        .collect();
    let mut rejections = 0;
    let draws = (0..mc.n_runs)
        .map(|index| {
            let x = loop {
                let x: Vec<f64> = dists.iter().map(|d| d.sample(&mut rng)).collect();
                if x[2] > 0.0 && x[6] > 0.0 {
                    break x;
                }
                rejections += 1;
            };
            RunDraw {
                index,
                initial: LanderState::new(Vec3::new(x[0], x[1], x[2]), Vec3::new(x[3], x[4], x[5]), x[6]),
                noise_seed: rng.next_u64(),
            }
        })
        .collect();
    (draws, rejections)
}

/// Mean, sample standard deviation and mean magnitude of one quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantityStats {
    pub mean: f64,
    pub sd: f64,
    pub mean_abs: f64,
}

impl QuantityStats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 {
            values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        QuantityStats {
            mean,
            sd: var.sqrt(),
            mean_abs: values.iter().map(|x| x.abs()).sum::<f64>() / n,
        }
    }
}

/// Paired t statistic and what was compared.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedT {
    pub statistic: f64,
    pub description: String,
}

/// Terminal-state statistics over the successful runs of one law.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionStats {
    pub law: Law,
    pub n_runs: usize,
    pub n_failed: usize,
    pub dm: QuantityStats,
    pub dx: QuantityStats,
    pub dy: QuantityStats,
    pub dvz: QuantityStats,
    pub terrain_penetrations: usize,
    pub paired_t: Option<PairedT>,
}

impl DispersionStats {
    pub fn from_summaries(law: Law, summaries: &[RunSummary], n_failed: usize) -> Self {
        let col = |f: fn(&RunSummary) -> f64| QuantityStats::of(&summaries.iter().map(f).collect::<Vec<_>>());
        DispersionStats {
            law,
            n_runs: summaries.len(),
            n_failed,
            dm: col(|s| s.dm),
            dx: col(|s| s.dx),
            dy: col(|s| s.dy),
            dvz: col(|s| s.dvz),
            terrain_penetrations: summaries.iter().map(|s| s.terrain_penetrations).sum(),
            paired_t: None,
        }
    }
}

/// Per-run outcomes of one law in a campaign.
#[derive(Debug)]
pub struct LawResults {
    pub law: Law,
    /// Indexed like the draws.
    pub outcomes: Vec<Result<RunSummary>>,
    pub stats: DispersionStats,
}

impl LawResults {
    pub fn summaries(&self) -> Vec<RunSummary> {
        self.outcomes.iter().filter_map(|o| o.as_ref().ok().copied()).collect()
    }
}

/// Results of a campaign flown with common random numbers.
#[derive(Debug)]
pub struct Campaign {
    pub draws: Vec<RunDraw>,
    pub rejections: usize,
    pub laws: Vec<LawResults>,
}

impl Campaign {
    pub fn law(&self, law: Law) -> Option<&LawResults> {
        self.laws.iter().find(|l| l.law == law)
    }

    /// Paired t statistic of fuel use `Δm(a) − Δm(b)` over runs where both succeeded.
    pub fn paired_fuel_t(&self, a: Law, b: Law) -> Result<PairedT> {
        let (ra, rb) = match (self.law(a), self.law(b)) {
            (Some(ra), Some(rb)) => (ra, rb),
            _ => return Err(Error::Undefined(format!("campaign lacks {a} or {b}"))),
        };
        let (xa, xb): (Vec<f64>, Vec<f64>) = ra
            .outcomes
            .iter()
            .zip(&rb.outcomes)
            .filter_map(|(x, y)| match (x, y) {
                (Ok(x), Ok(y)) => Some((x.dm, y.dm)),
                _ => None,
            })
            .unzip();
        Ok(PairedT {
            statistic: paired_t_test(&xa, &xb)?,
            description: format!("dm({a}) - dm({b}), n = {}", xa.len()),
        })
    }
}

fn scenario_for(mc: &McConfig, law: Law, draw: &RunDraw) -> Scenario {
    Scenario {
        initial: draw.initial,
        seed: draw.noise_seed,
        law,
        ..mc.base.clone()
    }
}

/// Flies every draw under each law in `laws`, sharing draws and noise seeds.
pub fn run_campaign(mc: &McConfig, laws: &[Law]) -> Result<Campaign> {
    mc.validate()?;
    let (draws, rejections) = draw_initial_conditions(mc);
    let laws = laws
        .iter()
        .map(|&law| {
            let outcomes: Vec<Result<RunSummary>> = draws
                .par_iter()
                .map(|draw| run_summary(&scenario_for(mc, law, draw)))
                .collect();
            let ok: Vec<RunSummary> = outcomes.iter().filter_map(|o| o.as_ref().ok().copied()).collect();
            let stats = DispersionStats::from_summaries(law, &ok, outcomes.len() - ok.len());
            LawResults { law, outcomes, stats }
        })
        .collect();
    Ok(Campaign {
        draws,
        rejections,
        laws,
    })
}

/// Single-law campaign using `mc.base.law`.
pub fn run_monte_carlo(mc: &McConfig) -> Result<(Vec<Result<RunSummary>>, DispersionStats)> {
    let mut c = run_campaign(mc, &[mc.base.law])?;
    let r = c.laws.remove(0);
    Ok((r.outcomes, r.stats))
}

/// Paired t statistic `mean(a − b) / (sd(a − b)/√n)`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Undefined(format!("series lengths differ ({} vs {})", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(Error::Undefined("paired t-test needs at least two pairs".into()));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let q = QuantityStats::of(&diffs);
    if q.sd == 0.0 {
        return Err(Error::Undefined("differences have zero variance".into()));
    }
    Ok(q.mean / (q.sd / (diffs.len() as f64).sqrt()))
}
