// SPDX-License-Identifier: Apache-2.0

//! TOML scenario/campaign configuration with unit-suffixed keys.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{EventSettings, PftsSettings};
use crate::error::{Error, Result};
use crate::guidance_laws::{GuidanceConfig, Law};
use crate::lander_dynamics::{Environment, LanderState, Perturbation};
use crate::sim_harness::{InitialDistribution, McConfig, Scenario};
use crate::terrain_barriers::{StepTerrain, TerrainStep, VerticalRule};
use crate::Vec3;

/// Run-control settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSection {
    pub law: Law,
    pub dt_s: f64,
    pub seed: u64,
    pub termination_altitude_m: f64,
    pub t_go_floor_s: f64,
    /// Enables the sinusoidal disturbance.
    pub perturbed: bool,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let sc = Scenario::reference(Law::MssOtalg);
        ScenarioSection {
            law: sc.law,
            dt_s: sc.dt,
            seed: sc.seed,
            termination_altitude_m: sc.termination_altitude,
            t_go_floor_s: sc.t_go_floor,
            perturbed: false,
        }
    }
}

/// Initial state of a single simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InitialSection {
    pub r_m: [f64; 3],
    pub v_mps: [f64; 3],
    pub m_kg: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        let s = Scenario::reference(Law::MssOtalg).initial;
        InitialSection {
            r_m: s.r.into(),
            v_mps: s.v.into(),
            m_kg: s.m,
        }
    }
}

/// Planet, engine and disturbance parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvironmentSection {
    pub g_mps2: [f64; 3],
    pub g_e_mps2: f64,
    #[serde(rename = "T_max_N")]
    pub t_max_n: f64,
    #[serde(rename = "I_sp_s")]
    pub isp_s: f64,
    pub actuator_tau_s: f64,
    pub thrust_noise_frac: f64,
    pub dry_mass_kg: f64,
    pub perturbation_coeff: f64,
    pub perturbation_period_s: f64,
}

impl Default for EnvironmentSection {
    fn default() -> Self {
        let e = Environment::default();
        let Perturbation::Sinusoidal { coeff, period_s } = Perturbation::reference() else {
            unreachable!("reference disturbance is sinusoidal")
        };
        EnvironmentSection {
            g_mps2: e.g.into(),
            g_e_mps2: e.g_e,
            t_max_n: e.t_max,
            isp_s: e.isp,
            actuator_tau_s: e.actuator_tau,
            thrust_noise_frac: e.thrust_noise_frac,
            dry_mass_kg: e.dry_mass,
            perturbation_coeff: coeff,
            perturbation_period_s: period_s,
        }
    }
}

/// Stepped terrain and barrier options.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TerrainSection {
    pub heights_m: Vec<f64>,
    pub half_widths_m: Vec<f64>,
    pub lambda_x: Vec<u32>,
    pub lambda_y: Vec<u32>,
    pub theta_deg: f64,
    pub symmetric: bool,
    pub delta_m: f64,
    pub vertical_rule: VerticalRule,
}

impl Default for TerrainSection {
    fn default() -> Self {
        let sc = Scenario::reference(Law::MssOtalg);
        let t = sc.terrain;
        TerrainSection {
            heights_m: t.steps.iter().map(|s| s.height_m).collect(),
            half_widths_m: t.steps.iter().map(|s| s.half_width_m).collect(),
            lambda_x: t.lambda[0].clone(),
            lambda_y: t.lambda[1].clone(),
            theta_deg: t.theta_deg,
            symmetric: t.symmetric,
            delta_m: sc.delta,
            vertical_rule: sc.vertical_rule,
        }
    }
}

/// Guidance gains and targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GuidanceSection {
    pub l1: [f64; 3],
    pub l2: [f64; 3],
    pub l3: [f64; 3],
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub k1: f64,
    pub k2: f64,
    pub a_p_max_mps2: f64,
    pub eps_boundary: f64,
    pub r_f_m: [f64; 3],
    pub v_f_mps: [f64; 3],
    pub t_f_s: f64,
}

impl Default for GuidanceSection {
    fn default() -> Self {
        let g = GuidanceConfig::default();
        GuidanceSection {
            l1: g.l1.into(),
            l2: g.l2.into(),
            l3: g.l3.into(),
            lambda: g.lambda,
            k1: g.k1,
            k2: g.k2,
            a_p_max_mps2: g.a_p_max,
            eps_boundary: g.eps_boundary,
            r_f_m: g.r_f.into(),
            v_f_mps: g.v_f.into(),
            t_f_s: g.t_f,
        }
    }
}

/// Mean or standard deviation of each dispersed initial quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StateMoments {
    pub x_m: f64,
    pub y_m: f64,
    pub z_m: f64,
    pub vx_mps: f64,
    pub vy_mps: f64,
    pub vz_mps: f64,
    pub m_kg: f64,
}

impl StateMoments {
    fn from_array(a: [f64; 7]) -> Self {
        StateMoments {
            x_m: a[0],
            y_m: a[1],
            z_m: a[2],
            vx_mps: a[3],
            vy_mps: a[4],
            vz_mps: a[5],
            m_kg: a[6],
        }
    }

    fn to_array(self) -> [f64; 7] {
        [self.x_m, self.y_m, self.z_m, self.vx_mps, self.vy_mps, self.vz_mps, self.m_kg]
    }
}

impl Default for StateMoments {
    fn default() -> Self {
        StateMoments::from_array([0.0; 7])
    }
}

/// A moments table where absent keys keep the reference distribution.
#[derive(Deserialize)]
struct PartialMoments {
    x_m: Option<f64>,
    y_m: Option<f64>,
    z_m: Option<f64>,
    vx_mps: Option<f64>,
    vy_mps: Option<f64>,
    vz_mps: Option<f64>,
    m_kg: Option<f64>,
}

impl PartialMoments {
    fn over(self, base: [f64; 7]) -> StateMoments {
        let given = [self.x_m, self.y_m, self.z_m, self.vx_mps, self.vy_mps, self.vz_mps, self.m_kg];
        StateMoments::from_array(std::array::from_fn(|k| given[k].unwrap_or(base[k])))
    }
}

fn mean_moments<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<StateMoments, D::Error> {
    Ok(PartialMoments::deserialize(d)?.over(InitialDistribution::default().mean))
}

fn sd_moments<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<StateMoments, D::Error> {
    Ok(PartialMoments::deserialize(d)?.over(InitialDistribution::default().sd))
}

/// Monte Carlo campaign settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MonteCarloSection {
    pub n_runs: usize,
    pub master_seed: u64,
    #[serde(deserialize_with = "mean_moments")]
    pub mean: StateMoments,
    #[serde(deserialize_with = "sd_moments")]
    pub sd: StateMoments,
}

impl Default for MonteCarloSection {
    fn default() -> Self {
        let d = InitialDistribution::default();
        MonteCarloSection {
            n_runs: 300,
            master_seed: 2024,
            mean: StateMoments::from_array(d.mean),
            sd: StateMoments::from_array(d.sd),
        }
    }
}

/// Post-processing settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisSection {
    pub pfts_theta: f64,
    pub p1_min: f64,
    pub p1_max: f64,
    pub p1_points: usize,
    pub hysteresis_frac: f64,
    pub rate_dead_band_mps: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let e = EventSettings::default();
        AnalysisSection {
            pfts_theta: 0.9,
            p1_min: 1.0,
            p1_max: 50.0,
            p1_points: 2000,
            hysteresis_frac: e.hysteresis_frac,
            rate_dead_band_mps: e.rate_dead_band,
        }
    }
}

/// Whole configuration document. Every key is optional; missing keys take
/// the reference-mission defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigFile {
    pub scenario: ScenarioSection,
    pub initial: InitialSection,
    pub environment: EnvironmentSection,
    pub terrain: TerrainSection,
    pub guidance: GuidanceSection,
    pub montecarlo: MonteCarloSection,
    pub analysis: AnalysisSection,
}

impl ConfigFile {
    /// Single-run scenario described by this configuration.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let e = &self.environment;
        let t = &self.terrain;
        let g = &self.guidance;
        if t.heights_m.len() != t.half_widths_m.len() {
            return Err(Error::config(
                "terrain.half_widths_m",
                format!("expected {} entries to match terrain.heights_m", t.heights_m.len()),
            ));
        }
        let steps = t
            .heights_m
            .iter()
            .zip(&t.half_widths_m)
            .map(|(&height_m, &half_width_m)| TerrainStep { height_m, half_width_m })
            .collect();
        let env = Environment {
            g: Vec3::from(e.g_mps2),
            g_e: e.g_e_mps2,
            perturbation: if self.scenario.perturbed {
                Perturbation::Sinusoidal {
                    coeff: e.perturbation_coeff,
                    period_s: e.perturbation_period_s,
                }
            } else {
                Perturbation::None
            },
            thrust_noise_frac: e.thrust_noise_frac,
            t_max: e.t_max_n,
            isp: e.isp_s,
            actuator_tau: e.actuator_tau_s,
            dry_mass: e.dry_mass_kg,
        };
        let sc = Scenario {
            initial: LanderState::new(Vec3::from(self.initial.r_m), Vec3::from(self.initial.v_mps), self.initial.m_kg),
            env,
            terrain: StepTerrain {
                steps,
                lambda: [t.lambda_x.clone(), t.lambda_y.clone()],
                theta_deg: t.theta_deg,
                symmetric: t.symmetric,
            },
            delta: t.delta_m,
            vertical_rule: t.vertical_rule,
            guidance: GuidanceConfig {
                l1: Vec3::from(g.l1),
                l2: Vec3::from(g.l2),
                l3: Vec3::from(g.l3),
                lambda: g.lambda,
                k1: g.k1,
                k2: g.k2,
                a_p_max: g.a_p_max_mps2,
                eps_boundary: g.eps_boundary,
                r_f: Vec3::from(g.r_f_m),
                v_f: Vec3::from(g.v_f_mps),
                t_f: g.t_f_s,
            },
            law: self.scenario.law,
            dt: self.scenario.dt_s,
            seed: self.scenario.seed,
            termination_altitude: self.scenario.termination_altitude_m,
            t_go_floor: self.scenario.t_go_floor_s,
        };
        sc.validate()?;
        Ok(sc)
    }

    /// Monte Carlo campaign described by this configuration.
    pub fn to_mc_config(&self) -> Result<McConfig> {
        let mc = McConfig {
            n_runs: self.montecarlo.n_runs,
            distribution: InitialDistribution {
                mean: self.montecarlo.mean.to_array(),
                sd: self.montecarlo.sd.to_array(),
            },
            base: self.to_scenario()?,
            master_seed: self.montecarlo.master_seed,
        };
        mc.validate()?;
        Ok(mc)
    }

    /// Event-detector settings.
    pub fn event_settings(&self) -> EventSettings {
        EventSettings {
            hysteresis_frac: self.analysis.hysteresis_frac,
            rate_dead_band: self.analysis.rate_dead_band_mps,
        }
    }

    /// PFTS checker settings for divert-rate bound `p_max`.
    pub fn pfts_settings(&self, p_max: f64) -> PftsSettings {
        PftsSettings {
            theta: self.analysis.pfts_theta,
            p1_range: (self.analysis.p1_min, self.analysis.p1_max),
            p1_points: self.analysis.p1_points,
            k1: self.guidance.k1,
            k2: self.guidance.k2,
            a_p_max: self.guidance.a_p_max_mps2,
            p_max,
            t_f: self.guidance.t_f_s,
        }
    }

    /// Checks every invariant, including ones only the campaign uses.
    pub fn validate(&self) -> Result<()> {
        for (key, seed) in [
            ("scenario.seed", self.scenario.seed),
            ("montecarlo.master_seed", self.montecarlo.master_seed),
        ] {
            if seed > i64::MAX as u64 {
                return Err(Error::config(key, "must fit in a signed 64-bit TOML integer"));
            }
        }
        let a = &self.analysis;
        if !(a.hysteresis_frac >= 0.0 && a.hysteresis_frac < 1.0) {
            return Err(Error::config("analysis.hysteresis_frac", "must lie in [0, 1)"));
        }
        if !(a.rate_dead_band_mps >= 0.0 && a.rate_dead_band_mps.is_finite()) {
            return Err(Error::config("analysis.rate_dead_band_mps", "must be >= 0"));
        }
        self.pfts_settings(0.0).validate()?;
        self.to_mc_config().map(|_| ())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config_str(text: &str) -> Result<ConfigFile> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<document>", e.to_string()))?;
    let mut unknown = Vec::new();
    let cfg: ConfigFile = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
        .map_err(|e| Error::config("<document>", e.to_string().trim_end().to_string()))?;
    if let Some(key) = unknown.into_iter().next() {
        return Err(Error::config(key, "unknown key"));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads, parses and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

/// Serializes a configuration so that `parse_config_str` returns it unchanged.
pub fn write_config(cfg: &ConfigFile) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::config("<document>", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_reference_scenario() {
        let cfg = parse_config_str("").unwrap();
        assert_eq!(cfg, ConfigFile::default());
        let sc = cfg.to_scenario().unwrap();
        assert_eq!(sc, Scenario::reference(Law::MssOtalg));
        assert_eq!(sc.env.isp, 225.0);
        assert_eq!(sc.env.t_max, 31000.0);
        assert_eq!(sc.guidance.l2, Vec3::repeat(9500.0));
        assert_eq!(sc.delta, 95.5);
    }

    #[test]
    fn law_override() {
        let cfg = parse_config_str("[scenario]\nlaw = \"ogl\"\n").unwrap();
        assert_eq!(cfg.to_scenario().unwrap().law, Law::Ogl);
    }

    #[test]
    fn invariant_error_names_key() {
        let err = parse_config_str("[guidance]\nl1 = [0.0, 1.0, 1.0]\n").unwrap_err();
        match err {
            Error::Config { key, reason } => {
                assert_eq!(key, "guidance.l1");
                assert!(reason.contains("> 0"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config_str("[guidance]\nl4 = 3.0\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "guidance.l4"), "{err}");
        let err = parse_config_str("[montecarlo.mean]\nw_m = 3.0\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "montecarlo.mean.w_m"), "{err}");
    }

    #[test]
    fn unit_suffixed_keys_round_trip() {
        let text = "[environment]\nT_max_N = 25000.0\nI_sp_s = 300.0\n[guidance]\nLambda = 3.0\n";
        let cfg = parse_config_str(text).unwrap();
        assert_eq!(cfg.environment.t_max_n, 25000.0);
        assert_eq!(cfg.guidance.lambda, 3.0);
        let again = parse_config_str(&write_config(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn vertical_rule_names() {
        let cfg = parse_config_str("[terrain]\nvertical_rule = \"height-first\"\n").unwrap();
        assert_eq!(cfg.terrain.vertical_rule, VerticalRule::HeightFirst);
        assert!(parse_config_str("[terrain]\nvertical_rule = \"sideways\"\n").is_err());
    }

    #[test]
    fn perturbed_flag_sets_sinusoid() {
        let cfg = parse_config_str("[scenario]\nperturbed = true\n").unwrap();
        assert_eq!(cfg.to_scenario().unwrap().env.perturbation, Perturbation::reference());
    }

    #[test]
    fn mismatched_terrain_lengths_rejected() {
        let err = parse_config_str("[terrain]\nhalf_widths_m = [600.0]\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "terrain.half_widths_m"));
    }

    #[test]
    fn oversized_seed_rejected() {
        let mut cfg = ConfigFile::default();
        cfg.scenario.seed = u64::MAX;
        assert!(cfg.validate().is_err());
    }
}
