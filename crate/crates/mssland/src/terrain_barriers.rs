// SPDX-License-Identifier: Apache-2.0

//! Stepped terrain models and the polynomial barriers built on them.
//!
//! The terrain is a stack of `n` flat-topped steps centred on the landing
//! site. Step `j` has top height `h_j` and half-width `w_j`, with `h_0 = 0`
//! and `w_0 = 0` implied. For each lateral axis the barrier is the signed
//! curve `±ρ(r_z)`; segment `j` (for `h_{j-1} ≤ r_z ≤ h_j`) is
//! `β_j (r_z + γ_j)^{1/λ_j} + α_j` and segment `n+1` is a line of slope
//! `cot θ` above `h_n`. The vertical barrier is a step height plus a margin
//! `δ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vec3;

/// One flat-topped terrain step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerrainStep {
    /// Top height `h_j`, m.
    pub height_m: f64,
    /// Half-width `w_j`, m.
    pub half_width_m: f64,
}

/// Lateral axis selector for horizontal barriers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LateralAxis {
    X,
    Y,
}

impl LateralAxis {
    pub fn index(self) -> usize {
        match self {
            LateralAxis::X => 0,
            LateralAxis::Y => 1,
        }
    }
}

/// An `n`-step terrain approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepTerrain {
    /// Steps ordered from the landing site outwards.
    pub steps: Vec<TerrainStep>,
    /// Per-axis, per-step even exponents `λ_{i,j}` (index 0 = x, 1 = y).
    pub lambda: [Vec<u32>; 2],
    /// Slope angle of the outermost linear barrier, degrees.
    pub theta_deg: f64,
    /// Same profile on both lateral axes.
    pub symmetric: bool,
}

impl StepTerrain {
    /// Terrain with identical exponents on both lateral axes.
    pub fn symmetric(steps: Vec<TerrainStep>, lambda: Vec<u32>, theta_deg: f64) -> Self {
        StepTerrain {
            steps,
            lambda: [lambda.clone(), lambda],
            theta_deg,
            symmetric: true,
        }
    }

    /// Two-step pit used by the reference scenario.
    pub fn reference() -> Self {
        StepTerrain::symmetric(
            vec![
                TerrainStep {
                    height_m: 500.0,
                    half_width_m: 600.0,
                },
                TerrainStep {
                    height_m: 1000.0,
                    half_width_m: 1000.0,
                },
            ],
            vec![20, 6],
            0.05,
        )
    }

    pub fn n_steps(&self) -> usize {
        self.steps.len()
    }

    /// Checks the structural invariants, reporting the offending key.
    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::config("terrain.steps", "at least one step is required"));
        }
        let (mut h_prev, mut w_prev) = (0.0, 0.0);
        for (j, s) in self.steps.iter().enumerate() {
            if !(s.height_m.is_finite() && s.height_m > h_prev) {
                return Err(Error::config(
                    format!("terrain.steps[{j}].height_m"),
                    "heights must be finite and strictly increasing from 0",
                ));
            }
            if !(s.half_width_m.is_finite() && s.half_width_m > w_prev) {
                return Err(Error::config(
                    format!("terrain.steps[{j}].half_width_m"),
                    "half-widths must be finite and strictly increasing from 0",
                ));
            }
            h_prev = s.height_m;
            w_prev = s.half_width_m;
        }
        for (axis, name) in [(0, "lambda_x"), (1, "lambda_y")] {
            let lam = &self.lambda[axis];
            if lam.len() != self.steps.len() {
                return Err(Error::config(
                    format!("terrain.{name}"),
                    format!("expected {} exponents, got {}", self.steps.len(), lam.len()),
                ));
            }
            if let Some(j) = lam.iter().position(|&l| l < 2 || l % 2 != 0) {
                return Err(Error::config(
                    format!("terrain.{name}[{j}]"),
                    "exponents must be even integers >= 2",
                ));
            }
        }
        if self.symmetric && self.lambda[0] != self.lambda[1] {
            return Err(Error::config(
                "terrain.lambda_y",
                "a symmetric terrain needs identical exponents on both axes",
            ));
        }
        if !(self.theta_deg > 0.0 && self.theta_deg < 90.0) {
            return Err(Error::config("terrain.theta_deg", "must lie in (0, 90) degrees"));
        }
        Ok(())
    }

    /// Height of the true terrain beneath a point whose lateral infinity norm is
    /// `lateral`. Points on a band edge take the inner (lower) step.
    pub fn floor_height(&self, lateral: f64) -> f64 {
        let mut h_prev = 0.0;
        for s in &self.steps {
            if lateral <= s.half_width_m {
                return h_prev;
            }
            h_prev = s.height_m;
        }
        h_prev
    }
}

/// Rule used to pick the vertical barrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerticalRule {
    /// Altitude cases first: `h_n + δ` whenever `r_z ≥ h_n`, otherwise the
    /// step whose height and lateral bands both contain the lander, otherwise
    /// the landing-site value `δ`.
    HeightFirst,
    /// The step whose lateral band contains the lander sets the barrier,
    /// regardless of altitude; beyond the outermost band it is `h_n + δ`.
    #[default]
    TerrainBeneath,
}

/// Which case produced a vertical barrier value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerticalCase {
    /// Step `j` (1-based), giving `h_{j-1} + δ`.
    Step(usize),
    /// Above the highest step, or outside every band: `h_n + δ`.
    Top,
    /// No case matched; landing-site value `δ`.
    Fallback,
}

/// Vertical barrier value and the case that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalBarrier {
    pub rho_z: f64,
    pub case: VerticalCase,
}

/// One barrier segment `β (r_z + γ)^{1/λ} + α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSegment {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Root exponent; 1 for the outer linear segment.
    pub lambda: f64,
}

impl BarrierSegment {
    pub fn eval(&self, r_z: f64) -> f64 {
        let base = (r_z + self.gamma).max(0.0);
        let root = if self.lambda == 1.0 {
            base
        } else {
            base.powf(1.0 / self.lambda)
        };
        self.beta * root + self.alpha
    }
}

/// Barrier coefficients for both lateral axes plus the vertical margin.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSet {
    /// `segments[axis][j-1]` for `j = 1..=n+1`.
    pub segments: [Vec<BarrierSegment>; 2],
    /// Knot heights `h_0 = 0, h_1, …, h_n`.
    pub heights: Vec<f64>,
    /// Knot half-widths `w_0 = 0, w_1, …, w_n`.
    pub half_widths: Vec<f64>,
    /// Vertical safety margin `δ`, m.
    pub delta: f64,
    pub vertical_rule: VerticalRule,
}

/// Builds barrier coefficients for `terrain` with vertical margin `delta`.
pub fn build_barriers(terrain: &StepTerrain, delta: f64) -> Result<BarrierSet> {
    terrain.validate()?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::config("terrain.delta_m", "must be finite and > 0"));
    }
    let mut heights = vec![0.0];
    let mut half_widths = vec![0.0];
    for s in &terrain.steps {
        heights.push(s.height_m);
        half_widths.push(s.half_width_m);
    }
    let n = terrain.n_steps();
    let cot_theta = 1.0 / terrain.theta_deg.to_radians().tan();
    let segments = [0usize, 1].map(|axis| {
        let mut segs: Vec<BarrierSegment> = (1..=n)
            .map(|j| {
                let lam = f64::from(terrain.lambda[axis][j - 1]);
                let dh = heights[j] - heights[j - 1];
                let dw = half_widths[j] - half_widths[j - 1];
                BarrierSegment {
                    alpha: half_widths[j - 1],
                    beta: dw / dh.powf(1.0 / lam),
                    gamma: -heights[j - 1],
                    lambda: lam,
                }
            })
            .collect();
        segs.push(BarrierSegment {
            alpha: half_widths[n],
            beta: cot_theta,
            gamma: -heights[n],
            lambda: 1.0,
        });
        segs
    });
    Ok(BarrierSet {
        segments,
        heights,
        half_widths,
        delta,
        vertical_rule: VerticalRule::default(),
    })
}

impl BarrierSet {
    pub fn with_vertical_rule(mut self, rule: VerticalRule) -> Self {
        self.vertical_rule = rule;
        self
    }

    pub fn n_steps(&self) -> usize {
        self.heights.len() - 1
    }

    /// Index (0-based) of the segment covering `r_z`.
    fn segment_index(&self, r_z: f64) -> usize {
        let n = self.n_steps();
        (1..=n).find(|&j| r_z <= self.heights[j]).map_or(n, |j| j - 1)
    }

    /// Unsigned barrier magnitude for `axis` at altitude `r_z ≥ 0`.
    fn magnitude(&self, axis: LateralAxis, r_z: f64) -> f64 {
        let k = self.segment_index(r_z);
        self.segments[axis.index()][k].eval(r_z)
    }
}

/// Signed horizontal barrier position on `side` (±1) of `axis` at altitude `r_z`.
pub fn horizontal_barrier(b: &BarrierSet, axis: LateralAxis, side: f64, r_z: f64) -> Result<f64> {
    if r_z.is_nan() || r_z < 0.0 {
        return Err(Error::Domain(format!("barrier altitude must be >= 0, got {r_z}")));
    }
    let side = if side < 0.0 { -1.0 } else { 1.0 };
    Ok(side * b.magnitude(axis, r_z))
}

/// Vertical barrier for a lander at `position`, using the set's rule.
pub fn vertical_barrier(b: &BarrierSet, position: &Vec3) -> VerticalBarrier {
    let lateral = position.x.abs().max(position.y.abs());
    let n = b.n_steps();
    let top = VerticalBarrier {
        rho_z: b.heights[n] + b.delta,
        case: VerticalCase::Top,
    };
    let step = |j: usize| VerticalBarrier {
        rho_z: b.heights[j - 1] + b.delta,
        case: VerticalCase::Step(j),
    };
    match b.vertical_rule {
        VerticalRule::HeightFirst => {
            let r_z = position.z;
            if r_z >= b.heights[n] {
                return top;
            }
            (1..=n)
                .find(|&j| {
                    (b.heights[j - 1]..=b.heights[j]).contains(&r_z)
                        && (b.half_widths[j - 1]..=b.half_widths[j]).contains(&lateral)
                })
                .map_or(
                    VerticalBarrier {
                        rho_z: b.delta,
                        case: VerticalCase::Fallback,
                    },
                    step,
                )
        }
        VerticalRule::TerrainBeneath => (1..=n)
            .find(|&j| lateral <= b.half_widths[j])
            .map_or(top, step),
    }
}

/// Signed distances `d = r − ρ` to the barriers on the lander's side.
///
/// Lateral barriers are evaluated at `max(r_z, 0)`, so a lander below the
/// datum sees the landing-site barrier `ρ = 0`.
pub fn barrier_distance(b: &BarrierSet, position: &Vec3) -> Vec3 {
    let r_z = position.z.max(0.0);
    let lateral = |axis: LateralAxis, r: f64| {
        let side = if r < 0.0 { -1.0 } else { 1.0 };
        r - side * b.magnitude(axis, r_z)
    };
    Vec3::new(
        lateral(LateralAxis::X, position.x),
        lateral(LateralAxis::Y, position.y),
        position.z - vertical_barrier(b, position).rho_z,
    )
}

/// Distance at which the divert rate peaks, for gains `l1`, `l2`.
pub fn critical_distance(l1: f64, l2: f64) -> Result<f64> {
    if !(l1 > 0.0 && l1.is_finite()) {
        return Err(Error::config("guidance.l1", "must be > 0"));
    }
    if !(l2 > 0.0 && l2.is_finite()) {
        return Err(Error::config("guidance.l2", "must be > 0"));
    }
    let disc = (l2 * l2 - 2.0 * l1 * l2 + 4.0 * l1 * l1).sqrt();
    Ok(((disc + l2 - l1) / 3.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reference(rule: VerticalRule) -> BarrierSet {
        build_barriers(&StepTerrain::reference(), 95.5)
            .unwrap()
            .with_vertical_rule(rule)
    }

    #[test]
    fn first_segment_coefficients() {
        let b = reference(VerticalRule::HeightFirst);
        let s = b.segments[0][0];
        assert_eq!(s.alpha, 0.0);
        assert_eq!(s.gamma, 0.0);
        assert_relative_eq!(s.beta, 600.0 / 500f64.powf(0.05), max_relative = 1e-15);
        assert_relative_eq!(s.beta, 439.75, epsilon = 0.01);
    }

    #[test]
    fn junction_value_at_first_knot() {
        let b = reference(VerticalRule::HeightFirst);
        assert_relative_eq!(b.segments[0][0].eval(500.0), 600.0, max_relative = 1e-12);
        assert_relative_eq!(b.segments[0][1].eval(500.0), 600.0, max_relative = 1e-12);
        assert_relative_eq!(
            horizontal_barrier(&b, LateralAxis::X, 1.0, 500.0).unwrap(),
            600.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn single_step_is_zero_at_datum() {
        let t = StepTerrain::symmetric(
            vec![TerrainStep {
                height_m: 300.0,
                half_width_m: 250.0,
            }],
            vec![4],
            10.0,
        );
        let b = build_barriers(&t, 10.0).unwrap();
        assert_eq!(horizontal_barrier(&b, LateralAxis::Y, 1.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn linear_branch_above_top_step() {
        let b = reference(VerticalRule::HeightFirst);
        let expected = 1000.0 + 200.0 / 0.05f64.to_radians().tan();
        let got = horizontal_barrier(&b, LateralAxis::X, 1.0, 1200.0).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        assert!(got > 230_000.0 && got < 231_000.0);
    }

    #[test]
    fn negative_side_mirrors() {
        let b = reference(VerticalRule::HeightFirst);
        for &z in &[0.0, 10.0, 499.0, 750.0, 1000.0, 4000.0] {
            let p = horizontal_barrier(&b, LateralAxis::X, 1.0, z).unwrap();
            let m = horizontal_barrier(&b, LateralAxis::X, -1.0, z).unwrap();
            assert_eq!(m, -p);
        }
    }

    #[test]
    fn negative_altitude_is_domain_error() {
        let b = reference(VerticalRule::HeightFirst);
        assert!(matches!(
            horizontal_barrier(&b, LateralAxis::X, 1.0, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn height_first_cases() {
        let b = reference(VerticalRule::HeightFirst);
        let v = vertical_barrier(&b, &Vec3::new(700.0, 0.0, 800.0));
        assert_relative_eq!(v.rho_z, 595.5);
        assert_eq!(v.case, VerticalCase::Step(2));
        let v = vertical_barrier(&b, &Vec3::new(0.0, 0.0, 1500.0));
        assert_relative_eq!(v.rho_z, 1095.5);
        assert_eq!(v.case, VerticalCase::Top);
        let v = vertical_barrier(&b, &Vec3::new(100.0, 50.0, 200.0));
        assert_relative_eq!(v.rho_z, 95.5);
        assert_eq!(v.case, VerticalCase::Step(1));
        let v = vertical_barrier(&b, &Vec3::new(1500.0, 0.0, 200.0));
        assert_eq!(v.case, VerticalCase::Fallback);
        assert_relative_eq!(v.rho_z, 95.5);
    }

    #[test]
    fn terrain_beneath_cases() {
        let b = reference(VerticalRule::TerrainBeneath);
        assert_relative_eq!(vertical_barrier(&b, &Vec3::new(700.0, 0.0, 800.0)).rho_z, 595.5);
        assert_relative_eq!(vertical_barrier(&b, &Vec3::new(0.0, 0.0, 1500.0)).rho_z, 95.5);
        assert_relative_eq!(vertical_barrier(&b, &Vec3::new(-1200.0, 0.0, 1500.0)).rho_z, 1095.5);
        assert_relative_eq!(vertical_barrier(&b, &Vec3::new(0.0, 999.0, 10.0)).rho_z, 595.5);
    }

    #[test]
    fn distance_examples() {
        let b = reference(VerticalRule::HeightFirst);
        let d = barrier_distance(&b, &Vec3::new(0.0, 0.0, 1500.0));
        assert_relative_eq!(d.z, 404.5, max_relative = 1e-12);
        let rho = horizontal_barrier(&b, LateralAxis::X, 1.0, 300.0).unwrap();
        let d = barrier_distance(&b, &Vec3::new(rho, 0.0, 300.0));
        assert_eq!(d.x, 0.0);
        let a = barrier_distance(&b, &Vec3::new(123.0, 45.0, 300.0));
        let m = barrier_distance(&b, &Vec3::new(-123.0, 45.0, 300.0));
        assert_eq!(a.x, -m.x);
    }

    #[test]
    fn critical_distance_reference_gains() {
        let d = critical_distance(1.0, 9500.0).unwrap();
        assert_relative_eq!(d, 79.58, epsilon = 0.005);
        assert_relative_eq!(1.2 * d, 95.5, epsilon = 0.05);
        assert!(critical_distance(0.0, 1.0).is_err());
        assert!(critical_distance(1.0, -2.0).is_err());
    }

    #[test]
    fn invalid_terrains_rejected() {
        let mut t = StepTerrain::reference();
        t.lambda = [vec![20, 5], vec![20, 5]];
        assert!(matches!(build_barriers(&t, 1.0), Err(Error::Config { key, .. }) if key == "terrain.lambda_x[1]"));
        let mut t = StepTerrain::reference();
        t.steps[1].height_m = 400.0;
        assert!(build_barriers(&t, 1.0).is_err());
        assert!(build_barriers(&StepTerrain::reference(), 0.0).is_err());
        let mut t = StepTerrain::reference();
        t.theta_deg = 90.0;
        assert!(build_barriers(&t, 1.0).is_err());
    }

    #[test]
    fn floor_height_bands() {
        let t = StepTerrain::reference();
        assert_eq!(t.floor_height(0.0), 0.0);
        assert_eq!(t.floor_height(600.0), 0.0);
        assert_eq!(t.floor_height(600.1), 500.0);
        assert_eq!(t.floor_height(1000.1), 1000.0);
    }
}
