//! The four planar task families and their morphology parameterizations.
//!
//! A [`ScenarioSpec`] is plain data (it round-trips through the harness
//! config); [`Scenario`] is the validated runtime form that owns the tool's
//! frozen MVC weights and runs rollouts.

mod flipping;
pub mod losses;
mod pushing;
mod reaching;
mod winding;

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffsim::{seed_shape, Real, Trajectory, Vec2, WorldConfig, MAX_PARAMS};
use crate::error::{Error, Result};
use crate::geometry::{CageParameterization, DeformedShape, MorphParams, Point, ToolShape};

pub use flipping::FlippingScene;
pub use losses::LossCoefficients;
pub use pushing::PushingScene;
pub use reaching::ReachingScene;
pub use winding::WindingScene;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioId {
    Winding,
    Flipping,
    Pushing,
    Reaching,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 4] = [
        ScenarioId::Winding,
        ScenarioId::Flipping,
        ScenarioId::Pushing,
        ScenarioId::Reaching,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::Winding => "winding",
            ScenarioId::Flipping => "flipping",
            ScenarioId::Pushing => "pushing",
            ScenarioId::Reaching => "reaching",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::config("scenario", format!("unknown scenario `{name}`")))
    }

    /// Whether the scenario's headline metric is a success rate.
    pub fn reports_success_rate(self) -> bool {
        matches!(self, ScenarioId::Flipping | ScenarioId::Pushing)
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scenario-specific initial state `s0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// Tool rotation about its center (rad).
    Winding { rotation: f64 },
    /// Planar offset in `[-2, 2]^2` (scaled by the scene) and box
    /// orientation in `[-pi/2, pi/2]`.
    Flipping { offset: [f64; 2], orientation: f64 },
    /// Pea center (m).
    Pushing { pea: [f64; 2] },
    /// Arm joint angles (rad).
    Reaching { joint_angles: [f64; 2] },
}

/// One restricted task: a single initial state drawn from the scenario's
/// initial-state distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskVariation {
    pub scenario: ScenarioId,
    pub index: usize,
    pub seed: u64,
    pub initial: InitialState,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    CircularWinding,
    ZigZagPushing,
    OpenLoopFlipping,
    ReachingActions,
}

/// Open-loop action sequence, `|u| <= 1` per component, scaled by
/// `action_scale` into scenario units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Policy {
    pub kind: PolicyKind,
    pub action_scale: [f64; 2],
    pub actions: Vec<[f64; 2]>,
}

impl Policy {
    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.actions.len() < horizon {
            return Err(Error::config(
                "policy.actions",
                format!("{} actions for horizon {horizon}", self.actions.len()),
            ));
        }
        if let Some(k) = self
            .actions
            .iter()
            .position(|u| u.iter().any(|c| !(c.abs() <= 1.0)))
        {
            return Err(Error::config(format!("policy.actions[{k}]"), "|u| must be <= 1"));
        }
        Ok(())
    }

    /// Scaled command at step `tau` (1-based).
    pub fn command(&self, tau: usize) -> [f64; 2] {
        let u = self.actions[tau - 1];
        [u[0] * self.action_scale[0], u[1] * self.action_scale[1]]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuccessThresholds {
    /// m, allowed rope COM drop (Winding)
    pub drop_tol: f64,
    /// rad, allowed final box angle error (Flipping)
    pub angle_tol: f64,
}

impl Default for SuccessThresholds {
    fn default() -> Self {
        SuccessThresholds {
            drop_tol: 0.05,
            angle_tol: 0.1,
        }
    }
}

/// Dense tool boundary and its cage map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolSpec {
    pub boundary: Vec<Point>,
    pub cage: Vec<Point>,
    /// `2 * |cage|` rows, `d` columns.
    pub jacobian: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scene {
    Winding(WindingScene),
    Flipping(FlippingScene),
    Pushing(PushingScene),
    Reaching(ReachingScene),
}

/// Everything needed to simulate and optimize one scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    /// Number of sampled training variations.
    pub n: usize,
    /// Batch size.
    pub m: usize,
    /// Dimensions optimized per batch.
    pub d_prime: usize,
    pub rng_seed: u64,
    pub theta0: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub world: WorldConfig,
    pub coefficients: LossCoefficients,
    pub thresholds: SuccessThresholds,
    pub policy: Policy,
    /// Absent for Reaching, whose parameters are the arm link lengths.
    pub tool: Option<ToolSpec>,
    pub scene: Scene,
}

impl ScenarioSpec {
    /// Hyperparameters `(N, M, d, d')` at the published sizes; Reaching is
    /// only used for landscape slices.
    pub fn table_one(id: ScenarioId) -> Self {
        match id {
            ScenarioId::Winding => winding::default_spec(200),
            ScenarioId::Flipping => flipping::default_spec(100),
            ScenarioId::Pushing => pushing::default_spec(100),
            ScenarioId::Reaching => reaching::default_spec(),
        }
    }

    /// Same scenario at desk scale (smaller `N`).
    pub fn desk(id: ScenarioId) -> Self {
        match id {
            ScenarioId::Winding => winding::default_spec(60),
            ScenarioId::Flipping => flipping::default_spec(40),
            ScenarioId::Pushing => pushing::default_spec(40),
            ScenarioId::Reaching => reaching::default_spec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.theta0.len()
    }

    pub fn horizon(&self) -> usize {
        self.world.horizon
    }

    pub fn params0(&self) -> Result<MorphParams> {
        MorphParams::new(self.theta0.clone(), self.lower.clone(), self.upper.clone())
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || d > MAX_PARAMS {
            return Err(Error::config("theta0", format!("dimension {d} not in 1..={MAX_PARAMS}")));
        }
        self.params0().map_err(|e| Error::config("theta0", e.to_string()))?;
        if self.m == 0 || self.m > self.n {
            return Err(Error::config("m", "batch size must satisfy 1 <= M <= N"));
        }
        if self.d_prime == 0 || self.d_prime >= d {
            return Err(Error::config("d_prime", "must satisfy 1 <= d' < d"));
        }
        self.world.validate()?;
        self.policy.validate(self.horizon())?;
        let scene_id = match &self.scene {
            Scene::Winding(_) => ScenarioId::Winding,
            Scene::Flipping(_) => ScenarioId::Flipping,
            Scene::Pushing(_) => ScenarioId::Pushing,
            Scene::Reaching(_) => ScenarioId::Reaching,
        };
        if scene_id != self.id {
            return Err(Error::config("scene", format!("scene is {scene_id}, scenario is {}", self.id)));
        }
        match (&self.scene, &self.tool) {
            (Scene::Reaching(r), _) => {
                if d != 2 {
                    return Err(Error::config("theta0", "reaching uses two link lengths"));
                }
                if r.targets.is_empty() {
                    return Err(Error::config("scene.reaching.targets", "no targets"));
                }
            }
            (_, None) => return Err(Error::config("tool", "missing tool geometry")),
            (_, Some(_)) => {}
        }
        if self.coefficients.x_scoop <= 0.0 {
            return Err(Error::config("coefficients.x_scoop", "must be positive"));
        }
        Ok(())
    }
}

/// splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of variation `index` drawn from stream `base_seed`.
pub fn variation_seed(base_seed: u64, index: usize) -> u64 {
    mix(mix(base_seed) ^ index as u64)
}

/// Validated scenario with its tool built.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    tool: Option<ToolShape>,
}

impl Scenario {
    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        spec.validate()?;
        let tool = match &spec.tool {
            Some(t) => {
                let cage = CageParameterization::new(t.cage.clone(), spec.theta0.clone(), t.jacobian.clone())?;
                cage.validate_over_box(&spec.lower, &spec.upper)?;
                Some(ToolShape::build(t.boundary.clone(), cage)?)
            }
            None => None,
        };
        if let (Scene::Flipping(f), Some(t)) = (&spec.scene, &tool) {
            if f.tip_vertex >= t.num_vertices() {
                return Err(Error::config("scene.flipping.tip_vertex", "index out of range"));
            }
        }
        Ok(Scenario { spec, tool })
    }

    pub fn id(&self) -> ScenarioId {
        self.spec.id
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn tool(&self) -> Option<&ToolShape> {
        self.tool.as_ref()
    }

    pub fn check_theta(&self, theta: &[f64]) -> Result<MorphParams> {
        MorphParams::new(theta.to_vec(), self.spec.lower.clone(), self.spec.upper.clone())
    }

    /// The deformed tool (Reaching: base, elbow and tip markers of the arm).
    pub fn deformed(&self, theta: &[f64]) -> Result<DeformedShape> {
        let params = self.check_theta(theta)?;
        match &self.tool {
            Some(tool) => tool.deform(&params),
            None => Ok(reaching::arm_markers(theta)),
        }
    }

    /// `count` variations of stream `base_seed`, indices `0..count`.
    pub fn sample_variations(&self, count: usize, base_seed: u64) -> Vec<TaskVariation> {
        (0..count).map(|i| self.variation(base_seed, i)).collect()
    }

    pub fn variation(&self, base_seed: u64, index: usize) -> TaskVariation {
        let seed = variation_seed(base_seed, index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let initial = match &self.spec.scene {
            Scene::Winding(_) => InitialState::Winding {
                rotation: rng.gen_range(0.0..2.0 * PI),
            },
            Scene::Flipping(_) => InitialState::Flipping {
                offset: [rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0)],
                orientation: rng.gen_range(-FRAC_PI_2..=FRAC_PI_2),
            },
            Scene::Pushing(p) => InitialState::Pushing {
                pea: [
                    rng.gen_range(p.region_min[0]..=p.region_max[0]),
                    rng.gen_range(p.region_min[1]..=p.region_max[1]),
                ],
            },
            Scene::Reaching(r) => InitialState::Reaching {
                joint_angles: [
                    r.joint_angles[0] + rng.gen_range(-r.angle_jitter..=r.angle_jitter),
                    r.joint_angles[1] + rng.gen_range(-r.angle_jitter..=r.angle_jitter),
                ],
            },
        };
        TaskVariation {
            scenario: self.id(),
            index,
            seed,
            initial,
        }
    }

    /// Simulates `variation` with the tool at `theta`; with `S = Dual` the
    /// trajectory carries `d/dtheta`.
    pub fn rollout<S: Real>(&self, variation: &TaskVariation, theta: &[f64]) -> Result<Trajectory<S>> {
        let deformed = self.deformed(theta)?;
        self.rollout_with(variation, &deformed, &self.spec.policy, &self.spec.world)
    }

    pub fn rollout_with<S: Real>(
        &self,
        variation: &TaskVariation,
        deformed: &DeformedShape,
        policy: &Policy,
        cfg: &WorldConfig,
    ) -> Result<Trajectory<S>> {
        if variation.scenario != self.id() {
            return Err(Error::config(
                "variation",
                format!("{} variation given to {} scenario", variation.scenario, self.id()),
            ));
        }
        cfg.validate()?;
        policy.validate(cfg.horizon)?;
        let tool: Vec<Vec2<S>> = seed_shape(deformed, self.dim())?;
        let wrong_state = || Error::config("variation.initial", "initial state does not match scenario");
        match (&self.spec.scene, &variation.initial) {
            (Scene::Winding(s), InitialState::Winding { rotation }) => {
                winding::rollout(s, *rotation, &tool, policy, cfg)
            }
            (Scene::Flipping(s), InitialState::Flipping { offset, orientation }) => {
                flipping::rollout(s, *offset, *orientation, &tool, policy, cfg)
            }
            (Scene::Pushing(s), InitialState::Pushing { pea }) => pushing::rollout(s, *pea, &tool, policy, cfg),
            (Scene::Reaching(s), InitialState::Reaching { joint_angles }) => {
                reaching::rollout(s, *joint_angles, &tool, policy, cfg)
            }
            _ => Err(wrong_state()),
        }
    }

    pub fn task_loss<S: Real>(&self, traj: &Trajectory<S>) -> Result<S> {
        let c = &self.spec.coefficients;
        match &self.spec.scene {
            Scene::Winding(_) => losses::winding_task_loss(traj),
            Scene::Flipping(_) => losses::flipping_task_loss(traj, c),
            Scene::Pushing(_) => Ok(losses::pushing_task_loss(
                losses::pushing_evaluation_x(traj, c.y_scoop)?,
                c.x_scoop,
            )),
            Scene::Reaching(r) => losses::reaching_task_loss(traj, c, &r.target_sequence(traj.horizon)),
        }
    }

    /// Reaching has no distillation signal of its own; its task channels
    /// are compared like Flipping's action and fingertip channels.
    pub fn distill_loss<S: Real, T: Real>(&self, new: &Trajectory<S>, old: &Trajectory<T>) -> Result<S> {
        match &self.spec.scene {
            Scene::Winding(_) => losses::winding_distill_loss(new, old),
            Scene::Flipping(_) => losses::flipping_distill_loss(new, old),
            Scene::Pushing(_) => losses::pushing_distill_loss(new, old),
            Scene::Reaching(_) => reaching::distill_loss(new, old),
        }
    }

    pub fn success<S: Real>(&self, traj: &Trajectory<S>) -> Result<bool> {
        let t = &self.spec.thresholds;
        Ok(match &self.spec.scene {
            Scene::Winding(_) => {
                let h = traj.channel("h")?;
                h.last()[0].value() >= h.initial[0].value() - t.drop_tol
            }
            Scene::Flipping(_) => {
                let phi = traj.channel("phi")?.last()[0].value();
                (phi - FRAC_PI_2).abs() <= t.angle_tol
            }
            Scene::Pushing(_) => {
                let x = losses::pushing_evaluation_x(traj, self.spec.coefficients.y_scoop)?;
                x.value().abs() < self.spec.coefficients.x_scoop
            }
            Scene::Reaching(r) => {
                let p = traj.channel("p")?.last().to_vec();
                let target = r.targets[r.targets.len() - 1];
                (p[0].value() - target[0]).hypot(p[1].value() - target[1]) < r.reach_tol
            }
        })
    }
}

/// Column `k` of a jacobian with `rows` rows moving coordinate `row`.
pub(crate) fn unit_jacobian(rows: usize, d: usize, entries: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut j = vec![vec![0.0; d]; rows];
    for &(r, k, v) in entries {
        j[r][k] += v;
    }
    j
}
