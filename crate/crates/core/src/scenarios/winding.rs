//! Side-view winding: a rope (chain of spring-connected beads) is dropped
//! over a tool profile that turns about its center, and should stay hung
//! on it while being wound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{
    LossCoefficients, Policy, PolicyKind, Scene, ScenarioId, ScenarioSpec, SuccessThresholds,
    ToolSpec,
};
use crate::diffsim::{
    contact_force, BodyState, Channel, Polygon, Probe, Real, RigidBody, SurfaceMotion, Trajectory,
    Vec2, World, WorldConfig,
};
use crate::error::Result;
use crate::geometry::regular_polygon;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindingScene {
    pub beads: usize,
    /// m, rest length between neighbouring beads
    pub spacing: f64,
    pub bead_mass: f64,
    pub rope_radius: f64,
    /// Radius of the arc the rope starts on, centered on the tool.
    pub drape_radius: f64,
    /// Extra rope length (m) moved from the right leg to the left leg.
    pub drape_offset: f64,
}

const CAGE_VERTICES: usize = 8;

pub(super) fn default_spec(n: usize) -> ScenarioSpec {
    let boundary = regular_polygon([0.0, 0.0], 0.035, 48, 0.0);
    let cage = regular_polygon([0.0, 0.0], 0.06, CAGE_VERTICES, PI / CAGE_VERTICES as f64);
    // theta_k is the radial distance of cage vertex k
    let mut jacobian = vec![vec![0.0; CAGE_VERTICES]; 2 * CAGE_VERTICES];
    for (k, c) in cage.iter().enumerate() {
        let r = c[0].hypot(c[1]);
        jacobian[2 * k][k] = c[0] / r;
        jacobian[2 * k + 1][k] = c[1] / r;
    }
    let world = WorldConfig {
        dt: 1e-3,
        contact_stiffness: 1e4,
        contact_damping: 0.5,
        friction_coefficient: 0.5,
        tangential_smoothing: 0.01,
        softplus_sharpness: 1000.0,
        joint_stiffness: 1e4,
        joint_damping: 2.0,
        horizon: 400,
        ..WorldConfig::default()
    };
    ScenarioSpec {
        id: ScenarioId::Winding,
        n,
        m: 5,
        d_prime: 2,
        rng_seed: 1,
        theta0: vec![0.06; CAGE_VERTICES],
        lower: vec![0.045; CAGE_VERTICES],
        upper: vec![0.09; CAGE_VERTICES],
        world,
        coefficients: LossCoefficients::default(),
        thresholds: SuccessThresholds::default(),
        policy: Policy {
            kind: PolicyKind::CircularWinding,
            action_scale: [4.0, 0.0],
            actions: vec![[1.0, 0.0]; 400],
        },
        tool: Some(ToolSpec {
            boundary,
            cage,
            jacobian,
        }),
        scene: Scene::Winding(WindingScene {
            beads: 24,
            spacing: 0.012,
            bead_mass: 0.05,
            rope_radius: 0.004,
            drape_radius: 0.065,
            drape_offset: 0.02,
        }),
    }
}

/// Bead positions along the path: left leg hanging from `(-R, 0)`, the
/// upper half circle of radius `R`, then the right leg.
pub(super) fn drape(scene: &WindingScene) -> Vec<[f64; 2]> {
    let r = scene.drape_radius;
    let total = (scene.beads - 1) as f64 * scene.spacing;
    let arc = PI * r;
    let left = ((total - arc) / 2.0 + scene.drape_offset).max(0.0);
    (0..scene.beads)
        .map(|i| {
            let s = i as f64 * scene.spacing;
            if s < left {
                [-r, -(left - s)]
            } else if s < left + arc {
                let a = PI - (s - left) / r;
                [r * a.cos(), r * a.sin()]
            } else {
                [r, -(s - left - arc)]
            }
        })
        .collect()
}

pub(super) fn rollout<S: Real>(
    scene: &WindingScene,
    rotation: f64,
    tool: &[Vec2<S>],
    policy: &Policy,
    cfg: &WorldConfig,
) -> Result<Trajectory<S>> {
    let h = cfg.horizon;
    let mut angle = rotation;
    let bodies = drape(scene)
        .into_iter()
        .map(|p| RigidBody::dynamic(BodyState::at_rest(Vec2::cst(p[0], p[1]), S::zero(), scene.bead_mass, 1.0)))
        .collect();
    let mut world = World::new(bodies);

    let mut h_ch = Channel::new("h", 1, h);
    let mut com_ch = Channel::new("com", 2, h);
    let com = |w: &World<S>| {
        let mut c = Vec2::zero();
        for b in &w.bodies {
            c += b.state.position;
        }
        c * (1.0 / w.bodies.len() as f64)
    };
    let c0 = com(&world);
    h_ch.initial = vec![c0.y];
    com_ch.initial = vec![c0.x, c0.y];

    let n = world.bodies.len();
    for tau in 1..=h {
        // u[0] is the tool's angular velocity command
        let omega = policy.command(tau)[0];
        let poly = Polygon::placed(tool, Vec2::zero(), S::cst(angle));
        let motion = SurfaceMotion {
            linear: Vec2::zero(),
            angular: S::cst(omega),
            origin: Vec2::zero(),
        };
        for i in 0..n {
            let s = world.bodies[i].state;
            let probe = Probe {
                position: s.position,
                velocity: s.linear_velocity,
                radius: scene.rope_radius,
            };
            if let Some(f) = contact_force(&probe, &poly, &motion, cfg) {
                world.bodies[i].apply_force(f);
            }
        }
        for i in 0..n - 1 {
            let (a, b) = (world.bodies[i].state, world.bodies[i + 1].state);
            let d = b.position - a.position;
            let len = d.norm();
            let dir = Vec2::new(d.x / len, d.y / len);
            let rate = (b.linear_velocity - a.linear_velocity).dot(dir);
            let f = dir.scale((len - scene.spacing) * cfg.joint_stiffness + rate * cfg.joint_damping);
            world.bodies[i].apply_force(f);
            world.bodies[i + 1].apply_force(-f);
        }
        world.step(cfg)?;
        angle += omega * cfg.dt;
        let c = com(&world);
        h_ch.push(&[c.y]);
        com_ch.push(&[c.x, c.y]);
    }
    Trajectory::new(h, vec![h_ch, com_ch])
}
