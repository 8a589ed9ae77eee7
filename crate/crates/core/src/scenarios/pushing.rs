//! Top-down pushing: a deformable pusher tracks a zig-zag reference and
//! shoves a pea (disc) toward a scoop opening at `y = y_scoop`.

use serde::{Deserialize, Serialize};

use super::{
    unit_jacobian, LossCoefficients, Policy, PolicyKind, Scene, ScenarioId, ScenarioSpec,
    SuccessThresholds, ToolSpec,
};
use crate::diffsim::{
    contact_force, BodyState, Channel, Polygon, Probe, Real, RigidBody, SurfaceMotion, Trajectory,
    Vec2, World, WorldConfig,
};
use crate::error::Result;
use crate::geometry::densify;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PushingScene {
    /// Corners of the square the pea center is sampled from.
    pub region_min: [f64; 2],
    pub region_max: [f64; 2],
    pub pea_radius: f64,
    pub pea_mass: f64,
    /// N·s/m, viscous drag of the table on the pea
    pub pea_drag: f64,
    pub pusher_mass: f64,
    pub pusher_start: [f64; 2],
    /// PD gains `[kp, kd]` of the reference tracker.
    pub gains: [f64; 2],
}

const HALF_LENGTH: f64 = 0.06;
const HALF_THICKNESS: f64 = 0.012;

/// Square-wave lateral command with a constant forward command; the
/// reference is a zero-mean triangle wave in x.
pub fn zig_zag_actions(horizon: usize, period: usize) -> Vec<[f64; 2]> {
    (0..horizon)
        .map(|k| {
            let phase = (k + period / 4) % period;
            [if phase < period / 2 { 1.0 } else { -1.0 }, 1.0]
        })
        .collect()
}

pub(super) fn default_spec(n: usize) -> ScenarioSpec {
    let boundary = densify(
        &[
            [-HALF_LENGTH, -HALF_THICKNESS],
            [HALF_LENGTH, -HALF_THICKNESS],
            [HALF_LENGTH, HALF_THICKNESS],
            [-HALF_LENGTH, HALF_THICKNESS],
        ],
        0.006,
    );
    // BL, BR, TR, TRM, TC, TLM, TL
    let cage = vec![
        [-0.075, -0.025],
        [0.075, -0.025],
        [0.075, 0.025],
        [0.035, 0.025],
        [0.0, 0.025],
        [-0.035, 0.025],
        [-0.075, 0.025],
    ];
    // theta = [tr_y, tl_y, tc_y, trm_y, tlm_y, right_halfwidth, left_halfwidth]
    let y = |v: usize| 2 * v + 1;
    let x = |v: usize| 2 * v;
    let jacobian = unit_jacobian(
        14,
        7,
        &[
            (y(2), 0, 1.0),
            (y(6), 1, 1.0),
            (y(4), 2, 1.0),
            (y(3), 3, 1.0),
            (y(5), 4, 1.0),
            (x(1), 5, 1.0),
            (x(2), 5, 1.0),
            (x(0), 6, -1.0),
            (x(6), 6, -1.0),
        ],
    );
    let world = WorldConfig {
        gravity: [0.0, 0.0],
        dt: 2e-3,
        contact_stiffness: 1e4,
        contact_damping: 20.0,
        friction_coefficient: 0.3,
        tangential_smoothing: 0.05,
        softplus_sharpness: 1000.0,
        horizon: 200,
        ..WorldConfig::default()
    };
    ScenarioSpec {
        id: ScenarioId::Pushing,
        n,
        m: 5,
        d_prime: 2,
        rng_seed: 3,
        theta0: vec![0.025, 0.025, 0.025, 0.025, 0.025, 0.075, 0.075],
        lower: vec![0.015, 0.015, 0.015, 0.015, 0.015, 0.065, 0.065],
        upper: vec![0.07, 0.07, 0.05, 0.06, 0.06, 0.1, 0.1],
        world,
        coefficients: LossCoefficients::default(),
        thresholds: SuccessThresholds::default(),
        policy: Policy {
            kind: PolicyKind::ZigZagPushing,
            action_scale: [0.3, 0.8],
            actions: zig_zag_actions(200, 52),
        },
        tool: Some(ToolSpec {
            boundary,
            cage,
            jacobian,
        }),
        scene: Scene::Pushing(PushingScene {
            region_min: [-0.04, 0.02],
            region_max: [0.04, 0.1],
            pea_radius: 0.015,
            pea_mass: 0.05,
            pea_drag: 1.0,
            pusher_mass: 0.5,
            pusher_start: [0.0, -0.08],
            gains: [4000.0, 90.0],
        }),
    }
}

pub(super) fn rollout<S: Real>(
    scene: &PushingScene,
    pea: [f64; 2],
    tool: &[Vec2<S>],
    policy: &Policy,
    cfg: &WorldConfig,
) -> Result<Trajectory<S>> {
    let h = cfg.horizon;
    let dt = cfg.dt;
    let [kp, kd] = scene.gains;
    let mut pusher = RigidBody::dynamic(BodyState::at_rest(
        Vec2::cst(scene.pusher_start[0], scene.pusher_start[1]),
        S::zero(),
        scene.pusher_mass,
        1.0,
    ));
    let mut disc = RigidBody::dynamic(BodyState::at_rest(Vec2::cst(pea[0], pea[1]), S::zero(), scene.pea_mass, 1.0));
    pusher.gravity_scale = 0.0;
    disc.gravity_scale = 0.0;
    let mut world = World::new(vec![pusher, disc]);

    let mut pea_ch = Channel::new("pea", 2, h);
    let mut pusher_ch = Channel::new("pusher", 2, h);
    let mut u_ch = Channel::new("u", 2, h);
    pea_ch.initial = vec![S::cst(pea[0]), S::cst(pea[1])];
    pusher_ch.initial = vec![S::cst(scene.pusher_start[0]), S::cst(scene.pusher_start[1])];
    u_ch.initial = vec![S::zero(), S::zero()];

    let mut reference = scene.pusher_start;
    for tau in 1..=h {
        let cmd = policy.command(tau);
        reference[0] += cmd[0] * dt;
        reference[1] += cmd[1] * dt;
        let (ps, qs) = (world.bodies[0].state, world.bodies[1].state);
        let track = (Vec2::cst(reference[0], reference[1]) - ps.position) * kp
            + (Vec2::cst(cmd[0], cmd[1]) - ps.linear_velocity) * kd;
        world.bodies[0].apply_force(track);

        let poly = Polygon::new(tool.iter().map(|v| ps.position + *v).collect());
        let probe = Probe {
            position: qs.position,
            velocity: qs.linear_velocity,
            radius: scene.pea_radius,
        };
        let motion = SurfaceMotion {
            linear: ps.linear_velocity,
            angular: S::zero(),
            origin: ps.position,
        };
        if let Some(f) = contact_force(&probe, &poly, &motion, cfg) {
            world.bodies[1].apply_force(f);
            world.bodies[0].apply_force(-f);
        }
        world.bodies[1].apply_force(qs.linear_velocity * -scene.pea_drag);
        world.step(cfg)?;

        let (ps, qs) = (world.bodies[0].state, world.bodies[1].state);
        pea_ch.push(&[qs.position.x, qs.position.y]);
        pusher_ch.push(&[ps.position.x, ps.position.y]);
        let u = policy.actions[tau - 1];
        u_ch.push(&[S::cst(u[0]), S::cst(u[1])]);
    }
    Trajectory::new(h, vec![pea_ch, pusher_ch, u_ch])
}
