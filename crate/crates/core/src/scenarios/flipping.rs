//! Side-view box flipping: a kinematic finger tips a square box over its
//! ground corner by a quarter turn.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::{
    unit_jacobian, LossCoefficients, Policy, PolicyKind, Scene, ScenarioId, ScenarioSpec,
    SuccessThresholds, ToolSpec,
};
use crate::diffsim::{
    contact_force, floor_force, BodyState, Channel, Polygon, Probe, Real, RigidBody, SurfaceMotion,
    Trajectory, Vec2, World, WorldConfig,
};
use crate::error::Result;
use crate::geometry::densify;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlippingScene {
    /// m, box side
    pub box_size: f64,
    /// m, corner rounding of the box
    pub corner_radius: f64,
    pub box_mass: f64,
    /// Nominal x of the box's bottom-left corner.
    pub box_x: f64,
    /// Sampled offsets in `[-2, 2]` are multiplied by this (m).
    pub offset_scale: f64,
    /// Box tilt (rad) per radian of sampled orientation.
    pub tilt_scale: f64,
    /// Finger tip start: gap to the box's rightmost corner, and height.
    pub finger_start: [f64; 2],
    /// Finger height shift (m) per unit of the sampled second offset.
    pub height_scale: f64,
    pub ground_friction: f64,
    /// Boundary vertex used as the fingertip `p`.
    pub tip_vertex: usize,
}

const ROD_HALF_WIDTH: f64 = 0.008;
const ROD_LENGTH: f64 = 0.1;

/// Push left until the box is past its balance point, then hold still.
pub fn open_loop_actions(horizon: usize, push_steps: usize) -> Vec<[f64; 2]> {
    (0..horizon)
        .map(|k| if k < push_steps { [-1.0, 0.0] } else { [0.0, 0.0] })
        .collect()
}

pub(super) fn default_spec(n: usize) -> ScenarioSpec {
    let boundary = densify(
        &[
            [-ROD_HALF_WIDTH, 0.0],
            [ROD_HALF_WIDTH, 0.0],
            [ROD_HALF_WIDTH, ROD_LENGTH],
            [-ROD_HALF_WIDTH, ROD_LENGTH],
        ],
        0.005,
    );
    let tip_vertex = boundary
        .iter()
        .position(|p| p[0].abs() < 1e-12 && p[1].abs() < 1e-12)
        .expect("rod boundary contains its tip");
    // BL, BM, BR, R1, R2, TR, TL, L2, L1
    let cage = vec![
        [-0.015, -0.01],
        [0.0, -0.015],
        [0.015, -0.01],
        [0.015, 0.03],
        [0.015, 0.07],
        [0.015, 0.115],
        [-0.015, 0.115],
        [-0.015, 0.07],
        [-0.015, 0.03],
    ];
    // theta = [BL.x, BM.y, BR.x, R1.x, R2.x, L1.x, L2.x, BL.y, BR.y]
    let x = |v: usize| 2 * v;
    let y = |v: usize| 2 * v + 1;
    let jacobian = unit_jacobian(
        18,
        9,
        &[
            (x(0), 0, 1.0),
            (y(1), 1, 1.0),
            (x(2), 2, 1.0),
            (x(3), 3, 1.0),
            (x(4), 4, 1.0),
            (x(8), 5, 1.0),
            (x(7), 6, 1.0),
            (y(0), 7, 1.0),
            (y(2), 8, 1.0),
        ],
    );
    let world = WorldConfig {
        dt: 1e-3,
        contact_stiffness: 2e4,
        contact_damping: 20.0,
        friction_coefficient: 0.3,
        tangential_smoothing: 0.1,
        softplus_sharpness: 2000.0,
        horizon: 400,
        ..WorldConfig::default()
    };
    ScenarioSpec {
        id: ScenarioId::Flipping,
        n,
        m: 5,
        d_prime: 2,
        rng_seed: 2,
        theta0: vec![-0.015, -0.015, 0.015, 0.015, 0.015, -0.015, -0.015, -0.01, -0.01],
        lower: vec![-0.03, -0.03, 0.01, 0.01, 0.01, -0.03, -0.03, -0.025, -0.025],
        upper: vec![-0.01, -0.008, 0.03, 0.03, 0.03, -0.01, -0.01, -0.005, -0.005],
        world,
        coefficients: LossCoefficients::default(),
        thresholds: SuccessThresholds::default(),
        policy: Policy {
            kind: PolicyKind::OpenLoopFlipping,
            action_scale: [0.3, 0.3],
            actions: open_loop_actions(400, 240),
        },
        tool: Some(ToolSpec {
            boundary,
            cage,
            jacobian,
        }),
        scene: Scene::Flipping(FlippingScene {
            box_size: 0.08,
            corner_radius: 0.003,
            box_mass: 0.3,
            box_x: 0.0,
            offset_scale: 0.01,
            tilt_scale: 0.2 / FRAC_PI_2,
            finger_start: [0.03, 0.072],
            height_scale: 0.0025,
            ground_friction: 1.0,
            tip_vertex,
        }),
    }
}

pub(super) fn rollout<S: Real>(
    scene: &FlippingScene,
    offset: [f64; 2],
    orientation: f64,
    tool: &[Vec2<S>],
    policy: &Policy,
    cfg: &WorldConfig,
) -> Result<Trajectory<S>> {
    let h = cfg.horizon;
    let dt = cfg.dt;
    let s = scene.box_size;
    let half = 0.5 * s;
    let tilt = orientation * scene.tilt_scale;
    let left = scene.box_x + offset[0] * scene.offset_scale;
    // pivot on the corner the box leans toward
    let (pivot, arm) = if tilt >= 0.0 {
        ([left, 0.0], [half, half])
    } else {
        ([left + s, 0.0], [-half, half])
    };
    let (c, sn) = (tilt.cos(), tilt.sin());
    let center = [
        pivot[0] + c * arm[0] - sn * arm[1],
        pivot[1] + sn * arm[0] + c * arm[1],
    ];
    let inertia = scene.box_mass * s * s / 6.0;
    let boxb = RigidBody::dynamic(BodyState::at_rest(
        Vec2::cst(center[0], center[1]),
        S::cst(tilt),
        scene.box_mass,
        inertia,
    ));
    let mut world = World::new(vec![boxb]);
    // rounded square: inset corners swept by a disc of radius `r`
    let r = scene.corner_radius;
    let inset = half - r;
    let corners: Vec<Vec2<S>> = [[-inset, -inset], [inset, -inset], [inset, inset], [-inset, inset]]
        .iter()
        .map(|p| Vec2::cst(p[0], p[1]))
        .collect();
    let ground = WorldConfig {
        friction_coefficient: scene.ground_friction,
        ..cfg.clone()
    };

    let rightmost = [[-half, -half], [half, -half], [half, half], [-half, half]]
        .iter()
        .map(|p| center[0] + c * p[0] - sn * p[1])
        .fold(f64::MIN, f64::max);
    let mut finger = [
        rightmost + scene.finger_start[0],
        scene.finger_start[1] + offset[1] * scene.height_scale,
    ];
    let tip = tool[scene.tip_vertex];

    let mut phi_ch = Channel::new("phi", 1, h);
    let mut u_ch = Channel::new("u", 2, h);
    let mut p_ch = Channel::new("p", 2, h);
    let mut box_ch = Channel::new("box", 2, h);
    phi_ch.initial = vec![S::cst(tilt)];
    u_ch.initial = vec![S::zero(), S::zero()];
    p_ch.initial = vec![tip.x + finger[0], tip.y + finger[1]];
    box_ch.initial = vec![S::cst(center[0]), S::cst(center[1])];

    for tau in 1..=h {
        let cmd = policy.command(tau);
        let vel = Vec2::<S>::cst(cmd[0], cmd[1]);
        let origin = Vec2::cst(finger[0], finger[1]);
        let finger_poly = Polygon::new(tool.iter().map(|v| origin + *v).collect());
        let motion = SurfaceMotion {
            linear: vel,
            angular: S::zero(),
            origin,
        };
        let st = world.bodies[0].state;
        let box_poly = Polygon::placed(&corners, st.position, st.angle);
        let box_motion = SurfaceMotion {
            linear: st.linear_velocity,
            angular: st.angular_velocity,
            origin: st.position,
        };
        for &corner in &box_poly.vertices {
            let probe = Probe {
                position: corner,
                velocity: st.velocity_at(corner),
                radius: r,
            };
            if let Some(f) = floor_force(&probe, 0.0, &ground) {
                world.bodies[0].apply_force_at(f, corner);
            }
            if let Some(f) = contact_force(&probe, &finger_poly, &motion, cfg) {
                world.bodies[0].apply_force_at(f, corner);
            }
        }
        for &v in &finger_poly.vertices {
            let probe = Probe {
                position: v,
                velocity: vel,
                radius: r,
            };
            if let Some(f) = contact_force(&probe, &box_poly, &box_motion, cfg) {
                world.bodies[0].apply_force_at(-f, v);
            }
        }
        world.step(cfg)?;
        finger[0] += cmd[0] * dt;
        finger[1] += cmd[1] * dt;

        let st = world.bodies[0].state;
        phi_ch.push(&[st.angle]);
        let u = policy.actions[tau - 1];
        u_ch.push(&[S::cst(u[0]), S::cst(u[1])]);
        p_ch.push(&[tip.x + finger[0], tip.y + finger[1]]);
        box_ch.push(&[st.position.x, st.position.y]);
    }
    Trajectory::new(h, vec![phi_ch, u_ch, p_ch, box_ch])
}
