//! Kinematic two-link arm following a piecewise target sequence; the
//! morphology is the pair of link lengths.

use serde::{Deserialize, Serialize};

use super::losses::channel_gap;
use super::{LossCoefficients, Policy, PolicyKind, Scene, ScenarioId, ScenarioSpec, SuccessThresholds};
use crate::diffsim::{Channel, Real, Trajectory, Vec2, WorldConfig};
use crate::error::{Error, Result};
use crate::geometry::DeformedShape;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachingScene {
    /// Nominal initial joint angles (rad).
    pub joint_angles: [f64; 2],
    /// Half-width of the uniform perturbation of the initial angles.
    pub angle_jitter: f64,
    /// Targets visited in order, each for an equal share of the horizon.
    pub targets: Vec<[f64; 2]>,
    /// m, success radius around the last target
    pub reach_tol: f64,
}

impl ReachingScene {
    /// Target at every step `1..=horizon`.
    pub fn target_sequence(&self, horizon: usize) -> Vec<[f64; 2]> {
        let n = self.targets.len();
        (0..horizon).map(|k| self.targets[(k * n / horizon).min(n - 1)]).collect()
    }
}

pub fn reaching_actions(horizon: usize) -> Vec<[f64; 2]> {
    (0..horizon)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / horizon as f64;
            [0.6 * a.sin(), 0.8 * (0.5 * a).cos()]
        })
        .collect()
}

pub(super) fn default_spec() -> ScenarioSpec {
    let world = WorldConfig {
        gravity: [0.0, 0.0],
        dt: 0.01,
        horizon: 200,
        ..WorldConfig::default()
    };
    ScenarioSpec {
        id: ScenarioId::Reaching,
        n: 20,
        m: 5,
        d_prime: 1,
        rng_seed: 4,
        theta0: vec![0.15, 0.15],
        lower: vec![0.05, 0.05],
        upper: vec![0.3, 0.3],
        world,
        coefficients: LossCoefficients {
            c_u: 0.1,
            c_p: 10.0,
            ..LossCoefficients::default()
        },
        thresholds: SuccessThresholds::default(),
        policy: Policy {
            kind: PolicyKind::ReachingActions,
            action_scale: [1.0, 1.0],
            actions: reaching_actions(200),
        },
        tool: None,
        scene: Scene::Reaching(ReachingScene {
            joint_angles: [0.3, 0.6],
            angle_jitter: 0.1,
            targets: vec![[0.2, 0.15], [0.1, 0.25], [-0.05, 0.25], [0.0, 0.2]],
            reach_tol: 0.02,
        }),
    }
}

/// Base, elbow and tip of the straightened arm; `theta = (l1, l2)`.
pub(super) fn arm_markers(theta: &[f64]) -> DeformedShape {
    DeformedShape {
        vertices: vec![[0.0, 0.0], [theta[0], 0.0], [theta[0] + theta[1], 0.0]],
        vertex_sensitivities: vec![
            [vec![0.0, 0.0], vec![0.0, 0.0]],
            [vec![1.0, 0.0], vec![0.0, 0.0]],
            [vec![1.0, 1.0], vec![0.0, 0.0]],
        ],
    }
}

pub(super) fn rollout<S: Real>(
    _scene: &ReachingScene,
    q0: [f64; 2],
    markers: &[Vec2<S>],
    policy: &Policy,
    cfg: &WorldConfig,
) -> Result<Trajectory<S>> {
    if markers.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            found: markers.len(),
        });
    }
    let h = cfg.horizon;
    let l1 = markers[1].x - markers[0].x;
    let l2 = markers[2].x - markers[1].x;
    let tip = |q: [f64; 2]| {
        let (a, b) = (q[0], q[0] + q[1]);
        [l1 * a.cos() + l2 * b.cos(), l1 * a.sin() + l2 * b.sin()]
    };
    let mut q = q0;
    let mut u_ch = Channel::new("u", 2, h);
    let mut p_ch = Channel::new("p", 2, h);
    u_ch.initial = vec![S::zero(), S::zero()];
    p_ch.initial = tip(q).to_vec();
    for tau in 1..=h {
        let cmd = policy.command(tau);
        q[0] += cmd[0] * cfg.dt;
        q[1] += cmd[1] * cfg.dt;
        let u = policy.actions[tau - 1];
        u_ch.push(&[S::cst(u[0]), S::cst(u[1])]);
        p_ch.push(&tip(q));
    }
    Trajectory::new(h, vec![u_ch, p_ch])
}

/// `(1/H) sum_tau |u - u'|^2 + |p - p'|^2`.
pub(super) fn distill_loss<S: Real, T: Real>(new: &Trajectory<S>, old: &Trajectory<T>) -> Result<S> {
    if new.horizon != old.horizon {
        return Err(Error::HorizonMismatch(new.horizon, old.horizon));
    }
    Ok((channel_gap(new, old, "u")? + channel_gap(new, old, "p")?) / new.horizon as f64)
}
