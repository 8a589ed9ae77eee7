use serde::{Deserialize, Serialize};

use super::real::Real;
use super::vec2::Vec2;
use crate::error::{Error, Result};

/// Values above this magnitude abort the rollout.
pub const BLOWUP_LIMIT: f64 = 1e9;

/// Physical constants shared by all bodies of a rollout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldConfig {
    /// m/s²
    pub gravity: [f64; 2],
    /// s
    pub dt: f64,
    /// N/m
    pub contact_stiffness: f64,
    /// N·s/m
    pub contact_damping: f64,
    pub friction_coefficient: f64,
    /// m/s
    pub tangential_smoothing: f64,
    /// 1/m, softplus sharpness of the penetration relaxation
    pub softplus_sharpness: f64,
    /// N/m, rope joint springs
    pub joint_stiffness: f64,
    /// N·s/m
    pub joint_damping: f64,
    pub horizon: usize,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            gravity: [0.0, -9.81],
            dt: 1e-3,
            contact_stiffness: 1e4,
            contact_damping: 5.0,
            friction_coefficient: 0.5,
            tangential_smoothing: 1e-3,
            softplus_sharpness: 200.0,
            joint_stiffness: 1e4,
            joint_damping: 1.0,
            horizon: 200,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("dt", self.dt > 0.0),
            ("contact_stiffness", self.contact_stiffness > 0.0),
            ("contact_damping", self.contact_damping >= 0.0),
            ("friction_coefficient", self.friction_coefficient >= 0.0),
            ("tangential_smoothing", self.tangential_smoothing > 0.0),
            ("softplus_sharpness", self.softplus_sharpness > 0.0),
            ("joint_stiffness", self.joint_stiffness >= 0.0),
            ("joint_damping", self.joint_damping >= 0.0),
            ("horizon", self.horizon >= 1),
        ];
        for (field, ok) in checks {
            if !ok {
                return Err(Error::config(format!("world.{field}"), "out of range"));
            }
        }
        Ok(())
    }
}

/// Kinematic state of one rigid body.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BodyState<S> {
    pub position: Vec2<S>,
    pub angle: S,
    pub linear_velocity: Vec2<S>,
    pub angular_velocity: S,
    /// kg
    pub mass: f64,
    /// kg·m²
    pub inertia: f64,
}

impl<S: Real> BodyState<S> {
    pub fn at_rest(position: Vec2<S>, angle: S, mass: f64, inertia: f64) -> Self {
        BodyState {
            position,
            angle,
            linear_velocity: Vec2::zero(),
            angular_velocity: S::zero(),
            mass,
            inertia,
        }
    }

    /// World position of a body-frame point.
    pub fn world_point(&self, local: Vec2<S>) -> Vec2<S> {
        let (c, s) = (self.angle.cos(), self.angle.sin());
        self.position + local.rotate(c, s)
    }

    /// World velocity of the material point currently at `world`.
    pub fn velocity_at(&self, world: Vec2<S>) -> Vec2<S> {
        let r = world - self.position;
        self.linear_velocity + r.perp().scale(self.angular_velocity)
    }

    fn is_finite_and_bounded(&self) -> bool {
        let vals = [
            self.position.x,
            self.position.y,
            self.angle,
            self.linear_velocity.x,
            self.linear_velocity.y,
            self.angular_velocity,
        ];
        vals.iter()
            .all(|v| v.is_finite() && v.value().abs() <= BLOWUP_LIMIT)
    }

    pub fn kinetic_energy(&self) -> f64 {
        let v = self.linear_velocity.values();
        0.5 * self.mass * (v[0] * v[0] + v[1] * v[1])
            + 0.5 * self.inertia * self.angular_velocity.value().powi(2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Motion {
    /// Integrated from forces.
    Dynamic,
    /// Pose and velocity are set by the scenario every step.
    Kinematic,
}

#[derive(Clone, Debug)]
pub struct RigidBody<S> {
    pub state: BodyState<S>,
    pub motion: Motion,
    pub gravity_scale: f64,
    force: Vec2<S>,
    torque: S,
}

impl<S: Real> RigidBody<S> {
    pub fn dynamic(state: BodyState<S>) -> Self {
        RigidBody {
            state,
            motion: Motion::Dynamic,
            gravity_scale: 1.0,
            force: Vec2::zero(),
            torque: S::zero(),
        }
    }

    pub fn kinematic(state: BodyState<S>) -> Self {
        RigidBody {
            motion: Motion::Kinematic,
            gravity_scale: 0.0,
            ..RigidBody::dynamic(state)
        }
    }

    pub fn apply_force(&mut self, force: Vec2<S>) {
        self.force += force;
    }

    /// Force applied at a world point; adds the induced torque.
    pub fn apply_force_at(&mut self, force: Vec2<S>, point: Vec2<S>) {
        self.force += force;
        self.torque += (point - self.state.position).cross(force);
    }

    pub fn apply_torque(&mut self, torque: S) {
        self.torque += torque;
    }
}

/// A set of bodies advanced with semi-implicit Euler.
#[derive(Clone, Debug)]
pub struct World<S> {
    pub bodies: Vec<RigidBody<S>>,
    pub steps_taken: usize,
}

impl<S: Real> World<S> {
    pub fn new(bodies: Vec<RigidBody<S>>) -> Self {
        World {
            bodies,
            steps_taken: 0,
        }
    }

    /// Integrates one step from the accumulated forces, then clears them:
    /// velocities first, then positions from the new velocities.
    pub fn step(&mut self, cfg: &WorldConfig) -> Result<()> {
        let dt = cfg.dt;
        for body in &mut self.bodies {
            if body.motion == Motion::Dynamic {
                let s = &mut body.state;
                let inv_m = 1.0 / s.mass;
                let g = Vec2::<S>::cst(cfg.gravity[0], cfg.gravity[1]) * body.gravity_scale;
                s.linear_velocity += (body.force * inv_m + g) * dt;
                s.angular_velocity += body.torque * (dt / s.inertia);
                s.position += s.linear_velocity * dt;
                s.angle += s.angular_velocity * dt;
            }
            body.force = Vec2::zero();
            body.torque = S::zero();
        }
        self.steps_taken += 1;
        if self.bodies.iter().all(|b| b.state.is_finite_and_bounded()) {
            Ok(())
        } else {
            Err(Error::NumericalBlowup {
                step: self.steps_taken,
            })
        }
    }

    pub fn states(&self) -> Vec<BodyState<S>> {
        self.bodies.iter().map(|b| b.state).collect()
    }
}

/// Free-function form of [`World::step`].
pub fn step<S: Real>(mut world: World<S>, cfg: &WorldConfig) -> Result<World<S>> {
    world.step(cfg)?;
    Ok(world)
}
