//! Planar differentiable rigid-body simulation.
//!
//! State variables are generic over [`Real`]; running with [`Dual`] carries
//! the derivative of every quantity with respect to the morphology vector,
//! seeded from the tool's deformation sensitivities by [`seed_shape`].

mod body;
mod contact;
mod real;
mod trajectory;
mod vec2;

pub use body::{step, BodyState, Motion, RigidBody, World, WorldConfig, BLOWUP_LIMIT};
pub use contact::{
    contact_force, floor_force, joint_force, signed_distance, Polygon, Probe, SignedDistance,
    SurfaceMotion,
};
pub use real::{Dual, Real, MAX_PARAMS};
pub use trajectory::{Channel, Trajectory};
pub use vec2::Vec2;

use crate::error::{Error, Result};
use crate::geometry::DeformedShape;

/// Collision vertices whose tangents are the deformation sensitivities.
pub fn seed_shape<S: Real>(deformed: &DeformedShape, dim: usize) -> Result<Vec<Vec2<S>>> {
    if dim > MAX_PARAMS {
        return Err(Error::DimensionMismatch {
            expected: MAX_PARAMS,
            found: dim,
        });
    }
    if deformed.vertex_sensitivities.len() != deformed.vertices.len() {
        return Err(Error::DimensionMismatch {
            expected: deformed.vertices.len(),
            found: deformed.vertex_sensitivities.len(),
        });
    }
    deformed
        .vertices
        .iter()
        .zip(&deformed.vertex_sensitivities)
        .map(|(v, [sx, sy])| {
            if sx.len() != dim || sy.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: sx.len().max(sy.len()),
                });
            }
            Ok(Vec2::new(S::seeded(v[0], sx), S::seeded(v[1], sy)))
        })
        .collect()
}
