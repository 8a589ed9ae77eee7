//! Smooth penalty contact between points (or discs) and polygons.
//!
//! Penetration is relaxed with a softplus so the normal force is C¹ in all
//! inputs; Coulomb friction is smoothed with `tanh(v_t / v_eps)`.

use super::body::WorldConfig;
use super::real::Real;
use super::vec2::Vec2;

/// Contacts with `beta * gap` above this are skipped; the softplus force
/// there is below `k_n * exp(-40) / beta`.
const SEPARATION_CUTOFF: f64 = 40.0;

/// A closed counter-clockwise polygon in world coordinates.
#[derive(Clone, Debug)]
pub struct Polygon<S> {
    pub vertices: Vec<Vec2<S>>,
    values: Vec<[f64; 2]>,
    center: [f64; 2],
    radius: f64,
}

impl<S: Real> Polygon<S> {
    pub fn new(vertices: Vec<Vec2<S>>) -> Self {
        let values: Vec<[f64; 2]> = vertices.iter().map(|v| v.values()).collect();
        let n = values.len() as f64;
        let center = [
            values.iter().map(|v| v[0]).sum::<f64>() / n,
            values.iter().map(|v| v[1]).sum::<f64>() / n,
        ];
        let radius = values
            .iter()
            .map(|v| (v[0] - center[0]).hypot(v[1] - center[1]))
            .fold(0.0, f64::max);
        Polygon {
            vertices,
            values,
            center,
            radius,
        }
    }

    /// Body-frame vertices placed at `position`, rotated by `angle`.
    pub fn placed(local: &[Vec2<S>], position: Vec2<S>, angle: S) -> Self {
        let (c, s) = (angle.cos(), angle.sin());
        Polygon::new(local.iter().map(|v| position + v.rotate(c, s)).collect())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Lower bound on the distance from `p` to the polygon.
    fn distance_lower_bound(&self, p: [f64; 2]) -> f64 {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) - self.radius
    }

    fn contains_value(&self, p: [f64; 2]) -> bool {
        crate::geometry::winding_number(&self.values, p) != 0
    }
}

/// Rigid motion of a surface, used for relative contact velocities.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceMotion<S> {
    pub linear: Vec2<S>,
    pub angular: S,
    pub origin: Vec2<S>,
}

impl<S: Real> SurfaceMotion<S> {
    pub fn fixed() -> Self {
        SurfaceMotion {
            linear: Vec2::zero(),
            angular: S::zero(),
            origin: Vec2::zero(),
        }
    }

    pub fn velocity_at(&self, q: Vec2<S>) -> Vec2<S> {
        self.linear + (q - self.origin).perp().scale(self.angular)
    }
}

/// A contact probe: a point, or a disc when `radius > 0`.
#[derive(Clone, Copy, Debug)]
pub struct Probe<S> {
    pub position: Vec2<S>,
    pub velocity: Vec2<S>,
    pub radius: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct SignedDistance<S> {
    /// Negative inside the polygon.
    pub distance: S,
    pub closest: Vec2<S>,
    /// Outward unit normal at the closest point.
    pub normal: Vec2<S>,
}

pub fn signed_distance<S: Real>(p: Vec2<S>, poly: &Polygon<S>) -> SignedDistance<S> {
    let pv = p.values();
    let n = poly.len();
    let (mut best, mut best_d2) = (0, f64::INFINITY);
    for i in 0..n {
        let (a, b) = (poly.values[i], poly.values[(i + 1) % n]);
        let d = crate::geometry::distance_to_segment(pv, a, b);
        if d * d < best_d2 {
            best_d2 = d * d;
            best = i;
        }
    }
    let a = poly.vertices[best];
    let e = poly.vertices[(best + 1) % n] - a;
    let len2 = e.norm_sq();
    let t = (p - a).dot(e) / len2;
    let closest = if t.value() <= 0.0 {
        a
    } else if t.value() >= 1.0 {
        a + e
    } else {
        a + e.scale(t)
    };
    let inside = poly.contains_value(pv);
    let diff = p - closest;
    let dist = diff.norm();
    let (distance, normal) = if dist.value() > 1e-12 {
        let sd = if inside { -dist } else { dist };
        (sd, diff.scale(S::cst(1.0) / sd))
    } else {
        let en = Vec2::new(e.y, -e.x);
        (S::zero(), en.scale(S::cst(1.0) / len2.sqrt()))
    };
    SignedDistance {
        distance,
        closest,
        normal,
    }
}

/// Penalty force for a penetration `depth` along outward normal `normal`
/// with relative velocity `v_rel` (probe minus surface).
fn penalty_force<S: Real>(depth: S, normal: Vec2<S>, v_rel: Vec2<S>, cfg: &WorldConfig) -> Vec2<S> {
    let beta = cfg.softplus_sharpness;
    let elastic = depth.softplus(beta) * cfg.contact_stiffness;
    let v_n = v_rel.dot(normal);
    let damping = v_n * depth.sigmoid(beta) * cfg.contact_damping;
    let tangent = normal.perp();
    let v_t = v_rel.dot(tangent);
    let friction = elastic * (v_t / cfg.tangential_smoothing).tanh() * cfg.friction_coefficient;
    normal.scale(elastic - damping) - tangent.scale(friction)
}

/// Contact force on `probe` from `poly` moving with `motion`, or `None`
/// when the pair is separated beyond the softplus tail.
pub fn contact_force<S: Real>(
    probe: &Probe<S>,
    poly: &Polygon<S>,
    motion: &SurfaceMotion<S>,
    cfg: &WorldConfig,
) -> Option<Vec2<S>> {
    let beta = cfg.softplus_sharpness;
    if beta * (poly.distance_lower_bound(probe.position.values()) - probe.radius) > SEPARATION_CUTOFF {
        return None;
    }
    let sd = signed_distance(probe.position, poly);
    let depth = -(sd.distance - probe.radius);
    if -beta * depth.value() > SEPARATION_CUTOFF {
        return None;
    }
    let v_rel = probe.velocity - motion.velocity_at(sd.closest);
    Some(penalty_force(depth, sd.normal, v_rel, cfg))
}

/// Contact with the half-plane `y <= height` (a static floor).
pub fn floor_force<S: Real>(probe: &Probe<S>, height: f64, cfg: &WorldConfig) -> Option<Vec2<S>> {
    let depth = -(probe.position.y - height - probe.radius);
    if -cfg.softplus_sharpness * depth.value() > SEPARATION_CUTOFF {
        return None;
    }
    Some(penalty_force(depth, Vec2::cst(0.0, 1.0), probe.velocity, cfg))
}

/// Zero-rest-length spring-damper pulling `a` toward `b`; returns the
/// force on `a` (the force on `b` is its negation).
pub fn joint_force<S: Real>(
    a: Vec2<S>,
    va: Vec2<S>,
    b: Vec2<S>,
    vb: Vec2<S>,
    stiffness: f64,
    damping: f64,
) -> Vec2<S> {
    (b - a) * stiffness + (vb - va) * damping
}
