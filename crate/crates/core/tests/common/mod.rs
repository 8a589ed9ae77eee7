#![allow(dead_code)]

use rand::Rng;
use toolmorph_core::diffsim::{Dual, Trajectory};
use toolmorph_core::geometry::Point;
use toolmorph_core::scenarios::{Scenario, ScenarioId, ScenarioSpec};

/// Double-double number `hi + lo` with about 106 bits of mantissa.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub fn new(x: f64) -> Self {
        DD { hi: x, lo: 0.0 }
    }

    fn norm(hi: f64, lo: f64) -> Self {
        let (h, l) = two_sum(hi, lo);
        DD { hi: h, lo: l }
    }

    pub fn add(self, o: DD) -> DD {
        let (s, e) = two_sum(self.hi, o.hi);
        DD::norm(s, e + self.lo + o.lo)
    }

    pub fn neg(self) -> DD {
        DD {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    pub fn sub(self, o: DD) -> DD {
        self.add(o.neg())
    }

    pub fn mul(self, o: DD) -> DD {
        let (p, e) = two_prod(self.hi, o.hi);
        DD::norm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    pub fn div(self, o: DD) -> DD {
        let q1 = self.hi / o.hi;
        let r = self.sub(o.mul(DD::new(q1)));
        let q2 = r.hi / o.hi;
        let r = r.sub(o.mul(DD::new(q2)));
        let q3 = r.hi / o.hi;
        DD::norm(q1, q2).add(DD::new(q3))
    }

    pub fn sqrt(self) -> DD {
        if self.hi <= 0.0 {
            return DD::new(0.0);
        }
        let x = DD::new(self.hi.sqrt());
        // one Newton step doubles the precision
        x.add(self.sub(x.mul(x)).div(x.add(x)))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

/// Mean value coordinates evaluated in double-double arithmetic.
pub fn mvc_dd(x: Point, cage: &[Point]) -> Vec<f64> {
    let n = cage.len();
    let s: Vec<[DD; 2]> = cage
        .iter()
        .map(|c| [DD::new(c[0]).sub(DD::new(x[0])), DD::new(c[1]).sub(DD::new(x[1]))])
        .collect();
    let r: Vec<DD> = s.iter().map(|v| v[0].mul(v[0]).add(v[1].mul(v[1])).sqrt()).collect();
    let t: Vec<DD> = (0..n)
        .map(|j| {
            let (a, b) = (s[j], s[(j + 1) % n]);
            let cross = a[0].mul(b[1]).sub(a[1].mul(b[0]));
            let dot = a[0].mul(b[0]).add(a[1].mul(b[1]));
            cross.div(r[j].mul(r[(j + 1) % n]).add(dot))
        })
        .collect();
    let w: Vec<DD> = (0..n).map(|j| t[(j + n - 1) % n].add(t[j]).div(r[j])).collect();
    let total = w.iter().fold(DD::new(0.0), |acc, &v| acc.add(v));
    w.iter().map(|v| v.div(total).to_f64()).collect()
}

pub fn dd_sum(xs: &[f64]) -> DD {
    xs.iter().fold(DD::new(0.0), |acc, &v| acc.add(DD::new(v)))
}

/// Star-shaped cage around the origin: sorted angles and radii in
/// `[rmin, 1]` (convex when `rmin = 1`).
pub fn random_cage<R: Rng>(rng: &mut R, n: usize, rmin: f64) -> Vec<Point> {
    let mut angles: Vec<f64> = (0..n)
        .map(|k| (k as f64 + rng.gen_range(0.3..0.7)) * std::f64::consts::TAU / n as f64)
        .collect();
    angles.sort_by(f64::total_cmp);
    angles
        .iter()
        .map(|a| {
            let r = if rmin >= 1.0 { 1.0 } else { rng.gen_range(rmin..1.0) };
            [r * a.cos(), r * a.sin()]
        })
        .collect()
}

/// A point strictly inside a star-shaped cage: a point on a random edge
/// pulled toward the origin.
pub fn interior_point<R: Rng>(rng: &mut R, cage: &[Point]) -> Point {
    let j = rng.gen_range(0..cage.len());
    let (a, b) = (cage[j], cage[(j + 1) % cage.len()]);
    let s = rng.gen_range(0.0..1.0);
    let t = rng.gen_range(0.05..0.95);
    [t * (a[0] + s * (b[0] - a[0])), t * (a[1] + s * (b[1] - a[1]))]
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Scenario at desk scale with the horizon cut to `h`.
pub fn short(id: ScenarioId, h: usize) -> Scenario {
    let mut spec = ScenarioSpec::desk(id);
    spec.world.horizon = h;
    Scenario::new(spec).unwrap()
}

pub struct GradCheck {
    pub total: usize,
    pub within_1e3: usize,
    pub within_1e2: usize,
    pub worst: f64,
}

/// Forward-mode gradient vs central differences with step `h` over
/// `pairs` random (theta, variation) pairs.
pub fn gradient_check<R: Rng>(s: &Scenario, rng: &mut R, pairs: usize, h: f64) -> GradCheck {
    let mut out = GradCheck {
        total: 0,
        within_1e3: 0,
        within_1e2: 0,
        worst: 0.0,
    };
    let d = s.dim();
    for pair in 0..pairs {
        let theta: Vec<f64> = (0..d)
            .map(|k| {
                let (l, u) = (s.spec.lower[k], s.spec.upper[k]);
                rng.gen_range(l + 0.05 * (u - l)..u - 0.05 * (u - l))
            })
            .collect();
        let v = s.variation(1000, pair);
        let t: Trajectory<Dual> = s.rollout(&v, &theta).unwrap();
        let g = s.task_loss(&t).unwrap().gradient(d);
        for k in 0..d {
            let f = |dx: f64| {
                let mut th = theta.clone();
                th[k] += dx;
                let t: Trajectory<f64> = s.rollout(&v, &th).unwrap();
                s.task_loss(&t).unwrap()
            };
            let fd = (f(h) - f(-h)) / (2.0 * h);
            let rel = relative_error(g[k], fd);
            out.total += 1;
            out.within_1e3 += (rel < 1e-3) as usize;
            out.within_1e2 += (rel < 1e-2) as usize;
            out.worst = out.worst.max(rel);
        }
    }
    out
}
