//! Cage-based tool parameterization.
//!
//! A morphology vector `theta` moves the vertices of a coarse cage polygon
//! through a constant affine map. The dense tool boundary follows the cage
//! through mean value coordinates computed once at the base cage, so the
//! whole chain `theta -> cage -> boundary` is affine and its derivative is
//! a constant matrix per boundary vertex.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Minimum distance between a weighted point and the cage boundary.
pub const INTERIOR_MARGIN: f64 = 1e-9;
const COINCIDENT_TOL: f64 = 1e-12;

/// The design vector with its box bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MorphParams {
    values: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl MorphParams {
    pub fn new(values: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let d = values.len();
        for len in [lower.len(), upper.len()] {
            if len != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: len,
                });
            }
        }
        let p = MorphParams {
            values,
            lower,
            upper,
        };
        p.check_bounds()?;
        Ok(p)
    }

    /// Same bounds, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        MorphParams::new(values, self.lower.clone(), self.upper.clone())
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn check_bounds(&self) -> Result<()> {
        for (k, ((&v, &lo), &hi)) in self
            .values
            .iter()
            .zip(&self.lower)
            .zip(&self.upper)
            .enumerate()
        {
            if !(lo <= v && v <= hi) {
                return Err(Error::ParamsOutOfBounds {
                    index: k,
                    value: v,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        Ok(())
    }
}

/// Affine map from the design vector to cage vertex positions:
/// `cage(theta) = base_cage + jacobian * (theta - theta0)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CageParameterization {
    pub base_cage: Vec<Point>,
    pub theta0: Vec<f64>,
    /// `2 * |C|` rows (x then y per vertex), `d` columns.
    pub jacobian: Vec<Vec<f64>>,
}

impl CageParameterization {
    pub fn new(base_cage: Vec<Point>, theta0: Vec<f64>, jacobian: Vec<Vec<f64>>) -> Result<Self> {
        let cage = CageParameterization {
            base_cage,
            theta0,
            jacobian,
        };
        cage.validate()?;
        Ok(cage)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.base_cage.len();
        if n < 3 {
            return Err(Error::config("cage", "a cage needs at least 3 vertices"));
        }
        if self.jacobian.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: self.jacobian.len(),
            });
        }
        let d = self.theta0.len();
        if let Some(row) = self.jacobian.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        check_non_degenerate(&self.base_cage)?;
        if signed_area(&self.base_cage) <= 0.0 {
            return Err(Error::config("cage", "cage vertices must be counter-clockwise"));
        }
        if !is_simple(&self.base_cage) {
            return Err(Error::config("cage", "cage polygon self-intersects"));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.theta0.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.base_cage.len()
    }

    pub fn cage(&self, theta: &[f64]) -> Vec<Point> {
        let delta: Vec<f64> = theta.iter().zip(&self.theta0).map(|(t, t0)| t - t0).collect();
        self.base_cage
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let dx: f64 = dot(&self.jacobian[2 * j], &delta);
                let dy: f64 = dot(&self.jacobian[2 * j + 1], &delta);
                [c[0] + dx, c[1] + dy]
            })
            .collect()
    }

    /// Checks that the cage stays simple and counter-clockwise at every
    /// corner of the parameter box (and at `theta0`).
    pub fn validate_over_box(&self, lower: &[f64], upper: &[f64]) -> Result<()> {
        let d = self.dim();
        let mut candidates = vec![self.theta0.clone()];
        if d <= 12 {
            for mask in 0u32..(1 << d) {
                candidates.push(
                    (0..d)
                        .map(|k| if mask & (1 << k) != 0 { upper[k] } else { lower[k] })
                        .collect(),
                );
            }
        }
        for theta in candidates {
            let c = self.cage(&theta);
            check_non_degenerate(&c)?;
            if signed_area(&c) <= 0.0 || !is_simple(&c) {
                return Err(Error::config(
                    "cage",
                    format!("cage is not simple at theta = {theta:?}"),
                ));
            }
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean value coordinates of `point` with respect to a counter-clockwise
/// cage polygon.
///
/// Uses the tangent-half-angle closed form
/// `w_j ∝ (tan(a_{j-1}/2) + tan(a_j/2)) / |c_j - x|`, where `a_j` is the
/// signed angle subtended at `x` by cage edge `(c_j, c_{j+1})`.
pub fn compute_mvc_weights(point: Point, cage: &[Point]) -> Result<Vec<f64>> {
    check_non_degenerate(cage)?;
    if !contains_strictly(cage, point, INTERIOR_MARGIN) {
        return Err(Error::PointOutsideCage { index: None });
    }
    let n = cage.len();
    let s: Vec<Point> = cage
        .iter()
        .map(|c| [c[0] - point[0], c[1] - point[1]])
        .collect();
    let r: Vec<f64> = s.iter().map(|v| v[0].hypot(v[1])).collect();
    // tan(a_j / 2) = sin(a_j) / (1 + cos(a_j)), scaled by r_j r_{j+1}
    let half_tan: Vec<f64> = (0..n)
        .map(|j| {
            let (a, b) = (s[j], s[(j + 1) % n]);
            let cross = a[0] * b[1] - a[1] * b[0];
            let dotp = a[0] * b[0] + a[1] * b[1];
            cross / (r[j] * r[(j + 1) % n] + dotp)
        })
        .collect();
    let mut w: Vec<f64> = (0..n)
        .map(|j| (half_tan[(j + n - 1) % n] + half_tan[j]) / r[j])
        .collect();
    let total: f64 = w.iter().sum();
    for wj in &mut w {
        *wj /= total;
    }
    Ok(w)
}

/// The deformable tool: cage map, base boundary and frozen MVC weights.
#[derive(Clone, Debug)]
pub struct ToolShape {
    pub cage: CageParameterization,
    pub boundary: Vec<Point>,
    pub weights: Vec<Vec<f64>>,
    sensitivities: Vec<[Vec<f64>; 2]>,
}

impl ToolShape {
    pub fn build(base_boundary: Vec<Point>, cage: CageParameterization) -> Result<Self> {
        cage.validate()?;
        let weights = base_boundary
            .iter()
            .enumerate()
            .map(|(i, &m)| {
                compute_mvc_weights(m, &cage.base_cage).map_err(|e| match e {
                    Error::PointOutsideCage { .. } => Error::PointOutsideCage { index: Some(i) },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let d = cage.dim();
        let sensitivities = weights
            .iter()
            .map(|row| {
                let mut sx = vec![0.0; d];
                let mut sy = vec![0.0; d];
                for (j, &w) in row.iter().enumerate() {
                    for k in 0..d {
                        sx[k] += w * cage.jacobian[2 * j][k];
                        sy[k] += w * cage.jacobian[2 * j + 1][k];
                    }
                }
                [sx, sy]
            })
            .collect();
        Ok(ToolShape {
            cage,
            boundary: base_boundary,
            weights,
            sensitivities,
        })
    }

    pub fn dim(&self) -> usize {
        self.cage.dim()
    }

    pub fn num_vertices(&self) -> usize {
        self.boundary.len()
    }

    /// `W * cage(theta)` with the constant per-vertex derivative.
    pub fn deform(&self, params: &MorphParams) -> Result<DeformedShape> {
        if params.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: params.dim(),
            });
        }
        params.check_bounds()?;
        Ok(self.deform_unchecked(params.values()))
    }

    pub(crate) fn deform_unchecked(&self, theta: &[f64]) -> DeformedShape {
        let at_base = theta == self.cage.theta0.as_slice();
        let cage = self.cage.cage(theta);
        let vertices = if at_base {
            self.boundary.clone()
        } else {
            self.weights
                .iter()
                .map(|row| {
                    let mut p = [0.0, 0.0];
                    for (w, c) in row.iter().zip(&cage) {
                        p[0] += w * c[0];
                        p[1] += w * c[1];
                    }
                    p
                })
                .collect()
        };
        DeformedShape {
            vertices,
            vertex_sensitivities: self.sensitivities.clone(),
        }
    }
}

/// Free-function form of [`ToolShape::build`].
pub fn build_tool_shape(base_boundary: Vec<Point>, cage: CageParameterization) -> Result<ToolShape> {
    ToolShape::build(base_boundary, cage)
}

/// Deformed boundary plus `d/dtheta` of every vertex (rows: x, y).
#[derive(Clone, Debug, PartialEq)]
pub struct DeformedShape {
    pub vertices: Vec<Point>,
    pub vertex_sensitivities: Vec<[Vec<f64>; 2]>,
}

impl DeformedShape {
    pub fn dim(&self) -> usize {
        self.vertex_sensitivities
            .first()
            .map(|s| s[0].len())
            .unwrap_or(0)
    }
}

pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum::<f64>()
        * 0.5
}

pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let area = signed_area(poly);
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let c = a[0] * b[1] - a[1] * b[0];
        cx += (a[0] + b[0]) * c;
        cy += (a[1] + b[1]) * c;
    }
    [cx / (6.0 * area), cy / (6.0 * area)]
}

fn check_non_degenerate(poly: &[Point]) -> Result<()> {
    let n = poly.len();
    for j in 0..n {
        let (a, b) = (poly[j], poly[(j + 1) % n]);
        if (a[0] - b[0]).hypot(a[1] - b[1]) <= COINCIDENT_TOL {
            return Err(Error::DegenerateCage(j, (j + 1) % n));
        }
    }
    Ok(())
}

/// Winding number of a closed polygon around `p`.
pub fn winding_number(poly: &[Point], p: Point) -> i32 {
    let n = poly.len();
    let mut wn = 0;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let side = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        if a[1] <= p[1] {
            if b[1] > p[1] && side > 0.0 {
                wn += 1;
            }
        } else if b[1] <= p[1] && side < 0.0 {
            wn -= 1;
        }
    }
    wn
}

pub fn distance_to_segment(p: Point, a: Point, b: Point) -> f64 {
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let len2 = ex * ex + ey * ey;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p[0] - a[0] - t * ex).hypot(p[1] - a[1] - t * ey)
}

pub fn distance_to_boundary(poly: &[Point], p: Point) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| distance_to_segment(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Inside a counter-clockwise polygon and at least `margin` from its boundary.
pub fn contains_strictly(poly: &[Point], p: Point, margin: f64) -> bool {
    winding_number(poly, p) != 0 && distance_to_boundary(poly, p) > margin
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on = |a: Point, b: Point, c: Point, o: f64| {
        o == 0.0
            && c[0] >= a[0].min(b[0])
            && c[0] <= a[0].max(b[0])
            && c[1] >= a[1].min(b[1])
            && c[1] <= a[1].max(b[1])
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// No two non-adjacent edges touch.
pub fn is_simple(poly: &[Point]) -> bool {
    let n = poly.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// One `x y` pair per line; the polygon closes implicitly.
pub fn polygon_to_text(vertices: &[Point]) -> String {
    let mut out = String::new();
    for v in vertices {
        writeln!(out, "{:e} {:e}", v[0], v[1]).unwrap();
    }
    out
}

pub fn parse_polygon_text(text: &str) -> Result<Vec<Point>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, line)| {
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => Ok([x, y]),
                _ => Err(Error::config(
                    format!("polygon line {}", n + 1),
                    format!("expected `x y`, got `{line}`"),
                )),
            }
        })
        .collect()
}

/// SVG document with the polygon (and optionally its cage) drawn in a
/// y-up frame.
pub fn polygon_to_svg(vertices: &[Point], cage: Option<&[Point]>) -> String {
    let all = vertices.iter().chain(cage.into_iter().flatten());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p[0]);
        y0 = y0.min(p[1]);
        x1 = x1.max(p[0]);
        y1 = y1.max(p[1]);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-6);
    let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let path = |poly: &[Point]| {
        let mut d = String::new();
        for (i, p) in poly.iter().enumerate() {
            let cmd = if i == 0 { 'M' } else { 'L' };
            write!(d, "{cmd}{:e} {:e} ", p[0], -p[1]).unwrap();
        }
        d.push('Z');
        d
    };
    let stroke = 0.004 * w.max(h);
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:e} {:e} {:e} {:e}">"#,
        x0 - pad,
        -(y1 + pad),
        w,
        h
    )
    .unwrap();
    if let Some(c) = cage {
        writeln!(
            svg,
            r#"  <path d="{}" fill="none" stroke="gray" stroke-dasharray="{:e}" stroke-width="{:e}"/>"#,
            path(c),
            3.0 * stroke,
            stroke
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"  <path d="{}" fill="steelblue" fill-opacity="0.5" stroke="black" stroke-width="{:e}"/>"#,
        path(vertices),
        stroke
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}

/// `n` points on a circle, counter-clockwise, starting at angle `phase`.
pub fn regular_polygon(center: Point, radius: f64, n: usize, phase: f64) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let a = phase + 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
        })
        .collect()
}

/// Resamples a closed polygon so every edge is split into pieces no
/// longer than `spacing`.
pub fn densify(poly: &[Point], spacing: f64) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let pieces = (len / spacing).ceil().max(1.0) as usize;
        for k in 0..pieces {
            let t = k as f64 / pieces as f64;
            out.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Vec<Point> {
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    fn square_cage(half: f64) -> CageParameterization {
        let base = vec![[-half, -half], [half, -half], [half, half], [-half, half]];
        // column 0: translate in x, column 1: move the right edge in x
        let mut jac = vec![vec![0.0; 2]; 8];
        for j in 0..4 {
            jac[2 * j][0] = 1.0;
        }
        jac[2][1] = 1.0;
        jac[4][1] = 1.0;
        CageParameterization::new(base, vec![0.0, 0.0], jac).unwrap()
    }

    #[test]
    fn centroid_of_square_has_equal_weights() {
        let w = compute_mvc_weights([0.5, 0.5], &unit_square()).unwrap();
        for wj in w {
            assert!((wj - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn boundary_point_is_rejected() {
        let e = compute_mvc_weights([0.5, 0.0], &unit_square()).unwrap_err();
        assert!(matches!(e, Error::PointOutsideCage { .. }));
        let e = compute_mvc_weights([1.5, 0.5], &unit_square()).unwrap_err();
        assert!(matches!(e, Error::PointOutsideCage { .. }));
    }

    #[test]
    fn coincident_vertices_are_degenerate() {
        let cage = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let e = compute_mvc_weights([0.2, 0.2], &cage).unwrap_err();
        assert!(matches!(e, Error::DegenerateCage(1, 2)));
    }

    #[test]
    fn small_square_weights_favor_nearest_corner() {
        let cage = square_cage(1.0);
        let boundary = vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]];
        let shape = ToolShape::build(boundary, cage).unwrap();
        for (i, row) in shape.weights.iter().enumerate() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let argmax = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0;
            assert_eq!(argmax, i);
        }
    }

    #[test]
    fn boundary_vertex_on_cage_edge_reports_index() {
        let cage = square_cage(1.0);
        let boundary = vec![[0.0, 0.0], [1.0, 0.2], [0.0, 0.5]];
        let e = ToolShape::build(boundary, cage).unwrap_err();
        assert!(matches!(e, Error::PointOutsideCage { index: Some(1) }));
    }

    #[test]
    fn circle_in_octagon_reconstructs() {
        let oct = regular_polygon([0.0, 0.0], 1.0, 8, 0.0);
        let circle = regular_polygon([0.1, -0.05], 0.7, 64, 0.3);
        let jac = vec![vec![1.0]; 16];
        let cage = CageParameterization::new(oct.clone(), vec![0.0], jac).unwrap();
        let shape = ToolShape::build(circle.clone(), cage).unwrap();
        let mut worst: f64 = 0.0;
        for (m, row) in circle.iter().zip(&shape.weights) {
            let mut p = [0.0, 0.0];
            for (w, c) in row.iter().zip(&oct) {
                p[0] += w * c[0];
                p[1] += w * c[1];
            }
            worst = worst.max((p[0] - m[0]).hypot(p[1] - m[1]));
        }
        assert!(worst < 1e-10, "max reconstruction error {worst}");
    }

    #[test]
    fn deform_at_theta0_is_exact_identity() {
        let shape = ToolShape::build(regular_polygon([0.0, 0.0], 0.5, 20, 0.1), square_cage(1.0)).unwrap();
        let p = MorphParams::new(vec![0.0, 0.0], vec![-1.0, -0.5], vec![1.0, 0.5]).unwrap();
        let d = shape.deform(&p).unwrap();
        assert_eq!(d.vertices, shape.boundary);
    }

    #[test]
    fn translation_column_shifts_every_vertex() {
        let shape = ToolShape::build(regular_polygon([0.0, 0.0], 0.5, 20, 0.1), square_cage(1.0)).unwrap();
        let p = MorphParams::new(vec![0.1, 0.0], vec![-1.0, -0.5], vec![1.0, 0.5]).unwrap();
        let d = shape.deform(&p).unwrap();
        for (a, b) in d.vertices.iter().zip(&shape.boundary) {
            assert!((a[0] - b[0] - 0.1).abs() < 1e-14);
            assert!((a[1] - b[1]).abs() < 1e-14);
        }
        for s in &d.vertex_sensitivities {
            assert!((s[0][0] - 1.0).abs() < 1e-14);
            assert!(s[1][0].abs() < 1e-14);
        }
    }

    #[test]
    fn stretch_matches_finite_difference() {
        let shape = ToolShape::build(regular_polygon([0.0, 0.0], 0.5, 20, 0.1), square_cage(1.0)).unwrap();
        let base = MorphParams::new(vec![0.05, 0.1], vec![-1.0, -0.5], vec![1.0, 0.5]).unwrap();
        let h = 1e-3;
        let bumped = base.with_values(vec![0.05, 0.1 + h]).unwrap();
        let (a, b) = (shape.deform(&base).unwrap(), shape.deform(&bumped).unwrap());
        for i in 0..a.vertices.len() {
            for c in 0..2 {
                let fd = (b.vertices[i][c] - a.vertices[i][c]) / h;
                assert!((fd - a.vertex_sensitivities[i][c][1]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn out_of_bounds_params_rejected() {
        let shape = ToolShape::build(regular_polygon([0.0, 0.0], 0.5, 20, 0.1), square_cage(1.0)).unwrap();
        let p = MorphParams::new(vec![0.0, 0.0], vec![-1.0, -0.5], vec![1.0, 0.5]).unwrap();
        let mut bad = p.clone();
        bad.values[1] = 0.7;
        assert!(matches!(shape.deform(&bad), Err(Error::ParamsOutOfBounds { index: 1, .. })));
        assert!(MorphParams::new(vec![2.0], vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn clockwise_cage_rejected() {
        let mut base = unit_square();
        base.reverse();
        let r = CageParameterization::new(base, vec![], vec![vec![]; 8]);
        assert!(r.is_err());
    }

    #[test]
    fn text_round_trip() {
        let poly = regular_polygon([0.3, -0.2], 0.123456789, 17, 0.77);
        let back = parse_polygon_text(&polygon_to_text(&poly)).unwrap();
        for (a, b) in poly.iter().zip(&back) {
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
        assert!(parse_polygon_text("1 2 3\n").is_err());
    }

    #[test]
    fn simple_polygon_detection() {
        assert!(is_simple(&unit_square()));
        let bowtie = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(!is_simple(&bowtie));
    }
}
