use std::io::Write;

use rayon::prelude::*;

use super::LandscapeSpec;
use crate::error::{Error, Result};
use crate::scenarios::Scenario;

/// Task loss over a grid; `loss[i * cols + j]` is at `(axis_a[i], axis_b[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct Landscape {
    pub dims: [usize; 2],
    pub axis_a: Vec<f64>,
    pub axis_b: Vec<f64>,
    pub loss: Vec<f64>,
    /// Cells whose rollout failed (stored as NaN).
    pub failed: usize,
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Dense task-loss slice with the other components held at `theta0`.
pub fn evaluate_landscape(scenario: &Scenario, spec: &LandscapeSpec) -> Result<Landscape> {
    let s = &scenario.spec;
    let d = s.dim();
    let [a, b] = spec.dims;
    if a >= d || b >= d {
        return Err(Error::config("landscape.dims", format!("index out of range for d = {d}")));
    }
    if a == b {
        return Err(Error::config("landscape.dims", "dimensions must differ"));
    }
    if spec.resolution.iter().any(|&r| r < 2) {
        return Err(Error::config("landscape.resolution", "must be at least 2 per axis"));
    }
    let ranges = spec.ranges.unwrap_or([[s.lower[a], s.upper[a]], [s.lower[b], s.upper[b]]]);
    for (k, (&dim, r)) in [a, b].iter().zip(&ranges).enumerate() {
        if !(s.lower[dim] <= r[0] && r[0] < r[1] && r[1] <= s.upper[dim]) {
            return Err(Error::config(
                format!("landscape.ranges[{k}]"),
                format!("[{}, {}] not an interval inside the bounds of dim {dim}", r[0], r[1]),
            ));
        }
    }
    let axis_a = axis(ranges[0][0], ranges[0][1], spec.resolution[0]);
    let axis_b = axis(ranges[1][0], ranges[1][1], spec.resolution[1]);
    let variation = scenario.variation(spec.seed, spec.variation);
    let cols = axis_b.len();
    let loss: Vec<f64> = (0..axis_a.len() * cols)
        .into_par_iter()
        .map(|cell| {
            let mut theta = s.theta0.clone();
            theta[a] = axis_a[cell / cols];
            theta[b] = axis_b[cell % cols];
            match scenario
                .rollout::<f64>(&variation, &theta)
                .and_then(|t| scenario.task_loss(&t))
            {
                Ok(l) => l,
                Err(e) => {
                    log::warn!("landscape cell {cell} failed: {e}");
                    f64::NAN
                }
            }
        })
        .collect();
    let failed = loss.iter().filter(|l| l.is_nan()).count();
    Ok(Landscape {
        dims: spec.dims,
        axis_a,
        axis_b,
        loss,
        failed,
    })
}

impl Landscape {
    pub fn rows(&self) -> usize {
        self.axis_a.len()
    }

    pub fn cols(&self) -> usize {
        self.axis_b.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.loss[i * self.cols() + j]
    }

    fn adjacent_differences(&self) -> Vec<f64> {
        let (r, c) = (self.rows(), self.cols());
        let mut out = Vec::with_capacity(2 * r * c);
        for i in 0..r {
            for j in 0..c {
                if j + 1 < c {
                    out.push((self.at(i, j + 1) - self.at(i, j)).abs());
                }
                if i + 1 < r {
                    out.push((self.at(i + 1, j) - self.at(i, j)).abs());
                }
            }
        }
        out.retain(|x| x.is_finite());
        out
    }

    /// Sum of absolute differences between adjacent cells divided by the
    /// value range. NaN cells are skipped; a flat slice gives 0.
    pub fn total_variation(&self) -> f64 {
        let finite = self.loss.iter().copied().filter(|x| x.is_finite());
        let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        let range = hi - lo;
        if !(range > 0.0) {
            return 0.0;
        }
        self.adjacent_differences().iter().sum::<f64>() / range
    }

    pub fn max_adjacent_difference(&self) -> f64 {
        self.adjacent_differences().into_iter().fold(0.0, f64::max)
    }

    /// Columns `row,col,theta_a,theta_b,loss`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "row,col,theta_a,theta_b,loss")?;
        for (i, a) in self.axis_a.iter().enumerate() {
            for (j, b) in self.axis_b.iter().enumerate() {
                writeln!(out, "{i},{j},{a},{b},{}", self.at(i, j))?;
            }
        }
        Ok(())
    }
}
