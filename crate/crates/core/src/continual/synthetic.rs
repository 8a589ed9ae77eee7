//! Closed-form pipelines for checking the optimizers.

use crate::diffsim::{Channel, Real, Trajectory};
use crate::error::Result;

use super::Pipeline;

/// Separable quadratic `sum_k (theta_k - a_k - s)^2`, where a variation is
/// `(index, s)`.
///
/// With `tracked` set, the recorded trajectory exposes the residuals to the
/// distillation loss; otherwise the distillation channel is constant and
/// the distillation term is identically zero.
#[derive(Clone, Debug)]
pub struct Quadratic {
    pub target: Vec<f64>,
    pub theta0: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub tracked: bool,
}

impl Quadratic {
    /// Targets `0.1 k - 0.2` in the box `[-1, 1]^d`, starting at zero.
    pub fn new(d: usize) -> Self {
        Quadratic {
            target: (0..d).map(|k| 0.1 * k as f64 - 0.2).collect(),
            theta0: vec![0.0; d],
            lower: vec![-1.0; d],
            upper: vec![1.0; d],
            tracked: true,
        }
    }

    /// Box-constrained minimizer of the mean loss over `shifts`.
    pub fn optimum(&self, shifts: &[f64]) -> Vec<f64> {
        let s = shifts.iter().sum::<f64>() / shifts.len() as f64;
        (0..self.target.len())
            .map(|k| (self.target[k] + s).clamp(self.lower[k], self.upper[k]))
            .collect()
    }
}

impl Pipeline for Quadratic {
    type Variation = (usize, f64);

    fn dim(&self) -> usize {
        self.target.len()
    }

    fn theta0(&self) -> &[f64] {
        &self.theta0
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn variation_index(&self, v: &(usize, f64)) -> usize {
        v.0
    }

    fn rollout<S: Real>(&self, v: &(usize, f64), theta: &[f64]) -> Result<Trajectory<S>> {
        let d = self.dim();
        let mut r = Channel::new("r", d, 1);
        let mut y = Channel::new("y", d, 1);
        r.initial = vec![S::zero(); d];
        y.initial = vec![S::zero(); d];
        let res: Vec<S> = (0..d)
            .map(|k| {
                let mut t = vec![0.0; d];
                t[k] = 1.0;
                S::seeded(theta[k], &t) - (self.target[k] + v.1)
            })
            .collect();
        r.push(&res);
        if self.tracked {
            y.push(&res);
        } else {
            y.push(&vec![S::zero(); d]);
        }
        Trajectory::new(1, vec![r, y])
    }

    fn task_loss<S: Real>(&self, traj: &Trajectory<S>) -> Result<S> {
        let mut s = S::zero();
        for &r in traj.channel("r")?.last() {
            s += r.sqr();
        }
        Ok(s)
    }

    fn distill_loss<S: Real>(&self, new: &Trajectory<S>, old: &Trajectory<f64>) -> Result<S> {
        let mut s = S::zero();
        for (a, b) in new.channel("y")?.last().iter().zip(old.channel("y")?.last()) {
            s += (*a - *b).sqr();
        }
        Ok(s)
    }
}
