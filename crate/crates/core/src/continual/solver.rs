//! Box-constrained quasi-Newton minimization over a subset of coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once the projected gradient norm falls below this.
    pub grad_tol: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 30,
            grad_tol: 1e-6,
            armijo: 1e-4,
            backtrack: 0.5,
            max_backtracks: 30,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol >= 0.0) {
            return Err(Error::config("solver.grad_tol", "must be non-negative"));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return Err(Error::config("solver.armijo", "must be in (0, 1)"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::config("solver.backtrack", "must be in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub value: f64,
    /// Projected gradient norm on the active coordinates at `x`.
    pub grad_norm: f64,
    pub iterations: usize,
    /// Number of objective evaluations, including the first.
    pub evaluations: usize,
}

fn projected_gradient(z: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    z.iter()
        .zip(g)
        .zip(lo.iter().zip(hi))
        .map(|((&z, &g), (&l, &h))| ((z - g).clamp(l, h) - z).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn scaled_identity(n: usize, s: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { s } else { 0.0 }).collect())
        .collect()
}

/// Minimizes `f` over the coordinates in `active`, holding the rest of `x0`
/// fixed, inside `[lower, upper]`.
///
/// Projected BFGS with Armijo backtracking along the projection arc. The
/// inverse Hessian starts at `(step_scale / |g|) I`, so the first trial
/// step has length `step_scale`. Accepted steps never increase `f`.
pub fn minimize<F>(
    mut f: F,
    x0: &[f64],
    active: &[usize],
    lower: &[f64],
    upper: &[f64],
    step_scale: f64,
    cfg: &SolverConfig,
) -> Result<SolveReport>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = active.len();
    let lo: Vec<f64> = active.iter().map(|&i| lower[i]).collect();
    let hi: Vec<f64> = active.iter().map(|&i| upper[i]).collect();
    let mut x = x0.to_vec();
    let (mut fx, gfull) = f(&x)?;
    let mut evaluations = 1;
    let mut g: Vec<f64> = active.iter().map(|&i| gfull[i]).collect();
    let mut z: Vec<f64> = active.iter().map(|&i| x[i]).collect();
    let mut pg = projected_gradient(&z, &g, &lo, &hi);
    let gn = dot(&g, &g).sqrt();
    let mut hinv = scaled_identity(n, if gn > 0.0 { step_scale / gn } else { step_scale });
    let mut iterations = 0;

    while iterations < cfg.max_iterations && pg > cfg.grad_tol && fx.is_finite() {
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&hinv[i], &g)).collect();
        if dot(&d, &g) >= 0.0 {
            let gn = dot(&g, &g).sqrt();
            hinv = scaled_identity(n, step_scale / gn);
            d = g.iter().map(|v| -v * step_scale / gn).collect();
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let zn: Vec<f64> = (0..n).map(|i| (z[i] + t * d[i]).clamp(lo[i], hi[i])).collect();
            let s: Vec<f64> = (0..n).map(|i| zn[i] - z[i]).collect();
            let decrease = dot(&g, &s);
            if decrease >= 0.0 {
                // the projected arc is not a descent direction
                t *= cfg.backtrack;
                continue;
            }
            let mut xn = x.clone();
            for (k, &i) in active.iter().enumerate() {
                xn[i] = zn[k];
            }
            let (fn_, gfull) = f(&xn)?;
            evaluations += 1;
            if fn_.is_finite() && fn_ <= fx + cfg.armijo * decrease {
                accepted = Some((xn, zn, s, fn_, gfull));
                break;
            }
            t *= cfg.backtrack;
        }
        let Some((xn, zn, s, fn_, gfull)) = accepted else {
            break;
        };
        let gn: Vec<f64> = active.iter().map(|&i| gfull[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| gn[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            let hy: Vec<f64> = (0..n).map(|i| dot(&hinv[i], &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..n {
                for j in 0..n {
                    hinv[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
        }
        x = xn;
        z = zn;
        g = gn;
        fx = fn_;
        pg = projected_gradient(&z, &g, &lo, &hi);
        iterations += 1;
    }
    Ok(SolveReport {
        x,
        value: fx,
        grad_norm: pg,
        iterations,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(a: &[f64]) -> impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)> + '_ {
        move |x: &[f64]| {
            let v = x.iter().zip(a).map(|(x, a)| (x - a).powi(2) * 3.0).sum();
            Ok((v, x.iter().zip(a).map(|(x, a)| 6.0 * (x - a)).collect()))
        }
    }

    #[test]
    fn reaches_clamped_minimum() {
        let a = [0.3, -2.0, 0.7];
        let r = minimize(quad(&a), &[0.0; 3], &[0, 1, 2], &[-1.0; 3], &[1.0; 3], 0.1, &SolverConfig::default()).unwrap();
        for (x, e) in r.x.iter().zip([0.3, -1.0, 0.7]) {
            assert!((x - e).abs() < 1e-8, "{x} vs {e}");
        }
    }

    #[test]
    fn inactive_coordinates_are_untouched() {
        let a = [0.3, -0.2, 0.7];
        let x0 = [0.1234567, 0.5, 0.9];
        let r = minimize(quad(&a), &x0, &[1], &[-1.0; 3], &[1.0; 3], 0.1, &SolverConfig::default()).unwrap();
        assert_eq!(r.x[0].to_bits(), x0[0].to_bits());
        assert_eq!(r.x[2].to_bits(), x0[2].to_bits());
        assert!((r.x[1] + 0.2).abs() < 1e-8);
    }

    #[test]
    fn stationary_start_does_not_move() {
        let a = [0.3, 0.4];
        let r = minimize(quad(&a), &a, &[0, 1], &[-1.0; 2], &[1.0; 2], 0.1, &SolverConfig::default()).unwrap();
        assert_eq!(r.x, a.to_vec());
        assert_eq!(r.iterations, 0);
    }
}
