//! Per-scenario task and distillation losses over simulated trajectories.
//!
//! Distillation losses compare a trajectory under the current parameters
//! against a reference trajectory whose values are treated as constants.

use crate::diffsim::{Real, Trajectory};
use crate::error::{Error, Result};

/// Flipping / Reaching weights; `x_scoop`, `y_scoop` describe the scoop
/// opening for Pushing.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossCoefficients {
    pub c_u: f64,
    pub c_flip: f64,
    /// Weight of the fingertip term for steps `tau < H/2` (zero afterwards).
    pub c_touch: f64,
    pub c_p: f64,
    pub x_scoop: f64,
    pub y_scoop: f64,
}

impl Default for LossCoefficients {
    fn default() -> Self {
        LossCoefficients {
            c_u: 5.0,
            c_flip: 50.0,
            c_touch: 1.0,
            c_p: 10.0,
            x_scoop: 0.02,
            y_scoop: 0.22,
        }
    }
}

fn check_horizons<S, T>(a: &Trajectory<S>, b: &Trajectory<T>) -> Result<()> {
    if a.horizon != b.horizon {
        return Err(Error::HorizonMismatch(a.horizon, b.horizon));
    }
    Ok(())
}

/// Sum over steps and components of `(new - old)^2` for one channel.
pub(super) fn channel_gap<S: Real, T: Real>(new: &Trajectory<S>, old: &Trajectory<T>, name: &str) -> Result<S> {
    let (a, b) = (new.channel(name)?, old.channel(name)?);
    if a.data.len() != b.data.len() {
        return Err(Error::HorizonMismatch(a.steps(), b.steps()));
    }
    let mut sum = S::zero();
    for (x, y) in a.data.iter().zip(&b.data) {
        sum += (*x - y.value()).sqr();
    }
    Ok(sum)
}

/// `sum_{tau=1..H} (h_tau - h_0)^2` with `h_0` the rope COM height at step 0.
pub fn winding_task_loss<S: Real>(traj: &Trajectory<S>) -> Result<S> {
    let h = traj.channel("h")?;
    let h0 = *h.initial.first().ok_or_else(|| Error::MissingChannel("h[0]".into()))?;
    let mut sum = S::zero();
    for v in &h.data {
        sum += (*v - h0).sqr();
    }
    Ok(sum)
}

/// `(1/H) sum_tau (h_tau(new) - h_tau(old))^2`.
pub fn winding_distill_loss<S: Real, T: Real>(new: &Trajectory<S>, old: &Trajectory<T>) -> Result<S> {
    check_horizons(new, old)?;
    Ok(channel_gap(new, old, "h")? / new.horizon as f64)
}

/// `c_flip (phi_H - pi/2)^2 + sum_tau c_u |u_tau|^2 + c_touch(tau) |p_tau - p_box|^2`,
/// where `c_touch(tau) = c_touch` for `tau < H/2` and 0 otherwise, and
/// `p_box` is the box position at step 0.
pub fn flipping_task_loss<S: Real>(traj: &Trajectory<S>, coeffs: &LossCoefficients) -> Result<S> {
    let phi = traj.channel("phi")?;
    let u = traj.channel("u")?;
    let p = traj.channel("p")?;
    let boxc = traj.channel("box")?;
    let p_box = [boxc.initial[0], boxc.initial[1]];
    let h = traj.horizon;
    let flip = (phi.last()[0] - std::f64::consts::FRAC_PI_2).sqr() * coeffs.c_flip;
    let mut effort = S::zero();
    let mut touch = S::zero();
    for tau in 1..=h {
        for &uk in u.at(tau) {
            effort += uk.sqr();
        }
        if (tau as f64) < h as f64 / 2.0 {
            let pt = p.at(tau);
            touch += (pt[0] - p_box[0]).sqr() + (pt[1] - p_box[1]).sqr();
        }
    }
    Ok(flip + effort * coeffs.c_u + touch * coeffs.c_touch)
}

/// `(1/H) sum_tau [|u - u'|^2 + |p - p'|^2 + (phi - phi')^2]`.
pub fn flipping_distill_loss<S: Real, T: Real>(new: &Trajectory<S>, old: &Trajectory<T>) -> Result<S> {
    check_horizons(new, old)?;
    let sum = channel_gap(new, old, "u")? + channel_gap(new, old, "p")? + channel_gap(new, old, "phi")?;
    Ok(sum / new.horizon as f64)
}

/// Pea x coordinate where the pea first reaches `y_scoop`, linearly
/// interpolated between the bracketing steps; the final x if it never does.
pub fn pushing_evaluation_x<S: Real>(traj: &Trajectory<S>, y_scoop: f64) -> Result<S> {
    let pea = traj.channel("pea")?;
    let (mut x_prev, mut y_prev) = (pea.initial[0], pea.initial[1]);
    if y_prev.value() >= y_scoop {
        return Ok(x_prev);
    }
    for tau in 1..=traj.horizon {
        let row = pea.at(tau);
        let (x, y) = (row[0], row[1]);
        if y.value() >= y_scoop {
            let s = (S::cst(y_scoop) - y_prev) / (y - y_prev);
            return Ok(x_prev + (x - x_prev) * s);
        }
        x_prev = x;
        y_prev = y;
    }
    Ok(x_prev)
}

/// Zero inside the opening `|x| < x_scoop`, `(|x| - x_scoop)^2` otherwise.
pub fn pushing_task_loss<S: Real>(final_pea_x: S, x_scoop: f64) -> S {
    let a = final_pea_x.abs();
    if a.value() < x_scoop {
        S::zero()
    } else {
        (a - x_scoop).sqr()
    }
}

/// `sum_tau (x - x')^2 + (y - y')^2` over the pea path (not normalized by H).
pub fn pushing_distill_loss<S: Real, T: Real>(new: &Trajectory<S>, old: &Trajectory<T>) -> Result<S> {
    check_horizons(new, old)?;
    channel_gap(new, old, "pea")
}

/// `sum_tau c_u |u_tau|^2 + c_p |p_tau - target_tau|` (the position term is
/// not squared).
pub fn reaching_task_loss<S: Real>(
    traj: &Trajectory<S>,
    coeffs: &LossCoefficients,
    targets: &[[f64; 2]],
) -> Result<S> {
    let u = traj.channel("u")?;
    let p = traj.channel("p")?;
    if targets.len() < traj.horizon {
        return Err(Error::HorizonMismatch(traj.horizon, targets.len()));
    }
    let mut sum = S::zero();
    for tau in 1..=traj.horizon {
        let mut effort = S::zero();
        for &uk in u.at(tau) {
            effort += uk.sqr();
        }
        let pt = p.at(tau);
        let t = targets[tau - 1];
        let gap = ((pt[0] - t[0]).sqr() + (pt[1] - t[1]).sqr()).sqrt();
        sum += effort * coeffs.c_u + gap * coeffs.c_p;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffsim::{Channel, Dual};
    use std::f64::consts::FRAC_PI_2;

    pub(crate) fn channel(name: &str, width: usize, initial: Vec<f64>, rows: Vec<Vec<f64>>) -> Channel<f64> {
        Channel {
            name: name.into(),
            width,
            initial,
            data: rows.into_iter().flatten().collect(),
        }
    }

    fn heights(h0: f64, hs: &[f64]) -> Trajectory<f64> {
        Trajectory::new(
            hs.len(),
            vec![channel("h", 1, vec![h0], hs.iter().map(|&h| vec![h]).collect())],
        )
        .unwrap()
    }

    fn flip_traj(h: usize, phi_end: f64, u: [f64; 2], p: [f64; 2], p_box: [f64; 2]) -> Trajectory<f64> {
        let mut phis = vec![vec![0.0]; h];
        phis[h - 1] = vec![phi_end];
        Trajectory::new(
            h,
            vec![
                channel("phi", 1, vec![0.0], phis),
                channel("u", 2, vec![0.0, 0.0], vec![u.to_vec(); h]),
                channel("p", 2, p.to_vec(), vec![p.to_vec(); h]),
                channel("box", 2, p_box.to_vec(), vec![p_box.to_vec(); h]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn winding_zero_drop_and_monotone() {
        assert_eq!(winding_task_loss(&heights(0.3, &[0.3, 0.3, 0.3])).unwrap(), 0.0);
        let a = winding_task_loss(&heights(0.3, &[0.29, 0.28, 0.27])).unwrap();
        let b = winding_task_loss(&heights(0.3, &[0.29, 0.27, 0.27])).unwrap();
        assert!(b > a && a > 0.0);
        let e = winding_task_loss(&Trajectory::<f64>::new(1, vec![]).unwrap());
        assert!(matches!(e, Err(Error::MissingChannel(_))));
    }

    #[test]
    fn winding_distill_constant_offset() {
        let a = heights(0.3, &[0.1, 0.2, 0.3, 0.4]);
        let b = heights(0.3, &[0.15, 0.25, 0.35, 0.45]);
        assert_eq!(winding_distill_loss(&a, &a).unwrap(), 0.0);
        assert!((winding_distill_loss(&a, &b).unwrap() - 0.0025).abs() < 1e-15);
        let c = heights(0.3, &[0.1, 0.2]);
        assert!(matches!(winding_distill_loss(&a, &c), Err(Error::HorizonMismatch(4, 2))));
    }

    #[test]
    fn flipping_perfect_and_unflipped() {
        let perfect = flip_traj(10, FRAC_PI_2, [0.0, 0.0], [0.1, 0.2], [0.1, 0.2]);
        let c = LossCoefficients::default();
        assert_eq!(flipping_task_loss(&perfect, &c).unwrap(), 0.0);
        let flat = flip_traj(10, 0.0, [0.0, 0.0], [0.1, 0.2], [0.1, 0.2]);
        let expected = 50.0 * FRAC_PI_2 * FRAC_PI_2;
        assert!((flipping_task_loss(&flat, &c).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn flipping_touch_weight_is_a_step_function() {
        // H = 10: steps 1..=4 count, step 5 = H/2 does not
        let t = flip_traj(10, FRAC_PI_2, [0.0, 0.0], [0.0, 0.1], [0.0, 0.0]);
        let c = LossCoefficients::default();
        assert!((flipping_task_loss(&t, &c).unwrap() - 4.0 * 0.01).abs() < 1e-15);
    }

    #[test]
    fn flipping_distill_phi_offset() {
        let a = flip_traj(6, 0.3, [0.5, 0.0], [0.1, 0.2], [0.0, 0.0]);
        let mut b = a.clone();
        for v in &mut b.channels[0].data {
            *v += 0.1;
        }
        assert_eq!(flipping_distill_loss(&a, &a).unwrap(), 0.0);
        assert!((flipping_distill_loss(&a, &b).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn pushing_hinge_values() {
        assert_eq!(pushing_task_loss(0.0, 0.05), 0.0);
        assert!((pushing_task_loss(0.05 + 0.1, 0.05) - 0.01).abs() < 1e-15);
        assert!((pushing_task_loss(-0.05 - 0.2, 0.05) - 0.04).abs() < 1e-15);
        // C1 at the kink
        let d = pushing_task_loss(Dual::variable(0.05 + 1e-9, 0), 0.05);
        assert!(d.tangents[0].abs() < 1e-8);
    }

    #[test]
    fn pushing_crossing_is_interpolated() {
        let pea = channel(
            "pea",
            2,
            vec![0.0, 0.0],
            vec![vec![0.01, 0.1], vec![0.03, 0.3], vec![0.05, 0.5]],
        );
        let t = Trajectory::new(3, vec![pea]).unwrap();
        assert!((pushing_evaluation_x(&t, 0.2).unwrap() - 0.02).abs() < 1e-15);
        assert!((pushing_evaluation_x(&t, 0.9).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn pushing_distill_constant_offset() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![0.01 * i as f64, 0.02 * i as f64]).collect();
        let shifted: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0] + 0.1, r[1] - 0.2]).collect();
        let a = Trajectory::new(5, vec![channel("pea", 2, vec![0.0, 0.0], rows)]).unwrap();
        let b = Trajectory::new(5, vec![channel("pea", 2, vec![0.0, 0.0], shifted)]).unwrap();
        assert!((pushing_distill_loss(&a, &b).unwrap() - 5.0 * (0.01 + 0.04)).abs() < 1e-14);
    }

    #[test]
    fn reaching_linear_gap_term() {
        let h = 8;
        let t = Trajectory::new(
            h,
            vec![
                channel("u", 2, vec![0.0, 0.0], vec![vec![0.0, 0.0]; h]),
                channel("p", 2, vec![0.0, 0.0], vec![vec![0.3, 0.4]; h]),
            ],
        )
        .unwrap();
        let c = LossCoefficients {
            c_u: 0.1,
            c_p: 10.0,
            ..Default::default()
        };
        assert_eq!(reaching_task_loss(&t, &c, &vec![[0.3, 0.4]; h]).unwrap(), 0.0);
        let g = 0.05;
        let l = reaching_task_loss(&t, &c, &vec![[0.3, 0.4 + g]; h]).unwrap();
        assert!((l - 10.0 * h as f64 * g).abs() < 1e-12);
    }
}
