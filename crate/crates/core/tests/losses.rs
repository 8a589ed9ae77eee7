mod common;

use std::f64::consts::FRAC_PI_2;

use common::{dd_sum, short, DD};
use proptest::prelude::*;
use toolmorph_core::continual::{batch_distill_loss, batch_task_loss, combined_loss, DistillationSet};
use toolmorph_core::diffsim::{Channel, Dual, Real, Trajectory};
use toolmorph_core::scenarios::losses::*;
use toolmorph_core::scenarios::{ScenarioId, TaskVariation};

fn channel(name: &str, width: usize, initial: Vec<f64>, rows: &[Vec<f64>]) -> Channel<f64> {
    let mut c = Channel::new(name, width, rows.len());
    c.initial = initial;
    for r in rows {
        c.push(r);
    }
    c
}

#[test]
fn flipping_loss_of_an_idle_unflipped_box() {
    let h = 50;
    let pbox = vec![0.04, 0.04];
    let traj = Trajectory::new(
        h,
        vec![
            channel("phi", 1, vec![0.0], &vec![vec![0.0]; h]),
            channel("u", 2, vec![0.0, 0.0], &vec![vec![0.0, 0.0]; h]),
            channel("p", 2, pbox.clone(), &vec![pbox.clone(); h]),
            channel("box", 2, pbox.clone(), &vec![pbox.clone(); h]),
        ],
    )
    .unwrap();
    let l = flipping_task_loss(&traj, &LossCoefficients::default()).unwrap();
    assert!((l - 50.0 * FRAC_PI_2 * FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn flipping_touch_term_stops_at_half_horizon() {
    let h = 10;
    let traj = Trajectory::new(
        h,
        vec![
            channel("phi", 1, vec![0.0], &vec![vec![FRAC_PI_2]; h]),
            channel("u", 2, vec![0.0, 0.0], &vec![vec![0.0, 0.0]; h]),
            channel("p", 2, vec![0.0, 0.0], &vec![vec![1.0, 0.0]; h]),
            channel("box", 2, vec![0.0, 0.0], &vec![vec![0.0, 0.0]; h]),
        ],
    )
    .unwrap();
    // steps 1..=4 satisfy tau < H/2
    let l = flipping_task_loss(&traj, &LossCoefficients::default()).unwrap();
    assert_eq!(l, 4.0);
}

#[test]
fn pushing_loss_spot_values() {
    let xs = LossCoefficients::default().x_scoop;
    assert!((pushing_task_loss(xs + 0.1, xs) - 0.01).abs() < 1e-15);
    assert!((pushing_task_loss(-(xs + 0.1), xs) - 0.01).abs() < 1e-15);
    assert_eq!(pushing_task_loss(0.5 * xs, xs), 0.0);
    assert_eq!(pushing_task_loss(xs, xs), 0.0);
}

#[test]
fn pushing_crossing_is_interpolated() {
    let traj = Trajectory::new(
        3,
        vec![channel(
            "pea",
            2,
            vec![0.0, 0.0],
            &[vec![0.01, 0.1], vec![0.03, 0.3], vec![0.05, 0.5]],
        )],
    )
    .unwrap();
    let x = pushing_evaluation_x(&traj, 0.22).unwrap();
    assert!((x - (0.01 + 0.02 * 0.6)).abs() < 1e-15);
    let x = pushing_evaluation_x(&traj, 0.9).unwrap();
    assert_eq!(x, 0.05);
}

#[test]
fn winding_loss_and_distill() {
    let h = 4;
    let a = Trajectory::new(h, vec![channel("h", 1, vec![1.0], &[vec![1.0], vec![0.5], vec![0.0], vec![1.0]])]).unwrap();
    assert_eq!(winding_task_loss(&a).unwrap(), 0.25 + 1.0);
    let b = Trajectory::new(h, vec![channel("h", 1, vec![1.0], &vec![vec![1.0]; h])]).unwrap();
    assert_eq!(winding_distill_loss(&a, &b).unwrap(), (0.25 + 1.0) / 4.0);
    assert_eq!(winding_distill_loss(&a, &a).unwrap(), 0.0);
}

fn variations(id: ScenarioId, n: usize, seed: u64) -> (toolmorph_core::scenarios::Scenario, Vec<TaskVariation>) {
    let s = short(id, 60);
    let v = s.sample_variations(n, seed);
    (s, v)
}

#[test]
fn batch_task_loss_matches_extended_precision_mean() {
    for id in [ScenarioId::Flipping, ScenarioId::Pushing, ScenarioId::Winding] {
        let (s, batch) = variations(id, 5, 17);
        let theta = s.spec.theta0.clone();
        let per: Vec<f64> = batch
            .iter()
            .map(|v| s.task_loss(&s.rollout::<f64>(v, &theta).unwrap()).unwrap())
            .collect();
        let oracle = dd_sum(&per).div(DD::new(5.0)).to_f64();
        let got: f64 = batch_task_loss::<_, f64>(&s, &theta, &batch).unwrap();
        assert!((got - oracle).abs() <= 1e-14 * oracle.abs().max(1e-300), "{id}: {got} vs {oracle}");
    }
}

#[test]
fn batch_of_one_and_of_copies() {
    let (s, vars) = variations(ScenarioId::Pushing, 3, 4);
    let theta = s.spec.theta0.clone();
    let single = s.task_loss(&s.rollout::<f64>(&vars[0], &theta).unwrap()).unwrap();
    let one: f64 = batch_task_loss::<_, f64>(&s, &theta, &vars[..1]).unwrap();
    assert_eq!(one, single);
    let copies = vec![vars[0].clone(); 5];
    let l: f64 = batch_task_loss::<_, f64>(&s, &theta, &copies).unwrap();
    assert!((l - single).abs() <= 1e-15 * single.abs());
}

#[test]
fn distill_is_zero_at_the_anchor_for_every_scenario() {
    for id in ScenarioId::ALL {
        let (s, vars) = variations(id, 4, 8);
        let theta: Vec<f64> = s
            .spec
            .lower
            .iter()
            .zip(&s.spec.upper)
            .map(|(l, u)| l + 0.37 * (u - l))
            .collect();
        let set = DistillationSet::anchored(&s, &theta, vars.clone()).unwrap();
        let l: Dual = batch_distill_loss(&s, &theta, &set).unwrap();
        assert_eq!(l.value(), 0.0, "{id}");
        assert!(l.gradient(s.dim()).iter().all(|&g| g == 0.0), "{id}");
        let c: Dual = combined_loss(&s, &theta, &vars[..2], &set, 0.1).unwrap();
        let t: Dual = batch_task_loss(&s, &theta, &vars[..2]).unwrap();
        assert_eq!(c, t, "{id}");
    }
}

#[test]
fn distill_and_combined_match_componentwise_recomputation() {
    let (s, vars) = variations(ScenarioId::Flipping, 5, 21);
    let prev = s.spec.theta0.clone();
    let mut theta = prev.clone();
    theta[2] += 0.004;
    theta[7] -= 0.003;
    let set = DistillationSet::anchored(&s, &prev, vars[..3].to_vec()).unwrap();
    let per: Vec<f64> = vars[..3]
        .iter()
        .map(|v| {
            let new = s.rollout::<f64>(v, &theta).unwrap();
            let old = s.rollout::<f64>(v, &prev).unwrap();
            s.distill_loss(&new, &old).unwrap()
        })
        .collect();
    let oracle = dd_sum(&per).div(DD::new(3.0)).to_f64();
    let d: f64 = batch_distill_loss(&s, &theta, &set).unwrap();
    assert!(oracle > 0.0);
    assert!((d - oracle).abs() <= 1e-14 * oracle);
    let t: f64 = batch_task_loss(&s, &theta, &vars[3..]).unwrap();
    let c: f64 = combined_loss(&s, &theta, &vars[3..], &set, 0.1).unwrap();
    assert_eq!(c, t + d * 0.1);
    let c0: f64 = combined_loss(&s, &theta, &vars[3..], &set, 0.0).unwrap();
    assert_eq!(c0, t);
}

#[test]
fn empty_distillation_set_contributes_nothing() {
    let (s, vars) = variations(ScenarioId::Pushing, 2, 2);
    let d: f64 = batch_distill_loss(&s, &s.spec.theta0, &DistillationSet::empty()).unwrap();
    assert_eq!(d, 0.0);
    let c: f64 = combined_loss(&s, &s.spec.theta0, &vars, &DistillationSet::empty(), 0.1).unwrap();
    assert_eq!(c, batch_task_loss::<_, f64>(&s, &s.spec.theta0, &vars).unwrap());
}

proptest! {
    #[test]
    fn pushing_loss_is_even_and_nonnegative(x in -1.0f64..1.0) {
        let xs = 0.02;
        let a = pushing_task_loss(x, xs);
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a, pushing_task_loss(-x, xs));
        if x.abs() >= xs {
            prop_assert_eq!(a, (x.abs() - xs).powi(2));
        }
    }

    #[test]
    fn pushing_loss_derivative_is_exact(x in 0.021f64..1.0) {
        let d = pushing_task_loss(Dual::variable(x, 0), 0.02);
        prop_assert!((d.gradient(1)[0] - 2.0 * (x - 0.02)).abs() < 1e-15);
    }
}
