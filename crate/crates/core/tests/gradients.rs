mod common;

use common::{gradient_check, short};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toolmorph_core::diffsim::{Dual, Real};
use toolmorph_core::scenarios::ScenarioId;

#[test]
fn tangents_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for id in ScenarioId::ALL {
        let s = short(id, 40);
        let r = gradient_check(&s, &mut rng, 4, 1e-5);
        assert!(
            r.within_1e3 * 100 >= 95 * r.total && r.within_1e2 == r.total,
            "{id}: {}/{} within 1e-3, worst {:.2e}",
            r.within_1e3,
            r.total,
            r.worst
        );
    }
}

#[test]
fn reaching_gradient_matches_closed_form_tip() {
    // with zero actions the tip stays at the start pose and the loss
    // depends on the link lengths only through the tip position
    let s = short(ScenarioId::Reaching, 20);
    let v = s.variation(0, 0);
    let theta = vec![0.12, 0.2];
    let t = s.rollout::<Dual>(&v, &theta).unwrap();
    let p = t.channel("p").unwrap();
    let q = match v.initial {
        toolmorph_core::scenarios::InitialState::Reaching { joint_angles } => joint_angles,
        _ => unreachable!(),
    };
    let dt = s.spec.world.dt;
    let (mut a, mut b) = (q[0], q[0] + q[1]);
    let u = s.spec.policy.command(1);
    a += u[0] * dt;
    b += u[0] * dt + u[1] * dt;
    let row = p.at(1);
    assert!((row[0].gradient(2)[0] - a.cos()).abs() < 1e-12);
    assert!((row[0].gradient(2)[1] - b.cos()).abs() < 1e-12);
    assert!((row[1].gradient(2)[0] - a.sin()).abs() < 1e-12);
    assert!((row[1].value() - (0.12 * a.sin() + 0.2 * b.sin())).abs() < 1e-12);
}
