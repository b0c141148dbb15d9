use mobman_core::trajectory::{standard_task, reference_at, CircularTaskSpec, TaskSpec, WaypointTask};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn circle(duration: f64) -> TaskSpec {
    TaskSpec::Circular(CircularTaskSpec { duration, ..standard_task() })
}

#[test]
fn analytic_derivatives_match_finite_differences() {
    let spec = circle(60.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-4;
    for _ in 0..1000 {
        let t = rng.gen_range(0.01..59.99);
        let (lo, mid, hi) = (reference_at(&spec, t - h).unwrap(), reference_at(&spec, t).unwrap(), reference_at(&spec, t + h).unwrap());
        let (pl, ph) = (lo.pos.to_array(), hi.pos.to_array());
        let (vl, vm, vh) = (lo.vel.to_array(), mid.vel.to_array(), hi.vel.to_array());
        let am = mid.acc.to_array();
        for i in 0..5 {
            let vel_fd = (ph[i] - pl[i]) / (2.0 * h);
            let acc_fd = (vh[i] - vl[i]) / (2.0 * h);
            assert!((vel_fd - vm[i]).abs() < 1e-6, "vel {i} at t={t}: {vel_fd} vs {}", vm[i]);
            assert!((acc_fd - am[i]).abs() < 1e-6, "acc {i} at t={t}: {acc_fd} vs {}", am[i]);
        }
    }
}

#[test]
fn platform_path_closes_after_one_lap() {
    let c = standard_task();
    let spec = circle(c.period() + 1.0);
    let start = reference_at(&spec, 0.0).unwrap().pos;
    let lap = reference_at(&spec, c.period()).unwrap().pos;
    assert!((lap.x_f - start.x_f).hypot(lap.y_f - start.y_f) < 1e-9);
}

#[test]
fn heading_reference_is_continuous() {
    let c = standard_task();
    let spec = circle(2.0 * c.period());
    let dt = 0.01;
    let n = (2.0 * c.period() / dt) as usize;
    let mut prev = reference_at(&spec, 0.0).unwrap().pos.phi;
    for k in 1..n {
        let phi = reference_at(&spec, k as f64 * dt).unwrap().pos.phi;
        assert!((phi - prev).abs() < 1e-3, "jump at step {k}");
        prev = phi;
    }
}

#[test]
fn waypoints_reproduce_a_sampled_circle() {
    let spec = circle(30.0);
    let rows: Vec<[f64; 5]> = (0..=300)
        .map(|k| {
            let t = k as f64 * 0.1;
            let p = reference_at(&spec, t).unwrap().pos;
            [t, p.x_f, p.y_f, p.x_e, p.y_e]
        })
        .collect();
    let wp = TaskSpec::Waypoints(Box::new(WaypointTask::new(&rows).unwrap()));
    for t in [2.05, 10.0, 17.33, 25.5] {
        let (a, b) = (reference_at(&spec, t).unwrap(), reference_at(&wp, t).unwrap());
        assert!((a.pos.x_e - b.pos.x_e).abs() < 1e-6);
        assert!((a.vel.x_f - b.vel.x_f).abs() < 1e-5);
        assert!((a.pos.phi - b.pos.phi).abs() < 1e-5, "{} vs {}", a.pos.phi, b.pos.phi);
    }
}

proptest! {
    #[test]
    fn tip_stays_right_of_heading(t in 0.0f64..60.0) {
        let r = reference_at(&circle(60.0), t).unwrap();
        let (s, c) = r.pos.phi.sin_cos();
        let (dx, dy) = (r.pos.x_e - r.pos.x_f, r.pos.y_e - r.pos.y_f);
        let lateral = -dx * s + dy * c;
        prop_assert!(lateral < -0.29 && lateral > -0.41);
        prop_assert!((dx * c + dy * s).abs() < 1e-9);
    }

    #[test]
    fn platform_speed_is_constant(t in 0.0f64..60.0) {
        let r = reference_at(&circle(60.0), t).unwrap();
        prop_assert!((r.vel.x_f.hypot(r.vel.y_f) - 0.2).abs() < 1e-12);
        prop_assert!((r.acc.x_f.hypot(r.acc.y_f) - 0.2 * 0.2 / 10.0).abs() < 1e-12);
    }
}
