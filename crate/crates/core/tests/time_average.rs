use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};
use xyquench::cyclic::{evolve_cyclic, long_time_cyclic, qp_kernels, AveragingWindow};
use xyquench::quench::{evolve_single, long_time_average_single};
use xyquench::{MomentumGrid, QuenchProtocol};

fn uniform_times(start: f64, stop: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
        .collect()
}

#[test]
fn long_time_average_matches_sample_mean() {
    let grid = MomentumGrid::midpoint(16384).unwrap();
    let protocol = QuenchProtocol::single(1.0, 0.5, 2.0).unwrap();
    let closed = long_time_average_single(&protocol, &grid).unwrap();
    let sampled = evolve_single(&protocol, &grid, &uniform_times(0.0, 500.0, 50_000))
        .unwrap()
        .mean();
    assert!((closed.mz - sampled.mz).abs() < 1e-3);
    assert!((closed.sxx - sampled.sxx).abs() < 1e-3);
}

#[test]
fn long_time_average_matches_sample_mean_for_random_quenches() {
    let mut rng = StdRng::seed_from_u64(7);
    let grid = MomentumGrid::midpoint(512).unwrap();
    let times = uniform_times(0.0, 500.0, 50_000);
    for _ in 0..20 {
        let delta = rng.gen_range(0.2..1.5);
        let h_i = rng.gen_range(0.0..3.0);
        let h_f1 = rng.gen_range(0.0..3.0);
        let protocol = QuenchProtocol::single(delta, h_i, h_f1).unwrap();
        let closed = long_time_average_single(&protocol, &grid).unwrap();
        let sampled = evolve_single(&protocol, &grid, &times).unwrap().mean();
        assert!(
            (closed.mz - sampled.mz).abs() < 1e-3,
            "{delta} {h_i}->{h_f1}: {} vs {}",
            closed.mz,
            sampled.mz
        );
        assert!((closed.sxx - sampled.sxx).abs() < 1e-3);
    }
}

#[test]
fn cyclic_continuity_for_random_protocols() {
    let mut rng = StdRng::seed_from_u64(11);
    let grid = MomentumGrid::midpoint(2048).unwrap();
    for _ in 0..20 {
        let delta = rng.gen_range(0.1..1.5);
        let h_i = rng.gen_range(0.0..3.0);
        let h_f1 = rng.gen_range(0.0..3.0);
        let h_f2 = rng.gen_range(0.0..3.0);
        let dwell = rng.gen_range(0.0..10.0);
        let cyclic = QuenchProtocol::double(delta, h_i, h_f1, h_f2, dwell).unwrap();
        let single = QuenchProtocol::single(delta, h_i, h_f1).unwrap();
        let a = evolve_cyclic(&cyclic, &grid, &[dwell]).unwrap();
        let b = evolve_single(&single, &grid, &[dwell]).unwrap();
        assert!((a.mz[0] - b.mz[0]).abs() < 1e-10);
        assert!((a.sxx[0] - b.sxx[0]).abs() < 1e-10);
    }
}

#[test]
fn cyclic_window_mean_matches_sampled_series() {
    let grid = MomentumGrid::midpoint(256).unwrap();
    let protocol = QuenchProtocol::cyclic(0.8, 1.2, 0.3, 4.0).unwrap();
    let window = AveragingWindow {
        delay: 50.0,
        length: 500.0,
        samples: 50_000,
    };
    let closed = long_time_cyclic(&protocol, &grid, &window).unwrap();
    let sampled = evolve_cyclic(&protocol, &grid, &window.times(4.0)).unwrap().mean();
    assert!((closed.mz - sampled.mz).abs() < 1e-11);
    assert!((closed.sxx - sampled.sxx).abs() < 1e-11);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernels_stay_bounded(
        delta in 0.05f64..2.0,
        h_i in -3.0f64..3.0,
        h_f1 in -3.0f64..3.0,
        h_f2 in -3.0f64..3.0,
        dwell in 0.0f64..20.0,
        k in 0.0f64..std::f64::consts::PI,
        tau in 0.0f64..100.0,
    ) {
        let protocol = QuenchProtocol::double(delta, h_i, h_f1, h_f2, dwell).unwrap();
        let q = qp_kernels(&protocol, k, dwell + tau).unwrap();
        for v in [q.q1, q.q2, q.p1, q.p2] {
            prop_assert!(v.abs() <= 1.0 + 1e-9);
        }
        prop_assert!(q.mz_integrand().abs() <= 1.0 + 1e-9);
    }

    #[test]
    fn observables_stay_bounded(
        delta in 0.05f64..2.0,
        h_i in -3.0f64..3.0,
        h_f1 in -3.0f64..3.0,
        t in 0.0f64..50.0,
    ) {
        let grid = MomentumGrid::midpoint(256).unwrap();
        let protocol = QuenchProtocol::single(delta, h_i, h_f1).unwrap();
        let s = evolve_single(&protocol, &grid, &[t]).unwrap();
        prop_assert!(s.mz[0].abs() <= 1.0 + 1e-12);
        prop_assert!(s.sxx[0].abs() <= 1.0 + 1e-12);
    }
}
