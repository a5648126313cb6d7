use streetperc::estimators::*;
use streetperc::io::{read_theta_samples, write_theta_samples};
use streetperc::{Execution, RngState, TessellationKind};

#[test]
fn well_above_threshold_almost_always_crosses() {
    let s = Scenario::new(TessellationKind::Pvt, 20.0, 2.5 / 20.0, 10.0).unwrap();
    let p =
        estimate_crossing_probability(&s, 0.4 * 20.0, 100, RngState::new(17), Execution::default())
            .unwrap();
    assert!(p.p_hat > 0.9, "{p:?}");
}

#[test]
fn larger_radius_never_needs_more_devices() {
    // identical streams give the same street system and device sequence;
    // every link at a smaller radius exists at the larger one
    let plan = ThetaPlan {
        tessellations: 3,
        placements: 10,
        budget: DeviceBudget::Fixed(20_000),
    };
    let run = |r: f64| {
        let s = Scenario::new(TessellationKind::Pdt, 20.0, r, 2.0).unwrap();
        run_theta_experiment(&s, &plan, RngState::new(8), Execution::default()).unwrap()
    };
    let (small, large) = (run(0.03), run(0.05));
    let mut strictly = 0;
    for (a, b) in small.iter().zip(&large) {
        assert_eq!(a.nu1, b.nu1);
        assert!(b.n <= a.n, "{a:?} {b:?}");
        strictly += (b.n < a.n) as usize;
    }
    assert!(strictly > 20);
}

#[test]
fn theta_replays_from_stored_samples() {
    let s = Scenario::new(TessellationKind::Pvt, 20.0, 0.025, 1.5).unwrap();
    let plan = ThetaPlan::with_defaults(8.0 * 20.0);
    let plan = ThetaPlan {
        tessellations: 3,
        placements: 5,
        ..plan
    };
    let samples = run_theta_experiment(&s, &plan, RngState::new(2), Execution::default()).unwrap();
    let mut csv = Vec::new();
    write_theta_samples(&mut csv, &samples).unwrap();
    let back = read_theta_samples(csv.as_slice()).unwrap();
    assert_eq!(back, samples);
    let grid: Vec<f64> = (0..20).map(|i| 60.0 + 5.0 * i as f64).collect();
    assert_eq!(
        theta_curve(&back, &grid).unwrap(),
        theta_curve(&samples, &grid).unwrap()
    );
}

#[test]
fn stretch_respects_the_radius_bound() {
    let s = Scenario::new(TessellationKind::Pvt, 20.0, 0.375, 5.0).unwrap();
    let p =
        run_stretch_experiment(&s, 1.5, 4, 4.0, RngState::new(3), Execution::default()).unwrap();
    assert_eq!(p.simulations, 4);
    assert!(p.min_mu_hat >= 1.0 / 0.375);
    assert!(p.mu_hat > 2.8 && p.mu_hat < 4.2, "{p:?}");
}
