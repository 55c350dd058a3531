use dsl_core::field::make_grid;
use dsl_core::resonance::{track_resonance, ResonanceParams, ResonanceSummary};

/// Tracking windows shifted along with the fission event.
fn run(delta: f64) -> ResonanceSummary {
    let grid = make_grid(32768, -150.0, 150.0).unwrap();
    let p = ResonanceParams::new(0.6, delta).unwrap();
    let s = p.fission_time_shift().unwrap();
    track_resonance(&p, &grid, (-300.0 + s, -250.0 + s), (210.0 + s, 260.0 + s), 1e-3).unwrap()
}

#[test]
fn speeds_match_asymptotics() {
    let s = run(0.0);
    assert!((s.pre_speed / 0.28 - 1.0).abs() < 0.01);
    assert_eq!(s.post_hump_count, 2);
    assert!((s.post_speeds[0] / 0.36 - 1.0).abs() < 0.01);
    assert!((s.post_speeds[1] / 0.16 - 1.0).abs() < 0.01);
    assert!((s.pre_height - 1.0).abs() < 1e-6);
    assert!((s.post_heights[0] - 0.36).abs() < 1e-4);
    assert!((s.post_heights[1] - 0.16).abs() < 1e-4);
}

#[test]
fn delta_shift_leaves_asymptotics_invariant() {
    let base = run(0.0);
    for delta in [-5.0, 5.0] {
        let s = run(delta);
        assert!((s.pre_speed - base.pre_speed).abs() < 1e-6);
        assert!((s.pre_height - base.pre_height).abs() < 1e-6);
        for i in 0..2 {
            assert!((s.post_speeds[i] - base.post_speeds[i]).abs() < 1e-6);
            assert!((s.post_heights[i] - base.post_heights[i]).abs() < 1e-6);
        }
    }
}
