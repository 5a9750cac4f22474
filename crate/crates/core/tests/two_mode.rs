use std::f64::consts::PI;

use giantatom::circuit::ghz;
use giantatom::collective::{
    collective_mode, simulate_two_mode_quantum, ModeGeometry, TwoModeModel, TwoModeState,
};
use giantatom::dynamics::TimeGrid;
use giantatom::hilbert::{coherent_state, StateVector};
use giantatom::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LEVELS: usize = 12;

fn grid(t_end: f64) -> TimeGrid {
    TimeGrid::new(t_end, t_end / 400.0, 1).unwrap()
}

fn model() -> TwoModeModel {
    TwoModeModel::resonant(ghz(0.01), ghz(5.0), LEVELS)
}

#[test]
fn collective_mode_annihilates_dark_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let geom = ModeGeometry::new(
            rng.random_range(0.0..3.0),
            rng.random_range(0.0..3.0),
            rng.random_range(-PI..PI),
            rng.random_range(-PI..PI),
            1.0,
        )
        .unwrap();
        let alpha = C64::from_polar(rng.random_range(0.0..=0.5), rng.random_range(-PI..PI));
        let state = TwoModeState::dark(alpha, &geom);
        let (pa, pb) = geom.phases();
        let psi = StateVector::product(&[
            coherent_state(state.alpha, LEVELS).unwrap(),
            coherent_state(state.beta, LEVELS).unwrap(),
        ])
        .unwrap();
        let c = collective_mode(pa, pb, LEVELS).unwrap();
        assert!(c.apply(&psi).unwrap().norm() < 1e-6);
    }
}

#[test]
fn dark_state_stays_dark_for_oblique_geometry() {
    let geom = ModeGeometry::new(0.3, 1.7, 0.4, 2.1, 1.0).unwrap();
    let state = TwoModeState::dark(C64::new(0.5, 0.0), &geom);
    let tr = simulate_two_mode_quantum(&state, &geom, &model(), &grid(60.0)).unwrap();
    assert!(tr.max_pe() < 1e-6, "{}", tr.max_pe());
    for s in &tr.samples {
        assert!((s.n_a + s.n_b - 0.5).abs() < 1e-6);
    }
}

#[test]
fn vacuum_leaves_atom_in_ground_state() {
    let geom = ModeGeometry::new(0.2, 0.9, 1.0, 0.1, 1.0).unwrap();
    let tr = simulate_two_mode_quantum(&TwoModeState::real(0.0, 0.0), &geom, &model(), &grid(40.0))
        .unwrap();
    assert!(tr.samples.iter().all(|s| s.pe.abs() < 1e-14));
}

#[test]
fn bright_state_excites_faster_than_single_mode() {
    let geom = ModeGeometry::with_path_difference(0.0).unwrap();
    let short = TimeGrid::new(1.0, 0.01, 1).unwrap();
    let bright =
        simulate_two_mode_quantum(&TwoModeState::real(0.5, 0.5), &geom, &model(), &short).unwrap();
    let single =
        simulate_two_mode_quantum(&TwoModeState::real(0.5, 0.0), &geom, &model(), &short).unwrap();
    let (b, s) = (bright.samples.last().unwrap().pe, single.samples.last().unwrap().pe);
    assert!(s > 0.0);
    // short-time growth scales with |sum of field amplitudes|^2: ratio ~ 4
    assert!(b / s > 3.5 && b / s < 4.5, "{b} / {s}");
}

#[test]
fn excitation_number_is_conserved() {
    let geom = ModeGeometry::with_path_difference(0.37).unwrap();
    let state = TwoModeState::new(C64::new(0.6, 0.2), C64::new(-0.3, 0.5));
    for omega0 in [ghz(5.0), ghz(5.02)] {
        let m = TwoModeModel { omega0, ..model() };
        let tr = simulate_two_mode_quantum(&state, &geom, &m, &grid(60.0)).unwrap();
        let n0 = tr.samples[0].excitations();
        assert!(tr.samples.iter().all(|s| (s.excitations() - n0).abs() < 1e-9));
        assert!(tr.max_norm_err() < 1e-9);
    }
}

#[test]
fn truncation_guard() {
    let geom = ModeGeometry::with_path_difference(0.0).unwrap();
    let m = TwoModeModel { levels: 4, ..model() };
    assert!(
        simulate_two_mode_quantum(&TwoModeState::real(1.1, 0.0), &geom, &m, &grid(1.0)).is_err()
    );
}
