//! Master-equation integration checked against matrix-exponential propagation
//! and exact decay laws; nonlinear fit checked against a synthetic generator.

mod support;

use approx::assert_abs_diff_eq;
use num_complex::Complex64 as C64;

use ionsync_core::{
    build_liouvillian, evolve, fit_decaying_oscillation, mean_phonon, QuantumState, SystemParams,
    Trajectory,
};

fn params(n_fock: usize) -> SystemParams {
    SystemParams {
        eta: 0.1,
        omega: 25.0,
        gamma: 10.0,
        big_gamma: 1.0,
        drive_f: 1.2,
        detuning: 0.9,
        n_fock,
    }
}

#[test]
fn bare_damping_reproduces_the_exponential_decay_law() {
    // only mechanical damping, initial one-phonon state: <n>(t) = exp(-t)
    let p = SystemParams {
        eta: 0.1,
        omega: 0.0,
        gamma: 1e-9,
        big_gamma: 1.0,
        drive_f: 0.0,
        detuning: 0.0,
        n_fock: 3,
    };
    let l = build_liouvillian(&p).unwrap();
    let rho0 = QuantumState::pure_basis(2 * p.n_fock, 1, 0.0).unwrap();
    let t: Vec<f64> = (0..41).map(|k| k as f64 * 0.1).collect();
    let traj = evolve(&l, &rho0, &t).unwrap();
    for (k, tk) in t.iter().enumerate() {
        let n = mean_phonon(&traj.states[k].rho);
        assert_abs_diff_eq!(n, (-tk).exp(), epsilon = 1e-6);
    }
}

#[test]
fn trace_is_preserved_along_the_trajectory() {
    let p = params(4);
    let l = build_liouvillian(&p).unwrap();
    let rho0 = QuantumState::ground(p.n_fock).unwrap();
    let t: Vec<f64> = (0..21).map(|k| k as f64 * 0.25).collect();
    let traj = evolve(&l, &rho0, &t).unwrap();
    for s in &traj.states {
        let tr: C64 = s.rho.diag().sum();
        assert_abs_diff_eq!(tr.re, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(tr.im, 0.0, epsilon = 1e-8);
    }
}

#[test]
fn trajectory_matches_matrix_exponential_propagation() {
    // n_fock = 3 with the full parameter set: ten sample times against expm
    let p = params(3);
    let l = build_liouvillian(&p).unwrap();
    let d = 2 * p.n_fock;
    let rho0 = QuantumState::ground(p.n_fock).unwrap();
    let t: Vec<f64> = (0..10).map(|k| 0.05 + k as f64 * 0.2).collect();
    let traj = evolve(&l, &rho0, &t).unwrap();
    for (k, &tk) in t.iter().enumerate() {
        let prop = support::expm(&l.matrix.mapv(|z| z * tk));
        let expected = support::unvec_cs(&prop.dot(&support::vec_cs(&rho0.rho)), d);
        let diff = support::max_abs_diff(&traj.states[k].rho, &expected);
        assert!(diff < 1e-6, "t={tk}: {diff:e}");
    }
}

#[test]
fn states_remain_positive_and_relax_to_stationarity() {
    let p = params(4);
    let l = build_liouvillian(&p).unwrap();
    let rho0 = QuantumState::ground(p.n_fock).unwrap();
    let t: Vec<f64> = (0..30).map(|k| k as f64 * 1.0).collect();
    let traj = evolve(&l, &rho0, &t).unwrap();
    for s in &traj.states {
        s.validate().unwrap();
    }
    let last = &traj.states.last().unwrap().rho;
    let out = support::unvec_cs(&l.matrix.dot(&support::vec_cs(last)), 2 * p.n_fock);
    let drift = out.iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(drift < 1e-3, "still moving at t=29: {drift:e}");
}

#[test]
fn strictly_increasing_time_grid_is_required() {
    let p = params(2);
    let l = build_liouvillian(&p).unwrap();
    let rho0 = QuantumState::ground(p.n_fock).unwrap();
    assert!(evolve(&l, &rho0, &[0.0, 0.5, 0.5]).is_err());
    assert!(evolve(&l, &rho0, &[0.5, 0.0]).is_err());
}

fn synthetic_trajectory(a: f64, b: f64, w: f64, phi: f64, c: f64) -> Trajectory {
    let times: Vec<f64> = (0..2000).map(|k| k as f64 * 0.02).collect();
    let values: Vec<f64> = times
        .iter()
        .map(|t| a * (-b * t).exp() * (w * t + phi).sin() + c)
        .collect();
    Trajectory::from_observable(times, "entanglement", values)
}

#[test]
fn fit_recovers_synthetic_generator_parameters() {
    let (a, b, w, phi, c) = (0.073, 0.219, -0.886, 1.323, 0.055);
    let traj = synthetic_trajectory(a, b, w, phi, c);
    let fit = fit_decaying_oscillation(&traj, "entanglement", 1.0, None).unwrap();
    // canonical form: positive amplitude, frequency sign matched to generator
    let (fa, fb, fw, fphi, fc) = support::canonical_fit(
        fit.amplitude,
        fit.decay,
        fit.frequency,
        fit.phase,
        fit.offset,
        w,
    );
    assert_abs_diff_eq!(fa, a, epsilon = 1e-4);
    assert_abs_diff_eq!(fb, b, epsilon = 1e-4);
    assert_abs_diff_eq!(fw, w, epsilon = 1e-4);
    assert_abs_diff_eq!(fphi, phi, epsilon = 1e-4);
    assert_abs_diff_eq!(fc, c, epsilon = 1e-4);
    assert!(fit.residual < 1e-8);
}

#[test]
fn fit_of_a_constant_degenerates_to_the_offset() {
    let times: Vec<f64> = (0..500).map(|k| k as f64 * 0.05).collect();
    let values = vec![0.42; 500];
    let traj = Trajectory::from_observable(times, "entanglement", values);
    let fit = fit_decaying_oscillation(&traj, "entanglement", 0.5, None).unwrap();
    assert!(fit.amplitude.abs() < 1e-6);
    assert_abs_diff_eq!(fit.offset, 0.42, epsilon = 1e-6);
    assert!(fit.residual < 1e-10);
    assert!(fit.decay >= 0.0);
}

#[test]
fn fit_requires_enough_samples_past_the_window_start() {
    let times: Vec<f64> = (0..40).map(|k| k as f64 * 0.05).collect();
    let values = vec![0.1; 40];
    let traj = Trajectory::from_observable(times, "entanglement", values);
    assert!(fit_decaying_oscillation(&traj, "entanglement", 1.9, None).is_err());
}

#[test]
fn long_time_state_reaches_the_steady_state() {
    let p = params(4);
    let l = build_liouvillian(&p).unwrap();
    let ss = ionsync_core::steady_state(&l).unwrap();
    let modes = ionsync_core::eigenspectrum(&l, 2).unwrap();
    let horizon = 10.0 / modes[1].decay_rate;
    let rho0 = QuantumState::ground(p.n_fock).unwrap();
    let traj = evolve(&l, &rho0, &[horizon]).unwrap();
    let gap: f64 = traj.states[0]
        .rho
        .iter()
        .zip(ss.rho.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(gap < 1e-4, "distance to steady state {gap:e} at t = {horizon}");
}

#[test]
fn entanglement_rises_from_zero_to_an_early_peak() {
    let p = params(12);
    let l = build_liouvillian(&p).unwrap();
    let rho0 = QuantumState::ground(p.n_fock).unwrap();
    let t: Vec<f64> = (0..41).map(|k| k as f64 * 0.05).collect();
    let traj = evolve(&l, &rho0, &t).unwrap();
    let en = traj.observable("entanglement").unwrap();
    assert_abs_diff_eq!(en[0], 0.0, epsilon = 1e-10);
    let peak = en.iter().cloned().fold(0.0, f64::max);
    assert!(peak > 0.01, "no early entanglement transient, peak {peak}");
}
