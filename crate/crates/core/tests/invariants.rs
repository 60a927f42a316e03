//! Structural invariants over randomized parameters and states.

mod support;

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use ionsync_core::{
    build_hamiltonian, build_liouvillian, fit_decaying_oscillation, find_fixed_points, jacobian,
    log_negativity, mean_phonon, mf_rhs, phase_distribution, steady_state, sync_measure,
    tail_population, MeanFieldState, QuantumState, Stability, SystemParams, Trajectory,
};

prop_compose! {
    fn arb_params(max_fock: usize)(
        eta in 0.02f64..0.3,
        omega in 1.0f64..40.0,
        gamma in 0.5f64..20.0,
        big_gamma in 0.2f64..3.0,
        drive_f in 0.1f64..2.0,
        detuning in -3.0f64..3.0,
        n_fock in 2usize..=max_fock,
    ) -> SystemParams {
        SystemParams { eta, omega, gamma, big_gamma, drive_f, detuning, n_fock }
    }
}

prop_compose! {
    fn arb_mf_state()(
        x1 in -2.0f64..2.0,
        y1 in -2.0f64..2.0,
        x2 in -1.0f64..1.0,
        y2 in -1.0f64..1.0,
        z in -1.5f64..0.5,
    ) -> MeanFieldState {
        MeanFieldState { x1, y1, x2, y2, z }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hamiltonian_is_hermitian(p in arb_params(6)) {
        let h = build_hamiltonian(&p).unwrap();
        let diff = support::max_abs_diff(&h, &support::dagger(&h));
        prop_assert!(diff <= 1e-13 * (1.0 + h.iter().map(|z| z.norm()).fold(0.0, f64::max)));
    }

    #[test]
    fn liouvillian_annihilates_the_trace(p in arb_params(4), seed in 0u64..1 << 16) {
        let l = build_liouvillian(&p).unwrap();
        let mut rng = support::rng(seed);
        let d = 2 * p.n_fock;
        let rho = support::random_density(&mut rng, d, d);
        let out = support::unvec_cs(&l.matrix.dot(&support::vec_cs(&rho)), d);
        let tr: C64 = out.diag().sum();
        let scale = 1.0 + out.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(tr.norm() <= 1e-11 * scale, "trace leak {:e}", tr.norm());
    }

    #[test]
    fn application_preserves_hermiticity(p in arb_params(4), seed in 0u64..1 << 16) {
        let l = build_liouvillian(&p).unwrap();
        let mut rng = support::rng(seed);
        let d = 2 * p.n_fock;
        let rho = support::random_density(&mut rng, d, d);
        let out = support::unvec_cs(&l.matrix.dot(&support::vec_cs(&rho)), d);
        let diff = support::max_abs_diff(&out, &support::dagger(&out));
        let scale = 1.0 + out.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-11 * scale);
    }

    #[test]
    fn steady_states_are_physical_with_small_residual(p in arb_params(4)) {
        let l = build_liouvillian(&p).unwrap();
        let ss = steady_state(&l).unwrap();
        prop_assert!(ss.validate().is_ok());
        let residual = l.matrix.dot(&support::vec_cs(&ss.rho))
            .iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let norm_l = l.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(residual <= 1e-8 * norm_l, "residual {residual:e} vs |L| {norm_l:e}");
    }

    #[test]
    fn sync_measure_is_bounded(seed in 0u64..1 << 16, d in 3usize..10, rank in 1usize..4) {
        let mut rng = support::rng(seed);
        let rho = support::random_density(&mut rng, d, rank.min(d));
        if let Ok(s) = sync_measure(&rho) {
            prop_assert!(s.norm() <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn phase_distributions_are_nonnegative_and_normalized(
        seed in 0u64..1 << 16, d in 2usize..10, n_phi in 64usize..140,
    ) {
        let mut rng = support::rng(seed);
        let rho = support::random_density(&mut rng, d, d);
        let pd = phase_distribution(&rho, n_phi).unwrap();
        for v in &pd.values {
            prop_assert!(*v >= -1e-12, "negative density {v:e}");
        }
        let total: f64 = pd.values.iter().sum::<f64>()
            * 2.0 * std::f64::consts::PI / n_phi as f64;
        prop_assert!((total - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn log_negativity_is_nonnegative(seed in 0u64..1 << 16, half in 2usize..5, rank in 1usize..5) {
        let mut rng = support::rng(seed);
        let rho = support::random_density(&mut rng, 2 * half, rank);
        let e = log_negativity(&rho).unwrap();
        prop_assert!(e >= -1e-12);
    }

    #[test]
    fn phonon_populations_are_monotone_diagnostics(seed in 0u64..1 << 16, half in 2usize..8) {
        let mut rng = support::rng(seed);
        let rho = support::random_density(&mut rng, 2 * half, 3);
        prop_assert!(mean_phonon(&rho) >= -1e-12);
        let mut prev = f64::INFINITY;
        for m in 0..half {
            let t = tail_population(&rho, m);
            prop_assert!((-1e-12..=prev + 1e-12).contains(&t));
            prev = t;
        }
    }

    #[test]
    fn mean_field_flow_matches_the_complex_rederivation(
        p in arb_params(2), st in arb_mf_state(),
    ) {
        let d = mf_rhs(&st, &p);
        let a = C64::new(st.x1, st.y1);
        let s = C64::new(st.x2, st.y2);
        let eo = p.eta * p.omega;
        let da = eo * s - C64::new(p.big_gamma / 2.0, -p.detuning) * a + p.drive_f;
        let ds = -eo * st.z * a - C64::new(p.gamma / 2.0, -p.detuning) * s;
        let dz = 4.0 * eo * (a.conj() * s).re - p.gamma * (st.z + 1.0);
        let want = [da.re, da.im, ds.re, ds.im, dz];
        for (g, w) in d.as_array().iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn jacobian_agrees_with_finite_differences(p in arb_params(2), st in arb_mf_state()) {
        let j = jacobian(&st, &p);
        let h = 1e-6;
        for col in 0..5 {
            let mut up = st.as_array();
            let mut dn = st.as_array();
            up[col] += h;
            dn[col] -= h;
            let fu = mf_rhs(&MeanFieldState::from_array(up), &p);
            let fd = mf_rhs(&MeanFieldState::from_array(dn), &p);
            for row in 0..5 {
                let est = (fu.as_array()[row] - fd.as_array()[row]) / (2.0 * h);
                let scale = j[[row, col]].abs().max(1.0);
                prop_assert!((j[[row, col]] - est).abs() <= 1e-5 * scale);
            }
        }
    }

    #[test]
    fn fixed_points_are_distinct_consistent_and_converged(
        detuning in 0.0f64..2.5, drive_f in 0.05f64..2.0,
    ) {
        let p = SystemParams {
            eta: 0.1, omega: 25.0, gamma: 10.0, big_gamma: 1.0,
            drive_f, detuning, n_fock: 2,
        };
        let fps = find_fixed_points(&p).unwrap();
        prop_assert!(!fps.is_empty());
        for fp in &fps {
            let res: f64 = mf_rhs(&fp.state, &p).as_array()
                .iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(res <= 1e-10, "residual {res:e}");
            let max_re = fp.eigenvalues.iter().map(|z| z.re).fold(f64::MIN, f64::max);
            if !fp.degenerate {
                match fp.stability {
                    Stability::Stable => prop_assert!(max_re < 0.0),
                    Stability::Unstable => prop_assert!(max_re > 0.0),
                }
            }
        }
        for i in 0..fps.len() {
            for j in (i + 1)..fps.len() {
                let dist: f64 = fps[i].state.as_array().iter()
                    .zip(&fps[j].state.as_array())
                    .map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                prop_assert!(dist > 1e-6, "duplicate fixed points");
            }
        }
    }

    #[test]
    fn validation_rejects_corrupted_states(seed in 0u64..1 << 16, d in 2usize..8) {
        let mut rng = support::rng(seed);
        let rho = support::random_density(&mut rng, d, d);
        prop_assert!(QuantumState::new(rho.clone(), 0.0).is_ok());
        let mut skew = rho.clone();
        skew[[0, d - 1]] += C64::new(1e-6, 0.0);
        prop_assert!(QuantumState::new(skew, 0.0).is_err());
        let scaled = rho.mapv(|z| z * 1.001);
        prop_assert!(QuantumState::new(scaled, 0.0).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fit_recovers_randomized_generators(
        a in 0.05f64..0.8,
        b in 0.05f64..0.4,
        wmag in 0.5f64..3.0,
        wsign in prop::bool::ANY,
        phi in -3.0f64..3.0,
        c in -0.5f64..0.5,
    ) {
        let w = if wsign { wmag } else { -wmag };
        let times: Vec<f64> = (0..1500).map(|k| k as f64 * 0.02).collect();
        let values: Vec<f64> = times.iter()
            .map(|t| a * (-b * t).exp() * (w * t + phi).sin() + c)
            .collect();
        let traj = Trajectory::from_observable(times, "signal", values);
        let fit = fit_decaying_oscillation(&traj, "signal", 0.5, None).unwrap();
        prop_assert!(fit.residual < 1e-7, "residual {:e}", fit.residual);
        let (fa, fb, fw, fphi, fc) =
            support::canonical_fit(fit.amplitude, fit.decay, fit.frequency, fit.phase, fit.offset, w);
        let (_, _, _, gphi, _) = support::canonical_fit(a, b, w, phi, c, w);
        prop_assert!((fa - a).abs() <= 1e-3 * (1.0 + a));
        prop_assert!((fb - b).abs() <= 1e-3 * (1.0 + b));
        prop_assert!((fw - w).abs() <= 1e-3 * (1.0 + w.abs()));
        let dphi = (fphi - gphi).rem_euclid(2.0 * std::f64::consts::PI);
        prop_assert!(dphi.min(2.0 * std::f64::consts::PI - dphi) <= 1e-3);
        prop_assert!((fc - c).abs() <= 1e-3);
    }
}
