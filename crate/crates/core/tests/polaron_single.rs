use approx::assert_relative_eq;
use proptest::prelude::*;
use wqed_core::model::coupling_k;
use wqed_core::numeric::{bisect, tail_decay_rate};
use wqed_core::polaron_single::{
    displacement_sites, excited_probability, gs_localization_length, kappa_gs, photon_distribution_gs,
    sigma_z_gs, solve_1q_with, variational_energy_1q,
};
use wqed_core::{solve_1q, Error, FixedPointOptions, ModelParams};

fn model(delta: f64, g: f64, n: usize) -> ModelParams {
    ModelParams::single(delta, 1.0, 0.2, g, n).unwrap()
}

// First computed at Δ = 0.3, N = 2000; unchanged at N = 4000 to 1e-15.
const RATIO_G03: f64 = 0.876_105_741_884_002;
const RATIO_G05: f64 = 0.659_645_052_121_979_4;
const EGS_G05: f64 = -0.361_522_052_147_248_8;

#[test]
fn frozen_renormalization() {
    let a = solve_1q(&model(0.3, 0.3, 2000)).unwrap();
    let b = solve_1q(&model(0.3, 0.5, 2000)).unwrap();
    assert_relative_eq!(a.delta_r / 0.3, RATIO_G03, max_relative = 1e-12);
    assert_relative_eq!(b.delta_r / 0.3, RATIO_G05, max_relative = 1e-12);
    assert_relative_eq!(b.e_gs, EGS_G05, max_relative = 1e-12);
    assert!(b.delta_r < a.delta_r && b.delta_r > 0.0);
}

#[test]
fn grid_converged_at_default_size() {
    let a = solve_1q(&model(0.3, 0.5, 2000)).unwrap();
    let b = solve_1q(&model(0.3, 0.5, 4000)).unwrap();
    assert!((a.delta_r - b.delta_r).abs() < 1e-6 * a.delta_r);
}

#[test]
fn matches_scalar_fixed_point_oracle() {
    // f eliminated: Δ_r = Δ exp(−2Σ c²/(Δ_r + ω)²), solved by bisection.
    let m = model(0.5, 0.4, 800);
    let grid = m.grid();
    let c = coupling_k(0.4, 800);
    let h = |dr: f64| dr - 0.5 * (-2.0 * grid.omega.iter().map(|w| (c / (dr + w)).powi(2)).sum::<f64>()).exp();
    let oracle = bisect(h, 1e-6, 0.5);
    let sol = solve_1q(&m).unwrap();
    assert_relative_eq!(sol.delta_r, oracle, max_relative = 1e-11);
    assert!(sol.residual < 1e-12 * 0.5);
}

#[test]
fn observables_closed_forms() {
    let sol = solve_1q(&model(0.4, 0.3, 400)).unwrap();
    assert_relative_eq!(excited_probability(&sol, 0.4), 0.5 * (1.0 - sol.delta_r / 0.4));
    assert_relative_eq!(sigma_z_gs(&sol, 0.4), -sol.delta_r / 0.4);
    let mut half = sol.clone();
    half.delta_r = 0.2;
    assert_relative_eq!(excited_probability(&half, 0.4), 0.25);
}

#[test]
fn gs_tail_follows_kappa() {
    for delta in [0.1, 0.3, 0.5] {
        let m = model(delta, 0.3, 2000);
        let sol = solve_1q(&m).unwrap();
        let f_n = displacement_sites(&sol, &m, &m.grid());
        let fit = tail_decay_rate(&f_n, 1000, 3, 25, 1e-11).unwrap();
        assert_relative_eq!(fit, kappa_gs(&sol, &m).unwrap(), max_relative = 0.01);
    }
    let m = model(0.3, 0.3, 100);
    let mut sol = solve_1q(&m).unwrap();
    sol.delta_r = 0.3;
    assert_relative_eq!(gs_localization_length(&sol, &m).unwrap(), 1.0 / 3.25f64.acosh(), max_relative = 1e-14);
}

#[test]
fn weak_coupling_gs_has_no_photons() {
    let m = model(0.3, 0.0, 50);
    let sol = solve_1q(&m).unwrap();
    assert!(photon_distribution_gs(&sol, &m).iter().all(|p| *p == 0.0));
    assert_eq!(sol.e_gs, -0.15);
}

#[test]
fn convergence_error_carries_residual() {
    let opts = FixedPointOptions {
        max_iter: 2,
        ..Default::default()
    };
    match solve_1q_with(&model(0.3, 0.5, 400), &opts) {
        Err(e @ Error::Convergence { .. }) => assert!(e.is_convergence()),
        other => panic!("expected convergence error, got {other:?}"),
    }
}

#[test]
fn renormalization_and_energy_decrease_with_g() {
    let sols: Vec<_> = (0..=20).map(|i| solve_1q(&model(0.3, 0.025 * i as f64, 1000)).unwrap()).collect();
    for w in sols.windows(2) {
        assert!(w[1].delta_r < w[0].delta_r);
        assert!(w[1].e_gs < w[0].e_gs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fixed_point_invariants(delta in 0.05f64..1.2, g in 0.0f64..0.5, half in 10usize..300) {
        let n = 2 * half;
        let m = model(delta, g, n);
        let sol = solve_1q(&m).unwrap();
        prop_assert!(sol.delta_r > 0.0 && sol.delta_r <= delta);
        prop_assert!(sol.e_gs <= -delta / 2.0 + 1e-15);
        let s: f64 = sol.f_k.iter().map(|f| f * f).sum();
        prop_assert!((sol.delta_r - delta * (-2.0 * s).exp()).abs() < 1e-11 * delta);
        for k in 0..n {
            prop_assert!((sol.f_k[k] - sol.f_k[(n - k) % n]).abs() < 1e-14);
        }
        let sites: f64 = photon_distribution_gs(&sol, &m).iter().sum();
        prop_assert!((sites - s).abs() <= 1e-12 * s.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn variational_optimum(delta in 0.1f64..1.0, g in 0.05f64..0.5, seed in 0u64..1000) {
        let m = model(delta, g, 200);
        let sol = solve_1q(&m).unwrap();
        let e0 = variational_energy_1q(&m, &sol.f_k);
        let n = sol.f_k.len();
        for sign in [1.0, -1.0] {
            let f: Vec<f64> = (0..n)
                .map(|k| {
                    let p = (n - k) % n;
                    let (a, b) = (k.min(p) as f64, seed as f64);
                    sol.f_k[k] + sign * 1e-4 * ((a * 1.37 + b).sin())
                })
                .collect();
            prop_assert!(variational_energy_1q(&m, &f) >= e0);
        }
    }
}
