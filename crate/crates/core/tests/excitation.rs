use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use wqed_core::ed::{converged_lowest, relative_l2, EdConfig, Sector};
use wqed_core::excitation::{
    bound_photon_distribution_2q, effective_hamiltonian_1q, effective_hamiltonian_2q, find_bound_state_1q,
    find_bound_state_1q_dense, find_bound_states_2q, sebs_kappa, sebs_localization_length,
    sebs_photon_distribution, sigma_z_single_excitation, upper_bound_state_possible,
    variational_gs_is_eigenstate_1q, variational_gs_is_eigenstate_2q,
};
use wqed_core::polaron_single::kappa_gs;
use wqed_core::{solve_1q, solve_2q, ModelParams, Parity};

fn single(delta: f64, g: f64, n: usize) -> ModelParams {
    ModelParams::single(delta, 1.0, 0.2, g, n).unwrap()
}

fn ed_first_excited(m: &ModelParams) -> wqed_core::ed::EdState {
    let seed = EdConfig {
        n_max: 2,
        total_max: 2,
        ..Default::default()
    };
    converged_lowest(m, &seed, Sector::Odd, 1, 1e-6).unwrap().states[0].clone()
}

#[test]
fn sebs_energy_profile_and_magnetization_match_ed() {
    for g in [0.1, 0.2] {
        let m = single(0.3, g, 10);
        let sol = solve_1q(&m).unwrap();
        let bs = find_bound_state_1q(&sol, &m).unwrap();
        let ed = ed_first_excited(&m);
        let seed = EdConfig {
            n_max: 2,
            total_max: 2,
            ..Default::default()
        };
        let gs = converged_lowest(&m, &seed, Sector::Even, 1, 1e-6).unwrap().states[0].energy;
        assert!(((ed.energy - gs) - bs.energy).abs() < 1e-3 * bs.energy, "g={g}");
        let prof = sebs_photon_distribution(&bs, &sol, &m);
        assert!(relative_l2(&prof, &ed.photons) < 0.01, "g={g}");
        let z = sigma_z_single_excitation(&sol, &m, bs.qubit_amps[0], &bs.lambda_k);
        assert!((z - ed.sigma_z[0]).abs() < 5e-3, "g={g}: {z} vs {}", ed.sigma_z[0]);
    }
}

#[test]
fn root_and_dense_agree_at_large_grid() {
    let m = single(0.3, 0.3, 400);
    let sol = solve_1q(&m).unwrap();
    let a = find_bound_state_1q(&sol, &m).unwrap();
    let b = find_bound_state_1q_dense(&sol, &m).unwrap();
    assert!((a.energy - b.energy).abs() < 1e-9 * b.energy.abs());
    assert!(a.energy < m.band_min());
}

#[test]
fn bound_state_is_normalized_eigenvector() {
    let m = single(0.5, 0.3, 300);
    let sol = solve_1q(&m).unwrap();
    let bs = find_bound_state_1q(&sol, &m).unwrap();
    assert_relative_eq!(bs.norm_sqr(), 1.0, max_relative = 1e-13);
    // Residual in the qubit-centered basis, where the matrix is real.
    let h = effective_hamiltonian_1q(&sol, &m);
    let grid = m.grid();
    let x = m.positions[0] as i64;
    let mut v = vec![bs.qubit_amps[0]];
    v.extend(bs.lambda_k.iter().enumerate().map(|(k, l)| grid.phase(k, -x) * l));
    let res: f64 = (0..v.len())
        .map(|r| ((0..v.len()).map(|c| v[c] * h[(r, c)]).sum::<Complex64>() - v[r] * bs.energy).norm_sqr())
        .sum::<f64>()
        .sqrt();
    assert!(res < 1e-10 * h.norm(), "{res}");
}

#[test]
fn sebs_profile_limits_and_trend() {
    let total = |g: f64| {
        let m = single(0.3, g, 200);
        let sol = solve_1q(&m).unwrap();
        let bs = find_bound_state_1q(&sol, &m).unwrap();
        sebs_photon_distribution(&bs, &sol, &m).iter().sum::<f64>()
    };
    // Photon weight vanishes like g².
    let (a, b) = (total(1e-2), total(1e-3));
    assert!(b < 1e-3 && (a / b - 100.0).abs() < 1.0, "{a} {b}");

    let peak_and_width = |omega0: f64, lam: f64, delta: f64| {
        let m = ModelParams::single(delta, omega0, lam, 0.3, 400).unwrap();
        let sol = solve_1q(&m).unwrap();
        let bs = find_bound_state_1q(&sol, &m).unwrap();
        let p = sebs_photon_distribution(&bs, &sol, &m);
        (p[200], sebs_localization_length(&bs, &sol, &m).unwrap())
    };
    // Band close to the qubit: larger Δ gives a lower, broader peak.
    let (p1, w1) = peak_and_width(0.5, 0.18, 0.3);
    let (p2, w2) = peak_and_width(0.5, 0.18, 0.5);
    assert!(p2 < p1 && w2 > w1, "{p1} {w1} {p2} {w2}");
    // Band far above: the peak still grows while the qubit weight drains.
    let (p1, w1) = peak_and_width(1.0, 0.2, 0.3);
    let (p2, w2) = peak_and_width(1.0, 0.2, 0.5);
    assert!(p2 > p1 && w2 > w1, "{p1} {w1} {p2} {w2}");
}

#[test]
fn sebs_localization_is_max_of_two_lengths() {
    for delta in [0.1, 0.4, 0.8] {
        let m = single(delta, 0.3, 400);
        let sol = solve_1q(&m).unwrap();
        let bs = find_bound_state_1q(&sol, &m).unwrap();
        let l = sebs_localization_length(&bs, &sol, &m).unwrap();
        assert!(l >= 1.0 / kappa_gs(&sol, &m).unwrap());
        assert_relative_eq!(l, (1.0 / kappa_gs(&sol, &m).unwrap()).max(1.0 / sebs_kappa(&bs, &m).unwrap()));
    }
}

#[test]
fn upper_state_predicate() {
    let at = |lam| ModelParams::single(0.3, 1.0, lam, 0.1, 10).unwrap();
    assert!(upper_bound_state_possible(&at(0.2)));
    assert!(!upper_bound_state_possible(&at(0.3)));
    assert!(upper_bound_state_possible(&at(0.25)));
}

#[test]
fn variational_residual_small_at_reference_points() {
    let m = single(0.3, 0.3, 2000);
    let sol = solve_1q(&m).unwrap();
    assert!(variational_gs_is_eigenstate_1q(&sol, &m) < 1e-8 * sol.e_gs.abs());
    let p = ModelParams::pair(0.3, 1.0, 0.2, 0.5, 5, 400).unwrap();
    let s2 = solve_2q(&p).unwrap();
    assert!(variational_gs_is_eigenstate_2q(&s2, &p).unwrap() < 1e-8 * s2.e_gs.abs());
}

fn pair(x: usize) -> ModelParams {
    ModelParams::pair(0.3, 0.5, 0.18, 0.3, x, 400).unwrap()
}

#[test]
fn far_doublet_is_two_single_qubit_copies() {
    let p = pair(20);
    let sol = solve_2q(&p).unwrap();
    let states = find_bound_states_2q(&sol, &p).unwrap();
    assert_eq!(states.len(), 2);
    assert_eq!(states[0].parity, Some(Parity::Symmetric));
    assert_eq!(states[1].parity, Some(Parity::Antisymmetric));
    let one = ModelParams::single(0.3, 0.5, 0.18, 0.3, 400).unwrap();
    let s1 = solve_1q(&one).unwrap();
    let e1 = find_bound_state_1q(&s1, &one).unwrap().energy;
    for s in &states {
        assert!((s.energy - e1).abs() < 1e-4 * e1, "{} vs {e1}", s.energy);
        assert_relative_eq!(s.qubit_amps[0].norm(), s.qubit_amps[1].norm(), max_relative = 1e-4);
    }
}

#[test]
fn splitting_grows_as_qubits_approach() {
    let split = |x| {
        let p = pair(x);
        let st = find_bound_states_2q(&solve_2q(&p).unwrap(), &p).unwrap();
        (st[1].energy - st[0].energy).abs()
    };
    let s: Vec<f64> = (3..=10).map(split).collect();
    assert!(s.windows(2).all(|w| w[1] < w[0]), "{s:?}");
}

#[test]
fn two_qubit_profiles_and_parseval() {
    let profile = |x: usize| {
        let p = pair(x);
        let sol = solve_2q(&p).unwrap();
        let st = find_bound_states_2q(&sol, &p).unwrap();
        for s in &st {
            let lam: f64 = s.lambda_sites(&p.grid()).iter().map(|z| z.norm_sqr()).sum();
            let q: f64 = s.qubit_amps.iter().map(|z| z.norm_sqr()).sum();
            assert_relative_eq!(lam, 1.0 - q, max_relative = 1e-10);
        }
        (
            bound_photon_distribution_2q(&st[0], &sol, &p),
            bound_photon_distribution_2q(&st[1], &sol, &p),
        )
    };
    let (s12, a12) = profile(12);
    let (s6, a6) = profile(6);
    assert!(relative_l2(&a12, &s12) < relative_l2(&a6, &s6));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn effective_hamiltonians_are_hermitian(delta in 0.1f64..1.0, g in 0.0f64..0.5, x in 1usize..10) {
        let m = single(delta, g, 100);
        let h = effective_hamiltonian_1q(&solve_1q(&m).unwrap(), &m);
        prop_assert!((&h - h.transpose()).norm() <= 1e-15 * h.norm());
        let p = ModelParams::pair(delta, 1.0, 0.2, g, x, 100).unwrap();
        let h2 = effective_hamiltonian_2q(&solve_2q(&p).unwrap(), &p).unwrap();
        prop_assert!((&h2 - h2.adjoint()).norm() <= 1e-15 * h2.norm());
    }

    #[test]
    fn bound_state_exists_and_matches_dense(delta in 0.1f64..1.0, g in 0.01f64..0.5) {
        let m = single(delta, g, 200);
        let sol = solve_1q(&m).unwrap();
        let a = find_bound_state_1q(&sol, &m).unwrap();
        let b = find_bound_state_1q_dense(&sol, &m).unwrap();
        prop_assert!(a.energy < m.band_min());
        prop_assert!((a.energy - b.energy).abs() < 1e-9 * b.energy.abs());
    }
}
