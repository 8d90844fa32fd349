use proptest::prelude::*;
use wqed_core::excitation::{find_bound_state_1q, sebs_photon_distribution};
use wqed_core::linalg::eigh;
use wqed_core::rwa::{rwa_bound_states, rwa_hamiltonian, rwa_photon_distribution};
use wqed_core::{solve_1q, ModelParams};

fn single(delta: f64, g: f64, n: usize) -> ModelParams {
    ModelParams::single(delta, 1.0, 0.2, g, n).unwrap()
}

#[test]
fn single_qubit_has_one_state_on_each_side() {
    let m = single(0.3, 0.2, 200);
    let st = rwa_bound_states(&m).unwrap();
    assert_eq!(st.len(), 2);
    assert!(st[0].state.energy < m.band_min() && !st[0].above_band);
    assert!(st[1].state.energy > m.band_max() && st[1].above_band);
    // λ = 0.2 < ω₀ − Δ: the upper state survives beyond RWA.
    assert!(!st[1].resonance_beyond_rwa);
}

#[test]
fn weak_coupling_agrees_with_polaron() {
    let m = single(0.3, 0.01, 400);
    let sol = solve_1q(&m).unwrap();
    let pol = find_bound_state_1q(&sol, &m).unwrap().energy;
    let rwa = rwa_bound_states(&m).unwrap()[0].state.energy;
    assert!((pol - rwa).abs() / pol < 1e-3, "{pol} {rwa}");
}

#[test]
fn disagreement_grows_with_coupling() {
    let rel = |g: f64| {
        let m = single(0.3, g, 400);
        let sol = solve_1q(&m).unwrap();
        let pol = find_bound_state_1q(&sol, &m).unwrap().energy;
        let rwa = rwa_bound_states(&m).unwrap()[0].state.energy;
        (pol - rwa).abs() / pol
    };
    let r: Vec<f64> = [0.02, 0.05, 0.1, 0.2, 0.3].into_iter().map(rel).collect();
    assert!(r.windows(2).all(|w| w[1] > w[0]), "{r:?}");
}

#[test]
fn profiles_carry_the_photon_weight() {
    let m = single(0.3, 0.2, 200);
    let st = rwa_bound_states(&m).unwrap();
    let p = rwa_photon_distribution(&st[0].state, &m);
    let q = st[0].state.qubit_amps[0].norm_sqr();
    assert!((p.iter().sum::<f64>() + q - 1.0).abs() < 1e-12);
}

#[test]
fn polaron_bound_state_holds_more_photons() {
    for g in [0.1, 0.2, 0.3] {
        let m = single(0.3, g, 400);
        let sol = solve_1q(&m).unwrap();
        let bs = find_bound_state_1q(&sol, &m).unwrap();
        let pol: f64 = sebs_photon_distribution(&bs, &sol, &m).iter().sum();
        let rwa: f64 = rwa_photon_distribution(&rwa_bound_states(&m).unwrap()[0].state, &m).iter().sum();
        assert!(rwa <= pol, "g={g}: {rwa} > {pol}");
    }
}

#[test]
fn wide_band_flags_upper_resonance() {
    let m = ModelParams::single(0.3, 1.0, 0.4, 0.2, 200).unwrap();
    let st = rwa_bound_states(&m).unwrap();
    assert!(st.iter().any(|s| s.resonance_beyond_rwa));
}

#[test]
fn two_qubit_states_come_from_the_dense_spectrum() {
    let m = ModelParams::pair(0.3, 1.0, 0.2, 0.2, 4, 120).unwrap();
    let st = rwa_bound_states(&m).unwrap();
    let (vals, _) = eigh(rwa_hamiltonian(&m).unwrap());
    let below: Vec<_> = st.iter().filter(|s| !s.above_band).collect();
    assert!(!below.is_empty());
    for (s, v) in below.iter().zip(&vals) {
        assert!((s.state.energy - v).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn secular_roots_match_dense(delta in 0.05f64..1.8, g in 0.01f64..0.5) {
        let m = single(delta, g, 120);
        let st = rwa_bound_states(&m).unwrap();
        let (vals, _) = eigh(rwa_hamiltonian(&m).unwrap());
        prop_assert_eq!(st.len(), 2);
        prop_assert!((st[0].state.energy - vals[0]).abs() < 1e-10);
        prop_assert!((st[1].state.energy - vals[vals.len() - 1]).abs() < 1e-10);
    }
}
