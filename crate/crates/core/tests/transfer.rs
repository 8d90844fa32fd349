use wqed_core::excitation::find_bound_states_2q;
use wqed_core::transfer::{
    adiabaticity_check, extract_tight_binding, simulate_protocol, simulate_tight_binding, ProtocolSchedule,
    RampShape, Segment, TightBinding, TransferOptions,
};
use wqed_core::{solve_2q, ModelParams};

fn pair(x: usize, n: usize) -> ModelParams {
    ModelParams::pair(0.3, 1.0, 0.2, 0.3, x, n).unwrap()
}

fn tb(x: usize) -> TightBinding {
    let m = pair(x, 300);
    extract_tight_binding(&find_bound_states_2q(&solve_2q(&m).unwrap(), &m).unwrap()).unwrap()
}

#[test]
fn hopping_shrinks_with_distance() {
    let t: Vec<f64> = (2..=8).map(|x| tb(x).tau.abs()).collect();
    assert!(t.windows(2).all(|w| w[1] < w[0]), "{t:?}");
}

#[test]
fn tight_binding_rediagonalizes_the_doublet() {
    let m = pair(4, 300);
    let st = find_bound_states_2q(&solve_2q(&m).unwrap(), &m).unwrap();
    let t = extract_tight_binding(&st).unwrap();
    let (es, ea) = t.energies();
    let mut e: Vec<f64> = st.iter().map(|s| s.energy).collect();
    e.sort_by(f64::total_cmp);
    assert!((es.min(ea) - e[0]).abs() < 1e-14 && (es.max(ea) - e[1]).abs() < 1e-14);
}

#[test]
fn ideal_swap_is_complete_and_half_swap_splits() {
    let t = tb(5);
    let full = simulate_tight_binding(&t, &ProtocolSchedule::standard(0.3, 10.0, t.swap_time())).unwrap();
    let half = simulate_tight_binding(&t, &ProtocolSchedule::standard(0.3, 10.0, 0.5 * t.swap_time())).unwrap();
    assert!((full - 1.0).abs() < 1e-12);
    assert!((half - 0.5).abs() < 1e-12);
}

#[test]
fn waveguide_run_is_deterministic_and_unitary() {
    let m = pair(5, 150);
    let t = tb(5);
    let sched = ProtocolSchedule::standard(0.3, 20.0 / t.tau.abs(), t.swap_time());
    let opts = TransferOptions {
        steps_per_ramp: 60,
        hold_samples: 40,
    };
    let a = simulate_protocol(&m, &sched, &opts).unwrap();
    let b = simulate_protocol(&m, &sched, &opts).unwrap();
    assert_eq!(a.population_b, b.population_b);
    assert!(a.norm_drift < 1e-8);
    assert!(a.fidelity > 0.9, "{}", a.fidelity);
    assert_eq!(a.segment_ends.len(), sched.segments.len());
    assert!((a.times.last().unwrap() - sched.total_duration()).abs() < 1e-9);
    assert_eq!(a.population_b[0], 0.0);
}

#[test]
fn adiabaticity_flags() {
    let m = pair(5, 150);
    let slow = adiabaticity_check(&ProtocolSchedule::standard(0.3, 5000.0, 10.0), &m, 0.1).unwrap();
    for r in &slow {
        match r.label.as_str() {
            "switch_on_g2" | "switch_off_g1" => assert!(r.diabatic && r.ratio.is_infinite()),
            _ => assert!(!r.violates, "{r:?}"),
        }
    }
    let fast = adiabaticity_check(&ProtocolSchedule::standard(0.3, 0.5, 10.0), &m, 0.1).unwrap();
    assert!(fast.iter().any(|r| r.violates));
}

#[test]
fn malformed_schedules_are_config_errors() {
    let m = pair(5, 60);
    let opts = TransferOptions::default();
    let mut s = ProtocolSchedule::standard(0.3, 10.0, 1.0);
    s.segments.remove(1);
    assert!(simulate_protocol(&m, &s, &opts).unwrap_err().is_config());

    let lopsided = ProtocolSchedule {
        segments: vec![
            Segment {
                label: "ramp".into(),
                duration: 1.0,
                shape: RampShape::Linear,
                g1: [0.0, 0.3],
                g2: [0.0, 0.0],
            },
            Segment {
                label: "on".into(),
                duration: 0.0,
                shape: RampShape::Instantaneous,
                g1: [0.3, 0.3],
                g2: [0.0, 0.2],
            },
            Segment {
                label: "hold".into(),
                duration: 1.0,
                shape: RampShape::Linear,
                g1: [0.3, 0.3],
                g2: [0.2, 0.2],
            },
        ],
    };
    assert!(matches!(
        simulate_protocol(&m, &lopsided, &opts),
        Err(wqed_core::Error::Unsupported(_))
    ));
}
