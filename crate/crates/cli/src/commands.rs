//! One function per subcommand: expand the sweep, evaluate points in parallel, build tables.

use rayon::prelude::*;
use serde_json::json;
use wqed_core::dynamics::evolve_emission;
use wqed_core::ed::{self, converged_lowest, relative_l2, Sector};
use wqed_core::excitation::{
    bound_photon_distribution_2q, find_bound_state_1q, find_bound_states_2q, sebs_localization_length,
    sebs_photon_distribution,
};
use wqed_core::model::spectral_density;
use wqed_core::polaron_single::{excited_probability, gs_localization_length, photon_distribution_gs, sigma_z_gs};
use wqed_core::polaron_two::{excited_probability_2q, photon_distribution_gs_2q};
use wqed_core::rwa::{rwa_bound_states, rwa_gs_photons, rwa_photon_distribution, RwaState};
use wqed_core::transfer::{
    adiabaticity_check, extract_tight_binding, measure_rabi, simulate_protocol, simulate_tight_binding,
    ProtocolSchedule, TransferOptions,
};
use wqed_core::{solve_1q, solve_2q, BoundState, Error, ModelParams, Parity};

use crate::config::{ConfigError, Hold, HoldMode, RunConfig};
use crate::output::{num, opt, Failure, RunOutput, Table};

pub const DIPOLE_NOTE: &str = "Direct dipole-dipole coupling between the qubits is not simulated. \
It is of order 1e-4 eV for nearest neighbours in a crystal lattice (d ~ 1 angstrom) and falls off as a power law, \
far below the waveguide-mediated exchange at the separations where transfer is possible.";

#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub delta: f64,
    pub g: f64,
    pub x: Option<usize>,
}

impl Point {
    pub fn label(&self) -> String {
        match self.x {
            Some(x) => format!("delta={} g={} x={x}", num(self.delta), num(self.g)),
            None => format!("delta={} g={}", num(self.delta), num(self.g)),
        }
    }

    fn axes(&self) -> Vec<String> {
        let mut v = vec![num(self.delta), num(self.g)];
        if let Some(x) = self.x {
            v.push(x.to_string());
        }
        v
    }
}

struct PointError {
    module: &'static str,
    err: Error,
}

trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T, PointError>;
}

impl<T> InModule<T> for wqed_core::Result<T> {
    fn in_module(self, module: &'static str) -> Result<T, PointError> {
        self.map_err(|err| PointError { module, err })
    }
}

fn status_of(err: &Error) -> &'static str {
    if err.is_config() {
        "config"
    } else if err.is_convergence() {
        "convergence"
    } else {
        "solver"
    }
}

/// Cartesian product in canonical order: delta, then g, then x.
fn points(cfg: &RunConfig, with_x: bool) -> Vec<Point> {
    let mut out = Vec::new();
    for &delta in &cfg.sweep.delta {
        for &g in &cfg.sweep.g {
            if with_x {
                out.extend(cfg.sweep.x.iter().map(|&x| Point { delta, g, x: Some(x) }));
            } else {
                out.push(Point { delta, g, x: None });
            }
        }
    }
    out
}

fn model_at(cfg: &RunConfig, p: &Point, n_sites: usize) -> wqed_core::Result<ModelParams> {
    let (w0, lam) = (cfg.model.omega0, cfg.model.lambda);
    match p.x {
        Some(x) => ModelParams::pair(p.delta, w0, lam, p.g, x, n_sites),
        None => ModelParams::single(p.delta, w0, lam, p.g, n_sites),
    }
}

fn prevalidate(cfg: &RunConfig, pts: &[Point], n_sites: usize) -> Result<(), ConfigError> {
    for p in pts {
        model_at(cfg, p, n_sites).map_err(|e| ConfigError(format!("model at {}: {e}", p.label())))?;
    }
    Ok(())
}

fn require_x(cfg: &RunConfig, cmd: &str, needed: bool) -> Result<(), ConfigError> {
    match (needed, cfg.sweep.x.is_empty()) {
        (true, true) => Err(ConfigError(format!("{cmd} needs sweep.x (qubit separations)"))),
        (false, false) => Err(ConfigError(format!("{cmd} is single-qubit; remove sweep.x"))),
        _ => Ok(()),
    }
}

/// Evaluates every point in parallel; results come back in point order.
fn evaluate<R: Send>(
    pts: &[Point],
    f: impl Fn(&Point) -> Result<R, PointError> + Sync,
) -> (Vec<Option<R>>, Vec<Failure>) {
    let results: Vec<_> = pts.par_iter().map(&f).collect();
    let mut failures = Vec::new();
    let values = results
        .into_iter()
        .zip(pts)
        .map(|(r, p)| match r {
            Ok(v) => Some(v),
            Err(PointError { module, err }) => {
                failures.push(Failure {
                    point: p.label(),
                    module,
                    status: status_of(&err),
                    message: err.to_string(),
                });
                None
            }
        })
        .collect();
    (values, failures)
}

fn status_cell(p: &Point, failures: &[Failure]) -> String {
    let label = p.label();
    failures
        .iter()
        .find(|f| f.point == label)
        .map(|f| f.status.to_string())
        .unwrap_or_else(|| "ok".into())
}

fn row(p: &Point, rest: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut v = p.axes();
    v.extend(rest);
    v
}

fn blanks(n: usize) -> Vec<String> {
    vec![String::new(); n]
}

/// Profile window centred on `center`, offsets in [−w, w].
fn windowed(profile: &[f64], center: usize, w: usize) -> impl Iterator<Item = (i64, f64)> + '_ {
    let lo = center.saturating_sub(w);
    let hi = (center + w).min(profile.len() - 1);
    (lo..=hi).map(move |n| (n as i64 - center as i64, profile[n]))
}

fn lowest_rwa(states: &[RwaState], parity: Option<Parity>) -> Option<&BoundState> {
    states
        .iter()
        .filter(|s| !s.above_band && (parity.is_none() || s.state.parity == parity))
        .map(|s| &s.state)
        .next()
}

pub fn gs1q(cfg: &RunConfig) -> Result<RunOutput, ConfigError> {
    require_x(cfg, "gs1q", false)?;
    let pts = points(cfg, false);
    let n = cfg.model.n_sites;
    prevalidate(cfg, &pts, n)?;
    let (vals, failures) = evaluate(&pts, |p| {
        let m = model_at(cfg, p, n).in_module("polaron_single")?;
        solve_1q(&m).in_module("polaron_single")
    });
    let mut t = Table::new("gs1q", &["delta", "g", "delta_r_ratio", "p_e", "e_gs", "status"]);
    for (p, v) in pts.iter().zip(&vals) {
        let cells = match v {
            Some(s) => vec![num(s.delta_r / p.delta), num(excited_probability(s, p.delta)), num(s.e_gs)],
            None => blanks(3),
        };
        t.push(row(p, cells.into_iter().chain([status_cell(p, &failures)])));
    }
    Ok(RunOutput {
        tables: vec![t],
        grid_sizes: json!({ "n_sites": n }),
        points: pts.len(),
        failures,
        notes: vec![],
    })
}

pub fn bound1q(cfg: &RunConfig) -> Result<RunOutput, ConfigError> {
    require_x(cfg, "bound1q", false)?;
    let pts = points(cfg, false);
    let n = cfg.model.n_sites;
    prevalidate(cfg, &pts, n)?;
    let (vals, failures) = evaluate(&pts, |p| {
        let m = model_at(cfg, p, n).in_module("excitation_subspace")?;
        let sol = solve_1q(&m).in_module("polaron_single")?;
        let bs = find_bound_state_1q(&sol, &m).in_module("excitation_subspace")?;
        let rwa = rwa_bound_states(&m).in_module("rwa_baseline")?;
        let rwa_low = lowest_rwa(&rwa, None).cloned();
        let profile = sebs_photon_distribution(&bs, &sol, &m);
        let rwa_profile = rwa_low.as_ref().map(|s| rwa_photon_distribution(s, &m));
        let length = sebs_localization_length(&bs, &sol, &m).ok();
        Ok((m, bs, rwa_low, profile, rwa_profile, length))
    });
    let mut t = Table::new(
        "bound1q",
        &[
            "delta", "g", "e1", "band_edge_gap", "e1_rwa", "rwa_rel_diff", "localization_length", "qubit_weight",
            "photon_number", "status",
        ],
    );
    let mut prof = Table::new("bound1q_profiles", &["delta", "g", "method", "n", "value"]);
    let w = cfg.output.window;
    for (p, v) in pts.iter().zip(&vals) {
        let cells = match v {
            Some((m, bs, rwa, profile, rwa_profile, length)) => {
                let e_rwa = rwa.as_ref().map(|s| s.energy);
                for (k, val) in windowed(profile, m.positions[0], w) {
                    prof.push(row(p, ["polaron".into(), k.to_string(), num(val)]));
                }
                if let Some(rp) = rwa_profile {
                    for (k, val) in windowed(rp, m.positions[0], w) {
                        prof.push(row(p, ["rwa".into(), k.to_string(), num(val)]));
                    }
                }
                vec![
                    num(bs.energy),
                    num(m.band_min() - bs.energy),
                    opt(e_rwa),
                    opt(e_rwa.map(|e| (bs.energy - e).abs() / bs.energy.abs())),
                    opt(*length),
                    num(bs.qubit_amps[0].norm_sqr()),
                    num(profile.iter().sum()),
                ]
            }
            None => blanks(7),
        };
        t.push(row(p, cells.into_iter().chain([status_cell(p, &failures)])));
    }
    Ok(RunOutput {
        tables: vec![t, prof],
        grid_sizes: json!({ "n_sites": n, "profile_window": w }),
        points: pts.len(),
        failures,
        notes: vec![],
    })
}

pub fn gsphotons(cfg: &RunConfig) -> Result<RunOutput, ConfigError> {
    let two = !cfg.sweep.x.is_empty();
    let pts = points(cfg, two);
    let n = cfg.model.n_sites;
    prevalidate(cfg, &pts, n)?;
    let (vals, failures) = evaluate(&pts, |p| {
        let m = model_at(cfg, p, n).in_module("polaron_single")?;
        if two {
            let sol = solve_2q(&m).in_module("polaron_two")?;
            Ok((photon_distribution_gs_2q(&sol, &m), rwa_gs_photons(&m), None, sol.delta_r))
        } else {
            let sol = solve_1q(&m).in_module("polaron_single")?;
            let length = gs_localization_length(&sol, &m).ok();
            Ok((photon_distribution_gs(&sol, &m), rwa_gs_photons(&m), length, sol.delta_r))
        }
    });
    let cols = |rest: &[&'static str]| -> Vec<&'static str> {
        let mut c = vec!["delta", "g"];
        if two {
            c.push("x");
        }
        c.extend_from_slice(rest);
        c
    };
    let mut t = Table::new("gsphotons", &cols(&["method", "n", "value"]));
    let mut summary = Table::new(
        "gsphotons_summary",
        &cols(&["delta_r", "photon_number", "localization_length", "status"]),
    );
    let w = cfg.output.window;
    let center = n / 2;
    for (p, v) in pts.iter().zip(&vals) {
        let cells = match v {
            Some((profile, rwa, length, dr)) => {
                for (method, prof) in [("polaron", profile), ("rwa", rwa)] {
                    for (k, val) in windowed(prof, center, w) {
                        t.push(row(p, [method.into(), k.to_string(), num(val)]));
                    }
                }
                vec![num(*dr), num(profile.iter().sum()), opt(*length)]
            }
            None => blanks(3),
        };
        summary.push(row(p, cells.into_iter().chain([status_cell(p, &failures)])));
    }
    Ok(RunOutput {
        tables: vec![t, summary],
        grid_sizes: json!({ "n_sites": n, "profile_window": w }),
        points: pts.len(),
        failures,
        notes: vec![],
    })
}

pub fn benchmark_ed(cfg: &RunConfig) -> Result<RunOutput, ConfigError> {
    require_x(cfg, "benchmark-ed", false)?;
    cfg.validate_ed()?;
    let pts = points(cfg, false);
    let n = cfg.ed.n_sites;
    prevalidate(cfg, &pts, n)?;
    let seed = cfg.ed.seed();
    for p in &pts {
        let m = model_at(cfg, p, n).map_err(|e| ConfigError(e.to_string()))?;
        ed::validate(&m, &seed).map_err(|e| ConfigError(format!("ed at {}: {e}", p.label())))?;
    }
    let (vals, failures) = evaluate(&pts, |p| {
        let m = model_at(cfg, p, n).in_module("ed_oracle")?;
        let sol = solve_1q(&m).in_module("polaron_single")?;
        let ed = converged_lowest(&m, &seed, Sector::Even, 1, cfg.ed.rel_tol).in_module("ed_oracle")?;
        Ok((photon_distribution_gs(&sol, &m), rwa_gs_photons(&m), sol, ed))
    });
    let mut t = Table::new("benchmark-ed", &["delta", "g", "method", "n", "value"]);
    let mut summary = Table::new(
        "benchmark-ed_summary",
        &[
            "delta", "g", "polaron_rel_l2", "rwa_rel_l2", "ed_e_gs", "polaron_e_gs", "ed_sigma_z", "polaron_sigma_z",
            "n_max", "total_max", "dimension", "status",
        ],
    );
    let mut truncation = Vec::new();
    for (p, v) in pts.iter().zip(&vals) {
        let cells = match v {
            Some((pol, rwa, sol, ed)) => {
                let exact = &ed.states[0];
                for (method, prof) in [("polaron", pol), ("rwa", rwa), ("ed", &exact.photons)] {
                    for (site, val) in prof.iter().enumerate() {
                        t.push(row(p, [method.into(), site.to_string(), num(*val)]));
                    }
                }
                truncation.push(json!({
                    "point": p.label(),
                    "n_max": ed.config.n_max,
                    "total_max": ed.config.total_max,
                    "dimension": ed.dimension,
                }));
                vec![
                    num(relative_l2(pol, &exact.photons)),
                    num(relative_l2(rwa, &exact.photons)),
                    num(exact.energy),
                    num(sol.e_gs),
                    num(exact.sigma_z[0]),
                    num(sigma_z_gs(sol, p.delta)),
                    ed.config.n_max.to_string(),
                    ed.config.total_max.to_string(),
                    ed.dimension.to_string(),
                ]
            }
            None => blanks(9),
        };
        summary.push(row(p, cells.into_iter().chain([status_cell(p, &failures)])));
    }
    Ok(RunOutput {
        tables: vec![t, summary],
        grid_sizes: json!({ "ed_n_sites": n, "ed_truncation": truncation }),
        points: pts.len(),
        failures,
        notes: vec!["ED uses an open chain; the Polaron and RWA profiles use a periodic ring of the same length.".into()],
    })
}

pub fn emission(cfg: &RunConfig) -> Result<RunOutput, ConfigError> {
    require_x(cfg, "emission", false)?;
    cfg.validate_dynamics()?;
    let pts = points(cfg, false);
    let n = cfg.model.n_sites;
    prevalidate(cfg, &pts, n)?;
    let d = &cfg.dynamics;
    let (vals, failures) = evaluate(&pts, |p| {
        let m = model_at(cfg, p, n).in_module("dynamics")?;
        let sol = solve_1q(&m).in_module("polaron_single")?;
        let r = evolve_emission(&sol, &m, d.t_max, d.dt).in_module("dynamics")?;
        Ok((sol, r))
    });
    let mut trace = Table::new(
        "emission",
        &["delta", "g", "t", "sigma_z", "qubit_population", "markov_fgr", "markov_renormalized"],
    );
    let mut summary = Table::new(
        "emission_summary",
        &[
            "delta", "g", "delta_r", "lambda0", "stationary_prediction", "tail_average", "tail_variance",
            "early_decay_rate", "j_delta_r", "norm_drift", "status",
        ],
    );
    for (p, v) in pts.iter().zip(&vals) {
        let cells = match v {
            Some((sol, r)) => {
                for i in (0..r.times.len()).step_by(d.stride) {
                    let at = |c: &Option<Vec<f64>>| opt(c.as_ref().map(|c| c[i]));
                    trace.push(row(
                        p,
                        [
                            num(r.times[i]),
                            num(r.sigma_z_lab[i]),
                            num(r.qubit_population[i]),
                            at(&r.markov_fgr),
                            at(&r.markov_renormalized),
                        ],
                    ));
                }
                let [lo, hi] = d.decay_window;
                vec![
                    num(sol.delta_r),
                    opt(r.lambda0),
                    opt(r.stationary_prediction),
                    num(r.tail_average(d.tail_fraction)),
                    num(r.tail_variance(d.tail_fraction)),
                    // Exponential decay only makes sense while the dressed qubit sits in the band.
                    opt(r.markov_renormalized.as_ref().and_then(|_| r.early_decay_rate(lo, hi).ok())),
                    opt(spectral_density(p.g, cfg.model.omega0, cfg.model.lambda, sol.delta_r).ok()),
                    num(r.norm_drift),
                ]
            }
            None => blanks(8),
        };
        summary.push(row(p, cells.into_iter().chain([status_cell(p, &failures)])));
    }
    let steps = (d.t_max / d.dt).round() as usize + 1;
    Ok(RunOutput {
        tables: vec![trace, summary],
        grid_sizes: json!({ "n_sites": n, "time_samples": steps }),
        points: pts.len(),
        failures,
        notes: vec![],
    })
}

pub fn gs2q(cfg: &RunConfig) -> Result<RunOutput, ConfigError> {
    require_x(cfg, "gs2q", true)?;
    let pts = points(cfg, true);
    let n = cfg.model.n_sites;
    prevalidate(cfg, &pts, n)?;
    let (vals, failures) = evaluate(&pts, |p| {
        let m = model_at(cfg, p, n).in_module("polaron_two")?;
        let sol = solve_2q(&m).in_module("polaron_two")?;
        let one = model_at(cfg, &Point { x: None, ..*p }, n).in_module("polaron_single")?;
        let s1 = solve_1q(&one).in_module("polaron_single")?;
        Ok((sol, s1.delta_r))
    });
    let mut t = Table::new(
        "gs2q",
        &["delta", "g", "x", "delta_r", "delta_r_1q", "delta_r_ratio_1q", "ising_j", "e_gs", "p_e", "theta", "status"],
    );
    for (p, v) in pts.iter().zip(&vals) {
        let cells = match v {
            Some((s, dr1)) => vec![
                num(s.delta_r),
                num(*dr1),
                num(s.delta_r / dr1),
                num(s.j_ising),
                num(s.e_gs),
                num(excited_probability_2q(s, p.delta)),
                num(s.theta()),
            ],
            None => blanks(7),
        };
        t.push(row(p, cells.into_iter().chain([status_cell(p, &failures)])));
    }
    Ok(RunOutput {
        tables: vec![t],
        grid_sizes: json!({ "n_sites": n }),
        points: pts.len(),
        failures,
        notes: vec![],
    })
}

pub fn bound2q(cfg: &RunConfig) -> Result<RunOutput, ConfigError> {
    require_x(cfg, "bound2q", true)?;
    let pts = points(cfg, true);
    let n = cfg.model.n_sites;
    prevalidate(cfg, &pts, n)?;
    let (vals, failures) = evaluate(&pts, |p| {
        let m = model_at(cfg, p, n).in_module("excitation_subspace")?;
        let sol = solve_2q(&m).in_module("polaron_two")?;
        let states = find_bound_states_2q(&sol, &m).in_module("excitation_subspace")?;
        let rwa = rwa_bound_states(&m).in_module("rwa_baseline")?;
        let profiles: Vec<_> = states
            .iter()
            .map(|s| (s.parity, bound_photon_distribution_2q(s, &sol, &m)))
            .collect();
        Ok((m, states, rwa, profiles))
    });
    let mut t = Table::new(
        "bound2q",
        &[
            "delta", "g", "x", "n_bound", "e_s", "e_a", "splitting", "e_s_rwa", "e_a_rwa", "splitting_rwa", "status",
        ],
    );
    let mut prof = Table::new("bound2q_profiles", &["delta", "g", "x", "state", "method", "n", "value"]);
    let w = cfg.output.window;
    for (p, v) in pts.iter().zip(&vals) {
        let cells = match v {
            Some((m, states, rwa, profiles)) => {
                let energy = |par| states.iter().find(|s| s.parity == Some(par)).map(|s| s.energy);
                let (es, ea) = (energy(Parity::Symmetric), energy(Parity::Antisymmetric));
                let rs = lowest_rwa(rwa, Some(Parity::Symmetric));
                let ra = lowest_rwa(rwa, Some(Parity::Antisymmetric));
                let center = n / 2;
                for (parity, profile) in profiles {
                    let label = parity.map(|q| q.label()).unwrap_or("none");
                    for (k, val) in windowed(profile, center, w) {
                        prof.push(row(p, [label.into(), "polaron".into(), k.to_string(), num(val)]));
                    }
                }
                for s in [rs, ra].into_iter().flatten() {
                    let label = s.parity.map(|q| q.label()).unwrap_or("none");
                    for (k, val) in windowed(&rwa_photon_distribution(s, m), center, w) {
                        prof.push(row(p, [label.into(), "rwa".into(), k.to_string(), num(val)]));
                    }
                }
                let split = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| (b - a).abs());
                vec![
                    states.len().to_string(),
                    opt(es),
                    opt(ea),
                    opt(split(es, ea)),
                    opt(rs.map(|s| s.energy)),
                    opt(ra.map(|s| s.energy)),
                    opt(split(rs.map(|s| s.energy), ra.map(|s| s.energy))),
                ]
            }
            None => blanks(7),
        };
        t.push(row(p, cells.into_iter().chain([status_cell(p, &failures)])));
    }
    Ok(RunOutput {
        tables: vec![t, prof],
        grid_sizes: json!({ "n_sites": n, "profile_window": w }),
        points: pts.len(),
        failures,
        notes: vec![],
    })
}

struct TransferPoint {
    tau: f64,
    swap: f64,
    ramp: Option<f64>,
    hold: Option<f64>,
    rabi_period: Option<f64>,
    tb_fidelity: f64,
    schedule: ProtocolSchedule,
    result: wqed_core::transfer::TransferResult,
    segments: Option<Vec<wqed_core::transfer::SegmentReport>>,
}

pub fn transfer(cfg: &RunConfig) -> Result<RunOutput, ConfigError> {
    require_x(cfg, "transfer", true)?;
    cfg.validate_protocol()?;
    let pts = points(cfg, true);
    let n = cfg.model.n_sites;
    prevalidate(cfg, &pts, n)?;
    let pc = &cfg.protocol;
    let opts = TransferOptions {
        steps_per_ramp: pc.steps_per_ramp,
        hold_samples: pc.hold_samples,
    };
    const MODULE: &str = "state_transfer";
    let (vals, failures) = evaluate(&pts, |p| {
        let m = model_at(cfg, p, n).in_module(MODULE)?;
        let sol = solve_2q(&m).in_module("polaron_two")?;
        let tb = extract_tight_binding(&find_bound_states_2q(&sol, &m).in_module("excitation_subspace")?)
            .in_module(MODULE)?;
        let swap = tb.swap_time();
        let (schedule, ramp, hold, rabi_period) = match &pc.segments {
            Some(segs) => (ProtocolSchedule { segments: segs.clone() }, None, None, None),
            None => {
                let ramp = pc.ramp_tau / tb.tau.abs();
                let (hold, period) = match pc.hold {
                    Hold::Time(t) => (t, None),
                    Hold::Mode(HoldMode::Swap) => (swap, None),
                    Hold::Mode(HoldMode::Tuned) => {
                        let probe = ProtocolSchedule::standard(p.g, ramp, swap);
                        let r = measure_rabi(&m, &probe, &tb, &opts).in_module(MODULE)?;
                        (r.first_peak, Some(r.period))
                    }
                };
                (ProtocolSchedule::standard(p.g, ramp, hold), Some(ramp), Some(hold), period)
            }
        };
        let result = simulate_protocol(&m, &schedule, &opts).in_module(MODULE)?;
        let tb_fidelity = simulate_tight_binding(&tb, &schedule).in_module(MODULE)?;
        let segments = match adiabaticity_check(&schedule, &m, pc.adiabatic_threshold) {
            Ok(r) => Some(r),
            Err(Error::Unsupported(_)) => None,
            Err(e) => return Err(PointError { module: MODULE, err: e }),
        };
        Ok(TransferPoint {
            tau: tb.tau,
            swap,
            ramp,
            hold,
            rabi_period,
            tb_fidelity,
            schedule,
            result,
            segments,
        })
    });
    let mut trace = Table::new("transfer", &["delta", "g", "x", "t", "population_a", "population_b"]);
    let mut summary = Table::new(
        "transfer_summary",
        &[
            "delta", "g", "x", "tau", "swap_time", "ramp", "hold", "rabi_period", "fidelity", "tb_fidelity",
            "norm_drift", "status",
        ],
    );
    let mut seg_table = Table::new(
        "transfer_segments",
        &["delta", "g", "x", "label", "duration", "end_time", "adiabatic_ratio", "min_gap", "diabatic", "violates"],
    );
    for (p, v) in pts.iter().zip(&vals) {
        let cells = match v {
            Some(tp) => {
                let r = &tp.result;
                for i in (0..r.times.len()).step_by(pc.stride) {
                    trace.push(row(p, [num(r.times[i]), num(r.population_a[i]), num(r.population_b[i])]));
                }
                for (i, seg) in tp.schedule.segments.iter().enumerate() {
                    let rep = tp.segments.as_ref().map(|s| &s[i]);
                    seg_table.push(row(
                        p,
                        [
                            seg.label.clone(),
                            num(seg.duration),
                            num(r.segment_ends[i]),
                            rep.map(|r| if r.ratio.is_infinite() { "inf".into() } else { num(r.ratio) })
                                .unwrap_or_default(),
                            opt(rep.map(|r| r.min_gap)),
                            rep.map(|r| r.diabatic.to_string()).unwrap_or_default(),
                            rep.map(|r| r.violates.to_string()).unwrap_or_default(),
                        ],
                    ));
                }
                vec![
                    num(tp.tau),
                    num(tp.swap),
                    opt(tp.ramp),
                    opt(tp.hold),
                    opt(tp.rabi_period),
                    num(r.fidelity),
                    num(tp.tb_fidelity),
                    num(r.norm_drift),
                ]
            }
            None => blanks(8),
        };
        summary.push(row(p, cells.into_iter().chain([status_cell(p, &failures)])));
    }
    Ok(RunOutput {
        tables: vec![trace, summary, seg_table],
        grid_sizes: json!({
            "n_sites": n,
            "steps_per_ramp": pc.steps_per_ramp,
            "hold_samples": pc.hold_samples,
        }),
        points: pts.len(),
        failures,
        notes: vec![DIPOLE_NOTE.into()],
    })
}
