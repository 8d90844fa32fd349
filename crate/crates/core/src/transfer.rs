//! Two-site tight-binding reduction of the bound doublet and the four-stage transfer protocol.
//!
//! The waveguide simulation works in a quasi-static Polaron frame: on every step the frame is
//! rebuilt from the instantaneous couplings and the amplitudes on {σ_a⁺, σ_b⁺, b_k†} are carried
//! over unchanged. Supported coupling pairs are (g₁, 0), (0, g₂), (g, g) and (0, 0).

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::excitation::{
    effective_hamiltonian_2q, even_sector_1q, find_bound_state_1q, BoundState, Parity,
};
use crate::linalg::eigh;
use crate::model::{MomentumGrid, ModelParams};
use crate::polaron_single::solve_1q;
use crate::polaron_two::solve_2q;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TightBinding {
    pub epsilon: f64,
    pub tau: f64,
}

impl TightBinding {
    /// (E_S, E_A) = (ε − τ, ε + τ).
    pub fn energies(&self) -> (f64, f64) {
        (self.epsilon - self.tau, self.epsilon + self.tau)
    }

    pub fn swap_time(&self) -> f64 {
        PI / (2.0 * self.tau.abs())
    }
}

pub fn extract_tight_binding(states: &[BoundState]) -> Result<TightBinding> {
    let find = |p: Parity| states.iter().find(|s| s.parity == Some(p)).map(|s| s.energy);
    match (find(Parity::Symmetric), find(Parity::Antisymmetric)) {
        (Some(es), Some(ea)) => Ok(TightBinding {
            epsilon: 0.5 * (es + ea),
            tau: 0.5 * (ea - es),
        }),
        _ => Err(Error::NoBoundState(
            "no effective two-level model at this distance: symmetric or antisymmetric state missing".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampShape {
    Linear,
    Smoothstep,
    Instantaneous,
}

impl RampShape {
    fn profile(self, s: f64) -> f64 {
        match self {
            RampShape::Linear => s,
            RampShape::Smoothstep => s * s * (3.0 - 2.0 * s),
            RampShape::Instantaneous => 1.0,
        }
    }

    /// max |d profile / ds| on [0, 1].
    fn max_slope(self) -> f64 {
        match self {
            RampShape::Linear => 1.0,
            RampShape::Smoothstep => 1.5,
            RampShape::Instantaneous => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub label: String,
    pub duration: f64,
    pub shape: RampShape,
    pub g1: [f64; 2],
    pub g2: [f64; 2],
}

impl Segment {
    pub fn couplings_at(&self, s: f64) -> (f64, f64) {
        let p = self.shape.profile(s);
        (
            self.g1[0] + (self.g1[1] - self.g1[0]) * p,
            self.g2[0] + (self.g2[1] - self.g2[0]) * p,
        )
    }

    fn is_constant(&self) -> bool {
        self.g1[0] == self.g1[1] && self.g2[0] == self.g2[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSchedule {
    pub segments: Vec<Segment>,
}

impl ProtocolSchedule {
    /// Adiabatic g₁ ramp, diabatic g₂ switch-on, hold, diabatic g₁ switch-off, adiabatic g₂ ramp.
    pub fn standard(g: f64, ramp: f64, hold: f64) -> Self {
        let seg = |label: &str, duration, shape, g1, g2| Segment {
            label: label.into(),
            duration,
            shape,
            g1,
            g2,
        };
        ProtocolSchedule {
            segments: vec![
                seg("ramp_g1", ramp, RampShape::Smoothstep, [0.0, g], [0.0, 0.0]),
                seg("switch_on_g2", 0.0, RampShape::Instantaneous, [g, g], [0.0, g]),
                seg("hold", hold, RampShape::Linear, [g, g], [g, g]),
                seg("switch_off_g1", 0.0, RampShape::Instantaneous, [g, 0.0], [g, g]),
                seg("ramp_g2", ramp, RampShape::Smoothstep, [0.0, 0.0], [g, 0.0]),
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidModel(format!("schedule: {m}")));
        if self.segments.is_empty() {
            return bad("no segments".into());
        }
        let mut prev: Option<(f64, f64)> = Some((0.0, 0.0));
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration >= 0.0) || !s.duration.is_finite() {
                return bad(format!("segment {i} has invalid duration {}", s.duration));
            }
            if (s.shape == RampShape::Instantaneous) != (s.duration == 0.0) {
                return bad(format!("segment {i}: zero duration exactly when instantaneous"));
            }
            if s.g1.iter().chain(&s.g2).any(|g| !(*g >= 0.0)) {
                return bad(format!("segment {i} has a negative coupling"));
            }
            let start = (s.g1[0], s.g2[0]);
            if let Some(p) = prev {
                if p != start {
                    return bad(format!("segment {i} starts at {start:?} but the previous one ends at {p:?}"));
                }
            }
            prev = Some((s.g1[1], s.g2[1]));
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn hold_index(&self) -> Option<usize> {
        self.segments
            .iter()
            .position(|s| s.is_constant() && s.g1[0] > 0.0 && s.g2[0] > 0.0)
    }
}

/// Initial |L⟩; the hopping τ acts only while both qubits are coupled.
pub fn simulate_tight_binding(tb: &TightBinding, schedule: &ProtocolSchedule) -> Result<f64> {
    schedule.validate()?;
    let (mut l, mut r) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    for s in &schedule.segments {
        let (g1, g2) = s.couplings_at(0.5);
        if g1 > 0.0 && g2 > 0.0 {
            let phi = tb.tau * s.duration;
            let (c, sn) = (Complex64::new(phi.cos(), 0.0), Complex64::new(0.0, phi.sin()));
            (l, r) = (c * l + sn * r, sn * l + c * r);
        }
    }
    Ok(r.norm_sqr())
}

#[derive(Debug, Clone, Copy)]
pub struct TransferOptions {
    pub steps_per_ramp: usize,
    pub hold_samples: usize,
}

impl Default for TransferOptions {
    fn default() -> Self {
        TransferOptions {
            steps_per_ramp: 200,
            hold_samples: 200,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferResult {
    pub times: Vec<f64>,
    pub population_a: Vec<f64>,
    pub population_b: Vec<f64>,
    pub segment_ends: Vec<f64>,
    pub fidelity: f64,
    pub norm_drift: f64,
}

enum Frame {
    Bare,
    Single {
        qubit: usize,
        vals: Vec<f64>,
        vecs: DMatrix<f64>,
        reps: Vec<usize>,
    },
    Pair {
        vals: Vec<f64>,
        vecs: DMatrix<Complex64>,
    },
}

struct Propagator<'a> {
    model: &'a ModelParams,
    grid: MomentumGrid,
}

impl<'a> Propagator<'a> {
    fn new(model: &'a ModelParams) -> Self {
        Propagator {
            model,
            grid: model.grid(),
        }
    }

    fn single_model(&self, qubit: usize, g: f64) -> ModelParams {
        ModelParams {
            couplings: vec![g],
            positions: vec![self.model.positions[qubit]],
            ..self.model.clone()
        }
    }

    fn frame(&mut self, g1: f64, g2: f64) -> Result<Frame> {
        match (g1 > 0.0, g2 > 0.0) {
            (false, false) => Ok(Frame::Bare),
            (true, false) | (false, true) => {
                let (qubit, g) = if g1 > 0.0 { (0, g1) } else { (1, g2) };
                let sol = solve_1q(&self.single_model(qubit, g))?;
                let (h, reps, _) = even_sector_1q(sol.delta_r, &sol.f_k, &self.grid.omega);
                let (vals, vecs) = eigh(h);
                Ok(Frame::Single { qubit, vals, vecs, reps })
            }
            (true, true) => {
                if g1 != g2 {
                    return Err(Error::Unsupported(format!(
                        "transfer frame with unequal nonzero couplings ({g1}, {g2})"
                    )));
                }
                let m = self.model.with_coupling(g1);
                let sol = solve_2q(&m)?;
                let (vals, vecs) = eigh(effective_hamiltonian_2q(&sol, &m)?);
                Ok(Frame::Pair { vals, vecs })
            }
        }
    }

    fn evolve(&self, frame: &Frame, psi: &mut [Complex64], t: f64) {
        let delta = self.model.delta;
        let grid = &self.grid;
        let n = grid.len();
        let rot = |e: f64| Complex64::from_polar(1.0, -e * t);
        match frame {
            Frame::Bare => {
                psi[0] *= rot(delta);
                psi[1] *= rot(delta);
                for k in 0..n {
                    psi[2 + k] *= rot(grid.omega[k]);
                }
            }
            Frame::Pair { vals, vecs } => {
                let d = vals.len();
                let coef: Vec<Complex64> = (0..d)
                    .map(|j| rot(vals[j]) * (0..d).map(|i| vecs[(i, j)].conj() * psi[i]).sum::<Complex64>())
                    .collect();
                for (i, out) in psi.iter_mut().enumerate() {
                    *out = (0..d).map(|j| vecs[(i, j)] * coef[j]).sum();
                }
            }
            Frame::Single { qubit, vals, vecs, reps } => {
                let other = 1 - qubit;
                psi[other] *= rot(delta);
                let x = self.model.positions[*qubit] as i64;
                let centered: Vec<Complex64> = (0..n).map(|k| grid.phase(k, -x) * psi[2 + k]).collect();
                let d = vals.len();
                let mut even = vec![Complex64::new(0.0, 0.0); d];
                let mut odd = vec![Complex64::new(0.0, 0.0); reps.len()];
                even[0] = psi[*qubit];
                for (i, &m) in reps.iter().enumerate() {
                    let p = grid.partner(m);
                    if p == m {
                        even[i + 1] = centered[m];
                    } else {
                        even[i + 1] = (centered[m] + centered[p]) * FRAC_1_SQRT_2;
                        odd[i] = (centered[m] - centered[p]) * FRAC_1_SQRT_2 * rot(grid.omega[m]);
                    }
                }
                let coef: Vec<Complex64> = (0..d)
                    .map(|j| rot(vals[j]) * (0..d).map(|i| even[i] * vecs[(i, j)]).sum::<Complex64>())
                    .collect();
                for (i, out) in even.iter_mut().enumerate() {
                    *out = (0..d).map(|j| coef[j] * vecs[(i, j)]).sum();
                }
                psi[*qubit] = even[0];
                for (i, &m) in reps.iter().enumerate() {
                    let p = grid.partner(m);
                    if p == m {
                        psi[2 + m] = grid.phase(m, x) * even[i + 1];
                    } else {
                        psi[2 + m] = grid.phase(m, x) * (even[i + 1] + odd[i]) / SQRT_2;
                        psi[2 + p] = grid.phase(p, x) * (even[i + 1] - odd[i]) / SQRT_2;
                    }
                }
            }
        }
    }
}

fn check_pair_model(model: &ModelParams) -> Result<()> {
    model.validate()?;
    if model.n_qubits() != 2 {
        return Err(Error::InvalidModel("transfer needs a two-qubit model".into()));
    }
    Ok(())
}

struct Trace {
    times: Vec<f64>,
    pa: Vec<f64>,
    pb: Vec<f64>,
    drift: f64,
}

impl Trace {
    fn record(&mut self, t: f64, psi: &[Complex64]) {
        self.times.push(t);
        self.pa.push(psi[0].norm_sqr());
        self.pb.push(psi[1].norm_sqr());
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        self.drift = self.drift.max((norm - 1.0).abs());
    }
}

fn run_segments(
    prop: &mut Propagator,
    segments: &[Segment],
    psi: &mut [Complex64],
    opts: &TransferOptions,
    trace: &mut Trace,
    segment_ends: &mut Vec<f64>,
) -> Result<()> {
    let mut t = trace.times.last().copied().unwrap_or(0.0);
    for seg in segments {
        if seg.shape == RampShape::Instantaneous {
            segment_ends.push(t);
            continue;
        }
        if seg.is_constant() {
            let (g1, g2) = (seg.g1[0], seg.g2[0]);
            let samples = opts.hold_samples.max(1);
            let dt = seg.duration / samples as f64;
            let frame = prop.frame(g1, g2)?;
            for _ in 0..samples {
                prop.evolve(&frame, psi, dt);
                t += dt;
                trace.record(t, psi);
            }
        } else {
            let steps = opts.steps_per_ramp.max(1);
            let dt = seg.duration / steps as f64;
            for i in 0..steps {
                let (g1, g2) = seg.couplings_at((i as f64 + 0.5) / steps as f64);
                let frame = prop.frame(g1, g2)?;
                prop.evolve(&frame, psi, dt);
                t += dt;
                trace.record(t, psi);
            }
        }
        segment_ends.push(t);
    }
    Ok(())
}

fn initial_state(n: usize) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); n + 2];
    psi[0] = Complex64::new(1.0, 0.0);
    psi
}

/// Runs the schedule from σ_a⁺|GS⟩; fidelity is the final |⟨σ_b⁺|ψ⟩|².
pub fn simulate_protocol(model: &ModelParams, schedule: &ProtocolSchedule, opts: &TransferOptions) -> Result<TransferResult> {
    check_pair_model(model)?;
    schedule.validate()?;
    let mut prop = Propagator::new(model);
    let mut psi = initial_state(model.n_sites);
    let mut trace = Trace {
        times: vec![],
        pa: vec![],
        pb: vec![],
        drift: 0.0,
    };
    trace.record(0.0, &psi);
    let mut ends = Vec::new();
    run_segments(&mut prop, &schedule.segments, &mut psi, opts, &mut trace, &mut ends)?;
    Ok(TransferResult {
        fidelity: psi[1].norm_sqr(),
        times: trace.times,
        population_a: trace.pa,
        population_b: trace.pb,
        segment_ends: ends,
        norm_drift: trace.drift,
    })
}

/// Equal-coupling Rabi dynamics measured on the state that enters the hold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RabiMeasurement {
    /// Time of the first maximum of |β_b|² during the hold; the tuned hold duration.
    pub first_peak: f64,
    pub peak_population: f64,
    /// Period of the least-squares sinusoid fitted to |β_b|² over 3.6 swap times.
    pub period: f64,
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Runs the segments before the hold, then follows |β_b|² under the hold frame.
pub fn measure_rabi(
    model: &ModelParams,
    schedule: &ProtocolSchedule,
    tb: &TightBinding,
    opts: &TransferOptions,
) -> Result<RabiMeasurement> {
    check_pair_model(model)?;
    schedule.validate()?;
    let hold = schedule
        .hold_index()
        .ok_or_else(|| Error::InvalidModel("schedule has no equal-coupling hold".into()))?;
    let g = schedule.segments[hold].g1[0];
    let mut prop = Propagator::new(model);
    let mut psi = initial_state(model.n_sites);
    let mut trace = Trace {
        times: vec![0.0],
        pa: vec![],
        pb: vec![],
        drift: 0.0,
    };
    run_segments(&mut prop, &schedule.segments[..hold], &mut psi, opts, &mut trace, &mut Vec::new())?;

    let frame = prop.frame(g, g)?;
    let pop = |t: f64| {
        let mut p = psi.clone();
        prop.evolve(&frame, &mut p, t);
        p[1].norm_sqr()
    };
    let horizon = 3.6 * tb.swap_time();
    let samples = 1800;
    let dt = horizon / samples as f64;
    let values: Vec<f64> = (0..=samples).map(|i| pop(i as f64 * dt)).collect();
    let times: Vec<f64> = (0..=samples).map(|i| i as f64 * dt).collect();
    let misfit = |w: f64| sinusoid_misfit(&times, &values, w);

    // Coarse log scan around the tight-binding guess, then golden-section refinement.
    let guess = 2.0 * tb.tau.abs();
    let scan: Vec<f64> = (0..=160).map(|i| guess * 4f64.powf(i as f64 / 80.0 - 1.0)).collect();
    let best = (1..scan.len() - 1)
        .min_by(|&a, &b| misfit(scan[a]).total_cmp(&misfit(scan[b])))
        .unwrap();
    let omega = golden_max(|w| -misfit(w), scan[best - 1], scan[best + 1]);
    let period = 2.0 * PI / omega;

    let window = ((0.75 * period / dt) as usize).min(samples);
    let i_max = (0..=window).max_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    let first_peak = golden_max(
        &pop,
        i_max.saturating_sub(1) as f64 * dt,
        (i_max + 1).min(samples) as f64 * dt,
    );
    Ok(RabiMeasurement {
        first_peak,
        peak_population: pop(first_peak),
        period,
    })
}

/// Residual sum of squares of the best fit a + b cos ωt + c sin ωt.
fn sinusoid_misfit(t: &[f64], y: &[f64], w: f64) -> f64 {
    let a = DMatrix::from_fn(t.len(), 3, |r, c| match c {
        0 => 1.0,
        1 => (w * t[r]).cos(),
        _ => (w * t[r]).sin(),
    });
    let y = nalgebra::DVector::from_column_slice(y);
    match (a.transpose() * &a).cholesky() {
        Some(ch) => {
            let coef = ch.solve(&(a.transpose() * &y));
            (a * coef - y).norm_squared()
        }
        None => f64::INFINITY,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SegmentReport {
    pub label: String,
    /// max |dg/dt| / (min gap)²; infinite for instantaneous segments.
    pub ratio: f64,
    pub min_gap: f64,
    pub diabatic: bool,
    pub violates: bool,
}

/// Gap between the coupled qubit's bound state and the band, for single-coupling frames.
fn ramp_gap(model: &ModelParams, qubit: usize, g: f64) -> Result<f64> {
    let m = ModelParams {
        couplings: vec![g],
        positions: vec![model.positions[qubit]],
        ..model.clone()
    };
    if g == 0.0 {
        return Ok(model.band_min() - model.delta);
    }
    let sol = solve_1q(&m)?;
    Ok(match find_bound_state_1q(&sol, &m) {
        Ok(bs) => model.band_min() - bs.energy,
        Err(Error::NoBoundState(_)) => 0.0,
        Err(e) => return Err(e),
    })
}

pub fn adiabaticity_check(schedule: &ProtocolSchedule, model: &ModelParams, threshold: f64) -> Result<Vec<SegmentReport>> {
    check_pair_model(model)?;
    schedule.validate()?;
    schedule
        .segments
        .iter()
        .map(|seg| {
            if seg.shape == RampShape::Instantaneous {
                return Ok(SegmentReport {
                    label: seg.label.clone(),
                    ratio: f64::INFINITY,
                    min_gap: f64::NAN,
                    diabatic: true,
                    violates: false,
                });
            }
            if seg.is_constant() {
                return Ok(SegmentReport {
                    label: seg.label.clone(),
                    ratio: 0.0,
                    min_gap: f64::NAN,
                    diabatic: false,
                    violates: false,
                });
            }
            let moving = if seg.g1[0] != seg.g1[1] { 0 } else { 1 };
            let (lo, hi) = if moving == 0 { (seg.g1[0], seg.g1[1]) } else { (seg.g2[0], seg.g2[1]) };
            let other = if moving == 0 { seg.g2 } else { seg.g1 };
            if other[0] != 0.0 || other[1] != 0.0 {
                return Err(Error::Unsupported(format!(
                    "segment '{}' ramps one coupling while the other is nonzero",
                    seg.label
                )));
            }
            let rate = seg.shape.max_slope() * (hi - lo).abs() / seg.duration;
            let mut min_gap = f64::INFINITY;
            for i in 0..=20 {
                let g = lo + (hi - lo) * i as f64 / 20.0;
                min_gap = min_gap.min(ramp_gap(model, moving, g)?);
            }
            let ratio = if min_gap > 0.0 { rate / (min_gap * min_gap) } else { f64::INFINITY };
            Ok(SegmentReport {
                label: seg.label.clone(),
                ratio,
                min_gap,
                diabatic: false,
                violates: ratio > threshold,
            })
        })
        .collect()
}
