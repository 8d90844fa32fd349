//! Spontaneous emission of an excited qubit in the Polaron frame.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::excitation::{even_sector_1q, sigma_z_single_excitation, BoundState};
use crate::linalg::eigh;
use crate::model::{spectral_density, ModelParams};
use crate::numeric::linear_fit;
use crate::polaron_single::PolaronSolution1Q;

#[derive(Debug, Clone, Serialize)]
pub struct EmissionResult {
    pub times: Vec<f64>,
    pub sigma_z_lab: Vec<f64>,
    /// |β(t)|² in the Polaron frame.
    pub qubit_population: Vec<f64>,
    /// Overlap λ₀ of the initial state with the lowest eigenstate when it lies below the band.
    pub lambda0: Option<f64>,
    pub stationary_prediction: Option<f64>,
    pub markov_fgr: Option<Vec<f64>>,
    pub markov_renormalized: Option<Vec<f64>>,
    pub norm_drift: f64,
}

impl EmissionResult {
    /// Mean of ⟨σᶻ⟩ over the last `fraction` of the samples.
    pub fn tail_average(&self, fraction: f64) -> f64 {
        let tail = self.tail(fraction);
        tail.iter().sum::<f64>() / tail.len() as f64
    }

    pub fn tail_variance(&self, fraction: f64) -> f64 {
        let tail = self.tail(fraction);
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        tail.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / tail.len() as f64
    }

    fn tail(&self, fraction: f64) -> &[f64] {
        let n = self.sigma_z_lab.len();
        let start = ((1.0 - fraction) * n as f64).floor() as usize;
        &self.sigma_z_lab[start.min(n - 1)..]
    }

    /// Exponential rate of |β|² fitted where it lies within [p_lo, p_hi], before any revival.
    pub fn early_decay_rate(&self, p_lo: f64, p_hi: f64) -> Result<f64> {
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (t, p) in self.times.iter().zip(&self.qubit_population) {
            if *p < p_lo {
                break;
            }
            if *p <= p_hi {
                xs.push(*t);
                ys.push(p.ln());
            }
        }
        Ok(-linear_fit(&xs, &ys)?.0)
    }
}

/// ⟨σᶻ(t)⟩ = 2e^{−Γt} − 1 with Γ = J(ω_q), ω_q = Δ_r or Δ.
pub fn markov_baseline(model: &ModelParams, omega_q: f64, times: &[f64]) -> Result<Vec<f64>> {
    let rate = spectral_density(model.couplings[0], model.omega0, model.lambda_hop, omega_q)?;
    Ok(times.iter().map(|t| 2.0 * (-rate * t).exp() - 1.0).collect())
}

/// λ₀²⟨E₁|σᶻ_lab|E₁⟩ − (1 − λ₀²)Δ_r/Δ.
pub fn stationary_value(bs: &BoundState, sol: &PolaronSolution1Q, model: &ModelParams) -> f64 {
    let l0 = bs.qubit_amps[0].norm_sqr();
    let bound = sigma_z_single_excitation(sol, model, bs.qubit_amps[0], &bs.lambda_k);
    l0 * bound - (1.0 - l0) * sol.delta_r / model.delta
}

/// Exact propagation of σ⁺|GS⟩ by diagonalizing the parity-even block.
pub fn evolve_emission(sol: &PolaronSolution1Q, model: &ModelParams, t_max: f64, dt: f64) -> Result<EmissionResult> {
    if !(t_max > 0.0 && dt > 0.0 && dt <= t_max) {
        return Err(Error::Domain(format!("need 0 < dt <= t_max, got dt={dt}, t_max={t_max}")));
    }
    let grid = model.grid();
    let (h, reps, weights) = even_sector_1q(sol.delta_r, &sol.f_k, &grid.omega);
    let (vals, vecs) = eigh(h);
    let d = vals.len();

    let fr: Vec<f64> = reps.iter().zip(&weights).map(|(&m, w)| w * sol.f_k[m]).collect();
    let c: Vec<f64> = (0..d).map(|j| vecs[(0, j)]).collect();
    let phi: Vec<f64> = (0..d)
        .map(|j| (1..d).map(|i| fr[i - 1] * vecs[(i, j)]).sum())
        .collect();

    let steps = (t_max / dt).round() as usize;
    let times: Vec<f64> = (0..=steps).map(|s| s as f64 * dt).collect();
    let ratio = sol.delta_r / model.delta;
    let mut sigma_z = Vec::with_capacity(times.len());
    let mut population = Vec::with_capacity(times.len());
    for &t in &times {
        let mut b0 = Complex64::new(0.0, 0.0);
        let mut ph = Complex64::new(0.0, 0.0);
        for j in 0..d {
            let rot = Complex64::from_polar(c[j], -vals[j] * t);
            b0 += rot * c[j];
            ph += rot * phi[j];
        }
        let p = b0.norm_sqr();
        population.push(p);
        sigma_z.push(ratio * (2.0 * p - 1.0 + 4.0 * (b0.conj() * ph).re + 4.0 * ph.norm_sqr()));
    }

    // Rebuild full state vectors at a few checkpoints to measure unitarity.
    let mut drift = 0.0f64;
    for s in [0, steps / 2, steps] {
        let t = times[s];
        let coef: Vec<Complex64> = (0..d).map(|j| Complex64::from_polar(c[j], -vals[j] * t)).collect();
        let norm: f64 = (0..d)
            .map(|i| (0..d).map(|j| coef[j] * vecs[(i, j)]).sum::<Complex64>().norm_sqr())
            .sum();
        drift = drift.max((norm - 1.0).abs());
    }

    let (lambda0, stationary) = if vals[0] < model.band_min() {
        let l0 = c[0].abs();
        let mut v: Vec<f64> = (0..d).map(|i| vecs[(i, 0)]).collect();
        if v[0] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let bound_z = bound_sigma_z(&v, &fr, ratio);
        (Some(l0), Some(l0 * l0 * bound_z - (1.0 - l0 * l0) * ratio))
    } else {
        (None, None)
    };

    Ok(EmissionResult {
        markov_fgr: markov_baseline(model, model.delta, &times).ok(),
        markov_renormalized: markov_baseline(model, sol.delta_r, &times).ok(),
        times,
        sigma_z_lab: sigma_z,
        qubit_population: population,
        lambda0,
        stationary_prediction: stationary,
        norm_drift: drift,
    })
}

fn bound_sigma_z(v: &[f64], fr: &[f64], ratio: f64) -> f64 {
    let b0 = v[0];
    let phi: f64 = v[1..].iter().zip(fr).map(|(a, f)| a * f).sum();
    let photons: f64 = v[1..].iter().map(|a| a * a).sum();
    ratio * (b0 * b0 - photons + 4.0 * b0 * phi + 4.0 * phi * phi)
}
