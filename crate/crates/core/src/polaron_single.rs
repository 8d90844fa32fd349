//! Variational Polaron ground state of one qubit.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{coupling_k, MomentumGrid, ModelParams};

/// Damped fixed-point settings shared by the one- and two-qubit solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    pub mixing: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            mixing: 0.5,
            tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PolaronSolution1Q {
    pub f_k: Vec<f64>,
    pub delta_r: f64,
    pub e_gs: f64,
    pub iterations: usize,
    pub residual: f64,
}

fn require_qubits(model: &ModelParams, n: usize) -> Result<()> {
    model.validate()?;
    if model.n_qubits() != n {
        return Err(Error::InvalidModel(format!(
            "expected {n} qubit(s), model has {}",
            model.n_qubits()
        )));
    }
    Ok(())
}

pub(crate) fn displacements(c: f64, delta_r: f64, omega: &[f64]) -> Vec<f64> {
    omega.iter().map(|w| c / (delta_r + w)).collect()
}

fn sum_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub fn solve_1q(model: &ModelParams) -> Result<PolaronSolution1Q> {
    solve_1q_with(model, &FixedPointOptions::default())
}

pub fn solve_1q_with(model: &ModelParams, opts: &FixedPointOptions) -> Result<PolaronSolution1Q> {
    require_qubits(model, 1)?;
    let grid = model.grid();
    let c = coupling_k(model.couplings[0], model.n_sites);
    let delta = model.delta;
    let map = |dr: f64| delta * (-2.0 * sum_sq(&displacements(c, dr, &grid.omega))).exp();

    let mut dr = delta;
    let mut residual = (map(dr) - dr).abs();
    let mut iterations = 0;
    while residual >= opts.tol * delta {
        if iterations >= opts.max_iter {
            return Err(Error::Convergence {
                what: "single-qubit Polaron fixed point",
                iterations,
                residual,
            });
        }
        dr = (1.0 - opts.mixing) * dr + opts.mixing * map(dr);
        residual = (map(dr) - dr).abs();
        iterations += 1;
    }
    let f_k = displacements(c, dr, &grid.omega);
    let e_gs = energy_1q(dr, &f_k, c, &grid.omega);
    Ok(PolaronSolution1Q {
        f_k,
        delta_r: dr,
        e_gs,
        iterations,
        residual,
    })
}

fn energy_1q(delta_r: f64, f: &[f64], c: f64, omega: &[f64]) -> f64 {
    -0.5 * delta_r + f.iter().zip(omega).map(|(f, w)| w * f * f - 2.0 * c * f).sum::<f64>()
}

/// Ē_GS for arbitrary (not necessarily optimal) displacements.
pub fn variational_energy_1q(model: &ModelParams, f: &[f64]) -> f64 {
    let grid = model.grid();
    let c = coupling_k(model.couplings[0], model.n_sites);
    let dr = model.delta * (-2.0 * sum_sq(f)).exp();
    energy_1q(dr, f, c, &grid.omega)
}

pub fn excited_probability(sol: &PolaronSolution1Q, delta: f64) -> f64 {
    0.5 * (1.0 - sol.delta_r / delta)
}

pub fn sigma_z_gs(sol: &PolaronSolution1Q, delta: f64) -> f64 {
    -sol.delta_r / delta
}

/// Site-space displacement f_n centered on the qubit.
pub fn displacement_sites(sol: &PolaronSolution1Q, model: &ModelParams, grid: &MomentumGrid) -> Vec<f64> {
    grid.to_sites_even(&sol.f_k, model.positions[0])
}

/// ⟨b_n†b_n⟩ in the Polaron ground state.
pub fn photon_distribution_gs(sol: &PolaronSolution1Q, model: &ModelParams) -> Vec<f64> {
    displacement_sites(sol, model, &model.grid())
        .into_iter()
        .map(|f| f * f)
        .collect()
}

/// Decay rate of a state bound at energy `e` below the band: arccosh((ω₀ − e)/2λ).
pub fn bound_decay_rate(model: &ModelParams, e: f64) -> Result<f64> {
    let arg = (model.omega0 - e) / (2.0 * model.lambda_hop);
    if !(arg > 1.0) {
        return Err(Error::Domain(format!(
            "arccosh argument {arg} <= 1: energy {e} is not below the band"
        )));
    }
    Ok(arg.acosh())
}

/// κ_GS = arccosh((ω₀ + Δ_r)/2λ).
pub fn kappa_gs(sol: &PolaronSolution1Q, model: &ModelParams) -> Result<f64> {
    bound_decay_rate(model, -sol.delta_r)
}

pub fn gs_localization_length(sol: &PolaronSolution1Q, model: &ModelParams) -> Result<f64> {
    Ok(1.0 / kappa_gs(sol, model)?)
}
