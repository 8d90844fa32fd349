//! Variational Polaron ground state of two equally coupled qubits.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{coupling_k, MomentumGrid, ModelParams};
use crate::polaron_single::{solve_1q_with, FixedPointOptions};

/// Coefficient of the F₁F₂ interference term in the two-qubit GS photon profile.
pub const GS_INTERFERENCE_COEFF: f64 = 4.0;

#[derive(Debug, Clone, Serialize)]
pub struct PolaronSolution2Q {
    pub f_k: Vec<f64>,
    pub delta_r: f64,
    pub j_ising: f64,
    pub e_script: f64,
    pub cos_theta: f64,
    pub sin_theta: f64,
    pub e_gs: f64,
    pub separation: usize,
    pub iterations: usize,
    pub residual: f64,
}

impl PolaronSolution2Q {
    pub fn theta(&self) -> f64 {
        self.sin_theta.atan2(self.cos_theta)
    }
}

pub(crate) fn coupling_of_pair(model: &ModelParams) -> Result<f64> {
    model.validate()?;
    if model.n_qubits() != 2 {
        return Err(Error::InvalidModel(format!(
            "expected 2 qubits, model has {}",
            model.n_qubits()
        )));
    }
    let (g1, g2) = (model.couplings[0], model.couplings[1]);
    if g1 != g2 {
        return Err(Error::Unsupported(format!(
            "two-qubit Polaron solution requires equal couplings, got {g1} and {g2}"
        )));
    }
    Ok(g1)
}

/// Displacements for given (Δ_r, 𝒥).
fn displacements_2q(c: f64, delta_r: f64, j: f64, omega: &[f64], cos_kx: &[f64]) -> Vec<f64> {
    let e = delta_r.hypot(j);
    omega
        .iter()
        .zip(cos_kx)
        .map(|(w, ck)| c * (e + j * ck) / (w * e + w * j * ck + delta_r * delta_r))
        .collect()
}

fn ising(c: f64, f: &[f64], omega: &[f64], cos_kx: &[f64]) -> f64 {
    2.0 * f
        .iter()
        .zip(omega)
        .zip(cos_kx)
        .map(|((f, w), ck)| f * (2.0 * c - w * f) * ck)
        .sum::<f64>()
}

pub(crate) fn cos_kx_table(grid: &MomentumGrid, x: usize) -> Vec<f64> {
    (0..grid.len()).map(|m| grid.cos_kd(m, x as i64)).collect()
}

pub fn solve_2q(model: &ModelParams) -> Result<PolaronSolution2Q> {
    solve_2q_with(model, &FixedPointOptions::default())
}

/// Damped joint update of (Δ_r, 𝒥); f_k is eliminated in closed form at every step.
pub fn solve_2q_with(model: &ModelParams, opts: &FixedPointOptions) -> Result<PolaronSolution2Q> {
    let g = coupling_of_pair(model)?;
    let x = model.separation().expect("two qubits");
    let grid = model.grid();
    let c = coupling_k(g, model.n_sites);
    let cos_kx = cos_kx_table(&grid, x);
    let delta = model.delta;

    let single = ModelParams::single(delta, model.omega0, model.lambda_hop, g, model.n_sites)?;
    let seed = solve_1q_with(&single, opts)?;
    let mut dr = seed.delta_r;
    let mut j = ising(c, &seed.f_k, &grid.omega, &cos_kx);

    let map = |dr: f64, j: f64| {
        let f = displacements_2q(c, dr, j, &grid.omega, &cos_kx);
        let s: f64 = f.iter().map(|v| v * v).sum();
        (delta * (-2.0 * s).exp(), ising(c, &f, &grid.omega, &cos_kx))
    };
    let mut iterations = 0;
    let (mut dr_new, mut j_new) = map(dr, j);
    let mut residual = (dr_new - dr).abs().max((j_new - j).abs());
    while residual >= opts.tol * delta {
        if iterations >= opts.max_iter {
            return Err(Error::Convergence {
                what: "two-qubit Polaron fixed point",
                iterations,
                residual,
            });
        }
        dr += opts.mixing * (dr_new - dr);
        j += opts.mixing * (j_new - j);
        (dr_new, j_new) = map(dr, j);
        residual = (dr_new - dr).abs().max((j_new - j).abs());
        iterations += 1;
    }

    let f_k = displacements_2q(c, dr, j, &grid.omega, &cos_kx);
    let e_script = dr.hypot(j);
    let norm = (dr + e_script).hypot(j);
    let e_gs = -e_script
        + 2.0
            * f_k
                .iter()
                .zip(&grid.omega)
                .map(|(f, w)| f * (w * f - 2.0 * c))
                .sum::<f64>();
    Ok(PolaronSolution2Q {
        f_k,
        delta_r: dr,
        j_ising: j,
        e_script,
        cos_theta: (dr + e_script) / norm,
        sin_theta: j / norm,
        e_gs,
        separation: x,
        iterations,
        residual,
    })
}

/// Ē_GS(f) with Δ_r and 𝒥 taken as functionals of f.
pub fn variational_energy_2q(model: &ModelParams, f: &[f64]) -> Result<f64> {
    let g = coupling_of_pair(model)?;
    let x = model.separation().expect("two qubits");
    let grid = model.grid();
    let c = coupling_k(g, model.n_sites);
    let cos_kx = cos_kx_table(&grid, x);
    let s: f64 = f.iter().map(|v| v * v).sum();
    let dr = model.delta * (-2.0 * s).exp();
    let j = ising(c, f, &grid.omega, &cos_kx);
    Ok(-dr.hypot(j)
        + 2.0 * f.iter().zip(&grid.omega).map(|(f, w)| f * (w * f - 2.0 * c)).sum::<f64>())
}

pub fn excited_probability_2q(sol: &PolaronSolution2Q, delta: f64) -> f64 {
    let cos2 = sol.cos_theta * sol.cos_theta - sol.sin_theta * sol.sin_theta;
    1.0 - (sol.delta_r / delta) * cos2
}

/// Site-space displacement clouds (F₁, F₂) of the two qubits.
pub fn displacement_sites_2q(
    sol: &PolaronSolution2Q,
    model: &ModelParams,
    grid: &MomentumGrid,
) -> (Vec<f64>, Vec<f64>) {
    (
        grid.to_sites_even(&sol.f_k, model.positions[0]),
        grid.to_sites_even(&sol.f_k, model.positions[1]),
    )
}

pub fn photon_distribution_gs_2q(sol: &PolaronSolution2Q, model: &ModelParams) -> Vec<f64> {
    photon_distribution_gs_2q_coeff(sol, model, GS_INTERFERENCE_COEFF)
}

/// Profile F₁² + F₂² + coeff·αβ·F₁F₂ with an explicit interference coefficient.
pub fn photon_distribution_gs_2q_coeff(sol: &PolaronSolution2Q, model: &ModelParams, coeff: f64) -> Vec<f64> {
    let (f1, f2) = displacement_sites_2q(sol, model, &model.grid());
    let ab = sol.cos_theta * sol.sin_theta;
    f1.iter()
        .zip(&f2)
        .map(|(a, b)| a * a + b * b + coeff * ab * a * b)
        .collect()
}
