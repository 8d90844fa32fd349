use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{BoundState, Parity};
use crate::error::Result;
use crate::linalg::eigh;
use crate::model::{coupling_k, ModelParams};
use crate::polaron_two::{coupling_of_pair, cos_kx_table, variational_energy_2q, PolaronSolution2Q};

/// Effective Hamiltonian on {σ₁⁺|GS⟩, σ₂⁺|GS⟩, b_k†|GS⟩}, energies measured from E_GS.
pub fn effective_hamiltonian_2q(sol: &PolaronSolution2Q, model: &ModelParams) -> Result<DMatrix<Complex64>> {
    let g = coupling_of_pair(model)?;
    let grid = model.grid();
    let n = grid.len();
    let c = coupling_k(g, model.n_sites);
    let dr = sol.delta_r;
    let cos2 = sol.cos_theta * sol.cos_theta - sol.sin_theta * sol.sin_theta;
    let xs: Vec<i64> = model.positions.iter().map(|&p| p as i64).collect();

    let coupling: Vec<f64> = sol
        .f_k
        .iter()
        .zip(&grid.omega)
        .map(|(f, w)| {
            let f0 = c / (dr + w);
            sol.cos_theta * (2.0 * dr * f0 + (f - f0) * (dr - w))
        })
        .collect();
    let phases: Vec<Vec<Complex64>> = xs
        .iter()
        .map(|&x| (0..n).map(|m| grid.phase(m, x)).collect())
        .collect();

    let mut h = DMatrix::<Complex64>::zeros(n + 2, n + 2);
    h[(0, 0)] = Complex64::new(sol.e_script, 0.0);
    h[(1, 1)] = Complex64::new(sol.e_script, 0.0);
    h[(0, 1)] = Complex64::new(-sol.j_ising, 0.0);
    h[(1, 0)] = Complex64::new(-sol.j_ising, 0.0);
    for k in 0..n {
        for (j, ph) in phases.iter().enumerate() {
            let v = ph[k] * coupling[k];
            h[(2 + k, j)] = v;
            h[(j, 2 + k)] = v.conj();
        }
        for p in 0..n {
            let geo: Complex64 = phases.iter().map(|ph| ph[k] * ph[p].conj()).sum();
            let mut v = geo * (2.0 * dr * cos2 * sol.f_k[k] * sol.f_k[p]);
            if k == p {
                v += grid.omega[k];
            }
            h[(2 + k, 2 + p)] = v;
        }
    }
    Ok(h)
}

fn label(a: Complex64, b: Complex64) -> Parity {
    let prod = a * b.conj();
    if prod.norm() < 1e-14 || prod.re >= 0.0 {
        Parity::Symmetric
    } else {
        Parity::Antisymmetric
    }
}

/// All eigenstates of the effective Hamiltonian below the band, ascending in energy.
pub fn find_bound_states_2q(sol: &PolaronSolution2Q, model: &ModelParams) -> Result<Vec<BoundState>> {
    let h = effective_hamiltonian_2q(sol, model)?;
    let w_min = model.band_min();
    let (vals, vecs) = eigh(h);
    Ok(vals
        .iter()
        .enumerate()
        .take_while(|(_, &e)| e < w_min)
        .map(|(i, &e)| {
            let col = vecs.column(i);
            let lead = if col[0].norm() >= col[1].norm() { col[0] } else { col[1] };
            let fix = if lead.norm() > 0.0 { lead.conj() / lead.norm() } else { Complex64::new(1.0, 0.0) };
            let v: Vec<Complex64> = col.iter().map(|z| z * fix).collect();
            BoundState {
                energy: e,
                absolute_energy: e + sol.e_gs,
                parity: Some(label(v[0], v[1])),
                qubit_amps: v[..2].to_vec(),
                lambda_k: v[2..].to_vec(),
            }
        })
        .collect())
}

/// ⟨b_n†b_n⟩ of a two-qubit single-excitation state.
pub fn bound_photon_distribution_2q(bs: &BoundState, sol: &PolaronSolution2Q, model: &ModelParams) -> Vec<f64> {
    let grid = model.grid();
    let f1 = grid.to_sites_even(&sol.f_k, model.positions[0]);
    let f2 = grid.to_sites_even(&sol.f_k, model.positions[1]);
    let l_n = bs.lambda_sites(&grid);
    let (a, b) = (sol.cos_theta, sol.sin_theta);
    let (la, lb) = (bs.qubit_amps[0], bs.qubit_amps[1]);
    let qubit_weight = 1.0 - la.norm_sqr() - lb.norm_sqr();
    let mix = (la * lb.conj()).re + a * b * qubit_weight;
    (0..grid.len())
        .map(|n| {
            let (x1, x2, l) = (f1[n], f2[n], l_n[n]);
            let drive = la * (a * x1 + b * x2) + lb * (b * x1 + a * x2);
            x1 * x1 + x2 * x2 + 4.0 * x1 * x2 * mix - 2.0 * (l.conj() * drive).re + l.norm_sqr()
        })
        .collect()
}

/// ‖(H_P − E_GS)|GS_P⟩‖: spin-sector residual, variational gradient and self-consistency.
pub fn variational_gs_is_eigenstate_2q(sol: &PolaronSolution2Q, model: &ModelParams) -> Result<f64> {
    let g = coupling_of_pair(model)?;
    let grid = model.grid();
    let c = coupling_k(g, model.n_sites);
    let cos_kx = cos_kx_table(&grid, sol.separation);
    let (dr, j, e) = (sol.delta_r, sol.j_ising, sol.e_script);

    // H_S on {|gg⟩, |ee⟩} with eigenvalue −ℰ.
    let (a, b) = (sol.cos_theta, sol.sin_theta);
    let r1 = -dr * a - j * b + e * a;
    let r2 = -j * a + dr * b + e * b;
    let mut total = r1 * r1 + r2 * r2;

    total += sol
        .f_k
        .iter()
        .zip(&grid.omega)
        .zip(&cos_kx)
        .map(|((f, w), ck)| {
            let half_grad = if e > 0.0 {
                (2.0 * dr * dr * f - 2.0 * j * (c - w * f) * ck) / e + 2.0 * w * f - 2.0 * c
            } else {
                0.0
            };
            half_grad * half_grad
        })
        .sum::<f64>();
    let s: f64 = sol.f_k.iter().map(|f| f * f).sum();
    total += (dr - model.delta * (-2.0 * s).exp()).powi(2);
    total += (e - dr.hypot(j)).powi(2);
    total += (sol.e_gs - variational_energy_2q(model, &sol.f_k)?).powi(2);
    Ok(total.sqrt())
}
