//! Rotating-wave reference model in the single-excitation sector.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::excitation::{upper_bound_state_possible, BoundState, Parity};
use crate::linalg::eigh;
use crate::model::{coupling_k, ModelParams};
use crate::numeric::bisect;

#[derive(Debug, Clone, Serialize)]
pub struct RwaState {
    pub state: BoundState,
    pub above_band: bool,
    /// Above-band state that the counter-rotating terms turn into a resonance.
    pub resonance_beyond_rwa: bool,
}

/// Number-conserving Hamiltonian on {σ_j⁺|0⟩, b_k†|0⟩}, energies measured from the vacuum.
pub fn rwa_hamiltonian(model: &ModelParams) -> Result<DMatrix<Complex64>> {
    model.validate()?;
    let grid = model.grid();
    let n = grid.len();
    let nq = model.n_qubits();
    let mut h = DMatrix::<Complex64>::zeros(n + nq, n + nq);
    for j in 0..nq {
        h[(j, j)] = Complex64::new(model.delta, 0.0);
        let c = coupling_k(model.couplings[j], n);
        for k in 0..n {
            let v = grid.phase(k, model.positions[j] as i64) * c;
            h[(nq + k, j)] = v;
            h[(j, nq + k)] = v.conj();
        }
    }
    for k in 0..n {
        h[(nq + k, nq + k)] = Complex64::new(grid.omega[k], 0.0);
    }
    Ok(h)
}

/// Out-of-band eigenstates, ascending in energy.
pub fn rwa_bound_states(model: &ModelParams) -> Result<Vec<RwaState>> {
    model.validate()?;
    let upper_ok = upper_bound_state_possible(model);
    let wrap = |state: BoundState| {
        let above = state.energy > model.band_max();
        RwaState {
            state,
            above_band: above,
            resonance_beyond_rwa: above && !upper_ok,
        }
    };
    if model.n_qubits() == 1 {
        return Ok(single_qubit_states(model).into_iter().map(wrap).collect());
    }
    let h = rwa_hamiltonian(model)?;
    let (lo, hi) = (model.band_min(), model.band_max());
    let (vals, vecs) = eigh(h);
    Ok(vals
        .iter()
        .enumerate()
        .filter(|(_, &e)| e < lo || e > hi)
        .map(|(i, &e)| {
            let col = vecs.column(i);
            let lead = if col[0].norm() >= col[1].norm() { col[0] } else { col[1] };
            let fix = if lead.norm() > 0.0 { lead.conj() / lead.norm() } else { Complex64::new(1.0, 0.0) };
            let v: Vec<Complex64> = col.iter().map(|z| z * fix).collect();
            let prod = v[0] * v[1].conj();
            let parity = if prod.norm() < 1e-14 || prod.re >= 0.0 {
                Parity::Symmetric
            } else {
                Parity::Antisymmetric
            };
            wrap(BoundState {
                energy: e,
                absolute_energy: e - model.delta,
                qubit_amps: v[..2].to_vec(),
                lambda_k: v[2..].to_vec(),
                parity: Some(parity),
            })
        })
        .collect())
}

fn single_qubit_states(model: &ModelParams) -> Vec<BoundState> {
    let grid = model.grid();
    let n = grid.len();
    let c = coupling_k(model.couplings[0], n);
    let delta = model.delta;
    let secular = |e: f64| e - delta - c * c * grid.omega.iter().map(|w| 1.0 / (e - w)).sum::<f64>();
    let (w_lo, w_hi) = (grid.omega_min(), grid.omega.iter().cloned().fold(f64::MIN, f64::max));
    let g = model.couplings[0];
    let scale = model.lambda_hop;

    let mut roots = Vec::new();
    // Below the band F increases from −∞ to +∞ at the edge (for g > 0); above, from −∞ to +∞.
    let far_lo = delta.min(w_lo) - 1.0 - g;
    let mut gap = 1e-3 * scale;
    while gap > 1e-15 * w_lo && secular(w_lo - gap) <= 0.0 {
        gap *= 0.1;
    }
    if secular(w_lo - gap) > 0.0 {
        roots.push(bisect(secular, far_lo, w_lo - gap));
    }
    let far_hi = delta.max(w_hi) + 1.0 + g;
    let mut gap = 1e-3 * scale;
    while gap > 1e-15 * w_hi && secular(w_hi + gap) >= 0.0 {
        gap *= 0.1;
    }
    if secular(w_hi + gap) < 0.0 {
        roots.push(bisect(secular, w_hi + gap, far_hi));
    }

    let x = model.positions[0] as i64;
    roots
        .into_iter()
        .map(|e| {
            let raw: Vec<Complex64> = (0..n).map(|k| grid.phase(k, x) * (c / (e - grid.omega[k]))).collect();
            let norm = (1.0 + raw.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
            BoundState {
                energy: e,
                absolute_energy: e - 0.5 * delta,
                qubit_amps: vec![Complex64::new(1.0 / norm, 0.0)],
                lambda_k: raw.into_iter().map(|z| z / norm).collect(),
                parity: None,
            }
        })
        .collect()
}

/// The RWA ground state is the empty waveguide.
pub fn rwa_gs_photons(model: &ModelParams) -> Vec<f64> {
    vec![0.0; model.n_sites]
}

/// ⟨b_n†b_n⟩ = |λ_n|² of an RWA eigenstate.
pub fn rwa_photon_distribution(bs: &BoundState, model: &ModelParams) -> Vec<f64> {
    bs.lambda_sites(&model.grid()).iter().map(|z| z.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_qubit_secular_matches_dense() {
        let m = ModelParams::single(0.9, 1.0, 0.2, 0.2, 80).unwrap();
        let states = rwa_bound_states(&m).unwrap();
        assert_eq!(states.len(), 2);
        let (vals, _) = eigh(rwa_hamiltonian(&m).unwrap());
        assert_relative_eq!(states[0].state.energy, vals[0], max_relative = 1e-12);
        assert_relative_eq!(states[1].state.energy, *vals.last().unwrap(), max_relative = 1e-12);
        assert!(states[1].above_band && !states[1].resonance_beyond_rwa);
        for s in &states {
            assert_relative_eq!(s.state.norm_sqr(), 1.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn resonance_flag_when_band_too_wide() {
        let m = ModelParams::single(0.9, 1.0, 0.3, 0.2, 40).unwrap();
        let states = rwa_bound_states(&m).unwrap();
        assert!(states.iter().any(|s| s.resonance_beyond_rwa));
    }

    #[test]
    fn ground_state_has_no_photons() {
        let m = ModelParams::single(0.3, 1.0, 0.2, 0.5, 30).unwrap();
        assert!(rwa_gs_photons(&m).iter().all(|&v| v == 0.0));
    }
}
