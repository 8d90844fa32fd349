use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::BoundState;
use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::model::{coupling_k, ModelParams};
use crate::polaron_single::{bound_decay_rate, kappa_gs, variational_energy_1q, PolaronSolution1Q};

/// Qubit-centered effective Hamiltonian on {σ⁺|GS⟩, b_k†|GS⟩}, energies measured from E_GS.
pub fn effective_hamiltonian_1q(sol: &PolaronSolution1Q, model: &ModelParams) -> DMatrix<f64> {
    let grid = model.grid();
    let n = grid.len();
    let dr = sol.delta_r;
    let f = &sol.f_k;
    DMatrix::from_fn(n + 1, n + 1, |r, c| match (r, c) {
        (0, 0) => dr,
        (0, p) | (p, 0) => 2.0 * dr * f[p - 1],
        (k, p) => {
            let diag = if k == p { grid.omega[k - 1] } else { 0.0 };
            diag + 2.0 * dr * f[k - 1] * f[p - 1]
        }
    })
}

/// Parity-even block of the qubit-centered Hamiltonian.
///
/// Basis: the qubit, then one symmetric combination per {k, −k} orbit; `weights[i]` is √2 for
/// a pair and 1 for the self-partnered points k = 0, −π. Returns (matrix, orbit representatives, weights).
pub(crate) fn even_sector_1q(delta_r: f64, f: &[f64], omega: &[f64]) -> (DMatrix<f64>, Vec<usize>, Vec<f64>) {
    let n = f.len();
    let mut reps = Vec::new();
    let mut weights = Vec::new();
    for m in 0..=n / 2 {
        let p = (n - m) % n;
        reps.push(m);
        weights.push(if p == m { 1.0 } else { std::f64::consts::SQRT_2 });
    }
    let fr: Vec<f64> = reps.iter().zip(&weights).map(|(&m, w)| w * f[m]).collect();
    let d = reps.len() + 1;
    let h = DMatrix::from_fn(d, d, |r, c| match (r, c) {
        (0, 0) => delta_r,
        (0, p) | (p, 0) => 2.0 * delta_r * fr[p - 1],
        (k, p) => {
            let diag = if k == p { omega[reps[k - 1]] } else { 0.0 };
            diag + 2.0 * delta_r * fr[k - 1] * fr[p - 1]
        }
    });
    (h, reps, weights)
}

/// Lab-basis photon amplitudes from qubit-centered ones.
fn to_lab(model: &ModelParams, centered: &[f64]) -> Vec<Complex64> {
    let grid = model.grid();
    let x = model.positions[0] as i64;
    centered
        .iter()
        .enumerate()
        .map(|(m, a)| grid.phase(m, x) * *a)
        .collect()
}

struct Secular<'a> {
    dr: f64,
    f: &'a [f64],
    omega: &'a [f64],
}

impl Secular<'_> {
    fn s(&self, e: f64) -> (f64, f64) {
        self.f.iter().zip(self.omega).fold((0.0, 0.0), |(s, ds), (f, w)| {
            let d = e - w;
            (s + f * f / d, ds - f * f / (d * d))
        })
    }

    /// Exact rank-one secular function and its derivative.
    fn eval(&self, e: f64) -> (f64, f64) {
        let (s, ds) = self.s(e);
        let den = 1.0 - 2.0 * self.dr * s;
        let val = e - self.dr - 4.0 * self.dr * self.dr * s / den;
        let der = 1.0 - 4.0 * self.dr * self.dr * ds / (den * den);
        (val, der)
    }
}

/// Lowest bound state by root-finding the secular function below the band.
pub fn find_bound_state_1q(sol: &PolaronSolution1Q, model: &ModelParams) -> Result<BoundState> {
    let grid = model.grid();
    let w_min = grid.omega_min();
    let sec = Secular {
        dr: sol.delta_r,
        f: &sol.f_k,
        omega: &grid.omega,
    };

    let mut lo = -sol.delta_r - 1.0;
    let mut gap = 1e-3 * model.lambda_hop;
    let mut hi = w_min - gap;
    while sec.eval(hi).0 <= 0.0 {
        gap *= 0.1;
        if gap < 1e-14 * w_min {
            return Err(Error::NoBoundState(format!(
                "secular function has no sign change below the band edge {w_min}"
            )));
        }
        hi = w_min - gap;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sec.eval(mid).0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut e = 0.5 * (lo + hi);
    let (val, der) = sec.eval(e);
    let polished = e - val / der;
    if polished > lo && polished < hi {
        e = polished;
    }

    let (s, _) = sec.s(e);
    let den = 1.0 - 2.0 * sol.delta_r * s;
    let mut lam: Vec<f64> = sol
        .f_k
        .iter()
        .zip(&grid.omega)
        .map(|(f, w)| -2.0 * sol.delta_r * f / ((w - e) * den))
        .collect();
    let norm = (1.0 + lam.iter().map(|l| l * l).sum::<f64>()).sqrt();
    lam.iter_mut().for_each(|l| *l /= norm);
    Ok(BoundState {
        energy: e,
        absolute_energy: e + sol.e_gs,
        qubit_amps: vec![Complex64::new(1.0 / norm, 0.0)],
        lambda_k: to_lab(model, &lam),
        parity: None,
    })
}

/// Lowest eigenpair of the dense effective Hamiltonian; oracle for the root finder.
pub fn find_bound_state_1q_dense(sol: &PolaronSolution1Q, model: &ModelParams) -> Result<BoundState> {
    let h = effective_hamiltonian_1q(sol, model);
    let (vals, vecs) = eigh(h);
    let e = vals[0];
    if e >= model.band_min() {
        return Err(Error::NoBoundState(format!("lowest eigenvalue {e} is inside the band")));
    }
    let mut v: DVector<f64> = vecs.column(0).into_owned();
    if v[0] < 0.0 {
        v.neg_mut();
    }
    Ok(BoundState {
        energy: e,
        absolute_energy: e + sol.e_gs,
        qubit_amps: vec![Complex64::new(v[0], 0.0)],
        lambda_k: to_lab(model, &v.as_slice()[1..]),
        parity: None,
    })
}

/// ⟨b_n†b_n⟩ of the single-excitation bound state.
pub fn sebs_photon_distribution(bs: &BoundState, sol: &PolaronSolution1Q, model: &ModelParams) -> Vec<f64> {
    let grid = model.grid();
    let f_n = grid.to_sites_even(&sol.f_k, model.positions[0]);
    let l_n = bs.lambda_sites(&grid);
    let l0 = bs.qubit_amps[0];
    f_n.iter()
        .zip(&l_n)
        .map(|(f, l)| f * f + l.norm_sqr() - 2.0 * f * (l0.conj() * l).re)
        .collect()
}

/// κ = arccosh((ω₀ − E₁)/2λ) of the photon pole.
pub fn sebs_kappa(bs: &BoundState, model: &ModelParams) -> Result<f64> {
    bound_decay_rate(model, bs.energy)
}

/// max(1/κ_GS, 1/κ).
pub fn sebs_localization_length(bs: &BoundState, sol: &PolaronSolution1Q, model: &ModelParams) -> Result<f64> {
    let k_gs = kappa_gs(sol, model)?;
    let k = sebs_kappa(bs, model)?;
    Ok((1.0 / k_gs).max(1.0 / k))
}

/// Lab-frame ⟨σᶻ⟩ of β₀σ⁺|GS⟩ + Σβ_k b_k†|GS⟩ (lab photon basis), to second order in f.
pub fn sigma_z_single_excitation(
    sol: &PolaronSolution1Q,
    model: &ModelParams,
    beta0: Complex64,
    beta_k: &[Complex64],
) -> f64 {
    let grid = model.grid();
    let x = model.positions[0] as i64;
    let phi: Complex64 = sol
        .f_k
        .iter()
        .zip(beta_k)
        .enumerate()
        .map(|(m, (f, b))| grid.phase(m, -x) * *b * *f)
        .sum();
    let photons: f64 = beta_k.iter().map(|b| b.norm_sqr()).sum();
    (sol.delta_r / model.delta)
        * (beta0.norm_sqr() - photons + 4.0 * (beta0.conj() * phi).re + 4.0 * phi.norm_sqr())
}

/// ‖(H_P − E_GS)|GS_P⟩‖ within the single-photon truncation of H_P.
pub fn variational_gs_is_eigenstate_1q(sol: &PolaronSolution1Q, model: &ModelParams) -> f64 {
    let grid = model.grid();
    let c = coupling_k(model.couplings[0], model.n_sites);
    let one_photon: f64 = sol
        .f_k
        .iter()
        .zip(&grid.omega)
        .map(|(f, w)| (c - (sol.delta_r + w) * f).powi(2))
        .sum();
    let fp = sol.delta_r - model.delta * (-2.0 * sol.f_k.iter().map(|f| f * f).sum::<f64>()).exp();
    let energy = sol.e_gs - variational_energy_1q(model, &sol.f_k);
    (one_photon + fp * fp + energy * energy).sqrt()
}
