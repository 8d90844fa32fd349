//! Single-excitation manifold of the Polaron-frame Hamiltonian: bound states for one and two qubits.

mod single;
mod two;

use num_complex::Complex64;
use serde::Serialize;

use crate::model::{MomentumGrid, ModelParams};

pub use single::{
    effective_hamiltonian_1q, find_bound_state_1q, find_bound_state_1q_dense, sebs_kappa, sebs_localization_length,
    sebs_photon_distribution, sigma_z_single_excitation, variational_gs_is_eigenstate_1q,
};
pub(crate) use single::even_sector_1q;
pub use two::{
    bound_photon_distribution_2q, effective_hamiltonian_2q, find_bound_states_2q, variational_gs_is_eigenstate_2q,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

impl Parity {
    pub fn label(self) -> &'static str {
        match self {
            Parity::Symmetric => "symmetric",
            Parity::Antisymmetric => "antisymmetric",
        }
    }
}

/// Eigenstate of an effective single-excitation Hamiltonian.
///
/// `energy` is measured from the ground state of the same frame; `qubit_amps` holds λ₀ for one
/// qubit and (λ_a, λ_b) for two. Photon amplitudes are in the lab momentum basis.
#[derive(Debug, Clone, Serialize)]
pub struct BoundState {
    pub energy: f64,
    pub absolute_energy: f64,
    pub qubit_amps: Vec<Complex64>,
    pub lambda_k: Vec<Complex64>,
    pub parity: Option<Parity>,
}

impl BoundState {
    pub fn norm_sqr(&self) -> f64 {
        self.qubit_amps.iter().chain(&self.lambda_k).map(|a| a.norm_sqr()).sum()
    }

    pub fn photon_weight(&self) -> f64 {
        self.lambda_k.iter().map(|a| a.norm_sqr()).sum()
    }

    /// λ_n over all sites.
    pub fn lambda_sites(&self, grid: &MomentumGrid) -> Vec<Complex64> {
        grid.to_sites(&self.lambda_k)
    }
}

/// Necessary condition for an above-band bound state to survive the counter-rotating terms.
pub fn upper_bound_state_possible(model: &ModelParams) -> bool {
    model.omega0 >= 4.0 * model.lambda_hop
}
