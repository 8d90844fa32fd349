//! Cavity-array waveguide: parameters, momentum grid, dispersion and spectral density.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub delta: f64,
    pub omega0: f64,
    pub lambda_hop: f64,
    pub couplings: Vec<f64>,
    pub positions: Vec<usize>,
    pub n_sites: usize,
}

impl ModelParams {
    /// One qubit at the chain center.
    pub fn single(delta: f64, omega0: f64, lambda_hop: f64, g: f64, n_sites: usize) -> Result<Self> {
        let m = ModelParams {
            delta,
            omega0,
            lambda_hop,
            couplings: vec![g],
            positions: vec![n_sites / 2],
            n_sites,
        };
        m.validate()?;
        Ok(m)
    }

    /// Two qubits with equal coupling, separated by `x` sites and straddling the center.
    pub fn pair(delta: f64, omega0: f64, lambda_hop: f64, g: f64, x: usize, n_sites: usize) -> Result<Self> {
        if x == 0 {
            return Err(Error::InvalidModel("qubit separation must be nonzero".into()));
        }
        let x1 = (n_sites / 2).checked_sub(x / 2).ok_or_else(|| {
            Error::InvalidModel(format!("separation {x} does not fit in {n_sites} sites"))
        })?;
        let m = ModelParams {
            delta,
            omega0,
            lambda_hop,
            couplings: vec![g, g],
            positions: vec![x1, x1 + x],
            n_sites,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if !(self.lambda_hop > 0.0) {
            return bad(format!("hopping must be positive, got {}", self.lambda_hop));
        }
        if !(self.omega0 - 2.0 * self.lambda_hop > 0.0) {
            return bad(format!(
                "band must be positive: omega0 - 2 lambda = {}",
                self.omega0 - 2.0 * self.lambda_hop
            ));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return bad(format!("qubit splitting must be positive, got {}", self.delta));
        }
        if self.n_sites < 2 || self.n_sites % 2 != 0 {
            return bad(format!("n_sites must be even and >= 2, got {}", self.n_sites));
        }
        let nq = self.couplings.len();
        if nq != self.positions.len() || !(1..=2).contains(&nq) {
            return bad(format!(
                "need 1 or 2 qubits with one coupling each, got {} couplings and {} positions",
                nq,
                self.positions.len()
            ));
        }
        if self.couplings.iter().any(|g| !(*g >= 0.0) || !g.is_finite()) {
            return bad("couplings must be finite and non-negative".into());
        }
        if self.positions.iter().any(|&p| p >= self.n_sites) {
            return bad(format!("qubit positions must lie in [0, {})", self.n_sites));
        }
        if nq == 2 && self.positions[0] == self.positions[1] {
            return bad("qubit positions must be distinct".into());
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.couplings.len()
    }

    pub fn band_min(&self) -> f64 {
        self.omega0 - 2.0 * self.lambda_hop
    }

    pub fn band_max(&self) -> f64 {
        self.omega0 + 2.0 * self.lambda_hop
    }

    /// Separation x₂ − x₁ for a qubit pair.
    pub fn separation(&self) -> Option<usize> {
        match self.positions.as_slice() {
            [a, b] => Some(a.abs_diff(*b)),
            _ => None,
        }
    }

    pub fn grid(&self) -> MomentumGrid {
        MomentumGrid::new(self.n_sites, self.omega0, self.lambda_hop)
    }

    pub fn with_coupling(&self, g: f64) -> Self {
        let mut m = self.clone();
        m.couplings.iter_mut().for_each(|c| *c = g);
        m
    }
}

pub fn dispersion(omega0: f64, lambda_hop: f64, k: f64) -> f64 {
    omega0 - 2.0 * lambda_hop * k.cos()
}

pub fn coupling_k(g: f64, n_sites: usize) -> f64 {
    g / (n_sites as f64).sqrt()
}

/// Continuum spectral density g²/(λ sin k(ω)) of the flat coupling.
pub fn spectral_density(g: f64, omega0: f64, lambda_hop: f64, omega: f64) -> Result<f64> {
    let lo = omega0 - 2.0 * lambda_hop;
    let hi = omega0 + 2.0 * lambda_hop;
    if !(omega > lo && omega < hi) {
        return Err(Error::Domain(format!(
            "spectral density requested at {omega}, outside the open band ({lo}, {hi})"
        )));
    }
    let c = (omega0 - omega) / (2.0 * lambda_hop);
    let sin_k = (1.0 - c * c).sqrt();
    Ok(g * g / (lambda_hop * sin_k))
}

/// Symmetric grid k_m = −π + 2πm/N with tabulated phases.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    pub k: Vec<f64>,
    pub omega: Vec<f64>,
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

impl MomentumGrid {
    pub fn new(n: usize, omega0: f64, lambda_hop: f64) -> Self {
        let k: Vec<f64> = (0..n).map(|m| -PI + 2.0 * PI * m as f64 / n as f64).collect();
        let omega = k.iter().map(|&k| dispersion(omega0, lambda_hop, k)).collect();
        let cos_table = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect();
        let sin_table = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).sin()).collect();
        MomentumGrid {
            k,
            omega,
            cos_table,
            sin_table,
        }
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Index of −k.
    pub fn partner(&self, m: usize) -> usize {
        let n = self.len();
        (n - m) % n
    }

    pub fn omega_min(&self) -> f64 {
        self.omega.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    fn phase_index(&self, m: usize, d: i64) -> usize {
        let n = self.len() as i64;
        ((m as i64 - n / 2) * d).rem_euclid(n) as usize
    }

    /// cos(k_m d), exact on the grid.
    pub fn cos_kd(&self, m: usize, d: i64) -> f64 {
        self.cos_table[self.phase_index(m, d)]
    }

    /// e^{i k_m d}.
    pub fn phase(&self, m: usize, d: i64) -> Complex64 {
        let j = self.phase_index(m, d);
        Complex64::new(self.cos_table[j], self.sin_table[j])
    }

    /// (1/√N) Σ_k a_k cos(k(n − center)) for k-even real amplitudes.
    pub fn to_sites_even(&self, amps: &[f64], center: usize) -> Vec<f64> {
        let n = self.len();
        let norm = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|site| {
                let d = site as i64 - center as i64;
                amps.iter().enumerate().map(|(m, a)| a * self.cos_kd(m, d)).sum::<f64>() * norm
            })
            .collect()
    }

    /// Site amplitudes (1/√N) Σ_k a_k e^{−ikn} of a photon wavefunction in lab momentum basis.
    pub fn to_sites(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        let norm = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|site| {
                amps.iter()
                    .enumerate()
                    .map(|(m, a)| a * self.phase(m, -(site as i64)))
                    .sum::<Complex64>()
                    * norm
            })
            .collect()
    }
}
