//! Exact diagonalization of the lab-frame Hamiltonian on a short open chain.
//!
//! H = Σ_j (Δ/2)σᶻ_j + ω₀Σ_n b_n†b_n − λΣ_n (b_n†b_{n−1} + h.c.) + Σ_j g_j σˣ_j (b_{x_j} + b_{x_j}†)
//! in a truncated Fock space: at most `n_max` photons per site and `total_max` in total.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigh, lanczos_lowest, CsrMatrix, LanczosOptions};
use crate::model::ModelParams;

pub const MAX_SITES: usize = 14;
const BITS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sector {
    Even,
    Odd,
    Full,
}

impl Sector {
    fn admits(self, parity_odd: bool) -> bool {
        match self {
            Sector::Even => !parity_odd,
            Sector::Odd => parity_odd,
            Sector::Full => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EdSolver {
    Dense,
    Lanczos,
    /// Dense below `DENSE_LIMIT`, Lanczos above.
    Auto,
}

const DENSE_LIMIT: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdConfig {
    pub n_max: usize,
    pub total_max: usize,
    pub dim_cap: usize,
    pub solver: EdSolver,
}

impl Default for EdConfig {
    fn default() -> Self {
        EdConfig {
            n_max: 3,
            total_max: 3,
            dim_cap: 400_000,
            solver: EdSolver::Auto,
        }
    }
}

/// Product states qubits ⊗ site occupations, packed as 4-bit fields above the qubit bits.
#[derive(Debug, Clone)]
pub struct EdBasis {
    pub n_sites: usize,
    pub n_qubits: usize,
    pub states: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl EdBasis {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn occupation(&self, state: u64, site: usize) -> usize {
        ((state >> (self.n_qubits as u32 + BITS * site as u32)) & 0xF) as usize
    }

    pub fn qubit_up(&self, state: u64, q: usize) -> bool {
        state >> q & 1 == 1
    }

    fn with_occupation(&self, state: u64, site: usize, occ: usize) -> u64 {
        let shift = self.n_qubits as u32 + BITS * site as u32;
        (state & !(0xF << shift)) | ((occ as u64) << shift)
    }

    pub fn index_of(&self, state: u64) -> Option<usize> {
        self.index.get(&state).copied()
    }
}

/// Checks the model and truncation without building anything.
pub fn validate(model: &ModelParams, cfg: &EdConfig) -> Result<()> {
    model.validate()?;
    if model.n_sites > MAX_SITES {
        return Err(Error::InvalidModel(format!(
            "ED supports at most {MAX_SITES} sites, got {}",
            model.n_sites
        )));
    }
    if cfg.n_max < 2 || cfg.n_max > 15 {
        return Err(Error::InvalidModel(format!("n_max must lie in [2, 15], got {}", cfg.n_max)));
    }
    if cfg.total_max < 1 {
        return Err(Error::InvalidModel("total_max must be >= 1".into()));
    }
    Ok(())
}

/// Number of occupation vectors with each total photon number.
fn occupation_counts(n_sites: usize, n_max: usize, total_max: usize) -> Vec<u128> {
    let mut counts = vec![0u128; total_max + 1];
    counts[0] = 1;
    for _ in 0..n_sites {
        let mut next = vec![0u128; total_max + 1];
        for (t, &c) in counts.iter().enumerate() {
            for o in 0..=n_max.min(total_max - t) {
                next[t + o] += c;
            }
        }
        counts = next;
    }
    counts
}

/// Basis dimension without enumerating it.
pub fn sector_dimension(n_sites: usize, n_qubits: usize, cfg: &EdConfig, sector: Sector) -> u128 {
    let counts = occupation_counts(n_sites, cfg.n_max, cfg.total_max);
    let mut dim = 0u128;
    for (t, c) in counts.iter().enumerate() {
        for q in 0..(1u32 << n_qubits) {
            if sector.admits((q.count_ones() as usize + t) % 2 == 1) {
                dim += c;
            }
        }
    }
    dim
}

pub fn build_basis(model: &ModelParams, cfg: &EdConfig, sector: Sector) -> Result<EdBasis> {
    validate(model, cfg)?;
    let nq = model.n_qubits();
    let dim = sector_dimension(model.n_sites, nq, cfg, sector);
    if dim > cfg.dim_cap as u128 {
        return Err(Error::DimensionOverflow {
            dim: dim.min(usize::MAX as u128) as usize,
            cap: cfg.dim_cap,
        });
    }
    let mut occs: Vec<(u64, usize)> = vec![(0, 0)];
    for site in 0..model.n_sites {
        let shift = nq as u32 + BITS * site as u32;
        let mut next = Vec::with_capacity(occs.len() * 2);
        for &(s, t) in &occs {
            for o in 0..=cfg.n_max.min(cfg.total_max - t) {
                next.push((s | (o as u64) << shift, t + o));
            }
        }
        occs = next;
    }
    let mut states = Vec::with_capacity(dim as usize);
    for &(s, t) in &occs {
        for q in 0..(1u64 << nq) {
            if sector.admits((q.count_ones() as usize + t) % 2 == 1) {
                states.push(s | q);
            }
        }
    }
    states.sort_unstable();
    let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    Ok(EdBasis {
        n_sites: model.n_sites,
        n_qubits: nq,
        states,
        index,
    })
}

/// Sparse Hamiltonian restricted to `basis`.
///
/// Transitions leaving the basis are dropped, which is exact for a parity sector and is the
/// Fock truncation otherwise.
pub fn build_hamiltonian(model: &ModelParams, basis: &EdBasis) -> CsrMatrix {
    let n = model.n_sites;
    let rows = basis
        .states
        .iter()
        .map(|&s| {
            let mut row = Vec::new();
            let occ: Vec<usize> = (0..n).map(|site| basis.occupation(s, site)).collect();
            let photons: usize = occ.iter().sum();
            let spin: f64 = (0..basis.n_qubits)
                .map(|q| if basis.qubit_up(s, q) { 0.5 } else { -0.5 })
                .sum();
            row.push((basis.index_of(s).unwrap(), model.delta * spin + model.omega0 * photons as f64));

            let mut push = |target: u64, amp: f64| {
                if let Some(c) = basis.index_of(target) {
                    row.push((c, amp));
                }
            };
            for site in 1..n {
                for (to, from) in [(site, site - 1), (site - 1, site)] {
                    if occ[from] == 0 || occ[to] >= 15 {
                        continue;
                    }
                    let amp = ((occ[from] * (occ[to] + 1)) as f64).sqrt();
                    let t = basis.with_occupation(s, from, occ[from] - 1);
                    let t = basis.with_occupation(t, to, occ[to] + 1);
                    push(t, -model.lambda_hop * amp);
                }
            }
            for (q, (&g, &x)) in model.couplings.iter().zip(&model.positions).enumerate() {
                let flipped = s ^ (1 << q);
                if occ[x] < 15 {
                    push(basis.with_occupation(flipped, x, occ[x] + 1), g * ((occ[x] + 1) as f64).sqrt());
                }
                if occ[x] > 0 {
                    push(basis.with_occupation(flipped, x, occ[x] - 1), g * (occ[x] as f64).sqrt());
                }
            }
            row
        })
        .collect();
    CsrMatrix::from_rows(rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct EdState {
    pub energy: f64,
    pub photons: Vec<f64>,
    pub sigma_z: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdResult {
    pub states: Vec<EdState>,
    pub dimension: usize,
    pub config: EdConfig,
    pub sector: Sector,
    pub hamiltonian_norm: f64,
}

fn observables(basis: &EdBasis, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut photons = vec![0.0; basis.n_sites];
    let mut sz = vec![0.0; basis.n_qubits];
    for (&s, a) in basis.states.iter().zip(v) {
        let p = a * a;
        for (site, out) in photons.iter_mut().enumerate() {
            *out += p * basis.occupation(s, site) as f64;
        }
        for (q, out) in sz.iter_mut().enumerate() {
            *out += if basis.qubit_up(s, q) { p } else { -p };
        }
    }
    (photons, sz)
}

/// Lowest `count` eigenstates in a parity sector at fixed truncation.
pub fn lowest_states(model: &ModelParams, cfg: &EdConfig, sector: Sector, count: usize) -> Result<EdResult> {
    let basis = build_basis(model, cfg, sector)?;
    let h = build_hamiltonian(model, &basis);
    let dim = basis.len();
    let norm = h.norm_bound();
    let dense = match cfg.solver {
        EdSolver::Dense => true,
        EdSolver::Lanczos => false,
        EdSolver::Auto => dim <= DENSE_LIMIT,
    };
    let pairs: Vec<(f64, Vec<f64>, f64)> = if dense {
        let m = h.to_dense();
        let (vals, vecs) = eigh(m.clone());
        (0..count.min(dim))
            .map(|i| {
                let v = vecs.column(i).into_owned();
                let res = crate::linalg::eigen_residual(&m, &v, vals[i]);
                (vals[i], v.as_slice().to_vec(), res)
            })
            .collect()
    } else {
        let opts = LanczosOptions {
            krylov: 150,
            max_restarts: 400,
            tol: 1e-10 * norm,
        };
        lanczos_lowest(|x, y| h.matvec(x, y), dim, count, &opts).map_err(Error::Solver)?
    };
    let states = pairs
        .into_iter()
        .map(|(e, v, res)| {
            let (photons, sigma_z) = observables(&basis, &v);
            EdState {
                energy: e,
                photons,
                sigma_z,
                residual: res,
            }
        })
        .collect();
    Ok(EdResult {
        states,
        dimension: dim,
        config: *cfg,
        sector,
        hamiltonian_norm: norm,
    })
}

/// Raises the truncation until the lowest energy moves by less than `rel_tol`.
///
/// Each step adds one photon to both caps. Fails with a convergence error if the dimension cap
/// is hit first.
pub fn converged_lowest(
    model: &ModelParams,
    start: &EdConfig,
    sector: Sector,
    count: usize,
    rel_tol: f64,
) -> Result<EdResult> {
    let mut cfg = *start;
    let mut prev = lowest_states(model, &cfg, sector, count)?;
    let mut steps = 0;
    let mut change = f64::INFINITY;
    loop {
        let next_cfg = EdConfig {
            n_max: (cfg.n_max + 1).min(15),
            total_max: cfg.total_max + 1,
            ..cfg
        };
        let next = match lowest_states(model, &next_cfg, sector, count) {
            Ok(r) => r,
            Err(Error::DimensionOverflow { .. }) => {
                return Err(Error::Convergence {
                    what: "ED truncation (dimension cap reached)",
                    iterations: steps,
                    residual: change,
                })
            }
            Err(e) => return Err(e),
        };
        steps += 1;
        let (a, b) = (next.states[0].energy, prev.states[0].energy);
        change = (a - b).abs() / a.abs().max(f64::MIN_POSITIVE);
        if change < rel_tol {
            return Ok(prev);
        }
        cfg = next_cfg;
        prev = next;
    }
}

/// Relative L2 distance ‖a − b‖/‖b‖.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(g: f64, n: usize) -> ModelParams {
        ModelParams::single(0.3, 1.0, 0.2, g, n).unwrap()
    }

    #[test]
    fn decoupled_ground_state() {
        let m = model(0.0, 4);
        let r = lowest_states(&m, &EdConfig::default(), Sector::Even, 1).unwrap();
        assert_relative_eq!(r.states[0].energy, -0.15, max_relative = 1e-13);
        assert!(r.states[0].photons.iter().all(|&p| p.abs() < 1e-13));
    }

    #[test]
    fn single_site_is_quantum_rabi() {
        // Two cavities at full product truncation against an explicit Kronecker build.
        let m = ModelParams {
            delta: 0.7,
            omega0: 1.0,
            lambda_hop: 0.1,
            couplings: vec![0.4],
            positions: vec![0],
            n_sites: 2,
        };
        let cfg = EdConfig {
            n_max: 6,
            total_max: 12,
            ..Default::default()
        };
        let basis = build_basis(&m, &cfg, Sector::Full).unwrap();
        let h = build_hamiltonian(&m, &basis).to_dense();
        let d = 7;
        let a = nalgebra::DMatrix::from_fn(d, d, |r, c| if r + 1 == c { (c as f64).sqrt() } else { 0.0 });
        let id = nalgebra::DMatrix::<f64>::identity(d, d);
        let num = a.transpose() * &a;
        let sz = nalgebra::DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        let sx = nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let id2 = nalgebra::DMatrix::<f64>::identity(2, 2);
        let photon = num.kronecker(&id) + id.kronecker(&num);
        let hop = a.transpose().kronecker(&a) + a.kronecker(&a.transpose());
        let x0 = (&a + a.transpose()).kronecker(&id);
        let full = photon.kronecker(&id2) * 1.0 - hop.kronecker(&id2) * 0.1
            + id.kronecker(&id).kronecker(&sz) * 0.35
            + x0.kronecker(&sx) * 0.4;
        let (v1, _) = eigh(h);
        let (v2, _) = eigh(full);
        for i in 0..10 {
            assert_relative_eq!(v1[i], v2[i], max_relative = 1e-11);
        }
    }

    #[test]
    fn hamiltonian_preserves_joint_parity() {
        let m = ModelParams::pair(0.3, 1.0, 0.2, 0.2, 2, 6).unwrap();
        let cfg = EdConfig {
            n_max: 2,
            total_max: 3,
            ..Default::default()
        };
        let basis = build_basis(&m, &cfg, Sector::Full).unwrap();
        let h = build_hamiltonian(&m, &basis);
        let parity = |s: u64| {
            let t: usize = (0..6).map(|site| basis.occupation(s, site)).sum();
            let q = (s & 0b11).count_ones() as usize;
            (t + q) % 2
        };
        for r in 0..h.n {
            for (c, _) in h.row(r) {
                let pr = parity(basis.states[r]);
                let pc = parity(basis.states[c]);
                // The truncation edge may drop terms but never mixes sectors.
                assert_eq!(pr, pc);
            }
        }
        assert!(h.max_asymmetry() < 1e-15);
    }

    #[test]
    fn sector_dimensions_add_up() {
        let cfg = EdConfig {
            n_max: 3,
            total_max: 4,
            ..Default::default()
        };
        let even = sector_dimension(8, 2, &cfg, Sector::Even);
        let odd = sector_dimension(8, 2, &cfg, Sector::Odd);
        assert_eq!(even + odd, sector_dimension(8, 2, &cfg, Sector::Full));
        let m = ModelParams::pair(0.3, 1.0, 0.2, 0.2, 2, 8).unwrap();
        assert_eq!(build_basis(&m, &cfg, Sector::Even).unwrap().len() as u128, even);
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let cfg = EdConfig {
            n_max: 4,
            total_max: 8,
            dim_cap: 1000,
            ..Default::default()
        };
        let err = build_basis(&model(0.1, 12), &cfg, Sector::Even).unwrap_err();
        assert!(matches!(err, Error::DimensionOverflow { cap: 1000, .. }));
    }

    #[test]
    fn lanczos_and_dense_agree() {
        let m = model(0.2, 8);
        let base = EdConfig {
            n_max: 3,
            total_max: 3,
            ..Default::default()
        };
        let d = lowest_states(&m, &EdConfig { solver: EdSolver::Dense, ..base }, Sector::Odd, 2).unwrap();
        let l = lowest_states(&m, &EdConfig { solver: EdSolver::Lanczos, ..base }, Sector::Odd, 2).unwrap();
        for (a, b) in d.states.iter().zip(&l.states) {
            assert_relative_eq!(a.energy, b.energy, max_relative = 1e-10);
            for (x, y) in a.photons.iter().zip(&b.photons) {
                assert!((x - y).abs() < 1e-8);
            }
        }
        assert!(l.states.iter().all(|s| s.residual < 1e-9 * l.hamiltonian_norm));
    }
}
