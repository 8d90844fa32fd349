//! Dense eigen helpers and a sparse Lanczos solver for the ED oracle.

use nalgebra::{ComplexField, DMatrix, DVector, RealField};

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
pub fn eigh<T>(h: DMatrix<T>) -> (Vec<T::RealField>, DMatrix<T>)
where
    T: ComplexField,
    T::RealField: RealField + Copy,
{
    let eig = h.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])].clone());
    (values, vectors)
}

/// ‖Hv − Ev‖ for a dense Hermitian matrix.
pub fn eigen_residual<T: ComplexField>(h: &DMatrix<T>, v: &DVector<T>, e: T::RealField) -> T::RealField {
    (h * v - v * T::from_real(e)).norm()
}

/// Compressed sparse row matrix (real).
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles rows given as (column, value) lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            indptr.push(indices.len());
        }
        CsrMatrix { n, indptr, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            *out = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// Max absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        (0..self.n)
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let dense = self.to_dense();
        (&dense - dense.transpose()).amax()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Two passes of classical Gram-Schmidt against `basis`, then `locked`.
///
/// Locked vectors go last: Lanczos amplifies any leftover component along the lowest
/// eigenvectors, so they must be removed after everything else.
fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>], locked: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis.iter().chain(locked) {
            let p = dot(b, v);
            axpy(-p, b, v);
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub krylov: usize,
    pub max_restarts: usize,
    /// Absolute residual target ‖Hx − θx‖.
    pub tol: f64,
}

/// Lowest `count` eigenpairs of a real symmetric operator.
///
/// Restarted Lanczos with full reorthogonalization; converged vectors are locked and later
/// Krylov spaces are kept orthogonal to them. Returns pairs ascending with their residuals.
pub fn lanczos_lowest(
    apply: impl Fn(&[f64], &mut [f64]),
    dim: usize,
    count: usize,
    opts: &LanczosOptions,
) -> Result<Vec<(f64, Vec<f64>, f64)>, String> {
    if count > dim {
        return Err(format!("requested {count} eigenpairs of a {dim}-dimensional operator"));
    }
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::new();
    let mut w = vec![0.0; dim];
    for _ in 0..count {
        let mut x: Vec<f64> = (0..dim).map(|i| 1.0 + 0.3 * ((i as f64) * 0.7548776662).sin()).collect();
        orthogonalize(&mut x, &[], &locked);
        normalize(&mut x);
        let mut done = None;
        for _ in 0..opts.max_restarts {
            let k_max = opts.krylov.min(dim - locked.len()).max(1);
            let mut basis: Vec<Vec<f64>> = vec![x.clone()];
            let mut alpha = Vec::new();
            let mut beta = Vec::new();
            for j in 0..k_max {
                apply(&basis[j], &mut w);
                let a = dot(&basis[j], &w);
                alpha.push(a);
                orthogonalize(&mut w, &basis, &locked);
                let b = normalize(&mut w);
                if j + 1 == k_max || b < 1e-13 {
                    break;
                }
                beta.push(b);
                basis.push(w.clone());
            }
            let k = alpha.len();
            let t = DMatrix::from_fn(k, k, |r, c| {
                if r == c {
                    alpha[r]
                } else if r.abs_diff(c) == 1 {
                    beta[r.min(c)]
                } else {
                    0.0
                }
            });
            let (vals, vecs) = eigh(t);
            let theta = vals[0];
            x.iter_mut().for_each(|v| *v = 0.0);
            for (j, b) in basis.iter().enumerate() {
                axpy(vecs[(j, 0)], b, &mut x);
            }
            orthogonalize(&mut x, &[], &locked);
            normalize(&mut x);
            apply(&x, &mut w);
            let theta = {
                let rq = dot(&x, &w);
                if rq.is_finite() { rq } else { theta }
            };
            axpy(-theta, &x, &mut w);
            let res = dot(&w, &w).sqrt();
            if res < opts.tol {
                done = Some((theta, res));
                break;
            }
        }
        let (theta, res) = done.ok_or_else(|| {
            format!(
                "Lanczos did not reach residual {:e} within {} restarts",
                opts.tol, opts.max_restarts
            )
        })?;
        locked.push(x.clone());
        out.push((theta, x, res));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}
