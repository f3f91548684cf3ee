//! Lowest eigenpair of a real symmetric operator.
//!
//! Small problems are solved densely (eigenvalues by tridiagonal QR, the
//! eigenvector by shifted inverse iteration). Larger ones use an explicitly
//! restarted Lanczos iteration with full reorthogonalization, started from a
//! seeded pseudo-random vector so that repeated solves are bitwise identical.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Gaps below this are reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// A real symmetric linear map given only through its action.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// Dense copy, column by column.
    fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            self.apply(&e, &mut col);
            m.column_mut(j).copy_from_slice(&col);
            e[j] = 0.0;
        }
        m
    }
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        y.iter_mut().for_each(|v| *v = 0.0);
        for (j, &xj) in x.iter().enumerate().take(n) {
            if xj != 0.0 {
                let col = self.column(j);
                for (yi, a) in y.iter_mut().zip(col.iter()) {
                    *yi += a * xj;
                }
            }
        }
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Dense when `dim <= dense_max_dim`, Lanczos otherwise.
    Auto,
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Bound on `|A x - lambda x| / max(1, |lambda|)` for the returned unit
    /// vector.
    pub tol: f64,
    /// Total operator applications allowed to the Lanczos path.
    pub max_iter: usize,
    /// Krylov subspace size before an explicit restart.
    pub krylov_dim: usize,
    pub seed: u64,
    pub dense_max_dim: usize,
    pub method: Method,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 20_000,
            krylov_dim: 100,
            seed: 0x00d1_c4e5,
            dense_max_dim: 1024,
            method: Method::Auto,
        }
    }
}

impl SolverConfig {
    /// Absolute residual accepted for an eigenvalue estimate `lambda`.
    pub fn residual_bound(&self, lambda: f64) -> f64 {
        self.tol * lambda.abs().max(1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("solver tol must be positive".into()));
        }
        if self.krylov_dim < 4 {
            return Err(Error::InvalidParameter(
                "krylov_dim must be at least 4".into(),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    /// Unit vector; sign as produced by the solver (callers fix phase).
    pub vector: Vec<f64>,
    /// `|A v - value v|`, measured with an independent application of `A`.
    pub residual: f64,
    /// Operator applications used (dense path: 0).
    pub iterations: usize,
    /// Estimated distance to the next eigenvalue.
    pub gap: Option<f64>,
    pub degenerate: bool,
    pub dense: bool,
}

pub fn lowest_eigenpair<A: SymmetricOperator + ?Sized>(
    op: &A,
    config: &SolverConfig,
) -> Result<Eigenpair> {
    config.validate()?;
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("operator dimension is zero".into()));
    }
    let dense = match config.method {
        Method::Dense => true,
        Method::Lanczos => false,
        Method::Auto => n <= config.dense_max_dim,
    };
    let mut pair = if dense {
        dense_lowest(op)?
    } else {
        lanczos_lowest(op, config)?
    };
    pair.residual = residual_norm(op, pair.value, &pair.vector);
    if pair.residual > config.residual_bound(pair.value) {
        return Err(Error::NotConverged {
            iterations: pair.iterations,
            best_residual: pair.residual,
            tol: config.tol,
        });
    }
    pair.degenerate = pair.gap.is_some_and(|g| g < DEGENERACY_GAP);
    Ok(pair)
}

/// `|A v - lambda v|` for a given vector.
pub fn residual_norm<A: SymmetricOperator + ?Sized>(op: &A, lambda: f64, v: &[f64]) -> f64 {
    let mut w = vec![0.0; v.len()];
    op.apply(v, &mut w);
    w.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn rayleigh_quotient<A: SymmetricOperator + ?Sized>(op: &A, v: &[f64]) -> f64 {
    let mut w = vec![0.0; v.len()];
    op.apply(v, &mut w);
    dot(&w, v) / dot(v, v)
}

fn dense_lowest<A: SymmetricOperator + ?Sized>(op: &A) -> Result<Eigenpair> {
    let n = op.dim();
    let mut a = op.to_dense();
    // exact symmetrization; the operators handed in are symmetric already
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    if n == 1 {
        return Ok(Eigenpair {
            value: a[(0, 0)],
            vector: vec![1.0],
            residual: 0.0,
            iterations: 0,
            gap: None,
            degenerate: false,
            dense: true,
        });
    }
    let mut evals: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    if evals.iter().any(|x| !x.is_finite()) {
        return Err(Error::Solver("non-finite eigenvalue".into()));
    }
    evals.sort_by(f64::total_cmp);
    let lambda = evals[0];
    let gap = evals[1] - evals[0];
    let scale = a.amax().max(1.0);
    let vector = inverse_iteration(&a, lambda, scale)?;
    Ok(Eigenpair {
        value: lambda,
        vector,
        residual: 0.0,
        iterations: 0,
        gap: Some(gap),
        degenerate: false,
        dense: true,
    })
}

fn inverse_iteration(a: &DMatrix<f64>, lambda: f64, scale: f64) -> Result<Vec<f64>> {
    let n = a.nrows();
    let mut shift = lambda - 1e-10 * scale;
    for _attempt in 0..4 {
        let mut shifted = a.clone();
        for i in 0..n {
            shifted[(i, i)] -= shift;
        }
        let lu = shifted.lu();
        let mut x = DVector::from_fn(n, |i, _| 1.0 + ((i * 7919) % 104_729) as f64 / 104_729.0);
        x.normalize_mut();
        let mut ok = true;
        for _ in 0..3 {
            match lu.solve(&x) {
                Some(y) if y.iter().all(|v| v.is_finite()) && y.norm() > 0.0 => {
                    x = y.normalize();
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            let mut v: Vec<f64> = x.iter().copied().collect();
            let norm = dot(&v, &v).sqrt();
            v.iter_mut().for_each(|c| *c /= norm);
            return Ok(v);
        }
        shift -= 1e-8 * scale;
    }
    Err(Error::Solver("inverse iteration failed".into()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Lowest two eigenpairs of the Lanczos tridiagonal matrix.
fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Option<f64>, Vec<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lo = order[0];
    let second = order.get(1).map(|&i| eig.eigenvalues[i]);
    let s: Vec<f64> = eig.eigenvectors.column(lo).iter().copied().collect();
    (eig.eigenvalues[lo], second, s)
}

fn seeded_start(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn lanczos_lowest<A: SymmetricOperator + ?Sized>(
    op: &A,
    config: &SolverConfig,
) -> Result<Eigenpair> {
    let n = op.dim();
    let kmax = config.krylov_dim.min(n);
    let mut start = seeded_start(n, config.seed);
    let mut applications = 0usize;
    let mut best_residual = f64::INFINITY;
    let mut w = vec![0.0; n];

    loop {
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(kmax);
        let mut alpha: Vec<f64> = Vec::with_capacity(kmax);
        let mut beta: Vec<f64> = Vec::with_capacity(kmax);
        basis.push(start.clone());
        let mut invariant = false;

        let mut ritz = (0.0, None, Vec::new());
        for k in 0..kmax {
            op.apply(&basis[k], &mut w);
            applications += 1;
            let a = dot(&basis[k], &w);
            alpha.push(a);
            axpy(-a, &basis[k], &mut w);
            if k > 0 {
                axpy(-beta[k - 1], &basis[k - 1], &mut w);
            }
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for v in &basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let b = dot(&w, &w).sqrt();
            let scale = alpha.iter().fold(1.0_f64, |m, x| m.max(x.abs()));

            let out_of_budget = applications >= config.max_iter;
            let check = k + 1 == kmax || k % 10 == 9 || b <= 1e-13 * scale || out_of_budget;
            if check {
                ritz = tridiagonal_lowest(&alpha, &beta);
                let estimate = b * ritz.2[k].abs();
                if b <= 1e-13 * scale {
                    invariant = true;
                    break;
                }
                if estimate < 0.1 * config.residual_bound(ritz.0) {
                    break;
                }
            }
            if out_of_budget {
                break;
            }
            if k + 1 < kmax {
                beta.push(b);
                basis.push(w.iter().map(|x| x / b).collect());
            }
        }

        let (theta, second, s) = ritz;
        let mut x = vec![0.0; n];
        for (v, c) in basis.iter().zip(&s) {
            axpy(*c, v, &mut x);
        }
        let norm = dot(&x, &x).sqrt();
        x.iter_mut().for_each(|c| *c /= norm);
        let theta = if theta.is_finite() { rayleigh_quotient(op, &x) } else { theta };
        applications += 1;
        let residual = residual_norm(op, theta, &x);
        applications += 1;
        let improved = residual < 0.5 * best_residual;
        best_residual = best_residual.min(residual);

        if residual <= config.residual_bound(theta) {
            return Ok(Eigenpair {
                value: theta,
                vector: x,
                residual,
                iterations: applications,
                gap: second.map(|s2| s2 - theta),
                degenerate: false,
                dense: false,
            });
        }
        // a restart that cannot reduce the residual is at the rounding floor
        if applications >= config.max_iter || (invariant && !improved) {
            return Err(Error::NotConverged {
                iterations: applications,
                best_residual,
                tol: config.tol,
            });
        }
        start = x;
    }
}
