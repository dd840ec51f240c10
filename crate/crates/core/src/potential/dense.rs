//! Dense reference implementations for small graphs: direct Cholesky
//! solves and full symmetric eigendecompositions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::EnergyForm;
use crate::error::{Error, Result};

pub const ORACLE_CAP: usize = 4000;

fn check_size(n: usize) -> Result<()> {
    if n > ORACLE_CAP {
        return Err(Error::OracleTooLarge { size: n, cap: ORACLE_CAP });
    }
    Ok(())
}

pub fn laplacian(form: &EnergyForm) -> DMatrix<f64> {
    let n = form.vertex_count();
    let mut l = DMatrix::zeros(n, n);
    for (u, v, c) in form.edges() {
        l[(u, u)] += c;
        l[(v, v)] += c;
        l[(u, v)] -= c;
        l[(v, u)] -= c;
    }
    l
}

/// Minimizes `E + Σ shift_v f(v)²` with `f` fixed on `fixed`; returns the
/// full potential vector.
fn dirichlet(form: &EnergyForm, shift: &[f64], fixed: &[(usize, f64)]) -> Result<Vec<f64>> {
    let n = form.vertex_count();
    let mut value: Vec<Option<f64>> = vec![None; n];
    for &(v, x) in fixed {
        value[v] = Some(x);
    }
    let free: Vec<usize> = (0..n).filter(|&v| value[v].is_none()).collect();
    let l = laplacian(form);
    let k = free.len();
    let mut a = DMatrix::zeros(k, k);
    let mut rhs = DVector::zeros(k);
    for (i, &u) in free.iter().enumerate() {
        for (j, &v) in free.iter().enumerate() {
            a[(i, j)] = l[(u, v)];
        }
        a[(i, i)] += shift[u];
        rhs[i] = -(0..n).filter_map(|v| value[v].map(|x| l[(u, v)] * x)).sum::<f64>();
    }
    let mut f: Vec<f64> = value.iter().map(|x| x.unwrap_or(0.0)).collect();
    if k > 0 {
        let chol = a.cholesky().ok_or(Error::Disconnected)?;
        let x = chol.solve(&rhs);
        for (i, &u) in free.iter().enumerate() {
            f[u] = x[i];
        }
    }
    Ok(f)
}

/// `1 / E(h)` for the harmonic `h` with `h|_A = 0`, `h|_B = 1`. Requires a
/// connected graph.
pub fn resistance(form: &EnergyForm, a: &[usize], b: &[usize]) -> Result<f64> {
    let n = form.vertex_count();
    check_size(n)?;
    if a.is_empty() || b.is_empty() || a.iter().any(|v| b.contains(v)) {
        return Err(Error::InvalidSet("A and B must be nonempty and disjoint".into()));
    }
    let fixed: Vec<(usize, f64)> = a.iter().map(|&v| (v, 0.0)).chain(b.iter().map(|&v| (v, 1.0))).collect();
    let f = dirichlet(form, &vec![0.0; n], &fixed)?;
    Ok(1.0 / form.energy(&f))
}

pub fn capacity(form: &EnergyForm, masses: &[f64], a: &[usize]) -> Result<f64> {
    let n = form.vertex_count();
    check_size(n)?;
    if a.is_empty() {
        return Err(Error::InvalidSet("A is empty".into()));
    }
    let fixed: Vec<(usize, f64)> = a.iter().map(|&v| (v, 1.0)).collect();
    let f = dirichlet(form, masses, &fixed)?;
    Ok(form.energy(&f) + f.iter().zip(masses).map(|(x, m)| m * x * x).sum::<f64>())
}

/// `1/σ` with `σ` the smallest nonzero eigenvalue of `L f = σ M f`,
/// `M = diag(masses / Σ masses)`.
pub fn poincare(form: &EnergyForm, masses: Option<&[f64]>) -> Result<f64> {
    let n = form.vertex_count();
    check_size(n)?;
    if !form.is_connected() {
        return Err(Error::Disconnected);
    }
    let mu: Vec<f64> = match masses {
        None => vec![1.0 / n as f64; n],
        Some(m) => {
            let t: f64 = m.iter().sum();
            m.iter().map(|x| x / t).collect()
        }
    };
    let l = laplacian(form);
    let s = DMatrix::from_fn(n, n, |i, j| l[(i, j)] / (mu[i] * mu[j]).sqrt());
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(1.0 / ev[1])
}

/// Smallest nonzero eigenvalue of the plain Laplacian.
pub fn algebraic_connectivity(form: &EnergyForm) -> Result<f64> {
    check_size(form.vertex_count())?;
    let mut ev: Vec<f64> = SymmetricEigen::new(laplacian(form)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev[1])
}
