//! Energy forms on cell graphs: harmonic solves, effective resistance,
//! capacity, Poincaré constants and resistance constants.

pub mod dense;

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cellgraph::{build_graph, level1_permutations, level_squares, word_at, CellGraph, GraphOptions};
use crate::error::{Error, Result};
use crate::geometry::{cell_measure, classify, Contact, IFSystem, Word};

pub const DEFAULT_TOL: f64 = 1e-10;
const SUM_CHUNK: usize = 4096;
/// Below this length vector kernels run on the calling thread.
const PAR_MIN: usize = 1 << 16;

/// Sum of `f(i)` over `0..n` with a fixed chunking, so the result does not
/// depend on the number of worker threads.
pub fn det_sum(n: usize, f: impl Fn(usize) -> f64 + Sync) -> f64 {
    let chunk = |c: usize| -> f64 { (c * SUM_CHUNK..n.min((c + 1) * SUM_CHUNK)).map(&f).sum() };
    let chunks = n.div_ceil(SUM_CHUNK);
    if n < PAR_MIN {
        return (0..chunks).map(chunk).sum();
    }
    let partials: Vec<f64> = (0..chunks).into_par_iter().map(chunk).collect();
    partials.iter().sum()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    det_sum(x.len(), |i| x[i] * y[i])
}

/// `E(f) = Σ_edges c_e (f(u) - f(v))²`, stored as a symmetric CSR adjacency.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyForm {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    degree: Vec<f64>,
}

impl EnergyForm {
    pub fn from_graph(g: &CellGraph) -> Self {
        let edges: Vec<(usize, usize, f64)> = g.edges.iter().map(|e| (e.u, e.v, e.conductance)).collect();
        Self::from_edges(g.vertex_count(), &edges).expect("cell graph edges are valid")
    }

    /// Parallel edges are merged by summing conductances.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(u, v, c) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidSet(format!("edge ({u}, {v}) outside 0..{n}")));
            }
            if u == v {
                return Err(Error::InvalidSet(format!("self-loop at {u}")));
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidSet(format!("conductance {c} on edge ({u}, {v})")));
            }
            adj[u].push((v, c));
            adj[v].push((u, c));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut degree = Vec::with_capacity(n);
        row_ptr.push(0);
        for row in adj.iter_mut() {
            row.sort_by_key(|a| a.0);
            let mut deg = 0.0;
            let start = cols.len();
            for &(v, c) in row.iter() {
                if cols.len() > start && *cols.last().unwrap() == v {
                    *vals.last_mut().unwrap() += c;
                } else {
                    cols.push(v);
                    vals.push(c);
                }
                deg += c;
            }
            degree.push(deg);
            row_ptr.push(cols.len());
        }
        Ok(EnergyForm { n, row_ptr, cols, vals, degree })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[v]..self.row_ptr[v + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    /// Each undirected edge once, `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| self.neighbors(u).filter(move |&(v, _)| v > u).map(move |(v, c)| (u, v, c)))
    }

    pub fn degree(&self, v: usize) -> f64 {
        self.degree[v]
    }

    pub fn energy(&self, f: &[f64]) -> f64 {
        det_sum(self.n, |u| {
            self.neighbors(u)
                .filter(|&(v, _)| v > u)
                .map(|(v, c)| c * (f[u] - f[v]).powi(2))
                .sum()
        })
    }

    pub fn apply_laplacian(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .into_par_iter()
            .with_min_len(PAR_MIN)
            .map(|u| self.degree[u] * x[u] - self.neighbors(u).map(|(v, c)| c * x[v]).sum::<f64>())
            .collect()
    }

    /// Component index per vertex, numbered by first appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for (v, _) in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    fn check_set(&self, set: &[usize], name: &str) -> Result<Vec<bool>> {
        if set.is_empty() {
            return Err(Error::InvalidSet(format!("{name} is empty")));
        }
        let mut mark = vec![false; self.n];
        for &v in set {
            if v >= self.n {
                return Err(Error::InvalidSet(format!("{name} contains vertex {v} outside 0..{}", self.n)));
            }
            mark[v] = true;
        }
        Ok(mark)
    }
}

/// Principal submatrix `(L + diag(shift))` on a subset of vertices.
struct SubSystem {
    global: Vec<usize>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
}

impl SubSystem {
    fn new(form: &EnergyForm, free: &[usize], shift: Option<&[f64]>) -> Self {
        let mut local = vec![usize::MAX; form.n];
        for (i, &v) in free.iter().enumerate() {
            local[v] = i;
        }
        let mut row_ptr = Vec::with_capacity(free.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for &v in free {
            for (w, c) in form.neighbors(v) {
                if local[w] != usize::MAX {
                    cols.push(local[w]);
                    vals.push(c);
                }
            }
            row_ptr.push(cols.len());
        }
        let diag = free
            .iter()
            .map(|&v| form.degree[v] + shift.map_or(0.0, |s| s[v]))
            .collect();
        SubSystem { global: free.to_vec(), row_ptr, cols, vals, diag }
    }

    fn len(&self) -> usize {
        self.global.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().with_min_len(PAR_MIN).enumerate().for_each(|(i, yi)| {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            let off: f64 = self.cols[r.clone()].iter().zip(&self.vals[r]).map(|(&j, &c)| c * x[j]).sum();
            *yi = self.diag[i] * x[i] - off;
        });
    }
}

#[derive(Clone, Debug)]
struct CgOutcome {
    x: Vec<f64>,
    iterations: usize,
    residual: f64,
}

fn iteration_cap(n_vertices: usize) -> usize {
    ((50.0 * (n_vertices as f64).sqrt()).ceil() as usize).max(100)
}

/// Aims 100 times below `tol` so that derived quantities (flux against
/// energy) agree to about `tol`; accepts anything within `tol` when the
/// roundoff floor is reached first.
fn solve_tight(op: &SubSystem, b: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome> {
    let (outcome, converged) = pcg_run(op, b, None, tol * 0.01, max_iter, false);
    if converged || outcome.residual <= tol {
        Ok(outcome)
    } else {
        Err(Error::NonConvergence { iterations: outcome.iterations, residual: outcome.residual })
    }
}

fn remove_mean(v: &mut [f64]) {
    let mean = det_sum(v.len(), |i| v[i]) / v.len() as f64;
    v.par_iter_mut().with_min_len(PAR_MIN).for_each(|x| *x -= mean);
}

/// Jacobi-preconditioned conjugate gradients. Returns the last iterate with
/// its true relative residual `‖b - Ax‖ / ‖b‖`, and whether `tol` was met.
/// With `singular`, `A` is a full connected Laplacian and `b` must sum to
/// zero; iterates are kept orthogonal to constants.
fn pcg_run(op: &SubSystem, b: &[f64], x0: Option<Vec<f64>>, tol: f64, max_iter: usize, singular: bool) -> (CgOutcome, bool) {
    let n = op.len();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return (CgOutcome { x: vec![0.0; n], iterations: 0, residual: 0.0 }, true);
    }
    let precondition = |r: &[f64], z: &mut [f64]| {
        z.par_iter_mut().with_min_len(PAR_MIN).enumerate().for_each(|(i, zi)| *zi = r[i] / op.diag[i]);
    };
    let mut ap = vec![0.0; n];
    let (mut x, mut r) = match x0 {
        Some(x0) => {
            op.apply_into(&x0, &mut ap);
            let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
            if singular {
                remove_mean(&mut r);
            }
            (x0, r)
        }
        None => (vec![0.0; n], b.to_vec()),
    };
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut it = 0;
    while it < max_iter {
        it += 1;
        op.apply_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        x.par_iter_mut().with_min_len(PAR_MIN).zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut().with_min_len(PAR_MIN).zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        if singular {
            remove_mean(&mut x);
            remove_mean(&mut r);
        }
        precondition(&r, &mut z);
        if dot(&r, &r).sqrt() / bnorm <= tol {
            // the recursive residual drifts; confirm and restart from the true one
            op.apply_into(&x, &mut ap);
            r.par_iter_mut().with_min_len(PAR_MIN).enumerate().for_each(|(i, ri)| *ri = b[i] - ap[i]);
            if singular {
                remove_mean(&mut r);
            }
            let true_res = dot(&r, &r).sqrt() / bnorm;
            if true_res <= tol {
                return (CgOutcome { x, iterations: it, residual: true_res }, true);
            }
            precondition(&r, &mut z);
            p.copy_from_slice(&z);
            rz = dot(&r, &z);
            continue;
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.par_iter_mut().with_min_len(PAR_MIN).zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    op.apply_into(&x, &mut ap);
    let residual = det_sum(n, |i| (b[i] - ap[i]).powi(2)).sqrt() / bnorm;
    (CgOutcome { x, iterations: it, residual }, false)
}

/// Effective resistance, with disconnection as a distinguished value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Resistance {
    Finite(f64),
    Infinite,
}

impl Resistance {
    pub fn value(self) -> f64 {
        match self {
            Resistance::Finite(r) => r,
            Resistance::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for Resistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resistance::Finite(r) => write!(f, "{r}"),
            Resistance::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct HarmonicSolution {
    pub potentials: Vec<f64>,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub energy: f64,
    /// Net current leaving `B`.
    pub flux: f64,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct ResistanceResult {
    pub resistance: Resistance,
    pub solution: HarmonicSolution,
}

/// Solves `f|_A = 0`, `f|_B = 1` minimizing `E` and returns `R = 1/flux`.
///
/// Components touching only `A` are held at 0, components touching only `B`
/// at 1, and components touching neither at 0.
pub fn effective_resistance(form: &EnergyForm, a: &[usize], b: &[usize], tol: f64) -> Result<ResistanceResult> {
    let in_a = form.check_set(a, "A")?;
    let in_b = form.check_set(b, "B")?;
    if let Some(v) = (0..form.n).find(|&v| in_a[v] && in_b[v]) {
        return Err(Error::InvalidSet(format!("A and B share vertex {v}")));
    }
    let labels = form.components();
    let n_comp = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut has_a = vec![false; n_comp];
    let mut has_b = vec![false; n_comp];
    for v in 0..form.n {
        has_a[labels[v]] |= in_a[v];
        has_b[labels[v]] |= in_b[v];
    }
    let mut f: Vec<f64> = (0..form.n)
        .map(|v| if in_b[v] || (has_b[labels[v]] && !has_a[labels[v]]) { 1.0 } else { 0.0 })
        .collect();
    let mut a_sorted = a.to_vec();
    a_sorted.sort_unstable();
    a_sorted.dedup();
    let mut b_sorted = b.to_vec();
    b_sorted.sort_unstable();
    b_sorted.dedup();

    let free: Vec<usize> = (0..form.n)
        .filter(|&v| !in_a[v] && !in_b[v] && has_a[labels[v]] && has_b[labels[v]])
        .collect();
    let op = SubSystem::new(form, &free, None);
    let rhs: Vec<f64> = free
        .par_iter()
        .map(|&v| form.neighbors(v).filter(|&(w, _)| in_b[w]).map(|(_, c)| c).sum())
        .collect();
    let outcome = solve_tight(&op, &rhs, tol, iteration_cap(form.n))?;
    for (i, &v) in free.iter().enumerate() {
        f[v] = outcome.x[i];
    }
    let energy = form.energy(&f);
    let flux = det_sum(b_sorted.len(), |i| {
        let v = b_sorted[i];
        form.neighbors(v).filter(|&(w, _)| !in_b[w]).map(|(w, c)| c * (1.0 - f[w])).sum()
    });
    let connected = (0..n_comp).any(|c| has_a[c] && has_b[c]);
    let resistance = if connected { Resistance::Finite(1.0 / flux) } else { Resistance::Infinite };
    Ok(ResistanceResult {
        resistance,
        solution: HarmonicSolution {
            potentials: f,
            a: a_sorted,
            b: b_sorted,
            energy,
            flux,
            residual: outcome.residual,
            iterations: outcome.iterations,
        },
    })
}

#[derive(Clone, Debug)]
pub struct CapacityResult {
    pub value: f64,
    pub potentials: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// `min { E(f) + Σ_v m_v f(v)² : f = 1 on A }`.
pub fn capacity(form: &EnergyForm, masses: &[f64], a: &[usize], tol: f64) -> Result<CapacityResult> {
    let in_a = form.check_set(a, "A")?;
    if masses.len() != form.n || masses.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(Error::InvalidSet("masses must be positive, one per vertex".into()));
    }
    let free: Vec<usize> = (0..form.n).filter(|&v| !in_a[v]).collect();
    let op = SubSystem::new(form, &free, Some(masses));
    let rhs: Vec<f64> = free
        .par_iter()
        .map(|&v| form.neighbors(v).filter(|&(w, _)| in_a[w]).map(|(_, c)| c).sum())
        .collect();
    let outcome = solve_tight(&op, &rhs, tol, iteration_cap(form.n))?;
    let mut f: Vec<f64> = in_a.iter().map(|&x| if x { 1.0 } else { 0.0 }).collect();
    for (i, &v) in free.iter().enumerate() {
        f[v] = outcome.x[i];
    }
    let value = form.energy(&f) + det_sum(form.n, |v| masses[v] * f[v] * f[v]);
    Ok(CapacityResult { value, potentials: f, residual: outcome.residual, iterations: outcome.iterations })
}

/// How averages over cells are weighted.
#[derive(Clone, Debug, PartialEq)]
pub enum Weighting {
    Uniform,
    /// Per-vertex masses, normalized internally to total 1.
    Hausdorff(Vec<f64>),
}

impl Weighting {
    pub fn name(&self) -> &'static str {
        match self {
            Weighting::Uniform => "uniform",
            Weighting::Hausdorff(_) => "hausdorff",
        }
    }

    fn masses(&self, n: usize) -> Result<Vec<f64>> {
        match self {
            Weighting::Uniform => Ok(vec![1.0 / n as f64; n]),
            Weighting::Hausdorff(m) => {
                if m.len() != n || m.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                    return Err(Error::InvalidSet("masses must be positive, one per vertex".into()));
                }
                let total: f64 = m.iter().sum();
                Ok(m.iter().map(|x| x / total).collect())
            }
        }
    }
}

/// Cell measures `ρ_w^d` for every vertex of a graph.
pub fn hausdorff_masses(g: &CellGraph, sys: &IFSystem, dimension: f64) -> Result<Vec<f64>> {
    g.words.iter().map(|w| cell_measure(sys, w, dimension)).collect()
}

#[derive(Clone, Debug)]
pub struct PoincareResult {
    /// `sup Var_μ(f) / E(f)`.
    pub lambda: f64,
    /// Smallest nonzero eigenvalue of `L f = σ M f`; `lambda = 1/σ`.
    pub sigma: f64,
    /// Eigenfunction with `μ`-mean 0 and `μ`-norm 1.
    pub extremal: Vec<f64>,
    pub weighting: &'static str,
    /// `‖L f - σ M f‖ / ‖L f‖`.
    pub residual: f64,
    pub iterations: usize,
}

const POINCARE_TARGET: f64 = 1e-8;
const POINCARE_MAX_ITER: usize = 500;
const POINCARE_BLOCK: usize = 4;
const INNER_TOL: f64 = 1e-11;
const INNER_ACCEPT: f64 = 1e-6;

/// Block inverse iteration on the complement of constants with
/// Rayleigh-Ritz extraction.
pub fn poincare_constant(form: &EnergyForm, weighting: &Weighting) -> Result<PoincareResult> {
    let n = form.n;
    if n < 2 {
        return Err(Error::InvalidSet("need at least two vertices".into()));
    }
    if !form.is_connected() {
        return Err(Error::Disconnected);
    }
    let mu = weighting.masses(n)?;
    let k = POINCARE_BLOCK.min(n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut block: Vec<Vec<f64>> = (0..k).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let all: Vec<usize> = (0..n).collect();
    let op = SubSystem::new(form, &all, None);
    let cap = iteration_cap(n);

    let mut best = None;
    for iter in 1..=POINCARE_MAX_ITER {
        let basis = m_orthonormalize(block, &mu);
        if basis.is_empty() {
            return Err(Error::NonConvergence { iterations: iter, residual: f64::NAN });
        }
        let lq: Vec<Vec<f64>> = basis.iter().map(|q| form.apply_laplacian(q)).collect();
        let kk = basis.len();
        let mut h = DMatrix::<f64>::zeros(kk, kk);
        for i in 0..kk {
            for j in 0..=i {
                let v = 0.5 * (dot(&basis[i], &lq[j]) + dot(&basis[j], &lq[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..kk).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let ritz: Vec<Vec<f64>> = order
            .iter()
            .map(|&c| combine(&basis, eig.eigenvectors.column(c).iter().copied()))
            .collect();
        let thetas: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        let residuals: Vec<f64> = ritz
            .par_iter()
            .zip(&thetas)
            .map(|(x, &theta)| {
                let lx = form.apply_laplacian(x);
                det_sum(n, |i| (lx[i] - theta * mu[i] * x[i]).powi(2)).sqrt() / dot(&lx, &lx).sqrt()
            })
            .collect();
        best = Some((thetas[0], ritz[0].clone(), residuals[0], iter));
        if residuals[0] <= POINCARE_TARGET {
            break;
        }
        // next block: L y = M x, warm-started at x/θ and solved only as
        // accurately as the current Ritz residual warrants
        block = ritz
            .par_iter()
            .zip(thetas.par_iter().zip(&residuals))
            .map(|(x, (&theta, &res))| {
                let mut rhs: Vec<f64> = x.iter().zip(&mu).map(|(xi, m)| xi * m).collect();
                remove_mean(&mut rhs);
                let guess = (theta > 0.0).then(|| x.iter().map(|xi| xi / theta).collect());
                let tol = (0.01 * res).clamp(INNER_TOL, 1e-4);
                let (o, converged) = pcg_run(&op, &rhs, guess, tol, cap, true);
                if !converged && !(o.residual <= INNER_ACCEPT) {
                    return Err(Error::NonConvergence { iterations: o.iterations, residual: o.residual });
                }
                Ok(o.x)
            })
            .collect::<Result<_>>()?;
    }
    let (sigma, mut extremal, residual, iterations) = best.expect("at least one iteration");
    if residual > POINCARE_TARGET {
        return Err(Error::NonConvergence { iterations, residual });
    }
    // fix the sign for reproducible output
    if let Some(v) = extremal.iter().find(|v| v.abs() > 1e-12) {
        if *v < 0.0 {
            extremal.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(PoincareResult {
        lambda: 1.0 / sigma,
        sigma,
        extremal,
        weighting: weighting.name(),
        residual,
        iterations,
    })
}

fn combine(basis: &[Vec<f64>], coeffs: impl Iterator<Item = f64>) -> Vec<f64> {
    let n = basis[0].len();
    let coeffs: Vec<f64> = coeffs.collect();
    (0..n)
        .into_par_iter()
        .with_min_len(PAR_MIN)
        .map(|i| basis.iter().zip(&coeffs).map(|(q, c)| c * q[i]).sum())
        .collect()
}

/// Projects out constants and orthonormalizes in `⟨x, y⟩_μ`, twice.
fn m_orthonormalize(block: Vec<Vec<f64>>, mu: &[f64]) -> Vec<Vec<f64>> {
    let n = mu.len();
    let mdot = |x: &[f64], y: &[f64]| det_sum(n, |i| mu[i] * x[i] * y[i]);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for mut v in block {
        let scale0 = mdot(&v, &v).sqrt();
        for _ in 0..2 {
            let mean = det_sum(n, |i| mu[i] * v[i]);
            v.iter_mut().for_each(|x| *x -= mean);
            for q in &out {
                let c = mdot(&v, q);
                v.iter_mut().zip(q).for_each(|(x, qi)| *x -= c * qi);
            }
        }
        let norm = mdot(&v, &v).sqrt();
        if norm > 1e-10 * scale0 && norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            out.push(v);
        }
    }
    out
}

/// Result of a truncated resistance-constant computation.
#[derive(Clone, Debug)]
pub struct ResistanceConstant {
    pub n: usize,
    /// The infimum over `m` is truncated at this single level.
    pub m: usize,
    pub value: Resistance,
    pub argmin: Word,
    /// Orbit representatives with their resistances, in word order.
    pub representatives: Vec<(Word, Resistance)>,
    /// Words of level `m` whose non-neighbour set is empty.
    pub skipped: Vec<Word>,
}

/// `min_{w ∈ W_m} R_{m+n}(w·W_n, C_w·W_n)` on the level-`m+n` graph.
pub fn resistance_constant(
    sys: &IFSystem,
    n: usize,
    m: usize,
    options: GraphOptions,
    tol: f64,
    use_symmetry: bool,
) -> Result<ResistanceConstant> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidSet("levels n and m must be at least 1".into()));
    }
    let g = build_graph(sys, m + n, options)?;
    let form = EnergyForm::from_graph(&g);
    let big_n = sys.len();
    let block = big_n.pow(n as u32);
    let coarse = level_squares(sys, m);
    let count_m = coarse.len();

    let reps: Vec<usize> = if use_symmetry {
        let perms = level1_permutations(sys)?;
        let mut seen = vec![false; count_m];
        let mut reps = Vec::new();
        for idx in 0..count_m {
            if seen[idx] {
                continue;
            }
            reps.push(idx);
            let w = word_at(idx, m, big_n);
            for (_, p) in &perms {
                seen[word_index(w.0.iter().map(|&l| p[l as usize - 1]), big_n)] = true;
            }
        }
        reps
    } else {
        (0..count_m).collect()
    };

    let results: Vec<(usize, Option<Resistance>)> = reps
        .par_iter()
        .map(|&idx| {
            let a: Vec<usize> = (idx * block..(idx + 1) * block).collect();
            let b: Vec<usize> = (0..count_m)
                .filter(|&j| j != idx && classify(&coarse[j], &coarse[idx]) == Contact::Disjoint)
                .flat_map(|j| j * block..(j + 1) * block)
                .collect();
            if b.is_empty() {
                return Ok((idx, None));
            }
            let r = effective_resistance(&form, &a, &b, tol)?;
            Ok((idx, Some(r.resistance)))
        })
        .collect::<Result<_>>()?;

    let mut representatives = Vec::new();
    let mut skipped = Vec::new();
    let mut best: Option<(usize, Resistance)> = None;
    for (idx, r) in results {
        let w = word_at(idx, m, big_n);
        match r {
            None => skipped.push(w),
            Some(r) => {
                if best.is_none_or(|(_, b)| r.value() < b.value()) {
                    best = Some((idx, r));
                }
                representatives.push((w, r));
            }
        }
    }
    let (idx, value) = best.ok_or_else(|| Error::InvalidSet("every non-neighbour set is empty".into()))?;
    Ok(ResistanceConstant {
        n,
        m,
        value,
        argmin: word_at(idx, m, big_n),
        representatives,
        skipped,
    })
}

/// Lexicographic rank of a word given by 0-based letters.
fn word_index(letters: impl Iterator<Item = usize>, n_maps: usize) -> usize {
    letters.fold(0, |acc, l| acc * n_maps + l)
}
