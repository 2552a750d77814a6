//! Sparse matrices and the linear solvers used by the Newton iteration.
//!
//! Two backends: a sparse LU factorization (faer) for 2-D problems, and
//! ILU(0)-preconditioned BiCGSTAB for 3-D problems where fill-in makes the
//! direct factorization too slow.

use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Conj, Mat, Par};

use crate::error::{Error, Result};

/// Square sparse matrix in compressed-row form with sorted, unique columns.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from rows of `(column, value)` pairs; duplicates are summed.
    pub fn from_rows(n: usize, rows: impl IntoIterator<Item = Vec<(u32, f64)>>) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            let start = cols.len();
            for (c, v) in row {
                debug_assert!((c as usize) < n);
                if cols.len() > start && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        assert_eq!(row_ptr.len(), n + 1, "expected {n} rows");
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .map(|&c| c as usize)
            .zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&(j as u32)) {
            Ok(p) => self.vals[r.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, a)| a * x[j]).sum();
        }
    }

    /// Whether every row satisfies `|a_ii| >= sum_{j != i} |a_ij|`.
    pub fn is_diagonally_dominant(&self) -> bool {
        (0..self.n).all(|i| {
            let mut diag = 0.0;
            let mut off = 0.0;
            for (j, a) in self.row(i) {
                if i == j {
                    diag = a.abs();
                } else {
                    off += a.abs();
                }
            }
            diag >= off * (1.0 - 1e-12)
        })
    }

    fn same_pattern(&self, other: &SparseMatrix) -> bool {
        self.n == other.n && self.row_ptr == other.row_ptr && self.cols == other.cols
    }
}

/// Which linear solver the Newton iteration uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearBackend {
    SparseLu,
    IluBicgstab,
}

impl LinearBackend {
    /// Direct factorization in 1-D and 2-D, Krylov in 3-D.
    pub fn for_dim(dim: usize) -> Self {
        if dim <= 2 {
            LinearBackend::SparseLu
        } else {
            LinearBackend::IluBicgstab
        }
    }
}

/// Stateful solver that reuses symbolic work across matrices sharing a
/// sparsity pattern.
pub(crate) struct LinearSolver {
    backend: LinearBackend,
    rel_tol: f64,
    max_iter: usize,
    pattern: Option<SparseMatrix>,
    lu: Option<LuCache>,
    pub(crate) krylov_iterations: usize,
}

struct LuCache {
    symbolic: SymbolicLu<usize>,
    csc: SymbolicSparseColMat<usize>,
    // Position in the CSR value array of each CSC entry.
    perm: Vec<usize>,
}

impl LinearSolver {
    pub(crate) fn new(backend: LinearBackend, rel_tol: f64) -> Self {
        faer::set_global_parallelism(Par::Seq);
        Self {
            backend,
            rel_tol,
            max_iter: 2000,
            pattern: None,
            lu: None,
            krylov_iterations: 0,
        }
    }

    pub(crate) fn solve(&mut self, a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
        match self.backend {
            LinearBackend::SparseLu => self.solve_lu(a, b),
            LinearBackend::IluBicgstab => {
                let (x, iters) = bicgstab(a, b, self.rel_tol, self.max_iter)?;
                self.krylov_iterations += iters;
                Ok(x)
            }
        }
    }

    fn solve_lu(&mut self, a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let reuse = self.pattern.as_ref().is_some_and(|p| p.same_pattern(a));
        if !reuse {
            let (csc, perm) = csr_to_csc_pattern(a);
            let symbolic = SymbolicLu::try_new(csc.as_ref())
                .map_err(|e| Error::Linear(format!("symbolic LU failed: {e:?}")))?;
            self.lu = Some(LuCache {
                symbolic,
                csc,
                perm,
            });
            self.pattern = Some(a.clone());
        }
        let cache = self.lu.as_ref().unwrap();
        let values: Vec<f64> = cache.perm.iter().map(|&p| a.vals[p]).collect();
        let mat = SparseColMat::new(cache.csc.clone(), values);
        let lu = Lu::try_new_with_symbolic(cache.symbolic.clone(), mat.as_ref())
            .map_err(|e| Error::Linear(format!("numeric LU failed: {e:?}")))?;
        let mut x = Mat::<f64>::from_fn(a.n, 1, |i, _| b[i]);
        lu.solve_in_place_with_conj(Conj::No, x.as_mut());
        let out: Vec<f64> = (0..a.n).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Linear("LU solve produced non-finite values".into()));
        }
        Ok(out)
    }
}

fn csr_to_csc_pattern(a: &SparseMatrix) -> (SymbolicSparseColMat<usize>, Vec<usize>) {
    let n = a.n;
    let mut count = vec![0usize; n + 1];
    for &c in &a.cols {
        count[c as usize + 1] += 1;
    }
    for j in 0..n {
        count[j + 1] += count[j];
    }
    let col_ptr = count.clone();
    let mut next = count;
    let mut row_idx = vec![0usize; a.nnz()];
    let mut perm = vec![0usize; a.nnz()];
    for i in 0..n {
        for p in a.row_ptr[i]..a.row_ptr[i + 1] {
            let c = a.cols[p] as usize;
            row_idx[next[c]] = i;
            perm[next[c]] = p;
            next[c] += 1;
        }
    }
    (
        SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx),
        perm,
    )
}

/// Incomplete LU factorization with the sparsity pattern of `a`.
struct Ilu0 {
    lu: SparseMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    fn new(a: &SparseMatrix) -> Result<Self> {
        let mut lu = a.clone();
        let n = a.n;
        let mut diag = vec![usize::MAX; n];
        for (i, d) in diag.iter_mut().enumerate() {
            for p in lu.row_ptr[i]..lu.row_ptr[i + 1] {
                if lu.cols[p] as usize == i {
                    *d = p;
                }
            }
            if *d == usize::MAX {
                return Err(Error::Linear(format!("row {i} has no diagonal entry")));
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.row_ptr[i], lu.row_ptr[i + 1]);
            for p in start..end {
                pos[lu.cols[p] as usize] = p;
            }
            for p in start..end {
                let k = lu.cols[p] as usize;
                if k >= i {
                    break;
                }
                let pivot = lu.vals[diag[k]];
                if pivot == 0.0 {
                    return Err(Error::Linear(format!("zero ILU pivot in row {k}")));
                }
                let factor = lu.vals[p] / pivot;
                lu.vals[p] = factor;
                for q in diag[k] + 1..lu.row_ptr[k + 1] {
                    let j = lu.cols[q] as usize;
                    if pos[j] != usize::MAX {
                        lu.vals[pos[j]] -= factor * lu.vals[q];
                    }
                }
            }
            for p in start..end {
                pos[lu.cols[p] as usize] = usize::MAX;
            }
            if lu.vals[diag[i]] == 0.0 {
                return Err(Error::Linear(format!("zero ILU pivot in row {i}")));
            }
        }
        Ok(Self { lu, diag })
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let m = &self.lu;
        for i in 0..m.n {
            let mut s = r[i];
            for p in m.row_ptr[i]..self.diag[i] {
                s -= m.vals[p] * z[m.cols[p] as usize];
            }
            z[i] = s;
        }
        for i in (0..m.n).rev() {
            let mut s = z[i];
            for p in self.diag[i] + 1..m.row_ptr[i + 1] {
                s -= m.vals[p] * z[m.cols[p] as usize];
            }
            z[i] = s / m.vals[self.diag[i]];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Right-preconditioned BiCGSTAB with ILU(0); returns the solution and the
/// iteration count.
pub(crate) fn bicgstab(
    a: &SparseMatrix,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize)> {
    let n = a.n;
    let pre = Ilu0::new(a)?;
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        pre.apply(&p, &mut phat);
        a.matvec_into(&phat, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if norm(&s) <= rel_tol * bnorm {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return Ok((x, it));
        }
        pre.apply(&s, &mut shat);
        a.matvec_into(&shat, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        let res = norm(&r);
        if !res.is_finite() {
            break;
        }
        if res <= rel_tol * bnorm {
            return Ok((x, it));
        }
        if omega == 0.0 {
            break;
        }
    }
    let res = norm(
        &a.matvec(&x)
            .iter()
            .zip(b)
            .map(|(ax, bi)| bi - ax)
            .collect::<Vec<_>>(),
    );
    Err(Error::Linear(format!(
        "BiCGSTAB stalled at relative residual {:.3e} (tolerance {rel_tol:.1e})",
        res / bnorm
    )))
}
