//! Sparse matrices and the two linear solver routes.
//!
//! Storage is CSR with sorted, duplicate-free column indices. The direct
//! route is a sparse LU with partial pivoting (backed by `faer`); the
//! iterative route is a hand-rolled restarted GMRES with Jacobi
//! preconditioning. The two routes are kept independent so they can serve as
//! oracles for each other.

use crate::error::SolveError;
use crate::num::{real, Real};

#[derive(Debug, Clone)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Builds a CSR matrix from unordered triplets; duplicates are summed.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, T)],
    ) -> Result<Self, SolveError> {
        for &(i, j, _) in triplets {
            if i >= nrows || j >= ncols {
                return Err(SolveError::Dimension(format!(
                    "triplet ({i}, {j}) outside {nrows} x {ncols}"
                )));
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        for &k in &order {
            let (i, j, v) = triplets[k];
            if !col_idx.is_empty()
                && row_ptr[i + 1] > row_ptr[i]
                && *col_idx.last().unwrap() == j
                && row_ptr[i + 1] == col_idx.len()
            {
                let last = vals.len() - 1;
                vals[last] += v;
            } else {
                col_idx.push(j);
                vals.push(v);
                row_ptr[i + 1] = col_idx.len();
            }
        }
        // Rows with no entries still need cumulative pointers.
        for i in 0..nrows {
            if row_ptr[i + 1] < row_ptr[i] {
                row_ptr[i + 1] = row_ptr[i];
            }
        }
        Ok(CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            vals,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn vals(&self) -> &[T] {
        &self.vals
    }

    pub fn vals_mut(&mut self) -> &mut [T] {
        &mut self.vals
    }

    pub fn row(&self, i: usize) -> (&[usize], &[T]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.vals[r])
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.nrows == other.nrows
            && self.ncols == other.ncols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
    }

    pub fn spmv(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.nrows];
        self.spmv_into(x, &mut y);
        y
    }

    pub fn spmv_into(&self, x: &[T], y: &mut [T]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    /// Main diagonal (zero where no entry is stored).
    pub fn diag(&self) -> Vec<T> {
        let mut d = vec![T::zero(); self.nrows.min(self.ncols)];
        for i in 0..d.len() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] = self.vals[k];
                }
            }
        }
        d
    }

    /// Checks structural invariants: sorted duplicate-free columns within
    /// each row, in-bounds indices, finite values.
    pub fn validate(&self) -> Result<(), SolveError> {
        if self.row_ptr.len() != self.nrows + 1 || *self.row_ptr.last().unwrap() != self.vals.len()
        {
            return Err(SolveError::Dimension("corrupt row pointers".into()));
        }
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for w in cols.windows(2) {
                if w[0] >= w[1] {
                    return Err(SolveError::Dimension(format!(
                        "row {i} has unsorted or duplicate columns"
                    )));
                }
            }
            if cols.iter().any(|&c| c >= self.ncols) {
                return Err(SolveError::Dimension(format!("row {i} column out of bounds")));
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(SolveError::NonFinite);
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut dense = vec![vec![T::zero(); self.ncols]; self.nrows];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                dense[i][j] = v;
            }
        }
        dense
    }
}

/// Scalars for which a sparse LU backend is wired up (`f32` and `f64`).
///
/// This keeps the faer dependency out of the public `Real` bound.
pub trait FactorScalar: Real {
    type Factor: Send;
    fn factorize(a: &CsrMatrix<Self>) -> Result<Self::Factor, SolveError>;
    fn backsolve(factor: &Self::Factor, rhs: &[Self]) -> Vec<Self>;
}

macro_rules! impl_factor_scalar {
    ($t:ty) => {
        impl FactorScalar for $t {
            type Factor = faer::sparse::linalg::solvers::Lu<usize, $t>;

            fn factorize(a: &CsrMatrix<Self>) -> Result<Self::Factor, SolveError> {
                use faer::sparse::{SparseColMat, Triplet};
                if a.nrows != a.ncols {
                    return Err(SolveError::Dimension(format!(
                        "direct solver needs a square matrix, got {} x {}",
                        a.nrows, a.ncols
                    )));
                }
                let mut trips: Vec<Triplet<usize, usize, $t>> = Vec::with_capacity(a.nnz());
                for i in 0..a.nrows {
                    let (cols, vals) = a.row(i);
                    for (&j, &v) in cols.iter().zip(vals) {
                        trips.push(Triplet::new(i, j, v));
                    }
                }
                let mat = SparseColMat::try_new_from_triplets(a.nrows, a.ncols, &trips)
                    .map_err(|e| SolveError::Factorization(format!("{e:?}")))?;
                // The backend panics on an exact zero pivot rather than
                // returning an error; contain that and report it as a
                // factorization failure.
                std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| mat.sp_lu()))
                    .map_err(|_| {
                        SolveError::Factorization("numerically singular matrix".to_string())
                    })?
                    .map_err(|e| SolveError::Factorization(format!("{e:?}")))
            }

            fn backsolve(factor: &Self::Factor, rhs: &[Self]) -> Vec<Self> {
                use faer::linalg::solvers::Solve;
                let n = rhs.len();
                let b = faer::Mat::from_fn(n, 1, |i, _| rhs[i]);
                let x = factor.solve(&b);
                (0..n).map(|i| x[(i, 0)]).collect()
            }
        }
    };
}

impl_factor_scalar!(f64);
impl_factor_scalar!(f32);

/// Reusable sparse LU factorization.
pub struct DirectFactor<T: FactorScalar> {
    factor: T::Factor,
    n: usize,
}

impl<T: FactorScalar> DirectFactor<T> {
    pub fn new(a: &CsrMatrix<T>) -> Result<Self, SolveError> {
        Ok(DirectFactor {
            factor: T::factorize(a)?,
            n: a.nrows(),
        })
    }

    /// Solves with the cached factorization, verifying the residual against
    /// the original matrix.
    pub fn solve(&self, a: &CsrMatrix<T>, b: &[T], residual_tol: T) -> Result<Vec<T>, SolveError> {
        if b.len() != self.n || a.nrows() != self.n {
            return Err(SolveError::Dimension(format!(
                "rhs length {} does not match system size {}",
                b.len(),
                self.n
            )));
        }
        let x = T::backsolve(&self.factor, b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite);
        }
        let rel = relative_residual(a, &x, b);
        if rel > residual_tol {
            return Err(SolveError::ResidualTooLarge {
                residual: rel.to_f64().unwrap_or(f64::NAN),
                tol: residual_tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(x)
    }
}

/// Pins the factorization backend to a single thread. The harness already
/// parallelizes across ladder cells; nested threading inside each solve only
/// adds contention.
pub fn set_backend_single_threaded() {
    static ONCE: std::sync::Once = std::sync::Once::new();
    ONCE.call_once(|| faer::set_global_parallelism(faer::Par::Seq));
}

/// One-shot sparse LU solve with a residual acceptance check.
pub fn solve_direct<T: FactorScalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    residual_tol: T,
) -> Result<Vec<T>, SolveError> {
    DirectFactor::new(a)?.solve(a, b, residual_tol)
}

fn nrm2<T: Real>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

fn relative_residual<T: Real>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = a.spmv(x);
    let mut rr = T::zero();
    for i in 0..b.len() {
        let r = b[i] - ax[i];
        rr += r * r;
    }
    let nb = nrm2(b);
    let scale = if nb > T::zero() { nb } else { T::one() };
    rr.sqrt() / scale
}

#[derive(Debug, Clone)]
pub struct GmresOptions<T> {
    pub rel_tol: T,
    pub restart: usize,
    pub max_iters: usize,
}

impl<T: Real> Default for GmresOptions<T> {
    fn default() -> Self {
        GmresOptions {
            rel_tol: real::<T>(1e-12),
            restart: 50,
            max_iters: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IterStats<T> {
    pub iters: usize,
    /// Relative residual of the returned iterate.
    pub residual: T,
}

/// Restarted GMRES with right Jacobi preconditioning.
///
/// Fully deterministic: fixed iteration order, sequential reductions.
pub fn solve_gmres<T: Real>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    opts: &GmresOptions<T>,
) -> Result<(Vec<T>, IterStats<T>), SolveError> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(SolveError::Dimension(format!(
            "gmres needs square system; got {} x {} with rhs {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    // Jacobi diagonal; entries too small to invert default to one.
    let mut d = a.diag();
    for di in d.iter_mut() {
        if di.abs() < T::min_positive_value() {
            *di = T::one();
        }
    }
    let norm_b = nrm2(b);
    if norm_b == T::zero() {
        return Ok((
            vec![T::zero(); n],
            IterStats {
                iters: 0,
                residual: T::zero(),
            },
        ));
    }

    let mut x = match x0 {
        Some(x0) => {
            assert_eq!(x0.len(), n);
            x0.to_vec()
        }
        None => vec![T::zero(); n],
    };
    let m = opts.restart.max(1);
    let mut total = 0usize;

    loop {
        let ax = a.spmv(&x);
        let mut r: Vec<T> = (0..n).map(|i| b[i] - ax[i]).collect();
        let beta = nrm2(&r);
        let rel = beta / norm_b;
        if rel <= opts.rel_tol {
            return Ok((x, IterStats {
                iters: total,
                residual: rel,
            }));
        }
        if total >= opts.max_iters {
            return Err(SolveError::NoConvergence {
                iters: total,
                residual: rel.to_f64().unwrap_or(f64::NAN),
                tol: opts.rel_tol.to_f64().unwrap_or(f64::NAN),
            });
        }

        let inv_beta = T::one() / beta;
        for ri in r.iter_mut() {
            *ri *= inv_beta;
        }
        let mut basis: Vec<Vec<T>> = vec![r];
        // Upper Hessenberg columns after Givens rotations (R factor).
        let mut hcols: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut cs: Vec<T> = Vec::with_capacity(m);
        let mut sn: Vec<T> = Vec::with_capacity(m);
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k_used = 0usize;

        for j in 0..m {
            if total >= opts.max_iters {
                break;
            }
            total += 1;

            // w = A D^{-1} v_j
            let mut z: Vec<T> = basis[j].iter().zip(&d).map(|(&v, &di)| v / di).collect();
            let w = a.spmv(&z);
            z.clear();

            let mut h = vec![T::zero(); j + 2];
            let mut w = w;
            let w_scale = nrm2(&w).max(T::one());
            for (i, vi) in basis.iter().enumerate().take(j + 1) {
                let hij: T = w.iter().zip(vi).map(|(&a, &b)| a * b).sum();
                h[i] = hij;
                for (wk, &vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hnext = nrm2(&w);
            h[j + 1] = hnext;

            // Apply accumulated rotations, then generate the new one.
            for i in 0..j {
                let t0 = cs[i] * h[i] + sn[i] * h[i + 1];
                let t1 = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t0;
                h[i + 1] = t1;
            }
            let denom = (h[j] * h[j] + h[j + 1] * h[j + 1]).sqrt();
            let (c, s) = if denom > T::zero() {
                (h[j] / denom, h[j + 1] / denom)
            } else {
                (T::one(), T::zero())
            };
            cs.push(c);
            sn.push(s);
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = T::zero();
            let gj = g[j];
            g[j] = c * gj;
            g[j + 1] = -s * gj;
            hcols.push(h);
            k_used = j + 1;

            let happy = hnext <= T::epsilon() * w_scale;
            if !happy {
                let inv = T::one() / hnext;
                let v_next: Vec<T> = w.iter().map(|&wk| wk * inv).collect();
                basis.push(v_next);
            }
            if happy || g[j + 1].abs() / norm_b <= opts.rel_tol {
                break;
            }
        }

        // Back substitution on the k_used x k_used triangular system.
        let mut y = vec![T::zero(); k_used];
        for i in (0..k_used).rev() {
            let mut acc = g[i];
            for j in (i + 1)..k_used {
                acc -= hcols[j][i] * y[j];
            }
            y[i] = acc / hcols[i][i];
        }
        // x += D^{-1} (V y)
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += basis[j][i] * *yj / d[i];
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_csr() -> CsrMatrix<f64> {
        // [[2, 0, 1], [0, 3, 0], [1, 0, 4]]
        CsrMatrix::from_triplets(
            3,
            3,
            &[
                (0, 0, 2.0),
                (0, 2, 1.0),
                (1, 1, 3.0),
                (2, 0, 1.0),
                (2, 2, 4.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn triplets_merge_duplicates_and_sort() {
        let a = CsrMatrix::from_triplets(
            2,
            2,
            &[(1, 1, 1.0), (0, 1, 2.0), (0, 0, 1.5), (0, 1, 0.5), (1, 0, -1.0)],
        )
        .unwrap();
        a.validate().unwrap();
        assert_eq!(a.nnz(), 4);
        assert_eq!(a.to_dense(), vec![vec![1.5, 2.5], vec![-1.0, 1.0]]);
    }

    #[test]
    fn spmv_matches_hand_computation() {
        let a = small_csr();
        assert_eq!(a.spmv(&[1.0, 2.0, 3.0]), vec![5.0, 6.0, 13.0]);
    }

    #[test]
    fn direct_solve_reproduces_exact_solution() {
        // [[2, 1], [1, 3]] x = [3, 4] has x = [1, 1].
        let a = CsrMatrix::<f64>::from_triplets(
            2,
            2,
            &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)],
        )
        .unwrap();
        let x = solve_direct(&a, &[3.0, 4.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14);
        assert!((x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn direct_solve_rejects_singular_matrix() {
        let a =
            CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)])
                .unwrap();
        assert!(solve_direct(&a, &[1.0, 2.0], 1e-10).is_err());
    }

    #[test]
    fn direct_solve_works_in_f32() {
        let a = CsrMatrix::<f32>::from_triplets(
            2,
            2,
            &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0)],
        )
        .unwrap();
        let x = solve_direct(&a, &[3.0f32, 4.0], 1e-5).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn gmres_converges_in_one_iteration_on_identity() {
        let n = 17;
        let trips: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        let a = CsrMatrix::from_triplets(n, n, &trips).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 2.0).collect();
        let (x, stats) = solve_gmres(&a, &b, None, &GmresOptions::default()).unwrap();
        assert_eq!(stats.iters, 1);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-12);
        }
    }

    #[test]
    fn gmres_agrees_with_direct_on_nonsymmetric_system() {
        // Diagonally dominant nonsymmetric band matrix.
        let n = 60;
        let mut trips = Vec::new();
        for i in 0..n {
            trips.push((i, i, 4.0 + (i % 3) as f64));
            if i + 1 < n {
                trips.push((i, i + 1, -1.0));
                trips.push((i + 1, i, 1.5));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &trips).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (0.3 * i as f64).cos()).collect();
        let xd = solve_direct(&a, &b, 1e-10).unwrap();
        let (xg, stats) = solve_gmres(&a, &b, None, &GmresOptions::default()).unwrap();
        assert!(stats.residual <= 1e-12);
        let diff = xd
            .iter()
            .zip(&xg)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-8, "direct and gmres disagree: {diff:e}");
    }

    #[test]
    fn gmres_reports_nonconvergence() {
        let a = CsrMatrix::from_triplets(
            2,
            2,
            &[(0, 0, 1.0), (0, 1, 1e6), (1, 0, -1e6), (1, 1, 1.0)],
        )
        .unwrap();
        let opts = GmresOptions {
            rel_tol: 1e-14,
            restart: 1,
            max_iters: 1,
        };
        match solve_gmres(&a, &[1.0, 1.0], None, &opts) {
            Err(SolveError::NoConvergence { iters, .. }) => assert_eq!(iters, 1),
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_rhs_short_circuits() {
        let a = small_csr();
        let (x, stats) = solve_gmres(&a, &[0.0; 3], None, &GmresOptions::default()).unwrap();
        assert_eq!(stats.iters, 0);
        assert!(x.iter().all(|&v| v == 0.0));
    }
}
