//! Nodal tangent frames and reduced-system assembly.
//!
//! The update at each time step lives in the discrete tangent space of the
//! predictor field `m`: at every node, the unknown is orthogonal to `m(z)`.
//! We parametrize that plane by an orthonormal frame `(t1, t2)` per node and
//! assemble the 2N x 2N reduced matrix `B^T A B`, where `B` stacks the frame
//! vectors and `A` combines mass, cross and stiffness terms.

use crate::error::Error;
use crate::num::{cross3, dot3, norm3, real, Real};
use crate::sparse::CsrMatrix;

/// Normalizes a 3-vector, returning `None` below the length floor.
pub fn normalize3<T: Real>(v: [T; 3], floor: T) -> Option<[T; 3]> {
    let n = norm3(v);
    if n < floor {
        None
    } else {
        Some([v[0] / n, v[1] / n, v[2] / n])
    }
}

/// Removes the component of `v` along `m` (per node): `v - (v.m / |m|^2) m`.
pub fn project_tangent_nodal<T: Real>(m: &[[T; 3]], v: &[[T; 3]]) -> Vec<[T; 3]> {
    assert_eq!(m.len(), v.len());
    m.iter()
        .zip(v)
        .map(|(mi, vi)| {
            let c = dot3(*vi, *mi) / dot3(*mi, *mi);
            [vi[0] - c * mi[0], vi[1] - c * mi[1], vi[2] - c * mi[2]]
        })
        .collect()
}

/// Orthonormal basis of the plane orthogonal to a nodal direction field.
///
/// Per node: pick the coordinate axis `e_k` with the smallest `|m_k|`
/// (smallest `k` on ties), then
/// `t1 = e_k x m / |e_k x m|`, `t2 = m x t1 / |m|`.
/// The axis choice keeps `|e_k x m| >= sqrt(2/3) |m|`, so the construction
/// never degenerates for nonzero `m`.
#[derive(Debug, Clone)]
pub struct TangentFrame<T> {
    t1: Vec<[T; 3]>,
    t2: Vec<[T; 3]>,
}

impl<T: Real> TangentFrame<T> {
    pub fn new(m: &[[T; 3]]) -> Result<Self, Error> {
        let floor = real::<T>(1e-8);
        let mut t1 = Vec::with_capacity(m.len());
        let mut t2 = Vec::with_capacity(m.len());
        for (i, &mi) in m.iter().enumerate() {
            let len = norm3(mi);
            if len < floor {
                return Err(Error::Invariant(format!(
                    "tangent frame: direction at node {i} has length {len:e}, below 1e-8"
                )));
            }
            let mut k = 0;
            for c in 1..3 {
                if mi[c].abs() < mi[k].abs() {
                    k = c;
                }
            }
            let mut e = [T::zero(); 3];
            e[k] = T::one();
            let a = cross3(e, mi);
            let t1i = normalize3(a, floor).expect("axis choice keeps the cross product large");
            let b = cross3(mi, t1i);
            t1.push(t1i);
            t2.push([b[0] / len, b[1] / len, b[2] / len]);
        }
        Ok(TangentFrame { t1, t2 })
    }

    pub fn len(&self) -> usize {
        self.t1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t1.is_empty()
    }

    pub fn t1(&self, i: usize) -> [T; 3] {
        self.t1[i]
    }

    pub fn t2(&self, i: usize) -> [T; 3] {
        self.t2[i]
    }

    /// `B^T v`: coefficients of the nodal tangent components,
    /// interleaved as `[t1.v, t2.v]` per node.
    pub fn reduce_vec(&self, v: &[[T; 3]]) -> Vec<T> {
        assert_eq!(v.len(), self.len());
        let mut y = Vec::with_capacity(2 * v.len());
        for i in 0..v.len() {
            y.push(dot3(self.t1[i], v[i]));
            y.push(dot3(self.t2[i], v[i]));
        }
        y
    }

    /// `B y`: rebuilds nodal vectors from frame coefficients.
    pub fn expand(&self, y: &[T]) -> Vec<[T; 3]> {
        assert_eq!(y.len(), 2 * self.len());
        (0..self.len())
            .map(|i| {
                let (a, b) = (y[2 * i], y[2 * i + 1]);
                [
                    a * self.t1[i][0] + b * self.t2[i][0],
                    a * self.t1[i][1] + b * self.t2[i][1],
                    a * self.t1[i][2] + b * self.t2[i][2],
                ]
            })
            .collect()
    }
}

/// Applies the cross operator `C(w)` built from the weighted mass matrices:
/// `(C x)_i = sum_j w_ij x (x_j)` with `w_ij = (W0_ij, W1_ij, W2_ij)`.
pub fn apply_cross<T: Real>(ws: &[CsrMatrix<T>; 3], x: &[[T; 3]]) -> Vec<[T; 3]> {
    let n = ws[0].nrows();
    assert_eq!(x.len(), n);
    let mut y = vec![[T::zero(); 3]; n];
    for i in 0..n {
        let (cols, v0) = ws[0].row(i);
        let v1 = ws[1].row(i).1;
        let v2 = ws[2].row(i).1;
        let mut acc = [T::zero(); 3];
        for (idx, &j) in cols.iter().enumerate() {
            let w = [v0[idx], v1[idx], v2[idx]];
            let c = cross3(w, x[j]);
            acc[0] += c[0];
            acc[1] += c[1];
            acc[2] += c[2];
        }
        y[i] = acc;
    }
    y
}

/// Assembles the reduced system matrix `B^T (alpha M + C(w) + c_stiff K) B`.
///
/// `M`, `K` and the three weighted mass matrices must share one sparsity
/// pattern (they do when assembled on the same mesh). The cross part
/// contributes the skew block `[w_ij]_x` per scalar entry, so the reduced
/// matrix is the sum of a symmetric positive definite part and a skew part.
pub fn assemble_reduced<T: Real>(
    frame: &TangentFrame<T>,
    mass: &CsrMatrix<T>,
    ws: &[CsrMatrix<T>; 3],
    stiffness: &CsrMatrix<T>,
    alpha: T,
    c_stiff: T,
) -> CsrMatrix<T> {
    let n = mass.nrows();
    assert_eq!(frame.len(), n);
    assert!(mass.same_pattern(stiffness), "pattern mismatch: M vs K");
    assert!(mass.same_pattern(&ws[0]), "pattern mismatch: M vs W");
    let mut trips = Vec::with_capacity(4 * mass.nnz());
    for i in 0..n {
        let (cols, mv) = mass.row(i);
        let kv = stiffness.row(i).1;
        let w0 = ws[0].row(i).1;
        let w1 = ws[1].row(i).1;
        let w2 = ws[2].row(i).1;
        let ti = [frame.t1(i), frame.t2(i)];
        for (idx, &j) in cols.iter().enumerate() {
            let diag = alpha * mv[idx] + c_stiff * kv[idx];
            let w = [w0[idx], w1[idx], w2[idx]];
            let tj = [frame.t1(j), frame.t2(j)];
            for a in 0..2 {
                for b in 0..2 {
                    // t_a(i)^T (diag I + [w]_x) t_b(j)
                    let val = diag * dot3(ti[a], tj[b]) + dot3(ti[a], cross3(w, tj[b]));
                    trips.push((2 * i + a, 2 * j + b, val));
                }
            }
        }
    }
    CsrMatrix::from_triplets(2 * n, 2 * n, &trips).expect("valid reduced triplets")
}

/// Reduced mass matrix `B^T (M I3) B`, used for defect norms.
pub fn assemble_reduced_mass<T: Real>(
    frame: &TangentFrame<T>,
    mass: &CsrMatrix<T>,
) -> CsrMatrix<T> {
    let n = mass.nrows();
    assert_eq!(frame.len(), n);
    let mut trips = Vec::with_capacity(4 * mass.nnz());
    for i in 0..n {
        let (cols, mv) = mass.row(i);
        let ti = [frame.t1(i), frame.t2(i)];
        for (idx, &j) in cols.iter().enumerate() {
            let tj = [frame.t1(j), frame.t2(j)];
            for a in 0..2 {
                for b in 0..2 {
                    trips.push((2 * i + a, 2 * j + b, mv[idx] * dot3(ti[a], tj[b])));
                }
            }
        }
    }
    CsrMatrix::from_triplets(2 * n, 2 * n, &trips).expect("valid reduced triplets")
}
