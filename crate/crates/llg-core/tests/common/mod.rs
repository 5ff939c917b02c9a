//! Shared helpers for the integration tests: a dense direct solver and a
//! Lagrange-multiplier formulation of the tangent-space step. Both are
//! deliberately naive so they can serve as oracles for the production path.

use llg_core::fem::P1System;
use llg_core::sparse::CsrMatrix;

/// Solves `A x = b` by Gaussian elimination with partial pivoting. Dense and
/// cubic, only meant for oracle-sized systems.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n));
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .expect("nonempty pivot range");
        assert!(
            a[piv][k].abs() > 1e-14,
            "singular oracle matrix at column {k}"
        );
        a.swap(k, piv);
        b.swap(k, piv);
        let (upper, lower) = a.split_at_mut(k + 1);
        let row_k = &upper[k];
        for (off, row_i) in lower.iter_mut().enumerate() {
            let f = row_i[k] / row_k[k];
            if f != 0.0 {
                for j in k..n {
                    row_i[j] -= f * row_k[j];
                }
                b[k + 1 + off] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    x
}

/// Tangent-space step by the textbook route: the constrained linear system
/// with explicit Lagrange multipliers,
///
/// `[A  G; G^T 0] [v; mu] = [b; 0]`,
///
/// where `A = alpha M + C(m_hat) + c_stiff K` in 3x3 blocks per matrix entry
/// and `G = blockdiag(m_hat(z))` encodes the nodal constraints
/// `m_hat(z) . v(z) = 0`. The production solver parametrizes the constraint
/// manifold with per-node frames instead; both must produce the same `v` for
/// any right-hand side because the frame columns span the kernel of `G^T`.
pub fn kkt_tangent_step(
    sys: &P1System<f64>,
    ws: &[CsrMatrix<f64>; 3],
    m_hat: &[[f64; 3]],
    alpha: f64,
    c_stiff: f64,
    rhs: &[[f64; 3]],
) -> Vec<[f64; 3]> {
    let n = m_hat.len();
    let md = sys.mass.to_dense();
    let kd = sys.stiffness.to_dense();
    let wd = [ws[0].to_dense(), ws[1].to_dense(), ws[2].to_dense()];
    let dim = 4 * n;
    let mut a = vec![vec![0.0; dim]; dim];
    for i in 0..n {
        for j in 0..n {
            let diag = alpha * md[i][j] + c_stiff * kd[i][j];
            let w = [wd[0][i][j], wd[1][i][j], wd[2][i][j]];
            // diag I + [w]_x
            let block = [
                [diag, -w[2], w[1]],
                [w[2], diag, -w[0]],
                [-w[1], w[0], diag],
            ];
            for r in 0..3 {
                for c in 0..3 {
                    a[3 * i + r][3 * j + c] = block[r][c];
                }
            }
        }
        for r in 0..3 {
            a[3 * i + r][3 * n + i] = m_hat[i][r];
            a[3 * n + i][3 * i + r] = m_hat[i][r];
        }
    }
    let mut b = vec![0.0; dim];
    for i in 0..n {
        for r in 0..3 {
            b[3 * i + r] = rhs[i][r];
        }
    }
    let x = solve_dense(a, b);
    (0..n)
        .map(|i| [x[3 * i], x[3 * i + 1], x[3 * i + 2]])
        .collect()
}
