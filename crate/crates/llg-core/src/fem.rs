//! P1 finite element kernels on triangle meshes.
//!
//! Assembles mass, stiffness and vector-weighted mass matrices, evaluates
//! L2/H1 error norms by quadrature, and provides the Ritz projection with a
//! mean-value term as the rank-one bordered system
//! `[[K, u], [u^T, -1]]` with `u = M * 1`.

use std::sync::Arc;

use crate::error::Error;
use crate::field::{NodalField, ScalarField, VectorField};
use crate::mesh::TriMesh;
use crate::num::{real, Real};
use crate::quad::{rule_for_degree, TriQuadRule};
use crate::sparse::{CsrMatrix, DirectFactor, FactorScalar};

/// Mass and stiffness matrices sharing one sparsity pattern.
#[derive(Debug, Clone)]
pub struct P1System<T> {
    pub mass: CsrMatrix<T>,
    pub stiffness: CsrMatrix<T>,
}

#[derive(Debug, Clone, Copy)]
pub struct ElemGeometry<T> {
    pub area: T,
    /// Constant gradients of the three barycentric shape functions.
    pub grads: [[T; 2]; 3],
}

pub fn elem_geometry<T: Real>(verts: &[[T; 2]], tri: [usize; 3]) -> ElemGeometry<T> {
    let [a, b, c] = tri;
    let (pa, pb, pc) = (verts[a], verts[b], verts[c]);
    let det = (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0]);
    let area = det * real::<T>(0.5);
    let inv = T::one() / det;
    ElemGeometry {
        area,
        grads: [
            [(pb[1] - pc[1]) * inv, (pc[0] - pb[0]) * inv],
            [(pc[1] - pa[1]) * inv, (pa[0] - pc[0]) * inv],
            [(pa[1] - pb[1]) * inv, (pb[0] - pa[0]) * inv],
        ],
    }
}

/// Maps a barycentric point into physical coordinates.
#[inline]
pub fn bary_to_physical<T: Real>(verts: &[[T; 2]], tri: [usize; 3], bary: [T; 3]) -> [T; 2] {
    let mut x = [T::zero(); 2];
    for (l, &v) in bary.iter().zip(tri.iter()) {
        x[0] += *l * verts[v][0];
        x[1] += *l * verts[v][1];
    }
    x
}

/// Assembles the P1 mass matrix (degree-2 quadrature, exact) and stiffness
/// matrix (constant gradients, exact).
pub fn assemble_p1<T: Real>(mesh: &TriMesh<T>) -> P1System<T> {
    let n = mesh.num_vertices();
    let rule: TriQuadRule<T> = rule_for_degree(2);
    let mut mass_trips = Vec::with_capacity(9 * mesh.num_triangles());
    let mut stiff_trips = Vec::with_capacity(9 * mesh.num_triangles());

    for &tri in mesh.triangles() {
        let geom = elem_geometry(mesh.vertices(), tri);
        for a in 0..3 {
            for b in 0..3 {
                let mut m = T::zero();
                for (pt, w) in rule.points.iter().zip(&rule.weights) {
                    m += *w * pt[a] * pt[b];
                }
                m *= geom.area;
                let k = geom.area
                    * (geom.grads[a][0] * geom.grads[b][0] + geom.grads[a][1] * geom.grads[b][1]);
                mass_trips.push((tri[a], tri[b], m));
                stiff_trips.push((tri[a], tri[b], k));
            }
        }
    }
    let mass = CsrMatrix::from_triplets(n, n, &mass_trips).expect("valid mass triplets");
    let stiffness = CsrMatrix::from_triplets(n, n, &stiff_trips).expect("valid stiffness triplets");
    debug_assert!(mass.same_pattern(&stiffness));
    P1System { mass, stiffness }
}

/// Repeated assembler for the three weighted mass matrices
/// `W_c[i][j] = int w_c phi_i phi_j` of a nodal vector weight `w`.
///
/// The integrand is cubic; the stocked degree-4 rule integrates it exactly.
/// The sparsity pattern and scatter indices are cached because this runs
/// once per time step.
pub struct WeightedMassAssembler<T> {
    mesh: Arc<TriMesh<T>>,
    pattern: CsrMatrix<T>,
    /// Per element, the CSR entry index of each local (a, b) pair.
    scatter: Vec<[usize; 9]>,
    areas: Vec<T>,
    rule: TriQuadRule<T>,
}

impl<T: Real> WeightedMassAssembler<T> {
    pub fn new(mesh: &Arc<TriMesh<T>>) -> Self {
        let n = mesh.num_vertices();
        let mut trips = Vec::with_capacity(9 * mesh.num_triangles());
        for &tri in mesh.triangles() {
            for a in 0..3 {
                for b in 0..3 {
                    trips.push((tri[a], tri[b], T::zero()));
                }
            }
        }
        let pattern = CsrMatrix::from_triplets(n, n, &trips).expect("valid pattern triplets");

        let entry_of = |i: usize, j: usize| -> usize {
            let (cols, _) = pattern.row(i);
            let off = cols.binary_search(&j).expect("pattern contains entry");
            pattern.row_ptr()[i] + off
        };
        let mut scatter = Vec::with_capacity(mesh.num_triangles());
        let mut areas = Vec::with_capacity(mesh.num_triangles());
        for (t, &tri) in mesh.triangles().iter().enumerate() {
            let mut s = [0usize; 9];
            for a in 0..3 {
                for b in 0..3 {
                    s[3 * a + b] = entry_of(tri[a], tri[b]);
                }
            }
            scatter.push(s);
            areas.push(mesh.triangle_area(t));
        }
        WeightedMassAssembler {
            mesh: Arc::clone(mesh),
            pattern,
            scatter,
            areas,
            rule: rule_for_degree(4),
        }
    }

    pub fn mesh(&self) -> &Arc<TriMesh<T>> {
        &self.mesh
    }

    pub fn assemble(&self, w: &VectorField<T>) -> [CsrMatrix<T>; 3] {
        assert!(
            Arc::ptr_eq(w.mesh(), &self.mesh),
            "weight field lives on a different mesh"
        );
        let mut out = [
            self.pattern.clone(),
            self.pattern.clone(),
            self.pattern.clone(),
        ];
        let wvals = w.vals();
        for (t, &tri) in self.mesh.triangles().iter().enumerate() {
            let area = self.areas[t];
            let mut local = [[T::zero(); 9]; 3];
            for (pt, wq) in self.rule.points.iter().zip(&self.rule.weights) {
                // Weight components at the quadrature point.
                let mut wc = [T::zero(); 3];
                for (l, &v) in pt.iter().zip(tri.iter()) {
                    for c in 0..3 {
                        wc[c] += *l * wvals[v][c];
                    }
                }
                let scaled = *wq * area;
                for a in 0..3 {
                    for b in 0..3 {
                        let shape = pt[a] * pt[b] * scaled;
                        for c in 0..3 {
                            local[c][3 * a + b] += wc[c] * shape;
                        }
                    }
                }
            }
            for c in 0..3 {
                let vals = out[c].vals_mut();
                for e in 0..9 {
                    vals[self.scatter[t][e]] += local[c][e];
                }
            }
        }
        out
    }
}

/// Applies a scalar matrix to every component of a multi-component nodal
/// value array.
pub fn apply_scalar<T: Real, const C: usize>(m: &CsrMatrix<T>, x: &[[T; C]]) -> Vec<[T; C]> {
    assert_eq!(m.ncols(), x.len());
    let mut y = vec![[T::zero(); C]; m.nrows()];
    for i in 0..m.nrows() {
        let (cols, vals) = m.row(i);
        let mut acc = [T::zero(); C];
        for (&j, &v) in cols.iter().zip(vals) {
            for c in 0..C {
                acc[c] += v * x[j][c];
            }
        }
        y[i] = acc;
    }
    y
}

/// `sum_c a_c^T M b_c` for a scalar matrix applied componentwise.
pub fn bilinear<T: Real, const C: usize>(m: &CsrMatrix<T>, a: &[[T; C]], b: &[[T; C]]) -> T {
    let mb = apply_scalar(m, b);
    let mut acc = T::zero();
    for (ai, yi) in a.iter().zip(&mb) {
        for c in 0..C {
            acc += ai[c] * yi[c];
        }
    }
    acc
}

#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms<T> {
    pub l2: T,
    pub h1_semi: T,
}

impl<T: Real> ErrorNorms<T> {
    pub fn h1(&self) -> T {
        (self.l2 * self.l2 + self.h1_semi * self.h1_semi).sqrt()
    }
}

/// L2 and H1-seminorm distance between a P1 vector field and a smooth field
/// given by closures, integrated with the supplied rule (degree 6 in the
/// convergence studies).
pub fn error_norms_vec<T: Real>(
    u: &VectorField<T>,
    exact: impl Fn([T; 2]) -> [T; 3],
    exact_grad: impl Fn([T; 2]) -> [[T; 2]; 3],
    rule: &TriQuadRule<T>,
) -> ErrorNorms<T> {
    let mesh = u.mesh();
    let verts = mesh.vertices();
    let vals = u.vals();
    let mut l2 = T::zero();
    let mut h1 = T::zero();
    for &tri in mesh.triangles() {
        let geom = elem_geometry(verts, tri);
        // The P1 gradient is constant on the element.
        let mut gu = [[T::zero(); 2]; 3];
        for (a, &v) in tri.iter().enumerate() {
            for c in 0..3 {
                gu[c][0] += vals[v][c] * geom.grads[a][0];
                gu[c][1] += vals[v][c] * geom.grads[a][1];
            }
        }
        for (pt, w) in rule.points.iter().zip(&rule.weights) {
            let x = bary_to_physical(verts, tri, *pt);
            let ex = exact(x);
            let eg = exact_grad(x);
            let mut uv = [T::zero(); 3];
            for (l, &v) in pt.iter().zip(tri.iter()) {
                for c in 0..3 {
                    uv[c] += *l * vals[v][c];
                }
            }
            let scaled = *w * geom.area;
            for c in 0..3 {
                let d = uv[c] - ex[c];
                l2 += scaled * d * d;
                let dx = gu[c][0] - eg[c][0];
                let dy = gu[c][1] - eg[c][1];
                h1 += scaled * (dx * dx + dy * dy);
            }
        }
    }
    ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
    }
}

/// Scalar variant of [`error_norms_vec`].
pub fn error_norms_scalar<T: Real>(
    u: &ScalarField<T>,
    exact: impl Fn([T; 2]) -> T,
    exact_grad: impl Fn([T; 2]) -> [T; 2],
    rule: &TriQuadRule<T>,
) -> ErrorNorms<T> {
    let lift = NodalField::<T, 3>::new(
        Arc::clone(u.mesh()),
        u.vals().iter().map(|v| [v[0], T::zero(), T::zero()]).collect(),
    );
    error_norms_vec(
        &lift,
        |x| [exact(x), T::zero(), T::zero()],
        |x| [exact_grad(x), [T::zero(); 2], [T::zero(); 2]],
        rule,
    )
}

/// Discrete L2/H1 distance between two P1 fields on the same mesh, evaluated
/// exactly through the mass and stiffness quadratic forms.
pub fn diff_norms<T: Real, const C: usize>(
    sys: &P1System<T>,
    a: &NodalField<T, C>,
    b: &NodalField<T, C>,
) -> ErrorNorms<T> {
    assert!(a.same_mesh(b), "fields live on different meshes");
    let d: Vec<[T; C]> = a
        .vals()
        .iter()
        .zip(b.vals())
        .map(|(x, y)| std::array::from_fn(|c| x[c] - y[c]))
        .collect();
    let l2 = bilinear(&sys.mass, &d, &d).max(T::zero()).sqrt();
    let h1 = bilinear(&sys.stiffness, &d, &d).max(T::zero()).sqrt();
    ErrorNorms { l2, h1_semi: h1 }
}

/// Ritz projection with the mean-value term:
/// `(grad R_h v, grad psi) + (R_h v, 1)(psi, 1) = (grad v, grad psi) + (v, 1)(psi, 1)`.
///
/// The rank-one term is realized exactly by one bordered row/column, keeping
/// the factorized system sparse. The projector reproduces P1 functions and
/// preserves the mean value.
pub struct RitzProjector<T: FactorScalar> {
    mesh: Arc<TriMesh<T>>,
    bordered: CsrMatrix<T>,
    factor: DirectFactor<T>,
    /// `u = M * 1`, i.e. `u_i = (phi_i, 1)`.
    u: Vec<T>,
    rule: TriQuadRule<T>,
    residual_tol: T,
}

#[derive(Debug, Clone, Copy)]
pub struct RitzOutput<T, F> {
    pub field: F,
    /// Absolute defect of mean preservation, `|(R_h v, 1) - (v, 1)|`.
    pub mean_error: T,
}

impl<T: FactorScalar> RitzProjector<T> {
    pub fn new(mesh: &Arc<TriMesh<T>>, sys: &P1System<T>) -> Result<Self, Error> {
        let n = mesh.num_vertices();
        let ones = vec![[T::one()]; n];
        let u: Vec<T> = apply_scalar(&sys.mass, &ones).iter().map(|v| v[0]).collect();

        let mut trips = Vec::with_capacity(sys.stiffness.nnz() + 2 * n + 1);
        for i in 0..n {
            let (cols, vals) = sys.stiffness.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                trips.push((i, j, v));
            }
            trips.push((i, n, u[i]));
            trips.push((n, i, u[i]));
        }
        trips.push((n, n, -T::one()));
        let bordered = CsrMatrix::from_triplets(n + 1, n + 1, &trips).map_err(Error::Solve)?;
        let factor = DirectFactor::new(&bordered).map_err(Error::Solve)?;
        Ok(RitzProjector {
            mesh: Arc::clone(mesh),
            bordered,
            factor,
            u,
            rule: rule_for_degree(6),
            residual_tol: real::<T>(1e-10),
        })
    }

    pub fn project_scalar(
        &self,
        v: impl Fn([T; 2]) -> T,
        grad_v: impl Fn([T; 2]) -> [T; 2],
    ) -> Result<RitzOutput<T, ScalarField<T>>, Error> {
        let n = self.mesh.num_vertices();
        let verts = self.mesh.vertices();
        let mut rhs = vec![T::zero(); n + 1];
        let mut mean = T::zero();
        for &tri in self.mesh.triangles() {
            let geom = elem_geometry(verts, tri);
            for (pt, w) in self.rule.points.iter().zip(&self.rule.weights) {
                let x = bary_to_physical(verts, tri, *pt);
                let g = grad_v(x);
                let scaled = *w * geom.area;
                for (a, &vx) in tri.iter().enumerate() {
                    rhs[vx] += scaled * (g[0] * geom.grads[a][0] + g[1] * geom.grads[a][1]);
                }
                mean += scaled * v(x);
            }
        }
        for i in 0..n {
            rhs[i] += mean * self.u[i];
        }
        let sol = self
            .factor
            .solve(&self.bordered, &rhs, self.residual_tol)
            .map_err(Error::Solve)?;
        let vals: Vec<[T; 1]> = sol[..n].iter().map(|&x| [x]).collect();
        let mean_r: T = self.u.iter().zip(&sol[..n]).map(|(&u, &r)| u * r).sum();
        Ok(RitzOutput {
            field: ScalarField::new(Arc::clone(&self.mesh), vals),
            mean_error: (mean_r - mean).abs(),
        })
    }

    pub fn project_vector(
        &self,
        v: impl Fn([T; 2]) -> [T; 3],
        grad_v: impl Fn([T; 2]) -> [[T; 2]; 3],
    ) -> Result<RitzOutput<T, VectorField<T>>, Error> {
        let n = self.mesh.num_vertices();
        let mut vals = vec![[T::zero(); 3]; n];
        let mut mean_error = T::zero();
        for c in 0..3 {
            let out = self.project_scalar(|x| v(x)[c], |x| grad_v(x)[c])?;
            for (i, val) in out.field.vals().iter().enumerate() {
                vals[i][c] = val[0];
            }
            mean_error = mean_error.max(out.mean_error);
        }
        Ok(RitzOutput {
            field: VectorField::new(Arc::clone(&self.mesh), vals),
            mean_error,
        })
    }
}
