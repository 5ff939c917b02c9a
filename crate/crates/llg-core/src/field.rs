//! Nodal P1 fields and exact prolongation between nested meshes.

use std::sync::Arc;

use crate::error::Error;
use crate::mesh::{TriMesh, VertexOrigin};
use crate::num::{real, Real};

/// Piecewise-linear field given by one `C`-component value per mesh vertex.
#[derive(Debug, Clone)]
pub struct NodalField<T, const C: usize> {
    mesh: Arc<TriMesh<T>>,
    vals: Vec<[T; C]>,
}

pub type ScalarField<T> = NodalField<T, 1>;
pub type VectorField<T> = NodalField<T, 3>;

impl<T: Real, const C: usize> NodalField<T, C> {
    pub fn new(mesh: Arc<TriMesh<T>>, vals: Vec<[T; C]>) -> Self {
        assert_eq!(
            vals.len(),
            mesh.num_vertices(),
            "nodal value count must match the vertex count"
        );
        NodalField { mesh, vals }
    }

    pub fn zeros(mesh: Arc<TriMesh<T>>) -> Self {
        let n = mesh.num_vertices();
        NodalField {
            mesh,
            vals: vec![[T::zero(); C]; n],
        }
    }

    /// Nodal interpolant of a pointwise function.
    pub fn interpolate(mesh: Arc<TriMesh<T>>, f: impl Fn([T; 2]) -> [T; C]) -> Self {
        let vals = mesh.vertices().iter().map(|&x| f(x)).collect();
        NodalField { mesh, vals }
    }

    pub fn mesh(&self) -> &Arc<TriMesh<T>> {
        &self.mesh
    }

    pub fn vals(&self) -> &[[T; C]] {
        &self.vals
    }

    pub fn vals_mut(&mut self) -> &mut [[T; C]] {
        &mut self.vals
    }

    pub fn into_vals(self) -> Vec<[T; C]> {
        self.vals
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn same_mesh(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh)
    }

    /// `a * f + b * g` on a shared mesh.
    pub fn lin2(a: T, f: &Self, b: T, g: &Self) -> Self {
        assert!(f.same_mesh(g), "fields live on different meshes");
        let vals = f
            .vals
            .iter()
            .zip(&g.vals)
            .map(|(x, y)| std::array::from_fn(|c| a * x[c] + b * y[c]))
            .collect();
        NodalField {
            mesh: Arc::clone(&f.mesh),
            vals,
        }
    }

    /// Exact P1 prolongation onto `fine`, which must have been produced by
    /// bisecting this field's mesh.
    pub fn prolong(&self, fine: &Arc<TriMesh<T>>) -> Result<Self, Error> {
        let parent = fine.parent().ok_or_else(|| {
            Error::InvalidInput("prolongation target has no parent mesh".into())
        })?;
        if !Arc::ptr_eq(parent, &self.mesh) {
            return Err(Error::InvalidInput(
                "prolongation target is not a direct refinement of the field's mesh".into(),
            ));
        }
        let origins = fine.vertex_origins().expect("refined mesh keeps origins");
        let half = real::<T>(0.5);
        let mut vals: Vec<[T; C]> = Vec::with_capacity(fine.num_vertices());
        for origin in origins {
            let v = match *origin {
                VertexOrigin::Coarse(c) => self.vals[c],
                // Midpoint endpoints always precede the midpoint itself, so
                // they are already resolved in `vals`.
                VertexOrigin::Midpoint(p, q) => {
                    std::array::from_fn(|c| (vals[p][c] + vals[q][c]) * half)
                }
            };
            vals.push(v);
        }
        Ok(NodalField {
            mesh: Arc::clone(fine),
            vals,
        })
    }

    /// Prolongs through a chain of bisections until reaching `target`.
    pub fn prolong_to(&self, target: &Arc<TriMesh<T>>) -> Result<Self, Error> {
        // Collect the lineage of `target` back to the field's mesh.
        let mut chain = Vec::new();
        let mut cursor = Arc::clone(target);
        while !Arc::ptr_eq(&cursor, &self.mesh) {
            chain.push(Arc::clone(&cursor));
            cursor = match cursor.parent() {
                Some(p) => Arc::clone(p),
                None => {
                    return Err(Error::InvalidInput(
                        "target mesh is not a refinement descendant of the field's mesh".into(),
                    ))
                }
            };
        }
        let mut field = self.clone();
        for mesh in chain.iter().rev() {
            field = field.prolong(mesh)?;
        }
        Ok(field)
    }
}

impl<T: Real> VectorField<T> {
    /// Smallest and largest nodal Euclidean lengths.
    pub fn nodal_length_range(&self) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::zero();
        for v in &self.vals {
            let len = crate::num::norm3(*v);
            lo = lo.min(len);
            hi = hi.max(len);
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;

    #[test]
    fn prolongation_is_exact_on_p1_functions() {
        let coarse = TriMesh::<f64>::diagonal(3);
        let fine = coarse.uniform_bisect().unwrap();
        let affine = |x: [f64; 2]| [2.0 * x[0] - 0.75 * x[1] + 0.25];
        let fc = ScalarField::interpolate(Arc::clone(&coarse), affine);
        let ff = fc.prolong(&fine).unwrap();
        let direct = ScalarField::interpolate(Arc::clone(&fine), affine);
        for (a, b) in ff.vals().iter().zip(direct.vals()) {
            assert!((a[0] - b[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn prolong_to_chains_through_levels() {
        let coarse = TriMesh::<f64>::diagonal(2);
        let mid = coarse.uniform_bisect().unwrap();
        let fine = mid.uniform_bisect().unwrap();
        let affine = |x: [f64; 2]| [x[0] + x[1], 1.0 - x[0], 0.5 * x[1]];
        let fc = VectorField::interpolate(Arc::clone(&coarse), affine);
        let ff = fc.prolong_to(&fine).unwrap();
        let direct = VectorField::interpolate(Arc::clone(&fine), affine);
        for (a, b) in ff.vals().iter().zip(direct.vals()) {
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn prolong_rejects_unrelated_meshes() {
        let a = TriMesh::<f64>::diagonal(2);
        let b = TriMesh::<f64>::diagonal(2);
        let f = ScalarField::interpolate(Arc::clone(&a), |x| [x[0]]);
        let fine_of_b = b.uniform_bisect().unwrap();
        assert!(f.prolong(&fine_of_b).is_err());
        assert!(f.prolong_to(&fine_of_b).is_err());
    }
}
