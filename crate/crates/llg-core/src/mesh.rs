//! Conforming P1 triangulations of the unit square.
//!
//! Two structured families are provided: the crisscross mesh (each of the
//! `n x n` squares split into four triangles through its center) and the
//! diagonal mesh (each square split into two right isosceles triangles).
//! Meshes refine by longest-edge bisection with recursive conformity closure,
//! and refined meshes keep a handle to their parent so nodal fields can be
//! prolonged exactly between nested levels.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Error;
use crate::num::{real, Real};

/// Immutable conforming triangle mesh.
///
/// Vertex ordering of the generator families is lexicographic by `(y, x)`.
/// Triangles are counterclockwise. `refinement_edge[t]` is the local index of
/// the edge triangle `t` is bisected through: edge `e` is opposite vertex `e`,
/// i.e. it connects local vertices `(e+1)%3` and `(e+2)%3`.
#[derive(Debug)]
pub struct TriMesh<T> {
    vertices: Vec<[T; 2]>,
    triangles: Vec<[usize; 3]>,
    refinement_edge: Vec<u8>,
    level: u32,
    family: MeshFamily,
    parent: Option<Parent<T>>,
}

#[derive(Debug)]
struct Parent<T> {
    mesh: Arc<TriMesh<T>>,
    origin: Vec<VertexOrigin>,
}

/// Where a vertex of a refined mesh comes from.
///
/// `Midpoint(p, q)` endpoints are indices into the *refined* mesh; both are
/// always smaller than the index of the vertex they define, so prolongation
/// can resolve them in one forward sweep. In a single uniform pass over the
/// structured families every new vertex is the midpoint of a parent edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexOrigin {
    Coarse(usize),
    Midpoint(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshFamily {
    Crisscross,
    Diagonal,
}

#[derive(Debug, Clone, Copy)]
pub struct MeshQuality<T> {
    /// Largest edge length.
    pub h: T,
    /// Shape-regularity bound: max over triangles of `h / sqrt(|K|)`.
    pub gamma: T,
    pub min_area: T,
    pub max_area: T,
}

impl<T: Real> TriMesh<T> {
    /// Crisscross mesh: `4 n^2` triangles, `(n+1)^2 + n^2` vertices, `h = 1/n`.
    pub fn crisscross(n: usize) -> Arc<Self> {
        assert!(n >= 1, "crisscross mesh needs n >= 1");
        let fn_ = |k: usize| real::<T>(k as f64) / real::<T>(n as f64);
        let half = |k: usize| (real::<T>(k as f64) + real::<T>(0.5)) / real::<T>(n as f64);

        let mut vertices = Vec::with_capacity((n + 1) * (n + 1) + n * n);
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([fn_(i), fn_(j)]);
            }
            if j < n {
                for i in 0..n {
                    vertices.push([half(i), half(j)]);
                }
            }
        }
        // Row pair (grid row + center row) spans 2n + 1 indices.
        let grid = |i: usize, j: usize| j * (2 * n + 1) + i;
        let center = |i: usize, j: usize| j * (2 * n + 1) + (n + 1) + i;

        let mut triangles = Vec::with_capacity(4 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (bl, br) = (grid(i, j), grid(i + 1, j));
                let (tl, tr) = (grid(i, j + 1), grid(i + 1, j + 1));
                let c = center(i, j);
                triangles.push([bl, br, c]);
                triangles.push([br, tr, c]);
                triangles.push([tr, tl, c]);
                triangles.push([tl, bl, c]);
            }
        }
        Self::finish_generated(vertices, triangles, MeshFamily::Crisscross)
    }

    /// Diagonal mesh: `2 n^2` right isosceles triangles, `h = sqrt(2)/n`.
    /// Every square is split by its bottom-left to top-right diagonal, which
    /// becomes the refinement (longest) edge of both triangles.
    pub fn diagonal(n: usize) -> Arc<Self> {
        assert!(n >= 1, "diagonal mesh needs n >= 1");
        let fn_ = |k: usize| real::<T>(k as f64) / real::<T>(n as f64);

        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([fn_(i), fn_(j)]);
            }
        }
        let grid = |i: usize, j: usize| j * (n + 1) + i;

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (bl, br) = (grid(i, j), grid(i + 1, j));
                let (tl, tr) = (grid(i, j + 1), grid(i + 1, j + 1));
                triangles.push([bl, br, tr]);
                triangles.push([bl, tr, tl]);
            }
        }
        Self::finish_generated(vertices, triangles, MeshFamily::Diagonal)
    }

    pub fn family(&self) -> MeshFamily {
        self.family
    }

    fn finish_generated(
        vertices: Vec<[T; 2]>,
        triangles: Vec<[usize; 3]>,
        family: MeshFamily,
    ) -> Arc<Self> {
        let refinement_edge = triangles
            .iter()
            .map(|t| longest_edge_local(&vertices, *t))
            .collect();
        let mesh = TriMesh {
            vertices,
            triangles,
            refinement_edge,
            level: 0,
            family,
            parent: None,
        };
        debug_assert!(mesh.validate().is_ok());
        Arc::new(mesh)
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn refinement_edges(&self) -> &[u8] {
        &self.refinement_edge
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Bisection generation counter: 0 for generated meshes.
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn parent(&self) -> Option<&Arc<TriMesh<T>>> {
        self.parent.as_ref().map(|p| &p.mesh)
    }

    /// Provenance of each vertex relative to the parent mesh.
    pub fn vertex_origins(&self) -> Option<&[VertexOrigin]> {
        self.parent.as_ref().map(|p| p.origin.as_slice())
    }

    pub fn triangle_area(&self, t: usize) -> T {
        signed_area(&self.vertices, self.triangles[t])
    }

    /// Largest edge length over the whole mesh.
    pub fn h(&self) -> T {
        let mut h2 = T::zero();
        for tri in &self.triangles {
            for e in 0..3 {
                let l2 = edge_len2(&self.vertices, tri[(e + 1) % 3], tri[(e + 2) % 3]);
                if l2 > h2 {
                    h2 = l2;
                }
            }
        }
        h2.sqrt()
    }

    pub fn quality(&self) -> MeshQuality<T> {
        let h = self.h();
        let mut min_area = T::infinity();
        let mut max_area = T::zero();
        for t in 0..self.triangles.len() {
            let a = self.triangle_area(t);
            min_area = min_area.min(a);
            max_area = max_area.max(a);
        }
        MeshQuality {
            h,
            gamma: h / min_area.sqrt(),
            min_area,
            max_area,
        }
    }

    /// Structural validation: positive (counterclockwise) triangles, no
    /// isolated vertices, and edge conformity on the unit square. Every edge
    /// must be shared by exactly two triangles or lie on the boundary of the
    /// square; this catches hanging nodes because the long edge across a
    /// hanging vertex is single-sided yet interior.
    pub fn validate(&self) -> Result<(), Error> {
        let nv = self.vertices.len();
        let mut used = vec![false; nv];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::InvalidInput(format!(
                        "triangle {t} references vertex {v} out of bounds"
                    )));
                }
                used[v] = true;
            }
            if signed_area(&self.vertices, *tri) <= T::zero() {
                return Err(Error::InvalidInput(format!(
                    "triangle {t} is degenerate or clockwise"
                )));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(Error::InvalidInput(format!("vertex {v} is isolated")));
        }

        let mut edge_count: HashMap<(usize, usize), u32> = HashMap::new();
        for tri in &self.triangles {
            for e in 0..3 {
                let key = edge_key(tri[(e + 1) % 3], tri[(e + 2) % 3]);
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &edge_count {
            if count > 2 {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) is shared by {count} triangles"
                )));
            }
            if count == 1 && !self.edge_on_unit_square_boundary(a, b) {
                return Err(Error::InvalidInput(format!(
                    "interior edge ({a}, {b}) has only one triangle (hanging node?)"
                )));
            }
        }
        Ok(())
    }

    fn edge_on_unit_square_boundary(&self, a: usize, b: usize) -> bool {
        let pa = self.vertices[a];
        let pb = self.vertices[b];
        let zero = T::zero();
        let one = T::one();
        for c in 0..2 {
            for side in [zero, one] {
                if pa[c] == side && pb[c] == side {
                    return true;
                }
            }
        }
        false
    }

    /// One uniform refinement pass: every triangle is bisected through its
    /// refinement edge, with recursive longest-edge closure keeping the mesh
    /// conforming. On the structured families each pass exactly doubles the
    /// triangle count and divides `h` by `sqrt(2)`.
    pub fn uniform_bisect(self: &Arc<Self>) -> Result<Arc<Self>, Error> {
        let nv0 = self.vertices.len();
        let nt0 = self.triangles.len();

        let mut verts = self.vertices.clone();
        let mut origin: Vec<VertexOrigin> = (0..nv0).map(VertexOrigin::Coarse).collect();
        let mut tris = self.triangles.clone();
        let mut refe = self.refinement_edge.clone();
        let mut alive = vec![true; nt0];

        // Undirected edge -> alive triangles on it (at most two).
        let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in tris.iter().enumerate() {
            for e in 0..3 {
                let key = edge_key(tri[(e + 1) % 3], tri[(e + 2) % 3]);
                edge_tris.entry(key).or_default().push(t);
            }
        }
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();

        let budget = 16 * nt0 + 1024;
        let mut work = 0usize;

        for seed in 0..nt0 {
            while alive[seed] {
                work += 1;
                if work > budget {
                    return Err(Error::InvalidInput(
                        "longest-edge closure did not terminate".into(),
                    ));
                }
                // Walk the longest-edge propagation path from `seed` until a
                // terminal triangle: boundary refinement edge, or a neighbor
                // that shares the same refinement edge (compatible pair).
                let mut cur = seed;
                let mut path_len = 0usize;
                loop {
                    path_len += 1;
                    if path_len > budget {
                        return Err(Error::InvalidInput(
                            "longest-edge propagation path did not terminate".into(),
                        ));
                    }
                    let e = refe[cur] as usize;
                    let tri = tris[cur];
                    let key = edge_key(tri[(e + 1) % 3], tri[(e + 2) % 3]);
                    let nb = edge_tris
                        .get(&key)
                        .and_then(|v| v.iter().copied().find(|&t| t != cur && alive[t]));
                    match nb {
                        None => {
                            bisect_one(
                                cur,
                                &mut verts,
                                &mut origin,
                                &mut tris,
                                &mut refe,
                                &mut alive,
                                &mut edge_tris,
                                &mut midpoint,
                            );
                            break;
                        }
                        Some(other) => {
                            let eo = refe[other] as usize;
                            let otri = tris[other];
                            let okey = edge_key(otri[(eo + 1) % 3], otri[(eo + 2) % 3]);
                            if okey == key {
                                bisect_one(
                                    cur,
                                    &mut verts,
                                    &mut origin,
                                    &mut tris,
                                    &mut refe,
                                    &mut alive,
                                    &mut edge_tris,
                                    &mut midpoint,
                                );
                                bisect_one(
                                    other,
                                    &mut verts,
                                    &mut origin,
                                    &mut tris,
                                    &mut refe,
                                    &mut alive,
                                    &mut edge_tris,
                                    &mut midpoint,
                                );
                                break;
                            }
                            cur = other;
                        }
                    }
                }
            }
        }

        let mut triangles = Vec::with_capacity(tris.len() - nt0);
        let mut refinement_edge = Vec::with_capacity(tris.len() - nt0);
        for t in 0..tris.len() {
            if alive[t] {
                triangles.push(tris[t]);
                refinement_edge.push(refe[t]);
            }
        }

        let mesh = TriMesh {
            vertices: verts,
            triangles,
            refinement_edge,
            level: self.level + 1,
            family: self.family,
            parent: Some(Parent {
                mesh: Arc::clone(self),
                origin,
            }),
        };
        mesh.validate()?;
        Ok(Arc::new(mesh))
    }

    /// Applies `uniform_bisect` `passes` times.
    pub fn bisect_times(self: &Arc<Self>, passes: u32) -> Result<Arc<Self>, Error> {
        let mut mesh = Arc::clone(self);
        for _ in 0..passes {
            mesh = mesh.uniform_bisect()?;
        }
        Ok(mesh)
    }

    /// Plain-text dump: `vertices N triangles M` header, `N` coordinate
    /// lines, then `M` zero-based index triples.
    pub fn write_text<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "vertices {} triangles {}",
            self.vertices.len(),
            self.triangles.len()
        )?;
        for v in &self.vertices {
            writeln!(w, "{} {}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(w, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    /// SHA-256 over the mesh topology and geometry (little-endian bytes of
    /// the vertex coordinates as f64, then the triangle indices). Used to
    /// detect stale reference fields.
    pub fn lineage_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update((self.vertices.len() as u64).to_le_bytes());
        hasher.update((self.triangles.len() as u64).to_le_bytes());
        hasher.update(self.level.to_le_bytes());
        for v in &self.vertices {
            for c in v {
                hasher.update(c.to_f64().unwrap_or(f64::NAN).to_le_bytes());
            }
        }
        for t in &self.triangles {
            for &i in t {
                hasher.update((i as u64).to_le_bytes());
            }
        }
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            use std::fmt::Write;
            let _ = write!(out, "{byte:02x}");
        }
        out
    }
}

/// Bisects one alive triangle through its refinement edge. The caller must
/// ensure conformity (terminal triangle of a propagation path).
#[allow(clippy::too_many_arguments)]
fn bisect_one<T: Real>(
    t: usize,
    verts: &mut Vec<[T; 2]>,
    origin: &mut Vec<VertexOrigin>,
    tris: &mut Vec<[usize; 3]>,
    refe: &mut Vec<u8>,
    alive: &mut Vec<bool>,
    edge_tris: &mut HashMap<(usize, usize), Vec<usize>>,
    midpoint: &mut HashMap<(usize, usize), usize>,
) {
    let tri = tris[t];
    let e = refe[t] as usize;
    let peak = tri[e];
    let a = tri[(e + 1) % 3];
    let b = tri[(e + 2) % 3];
    let key = edge_key(a, b);

    let mid = *midpoint.entry(key).or_insert_with(|| {
        let pa = verts[a];
        let pb = verts[b];
        let half = real::<T>(0.5);
        verts.push([(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half]);
        origin.push(VertexOrigin::Midpoint(key.0, key.1));
        verts.len() - 1
    });

    // Children keep the parent's counterclockwise orientation.
    let c1 = [peak, a, mid];
    let c2 = [peak, mid, b];

    for ek in 0..3 {
        let k = edge_key(tri[(ek + 1) % 3], tri[(ek + 2) % 3]);
        if let Some(list) = edge_tris.get_mut(&k) {
            list.retain(|&x| x != t);
        }
    }
    alive[t] = false;

    for child in [c1, c2] {
        let id = tris.len();
        tris.push(child);
        refe.push(longest_edge_local(verts, child));
        alive.push(true);
        for ek in 0..3 {
            let k = edge_key(child[(ek + 1) % 3], child[(ek + 2) % 3]);
            edge_tris.entry(k).or_default().push(id);
        }
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn edge_len2<T: Real>(verts: &[[T; 2]], a: usize, b: usize) -> T {
    let dx = verts[a][0] - verts[b][0];
    let dy = verts[a][1] - verts[b][1];
    dx * dx + dy * dy
}

fn signed_area<T: Real>(verts: &[[T; 2]], tri: [usize; 3]) -> T {
    let [a, b, c] = tri;
    let (pa, pb, pc) = (verts[a], verts[b], verts[c]);
    let half = real::<T>(0.5);
    ((pb[0] - pa[0]) * (pc[1] - pa[1]) - (pb[1] - pa[1]) * (pc[0] - pa[0])) * half
}

/// Local index of the longest edge; ties go to the edge whose opposite vertex
/// has the smallest global index.
fn longest_edge_local<T: Real>(verts: &[[T; 2]], tri: [usize; 3]) -> u8 {
    let mut best = 0usize;
    let mut best_len = edge_len2(verts, tri[1], tri[2]);
    for e in 1..3 {
        let len = edge_len2(verts, tri[(e + 1) % 3], tri[(e + 2) % 3]);
        if len > best_len || (len == best_len && tri[e] < tri[best]) {
            best = e;
            best_len = len;
        }
    }
    best as u8
}
