use std::collections::{BTreeSet, HashMap};

use super::{reference_corners, UnstructuredMesh};
use crate::error::{Error, Result};

/// Local edges of a reference element as `(corner, corner, axis)`, the first
/// corner having coordinate 0 along `axis`.
pub fn local_edges(dim: usize) -> Vec<(usize, usize, usize)> {
    let corners = reference_corners(dim);
    let mut out = Vec::new();
    for axis in 0..dim {
        for (a, ca) in corners.iter().enumerate() {
            if ca[axis] != 0 {
                continue;
            }
            let mut cb = *ca;
            cb[axis] = 1;
            let b = corners.iter().position(|c| *c == cb).unwrap();
            out.push((a, b, axis));
        }
    }
    out
}

/// Local corners on the facet `{η_axis = side}`.
pub fn local_facet_corners(dim: usize, axis: usize, side: u8) -> Vec<usize> {
    reference_corners(dim)
        .iter()
        .enumerate()
        .filter(|(_, c)| c[axis] == side)
        .map(|(k, _)| k)
        .collect()
}

/// Incidence data derived from an [`UnstructuredMesh`].
///
/// Facets are the codimension-one entities: edges in 2D, faces in 3D. Element
/// facet `2 * axis + side` is the one at `η_axis = side`.
#[derive(Debug, Clone)]
pub struct MeshTopology {
    pub mesh: UnstructuredMesh,
    pub vertex_elements: Vec<Vec<usize>>,
    pub edges: Vec<[usize; 2]>,
    pub edge_elements: Vec<Vec<usize>>,
    /// Local-edge order follows [`local_edges`].
    pub element_edges: Vec<Vec<usize>>,
    /// Sorted vertex ids of each face (3D only).
    pub faces: Vec<[usize; 4]>,
    pub face_elements: Vec<Vec<usize>>,
    pub element_facets: Vec<Vec<usize>>,
    pub boundary_vertex: Vec<bool>,
    pub boundary_edge: Vec<bool>,
    pub boundary_face: Vec<bool>,
    edge_index: HashMap<[usize; 2], usize>,
    face_index: HashMap<[usize; 4], usize>,
}

pub fn build_topology(mesh: &UnstructuredMesh) -> Result<MeshTopology> {
    mesh.validate()?;
    let dim = mesh.dim;
    let nv = mesh.num_vertices();
    let mut vertex_elements = vec![Vec::new(); nv];
    for (e, elem) in mesh.elements.iter().enumerate() {
        for &v in elem {
            vertex_elements[v].push(e);
        }
    }

    let ledges = local_edges(dim);
    let mut edges = Vec::new();
    let mut edge_elements: Vec<Vec<usize>> = Vec::new();
    let mut edge_index = HashMap::new();
    let mut element_edges = Vec::with_capacity(mesh.num_elements());
    for (e, elem) in mesh.elements.iter().enumerate() {
        let mut ids = Vec::with_capacity(ledges.len());
        for &(a, b, _) in &ledges {
            let key = sorted2(elem[a], elem[b]);
            let id = *edge_index.entry(key).or_insert_with(|| {
                edges.push(key);
                edge_elements.push(Vec::new());
                edges.len() - 1
            });
            edge_elements[id].push(e);
            ids.push(id);
        }
        element_edges.push(ids);
    }

    let mut faces = Vec::new();
    let mut face_elements: Vec<Vec<usize>> = Vec::new();
    let mut face_index = HashMap::new();
    let mut element_facets = Vec::with_capacity(mesh.num_elements());
    for (e, elem) in mesh.elements.iter().enumerate() {
        let mut ids = Vec::with_capacity(2 * dim);
        for axis in 0..dim {
            for side in 0..2u8 {
                let corners = local_facet_corners(dim, axis, side);
                if dim == 2 {
                    ids.push(edge_index[&sorted2(elem[corners[0]], elem[corners[1]])]);
                } else {
                    let mut key = [0; 4];
                    for (k, &c) in corners.iter().enumerate() {
                        key[k] = elem[c];
                    }
                    key.sort_unstable();
                    let id = *face_index.entry(key).or_insert_with(|| {
                        faces.push(key);
                        face_elements.push(Vec::new());
                        faces.len() - 1
                    });
                    face_elements[id].push(e);
                    ids.push(id);
                }
            }
        }
        element_facets.push(ids);
    }

    let facet_elements = if dim == 2 { &edge_elements } else { &face_elements };
    for (f, els) in facet_elements.iter().enumerate() {
        if els.len() > 2 {
            return Err(Error::NonManifold(format!(
                "facet {f} is shared by {} elements",
                els.len()
            )));
        }
        if els.len() == 2 && els[0] == els[1] {
            return Err(Error::NonManifold(format!("element {} is glued to itself", els[0])));
        }
    }

    let mut boundary_vertex = vec![false; nv];
    let mut boundary_edge = vec![false; edges.len()];
    let mut boundary_face = vec![false; faces.len()];
    if dim == 2 {
        for (i, els) in edge_elements.iter().enumerate() {
            if els.len() == 1 {
                boundary_edge[i] = true;
                boundary_vertex[edges[i][0]] = true;
                boundary_vertex[edges[i][1]] = true;
            }
        }
    } else {
        for (f, els) in face_elements.iter().enumerate() {
            if els.len() == 1 {
                boundary_face[f] = true;
                let q = faces[f];
                for &v in &q {
                    boundary_vertex[v] = true;
                }
                for i in 0..4 {
                    for j in i + 1..4 {
                        if let Some(&id) = edge_index.get(&sorted2(q[i], q[j])) {
                            boundary_edge[id] = true;
                        }
                    }
                }
            }
        }
    }

    Ok(MeshTopology {
        mesh: mesh.clone(),
        vertex_elements,
        edges,
        edge_elements,
        element_edges,
        faces,
        face_elements,
        element_facets,
        boundary_vertex,
        boundary_edge,
        boundary_face,
        edge_index,
        face_index,
    })
}

fn sorted2(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

impl MeshTopology {
    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    /// Number of elements incident to vertex `v`.
    pub fn valence(&self, v: usize) -> usize {
        self.vertex_elements[v].len()
    }

    /// Number of elements sharing edge `e`.
    pub fn edge_valence(&self, e: usize) -> usize {
        self.edge_elements[e].len()
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&sorted2(a, b)).copied()
    }

    pub fn face_id(&self, verts: &[usize]) -> Option<usize> {
        let mut key = [0; 4];
        key.copy_from_slice(verts);
        key.sort_unstable();
        self.face_index.get(&key).copied()
    }

    pub fn num_facets(&self) -> usize {
        if self.dim() == 2 {
            self.edges.len()
        } else {
            self.faces.len()
        }
    }

    pub fn facet_elements(&self, f: usize) -> &[usize] {
        if self.dim() == 2 {
            &self.edge_elements[f]
        } else {
            &self.face_elements[f]
        }
    }

    pub fn is_boundary_facet(&self, f: usize) -> bool {
        self.facet_elements(f).len() == 1
    }

    /// Element across local facet `2 * axis + side`, if any.
    pub fn neighbour(&self, e: usize, local_facet: usize) -> Option<usize> {
        let f = self.element_facets[e][local_facet];
        self.facet_elements(f).iter().copied().find(|&o| o != e)
    }

    /// Whether the vertex is interior and regular (4 quads or 8 hexes).
    pub fn is_regular_interior(&self, v: usize) -> bool {
        !self.boundary_vertex[v] && self.valence(v) == 1 << self.dim()
    }

    /// Elements reachable from the seed vertices by `n` vertex expansions.
    pub fn neighbourhood(&self, seeds: &[usize], n: usize) -> BTreeSet<usize> {
        let mut verts: BTreeSet<usize> = seeds.iter().copied().collect();
        let mut elems = BTreeSet::new();
        for _ in 0..n {
            let fresh: Vec<usize> = verts
                .iter()
                .flat_map(|&v| self.vertex_elements[v].iter().copied())
                .filter(|e| !elems.contains(e))
                .collect();
            for e in fresh {
                if elems.insert(e) {
                    verts.extend(self.mesh.elements[e].iter().copied());
                }
            }
        }
        elems
    }

    /// Elements whose closure touches any of the given vertices.
    pub fn elements_touching(&self, verts: &[usize]) -> BTreeSet<usize> {
        self.neighbourhood(verts, 1)
    }

    /// Average edge length over all mesh edges.
    pub fn average_edge_length(&self) -> f64 {
        let v = &self.mesh.vertices;
        let total: f64 = self
            .edges
            .iter()
            .map(|&[a, b]| crate::linalg::norm(crate::linalg::sub(v[a], v[b])))
            .sum();
        total / self.edges.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn grid2(n: usize) -> UnstructuredMesh {
        let mut vertices = Vec::new();
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64, j as f64, 0.0]);
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut elements = Vec::new();
        for j in 0..n {
            for i in 0..n {
                elements.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        UnstructuredMesh::new(2, vertices, elements).unwrap()
    }

    #[test]
    fn single_quad_is_all_boundary() {
        let t = build_topology(&grid2(1)).unwrap();
        for v in 0..4 {
            assert!(t.boundary_vertex[v]);
            assert_eq!(t.valence(v), 1);
        }
        assert_eq!(t.edges.len(), 4);
    }

    #[test]
    fn grid_counts_and_neighbours() {
        let t = build_topology(&grid2(4)).unwrap();
        assert_eq!(t.edges.len(), 40);
        assert_eq!(t.boundary_edge.iter().filter(|&&b| b).count(), 16);
        assert_eq!(t.valence(6), 4);
        assert!(t.is_regular_interior(6));
        assert_eq!(t.neighbour(0, 1), Some(1));
        assert_eq!(t.neighbour(0, 3), Some(4));
        assert_eq!(t.neighbour(0, 0), None);
        // 1-neighbourhood of the centre vertex is 4 elements, 2-neighbourhood 16.
        assert_eq!(t.neighbourhood(&[12], 1).len(), 4);
        assert_eq!(t.neighbourhood(&[12], 2).len(), 16);
    }

    #[test]
    fn hex_local_tables() {
        let e = local_edges(3);
        assert_eq!(e.len(), 12);
        assert_eq!(local_facet_corners(3, 2, 1), vec![4, 5, 6, 7]);
        assert_eq!(local_edges(2), vec![(0, 1, 0), (3, 2, 0), (0, 3, 1), (1, 2, 1)]);
    }

    #[test]
    fn three_quads_on_one_edge_is_non_manifold() {
        let vertices = vec![
            [0., 0., 0.],
            [1., 0., 0.],
            [1., 1., 0.],
            [0., 1., 0.],
            [0., -1., 0.],
            [1., -1., 0.],
            [2., 0., 0.],
            [2., 1., 0.],
        ];
        // The third element reuses edge (0,1) with a positive orientation.
        let elements = vec![vec![0, 1, 2, 3], vec![4, 5, 1, 0], vec![0, 1, 7, 3]];
        let mesh = UnstructuredMesh {
            dim: 2,
            vertices,
            elements,
        };
        assert!(matches!(build_topology(&mesh), Err(Error::NonManifold(_))));
    }
}
