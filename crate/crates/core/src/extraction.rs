//! Bézier extraction of mixed B-splines: one control vertex per element plus
//! clamped boundary control vertices, averaged onto bi-/tri-quadratic Bézier
//! points, and the resulting geometry map.

use std::collections::BTreeMap;

use crate::bernstein::tensor_quad_jets;
use crate::error::{Error, Result};
use crate::jet::{InverseMap, Jet};
use crate::linalg::{norm, sub};
use crate::mesh::{centroid_of, reference_corners, MeshTopology};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvKind {
    Element(usize),
    /// Boundary edge (2D) or boundary face (3D).
    BoundaryFacet(usize),
    /// Boundary edge of a single hex (3D).
    FeatureEdge(usize),
    Corner(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementExtraction {
    /// Local column → global control vertex.
    pub cvs: Vec<usize>,
    /// Row-major `nbez × cvs.len()`.
    pub m: Vec<f64>,
}

impl ElementExtraction {
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.m[row * self.cvs.len() + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionOperator {
    pub dim: usize,
    pub cv_kinds: Vec<CvKind>,
    /// Default control-vertex positions (centroids of the owning entity).
    pub cv_points: Vec<[f64; 3]>,
    pub elements: Vec<ElementExtraction>,
    /// Whether the mixed spline of each control vertex is only C0 somewhere.
    pub c0: Vec<bool>,
}

impl ExtractionOperator {
    pub fn num_cvs(&self) -> usize {
        self.cv_kinds.len()
    }

    pub fn num_bezier(&self) -> usize {
        3usize.pow(self.dim as u32)
    }

    /// Whether any mixed spline is merely C0.
    pub fn has_c0(&self) -> bool {
        self.c0.iter().any(|&b| b)
    }
}

pub fn build_extraction_2d(topo: &MeshTopology) -> Result<ExtractionOperator> {
    if topo.dim() != 2 {
        return Err(Error::InvalidArgument("2D extraction needs a quad mesh".into()));
    }
    build_extraction(topo)
}

pub fn build_extraction_3d(topo: &MeshTopology) -> Result<ExtractionOperator> {
    if topo.dim() != 3 {
        return Err(Error::InvalidArgument("3D extraction needs a hex mesh".into()));
    }
    build_extraction(topo)
}

/// Builds the extraction operator for either dimension.
pub fn build_extraction(topo: &MeshTopology) -> Result<ExtractionOperator> {
    let dim = topo.dim();
    let mesh = &topo.mesh;
    let ne = mesh.num_elements();
    let corners = reference_corners(dim);
    let mut kinds: Vec<CvKind> = (0..ne).map(CvKind::Element).collect();
    let mut points: Vec<[f64; 3]> = (0..ne).map(|e| mesh.centroid(e)).collect();

    let mut facet_cv = vec![usize::MAX; topo.num_facets()];
    for (f, slot) in facet_cv.iter_mut().enumerate() {
        if topo.is_boundary_facet(f) {
            *slot = kinds.len();
            kinds.push(CvKind::BoundaryFacet(f));
            let verts: Vec<usize> = if dim == 2 { topo.edges[f].to_vec() } else { topo.faces[f].to_vec() };
            points.push(centroid_of(&mesh.vertices, &verts));
        }
    }
    // Boundary faces around each boundary edge / vertex (3D) or boundary edges
    // around each boundary vertex (2D).
    let mut vertex_bfacets: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_vertices()];
    let mut edge_bfaces: Vec<Vec<usize>> = vec![Vec::new(); topo.edges.len()];
    for f in 0..topo.num_facets() {
        if !topo.is_boundary_facet(f) {
            continue;
        }
        if dim == 2 {
            for &v in &topo.edges[f] {
                vertex_bfacets[v].push(f);
            }
        } else {
            let e = topo.face_elements[f][0];
            let k = topo.element_facets[e].iter().position(|&x| x == f).unwrap();
            let local = crate::mesh::local_facet_corners(3, k / 2, (k % 2) as u8);
            for &c in &local {
                vertex_bfacets[mesh.elements[e][c]].push(f);
            }
            for (i, &a) in local.iter().enumerate() {
                for &b in &local[i + 1..] {
                    let (ca, cb) = (corners[a], corners[b]);
                    if (0..3).filter(|&d| ca[d] != cb[d]).count() == 1 {
                        let id = topo.edge_id(mesh.elements[e][a], mesh.elements[e][b]).unwrap();
                        edge_bfaces[id].push(f);
                    }
                }
            }
        }
    }
    let mut feature_cv = vec![usize::MAX; topo.edges.len()];
    let mut vertex_features: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_vertices()];
    if dim == 3 {
        for (i, slot) in feature_cv.iter_mut().enumerate() {
            if topo.boundary_edge[i] && topo.edge_valence(i) == 1 {
                *slot = kinds.len();
                kinds.push(CvKind::FeatureEdge(i));
                points.push(centroid_of(&mesh.vertices, &topo.edges[i]));
                for &v in &topo.edges[i] {
                    vertex_features[v].push(i);
                }
            }
        }
    }
    let mut corner_cv = vec![usize::MAX; mesh.num_vertices()];
    for v in 0..mesh.num_vertices() {
        if !topo.boundary_vertex[v] {
            continue;
        }
        let corner = if dim == 2 {
            topo.valence(v) == 1
        } else {
            let f = vertex_features[v].len();
            f != 0 && f != 2
        };
        if corner {
            corner_cv[v] = kinds.len();
            kinds.push(CvKind::Corner(v));
            points.push(mesh.vertices[v]);
        }
    }

    let nbez = 3usize.pow(dim as u32);
    let mut elements = Vec::with_capacity(ne);
    for e in 0..ne {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); nbez];
        for (j, row) in rows.iter_mut().enumerate() {
            let digits = [j % 3, (j / 3) % 3, j / 9];
            let fixed: Vec<usize> = (0..dim).filter(|&d| digits[d] != 1).collect();
            let verts: Vec<usize> = corners
                .iter()
                .enumerate()
                .filter(|(_, c)| fixed.iter().all(|&d| 2 * c[d] as usize == digits[d]))
                .map(|(k, _)| mesh.elements[e][k])
                .collect();
            let mut put = |cv: usize, w: f64| *row.entry(cv).or_insert(0.0) += w;
            match fixed.len() {
                0 => put(e, 1.0),
                1 => {
                    let d = fixed[0];
                    let f = topo.element_facets[e][2 * d + digits[d] / 2];
                    if topo.is_boundary_facet(f) {
                        put(facet_cv[f], 1.0);
                    } else {
                        for &o in topo.facet_elements(f) {
                            put(o, 0.5);
                        }
                    }
                }
                k if k == dim => {
                    let v = verts[0];
                    if !topo.boundary_vertex[v] {
                        let ring = &topo.vertex_elements[v];
                        for &o in ring {
                            put(o, 1.0 / ring.len() as f64);
                        }
                    } else if corner_cv[v] != usize::MAX {
                        put(corner_cv[v], 1.0);
                    } else if dim == 2 {
                        if topo.valence(v) != 2 {
                            return Err(Error::BoundaryNotRegular(format!(
                                "boundary vertex {v} has valence {}",
                                topo.valence(v)
                            )));
                        }
                        for &f in &vertex_bfacets[v] {
                            put(facet_cv[f], 0.5);
                        }
                    } else if vertex_features[v].len() == 2 {
                        for &x in &vertex_features[v] {
                            put(feature_cv[x], 0.5);
                        }
                    } else {
                        let fs = &vertex_bfacets[v];
                        for &f in fs {
                            put(facet_cv[f], 1.0 / fs.len() as f64);
                        }
                    }
                }
                _ => {
                    // Edge point of a hex.
                    let id = topo.edge_id(verts[0], verts[1]).unwrap();
                    let ring = &topo.edge_elements[id];
                    if !topo.boundary_edge[id] {
                        for &o in ring {
                            put(o, 1.0 / ring.len() as f64);
                        }
                    } else {
                        match ring.len() {
                            1 => put(feature_cv[id], 1.0),
                            2 => {
                                for &f in &edge_bfaces[id] {
                                    put(facet_cv[f], 0.5);
                                }
                            }
                            n => {
                                return Err(Error::BoundaryNotRegular(format!(
                                    "boundary edge {}-{} is shared by {n} hexahedra",
                                    verts[0], verts[1]
                                )))
                            }
                        }
                    }
                }
            }
        }
        let mut cvs: Vec<usize> = rows.iter().flat_map(|r| r.keys().copied()).collect();
        cvs.sort_unstable();
        cvs.dedup();
        let mut m = vec![0.0; nbez * cvs.len()];
        for (j, row) in rows.iter().enumerate() {
            for (&cv, &w) in row {
                let col = cvs.binary_search(&cv).unwrap();
                m[j * cvs.len() + col] = w;
            }
        }
        elements.push(ElementExtraction { cvs, m });
    }

    // A mixed spline is only C0 if its element touches an extraordinary vertex.
    let irregular: Vec<bool> = (0..mesh.num_vertices())
        .map(|v| !topo.boundary_vertex[v] && topo.valence(v) != 1 << dim)
        .collect();
    let mut c0 = vec![false; kinds.len()];
    for (e, slot) in c0.iter_mut().enumerate().take(ne) {
        *slot = mesh.elements[e].iter().any(|&v| irregular[v]);
    }
    Ok(ExtractionOperator {
        dim,
        cv_kinds: kinds,
        cv_points: points,
        elements,
        c0,
    })
}

/// Bézier control points per element and evaluation of `x(η)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryMap {
    pub dim: usize,
    /// Control-vertex positions.
    pub controls: Vec<[f64; 3]>,
    pub bezier: Vec<Vec<[f64; 3]>>,
}

impl GeometryMap {
    /// Bézier points `c_j = Σ_i M_ji x_i` from control-vertex positions.
    pub fn new(ext: &ExtractionOperator, controls: &[[f64; 3]]) -> Self {
        let nbez = ext.num_bezier();
        let bezier = ext
            .elements
            .iter()
            .map(|el| {
                (0..nbez)
                    .map(|j| {
                        let mut c = [0.0; 3];
                        for (col, &cv) in el.cvs.iter().enumerate() {
                            let w = el.entry(j, col);
                            if w != 0.0 {
                                for d in 0..3 {
                                    c[d] += w * controls[cv][d];
                                }
                            }
                        }
                        c
                    })
                    .collect()
            })
            .collect();
        GeometryMap {
            dim: ext.dim,
            controls: controls.to_vec(),
            bezier,
        }
    }

    /// Geometry from the default control-vertex positions.
    pub fn from_extraction(ext: &ExtractionOperator) -> Self {
        Self::new(ext, &ext.cv_points)
    }

    /// Jets in η of the physical coordinates on element `e`.
    pub fn eval(&self, e: usize, eta: [f64; 3], order: usize) -> [Jet; 3] {
        let q = tensor_quad_jets(self.dim, eta, order);
        self.eval_with(e, &q, order)
    }

    pub fn eval_with(&self, e: usize, q: &[Jet], order: usize) -> [Jet; 3] {
        let mut x = [Jet::default(); 3];
        for (j, qj) in q.iter().enumerate() {
            let c = self.bezier[e][j];
            for d in 0..self.dim {
                x[d].axpy(c[d], qj, self.dim, order);
            }
        }
        x
    }

    pub fn point(&self, e: usize, eta: [f64; 3]) -> [f64; 3] {
        let x = self.eval(e, eta, 0);
        [x[0].v, x[1].v, x[2].v]
    }

    /// Average length of the straight edges joining Bézier corner points.
    pub fn average_edge_length(&self, topo: &MeshTopology) -> f64 {
        let dim = self.dim;
        let mut total = 0.0;
        let mut count = 0usize;
        for (e, el) in topo.element_edges.iter().enumerate() {
            for (k, &(a, b, _)) in crate::mesh::local_edges(dim).iter().enumerate() {
                // Each edge is visited once from its lowest-index element.
                if topo.edge_elements[el[k]].iter().min() != Some(&e) {
                    continue;
                }
                let pa = self.bezier[e][corner_bezier_index(dim, a)];
                let pb = self.bezier[e][corner_bezier_index(dim, b)];
                total += norm(sub(pa, pb));
                count += 1;
            }
        }
        total / count as f64
    }
}

/// Bézier-point index of a local corner.
pub fn corner_bezier_index(dim: usize, corner: usize) -> usize {
    let c = reference_corners(dim)[corner];
    (0..dim).map(|d| 2 * c[d] as usize * 3usize.pow(d as u32)).sum()
}

/// Jets in η of the local mixed splines of element `e`, one per column.
pub fn reference_jets(ext: &ExtractionOperator, e: usize, q: &[Jet], order: usize) -> Vec<Jet> {
    let el = &ext.elements[e];
    let n = el.cvs.len();
    let mut out = vec![Jet::default(); n];
    for (j, qj) in q.iter().enumerate() {
        for (col, o) in out.iter_mut().enumerate() {
            let w = el.m[j * n + col];
            if w != 0.0 {
                o.axpy(w, qj, ext.dim, order);
            }
        }
    }
    out
}

/// Mixed B-splines on element `e` at `η` with physical derivatives up to
/// `order`, as `(control vertex, jet)` pairs, plus the inverse map used.
pub fn eval_mixed_basis(
    ext: &ExtractionOperator,
    geo: &GeometryMap,
    e: usize,
    eta: [f64; 3],
    order: usize,
) -> Result<(InverseMap, Vec<(usize, Jet)>)> {
    let q = tensor_quad_jets(ext.dim, eta, order);
    let x = geo.eval_with(e, &q, order);
    let inv = InverseMap::new(&x, ext.dim, order).map_err(|err| match err {
        Error::SingularJacobian { det, .. } => Error::SingularJacobian { element: e, det },
        other => other,
    })?;
    let jets = reference_jets(ext, e, &q, order);
    let out = ext.elements[e]
        .cvs
        .iter()
        .zip(&jets)
        .map(|(&cv, j)| (cv, inv.push(j)))
        .collect();
    Ok((inv, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_topology, generate_mesh, structured_grid, ShapeSpec};
    use crate::univariate::{eval_basis_ders, KnotVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(mesh: crate::mesh::UnstructuredMesh) -> (MeshTopology, ExtractionOperator, GeometryMap) {
        let topo = build_topology(&mesh).unwrap();
        let ext = build_extraction(&topo).unwrap();
        let geo = GeometryMap::from_extraction(&ext);
        (topo, ext, geo)
    }

    fn random_eta(rng: &mut ChaCha8Rng, dim: usize) -> [f64; 3] {
        let mut eta = [0.0; 3];
        for x in eta.iter_mut().take(dim) {
            *x = rng.gen_range(0.0..1.0);
        }
        eta
    }

    #[test]
    fn rows_are_affine_and_nonnegative() {
        for mesh in [
            generate_mesh(&ShapeSpec::VGon { valence: 5 }).unwrap(),
            generate_mesh(&ShapeSpec::TriPrism { layers: 3 }).unwrap(),
        ] {
            let (_, ext, _) = setup(mesh);
            for el in &ext.elements {
                for j in 0..ext.num_bezier() {
                    let row: Vec<f64> = (0..el.cvs.len()).map(|c| el.entry(j, c)).collect();
                    assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
                    assert!(row.iter().all(|&w| w >= 0.0));
                }
            }
        }
    }

    #[test]
    fn masks_match_averaging_rules() {
        let (topo, ext, _) = setup(generate_mesh(&ShapeSpec::VGon { valence: 5 }).unwrap());
        // An element at the extraordinary vertex: its corner row has five 1/5 entries.
        let e = topo.vertex_elements[0][0];
        let el = &ext.elements[e];
        let k = topo.mesh.elements[e].iter().position(|&v| v == 0).unwrap();
        let row = corner_bezier_index(2, k);
        let w: Vec<f64> = (0..el.cvs.len()).map(|c| el.entry(row, c)).filter(|&w| w > 0.0).collect();
        assert_eq!(w.len(), 5);
        assert!(w.iter().all(|&x| (x - 0.2).abs() < 1e-15));
        // An interior edge point averages the two adjacent element vertices.
        let (topo, ext, _) = setup(structured_grid(2, [4, 4, 1], [1.0; 3]).unwrap());
        let e = 5;
        let el = &ext.elements[e];
        let w: Vec<(usize, f64)> = (0..el.cvs.len())
            .map(|c| (el.cvs[c], el.entry(5, c)))
            .filter(|x| x.1 > 0.0)
            .collect();
        assert_eq!(w, vec![(5, 0.5), (topo.neighbour(5, 1).unwrap(), 0.5)]);
    }

    #[test]
    fn hex_masks() {
        let (_, ext, _) = setup(structured_grid(3, [4, 4, 4], [1.0; 3]).unwrap());
        // Element (1,1,1) is interior: edge points are 1/4, corners 1/8.
        let e = 1 + 4 + 16;
        let el = &ext.elements[e];
        let count = |row: usize, w: f64| (0..el.cvs.len()).filter(|&c| (el.entry(row, c) - w).abs() < 1e-15).count();
        assert_eq!(count(0, 0.125), 8);
        assert_eq!(count(1, 0.25), 4);
        assert_eq!(count(4, 0.5), 2);
        assert_eq!(count(13, 1.0), 1);
    }

    fn tensor_oracle(dim: usize, n: usize) {
        let (_, ext, geo) = setup(structured_grid(dim, [n; 3], [1.0; 3]).unwrap());
        let kv = KnotVector::open_uniform(2, n, 0.0, 1.0).unwrap();
        let greville: Vec<f64> = (0..kv.num_basis())
            .map(|i| 0.5 * (kv.knots()[i + 1] + kv.knots()[i + 2]))
            .collect();
        let index_of = |p: f64| greville.iter().position(|&g| (g - p).abs() < 1e-12).unwrap();
        let tensor: Vec<[usize; 3]> = ext
            .cv_points
            .iter()
            .map(|p| {
                let mut t = [0; 3];
                for d in 0..dim {
                    t[d] = index_of(p[d]);
                }
                t
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ne = ext.elements.len();
        for _ in 0..100 {
            let e = rng.gen_range(0..ne);
            let eta = random_eta(&mut rng, dim);
            let (_, vals) = eval_mixed_basis(&ext, &geo, e, eta, 1).unwrap();
            let x = geo.point(e, eta);
            let tabs: Vec<(usize, Vec<[f64; 4]>)> = (0..dim).map(|d| eval_basis_ders(&kv, x[d]).unwrap()).collect();
            for (cv, jet) in vals {
                let mut expect = 1.0;
                for d in 0..dim {
                    let (first, ref rows) = tabs[d];
                    let i = tensor[cv][d];
                    expect *= if i >= first && i < first + rows.len() { rows[i - first][0] } else { 0.0 };
                }
                assert!((jet.v - expect).abs() < 1e-13, "{} vs {expect}", jet.v);
            }
        }
    }

    #[test]
    fn structured_2d_equals_tensor_bsplines() {
        tensor_oracle(2, 4);
    }

    #[test]
    fn structured_3d_equals_tensor_bsplines() {
        tensor_oracle(3, 4);
    }

    #[test]
    fn identity_geometry_on_grid() {
        let (_, _, geo) = setup(structured_grid(2, [3, 3, 1], [1.0; 3]).unwrap());
        let x = geo.point(4, [0.3, 0.6, 0.0]);
        assert!((x[0] - (1.0 + 0.3) / 3.0).abs() < 1e-14);
        assert!((x[1] - (1.0 + 0.6) / 3.0).abs() < 1e-14);
    }

    #[test]
    fn shared_faces_coincide_and_jacobian_matches_fd() {
        let (topo, ext, geo) = setup(generate_mesh(&ShapeSpec::VGon { valence: 7 }).unwrap());
        for e in 0..ext.elements.len() {
            for lf in 0..4 {
                if let Some(n) = topo.neighbour(e, lf) {
                    // Midpoint of the shared edge seen from both sides.
                    let mut a = [0.5; 3];
                    a[lf / 2] = (lf % 2) as f64;
                    let f = topo.element_facets[e][lf];
                    let k = topo.element_facets[n].iter().position(|&x| x == f).unwrap();
                    let mut b = [0.5; 3];
                    b[k / 2] = (k % 2) as f64;
                    let (pa, pb) = (geo.point(e, a), geo.point(n, b));
                    assert!(norm(sub(pa, pb)) < 1e-14);
                }
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        for _ in 0..20 {
            let e = rng.gen_range(0..ext.elements.len());
            let eta = random_eta(&mut rng, 2);
            let x = geo.eval(e, eta, 1);
            for a in 0..2 {
                let mut ep = eta;
                ep[a] += h;
                let mut em = eta;
                em[a] -= h;
                let (p, m) = (geo.point(e, ep), geo.point(e, em));
                for i in 0..2 {
                    let fd = (p[i] - m[i]) / (2.0 * h);
                    assert!((fd - x[i].g[a]).abs() < 1e-7 * (1.0 + fd.abs()));
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_and_linear_reproduction() {
        let (_, ext, geo) = setup(generate_mesh(&ShapeSpec::VGon { valence: 5 }).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let e = rng.gen_range(0..ext.elements.len());
            let eta = random_eta(&mut rng, 2);
            let (_, vals) = eval_mixed_basis(&ext, &geo, e, eta, 2).unwrap();
            let s: f64 = vals.iter().map(|v| v.1.v).sum();
            assert!((s - 1.0).abs() < 1e-13);
            let x = geo.point(e, eta);
            let mut rx = [0.0; 2];
            let mut grad = [[0.0; 2]; 2];
            for (cv, j) in &vals {
                for i in 0..2 {
                    rx[i] += j.v * ext.cv_points[*cv][i];
                    for k in 0..2 {
                        grad[i][k] += j.g[k] * ext.cv_points[*cv][i];
                    }
                }
            }
            for i in 0..2 {
                assert!((rx[i] - x[i]).abs() < 1e-12);
                for k in 0..2 {
                    assert!((grad[i][k] - f64::from(i == k)).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn hessians_match_finite_differences_on_curved_element() {
        let (_, ext, mut geo) = setup(generate_mesh(&ShapeSpec::VGon { valence: 5 }).unwrap());
        // Bend the geometry so the element maps are genuinely curved.
        for pts in geo.bezier.iter_mut() {
            for p in pts.iter_mut() {
                p[0] += 0.05 * (2.0 * p[1]).sin();
                p[1] += 0.04 * p[0] * p[0];
            }
        }
        let e = 7;
        let eta = [0.35, 0.62, 0.0];
        let (inv, vals) = eval_mixed_basis(&ext, &geo, e, eta, 2).unwrap();
        let h = 1e-5;
        // Move in physical direction k by solving for the η displacement.
        for k in 0..2 {
            let grads = |s: f64| {
                let d = [inv.e1[0][k] * s, inv.e1[1][k] * s];
                let ep = [eta[0] + d[0], eta[1] + d[1], 0.0];
                let x0 = geo.point(e, eta);
                let xp = geo.point(e, ep);
                // First-order step is not exact; correct with one Newton update.
                let mut target = x0;
                target[k] += s;
                let r = [xp[0] - target[0], xp[1] - target[1]];
                let ep = [
                    ep[0] - inv.e1[0][0] * r[0] - inv.e1[0][1] * r[1],
                    ep[1] - inv.e1[1][0] * r[0] - inv.e1[1][1] * r[1],
                    0.0,
                ];
                eval_mixed_basis(&ext, &geo, e, ep, 1).unwrap().1
            };
            let (p, m) = (grads(h), grads(-h));
            for (idx, (_, j)) in vals.iter().enumerate() {
                for i in 0..2 {
                    let fd = (p[idx].1.g[i] - m[idx].1.g[i]) / (2.0 * h);
                    let scale = 1.0 + j.h[i][k].abs();
                    assert!((fd - j.h[i][k]).abs() < 1e-5 * scale, "{fd} vs {}", j.h[i][k]);
                }
            }
        }
    }

    #[test]
    fn smoothness_tags() {
        let (topo, ext, _) = setup(generate_mesh(&ShapeSpec::VGon { valence: 5 }).unwrap());
        let ring = &topo.vertex_elements[0];
        for e in 0..topo.num_elements() {
            assert_eq!(ext.c0[e], ring.contains(&e));
        }
    }
}
