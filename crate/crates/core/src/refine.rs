//! Global quadrisection of quad meshes. Control vertices away from
//! extraordinary vertices come from Bézier subdivision of the coarse
//! surface; the 1-ring of each extraordinary vertex is fitted so that the
//! fine surface interpolates the arc-length midpoints of the coarse edges.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bernstein::tensor_quad_jets;
use crate::error::{Error, Result};
use crate::extraction::{build_extraction, corner_bezier_index, CvKind, ExtractionOperator, GeometryMap};
use crate::fem::quadrature::gauss_legendre;
use crate::linalg::{norm, sub};
use crate::mesh::{build_topology, corner_index, MeshTopology, UnstructuredMesh, QUAD_CORNERS};

/// Sparse row of weights on coarse control vertices.
pub type Row = Vec<(usize, f64)>;

/// Coarse → fine control-vertex map, one row per fine control vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Transfer {
    pub coarse: usize,
    pub rows: Vec<Row>,
}

impl Transfer {
    pub fn apply(&self, coarse: &[[f64; 3]]) -> Vec<[f64; 3]> {
        self.rows.iter().map(|r| apply(r, coarse)).collect()
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_error(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.iter().map(|x| x.1).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvDiagnostics {
    pub vertex: usize,
    pub valence: usize,
    /// Arc-length midpoints of the coarse edges leaving the vertex.
    pub midpoints: Vec<[f64; 3]>,
    /// Largest violation of the midpoint interpolation conditions.
    pub residual: f64,
    /// Fine control vertex pinned to the coarse surface (even valence).
    pub constrained: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RefinementResult {
    pub mesh: UnstructuredMesh,
    pub topo: MeshTopology,
    pub ext: ExtractionOperator,
    pub controls: Vec<[f64; 3]>,
    pub transfer: Transfer,
    pub evs: Vec<EvDiagnostics>,
}

impl RefinementResult {
    pub fn geometry(&self) -> GeometryMap {
        GeometryMap::new(&self.ext, &self.controls)
    }
}

/// Where on a coarse edge leaving an extraordinary vertex the fine surface
/// is made to pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MidpointRule {
    /// Half the arc length of the edge curve.
    #[default]
    ArcLength,
    /// The curve point at parameter ½. The transfer rows are then exact.
    Parametric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineOptions {
    /// Position η1 = η2 (measured from the extraordinary vertex) where one
    /// 1-ring control vertex is pinned for even valences.
    pub constraint_eta: f64,
    pub midpoint: MidpointRule,
}

impl Default for RefineOptions {
    fn default() -> Self {
        RefineOptions {
            constraint_eta: 0.1875,
            midpoint: MidpointRule::ArcLength,
        }
    }
}

fn apply(row: &Row, pts: &[[f64; 3]]) -> [f64; 3] {
    let mut x = [0.0; 3];
    for &(i, w) in row {
        for d in 0..3 {
            x[d] += w * pts[i][d];
        }
    }
    x
}

fn accumulate(acc: &mut BTreeMap<usize, f64>, row: &Row, s: f64) {
    for &(i, w) in row {
        *acc.entry(i).or_insert(0.0) += s * w;
    }
}

fn finish(acc: BTreeMap<usize, f64>) -> Row {
    acc.into_iter().filter(|x| x.1 != 0.0).collect()
}

/// Bézier point `j` of element `e` in terms of control vertices.
fn bezier_row(ext: &ExtractionOperator, e: usize, j: usize) -> Row {
    let el = &ext.elements[e];
    (0..el.cvs.len())
        .map(|c| (el.cvs[c], el.entry(j, c)))
        .filter(|x| x.1 != 0.0)
        .collect()
}

/// Surface point of element `e` at `η` in terms of control vertices.
fn point_row(ext: &ExtractionOperator, e: usize, eta: [f64; 3]) -> Row {
    let mut acc = BTreeMap::new();
    for (j, b) in tensor_quad_jets(2, eta, 0).iter().enumerate() {
        accumulate(&mut acc, &bezier_row(ext, e, j), b.v);
    }
    finish(acc)
}

/// de Casteljau halving: Bézier points of the half `q` from the parent's.
const HALVES: [[[f64; 3]; 3]; 2] = [
    [[1.0, 0.0, 0.0], [0.5, 0.5, 0.0], [0.25, 0.5, 0.25]],
    [[0.25, 0.5, 0.25], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]],
];

/// Bézier point `idx` of child `q` of element `e`.
fn child_bezier_row(ext: &ExtractionOperator, e: usize, q: [usize; 2], idx: [usize; 2]) -> Row {
    let mut acc = BTreeMap::new();
    for a in 0..3 {
        for b in 0..3 {
            let s = HALVES[q[0]][idx[0]][a] * HALVES[q[1]][idx[1]][b];
            if s != 0.0 {
                accumulate(&mut acc, &bezier_row(ext, e, a + 3 * b), s);
            }
        }
    }
    finish(acc)
}

/// Parent element and child position of fine element `fe`.
fn child_of(fe: usize) -> (usize, [usize; 2]) {
    let k = fe % 4;
    (fe / 4, [k % 2, k / 2])
}

/// Splits every quad into four. Fine element `4e + qx + 2qy` covers
/// `η ∈ [qx/2, (qx+1)/2] × [qy/2, (qy+1)/2]` of coarse element `e`; fine
/// vertices are the coarse vertices, then edge midpoints, then centres.
pub fn quadrisect(topo: &MeshTopology, geo: &GeometryMap) -> Result<UnstructuredMesh> {
    if topo.dim() != 2 {
        return Err(Error::InvalidArgument("refinement is implemented for quadrilateral meshes only".into()));
    }
    let nv = topo.mesh.num_vertices();
    let ne = topo.num_elements();
    let (v_edge, v_face) = (nv, nv + topo.edges.len());
    let mut vertices = vec![[0.0; 3]; v_face + ne];
    let mut elements = Vec::with_capacity(4 * ne);
    for e in 0..ne {
        let corners = &topo.mesh.elements[e];
        let at = |i: usize, j: usize| corners[corner_index(2, [i as u8, j as u8, 0])];
        let mut grid = [[0usize; 3]; 3];
        for (i, col) in grid.iter_mut().enumerate() {
            for (j, id) in col.iter_mut().enumerate() {
                *id = match (i % 2, j % 2) {
                    (0, 0) => at(i / 2, j / 2),
                    (1, 0) => v_edge + topo.edge_id(at(0, j / 2), at(1, j / 2)).expect("element edge"),
                    (0, 1) => v_edge + topo.edge_id(at(i / 2, 0), at(i / 2, 1)).expect("element edge"),
                    _ => v_face + e,
                };
                vertices[*id] = geo.point(e, [0.5 * i as f64, 0.5 * j as f64, 0.0]);
            }
        }
        for q in 0..4 {
            let (qx, qy) = (q % 2, q / 2);
            elements.push(QUAD_CORNERS.iter().map(|c| grid[qx + c[0] as usize][qy + c[1] as usize]).collect());
        }
    }
    UnstructuredMesh::new(2, vertices, elements)
}

/// Tensor-product knot insertion for the element control vertex of fine
/// element `fe`, when the parent corner it touches is an interior regular
/// vertex: weights 9/16 (parent), 3/16 (edge neighbours), 1/16 (diagonal).
fn knot_insertion_row(topo: &MeshTopology, elem_cv: &[usize], fe: usize) -> Option<Row> {
    let (e, q) = child_of(fe);
    let w = topo.mesh.elements[e][corner_index(2, [q[0] as u8, q[1] as u8, 0])];
    if topo.boundary_vertex[w] || topo.valence(w) != 4 {
        return None;
    }
    let n0 = topo.neighbour(e, q[0])?;
    let n1 = topo.neighbour(e, 2 + q[1])?;
    let diag = *topo.vertex_elements[w].iter().find(|&&x| x != e && x != n0 && x != n1)?;
    let mut row = vec![
        (elem_cv[e], 9.0 / 16.0),
        (elem_cv[n0], 3.0 / 16.0),
        (elem_cv[n1], 3.0 / 16.0),
        (elem_cv[diag], 1.0 / 16.0),
    ];
    row.sort_unstable_by_key(|x| x.0);
    Some(row)
}

/// Quadrisection without the extraordinary-vertex fit: knot insertion where
/// the tensor-product structure is locally present, Bézier subdivision of
/// the coarse surface elsewhere (boundary and extraordinary corners).
pub fn refine_regular(topo: &MeshTopology, ext: &ExtractionOperator, geo: &GeometryMap) -> Result<RefinementResult> {
    let mesh = quadrisect(topo, geo)?;
    let fine = build_topology(&mesh)?;
    let fext = build_extraction(&fine)?;
    let mut elem_cv = vec![usize::MAX; topo.num_elements()];
    for (i, k) in ext.cv_kinds.iter().enumerate() {
        if let CvKind::Element(e) = *k {
            elem_cv[e] = i;
        }
    }
    let rows: Vec<Row> = fext
        .cv_kinds
        .iter()
        .map(|&kind| {
            let (fe, idx) = match kind {
                CvKind::Element(fe) => {
                    if let Some(row) = knot_insertion_row(topo, &elem_cv, fe) {
                        return row;
                    }
                    (fe, [1, 1])
                }
                CvKind::BoundaryFacet(f) => {
                    let fe = fine.facet_elements(f)[0];
                    let lf = fine.element_facets[fe].iter().position(|&x| x == f).expect("facet of element");
                    let mut idx = [1, 1];
                    idx[lf / 2] = 2 * (lf % 2);
                    (fe, idx)
                }
                CvKind::Corner(v) => {
                    let fe = fine.vertex_elements[v][0];
                    let k = fine.mesh.elements[fe].iter().position(|&x| x == v).expect("corner of element");
                    let c = QUAD_CORNERS[k];
                    (fe, [2 * c[0] as usize, 2 * c[1] as usize])
                }
                CvKind::FeatureEdge(_) => unreachable!("no feature edges in 2D"),
            };
            let (e, q) = child_of(fe);
            child_bezier_row(ext, e, q, idx)
        })
        .collect();
    let transfer = Transfer {
        coarse: ext.num_cvs(),
        rows,
    };
    let controls = transfer.apply(&geo.controls);
    Ok(RefinementResult {
        mesh,
        topo: fine,
        ext: fext,
        controls,
        transfer,
        evs: Vec::new(),
    })
}

/// Point at half the arc length of the straight η-segment `from → to` of
/// element `e`, found by bisection on the Gauss-integrated length.
pub fn arc_length_midpoint(geo: &GeometryMap, e: usize, from: [f64; 3], to: [f64; 3]) -> [f64; 3] {
    let (gx, gw) = gauss_legendre(8);
    let dir = sub(to, from);
    let at = |t: f64| [from[0] + t * dir[0], from[1] + t * dir[1], 0.0];
    let speed = |t: f64| {
        let x = geo.eval(e, at(t), 1);
        let v: [f64; 3] = std::array::from_fn(|d| x[d].g[0] * dir[0] + x[d].g[1] * dir[1]);
        norm(v)
    };
    let length = |t: f64| t * gx.iter().zip(&gw).map(|(x, w)| w * speed(t * x)).sum::<f64>();
    let half = 0.5 * length(1.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if length(mid) < half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    geo.point(e, at(0.5 * (lo + hi)))
}

fn corner_eta(c: [u8; 3]) -> [f64; 3] {
    c.map(f64::from)
}

/// Refits the fine control vertices of the elements touching the interior
/// extraordinary vertex `v` so that the fine surface passes through the
/// arc-length midpoints of the coarse edges at `v`. For even valence the
/// system has rank `v − 1`; one control vertex is then pinned to the coarse
/// surface and the rest solved in the least-squares sense.
pub fn refine_extraordinary(
    topo: &MeshTopology,
    ext: &ExtractionOperator,
    geo: &GeometryMap,
    result: &mut RefinementResult,
    v: usize,
    opts: &RefineOptions,
) -> Result<EvDiagnostics> {
    if topo.boundary_vertex[v] {
        return Err(Error::AssumptionViolated(format!("vertex {v} is on the boundary")));
    }
    let fine = &result.topo;
    let fext = &result.ext;
    let mut elem_cv = vec![usize::MAX; fine.num_elements()];
    for (i, k) in fext.cv_kinds.iter().enumerate() {
        if let CvKind::Element(fe) = *k {
            elem_cv[fe] = i;
        }
    }
    let ring: Vec<usize> = fine.vertex_elements[v].iter().map(|&fe| elem_cv[fe]).collect();
    let n = ring.len();
    let mut edges: Vec<usize> = topo.vertex_elements[v]
        .iter()
        .flat_map(|&e| topo.element_edges[e].iter().copied())
        .filter(|&ed| topo.edges[ed].contains(&v))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    if edges.len() != n {
        return Err(Error::AssumptionViolated(format!("vertex {v} has {} edges but {n} elements", edges.len())));
    }

    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DMatrix::<f64>::zeros(n, 3);
    let mut rhs_rows = Vec::with_capacity(n);
    let mut midpoints = Vec::with_capacity(n);
    for (k, &ed) in edges.iter().enumerate() {
        // Corner Bézier point of the fine mesh at the edge midpoint vertex.
        let fv = topo.mesh.num_vertices() + ed;
        let fe = fine.vertex_elements[fv][0];
        let corner = fine.mesh.elements[fe].iter().position(|&x| x == fv).expect("corner of element");
        let j = corner_bezier_index(2, corner);
        let el = &fext.elements[fe];

        let ce = topo.edge_elements[ed][0];
        let cv_local = |x: usize| topo.mesh.elements[ce].iter().position(|&y| y == x).expect("edge corner");
        let other = if topo.edges[ed][0] == v { topo.edges[ed][1] } else { topo.edges[ed][0] };
        let from = corner_eta(QUAD_CORNERS[cv_local(v)]);
        let to = corner_eta(QUAD_CORNERS[cv_local(other)]);
        let half: [f64; 3] = std::array::from_fn(|d| 0.5 * (from[d] + to[d]));
        let mid = match opts.midpoint {
            MidpointRule::ArcLength => arc_length_midpoint(geo, ce, from, to),
            MidpointRule::Parametric => geo.point(ce, half),
        };
        midpoints.push(mid);

        let lin = point_row(ext, ce, half);
        let mut acc: BTreeMap<usize, f64> = lin.into_iter().collect();
        let mut r = mid;
        for c in 0..el.cvs.len() {
            let (cv, w) = (el.cvs[c], el.entry(j, c));
            if w == 0.0 {
                continue;
            }
            match ring.iter().position(|&x| x == cv) {
                Some(i) => m[(k, i)] += w,
                None => {
                    for d in 0..3 {
                        r[d] -= w * result.controls[cv][d];
                    }
                    accumulate(&mut acc, &result.transfer.rows[cv], -w);
                }
            }
        }
        for d in 0..3 {
            rhs[(k, d)] = r[d];
        }
        rhs_rows.push(finish(acc));
    }

    // Solution operator: u = G_r · r + g_c · c.
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let singular = sv.min() <= 1e-10 * smax;
    let (g_r, g_c, pinned) = if !singular {
        let inv = m.clone().try_inverse().ok_or_else(|| Error::SingularSystem(format!("1-ring system at vertex {v}")))?;
        (inv, DVector::zeros(n), None)
    } else {
        let a = m.columns(1, n - 1).into_owned();
        let pinv = a
            .pseudo_inverse(1e-12 * smax)
            .map_err(|e| Error::SingularSystem(format!("1-ring system at vertex {v}: {e}")))?;
        let gc = -(&pinv * m.column(0));
        let mut g_r = DMatrix::zeros(n, n);
        g_r.rows_mut(1, n - 1).copy_from(&pinv);
        let mut g_c = DVector::zeros(n);
        g_c.rows_mut(1, n - 1).copy_from(&gc);
        g_c[0] = 1.0;
        (g_r, g_c, Some(0))
    };

    let (c, c_row) = match pinned {
        Some(_) => {
            let fe = fine.vertex_elements[v][0];
            let (ce, _) = child_of(fe);
            let corner = QUAD_CORNERS[topo.mesh.elements[ce].iter().position(|&x| x == v).expect("corner")];
            let t = opts.constraint_eta;
            let eta = corner.map(|c| if c == 0 { t } else { 1.0 - t });
            (geo.point(ce, eta), point_row(ext, ce, eta))
        }
        None => ([0.0; 3], Vec::new()),
    };

    let mut u = DMatrix::<f64>::zeros(n, 3);
    for i in 0..n {
        let mut acc = BTreeMap::new();
        for k in 0..n {
            for d in 0..3 {
                u[(i, d)] += g_r[(i, k)] * rhs[(k, d)];
            }
            if g_r[(i, k)] != 0.0 {
                accumulate(&mut acc, &rhs_rows[k], g_r[(i, k)]);
            }
        }
        for d in 0..3 {
            u[(i, d)] += g_c[i] * c[d];
        }
        if g_c[i] != 0.0 {
            accumulate(&mut acc, &c_row, g_c[i]);
        }
        result.transfer.rows[ring[i]] = finish(acc);
        result.controls[ring[i]] = [u[(i, 0)], u[(i, 1)], u[(i, 2)]];
    }
    let residual = (&m * &u - &rhs).abs().max();
    Ok(EvDiagnostics {
        vertex: v,
        valence: n,
        midpoints,
        residual,
        constrained: pinned.map(|i| ring[i]),
    })
}

/// One level of global refinement: subdivision everywhere, then the 1-ring
/// fit at every interior extraordinary vertex.
pub fn refine(topo: &MeshTopology, ext: &ExtractionOperator, geo: &GeometryMap, opts: &RefineOptions) -> Result<RefinementResult> {
    let mut result = refine_regular(topo, ext, geo)?;
    let evs: Vec<usize> = (0..topo.mesh.num_vertices())
        .filter(|&v| !topo.boundary_vertex[v] && topo.valence(v) != 4)
        .collect();
    for v in evs {
        let d = refine_extraordinary(topo, ext, geo, &mut result, v, opts)?;
        result.evs.push(d);
    }
    Ok(result)
}

/// Largest distance between the coarse and fine surfaces over a lattice of
/// `per_axis²` points in each listed coarse element.
pub fn nesting_gap(coarse: &GeometryMap, fine: &GeometryMap, elements: impl IntoIterator<Item = usize>, per_axis: usize) -> f64 {
    let mut worst = 0.0f64;
    for e in elements {
        for a in 0..per_axis {
            for b in 0..per_axis {
                let eta = [(a as f64 + 0.5) / per_axis as f64, (b as f64 + 0.5) / per_axis as f64, 0.0];
                let q = [(2.0 * eta[0]) as usize, (2.0 * eta[1]) as usize];
                let fe = 4 * e + q[0] + 2 * q[1];
                let local = [2.0 * eta[0] - q[0] as f64, 2.0 * eta[1] - q[1] as f64, 0.0];
                worst = worst.max(norm(sub(coarse.point(e, eta), fine.point(fe, local))));
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{classify_extraordinary, generate_mesh, structured_grid, ShapeSpec};

    fn coarse(mesh: UnstructuredMesh) -> (MeshTopology, ExtractionOperator, GeometryMap) {
        let topo = build_topology(&mesh).unwrap();
        let ext = build_extraction(&topo).unwrap();
        let geo = GeometryMap::from_extraction(&ext);
        (topo, ext, geo)
    }

    #[test]
    fn structured_grid_refines_exactly() {
        let (topo, ext, geo) = coarse(structured_grid(2, [4, 3, 0], [2.0, 1.5, 0.0]).unwrap());
        let r = refine(&topo, &ext, &geo, &RefineOptions::default()).unwrap();
        assert_eq!(r.mesh.num_elements(), 4 * topo.num_elements());
        assert!(r.evs.is_empty());
        assert!(r.transfer.row_sum_error() < 1e-14);
        assert!(nesting_gap(&geo, &r.geometry(), 0..topo.num_elements(), 7) < 1e-12);
    }

    #[test]
    fn odd_valence_solves_directly() {
        let (topo, ext, geo) = coarse(generate_mesh(&ShapeSpec::VGon { valence: 5 }).unwrap());
        let r = refine(&topo, &ext, &geo, &RefineOptions::default()).unwrap();
        assert_eq!(r.evs.len(), 1);
        let d = &r.evs[0];
        assert_eq!((d.valence, d.constrained), (5, None));
        assert!(d.residual < 1e-10, "{}", d.residual);
        assert!(r.transfer.row_sum_error() < 1e-13);
        // The fine surface passes through the midpoints.
        let fine = r.geometry();
        for &ed in topo.element_edges.iter().flatten().filter(|&&ed| topo.edges[ed].contains(&d.vertex)) {
            let fv = topo.mesh.num_vertices() + ed;
            let fe = r.topo.vertex_elements[fv][0];
            let k = r.mesh.elements[fe].iter().position(|&x| x == fv).unwrap();
            let p = fine.point(fe, corner_eta(QUAD_CORNERS[k]));
            assert!(d.midpoints.iter().any(|m| norm(sub(*m, p)) < 1e-10));
        }
    }

    #[test]
    fn parametric_midpoints_make_the_transfer_exact() {
        let (topo, ext, geo) = coarse(generate_mesh(&ShapeSpec::Square { subdiv: 6 }).unwrap());
        let opts = RefineOptions {
            midpoint: MidpointRule::Parametric,
            ..RefineOptions::default()
        };
        let r = refine(&topo, &ext, &geo, &opts).unwrap();
        let moved = r.transfer.apply(&geo.controls);
        let gap = moved.iter().zip(&r.controls).map(|(a, b)| norm(sub(*a, *b))).fold(0.0, f64::max);
        assert!(gap < 1e-12, "{gap}");
        assert!(r.evs.iter().all(|d| d.residual < 1e-10));
    }

    #[test]
    fn even_valence_takes_the_constrained_path() {
        let (topo, ext, geo) = coarse(generate_mesh(&ShapeSpec::VGon { valence: 6 }).unwrap());
        let r = refine(&topo, &ext, &geo, &RefineOptions::default()).unwrap();
        let d = &r.evs[0];
        assert_eq!(d.valence, 6);
        assert!(d.constrained.is_some());
        assert!(d.residual < 1e-10, "{}", d.residual);
        assert!(r.transfer.row_sum_error() < 1e-13);
    }

    #[test]
    fn straight_edges_give_coordinate_midpoints() {
        let (topo, ext, geo) = coarse(generate_mesh(&ShapeSpec::VGon { valence: 3 }).unwrap());
        let r = refine(&topo, &ext, &geo, &RefineOptions::default()).unwrap();
        let d = &r.evs[0];
        let mut edges: Vec<usize> = topo.element_edges.iter().flatten().copied().filter(|&ed| topo.edges[ed].contains(&d.vertex)).collect();
        edges.sort_unstable();
        edges.dedup();
        for ed in edges {
            let e = topo.edge_elements[ed][0];
            let end = |v: usize| geo.point(e, corner_eta(QUAD_CORNERS[topo.mesh.elements[e].iter().position(|&x| x == v).unwrap()]));
            let (a, b) = (end(topo.edges[ed][0]), end(topo.edges[ed][1]));
            let mid = std::array::from_fn(|k| 0.5 * (a[k] + b[k]));
            assert!(d.midpoints.iter().any(|m| norm(sub(*m, mid)) < 1e-10));
        }
    }

    #[test]
    fn geometry_nested_away_from_extraordinary_vertices() {
        for v in [5, 6] {
            let (topo, ext, geo) = coarse(generate_mesh(&ShapeSpec::VGon { valence: v }).unwrap());
            let r = refine(&topo, &ext, &geo, &RefineOptions::default()).unwrap();
            let evs: Vec<usize> = r.evs.iter().map(|d| d.vertex).collect();
            let hood = topo.neighbourhood(&evs, 2);
            let away = (0..topo.num_elements()).filter(|e| !hood.contains(e));
            assert!(nesting_gap(&geo, &r.geometry(), away, 5) < 1e-12);
        }
    }

    #[test]
    fn classification_is_preserved() {
        let (topo, ext, geo) = coarse(generate_mesh(&ShapeSpec::Square { subdiv: 6 }).unwrap());
        let before = classify_extraordinary(&topo).unwrap();
        let r = refine(&topo, &ext, &geo, &RefineOptions::default()).unwrap();
        let after = classify_extraordinary(&r.topo).unwrap();
        let key = |t: &MeshTopology, n: &crate::mesh::ExtraordinaryNetwork| {
            let mut k: Vec<(usize, usize)> = n.points.iter().map(|p| (p.vertex, t.valence(p.vertex))).collect();
            k.sort_unstable();
            k
        };
        assert_eq!(key(&topo, &before), key(&r.topo, &after));
        assert!(r.evs.iter().all(|d| d.residual < 1e-10));
    }

    #[test]
    fn hexahedral_meshes_are_rejected() {
        let (topo, _, geo) = coarse(structured_grid(3, [2, 2, 2], [1.0; 3]).unwrap());
        assert!(matches!(quadrisect(&topo, &geo), Err(Error::InvalidArgument(_))));
    }
}
