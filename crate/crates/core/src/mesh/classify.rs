//! Extraordinary-feature classification and sector charts.
//!
//! A sector is a regular block of elements (3×3 in 2D, 3×3×3 around a joint,
//! 3×3×m along a prism) whose cells carry an axis map from the sector's local
//! axes to each element's reference axes.

use std::collections::BTreeSet;

use super::topology::MeshTopology;
use super::{corner_index, reference_corners};
use crate::error::{Error, Result};

/// Maps local sector axes `t` to element reference axes `η`:
/// `η[axis[d]] = if flip[d] { 1 - t[d] } else { t[d] }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AxisMap {
    pub axis: [usize; 3],
    pub flip: [bool; 3],
}

impl AxisMap {
    pub const IDENTITY: AxisMap = AxisMap {
        axis: [0, 1, 2],
        flip: [false; 3],
    };

    pub fn corner(&self, t: [u8; 3]) -> [u8; 3] {
        let mut c = [0u8; 3];
        for d in 0..3 {
            c[self.axis[d]] = if self.flip[d] { 1 - t[d] } else { t[d] };
        }
        c
    }

    pub fn to_eta(&self, t: [f64; 3]) -> [f64; 3] {
        let mut eta = [0.0; 3];
        for d in 0..3 {
            eta[self.axis[d]] = if self.flip[d] { 1.0 - t[d] } else { t[d] };
        }
        eta
    }

    pub fn to_local(&self, eta: [f64; 3]) -> [f64; 3] {
        let mut t = [0.0; 3];
        for d in 0..3 {
            let x = eta[self.axis[d]];
            t[d] = if self.flip[d] { 1.0 - x } else { x };
        }
        t
    }

    /// Determinant (±1) of the affine map `t -> η`.
    pub fn sign(&self) -> f64 {
        let a = self.axis;
        let mut s = 1.0;
        for i in 0..3 {
            for j in i + 1..3 {
                if a[i] > a[j] {
                    s = -s;
                }
            }
            if self.flip[i] {
                s = -s;
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChartCell {
    pub element: usize,
    /// Position of the cell inside the sector block.
    pub offset: [usize; 3],
    pub map: AxisMap,
}

/// A block of cells with `shape[0]` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorChart {
    pub shape: [usize; 3],
    pub cells: Vec<ChartCell>,
}

impl SectorChart {
    pub fn cell(&self, i: usize, j: usize, k: usize) -> &ChartCell {
        &self.cells[i + self.shape[0] * (j + self.shape[1] * k)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// 2D extraordinary vertex.
    Point(usize),
    Prism(usize),
    Joint(usize),
}

/// Region ownership of an element: feature, sector, cell index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Owner {
    pub feature: FeatureKind,
    pub sector: usize,
    pub cell: usize,
}

/// An interior 2D vertex of valence `v != 4`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtraordinaryPoint {
    pub vertex: usize,
    pub valence: usize,
    pub sectors: Vec<SectorChart>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrismEnd {
    Joint(usize),
    Boundary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prism {
    /// Ordered chain of extraordinary edges.
    pub edges: Vec<usize>,
    /// Chain vertices, one more than edges.
    pub vertices: Vec<usize>,
    pub valence: usize,
    pub start: PrismEnd,
    pub end: PrismEnd,
    /// Chain position of the first prism-region element (3 after a joint).
    pub axial_offset: usize,
    /// Number of prism-region elements along the chain.
    pub length: usize,
    pub sectors: Vec<SectorChart>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub vertex: usize,
    /// Attached prisms as (prism index, attached at the prism's start).
    pub prisms: Vec<(usize, bool)>,
    /// False for configurations outside the weight construction (mixed
    /// valences); such joints carry no sectors.
    pub supported: bool,
    pub sectors: Vec<SectorChart>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtraordinaryNetwork {
    pub dim: usize,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub points: Vec<ExtraordinaryPoint>,
    pub prisms: Vec<Prism>,
    pub joints: Vec<Joint>,
    pub owner: Vec<Option<Owner>>,
}

impl ExtraordinaryNetwork {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn sectors(&self, feature: FeatureKind) -> &[SectorChart] {
        match feature {
            FeatureKind::Point(i) => &self.points[i].sectors,
            FeatureKind::Prism(i) => &self.prisms[i].sectors,
            FeatureKind::Joint(i) => &self.joints[i].sectors,
        }
    }

    /// Vertices whose neighbourhoods make up the blending regions: the
    /// extraordinary vertices in 2D, the interior chain vertices in 3D.
    pub fn seeds(&self, topo: &MeshTopology) -> Vec<usize> {
        if self.dim == 2 {
            return self.vertices.clone();
        }
        let mut s = BTreeSet::new();
        for p in &self.prisms {
            s.extend(p.vertices.iter().copied().filter(|&v| !topo.boundary_vertex[v]));
        }
        s.into_iter().collect()
    }

    pub fn chart_cell(&self, element: usize) -> Option<(FeatureKind, &ChartCell)> {
        let o = self.owner[element]?;
        Some((o.feature, &self.sectors(o.feature)[o.sector].cells[o.cell]))
    }
}

fn unit(d: usize) -> [u8; 3] {
    let mut t = [0; 3];
    t[d] = 1;
    t
}

fn local_corner(topo: &MeshTopology, e: usize, v: usize) -> Option<[u8; 3]> {
    let k = topo.mesh.elements[e].iter().position(|&w| w == v)?;
    Some(reference_corners(topo.dim())[k])
}

fn vertex_at(topo: &MeshTopology, e: usize, map: &AxisMap, t: [u8; 3]) -> usize {
    let dim = topo.dim();
    topo.mesh.elements[e][corner_index(dim, map.corner(t))]
}

/// Vertices joined to `origin` by an edge of `e`, indexed by reference axis.
fn adjacent_corners(topo: &MeshTopology, e: usize, origin: usize) -> Vec<usize> {
    let dim = topo.dim();
    let c0 = local_corner(topo, e, origin).expect("origin must be a corner of e");
    (0..dim)
        .map(|a| {
            let mut c = c0;
            c[a] = 1 - c[a];
            topo.mesh.elements[e][corner_index(dim, c)]
        })
        .collect()
}

fn frame_from_vertices(topo: &MeshTopology, e: usize, origin: usize, ends: &[usize]) -> Option<AxisMap> {
    let c0 = local_corner(topo, e, origin)?;
    let mut map = AxisMap::IDENTITY;
    let mut used = [false; 3];
    for (d, &v) in ends.iter().enumerate() {
        let c = local_corner(topo, e, v)?;
        let diff: Vec<usize> = (0..3).filter(|&a| c[a] != c0[a]).collect();
        if diff.len() != 1 || used[diff[0]] {
            return None;
        }
        used[diff[0]] = true;
        map.axis[d] = diff[0];
        map.flip[d] = c0[diff[0]] == 1;
    }
    Some(map)
}

/// First positively oriented frame at `origin` honouring the fixed
/// `(local axis, end vertex)` assignments.
fn positive_frame(topo: &MeshTopology, e: usize, origin: usize, fixed: &[(usize, usize)]) -> Option<AxisMap> {
    let dim = topo.dim();
    let adj = adjacent_corners(topo, e, origin);
    let free_axes: Vec<usize> = (0..dim).filter(|d| fixed.iter().all(|f| f.0 != *d)).collect();
    let free_verts: Vec<usize> = adj
        .iter()
        .copied()
        .filter(|v| fixed.iter().all(|f| f.1 != *v))
        .collect();
    if free_verts.len() != free_axes.len() {
        return None;
    }
    for perm in permutations(free_verts.len()) {
        let mut ends = vec![0; dim];
        for &(d, v) in fixed {
            ends[d] = v;
        }
        for (k, &d) in free_axes.iter().enumerate() {
            ends[d] = free_verts[perm[k]];
        }
        if let Some(map) = frame_from_vertices(topo, e, origin, &ends) {
            if map.sign() > 0.0 {
                return Some(map);
            }
        }
    }
    None
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    match n {
        0 => vec![vec![]],
        1 => vec![vec![0]],
        2 => vec![vec![0, 1], vec![1, 0]],
        _ => vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ],
    }
}

/// Crosses the facet at `t_d = 1` into the neighbouring element.
fn step(topo: &MeshTopology, e: usize, map: &AxisMap, d: usize) -> Option<(usize, AxisMap)> {
    let dim = topo.dim();
    let a = map.axis[d];
    let side = usize::from(!map.flip[d]);
    let n = topo.neighbour(e, 2 * a + side)?;
    let origin = vertex_at(topo, e, map, unit(d));
    let facet = topo.element_facets[e][2 * a + side];
    let k = topo.element_facets[n].iter().position(|&f| f == facet)?;
    let mut c = local_corner(topo, n, origin)?;
    c[k / 2] = 1 - c[k / 2];
    let mut ends = vec![0; dim];
    for (dd, end) in ends.iter_mut().enumerate() {
        *end = if dd == d {
            topo.mesh.elements[n][corner_index(dim, c)]
        } else {
            let mut t = unit(d);
            t[dd] = 1;
            vertex_at(topo, e, map, t)
        };
    }
    Some((n, frame_from_vertices(topo, n, origin, &ends)?))
}

fn overlap(what: &str) -> Error {
    Error::NeighbourhoodOverlap(what.to_string())
}

/// Grows a regular block of `shape` cells from a seed frame.
fn build_block(topo: &MeshTopology, seed: (usize, AxisMap), shape: [usize; 3], what: &str) -> Result<SectorChart> {
    let dim = topo.dim();
    let n = shape[0] * shape[1] * shape[2];
    let idx = |i: usize, j: usize, k: usize| i + shape[0] * (j + shape[1] * k);
    let mut cells: Vec<Option<ChartCell>> = vec![None; n];
    for k in 0..shape[2] {
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let (e, map) = if i > 0 {
                    let p = cells[idx(i - 1, j, k)].unwrap();
                    step(topo, p.element, &p.map, 0)
                } else if j > 0 {
                    let p = cells[idx(i, j - 1, k)].unwrap();
                    step(topo, p.element, &p.map, 1)
                } else if k > 0 {
                    let p = cells[idx(i, j, k - 1)].unwrap();
                    step(topo, p.element, &p.map, 2)
                } else {
                    Some(seed)
                }
                .ok_or_else(|| overlap(&format!("{what}: sector block leaves the mesh")))?;
                cells[idx(i, j, k)] = Some(ChartCell {
                    element: e,
                    offset: [i, j, k],
                    map,
                });
            }
        }
    }
    let cells: Vec<ChartCell> = cells.into_iter().map(Option::unwrap).collect();
    // Every interior adjacency of the block must agree with mesh adjacency.
    for c in &cells {
        for d in 0..dim {
            let mut o = c.offset;
            o[d] += 1;
            if o[d] >= shape[d] {
                continue;
            }
            let next = cells[idx(o[0], o[1], o[2])];
            if step(topo, c.element, &c.map, d) != Some((next.element, next.map)) {
                return Err(overlap(&format!(
                    "{what}: sector around element {} is not a regular block",
                    c.element
                )));
            }
        }
    }
    Ok(SectorChart { shape, cells })
}

/// Sectors around an interior 2D vertex, counter-clockwise.
fn point_sectors(topo: &MeshTopology, v: usize) -> Result<Vec<SectorChart>> {
    let ring = &topo.vertex_elements[v];
    let e0 = *ring.iter().min().unwrap();
    let mut e = e0;
    let mut map = positive_frame(topo, e, v, &[])
        .ok_or_else(|| Error::InvalidMesh(format!("element {e} has no positive frame")))?;
    let what = format!("extraordinary vertex {v}");
    let mut sectors = Vec::new();
    loop {
        sectors.push(build_block(topo, (e, map), [3, 3, 1], &what)?);
        let a = map.axis[0];
        let side = usize::from(map.flip[0]);
        let next_end = vertex_at(topo, e, &map, unit(1));
        let n = topo
            .neighbour(e, 2 * a + side)
            .ok_or_else(|| Error::AssumptionViolated(format!("{what} is not interior")))?;
        map = positive_frame(topo, n, v, &[(0, next_end)])
            .ok_or_else(|| Error::InvalidMesh(format!("inconsistent orientation at element {n}")))?;
        e = n;
        if e == e0 || sectors.len() > ring.len() {
            break;
        }
    }
    if sectors.len() != ring.len() {
        return Err(Error::NonManifold(format!("element ring around vertex {v} is not a cycle")));
    }
    Ok(sectors)
}

/// Sectors around an extraordinary edge, rotating about the local third axis.
fn prism_sectors(
    topo: &MeshTopology,
    origin: usize,
    along: usize,
    edge: usize,
    length: usize,
    what: &str,
) -> Result<Vec<SectorChart>> {
    let ring = &topo.edge_elements[edge];
    let e0 = *ring.iter().min().unwrap();
    let mut e = e0;
    let mut map = positive_frame(topo, e, origin, &[(2, along)])
        .ok_or_else(|| Error::InvalidMesh(format!("element {e} has no positive frame")))?;
    let mut sectors = Vec::new();
    loop {
        sectors.push(build_block(topo, (e, map), [3, 3, length], what)?);
        let a = map.axis[0];
        let side = usize::from(map.flip[0]);
        let next_end = vertex_at(topo, e, &map, unit(1));
        let n = topo
            .neighbour(e, 2 * a + side)
            .ok_or_else(|| Error::AssumptionViolated(format!("{what} touches the boundary")))?;
        map = positive_frame(topo, n, origin, &[(2, along), (0, next_end)])
            .ok_or_else(|| Error::InvalidMesh(format!("inconsistent orientation at element {n}")))?;
        e = n;
        if e == e0 || sectors.len() > ring.len() {
            break;
        }
    }
    if sectors.len() != ring.len() {
        return Err(Error::NonManifold(format!("element ring around edge {edge} is not a cycle")));
    }
    Ok(sectors)
}

pub fn classify_extraordinary(topo: &MeshTopology) -> Result<ExtraordinaryNetwork> {
    let mut net = if topo.dim() == 2 {
        classify_2d(topo)?
    } else {
        classify_3d(topo)?
    };
    assign_owners(topo, &mut net)?;
    Ok(net)
}

fn classify_2d(topo: &MeshTopology) -> Result<ExtraordinaryNetwork> {
    let mut vertices = Vec::new();
    for v in 0..topo.mesh.num_vertices() {
        let val = topo.valence(v);
        if topo.boundary_vertex[v] {
            if val > 2 {
                return Err(Error::AssumptionViolated(format!(
                    "boundary vertex {v} has valence {val}; boundary vertices must be regular"
                )));
            }
        } else if val != 4 {
            vertices.push(v);
        }
    }
    let mut points = Vec::new();
    for &v in &vertices {
        points.push(ExtraordinaryPoint {
            vertex: v,
            valence: topo.valence(v),
            sectors: point_sectors(topo, v)?,
        });
    }
    Ok(ExtraordinaryNetwork {
        dim: 2,
        vertices,
        edges: Vec::new(),
        points,
        prisms: Vec::new(),
        joints: Vec::new(),
        owner: Vec::new(),
    })
}

fn classify_3d(topo: &MeshTopology) -> Result<ExtraordinaryNetwork> {
    let nv = topo.mesh.num_vertices();
    let mut edges = Vec::new();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (i, &[a, b]) in topo.edges.iter().enumerate() {
        let e = topo.edge_valence(i);
        if topo.boundary_edge[i] {
            if e > 2 {
                return Err(Error::AssumptionViolated(format!(
                    "boundary edge {a}-{b} is shared by {e} elements; boundary edges must be regular"
                )));
            }
        } else if e != 4 {
            edges.push(i);
            incident[a].push(i);
            incident[b].push(i);
        }
    }
    let mut vertices = Vec::new();
    for v in 0..nv {
        let interior = !topo.boundary_vertex[v];
        let irregular = interior && topo.valence(v) != 8;
        let k = incident[v].len();
        if interior && k > 0 && !irregular {
            return Err(Error::AssumptionViolated(format!(
                "extraordinary edge ends at ordinary vertex {v}"
            )));
        }
        if irregular && k == 0 {
            return Err(Error::AssumptionViolated(format!(
                "vertex {v} is extraordinary but touches no extraordinary edge"
            )));
        }
        if interior && k == 1 {
            return Err(Error::AssumptionViolated(format!(
                "extraordinary edge chain ends inside the mesh at vertex {v}"
            )));
        }
        if !interior && k > 1 {
            return Err(Error::AssumptionViolated(format!(
                "boundary vertex {v} touches {k} extraordinary edges"
            )));
        }
        if irregular {
            vertices.push(v);
        }
    }
    let is_joint = |v: usize| !topo.boundary_vertex[v] && incident[v].len() > 2;
    let mut joint_of = vec![usize::MAX; nv];
    let mut joints = Vec::new();
    for v in 0..nv {
        if is_joint(v) {
            joint_of[v] = joints.len();
            joints.push(Joint {
                vertex: v,
                prisms: Vec::new(),
                supported: true,
                sectors: Vec::new(),
            });
        }
    }

    let mut visited = vec![false; topo.edges.len()];
    let mut prisms = Vec::new();
    for v in 0..nv {
        if !(is_joint(v) || (topo.boundary_vertex[v] && incident[v].len() == 1)) {
            continue;
        }
        for &first in &incident[v] {
            if visited[first] {
                continue;
            }
            let mut chain_v = vec![v];
            let mut chain_e = Vec::new();
            let mut cur = v;
            let mut edge = first;
            loop {
                visited[edge] = true;
                chain_e.push(edge);
                let [a, b] = topo.edges[edge];
                cur = if a == cur { b } else { a };
                chain_v.push(cur);
                if topo.boundary_vertex[cur] || is_joint(cur) {
                    break;
                }
                edge = *incident[cur].iter().find(|&&x| x != edge).unwrap();
            }
            let mut start = end_kind(v, &joint_of);
            let mut end = end_kind(cur, &joint_of);
            if start == PrismEnd::Boundary && end != PrismEnd::Boundary {
                chain_v.reverse();
                chain_e.reverse();
                std::mem::swap(&mut start, &mut end);
            }
            let valence = topo.edge_valence(chain_e[0]);
            if chain_e.iter().any(|&x| topo.edge_valence(x) != valence) {
                return Err(Error::AssumptionViolated(format!(
                    "edge valence changes along the extraordinary chain through vertex {v}"
                )));
            }
            prisms.push(Prism {
                edges: chain_e,
                vertices: chain_v,
                valence,
                start,
                end,
                axial_offset: 0,
                length: 0,
                sectors: Vec::new(),
            });
        }
    }
    if let Some(&loose) = edges.iter().find(|&&x| !visited[x]) {
        let [a, b] = topo.edges[loose];
        return Err(Error::AssumptionViolated(format!(
            "extraordinary edges through {a}-{b} form a closed loop"
        )));
    }

    for (p, prism) in prisms.iter_mut().enumerate() {
        let what = format!("extraordinary prism {p}");
        let off_start = if matches!(prism.start, PrismEnd::Joint(_)) { 3 } else { 0 };
        let off_end = if matches!(prism.end, PrismEnd::Joint(_)) { 3 } else { 0 };
        let min_len = match (off_start, off_end) {
            (3, 3) => 3,
            (3, _) | (_, 3) => 2,
            _ => 1,
        };
        let n = prism.edges.len();
        if n < off_start + off_end + min_len {
            return Err(overlap(&format!(
                "{what} has {n} elements along its chain, fewer than the {} its joints need",
                off_start + off_end + min_len
            )));
        }
        prism.axial_offset = off_start;
        prism.length = n - off_start - off_end;
        let origin = prism.vertices[off_start];
        let along = prism.vertices[off_start + 1];
        prism.sectors = prism_sectors(topo, origin, along, prism.edges[off_start], prism.length, &what)?;
        if let PrismEnd::Joint(j) = prism.start {
            joints[j].prisms.push((p, true));
        }
        if let PrismEnd::Joint(j) = prism.end {
            joints[j].prisms.push((p, false));
        }
    }

    for (j, joint) in joints.iter_mut().enumerate() {
        let v = joint.vertex;
        let all_three = joint.prisms.iter().all(|&(p, _)| prisms[p].valence == 3);
        let ring = &topo.vertex_elements[v];
        let axes_ok = ring.iter().all(|&e| {
            adjacent_corners(topo, e, v)
                .iter()
                .all(|&w| topo.edge_id(v, w).is_some_and(|id| incident[v].contains(&id)))
        });
        joint.supported = all_three && axes_ok;
        if !joint.supported {
            continue;
        }
        let what = format!("extraordinary joint {j}");
        let mut ring = ring.clone();
        ring.sort_unstable();
        for e in ring {
            let map = positive_frame(topo, e, v, &[])
                .ok_or_else(|| Error::InvalidMesh(format!("element {e} has no positive frame")))?;
            joint.sectors.push(build_block(topo, (e, map), [3, 3, 3], &what)?);
        }
    }

    Ok(ExtraordinaryNetwork {
        dim: 3,
        vertices,
        edges,
        points: Vec::new(),
        prisms,
        joints,
        owner: Vec::new(),
    })
}

fn end_kind(v: usize, joint_of: &[usize]) -> PrismEnd {
    if joint_of[v] == usize::MAX {
        PrismEnd::Boundary
    } else {
        PrismEnd::Joint(joint_of[v])
    }
}

/// Assigns every sector cell to its element and checks that the sectors tile
/// the 3-neighbourhood of the extraordinary vertices exactly once.
fn assign_owners(topo: &MeshTopology, net: &mut ExtraordinaryNetwork) -> Result<()> {
    let mut owner: Vec<Option<Owner>> = vec![None; topo.num_elements()];
    let features: Vec<FeatureKind> = (0..net.points.len())
        .map(FeatureKind::Point)
        .chain((0..net.prisms.len()).map(FeatureKind::Prism))
        .chain((0..net.joints.len()).map(FeatureKind::Joint))
        .collect();
    for f in features {
        for (s, sector) in net.sectors(f).iter().enumerate() {
            for (c, cell) in sector.cells.iter().enumerate() {
                let slot = &mut owner[cell.element];
                if let Some(prev) = slot {
                    return Err(overlap(&format!(
                        "element {} lies in the regions of {:?} and {:?}",
                        cell.element, prev.feature, f
                    )));
                }
                *slot = Some(Owner {
                    feature: f,
                    sector: s,
                    cell: c,
                });
            }
        }
    }
    if net.joints.iter().all(|j| j.supported) {
        let hood = topo.neighbourhood(&net.seeds(topo), 3);
        let owned: BTreeSet<usize> = (0..owner.len()).filter(|&e| owner[e].is_some()).collect();
        if hood != owned {
            let odd = hood.symmetric_difference(&owned).next().copied().unwrap_or(0);
            return Err(overlap(&format!(
                "sector regions do not tile the 3-neighbourhood of the extraordinary features (element {odd})"
            )));
        }
    }
    net.owner = owner;
    Ok(())
}
