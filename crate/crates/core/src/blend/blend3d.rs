//! Weights around extraordinary-edge networks: prism weights
//! wI⊗wI⊗w^II_ℓ and joint weights, which together sum to 1 − w^B.

use std::collections::BTreeMap;
use std::ops::Range;

use super::blend2d::w1;
use super::{
    collocate, excluded_cvs, retained_weight, sector_position, AxialFactor, AxialProfile, BlendWeight, Blending,
    WeightLabel,
};
use crate::error::{Error, Result};
use crate::extraction::{ExtractionOperator, GeometryMap};
use crate::linalg::{dot, norm, scale, sub};
use crate::mesh::{ChartCell, ExtraordinaryNetwork, MeshTopology, Prism, PrismEnd};
use crate::univariate::{eval_bsplines, KnotVector};

/// Axial splines of one prism and their grouping into w^II functions.
#[derive(Debug, Clone, PartialEq)]
pub struct PrismWeights {
    pub prism: usize,
    /// Open uniform quadratic knots over the chain, one element per edge.
    pub axial: KnotVector,
    /// Consecutive axial basis indices summed into each group function.
    pub groups: Vec<Range<usize>>,
    /// Indices into `Blending::weights`, one per group.
    pub weights: Vec<usize>,
}

impl PrismWeights {
    /// w^II_ℓ at axial position `s` (element units from the chain start).
    pub fn group_value(&self, group: usize, s: f64) -> f64 {
        let r = &self.groups[group];
        eval_bsplines(&self.axial, s, 0)
            .map(|v| v.iter().filter(|(i, _)| r.contains(i)).map(|x| x.1).sum())
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointWeights {
    pub joint: usize,
    /// Index into `Blending::weights`.
    pub weight: usize,
}

/// Joint weight in joint-sector coordinates ξ ∈ [0,1]³:
/// `1 − (ab + bc + ca − 2abc)` with `a, b, c = wIII(ξi)`.
pub fn eval_joint_weight(xi: [f64; 3]) -> f64 {
    let [a, b, c] = xi.map(|x| 1.0 - w1(x));
    1.0 - (a * b + b * c + c * a - 2.0 * a * b * c)
}

/// Axial basis ranges of a chain with `n` elements: the w^II groups; the
/// two splines next to a joint end belong to the joint.
pub fn axial_groups(n: usize, start: PrismEnd, end: PrismEnd) -> Vec<Range<usize>> {
    let lo = if matches!(start, PrismEnd::Joint(_)) { 5 } else { 0 };
    let hi = if matches!(end, PrismEnd::Joint(_)) { n.saturating_sub(3) } else { n + 2 };
    let count = hi.saturating_sub(lo);
    let ng = (count / 4).max(1);
    (0..ng)
        .map(|l| lo + 4 * l..if l + 1 == ng { hi } else { lo + 4 * l + 4 })
        .collect()
}

/// Chain position of every Bézier point of a prism cell.
fn bezier_positions<'a>(
    geo: &'a GeometryMap,
    cell: &'a ChartCell,
    axial_offset: usize,
) -> impl Iterator<Item = (f64, [f64; 3])> + 'a {
    geo.bezier[cell.element].iter().enumerate().map(move |(j, &x)| {
        let eta = [0.5 * (j % 3) as f64, 0.5 * (j / 3 % 3) as f64, 0.5 * (j / 9) as f64];
        (sector_position(cell, eta)[2] + axial_offset as f64, x)
    })
}

/// Affine axial coordinate `s(x)` of a prism: the chain direction scaled so
/// that s ≤ 3 on a joint interface at the start, s ≥ n − 3 on one at the
/// end, and s matches the chain position on boundary end faces on average.
/// Being a function of x, it stays C1 across the faces that contain the
/// extraordinary edges, where the geometry map is only C0.
fn axial_coordinate(topo: &MeshTopology, geo: &GeometryMap, p: &Prism) -> Result<(f64, [f64; 3])> {
    let n = p.edges.len() as f64;
    let first = topo.mesh.vertices[p.vertices[0]];
    let last = topo.mesh.vertices[*p.vertices.last().expect("chain vertices")];
    let dir = scale(sub(last, first), 1.0 / norm(sub(last, first)));
    let face = |chain: f64| -> Vec<f64> {
        p.sectors
            .iter()
            .flat_map(|sector| &sector.cells)
            .flat_map(|cell| bezier_positions(geo, cell, p.axial_offset))
            .filter(|(pos, _)| (pos - chain).abs() < 1e-9)
            .map(|(_, x)| dot(dir, x))
            .collect()
    };
    let mean = |v: Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let (a, sa) = match p.start {
        PrismEnd::Joint(_) => (face(3.0).into_iter().fold(f64::NEG_INFINITY, f64::max), 3.0),
        PrismEnd::Boundary => (mean(face(0.0)), 0.0),
    };
    let (b, sb) = match p.end {
        PrismEnd::Joint(_) => (face(n - 3.0).into_iter().fold(f64::INFINITY, f64::min), n - 3.0),
        PrismEnd::Boundary => (mean(face(n)), n),
    };
    if !(b - a > 1e-12 * (1.0 + a.abs())) || sb <= sa {
        return Err(Error::InvalidArgument(format!(
            "prism along vertices {:?} is too short or too curved for an axial coordinate",
            (p.vertices[0], p.vertices.last())
        )));
    }
    let k = (sb - sa) / (b - a);
    Ok((sa - k * a, dir.map(|d| d * k)))
}

/// Range of `s` over a cell (exact bound: s is affine and the geometry lies
/// in the convex hull of the Bézier points).
fn cell_range(geo: &GeometryMap, e: usize, f: &AxialFactor) -> (f64, f64) {
    geo.bezier[e]
        .iter()
        .map(|&x| f.coordinate(x).clamp(0.0, f.len))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s), hi.max(s)))
}

pub fn build_weights_3d(
    topo: &MeshTopology,
    net: &ExtraordinaryNetwork,
    ext: &ExtractionOperator,
    geo: &GeometryMap,
) -> Result<Blending> {
    if net.dim != 3 || ext.dim != 3 {
        return Err(Error::InvalidArgument("build_weights_3d needs a hexahedral mesh".into()));
    }
    if let Some(j) = net.joints.iter().find(|j| !j.supported) {
        let vals: Vec<usize> = j.prisms.iter().map(|&(p, _)| net.prisms[p].valence).collect();
        return Err(Error::UnsupportedJointValence(format!(
            "joint at vertex {} joins prisms of edge valences {vals:?}",
            j.vertex
        )));
    }
    let excluded = excluded_cvs(topo, net, ext);
    let w_b = retained_weight(ext, &excluded);
    let cross = |cell: &ChartCell| {
        collocate(3, |eta| {
            let s = sector_position(cell, eta);
            w1(s[0] / 3.0) * w1(s[1] / 3.0)
        })
    };
    let mut weights = Vec::new();
    let mut prisms = Vec::new();
    let mut coords = Vec::new();
    for (k, p) in net.prisms.iter().enumerate() {
        let n = p.edges.len();
        let axial = KnotVector::open_uniform(2, n, 0.0, n as f64)?;
        let groups = axial_groups(n, p.start, p.end);
        let (offset, slope) = axial_coordinate(topo, geo, p)?;
        coords.push((offset, slope));
        let mut pw = PrismWeights {
            prism: k,
            axial: axial.clone(),
            groups,
            weights: Vec::new(),
        };
        for (g, range) in pw.groups.clone().into_iter().enumerate() {
            let (lo, hi) = (range.start.saturating_sub(2) as f64, range.end.min(n) as f64);
            let factor = AxialFactor {
                offset,
                slope,
                len: n as f64,
                profile: AxialProfile::Group {
                    knots: axial.clone(),
                    range,
                },
            };
            let mut map = BTreeMap::new();
            for cell in p.sectors.iter().flat_map(|sector| &sector.cells) {
                let (smin, smax) = cell_range(geo, cell.element, &factor);
                if smax > lo && smin < hi {
                    map.insert(cell.element, (cross(cell), Some(0)));
                }
            }
            pw.weights.push(weights.len());
            weights.push(BlendWeight::with_factors(
                WeightLabel::PrismGroup { prism: k, group: g },
                map,
                vec![factor],
            ));
        }
        prisms.push(pw);
    }
    let mut joints = Vec::new();
    for (ji, j) in net.joints.iter().enumerate() {
        let mut map = BTreeMap::new();
        for sector in &j.sectors {
            for cell in &sector.cells {
                let c = collocate(3, |eta| {
                    let s = sector_position(cell, eta);
                    eval_joint_weight([s[0] / 3.0, s[1] / 3.0, s[2] / 3.0])
                });
                map.insert(cell.element, (c, None));
            }
        }
        // Extension into the attached prisms up to distance 5 from the joint.
        let mut factors = Vec::new();
        for &(pk, at_start) in &j.prisms {
            let p = &net.prisms[pk];
            let n = p.edges.len() as f64;
            let (offset, slope) = coords[pk];
            let factor = AxialFactor {
                offset,
                slope,
                len: n,
                profile: AxialProfile::JointEnd { at_start },
            };
            for cell in p.sectors.iter().flat_map(|sector| &sector.cells) {
                let (smin, smax) = cell_range(geo, cell.element, &factor);
                let near = if at_start { smin < 5.0 } else { smax > n - 5.0 };
                if near {
                    map.insert(cell.element, (cross(cell), Some(factors.len())));
                }
            }
            factors.push(factor);
        }
        joints.push(JointWeights {
            joint: ji,
            weight: weights.len(),
        });
        weights.push(BlendWeight::with_factors(WeightLabel::Joint(ji), map, factors));
    }
    Ok(Blending {
        w_b,
        weights,
        prisms,
        joints,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blend::sector_position;
    use crate::extraction::build_extraction;
    use crate::mesh::{build_topology, classify_extraordinary, generate_mesh, FeatureKind, ShapeSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn weights(spec: ShapeSpec) -> (MeshTopology, ExtraordinaryNetwork, GeometryMap, Blending) {
        let topo = build_topology(&generate_mesh(&spec).unwrap()).unwrap();
        let net = classify_extraordinary(&topo).unwrap();
        let ext = build_extraction(&topo).unwrap();
        let geo = GeometryMap::from_extraction(&ext);
        let b = build_weights_3d(&topo, &net, &ext, &geo).unwrap();
        (topo, net, geo, b)
    }

    /// w^B plus all blending weights is one, at a lattice of points in
    /// every element; every weight lies in [0, 1].
    fn assert_decomposition(topo: &MeshTopology, geo: &GeometryMap, b: &Blending) {
        let nodes = [0.0, 0.3, 0.5, 0.85, 1.0];
        for e in 0..topo.num_elements() {
            for i in 0..125 {
                let eta = [nodes[i % 5], nodes[i / 5 % 5], nodes[i / 25]];
                let x = geo.point(e, eta);
                let mut sum = b.w_b.value(e, eta);
                for w in &b.weights {
                    let v = w.value(e, eta, x);
                    assert!((-1e-14..=1.0 + 1e-14).contains(&v));
                    sum += v;
                }
                assert!((sum - 1.0).abs() < 1e-12, "element {e} at {eta:?}: {sum}");
            }
        }
    }

    #[test]
    fn joint_weight_values() {
        assert!((eval_joint_weight([2.0 / 3.0; 3]) - 0.5).abs() < 1e-15);
        assert_eq!(eval_joint_weight([0.0; 3]), 1.0);
        assert!(eval_joint_weight([1.0; 3]).abs() < 1e-15);
        assert_eq!(eval_joint_weight([1.0, 0.0, 0.0]), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (y, z) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            assert!((eval_joint_weight([1.0, y, z]) - w1(y) * w1(z)).abs() < 1e-14);
        }
    }

    #[test]
    fn group_layout() {
        let b = PrismEnd::Boundary;
        assert_eq!(axial_groups(10, b, b), vec![0..4, 4..8, 8..12]);
        assert_eq!(axial_groups(11, b, b), vec![0..4, 4..8, 8..13]);
        assert_eq!(axial_groups(9, PrismEnd::Joint(0), PrismEnd::Joint(1)), vec![5..6]);
        assert_eq!(axial_groups(5, PrismEnd::Joint(0), b), vec![5..7]);
    }

    #[test]
    fn triangular_prism_groups() {
        let (topo, _, geo, b) = weights(ShapeSpec::TriPrism { layers: 10 });
        assert_eq!(b.prisms.len(), 1);
        let p = &b.prisms[0];
        assert_eq!(p.groups, vec![0..4, 4..8, 8..12]);
        // Group 2 is 1 at its middle; the groups sum to 1 along the axis.
        assert!((p.group_value(1, 5.0) - 1.0).abs() < 1e-14);
        for i in 0..=200 {
            let s = 10.0 * i as f64 / 200.0;
            let sum: f64 = (0..3).map(|g| p.group_value(g, s)).sum();
            assert!((sum - 1.0).abs() < 1e-13);
        }
        assert_decomposition(&topo, &geo, &b);
    }

    #[test]
    fn ball_decomposition_and_joint_identity() {
        let spec = ShapeSpec::Ball {
            radius: 2.55,
            cells: 9,
            layers: 5,
        };
        let (topo, net, geo, b) = weights(spec);
        assert_eq!(b.weights.len(), 20 + 8);
        assert_decomposition(&topo, &geo, &b);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let joint_cells: Vec<usize> = (0..topo.num_elements())
            .filter(|&e| matches!(net.owner[e], Some(o) if matches!(o.feature, FeatureKind::Joint(_))))
            .collect();
        for _ in 0..1000 {
            let e = joint_cells[rng.gen_range(0..joint_cells.len())];
            let eta = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
            let (f, cell) = net.chart_cell(e).unwrap();
            let s = sector_position(cell, eta);
            let [a, bb, c] = s.map(|x| w1(x / 3.0));
            let expect = 1.0 - (a * bb + bb * c + c * a) + 2.0 * a * bb * c;
            assert!((b.w_b.value(e, eta) - expect).abs() < 1e-12);
            let FeatureKind::Joint(j) = f else { unreachable!() };
            let wj = &b.weights[b.joints[j].weight];
            let q = crate::bernstein::tensor_quad_jets(3, eta, 0);
            let v: f64 = wj.local(e).unwrap().iter().zip(&q).map(|(x, y)| x * y.v).sum();
            assert!((v + b.w_b.value(e, eta) - 1.0).abs() < 1e-12);
        }
    }
}
