//! Weights around 2D extraordinary vertices: w^Q = wI(ξ1)·wI(ξ2) per sector.

use std::collections::BTreeMap;

use super::{collocate, excluded_cvs, retained_weight, sector_position, BlendWeight, Blending, WeightLabel};
use crate::error::{Error, Result};
use crate::extraction::ExtractionOperator;
use crate::mesh::{ExtraordinaryNetwork, MeshTopology};
use crate::univariate::{ramp, RampKind};

pub(crate) fn w1(x: f64) -> f64 {
    ramp(x, RampKind::WI)[0]
}

pub fn build_weights_2d(
    topo: &MeshTopology,
    net: &ExtraordinaryNetwork,
    ext: &ExtractionOperator,
) -> Result<Blending> {
    if net.dim != 2 || ext.dim != 2 {
        return Err(Error::InvalidArgument("build_weights_2d needs a quadrilateral mesh".into()));
    }
    let excluded = excluded_cvs(topo, net, ext);
    let w_b = retained_weight(ext, &excluded);
    let weights = net
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut map = BTreeMap::new();
            for sector in &p.sectors {
                for cell in &sector.cells {
                    let c = collocate(2, |eta| {
                        let s = sector_position(cell, eta);
                        w1(s[0] / 3.0) * w1(s[1] / 3.0)
                    });
                    map.insert(cell.element, c);
                }
            }
            BlendWeight::from_map(WeightLabel::Point(i), map)
        })
        .collect();
    Ok(Blending {
        w_b,
        weights,
        prisms: Vec::new(),
        joints: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blend::ElementWeight;
    use crate::extraction::build_extraction;
    use crate::mesh::{build_topology, classify_extraordinary, generate_mesh, ShapeSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn weights(spec: ShapeSpec) -> (MeshTopology, ExtraordinaryNetwork, Blending) {
        let topo = build_topology(&generate_mesh(&spec).unwrap()).unwrap();
        let net = classify_extraordinary(&topo).unwrap();
        let ext = build_extraction(&topo).unwrap();
        let b = build_weights_2d(&topo, &net, &ext).unwrap();
        (topo, net, b)
    }

    #[test]
    fn ramp_values() {
        assert_eq!(w1(0.0), 1.0);
        assert!((w1(2.0 / 3.0) - 0.5).abs() < 1e-15);
        assert_eq!(w1(1.0), 0.0);
    }

    #[test]
    fn retained_sum_matches_sector_formula() {
        for v in [3, 5, 6] {
            let (topo, net, b) = weights(ShapeSpec::VGon { valence: v });
            let mut rng = ChaCha8Rng::seed_from_u64(v as u64);
            for _ in 0..500 {
                let e = rng.gen_range(0..topo.num_elements());
                let eta = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), 0.0];
                let (_, cell) = net.chart_cell(e).unwrap();
                let s = sector_position(cell, eta);
                let expect = 1.0 - w1(s[0] / 3.0) * w1(s[1] / 3.0);
                assert!((b.w_b.value(e, eta) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weights_at_landmarks_and_support() {
        let (topo, net, b) = weights(ShapeSpec::Square { subdiv: 6 });
        assert_eq!(b.weights.len(), 8);
        let p = &net.points[0];
        let hood = topo.neighbourhood(&[p.vertex], 3);
        let w = &b.weights[0];
        assert_eq!(w.elements, hood.iter().copied().collect::<Vec<_>>());
        // At the extraordinary vertex w^Q = 1, w^B = 0.
        let cell = p.sectors[0].cell(0, 0, 0);
        let eta = cell.map.to_eta([0.0; 3]);
        assert!(b.w_b.value(cell.element, eta).abs() < 1e-15);
        // At ξ = (2/3, 2/3): w^B = 0.75.
        let cell = p.sectors[1].cell(2, 2, 0);
        let eta = cell.map.to_eta([0.0; 3]);
        assert!((b.w_b.value(cell.element, eta) - 0.75).abs() < 1e-14);
        // w^B is one outside every blending region.
        let owned = (0..topo.num_elements()).filter(|&e| net.owner[e].is_none());
        for e in owned {
            assert_eq!(b.w_b.elements[e], ElementWeight::One);
        }
    }
}
