//! Partition-of-unity weight fields and the blended (SB-spline) basis.

mod basis;
pub mod blend2d;
pub mod blend3d;

use std::collections::BTreeSet;
use std::ops::Range;

pub use basis::{build_sb_basis, BernsteinPatch, BlendedBasis, FunctionKind};
pub use blend2d::build_weights_2d;
pub use blend3d::{build_weights_3d, eval_joint_weight, JointWeights, PrismWeights};

use crate::bernstein::{quad_coefficients, tensor_quad_jets};
use crate::extraction::{CvKind, ExtractionOperator};
use crate::jet::Jet;
use crate::mesh::{ChartCell, ExtraordinaryNetwork, MeshTopology};
use crate::univariate::{cardinal_quadratic, eval_basis_ders, KnotVector};

/// Weight restricted to one element.
#[derive(Debug, Clone, PartialEq)]
pub enum ElementWeight {
    Zero,
    One,
    /// Tensor Bernstein coefficients, first axis fastest.
    Bernstein(Vec<f64>),
}

impl ElementWeight {
    pub fn coefficients(&self, nbez: usize) -> Vec<f64> {
        match self {
            ElementWeight::Zero => vec![0.0; nbez],
            ElementWeight::One => vec![1.0; nbez],
            ElementWeight::Bernstein(c) => c.clone(),
        }
    }

    /// Collapses constant coefficient vectors.
    fn simplify(c: Vec<f64>) -> Self {
        if c.iter().all(|&x| x.abs() < 1e-15) {
            ElementWeight::Zero
        } else if c.iter().all(|&x| (x - 1.0).abs() < 1e-15) {
            ElementWeight::One
        } else {
            ElementWeight::Bernstein(c)
        }
    }
}

/// Element-local Bernstein representation of a weight function.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    pub dim: usize,
    pub elements: Vec<ElementWeight>,
}

impl WeightField {
    /// Jet in η on element `e`.
    pub fn eval_eta(&self, e: usize, q: &[Jet], order: usize) -> Jet {
        match &self.elements[e] {
            ElementWeight::Zero => Jet::default(),
            ElementWeight::One => Jet::constant(1.0),
            ElementWeight::Bernstein(c) => combine(self.dim, c, q, order),
        }
    }

    pub fn value(&self, e: usize, eta: [f64; 3]) -> f64 {
        let q = tensor_quad_jets(self.dim, eta, 0);
        self.eval_eta(e, &q, 0).v
    }
}

pub(crate) fn combine(dim: usize, c: &[f64], q: &[Jet], order: usize) -> Jet {
    let mut out = Jet::default();
    for (cj, qj) in c.iter().zip(q) {
        if *cj != 0.0 {
            out.axpy(*cj, qj, dim, order);
        }
    }
    out
}

/// Which feature a blending weight belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightLabel {
    /// w^Q of a 2D extraordinary vertex.
    Point(usize),
    PrismGroup { prism: usize, group: usize },
    Joint(usize),
}

/// Axial profile of a weight along an extraordinary-edge chain.
#[derive(Debug, Clone, PartialEq)]
pub enum AxialProfile {
    /// Sum of the axial B-splines `range` (w^II of one group).
    Group { knots: KnotVector, range: Range<usize> },
    /// The two joint-owned splines next to a chain end, flat at 1 up to
    /// distance 3 from the joint.
    JointEnd { at_start: bool },
}

/// Profile evaluated at a physical axial coordinate
/// `s(x) = offset + slope·x`, clamped to `[0, len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxialFactor {
    pub offset: f64,
    pub slope: [f64; 3],
    pub len: f64,
    pub profile: AxialProfile,
}

impl AxialFactor {
    pub fn coordinate(&self, x: [f64; 3]) -> f64 {
        self.offset + (0..3).map(|d| self.slope[d] * x[d]).sum::<f64>()
    }

    /// Value and derivatives d^k/ds^k, k ≤ 2.
    pub fn profile(&self, s: f64) -> [f64; 3] {
        let s = s.clamp(0.0, self.len);
        match &self.profile {
            AxialProfile::Group { knots, range } => {
                let (first, ders) = eval_basis_ders(knots, s).expect("clamped to the knot span");
                let mut out = [0.0; 3];
                for (j, d) in ders.iter().enumerate() {
                    if range.contains(&(first + j)) {
                        for k in 0..3 {
                            out[k] += d[k];
                        }
                    }
                }
                out
            }
            AxialProfile::JointEnd { at_start } => {
                let (r, sign) = if *at_start { (s, 1.0) } else { (self.len - s, -1.0) };
                if r <= 3.0 {
                    return [1.0, 0.0, 0.0];
                }
                let (a, b) = (cardinal_quadratic(r - 1.0), cardinal_quadratic(r - 2.0));
                [a[0] + b[0], sign * (a[1] + b[1]), a[2] + b[2]]
            }
        }
    }

    /// Physical jet at `x`.
    pub fn eval(&self, x: [f64; 3], dim: usize, order: usize) -> Jet {
        let s = self.coordinate(x);
        let [v, d1, d2] = self.profile(s);
        let mut j = Jet::constant(v);
        if order == 0 || s <= 0.0 || s >= self.len {
            return j;
        }
        for a in 0..dim {
            j.g[a] = d1 * self.slope[a];
            if order >= 2 {
                for b in 0..dim {
                    j.h[a][b] = d2 * self.slope[a] * self.slope[b];
                }
            }
        }
        j
    }
}

/// A locally supported blending weight (w^Q, w^P or w^J): per element a
/// tensor Bernstein polynomial in η, optionally times an axial factor.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendWeight {
    pub label: WeightLabel,
    pub elements: Vec<usize>,
    pub coeffs: Vec<Vec<f64>>,
    /// Per element, an index into `factors`.
    pub factor_of: Vec<Option<usize>>,
    pub factors: Vec<AxialFactor>,
}

impl BlendWeight {
    pub(crate) fn from_map(label: WeightLabel, map: std::collections::BTreeMap<usize, Vec<f64>>) -> Self {
        let map = map.into_iter().map(|(e, c)| (e, (c, None))).collect();
        Self::with_factors(label, map, Vec::new())
    }

    pub(crate) fn with_factors(
        label: WeightLabel,
        map: std::collections::BTreeMap<usize, (Vec<f64>, Option<usize>)>,
        factors: Vec<AxialFactor>,
    ) -> Self {
        let mut w = BlendWeight {
            label,
            elements: Vec::new(),
            coeffs: Vec::new(),
            factor_of: Vec::new(),
            factors,
        };
        for (e, (c, f)) in map {
            if c.iter().any(|&x| x.abs() > 1e-15) {
                w.elements.push(e);
                w.coeffs.push(c);
                w.factor_of.push(f);
            }
        }
        w
    }

    pub fn local(&self, e: usize) -> Option<&[f64]> {
        self.elements.binary_search(&e).ok().map(|i| self.coeffs[i].as_slice())
    }

    /// Axial factor on element `e`, if any.
    pub fn factor(&self, e: usize) -> Option<&AxialFactor> {
        let i = self.elements.binary_search(&e).ok()?;
        self.factor_of[i].map(|f| &self.factors[f])
    }

    /// Value at `η` on element `e`, whose physical point is `x`.
    pub fn value(&self, e: usize, eta: [f64; 3], x: [f64; 3]) -> f64 {
        let Some(i) = self.elements.binary_search(&e).ok() else {
            return 0.0;
        };
        let dim = if self.coeffs[i].len() == 27 { 3 } else { 2 };
        let q = tensor_quad_jets(dim, eta, 0);
        let v = combine(dim, &self.coeffs[i], &q, 0).v;
        match self.factor_of[i] {
            Some(f) => v * self.factors[f].eval(x, dim, 0).v,
            None => v,
        }
    }

    /// Physical jet on element `e` given the reference jets `q` at `η`, the
    /// inverse map and the physical point.
    pub(crate) fn eval(&self, e: usize, q: &[Jet], inv: &crate::jet::InverseMap, x: [f64; 3], order: usize) -> Jet {
        let dim = inv.dim;
        let Some(i) = self.elements.binary_search(&e).ok() else {
            return Jet::default();
        };
        let w = inv.push(&combine(dim, &self.coeffs[i], q, order));
        match self.factor_of[i] {
            Some(f) => w.product(&self.factors[f].eval(x, dim, order), dim, order),
            None => w,
        }
    }
}

/// All weight functions of a mesh: w^B plus the local blending weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Blending {
    pub w_b: WeightField,
    pub weights: Vec<BlendWeight>,
    pub prisms: Vec<PrismWeights>,
    pub joints: Vec<JointWeights>,
}

/// Bernstein coefficients of a function that is quadratic per axis on the
/// unit cell, from its values at the nodes {0, 1/2, 1}.
pub(crate) fn collocate(dim: usize, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
    let n = 3usize.pow(dim as u32);
    let mut c: Vec<f64> = (0..n)
        .map(|j| {
            let mut eta = [0.0; 3];
            let mut r = j;
            for x in eta.iter_mut().take(dim) {
                *x = 0.5 * (r % 3) as f64;
                r /= 3;
            }
            f(eta)
        })
        .collect();
    let mut stride = 1;
    for _ in 0..dim {
        for base in 0..n {
            if (base / stride) % 3 != 0 {
                continue;
            }
            let [a, b, d] = quad_coefficients(c[base], c[base + stride], c[base + 2 * stride]);
            c[base] = a;
            c[base + stride] = b;
            c[base + 2 * stride] = d;
        }
        stride *= 3;
    }
    c
}

/// Sector coordinates of an element point: the cell offset plus the local
/// position, in element units.
pub fn sector_position(cell: &ChartCell, eta: [f64; 3]) -> [f64; 3] {
    let t = cell.map.to_local(eta);
    [
        cell.offset[0] as f64 + t[0],
        cell.offset[1] as f64 + t[1],
        cell.offset[2] as f64 + t[2],
    ]
}

/// Control vertices excluded from w^B: those of elements in the
/// 2-neighbourhood of the extraordinary features, and the boundary control
/// vertices attached to such elements.
pub fn excluded_cvs(topo: &MeshTopology, net: &ExtraordinaryNetwork, ext: &ExtractionOperator) -> Vec<bool> {
    let hood: BTreeSet<usize> = topo.neighbourhood(&net.seeds(topo), 2);
    let hit = |els: &[usize]| els.iter().any(|e| hood.contains(e));
    ext.cv_kinds
        .iter()
        .map(|k| match *k {
            CvKind::Element(e) => hood.contains(&e),
            CvKind::BoundaryFacet(f) => hit(topo.facet_elements(f)),
            CvKind::FeatureEdge(ed) => hit(&topo.edge_elements[ed]),
            CvKind::Corner(v) => hit(&topo.vertex_elements[v]),
        })
        .collect()
}

/// w^B as the exact sum of the retained mixed B-splines.
pub fn retained_weight(ext: &ExtractionOperator, excluded: &[bool]) -> WeightField {
    let nbez = ext.num_bezier();
    let elements = ext
        .elements
        .iter()
        .map(|el| {
            if el.cvs.iter().all(|&cv| !excluded[cv]) {
                return ElementWeight::One;
            }
            let c = (0..nbez)
                .map(|j| {
                    (0..el.cvs.len())
                        .filter(|&col| !excluded[el.cvs[col]])
                        .map(|col| el.entry(j, col))
                        .sum()
                })
                .collect();
            ElementWeight::simplify(c)
        })
        .collect();
    WeightField {
        dim: ext.dim,
        elements,
    }
}
