use crate::bernstein::{quad, tensor_quad_jets};
use crate::error::{Error, Result};
use crate::extraction::{reference_jets, ExtractionOperator, GeometryMap};
use crate::jet::{tensor_jet, InverseMap, Jet};
use crate::mesh::{classify_extraordinary, MeshTopology};

use super::{
    build_weights_2d, build_weights_3d, combine, BlendWeight, Blending, ElementWeight, JointWeights, PrismWeights,
    WeightField,
};

/// Tensor quadratic Bernstein basis on a physical axis-aligned box.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinPatch {
    pub dim: usize,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    /// Global index of the first of the `3^dim` functions.
    pub first: usize,
}

impl BernsteinPatch {
    /// Padded bounding box of the Bézier points of `elements`.
    pub fn enclosing(geo: &GeometryMap, elements: &[usize], first: usize) -> Self {
        let dim = geo.dim;
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &e in elements {
            for p in &geo.bezier[e] {
                for d in 0..dim {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
        }
        for d in 0..3 {
            if d >= dim || !lo[d].is_finite() {
                lo[d] = 0.0;
                hi[d] = 0.0;
                continue;
            }
            let pad = 0.1 * (hi[d] - lo[d]);
            lo[d] -= pad;
            hi[d] += pad;
        }
        BernsteinPatch { dim, lo, hi, first }
    }

    pub fn len(&self) -> usize {
        3usize.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Greville nodes of the Bernstein functions (for linear reproduction).
    pub fn nodes(&self) -> Vec<[f64; 3]> {
        (0..self.len())
            .map(|j| {
                let mut p = [0.0; 3];
                let mut r = j;
                for d in 0..self.dim {
                    p[d] = self.lo[d] + 0.5 * (r % 3) as f64 * (self.hi[d] - self.lo[d]);
                    r /= 3;
                }
                p
            })
            .collect()
    }

    /// Physical jets of all patch functions at `x`, first axis fastest.
    pub fn eval(&self, x: [f64; 3], order: usize) -> Vec<Jet> {
        let tabs: Vec<([[f64; 3]; 4], f64)> = (0..self.dim)
            .map(|d| {
                let w = self.hi[d] - self.lo[d];
                (quad((x[d] - self.lo[d]) / w), 1.0 / w)
            })
            .collect();
        (0..self.len())
            .map(|j| {
                let mut axes = [[1.0, 0.0, 0.0, 0.0]; 3];
                let mut r = j;
                for (d, (tab, s)) in tabs.iter().enumerate() {
                    let a = r % 3;
                    r /= 3;
                    axes[d] = [tab[0][a], tab[1][a] * s, tab[2][a] * s * s, 0.0];
                }
                tensor_jet(self.dim, &axes, order)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionKind {
    /// w^B times the mixed B-spline of a control vertex.
    Mixed(usize),
    /// A blending weight times one function of its Bernstein patch.
    Bernstein { weight: usize, local: usize },
}

/// The SB-spline space `{w^B B_i} ∪ {w_k Q_{k,j}}` on one mesh.
#[derive(Debug, Clone)]
pub struct BlendedBasis {
    pub dim: usize,
    pub ext: ExtractionOperator,
    pub geo: GeometryMap,
    pub w_b: WeightField,
    pub weights: Vec<BlendWeight>,
    /// One patch per entry of `weights`.
    pub patches: Vec<BernsteinPatch>,
    pub prisms: Vec<PrismWeights>,
    pub joints: Vec<JointWeights>,
    /// Per element: (weight index, slot in that weight's coefficient list).
    element_weights: Vec<Vec<(usize, usize)>>,
    num_functions: usize,
}

impl BlendedBasis {
    pub fn new(ext: ExtractionOperator, geo: GeometryMap, blending: Blending) -> Result<Self> {
        let ne = ext.elements.len();
        let mut element_weights = vec![Vec::new(); ne];
        let mut patches = Vec::new();
        let mut next = ext.num_cvs();
        for (k, w) in blending.weights.iter().enumerate() {
            for (slot, &e) in w.elements.iter().enumerate() {
                if element_weights[e].iter().any(|&(k2, _)| k2 == k) {
                    return Err(Error::IndexClash(format!("weight {k} listed twice on element {e}")));
                }
                element_weights[e].push((k, slot));
            }
            let p = BernsteinPatch::enclosing(&geo, &w.elements, next);
            next += p.len();
            patches.push(p);
        }
        Ok(BlendedBasis {
            dim: ext.dim,
            w_b: blending.w_b,
            weights: blending.weights,
            patches,
            prisms: blending.prisms,
            joints: blending.joints,
            ext,
            geo,
            element_weights,
            num_functions: next,
        })
    }

    /// Plain mixed B-splines (w^B ≡ 1, no blending).
    pub fn unblended(ext: ExtractionOperator, geo: GeometryMap) -> Self {
        let w_b = WeightField {
            dim: ext.dim,
            elements: vec![ElementWeight::One; ext.elements.len()],
        };
        let blending = Blending {
            w_b,
            weights: Vec::new(),
            prisms: Vec::new(),
            joints: Vec::new(),
        };
        Self::new(ext, geo, blending).expect("no weights, no clashes")
    }

    pub fn len(&self) -> usize {
        self.num_functions
    }

    pub fn is_empty(&self) -> bool {
        self.num_functions == 0
    }

    pub fn num_elements(&self) -> usize {
        self.ext.elements.len()
    }

    pub fn num_mixed(&self) -> usize {
        self.ext.num_cvs()
    }

    pub fn kind(&self, i: usize) -> FunctionKind {
        if i < self.num_mixed() {
            return FunctionKind::Mixed(i);
        }
        let k = self.patches.partition_point(|p| p.first + p.len() <= i);
        FunctionKind::Bernstein {
            weight: k,
            local: i - self.patches[k].first,
        }
    }

    /// Point attached to function `i` (control vertex or Bernstein node);
    /// `Σ N_i L(node_i) = L` for every linear `L`.
    pub fn node(&self, i: usize) -> [f64; 3] {
        match self.kind(i) {
            FunctionKind::Mixed(cv) => self.geo.controls[cv],
            FunctionKind::Bernstein { weight, local } => self.patches[weight].nodes()[local],
        }
    }

    /// Global indices of the functions non-zero on element `e`, in the order
    /// returned by [`BlendedBasis::eval`].
    pub fn element_functions(&self, e: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if self.w_b.elements[e] != ElementWeight::Zero {
            out.extend(&self.ext.elements[e].cvs);
        }
        for &(k, _) in &self.element_weights[e] {
            let p = &self.patches[k];
            out.extend(p.first..p.first + p.len());
        }
        out
    }

    /// Blending weights active on element `e`.
    pub fn element_weights(&self, e: usize) -> impl Iterator<Item = (usize, &[f64])> + '_ {
        self.element_weights[e]
            .iter()
            .map(move |&(k, slot)| (k, self.weights[k].coeffs[slot].as_slice()))
    }

    pub fn inverse_map(&self, e: usize, q: &[Jet], order: usize) -> Result<InverseMap> {
        let x = self.geo.eval_with(e, q, order.max(1));
        InverseMap::new(&x, self.dim, order).map_err(|err| match err {
            Error::SingularJacobian { det, .. } => Error::SingularJacobian { element: e, det },
            other => other,
        })
    }

    /// SB-splines non-zero on element `e`, at `η`, with physical derivatives
    /// up to `order`.
    pub fn eval(&self, e: usize, eta: [f64; 3], order: usize) -> Result<(InverseMap, Vec<(usize, Jet)>)> {
        let (dim, o) = (self.dim, order);
        // The Jacobian is needed even for values.
        let q = tensor_quad_jets(dim, eta, o.max(1));
        let inv = self.inverse_map(e, &q, o)?;
        let mut out = Vec::new();
        match &self.w_b.elements[e] {
            ElementWeight::Zero => {}
            wb => {
                let mixed = reference_jets(&self.ext, e, &q, o);
                let cvs = &self.ext.elements[e].cvs;
                if let ElementWeight::Bernstein(c) = wb {
                    let w = inv.push(&combine(dim, c, &q, o));
                    out.extend(cvs.iter().zip(&mixed).map(|(&cv, b)| (cv, w.product(&inv.push(b), dim, o))));
                } else {
                    out.extend(cvs.iter().zip(&mixed).map(|(&cv, b)| (cv, inv.push(b))));
                }
            }
        }
        if !self.element_weights[e].is_empty() {
            let x = self.geo.point(e, eta);
            for &(k, _) in &self.element_weights[e] {
                let w = self.weights[k].eval(e, &q, &inv, x, o);
                let p = &self.patches[k];
                for (j, b) in p.eval(x, o).iter().enumerate() {
                    out.push((p.first + j, w.product(b, dim, o)));
                }
            }
        }
        Ok((inv, out))
    }

    /// Physical jet of w^B (`None`) or of a blending weight on element `e`.
    pub fn eval_weight(&self, weight: Option<usize>, e: usize, eta: [f64; 3], order: usize) -> Result<Jet> {
        let q = tensor_quad_jets(self.dim, eta, order.max(1));
        let inv = self.inverse_map(e, &q, order)?;
        Ok(match weight {
            None => inv.push(&self.w_b.eval_eta(e, &q, order)),
            Some(k) => self.weights[k].eval(e, &q, &inv, self.geo.point(e, eta), order),
        })
    }
}

/// Classifies the mesh, builds all weights and assembles the SB-spline space.
pub fn build_sb_basis(topo: &MeshTopology, ext: ExtractionOperator, geo: GeometryMap) -> Result<BlendedBasis> {
    let net = classify_extraordinary(topo)?;
    if net.is_empty() {
        return Ok(BlendedBasis::unblended(ext, geo));
    }
    let blending = if topo.dim() == 2 {
        build_weights_2d(topo, &net, &ext)?
    } else {
        build_weights_3d(topo, &net, &ext, &geo)?
    };
    BlendedBasis::new(ext, geo, blending)
}
