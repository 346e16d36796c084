//! Quad and hex meshes: data model, topology, extraordinary-feature
//! classification, procedural generators and JSON file I/O.

mod classify;
mod generate;
mod io;
mod topology;

pub use classify::{
    classify_extraordinary, AxisMap, ChartCell, ExtraordinaryNetwork, ExtraordinaryPoint,
    FeatureKind, Joint, Owner, Prism, PrismEnd, SectorChart,
};
pub use generate::{generate_mesh, structured_grid, ShapeSpec};
pub use io::{mesh_from_json, mesh_to_json, read_mesh, write_mesh};
pub use topology::{build_topology, local_edges, local_facet_corners, MeshTopology};

use crate::error::{Error, Result};

/// Reference coordinates of the quad corners, counter-clockwise.
pub const QUAD_CORNERS: [[u8; 3]; 4] = [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]];

/// Reference coordinates of the hex corners in VTK hexahedron order.
pub const HEX_CORNERS: [[u8; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

/// Reference corner coordinates for elements of the given dimension.
pub fn reference_corners(dim: usize) -> &'static [[u8; 3]] {
    if dim == 2 {
        &QUAD_CORNERS
    } else {
        &HEX_CORNERS
    }
}

/// Local corner index of the reference corner `c`.
pub fn corner_index(dim: usize, c: [u8; 3]) -> usize {
    reference_corners(dim)
        .iter()
        .position(|k| k[..dim] == c[..dim])
        .expect("corner coordinates must be 0 or 1")
}

/// An unstructured quadrilateral (dim 2) or hexahedral (dim 3) mesh.
///
/// Vertices always carry three coordinates; the third is zero in 2D.
#[derive(Debug, Clone, PartialEq)]
pub struct UnstructuredMesh {
    pub dim: usize,
    pub vertices: Vec<[f64; 3]>,
    pub elements: Vec<Vec<usize>>,
}

impl UnstructuredMesh {
    pub fn new(dim: usize, vertices: Vec<[f64; 3]>, elements: Vec<Vec<usize>>) -> Result<Self> {
        let mesh = Self {
            dim,
            vertices,
            elements,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn corners_per_element(&self) -> usize {
        1 << self.dim
    }

    /// Checks indices, duplicates and orientation.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::InvalidMesh(format!("dimension {} not supported", self.dim)));
        }
        let nc = self.corners_per_element();
        for (e, elem) in self.elements.iter().enumerate() {
            if elem.len() != nc {
                return Err(Error::InvalidMesh(format!(
                    "element {e} has {} vertices, expected {nc}",
                    elem.len()
                )));
            }
            for &v in elem {
                if v >= self.vertices.len() {
                    return Err(Error::InvalidIndex {
                        element: e,
                        vertex: v,
                        count: self.vertices.len(),
                    });
                }
            }
            for i in 0..nc {
                for j in i + 1..nc {
                    if elem[i] == elem[j] {
                        return Err(Error::InvalidMesh(format!(
                            "element {e} repeats vertex {}",
                            elem[i]
                        )));
                    }
                }
            }
            let det = self.centre_jacobian(e);
            if det <= 0.0 {
                return Err(Error::InvalidMesh(format!(
                    "element {e} is inverted or degenerate (centre Jacobian {det:e})"
                )));
            }
        }
        Ok(())
    }

    /// Determinant of the multilinear vertex map at the element centre.
    pub fn centre_jacobian(&self, e: usize) -> f64 {
        let corners = reference_corners(self.dim);
        let mut jac = [[0.0; 3]; 3];
        let n = corners.len() as f64 / 2.0;
        for (k, c) in corners.iter().enumerate() {
            let x = self.vertices[self.elements[e][k]];
            for d in 0..self.dim {
                let s = if c[d] == 1 { 1.0 } else { -1.0 };
                for i in 0..self.dim {
                    jac[i][d] += s * x[i] / n;
                }
            }
        }
        if self.dim == 2 {
            jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0]
        } else {
            crate::linalg::det3(&jac)
        }
    }

    pub fn centroid(&self, e: usize) -> [f64; 3] {
        centroid_of(&self.vertices, &self.elements[e])
    }
}

pub(crate) fn centroid_of(vertices: &[[f64; 3]], ids: &[usize]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for &v in ids {
        for d in 0..3 {
            c[d] += vertices[v][d];
        }
    }
    let n = ids.len() as f64;
    c.map(|x| x / n)
}
