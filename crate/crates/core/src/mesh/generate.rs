use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::UnstructuredMesh;
use crate::error::{Error, Result};
use crate::linalg::{lerp, norm, scale};

/// Procedural test meshes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    /// Unit square with eight extraordinary vertices (valences 3 and 5); each
    /// of the 4×5 coarse blocks is split `subdiv`×`subdiv`.
    Square { subdiv: usize },
    /// Regular v-gon of unit circumradius with one extraordinary vertex at the
    /// origin; each of the v sectors is a 3×3 block.
    #[serde(rename = "vgon")]
    VGon { valence: usize },
    /// `VGon { valence: 3 }` extruded along z in `layers` element layers.
    TriPrism { layers: usize },
    /// Seven-block polycube ball: a cube of `cells`³ hexes and six face
    /// blocks of `layers` radial layers reaching the sphere of `radius`.
    Ball {
        radius: f64,
        cells: usize,
        layers: usize,
    },
}

pub fn generate_mesh(spec: &ShapeSpec) -> Result<UnstructuredMesh> {
    match *spec {
        ShapeSpec::Square { subdiv } if subdiv >= 1 => square(subdiv),
        ShapeSpec::VGon { valence } if (3..=8).contains(&valence) && valence != 4 => vgon(valence),
        ShapeSpec::TriPrism { layers } if layers >= 1 => tri_prism(layers),
        ShapeSpec::Ball {
            radius,
            cells,
            layers,
        } if radius > 0.0 && cells >= 1 && layers >= 1 => ball(radius, cells, layers),
        other => Err(Error::UnsupportedShape(format!("{other:?}"))),
    }
}

/// Axis-aligned structured grid of `n[d]` elements per direction on the box
/// `[0, size[d]]`.
pub fn structured_grid(dim: usize, n: [usize; 3], size: [f64; 3]) -> Result<UnstructuredMesh> {
    let nz = if dim == 3 { n[2] } else { 0 };
    let id = |i: usize, j: usize, k: usize| (k * (n[1] + 1) + j) * (n[0] + 1) + i;
    let mut vertices = Vec::new();
    for k in 0..=nz {
        for j in 0..=n[1] {
            for i in 0..=n[0] {
                let z = if dim == 3 { size[2] * k as f64 / n[2] as f64 } else { 0.0 };
                vertices.push([size[0] * i as f64 / n[0] as f64, size[1] * j as f64 / n[1] as f64, z]);
            }
        }
    }
    let mut elements = Vec::new();
    for k in 0..nz.max(1) {
        for j in 0..n[1] {
            for i in 0..n[0] {
                let quad = |k: usize| vec![id(i, j, k), id(i + 1, j, k), id(i + 1, j + 1, k), id(i, j + 1, k)];
                let mut e = quad(k);
                if dim == 3 {
                    e.extend(quad(k + 1));
                }
                elements.push(e);
            }
        }
    }
    UnstructuredMesh::new(dim, vertices, elements)
}

/// Splits each quad `k`×`k` by bilinear interpolation, sharing edge points.
fn subdivide_quads(vertices: &[[f64; 3]], quads: &[[usize; 4]], k: usize) -> Result<UnstructuredMesh> {
    let mut out: Vec<[f64; 3]> = vertices.to_vec();
    let mut edge_points: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    let mut elements = Vec::new();
    for q in quads {
        let x: Vec<[f64; 3]> = q.iter().map(|&v| vertices[v]).collect();
        let at = |s: f64, t: f64| lerp(lerp(x[0], x[1], s), lerp(x[3], x[2], s), t);
        let mut grid = vec![vec![usize::MAX; k + 1]; k + 1];
        grid[0][0] = q[0];
        grid[k][0] = q[1];
        grid[k][k] = q[2];
        grid[0][k] = q[3];
        // Edges as (corner a, corner b, lattice start, lattice step).
        let sides: [(usize, usize, (usize, usize), (isize, isize)); 4] = [
            (0, 1, (0, 0), (1, 0)),
            (1, 2, (k, 0), (0, 1)),
            (3, 2, (0, k), (1, 0)),
            (0, 3, (0, 0), (0, 1)),
        ];
        for &(a, b, start, dir) in &sides {
            let (va, vb) = (q[a], q[b]);
            let key = (va.min(vb), va.max(vb));
            let pts = edge_points.entry(key).or_insert_with(|| {
                (1..k)
                    .map(|i| {
                        out.push(lerp(vertices[key.0], vertices[key.1], i as f64 / k as f64));
                        out.len() - 1
                    })
                    .collect()
            });
            for i in 1..k {
                let idx = if va < vb { pts[i - 1] } else { pts[k - 1 - i] };
                let gi = (start.0 as isize + dir.0 * i as isize) as usize;
                let gj = (start.1 as isize + dir.1 * i as isize) as usize;
                grid[gi][gj] = idx;
            }
        }
        for i in 1..k {
            for j in 1..k {
                out.push(at(i as f64 / k as f64, j as f64 / k as f64));
                grid[i][j] = out.len() - 1;
            }
        }
        for j in 0..k {
            for i in 0..k {
                elements.push(vec![grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]]);
            }
        }
    }
    UnstructuredMesh::new(2, out, elements)
}

fn square(k: usize) -> Result<UnstructuredMesh> {
    let (nx, ny) = (4usize, 5usize);
    let delta = 0.25;
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([i as f64, j as f64, 0.0]);
        }
    }
    let flips = [(1usize, 1usize), (1, 3)];
    let mut quads = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if flips.iter().any(|&(fi, fj)| fj == j && (i == fi || i == fi + 1)) {
                continue;
            }
            quads.push([id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    // Re-split the hexagon a b c d e f of two side-by-side blocks along a-d,
    // pulling b down and e up to keep both quads convex.
    for &(i, j) in &flips {
        let (a, b, c) = (id(i, j), id(i + 1, j), id(i + 2, j));
        let (d, e, f) = (id(i + 2, j + 1), id(i + 1, j + 1), id(i, j + 1));
        vertices[b][1] -= delta;
        vertices[e][1] += delta;
        quads.push([a, b, c, d]);
        quads.push([a, d, e, f]);
    }
    for v in &mut vertices {
        v[0] /= nx as f64;
        v[1] /= ny as f64;
    }
    subdivide_quads(&vertices, &quads, k)
}

fn vgon(v: usize) -> Result<UnstructuredMesh> {
    let p = |k: usize| {
        let a = 2.0 * PI * (k % v) as f64 / v as f64;
        [a.cos(), a.sin(), 0.0]
    };
    // 0 = origin, 1..=v corners P_k, v+1..=2v edge midpoints M_k (between P_k and P_k+1).
    let mut vertices = vec![[0.0; 3]];
    vertices.extend((0..v).map(p));
    vertices.extend((0..v).map(|k| lerp(p(k), p(k + 1), 0.5)));
    let corner = |k: usize| 1 + k % v;
    let mid = |k: usize| 1 + v + k % v;
    let quads: Vec<[usize; 4]> = (0..v).map(|k| [0, mid(k + v - 1), corner(k), mid(k)]).collect();
    subdivide_quads(&vertices, &quads, 3)
}

fn tri_prism(layers: usize) -> Result<UnstructuredMesh> {
    let base = vgon(3)?;
    let n = base.num_vertices();
    let dz = 1.0 / 3.0;
    let mut vertices = Vec::with_capacity(n * (layers + 1));
    for l in 0..=layers {
        for x in &base.vertices {
            vertices.push([x[0], x[1], l as f64 * dz]);
        }
    }
    let mut elements = Vec::new();
    for l in 0..layers {
        for q in &base.elements {
            let mut hex: Vec<usize> = q.iter().map(|&v| v + l * n).collect();
            hex.extend(q.iter().map(|&v| v + (l + 1) * n));
            elements.push(hex);
        }
    }
    UnstructuredMesh::new(3, vertices, elements)
}

#[derive(Hash, PartialEq, Eq, Clone, Copy)]
enum BallKey {
    Cube([i64; 3]),
    Shell(i64, [i64; 3]),
}

fn ball(radius: f64, n: usize, layers: usize) -> Result<UnstructuredMesh> {
    let n = n as i64;
    let l = layers as i64;
    let inner = 0.51 * radius;
    let alpha = 0.5;
    let key = |p: [i64; 3]| -> BallKey {
        match (0..3).find(|&d| p[d] < 0 || p[d] > n) {
            None => BallKey::Cube(p),
            Some(d) => {
                let a = if p[d] < 0 { -p[d] } else { p[d] - n };
                let mut q = p;
                q[d] = q[d].clamp(0, n);
                BallKey::Shell(a, q)
            }
        }
    };
    let inflate = |q: [i64; 3]| -> [f64; 3] {
        let u = q.map(|c| 2.0 * c as f64 / n as f64 - 1.0);
        let r2 = norm(u);
        if r2 == 0.0 {
            return [0.0; 3];
        }
        let rinf = u.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let cube = scale(u, 1.0 - alpha);
        let round = scale(u, alpha * rinf / r2);
        scale([cube[0] + round[0], cube[1] + round[1], cube[2] + round[2]], inner)
    };
    let position = |k: BallKey| -> [f64; 3] {
        match k {
            BallKey::Cube(q) => inflate(q),
            BallKey::Shell(a, q) => {
                let u = q.map(|c| 2.0 * c as f64 / n as f64 - 1.0);
                let on_sphere = scale(u, radius / norm(u));
                lerp(inflate(q), on_sphere, a as f64 / l as f64)
            }
        }
    };

    let mut index: HashMap<BallKey, usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut elements = Vec::new();
    let mut add_cell = |c: [i64; 3]| {
        let hex: Vec<usize> = super::HEX_CORNERS
            .iter()
            .map(|o| {
                let k = key([c[0] + o[0] as i64, c[1] + o[1] as i64, c[2] + o[2] as i64]);
                *index.entry(k).or_insert_with(|| {
                    vertices.push(position(k));
                    vertices.len() - 1
                })
            })
            .collect();
        elements.push(hex);
    };
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                add_cell([i, j, k]);
            }
        }
    }
    for d in 0..3 {
        for outward in [false, true] {
            for a in 0..l {
                for s in 0..n {
                    for t in 0..n {
                        let mut c = [0i64; 3];
                        c[d] = if outward { n + a } else { -1 - a };
                        c[(d + 1) % 3] = s;
                        c[(d + 2) % 3] = t;
                        add_cell(c);
                    }
                }
            }
        }
    }
    UnstructuredMesh::new(3, vertices, elements)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_topology;

    #[test]
    fn vgon_three_has_27_elements_and_one_ev() {
        let m = generate_mesh(&ShapeSpec::VGon { valence: 3 }).unwrap();
        assert_eq!(m.num_elements(), 27);
        let t = build_topology(&m).unwrap();
        let evs: Vec<usize> = (0..m.num_vertices())
            .filter(|&v| !t.boundary_vertex[v] && t.valence(v) != 4)
            .collect();
        assert_eq!(evs, vec![0]);
        assert_eq!(m.vertices[0], [0.0; 3]);
    }

    #[test]
    fn vgon_five_has_one_valence_five_vertex() {
        let m = generate_mesh(&ShapeSpec::VGon { valence: 5 }).unwrap();
        let t = build_topology(&m).unwrap();
        let interior: Vec<usize> = (0..m.num_vertices()).filter(|&v| !t.boundary_vertex[v]).collect();
        let irregular: Vec<usize> = interior.iter().copied().filter(|&v| t.valence(v) != 4).collect();
        assert_eq!(irregular.len(), 1);
        assert_eq!(t.valence(irregular[0]), 5);
    }

    #[test]
    fn square_has_eight_extraordinary_vertices() {
        let m = generate_mesh(&ShapeSpec::Square { subdiv: 6 }).unwrap();
        assert_eq!(m.num_elements(), 720);
        let t = build_topology(&m).unwrap();
        let mut vals: Vec<usize> = (0..m.num_vertices())
            .filter(|&v| !t.boundary_vertex[v] && t.valence(v) != 4)
            .map(|v| t.valence(v))
            .collect();
        vals.sort_unstable();
        assert_eq!(vals, vec![3, 3, 3, 3, 5, 5, 5, 5]);
        for v in &m.vertices {
            assert!((0.0..=1.0).contains(&v[0]) && (0.0..=1.0).contains(&v[1]));
        }
    }

    #[test]
    fn ball_boundary_on_sphere() {
        let m = generate_mesh(&ShapeSpec::Ball {
            radius: 2.55,
            cells: 3,
            layers: 2,
        })
        .unwrap();
        assert_eq!(m.num_elements(), 27 + 6 * 9 * 2);
        let t = build_topology(&m).unwrap();
        for v in 0..m.num_vertices() {
            if t.boundary_vertex[v] {
                assert!((norm(m.vertices[v]) - 2.55).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ball_cube_corners_have_four_hexes() {
        let m = generate_mesh(&ShapeSpec::Ball {
            radius: 2.55,
            cells: 1,
            layers: 1,
        })
        .unwrap();
        let t = build_topology(&m).unwrap();
        let four: Vec<usize> = (0..m.num_vertices())
            .filter(|&v| !t.boundary_vertex[v] && t.valence(v) == 4)
            .collect();
        assert_eq!(four.len(), 8);
    }

    #[test]
    fn paper_sized_ball_element_count() {
        let m = generate_mesh(&ShapeSpec::Ball {
            radius: 2.55,
            cells: 11,
            layers: 6,
        })
        .unwrap();
        assert_eq!(m.num_elements(), 5687);
    }

    #[test]
    fn unsupported_shapes() {
        assert!(matches!(
            generate_mesh(&ShapeSpec::VGon { valence: 4 }),
            Err(Error::UnsupportedShape(_))
        ));
        assert!(matches!(
            generate_mesh(&ShapeSpec::VGon { valence: 9 }),
            Err(Error::UnsupportedShape(_))
        ));
    }
}
