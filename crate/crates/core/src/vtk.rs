//! Legacy ASCII VTK export of fields sampled on every Bézier element.

use std::fmt::Write as _;
use std::io::Write;

use crate::blend::BlendedBasis;
use crate::error::{Error, Result};
use crate::jet::Jet;

/// Scalar field to sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    /// Σ coeffs_i N_i.
    Solution(Vec<f64>),
    /// A single basis function.
    Basis(usize),
    /// The weight w^B.
    RetainedWeight,
    /// Σ_i N_i (one everywhere for a partition of unity).
    BasisSum,
}

fn sample(basis: &BlendedBasis, field: &Field, e: usize, eta: [f64; 3]) -> Result<Jet> {
    let dim = basis.dim;
    let mut out = Jet::default();
    match field {
        Field::RetainedWeight => return basis.eval_weight(None, e, eta, 1),
        Field::Solution(c) => {
            for (i, j) in basis.eval(e, eta, 1)?.1 {
                out.axpy(c[i], &j, dim, 1);
            }
        }
        Field::Basis(k) => {
            if let Some((_, j)) = basis.eval(e, eta, 1)?.1.into_iter().find(|x| x.0 == *k) {
                out = j;
            }
        }
        Field::BasisSum => {
            for (_, j) in basis.eval(e, eta, 1)?.1 {
                out.axpy(1.0, &j, dim, 1);
            }
        }
    }
    Ok(out)
}

/// Writes an unstructured grid with `m` samples per direction and element;
/// point data are the field value and its physical gradient.
pub fn write_vtk(basis: &BlendedBasis, field: &Field, m: usize, out: &mut impl Write) -> Result<()> {
    if m < 2 {
        return Err(Error::InvalidArgument("need at least 2 samples per direction".into()));
    }
    if let Field::Solution(c) = field {
        if c.len() != basis.len() {
            return Err(Error::InvalidArgument(format!("{} coefficients for {} basis functions", c.len(), basis.len())));
        }
    }
    if let Field::Basis(k) = field {
        if *k >= basis.len() {
            return Err(Error::InvalidArgument(format!("basis function {k} of {}", basis.len())));
        }
    }
    let dim = basis.dim;
    let per = m.pow(dim as u32);
    let ne = basis.num_elements();
    let mut points = String::new();
    let mut values = String::new();
    let mut grads = String::new();
    for e in 0..ne {
        for r in 0..per {
            let mut eta = [0.0; 3];
            let mut k = r;
            for x in eta.iter_mut().take(dim) {
                *x = (k % m) as f64 / (m - 1) as f64;
                k /= m;
            }
            let x = basis.geo.point(e, eta);
            let j = sample(basis, field, e, eta)?;
            let _ = writeln!(points, "{:.12e} {:.12e} {:.12e}", x[0], x[1], x[2]);
            let _ = writeln!(values, "{:.12e}", j.v);
            let _ = writeln!(grads, "{:.12e} {:.12e} {:.12e}", j.g[0], j.g[1], j.g[2]);
        }
    }
    // Sub-cells of the sampling lattice.
    let (corners, cell_type): (&[[usize; 3]], u8) = if dim == 2 {
        (&[[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], 9)
    } else {
        (
            &[[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]],
            12,
        )
    };
    let sub = (m - 1).pow(dim as u32);
    let mut cells = String::new();
    for e in 0..ne {
        for r in 0..sub {
            let mut base = [0usize; 3];
            let mut k = r;
            for b in base.iter_mut().take(dim) {
                *b = k % (m - 1);
                k /= m - 1;
            }
            let _ = write!(cells, "{}", corners.len());
            for c in corners {
                let id = (0..dim).map(|d| (base[d] + c[d]) * m.pow(d as u32)).sum::<usize>();
                let _ = write!(cells, " {}", e * per + id);
            }
            cells.push('\n');
        }
    }
    let (np, nc) = (ne * per, ne * sub);
    let io = |r: std::io::Result<()>| r.map_err(Error::from);
    io(write!(out, "# vtk DataFile Version 3.0\nsbspline field\nASCII\nDATASET UNSTRUCTURED_GRID\n"))?;
    io(write!(out, "POINTS {np} double\n{points}"))?;
    io(write!(out, "CELLS {nc} {}\n{cells}", nc * (corners.len() + 1)))?;
    io(write!(out, "CELL_TYPES {nc}\n"))?;
    for _ in 0..nc {
        io(writeln!(out, "{cell_type}"))?;
    }
    io(write!(out, "POINT_DATA {np}\nSCALARS value double 1\nLOOKUP_TABLE default\n{values}"))?;
    io(write!(out, "VECTORS gradient double\n{grads}"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::study::Level;
    use crate::mesh::ShapeSpec;

    fn export(spec: ShapeSpec, field: Field, m: usize) -> String {
        let level = Level::generate(&spec).unwrap();
        let basis = level.basis(crate::study::SpaceKind::Blended).unwrap();
        let mut buf = Vec::new();
        write_vtk(&basis, &field, m, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn section<'a>(text: &'a str, key: &str) -> Vec<&'a str> {
        let mut lines = text.lines().skip_while(|l| !l.starts_with(key));
        let head = lines.next().unwrap();
        let n: usize = head.split_whitespace().nth(1).unwrap().parse().unwrap();
        let skip = usize::from(key == "POINT_DATA") * 2;
        lines.skip(skip).take(n).collect()
    }

    #[test]
    fn quad_export_has_quads_and_unit_sum() {
        let text = export(ShapeSpec::VGon { valence: 5 }, Field::BasisSum, 3);
        assert_eq!(text.lines().next(), Some("# vtk DataFile Version 3.0"));
        assert!(section(&text, "CELL_TYPES").iter().all(|&t| t == "9"));
        for v in section(&text, "POINT_DATA") {
            assert!((v.parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hex_export_uses_hexahedra() {
        let text = export(ShapeSpec::TriPrism { layers: 4 }, Field::RetainedWeight, 2);
        let types = section(&text, "CELL_TYPES");
        assert!(!types.is_empty() && types.iter().all(|&t| t == "12"));
    }
}
