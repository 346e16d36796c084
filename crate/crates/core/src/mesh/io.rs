use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::UnstructuredMesh;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeshFile {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    elements: Vec<Vec<u32>>,
}

/// Serializes a mesh as `{"dim": .., "vertices": [[..]], "elements": [[..]]}`.
pub fn mesh_to_json(mesh: &UnstructuredMesh) -> String {
    let file = MeshFile {
        dim: mesh.dim,
        vertices: mesh.vertices.iter().map(|v| v[..mesh.dim].to_vec()).collect(),
        elements: mesh
            .elements
            .iter()
            .map(|e| e.iter().map(|&v| v as u32).collect())
            .collect(),
    };
    serde_json::to_string(&file).expect("mesh serialization cannot fail")
}

/// Parses and validates a mesh file body.
pub fn mesh_from_json(text: &str) -> Result<UnstructuredMesh> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    let line_of = |needle: &str| {
        text.find(needle)
            .map(|pos| text[..pos].lines().count().max(1))
            .unwrap_or(1)
    };
    if file.dim != 2 && file.dim != 3 {
        return Err(Error::Parse {
            line: line_of("\"dim\""),
            message: format!("field `dim`: expected 2 or 3, found {}", file.dim),
        });
    }
    let mut vertices = Vec::with_capacity(file.vertices.len());
    for (i, v) in file.vertices.iter().enumerate() {
        if v.len() != file.dim {
            return Err(Error::Parse {
                line: line_of("\"vertices\""),
                message: format!(
                    "field `vertices[{i}]`: {} coordinates but dim is {}",
                    v.len(),
                    file.dim
                ),
            });
        }
        let mut p = [0.0; 3];
        p[..file.dim].copy_from_slice(v);
        vertices.push(p);
    }
    let nc = 1usize << file.dim;
    let mut elements = Vec::with_capacity(file.elements.len());
    for (i, e) in file.elements.iter().enumerate() {
        if e.len() != nc {
            return Err(Error::Parse {
                line: line_of("\"elements\""),
                message: format!(
                    "field `elements[{i}]`: {} vertex indices, expected {nc} for dim {}",
                    e.len(),
                    file.dim
                ),
            });
        }
        elements.push(e.iter().map(|&v| v as usize).collect());
    }
    UnstructuredMesh::new(file.dim, vertices, elements)
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<UnstructuredMesh> {
    mesh_from_json(&fs::read_to_string(path)?)
}

pub fn write_mesh(mesh: &UnstructuredMesh, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, mesh_to_json(mesh))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_quad() -> UnstructuredMesh {
        UnstructuredMesh::new(
            2,
            vec![[0., 0., 0.], [1., 0., 0.], [1., 1., 0.], [0., 1., 0.]],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_unit_quad() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("quad.json");
        let mesh = unit_quad();
        write_mesh(&mesh, &path).unwrap();
        let back = read_mesh(&path).unwrap();
        assert_eq!(back, mesh);
    }

    #[test]
    fn round_trip_awkward_coordinates() {
        let mut mesh = unit_quad();
        mesh.vertices[2] = [1.0 + 1e-15, std::f64::consts::PI / 3.0, 0.0];
        let back = mesh_from_json(&mesh_to_json(&mesh)).unwrap();
        assert_eq!(back.vertices, mesh.vertices);
    }

    #[test]
    fn five_vertex_element_is_rejected() {
        let text = r#"{"dim": 2,
            "vertices": [[0,0],[1,0],[1,1],[0,1],[0.5,1.5]],
            "elements": [[0,1,2,3,4]]}"#;
        match mesh_from_json(text) {
            Err(Error::Parse { line, message }) => {
                assert!(message.contains("elements[0]"), "{message}");
                assert_eq!(line, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let text = r#"{"dim": 2, "vertices": [[0,0,0],[1,0,0],[1,1,0],[0,1,0],
            [0,0,1],[1,0,1],[1,1,1],[0,1,1]], "elements": [[0,1,2,3,4,5,6,7]]}"#;
        assert!(matches!(mesh_from_json(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "{\"dim\": 2,\n \"vertices\": [[0,0],\n oops]}";
        match mesh_from_json(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
