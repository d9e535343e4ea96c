use std::fmt::Write;

use serde::Deserialize;

use super::{Point2, Triangulation};
use crate::error::{Error, Result};

/// Formats a float with 17 significant digits.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes a mesh as {"vertices", "triangles", "boundary", "tags"}.
pub fn mesh_to_json(mesh: &Triangulation) -> String {
    let mut s = String::from("{\"vertices\":[");
    for (i, p) in mesh.vertices.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "[{},{}]", fmt_f64(p.x), fmt_f64(p.y));
    }
    s.push_str("],\"triangles\":[");
    for (i, t) in mesh.triangles.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "[{},{},{}]", t[0], t[1], t[2]);
    }
    s.push_str("],\"boundary\":[");
    s.push_str(&join(mesh.boundary.iter()));
    s.push_str("],\"tags\":[");
    let tags: Vec<u8> = (0..mesh.n_triangles()).map(|t| mesh.tag(t)).collect();
    s.push_str(&join(tags.iter()));
    s.push_str("]}");
    s
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

#[derive(Deserialize)]
struct MeshDoc {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    #[serde(default)]
    tags: Option<Vec<u8>>,
}

/// Parses the mesh JSON document; the boundary is recomputed from the triangles.
pub fn mesh_from_json(text: &str) -> Result<Triangulation> {
    let doc: MeshDoc =
        serde_json::from_str(text).map_err(|e| Error::Usage(format!("mesh JSON: {e}")))?;
    let n = doc.vertices.len();
    if let Some(bad) = doc.triangles.iter().flatten().find(|&&i| i >= n) {
        return Err(Error::Usage(format!(
            "triangle references vertex {bad} of {n}"
        )));
    }
    if let Some(tags) = &doc.tags {
        if tags.len() != doc.triangles.len() {
            return Err(Error::Usage(
                "tags length differs from triangle count".into(),
            ));
        }
    }
    let vertices = doc
        .vertices
        .iter()
        .map(|v| Point2::new(v[0], v[1]))
        .collect();
    Ok(Triangulation::new(vertices, doc.triangles, doc.tags))
}
