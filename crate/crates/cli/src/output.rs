use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use wsphere_core::holo::GridSpec;

/// Samples of a map on a row-major grid. `None` marks a masked vertex.
#[derive(Debug, Clone)]
pub struct MeshOutput {
    pub grid: GridSpec,
    pub z: Vec<[f64; 2]>,
    pub vertices: Vec<Option<Vec<f64>>>,
    /// Per-vertex attributes; `None` where the attribute was not evaluated.
    pub scalars: Vec<(String, Vec<Option<f64>>)>,
}

/// Shortest round-trip decimal, switching to exponent form for very small
/// or large magnitudes.
fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

impl MeshOutput {
    pub fn new(grid: GridSpec, z: Vec<[f64; 2]>, vertices: Vec<Option<Vec<f64>>>) -> Self {
        assert_eq!(z.len(), grid.len());
        assert_eq!(vertices.len(), grid.len());
        Self {
            grid,
            z,
            vertices,
            scalars: Vec::new(),
        }
    }

    pub fn with_scalar(mut self, name: &str, values: Vec<Option<f64>>) -> Self {
        assert_eq!(values.len(), self.grid.len());
        self.scalars.push((name.to_string(), values));
        self
    }

    fn dim(&self) -> usize {
        self.vertices.iter().flatten().map(Vec::len).next().unwrap_or(0)
    }

    pub fn valid_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.is_some()).count()
    }

    /// Quads `(r, c), (r, c+1), (r+1, c+1), (r+1, c)` whose corners are all valid,
    /// as grid indices.
    pub fn quads(&self) -> Vec<[usize; 4]> {
        let cols = self.grid.cols;
        let mut out = Vec::new();
        for r in 0..self.grid.rows - 1 {
            for c in 0..cols - 1 {
                let q = [r * cols + c, r * cols + c + 1, (r + 1) * cols + c + 1, (r + 1) * cols + c];
                if q.iter().all(|&i| self.vertices[i].is_some()) {
                    out.push(q);
                }
            }
        }
        out
    }

    /// Grid index to position among valid vertices.
    fn compact_index(&self) -> Vec<Option<usize>> {
        let mut next = 0;
        self.vertices
            .iter()
            .map(|v| {
                v.as_ref().map(|_| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    }

    /// One row per grid point: `z_re, z_im, valid, {prefix}_1 ... {prefix}_d`, then the scalars.
    pub fn csv(&self, prefix: &str) -> String {
        let dim = self.dim();
        let mut s = String::from("z_re,z_im,valid");
        for k in 1..=dim {
            write!(s, ",{prefix}_{k}").unwrap();
        }
        for (name, _) in &self.scalars {
            write!(s, ",{name}").unwrap();
        }
        s.push('\n');
        for (i, z) in self.z.iter().enumerate() {
            write!(s, "{:?},{:?},{}", z[0], z[1], u8::from(self.vertices[i].is_some())).unwrap();
            match &self.vertices[i] {
                Some(v) => v.iter().for_each(|x| write!(s, ",{x:?}").unwrap()),
                None => (0..dim).for_each(|_| s.push(',')),
            }
            for (_, values) in &self.scalars {
                write!(s, ",{}", cell(values[i])).unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Valid vertices projected onto the 1-based `coords`, with quad faces.
    pub fn obj(&self, coords: [usize; 3]) -> String {
        let mut s = format!("# coordinates {} {} {}\n", coords[0], coords[1], coords[2]);
        for v in self.vertices.iter().flatten() {
            writeln!(s, "v {:?} {:?} {:?}", v[coords[0] - 1], v[coords[1] - 1], v[coords[2] - 1]).unwrap();
        }
        let index = self.compact_index();
        for q in self.quads() {
            // OBJ indices are 1-based
            let [a, b, c, d] = q.map(|i| index[i].expect("quad corners are valid") + 1);
            writeln!(s, "f {a} {b} {c} {d}").unwrap();
        }
        s
    }

    /// ASCII PLY with the projected vertices, every scalar as a double
    /// property (`NaN` where missing) and the quad faces.
    pub fn ply(&self, coords: [usize; 3]) -> String {
        let index = self.compact_index();
        let quads = self.quads();
        let mut s = String::from("ply\nformat ascii 1.0\n");
        writeln!(s, "element vertex {}", self.valid_count()).unwrap();
        s.push_str("property double x\nproperty double y\nproperty double z\n");
        for (name, _) in &self.scalars {
            writeln!(s, "property double {name}").unwrap();
        }
        writeln!(s, "element face {}", quads.len()).unwrap();
        s.push_str("property list uchar int vertex_indices\nend_header\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let Some(v) = v else { continue };
            write!(s, "{:?} {:?} {:?}", v[coords[0] - 1], v[coords[1] - 1], v[coords[2] - 1]).unwrap();
            for (_, values) in &self.scalars {
                write!(s, " {:?}", values[i].unwrap_or(f64::NAN)).unwrap();
            }
            s.push('\n');
        }
        for q in quads {
            let [a, b, c, d] = q.map(|i| index[i].expect("quad corners are valid"));
            writeln!(s, "4 {a} {b} {c} {d}").unwrap();
        }
        s
    }
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

/// Writes `{stem}.csv`, `{stem}.obj` and, when asked, `{stem}.ply`.
pub fn write_mesh(dir: &Path, stem: &str, prefix: &str, mesh: &MeshOutput, coords: [usize; 3], ply: bool) -> Result<()> {
    write_text(dir, &format!("{stem}.csv"), &mesh.csv(prefix))?;
    write_text(dir, &format!("{stem}.obj"), &mesh.obj(coords))?;
    if ply {
        write_text(dir, &format!("{stem}.ply"), &mesh.ply(coords))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh() -> MeshOutput {
        let grid = GridSpec { rows: 3, cols: 3 };
        let z: Vec<[f64; 2]> = (0..9).map(|i| [(i % 3) as f64, (i / 3) as f64]).collect();
        // the centre is masked, so no quad survives
        let mut vertices: Vec<Option<Vec<f64>>> = (0..9).map(|i| Some(vec![i as f64, 0.5, 0.25, 1.0])).collect();
        vertices[4] = None;
        MeshOutput::new(grid, z, vertices).with_scalar("r", (0..9).map(|i| (i != 0).then_some(0.1)).collect())
    }

    #[test]
    fn masked_vertices_drop_their_faces() {
        let m = mesh();
        assert!(m.quads().is_empty());
        let mut full = m.clone();
        full.vertices[4] = Some(vec![4.0, 0.5, 0.25, 1.0]);
        assert_eq!(full.quads(), vec![[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6], [4, 5, 8, 7]]);
        full.vertices[8] = None;
        assert_eq!(full.quads().len(), 3);
    }

    #[test]
    fn obj_faces_reference_valid_vertices() {
        let mut m = mesh();
        m.vertices[4] = Some(vec![4.0, 0.5, 0.25, 1.0]);
        m.vertices[0] = None;
        let obj = m.obj([1, 2, 4]);
        let vertices = obj.lines().filter(|l| l.starts_with("v ")).count();
        assert_eq!(vertices, 8);
        assert!(obj.contains("v 1.0 0.5 1.0\n"));
        for face in obj.lines().filter(|l| l.starts_with("f ")) {
            for idx in face.split_whitespace().skip(1) {
                let i: usize = idx.parse().unwrap();
                assert!((1..=vertices).contains(&i));
            }
        }
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 3);
    }

    #[test]
    fn csv_rows_follow_the_grid() {
        let csv = mesh().csv("g");
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "z_re,z_im,valid,g_1,g_2,g_3,g_4,r");
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[1], "0.0,0.0,1,0.0,0.5,0.25,1.0,");
        assert_eq!(lines[5], "1.0,1.0,0,,,,,0.1");
    }

    #[test]
    fn ply_header_counts_match() {
        let mut m = mesh();
        m.vertices[4] = Some(vec![4.0, 0.5, 0.25, 1.0]);
        let ply = m.ply([1, 2, 3]);
        assert!(ply.contains("element vertex 9\n"));
        assert!(ply.contains("element face 4\n"));
        assert!(ply.contains("property double r\n"));
        let body: Vec<&str> = ply.split("end_header\n").nth(1).unwrap().lines().collect();
        assert_eq!(body.len(), 13);
        assert_eq!(body[0], "0.0 0.5 0.25 NaN");
    }
}
