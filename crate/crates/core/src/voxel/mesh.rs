use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Point2, Point3, Vector3};

use super::grid::{VoxelGrid, VoxelIndex};
use crate::error::{Error, Result};

/// Triangle soup with vertex positions in meters.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Parse the `v` / `f` subset of Wavefront OBJ. Faces with more than
    /// three corners are fan-triangulated; `v/vt/vn` corner syntax and
    /// negative (relative) indices are accepted. Other records are ignored.
    pub fn from_obj_str(text: &str) -> Result<Self> {
        let mut mesh = TriangleMesh::default();
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("v") => {
                    let c: Vec<f64> = tok
                        .take(3)
                        .map(|t| {
                            t.parse::<f64>()
                                .map_err(|_| Error::parse(ln, format!("bad coordinate {t:?}")))
                        })
                        .collect::<Result<_>>()?;
                    if c.len() != 3 {
                        return Err(Error::parse(ln, "vertex needs 3 coordinates"));
                    }
                    mesh.vertices.push(Point3::new(c[0], c[1], c[2]));
                }
                Some("f") => {
                    let n = mesh.vertices.len() as i64;
                    let corners: Vec<usize> = tok
                        .map(|t| {
                            let head = t.split('/').next().unwrap_or("");
                            let v: i64 = head
                                .parse()
                                .map_err(|_| Error::parse(ln, format!("bad face index {t:?}")))?;
                            let resolved = if v > 0 { v - 1 } else { n + v };
                            if v == 0 || resolved < 0 || resolved >= n {
                                return Err(Error::parse(
                                    ln,
                                    format!("face index {v} out of range"),
                                ));
                            }
                            Ok(resolved as usize)
                        })
                        .collect::<Result<_>>()?;
                    if corners.len() < 3 {
                        return Err(Error::parse(ln, "face needs at least 3 vertices"));
                    }
                    for k in 1..corners.len() - 1 {
                        mesh.triangles
                            .push([corners[0], corners[k], corners[k + 1]]);
                    }
                }
                _ => {}
            }
        }
        Ok(mesh)
    }

    pub fn read_obj(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_obj_str(&text)
    }

    pub fn to_obj_string(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {:?} {:?} {:?}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }

    /// Closed box mesh with outward-wound faces.
    pub fn cuboid(min: Point3<f64>, max: Point3<f64>) -> Self {
        let v = |x: bool, y: bool, z: bool| {
            Point3::new(
                if x { max.x } else { min.x },
                if y { max.y } else { min.y },
                if z { max.z } else { min.z },
            )
        };
        let vertices = vec![
            v(false, false, false),
            v(true, false, false),
            v(true, true, false),
            v(false, true, false),
            v(false, false, true),
            v(true, false, true),
            v(true, true, true),
            v(false, true, true),
        ];
        let quads = [
            [0, 3, 2, 1],
            [4, 5, 6, 7],
            [0, 1, 5, 4],
            [2, 3, 7, 6],
            [1, 2, 6, 5],
            [0, 4, 7, 3],
        ];
        let triangles = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        TriangleMesh {
            vertices,
            triangles,
        }
    }

    /// Closed latitude/longitude sphere mesh.
    pub fn uv_sphere(center: Point3<f64>, radius: f64, stacks: usize, slices: usize) -> Self {
        let stacks = stacks.max(2);
        let slices = slices.max(3);
        let mut vertices = vec![center + Vector3::new(0.0, 0.0, radius)];
        for i in 1..stacks {
            let phi = std::f64::consts::PI * i as f64 / stacks as f64;
            for j in 0..slices {
                let th = 2.0 * std::f64::consts::PI * j as f64 / slices as f64;
                vertices.push(
                    center
                        + radius
                            * Vector3::new(phi.sin() * th.cos(), phi.sin() * th.sin(), phi.cos()),
                );
            }
        }
        let south = vertices.len();
        vertices.push(center - Vector3::new(0.0, 0.0, radius));
        let ring = |i: usize, j: usize| 1 + (i - 1) * slices + (j % slices);
        let mut triangles = Vec::new();
        for j in 0..slices {
            triangles.push([0, ring(1, j), ring(1, j + 1)]);
            triangles.push([south, ring(stacks - 1, j + 1), ring(stacks - 1, j)]);
        }
        for i in 1..stacks - 1 {
            for j in 0..slices {
                let (a, b, c, d) = (
                    ring(i, j),
                    ring(i, j + 1),
                    ring(i + 1, j),
                    ring(i + 1, j + 1),
                );
                triangles.push([a, c, d]);
                triangles.push([a, d, b]);
            }
        }
        TriangleMesh {
            vertices,
            triangles,
        }
    }

    fn bounds(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        let mut used = self.triangles.iter().flatten().map(|&i| self.vertices[i]);
        let first = used.next()?;
        Some(used.fold((first, first), |(lo, hi), p| (lo.inf(&p), hi.sup(&p))))
    }
}

/// Solid voxelization by crossing parity along +z.
///
/// The grid is sized so that the mesh bounding box, grown by `padding` times
/// its largest extent on every side, fits in `dims`; voxels are cubic. A voxel
/// is occupied when an odd number of surface crossings lie below its center
/// on the vertical line through that center.
pub fn voxelize_mesh(mesh: &TriangleMesh, dims: [usize; 3], padding: f64) -> Result<VoxelGrid> {
    if mesh.triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    if let Some(&bad) = mesh
        .triangles
        .iter()
        .flatten()
        .find(|&&i| i >= mesh.vertices.len())
    {
        return Err(Error::MeshExtent(format!(
            "triangle references missing vertex {bad}"
        )));
    }
    if !(0.0..0.5).contains(&padding) {
        return Err(Error::param("padding", "must lie in [0, 0.5)"));
    }
    let (lo, hi) = mesh.bounds().ok_or(Error::EmptyMesh)?;
    if !lo.iter().chain(hi.iter()).all(|c| c.is_finite()) {
        return Err(Error::MeshExtent("non-finite vertex coordinates".into()));
    }
    let ext = hi - lo;
    let largest = ext.max();
    if !(largest > 0.0) || !largest.is_finite() {
        return Err(Error::MeshExtent("mesh has zero extent".into()));
    }
    let margin = padding * largest;
    let voxel_size = (0..3)
        .map(|a| (ext[a] + 2.0 * margin) / dims[a] as f64)
        .fold(0.0f64, f64::max);
    if !(voxel_size.is_finite() && voxel_size > 0.0) {
        return Err(Error::MeshExtent(format!(
            "voxel size {voxel_size} not representable"
        )));
    }
    let mid = lo + ext * 0.5;
    let half = Vector3::new(dims[0] as f64, dims[1] as f64, dims[2] as f64) * (0.5 * voxel_size);
    let mut grid = VoxelGrid::new(dims, voxel_size, mid - half)?;

    // Crossing heights per (x, y) column.
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); dims[0] * dims[1]];
    let origin = grid.origin();
    for tri in &mesh.triangles {
        let p = tri.map(|i| mesh.vertices[i]);
        let Some(ptri) = ProjectedTriangle::new(&p) else {
            continue;
        };
        let col_range = |a: usize| {
            let lo = p.iter().map(|v| v[a]).fold(f64::INFINITY, f64::min);
            let hi = p.iter().map(|v| v[a]).fold(f64::NEG_INFINITY, f64::max);
            let first = ((lo - origin[a]) / voxel_size - 0.5).ceil().max(0.0) as usize;
            let last = ((hi - origin[a]) / voxel_size - 0.5).floor();
            if last < 0.0 {
                return first..first;
            }
            first..(last as usize + 1).min(dims[a])
        };
        for y in col_range(1) {
            for x in col_range(0) {
                let c = grid.center(VoxelIndex::new(x, y, 0));
                if let Some(z) = ptri.crossing(Point2::new(c.x, c.y)) {
                    columns[x + dims[0] * y].push(z);
                }
            }
        }
    }
    for y in 0..dims[1] {
        for x in 0..dims[0] {
            let col = &mut columns[x + dims[0] * y];
            if col.is_empty() {
                continue;
            }
            col.sort_by(f64::total_cmp);
            let mut below = 0usize;
            for z in 0..dims[2] {
                let cz = grid.center(VoxelIndex::new(x, y, z)).z;
                while below < col.len() && col[below] < cz {
                    below += 1;
                }
                if below % 2 == 1 {
                    grid.set(VoxelIndex::new(x, y, z), true);
                }
            }
        }
    }
    Ok(grid)
}

/// Triangle projected on the xy plane, wound counter-clockwise.
struct ProjectedTriangle {
    v: [Point3<f64>; 3],
    area2: f64,
}

impl ProjectedTriangle {
    fn new(p: &[Point3<f64>; 3]) -> Option<Self> {
        let area2 = edge_fn(&p[0], &p[1], &p[2]);
        if area2 == 0.0 || !area2.is_finite() {
            return None;
        }
        let v = if area2 > 0.0 { *p } else { [p[0], p[2], p[1]] };
        Some(ProjectedTriangle {
            v,
            area2: area2.abs(),
        })
    }

    /// Height of the triangle above `q` if the vertical line through `q`
    /// crosses it. Points on an edge belong to exactly one of the two
    /// triangles sharing it (top-left ownership), so a watertight surface
    /// is never counted twice.
    fn crossing(&self, q: Point2<f64>) -> Option<f64> {
        let qp = Point3::new(q.x, q.y, 0.0);
        let mut w = [0.0; 3];
        for k in 0..3 {
            let a = &self.v[(k + 1) % 3];
            let b = &self.v[(k + 2) % 3];
            let wk = edge_fn(a, b, &qp);
            let owned = {
                let (dx, dy) = (b.x - a.x, b.y - a.y);
                dy < 0.0 || (dy == 0.0 && dx < 0.0)
            };
            if wk < 0.0 || (wk == 0.0 && !owned) {
                return None;
            }
            w[k] = wk;
        }
        let z = (w[0] * self.v[0].z + w[1] * self.v[1].z + w[2] * self.v[2].z) / self.area2;
        Some(z)
    }
}

/// Twice the signed area of (a, b, q) in the xy plane, evaluated with the
/// endpoints in a canonical order so that the shared edge of two triangles
/// yields exactly opposite values.
fn edge_fn(a: &Point3<f64>, b: &Point3<f64>, q: &Point3<f64>) -> f64 {
    let swap = (b.x, b.y) < (a.x, a.y);
    let (s, t) = if swap { (b, a) } else { (a, b) };
    let v = (t.x - s.x) * (q.y - s.y) - (t.y - s.y) * (q.x - s.x);
    if swap {
        -v
    } else {
        v
    }
}
