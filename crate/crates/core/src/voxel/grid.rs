use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Aabb;

/// Integer voxel coordinate `(x, y, z)`. Ordering is lexicographic in x, y, z,
/// which is the tie-break order used throughout the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VoxelIndex(pub [usize; 3]);

impl VoxelIndex {
    pub const fn new(x: usize, y: usize, z: usize) -> Self {
        VoxelIndex([x, y, z])
    }

    pub fn x(&self) -> usize {
        self.0[0]
    }
    pub fn y(&self) -> usize {
        self.0[1]
    }
    pub fn z(&self) -> usize {
        self.0[2]
    }

    /// Neighbor at a signed offset, if it stays non-negative.
    pub fn offset(&self, d: [i64; 3]) -> Option<VoxelIndex> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let v = self.0[a] as i64 + d[a];
            if v < 0 {
                return None;
            }
            out[a] = v as usize;
        }
        Some(VoxelIndex(out))
    }
}

/// The six face-neighbor offsets.
pub const FACE_OFFSETS: [[i64; 3]; 6] = [
    [1, 0, 0],
    [-1, 0, 0],
    [0, 1, 0],
    [0, -1, 0],
    [0, 0, 1],
    [0, 0, -1],
];

/// Dense boolean occupancy grid with a world-frame placement.
///
/// Voxel `(i, j, k)` spans `origin + [i, i+1) * voxel_size` along x (and
/// likewise for y, z); its center is at `origin + (i + 0.5) * voxel_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    dims: [usize; 3],
    voxel_size: f64,
    origin: Point3<f64>,
    occupancy: Vec<bool>,
}

impl VoxelGrid {
    pub const DEFAULT_DIMS: [usize; 3] = [64, 64, 64];

    /// Empty grid.
    pub fn new(dims: [usize; 3], voxel_size: f64, origin: Point3<f64>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::param("dims", "every component must be >= 1"));
        }
        if !(voxel_size > 0.0 && voxel_size.is_finite()) {
            return Err(Error::param("voxel_size", "must be finite and > 0"));
        }
        if !origin.iter().all(|c| c.is_finite()) {
            return Err(Error::param("origin", "must be finite"));
        }
        let n = dims[0]
            .checked_mul(dims[1])
            .and_then(|v| v.checked_mul(dims[2]))
            .ok_or_else(|| Error::param("dims", "grid too large"))?;
        Ok(VoxelGrid {
            dims,
            voxel_size,
            origin,
            occupancy: vec![false; n],
        })
    }

    /// Grid whose occupancy is `f(index)` for every voxel.
    pub fn from_fn(
        dims: [usize; 3],
        voxel_size: f64,
        origin: Point3<f64>,
        mut f: impl FnMut(VoxelIndex) -> bool,
    ) -> Result<Self> {
        let mut g = Self::new(dims, voxel_size, origin)?;
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    let idx = VoxelIndex([x, y, z]);
                    let lin = g.linear(idx);
                    g.occupancy[lin] = f(idx);
                }
            }
        }
        Ok(g)
    }

    /// Grid whose voxels are occupied when their world-space center satisfies `inside`.
    pub fn from_solid(
        dims: [usize; 3],
        voxel_size: f64,
        origin: Point3<f64>,
        inside: impl Fn(&Point3<f64>) -> bool,
    ) -> Result<Self> {
        let mut g = Self::new(dims, voxel_size, origin)?;
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    let idx = VoxelIndex([x, y, z]);
                    let lin = g.linear(idx);
                    g.occupancy[lin] = inside(&g.center(idx));
                }
            }
        }
        Ok(g)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn origin(&self) -> Point3<f64> {
        self.origin
    }

    #[inline]
    fn linear(&self, idx: VoxelIndex) -> usize {
        idx.0[0] + self.dims[0] * (idx.0[1] + self.dims[1] * idx.0[2])
    }

    pub fn in_bounds(&self, idx: VoxelIndex) -> bool {
        (0..3).all(|a| idx.0[a] < self.dims[a])
    }

    /// Occupancy of `idx`; out-of-bounds voxels read as empty.
    #[inline]
    pub fn is_occupied(&self, idx: VoxelIndex) -> bool {
        self.in_bounds(idx) && self.occupancy[self.linear(idx)]
    }

    /// Occupancy at a signed coordinate; anything outside the grid is empty.
    #[inline]
    pub fn is_occupied_at(&self, c: [i64; 3]) -> bool {
        if (0..3).any(|a| c[a] < 0 || c[a] >= self.dims[a] as i64) {
            return false;
        }
        self.is_occupied(VoxelIndex([c[0] as usize, c[1] as usize, c[2] as usize]))
    }

    /// Sets one voxel. Panics when `idx` is out of bounds.
    pub fn set(&mut self, idx: VoxelIndex, occupied: bool) {
        assert!(
            self.in_bounds(idx),
            "voxel {idx:?} outside dims {:?}",
            self.dims
        );
        let lin = self.linear(idx);
        self.occupancy[lin] = occupied;
    }

    pub fn center(&self, idx: VoxelIndex) -> Point3<f64> {
        let s = self.voxel_size;
        Point3::new(
            self.origin.x + (idx.0[0] as f64 + 0.5) * s,
            self.origin.y + (idx.0[1] as f64 + 0.5) * s,
            self.origin.z + (idx.0[2] as f64 + 0.5) * s,
        )
    }

    /// Voxel containing a world point, if inside the grid.
    pub fn index_of(&self, p: &Point3<f64>) -> Option<VoxelIndex> {
        let mut out = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.voxel_size).floor();
            if !(f >= 0.0 && f < self.dims[a] as f64) {
                return None;
            }
            out[a] = f as usize;
        }
        Some(VoxelIndex(out))
    }

    /// World-space box covered by the whole grid.
    pub fn bounds(&self) -> Aabb {
        let ext = Vector3::new(
            self.dims[0] as f64 * self.voxel_size,
            self.dims[1] as f64 * self.voxel_size,
            self.dims[2] as f64 * self.voxel_size,
        );
        Aabb::new(self.origin, self.origin + ext)
    }

    /// World-space box of a single voxel.
    pub fn voxel_bounds(&self, idx: VoxelIndex) -> Aabb {
        let c = self.center(idx);
        Aabb::from_center_half_extents(c, Vector3::repeat(self.voxel_size * 0.5))
    }

    /// Occupied voxels in (z, y, x) storage order.
    pub fn occupied(&self) -> impl Iterator<Item = VoxelIndex> + '_ {
        let [dx, dy, _] = self.dims;
        self.occupancy
            .iter()
            .enumerate()
            .filter(|(_, &o)| o)
            .map(move |(lin, _)| VoxelIndex([lin % dx, (lin / dx) % dy, lin / (dx * dy)]))
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.occupancy.iter().any(|&o| o)
    }

    /// Mean center of all occupied voxels.
    pub fn occupied_centroid(&self) -> Option<Point3<f64>> {
        let mut sum = Vector3::zeros();
        let mut n = 0usize;
        for idx in self.occupied() {
            sum += self.center(idx).coords;
            n += 1;
        }
        (n > 0).then(|| Point3::from(sum / n as f64))
    }

    /// Same occupancy placed at a different origin.
    pub fn with_origin(&self, origin: Point3<f64>) -> VoxelGrid {
        VoxelGrid {
            origin,
            ..self.clone()
        }
    }

    /// Serialize to the `VGRID 1` text format.
    pub fn to_vgrid_string(&self) -> String {
        let mut s = GridHeader::from_grid(self).render("VGRID");
        s.reserve(self.occupancy.len() + self.dims[1] * self.dims[2]);
        for row in self.occupancy.chunks(self.dims[0]) {
            for &o in row {
                s.push(if o { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Parse the `VGRID 1` text format.
    pub fn from_vgrid_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let header = GridHeader::parse("VGRID", &mut lines)?;
        let mut grid = VoxelGrid::new(header.dims, header.voxel_size, header.origin)?;
        let [dx, dy, dz] = header.dims;
        let mut row_start = 0usize;
        for _ in 0..dy * dz {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, "unexpected end of file in occupancy rows"))?;
            let bytes = line.as_bytes();
            if bytes.len() != dx {
                return Err(Error::parse(
                    ln,
                    format!("expected {dx} cells, found {}", bytes.len()),
                ));
            }
            for (i, &b) in bytes.iter().enumerate() {
                grid.occupancy[row_start + i] = match b {
                    b'0' => false,
                    b'1' => true,
                    other => {
                        return Err(Error::parse(
                            ln,
                            format!("invalid cell character {:?}", other as char),
                        ))
                    }
                };
            }
            row_start += dx;
        }
        if let Some((ln, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(ln, format!("trailing content: {line:?}")));
        }
        Ok(grid)
    }

    pub fn read_vgrid(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_vgrid_str(&text)
    }

    pub fn write_vgrid(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_vgrid_string()).map_err(|e| Error::io(path, e))
    }
}

/// Header shared by the grid and contact file formats.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct GridHeader {
    pub dims: [usize; 3],
    pub voxel_size: f64,
    pub origin: Point3<f64>,
}

impl GridHeader {
    pub fn from_grid(g: &VoxelGrid) -> Self {
        GridHeader {
            dims: g.dims,
            voxel_size: g.voxel_size,
            origin: g.origin,
        }
    }

    pub fn render(&self, magic: &str) -> String {
        let mut s = String::new();
        let [dx, dy, dz] = self.dims;
        let o = self.origin;
        // `{:?}` on f64 is the shortest representation that parses back to the same bits.
        let _ = writeln!(s, "{magic} 1");
        let _ = writeln!(s, "dims {dx} {dy} {dz}");
        let _ = writeln!(s, "voxel_size {:?}", self.voxel_size);
        let _ = writeln!(s, "origin {:?} {:?} {:?}", o.x, o.y, o.z);
        s
    }

    pub fn parse<'a>(
        magic: &str,
        lines: &mut impl Iterator<Item = (usize, &'a str)>,
    ) -> Result<Self> {
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::parse(0, format!("unexpected end of file, expected {what}")))
        };
        let (ln, first) = next("header")?;
        if first.trim() != format!("{magic} 1") {
            return Err(Error::parse(ln, format!("expected `{magic} 1` header")));
        }
        let (ln, l) = next("dims")?;
        let dims_v: Vec<usize> = keyed_values(ln, l, "dims", 3)?;
        let (ln, l) = next("voxel_size")?;
        let vs: Vec<f64> = keyed_values(ln, l, "voxel_size", 1)?;
        let (ln, l) = next("origin")?;
        let o: Vec<f64> = keyed_values(ln, l, "origin", 3)?;
        if dims_v.iter().any(|&d| d == 0) {
            return Err(Error::parse(2, "dims must be >= 1"));
        }
        Ok(GridHeader {
            dims: [dims_v[0], dims_v[1], dims_v[2]],
            voxel_size: vs[0],
            origin: Point3::new(o[0], o[1], o[2]),
        })
    }
}

fn keyed_values<T: std::str::FromStr>(
    ln: usize,
    line: &str,
    key: &str,
    n: usize,
) -> Result<Vec<T>> {
    let mut it = line.split_whitespace();
    if it.next() != Some(key) {
        return Err(Error::parse(ln, format!("expected `{key}` record")));
    }
    let vals: Vec<T> = it
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| Error::parse(ln, format!("invalid {key} value {t:?}")))
        })
        .collect::<Result<_>>()?;
    if vals.len() != n {
        return Err(Error::parse(
            ln,
            format!("`{key}` needs {n} values, found {}", vals.len()),
        ));
    }
    Ok(vals)
}
