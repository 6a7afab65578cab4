use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};
use crate::voxel::{surface_voxels, GridHeader, VoxelGrid, VoxelIndex};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

/// Human-contact labels over the surface voxels of one grid.
///
/// Only nonzero labels are stored; an absent voxel has label 0. Labels are
/// binary for ingested maps and probabilities for predicted ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactMap {
    pub grid_id: String,
    values: BTreeMap<VoxelIndex, f64>,
    pub threshold: f64,
}

impl ContactMap {
    pub fn new(
        grid_id: impl Into<String>,
        values: BTreeMap<VoxelIndex, f64>,
        threshold: f64,
    ) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::param("threshold", "must lie in (0, 1]"));
        }
        if let Some((idx, v)) = values.iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::param(
                "contact value",
                format!("{v} at {idx:?} outside [0, 1]"),
            ));
        }
        let values = values.into_iter().filter(|(_, v)| *v > 0.0).collect();
        Ok(ContactMap {
            grid_id: grid_id.into(),
            values,
            threshold,
        })
    }

    /// Binary map with label 1 on every listed voxel.
    pub fn from_indices(
        grid_id: impl Into<String>,
        indices: impl IntoIterator<Item = VoxelIndex>,
    ) -> Self {
        ContactMap {
            grid_id: grid_id.into(),
            values: indices.into_iter().map(|i| (i, 1.0)).collect(),
            threshold: DEFAULT_THRESHOLD,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::param("threshold", "must lie in (0, 1]"));
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn get(&self, idx: VoxelIndex) -> f64 {
        self.values.get(&idx).copied().unwrap_or(0.0)
    }

    /// Nonzero labels in index order.
    pub fn entries(&self) -> impl Iterator<Item = (VoxelIndex, f64)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of labels over the whole map.
    pub fn total(&self) -> f64 {
        self.values.values().fold(0.0, |a, v| a + v)
    }

    pub fn is_binary(&self) -> bool {
        self.values.values().all(|&v| v == 1.0)
    }

    /// Voxels whose label reaches the threshold, in index order.
    pub fn contacts(&self) -> Vec<VoxelIndex> {
        self.values
            .iter()
            .filter(|(_, &v)| v >= self.threshold)
            .map(|(k, _)| *k)
            .collect()
    }

    /// Checks that every labelled voxel is a surface voxel of `grid`.
    pub fn check_against(&self, grid: &VoxelGrid) -> Result<()> {
        let surface: HashSet<VoxelIndex> = surface_voxels(grid).into_iter().collect();
        match self.values.keys().find(|k| !surface.contains(k)) {
            Some(k) => Err(Error::param(
                "contact map",
                format!("voxel {k:?} is not on the surface"),
            )),
            None => Ok(()),
        }
    }

    /// Dense file representation placed on `grid`.
    pub fn to_file(&self, grid: &VoxelGrid) -> ContactFile {
        let [dx, dy, _] = grid.dims();
        let mut f = ContactFile::zeros(grid.dims(), grid.voxel_size(), grid.origin());
        for (idx, v) in self.entries() {
            f.values[idx.0[0] + dx * (idx.0[1] + dy * idx.0[2])] = v;
        }
        f
    }
}

/// Dense contact labels as stored on disk (`VCONTACT 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ContactFile {
    pub dims: [usize; 3],
    pub voxel_size: f64,
    pub origin: Point3<f64>,
    /// x fastest, z slowest.
    pub values: Vec<f64>,
}

impl ContactFile {
    pub fn zeros(dims: [usize; 3], voxel_size: f64, origin: Point3<f64>) -> Self {
        ContactFile {
            dims,
            voxel_size,
            origin,
            values: vec![0.0; dims.iter().product()],
        }
    }

    pub fn get(&self, idx: VoxelIndex) -> f64 {
        let [dx, dy, _] = self.dims;
        self.values[idx.0[0] + dx * (idx.0[1] + dy * idx.0[2])]
    }

    /// Renders `0`/`1` character rows when every label is binary, and
    /// space-separated float rows otherwise.
    pub fn to_text(&self) -> String {
        let header = GridHeader {
            dims: self.dims,
            voxel_size: self.voxel_size,
            origin: self.origin,
        };
        let mut s = header.render("VCONTACT");
        let binary = self.values.iter().all(|&v| v == 0.0 || v == 1.0);
        for row in self.values.chunks(self.dims[0]) {
            if binary {
                s.extend(row.iter().map(|&v| if v == 1.0 { '1' } else { '0' }));
            } else {
                for (i, v) in row.iter().enumerate() {
                    if i > 0 {
                        s.push(' ');
                    }
                    let _ = write!(s, "{v:?}");
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let h = GridHeader::parse("VCONTACT", &mut lines)?;
        let mut f = ContactFile::zeros(h.dims, h.voxel_size, h.origin);
        let [dx, dy, dz] = h.dims;
        for row in 0..dy * dz {
            let (ln, line) = lines
                .next()
                .ok_or_else(|| Error::parse(0, "unexpected end of file in contact rows"))?;
            let out = &mut f.values[row * dx..(row + 1) * dx];
            let is_char_row =
                !line.contains(char::is_whitespace) && line.bytes().all(|b| b == b'0' || b == b'1');
            if is_char_row {
                if line.len() != dx {
                    return Err(Error::parse(
                        ln,
                        format!("expected {dx} cells, found {}", line.len()),
                    ));
                }
                for (o, b) in out.iter_mut().zip(line.bytes()) {
                    *o = if b == b'1' { 1.0 } else { 0.0 };
                }
            } else {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != dx {
                    return Err(Error::parse(
                        ln,
                        format!("expected {dx} values, found {}", toks.len()),
                    ));
                }
                for (o, t) in out.iter_mut().zip(toks) {
                    let v: f64 = t
                        .parse()
                        .map_err(|_| Error::parse(ln, format!("invalid value {t:?}")))?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(Error::parse(ln, format!("value {v} outside [0, 1]")));
                    }
                    *o = v;
                }
            }
        }
        if let Some((ln, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(Error::parse(ln, format!("trailing content: {line:?}")));
        }
        Ok(f)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Restricts a dense contact file to the surface of `grid`.
///
/// Labels already on surface voxels are kept. Nonzero labels elsewhere move to
/// the nearest surface voxel (Euclidean in index space, ties to the lowest
/// index); when several labels land on one voxel the largest is kept.
pub fn load_contact_map(file: &ContactFile, grid: &VoxelGrid, grid_id: &str) -> Result<ContactMap> {
    if file.dims != grid.dims() {
        return Err(Error::DimsMismatch {
            expected: grid.dims(),
            found: file.dims,
        });
    }
    let surface = surface_voxels(grid);
    let mut is_surface = VoxelGrid::new(grid.dims(), grid.voxel_size(), grid.origin())?;
    for &s in &surface {
        is_surface.set(s, true);
    }
    let [dx, dy, _] = file.dims;
    let mut values: BTreeMap<VoxelIndex, f64> = BTreeMap::new();
    for (lin, &v) in file.values.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        let idx = VoxelIndex([lin % dx, (lin / dx) % dy, lin / (dx * dy)]);
        let target = if is_surface.is_occupied(idx) {
            Some(idx)
        } else {
            nearest_marked(&is_surface, idx)
        };
        if let Some(t) = target {
            let e = values.entry(t).or_insert(0.0);
            *e = e.max(v);
        }
    }
    if values.values().sum::<f64>() <= 0.0 {
        return Err(Error::EmptyContactMap);
    }
    ContactMap::new(grid_id, values, DEFAULT_THRESHOLD)
}

pub fn read_contact_map(
    path: impl AsRef<Path>,
    grid: &VoxelGrid,
    grid_id: &str,
) -> Result<ContactMap> {
    load_contact_map(&ContactFile::read(path)?, grid, grid_id)
}

/// Nearest occupied voxel of `marks` to `from`, searching shells of growing
/// Chebyshev radius until no closer voxel can exist.
fn nearest_marked(marks: &VoxelGrid, from: VoxelIndex) -> Option<VoxelIndex> {
    let dims = marks.dims();
    let max_r = *dims.iter().max()? as i64;
    let c = from.0.map(|v| v as i64);
    let mut best: Option<(i64, VoxelIndex)> = None;
    for r in 1..=max_r {
        if let Some((d2, _)) = best {
            // every voxel in shell r is at least r away
            if r * r > d2 {
                break;
            }
        }
        for dz in -r..=r {
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                        continue;
                    }
                    let p = [c[0] + dx, c[1] + dy, c[2] + dz];
                    if !marks.is_occupied_at(p) {
                        continue;
                    }
                    let idx = VoxelIndex(p.map(|v| v as usize));
                    let d2 = dx * dx + dy * dy + dz * dz;
                    if best.is_none_or(|(bd, bi)| d2 < bd || (d2 == bd && idx < bi)) {
                        best = Some((d2, idx));
                    }
                }
            }
        }
    }
    best.map(|(_, i)| i)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slab() -> VoxelGrid {
        VoxelGrid::from_fn([6, 6, 6], 0.01, Point3::origin(), |i| {
            (1..5).contains(&i.x()) && (1..5).contains(&i.y()) && (1..5).contains(&i.z())
        })
        .unwrap()
    }

    #[test]
    fn surface_labels_ingest_unchanged() {
        let g = slab();
        let surface = surface_voxels(&g);
        let mut f = ContactFile::zeros(g.dims(), g.voxel_size(), g.origin());
        for s in surface.iter().take(10) {
            let [dx, dy, _] = f.dims;
            f.values[s.0[0] + dx * (s.0[1] + dy * s.0[2])] = 1.0;
        }
        let cm = load_contact_map(&f, &g, "slab").unwrap();
        assert_eq!(cm.len(), 10);
        assert!(cm.is_binary());
        cm.check_against(&g).unwrap();
    }

    #[test]
    fn dims_mismatch_and_empty_maps_are_errors() {
        let g = slab();
        let f = ContactFile::zeros([6, 6, 5], 0.01, Point3::origin());
        assert!(matches!(
            load_contact_map(&f, &g, "x"),
            Err(Error::DimsMismatch { .. })
        ));
        let f = ContactFile::zeros(g.dims(), 0.01, Point3::origin());
        assert!(matches!(
            load_contact_map(&f, &g, "x"),
            Err(Error::EmptyContactMap)
        ));
    }

    #[test]
    fn binary_text_uses_character_rows() {
        let mut f = ContactFile::zeros([3, 1, 2], 0.5, Point3::new(1.0, 2.0, 3.0));
        f.values[1] = 1.0;
        f.values[5] = 1.0;
        let text = f.to_text();
        assert_eq!(
            text,
            "VCONTACT 1\ndims 3 1 2\nvoxel_size 0.5\norigin 1.0 2.0 3.0\n010\n001\n"
        );
        assert_eq!(ContactFile::from_text(&text).unwrap(), f);
    }

    #[test]
    fn probabilistic_text_uses_float_rows() {
        let mut f = ContactFile::zeros([2, 1, 1], 0.5, Point3::origin());
        f.values[0] = 0.25;
        let text = f.to_text();
        assert!(text.ends_with("0.25 0.0\n"));
        assert_eq!(ContactFile::from_text(&text).unwrap(), f);
        let bad = text.replace("0.25", "1.5");
        assert!(matches!(
            ContactFile::from_text(&bad),
            Err(Error::Parse { line: 5, .. })
        ));
    }
}
