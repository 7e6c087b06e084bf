//! Uniform Cartesian box grids and node-sampled fields.
//!
//! Nodes are stored with the x index varying fastest, i.e. row-major order
//! for the array shape `[z][y][x]` (`[y][x]` in 2D).

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, WntError};
use crate::linalg::Vector;

pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridDomain<const D: usize> {
    origin: Vector<D>,
    extent: Vector<D>,
    resolution: [usize; D],
    spacing: Vector<D>,
    nodes: [usize; D],
}

impl<const D: usize> GridDomain<D> {
    pub fn new(extent: Vector<D>, resolution: [usize; D]) -> Result<Self> {
        Self::with_origin([0.0; D], extent, resolution)
    }

    pub fn with_origin(origin: Vector<D>, extent: Vector<D>, resolution: [usize; D]) -> Result<Self> {
        if D != 2 && D != 3 {
            return Err(WntError::InvalidInput(format!("grid dimension must be 2 or 3, got {D}")));
        }
        let mut spacing = [0.0; D];
        let mut nodes = [0; D];
        for k in 0..D {
            if resolution[k] < MIN_RESOLUTION {
                return Err(WntError::InvalidInput(format!(
                    "resolution {} on axis {k} below minimum {MIN_RESOLUTION}",
                    resolution[k]
                )));
            }
            if !(extent[k] > 0.0 && extent[k].is_finite()) || !origin[k].is_finite() {
                return Err(WntError::InvalidInput(format!("invalid extent/origin on axis {k}")));
            }
            spacing[k] = extent[k] / resolution[k] as f64;
            nodes[k] = resolution[k] + 1;
        }
        Ok(Self {
            origin,
            extent,
            resolution,
            spacing,
            nodes,
        })
    }

    /// Unit square / cube with `n` cells per axis.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new([1.0; D], [n; D])
    }

    pub fn origin(&self) -> &Vector<D> {
        &self.origin
    }

    pub fn extent(&self) -> &Vector<D> {
        &self.extent
    }

    pub fn resolution(&self) -> &[usize; D] {
        &self.resolution
    }

    pub fn spacing(&self) -> &Vector<D> {
        &self.spacing
    }

    /// Smallest spacing over the axes.
    pub fn h_min(&self) -> f64 {
        self.spacing.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn nodes_per_axis(&self) -> &[usize; D] {
        &self.nodes
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn num_cells(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Linear stride of axis `k` in node storage.
    pub fn stride(&self, k: usize) -> usize {
        self.nodes[..k].iter().product()
    }

    pub fn node_index(&self, multi: &[usize; D]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for k in 0..D {
            idx += multi[k] * stride;
            stride *= self.nodes[k];
        }
        idx
    }

    pub fn node_multi(&self, mut idx: usize) -> [usize; D] {
        let mut m = [0; D];
        for k in 0..D {
            m[k] = idx % self.nodes[k];
            idx /= self.nodes[k];
        }
        m
    }

    pub fn node_position(&self, idx: usize) -> Vector<D> {
        let m = self.node_multi(idx);
        let mut p = [0.0; D];
        for k in 0..D {
            p[k] = self.origin[k] + m[k] as f64 * self.spacing[k];
        }
        p
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let m = self.node_multi(idx);
        (0..D).any(|k| m[k] == 0 || m[k] == self.nodes[k] - 1)
    }

    /// Cells are indexed by their lowest-corner node multi-index.
    pub fn cell_multi(&self, mut cell: usize) -> [usize; D] {
        let mut m = [0; D];
        for k in 0..D {
            m[k] = cell % self.resolution[k];
            cell /= self.resolution[k];
        }
        m
    }

    pub fn cell_base_node(&self, cell: usize) -> usize {
        self.node_index(&self.cell_multi(cell))
    }

    pub fn cell_center(&self, cell: usize) -> Vector<D> {
        let m = self.cell_multi(cell);
        let mut p = [0.0; D];
        for k in 0..D {
            p[k] = self.origin[k] + (m[k] as f64 + 0.5) * self.spacing[k];
        }
        p
    }

    /// Trapezoid quadrature weight of a node.
    pub fn node_weight(&self, idx: usize) -> f64 {
        let m = self.node_multi(idx);
        let mut w = self.cell_volume();
        for k in 0..D {
            if m[k] == 0 || m[k] == self.nodes[k] - 1 {
                w *= 0.5;
            }
        }
        w
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes()).filter(|&i| !self.is_boundary(i)).collect()
    }

    /// Nearest node to a physical point (clamped into the box).
    pub fn nearest_node(&self, p: &Vector<D>) -> usize {
        let mut m = [0; D];
        for k in 0..D {
            let t = ((p[k] - self.origin[k]) / self.spacing[k]).round();
            m[k] = t.clamp(0.0, (self.nodes[k] - 1) as f64) as usize;
        }
        self.node_index(&m)
    }

    pub fn contains(&self, p: &Vector<D>) -> bool {
        (0..D).all(|k| p[k] >= self.origin[k] && p[k] <= self.origin[k] + self.extent[k])
    }

    /// Distance from a point to the box boundary (negative outside).
    pub fn distance_to_boundary(&self, p: &Vector<D>) -> f64 {
        (0..D)
            .map(|k| (p[k] - self.origin[k]).min(self.origin[k] + self.extent[k] - p[k]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.resolution == other.resolution
            && (0..D).all(|k| {
                (self.extent[k] - other.extent[k]).abs() <= 1e-12 * self.extent[k]
                    && (self.origin[k] - other.origin[k]).abs() <= 1e-12 * (1.0 + self.origin[k].abs())
            })
    }

    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(WntError::GridMismatch(format!(
                "resolution {:?} / extent {:?} vs resolution {:?} / extent {:?}",
                self.resolution, self.extent, other.resolution, other.extent
            )))
        }
    }

    /// Multilinear interpolation weights for a point inside the box:
    /// returns up to `2^D` (node, weight) pairs.
    pub fn interpolation_stencil(&self, p: &Vector<D>) -> Result<Vec<(usize, f64)>> {
        if !self.contains(p) {
            return Err(WntError::InvalidInput(format!("point {p:?} outside the grid")));
        }
        let mut base = [0; D];
        let mut frac = [0.0; D];
        for k in 0..D {
            let t = (p[k] - self.origin[k]) / self.spacing[k];
            let i = (t.floor() as usize).min(self.resolution[k] - 1);
            base[k] = i;
            frac[k] = t - i as f64;
        }
        let mut out = Vec::with_capacity(1 << D);
        for corner in 0..(1usize << D) {
            let mut m = base;
            let mut w = 1.0;
            for k in 0..D {
                if corner >> k & 1 == 1 {
                    m[k] += 1;
                    w *= frac[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            out.push((self.node_index(&m), w));
        }
        Ok(out)
    }

    fn header(&self, components: usize) -> FieldHeader {
        FieldHeader {
            dim: D,
            resolution: self.resolution.to_vec(),
            extent: self.extent.to_vec(),
            origin: self.origin.to_vec(),
            components,
            layout: "row-major, x fastest; components interleaved per node".into(),
            dtype: "f64-le".into(),
        }
    }
}

/// JSON sidecar describing a binary field file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldHeader {
    pub dim: usize,
    pub resolution: Vec<usize>,
    pub extent: Vec<f64>,
    #[serde(default)]
    pub origin: Vec<f64>,
    #[serde(default = "one")]
    pub components: usize,
    #[serde(default)]
    pub layout: String,
    #[serde(default)]
    pub dtype: String,
}

fn one() -> usize {
    1
}

fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Writes `data` as little-endian f64 to `path` and the JSON header next to it
/// (same stem, `.json` extension).
pub fn write_field_binary<const D: usize>(
    path: &Path,
    domain: &GridDomain<D>,
    components: usize,
    data: &[f64],
) -> Result<()> {
    if data.len() != domain.num_nodes() * components {
        return Err(WntError::GridMismatch(format!(
            "{} values for {} nodes x {components} components",
            data.len(),
            domain.num_nodes()
        )));
    }
    let mut bytes = Vec::with_capacity(data.len() * 8);
    for v in data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;
    let header = serde_json::to_string_pretty(&domain.header(components))?;
    fs::write(sidecar_path(path), header)?;
    Ok(())
}

/// Reads a binary field and its sidecar; returns the domain and the raw values.
pub fn read_field_binary<const D: usize>(path: &Path) -> Result<(GridDomain<D>, usize, Vec<f64>)> {
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
    if header.dim != D || header.resolution.len() != D || header.extent.len() != D {
        return Err(WntError::GridMismatch(format!("sidecar describes a {}D grid", header.dim)));
    }
    let mut extent = [0.0; D];
    let mut res = [0; D];
    let mut origin = [0.0; D];
    for k in 0..D {
        extent[k] = header.extent[k];
        res[k] = header.resolution[k];
        origin[k] = header.origin.get(k).copied().unwrap_or(0.0);
    }
    let domain = GridDomain::with_origin(origin, extent, res)?;
    let bytes = fs::read(path)?;
    let expected = domain.num_nodes() * header.components * 8;
    if bytes.len() != expected {
        return Err(WntError::GridMismatch(format!(
            "binary file has {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((domain, header.components, data))
}

/// Real scalar field sampled at the grid nodes. Boundary nodes carry the
/// Dirichlet trace.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<const D: usize> {
    domain: GridDomain<D>,
    values: Vec<f64>,
}

impl<const D: usize> GridField<D> {
    pub fn zeros(domain: GridDomain<D>) -> Self {
        Self {
            values: vec![0.0; domain.num_nodes()],
            domain,
        }
    }

    pub fn from_fn(domain: GridDomain<D>, f: impl Fn(&Vector<D>) -> f64) -> Self {
        let values = (0..domain.num_nodes()).map(|i| f(&domain.node_position(i))).collect();
        Self { domain, values }
    }

    pub fn from_values(domain: GridDomain<D>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.num_nodes() {
            return Err(WntError::GridMismatch(format!(
                "{} values for {} nodes",
                values.len(),
                domain.num_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(WntError::InvalidInput("field contains non-finite values".into()));
        }
        Ok(Self { domain, values })
    }

    pub fn domain(&self) -> &GridDomain<D> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, multi: &[usize; D]) -> f64 {
        self.values[self.domain.node_index(multi)]
    }

    /// Copies the boundary trace of `other` onto this field.
    pub fn set_boundary_from(&mut self, other: &GridField<D>) -> Result<()> {
        self.domain.check_compatible(&other.domain)?;
        for i in 0..self.values.len() {
            if self.domain.is_boundary(i) {
                self.values[i] = other.values[i];
            }
        }
        Ok(())
    }

    pub fn sup_distance(&self, other: &GridField<D>) -> Result<f64> {
        self.domain.check_compatible(&other.domain)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Trapezoid-rule mean over the box.
    pub fn mean(&self) -> f64 {
        let total: f64 = (0..self.values.len())
            .map(|i| self.values[i] * self.domain.node_weight(i))
            .sum();
        total / self.domain.extent.iter().product::<f64>()
    }

    /// Multilinear interpolation at a physical point.
    pub fn interpolate(&self, p: &Vector<D>) -> Result<f64> {
        Ok(self
            .domain
            .interpolation_stencil(p)?
            .into_iter()
            .map(|(i, w)| w * self.values[i])
            .sum())
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            domain: self.domain,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        write_field_binary(path, &self.domain, 1, &self.values)
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let (domain, components, data) = read_field_binary::<D>(path)?;
        if components != 1 {
            return Err(WntError::GridMismatch(format!("expected a scalar field, got {components} components")));
        }
        Self::from_values(domain, data)
    }

    /// CSV with columns `x, y[, z], value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.values.len() * 40);
        out.push_str(if D == 2 { "x,y,value\n" } else { "x,y,z,value\n" });
        for (i, v) in self.values.iter().enumerate() {
            let p = self.domain.node_position(i);
            for c in p.iter() {
                out.push_str(&format!("{c:.9},"));
            }
            out.push_str(&format!("{v:.12e}\n"));
        }
        let mut f = fs::File::create(path)?;
        f.write_all(out.as_bytes())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let d = GridDomain::<3>::new([1.0, 2.0, 3.0], [8, 9, 10]).unwrap();
        for idx in [0, 17, 500, d.num_nodes() - 1] {
            assert_eq!(d.node_index(&d.node_multi(idx)), idx);
        }
        assert_eq!(d.stride(1), 9);
        assert_eq!(d.stride(2), 90);
        assert_eq!(d.num_cells(), 720);
    }

    #[test]
    fn rejects_coarse_grids() {
        assert!(GridDomain::<2>::new([1.0, 1.0], [4, 16]).is_err());
        assert!(GridDomain::<2>::new([0.0, 1.0], [16, 16]).is_err());
    }

    #[test]
    fn trapezoid_mean_of_linear_function_is_exact() {
        let d = GridDomain::<2>::unit(16).unwrap();
        let f = GridField::from_fn(d, |p| 2.0 * p[0] + p[1]);
        assert!((f.mean() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn interpolation_reproduces_bilinear_functions() {
        let d = GridDomain::<2>::new([2.0, 1.0], [10, 8]).unwrap();
        let f = GridField::from_fn(d, |p| 1.0 + 3.0 * p[0] - p[1] + 0.5 * p[0] * p[1]);
        let q = [1.234, 0.777];
        let v = f.interpolate(&q).unwrap();
        assert!((v - (1.0 + 3.0 * q[0] - q[1] + 0.5 * q[0] * q[1])).abs() < 1e-13);
        assert!(f.interpolate(&[2.5, 0.0]).is_err());
    }

    #[test]
    fn binary_round_trip_with_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let d = GridDomain::<2>::new([1.0, 0.5], [8, 12]).unwrap();
        let f = GridField::from_fn(d, |p| p[0].sin() + p[1]);
        let path = dir.path().join("u.bin");
        f.write_binary(&path).unwrap();
        let g = GridField::<2>::read_binary(&path).unwrap();
        assert_eq!(f, g);
        let header: FieldHeader =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("u.json")).unwrap()).unwrap();
        assert_eq!(header.dim, 2);
        assert_eq!(header.resolution, vec![8, 12]);
        assert_eq!(std::fs::read(&path).unwrap().len(), 9 * 13 * 8);
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let dir = tempfile::tempdir().unwrap();
        let d = GridDomain::<3>::unit(8).unwrap();
        let f = GridField::zeros(d);
        let path = dir.path().join("u.csv");
        f.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + 729);
        assert!(text.starts_with("x,y,z,value"));
    }
}
