use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, WntError};
use crate::finsler::{AnisotropyField, WntStructure};
use crate::linalg::{self, Matrix, Vector};

/// Oriented polygonal vortex filament with integer multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filament {
    vertices: Vec<Vector<3>>,
    closed: bool,
    degree: i32,
}

impl Filament {
    pub fn new(vertices: Vec<Vector<3>>, closed: bool, degree: i32) -> Result<Self> {
        let f = Self {
            vertices,
            closed,
            degree,
        };
        f.validate()?;
        Ok(f)
    }

    /// Regular `n`-gon of circumradius `radius` in the plane `z = center[2]`,
    /// counter-clockwise about `+e₃`.
    pub fn circle(center: Vector<3>, radius: f64, n: usize, degree: i32) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(WntError::InvalidInput(format!("circle radius must be positive, got {radius}")));
        }
        let vertices = (0..n)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / n as f64;
                [center[0] + radius * th.cos(), center[1] + radius * th.sin(), center[2]]
            })
            .collect();
        Self::new(vertices, true, degree)
    }

    /// Open straight polyline from `a` to `b` with `n` vertices.
    pub fn straight(a: Vector<3>, b: Vector<3>, n: usize, degree: i32) -> Result<Self> {
        if n < 2 {
            return Err(WntError::InvalidInput("a straight filament needs at least 2 vertices".into()));
        }
        let vertices = (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                [0, 1, 2].map(|c| a[c] + t * (b[c] - a[c]))
            })
            .collect();
        Self::new(vertices, false, degree)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.degree == 0 {
            return Err(WntError::InvalidInput("filament multiplicity must be nonzero".into()));
        }
        if self.closed && n < 8 {
            return Err(WntError::InvalidInput(format!("closed filament needs at least 8 vertices, got {n}")));
        }
        if n < 2 {
            return Err(WntError::InvalidInput(format!("filament needs at least 2 vertices, got {n}")));
        }
        if let Some(k) = self.vertices.iter().position(|v| !linalg::is_finite(v)) {
            return Err(WntError::InvalidInput(format!("vertex {k} is not finite")));
        }
        for s in 0..self.num_segments() {
            let (a, b) = self.segment(s);
            if a == b {
                return Err(WntError::InvalidInput(format!("segment {s} is degenerate")));
            }
        }
        self.check_self_intersection()
    }

    /// Vertices farther than four mean segments apart along the curve must
    /// stay more than two mean segments apart in space.
    fn check_self_intersection(&self) -> Result<()> {
        let n = self.vertices.len();
        let mean = self.mean_segment_length();
        let tol = 2.0 * mean;
        let mut arc = vec![0.0; n];
        for k in 1..n {
            arc[k] = arc[k - 1] + linalg::norm(&linalg::sub(&self.vertices[k], &self.vertices[k - 1]));
        }
        let total = self.euclidean_length();
        for i in 0..n {
            for j in i + 1..n {
                let mut s = arc[j] - arc[i];
                if self.closed {
                    s = s.min(total - s);
                }
                if s <= 2.0 * tol {
                    continue;
                }
                let d = linalg::norm(&linalg::sub(&self.vertices[i], &self.vertices[j]));
                if d <= tol {
                    return Err(WntError::InvalidInput(format!(
                        "filament self-intersects: vertices {i} and {j} are {d:.3e} apart"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Vector<3>] {
        &self.vertices
    }

    pub(crate) fn vertices_mut(&mut self) -> &mut Vec<Vector<3>> {
        &mut self.vertices
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn degree(&self) -> i32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn num_segments(&self) -> usize {
        let n = self.vertices.len();
        if self.closed {
            n
        } else {
            n.saturating_sub(1)
        }
    }

    /// Endpoints of segment `s` (from vertex `s` to its successor).
    pub fn segment(&self, s: usize) -> (Vector<3>, Vector<3>) {
        let n = self.vertices.len();
        (self.vertices[s], self.vertices[(s + 1) % n])
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        (0..self.num_segments())
            .map(|s| {
                let (a, b) = self.segment(s);
                linalg::norm(&linalg::sub(&b, &a))
            })
            .collect()
    }

    pub fn euclidean_length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    pub fn mean_segment_length(&self) -> f64 {
        self.euclidean_length() / self.num_segments() as f64
    }

    pub fn min_segment_length(&self) -> f64 {
        self.segment_lengths().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn max_segment_length(&self) -> f64 {
        self.segment_lengths().into_iter().fold(0.0, f64::max)
    }

    pub fn centroid(&self) -> Vector<3> {
        let mut c = [0.0; 3];
        for v in &self.vertices {
            linalg::axpy(&mut c, 1.0, v);
        }
        linalg::scale(&c, 1.0 / self.vertices.len() as f64)
    }

    /// Mean vertex distance from the centroid.
    pub fn mean_radius(&self) -> f64 {
        let c = self.centroid();
        self.vertices.iter().map(|v| linalg::norm(&linalg::sub(v, &c))).sum::<f64>() / self.vertices.len() as f64
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        if self.closed {
            // keep vertex 0 in place
            vertices.rotate_right(1);
        }
        Self {
            vertices,
            closed: self.closed,
            degree: self.degree,
        }
    }

    /// Image under `x ↦ Q x + b`.
    pub fn transformed(&self, q: &Matrix<3>, b: &Vector<3>) -> Self {
        Self {
            vertices: self.vertices.iter().map(|v| linalg::add(&linalg::matvec(q, v), b)).collect(),
            closed: self.closed,
            degree: self.degree,
        }
    }

    /// Vertex `k` has neighbours on both sides.
    pub fn is_interior(&self, k: usize) -> bool {
        self.closed || (k > 0 && k + 1 < self.vertices.len())
    }

    /// Previous and next vertex indices of an interior vertex.
    pub(crate) fn neighbours(&self, k: usize) -> (usize, usize) {
        let n = self.vertices.len();
        ((k + n - 1) % n, (k + 1) % n)
    }

    /// Resamples to uniform arclength with the same vertex count, keeping
    /// vertex 0 (and the last vertex of an open filament) fixed.
    pub(crate) fn redistribute(&mut self) {
        let n = self.vertices.len();
        let lengths = self.segment_lengths();
        let total: f64 = lengths.iter().sum();
        let pieces = if self.closed { n } else { n - 1 };
        let mut out = Vec::with_capacity(n);
        let mut seg = 0;
        let mut start = 0.0;
        for k in 0..n {
            if !self.closed && k == n - 1 {
                out.push(self.vertices[n - 1]);
                break;
            }
            let target = total * k as f64 / pieces as f64;
            while seg + 1 < lengths.len() && start + lengths[seg] < target {
                start += lengths[seg];
                seg += 1;
            }
            let (a, b) = self.segment(seg);
            let t = ((target - start) / lengths[seg]).clamp(0.0, 1.0);
            out.push([0, 1, 2].map(|c| a[c] + t * (b[c] - a[c])));
        }
        self.vertices = out;
    }
}

/// Filaments in a common double-phase medium together with the thermal and
/// kernel parameters of the effective motion law.
#[derive(Debug, Clone)]
pub struct FilamentSystem {
    filaments: Vec<Filament>,
    structure: WntStructure<3>,
    sigma: f64,
    kappa_th: f64,
    eps_reg: f64,
    mobility: f64,
    rho_cut: Option<f64>,
}

impl FilamentSystem {
    pub fn new(
        filaments: Vec<Filament>,
        anisotropy: AnisotropyField<3>,
        sigma: f64,
        kappa_th: f64,
        eps_reg: f64,
    ) -> Result<Self> {
        let sys = Self {
            filaments,
            structure: WntStructure::new(anisotropy),
            sigma,
            kappa_th,
            eps_reg,
            mobility: 1.0,
            rho_cut: None,
        };
        sys.validate()?;
        Ok(sys)
    }

    /// Euclidean medium without thermal coupling.
    pub fn euclidean(filaments: Vec<Filament>, eps_reg: f64) -> Result<Self> {
        Self::new(filaments, AnisotropyField::euclidean(), 0.0, 1.0, eps_reg)
    }

    pub fn with_mobility(mut self, mobility: f64) -> Result<Self> {
        if !(mobility > 0.0 && mobility.is_finite()) {
            return Err(WntError::InvalidInput(format!("mobility must be positive, got {mobility}")));
        }
        self.mobility = mobility;
        Ok(self)
    }

    /// Fixes the renormalization cut instead of tying it to the mesh.
    pub fn with_rho_cut(mut self, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(WntError::InvalidInput(format!("rho_cut must be positive, got {rho}")));
        }
        self.rho_cut = Some(rho);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(WntError::InvalidInput(format!("sigma must be >= 0, got {}", self.sigma)));
        }
        if !(self.kappa_th > 0.0 && self.kappa_th.is_finite()) {
            return Err(WntError::InvalidInput(format!("kappa_th must be positive, got {}", self.kappa_th)));
        }
        if !(self.eps_reg > 0.0 && self.eps_reg.is_finite()) {
            return Err(WntError::InvalidInput(format!("eps_reg must be positive, got {}", self.eps_reg)));
        }
        for (i, f) in self.filaments.iter().enumerate() {
            f.validate()
                .map_err(|e| WntError::InvalidInput(format!("filament {i}: {e}")))?;
        }
        let sep = self.min_separation();
        if sep <= 2.0 * self.eps_reg {
            return Err(WntError::ConfigurationTooTight(format!(
                "filament separation {sep:.3e} not above 2 eps_reg = {:.3e}",
                2.0 * self.eps_reg
            )));
        }
        Ok(())
    }

    pub fn filaments(&self) -> &[Filament] {
        &self.filaments
    }

    pub(crate) fn filaments_mut(&mut self) -> &mut [Filament] {
        &mut self.filaments
    }

    pub fn structure(&self) -> &WntStructure<3> {
        &self.structure
    }

    pub fn anisotropy(&self) -> &AnisotropyField<3> {
        self.structure.anisotropy()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn kappa_th(&self) -> f64 {
        self.kappa_th
    }

    pub fn eps_reg(&self) -> f64 {
        self.eps_reg
    }

    pub fn mobility(&self) -> f64 {
        self.mobility
    }

    pub fn rho_cut_override(&self) -> Option<f64> {
        self.rho_cut
    }

    /// Smallest vertex distance between distinct filaments (infinite for one).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.filaments.len() {
            for j in i + 1..self.filaments.len() {
                for a in self.filaments[i].vertices() {
                    for b in self.filaments[j].vertices() {
                        best = best.min(linalg::norm(&linalg::sub(a, b)));
                    }
                }
            }
        }
        best
    }

    pub fn mean_segment_length(&self) -> f64 {
        let (sum, n) = self
            .filaments
            .iter()
            .fold((0.0, 0usize), |(s, n), f| (s + f.euclidean_length(), n + f.num_segments()));
        sum / n.max(1) as f64
    }

    pub fn min_segment_length(&self) -> f64 {
        self.filaments.iter().map(Filament::min_segment_length).fold(f64::INFINITY, f64::min)
    }

    /// Same system rigidly moved by `x ↦ Q x + b`.
    pub fn transformed(&self, q: &Matrix<3>, b: &Vector<3>) -> Self {
        let mut out = self.clone();
        out.filaments = self.filaments.iter().map(|f| f.transformed(q, b)).collect();
        out
    }

    pub fn with_filaments(&self, filaments: Vec<Filament>) -> Result<Self> {
        let mut out = self.clone();
        out.filaments = filaments;
        out.validate()?;
        Ok(out)
    }
}

/// `F_B` length `Σ_s F_B(midpoint, edge)` of filament `idx`.
pub fn f_length(sys: &FilamentSystem, idx: usize) -> Result<f64> {
    let f = sys
        .filaments
        .get(idx)
        .ok_or_else(|| WntError::InvalidInput(format!("filament index {idx} out of range")))?;
    let mut total = 0.0;
    for s in 0..f.num_segments() {
        total += segment_f_length(&sys.structure, f, s)?;
    }
    Ok(total)
}

pub(crate) fn segment_f_length(s: &WntStructure<3>, f: &Filament, seg: usize) -> Result<f64> {
    let (a, b) = f.segment(seg);
    let e = linalg::sub(&b, &a);
    if linalg::norm(&e) == 0.0 {
        return Err(WntError::InvalidInput(format!("segment {seg} is degenerate")));
    }
    let mid = linalg::scale(&linalg::add(&a, &b), 0.5);
    s.f_norm(&mid, &e)
}

/// Discrete curvature at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VertexCurvature {
    pub value: f64,
    /// Unit normal the value refers to (zero when undefined).
    pub normal: Vector<3>,
    pub tangent: Vector<3>,
    /// Neighbouring edges are collinear: no principal normal exists.
    pub degenerate: bool,
}

/// Local turning data at an interior vertex.
pub(crate) struct VertexFrame {
    /// `T₊ − T₋` for the unit edge tangents on either side.
    pub turn: Vector<3>,
    /// Unit vertex tangent.
    pub tangent: Vector<3>,
    /// Principal normal, `None` for collinear neighbours.
    pub normal: Option<Vector<3>>,
    /// Dual arclength: half the two adjacent edge lengths.
    pub ds: f64,
}

pub(crate) fn vertex_frame(f: &Filament, k: usize) -> Result<VertexFrame> {
    if k >= f.len() || !f.is_interior(k) {
        return Err(WntError::InvalidInput(format!("vertex {k} is not an interior vertex")));
    }
    let (p, n) = f.neighbours(k);
    let v = f.vertices();
    let em = linalg::sub(&v[k], &v[p]);
    let ep = linalg::sub(&v[n], &v[k]);
    let (lm, lp) = (linalg::norm(&em), linalg::norm(&ep));
    if lm == 0.0 || lp == 0.0 {
        return Err(WntError::InvalidInput(format!("degenerate segment next to vertex {k}")));
    }
    let tm = linalg::scale(&em, 1.0 / lm);
    let tp = linalg::scale(&ep, 1.0 / lp);
    let sum = linalg::add(&tm, &tp);
    let sn = linalg::norm(&sum);
    if sn == 0.0 {
        return Err(WntError::InvalidInput(format!("filament folds back on itself at vertex {k}")));
    }
    let tangent = linalg::scale(&sum, 1.0 / sn);
    let turn = linalg::sub(&tp, &tm);
    let mut perp = turn;
    linalg::axpy(&mut perp, -linalg::dot(&turn, &tangent), &tangent);
    let pn = linalg::norm(&perp);
    let normal = if pn > 1e-12 * linalg::norm(&turn).max(1e-300) && pn > 1e-14 {
        Some(linalg::scale(&perp, 1.0 / pn))
    } else {
        None
    };
    Ok(VertexFrame {
        turn,
        tangent,
        normal,
        ds: 0.5 * (lm + lp),
    })
}

fn curvature_along(sys: &FilamentSystem, x: &Vector<3>, frame: &VertexFrame, n: &Vector<3>) -> Result<f64> {
    let g = sys.anisotropy().g();
    let num = linalg::dot(&linalg::matvec(g, &frame.turn), n);
    let f = sys.structure.f_norm(x, &frame.tangent)?;
    Ok(num / (frame.ds * f * f))
}

fn checked_vertex(sys: &FilamentSystem, idx: usize, k: usize) -> Result<&Filament> {
    let f = sys
        .filaments
        .get(idx)
        .ok_or_else(|| WntError::InvalidInput(format!("filament index {idx} out of range")))?;
    if k >= f.len() {
        return Err(WntError::InvalidInput(format!("vertex {k} out of range")));
    }
    Ok(f)
}

/// `κ ≈ ⟨g(T₊ − T₋), n⟩ / (ds·‖t‖²_{F_B})` along the discrete principal normal.
pub fn curvature(sys: &FilamentSystem, idx: usize, k: usize) -> Result<VertexCurvature> {
    let f = checked_vertex(sys, idx, k)?;
    let frame = vertex_frame(f, k)?;
    match frame.normal {
        Some(n) => Ok(VertexCurvature {
            value: curvature_along(sys, &f.vertices()[k], &frame, &n)?,
            normal: n,
            tangent: frame.tangent,
            degenerate: false,
        }),
        None => Ok(VertexCurvature {
            value: 0.0,
            normal: [0.0; 3],
            tangent: frame.tangent,
            degenerate: true,
        }),
    }
}

/// Curvature measured against the normal `axis × t`, which flips with the
/// orientation of the filament.
pub fn signed_curvature(sys: &FilamentSystem, idx: usize, k: usize, axis: &Vector<3>) -> Result<VertexCurvature> {
    let f = checked_vertex(sys, idx, k)?;
    let frame = vertex_frame(f, k)?;
    let c = linalg::cross(axis, &frame.tangent);
    let cn = linalg::norm(&c);
    if !(cn > 1e-12) {
        return Err(WntError::InvalidInput(format!("reference axis is parallel to the tangent at vertex {k}")));
    }
    let n = linalg::scale(&c, 1.0 / cn);
    Ok(VertexCurvature {
        value: curvature_along(sys, &f.vertices()[k], &frame, &n)?,
        normal: n,
        tangent: frame.tangent,
        degenerate: frame.normal.is_none(),
    })
}
