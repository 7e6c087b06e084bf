use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, WntError};
use crate::finsler::WntStructure;
use crate::linalg::{self, Vector};

use super::geometry::{f_length, segment_f_length, FilamentSystem};

/// `d_F(x, y)` approximated by the `F_B` norm of the chord at its midpoint.
pub fn chord_distance(s: &WntStructure<3>, x: &Vector<3>, y: &Vector<3>) -> Result<f64> {
    let mid = linalg::scale(&linalg::add(x, y), 0.5);
    s.f_norm(&mid, &linalg::sub(x, y))
}

/// Regularized Coulomb gradient `−(x − y) / (4π(d_F³ + ε³))`.
pub fn regularized_kernel_gradient(s: &WntStructure<3>, eps_reg: f64, x: &Vector<3>, y: &Vector<3>) -> Result<Vector<3>> {
    if !(eps_reg >= 0.0) {
        return Err(WntError::InvalidInput(format!("eps_reg must be >= 0, got {eps_reg}")));
    }
    let d = chord_distance(s, x, y)?;
    let den = 4.0 * PI * (d * d * d + eps_reg * eps_reg * eps_reg);
    if den == 0.0 {
        return Err(WntError::InvalidInput("kernel evaluated at its pole without regularization".into()));
    }
    Ok(linalg::scale(&linalg::sub(x, y), -1.0 / den))
}

/// Quadrature node of one segment.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SegmentNode {
    pub filament: usize,
    pub segment: usize,
    pub mid: Vector<3>,
    pub length_f: f64,
    pub degree: i32,
}

pub(crate) fn segment_nodes(sys: &FilamentSystem) -> Result<Vec<SegmentNode>> {
    let mut out = Vec::new();
    for (i, f) in sys.filaments().iter().enumerate() {
        for s in 0..f.num_segments() {
            let (a, b) = f.segment(s);
            out.push(SegmentNode {
                filament: i,
                segment: s,
                mid: linalg::scale(&linalg::add(&a, &b), 0.5),
                length_f: segment_f_length(sys.structure(), f, s)?,
                degree: f.degree(),
            });
        }
    }
    Ok(out)
}

/// Field `Σ_j |d_j| Σ_s ℓ_s ∇G_ε(x, m_s)` with the two segments adjacent to
/// `exclude = (filament, vertex)` left out.
pub(crate) fn field_from_nodes(
    sys: &FilamentSystem,
    nodes: &[SegmentNode],
    x: &Vector<3>,
    exclude: Option<(usize, usize)>,
) -> Result<Vector<3>> {
    let mut out = [0.0; 3];
    for node in nodes {
        if let Some((i, k)) = exclude {
            if node.filament == i {
                let f = &sys.filaments()[i];
                let n = f.len();
                if node.segment == k || (f.closed() || k > 0) && node.segment == (k + n - 1) % n {
                    continue;
                }
            }
        }
        let kg = regularized_kernel_gradient(sys.structure(), sys.eps_reg(), x, &node.mid)?;
        linalg::axpy(&mut out, node.degree.unsigned_abs() as f64 * node.length_f, &kg);
    }
    Ok(out)
}

/// `⟨ℋ(x), n⟩` for the regularized Biot–Savart field of all filaments.
pub fn biot_savart(sys: &FilamentSystem, x: &Vector<3>, n: &Vector<3>) -> Result<f64> {
    let nodes = segment_nodes(sys)?;
    Ok(linalg::dot(&field_from_nodes(sys, &nodes, x, None)?, n))
}

/// Biot–Savart field at vertex `k` of filament `idx`, without the adjacent
/// segments.
pub fn vertex_field(sys: &FilamentSystem, idx: usize, k: usize) -> Result<Vector<3>> {
    let f = sys
        .filaments()
        .get(idx)
        .ok_or_else(|| WntError::InvalidInput(format!("filament index {idx} out of range")))?;
    if k >= f.len() {
        return Err(WntError::InvalidInput(format!("vertex {k} out of range")));
    }
    let nodes = segment_nodes(sys)?;
    field_from_nodes(sys, &nodes, &f.vertices()[k], Some((idx, k)))
}

/// Terms of `𝒢₀ = π Σ|d_i| ℒ_F(Γ_i) + (σ²/2κ_th) 𝒲`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G0Terms {
    pub length_term: f64,
    /// Truncated interaction `𝒲` including the Coulomb counterterm.
    pub interaction: f64,
    /// Part of the pair sum between distinct filaments.
    pub cross: f64,
    pub counterterm: f64,
    pub rho_cut: f64,
    pub total: f64,
}

/// Cut used by [`g0_terms`]: the override, or two mean segment lengths.
pub fn rho_cut(sys: &FilamentSystem) -> Result<f64> {
    let min = 2.0 * sys.mean_segment_length();
    let rho = sys.rho_cut_override().unwrap_or(min);
    if rho < min * (1.0 - 1e-12) {
        return Err(WntError::InvalidInput(format!(
            "rho_cut {rho:.4e} below twice the mean segment length ({min:.4e})"
        )));
    }
    Ok(rho)
}

fn length_term(sys: &FilamentSystem) -> Result<f64> {
    let mut total = 0.0;
    for (i, f) in sys.filaments().iter().enumerate() {
        total += PI * f.degree().unsigned_abs() as f64 * f_length(sys, i)?;
    }
    Ok(total)
}

/// All terms of the renormalized filament energy.
///
/// The pair sum runs over ordered segment-midpoint pairs with `d_F > ρ_cut`,
/// with kernel `1/(4π(d_F + ε_reg))`.
pub fn g0_terms(sys: &FilamentSystem) -> Result<G0Terms> {
    let rho = rho_cut(sys)?;
    let length = length_term(sys)?;
    let nodes = segment_nodes(sys)?;
    let eps = sys.eps_reg();
    let rows: Vec<(f64, f64)> = nodes
        .par_iter()
        .enumerate()
        .map(|(a, na)| -> Result<(f64, f64)> {
            let mut all = 0.0;
            let mut cross = 0.0;
            for (b, nb) in nodes.iter().enumerate() {
                if a == b {
                    continue;
                }
                let d = chord_distance(sys.structure(), &na.mid, &nb.mid)?;
                if d <= rho {
                    continue;
                }
                let w = (na.degree * nb.degree) as f64 * na.length_f * nb.length_f / (4.0 * PI * (d + eps));
                all += w;
                if na.filament != nb.filament {
                    cross += w;
                }
            }
            Ok((all, cross))
        })
        .collect::<Result<_>>()?;
    let (mut pair, mut cross) = (0.0, 0.0);
    for (p, c) in rows {
        pair += p;
        cross += c;
    }
    let mut counter = 0.0;
    for (i, f) in sys.filaments().iter().enumerate() {
        counter += (f.degree() * f.degree()) as f64 * f_length(sys, i)? / (4.0 * PI * rho);
    }
    let interaction = pair - counter;
    let prefactor = sys.sigma() * sys.sigma() / (2.0 * sys.kappa_th());
    Ok(G0Terms {
        length_term: length,
        interaction,
        cross,
        counterterm: counter,
        rho_cut: rho,
        total: length + prefactor * interaction,
    })
}

/// `𝒢₀`. Without thermal coupling only the length term is evaluated.
pub fn renormalized_g0(sys: &FilamentSystem) -> Result<f64> {
    if sys.sigma() == 0.0 {
        rho_cut(sys)?;
        return length_term(sys);
    }
    Ok(g0_terms(sys)?.total)
}
