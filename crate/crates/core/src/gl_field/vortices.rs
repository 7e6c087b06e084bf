use std::f64::consts::PI;

use crate::grid::GridDomain;
use crate::linalg::Vector;
use crate::vortex2d::VortexConfig;

use super::complex::{wrap_phase, ComplexGridField};

/// Corners with modulus at or below this are treated as zeros of the field.
pub const CORE_MODULUS: f64 = 1e-12;

/// Plaquette phase winding of a complex field.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianField {
    domain: GridDomain<2>,
    /// Local degree per plaquette (cell order); 0 on core plaquettes.
    pub degree: Vec<f64>,
    /// Plaquettes with a vanishing corner.
    pub core: Vec<bool>,
}

impl JacobianField {
    pub fn domain(&self) -> &GridDomain<2> {
        &self.domain
    }

    /// Sum of the plaquette degrees (meaningful when no plaquette is core).
    pub fn total(&self) -> f64 {
        self.degree.iter().sum()
    }

    pub fn core_count(&self) -> usize {
        self.core.iter().filter(|&&c| c).count()
    }
}

fn phase(u: &ComplexGridField, i: usize) -> f64 {
    let (a, b) = u.value(i);
    b.atan2(a)
}

/// Winding number of `u` along a closed node loop (last node joins the first).
pub fn winding_along(u: &ComplexGridField, nodes: &[usize]) -> Option<f64> {
    if nodes.iter().any(|&i| u.modulus(i) <= CORE_MODULUS) {
        return None;
    }
    let mut acc = 0.0;
    for k in 0..nodes.len() {
        let a = nodes[k];
        let b = nodes[(k + 1) % nodes.len()];
        acc += wrap_phase(phase(u, b) - phase(u, a));
    }
    Some(acc / (2.0 * PI))
}

/// Counter-clockwise boundary loop of the node rectangle `[i0, i1] × [j0, j1]`.
pub fn rectangle_loop(domain: &GridDomain<2>, i0: usize, i1: usize, j0: usize, j1: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for i in i0..i1 {
        out.push(domain.node_index(&[i, j0]));
    }
    for j in j0..j1 {
        out.push(domain.node_index(&[i1, j]));
    }
    for i in (i0 + 1..=i1).rev() {
        out.push(domain.node_index(&[i, j1]));
    }
    for j in (j0 + 1..=j1).rev() {
        out.push(domain.node_index(&[i0, j]));
    }
    out
}

/// Degree of `u` along the boundary of the whole box.
pub fn boundary_degree(u: &ComplexGridField) -> Option<f64> {
    let n = u.domain().nodes_per_axis();
    winding_along(u, &rectangle_loop(u.domain(), 0, n[0] - 1, 0, n[1] - 1))
}

pub fn jacobian_field(u: &ComplexGridField) -> JacobianField {
    let dom = *u.domain();
    let sx = dom.stride(1);
    let (degree, core) = (0..dom.num_cells())
        .map(|c| {
            let b = dom.cell_base_node(c);
            match winding_along(u, &[b, b + 1, b + 1 + sx, b + sx]) {
                Some(w) => (w, false),
                None => (0.0, true),
            }
        })
        .unzip();
    JacobianField {
        domain: dom,
        degree,
        core,
    }
}

struct Point {
    pos: Vector<2>,
    degree: f64,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Clusters nonzero plaquette degrees into point vortices. Plaquettes with
/// `|degree| ≥ 0.5` are merged within three grid spacings; blocks of core
/// plaquettes get the winding along a loop enclosing them.
pub fn detect_vortices(u: &ComplexGridField) -> VortexConfig {
    let jac = jacobian_field(u);
    let dom = *u.domain();
    let res = *dom.resolution();
    let nodes = *dom.nodes_per_axis();
    let mut consumed = vec![false; dom.num_cells()];
    let mut points: Vec<Point> = Vec::new();

    // connected blocks of core plaquettes
    let mut seen = vec![false; dom.num_cells()];
    for start in 0..dom.num_cells() {
        if !jac.core[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut members = Vec::new();
        while let Some(c) = stack.pop() {
            members.push(c);
            let m = dom.cell_multi(c);
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    let (ni, nj) = (m[0] as i64 + di, m[1] as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= res[0] as i64 || nj >= res[1] as i64 {
                        continue;
                    }
                    let nc = ni as usize + nj as usize * res[0];
                    if jac.core[nc] && !seen[nc] {
                        seen[nc] = true;
                        stack.push(nc);
                    }
                }
            }
        }
        let (mut i0, mut i1, mut j0, mut j1) = (usize::MAX, 0, usize::MAX, 0);
        let mut centroid = [0.0; 2];
        for &c in &members {
            let m = dom.cell_multi(c);
            i0 = i0.min(m[0]);
            i1 = i1.max(m[0] + 1);
            j0 = j0.min(m[1]);
            j1 = j1.max(m[1] + 1);
            let p = dom.cell_center(c);
            centroid[0] += p[0] / members.len() as f64;
            centroid[1] += p[1] / members.len() as f64;
        }
        for _ in 0..6 {
            if let Some(w) = winding_along(u, &rectangle_loop(&dom, i0, i1, j0, j1)) {
                for j in j0..j1 {
                    for i in i0..i1 {
                        consumed[i + j * res[0]] = true;
                    }
                }
                points.push(Point {
                    pos: centroid,
                    degree: w.round(),
                });
                break;
            }
            i0 = i0.saturating_sub(1);
            j0 = j0.saturating_sub(1);
            i1 = (i1 + 1).min(nodes[0] - 1);
            j1 = (j1 + 1).min(nodes[1] - 1);
        }
    }

    for c in 0..dom.num_cells() {
        if !consumed[c] && !jac.core[c] && jac.degree[c].abs() >= 0.5 {
            points.push(Point {
                pos: dom.cell_center(c),
                degree: jac.degree[c].round(),
            });
        }
    }

    let radius = 3.0 * dom.h_min();
    let mut parent: Vec<usize> = (0..points.len()).collect();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let d = (points[a].pos[0] - points[b].pos[0]).hypot(points[a].pos[1] - points[b].pos[1]);
            if d <= radius + 1e-12 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[rb.max(ra)] = ra.min(rb);
                }
            }
        }
    }
    let mut clusters: Vec<(Vector<2>, f64, f64)> = Vec::new();
    let mut root_slot = vec![usize::MAX; points.len()];
    for k in 0..points.len() {
        let r = find(&mut parent, k);
        if root_slot[r] == usize::MAX {
            root_slot[r] = clusters.len();
            clusters.push(([0.0; 2], 0.0, 0.0));
        }
        let cl = &mut clusters[root_slot[r]];
        let w = points[k].degree.abs();
        cl.0[0] += w * points[k].pos[0];
        cl.0[1] += w * points[k].pos[1];
        cl.1 += w;
        cl.2 += points[k].degree;
    }
    let mut found: Vec<(Vector<2>, i32)> = clusters
        .into_iter()
        .filter(|c| c.2.round() != 0.0 && c.1 > 0.0)
        .map(|c| ([c.0[0] / c.1, c.0[1] / c.1], c.2.round() as i32))
        .collect();
    found.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));
    let (centers, degrees): (Vec<_>, Vec<_>) = found.into_iter().unzip();
    let n = centers.len();
    VortexConfig {
        centers,
        degrees,
        mobility: vec![1.0; n],
    }
}

/// Nodes where `|1 − |u|²| > 0.1` lying farther than `radius` from every
/// listed vortex.
pub fn defect_outliers(u: &ComplexGridField, vortices: &VortexConfig, radius: f64) -> usize {
    let dom = u.domain();
    (0..u.len())
        .filter(|&i| (1.0 - u.modulus(i).powi(2)).abs() > 0.1)
        .filter(|&i| {
            let p = dom.node_position(i);
            vortices
                .centers
                .iter()
                .all(|c| (p[0] - c[0]).hypot(p[1] - c[1]) > radius)
        })
        .count()
}
