use std::f64::consts::PI;
use std::path::Path;

use crate::elliptic::{solve_dirichlet, DirichletOptions};
use crate::error::{Result, WntError};
use crate::finsler::WntStructure;
use crate::grid::{read_field_binary, write_field_binary, GridDomain, GridField};
use crate::linalg::Vector;

use super::vortices::rectangle_loop;

/// Complex field on the nodes of a planar grid; boundary nodes hold the
/// Dirichlet trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGridField {
    domain: GridDomain<2>,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ComplexGridField {
    pub fn from_parts(domain: GridDomain<2>, re: Vec<f64>, im: Vec<f64>) -> Result<Self> {
        let n = domain.num_nodes();
        if re.len() != n || im.len() != n {
            return Err(WntError::GridMismatch(format!("{}/{} values for {n} nodes", re.len(), im.len())));
        }
        if re.iter().chain(&im).any(|v| !v.is_finite()) {
            return Err(WntError::InvalidInput("complex field contains non-finite values".into()));
        }
        Ok(Self { domain, re, im })
    }

    pub fn from_fn(domain: GridDomain<2>, f: impl Fn(&Vector<2>) -> (f64, f64)) -> Self {
        let (re, im) = (0..domain.num_nodes()).map(|i| f(&domain.node_position(i))).unzip();
        Self { domain, re, im }
    }

    pub fn constant(domain: GridDomain<2>, re: f64, im: f64) -> Self {
        Self::from_fn(domain, |_| (re, im))
    }

    /// Product of vortex profiles `ρ(|x−a|/ε)·((x−a)/|x−a|)^d`, with
    /// `ρ(s) = tanh(s/√2)`; the value at a center node is 0.
    pub fn vortex_product(domain: GridDomain<2>, vortices: &[(Vector<2>, i32)], eps: f64) -> Self {
        Self::from_fn(domain, |p| {
            let (mut re, mut im) = (1.0, 0.0);
            for (a, d) in vortices {
                let (dx, dy) = (p[0] - a[0], p[1] - a[1]);
                let r = dx.hypot(dy);
                if r == 0.0 {
                    return (0.0, 0.0);
                }
                let rho = (r / (eps * 2f64.sqrt())).tanh();
                let th = *d as f64 * dy.atan2(dx);
                let (c, s) = (rho * th.cos(), rho * th.sin());
                (re, im) = (re * c - im * s, re * s + im * c);
            }
            (re, im)
        })
    }

    /// Boundary trace `e^{iNθ}` about the box center, `N` being the total
    /// degree, with interior `vortex_product · e^{iφ}` where `φ` is the discrete
    /// harmonic extension of the boundary phase mismatch between the two.
    pub fn degree_data(domain: GridDomain<2>, vortices: &[(Vector<2>, i32)], eps: f64) -> Self {
        let prod = Self::vortex_product(domain, vortices, eps);
        let n: i32 = vortices.iter().map(|v| v.1).sum();
        let c = center(&domain);
        let target = |i: usize| {
            let p = domain.node_position(i);
            n as f64 * (p[1] - c[1]).atan2(p[0] - c[0])
        };
        let nodes = domain.nodes_per_axis();
        let ring = rectangle_loop(&domain, 0, nodes[0] - 1, 0, nodes[1] - 1);
        let mismatch = |i: usize| {
            let (a, b) = prod.value(i);
            wrap_phase(target(i) - b.atan2(a))
        };
        let mut phi = GridField::zeros(domain);
        let mut acc = mismatch(ring[0]);
        phi.values_mut()[ring[0]] = acc;
        for w in ring.windows(2) {
            acc += wrap_phase(mismatch(w[1]) - mismatch(w[0]));
            phi.values_mut()[w[1]] = acc;
        }
        let zero = GridField::zeros(domain);
        let phi = match solve_dirichlet(&WntStructure::euclidean(), &zero, &phi, None, DirichletOptions::for_dim(2)) {
            Ok(sol) => sol.u,
            Err(_) => phi,
        };
        let mut u = Self::from_fn(domain, |_| (0.0, 0.0));
        for i in 0..domain.num_nodes() {
            if domain.is_boundary(i) {
                let th = target(i);
                u.re[i] = th.cos();
                u.im[i] = th.sin();
            } else {
                let (a, b) = prod.value(i);
                let (cs, sn) = (phi.values()[i].cos(), phi.values()[i].sin());
                u.re[i] = a * cs - b * sn;
                u.im[i] = a * sn + b * cs;
            }
        }
        u
    }

    pub fn domain(&self) -> &GridDomain<2> {
        &self.domain
    }

    pub fn re(&self) -> &[f64] {
        &self.re
    }

    pub fn im(&self) -> &[f64] {
        &self.im
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.re, &mut self.im)
    }

    pub fn len(&self) -> usize {
        self.re.len()
    }

    pub fn is_empty(&self) -> bool {
        self.re.is_empty()
    }

    pub fn value(&self, i: usize) -> (f64, f64) {
        (self.re[i], self.im[i])
    }

    pub fn modulus(&self, i: usize) -> f64 {
        self.re[i].hypot(self.im[i])
    }

    pub fn modulus_field(&self) -> GridField<2> {
        GridField::from_values(self.domain, (0..self.len()).map(|i| self.modulus(i)).collect())
            .expect("finite modulus")
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.domain.check_compatible(&other.domain)?;
        let (re, im) = (0..self.len())
            .map(|i| {
                let (a, b) = self.value(i);
                let (c, d) = other.value(i);
                (a * c - b * d, a * d + b * c)
            })
            .unzip();
        Ok(Self {
            domain: self.domain,
            re,
            im,
        })
    }

    pub fn conj(&self) -> Self {
        Self {
            domain: self.domain,
            re: self.re.clone(),
            im: self.im.iter().map(|v| -v).collect(),
        }
    }

    /// Multiplies by the constant phase `e^{iφ}`.
    pub fn rotate_phase(&self, phi: f64) -> Self {
        let (c, s) = (phi.cos(), phi.sin());
        let (re, im) = self.re.iter().zip(&self.im).map(|(a, b)| (a * c - b * s, a * s + b * c)).unzip();
        Self {
            domain: self.domain,
            re,
            im,
        }
    }

    /// Copies the boundary trace of `other`.
    pub fn set_boundary_from(&mut self, other: &Self) -> Result<()> {
        self.domain.check_compatible(&other.domain)?;
        for i in 0..self.len() {
            if self.domain.is_boundary(i) {
                self.re[i] = other.re[i];
                self.im[i] = other.im[i];
            }
        }
        Ok(())
    }

    /// Interleaved `(re, im)` pairs per node.
    pub fn interleaved(&self) -> Vec<f64> {
        self.re.iter().zip(&self.im).flat_map(|(a, b)| [*a, *b]).collect()
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        write_field_binary(path, &self.domain, 2, &self.interleaved())
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let (domain, components, data) = read_field_binary::<2>(path)?;
        if components != 2 {
            return Err(WntError::GridMismatch(format!("expected complex pairs, got {components} components")));
        }
        let re = data.iter().step_by(2).copied().collect();
        let im = data.iter().skip(1).step_by(2).copied().collect();
        Self::from_parts(domain, re, im)
    }
}

pub(crate) fn center(domain: &GridDomain<2>) -> Vector<2> {
    [
        domain.origin()[0] + 0.5 * domain.extent()[0],
        domain.origin()[1] + 0.5 * domain.extent()[1],
    ]
}

/// Principal value of a phase difference, in `(−π, π]`.
#[inline]
pub(crate) fn wrap_phase(d: f64) -> f64 {
    let mut w = d % (2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    } else if w <= -PI {
        w += 2.0 * PI;
    }
    w
}
