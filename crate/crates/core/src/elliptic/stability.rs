use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::finsler::WntStructure;
use crate::grid::GridField;
use crate::linalg;

use super::energy::{cell_hamiltonian, cell_weights};
use super::solver::{solve_dirichlet, DirichletOptions};
use super::stencil::Stencil;

/// One Dirichlet problem: source and boundary trace.
#[derive(Debug, Clone)]
pub struct DirichletData<const D: usize> {
    pub f: GridField<D>,
    pub boundary: GridField<D>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StabilityEntry {
    /// `∫⟨∂H(Du) − ∂H(Dv), Du − Dv⟩`.
    pub monotone_form: f64,
    /// `‖Du − Dv‖_{L^p}^p`.
    pub gradient_gap_p: f64,
    /// `‖Du − Dv‖_{L²}`.
    pub gradient_gap_l2: f64,
    /// `‖f₁ − f₂‖_{L²}`.
    pub source_gap_l2: f64,
    /// `monotone_form / gradient_gap_p`, when the gap is nonzero.
    pub c_empirical: Option<f64>,
    /// `gradient_gap_l2 / source_gap_l2`, when the sources differ.
    pub dependence_ratio: Option<f64>,
    /// Linear-case bound on `dependence_ratio` from the discrete Poincaré
    /// inequality; present for quadratic structures with equal boundary data.
    pub poincare_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct StabilityReport {
    pub entries: Vec<StabilityEntry>,
    /// Smallest empirical constant over entries with distinct solutions.
    pub c_min: Option<f64>,
    pub satisfied: bool,
}

/// Solves each pair of problems and measures the strong-monotonicity form and
/// the dependence of the solution gradient on the source.
pub fn check_stability<const D: usize>(
    s: &WntStructure<D>,
    pairs: &[(DirichletData<D>, DirichletData<D>)],
    opts: DirichletOptions,
) -> Result<StabilityReport> {
    let mut entries = Vec::with_capacity(pairs.len());
    let mut satisfied = true;
    for (p1, p2) in pairs {
        let u = solve_dirichlet(s, &p1.f, &p1.boundary, None, opts)?.u;
        let v = solve_dirichlet(s, &p2.f, &p2.boundary, None, opts)?.u;
        let dom = *u.domain();
        let st = Stencil::new(&dom);
        let w = cell_weights(s, &dom)?;
        let vol = dom.cell_volume();
        let p = s.p();
        let mut form = 0.0;
        let mut gap_p = 0.0;
        let mut gap_2 = 0.0;
        let mut flux_scale = 0.0;
        for (c, &b) in st.cell_base.iter().enumerate() {
            let du = st.gradient(u.values(), b);
            let dv = st.gradient(v.values(), b);
            let (_, yu) = cell_hamiltonian(s, w[c], &du)?;
            let (_, yv) = cell_hamiltonian(s, w[c], &dv)?;
            let dd = linalg::sub(&du, &dv);
            let dy = linalg::sub(&yu, &yv);
            form += vol * linalg::dot(&dy, &dd);
            let n = linalg::norm(&dd);
            gap_p += vol * n.powf(p);
            gap_2 += vol * n * n;
            flux_scale += vol * linalg::norm(&dy) * n;
        }
        let gap_2 = gap_2.sqrt();
        let df: f64 = (0..dom.num_nodes())
            .map(|i| dom.node_weight(i) * (p1.f.values()[i] - p2.f.values()[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        let same_boundary = p1.boundary.sup_distance(&p2.boundary)? == 0.0;
        let c_empirical = (gap_p > 0.0).then(|| form / gap_p);
        let dependence_ratio = (df > 0.0).then(|| gap_2 / df);
        let poincare_bound = (s.anisotropy().is_quadratic() && same_boundary).then(|| {
            let lambda1: f64 = (0..D)
                .map(|k| {
                    let h = dom.spacing()[k];
                    4.0 / (h * h) * (PI * h / (2.0 * dom.extent()[k])).sin().powi(2)
                })
                .sum();
            let g_inv_min = linalg::sym_eigenvalues(s.anisotropy().g_inv())[0];
            1.0 / (g_inv_min * lambda1.sqrt())
        });
        if form < -1e-10 * (1.0 + flux_scale) || c_empirical.is_some_and(|c| !(c > 0.0)) {
            satisfied = false;
        }
        if let (Some(r), Some(b)) = (dependence_ratio, poincare_bound) {
            if r > b * (1.0 + 1e-6) {
                satisfied = false;
            }
        }
        entries.push(StabilityEntry {
            monotone_form: form,
            gradient_gap_p: gap_p,
            gradient_gap_l2: gap_2,
            source_gap_l2: df,
            c_empirical,
            dependence_ratio,
            poincare_bound,
        });
    }
    let c_min = entries.iter().filter_map(|e| e.c_empirical).reduce(f64::min);
    Ok(StabilityReport {
        entries,
        c_min,
        satisfied,
    })
}
