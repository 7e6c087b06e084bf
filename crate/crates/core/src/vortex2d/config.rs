use serde::{Deserialize, Serialize};

use crate::error::{Result, WntError};
use crate::linalg::{self, Vector};

/// Labelled point vortices in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VortexConfig {
    pub centers: Vec<Vector<2>>,
    pub degrees: Vec<i32>,
    /// Scalar mobility per vortex.
    pub mobility: Vec<f64>,
}

impl VortexConfig {
    /// Vortices with unit mobility.
    pub fn new(centers: Vec<Vector<2>>, degrees: Vec<i32>) -> Result<Self> {
        let n = centers.len();
        Self::with_mobility(centers, degrees, vec![1.0; n])
    }

    pub fn with_mobility(centers: Vec<Vector<2>>, degrees: Vec<i32>, mobility: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            centers,
            degrees,
            mobility,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn empty() -> Self {
        Self {
            centers: Vec::new(),
            degrees: Vec::new(),
            mobility: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.centers.len();
        if self.degrees.len() != n || self.mobility.len() != n {
            return Err(WntError::InvalidInput(format!(
                "{n} centers, {} degrees, {} mobilities",
                self.degrees.len(),
                self.mobility.len()
            )));
        }
        if let Some(i) = self.degrees.iter().position(|&d| d == 0) {
            return Err(WntError::InvalidInput(format!("vortex {i} has degree 0")));
        }
        if let Some(i) = self.mobility.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(WntError::InvalidInput(format!("vortex {i} has non-positive mobility")));
        }
        if let Some(i) = self.centers.iter().position(|c| !linalg::is_finite(c)) {
            return Err(WntError::InvalidInput(format!("vortex {i} has a non-finite center")));
        }
        for i in 0..n {
            for j in i + 1..n {
                if self.centers[i] == self.centers[j] {
                    return Err(WntError::InvalidInput(format!("vortices {i} and {j} coincide")));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn total_degree(&self) -> i32 {
        self.degrees.iter().sum()
    }

    /// Smallest pairwise distance (infinite for fewer than two vortices).
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min(linalg::norm(&linalg::sub(&self.centers[i], &self.centers[j])));
            }
        }
        best
    }
}
