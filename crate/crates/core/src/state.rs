//! Atomic states and sampled trajectories.

use nalgebra::{DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dicke::{DickeBasis, Operator};
use crate::error::{Error, Result};
use crate::C64;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;
pub const POPULATION_SUM_TOL: f64 = 1e-9;
pub const NEGATIVE_POPULATION_TOL: f64 = 1e-12;

/// Full density matrix in the Dicke basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Operator) -> Result<Self> {
        let dm = Self(rho);
        dm.check(1.0)?;
        Ok(dm)
    }

    /// Wraps without validation; used for intermediate integration states.
    pub fn from_matrix_unchecked(rho: Operator) -> Self {
        Self(rho)
    }

    /// `|r, m(k)><r, m(k)|`.
    pub fn basis_state(basis: &DickeBasis, k: usize) -> Result<Self> {
        if k >= basis.dim() {
            return Err(Error::InvalidState(format!("basis index {k} out of range")));
        }
        let d = basis.dim();
        let mut rho = Operator::zeros(d, d);
        rho[(k, k)] = C64::new(1.0, 0.0);
        Ok(Self(rho))
    }

    pub fn from_populations(state: &DiagonalState) -> Self {
        let d = state.len();
        let mut rho = Operator::zeros(d, d);
        for (k, p) in state.iter().enumerate() {
            rho[(k, k)] = C64::new(p, 0.0);
        }
        Self(rho)
    }

    pub fn from_pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi / C64::new(norm, 0.0);
        Self::new(&v * v.adjoint())
    }

    pub fn matrix(&self) -> &Operator {
        &self.0
    }

    pub fn into_matrix(self) -> Operator {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn populations(&self) -> DiagonalState {
        DiagonalState::from_vec_unchecked(self.0.diagonal().iter().map(|z| z.re).collect())
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let rho = &self.0;
        let mut worst: f64 = 0.0;
        for i in 0..rho.nrows() {
            for j in i..rho.ncols() {
                worst = worst.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let rho = &self.0;
        let mut worst: f64 = 0.0;
        for i in 0..rho.nrows() {
            for j in 0..rho.ncols() {
                if i != j {
                    worst = worst.max(rho[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Validates at `slack` times the nominal tolerances.
    pub fn check(&self, slack: f64) -> Result<()> {
        if !self.0.is_square() {
            return Err(Error::InvalidState("density matrix is not square".into()));
        }
        let h = self.hermiticity_defect();
        if h > HERMITICITY_TOL * slack {
            return Err(Error::InvalidState(format!("not Hermitian (defect {h:e})")));
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > TRACE_TOL * slack {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let ev = self.min_eigenvalue();
        if ev < -POSITIVITY_TOL * slack {
            return Err(Error::InvalidState(format!("negative eigenvalue {ev:e}")));
        }
        Ok(())
    }
}

/// Populations `p_k` of `|r, -r + k>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalState(Vec<f64>);

impl DiagonalState {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        let s = Self(p);
        s.check(1.0)?;
        Ok(s)
    }

    pub fn from_vec_unchecked(p: Vec<f64>) -> Self {
        Self(p)
    }

    pub fn basis_state(basis: &DickeBasis, k: usize) -> Result<Self> {
        if k >= basis.dim() {
            return Err(Error::InvalidState(format!("basis index {k} out of range")));
        }
        let mut p = vec![0.0; basis.dim()];
        p[k] = 1.0;
        Ok(Self(p))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Populations with tiny negative round-off clamped to zero.
    pub fn clamped(&self) -> Vec<f64> {
        self.0.iter().map(|p| p.max(0.0)).collect()
    }

    /// `sum_m m p_m`, the mean inversion.
    pub fn mean_m(&self, basis: &DickeBasis) -> f64 {
        self.0.iter().enumerate().map(|(k, p)| basis.m(k) * p).sum()
    }

    pub fn check(&self, slack: f64) -> Result<()> {
        if let Some(p) = self.0.iter().find(|p| !p.is_finite() || **p < -NEGATIVE_POPULATION_TOL * slack) {
            return Err(Error::InvalidState(format!("negative or non-finite population {p:e}")));
        }
        let s = self.sum();
        if (s - 1.0).abs() > POPULATION_SUM_TOL * slack {
            return Err(Error::InvalidState(format!("populations sum to {s}")));
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for DiagonalState {
    type Output = f64;
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

/// Sampled time evolution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub populations: Vec<DiagonalState>,
    pub intensity: Vec<f64>,
    /// Full density matrices, when the full generator was integrated.
    pub snapshots: Option<Vec<Operator>>,
    /// Per-sample standard errors of the populations (quantum-jump averages).
    pub std_errors: Option<Vec<Vec<f64>>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Time series of the population of basis index `k`.
    pub fn population_series(&self, k: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p[k]).collect()
    }

    pub fn mean_m_series(&self, basis: &DickeBasis) -> Vec<f64> {
        self.populations.iter().map(|p| p.mean_m(basis)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidState("sample times are not strictly increasing".into()));
        }
        if self.populations.len() != self.times.len() || self.intensity.len() != self.times.len() {
            return Err(Error::InvalidState("trajectory columns differ in length".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_states_are_valid() {
        let b = DickeBasis::new(4).unwrap();
        let rho = DensityMatrix::basis_state(&b, 2).unwrap();
        rho.check(1.0).unwrap();
        assert_eq!(rho.populations().as_slice(), &[0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(DensityMatrix::basis_state(&b, 5).is_err());
        let p = DiagonalState::basis_state(&b, 4).unwrap();
        assert_eq!(p.mean_m(&b), 2.0);
    }

    #[test]
    fn rejects_invalid_density_matrices() {
        let mut m = Operator::zeros(2, 2);
        m[(0, 0)] = C64::new(0.5, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 1)] = C64::new(0.5, 0.0);
        m[(0, 1)] = C64::new(0.1, 0.2);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 0)] = C64::new(0.1, -0.2);
        DensityMatrix::new(m.clone()).unwrap();
        m[(0, 1)] = C64::new(0.9, 0.0);
        m[(1, 0)] = C64::new(0.9, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn pure_state_has_unit_trace() {
        let psi = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0)]);
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!(rho.min_eigenvalue().abs() < 1e-15);
    }

    #[test]
    fn diagonal_state_validation() {
        assert!(DiagonalState::new(vec![0.5, 0.5]).is_ok());
        assert!(DiagonalState::new(vec![0.6, 0.5]).is_err());
        assert!(DiagonalState::new(vec![1.1, -0.1]).is_err());
        assert_eq!(DiagonalState::from_vec_unchecked(vec![-1e-14, 1.0]).clamped(), vec![0.0, 1.0]);
    }
}
