//! The maximal-spin su(2) multiplet of an ensemble of `N_a` two-level atoms.
//!
//! States `|r, m>` with `r = N_a / 2` are stored in ascending-`m` order, so
//! index `k` holds `m = -r + k`. In this ordering `R-` is strictly
//! sub-diagonal and `R+` strictly super-diagonal.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Dense complex matrix in the `k`-ordered Dicke basis.
pub type Operator = DMatrix<C64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DickeBasis {
    twice_r: u32,
}

impl DickeBasis {
    pub fn new(n_atoms: u32) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be at least 1".into()));
        }
        Ok(Self { twice_r: n_atoms })
    }

    pub fn twice_r(&self) -> u32 {
        self.twice_r
    }

    pub fn r(&self) -> f64 {
        f64::from(self.twice_r) / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_r as usize + 1
    }

    /// Magnetic quantum number of basis index `k`.
    pub fn m(&self, k: usize) -> f64 {
        (2.0 * k as f64 - f64::from(self.twice_r)) / 2.0
    }

    pub fn m_values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.dim()).map(|k| self.m(k))
    }

    /// Index of `m`, rejecting values that are not in the multiplet.
    pub fn index_of(&self, m: f64) -> Result<usize> {
        let shifted = m + self.r();
        let k = shifted.round();
        if !m.is_finite() || (shifted - k).abs() > 1e-9 || k < 0.0 || k > f64::from(self.twice_r) {
            return Err(Error::OutsideMultiplet { m, r: self.r() });
        }
        Ok(k as usize)
    }

    pub fn ground_index(&self) -> usize {
        0
    }

    /// `|r, -r + 1>`, the symmetric singly excited state.
    pub fn singly_excited_index(&self) -> usize {
        1
    }

    pub fn fully_excited_index(&self) -> usize {
        self.twice_r as usize
    }

    /// `g_{m,m-1} = <m|R+|m-1><m-1|R-|m> = (r + m)(r - m + 1)` for `m = m(k)`.
    ///
    /// In index form this is `k (2r - k + 1)`, exact in integer arithmetic.
    pub fn ladder_weight(&self, k: usize) -> f64 {
        let k = k as u64;
        (k * (u64::from(self.twice_r) + 1 - k)) as f64
    }

    /// Unit vector `|r, m(k)>`.
    pub fn basis_vector(&self, k: usize) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim());
        v[k] = C64::new(1.0, 0.0);
        v
    }

    pub fn check_dim(&self, actual: usize) -> Result<()> {
        if actual != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual,
            });
        }
        Ok(())
    }
}

/// Diagonal operator with entries `f(k)`.
pub fn diagonal_from(basis: &DickeBasis, f: impl Fn(usize) -> C64) -> Operator {
    let d = basis.dim();
    let mut op = Operator::zeros(d, d);
    for k in 0..d {
        op[(k, k)] = f(k);
    }
    op
}

pub fn identity(basis: &DickeBasis) -> Operator {
    Operator::identity(basis.dim(), basis.dim())
}

pub fn op_r3(basis: &DickeBasis) -> Operator {
    diagonal_from(basis, |k| C64::new(basis.m(k), 0.0))
}

/// `R- |r, m> = sqrt((r + m)(r - m + 1)) |r, m - 1>`.
pub fn op_rminus(basis: &DickeBasis) -> Operator {
    let d = basis.dim();
    let mut op = Operator::zeros(d, d);
    for k in 1..d {
        op[(k - 1, k)] = C64::new(basis.ladder_weight(k).sqrt(), 0.0);
    }
    op
}

pub fn op_rplus(basis: &DickeBasis) -> Operator {
    op_rminus(basis).adjoint()
}
