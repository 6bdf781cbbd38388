//! Vacuum quantum-Ito algebra over the increments `{dtau, dB, dB+, dLambda}`.
//!
//! An [`ItoExpression`] is a sum `sum_s X_s ds` with operator coefficients.
//! Coefficients are nonanticipating and commute with the increments, so a
//! product of two expressions multiplies coefficients in order and
//! increments through the Hudson-Parthasarathy table
//!
//! ```text
//! dLambda dLambda = dLambda    dLambda dB+ = dB+
//! dB dLambda      = dB         dB dB+      = dtau
//! ```
//!
//! with every other ordered product zero (including `dB+ dB` and anything
//! involving `dtau`).
//!
//! From this algebra the crate derives the evolution increment
//! `dU = (exp(-iK) - 1) U` with `K = chi R+ dB + chi R- dB+ + M dLambda + V dtau`,
//! and from `dU` the reduced generator of the atomic density matrix.

use std::collections::BTreeMap;
use std::fmt;

use crate::dicke::{diagonal_from, op_rminus, op_rplus, DickeBasis, Operator};
use crate::error::{Error, Result};
use crate::master::exchange_operator;
use crate::nl_factors::{phi, psi, stark_spectrum};
use crate::params::EnsembleParams;
use crate::C64;

/// Default truncation order of the exponential series.
pub const DEFAULT_ORDER: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IncrementSymbol {
    Dt,
    DB,
    DBDag,
    DLambda,
}

impl IncrementSymbol {
    pub const ALL: [IncrementSymbol; 4] = [Self::Dt, Self::DB, Self::DBDag, Self::DLambda];

    /// Ordered product `self * other`; `None` is the zero increment.
    pub fn product(self, other: Self) -> Option<Self> {
        use IncrementSymbol::*;
        match (self, other) {
            (DLambda, DLambda) => Some(DLambda),
            (DLambda, DBDag) => Some(DBDag),
            (DB, DLambda) => Some(DB),
            (DB, DBDag) => Some(Dt),
            _ => None,
        }
    }

    /// Hermitian conjugate: `dB <-> dB+`; `dtau`, `dLambda` self-adjoint.
    pub fn adjoint(self) -> Self {
        use IncrementSymbol::*;
        match self {
            DB => DBDag,
            DBDag => DB,
            s => s,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Dt => "dtau",
            Self::DB => "dB",
            Self::DBDag => "dB+",
            Self::DLambda => "dLambda",
        }
    }
}

impl fmt::Display for IncrementSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `increment_product(s, t)`.
pub fn increment_product(s: IncrementSymbol, t: IncrementSymbol) -> Option<IncrementSymbol> {
    s.product(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItoExpression {
    dim: usize,
    terms: BTreeMap<IncrementSymbol, Operator>,
}

impl ItoExpression {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// `coeff * symbol`.
    pub fn term(symbol: IncrementSymbol, coeff: Operator) -> Result<Self> {
        if !coeff.is_square() {
            return Err(Error::DimensionMismatch {
                expected: coeff.nrows(),
                actual: coeff.ncols(),
            });
        }
        let mut e = Self::zero(coeff.nrows());
        e.terms.insert(symbol, coeff);
        Ok(e)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coefficient(&self, symbol: IncrementSymbol) -> Option<&Operator> {
        self.terms.get(&symbol)
    }

    /// Coefficient of `symbol`, materialising absent ones as zero.
    pub fn coefficient_or_zero(&self, symbol: IncrementSymbol) -> Operator {
        self.terms
            .get(&symbol)
            .cloned()
            .unwrap_or_else(|| Operator::zeros(self.dim, self.dim))
    }

    pub fn terms(&self) -> impl Iterator<Item = (IncrementSymbol, &Operator)> {
        self.terms.iter().map(|(s, op)| (*s, op))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: other.dim,
            });
        }
        Ok(())
    }

    fn accumulate(&mut self, symbol: IncrementSymbol, coeff: Operator) {
        match self.terms.get_mut(&symbol) {
            Some(existing) => *existing += coeff,
            None => {
                self.terms.insert(symbol, coeff);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.clone();
        for (s, op) in other.terms() {
            out.accumulate(s, op.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(s, op)| (*s, op * factor)).collect(),
        }
    }

    /// `expr_mul`: bilinear product through the increment table.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = Self::zero(self.dim);
        for (s, x) in self.terms() {
            for (t, y) in other.terms() {
                if let Some(st) = s.product(t) {
                    out.accumulate(st, x * y);
                }
            }
        }
        Ok(out)
    }

    /// `(X ds)^+ = X^+ ds^+`.
    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(s, op)| (s.adjoint(), op.adjoint())).collect(),
        }
    }

    /// Largest entry modulus over all coefficients.
    pub fn max_abs_entry(&self) -> f64 {
        self.terms
            .values()
            .flat_map(|op| op.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// `expr_mul(a, b)`.
pub fn expr_mul(a: &ItoExpression, b: &ItoExpression) -> Result<ItoExpression> {
    a.mul(b)
}

/// `M = diag(x_m)`, the Stark operator `eta_plus N_a/2 + eta_minus R3`.
pub fn stark_operator(params: &EnsembleParams, basis: &DickeBasis) -> Operator {
    let xs = stark_spectrum(params, basis);
    diagonal_from(basis, |k| C64::new(xs[k], 0.0))
}

/// `K = chi R+ dB + chi R- dB+ + M dLambda + V dtau`.
pub fn hamiltonian_increment(params: &EnsembleParams, basis: &DickeBasis) -> ItoExpression {
    let chi = C64::new(params.chi, 0.0);
    let mut k = ItoExpression::zero(basis.dim());
    k.accumulate(IncrementSymbol::DB, op_rplus(basis) * chi);
    k.accumulate(IncrementSymbol::DBDag, op_rminus(basis) * chi);
    k.accumulate(IncrementSymbol::DLambda, stark_operator(params, basis));
    k.accumulate(IncrementSymbol::Dt, exchange_operator(params, basis));
    k
}

/// `sum_{n=1..order} (-iK)^n / n!` multiplied out in the Ito algebra.
pub fn expand_evolution_increment(
    params: &EnsembleParams,
    basis: &DickeBasis,
    order: usize,
) -> Result<ItoExpression> {
    if order < 1 {
        return Err(Error::InvalidParameter("expansion order must be >= 1".into()));
    }
    let minus_i_k = hamiltonian_increment(params, basis).scale(C64::new(0.0, -1.0));
    let mut power = minus_i_k.clone();
    let mut sum = minus_i_k.clone();
    for n in 2..=order {
        power = power.mul(&minus_i_k)?.scale(C64::new(1.0 / n as f64, 0.0));
        if power.is_zero() {
            break;
        }
        sum = sum.add(&power)?;
    }
    Ok(sum)
}

/// Closed-form evolution-increment coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    /// `chi^2 R+ psi(M) R-`, the `dtau` coefficient without the `-iV` part.
    pub a0: Operator,
    /// `chi R+ phi(M)`, coefficient of `dB`.
    pub a_plus: Operator,
    /// `phi(M) chi R-`, coefficient of `dB+`.
    pub a_minus: Operator,
    /// `exp(-iM) - 1`, coefficient of `dLambda`.
    pub a_lambda: Operator,
}

pub fn closed_form_coefficients(params: &EnsembleParams, basis: &DickeBasis) -> CoefficientSet {
    let xs = stark_spectrum(params, basis);
    let chi = C64::new(params.chi, 0.0);
    let rp = op_rplus(basis);
    let rm = op_rminus(basis);
    let phi_m = diagonal_from(basis, |k| phi(xs[k]));
    let psi_m = diagonal_from(basis, |k| psi(xs[k]));
    // exp(-ix) - 1 = -2 sin^2(x/2) - i sin x, free of cancellation near 0
    let a_lambda = diagonal_from(basis, |k| {
        let h = 0.5 * xs[k];
        C64::new(-2.0 * h.sin() * h.sin(), -xs[k].sin())
    });
    CoefficientSet {
        a0: &rp * psi_m * &rm * (chi * chi),
        a_plus: &rp * &phi_m * chi,
        a_minus: phi_m * rm * chi,
        a_lambda,
    }
}

impl CoefficientSet {
    /// `dU U^-1 = (A0 - iV) dtau + A+ dB + A- dB+ + A_Lambda dLambda`.
    pub fn to_expression(&self, params: &EnsembleParams, basis: &DickeBasis) -> ItoExpression {
        let v = exchange_operator(params, basis);
        let mut e = ItoExpression::zero(basis.dim());
        e.accumulate(IncrementSymbol::Dt, &self.a0 - v * C64::new(0.0, 1.0));
        e.accumulate(IncrementSymbol::DB, self.a_plus.clone());
        e.accumulate(IncrementSymbol::DBDag, self.a_minus.clone());
        e.accumulate(IncrementSymbol::DLambda, self.a_lambda.clone());
        e
    }
}

/// `(dU)U^+ + U(dU)^+ + (dU)(dU)^+` per unit `U`, i.e. `E + E^+ + E E^+`.
/// Vanishes identically for a unitary evolution.
pub fn unitarity_residual(increment: &ItoExpression) -> Result<ItoExpression> {
    let adj = increment.adjoint();
    increment.add(&adj)?.add(&increment.mul(&adj)?)
}

/// Reduced generator `rho -> d rho / dtau` obtained by tracing the field out
/// of `d(U rho U^+)` in the vacuum.
///
/// Linear terms keep only the `dtau` coefficient `C`, contributing
/// `C rho + rho C^+`. A sandwich `(X ds) rho (dt^+ Y^+)` survives the vacuum
/// trace exactly when `dt^+ ds = dtau` in the Ito table, contributing
/// `X rho Y^+`.
#[derive(Debug, Clone)]
pub struct IncrementGenerator {
    drift: Operator,
    sandwiches: Vec<(Operator, Operator)>,
}

impl IncrementGenerator {
    pub fn from_increment(increment: &ItoExpression) -> Self {
        let drift = increment.coefficient_or_zero(IncrementSymbol::Dt);
        let mut sandwiches = Vec::new();
        for (s, x) in increment.terms() {
            for (t, y) in increment.terms() {
                if t.adjoint().product(s) == Some(IncrementSymbol::Dt) {
                    sandwiches.push((x.clone(), y.adjoint()));
                }
            }
        }
        Self { drift, sandwiches }
    }

    pub fn sandwich_count(&self) -> usize {
        self.sandwiches.len()
    }

    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        if rho.nrows() != self.drift.nrows() || !rho.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.drift.nrows(),
                actual: rho.nrows(),
            });
        }
        let mut out = &self.drift * rho + rho * self.drift.adjoint();
        for (left, right) in &self.sandwiches {
            out += left * rho * right;
        }
        Ok(out)
    }
}

/// Generator of the reduced dynamics built from the closed-form Ito
/// coefficients through the increment table.
pub fn generator_from_increments(params: &EnsembleParams, basis: &DickeBasis) -> IncrementGenerator {
    let increment = closed_form_coefficients(params, basis).to_expression(params, basis);
    IncrementGenerator::from_increment(&increment)
}

/// Maximum entrywise deviation of the truncated series from the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientDeviation {
    pub a0: f64,
    pub a_plus: f64,
    pub a_minus: f64,
    pub a_lambda: f64,
    /// Largest coefficient entry of `E + E^+ + E E^+` for the closed forms.
    pub unitarity: f64,
}

impl CoefficientDeviation {
    pub fn max(&self) -> f64 {
        [self.a0, self.a_plus, self.a_minus, self.a_lambda, self.unitarity]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

fn max_abs_diff(a: &Operator, b: &Operator) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Compare the order-`order` series with the closed forms, and check the
/// unitarity identity for the closed forms.
pub fn verify_coefficients(
    params: &EnsembleParams,
    basis: &DickeBasis,
    order: usize,
) -> Result<CoefficientDeviation> {
    let series = expand_evolution_increment(params, basis, order)?;
    let closed = closed_form_coefficients(params, basis);
    let closed_expr = closed.to_expression(params, basis);
    let dev = |s| max_abs_diff(&series.coefficient_or_zero(s), &closed_expr.coefficient_or_zero(s));
    Ok(CoefficientDeviation {
        a0: dev(IncrementSymbol::Dt),
        a_plus: dev(IncrementSymbol::DB),
        a_minus: dev(IncrementSymbol::DBDag),
        a_lambda: dev(IncrementSymbol::DLambda),
        unitarity: unitarity_residual(&closed_expr)?.max_abs_entry(),
    })
}
