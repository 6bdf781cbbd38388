//! Non-Langevin master equation in Lindblad form and its diagonal reduction.
//!
//! ```text
//! d rho/dtau = chi^2 L- rho L+ - chi^2/2 {L+ L-, rho} - i [H_st + V, rho]
//! L- = a-(M) R-,  L+ = R+ a+(M),  H_st = -chi^2/2 R+ a_s(M) R-,
//! V  = -kappa (r^2 - R3^2)
//! ```
//!
//! with `M = diag(x_m)`. For diagonal states the populations obey the
//! cascade rate equations
//! `dp_m = -Gamma_m p_m + Gamma_{m+1} p_{m+1}` with
//! `Gamma_m = 2 chi^2 g_{m,m-1} s(x_{m-1})` and `s(x) = (1 - cos x)/x^2`.

use nalgebra::DVector;

use crate::analysis::intensity_of;
use crate::dicke::{diagonal_from, op_rminus, op_rplus, DickeBasis, Operator};
use crate::error::{Error, Result};
use crate::nl_factors::{a_pm_nl, as_nl, stark_spectrum, suppression_factor, Sign};
use crate::ode::{integrate, IntegratorConfig};
use crate::params::EnsembleParams;
use crate::state::{DensityMatrix, DiagonalState, Trajectory};
use crate::C64;

/// `(L-, L+)`.
pub fn lindblad_ops(params: &EnsembleParams, basis: &DickeBasis) -> (Operator, Operator) {
    let xs = stark_spectrum(params, basis);
    let a_minus = diagonal_from(basis, |k| a_pm_nl(xs[k], Sign::Minus));
    let a_plus = diagonal_from(basis, |k| a_pm_nl(xs[k], Sign::Plus));
    (a_minus * op_rminus(basis), op_rplus(basis) * a_plus)
}

/// `H_st = -chi^2/2 R+ a_s(M) R-`, diagonal with entries
/// `-chi^2/2 g_{m,m-1} a_s(x_{m-1})`.
pub fn hamiltonian_shift(params: &EnsembleParams, basis: &DickeBasis) -> Operator {
    let xs = stark_spectrum(params, basis);
    let chi2 = params.chi2();
    diagonal_from(basis, |k| {
        if k == 0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(-0.5 * chi2 * basis.ladder_weight(k) * as_nl(xs[k - 1]), 0.0)
        }
    })
}

/// `V = -kappa (r^2 - R3^2)`.
pub fn exchange_operator(params: &EnsembleParams, basis: &DickeBasis) -> Operator {
    let r = basis.r();
    diagonal_from(basis, |k| {
        let m = basis.m(k);
        C64::new(-params.kappa * (r * r - m * m), 0.0)
    })
}

/// Cascade rates `Gamma_k = 2 chi^2 g_k s(x_{k-1})` out of each basis index;
/// `Gamma_0 = 0`.
pub fn decay_rates(params: &EnsembleParams, basis: &DickeBasis) -> Vec<f64> {
    let xs = stark_spectrum(params, basis);
    let chi2 = params.chi2();
    (0..basis.dim())
        .map(|k| {
            if k == 0 {
                0.0
            } else {
                2.0 * chi2 * basis.ladder_weight(k) * suppression_factor(xs[k - 1])
            }
        })
        .collect()
}

/// Precomputed operators of the master equation for one parameter set.
#[derive(Debug, Clone)]
pub struct MasterGenerator {
    params: EnsembleParams,
    basis: DickeBasis,
    l_minus: Operator,
    l_plus: Operator,
    /// `H_st + V - i chi^2/2 L+ L-`
    h_eff: Operator,
    rates: Vec<f64>,
}

impl MasterGenerator {
    pub fn new(params: &EnsembleParams, basis: &DickeBasis) -> Result<Self> {
        params.validate()?;
        if params.n_atoms != basis.twice_r() {
            return Err(Error::DimensionMismatch {
                expected: params.n_atoms as usize + 1,
                actual: basis.dim(),
            });
        }
        let (l_minus, l_plus) = lindblad_ops(params, basis);
        let lpl = &l_plus * &l_minus;
        let h_eff = hamiltonian_shift(params, basis) + exchange_operator(params, basis)
            - lpl * C64::new(0.0, 0.5 * params.chi2());
        Ok(Self {
            params: *params,
            basis: *basis,
            l_minus,
            l_plus,
            h_eff,
            rates: decay_rates(params, basis),
        })
    }

    pub fn params(&self) -> &EnsembleParams {
        &self.params
    }

    pub fn basis(&self) -> &DickeBasis {
        &self.basis
    }

    pub fn l_minus(&self) -> &Operator {
        &self.l_minus
    }

    pub fn l_plus(&self) -> &Operator {
        &self.l_plus
    }

    /// Non-Hermitian effective Hamiltonian `H_st + V - i chi^2/2 L+ L-`.
    pub fn effective_hamiltonian(&self) -> &Operator {
        &self.h_eff
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Largest cascade rate.
    pub fn max_rate(&self) -> f64 {
        self.rates.iter().copied().fold(0.0, f64::max)
    }

    pub fn rhs_full(&self, rho: &Operator) -> Result<Operator> {
        self.basis.check_dim(rho.nrows())?;
        self.basis.check_dim(rho.ncols())?;
        Ok(self.rhs_full_unchecked(rho))
    }

    fn rhs_full_unchecked(&self, rho: &Operator) -> Operator {
        let jump = &self.l_minus * rho * &self.l_plus * C64::new(self.params.chi2(), 0.0);
        let minus_i = C64::new(0.0, -1.0);
        jump + (&self.h_eff * rho - rho * self.h_eff.adjoint()) * minus_i
    }

    pub fn rhs_diag(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        self.basis.check_dim(p.len())?;
        Ok(self.rhs_diag_unchecked(p))
    }

    fn rhs_diag_unchecked(&self, p: &DVector<f64>) -> DVector<f64> {
        let d = p.len();
        let rates = &self.rates;
        DVector::from_fn(d, |k, _| {
            let gain = if k + 1 < d { rates[k + 1] * p[k + 1] } else { 0.0 };
            gain - rates[k] * p[k]
        })
    }

    /// Integrate the rate equations from populations `p0`.
    pub fn integrate_diag(&self, p0: &DiagonalState, config: &IntegratorConfig) -> Result<Trajectory> {
        self.basis.check_dim(p0.len())?;
        p0.check(1.0)?;
        let sol = integrate(
            |p: &DVector<f64>| self.rhs_diag_unchecked(p),
            p0.to_dvector(),
            config,
            |t, p| {
                DiagonalState::from_vec_unchecked(p.iter().copied().collect())
                    .check(10.0)
                    .map_err(|e| Error::InvariantBreach { t, what: e.to_string() })
            },
        )?;
        let populations: Vec<DiagonalState> = sol
            .states
            .iter()
            .map(|p| DiagonalState::from_vec_unchecked(p.iter().copied().collect()))
            .collect();
        let intensity = populations
            .iter()
            .map(|p| intensity_of(&self.params, &self.basis, p.as_slice()))
            .collect();
        Ok(Trajectory {
            times: sol.times,
            populations,
            intensity,
            snapshots: None,
            std_errors: None,
        })
    }

    /// Integrate the full Lindblad equation from `rho0`. Every sample is
    /// checked for Hermiticity, unit trace and positivity.
    pub fn integrate_full(
        &self,
        rho0: &DensityMatrix,
        config: &IntegratorConfig,
        keep_snapshots: bool,
    ) -> Result<Trajectory> {
        self.basis.check_dim(rho0.dim())?;
        rho0.check(1.0)?;
        let sol = integrate(
            |rho: &Operator| self.rhs_full_unchecked(rho),
            rho0.matrix().clone(),
            config,
            |t, rho| {
                DensityMatrix::from_matrix_unchecked(rho.clone())
                    .check(10.0)
                    .map_err(|e| Error::InvariantBreach { t, what: e.to_string() })
            },
        )?;
        let populations: Vec<DiagonalState> = sol
            .states
            .iter()
            .map(|rho| DiagonalState::from_vec_unchecked(rho.diagonal().iter().map(|z| z.re).collect()))
            .collect();
        let intensity = populations
            .iter()
            .map(|p| intensity_of(&self.params, &self.basis, p.as_slice()))
            .collect();
        Ok(Trajectory {
            times: sol.times,
            populations,
            intensity,
            snapshots: keep_snapshots.then_some(sol.states),
            std_errors: None,
        })
    }

    /// Mean time to cascade from index `from` to the ground state,
    /// `sum_k 1/Gamma_k`; `None` if any step on the way is fully suppressed.
    pub fn cascade_time(&self, from: usize) -> Option<f64> {
        let mut total = 0.0;
        for k in 1..=from.min(self.basis.dim() - 1) {
            let rate = self.rates[k];
            if rate <= 0.0 || !rate.is_finite() {
                return None;
            }
            total += 1.0 / rate;
        }
        Some(total)
    }
}

pub fn rhs_full(params: &EnsembleParams, basis: &DickeBasis, rho: &Operator) -> Result<Operator> {
    MasterGenerator::new(params, basis)?.rhs_full(rho)
}

pub fn rhs_diag(params: &EnsembleParams, basis: &DickeBasis, p: &DiagonalState) -> Result<Vec<f64>> {
    let out = MasterGenerator::new(params, basis)?.rhs_diag(&p.to_dvector())?;
    Ok(out.iter().copied().collect())
}

/// `exp(-4 chi^2 r s(r (eta_plus - eta_minus)) tau)`: population of the
/// singly excited state `|r, -r + 1>` under the master equation.
pub fn singly_excited_population(params: &EnsembleParams, tau: f64) -> f64 {
    let r = params.r();
    let x = r * (params.eta_plus - params.eta_minus);
    (-4.0 * params.chi2() * r * suppression_factor(x) * tau).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn max_abs(op: &Operator) -> f64 {
        op.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn generic() -> (EnsembleParams, DickeBasis) {
        let p = EnsembleParams::new(6, 0.3, 0.23, -0.11, 0.7).unwrap();
        (p, DickeBasis::new(6).unwrap())
    }

    #[test]
    fn lindblad_ops_structure() {
        let (p, b) = generic();
        let (lm, lp) = lindblad_ops(&p, &b);
        assert_eq!(lp, lm.adjoint());
        let xs = stark_spectrum(&p, &b);
        for k in 1..b.dim() {
            let expected = a_pm_nl(xs[k - 1], Sign::Minus) * b.ladder_weight(k).sqrt();
            assert!((lm[(k - 1, k)] - expected).norm() < 1e-15);
        }
        let lpl = &lp * &lm;
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                if i != j {
                    assert_eq!(lpl[(i, j)].norm(), 0.0);
                }
            }
        }
        assert!((lpl[(b.dim() - 1, b.dim() - 1)].re - b.ladder_weight(6) * crate::nl_factors::a0_nl(xs[5])).abs() < 1e-14);
    }

    #[test]
    fn lindblad_ops_langevin_limit() {
        let p = EnsembleParams::langevin(4, 0.2).unwrap();
        let b = DickeBasis::new(4).unwrap();
        let (lm, _) = lindblad_ops(&p, &b);
        let expected = op_rminus(&b) * C64::new(0.0, -1.0);
        assert!(max_abs(&(lm - expected)) < 1e-15);
    }

    #[test]
    fn lindblad_ops_vanish_at_two_pi() {
        // r = 1/2: x_{-1/2} = eta_plus/2 - eta_minus/2 = 2 pi
        let p = EnsembleParams::new(1, 0.4, 3.0 * PI, -PI, 0.0).unwrap();
        let b = DickeBasis::new(1).unwrap();
        let (lm, _) = lindblad_ops(&p, &b);
        assert!(max_abs(&lm) < 1e-15);
    }

    #[test]
    fn lpl_diagonal_r1() {
        let p = EnsembleParams::new(2, 0.3, 0.4, 0.2, 0.0).unwrap();
        let b = DickeBasis::new(2).unwrap();
        let (lm, lp) = lindblad_ops(&p, &b);
        let lpl = lp * lm;
        // m = 1: g_{1,0} = 2, x_0 = eta_plus
        assert_relative_eq!(lpl[(2, 2)].re, 2.0 * crate::nl_factors::a0_nl(0.4), epsilon = 1e-15);
    }

    #[test]
    fn hamiltonian_shift_examples() {
        let b = DickeBasis::new(4).unwrap();
        let h = hamiltonian_shift(&EnsembleParams::langevin(4, 0.5).unwrap(), &b);
        assert_eq!(max_abs(&h), 0.0);
        let (p, b) = generic();
        assert_eq!(hamiltonian_shift(&p, &b)[(0, 0)].norm(), 0.0);
        // r = 1/2, x_{-1/2} = pi
        let p = EnsembleParams::new(1, 0.3, PI, -PI, 0.0).unwrap();
        let h = hamiltonian_shift(&p, &DickeBasis::new(1).unwrap());
        assert_relative_eq!(h[(1, 1)].re, -0.5 * 0.09 * 2.0 / PI, epsilon = 1e-15);
    }

    #[test]
    fn exchange_operator_examples() {
        let p = EnsembleParams::new(2, 0.1, 0.0, 0.0, 1.5).unwrap();
        let b = DickeBasis::new(2).unwrap();
        let v = exchange_operator(&p, &b);
        assert_eq!(v[(0, 0)].re, 0.0);
        assert_eq!(v[(2, 2)].re, 0.0);
        assert_eq!(v[(1, 1)].re, -1.5);
        let p = EnsembleParams::new(2, 0.1, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(max_abs(&exchange_operator(&p, &b)), 0.0);
    }

    #[test]
    fn rhs_full_two_level() {
        let p = EnsembleParams::langevin(1, 0.3).unwrap();
        let b = DickeBasis::new(1).unwrap();
        let rho = DensityMatrix::basis_state(&b, 1).unwrap();
        let d = rhs_full(&p, &b, rho.matrix()).unwrap();
        assert_relative_eq!(d[(1, 1)].re, -0.09, epsilon = 1e-16);
        assert_relative_eq!(d[(0, 0)].re, 0.09, epsilon = 1e-16);
        let ground = DensityMatrix::basis_state(&b, 0).unwrap();
        assert_eq!(max_abs(&rhs_full(&p, &b, ground.matrix()).unwrap()), 0.0);
        assert!(rhs_full(&p, &b, &Operator::zeros(3, 3)).is_err());
    }

    #[test]
    fn rhs_full_keeps_diagonal_states_diagonal() {
        let (p, b) = generic();
        let pops = DiagonalState::new(vec![0.1, 0.2, 0.05, 0.15, 0.3, 0.1, 0.1]).unwrap();
        let rho = DensityMatrix::from_populations(&pops);
        let d = rhs_full(&p, &b, rho.matrix()).unwrap();
        let off = DensityMatrix::from_matrix_unchecked(d.clone()).max_off_diagonal();
        assert!(off < 1e-15);
        let diag = rhs_diag(&p, &b, &pops).unwrap();
        for k in 0..b.dim() {
            assert!((d[(k, k)].re - diag[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn rhs_full_is_trace_free_and_hermitian() {
        let (p, b) = generic();
        let psi = DVector::from_fn(b.dim(), |k, _| C64::new(0.3 + k as f64 * 0.1, 0.2 * k as f64 - 0.4));
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let d = rhs_full(&p, &b, rho.matrix()).unwrap();
        assert!(d.trace().norm() < 1e-14);
        assert!(max_abs(&(d.adjoint() - &d)) < 1e-14);
    }

    #[test]
    fn rhs_diag_examples() {
        let (p, b) = generic();
        let ground = DiagonalState::basis_state(&b, 0).unwrap();
        assert!(rhs_diag(&p, &b, &ground).unwrap().iter().all(|v| *v == 0.0));

        let p = EnsembleParams::langevin(1, 0.3).unwrap();
        let b = DickeBasis::new(1).unwrap();
        let excited = DiagonalState::basis_state(&b, 1).unwrap();
        let d = rhs_diag(&p, &b, &excited).unwrap();
        assert_relative_eq!(d[0], 0.09, epsilon = 1e-16);
        assert_relative_eq!(d[1], -0.09, epsilon = 1e-16);

        // fully excited r = 20 with x_{r-1} = 2 pi
        let em = 0.1;
        let ep = (2.0 * PI + em) / 20.0 - em;
        let p = EnsembleParams::new(40, 0.2, ep, em, 0.0).unwrap();
        let b = DickeBasis::new(40).unwrap();
        let full = DiagonalState::basis_state(&b, 40).unwrap();
        let d = rhs_diag(&p, &b, &full).unwrap();
        assert!(d[40].abs() < 1e-28);
    }

    #[test]
    fn rhs_diag_conserves_probability() {
        let (p, b) = generic();
        let pops = DiagonalState::new(vec![0.1, 0.2, 0.05, 0.15, 0.3, 0.1, 0.1]).unwrap();
        let d = rhs_diag(&p, &b, &pops).unwrap();
        assert!(d.iter().sum::<f64>().abs() < 1e-16);
    }

    #[test]
    fn singly_excited_law_examples() {
        let p = EnsembleParams::new(20, 1.0, 0.15, 0.05, 0.0).unwrap();
        assert_eq!(singly_excited_population(&p, 0.0), 1.0);
        // r (eta_plus - eta_minus) = 1
        assert_relative_eq!(
            singly_excited_population(&p, 1.0),
            (-40.0f64 * 0.459_697_694_131_860_3).exp(),
            max_relative = 1e-13
        );
        assert_relative_eq!((-18.387_907_765_274_41f64).exp(), singly_excited_population(&p, 1.0), max_relative = 1e-12);
        let p = EnsembleParams::new(40, 0.3, PI / 10.0, 0.0, 0.0).unwrap();
        for tau in [0.0, 10.0, 1e6] {
            assert_eq!(singly_excited_population(&p, tau), 1.0);
        }
        let p = EnsembleParams::new(3, 0.3, 0.7, 0.1, 0.0).unwrap();
        let mut prev = 1.0;
        for i in 0..100 {
            let v = singly_excited_population(&p, f64::from(i) * 0.5);
            assert!(v <= prev && v > 0.0);
            prev = v;
        }
    }

    #[test]
    fn integrate_two_level_decay() {
        let p = EnsembleParams::langevin(1, 0.3).unwrap();
        let b = DickeBasis::new(1).unwrap();
        let gen = MasterGenerator::new(&p, &b).unwrap();
        let t_max = 5.0 / 0.09;
        let cfg = IntegratorConfig::adaptive(t_max, 50);
        let traj = gen.integrate_diag(&DiagonalState::basis_state(&b, 1).unwrap(), &cfg).unwrap();
        for (t, pop) in traj.times.iter().zip(&traj.populations) {
            assert!((pop[1] - (-0.09 * t).exp()).abs() < 1e-8);
        }
        let traj = gen
            .integrate_full(&DensityMatrix::basis_state(&b, 1).unwrap(), &cfg, false)
            .unwrap();
        for (t, pop) in traj.times.iter().zip(&traj.populations) {
            assert!((pop[1] - (-0.09 * t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_trajectory_for_ground_state() {
        let (p, b) = generic();
        let gen = MasterGenerator::new(&p, &b).unwrap();
        let traj = gen
            .integrate_diag(&DiagonalState::basis_state(&b, 0).unwrap(), &IntegratorConfig::adaptive(10.0, 5))
            .unwrap();
        assert!(traj.populations.iter().all(|s| s[0] == 1.0));
        assert!(traj.intensity.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn full_and_diagonal_integrations_agree() {
        let p = EnsembleParams::new(10, 0.2, 0.3, 0.12, 0.8).unwrap();
        let b = DickeBasis::new(10).unwrap();
        let gen = MasterGenerator::new(&p, &b).unwrap();
        let pops = DiagonalState::new(vec![0.0, 0.05, 0.1, 0.1, 0.05, 0.2, 0.1, 0.1, 0.1, 0.1, 0.1]).unwrap();
        let cfg = IntegratorConfig::adaptive(3.0, 30);
        let diag = gen.integrate_diag(&pops, &cfg).unwrap();
        let full = gen.integrate_full(&DensityMatrix::from_populations(&pops), &cfg, true).unwrap();
        for (a, c) in diag.populations.iter().zip(&full.populations) {
            for k in 0..b.dim() {
                assert!((a[k] - c[k]).abs() < 1e-8);
            }
        }
        for rho in full.snapshots.unwrap() {
            assert!(DensityMatrix::from_matrix_unchecked(rho).max_off_diagonal() < 1e-10);
        }
    }

    #[test]
    fn cascade_time_handles_suppression() {
        let p = EnsembleParams::langevin(2, 1.0).unwrap();
        let gen = MasterGenerator::new(&p, &DickeBasis::new(2).unwrap()).unwrap();
        // rates 2 * g * 1/2 = g: g = 2, 2
        assert_relative_eq!(gen.cascade_time(2).unwrap(), 1.0, epsilon = 1e-15);
        let p = EnsembleParams::new(40, 0.3, PI / 10.0, 0.0, 0.0).unwrap();
        let gen = MasterGenerator::new(&p, &DickeBasis::new(40).unwrap()).unwrap();
        assert!(gen.cascade_time(40).unwrap_or(f64::INFINITY) > 1e20);
    }

    #[test]
    fn generator_rejects_mismatched_basis() {
        let p = EnsembleParams::langevin(3, 0.1).unwrap();
        assert!(MasterGenerator::new(&p, &DickeBasis::new(4).unwrap()).is_err());
    }
}
