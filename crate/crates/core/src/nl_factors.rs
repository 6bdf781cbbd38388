//! Scalar non-Langevin factors and the Stark eigenvalue.
//!
//! Every factor is a function of the Stark eigenvalue `x_m = eta_plus r +
//! eta_minus m` on `|r, m>`. The operator versions are diagonal in the Dicke
//! basis and are built downstream by evaluating these scalars per `m`.
//!
//! All factors have removable singularities at `x = 0`. Near zero they are
//! evaluated from their Maclaurin series; elsewhere from trigonometric forms
//! written without subtractive cancellation where one exists
//! (`1 - cos x = 2 sin^2(x/2)`). `x - sin x` has no such form, so `a_s`
//! keeps its series branch out to `|x| = 0.5`.

use crate::dicke::DickeBasis;
use crate::error::Result;
use crate::params::EnsembleParams;
use crate::C64;

/// Below this magnitude `a0`, `a+-` and `phi` use their series.
pub const SERIES_THRESHOLD: f64 = 1e-3;

/// Below this magnitude `a_s` (and the imaginary part of `psi`) use the series.
pub const AS_SERIES_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `x_m = eta_plus r + eta_minus m`, the eigenvalue of
/// `eta_plus N_a/2 + eta_minus R3` on `|r, m>`.
pub fn x_of_m(params: &EnsembleParams, m: f64) -> Result<f64> {
    let basis = DickeBasis::new(params.n_atoms)?;
    basis.index_of(m)?;
    Ok(stark_eigenvalue(params, m))
}

/// Unchecked `x_m`; callers guarantee `m` lies in the multiplet.
pub(crate) fn stark_eigenvalue(params: &EnsembleParams, m: f64) -> f64 {
    params.eta_plus * params.r() + params.eta_minus * m
}

/// `x_m` for every basis index.
pub fn stark_spectrum(params: &EnsembleParams, basis: &DickeBasis) -> Vec<f64> {
    basis.m_values().map(|m| stark_eigenvalue(params, m)).collect()
}

/// `a0(x) = 2 (1 - cos x) / x^2`, in `[0, 1]` with `a0(0) = 1`.
pub fn a0_nl(x: f64) -> f64 {
    if x.abs() < SERIES_THRESHOLD {
        branch::a0_series(x)
    } else {
        branch::a0_direct(x)
    }
}

/// `a_s(x) = 2 (x - sin x) / x^2`, odd with `a_s(0) = 0`.
pub fn as_nl(x: f64) -> f64 {
    if x.abs() < AS_SERIES_THRESHOLD {
        branch::as_series(x)
    } else {
        branch::as_direct(x)
    }
}

/// `a+-(x) = (cos x - 1)/x +- i sin x / x`; `a+-(0) = +-i`.
pub fn a_pm_nl(x: f64, sign: Sign) -> C64 {
    let (re, im) = if x.abs() < SERIES_THRESHOLD {
        (branch::cosm1_over_x_series(x), branch::sinc_series(x))
    } else {
        (branch::cosm1_over_x_direct(x), branch::sinc_direct(x))
    };
    C64::new(re, sign.value() * im)
}

/// `(1 - cos x) / x^2 = a0(x) / 2`; vanishes at `x = 2 pi n`, `n != 0`.
pub fn suppression_factor(x: f64) -> f64 {
    0.5 * a0_nl(x)
}

/// `phi(x) = (e^{-ix} - 1) / x`, which coincides with `a-(x)`.
pub fn phi(x: f64) -> C64 {
    a_pm_nl(x, Sign::Minus)
}

/// `psi(x) = (e^{-ix} - 1 + ix) / x^2 = -a0(x)/2 + i a_s(x)/2`; `psi(0) = -1/2`.
pub fn psi(x: f64) -> C64 {
    C64::new(-0.5 * a0_nl(x), 0.5 * as_nl(x))
}

/// Raw evaluation branches, exposed so their agreement can be checked.
pub mod branch {
    /// Sum `sum_k c_k y^k` of an alternating series in `y = x^2` until terms
    /// stop contributing.
    fn even_series(y: f64, first: f64, ratio: impl Fn(u32) -> f64) -> f64 {
        let mut term = first;
        let mut sum = first;
        for k in 1..40 {
            term *= -y * ratio(k);
            let next = sum + term;
            if next == sum {
                break;
            }
            sum = next;
        }
        sum
    }

    /// `2 (1 - cos x)/x^2 = sum_k (-1)^k 2 x^{2k} / (2k+2)!`
    pub fn a0_series(x: f64) -> f64 {
        let y = x * x;
        even_series(y, 1.0, |k| {
            let k = f64::from(k);
            1.0 / ((2.0 * k + 1.0) * (2.0 * k + 2.0))
        })
    }

    pub fn a0_direct(x: f64) -> f64 {
        let h = 0.5 * x;
        let s = h.sin() / h;
        s * s
    }

    /// `2 (x - sin x)/x^2 = sum_k (-1)^k 2 x^{2k+1} / (2k+3)!`
    pub fn as_series(x: f64) -> f64 {
        let y = x * x;
        x * even_series(y, 1.0 / 3.0, |k| {
            let k = f64::from(k);
            1.0 / ((2.0 * k + 2.0) * (2.0 * k + 3.0))
        })
    }

    pub fn as_direct(x: f64) -> f64 {
        2.0 * (x - x.sin()) / (x * x)
    }

    /// `sin x / x = sum_k (-1)^k x^{2k} / (2k+1)!`
    pub fn sinc_series(x: f64) -> f64 {
        let y = x * x;
        even_series(y, 1.0, |k| {
            let k = f64::from(k);
            1.0 / ((2.0 * k) * (2.0 * k + 1.0))
        })
    }

    pub fn sinc_direct(x: f64) -> f64 {
        x.sin() / x
    }

    /// `(cos x - 1)/x = -x/2 + x^3/24 - ...`
    pub fn cosm1_over_x_series(x: f64) -> f64 {
        -0.5 * x * a0_series(x)
    }

    pub fn cosm1_over_x_direct(x: f64) -> f64 {
        let h = 0.5 * x;
        -2.0 * h.sin() * h.sin() / x
    }
}
