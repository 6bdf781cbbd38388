//! Critical thresholds, emitted intensity and pulse metrics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dicke::DickeBasis;
use crate::nl_factors::{stark_eigenvalue, suppression_factor};
use crate::params::EnsembleParams;
use crate::state::{DiagonalState, Trajectory};

const TWO_PI: f64 = 2.0 * PI;

/// `alpha' sum_m g_{m,m-1} s(x_{m-1}) p_m`.
pub fn intensity(params: &EnsembleParams, basis: &DickeBasis, p: &DiagonalState) -> f64 {
    intensity_of(params, basis, p.as_slice())
}

pub(crate) fn intensity_of(params: &EnsembleParams, basis: &DickeBasis, p: &[f64]) -> f64 {
    let sum: f64 = (1..basis.dim())
        .map(|k| {
            let x = stark_eigenvalue(params, basis.m(k - 1));
            basis.ladder_weight(k) * suppression_factor(x) * p[k].max(0.0)
        })
        .sum();
    params.intensity_scale * sum
}

/// Suppression thresholds. Every field is `None` when its defining
/// denominator vanishes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CriticalReport {
    /// `2 pi / (eta_plus - eta_minus)`: singly excited decay halts.
    pub r_cr_singly: Option<f64>,
    /// `(2 pi + eta_minus) / (eta_plus + eta_minus)`: fully excited state is stable.
    pub r_cr_fully: Option<f64>,
    /// `2 pi / eta_plus`, defined only for `eta_minus = 0`.
    pub r_cr_eta_minus_zero: Option<f64>,
    pub na_cr_singly: Option<f64>,
    pub na_cr_fully: Option<f64>,
    pub na_cr_eta_minus_zero: Option<f64>,
    /// Nearest admissible atom numbers to the real thresholds.
    pub nearest_na_singly: Option<u32>,
    pub nearest_na_fully: Option<u32>,
    pub nearest_na_eta_minus_zero: Option<u32>,
    /// First-step decay rate, in units of `chi^2`, at the nearest atom number.
    /// Zero only when the threshold is hit exactly.
    pub residual_rate_singly: Option<f64>,
    pub residual_rate_fully: Option<f64>,
    pub residual_rate_eta_minus_zero: Option<f64>,
    /// `(2 pi - r eta_plus) / eta_minus`, the excitation at which decay stalls.
    pub m_cr: Option<f64>,
    /// Whether `0 <= m_cr + r <= N_a`.
    pub m_cr_admissible: Option<bool>,
}

impl CriticalReport {
    pub fn is_empty(&self) -> bool {
        self.r_cr_singly.is_none()
            && self.r_cr_fully.is_none()
            && self.r_cr_eta_minus_zero.is_none()
            && self.m_cr.is_none()
    }
}

fn nearest_na(r_cr: f64) -> Option<u32> {
    let na = (2.0 * r_cr).round();
    (na >= 1.0 && na < f64::from(u32::MAX)).then_some(na as u32)
}

/// W-state decay rate over `chi^2`: `4 r s(r (eta_plus - eta_minus))`.
fn singly_rate_per_chi2(n_atoms: u32, eta_plus: f64, eta_minus: f64) -> f64 {
    let r = f64::from(n_atoms) / 2.0;
    4.0 * r * suppression_factor(r * (eta_plus - eta_minus))
}

/// Fully excited first-step rate over `chi^2`: `4 r s(r eta_plus + eta_minus (r - 1))`.
fn fully_rate_per_chi2(n_atoms: u32, eta_plus: f64, eta_minus: f64) -> f64 {
    let r = f64::from(n_atoms) / 2.0;
    4.0 * r * suppression_factor(r * eta_plus + eta_minus * (r - 1.0))
}

pub fn critical_values(params: &EnsembleParams) -> CriticalReport {
    let (ep, em) = (params.eta_plus, params.eta_minus);
    let mut rep = CriticalReport::default();

    if ep - em != 0.0 {
        let r = TWO_PI / (ep - em);
        rep.r_cr_singly = Some(r);
        rep.na_cr_singly = Some(2.0 * r);
        rep.nearest_na_singly = nearest_na(r);
        rep.residual_rate_singly = rep.nearest_na_singly.map(|n| singly_rate_per_chi2(n, ep, em));
    }
    if ep + em != 0.0 {
        let r = (TWO_PI + em) / (ep + em);
        rep.r_cr_fully = Some(r);
        rep.na_cr_fully = Some(2.0 * r);
        rep.nearest_na_fully = nearest_na(r);
        rep.residual_rate_fully = rep.nearest_na_fully.map(|n| fully_rate_per_chi2(n, ep, em));
    }
    if em == 0.0 && ep != 0.0 {
        let r = TWO_PI / ep;
        rep.r_cr_eta_minus_zero = Some(r);
        rep.na_cr_eta_minus_zero = Some(2.0 * r);
        rep.nearest_na_eta_minus_zero = nearest_na(r);
        rep.residual_rate_eta_minus_zero = rep.nearest_na_eta_minus_zero.map(|n| fully_rate_per_chi2(n, ep, 0.0));
    }
    if let Some(m) = stall_m(params) {
        let r = params.r();
        rep.m_cr = Some(m);
        rep.m_cr_admissible = Some(is_admissible_m(params, m));
        debug_assert!(r > 0.0);
    }
    rep
}

/// `(2 pi - r eta_plus) / eta_minus`; `None` when `eta_minus = 0`.
pub fn stall_m(params: &EnsembleParams) -> Option<f64> {
    (params.eta_minus != 0.0).then(|| (TWO_PI - params.r() * params.eta_plus) / params.eta_minus)
}

pub fn is_admissible_m(params: &EnsembleParams, m: f64) -> bool {
    let excited = m + params.r();
    (0.0..=f64::from(params.n_atoms)).contains(&excited)
}

/// Large-`r` superradiant pulse shape for `eta_minus = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sech2Reference {
    pub intensity: f64,
    /// `2 chi^2 alpha hbar omega (1 - cos(eta_plus r)) / (eta_plus r)^2`
    pub gamma_bar: f64,
    /// `ln(2 gamma_bar r) / (2 gamma_bar r)`; `None` unless `2 gamma_bar r > 1`,
    /// below which the formula gives no positive delay.
    pub t_d: Option<f64>,
    /// `gamma_bar r^2`
    pub peak: f64,
}

/// `gamma_bar r^2 sech^2(gamma_bar r (t - t_D))`.
pub fn sech2_reference(params: &EnsembleParams, alpha_hbar_omega: f64, t: f64) -> Sech2Reference {
    let r = params.r();
    let gamma_bar = 2.0 * params.chi2() * alpha_hbar_omega * suppression_factor(params.eta_plus * r);
    let peak = gamma_bar * r * r;
    if gamma_bar == 0.0 {
        return Sech2Reference {
            intensity: 0.0,
            gamma_bar,
            t_d: None,
            peak,
        };
    }
    let two_gr = 2.0 * gamma_bar * r;
    let t_d = two_gr.ln() / two_gr;
    let sech = 1.0 / (gamma_bar * r * (t - t_d)).cosh();
    Sech2Reference {
        intensity: peak * sech * sech,
        gamma_bar,
        t_d: (two_gr > 1.0).then_some(t_d),
        peak,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSummary {
    pub peak_time: f64,
    pub peak_intensity: f64,
    /// Full width at half maximum; `None` unless both half-maximum crossings
    /// lie inside the window.
    pub fwhm: Option<f64>,
    /// False when the maximum sits on the window boundary (monotone pulse).
    pub interior_peak: bool,
    #[serde(rename = "t_D_ref")]
    pub t_d_ref: Option<f64>,
    pub peak_ref: Option<f64>,
}

impl PulseSummary {
    /// Attach the sech^2 reference (only for `eta_minus = 0`). `t_D` uses the
    /// decay rate `gamma_bar = 2 chi^2 s(eta_plus r)` of the dimensionless time;
    /// the reference peak is expressed in the units of [`intensity`], i.e.
    /// `alpha' s(eta_plus r) r^2`.
    pub fn with_reference(mut self, params: &EnsembleParams) -> Self {
        if params.eta_minus == 0.0 {
            let reference = sech2_reference(params, 1.0, 0.0);
            let r = params.r();
            self.t_d_ref = reference.t_d;
            self.peak_ref = Some(params.intensity_scale * suppression_factor(params.eta_plus * r) * r * r);
        }
        self
    }
}

/// Peak (quadratic interpolation about the largest sample) and FWHM (linear
/// interpolation of the half-maximum crossings) of `traj.intensity`.
pub fn pulse_summary(traj: &Trajectory) -> PulseSummary {
    summarize(&traj.times, &traj.intensity)
}

pub fn summarize(times: &[f64], values: &[f64]) -> PulseSummary {
    let empty = PulseSummary {
        peak_time: f64::NAN,
        peak_intensity: f64::NAN,
        fwhm: None,
        interior_peak: false,
        t_d_ref: None,
        peak_ref: None,
    };
    if times.is_empty() || times.len() != values.len() {
        return empty;
    }
    let (i, &vmax) = values
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    if i == 0 || i + 1 == values.len() {
        return PulseSummary {
            peak_time: times[i],
            peak_intensity: vmax,
            ..empty
        };
    }

    let (t0, t1, t2) = (times[i - 1], times[i], times[i + 1]);
    let (y0, y1, y2) = (values[i - 1], vmax, values[i + 1]);
    // Lagrange parabola through the three samples
    let d01 = (y1 - y0) / (t1 - t0);
    let d12 = (y2 - y1) / (t2 - t1);
    let a = (d12 - d01) / (t2 - t0);
    let (peak_time, peak_intensity) = if a < 0.0 {
        let b = d01 - a * (t0 + t1);
        let tp = (-b / (2.0 * a)).clamp(t0, t2);
        let yp = y1 + d01 * (tp - t1) + a * (tp - t0) * (tp - t1);
        (tp, yp.max(y1))
    } else {
        (t1, y1)
    };

    let half = 0.5 * peak_intensity;
    let left = (1..=i).rev().find(|&j| values[j - 1] < half).map(|j| {
        let (ta, tb, ya, yb) = (times[j - 1], times[j], values[j - 1], values[j]);
        ta + (half - ya) * (tb - ta) / (yb - ya)
    });
    let right = (i..values.len() - 1).find(|&j| values[j + 1] < half).map(|j| {
        let (ta, tb, ya, yb) = (times[j], times[j + 1], values[j], values[j + 1]);
        ta + (ya - half) * (tb - ta) / (ya - yb)
    });
    let fwhm = match (left, right) {
        (Some(l), Some(r)) if r > l => Some(r - l),
        _ => None,
    };

    PulseSummary {
        peak_time,
        peak_intensity,
        fwhm,
        interior_peak: true,
        t_d_ref: None,
        peak_ref: None,
    }
}
