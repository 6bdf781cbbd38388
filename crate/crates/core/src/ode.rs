//! Explicit Runge-Kutta integration for autonomous linear systems.
//!
//! Two methods are provided: classical fixed-step RK4 and the adaptive
//! Dormand-Prince 5(4) embedded pair. States are anything implementing
//! [`OdeState`], which lets the same driver step population vectors and
//! full density matrices.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Method {
    /// Classical fourth-order Runge-Kutta with fixed step `dt`.
    Rk4 { dt: f64 },
    /// Dormand-Prince 5(4) with per-step error control.
    Rk45 { rel_tol: f64, abs_tol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_max: f64,
    /// Spacing of output samples; the first sample is at `t = 0` and the last
    /// at `t_max`.
    pub sample_interval: f64,
}

impl IntegratorConfig {
    pub fn adaptive(t_max: f64, n_samples: usize) -> Self {
        Self {
            method: Method::Rk45 {
                rel_tol: 1e-9,
                abs_tol: 1e-12,
            },
            t_max,
            sample_interval: t_max / n_samples.max(1) as f64,
        }
    }

    pub fn fixed(t_max: f64, dt: f64, n_samples: usize) -> Self {
        Self {
            method: Method::Rk4 { dt },
            t_max,
            sample_interval: t_max / n_samples.max(1) as f64,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.method = Method::Rk45 { rel_tol, abs_tol };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return bad("t_max must be finite and > 0");
        }
        if !(self.sample_interval.is_finite() && self.sample_interval > 0.0) {
            return bad("sample interval must be finite and > 0");
        }
        match self.method {
            Method::Rk4 { dt } if !(dt.is_finite() && dt > 0.0) => bad("dt must be > 0"),
            Method::Rk45 { rel_tol, abs_tol } if !(rel_tol > 0.0 && abs_tol > 0.0) => {
                bad("tolerances must be > 0")
            }
            _ => Ok(()),
        }
    }

    /// Sample times `0, h, 2h, ..., t_max` (the last interval may be short).
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_max / self.sample_interval - 1e-9).ceil().max(1.0) as usize;
        let mut ts: Vec<f64> = (0..n).map(|i| i as f64 * self.sample_interval).collect();
        ts.push(self.t_max);
        ts
    }
}

/// Vector-space operations needed by the Runge-Kutta driver.
pub trait OdeState: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);

    /// Max over components of `|err_i| / (abs_tol + rel_tol * max(|y_i|, |z_i|))`.
    fn scaled_error(err: &Self, y: &Self, z: &Self, rel_tol: f64, abs_tol: f64) -> f64;

    fn is_finite(&self) -> bool;

    fn zeros_like(&self) -> Self;
}

impl OdeState for DVector<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.axpy(a, x, 1.0);
    }

    fn scaled_error(err: &Self, y: &Self, z: &Self, rel_tol: f64, abs_tol: f64) -> f64 {
        err.iter()
            .zip(y.iter().zip(z.iter()))
            .map(|(e, (a, b))| e.abs() / (abs_tol + rel_tol * a.abs().max(b.abs())))
            .fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }

    fn zeros_like(&self) -> Self {
        DVector::zeros(self.len())
    }
}

impl OdeState for DMatrix<C64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.zip_apply(x, |s, v| *s += v * a);
    }

    fn scaled_error(err: &Self, y: &Self, z: &Self, rel_tol: f64, abs_tol: f64) -> f64 {
        err.iter()
            .zip(y.iter().zip(z.iter()))
            .map(|(e, (a, b))| e.norm() / (abs_tol + rel_tol * a.norm().max(b.norm())))
            .fold(0.0, f64::max)
    }

    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    fn zeros_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }
}

/// Output of [`integrate`]: states at the configured sample times.
#[derive(Debug, Clone)]
pub struct Solution<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub steps_taken: usize,
    pub steps_rejected: usize,
}

const MIN_STEP: f64 = 1e-14;

/// Integrate `dy/dt = f(y)` from `y0` over `[0, t_max]`, sampling at
/// `config.sample_times()`. `observe` sees every sample and may abort.
pub fn integrate<S, F, O>(f: F, y0: S, config: &IntegratorConfig, mut observe: O) -> Result<Solution<S>>
where
    S: OdeState,
    F: Fn(&S) -> S,
    O: FnMut(f64, &S) -> Result<()>,
{
    config.validate()?;
    let times = config.sample_times();
    let mut states = Vec::with_capacity(times.len());
    observe(0.0, &y0)?;
    states.push(y0.clone());

    let mut y = y0;
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut h = match config.method {
        Method::Rk4 { dt } => dt,
        Method::Rk45 { .. } => config.sample_interval.min(config.t_max) * 1e-3,
    };

    for &t_next in &times[1..] {
        while t < t_next {
            let remaining = t_next - t;
            // absorb a vanishing remainder into the current step
            let last = remaining <= h * (1.0 + 1e-12) || remaining < MIN_STEP * t_next.max(1.0);
            let step = if last { remaining } else { h };
            match config.method {
                Method::Rk4 { .. } => {
                    y = rk4_step(&f, &y, step);
                    t = if last { t_next } else { t + step };
                    steps += 1;
                }
                Method::Rk45 { rel_tol, abs_tol } => {
                    let (y_new, err) = dopri_step(&f, &y, step);
                    let norm = S::scaled_error(&err, &y, &y_new, rel_tol, abs_tol);
                    if !norm.is_finite() {
                        return Err(Error::InvariantBreach {
                            t,
                            what: "non-finite state during integration".into(),
                        });
                    }
                    if norm <= 1.0 {
                        y = y_new;
                        t = if last { t_next } else { t + step };
                        steps += 1;
                        let grow = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                        // a shortened landing step must not shrink the next one
                        h = if last { h.max(step * grow) } else { step * grow };
                    } else {
                        rejected += 1;
                        h = step * (0.9 * norm.powf(-0.25)).clamp(0.1, 0.9);
                        if h < MIN_STEP * t.abs().max(1.0) {
                            return Err(Error::StepUnderflow { t, h });
                        }
                    }
                }
            }
            if !y.is_finite() {
                return Err(Error::InvariantBreach {
                    t,
                    what: "non-finite state during integration".into(),
                });
            }
        }
        observe(t_next, &y)?;
        states.push(y.clone());
    }

    Ok(Solution {
        times,
        states,
        steps_taken: steps,
        steps_rejected: rejected,
    })
}

fn rk4_step<S: OdeState, F: Fn(&S) -> S>(f: &F, y: &S, h: f64) -> S {
    let k1 = f(y);
    let mut tmp = y.clone();
    tmp.axpy(0.5 * h, &k1);
    let k2 = f(&tmp);
    let mut tmp = y.clone();
    tmp.axpy(0.5 * h, &k2);
    let k3 = f(&tmp);
    let mut tmp = y.clone();
    tmp.axpy(h, &k3);
    let k4 = f(&tmp);
    let mut out = y.clone();
    out.axpy(h / 6.0, &k1);
    out.axpy(h / 3.0, &k2);
    out.axpy(h / 3.0, &k3);
    out.axpy(h / 6.0, &k4);
    out
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo<S: OdeState>(y: &S, h: f64, terms: &[(f64, &S)]) -> S {
    let mut out = y.clone();
    for (c, k) in terms {
        if *c != 0.0 {
            out.axpy(h * c, k);
        }
    }
    out
}

fn dopri_step<S: OdeState, F: Fn(&S) -> S>(f: &F, y: &S, h: f64) -> (S, S) {
    let k1 = f(y);
    let k2 = f(&combo(y, h, &[(A21, &k1)]));
    let k3 = f(&combo(y, h, &[(A31, &k1), (A32, &k2)]));
    let k4 = f(&combo(y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&combo(y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&combo(y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = combo(y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(&y_new);
    let mut err = k1.zeros_like();
    for (c, k) in [(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)] {
        err.axpy(h * c, k);
    }
    (y_new, err)
}
