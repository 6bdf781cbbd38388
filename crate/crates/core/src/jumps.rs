//! Monte Carlo wavefunction unraveling of the master equation.
//!
//! Each trajectory is a pure state evolved in fixed steps: with probability
//! `chi^2 <L+ L-> dt` it jumps (`psi -> L- psi`), otherwise it evolves under
//! the non-Hermitian `H_eff`. Both branches renormalize.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis::intensity_of;
use crate::dicke::{DickeBasis, Operator};
use crate::error::{Error, Result};
use crate::master::MasterGenerator;
use crate::params::EnsembleParams;
use crate::state::{DiagonalState, Trajectory};
use crate::C64;

/// Upper bound on `dt * max jump rate`.
pub const MAX_STEP_PROBABILITY: f64 = 0.1;
/// `dt * max jump rate` used by [`JumpConfig::auto_dt`].
pub const DEFAULT_STEP_PROBABILITY: f64 = 0.001;
pub const NORM_TOL: f64 = 1e-10;

const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct JumpConfig {
    pub n_trajectories: usize,
    pub seed: u64,
    pub dt: f64,
    pub t_max: f64,
    /// Record a sample every this many steps (the final step is always kept).
    pub sample_every: usize,
    initial: DVector<C64>,
}

impl JumpConfig {
    /// Checks `dt * max rate < 0.1` against the given parameters and that
    /// `initial` is a unit vector of the right dimension.
    pub fn new(
        params: &EnsembleParams,
        basis: &DickeBasis,
        initial: DVector<C64>,
        n_trajectories: usize,
        seed: u64,
        dt: f64,
        t_max: f64,
    ) -> Result<Self> {
        if n_trajectories == 0 {
            return Err(Error::InvalidParameter("n_trajectories must be at least 1".into()));
        }
        if !(dt > 0.0 && dt.is_finite()) || !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("need dt > 0 and t_max > 0, got {dt} and {t_max}")));
        }
        basis.check_dim(initial.len())?;
        let norm = initial.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("initial state has norm {norm}")));
        }
        let max_rate = MasterGenerator::new(params, basis)?.max_rate();
        if dt * max_rate >= MAX_STEP_PROBABILITY {
            return Err(Error::InvalidParameter(format!(
                "dt * max jump rate = {} must stay below {MAX_STEP_PROBABILITY}",
                dt * max_rate
            )));
        }
        let steps = (t_max / dt).ceil().max(1.0) as usize;
        Ok(Self {
            n_trajectories,
            seed,
            dt,
            t_max,
            sample_every: (steps / 200).max(1),
            initial,
        })
    }

    /// Starts from the Dicke basis state with index `k`.
    pub fn from_basis_state(
        params: &EnsembleParams,
        basis: &DickeBasis,
        k: usize,
        n_trajectories: usize,
        seed: u64,
        dt: f64,
        t_max: f64,
    ) -> Result<Self> {
        if k >= basis.dim() {
            return Err(Error::InvalidState(format!("basis index {k} out of range")));
        }
        Self::new(params, basis, basis.basis_vector(k), n_trajectories, seed, dt, t_max)
    }

    /// `0.001 / max rate`, or `t_max / 1000` when nothing can decay.
    pub fn auto_dt(params: &EnsembleParams, basis: &DickeBasis, t_max: f64) -> Result<f64> {
        let max_rate = MasterGenerator::new(params, basis)?.max_rate();
        Ok(if max_rate > 0.0 {
            (DEFAULT_STEP_PROBABILITY / max_rate).min(t_max / 10.0)
        } else {
            t_max / 1000.0
        })
    }

    pub fn with_sample_every(mut self, n: usize) -> Self {
        self.sample_every = n.max(1);
        self
    }

    pub fn initial(&self) -> &DVector<C64> {
        &self.initial
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_max / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    fn is_sample_step(&self, step: usize) -> bool {
        step.is_multiple_of(self.sample_every) || step == self.n_steps()
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.n_steps())
            .filter(|&s| self.is_sample_step(s))
            .map(|s| s as f64 * self.dt)
            .collect()
    }
}

/// One stochastic trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpRecord {
    pub index: usize,
    pub jump_times: Vec<f64>,
    pub sample_times: Vec<f64>,
    /// Normalized state at each sample time.
    pub samples: Vec<DVector<C64>>,
    pub final_state: DVector<C64>,
}

impl JumpRecord {
    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }
}

/// `H_st + V - i chi^2/2 L+ L-`; diagonal in the Dicke basis.
pub fn effective_hamiltonian(params: &EnsembleParams, basis: &DickeBasis) -> Result<Operator> {
    Ok(MasterGenerator::new(params, basis)?.effective_hamiltonian().clone())
}

/// Fixed per-parameter data shared by all trajectories.
struct Propagator {
    /// `exp(-i h_k dt)` for the diagonal of `H_eff`.
    no_jump: Vec<C64>,
    /// `chi^2 (L+ L-)_kk`
    rates: Vec<f64>,
    /// Sub-diagonal of `L-`: `L- |k> = lm[k] |k-1>`.
    lm: Vec<C64>,
}

impl Propagator {
    fn new(params: &EnsembleParams, basis: &DickeBasis, dt: f64) -> Result<Self> {
        let gen = MasterGenerator::new(params, basis)?;
        let h = gen.effective_hamiltonian();
        let d = basis.dim();
        let chi2 = params.chi2();
        let lm = gen.l_minus();
        let lpl = gen.l_plus() * lm;
        Ok(Self {
            no_jump: (0..d).map(|k| (h[(k, k)] * C64::new(0.0, -dt)).exp()).collect(),
            rates: (0..d).map(|k| chi2 * lpl[(k, k)].re).collect(),
            lm: (0..d).map(|k| if k == 0 { C64::new(0.0, 0.0) } else { lm[(k - 1, k)] }).collect(),
        })
    }

    fn jump_probability(&self, psi: &DVector<C64>, dt: f64) -> f64 {
        psi.iter().zip(&self.rates).map(|(a, r)| a.norm_sqr() * r).sum::<f64>() * dt
    }
}

fn normalize(psi: &mut DVector<C64>, t: f64) -> Result<()> {
    let norm = psi.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::ZeroNormJump { t });
    }
    psi.unscale_mut(norm);
    let after = psi.norm();
    if (after - 1.0).abs() > NORM_TOL {
        return Err(Error::InvariantBreach {
            t,
            what: format!("state norm {after} after renormalization"),
        });
    }
    Ok(())
}

fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn run_with(prop: &Propagator, config: &JumpConfig, index: usize, keep_samples: bool) -> Result<JumpRecord> {
    let mut rng = trajectory_rng(config.seed, index);
    let dt = config.dt;
    let n_steps = config.n_steps();
    let d = config.initial.len();
    let mut psi = config.initial.clone();
    let mut jump_times = Vec::new();
    let mut sample_times = Vec::new();
    let mut samples = Vec::new();
    if keep_samples {
        sample_times.push(0.0);
        samples.push(psi.clone());
    }

    for step in 1..=n_steps {
        let t = step as f64 * dt;
        let p_jump = prop.jump_probability(&psi, dt);
        let u: f64 = rng.random();
        if u < p_jump {
            let mut next = DVector::zeros(d);
            for k in 1..d {
                next[k - 1] = prop.lm[k] * psi[k];
            }
            psi = next;
            jump_times.push(t);
        } else {
            for (a, f) in psi.iter_mut().zip(&prop.no_jump) {
                *a *= f;
            }
        }
        normalize(&mut psi, t)?;
        if keep_samples && config.is_sample_step(step) {
            sample_times.push(t);
            samples.push(psi.clone());
        }
    }

    Ok(JumpRecord {
        index,
        jump_times,
        sample_times,
        samples,
        final_state: psi,
    })
}

/// Run trajectory `index`; the random stream depends only on `(seed, index)`.
pub fn run_trajectory(
    params: &EnsembleParams,
    basis: &DickeBasis,
    config: &JumpConfig,
    index: usize,
) -> Result<JumpRecord> {
    basis.check_dim(config.initial.len())?;
    let prop = Propagator::new(params, basis, config.dt)?;
    run_with(&prop, config, index, true)
}

/// Per-sample sums of `p` and `p^2` over a block of trajectories.
struct Moments {
    sum: Vec<Vec<f64>>,
    sum_sq: Vec<Vec<f64>>,
}

impl Moments {
    fn zeros(n_samples: usize, d: usize) -> Self {
        Self {
            sum: vec![vec![0.0; d]; n_samples],
            sum_sq: vec![vec![0.0; d]; n_samples],
        }
    }

    fn add_record(&mut self, rec: &JumpRecord) {
        for (i, psi) in rec.samples.iter().enumerate() {
            for (k, a) in psi.iter().enumerate() {
                let p = a.norm_sqr();
                self.sum[i][k] += p;
                self.sum_sq[i][k] += p * p;
            }
        }
    }

    fn merge(&mut self, other: &Self) {
        for (i, row) in other.sum.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                self.sum[i][k] += v;
                self.sum_sq[i][k] += other.sum_sq[i][k];
            }
        }
    }
}

/// Average populations over `config.n_trajectories` trajectories.
///
/// Trajectories run in parallel in fixed blocks; block results are combined
/// in index order so the output does not depend on the thread count.
/// Standard errors are `stddev / sqrt(n)` and absent when `n = 1`.
pub fn ensemble_average(params: &EnsembleParams, basis: &DickeBasis, config: &JumpConfig) -> Result<Trajectory> {
    basis.check_dim(config.initial.len())?;
    let prop = Propagator::new(params, basis, config.dt)?;
    let times = config.sample_times();
    let d = basis.dim();
    let n = config.n_trajectories;

    let blocks: Vec<Result<Moments>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::zeros(times.len(), d);
            for index in c * CHUNK..((c + 1) * CHUNK).min(n) {
                m.add_record(&run_with(&prop, config, index, true)?);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::zeros(times.len(), d);
    for block in blocks {
        total.merge(&block?);
    }

    let nf = n as f64;
    let populations: Vec<DiagonalState> = total
        .sum
        .iter()
        .map(|row| DiagonalState::from_vec_unchecked(row.iter().map(|s| s / nf).collect()))
        .collect();
    let std_errors = (n > 1).then(|| {
        total
            .sum
            .iter()
            .zip(&total.sum_sq)
            .map(|(s, s2)| {
                s.iter()
                    .zip(s2)
                    .map(|(s, s2)| {
                        let mean = s / nf;
                        let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
                        (var / nf).sqrt()
                    })
                    .collect()
            })
            .collect()
    });
    let intensity = populations
        .iter()
        .map(|p| intensity_of(params, basis, p.as_slice()))
        .collect();
    Ok(Trajectory {
        times,
        populations,
        intensity,
        snapshots: None,
        std_errors,
    })
}
