//! Run configuration: command-line flags merged over an optional JSON file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use nlsr_core::master::MasterGenerator;
use nlsr_core::{DickeBasis, EnsembleParams, IntegratorConfig, Method};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeUnit {
    /// Dimensionless time chi^2-scaled tau
    Tau,
    /// Multiples of the Langevin lifetime 1/(2 r chi^2)
    Lifetimes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    Rk4,
    Rk45,
}

/// Initial Dicke state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Initial {
    FullyExcited,
    SinglyExcited,
    DickeM(f64),
}

impl FromStr for Initial {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fully-excited" => Ok(Self::FullyExcited),
            "singly-excited" => Ok(Self::SinglyExcited),
            _ => match s.strip_prefix("dicke-m:") {
                Some(v) => v
                    .parse::<f64>()
                    .ok()
                    .filter(|m| m.is_finite())
                    .map(Self::DickeM)
                    .ok_or_else(|| format!("bad m value in initial state '{s}'")),
                None => Err(format!(
                    "unknown initial state '{s}' (expected fully-excited, singly-excited or dicke-m:<value>)"
                )),
            },
        }
    }
}

impl Initial {
    pub fn index(self, basis: &DickeBasis) -> Result<usize, CliError> {
        match self {
            Self::FullyExcited => Ok(basis.fully_excited_index()),
            Self::SinglyExcited => Ok(basis.singly_excited_index()),
            Self::DickeM(m) => basis.index_of(m).map_err(|e| CliError::Usage(e.to_string())),
        }
    }
}

/// Every flag is optional so that values from `--config` can fill the gaps.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunConfig {
    /// Number of atoms N_a (r = N_a / 2)
    #[arg(long)]
    pub na: Option<u32>,
    /// Vacuum coupling chi
    #[arg(long)]
    pub chi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta_plus: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub eta_minus: Option<f64>,
    /// Exchange coupling in V = -kappa (R^2 - R3^2)
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// fully-excited | singly-excited | dicke-m:<value>
    #[arg(long)]
    pub initial: Option<String>,
    /// End of the time window; defaults to three mean cascade times
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, value_enum)]
    pub t_unit: Option<TimeUnit>,
    #[arg(long, value_enum)]
    pub method: Option<MethodName>,
    /// Fixed step for rk4 and for quantum jumps
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    /// Number of output intervals
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ito expansion order
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Trajectory CSV (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// JSON file with any of the above, keyed by flag name
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! merge_fields {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $dst.$f.is_none() { $dst.$f = $src.$f; } )*
    };
}

impl RunConfig {
    /// Fill unset fields from the file named by `--config`.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = Self::from_file(&path)?;
        merge_fields!(self, file; na, chi, eta_plus, eta_minus, kappa, initial, t_max, t_unit, method,
            dt, rtol, atol, samples, trajectories, seed, order, tol, out, summary);
        Ok(self)
    }

    fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    pub fn n_atoms(&self) -> Result<u32, CliError> {
        self.na.ok_or_else(|| CliError::Usage("missing required --na".into()))
    }

    pub fn params(&self) -> Result<EnsembleParams, CliError> {
        EnsembleParams::new(
            self.n_atoms()?,
            self.chi.unwrap_or(1.0),
            self.eta_plus.unwrap_or(0.0),
            self.eta_minus.unwrap_or(0.0),
            self.kappa.unwrap_or(0.0),
        )
        .map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn initial(&self) -> Result<Initial, CliError> {
        self.initial
            .as_deref()
            .unwrap_or("fully-excited")
            .parse()
            .map_err(CliError::Usage)
    }

    pub fn samples(&self) -> Result<usize, CliError> {
        match self.samples.unwrap_or(1000) {
            0 => Err(CliError::Usage("--samples must be positive".into())),
            n => Ok(n),
        }
    }

    /// Window length in tau. Without `--t-max`: three mean cascade times from
    /// `initial`, or ten Langevin lifetimes when the cascade is suppressed.
    pub fn t_max(&self, params: &EnsembleParams, basis: &DickeBasis, initial: usize) -> Result<f64, CliError> {
        let lifetime = 1.0 / params.langevin_rate();
        let t = match self.t_max {
            Some(t) => match self.t_unit.unwrap_or(TimeUnit::Tau) {
                TimeUnit::Tau => t,
                TimeUnit::Lifetimes => t * lifetime,
            },
            None => {
                let gen = MasterGenerator::new(params, basis).map_err(|e| CliError::Usage(e.to_string()))?;
                let fallback = 10.0 * lifetime;
                match gen.cascade_time(initial) {
                    Some(c) if c > 0.0 && c < 1e6 * fallback => 3.0 * c,
                    _ => fallback,
                }
            }
        };
        if t > 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(CliError::Usage(format!(
                "time window must be positive and finite (got {t}; chi = 0 needs an explicit --t-max in tau)"
            )))
        }
    }

    pub fn integrator(&self, t_max: f64) -> Result<IntegratorConfig, CliError> {
        let samples = self.samples()?;
        let cfg = match self.method.unwrap_or(MethodName::Rk45) {
            MethodName::Rk45 => {
                let base = IntegratorConfig::adaptive(t_max, samples);
                let (rtol, atol) = match base.method {
                    Method::Rk45 { rel_tol, abs_tol } => (rel_tol, abs_tol),
                    Method::Rk4 { .. } => unreachable!(),
                };
                base.with_tolerances(self.rtol.unwrap_or(rtol), self.atol.unwrap_or(atol))
            }
            MethodName::Rk4 => {
                let dt = self.dt.unwrap_or(t_max / (samples as f64 * 10.0));
                IntegratorConfig::fixed(t_max, dt, samples)
            }
        };
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }
}
