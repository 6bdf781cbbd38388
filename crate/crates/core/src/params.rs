use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical inputs of the ensemble, all dimensionless.
///
/// `chi` sets the Wiener (Langevin) coupling, `eta_plus`/`eta_minus` weight the
/// Stark counting-process coupling `eta_plus * N_a / 2 + eta_minus * R3`, and
/// `kappa` scales the excitation-exchange operator `V = -kappa (r^2 - R3^2)`.
/// `intensity_scale` is the reporting prefactor applied to emitted intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n_atoms: u32,
    pub chi: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub kappa: f64,
    #[serde(default = "default_intensity_scale")]
    pub intensity_scale: f64,
}

fn default_intensity_scale() -> f64 {
    1.0
}

impl EnsembleParams {
    pub fn new(n_atoms: u32, chi: f64, eta_plus: f64, eta_minus: f64, kappa: f64) -> Result<Self> {
        let p = Self {
            n_atoms,
            chi,
            eta_plus,
            eta_minus,
            kappa,
            intensity_scale: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Langevin case: no Stark coupling and no exchange term.
    pub fn langevin(n_atoms: u32, chi: f64) -> Result<Self> {
        Self::new(n_atoms, chi, 0.0, 0.0, 0.0)
    }

    pub fn with_intensity_scale(mut self, scale: f64) -> Result<Self> {
        self.intensity_scale = scale;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eta(mut self, eta_plus: f64, eta_minus: f64) -> Result<Self> {
        self.eta_plus = eta_plus;
        self.eta_minus = eta_minus;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.kappa = kappa;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_atoms == 0 {
            return Err(Error::InvalidParameter("n_atoms must be at least 1".into()));
        }
        let finite = [
            ("chi", self.chi),
            ("eta_plus", self.eta_plus),
            ("eta_minus", self.eta_minus),
            ("kappa", self.kappa),
            ("intensity_scale", self.intensity_scale),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")));
            }
        }
        if self.chi < 0.0 {
            return Err(Error::InvalidParameter(format!("chi must be >= 0, got {}", self.chi)));
        }
        if self.intensity_scale <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "intensity_scale must be > 0, got {}",
                self.intensity_scale
            )));
        }
        Ok(())
    }

    /// Collective spin `r = N_a / 2`.
    pub fn r(&self) -> f64 {
        f64::from(self.n_atoms) / 2.0
    }

    pub fn chi2(&self) -> f64 {
        self.chi * self.chi
    }

    /// Langevin decay rate `2 r chi^2` of the singly excited state.
    pub fn langevin_rate(&self) -> f64 {
        2.0 * self.r() * self.chi2()
    }

    /// True when both Stark couplings vanish.
    pub fn is_langevin(&self) -> bool {
        self.eta_plus == 0.0 && self.eta_minus == 0.0
    }
}
