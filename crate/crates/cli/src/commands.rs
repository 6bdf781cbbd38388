use serde::Serialize;

use nlsr_core::analysis::{critical_values, pulse_summary, CriticalReport};
use nlsr_core::ito::{verify_coefficients, DEFAULT_ORDER};
use nlsr_core::jumps::ensemble_average;
use nlsr_core::{DiagonalState, DickeBasis, EnsembleParams, JumpConfig, MasterGenerator, Trajectory};

use crate::config::RunConfig;
use crate::output::{emit, emit_json, sibling, with_nan_errors, write_csv, RunSummary};
use crate::CliError;

fn basis(params: &EnsembleParams) -> Result<DickeBasis, CliError> {
    Ok(DickeBasis::new(params.n_atoms)?)
}

fn rate_equations(cfg: &RunConfig, params: &EnsembleParams, t_max: Option<f64>) -> Result<Trajectory, CliError> {
    let b = basis(params)?;
    let k = cfg.initial()?.index(&b)?;
    let t_max = match t_max {
        Some(t) => t,
        None => cfg.t_max(params, &b, k)?,
    };
    let gen = MasterGenerator::new(params, &b)?;
    let p0 = DiagonalState::basis_state(&b, k)?;
    Ok(gen.integrate_diag(&p0, &cfg.integrator(t_max)?)?)
}

fn write_trajectory(path: Option<&std::path::Path>, traj: &Trajectory) -> Result<(), CliError> {
    emit(path, |w| write_csv(w, traj))
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params()?;
    let traj = rate_equations(cfg, &params, None)?;
    write_trajectory(cfg.out.as_deref(), &traj)?;
    if let Some(path) = &cfg.summary {
        let pulse = pulse_summary(&traj).with_reference(&params);
        emit_json(Some(path), &RunSummary::new(&params, &pulse))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CriticalOutput {
    params: Option<EnsembleParams>,
    #[serde(flatten)]
    report: CriticalReport,
}

pub fn critical(cfg: &RunConfig) -> Result<(), CliError> {
    // the thresholds do not depend on N_a; only m_cr needs it
    let has_na = cfg.na.is_some();
    let probe = RunConfig {
        na: Some(cfg.na.unwrap_or(1)),
        ..cfg.clone()
    };
    let params = probe.params()?;
    let mut report = critical_values(&params);
    if !has_na {
        report.m_cr = None;
        report.m_cr_admissible = None;
    }
    let out = CriticalOutput {
        params: has_na.then_some(params),
        report,
    };
    emit_json(cfg.summary.as_deref().or(cfg.out.as_deref()), &out)
}

#[derive(Serialize)]
struct ItoOutput {
    order: usize,
    tol: f64,
    a0: f64,
    a_plus: f64,
    a_minus: f64,
    a_lambda: f64,
    unitarity: f64,
    max: f64,
    pass: bool,
}

pub fn ito_verify(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params()?;
    let b = basis(&params)?;
    let order = cfg.order.unwrap_or(DEFAULT_ORDER);
    let tol = cfg.tol.unwrap_or(1e-12);
    let dev = verify_coefficients(&params, &b, order)?;
    let out = ItoOutput {
        order,
        tol,
        a0: dev.a0,
        a_plus: dev.a_plus,
        a_minus: dev.a_minus,
        a_lambda: dev.a_lambda,
        unitarity: dev.unitarity,
        max: dev.max(),
        pass: dev.max() <= tol,
    };
    emit_json(cfg.summary.as_deref().or(cfg.out.as_deref()), &out)?;
    if out.pass {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "largest coefficient deviation {:e} exceeds {tol:e}",
            out.max
        )))
    }
}

pub fn jumps(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params()?;
    let b = basis(&params)?;
    let k = cfg.initial()?.index(&b)?;
    let t_max = cfg.t_max(&params, &b, k)?;
    let bins = cfg.samples.unwrap_or(200).max(1);
    let dt = match cfg.dt {
        Some(dt) => dt,
        None => JumpConfig::auto_dt(&params, &b, t_max)?,
    };
    // round the window to a whole number of sample intervals
    let every = (t_max / (bins as f64 * dt)).ceil().max(1.0) as usize;
    let window = (bins * every) as f64 * dt;
    let jc = JumpConfig::from_basis_state(
        &params,
        &b,
        k,
        cfg.trajectories.unwrap_or(1000),
        cfg.seed.unwrap_or(0),
        dt,
        window,
    )?
    .with_sample_every(every);
    let traj = with_nan_errors(ensemble_average(&params, &b, &jc)?);
    write_trajectory(cfg.out.as_deref(), &traj)?;
    if let Some(path) = &cfg.summary {
        let pulse = pulse_summary(&traj).with_reference(&params);
        emit_json(Some(path), &RunSummary::new(&params, &pulse))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CompareOutput {
    stark: RunSummary,
    control: RunSummary,
}

pub fn compare(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params()?;
    let control = params.with_eta(0.0, 0.0)?;
    let b = basis(&params)?;
    let k = cfg.initial()?.index(&b)?;
    // one window long enough for the slower of the two pulses
    let t_max = match cfg.t_max {
        Some(_) => cfg.t_max(&params, &b, k)?,
        None => cfg.t_max(&params, &b, k)?.max(cfg.t_max(&control, &b, k)?),
    };
    let stark_traj = rate_equations(cfg, &params, Some(t_max))?;
    let control_traj = rate_equations(cfg, &control, Some(t_max))?;

    match &cfg.out {
        Some(path) => {
            write_trajectory(Some(path), &stark_traj)?;
            write_trajectory(Some(&sibling(path, "control")), &control_traj)?;
        }
        None if cfg.summary.is_none() => {
            return Err(CliError::Usage("compare needs --out or --summary".into()));
        }
        None => {}
    }
    let out = CompareOutput {
        stark: RunSummary::new(&params, &pulse_summary(&stark_traj).with_reference(&params)),
        control: RunSummary::new(&control, &pulse_summary(&control_traj).with_reference(&control)),
    };
    emit_json(cfg.summary.as_deref(), &out)
}
