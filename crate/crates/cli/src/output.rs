//! CSV trajectories and JSON summaries.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use nlsr_core::analysis::{critical_values, PulseSummary};
use nlsr_core::{EnsembleParams, Trajectory};

use crate::CliError;

/// Scientific notation with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// `tau,p0,...,p{2r},intensity[,se0,...,se{2r}]`
pub fn write_csv<W: Write + ?Sized>(w: &mut W, traj: &Trajectory) -> io::Result<()> {
    let d = traj.populations.first().map_or(0, |p| p.len());
    let mut header = vec!["tau".to_string()];
    header.extend((0..d).map(|k| format!("p{k}")));
    header.push("intensity".into());
    if traj.std_errors.is_some() {
        header.extend((0..d).map(|k| format!("se{k}")));
    }
    writeln!(w, "{}", header.join(","))?;

    for (i, t) in traj.times.iter().enumerate() {
        let mut row = Vec::with_capacity(2 * d + 2);
        row.push(num(*t));
        row.extend(traj.populations[i].iter().map(num));
        row.push(num(traj.intensity[i]));
        if let Some(se) = &traj.std_errors {
            row.extend(se[i].iter().copied().map(num));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Jump averages of a single trajectory have no standard error; the columns
/// are kept and filled with NaN.
pub fn with_nan_errors(mut traj: Trajectory) -> Trajectory {
    if traj.std_errors.is_none() {
        let d = traj.populations.first().map_or(0, |p| p.len());
        traj.std_errors = Some(vec![vec![f64::NAN; d]; traj.len()]);
    }
    traj
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_err(p, e))?;
            let mut w = BufWriter::new(file);
            body(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

pub fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    emit(path, |w| writeln!(w, "{text}"))
}

/// `<stem>_<suffix>.<ext>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let name = match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_{suffix}.{ext}"),
        None => format!("{stem}_{suffix}"),
    };
    path.with_file_name(name)
}

/// Summary record written next to each simulated trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub params: EnsembleParams,
    pub r_cr_singly: Option<f64>,
    pub r_cr_fully: Option<f64>,
    pub m_cr: Option<f64>,
    pub peak_time: Option<f64>,
    pub peak_intensity: Option<f64>,
    pub fwhm: Option<f64>,
    #[serde(rename = "t_D_ref")]
    pub t_d_ref: Option<f64>,
    pub peak_ref: Option<f64>,
    pub interior_peak: bool,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl RunSummary {
    pub fn new(params: &EnsembleParams, pulse: &PulseSummary) -> Self {
        let crit = critical_values(params);
        Self {
            params: *params,
            r_cr_singly: crit.r_cr_singly,
            r_cr_fully: crit.r_cr_fully,
            m_cr: crit.m_cr,
            peak_time: finite(pulse.peak_time),
            peak_intensity: finite(pulse.peak_intensity),
            fwhm: pulse.fwhm,
            t_d_ref: pulse.t_d_ref,
            peak_ref: pulse.peak_ref,
            interior_peak: pulse.interior_peak,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nlsr_core::DiagonalState;

    fn tiny() -> Trajectory {
        Trajectory {
            times: vec![0.0, 0.5],
            populations: vec![
                DiagonalState::new(vec![0.0, 1.0]).unwrap(),
                DiagonalState::new(vec![0.25, 0.75]).unwrap(),
            ],
            intensity: vec![0.5, 0.375],
            snapshots: None,
            std_errors: None,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &tiny()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.split('\n').collect();
        assert_eq!(lines[0], "tau,p0,p1,intensity");
        assert_eq!(
            lines[2],
            "5.0000000000000000e-1,2.5000000000000000e-1,7.5000000000000000e-1,3.7500000000000000e-1"
        );
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[3], "");
    }

    #[test]
    fn csv_error_columns() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &with_nan_errors(tiny())).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("tau,p0,p1,intensity,se0,se1\n"));
        assert!(text.lines().nth(1).unwrap().ends_with(",NaN,NaN"));
    }

    #[test]
    fn values_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e-300, 6.02e23, -0.0] {
            assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("/a/run.csv"), "control"), PathBuf::from("/a/run_control.csv"));
        assert_eq!(sibling(Path::new("run"), "control"), PathBuf::from("run_control"));
    }

    #[test]
    fn summary_keys() {
        let p = EnsembleParams::new(4, 0.5, 0.2, 0.0, 0.0).unwrap();
        let pulse = PulseSummary {
            peak_time: 1.0,
            peak_intensity: 2.0,
            fwhm: None,
            interior_peak: true,
            t_d_ref: None,
            peak_ref: Some(3.0),
        };
        let json = serde_json::to_value(RunSummary::new(&p, &pulse)).unwrap();
        for key in [
            "params",
            "r_cr_singly",
            "r_cr_fully",
            "m_cr",
            "peak_time",
            "peak_intensity",
            "fwhm",
            "t_D_ref",
            "peak_ref",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert!(json["fwhm"].is_null());
        assert!(json["m_cr"].is_null());
    }
}
