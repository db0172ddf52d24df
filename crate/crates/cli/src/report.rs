//! CSV tables and JSON summaries.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;

use twocav::dfs::certify;
use twocav::fock::{build_basis, DensityMatrix};

use crate::analysis::{DfsReport, SpectrumReport};
use crate::config::{InitialState, ScenarioConfig};
use crate::error::CliError;
use crate::simulate::{initial_density, Trajectory};

/// Elements smaller than this over the whole run get no column.
const ELEMENT_FLOOR: f64 = 1e-14;

pub const TIME_HEADER: &str = "sigma_t";

/// A named series aligned with the `ςt` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// 17 significant digits; `-0` prints as `0`.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

fn label_name(name: &str, label: &Option<String>) -> String {
    match label {
        Some(l) => format!("{name}[{l}]"),
        None => name.to_string(),
    }
}

fn element_name(ket: (usize, usize), bra: (usize, usize)) -> String {
    format!("rho_{}{}_{}{}", ket.0, ket.1, bra.0, bra.1)
}

/// Density-matrix columns. Single-photon runs use `rho_01_01`, `rho_10_10`,
/// `rho_off` and `rho_00_00`; other runs list every diagonal element and
/// each upper off-diagonal element that is ever nonzero, with an `_im`
/// column when the imaginary part is.
pub fn density_columns(t: &Trajectory) -> Vec<Column> {
    let basis = t.states[0].basis();
    let series = |i: usize, j: usize, imag: bool| -> Vec<f64> {
        t.states
            .iter()
            .map(|s| {
                let z = s.matrix()[(i, j)];
                if imag {
                    z.im
                } else {
                    z.re
                }
            })
            .collect()
    };
    let idx = |n1, n2| basis.index(n1, n2).expect("single-photon labels fit");
    let mut out = Vec::new();
    if let InitialState::SinglePhoton { .. } = t.member.initial {
        for (name, i, j) in [
            ("rho_01_01", idx(0, 1), idx(0, 1)),
            ("rho_10_10", idx(1, 0), idx(1, 0)),
            ("rho_off", idx(0, 1), idx(1, 0)),
            ("rho_00_00", idx(0, 0), idx(0, 0)),
        ] {
            out.push(Column {
                name: label_name(name, &t.member.label),
                values: series(i, j, false),
            });
        }
        return out;
    }
    let d = basis.dim();
    for i in 0..d {
        let l = basis.labels(i);
        out.push(Column {
            name: label_name(&element_name(l, l), &t.member.label),
            values: series(i, i, false),
        });
    }
    for i in 0..d {
        for j in i + 1..d {
            let name = element_name(basis.labels(i), basis.labels(j));
            let re = series(i, j, false);
            let im = series(i, j, true);
            let peak = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if peak(&re) > ELEMENT_FLOOR || peak(&im) > ELEMENT_FLOOR {
                out.push(Column {
                    name: label_name(&name, &t.member.label),
                    values: re,
                });
            }
            if peak(&im) > ELEMENT_FLOOR {
                out.push(Column {
                    name: label_name(&format!("{name}_im"), &t.member.label),
                    values: im,
                });
            }
        }
    }
    out
}

pub fn concurrence_columns(t: &Trajectory) -> Vec<Column> {
    t.concurrence
        .iter()
        .map(|v| Column {
            name: label_name("C", &t.member.label),
            values: v.clone(),
        })
        .collect()
}

pub fn estar_columns(t: &Trajectory) -> Vec<Column> {
    t.estar
        .iter()
        .map(|v| Column {
            name: label_name("Estar", &t.member.label),
            values: v.clone(),
        })
        .collect()
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))
}

fn csv_error(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(path.display(), e)
}

/// Writes `sigma_t` followed by `columns`.
pub fn write_series(path: &Path, sigma_t: &[f64], columns: &[Column]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    let mut header = vec![TIME_HEADER.to_string()];
    header.extend(columns.iter().map(|c| c.name.clone()));
    w.write_record(&header).map_err(csv_error(path))?;
    for (k, t) in sigma_t.iter().enumerate() {
        let mut row = vec![fmt17(*t)];
        row.extend(columns.iter().map(|c| fmt17(c.values[k])));
        w.write_record(&row).map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))
}

/// Per-time-point comparison table in long form.
pub fn write_comparison(path: &Path, trajectories: &[Trajectory]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    w.write_record(["member", TIME_HEADER, "analytic_vs_expm", "expm_vs_rk4"])
        .map_err(csv_error(path))?;
    for t in trajectories {
        let label = t.member.label.clone().unwrap_or_else(|| t.member.initial.kind().to_string());
        for k in 0..t.sigma_t.len() {
            w.write_record([label.clone(), fmt17(t.sigma_t[k]), fmt17(t.expm_gap[k]), fmt17(t.rk4_gap[k])])
                .map_err(csv_error(path))?;
        }
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))
}

pub fn write_spectrum(path: &Path, report: &SpectrumReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    w.write_record(["center_re", "center_im", "multiplicity", "predicted", "predicted_multiplicity"])
        .map_err(csv_error(path))?;
    for r in &report.rows {
        w.write_record([
            fmt17(r.center_re),
            fmt17(r.center_im),
            r.multiplicity.to_string(),
            fmt17(r.predicted),
            r.predicted_multiplicity.to_string(),
        ])
        .map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))
}

pub fn write_dfs(path: &Path, report: &DfsReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error(path))?;
    w.write_record(["n", "m", "generator_residual", "evolution_residual", "passed"])
        .map_err(csv_error(path))?;
    for r in &report.certificates {
        w.write_record([
            r.n.to_string(),
            r.m.to_string(),
            fmt17(r.generator_residual),
            fmt17(r.evolution_residual),
            r.passed.to_string(),
        ])
        .map_err(csv_error(path))?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path.display(), e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path.display(), e))
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSummary {
    pub generator_residual: f64,
    pub evolution_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberSummary {
    pub label: Option<String>,
    pub kind: &'static str,
    pub final_sigma_t: f64,
    /// Density columns at the last grid point.
    pub final_state: BTreeMap<String, f64>,
    pub final_concurrence: Option<f64>,
    pub final_estar: Option<f64>,
    pub max_analytic_numeric_gap: f64,
    pub max_expm_rk4_gap: f64,
    pub initial_state_dfs: CertificateSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub version: i64,
    pub preset: Option<String>,
    pub decay_rate: f64,
    pub numeric_decay_rate: f64,
    pub truncation: usize,
    pub sigma_t_max: f64,
    pub steps: usize,
    pub tolerance: f64,
    pub outputs: Vec<&'static str>,
    pub members: Vec<MemberSummary>,
    pub spectrum: Option<SpectrumReport>,
    pub dfs: Option<DfsReport>,
}

pub fn summarize(
    cfg: &ScenarioConfig,
    tolerance: f64,
    trajectories: &[Trajectory],
    spectrum: Option<SpectrumReport>,
    dfs: Option<DfsReport>,
) -> Result<RunSummary, CliError> {
    let basis = build_basis(cfg.truncation);
    let members = trajectories
        .iter()
        .map(|t| {
            let last = t.sigma_t.len() - 1;
            let rho0: DensityMatrix = initial_density(&t.member.initial, basis)?;
            let cert = certify(rho0.matrix(), cfg.decay_rate, basis)?;
            Ok(MemberSummary {
                label: t.member.label.clone(),
                kind: t.member.initial.kind(),
                final_sigma_t: t.sigma_t[last],
                final_state: density_columns(t)
                    .into_iter()
                    .map(|c| (c.name, c.values[last]))
                    .collect(),
                final_concurrence: t.concurrence.as_ref().map(|v| v[last]),
                final_estar: t.estar.as_ref().map(|v| v[last]),
                max_analytic_numeric_gap: t.max_expm_gap(),
                max_expm_rk4_gap: t.max_rk4_gap(),
                initial_state_dfs: CertificateSummary {
                    generator_residual: cert.generator_residual,
                    evolution_residual: cert.evolution_residual,
                    passed: cert.passed,
                },
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(RunSummary {
        version: cfg.version,
        preset: cfg.preset.clone(),
        decay_rate: cfg.decay_rate,
        numeric_decay_rate: cfg.numeric_decay_rate,
        truncation: cfg.truncation,
        sigma_t_max: cfg.time_grid.t_max,
        steps: cfg.time_grid.steps,
        tolerance,
        outputs: cfg.outputs.iter().map(|q| q.name()).collect(),
        members,
        spectrum,
        dfs,
    })
}
