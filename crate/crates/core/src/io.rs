//! Artifacts on disk.
//!
//! Fields are CSV files with header `t_or_r,theta,value` (the first column is `r` on uniform
//! grids and `t = −ln r` on log grids) next to a JSON sidecar with the grid and metadata.
//! Floats are written in shortest round-trip form, so loading a written field gives back an
//! equal field. Every JSON report carries `schema_version`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::blowup::{BlowupReport, DyadicReport};
use crate::error::{Error, Result};
use crate::polar::{FieldMeta, GridSpec, PolarField, PolarGrid, RadialSpacing};
use crate::profiles::{HomogeneousProfile, Provenance};
use crate::solver::FreeBoundaryRow;
use crate::spruck::MonitorReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSidecar {
    pub schema_version: u32,
    pub grid: GridSpec,
    pub meta: FieldMeta,
    pub valid_rows: (usize, usize),
}

/// `solution.csv` → `solution.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(())
}

/// Serializes `value` as pretty JSON with `schema_version` added at the top level.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut json = serde_json::to_value(value)?;
    match json.as_object_mut() {
        Some(map) => {
            map.insert("schema_version".into(), SCHEMA_VERSION.into());
        }
        None => return Err(Error::Artifact("JSON reports must be objects".into())),
    }
    create_parent(path)?;
    let mut text = serde_json::to_string_pretty(&json)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Reads a report written by [`write_json`], checking and stripping `schema_version`.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    let mut json: serde_json::Value = serde_json::from_str(&text)?;
    let map = json
        .as_object_mut()
        .ok_or_else(|| Error::Artifact(format!("{}: not a JSON object", path.display())))?;
    check_version(path, map.remove("schema_version"))?;
    Ok(serde_json::from_value(json)?)
}

fn check_version(path: &Path, version: Option<serde_json::Value>) -> Result<()> {
    match version.and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => Ok(()),
        Some(v) => Err(Error::Artifact(format!(
            "{}: schema_version {v}, expected {SCHEMA_VERSION}",
            path.display()
        ))),
        None => Err(Error::Artifact(format!("{}: missing schema_version", path.display()))),
    }
}

/// Writes the CSV and its sidecar.
pub fn write_field(path: &Path, field: &PolarField) -> Result<()> {
    create_parent(path)?;
    let grid = field.grid();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_or_r", "theta", "value"])?;
    for i in 0..grid.n_r() {
        let x = grid.radial_coordinate(i);
        for (j, &th) in grid.theta_values().iter().enumerate() {
            w.serialize((x, th, field.at(i, j)))?;
        }
    }
    w.flush()?;
    let rows = field.valid_rows();
    let sidecar = FieldSidecar {
        schema_version: SCHEMA_VERSION,
        grid: grid.spec(),
        meta: field.meta.clone(),
        valid_rows: (rows.start, rows.end),
    };
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    fs::write(sidecar_path(path), text)?;
    Ok(())
}

/// Loads a field written by [`write_field`]. Coordinates must match the grid described by the
/// sidecar, node by node.
pub fn read_field(path: &Path) -> Result<PolarField> {
    let side_path = sidecar_path(path);
    let text = fs::read_to_string(&side_path)
        .map_err(|e| Error::Artifact(format!("{}: {e}", side_path.display())))?;
    let sidecar: FieldSidecar = serde_json::from_str(&text)
        .map_err(|e| Error::Artifact(format!("{}: {e}", side_path.display())))?;
    if sidecar.schema_version != SCHEMA_VERSION {
        return Err(Error::Artifact(format!(
            "{}: schema_version {}, expected {SCHEMA_VERSION}",
            side_path.display(),
            sidecar.schema_version
        )));
    }
    let spec = sidecar.grid;
    let grid = PolarGrid::new(spec.spacing, spec.r_min, spec.r_max, spec.n_r, spec.n_theta)?;
    let corrupt = |msg: String| Error::Artifact(format!("{}: {msg}", path.display()));

    let mut reader = csv::Reader::from_path(path).map_err(|e| corrupt(e.to_string()))?;
    let header = reader.headers().map_err(|e| corrupt(e.to_string()))?;
    if header != vec!["t_or_r", "theta", "value"] {
        return Err(corrupt(format!("unexpected header {header:?}")));
    }
    let nt = grid.n_theta();
    let mut values = Vec::with_capacity(grid.len());
    for (k, record) in reader.deserialize::<(f64, f64, f64)>().enumerate() {
        let (x, th, v) = record.map_err(|e| corrupt(e.to_string()))?;
        if k >= grid.len() {
            return Err(corrupt(format!("more than {} rows", grid.len())));
        }
        let (i, j) = (k / nt, k % nt);
        let (xe, the) = (grid.radial_coordinate(i), grid.theta_values()[j]);
        if (x - xe).abs() > 1e-12 * xe.abs().max(1.0) || (th - the).abs() > 1e-12 {
            return Err(corrupt(format!("row {} at ({x}, {th}) but the grid node is ({xe}, {the})", k + 2)));
        }
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(corrupt(format!("{} rows, grid has {} nodes", values.len(), grid.len())));
    }
    let (lo, hi) = sidecar.valid_rows;
    PolarField::with_valid_rows(grid, values, sidecar.meta, lo..hi)
}

/// Parameter block written next to a profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub p: f64,
    pub epsilon: f64,
    pub beta: f64,
    pub alpha: f64,
    pub a_eps: Option<f64>,
    pub omega_eps: Option<f64>,
    pub provenance: Provenance,
    pub energy_residual: f64,
    pub samples: usize,
}

impl ProfileSummary {
    pub fn new(profile: &HomogeneousProfile, energy_residual: f64) -> Self {
        Self {
            p: profile.p,
            epsilon: profile.epsilon,
            beta: profile.beta,
            alpha: profile.alpha,
            a_eps: profile.a_eps,
            omega_eps: profile.omega_eps,
            provenance: profile.provenance,
            energy_residual,
            samples: profile.theta.len(),
        }
    }
}

/// `theta,g,g_prime` on the positivity arc, plus the summary as JSON sidecar.
pub fn write_profile(path: &Path, profile: &HomogeneousProfile, energy_residual: f64) -> Result<()> {
    write_table(
        path,
        &["theta", "g", "g_prime"],
        profile
            .theta
            .iter()
            .zip(&profile.g)
            .zip(&profile.gprime)
            .map(|((&t, &g), &d)| vec![t, g, d]),
    )?;
    write_json(&sidecar_path(path), &ProfileSummary::new(profile, energy_residual))
}

/// Plain numeric table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Artifact(format!(
                "table row has {} columns, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_table`], returning the header and the rows.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.iter().map(str::to_owned).collect();
    let rows = reader
        .deserialize::<Vec<f64>>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

pub fn write_dyadic_csv(path: &Path, report: &DyadicReport) -> Result<()> {
    write_table(
        path,
        &["k", "S"],
        report.k_values.iter().zip(&report.s_values).map(|(&k, &s)| vec![k as f64, s]),
    )
}

pub fn write_deviation_csv(path: &Path, report: &BlowupReport) -> Result<()> {
    write_table(
        path,
        &["r", "deviation"],
        report.steps.iter().map(|s| vec![s.r, s.deviation]),
    )
}

pub fn write_annuli_csv(path: &Path, report: &MonitorReport) -> Result<()> {
    write_table(
        path,
        &["r_outer", "contribution", "running_total"],
        report.annuli.iter().map(|a| vec![a.r_outer, a.contribution, a.running_total]),
    )
}

/// One line per positivity arc: `r, entry, exit, arc`.
pub fn write_free_boundary_csv(path: &Path, rows: &[FreeBoundaryRow]) -> Result<()> {
    write_table(
        path,
        &["r", "entry", "exit", "arc"],
        rows.iter().flat_map(|row| {
            row.entries.iter().zip(&row.arcs).map(move |(&e, &a)| {
                let exit = (e + a).rem_euclid(std::f64::consts::TAU);
                vec![row.r, e, exit, a]
            })
        }),
    )
}

/// Whether a grid stores `t` (log) or `r` (uniform) in the first field column.
pub fn first_column_name(spacing: RadialSpacing) -> &'static str {
    match spacing {
        RadialSpacing::Uniform => "r",
        RadialSpacing::Log => "t",
    }
}
