//! Comma-separated data files with a header row. Reals are written with 17
//! significant digits so that every value round-trips to the same `f64`.

use std::fs;
use std::path::{Path, PathBuf};

use csv::Writer;

use crate::analytic::HeatKernel;
use crate::error::{Error, Result};
use crate::metrics::{ErrorReport, IsoErrorPoint};
use crate::sim::RunResult;

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    /// One row per (step, particle): `n,t,k,y`.
    Trajectories,
    /// One row per cell: `j,x,value,exact`.
    DensityVsExact,
}

impl FigureKind {
    pub fn file_name(self) -> &'static str {
        match self {
            FigureKind::Trajectories => "trajectories.csv",
            FigureKind::DensityVsExact => "density.csv",
        }
    }
}

pub fn write_trajectories(path: &Path, result: &RunResult) -> Result<()> {
    if result.trajectories.is_empty() {
        return Err(Error::MissingSnapshot(
            "trajectories (run with snapshot = all)".into(),
        ));
    }
    let mut w = Writer::from_path(path)?;
    w.write_record(["n", "t", "k", "y"])?;
    for snap in &result.trajectories {
        let t = fmt_real(result.grid.time(snap.step));
        let n = snap.step.to_string();
        for (k, &y) in snap.positions.iter().enumerate() {
            w.write_record([n.as_str(), t.as_str(), &k.to_string(), &fmt_real(y)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Final density (field, or histogram in particle-only modes) next to the
/// exact solution at `t_final`. Cells are indexed from 0.
pub fn write_density(path: &Path, result: &RunResult) -> Result<()> {
    let field = result
        .final_density()
        .ok_or_else(|| Error::MissingSnapshot("final density".into()))?;
    let kernel = HeatKernel::new(result.params.diffusion)?;
    let t = result.grid.t_final();
    let mut w = Writer::from_path(path)?;
    w.write_record(["j", "x", "value", "exact"])?;
    for (j, (&v, x)) in field
        .values()
        .iter()
        .zip(result.grid.cell_centers())
        .enumerate()
    {
        w.write_record([
            j.to_string(),
            fmt_real(x),
            fmt_real(v),
            fmt_real(kernel.density(t, x)?),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-level mass and out-of-domain count.
pub fn write_diagnostics(path: &Path, result: &RunResult) -> Result<()> {
    let d = &result.diagnostics;
    let mut w = Writer::from_path(path)?;
    w.write_record(["n", "t", "total_mass", "out_of_domain"])?;
    for (n, &m) in d.total_mass.iter().enumerate() {
        let ood = d
            .out_of_domain
            .get(n)
            .map(|c| c.to_string())
            .unwrap_or_default();
        w.write_record([
            n.to_string(),
            fmt_real(result.grid.time(n)),
            fmt_real(m),
            ood,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_iso_error(path: &Path, points: &[IsoErrorPoint]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record([
        "theta",
        "n_particles_required",
        "achieved_error",
        "standard_error",
    ])?;
    for p in points {
        w.write_record([
            fmt_real(p.theta),
            p.n_particles_required.to_string(),
            fmt_real(p.achieved_error),
            fmt_real(p.standard_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per (theta, particle count) of a sweep.
pub fn write_sweep_summary(path: &Path, rows: &[(f64, usize, ErrorReport)]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record([
        "theta",
        "n_particles",
        "mean_error",
        "standard_error",
        "n_seeds",
    ])?;
    for (theta, n, r) in rows {
        w.write_record([
            fmt_real(*theta),
            n.to_string(),
            fmt_real(r.mean),
            fmt_real(r.standard_error),
            r.n_seeds.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the file for `kind` into `dir` and returns its path.
pub fn emit_figure_data(result: &RunResult, kind: FigureKind, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(kind.file_name());
    match kind {
        FigureKind::Trajectories => write_trajectories(&path, result)?,
        FigureKind::DensityVsExact => write_density(&path, result)?,
    }
    Ok(path)
}
