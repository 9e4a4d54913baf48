//! CSV traces and two-column plot files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use bregman_core::accel::RunRecord;
use bregman_core::flows::Trajectory;

use crate::error::LabError;

/// Rows kept in trajectory CSVs; longer trajectories are strided.
pub const MAX_TRACE_ROWS: usize = 4000;

fn stride(n: usize) -> usize {
    n.div_ceil(MAX_TRACE_ROWS).max(1)
}

fn kept(n: usize) -> impl Iterator<Item = usize> {
    let s = stride(n);
    (0..n).filter(move |i| i % s == 0 || *i + 1 == n)
}

/// Columns `t, X_1..X_d, [W|P|V]_1..d, f_gap, energy`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), LabError> {
    let mut w = csv::Writer::from_path(path)?;
    let d = traj.dim;
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|i| format!("X_{i}")));
    if let Some(name) = traj.layout.second() {
        header.extend((1..=d).map(|i| format!("{name}_{i}")));
    }
    header.push("f_gap".into());
    header.push("energy".into());
    w.write_record(&header)?;
    for i in kept(traj.len()) {
        let mut row = vec![traj.times[i].to_string()];
        row.extend(traj.states[i].iter().map(f64::to_string));
        row.push(traj.f_gap[i].to_string());
        row.push(traj.energy[i].to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `k, f_gap_x, f_gap_y, bound, psi_zk, Ckp_fyk, progress,
/// lemma1_lower, move_norm`.
pub fn write_run_csv(path: &Path, rec: &RunRecord) -> Result<(), LabError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "k",
        "f_gap_x",
        "f_gap_y",
        "bound",
        "psi_zk",
        "Ckp_fyk",
        "progress",
        "lemma1_lower",
        "move_norm",
    ])?;
    for i in 0..rec.len() {
        let cert = rec.certificates[i].as_ref();
        let c = |f: fn(&bregman_core::taylorstep::StepCertificate) -> f64| cert.map_or(f64::NAN, f);
        w.write_record([
            rec.k[i].to_string(),
            rec.f_gap_x[i].to_string(),
            rec.f_gap_y[i].to_string(),
            rec.bound[i].to_string(),
            rec.psi[i].to_string(),
            rec.ckp_fy[i].to_string(),
            c(|c| c.progress).to_string(),
            c(|c| c.lemma1_lower).to_string(),
            c(|c| c.move_norm).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Whitespace-separated `log x  log y` pairs; nonpositive values are skipped.
pub fn write_loglog(
    path: &Path,
    xlabel: &str,
    ylabel: &str,
    xs: &[f64],
    ys: &[f64],
) -> Result<(), LabError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# log {xlabel}\tlog {ylabel}")?;
    let n = xs.len().min(ys.len());
    for i in kept(n) {
        let (x, y) = (xs[i], ys[i]);
        if x > 0.0 && y > 0.0 && y.is_finite() {
            writeln!(w, "{}\t{}", x.ln(), y.ln())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the run CSV and its `log k` vs `log gap` plot file.
pub fn emit_run(dir: &Path, stem: &str, rec: &RunRecord) -> Result<(), LabError> {
    std::fs::create_dir_all(dir)?;
    write_run_csv(&dir.join(format!("{stem}.csv")), rec)?;
    let ks: Vec<f64> = rec.k.iter().map(|&k| k as f64).collect();
    let gaps = if rec.f_gap_y.iter().any(|g| g.is_finite()) {
        &rec.f_gap_y
    } else {
        &rec.f_gap_x
    };
    write_loglog(
        &dir.join(format!("{stem}_loglog.dat")),
        "k",
        "gap",
        &ks,
        gaps,
    )
}

/// Writes the trajectory CSV and its `log t` vs `log gap` plot file.
pub fn emit_trajectory(dir: &Path, stem: &str, traj: &Trajectory) -> Result<(), LabError> {
    std::fs::create_dir_all(dir)?;
    write_trajectory_csv(&dir.join(format!("{stem}.csv")), traj)?;
    write_loglog(
        &dir.join(format!("{stem}_loglog.dat")),
        "t",
        "gap",
        &traj.times,
        &traj.f_gap,
    )
}
