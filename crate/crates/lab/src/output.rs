//! Trajectory CSV and JSON report files.
//!
//! CSV numbers are written as `{:.16e}` (17 significant digits, `.` as the
//! decimal point, no locale involved), so every value parses back exactly.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use xcf_core::geometry::{cross_curvature, sectional_curvatures};
use xcf_core::Trajectory;

use crate::error::{io_err, LabError, Result};

pub const CSV_HEADER: [&str; 10] = ["t", "A", "B", "C", "k1", "k2", "k3", "h1", "h2", "h3"];
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const REPORT_FILE: &str = "report.json";

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per accepted step: time, metric, sectional and cross curvatures.
pub fn trajectory_rows(traj: &Trajectory) -> impl Iterator<Item = [f64; 10]> + '_ {
    let g = traj.geometry();
    traj.samples().iter().map(move |s| {
        let k = sectional_curvatures(g, &s.metric);
        let h = cross_curvature(&s.metric, &k);
        let m = s.metric.to_array();
        [s.t, m[0], m[1], m[2], k.k1, k.k2, k.k3, h.h1, h.h2, h.h3]
    })
}

pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in trajectory_rows(traj) {
        w.write_record(row.iter().map(|x| number(*x)))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Read back a trajectory CSV written by [`write_trajectory_csv`].
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<[f64; 10]>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(LabError::Failed(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let mut row = [0.0; 10];
        for (slot, field) in row.iter_mut().zip(record.iter()) {
            *slot = field.parse().map_err(|_| LabError::Failed(format!("{}: bad number '{field}'", path.display())))?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|source| LabError::Json { path: path.to_path_buf(), source })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let stdout = io::stdout();
    let mut w = stdout.lock();
    serde_json::to_writer_pretty(&mut w, value).map_err(|source| LabError::Json { path: "<stdout>".into(), source })?;
    w.write_all(b"\n").map_err(io_err("<stdout>"))
}

/// Write `trajectory.csv` and `report.json` into `dir`, creating it if needed.
pub fn write_run<T: Serialize>(dir: &Path, traj: &Trajectory, report: &T) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let csv_path = dir.join(TRAJECTORY_FILE);
    let file = File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_trajectory_csv(BufWriter::new(file), traj)?;
    write_json(&dir.join(REPORT_FILE), report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use xcf_core::integrator::integrate;
    use xcf_core::{FlowSign, Geometry, IntegratorControls, MilnorMetric, Xcf};

    #[test]
    fn csv_round_trips_exactly() {
        let traj = integrate(
            &Xcf::new(Geometry::Su2, FlowSign::Positive),
            MilnorMetric::new(3.0, 2.0, 1.0).unwrap(),
            0.1,
            &IntegratorControls::default(),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trajectory_csv(File::create(&path).unwrap(), &traj).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("t,A,B,C,k1,k2,k3,h1,h2,h3\n") && text.ends_with('\n'));
        let rows = read_trajectory_csv(&path).unwrap();
        let want: Vec<[f64; 10]> = trajectory_rows(&traj).collect();
        assert_eq!(rows, want);
    }
}
