// SPDX-License-Identifier: Apache-2.0

//! CSV writers and the checksummed run manifest.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), so parsing a
//! file recovers every value exactly.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::analysis::{DivertEvent, PftsReport};
use crate::error::{Error, Result};
use crate::sim_harness::{Campaign, DispersionStats, PairedT, Termination, TrajectoryLog};
use crate::terrain_barriers::{horizontal_barrier, BarrierSet, LateralAxis};
use crate::Vec3;

/// Formats a float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn vec_cols(prefix: &str) -> [String; 3] {
    ["x", "y", "z"].map(|a| format!("{prefix}_{a}"))
}

fn push_vec(rec: &mut Vec<String>, v: &Vec3) {
    rec.extend(v.iter().map(|x| fmt17(*x)));
}

fn csv_err(e: csv::Error) -> Error {
    Error::io("<csv>", e)
}

/// Column names of the trajectory CSV.
pub fn trajectory_header() -> Vec<String> {
    let mut h: Vec<String> = ["t", "rx", "ry", "rz", "vx", "vy", "vz", "m", "t_go"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for p in ["a_cmd", "a_applied", "a_p", "zem", "zev", "ogl_term", "p", "divert", "s1", "s2", "phi"] {
        h.extend(vec_cols(p));
    }
    h.push("rho_z".into());
    h.extend(vec_cols("d"));
    h
}

/// Writes the per-step telemetry of `log`.
pub fn trajectory_csv<W: Write>(log: &TrajectoryLog, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(trajectory_header()).map_err(csv_err)?;
    for s in &log.samples {
        let mut rec: Vec<String> = [s.t, s.r.x, s.r.y, s.r.z, s.v.x, s.v.y, s.v.z, s.m, s.t_go]
            .iter()
            .map(|x| fmt17(*x))
            .collect();
        for v in [
            &s.a_cmd,
            &s.a_applied,
            &s.a_p,
            &s.zem,
            &s.zev,
            &s.ogl_term,
            &s.p,
            &s.divert_term,
            &s.s1,
            &s.s2,
            &s.phi,
        ] {
            push_vec(&mut rec, v);
        }
        rec.push(fmt17(s.rho_z));
        push_vec(&mut rec, &s.d);
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))
}

/// Writes the terminal summary of one run.
pub fn summary_csv<W: Write>(log: &TrajectoryLog, w: W) -> Result<()> {
    let s = &log.summary;
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "law",
        "dm",
        "dx",
        "dy",
        "dvz",
        "flight_time",
        "termination",
        "terrain_penetrations",
        "fallback_steps",
    ])
    .map_err(csv_err)?;
    wr.write_record([
        s.law.name().to_string(),
        fmt17(s.dm),
        fmt17(s.dx),
        fmt17(s.dy),
        fmt17(s.dvz),
        fmt17(s.flight_time),
        termination_name(s.termination).into(),
        s.terrain_penetrations.to_string(),
        s.fallback_steps.to_string(),
    ])
    .map_err(csv_err)?;
    wr.flush().map_err(|e| Error::io("<csv>", e))
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::Altitude => "altitude",
        Termination::FinalTime => "final_time",
    }
}

/// Writes divert events, one per row.
pub fn events_csv<W: Write>(events: &[DivertEvent], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["axis", "t_begin", "t_end", "trigger"]).map_err(csv_err)?;
    for e in events {
        wr.write_record([
            e.axis.name().to_string(),
            fmt17(e.t_begin),
            e.t_end.map(fmt17).unwrap_or_default(),
            e.trigger.name().to_string(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))
}

/// Writes one row per law: mean and SD of Δm, Δx, Δy, Δv_z, then mean magnitudes.
pub fn stats_csv<W: Write>(stats: &[DispersionStats], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "law",
        "n_runs",
        "n_failed",
        "dm_mean",
        "dm_sd",
        "dx_mean",
        "dx_sd",
        "dy_mean",
        "dy_sd",
        "dvz_mean",
        "dvz_sd",
        "dx_mean_abs",
        "dy_mean_abs",
        "dvz_mean_abs",
        "terrain_penetrations",
    ])
    .map_err(csv_err)?;
    for s in stats {
        wr.write_record([
            s.law.name().to_string(),
            s.n_runs.to_string(),
            s.n_failed.to_string(),
            fmt17(s.dm.mean),
            fmt17(s.dm.sd),
            fmt17(s.dx.mean),
            fmt17(s.dx.sd),
            fmt17(s.dy.mean),
            fmt17(s.dy.sd),
            fmt17(s.dvz.mean),
            fmt17(s.dvz.sd),
            fmt17(s.dx.mean_abs),
            fmt17(s.dy.mean_abs),
            fmt17(s.dvz.mean_abs),
            s.terrain_penetrations.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))
}

/// Writes paired t-test records.
pub fn paired_csv<W: Write>(tests: &[PairedT], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["comparison", "t_statistic"]).map_err(csv_err)?;
    for t in tests {
        wr.write_record([t.description.clone(), fmt17(t.statistic)]).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))
}

/// Writes one row per run and law with the initial state and terminal errors.
pub fn runs_csv<W: Write>(c: &Campaign, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "run",
        "law",
        "x0",
        "y0",
        "z0",
        "vx0",
        "vy0",
        "vz0",
        "m0",
        "dm",
        "dx",
        "dy",
        "dvz",
        "flight_time",
        "termination",
        "terrain_penetrations",
        "error",
    ])
    .map_err(csv_err)?;
    for lr in &c.laws {
        for (draw, outcome) in c.draws.iter().zip(&lr.outcomes) {
            let s0 = &draw.initial;
            let mut rec = vec![draw.index.to_string(), lr.law.name().to_string()];
            push_vec(&mut rec, &s0.r);
            push_vec(&mut rec, &s0.v);
            rec.push(fmt17(s0.m));
            match outcome {
                Ok(s) => {
                    rec.extend([s.dm, s.dx, s.dy, s.dvz, s.flight_time].map(fmt17));
                    rec.push(termination_name(s.termination).into());
                    rec.push(s.terrain_penetrations.to_string());
                    rec.push(String::new());
                }
                Err(e) => {
                    rec.extend(std::iter::repeat(String::new()).take(7));
                    rec.push(e.to_string());
                }
            }
            wr.write_record(&rec).map_err(csv_err)?;
        }
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))
}

/// Samples the lateral barriers on `r_z ∈ [0, z_max]` at `n` points.
pub fn barriers_csv<W: Write>(b: &BarrierSet, z_max: f64, n: usize, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["r_z", "rho_x_plus", "rho_x_minus", "rho_y_plus", "rho_y_minus"])
        .map_err(csv_err)?;
    let n = n.max(2);
    for k in 0..n {
        let z = z_max * k as f64 / (n - 1) as f64;
        let mut rec = vec![fmt17(z)];
        for axis in [LateralAxis::X, LateralAxis::Y] {
            for side in [1.0, -1.0] {
                rec.push(fmt17(horizontal_barrier(b, axis, side, z)?));
            }
        }
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))
}

/// Samples the vertical barrier along the x axis at `n` lateral offsets in
/// `[0, x_max]`, at altitude `r_z`.
pub fn vertical_barrier_csv<W: Write>(b: &BarrierSet, x_max: f64, r_z: f64, n: usize, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["lateral", "r_z", "rho_z"]).map_err(csv_err)?;
    let n = n.max(2);
    for k in 0..n {
        let x = x_max * k as f64 / (n - 1) as f64;
        let vb = crate::terrain_barriers::vertical_barrier(b, &Vec3::new(x, 0.0, r_z));
        wr.write_record([fmt17(x), fmt17(r_z), fmt17(vb.rho_z)]).map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))
}

/// Writes the PFTS per-sample table.
pub fn pfts_csv<W: Write>(r: &PftsReport, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "t_go", "L", "M", "phi_z", "feasible_p1", "settling_bound", "feasible"])
        .map_err(csv_err)?;
    for s in &r.samples {
        wr.write_record([
            fmt17(s.t),
            fmt17(s.t_go),
            fmt17(s.upper),
            fmt17(s.lower),
            fmt17(s.phi),
            s.feasible_p1.map(fmt17).unwrap_or_default(),
            fmt17(s.settling_bound),
            s.feasible.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wr.flush().map_err(|e| Error::io("<csv>", e))
}

/// One emitted file in the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Provenance record written next to the data files.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
    pub warnings: Vec<String>,
    pub wall_clock_s: f64,
}

/// Collects files written into one output directory with their checksums.
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(OutputDir { dir, files: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Renders `name` with `render`, writes it and records its checksum.
    pub fn write(&mut self, name: &str, render: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<PathBuf> {
        let mut buf = Vec::new();
        render(&mut buf)?;
        let path = self.dir.join(name);
        std::fs::write(&path, &buf).map_err(|e| Error::io(&path, e))?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry {
            name: name.to_string(),
            sha256: sha256_hex(&buf),
            bytes: buf.len(),
        });
        Ok(path)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(self, mut manifest: RunManifest) -> Result<PathBuf> {
        manifest.files = self.files;
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| Error::io(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }
}

/// Lower-case hex SHA-256 digest.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes the trajectory CSV of `log` to `path`.
pub fn write_trajectory_csv(log: &TrajectoryLog, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    trajectory_csv(log, std::io::BufWriter::new(f)).map_err(|e| relabel(e, path))
}

/// Writes a statistics table to `path`.
pub fn write_stats_csv(stats: &[DispersionStats], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    stats_csv(stats, std::io::BufWriter::new(f)).map_err(|e| relabel(e, path))
}

/// Writes divert events to `path`.
pub fn write_events_csv(events: &[DivertEvent], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    events_csv(events, std::io::BufWriter::new(f)).map_err(|e| relabel(e, path))
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { reason, .. } => Error::Io {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guidance_laws::Law;
    use crate::sim_harness::{run_simulation, QuantityStats, Scenario};

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, -1.0 / 3.0, 1051.86, 6.02214076e23, -0.0, 5e-324] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn trajectory_header_prefix() {
        let mut sc = Scenario::reference(Law::Ogl);
        sc.guidance.t_f = 1.0;
        let log = run_simulation(&sc).unwrap();
        let mut buf = Vec::new();
        trajectory_csv(&log, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,rx,ry,rz,vx,vy,vz,m,"));
        assert!(text.ends_with('\n'));
        assert_eq!(text.lines().count(), log.samples.len() + 1);
        let cols = trajectory_header().len();
        assert!(text.lines().all(|l| l.split(',').count() == cols));
    }

    #[test]
    fn one_law_stats_has_one_row() {
        let q = QuantityStats::of(&[1.0, 2.0]);
        let st = DispersionStats {
            law: Law::MssOtalg,
            n_runs: 2,
            n_failed: 0,
            dm: q,
            dx: q,
            dy: q,
            dvz: q,
            terrain_penetrations: 0,
            paired_t: None,
        };
        let mut buf = Vec::new();
        stats_csv(&[st], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 2);
    }

    #[test]
    fn output_dir_checksums_files() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(tmp.path().join("o")).unwrap();
        out.write("a.csv", |w| {
            w.extend_from_slice(b"x\n1\n");
            Ok(())
        })
        .unwrap();
        let bytes = std::fs::read(out.path().join("a.csv")).unwrap();
        assert_eq!(out.files()[0].sha256, sha256_hex(&bytes));
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn io_failure_names_path() {
        let sc = Scenario::reference(Law::Ogl);
        let mut sc = sc;
        sc.guidance.t_f = 0.5;
        let log = run_simulation(&sc).unwrap();
        let bad = Path::new("/nonexistent-dir/x/traj.csv");
        let err = write_trajectory_csv(&log, bad).unwrap_err();
        assert!(err.to_string().contains("nonexistent-dir"));
    }
}
