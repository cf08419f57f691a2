// SPDX-License-Identifier: Apache-2.0

//! Configuration parsing and output files.

use mssland::cli_io::output::{sha256_hex, trajectory_header};
use mssland::cli_io::{parse_config, parse_config_str, write_config, write_trajectory_csv, ConfigFile, OutputDir, RunManifest};
use mssland::{run_simulation, Error, Law, Scenario};
use proptest::prelude::*;

proptest! {
    #[test]
    fn config_round_trips(seed in 0u64..(i64::MAX as u64), dt in 0.001f64..0.1, lambda in prop::sample::select(vec![2.0, 3.0]), runs in 2usize..1000) {
        let mut cfg = ConfigFile::default();
        cfg.scenario.seed = seed;
        cfg.scenario.dt_s = dt;
        cfg.guidance.lambda = lambda;
        cfg.montecarlo.n_runs = runs;
        let text = write_config(&cfg).unwrap();
        prop_assert_eq!(parse_config_str(&text).unwrap(), cfg);
    }
}

#[test]
fn unknown_key_names_its_path() {
    match parse_config_str("[guidance]\nLamda = 2.0\n") {
        Err(Error::Config { key, .. }) => assert_eq!(key, "guidance.Lamda"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn invalid_values_name_their_key() {
    match parse_config_str("[environment]\nT_max_N = -1.0\n") {
        Err(Error::Config { key, .. }) => assert_eq!(key, "environment.T_max_N"),
        other => panic!("{other:?}"),
    }
    assert!(parse_config_str("[scenario]\nlaw = \"pid\"\n").is_err());
    assert!(parse_config_str("[terrain]\nheights_m = [500.0]\n").is_err());
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(parse_config(&dir.path().join("absent.toml")), Err(Error::Io { .. })));
}

#[test]
fn trajectory_csv_is_rectangular() {
    let mut sc = Scenario::reference(Law::Otalg);
    sc.guidance.t_f = 5.0;
    sc.initial.r.z = 2000.0;
    let log = run_simulation(&sc).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    write_trajectory_csv(&log, &path).unwrap();
    let mut rd = csv::Reader::from_path(&path).unwrap();
    let header: Vec<String> = rd.headers().unwrap().iter().map(str::to_owned).collect();
    assert_eq!(header, trajectory_header());
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), log.samples.len());
    for (row, s) in rows.iter().zip(&log.samples) {
        assert_eq!(row.len(), header.len());
        assert_eq!(row[0].parse::<f64>().unwrap(), s.t);
        assert_eq!(row[7].parse::<f64>().unwrap(), s.m);
    }
}

#[test]
fn manifest_lists_checksums() {
    assert_eq!(
        sha256_hex(b"abc"),
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    );
    let dir = tempfile::tempdir().unwrap();
    let mut out = OutputDir::create(dir.path().join("run")).unwrap();
    out.write("a.csv", |w| {
        w.extend_from_slice(b"x\n1\n");
        Ok(())
    })
    .unwrap();
    let manifest = RunManifest {
        tool: "mssland".into(),
        version: "0".into(),
        command: "test".into(),
        master_seed: 1,
        config: serde_json::Value::Null,
        files: Vec::new(),
        warnings: Vec::new(),
        wall_clock_s: 0.0,
    };
    let path = out.finish(manifest).unwrap();
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(json["files"][0]["name"], "a.csv");
    assert_eq!(json["files"][0]["sha256"], sha256_hex(b"x\n1\n"));
    assert_eq!(json["files"][0]["bytes"], 4);
}

#[test]
fn partial_moment_tables_keep_reference_values() {
    let cfg = parse_config_str("[montecarlo.mean]\nz_m = 2400.0\n[montecarlo.sd]\nx_m = 100.0\n").unwrap();
    let d = cfg.to_mc_config().unwrap().distribution;
    assert_eq!(d.mean, [0.0, 0.0, 2400.0, 0.0, 0.0, -80.0, 1905.0]);
    assert_eq!(d.sd, [100.0, 2200.0, 400.0, 80.0, 80.0, 20.0, 0.0]);
    match parse_config_str("[montecarlo.sd]\nw_m = 1.0\n") {
        Err(Error::Config { key, .. }) => assert_eq!(key, "montecarlo.sd.w_m"),
        other => panic!("{other:?}"),
    }
}
