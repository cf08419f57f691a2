// SPDX-License-Identifier: Apache-2.0

//! `mssland`: run guidance simulations, Monte Carlo campaigns and checks.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mssland::analysis::{detect_divert_events, pfts_check};
use mssland::cli_io::output::{
    barriers_csv, events_csv, paired_csv, pfts_csv, runs_csv, stats_csv, summary_csv, trajectory_csv,
    vertical_barrier_csv,
};
use mssland::cli_io::{parse_config, ConfigFile, OutputDir, RunManifest, DEFAULT_OUT_DIR, OUT_DIR_ENV};
use mssland::guidance_laws::divert_rate;
use mssland::sim_harness::{run_campaign, run_simulation, t_f_min};
use mssland::terrain_barriers::critical_distance;
use mssland::{Law, Vec3};

/// `println!` that ignores a closed stdout instead of panicking.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser, Debug)]
#[command(name = "mssland", version, about = "Terrain-avoiding soft-landing guidance simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fly one trajectory and write its telemetry, summary and divert events.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Guidance law: ogl, otalg or mss-otalg.
        #[arg(long)]
        law: Option<Law>,
        /// Enable or disable the sinusoidal disturbance.
        #[arg(long, value_name = "BOOL", action = clap::ArgAction::Set)]
        perturbed: Option<bool>,
    },
    /// Run a dispersed campaign and write per-run results and statistics.
    Montecarlo {
        #[command(flatten)]
        common: Common,
        /// Fly only this law (default: otalg and mss-otalg, paired).
        /// Guidance law: ogl, otalg or mss-otalg.
        #[arg(long)]
        law: Option<Law>,
        /// Enable or disable the sinusoidal disturbance.
        #[arg(long, value_name = "BOOL", action = clap::ArgAction::Set)]
        perturbed: Option<bool>,
        /// Number of dispersed runs (overrides the configuration).
        #[arg(long, value_name = "N")]
        runs: Option<usize>,
    },
    /// Sample the horizontal and vertical barriers for plotting.
    Barriers {
        #[command(flatten)]
        common: Common,
    },
    /// Fly one trajectory and tabulate the fixed-time stability bounds.
    CheckPfts {
        #[command(flatten)]
        common: Common,
        /// Guidance law: ogl, otalg or mss-otalg.
        #[arg(long)]
        law: Option<Law>,
        /// Enable or disable the sinusoidal disturbance.
        #[arg(long, value_name = "BOOL", action = clap::ArgAction::Set)]
        perturbed: Option<bool>,
    },
    /// Report the thrust-limited minimum terminal time.
    Tfmin {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file (defaults to the reference mission).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default: $MSSLAND_OUT_DIR or ./out).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed overriding the configured noise or master seed.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<ConfigFile> {
        match &self.config {
            Some(p) => parse_config(p).with_context(|| format!("loading {}", p.display())),
            None => Ok(ConfigFile::default()),
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
    }
}

struct Session {
    command: &'static str,
    started: Instant,
    out: OutputDir,
    warnings: Vec<String>,
}

impl Session {
    fn new(command: &'static str, dir: &Path) -> Result<Self> {
        Ok(Session {
            command,
            started: Instant::now(),
            out: OutputDir::create(dir)?,
            warnings: Vec::new(),
        })
    }

    fn finish(self, cfg: &ConfigFile, master_seed: u64) -> Result<()> {
        for w in &self.warnings {
            eprintln!("warning: {w}");
        }
        let manifest = RunManifest {
            tool: "mssland".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.into(),
            master_seed,
            config: serde_json::to_value(cfg).context("serializing config")?,
            files: Vec::new(),
            warnings: self.warnings,
            wall_clock_s: self.started.elapsed().as_secs_f64(),
        };
        let dir = self.out.path().to_path_buf();
        self.out.finish(manifest)?;
        say!("wrote {}", dir.display());
        Ok(())
    }
}

fn apply_law_and_perturbation(cfg: &mut ConfigFile, law: Option<Law>, perturbed: Option<bool>) {
    if let Some(law) = law {
        cfg.scenario.law = law;
    }
    if let Some(p) = perturbed {
        cfg.scenario.perturbed = p;
    }
}

fn simulate(common: &Common, law: Option<Law>, perturbed: Option<bool>) -> Result<()> {
    let mut cfg = common.load()?;
    apply_law_and_perturbation(&mut cfg, law, perturbed);
    if let Some(seed) = common.seed {
        cfg.scenario.seed = seed;
    }
    let sc = cfg.to_scenario()?;
    let mut session = Session::new("simulate", &common.out_dir())?;
    session.warnings.extend(sc.validate()?);
    let log = run_simulation(&sc).map_err(|f| anyhow::anyhow!("{f}"))?;
    let events = detect_divert_events(&log, &cfg.event_settings());
    if log.summary.fallback_steps > 0 {
        session.warnings.push(format!(
            "vertical barrier used the landing-site fallback on {} steps",
            log.summary.fallback_steps
        ));
    }
    session.out.write("trajectory.csv", |w| trajectory_csv(&log, w))?;
    session.out.write("summary.csv", |w| summary_csv(&log, w))?;
    session.out.write("events.csv", |w| events_csv(&events, w))?;
    let s = &log.summary;
    say!(
        "{}: dm = {:.3} kg, dx = {:.3e} m, dy = {:.3e} m, dvz = {:.4} m/s, t = {:.2} s, penetrations = {}",
        s.law, s.dm, s.dx, s.dy, s.dvz, s.flight_time, s.terrain_penetrations
    );
    session.finish(&cfg, sc.seed)
}

fn montecarlo(common: &Common, law: Option<Law>, perturbed: Option<bool>, runs: Option<usize>) -> Result<()> {
    let mut cfg = common.load()?;
    if let Some(p) = perturbed {
        cfg.scenario.perturbed = p;
    }
    if let Some(n) = runs {
        cfg.montecarlo.n_runs = n;
    }
    if let Some(seed) = common.seed {
        cfg.montecarlo.master_seed = seed;
    }
    let laws: Vec<Law> = match law {
        Some(l) => vec![l],
        None => vec![Law::Otalg, Law::MssOtalg],
    };
    let mc = cfg.to_mc_config()?;
    let mut session = Session::new("montecarlo", &common.out_dir())?;
    let campaign = run_campaign(&mc, &laws)?;
    if campaign.rejections > 0 {
        session
            .warnings
            .push(format!("{} draws with non-positive altitude were redrawn", campaign.rejections));
    }
    let mut stats: Vec<_> = campaign.laws.iter().map(|l| l.stats.clone()).collect();
    let mut paired = Vec::new();
    if laws.len() == 2 {
        match campaign.paired_fuel_t(Law::MssOtalg, Law::Otalg) {
            Ok(t) => {
                for s in &mut stats {
                    s.paired_t = Some(t.clone());
                }
                paired.push(t);
            }
            Err(e) => session.warnings.push(e.to_string()),
        }
    }
    for s in &stats {
        if s.n_failed > 0 {
            session.warnings.push(format!("{}: {} runs failed", s.law, s.n_failed));
        }
        say!(
            "{}: n = {}, dm = {:.2} +/- {:.2} kg, |dx| = {:.3e} m, |dy| = {:.3e} m, dvz = {:.3} +/- {:.3} m/s (|dvz| {:.3}), penetrations = {}",
            s.law, s.n_runs, s.dm.mean, s.dm.sd, s.dx.mean_abs, s.dy.mean_abs, s.dvz.mean, s.dvz.sd,
            s.dvz.mean_abs, s.terrain_penetrations
        );
    }
    for t in &paired {
        say!("paired t [{}] = {:.3}", t.description, t.statistic);
    }
    session.out.write("runs.csv", |w| runs_csv(&campaign, w))?;
    session.out.write("stats.csv", |w| stats_csv(&stats, w))?;
    if !paired.is_empty() {
        session.out.write("paired.csv", |w| paired_csv(&paired, w))?;
    }
    session.finish(&cfg, mc.master_seed)
}

fn barriers(common: &Common) -> Result<()> {
    let mut cfg = common.load()?;
    if let Some(seed) = common.seed {
        cfg.scenario.seed = seed;
    }
    let sc = cfg.to_scenario()?;
    let b = sc.barriers()?;
    let top = b.heights.last().copied().unwrap_or(0.0);
    let outer = b.half_widths.last().copied().unwrap_or(0.0);
    let mut session = Session::new("barriers", &common.out_dir())?;
    session.out.write("barriers.csv", |w| barriers_csv(&b, 1.5 * top, 601, w))?;
    session
        .out
        .write("vertical_barrier.csv", |w| vertical_barrier_csv(&b, 1.5 * outer, 0.5 * top, 601, w))?;
    session.finish(&cfg, sc.seed)
}

fn check_pfts(common: &Common, law: Option<Law>, perturbed: Option<bool>) -> Result<()> {
    let mut cfg = common.load()?;
    apply_law_and_perturbation(&mut cfg, law, perturbed);
    if let Some(seed) = common.seed {
        cfg.scenario.seed = seed;
    }
    let sc = cfg.to_scenario()?;
    let g = &sc.guidance;
    let d_star = critical_distance(g.l1.z, g.l2.z)?;
    let p_max = divert_rate(&Vec3::repeat(d_star), g).z;
    let log = run_simulation(&sc).map_err(|f| anyhow::anyhow!("{f}"))?;
    let t: Vec<f64> = log.samples.iter().map(|s| s.t).collect();
    let t_go: Vec<f64> = log.samples.iter().map(|s| s.t_go).collect();
    let phi: Vec<f64> = log.samples.iter().map(|s| s.phi.z).collect();
    let report = pfts_check(&t, &t_go, &phi, &cfg.pfts_settings(p_max))?;
    let mut session = Session::new("check-pfts", &common.out_dir())?;
    session.out.write("pfts.csv", |w| pfts_csv(&report, w))?;
    let with_p1 = report.samples.iter().filter(|s| s.feasible_p1.is_some()).count();
    let feasible = report.samples.iter().filter(|s| s.feasible).count();
    say!(
        "p_max = {p_max:.4}; samples with a feasible p1: {with_p1}/{}; samples with M < phi <= L: {feasible}",
        report.samples.len()
    );
    session.finish(&cfg, sc.seed)
}

fn tfmin(common: &Common) -> Result<()> {
    let cfg = common.load()?;
    let sc = cfg.to_scenario()?;
    let tf = t_f_min(&sc.initial, &sc.env)?;
    let ok = sc.guidance.t_f >= tf.value;
    let mut session = Session::new("tfmin", &common.out_dir())?;
    session.out.write("tfmin.csv", |w| {
        let mut s = String::from("t_f_min,second_branch_evaluated,t_f,t_f_feasible\n");
        s.push_str(&format!(
            "{},{},{},{}\n",
            mssland::cli_io::output::fmt17(tf.value),
            tf.second_branch_evaluated,
            mssland::cli_io::output::fmt17(sc.guidance.t_f),
            ok
        ));
        w.extend_from_slice(s.as_bytes());
        Ok(())
    })?;
    say!(
        "t_f_min = {:.4} s ({}); t_f = {} s is {}",
        tf.value,
        if tf.second_branch_evaluated {
            "both branches"
        } else {
            "first branch only"
        },
        sc.guidance.t_f,
        if ok { "feasible" } else { "below the minimum" }
    );
    session.finish(&cfg, sc.seed)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, law, perturbed } => simulate(&common, law, perturbed),
        Command::Montecarlo {
            common,
            law,
            perturbed,
            runs,
        } => montecarlo(&common, law, perturbed, runs),
        Command::Barriers { common } => barriers(&common),
        Command::CheckPfts { common, law, perturbed } => check_pfts(&common, law, perturbed),
        Command::Tfmin { common } => tfmin(&common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
