//! Command-line front end. The `cogmap` binary only parses arguments and maps
//! errors to exit codes; every subcommand lives here so it can be driven
//! from tests and examples.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::baselines::{prm, rrt, rrt_connect, SamplerParams, SamplerResult, ValidityChecker, VoxelValidity};
use crate::bitmap;
use crate::datagen::generate_pick_place;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::kinematics::JointConfig;
use crate::live::{self, WorldState};
use crate::lut::{build_lookup, LookupTable};
use crate::planner::{
    plan_detailed, polyline_length, smooth_validated, Path as NeuronPath, SearchAlgorithm, SmoothedTrajectory,
};
use crate::scenario::Scenario;
use crate::sonn::{self, Network, NetworkKind};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Bad arguments or invalid configuration values.
pub const EXIT_USAGE: i32 = 2;
/// The search found no path.
pub const EXIT_UNREACHABLE: i32 = 3;
/// File, parse or format problems.
pub const EXIT_IO: i32 = 4;
/// The start or goal neuron is blocked.
pub const EXIT_BLOCKED_ENDPOINT: i32 = 5;

/// Header of the benchmark CSV.
pub const CSV_HEADER: &str = "planner,scenario,run,plan_time_s,smooth_time_s,path_len_rad,neurons_on_path,success";

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Unreachable => EXIT_UNREACHABLE,
        Error::BlockedEndpoint(_) => EXIT_BLOCKED_ENDPOINT,
        Error::InvalidArgument(_)
        | Error::DimensionMismatch { .. }
        | Error::OutOfLimits { .. }
        | Error::Unsupported(_) => EXIT_USAGE,
        Error::FingerprintMismatch
        | Error::Parse { .. }
        | Error::Format(_)
        | Error::Io { .. }
        | Error::Stream(_)
        | Error::Json(_)
        | Error::Image(_) => EXIT_IO,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "cogmap",
    version,
    about = "Path planning on a cognitive map learned by self-organizing networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a network on a dataset (or on data generated from the scenario).
    Train(TrainArgs),
    /// Build the voxel/neuron lookup table for a network.
    BuildLut(BuildLutArgs),
    /// Plan a single query.
    Plan(PlanArgs),
    /// Compare the cognitive-map planner with RRT, RRT-Connect and PRM.
    Bench(BenchArgs),
    /// Render the cognitive map with its blocked neurons.
    Bitmap(BitmapArgs),
    /// Run the live replanner headlessly and print its event log.
    Replay(ReplayArgs),
    /// Serve the live replanner over TCP.
    Serve(ServeArgs),
    /// Generate a pick-and-place training dataset.
    Datagen(DatagenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    /// Network file.
    #[arg(long)]
    pub network: PathBuf,
    /// Lookup-table file built for the network.
    #[arg(long)]
    pub lut: PathBuf,
    /// Scenario file, or the name of a bundled scenario.
    #[arg(long, default_value = "pillar")]
    pub scenario: String,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Scenario file whose `training` section configures the run, or a bundled scenario name.
    #[arg(long, default_value = "pillar")]
    pub config: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub kind: Option<NetworkKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub neurons: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BuildLutArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long, default_value = "pillar")]
    pub scenario: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Comma-separated joint values; defaults to the scenario start.
    #[arg(long, value_parser = parse_config, allow_hyphen_values = true)]
    pub start: Option<JointConfig>,
    #[arg(long, value_parser = parse_config, allow_hyphen_values = true)]
    pub goal: Option<JointConfig>,
    #[arg(long)]
    pub algo: Option<SearchAlgorithm>,
    /// Highest smoothing degree; 0 disables smoothing. Defaults to the scenario setting.
    #[arg(long)]
    pub smooth: Option<usize>,
    /// Obstacle time (seconds).
    #[arg(long, default_value_t = 0.0)]
    pub time: f64,
    #[arg(long, default_value_t = 1)]
    pub repeat: usize,
    /// Write the path and trajectory as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Scenario files or bundled names; repeatable.
    #[arg(long = "scenario", default_value = "pillar")]
    pub scenarios: Vec<String>,
    /// Use this network instead of training one from each scenario.
    #[arg(long, requires = "lut")]
    pub network: Option<PathBuf>,
    #[arg(long, requires = "network")]
    pub lut: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub runs: usize,
    /// Comma-separated subset of gng-dijkstra, gng-wavefront, rrt, rrt-connect, prm.
    #[arg(long, value_delimiter = ',')]
    pub planners: Option<Vec<String>>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BitmapArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 0.0)]
    pub time: f64,
    /// Overlay the planned path for the scenario query.
    #[arg(long)]
    pub path: bool,
    /// Output image; `.png` or `.ppm`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Event log destination (JSON lines); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the scenario's replay duration (seconds).
    #[arg(long)]
    pub duration: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Port; overrides the environment variable and the scenario.
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Stop after this much simulated time.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Run the scripted timeline without a listener and print the event log.
    #[arg(long)]
    pub headless: bool,
}

#[derive(Debug, Args)]
pub struct DatagenArgs {
    #[arg(long, default_value = "pillar")]
    pub scenario: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn parse_config(s: &str) -> std::result::Result<JointConfig, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(JointConfig)
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a, out),
        Command::BuildLut(a) => cmd_build_lut(&a, out),
        Command::Plan(a) => cmd_plan(&a, out),
        Command::Bench(a) => cmd_bench(&a, out).map(|_| ()),
        Command::Bitmap(a) => cmd_bitmap(&a, out),
        Command::Replay(a) => cmd_replay(&a, out),
        Command::Serve(a) => cmd_serve(&a, out),
        Command::Datagen(a) => cmd_datagen(&a, out),
    }
}

/// The scenario's training data: an explicit file, the scenario's dataset
/// file, or freshly generated trajectories.
pub fn training_data(sc: &Scenario, explicit: Option<&Path>) -> Result<Dataset> {
    if let Some(p) = explicit {
        return Dataset::load(p);
    }
    if let Some(p) = &sc.training.dataset {
        return Dataset::load(sc.resolve_path(p));
    }
    let dg = sc
        .datagen
        .as_ref()
        .ok_or_else(|| Error::invalid("scenario has neither training.dataset nor a datagen section"))?;
    generate_pick_place(&sc.robot, &sc.grid, &dg.regions, dg.trajectories, dg.seed)
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let mut sc = Scenario::resolve(&a.config)?;
    if let Some(n) = a.neurons {
        sc.training.params.target_neurons = n;
    }
    if let Some(i) = a.iterations {
        sc.training.params.iterations = i;
    }
    let kind = a.kind.unwrap_or(sc.training.kind);
    let seed = a.seed.unwrap_or(sc.training.seed);
    let data = training_data(&sc, a.dataset.as_deref())?;
    let t = Instant::now();
    let net = sonn::train(kind, &data, &sc.training.params, seed)?;
    let secs = t.elapsed().as_secs_f64();
    net.save(&a.out)?;
    writeln!(
        out,
        "kind={kind} neurons={} edges={} samples={} quantization_error={:.6} train_time_s={secs:.3}",
        net.len(),
        net.edges().len(),
        data.sample_count(),
        net.quantization_error(&data)?,
    )?;
    writeln!(out, "fingerprint={}", hex(&net.fingerprint()))?;
    Ok(())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn cmd_build_lut(a: &BuildLutArgs, out: &mut dyn Write) -> Result<()> {
    let net = Network::load(&a.network)?;
    let sc = Scenario::resolve(&a.scenario)?;
    let lut = build_lookup(&net, &sc.robot, &sc.grid)?;
    lut.save(&a.out)?;
    let reloaded = LookupTable::load_for(&a.out, &net)?;
    reloaded.verify()?;
    writeln!(
        out,
        "neurons={} cells={} associations={} out_of_limits={} consistency=ok",
        lut.neuron_count(),
        lut.grid().cell_count(),
        lut.association_count(),
        lut.report().out_of_limits.len()
    )?;
    let hist: Vec<String> = lut
        .coverage_histogram()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, c)| format!("{k}:{c}"))
        .collect();
    writeln!(out, "coverage_histogram {}", hist.join(" "))?;
    Ok(())
}

/// Loads a network, its lookup table and a scenario.
pub fn load_map(a: &MapArgs) -> Result<(Network, LookupTable, Scenario)> {
    let net = Network::load(&a.network)?;
    let lut = LookupTable::load_for(&a.lut, &net)?;
    let sc = Scenario::resolve(&a.scenario)?;
    if net.dim() != sc.robot.joint_count() {
        return Err(Error::DimensionMismatch {
            expected: sc.robot.joint_count(),
            actual: net.dim(),
        });
    }
    Ok((net, lut, sc))
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One planned and smoothed query with its timings.
#[derive(Debug, Clone, Serialize)]
pub struct PlanRecord {
    pub path: NeuronPath,
    pub trajectory: SmoothedTrajectory,
    pub plan_time_s: f64,
    pub smooth_time_s: f64,
}

/// Blocking, search and smoothing for one query on the cognitive map.
#[allow(clippy::too_many_arguments)]
pub fn plan_once(
    net: &Network,
    lut: &LookupTable,
    sc: &Scenario,
    start: &[f64],
    goal: &[f64],
    algo: SearchAlgorithm,
    degree: usize,
    time: f64,
) -> Result<PlanRecord> {
    let occupied = sc.occupied_at(time);
    let t = Instant::now();
    let outcome = plan_detailed(net, lut, &sc.robot, start, goal, &occupied, algo)?;
    let plan_time_s = t.elapsed().as_secs_f64();
    let path = outcome.path?;
    let t = Instant::now();
    let trajectory = if degree > 0 && path.hop_count() > 0 {
        smooth_validated(&path, net, &outcome.blocked, degree, sc.planner.samples_per_hop)?
    } else {
        SmoothedTrajectory::unsmoothed(&path)
    };
    let smooth_time_s = t.elapsed().as_secs_f64();
    Ok(PlanRecord {
        path,
        trajectory,
        plan_time_s,
        smooth_time_s,
    })
}

pub fn cmd_plan(a: &PlanArgs, out: &mut dyn Write) -> Result<()> {
    let (net, lut, sc) = load_map(&a.map)?;
    let start = a.start.clone().unwrap_or_else(|| sc.start.clone());
    let goal = a.goal.clone().unwrap_or_else(|| sc.goal.clone());
    sc.robot.check_limits(&start)?;
    sc.robot.check_limits(&goal)?;
    let algo = a.algo.unwrap_or(sc.planner.algorithm);
    let degree = a.smooth.unwrap_or(sc.planner.smoothing_degree);
    let mut plan_times = Vec::new();
    let mut smooth_times = Vec::new();
    let mut last = None;
    for _ in 0..a.repeat.max(1) {
        let rec = plan_once(&net, &lut, &sc, &start, &goal, algo, degree, a.time)?;
        plan_times.push(rec.plan_time_s);
        smooth_times.push(rec.smooth_time_s);
        last = Some(rec);
    }
    let rec = last.expect("at least one run");
    writeln!(
        out,
        "algo={algo} neurons_on_path={} hops={} cspace_length={:.6} smoothing_degree={} samples={} trajectory_length={:.6}",
        rec.path.len(),
        rec.path.hop_count(),
        rec.path.cspace_length(),
        rec.trajectory.degree,
        rec.trajectory.len(),
        rec.trajectory.cspace_length()
    )?;
    let (m, s) = mean_std(&plan_times);
    writeln!(out, "plan_time_s mean={m:.6} std={s:.6}")?;
    let (m, s) = mean_std(&smooth_times);
    writeln!(out, "smooth_time_s mean={m:.6} std={s:.6}")?;
    if let Some(p) = &a.out {
        write_atomic(p, &serde_json::to_vec_pretty(&rec)?)?;
    }
    Ok(())
}

/// One row of the benchmark CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub planner: String,
    pub scenario: String,
    pub run: usize,
    pub plan_time_s: f64,
    pub smooth_time_s: f64,
    pub path_len_rad: f64,
    pub neurons_on_path: usize,
    pub success: bool,
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:.9},{:.9},{:.6},{},{}",
            self.planner,
            self.scenario,
            self.run,
            self.plan_time_s,
            self.smooth_time_s,
            self.path_len_rad,
            self.neurons_on_path,
            self.success
        )
    }
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_line());
        s.push('\n');
    }
    s
}

pub const ALL_PLANNERS: [&str; 5] = ["gng-dijkstra", "gng-wavefront", "rrt", "rrt-connect", "prm"];

fn sampler_row(name: &str, scenario: &str, run: usize, f: impl FnOnce() -> Result<SamplerResult>) -> Result<BenchRow> {
    let t = Instant::now();
    let res = f()?;
    let plan_time_s = t.elapsed().as_secs_f64();
    Ok(BenchRow {
        planner: name.into(),
        scenario: scenario.into(),
        run,
        plan_time_s,
        smooth_time_s: 0.0,
        path_len_rad: res.path.as_deref().map_or(0.0, polyline_length),
        neurons_on_path: 0,
        success: res.path.is_some(),
    })
}

/// Runs `runs` repetitions of each planner on one scenario.
pub fn bench_scenario(
    sc: &Scenario,
    net: &Network,
    lut: &LookupTable,
    planners: &[&str],
    runs: usize,
) -> Result<Vec<BenchRow>> {
    let occupied = sc.occupied_at(0.0);
    let validity = VoxelValidity {
        model: &sc.robot,
        grid: &sc.grid,
        occupied: &occupied,
    };
    let name = if sc.name.is_empty() { "scenario" } else { &sc.name };
    let mut rows = Vec::new();
    for &planner in planners {
        for run in 0..runs {
            let params = SamplerParams {
                seed: sc.sampler.seed.wrapping_add(run as u64),
                ..sc.sampler
            };
            let v: &dyn ValidityChecker = &validity;
            let row = match planner {
                "gng-dijkstra" | "gng-wavefront" => {
                    let algo = if planner == "gng-dijkstra" {
                        SearchAlgorithm::Dijkstra
                    } else {
                        SearchAlgorithm::Wavefront
                    };
                    let res = plan_once(
                        net,
                        lut,
                        sc,
                        &sc.start,
                        &sc.goal,
                        algo,
                        sc.planner.smoothing_degree,
                        0.0,
                    );
                    match res {
                        Ok(r) => BenchRow {
                            planner: planner.into(),
                            scenario: name.into(),
                            run,
                            plan_time_s: r.plan_time_s,
                            smooth_time_s: r.smooth_time_s,
                            path_len_rad: r.trajectory.cspace_length(),
                            neurons_on_path: r.path.len(),
                            success: true,
                        },
                        Err(e) if e.is_planning_failure() => BenchRow {
                            planner: planner.into(),
                            scenario: name.into(),
                            run,
                            plan_time_s: 0.0,
                            smooth_time_s: 0.0,
                            path_len_rad: 0.0,
                            neurons_on_path: 0,
                            success: false,
                        },
                        Err(e) => return Err(e),
                    }
                }
                "rrt" => sampler_row(planner, name, run, || rrt(&sc.start, &sc.goal, v, &params))?,
                "rrt-connect" => sampler_row(planner, name, run, || rrt_connect(&sc.start, &sc.goal, v, &params))?,
                "prm" => sampler_row(planner, name, run, || prm(&sc.start, &sc.goal, v, &params))?,
                other => return Err(Error::invalid(format!("unknown planner `{other}`"))),
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Per-planner summary lines of a benchmark.
pub fn summarize(rows: &[BenchRow]) -> String {
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.planner.as_str(), r.scenario.as_str())) {
            keys.push((&r.planner, &r.scenario));
        }
    }
    let mut s = format!(
        "{:<14} {:<10} {:>7} {:>24} {:>24} {:>22}\n",
        "planner",
        "scenario",
        "success",
        "plan_time_s (mean±std)",
        "smooth_time_s (mean±std)",
        "path_len_rad (mean±std)"
    );
    for (p, sc) in keys {
        let sel: Vec<&BenchRow> = rows.iter().filter(|r| r.planner == p && r.scenario == sc).collect();
        let ok: Vec<&&BenchRow> = sel.iter().filter(|r| r.success).collect();
        let (tm, ts) = mean_std(&sel.iter().map(|r| r.plan_time_s).collect::<Vec<_>>());
        let (sm, ss) = mean_std(&ok.iter().map(|r| r.smooth_time_s).collect::<Vec<_>>());
        let (lm, ls) = mean_std(&ok.iter().map(|r| r.path_len_rad).collect::<Vec<_>>());
        s.push_str(&format!(
            "{:<14} {:<10} {:>3}/{:<3} {:>11.6}±{:<12.6} {:>11.6}±{:<12.6} {:>10.4}±{:<11.4}\n",
            p,
            sc,
            ok.len(),
            sel.len(),
            tm,
            ts,
            sm,
            ss,
            lm,
            ls
        ));
    }
    s
}

/// Trains the scenario's configured network and builds its lookup table.
pub fn train_for(sc: &Scenario) -> Result<(Network, LookupTable)> {
    let data = training_data(sc, None)?;
    let net = sonn::train(sc.training.kind, &data, &sc.training.params, sc.training.seed)?;
    let lut = build_lookup(&net, &sc.robot, &sc.grid)?;
    Ok((net, lut))
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<Vec<BenchRow>> {
    let planners: Vec<String> = a
        .planners
        .clone()
        .unwrap_or_else(|| ALL_PLANNERS.iter().map(|s| s.to_string()).collect());
    let planners: Vec<&str> = planners.iter().map(String::as_str).collect();
    if let Some(bad) = planners.iter().find(|p| !ALL_PLANNERS.contains(p)) {
        return Err(Error::invalid(format!("unknown planner `{bad}`")));
    }
    let given = match (&a.network, &a.lut) {
        (Some(n), Some(l)) => {
            let net = Network::load(n)?;
            let lut = LookupTable::load_for(l, &net)?;
            Some((net, lut))
        }
        _ => None,
    };
    let mut rows = Vec::new();
    for spec in &a.scenarios {
        let sc = Scenario::resolve(spec)?;
        let owned;
        let (net, lut) = match &given {
            Some((n, l)) => (n, l),
            None => {
                owned = train_for(&sc)?;
                (&owned.0, &owned.1)
            }
        };
        rows.extend(bench_scenario(&sc, net, lut, &planners, a.runs)?);
    }
    write!(out, "{}", summarize(&rows))?;
    if let Some(p) = &a.csv {
        write_atomic(p, to_csv(&rows).as_bytes())?;
    }
    Ok(rows)
}

pub fn cmd_bitmap(a: &BitmapArgs, out: &mut dyn Write) -> Result<()> {
    let (net, lut, sc) = load_map(&a.map)?;
    let blocked = lut.blocked_neurons(&sc.occupied_at(a.time))?;
    let (path, ends) = if a.path {
        let outcome = plan_detailed(
            &net,
            &lut,
            &sc.robot,
            &sc.start,
            &sc.goal,
            &sc.occupied_at(a.time),
            sc.planner.algorithm,
        )?;
        let ends = vec![outcome.bmu_start, outcome.bmu_goal];
        (outcome.path?.neuron_ids().to_vec(), ends)
    } else {
        (Vec::new(), Vec::new())
    };
    let img = bitmap::render(&net, &blocked, &path, &ends);
    bitmap::save(&img, &a.out)?;
    writeln!(
        out,
        "width={} height={} neurons={} blocked={} path={}",
        img.width(),
        img.height(),
        net.len(),
        blocked.len(),
        path.len()
    )?;
    Ok(())
}

fn write_log(events: &[live::Event], dest: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let mut text = String::new();
    for e in events {
        text.push_str(&serde_json::to_string(e)?);
        text.push('\n');
    }
    match dest {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => Ok(out.write_all(text.as_bytes())?),
    }
}

pub fn cmd_replay(a: &ReplayArgs, out: &mut dyn Write) -> Result<()> {
    let (net, lut, mut sc) = load_map(&a.map)?;
    if let Some(d) = a.duration {
        sc.live.duration = d;
    }
    let events = live::replay(&sc, Arc::new(net), Arc::new(lut))?;
    write_log(&events, a.out.as_deref(), out)
}

pub fn cmd_serve(a: &ServeArgs, out: &mut dyn Write) -> Result<()> {
    let (net, lut, mut sc) = load_map(&a.map)?;
    if a.headless {
        if let Some(d) = a.duration {
            sc.live.duration = d;
        }
        let events = live::replay(&sc, Arc::new(net), Arc::new(lut))?;
        return write_log(&events, None, out);
    }
    let port = a.port.or_else(live::port_from_env).unwrap_or(sc.live.port);
    let world = WorldState::new(&sc, Arc::new(net), Arc::new(lut))?;
    let handle = live::serve(world, (a.host.as_str(), port), a.duration)?;
    writeln!(out, "listening on {}", handle.local_addr())?;
    out.flush()?;
    let world = handle.join()?;
    writeln!(out, "stopped at t={:.3}", world.time)?;
    Ok(())
}

pub fn cmd_datagen(a: &DatagenArgs, out: &mut dyn Write) -> Result<()> {
    let sc = Scenario::resolve(&a.scenario)?;
    let dg = sc
        .datagen
        .as_ref()
        .ok_or_else(|| Error::invalid("scenario has no datagen section"))?;
    let n = a.trajectories.unwrap_or(dg.trajectories);
    let seed = a.seed.unwrap_or(dg.seed);
    let data = generate_pick_place(&sc.robot, &sc.grid, &dg.regions, n, seed)?;
    data.save(&a.out)?;
    writeln!(
        out,
        "trajectories={} samples={}",
        data.trajectory_count(),
        data.sample_count()
    )?;
    Ok(())
}
