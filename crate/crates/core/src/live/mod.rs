//! The real-time replanning simulator.
//!
//! A [`WorldState`] owns the simulated robot, the obstacle set and the
//! replan bookkeeping. Each [`WorldState::tick`] first runs a replan cycle if
//! one is due, then moves the robot along its trajectory at constant joint
//! speed. A replan cycle re-voxelizes the obstacles, re-blocks neurons,
//! searches and applies [`replan_decide`].
//!
//! Re-anchoring: every cycle the current path is trimmed to the part the
//! robot has not passed yet. The candidate compared against it starts at the
//! first node of that remainder, so in a static world both have equal length
//! and nothing is adopted twice. Whenever a path is actually adopted it is
//! searched from the BMU of the robot's current configuration, and a short
//! straight lead-in joins the robot to that neuron; the lead-in stays inside
//! the neuron's Voronoi cell, so its BMU is unblocked too.
//!
//! The robot keeps moving on the old trajectory while a replan is computed;
//! a failed replan without a usable current path makes it hold position.

mod protocol;
mod server;
mod snapshot;

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom;
use crate::kinematics::{interpolate, JointConfig, RobotModel};
use crate::lut::LookupTable;
use crate::obstacles::{voxelize_obstacles, Obstacle, ObstacleSet, VoxelSet};
use crate::planner::{replan_decide, search, smooth_validated, Decision, Path, ReplanState, SmoothedTrajectory};
use crate::scenario::{PlannerConfig, Scenario};
use crate::sonn::Network;

pub use protocol::{read_message, write_message, Message, MAX_FRAME};
pub use server::{port_from_env, serve, ServerHandle, PORT_ENV};
pub use snapshot::{decimate, rle_decode, rle_encode, BitmapMasks, ObstacleView, Snapshot, MAX_SNAPSHOT_SAMPLES};

/// Spacing of playback points along a trajectory (radians, infinity norm).
pub const PLAYBACK_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiveConfig {
    pub replan_period: f64,
    /// How long a shorter candidate must persist before it is adopted.
    pub stability_window: f64,
    /// Robot speed along its trajectory (radians per second).
    pub joint_speed: f64,
    /// Simulation step (seconds).
    pub tick: f64,
    /// Length of a headless replay (seconds).
    pub duration: f64,
    pub port: u16,
    /// Commands applied at given times during a replay.
    pub script: Vec<ScriptedCommand>,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            replan_period: 0.3,
            stability_window: 0.6,
            joint_speed: 1.0,
            tick: 0.05,
            duration: 10.0,
            port: 7878,
            script: Vec::new(),
        }
    }
}

impl LiveConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("replan_period", self.replan_period),
            ("joint_speed", self.joint_speed),
            ("tick", self.tick),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("live.{name} must be > 0")));
            }
        }
        if !(self.stability_window >= 0.0) || !(self.duration >= 0.0) {
            return Err(Error::invalid("live.stability_window and live.duration must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedCommand {
    pub at: f64,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    AddObstacle {
        obstacle: Obstacle,
    },
    /// Places the obstacle at `center` and drops its timeline.
    MoveObstacle {
        id: u32,
        #[serde(with = "crate::obstacles::point_serde")]
        center: [f64; 3],
    },
    RemoveObstacle {
        id: u32,
    },
    SetGoal {
        goal: JointConfig,
    },
    /// Stops robot motion; replanning continues.
    Pause,
    Resume,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionKind {
    Adopt,
    Keep,
    Fail,
}

/// Outcome of one replan cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub decision: DecisionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Hops of the path followed after the decision (0 without a path).
    pub hops: usize,
    pub path_length: f64,
    pub smoothing_degree: usize,
    pub blocked: usize,
    /// Blocking + search + decision, in seconds.
    pub plan_time_s: f64,
    pub smooth_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventKind {
    Decision(DecisionRecord),
    CommandApplied { command: Command },
    CommandRejected { command: Command, error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Simulated world driven by the replan loop.
#[derive(Debug, Clone)]
pub struct WorldState {
    net: Arc<Network>,
    lut: Arc<LookupTable>,
    model: RobotModel,
    planner: PlannerConfig,
    config: LiveConfig,
    pub time: f64,
    pub robot_config: JointConfig,
    pub goal: JointConfig,
    pub obstacles: ObstacleSet,
    pub occupied: VoxelSet,
    pub replan: ReplanState,
    pub paused: bool,
    /// Index of the current playback point.
    pub cursor: usize,
    cycles: u64,
    installed: Option<Path>,
    playback: Vec<JointConfig>,
    /// Path node each playback point has last passed.
    playback_hop: Vec<usize>,
    travel: f64,
    last_decision: Option<DecisionRecord>,
    events: Vec<Event>,
}

impl WorldState {
    /// World at time 0 with the robot at the scenario start. The lookup table
    /// must have been built for `net`.
    pub fn new(scenario: &Scenario, net: Arc<Network>, lut: Arc<LookupTable>) -> Result<Self> {
        lut.check_network(&net)?;
        scenario.robot.check_dimension(&scenario.start)?;
        if net.dim() != scenario.robot.joint_count() {
            return Err(Error::DimensionMismatch {
                expected: scenario.robot.joint_count(),
                actual: net.dim(),
            });
        }
        scenario.live.validate()?;
        let n = net.len();
        Ok(WorldState {
            model: scenario.robot.clone(),
            planner: scenario.planner.clone(),
            config: scenario.live.clone(),
            time: 0.0,
            robot_config: scenario.start.clone(),
            goal: scenario.goal.clone(),
            obstacles: scenario.obstacles.clone(),
            occupied: VoxelSet::new(),
            replan: ReplanState::new(n),
            paused: false,
            cursor: 0,
            cycles: 0,
            installed: None,
            playback: Vec::new(),
            playback_hop: Vec::new(),
            travel: 0.0,
            last_decision: None,
            events: Vec::new(),
            net,
            lut,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn lookup(&self) -> &LookupTable {
        &self.lut
    }

    pub fn model(&self) -> &RobotModel {
        &self.model
    }

    pub fn config(&self) -> &LiveConfig {
        &self.config
    }

    pub fn last_decision(&self) -> Option<&DecisionRecord> {
        self.last_decision.as_ref()
    }

    /// Trajectory currently played back (lead-in included).
    pub fn playback(&self) -> &[JointConfig] {
        &self.playback
    }

    pub fn smoothed(&self) -> Option<&SmoothedTrajectory> {
        self.replan.current_smoothed.as_ref()
    }

    /// Whether the robot stands at the end of its trajectory.
    pub fn arrived(&self) -> bool {
        !self.playback.is_empty() && self.cursor + 1 == self.playback.len()
    }

    /// Events emitted since the last call.
    pub fn drain_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }

    fn next_replan_at(&self) -> f64 {
        self.cycles as f64 * self.config.replan_period
    }

    /// Runs a replan cycle if due, then advances motion and time by `dt`.
    pub fn tick(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("tick length must be > 0, got {dt}")));
        }
        if self.time + 1e-9 >= self.next_replan_at() {
            self.replan_cycle();
            self.cycles += 1;
        }
        if !self.paused {
            self.advance(dt * self.config.joint_speed);
        }
        self.time += dt;
        Ok(())
    }

    fn advance(&mut self, distance: f64) {
        if self.playback.is_empty() {
            return;
        }
        self.travel += distance;
        while self.cursor + 1 < self.playback.len() {
            let seg = geom::distance(&self.playback[self.cursor], &self.playback[self.cursor + 1]);
            if self.travel + 1e-12 < seg {
                break;
            }
            self.travel -= seg;
            self.cursor += 1;
        }
        if self.cursor + 1 == self.playback.len() {
            self.travel = 0.0;
        }
        self.robot_config = self.playback[self.cursor].clone();
    }

    fn replan_cycle(&mut self) {
        let t0 = Instant::now();
        self.occupied = voxelize_obstacles(&self.obstacles, self.time, self.lut.grid());
        let blocked = self
            .lut
            .blocked_neurons(&self.occupied)
            .expect("voxels come from the table's own grid");
        let bmu_robot = self.net.bmu_unchecked(&self.robot_config);
        let bmu_goal = self.net.bmu_unchecked(&self.goal);
        self.replan.blocked = blocked;
        self.replan.bmu_start = bmu_robot;
        self.replan.bmu_goal = bmu_goal;

        let hop = self.playback_hop.get(self.cursor).copied().unwrap_or(0);
        self.replan.current_path = self
            .installed
            .as_ref()
            .filter(|p| p.goal() == bmu_goal)
            .map(|p| p.suffix(hop));
        let algo = self.planner.algorithm;
        let anchor = match &self.replan.current_path {
            Some(p) if !self.replan.current_collides() => p.start(),
            _ => bmu_robot,
        };
        let candidate = search(&self.net, algo, anchor, bmu_goal, &self.replan.blocked);
        let before = self.replan.clone();
        let mut decision = replan_decide(&mut self.replan, candidate, self.time, self.config.stability_window);
        if let Decision::Adopt { path, reason } = &decision {
            if path.start() != bmu_robot {
                match search(&self.net, algo, bmu_robot, bmu_goal, &self.replan.blocked) {
                    Ok(p) => {
                        self.replan.current_path = Some(p.clone());
                        decision = Decision::Adopt {
                            path: p,
                            reason: *reason,
                        };
                    }
                    Err(_) => {
                        self.replan = before;
                        decision = Decision::KeepCurrent;
                    }
                }
            }
        }
        let plan_time_s = t0.elapsed().as_secs_f64();

        let t1 = Instant::now();
        let (kind, reason) = match &decision {
            Decision::Adopt { path, reason } => {
                self.install(path.clone());
                (DecisionKind::Adopt, Some(reason.to_string()))
            }
            Decision::KeepCurrent => (DecisionKind::Keep, None),
            Decision::Fail { reason } => {
                self.installed = None;
                self.playback.clear();
                self.playback_hop.clear();
                self.cursor = 0;
                self.travel = 0.0;
                (DecisionKind::Fail, Some(reason.clone()))
            }
        };
        let smooth_time_s = if kind == DecisionKind::Adopt {
            t1.elapsed().as_secs_f64()
        } else {
            0.0
        };
        let record = DecisionRecord {
            decision: kind,
            reason,
            hops: self.installed.as_ref().map_or(0, Path::hop_count),
            path_length: self.installed.as_ref().map_or(0.0, Path::cspace_length),
            smoothing_degree: self.replan.current_smoothed.as_ref().map_or(0, |s| s.degree),
            blocked: self.replan.blocked.len(),
            plan_time_s,
            smooth_time_s,
        };
        self.last_decision = Some(record.clone());
        self.events.push(Event {
            time: self.time,
            kind: EventKind::Decision(record),
        });
    }

    fn install(&mut self, path: Path) {
        let sph = self.planner.samples_per_hop.max(1);
        let smoothed = if self.planner.smoothing_degree > 0 && path.hop_count() > 0 {
            smooth_validated(
                &path,
                &self.net,
                &self.replan.blocked,
                self.planner.smoothing_degree,
                sph,
            )
            .unwrap_or_else(|_| SmoothedTrajectory::unsmoothed(&path))
        } else {
            SmoothedTrajectory::unsmoothed(&path)
        };
        let per_hop = smoothed.samples_per_hop;
        let mut playback = Vec::new();
        let mut hops = Vec::new();
        let lead_in = interpolate(&self.robot_config, &smoothed.samples[0], PLAYBACK_STEP).expect("same dimension");
        let lead_len = lead_in.len() - 1;
        playback.extend(lead_in.into_iter().take(lead_len));
        hops.resize(lead_len, 0);
        for (s, w) in smoothed.samples.windows(2).enumerate() {
            let seg = interpolate(&w[0], &w[1], PLAYBACK_STEP).expect("same dimension");
            let n = seg.len() - 1;
            playback.extend(seg.into_iter().take(n));
            hops.extend(std::iter::repeat_n(s / per_hop, n));
        }
        playback.push(smoothed.samples.last().expect("non-empty").clone());
        hops.push((smoothed.samples.len() - 1) / per_hop);

        self.replan.current_smoothed = Some(smoothed);
        self.installed = Some(path);
        self.playback = playback;
        self.playback_hop = hops;
        self.cursor = 0;
        self.travel = 0.0;
        self.robot_config = self.playback[0].clone();
    }

    /// Applies a command; it takes effect at the next replan cycle. Rejected
    /// commands leave the state untouched and emit an error event.
    pub fn apply_command(&mut self, cmd: Command) -> Result<()> {
        let result = self.try_apply(&cmd);
        let kind = match &result {
            Ok(()) => EventKind::CommandApplied { command: cmd },
            Err(e) => EventKind::CommandRejected {
                command: cmd,
                error: e.to_string(),
            },
        };
        self.events.push(Event { time: self.time, kind });
        result
    }

    fn try_apply(&mut self, cmd: &Command) -> Result<()> {
        match cmd {
            Command::AddObstacle { obstacle } => {
                obstacle.validate()?;
                if self.obstacles.get(obstacle.id).is_some() {
                    return Err(Error::invalid(format!("obstacle {} already exists", obstacle.id)));
                }
                self.obstacles.obstacles.push(obstacle.clone());
            }
            Command::MoveObstacle { id, center } => {
                let o = self
                    .obstacles
                    .get_mut(*id)
                    .ok_or_else(|| Error::invalid(format!("unknown obstacle {id}")))?;
                o.center = *center;
                o.timeline.clear();
            }
            Command::RemoveObstacle { id } => {
                let before = self.obstacles.len();
                self.obstacles.obstacles.retain(|o| o.id != *id);
                if self.obstacles.len() == before {
                    return Err(Error::invalid(format!("unknown obstacle {id}")));
                }
            }
            Command::SetGoal { goal } => {
                self.model.check_limits(goal)?;
                self.goal = goal.clone();
            }
            Command::Pause => self.paused = true,
            Command::Resume => self.paused = false,
        }
        Ok(())
    }

    /// Current state as a wire message payload.
    pub fn snapshot(&self) -> Snapshot {
        Snapshot::capture(self)
    }
}

/// Runs the scenario headlessly for `live.duration` seconds, applying its
/// scripted commands at tick boundaries, and returns the event log.
pub fn replay(scenario: &Scenario, net: Arc<Network>, lut: Arc<LookupTable>) -> Result<Vec<Event>> {
    let mut world = WorldState::new(scenario, net, lut)?;
    let mut script = scenario.live.script.clone();
    script.sort_by(|a, b| a.at.total_cmp(&b.at));
    let mut script = script.into_iter().peekable();
    let dt = scenario.live.tick;
    let steps = (scenario.live.duration / dt - 1e-9).ceil() as usize;
    let mut log = Vec::new();
    for _ in 0..steps {
        while let Some(s) = script.next_if(|s| s.at <= world.time + 1e-9) {
            // rejected commands are logged as events
            let _ = world.apply_command(s.command);
        }
        world.tick(dt)?;
        log.extend(world.drain_events());
    }
    Ok(log)
}
