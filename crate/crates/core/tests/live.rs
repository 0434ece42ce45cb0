mod common;

use std::io::BufReader;
use std::net::TcpStream;
use std::sync::Arc;
use std::time::Duration;

use cogmap::kinematics::JointConfig;
use cogmap::live::{
    read_message, replay, serve, write_message, Command, DecisionKind, DecisionRecord, Event, EventKind, Message,
    ScriptedCommand, Snapshot, WorldState,
};
use cogmap::obstacles::Obstacle;
use cogmap::scenario::Scenario;
use common::{obstacle_on_path, pillar_map, reference_map};

fn world() -> WorldState {
    let (sc, net, lut) = pillar_map();
    WorldState::new(sc, Arc::new(net.clone()), Arc::new(lut.clone())).unwrap()
}

fn decisions(events: &[Event]) -> Vec<(f64, &DecisionRecord)> {
    events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::Decision(d) => Some((e.time, d)),
            _ => None,
        })
        .collect()
}

fn run(w: &mut WorldState, seconds: f64) -> Vec<Event> {
    let dt = w.config().tick;
    let mut log = Vec::new();
    for _ in 0..(seconds / dt).round() as usize {
        w.tick(dt).unwrap();
        log.extend(w.drain_events());
    }
    log
}

#[test]
fn static_world_adopts_once_and_converges() {
    let (sc, net, lut) = pillar_map();
    let events = replay(sc, Arc::new(net.clone()), Arc::new(lut.clone())).unwrap();
    let d = decisions(&events);
    assert!(d.len() > 20);
    assert_eq!(d[0].1.decision, DecisionKind::Adopt);
    assert_eq!(d[0].1.reason.as_deref(), Some("no_previous"));
    assert!(d[1..].iter().all(|(_, r)| r.decision == DecisionKind::Keep));

    let mut w = world();
    run(&mut w, 12.0);
    assert!(w.arrived());
    let goal = net.weight(net.best_matching_unit(&sc.goal).unwrap());
    let err = w
        .robot_config
        .iter()
        .zip(goal)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{err}");
    run(&mut w, 1.0);
    let again = w
        .robot_config
        .iter()
        .zip(goal)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(again < 1e-6);
}

#[test]
fn obstacle_on_path_forces_collision_replan() {
    let mut w = world();
    run(&mut w, 0.4);
    let o = obstacle_on_path(&w, 7);
    let inserted = w.time;
    w.apply_command(Command::AddObstacle { obstacle: o }).unwrap();
    let period = w.config().replan_period;
    let mut adopted = None;
    let dt = w.config().tick;
    while w.time < inserted + 6.0 {
        w.tick(dt).unwrap();
        for e in w.drain_events() {
            if let EventKind::Decision(d) = &e.kind {
                if adopted.is_none() && d.decision == DecisionKind::Adopt {
                    assert_eq!(d.reason.as_deref(), Some("collision"));
                    adopted = Some(e.time);
                }
            }
        }
        if adopted.is_some() {
            // every later configuration maps to a neuron that is free now
            let bmu = w.network().best_matching_unit(&w.robot_config).unwrap();
            let blocked = w.lookup().blocked_neurons(&w.occupied).unwrap();
            assert!(!blocked.contains(bmu), "t={} bmu {bmu} blocked", w.time);
        }
    }
    let at = adopted.expect("an adopt after the insertion");
    assert!(
        at - inserted <= period + 1e-9,
        "adopted {:.2}s after insertion",
        at - inserted
    );
}

#[test]
fn removal_waits_for_stability_window() {
    let mut w = world();
    run(&mut w, 0.4);
    let o = obstacle_on_path(&w, 7);
    w.apply_command(Command::AddObstacle { obstacle: o }).unwrap();
    run(&mut w, 0.6);
    let removed = w.time;
    w.apply_command(Command::RemoveObstacle { id: 7 }).unwrap();
    let window = w.config().stability_window;
    let log = run(&mut w, 3.0);
    let shorter: Vec<f64> = decisions(&log)
        .into_iter()
        .filter(|(_, d)| d.reason.as_deref() == Some("shorter"))
        .map(|(t, _)| t)
        .collect();
    assert!(!shorter.is_empty(), "no shorter path adopted after removal");
    assert!(
        shorter[0] - removed >= window - 1e-9,
        "adopted after {:.2}s",
        shorter[0] - removed
    );
}

#[test]
fn commands_apply_at_the_next_cycle() {
    let mut w = world();
    run(&mut w, 0.5);
    let before = w.occupied.clone();
    let o = Obstacle::sphere(42, [0.0, 1.6, 0.0], 0.2);
    w.apply_command(Command::AddObstacle { obstacle: o }).unwrap();
    assert_eq!(w.occupied, before);
    run(&mut w, 0.3);
    assert!(w.occupied.len() > before.len());
    w.apply_command(Command::RemoveObstacle { id: 42 }).unwrap();
    run(&mut w, 0.3);
    assert_eq!(w.occupied, before);
}

#[test]
fn unknown_obstacle_is_rejected() {
    let mut w = world();
    run(&mut w, 0.5);
    let obstacles = w.obstacles.clone();
    let (cfg, time) = (w.robot_config.clone(), w.time);
    for cmd in [
        Command::MoveObstacle {
            id: 99,
            center: [0.0; 3],
        },
        Command::RemoveObstacle { id: 99 },
    ] {
        assert!(w.apply_command(cmd.clone()).is_err());
        let ev = w.drain_events();
        assert!(matches!(&ev[..], [Event { kind: EventKind::CommandRejected { command, .. }, .. }] if *command == cmd));
    }
    assert_eq!(w.obstacles, obstacles);
    assert_eq!((w.robot_config.clone(), w.time), (cfg, time));
    let dup = Obstacle::sphere(1, [0.0; 3], 0.1);
    assert!(w.apply_command(Command::AddObstacle { obstacle: dup }).is_err());
    assert!(w
        .apply_command(Command::SetGoal {
            goal: JointConfig(vec![9.0, 0.0])
        })
        .is_err());
    assert_eq!(w.obstacles, obstacles);
}

#[test]
fn set_goal_reanchors() {
    let mut w = world();
    run(&mut w, 1.0);
    let goal = JointConfig(vec![-0.9, -1.2]);
    w.apply_command(Command::SetGoal { goal: goal.clone() }).unwrap();
    let log = run(&mut w, 0.3);
    let want = w.network().best_matching_unit(&goal).unwrap();
    assert_eq!(w.replan.bmu_goal, want);
    assert_eq!(w.replan.current_path.as_ref().unwrap().goal(), want);
    assert!(decisions(&log).iter().any(|(_, d)| d.decision == DecisionKind::Adopt));
}

#[test]
fn pause_holds_position() {
    let mut w = world();
    run(&mut w, 0.5);
    w.apply_command(Command::Pause).unwrap();
    let q = w.robot_config.clone();
    run(&mut w, 1.0);
    assert_eq!(w.robot_config, q);
    w.apply_command(Command::Resume).unwrap();
    run(&mut w, 0.3);
    assert_ne!(w.robot_config, q);
}

#[test]
fn scripted_replay_log() {
    let (base, net, lut) = pillar_map();
    let mut sc = base.clone();
    sc.live.script = vec![
        ScriptedCommand {
            at: 2.0,
            command: Command::AddObstacle {
                obstacle: Obstacle::sphere(9, [0.2, 1.5, 0.0], 0.2),
            },
        },
        ScriptedCommand {
            at: 3.0,
            command: Command::RemoveObstacle { id: 77 },
        },
    ];
    let events = replay(&sc, Arc::new(net.clone()), Arc::new(lut.clone())).unwrap();
    assert!(events.windows(2).all(|w| w[0].time <= w[1].time));
    assert!(events
        .iter()
        .any(|e| matches!(e.kind, EventKind::CommandRejected { .. })));
    let again = replay(&sc, Arc::new(net.clone()), Arc::new(lut.clone())).unwrap();
    let strip = |ev: &[Event]| -> Vec<String> {
        ev.iter()
            .map(|e| match &e.kind {
                EventKind::Decision(d) => format!("{} {:?} {:?} {}", e.time, d.decision, d.reason, d.hops),
                other => format!("{} {:?}", e.time, other),
            })
            .collect()
    };
    assert_eq!(strip(&events), strip(&again));
}

#[test]
fn snapshot_roundtrip_and_size() {
    let mut w = world();
    run(&mut w, 0.5);
    let msg = Message::Snapshot(Box::new(w.snapshot()));
    let text = serde_json::to_string(&msg).unwrap();
    assert_eq!(serde_json::from_str::<Message>(&text).unwrap(), msg);

    let (sc, net, lut) = reference_map();
    let mut big = WorldState::new(sc, Arc::new(net.clone()), Arc::new(lut.clone())).unwrap();
    big.apply_command(Command::AddObstacle {
        obstacle: Obstacle::sphere(5, [-0.5, 1.2, 0.0], 0.3),
    })
    .unwrap();
    run(&mut big, 0.5);
    let snap: Snapshot = big.snapshot();
    assert!(snap.blocked_count > 0 && !snap.path.is_empty());
    let frame = Message::Snapshot(Box::new(snap)).to_frame().unwrap();
    assert!(frame.len() < 64 * 1024, "{} bytes", frame.len());
}

#[test]
fn tcp_round_trip() {
    let w = world();
    let server = serve(w, "127.0.0.1:0", None).unwrap();
    let stream = TcpStream::connect(server.local_addr()).unwrap();
    stream.set_read_timeout(Some(Duration::from_secs(10))).unwrap();
    let mut tx = stream.try_clone().unwrap();
    let mut rx = BufReader::new(stream);

    let add = Command::AddObstacle {
        obstacle: Obstacle::sphere(3, [0.0, 1.6, 0.0], 0.2),
    };
    write_message(&mut tx, &Message::Command(add.clone())).unwrap();
    write_message(&mut tx, &Message::Command(Command::RemoveObstacle { id: 99 })).unwrap();
    let (mut applied, mut error, mut seen_obstacle) = (false, false, false);
    for _ in 0..400 {
        match read_message(&mut rx).unwrap().expect("stream open") {
            Message::Event(Event {
                kind: EventKind::CommandApplied { command },
                ..
            }) if command == add => applied = true,
            Message::Error { .. } => error = true,
            Message::Snapshot(s) => seen_obstacle |= s.obstacles.iter().any(|o| o.id == 3),
            _ => {}
        }
        if applied && error && seen_obstacle {
            break;
        }
    }
    assert!(applied && error && seen_obstacle);
    let fin = server.stop().unwrap();
    assert!(fin.obstacles.get(3).is_some());
}

#[test]
fn bundled_scenario_runs_headless() {
    let sc = Scenario::pillar();
    assert!((sc.live.replan_period - 0.3).abs() < 1e-12);
    sc.live.validate().unwrap();
}
