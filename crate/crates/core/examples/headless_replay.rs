//! Replays the pillar scenario with a disc dropped onto the arm's route and
//! removed again, printing every replan decision.

use std::sync::Arc;

use cogmap::cli::train_for;
use cogmap::live::{replay, Command, EventKind, ScriptedCommand};
use cogmap::obstacles::Obstacle;
use cogmap::scenario::Scenario;

fn main() -> cogmap::Result<()> {
    let mut sc = Scenario::pillar();
    let (net, lut) = train_for(&sc)?;
    sc.live.script = vec![
        ScriptedCommand {
            at: 1.0,
            command: Command::AddObstacle {
                obstacle: Obstacle::sphere(2, [0.5, 1.0, 0.0], 0.15),
            },
        },
        ScriptedCommand {
            at: 2.0,
            command: Command::RemoveObstacle { id: 2 },
        },
    ];
    for e in replay(&sc, Arc::new(net), Arc::new(lut))? {
        match e.kind {
            EventKind::Decision(d) => println!(
                "{:5.2}s {:?} {} hops={} len={:.3} blocked={}",
                e.time,
                d.decision,
                d.reason.unwrap_or_default(),
                d.hops,
                d.path_length,
                d.blocked
            ),
            other => println!("{:5.2}s {other:?}", e.time),
        }
    }
    Ok(())
}
