//! Starts the live server in-process and talks to it over TCP the way a UI
//! would: read snapshots, push an obstacle, watch the planner react.

use std::io::BufReader;
use std::net::TcpStream;
use std::sync::Arc;

use cogmap::cli::train_for;
use cogmap::live::{read_message, serve, write_message, Command, EventKind, Message, WorldState};
use cogmap::obstacles::Obstacle;
use cogmap::scenario::Scenario;

fn main() -> cogmap::Result<()> {
    let sc = Scenario::pillar();
    let (net, lut) = train_for(&sc)?;
    let world = WorldState::new(&sc, Arc::new(net), Arc::new(lut))?;
    let server = serve(world, "127.0.0.1:0", Some(3.0))?;
    println!("listening on {}", server.local_addr());

    let stream = TcpStream::connect(server.local_addr())?;
    let mut tx = stream.try_clone()?;
    let mut rx = BufReader::new(stream);
    let mut sent = false;
    while let Some(msg) = read_message(&mut rx)? {
        match msg {
            Message::Snapshot(s) => {
                if !sent && s.time >= 1.0 {
                    let obstacle = Obstacle::sphere(9, [0.5, 1.0, 0.0], 0.15);
                    write_message(&mut tx, &Message::Command(Command::AddObstacle { obstacle }))?;
                    sent = true;
                }
                if ((s.time * 20.0).round() as u64).is_multiple_of(10) {
                    println!(
                        "t={:.2} q=[{:+.3}, {:+.3}] path={} blocked={}",
                        s.time,
                        s.robot_config[0],
                        s.robot_config[1],
                        s.path.len(),
                        s.blocked_count
                    );
                }
            }
            Message::Event(e) => match e.kind {
                EventKind::Decision(d) if d.reason.is_some() => {
                    println!("t={:.2} {:?} ({})", e.time, d.decision, d.reason.unwrap_or_default())
                }
                EventKind::CommandApplied { command } => println!("t={:.2} applied {command:?}", e.time),
                _ => {}
            },
            Message::Error { message } => println!("server error: {message}"),
            Message::Command(_) => {}
        }
    }
    server.join()?;
    Ok(())
}
