//! Plans around the pillar with both graph searches and prints the routes.

use cogmap::cli::train_for;
use cogmap::planner::{plan, SearchAlgorithm};
use cogmap::scenario::Scenario;

fn main() -> cogmap::Result<()> {
    let sc = Scenario::pillar();
    let (net, lut) = train_for(&sc)?;
    let occupied = sc.occupied_at(0.0);
    for algo in [SearchAlgorithm::Wavefront, SearchAlgorithm::Dijkstra] {
        let path = plan(&net, &lut, &sc.robot, &sc.start, &sc.goal, &occupied, algo)?;
        println!("{algo}: {} hops, {:.3} rad", path.hop_count(), path.cspace_length());
        for q in path.configs().iter().step_by(4) {
            println!("  [{:+.3}, {:+.3}]", q[0], q[1]);
        }
    }
    Ok(())
}
