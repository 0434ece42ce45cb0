//! Renders the cognitive map as an image: blocked neurons red, the planned
//! path blue, its endpoints green.

use cogmap::bitmap;
use cogmap::cli::train_for;
use cogmap::planner::{plan, SearchAlgorithm};
use cogmap::scenario::Scenario;

fn main() -> cogmap::Result<()> {
    let sc = Scenario::pillar();
    let (net, lut) = train_for(&sc)?;
    let occupied = sc.occupied_at(0.0);
    let blocked = lut.blocked_neurons(&occupied)?;
    let path = plan(
        &net,
        &lut,
        &sc.robot,
        &sc.start,
        &sc.goal,
        &occupied,
        SearchAlgorithm::Dijkstra,
    )?;
    let img = bitmap::render(&net, &blocked, path.neuron_ids(), &[path.start(), path.goal()]);
    let out = std::env::temp_dir().join("pillar_map.png");
    bitmap::save(&img, &out)?;
    println!("{}x{} -> {}", img.width(), img.height(), out.display());
    Ok(())
}
