//! Builds the voxel/neuron lookup table for the pillar map and blocks the
//! neurons behind a disc obstacle.

use cogmap::cli::train_for;
use cogmap::obstacles::{voxelize_obstacles, Obstacle, ObstacleSet};
use cogmap::scenario::Scenario;

fn main() -> cogmap::Result<()> {
    let sc = Scenario::pillar();
    let (net, lut) = train_for(&sc)?;
    lut.verify()?;
    println!("{} neurons, {} voxel associations", net.len(), lut.association_count());

    let hist = lut.coverage_histogram();
    let busiest = hist.iter().rposition(|&c| c > 0).unwrap_or(0);
    println!("largest pose footprint: {busiest} voxels");

    for radius in [0.1, 0.2, 0.4] {
        let disc = ObstacleSet::new(vec![Obstacle::sphere(1, [0.0, 1.2, 0.0], radius)])?;
        let occupied = voxelize_obstacles(&disc, 0.0, lut.grid());
        let blocked = lut.blocked_neurons(&occupied)?;
        println!(
            "disc r={radius}: {} voxels, {} blocked neurons",
            occupied.len(),
            blocked.len()
        );
    }
    Ok(())
}
