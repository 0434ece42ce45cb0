//! Trains SOM, gamma-SOM and GNG maps on the pillar reach dataset and
//! compares their quantization error.

use cogmap::datagen::generate_pick_place;
use cogmap::scenario::Scenario;
use cogmap::sonn::{train, NetworkKind, TrainParams};

fn main() -> cogmap::Result<()> {
    let sc = Scenario::pillar();
    let dg = sc.datagen.as_ref().expect("pillar ships a datagen section");
    let data = generate_pick_place(&sc.robot, &sc.grid, &dg.regions, dg.trajectories, dg.seed)?;
    println!(
        "{} samples in {} trajectories",
        data.sample_count(),
        data.trajectory_count()
    );

    let params = TrainParams {
        target_neurons: 400,
        iterations: 60_000,
        ..TrainParams::default()
    };
    for kind in [NetworkKind::Som, NetworkKind::GammaSom, NetworkKind::Gng] {
        let net = train(kind, &data, &params, 1)?;
        println!(
            "{kind:<9} neurons={:<4} edges={:<5} qe={:.4}",
            net.len(),
            net.edges().len(),
            net.quantization_error(&data)?
        );
    }
    Ok(())
}
